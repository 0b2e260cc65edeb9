//! Stratified Lipschitz and commutator seminorms, multipliers, ε-nets and the
//! quantum Gromov–Hausdorff bound.

pub mod approximation;
pub mod ball;
pub mod bound;
pub mod lipschitz;
pub mod multiplier;
pub mod net;
pub mod roe;
pub mod seminorm;
pub mod stratification;

pub use approximation::{approximation_gap, gap_over, ApproximationGap};
pub use ball::{sample_ball, BallSampler};
pub use bound::{beta_partial, qgh_bound, BetaBound};
pub use lipschitz::{lipschitz_seminorm, lipschitz_witness, LipschitzWitness};
pub use multiplier::{
    multiplier_apply, plateau, verify_intertwining, Identity, Multiplier, Plateau, Tabulated, Truncation,
};
pub use net::{build_eps_net, EpsNet, NetSummary};
pub use roe::{commutator_seminorm, delta_n, RoeKernel};
pub use seminorm::{slip_norm, total_seminorm, OrderValue, SeminormReport};
pub use stratification::{Stratification, Stratum, StratumSpec};
