//! Quantum-metric data of AF groupoids at finite truncation depth.

pub mod acceptance;
pub mod algebra;
pub mod bratteli;
pub mod error;
pub mod format;
pub mod groupoid;
pub mod oracle;
pub mod quantum_metric;
pub mod registry;
pub mod report;
pub mod transport;

pub use bratteli::{BrattelDiagram, PathCountTable, Vertex};
pub use error::{Error, Result};
pub use groupoid::{ElementClass, FinitePath, PathId, TruncatedGroupoid, UnitUltrametric};
