use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use afqms_core::acceptance::{self, AcceptanceConfig};
use afqms_core::algebra::{spectral, stream_rng, Measure, SpectralNorm};
use afqms_core::format::{kernel_from_json, measure_from_json, to_json};
use afqms_core::quantum_metric::{build_eps_net, multiplier, multiplier_apply, qgh_bound, Stratification};
use afqms_core::report::{analyze, beta_csv, seeded_kernel, DiagramSummary, MkReport, NetReport, RunConfig, VERSION};
use afqms_core::transport::{self, mk_lower_bound};
use afqms_core::{BrattelDiagram, Error, TruncatedGroupoid, UnitUltrametric};

#[derive(Parser)]
#[command(name = "afqms", version, about = "Quantum metrics on AF groupoids of Bratteli diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a diagram
    Check(Common),
    /// Norms and seminorms of a kernel as JSON
    Analyze(AnalyzeArgs),
    /// The quantum GH bound as a CSV table
    Bound(BoundArgs),
    /// Summary of the ε-net of a seminorm ball as JSON
    Net(NetArgs),
    /// Monge–Kantorovič lower bound between two measures as JSON
    Mk(MkArgs),
    /// Run the acceptance suite
    Accept(AcceptArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Diagram file, or one of the built-ins `car` and `full2`
    #[arg(long, default_value = "car")]
    diagram: String,
    /// Truncation depth D (built-ins are generated with exactly D levels)
    #[arg(long, default_value_t = 4)]
    resolution: usize,
    /// Base of the unit-space ultrametric, in (0,1)
    #[arg(long, default_value_t = 0.5)]
    base: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores
    #[arg(long, env = "AFQMS_THREADS")]
    threads: Option<usize>,
    /// Spectral norm backend: auto, dense or power[:tol]
    #[arg(long, default_value = "auto")]
    spectral: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Kernel JSON file; a seeded random kernel at --level otherwise
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Level m of the seeded random kernel
    #[arg(long, default_value_t = 2)]
    level: usize,
    /// Highest commutator order n
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Multiplier applied before analysis: identity, truncation:m or plateau:t
    #[arg(long)]
    multiplier: Option<String>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    common: Common,
    /// Range of m, as `a..b` (inclusive) or a single value
    #[arg(long, default_value = "1..3")]
    m_range: String,
    /// Deepest level summed exactly; the resolution by default
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Args)]
struct NetArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Radius t of the ball E[t]
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Measure JSON used to centre the ball; uniform otherwise
    #[arg(long)]
    measure: Option<PathBuf>,
}

#[derive(Args)]
struct MkArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// First measure JSON; seeded random otherwise
    #[arg(long)]
    measure_a: Option<PathBuf>,
    /// Second measure JSON; seeded random otherwise
    #[arg(long)]
    measure_b: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Reference transport solver: tree or lp[:cap]
    #[arg(long, default_value = "tree")]
    solver: String,
}

#[derive(Args)]
struct AcceptArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Multiplier on every pinned tolerance
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Criterion ids or slug fragments, comma separated or repeated
    #[arg(long, value_delimiter = ',')]
    filter: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "AFQMS_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Domain(Error),
    Io(String),
    Acceptance(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn init_threads(threads: Option<usize>) -> Outcome<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Domain(Error::Argument(e.to_string())))?;
    }
    Ok(())
}

fn diagram(c: &Common) -> Outcome<BrattelDiagram> {
    match c.diagram.as_str() {
        "car" if !Path::new("car").exists() => Ok(BrattelDiagram::car(c.resolution)),
        "full2" if !Path::new("full2").exists() => {
            Ok(BrattelDiagram::stationary(&[vec![1, 1], vec![1, 1]], c.resolution))
        }
        path => Ok(BrattelDiagram::parse(&read(Path::new(path))?)?),
    }
}

fn groupoid(c: &Common) -> Outcome<Arc<TruncatedGroupoid>> {
    let d = diagram(c)?;
    Ok(Arc::new(TruncatedGroupoid::new(d, c.resolution, UnitUltrametric::new(c.base)?)?))
}

fn backend(c: &Common) -> Outcome<Box<dyn SpectralNorm>> {
    Ok(spectral::registry().create(&c.spectral)?)
}

fn parse_range(s: &str) -> Outcome<(usize, usize)> {
    let bad = || Failure::Domain(Error::Argument(format!("cannot parse m range '{s}'")));
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(bad());
            }
            Ok((a, b))
        }
        None => parse(s).map(|m| (m, m)),
    }
}

fn check(c: &Common) -> Outcome<()> {
    let d = diagram(c)?;
    emit(&c.out, &to_json(&DiagramSummary::new(&d)))
}

fn analyze_cmd(a: &AnalyzeArgs) -> Outcome<()> {
    let c = &a.common;
    init_threads(c.threads)?;
    RunConfig {
        resolution: c.resolution,
        level: a.level,
        order: a.order,
        base: c.base,
        seed: c.seed,
    }
    .validate()?;
    let g = groupoid(c)?;
    let (mut f, seed) = match &a.kernel {
        Some(p) => (kernel_from_json(&g, &read(p)?)?, None),
        None => (seeded_kernel(&g, a.level, c.seed)?, Some(c.seed)),
    };
    if let Some(spec) = &a.multiplier {
        let phi = multiplier::registry().create(spec)?;
        f = multiplier_apply(phi.as_ref(), &f)?;
    }
    let report = analyze(&f, a.order, seed, backend(c)?.as_ref())?;
    emit(&c.out, &to_json(&report))
}

fn bound(b: &BoundArgs) -> Outcome<()> {
    let c = &b.common;
    let d = diagram(c)?;
    let (lo, hi) = parse_range(&b.m_range)?;
    let k_max = b.k_max.unwrap_or(c.resolution);
    let rows = (lo..=hi).map(|m| qgh_bound(&d, m, k_max)).collect::<afqms_core::Result<Vec<_>>>()?;
    emit(&c.out, &beta_csv(&rows))
}

fn net(n: &NetArgs) -> Outcome<()> {
    let c = &n.common;
    init_threads(c.threads)?;
    let g = groupoid(c)?;
    let mu = match &n.measure {
        Some(p) => measure_from_json(&g, &read(p)?)?,
        None => Measure::uniform(&g),
    };
    let s = Stratification::new(&g);
    let net = build_eps_net(&g, &s, n.order, n.radius, &mu, n.eps)?;
    let report = NetReport {
        version: VERSION,
        base: c.base,
        resolution: c.resolution,
        order: n.order,
        radius: n.radius,
        net: net.summary(),
    };
    emit(&c.out, &to_json(&report))
}

fn mk(m: &MkArgs) -> Outcome<()> {
    let c = &m.common;
    init_threads(c.threads)?;
    let g = groupoid(c)?;
    let load = |p: &Option<PathBuf>, stream| -> Outcome<Measure> {
        match p {
            Some(p) => Ok(measure_from_json(&g, &read(p)?)?),
            None => Ok(Measure::random(&g, &mut stream_rng(c.seed, stream))),
        }
    };
    let (a, b) = (load(&m.measure_a, 1)?, load(&m.measure_b, 2)?);
    let solver = transport::registry().create(&m.solver)?;
    let s = Stratification::new(&g);
    let est = mk_lower_bound(&g, &s, m.order, &a, &b, m.iters, c.seed, backend(c)?.as_ref())?;
    let report = MkReport {
        version: VERSION,
        base: c.base,
        resolution: c.resolution,
        order: m.order,
        seed: c.seed,
        solver: solver.name(),
        transport: solver.distance(&g, &a, &b)?,
        mk: est,
    };
    emit(&c.out, &to_json(&report))
}

fn accept(a: &AcceptArgs) -> Outcome<()> {
    init_threads(a.threads)?;
    let config = AcceptanceConfig {
        seed: a.seed,
        tolerance_scale: a.tolerance_scale,
        filter: a.filter.clone(),
    };
    let mut text = String::new();
    let mut failed = 0;
    for c in acceptance::criteria().iter().filter(|c| c.matches(&config.filter)) {
        let o = c.run(&config);
        let line = o.to_string();
        if a.out.is_some() {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
        text.push_str(&line);
        text.push('\n');
        failed += usize::from(!o.passed);
    }
    if let Some(p) = &a.out {
        emit(&Some(p.clone()), &text)?;
    }
    if failed > 0 {
        return Err(Failure::Acceptance(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(c) => check(c),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Bound(b) => bound(b),
        Command::Net(n) => net(n),
        Command::Mk(m) => mk(m),
        Command::Accept(a) => accept(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Acceptance(n)) => {
            eprintln!("{n} acceptance criteria failed");
            ExitCode::from(3)
        }
    }
}
