//! Command-line experiment runner.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::affine::{self, AffineField, AffineLaw, PowerFraction};
use crate::error::{Error, Result};
use crate::fiber::{self, CircleCocycle, CircleStep, CoinCocycle, CocycleSystem, NormCocycle};
use crate::fields::PAdic;
use crate::harmonic::{self, FreeWord};
use crate::io::{f, i, read_header, verify_digest, Emission, Table};
use crate::linalg::growth::{Heisenberg, IntMatrixGroup, Lattice, DEFAULT_BUDGET};
use crate::linalg::{cayley_growth_degree, contraction_subgroup_padic, contraction_subgroup_real, eigen_structure_padic, eigen_structure_real, AnyMatrix, GrowthReport};
use crate::markov::MarkovSystem;
use crate::measures::{Binning, FiniteMeasure, Zk};
use crate::models;
use crate::projective::{self, Bump, Mat, PointedVector, ProjPoint, Vect};
use crate::rng::chain_rng;
use crate::transfer;
use crate::walk::{chung_fuchs, recurrence_classifier, ClassifierConfig, WalkConfig};

#[derive(Parser, Debug)]
#[command(name = "walklab", version, about = "Random walks on linear groups and homogeneous spaces", args_override_self = true)]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Flat JSON object of option values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Partial sums Σ_{k≤N} P{X_k = 0} of a lattice walk and the recurrence heuristic.
    Recur(RecurArgs),
    /// Cesàro invariant measure, ratio limits and return statistics of an affine walk.
    Markov(MarkovArgs),
    /// Stationary measure on ℙ¹ from backward products, with Lyapunov exponent.
    Furstenberg(FurstenbergArgs),
    /// Local limit scaling √n Pⁿψ(v) of the walk on V ∖ {0}.
    Llt(LltArgs),
    /// Excursions of log‖X_n v‖ for a zero-exponent walk.
    Oscillate(OscillateArgs),
    /// Discretized transfer operators P_t: leading eigenvalue k(t) and σ² = −k″(0).
    Spectrum(SpectrumArgs),
    /// Birkhoff sums of a cocycle over a compact base: drift and visit counts.
    Fiber(FiberArgs),
    /// Affine recursion x ↦ a x + b: visits, ladder epochs or a trajectory.
    Affine(AffineArgs),
    /// The free group ⟨a, b⟩ ⊂ SL(2, ℤ): abelianized walk, ν on ℙ¹ and singularity diagnostics.
    Harmonic(HarmonicArgs),
    /// Contraction subgroups, eigenvalue structure and Cayley-ball growth.
    Structure(StructureArgs),
    /// Checks the header digest of an emitted file and re-validates its config.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct RecurArgs {
    /// Z1, Z2, Z3 or Z4.
    #[arg(long, default_value = "Z2")]
    group: String,
    /// Step law; `simple` is uniform on ±e_i.
    #[arg(long, default_value = "simple")]
    measure: String,
    /// Horizon N.
    #[arg(long = "N", default_value_t = 1000)]
    #[serde(rename = "N")]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    chains: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.98)]
    r2_recurrent: f64,
    #[arg(long, default_value_t = 1e-3)]
    tail_increment: f64,
    #[arg(long, default_value_t = 2000)]
    tail_from: usize,
    #[arg(long, default_value_t = 100)]
    fit_from: usize,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct MarkovArgs {
    /// Law of a: `v1,v2,…` (uniform) or `v1:w1,…`.
    #[arg(long, default_value = "2,1/2", allow_hyphen_values = true)]
    a_law: String,
    #[arg(long, default_value = "1,-1", allow_hyphen_values = true)]
    b_law: String,
    /// cesaro, ratio or property-r.
    #[arg(long, default_value = "cesaro")]
    mode: String,
    /// Starting points (ratio mode uses all; the others use the first).
    #[arg(long, value_delimiter = ',', default_value = "0,3", allow_hyphen_values = true)]
    starts: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 1000)]
    chains: usize,
    /// Window half-widths for the mass table.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    windows: Vec<f64>,
    /// Half-width of the interval carrying φ in ratio mode.
    #[arg(long, default_value_t = 5.0)]
    phi_window: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct MeasureArgs {
    /// pair, rotation-dilation[:k], rotations[:k] or file:<json>.
    #[arg(long, default_value = "pair")]
    measure: String,
    /// none, auto (divide by e^{λ̂}) or a log-scale shift.
    #[arg(long, default_value = "none", allow_hyphen_values = true)]
    rescale: String,
    /// Steps and chains of the calibration run for `--rescale auto`.
    #[arg(long, default_value_t = 2000)]
    calib_n: usize,
    #[arg(long, default_value_t = 20_000)]
    calib_chains: usize,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct FurstenbergArgs {
    #[command(flatten)]
    #[serde(flatten)]
    m: MeasureArgs,
    /// Product length.
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    chains: usize,
    #[arg(long, default_value_t = 64)]
    bins: usize,
    /// Steps per chain of the Lyapunov estimate.
    #[arg(long, default_value_t = 500)]
    lyapunov_n: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct LltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    m: MeasureArgs,
    #[serde(rename = "n")]
    #[arg(long = "n", value_delimiter = ',', default_value = "1000,2000")]
    ns: Vec<usize>,
    /// Start directions (angles); start vectors have norm one.
    #[arg(long, value_delimiter = ',', default_value = "0,0.9273")]
    starts: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, default_value_t = 2.5)]
    width: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = 20_000)]
    chains: usize,
    /// Transfer-operator grid for σ².
    #[arg(long, default_value_t = 256)]
    bins: usize,
    /// Chains of the ν̂ sample used for (ν̂ ⊗ l)(ψ).
    #[arg(long, default_value_t = 20_000)]
    nu_chains: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct OscillateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    m: MeasureArgs,
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    #[arg(long, default_value_t = 200)]
    chains: usize,
    #[arg(long, default_value_t = 5.0)]
    level: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    start: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    m: MeasureArgs,
    #[arg(long, default_value_t = 128)]
    bins: usize,
    #[serde(rename = "t")]
    #[arg(long = "t", value_delimiter = ',', default_value = "0,0.5,1,2", allow_hyphen_values = true)]
    ts: Vec<f64>,
    /// Finite-difference step for k″(0).
    #[arg(long, default_value_t = transfer::DEFAULT_H)]
    h: f64,
    /// Needed only with `--rescale auto`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct FiberArgs {
    /// coin, coin-drift:<d>, circle or norm-pair.
    #[arg(long, default_value = "coin")]
    system: String,
    #[arg(long, value_delimiter = ',', default_value = "-1,1", allow_hyphen_values = true)]
    interval: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    #[arg(long, default_value_t = 100)]
    chains: usize,
    /// Fiber coordinate at time 0.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    start: f64,
    #[arg(long, default_value_t = 100)]
    min_visits: u64,
    /// Spot checks of the cocycle identity.
    #[arg(long, default_value_t = 1000)]
    checks: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct AffineArgs {
    /// real or padic:<p>.
    #[arg(long, default_value = "real")]
    field: String,
    #[arg(long, default_value = "2,1/2", allow_hyphen_values = true)]
    a_law: String,
    #[arg(long, default_value = "1,-1", allow_hyphen_values = true)]
    b_law: String,
    /// visits, ladder or trajectory.
    #[arg(long, default_value = "visits")]
    mode: String,
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    #[arg(long, default_value_t = 100)]
    chains: usize,
    /// Real window [−L, L]; p-adic ball |x| ≤ p^L (L integer).
    #[arg(long, default_value_t = 10.0)]
    window: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    start: String,
    #[arg(long, default_value_t = 50)]
    min_visits: u64,
    /// Ladder tail-trend range.
    #[arg(long, value_delimiter = ',', default_value = "10,1000")]
    trend_range: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct HarmonicArgs {
    /// uniform4 or file:<path> (one word per line, optional `:weight`).
    #[arg(long, default_value = "uniform4")]
    measure: String,
    #[arg(long, default_value_t = 10_000)]
    chains: usize,
    /// Product length for ν̂.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    bins: usize,
    /// Deepest dyadic level.
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 2000)]
    refs: usize,
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    #[arg(long, default_value_t = 0.1)]
    r_max: f64,
    #[arg(long, default_value_t = 8)]
    scales: usize,
    /// Singular-consistent threshold on the mean local dimension.
    #[arg(long, default_value_t = 0.99)]
    dim_threshold: f64,
    /// Horizon and chains of the abelianized walk.
    #[arg(long, default_value_t = 10_000)]
    abel_horizon: usize,
    #[arg(long, default_value_t = 2000)]
    abel_chains: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct StructureArgs {
    #[command(subcommand)]
    #[serde(flatten)]
    what: StructureCommand,
}

#[derive(Subcommand, Debug, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "kebab-case")]
enum StructureCommand {
    /// Contracting directions of Ad(g) and the module Δ(g).
    Contraction(MatrixArgs),
    /// Eigenvalue moduli (real) or Newton-polygon valuations (p-adic).
    Eigen(MatrixArgs),
    /// Ball sizes |B_n| in a Cayley graph and the fitted growth degree.
    Growth(GrowthArgs),
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct MatrixArgs {
    /// CSV grid with a `field,real` or `field,padic,<p>[,N]` header.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Inline rows `a,b;c,d` (with `--field`).
    #[arg(long, allow_hyphen_values = true)]
    entries: Option<String>,
    #[arg(long, default_value = "real")]
    field: String,
    #[arg(long, default_value_t = crate::linalg::contraction::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct GrowthArgs {
    /// Z<k>, heisenberg or matrices:<json file of integer matrices>.
    #[arg(long, default_value = "Z2")]
    group: String,
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Args, Debug, Serialize, Deserialize)]
struct VerifyArgs {
    file: PathBuf,
}

/// Exit code for an error: 2 for hypothesis violations, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Hypothesis(_) | Error::NoReturns | Error::Defective(_) | Error::NonConvergence { .. } | Error::Singular => 2,
        _ => 1,
    }
}

const SUBCOMMANDS: &[&str] = &[
    "recur", "markov", "furstenberg", "llt", "oscillate", "spectrum", "fiber", "affine", "harmonic", "structure", "verify",
];

/// Turns a flat JSON object into `--key value` arguments.
fn config_args(v: &Value) -> Result<Vec<OsString>> {
    let obj = v.as_object().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
    let mut out = Vec::new();
    for (k, val) in obj {
        let flag = OsString::from(format!("--{}", k.replace('_', "-")));
        match val {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(xs) => {
                let parts: Vec<String> = xs.iter().map(scalar_text).collect::<Result<_>>()?;
                out.push(flag);
                out.push(parts.join(",").into());
            }
            other => {
                out.push(flag);
                out.push(scalar_text(other)?.into());
            }
        }
    }
    Ok(out)
}

fn scalar_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::Config(format!("unsupported config value {v}"))),
    }
}

/// Splices `--config` file entries in right after the subcommand path.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::new();
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().to_string();
        if s == "--config" {
            config = Some(it.next().ok_or_else(|| Error::Config("--config needs a path".into()))?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = std::fs::read_to_string(&path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", PathBuf::from(&path).display())))?;
    let extra = config_args(&v)?;
    let pos = rest.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let Some(mut pos) = pos else { return Ok(rest) };
    if rest[pos] == "structure" && pos + 1 < rest.len() {
        pos += 1;
    }
    let mut out: Vec<OsString> = rest[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[pos + 1..]);
    Ok(out)
}

/// Runs the CLI on `args` (including the program name). Results go to `out`
/// (or `--output`), diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let code = match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{e}");
                    return if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 };
                }
                _ => 1,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.workers.unwrap_or(0)).build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: worker pool: {e}");
            return 1;
        }
    };
    let result = pool.install(|| dispatch(&cli.cmd));
    match result {
        Ok(Some(em)) => {
            let written = match &cli.output {
                Some(p) => std::fs::File::create(p).and_then(|mut fh| em.write(&mut fh)),
                None => em.write(out),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    1
                }
            }
        }
        Ok(None) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn need_seed(seed: Option<u64>, cmd: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidArgument(format!("`walklab {cmd}` is a Monte Carlo subcommand and requires --seed <u64>")))
}

fn emission(cmd: &Command, seed: Option<u64>) -> Emission {
    let config = serde_json::to_value(cmd).expect("arguments serialize");
    let name = config.get("command").and_then(Value::as_str).unwrap_or("unknown").to_string();
    Emission { command: name, seed, config, notes: Vec::new(), table: Table::default() }
}

fn dispatch(cmd: &Command) -> Result<Option<Emission>> {
    match cmd {
        Command::Recur(a) => recur(cmd, a).map(Some),
        Command::Markov(a) => markov(cmd, a).map(Some),
        Command::Furstenberg(a) => furstenberg(cmd, a).map(Some),
        Command::Llt(a) => llt(cmd, a).map(Some),
        Command::Oscillate(a) => oscillate(cmd, a).map(Some),
        Command::Spectrum(a) => spectrum(cmd, a).map(Some),
        Command::Fiber(a) => fiber_cmd(cmd, a).map(Some),
        Command::Affine(a) => affine_cmd(cmd, a).map(Some),
        Command::Harmonic(a) => harmonic_cmd(cmd, a).map(Some),
        Command::Structure(a) => structure(cmd, a).map(Some),
        Command::Verify(a) => verify(a).map(Some),
    }
}

fn recur(cmd: &Command, a: &RecurArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "recur")?;
    if a.measure != "simple" {
        return Err(Error::InvalidArgument(format!("unknown measure {:?}; supported: simple", a.measure)));
    }
    let cls = ClassifierConfig { r2_recurrent: a.r2_recurrent, tail_increment: a.tail_increment, tail_from: a.tail_from, fit_from: a.fit_from };
    fn go<const K: usize>(n: usize, chains: usize, seed: u64) -> Result<Vec<crate::walk::ChungFuchsRow>> {
        let cfg = WalkConfig::new(Zk::<K>::simple_walk(), Zk([0; K]), n, chains, seed)?;
        Ok(chung_fuchs(&cfg, &|x: &Zk<K>| x.0 == [0; K]))
    }
    let rows = match a.group.as_str() {
        "Z1" => go::<1>(a.n, a.chains, seed)?,
        "Z2" => go::<2>(a.n, a.chains, seed)?,
        "Z3" => go::<3>(a.n, a.chains, seed)?,
        "Z4" => go::<4>(a.n, a.chains, seed)?,
        g => return Err(Error::InvalidArgument(format!("unknown group {g:?}; supported: Z1..Z4"))),
    };
    let c = recurrence_classifier(&rows, &cls);
    let mut em = emission(cmd, Some(seed));
    em.note("verdict", serde_json::to_value(c.verdict)?.as_str().unwrap_or_default());
    em.note_f("log_fit_r2", c.log_fit_r2);
    em.note_f("log_fit_slope", c.log_fit_slope);
    em.note_f("doubling_ratio", c.doubling_ratio);
    em.note_f("tail_max", c.tail_max);
    em.table = Table::new(&["k", "estimate", "stderr", "running_sum", "running_stderr"]);
    for r in rows {
        em.table.push(vec![i(r.k), f(r.estimate), f(r.stderr), f(r.running_sum), f(r.running_stderr)]);
    }
    Ok(em)
}

fn critical_real_law(a_law: &str, b_law: &str) -> Result<(AffineLaw, affine::CriticalityReport)> {
    let law = AffineLaw::parse(a_law, b_law)?;
    let rep = affine::validate_critical(&law, AffineField::Real)?;
    Ok((law, rep))
}

fn markov(cmd: &Command, a: &MarkovArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "markov")?;
    let (law, _) = critical_real_law(&a.a_law, &a.b_law)?;
    let mu = law.real_measure()?;
    let x0 = *a.starts.first().ok_or_else(|| Error::InvalidArgument("--starts is empty".into()))?;
    let mut em = emission(cmd, Some(seed));
    match a.mode.as_str() {
        "cesaro" => {
            let r = affine::invariant_measure_affine(&mu, x0, &a.windows, a.horizon, a.chains, seed)?;
            em.note_f("defect", r.defect);
            for (((l, m), g), d) in r.windows.iter().zip(&r.window_masses).zip(&r.growth_ratios).zip(&r.growth_increments) {
                em.note(&format!("window_{}", f(*l)), format!("mass={} doubling_ratio={} doubling_increment={}", f(*m), f(*g), f(*d)));
            }
            em.table = Table::new(&["bin", "center", "mass"]);
            let reach = r.bin_width * r.masses.len() as f64 / 2.0;
            let grid = Binning::new(-reach, reach, r.masses.len());
            for (j, m) in r.masses.iter().enumerate() {
                em.table.push(vec![i(j), f(grid.center(j)), f(*m)]);
            }
        }
        "ratio" => {
            let checkpoints: Vec<usize> = (0..=10).map(|k| a.horizon * k / 10).filter(|&k| k > 0).collect();
            let r = affine::affine_ratio_equidistribution(&mu, &a.starts, a.phi_window, a.horizon, &checkpoints, a.chains, seed);
            em.note_f("spread", r.spread);
            em.table = Table::new(&["start", "n", "ratio"]);
            for (s, rs) in a.starts.iter().zip(&r.ratios) {
                for (n, v) in r.checkpoints.iter().zip(rs) {
                    em.table.push(vec![f(*s), i(n), v.map_or("nan".into(), f)]);
                }
            }
        }
        "property-r" => {
            let sys: MarkovSystem<affine::AffineMap<f64>, crate::fields::Wide> = MarkovSystem::new(mu);
            let starts: Vec<_> = a.starts.iter().map(|x| crate::fields::Wide::new(*x)).collect();
            let in_u = |x: &crate::fields::Wide| x.to_f64().abs() <= 1.0;
            let r = sys.property_r_test(&in_u, &starts, a.chains, a.horizon, seed);
            em.table = Table::new(&["return_fraction", "mean_visits", "common_return_fraction", "horizon"]);
            em.table.push(vec![f(r.return_fraction), f(r.mean_visits), f(r.common_return_fraction), i(r.horizon)]);
        }
        m => return Err(Error::InvalidArgument(format!("unknown mode {m:?}; supported: cesaro, ratio, property-r"))),
    }
    Ok(em)
}

#[derive(Deserialize)]
struct MatrixMeasureFile {
    atoms: Vec<[[f64; 2]; 2]>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

fn parse_k(s: &str, default: usize) -> Result<usize> {
    match s.split_once(':') {
        Some((_, k)) => k.parse().map_err(|_| Error::InvalidArgument(format!("bad count in {s:?}"))),
        None => Ok(default),
    }
}

/// Resolves `--measure`/`--rescale`; returns the law and the applied log shift.
fn resolve_measure(m: &MeasureArgs, seed: Option<u64>, cmd: &str) -> Result<(FiniteMeasure<Mat<2>>, f64)> {
    let base = if m.measure == "pair" {
        models::hyperbolic_pair(0.0)
    } else if m.measure.starts_with("rotation-dilation") {
        models::rotation_dilation(parse_k(&m.measure, 511)?)
    } else if m.measure.starts_with("rotations") {
        models::rotations(parse_k(&m.measure, 511)?)
    } else if let Some(p) = m.measure.strip_prefix("file:") {
        let text = std::fs::read_to_string(p)?;
        let file: MatrixMeasureFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{p}: {e}")))?;
        let atoms: Vec<Mat<2>> = file.atoms.iter().map(|r| Mat::<2>::new(r[0][0], r[0][1], r[1][0], r[1][1])).collect();
        match file.weights {
            Some(w) => FiniteMeasure::new(atoms, w)?,
            None => FiniteMeasure::uniform(atoms)?,
        }
    } else {
        return Err(Error::InvalidArgument(format!("unknown measure {:?}", m.measure)));
    };
    let shift = match m.rescale.as_str() {
        "none" => 0.0,
        "auto" => {
            let seed = need_seed(seed, cmd)?;
            let l = projective::lyapunov_estimate(&base, &ProjPoint::from_angle(0.3), m.calib_n, m.calib_chains, seed ^ 0xca1b);
            -l.furstenberg_integral.mean
        }
        s => s.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad --rescale {s:?}")))?,
    };
    Ok((if shift == 0.0 { base } else { projective::rescale(&base, shift.exp()) }, shift))
}

fn spread_seeds() -> Vec<ProjPoint<2>> {
    (0..8).map(|k| ProjPoint::from_angle((k as f64 + 0.5) * std::f64::consts::PI / 8.0)).collect()
}

fn furstenberg(cmd: &Command, a: &FurstenbergArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "furstenberg")?;
    let (mu, shift) = resolve_measure(&a.m, Some(seed), "furstenberg")?;
    let r = projective::furstenberg_sample(&mu, &spread_seeds(), a.n, a.chains, seed, a.bins);
    let l = projective::lyapunov_estimate(&mu, &ProjPoint::from_angle(0.3), a.lyapunov_n, a.chains, seed ^ 0x1a9);
    let mut em = emission(cmd, Some(seed));
    em.note_f("log_shift", shift);
    em.note_f("defect", r.defect);
    em.note_f("collapse_fraction_1e-6", r.collapse_fraction(1e-6));
    em.note("lambda", format!("{} ± {}", f(l.lambda.mean), f(l.lambda.stderr)));
    em.note("furstenberg_integral", format!("{} ± {}", f(l.furstenberg_integral.mean), f(l.furstenberg_integral.stderr)));
    em.note("finite_orbit_found", l.irreducibility.finite_orbit_found);
    em.note_f("proximal_fraction", l.proximal_fraction);
    let grid = Binning::projective(a.bins);
    let h = r.nu.histogram(grid).normalized();
    em.table = Table::new(&["bin", "center", "mass"]);
    for (j, m) in h.iter().enumerate() {
        em.table.push(vec![i(j), f(grid.center(j)), f(*m)]);
    }
    Ok(em)
}

fn llt(cmd: &Command, a: &LltArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "llt")?;
    let (mu, shift) = resolve_measure(&a.m, Some(seed), "llt")?;
    let bump = Bump { t0: a.t0, width: a.width, a: a.a };
    let psi = move |th: f64, t: f64| bump.eval(th, t);
    let starts: Vec<PointedVector<2>> = a.starts.iter().map(|t| PointedVector::from_vector(&Vect::<2>::new(t.cos(), t.sin()))).collect();
    let rows = projective::llt_scaled_estimate(&mu, &psi, &starts, &a.ns, a.chains, seed)?;
    let s2 = transfer::variance_sigma2(&mu, a.bins, transfer::DEFAULT_H)?;
    let nu = projective::furstenberg_sample(&mu, &spread_seeds(), 60, a.nu_chains, seed ^ 0x9f, 64);
    let (lo, hi) = bump.radial_support();
    let target = projective::nu_l_integral(&nu.nu.points, &psi, lo, hi, 200);
    let norm = (2.0 * std::f64::consts::PI * s2.sigma2).sqrt() / target;
    let mut em = emission(cmd, Some(seed));
    em.note_f("log_shift", shift);
    em.note_f("sigma2", s2.sigma2);
    em.note_f("nu_l_psi", target);
    em.table = Table::new(&["start", "n", "mean", "stderr", "scaled", "scaled_stderr", "normalized"]);
    for r in rows {
        em.table.push(vec![i(r.start), i(r.n), f(r.mean), f(r.stderr), f(r.scaled), f(r.scaled_stderr), f(r.scaled * norm)]);
    }
    Ok(em)
}

fn oscillate(cmd: &Command, a: &OscillateArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "oscillate")?;
    let (mu, shift) = resolve_measure(&a.m, Some(seed), "oscillate")?;
    let v = PointedVector::from_vector(&Vect::<2>::new(a.start.cos(), a.start.sin()));
    let r = projective::oscillation_stats(&mu, &v, a.horizon, a.chains, seed);
    let mut em = emission(cmd, Some(seed));
    em.note_f("log_shift", shift);
    em.note_f("both_ways_fraction", r.both_ways_fraction(a.level));
    em.note_f("c_hat", r.c_hat);
    em.note_f("c_bound", r.c_bound);
    em.table = Table::new(&["chain", "max_excursion", "min_excursion"]);
    for (c, (hi, lo)) in r.max_excursion.iter().zip(&r.min_excursion).enumerate() {
        em.table.push(vec![i(c), f(*hi), f(*lo)]);
    }
    Ok(em)
}

fn spectrum(cmd: &Command, a: &SpectrumArgs) -> Result<Emission> {
    let (mu, shift) = resolve_measure(&a.m, a.seed, "spectrum")?;
    let rows = transfer::spectral_radius_scan(&mu, a.bins, &a.ts)?;
    let mut em = emission(cmd, a.seed);
    em.note_f("log_shift", shift);
    match transfer::variance_sigma2(&mu, a.bins, a.h) {
        Ok(s) => {
            em.note_f("sigma2", s.sigma2);
            em.note_f("sigma2_half_step", s.sigma2_half_step);
            em.note_f("sigma2_richardson", s.sigma2_richardson);
            em.note_f("sigma2_refined", s.sigma2_refined);
            em.note_f("refinement_change", s.refinement_change);
            em.note_f("k_prime", s.k_prime);
            em.note_f("gap", s.gap);
        }
        Err(Error::Hypothesis(m)) => em.note("sigma2", format!("unavailable: {m}")),
        Err(e) => return Err(e),
    }
    em.table = Table::new(&["t", "re", "im", "modulus", "gap", "dense"]);
    for r in rows {
        em.table.push(vec![f(r.t), f(r.re), f(r.im), f(r.modulus), f(r.gap), i(r.dense)]);
    }
    Ok(em)
}

fn fiber_run<S: CocycleSystem>(em: &mut Emission, sys: &S, mu: &FiniteMeasure<S::G>, a: &FiberArgs, seed: u64) -> Result<()> {
    let v = fiber::cocycle_check(sys, mu, a.checks, seed ^ 0xc0c)?;
    let d = fiber::drift(sys, mu, a.checks.max(2), seed ^ 0xd1f);
    let (lo, hi) = match a.interval.as_slice() {
        [lo, hi] if lo <= hi => (*lo, *hi),
        _ => return Err(Error::InvalidArgument("--interval needs two values a,b with a ≤ b".into())),
    };
    let r = fiber::birkhoff_recurrence(sys, mu, (lo, hi), a.start, a.horizon, a.chains, seed);
    em.note_f("cocycle_violation", v);
    em.note("drift", format!("{} ± {}", f(d.mean), f(d.stderr)));
    em.note_f("doubling_ratio", r.doubling_ratio);
    em.note("recurrent_consistent", r.recurrent_consistent());
    em.note_f(&format!("fraction_with_{}_visits", a.min_visits), r.fraction_with_at_least(a.min_visits));
    em.note_f("escape_fraction", r.escape_fraction());
    em.table = Table::new(&["chain", "visits", "last_visit"]);
    for (c, (v, l)) in r.visits.iter().zip(&r.last_visit).enumerate() {
        em.table.push(vec![i(c), i(v), l.map_or("none".into(), i)]);
    }
    Ok(())
}

fn fiber_cmd(cmd: &Command, a: &FiberArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "fiber")?;
    let mut em = emission(cmd, Some(seed));
    if a.system == "coin" {
        fiber_run(&mut em, &CoinCocycle { integer: true }, &CoinCocycle::measure(0.0), a, seed)?;
    } else if let Some(d) = a.system.strip_prefix("coin-drift:") {
        let d: f64 = d.parse().map_err(|_| Error::InvalidArgument(format!("bad drift in {:?}", a.system)))?;
        fiber_run(&mut em, &CoinCocycle::default(), &CoinCocycle::measure(d), a, seed)?;
    } else if a.system == "circle" {
        let mu = FiniteMeasure::uniform(vec![
            CircleStep { alpha: 0.17, s: 1.0 },
            CircleStep { alpha: 0.83, s: -1.0 },
            CircleStep { alpha: 0.41, s: 0.5 },
            CircleStep { alpha: 0.59, s: -0.5 },
        ])?;
        fiber_run(&mut em, &CircleCocycle { amp: 0.8 }, &mu, a, seed)?;
    } else if a.system == "norm-pair" {
        let m = MeasureArgs { measure: "pair".into(), rescale: "auto".into(), calib_n: 2000, calib_chains: 20_000 };
        let (mu, _) = resolve_measure(&m, Some(seed), "fiber")?;
        let rho = projective::furstenberg_sample(&mu, &spread_seeds(), 60, 4000, seed ^ 0x40, 64);
        let sys = NormCocycle { rho: rho.nu.points.iter().map(|t| ProjPoint::from_angle(*t)).collect() };
        fiber_run(&mut em, &sys, &mu, a, seed)?;
    } else {
        return Err(Error::InvalidArgument(format!("unknown system {:?}; supported: coin, coin-drift:<d>, circle, norm-pair", a.system)));
    }
    Ok(em)
}

fn parse_field(s: &str) -> Result<AffineField> {
    if s == "real" {
        return Ok(AffineField::Real);
    }
    if let Some(p) = s.strip_prefix("padic:") {
        let p: u32 = p.parse().map_err(|_| Error::InvalidArgument(format!("bad prime in {s:?}")))?;
        PAdic::check_prime(p)?;
        return Ok(AffineField::Padic(p));
    }
    Err(Error::InvalidArgument(format!("unknown field {s:?}; use real or padic:<p>")))
}

fn affine_cmd(cmd: &Command, a: &AffineArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "affine")?;
    let field = parse_field(&a.field)?;
    let law = AffineLaw::parse(&a.a_law, &a.b_law)?;
    let crit = affine::criticality(&law, field);
    if !crit.critical {
        affine::validate_critical(&law, field)?;
    }
    let mut em = emission(cmd, Some(seed));
    em.note_f("log_drift", crit.log_drift);
    em.note("degenerate", crit.degenerate);
    em.note("common_fixed_point", crit.common_fixed_point.clone().unwrap_or_else(|| "none".into()));
    em.note("moment_condition", "automatic for finite support");
    let start: num_rational::Rational64 = a.start.parse().map_err(|_| Error::InvalidArgument(format!("bad --start {:?}", a.start)))?;
    match (a.mode.as_str(), field) {
        ("visits", AffineField::Real) => {
            let mu = law.real_measure()?;
            let x0 = *start.numer() as f64 / *start.denom() as f64;
            let r = affine::affine_walk_real(&mu, x0, a.window, a.horizon, a.chains, seed);
            visits_table(&mut em, &r, a.min_visits);
        }
        ("visits", AffineField::Padic(p)) => {
            let mu = law.power_measure(p)?;
            let x0 = PowerFraction::from_rational(&start, p)?;
            if a.window < 0.0 || a.window.fract() != 0.0 {
                return Err(Error::InvalidArgument("p-adic --window is a nonnegative integer exponent".into()));
            }
            let r = affine::affine_walk_padic(&mu, &x0, a.window as u32, a.horizon, a.chains, seed);
            visits_table(&mut em, &r, a.min_visits);
        }
        ("ladder", AffineField::Real) => {
            let mu = law.real_measure()?;
            let range = match a.trend_range.as_slice() {
                [lo, hi] => (*lo, *hi),
                _ => return Err(Error::InvalidArgument("--trend-range needs two values".into())),
            };
            let (r, _) = affine::ladder_sample(&mu, a.chains, a.horizon, range, seed);
            let (lo, hi) = r.m_tau.ci95();
            em.note("m_tau", format!("{} ci95=[{}, {}]", f(r.m_tau.mean), f(lo), f(hi)));
            for t in [1, 2, 3] {
                let e = r.p_tau(t);
                em.note(&format!("p_tau_{t}"), format!("{} ± {}", f(e.mean), f(e.stderr)));
            }
            em.note_f("censored_fraction", r.censored_fraction);
            em.note("censoring_flagged", r.flagged);
            em.note_f("tail_sup", r.tail_sup);
            em.note("tail_trend_slope", format!("{} ci95=[{}, {}]", f(r.trend.fit.slope), f(r.trend.slope_ci.0), f(r.trend.slope_ci.1)));
            em.table = Table::new(&["t", "sqrt_t_tail"]);
            for (t, v) in &r.tail {
                em.table.push(vec![i(t), f(*v)]);
            }
        }
        ("trajectory", AffineField::Real) => {
            let mu = law.real_measure()?;
            let x0 = *start.numer() as f64 / *start.denom() as f64;
            let traj = affine::trajectory_real(&mu, x0, a.horizon, &mut chain_rng(seed, 0));
            em.table = Table::new(&["n", "x", "log2_abs_x"]);
            for (n, x) in traj.iter().enumerate() {
                em.table.push(vec![i(n), f(x.to_f64()), f(x.log2_abs())]);
            }
        }
        ("trajectory", AffineField::Padic(p)) => {
            let mu = law.power_measure(p)?;
            let mut x = PowerFraction::from_rational(&start, p)?;
            let mut rng = chain_rng(seed, 0);
            em.table = Table::new(&["n", "numerator", "p_power", "log_p_abs"]);
            for n in 0..=a.horizon {
                if n > 0 {
                    x = mu.sample(&mut rng).apply(&x);
                }
                em.table.push(vec![i(n), i(&x.num), i(x.k), x.log_p_abs(p).map_or("-inf".into(), i)]);
            }
        }
        (m, _) => return Err(Error::InvalidArgument(format!("mode {m:?} is not available for field {}", a.field))),
    }
    Ok(em)
}

fn visits_table(em: &mut Emission, r: &affine::VisitReport, min_visits: u64) {
    em.note_f("doubling_ratio", r.doubling_ratio);
    em.note_f(&format!("fraction_with_{min_visits}_visits"), r.fraction_with_at_least(min_visits));
    em.table = Table::new(&["chain", "visits", "visits_half"]);
    for (c, (v, h)) in r.visits.iter().zip(&r.visits_half).enumerate() {
        em.table.push(vec![i(c), i(v), i(h)]);
    }
}

fn harmonic_measure(s: &str) -> Result<FiniteMeasure<FreeWord>> {
    if s == "uniform4" {
        return Ok(harmonic::uniform4());
    }
    let p = s.strip_prefix("file:").ok_or_else(|| Error::InvalidArgument(format!("unknown measure {s:?}")))?;
    let text = std::fs::read_to_string(p)?;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (w, wt) = match line.split_once(':') {
            Some((w, wt)) => (w, wt.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad weight in {line:?}")))?),
            None => (line, 1.0),
        };
        atoms.push(w.parse::<FreeWord>()?);
        weights.push(wt);
    }
    let total: f64 = weights.iter().sum();
    FiniteMeasure::new(atoms, weights.iter().map(|w| w / total).collect())
}

fn harmonic_cmd(cmd: &Command, a: &HarmonicArgs) -> Result<Emission> {
    let seed = need_seed(a.seed, "harmonic")?;
    let mu = harmonic_measure(&a.measure)?;
    let m = harmonic::moment_check(&mu);
    let ab = harmonic::abelianized_recurrence(&mu, a.abel_horizon, a.abel_chains, seed ^ 0xab, 1, &ClassifierConfig::default())?;
    let nu = harmonic::nu_sample(&mu, a.n, a.chains, seed, a.bins);
    let sd = harmonic::singularity_diagnostics(&nu.nu.points, &harmonic::log_scales(a.r_min, a.r_max, a.scales), a.refs, a.depth, seed ^ 0x5d)?;
    let mut em = emission(cmd, Some(seed));
    em.note_f("second_moment", m.second_moment);
    em.note("drift", format!("({}, {})", f(m.drift.0), f(m.drift.1)));
    em.note("symmetric", m.symmetric);
    em.note("adapted", m.adapted);
    em.note("abelianized_verdict", serde_json::to_value(ab.classification.verdict)?.as_str().unwrap_or_default());
    em.note_f("abelianized_return_fraction", ab.return_fraction);
    em.note_f("collapse_fraction_1e-6", nu.collapse_fraction(1e-6));
    em.note_f("noncollapse_fraction", nu.noncollapse_fraction);
    em.note("degenerate", nu.degenerate);
    em.note_f("defect", nu.defect);
    em.note("mean_local_dim", format!("{} ci95=[{}, {}]", f(sd.mean_local_dim), f(sd.ci.0), f(sd.ci.1)));
    em.note("singular_consistent", sd.singular_consistent(a.dim_threshold));
    for n in &sd.notices {
        em.note("notice", n);
    }
    em.table = Table::new(&["table", "index", "x", "y"]);
    let grid = Binning::projective(a.bins);
    for (j, mass) in nu.nu.histogram(grid).normalized().iter().enumerate() {
        em.table.push(vec!["nu".into(), i(j), f(grid.center(j)), f(*mass)]);
    }
    for (j, s) in sd.scales.iter().enumerate() {
        em.table.push(vec!["scale".into(), i(j), f(s.r), f(s.mean_count)]);
    }
    for (k, r) in &sd.dyadic {
        em.table.push(vec!["dyadic".into(), i(k), i(k), f(*r)]);
    }
    Ok(em)
}

fn load_matrix(a: &MatrixArgs) -> Result<AnyMatrix> {
    match (&a.matrix, &a.entries) {
        (Some(p), None) => AnyMatrix::parse_csv(&std::fs::read_to_string(p)?),
        (None, Some(e)) => {
            let header = match parse_field(&a.field)? {
                AffineField::Real => "field,real".to_string(),
                AffineField::Padic(p) => format!("field,padic,{p}"),
            };
            AnyMatrix::parse_csv(&format!("{header}\n{}", e.replace(';', "\n")))
        }
        _ => Err(Error::InvalidArgument("give exactly one of --matrix <file> or --entries <rows>".into())),
    }
}

fn growth_table(em: &mut Emission, r: &GrowthReport) {
    em.note_f("degree", r.degree);
    em.note_f("r2", r.r2);
    em.note("truncated", r.truncated);
    if let Some(w) = &r.warning {
        em.note("warning", w);
    }
    em.table = Table::new(&["n", "ball_size"]);
    for (n, s) in r.ball_sizes.iter().enumerate() {
        em.table.push(vec![i(n), i(s)]);
    }
}

fn structure(cmd: &Command, a: &StructureArgs) -> Result<Emission> {
    let mut em = emission(cmd, None);
    match &a.what {
        StructureCommand::Contraction(m) => {
            let s = match load_matrix(m)? {
                AnyMatrix::Real(g) => contraction_subgroup_real(&g, m.tol)?.summary(),
                AnyMatrix::PAdic(g) => contraction_subgroup_padic(&g)?.summary(),
            };
            em.note("trivial", s.directions == 0);
            em.note_f("delta", s.delta);
            em.note("valuation_only", s.valuation_only);
            em.note_f("orbit_error", s.orbit_error);
            em.table = Table::new(&["direction", "rate"]);
            for (k, r) in s.rates.iter().enumerate() {
                em.table.push(vec![i(k), f(*r)]);
            }
        }
        StructureCommand::Eigen(m) => {
            let rep = match load_matrix(m)? {
                AnyMatrix::Real(g) => eigen_structure_real(&g)?,
                AnyMatrix::PAdic(g) => eigen_structure_padic(&g)?.0,
            };
            em.note("unique_dominant", rep.unique_dominant);
            em.note("valuation_only", rep.valuation_only);
            em.table = Table::new(&["modulus", "multiplicity"]);
            for (r, k) in &rep.moduli {
                em.table.push(vec![f(*r), i(k)]);
            }
        }
        StructureCommand::Growth(g) => {
            let r = if g.group == "heisenberg" {
                cayley_growth_degree(&Heisenberg, g.n_max, g.budget)
            } else if let Some(k) = g.group.strip_prefix('Z') {
                let k: usize = k.parse().map_err(|_| Error::InvalidArgument(format!("bad group {:?}", g.group)))?;
                cayley_growth_degree(&Lattice(k), g.n_max, g.budget)
            } else if let Some(p) = g.group.strip_prefix("matrices:") {
                let mats: Vec<Vec<Vec<i64>>> = serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::Parse(format!("{p}: {e}")))?;
                let d = mats.first().map_or(0, Vec::len);
                let gens = mats.into_iter().map(|m| m.into_iter().flatten().collect()).collect();
                cayley_growth_degree(&IntMatrixGroup::new(d, gens)?, g.n_max, g.budget)
            } else {
                return Err(Error::InvalidArgument(format!("unknown group {:?}; supported: Z<k>, heisenberg, matrices:<file>", g.group)));
            };
            growth_table(&mut em, &r);
        }
    }
    Ok(em)
}

fn verify(a: &VerifyArgs) -> Result<Emission> {
    let text = std::fs::read_to_string(&a.file)?;
    let h = read_header(&text)?;
    verify_digest(&h)?;
    // Re-validate: the recorded config must parse back into the same arguments.
    let mut cfg = h.config.clone();
    let obj = cfg.as_object_mut().ok_or_else(|| Error::Config("config is not an object".into()))?;
    let command = obj.remove("command").and_then(|v| v.as_str().map(String::from)).ok_or_else(|| Error::Config("config lacks the command".into()))?;
    let mut argv: Vec<OsString> = vec!["walklab".into(), command.clone().into()];
    if let Some(s) = obj.remove("structure").and_then(|v| v.as_str().map(String::from)) {
        argv.push(s.into());
    }
    argv.extend(config_args(&Value::Object(obj.clone()))?);
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Config(format!("recorded config does not re-validate: {e}")))?;
    let again = serde_json::to_value(&cli.cmd)?;
    if again != h.config {
        return Err(Error::Config("recorded config does not round-trip through the argument parser".into()));
    }
    let mut em = Emission { command: "verify".into(), seed: None, config: serde_json::json!({"command": "verify", "file": a.file}), notes: Vec::new(), table: Table::new(&["file", "command", "digest", "status"]) };
    em.table.push(vec![a.file.display().to_string(), command, h.digest, "ok".into()]);
    Ok(em)
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("walklab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn missing_seed_is_usage_error() {
        let (code, _, err) = run_str(&["recur", "--N", "10"]);
        assert_eq!(code, 1);
        assert!(err.contains("--seed"));
    }

    #[test]
    fn noncritical_affine_exits_2() {
        let (code, _, err) = run_str(&["affine", "--a-law", "2,1/3", "--seed", "1", "--horizon", "10"]);
        assert_eq!(code, 2);
        assert!(err.contains("criticality"));
    }

    #[test]
    fn help_and_unknown() {
        assert_eq!(run_str(&["--help"]).0, 0);
        assert_eq!(run_str(&["recur", "--bogus", "1"]).0, 1);
        assert_eq!(run_str(&["recur", "--group", "Z9", "--seed", "1"]).0, 1);
    }

    #[test]
    fn structure_runs_without_seed() {
        let (code, out, _) = run_str(&["structure", "contraction", "--entries", "2,0;0,0.5"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("# delta: 0.25"));
        let (code, out, _) = run_str(&["structure", "growth", "--group", "Z2", "--n-max", "10"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l == "10,221"));
    }

    #[test]
    fn config_file_injection() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"N": 20, "chains": 64, "group": "Z1"}"#).unwrap();
        let (code, out, _) = run_str(&["recur", "--config", p.to_str().unwrap(), "--seed", "3", "--chains", "32"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"chains\":32") && out.contains("\"N\":20") && out.contains("\"group\":\"Z1\""));
        std::fs::write(&p, r#"{"nonsense": 1}"#).unwrap();
        assert_eq!(run_str(&["recur", "--config", p.to_str().unwrap(), "--seed", "3"]).0, 1);
    }
}
