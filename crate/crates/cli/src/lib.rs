//! `projchan` command-line front end.
//!
//! Every command writes one report, `{"manifest": .., "result": ..}`, as
//! canonical JSON (sorted keys, 17 significant digits) or as `metric,value`
//! CSV rows. Exit codes: 0 success, 1 internal error, 2 invalid input or a
//! failed check, 64 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use projchan_core::additivity::{additivity_gap, output_purity_trials, trace_square_trials};
use projchan_core::capacity::{
    auto_group, capacity_weakcov, chi_product_bound_check, verify_weak_covariance,
};
use projchan_core::channels::{ChannelFile, LinearMap, QuantumChannel};
use projchan_core::entropy::{
    characterize, max_output_norm, min_output_entropy, FormSummary, OptConfig, RenyiOrder,
};
use projchan_core::eof::{eof_upper, example9_state, load_bipartite_state, EofConfig};
use projchan_core::report::{flatten, to_canonical_json, to_value};
use projchan_core::zoo::{build, BuiltChannel, ChannelSpec};
use projchan_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

pub const THREADS_ENV: &str = "PROJCHAN_THREADS";

const SPEC_GRAMMAR: &str = "channel specs: wh:d=3 | stretch:d=3,lambda=0.5 | weyl:d=4 | \
pinch:d=3,blocks=2+1 | casimir:d=3 | casimir-reducible | shiftpinch:d=4,K=1,2 | \
coarse:n=2,D=2 | diag:file=PATH";

const FAMILIES: [&str; 9] = [
    "wh:d=3",
    "stretch:d=3,lambda=0.5",
    "weyl:d=4",
    "pinch:d=3,blocks=2+1",
    "casimir:d=3",
    "casimir-reducible",
    "shiftpinch:d=4,K=1,2",
    "coarse:n=2,D=2",
    "diag:file=PATH",
];

#[derive(Parser, Debug)]
#[command(name = "projchan", version, about = "Projective-output quantum channel analysis")]
#[command(after_help = SPEC_GRAMMAR)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 12648430)]
    seed: u64,
    /// Optimizer starts.
    #[arg(long, global = true, default_value_t = 64)]
    starts: usize,
    /// Per-iteration improvement below which a descent stalls.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall time in the manifest (output is then no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Group {
    Auto,
}

#[derive(Args, Debug)]
struct Source {
    /// Zoo spec string.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    spec: Option<String>,
    /// Channel JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpecOnly {
    #[arg(long)]
    spec: String,
    #[arg(long, value_enum, default_value_t = Group::Auto)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check trace preservation and complete positivity.
    Validate(Source),
    /// Build a zoo channel and summarize it; lists families without --spec.
    Zoo {
        #[arg(long)]
        spec: Option<String>,
    },
    /// Minimal output Renyi entropy.
    Minent {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "1", value_parser = parse_alpha)]
        alpha: RenyiOrder,
    },
    /// Maximal output operator norm.
    Norm(Source),
    /// Test the three equivalent projective-class conditions.
    Characterize {
        #[command(flatten)]
        source: Source,
        /// Comma-separated Renyi orders; `inf` allowed.
        #[arg(long, default_value = "0,0.5,1,2,inf", value_delimiter = ',', value_parser = parse_alpha)]
        alphas: Vec<RenyiOrder>,
    },
    /// Additivity gap of a tensor product.
    Additivity {
        #[arg(long = "spec", required = true)]
        specs: Vec<String>,
        #[arg(long, default_value = "1", value_parser = parse_alpha)]
        alpha: RenyiOrder,
        /// Also run this many randomized trace-square and purity trials.
        #[arg(long, value_name = "COUNT")]
        check_lemma3: Option<usize>,
    },
    /// Classical capacity of a weakly covariant channel.
    Capacity {
        #[command(flatten)]
        target: SpecOnly,
        /// Random entangled ensembles tested against 2C on the doubled channel.
        #[arg(long, default_value_t = 0)]
        chi_trials: usize,
    },
    /// Weak-covariance residuals.
    Covariance(SpecOnly),
    /// Upper bound on the entanglement of formation.
    Eof {
        /// `example9` or a bipartite state JSON file.
        #[arg(long)]
        state: String,
        #[arg(long)]
        ensemble_size: Option<usize>,
    },
    /// Stinespring isometry.
    Dilate(Source),
}

fn parse_alpha(s: &str) -> Result<RenyiOrder, String> {
    s.parse::<RenyiOrder>().map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    specs: Vec<String>,
    files: Vec<String>,
    config: ConfigEcho,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
}

#[derive(Serialize)]
struct ConfigEcho {
    seed: u64,
    starts: usize,
    tol: f64,
    alpha: Vec<RenyiOrder>,
}

enum Failure {
    Invalid(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => Failure::Internal(e.to_string()),
            e => Failure::Invalid(e.to_string()),
        }
    }
}

/// Result of a command before wrapping; `failed` marks a check that ran
/// but did not pass (reported, then exit 2).
struct Outcome {
    result: Value,
    failed: bool,
}

impl Outcome {
    fn ok<T: Serialize>(r: &T) -> Result<Self, Failure> {
        Ok(Self {
            result: to_value(r)?,
            failed: false,
        })
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate(_) => "validate",
        Command::Zoo { .. } => "zoo",
        Command::Minent { .. } => "minent",
        Command::Norm(_) => "norm",
        Command::Characterize { .. } => "characterize",
        Command::Additivity { .. } => "additivity",
        Command::Capacity { .. } => "capacity",
        Command::Covariance(_) => "covariance",
        Command::Eof { .. } => "eof",
        Command::Dilate(_) => "dilate",
    }
}

fn inputs(c: &Command) -> (Vec<String>, Vec<String>, Vec<RenyiOrder>) {
    let src = |s: &Source| {
        (
            s.spec.iter().cloned().collect(),
            s.file.iter().map(|p| p.display().to_string()).collect(),
        )
    };
    let (specs, files) = match c {
        Command::Validate(s) | Command::Norm(s) | Command::Dilate(s) => src(s),
        Command::Minent { source, .. } | Command::Characterize { source, .. } => src(source),
        Command::Zoo { spec } => (spec.iter().cloned().collect(), vec![]),
        Command::Additivity { specs, .. } => (specs.clone(), vec![]),
        Command::Capacity { target, .. } | Command::Covariance(target) => {
            (vec![target.spec.clone()], vec![])
        }
        Command::Eof { state, .. } => (vec![], vec![state.clone()]),
    };
    let alpha = match c {
        Command::Minent { alpha, .. } | Command::Additivity { alpha, .. } => vec![*alpha],
        Command::Characterize { alphas, .. } => alphas.clone(),
        _ => vec![],
    };
    (specs, files, alpha)
}

fn parse_spec(s: &str) -> Result<ChannelSpec, Failure> {
    Ok(s.parse::<ChannelSpec>()?)
}

fn build_spec(s: &str) -> Result<BuiltChannel, Failure> {
    Ok(build(&parse_spec(s)?)?)
}

fn read_channel_file(path: &Path) -> Result<ChannelFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(ChannelFile::parse(&text)?)
}

fn load(source: &Source) -> Result<QuantumChannel, Failure> {
    match (&source.spec, &source.file) {
        (Some(s), _) => Ok(build_spec(s)?.channel),
        (None, Some(p)) => Ok(read_channel_file(p)?.into_channel()?),
        (None, None) => Err(Failure::Invalid("need --spec or --file".into())),
    }
}

fn validate(source: &Source) -> Result<Outcome, Failure> {
    let ch = match (&source.spec, &source.file) {
        (Some(s), _) => build_spec(s)?.channel,
        (None, Some(p)) => {
            let file = read_channel_file(p)?;
            if let Some((k, a)) = file
                .kraus
                .iter()
                .enumerate()
                .find(|(_, a)| a.rows() != file.dim || a.cols() != file.dim)
            {
                return Err(Failure::Invalid(format!(
                    "Kraus operator {k} is {}x{} but dim is {}",
                    a.rows(),
                    a.cols(),
                    file.dim
                )));
            }
            QuantumChannel::new(file.kraus)?
        }
        (None, None) => return Err(Failure::Invalid("need --spec or --file".into())),
    };
    let report = ch.validate();
    let valid = report.is_valid();
    let ppt = if valid { Some(ch.is_ppt_choi()?) } else { None };
    Ok(Outcome {
        result: json!({
            "dim": ch.dim(),
            "kraus_count": ch.kraus().len(),
            "valid": valid,
            "validation": to_value(&report)?,
            "ppt": to_value(&ppt)?,
        }),
        failed: !valid,
    })
}

fn zoo(spec: Option<&str>) -> Result<Outcome, Failure> {
    let Some(s) = spec else {
        return Outcome::ok(&json!({ "families": FAMILIES }));
    };
    let built = build_spec(s)?;
    let ch = &built.channel;
    let form = built.form.as_ref().map(|f| FormSummary::new(f, ch));
    Outcome::ok(&json!({
        "dim": ch.dim(),
        "kraus_count": ch.kraus().len(),
        "env_dim": ch.stinespring().env_dim,
        "validation": to_value(&ch.validate())?,
        "ppt": to_value(&ch.is_ppt_choi()?)?,
        "projective_form": to_value(&form)?,
    }))
}

fn additivity(
    specs: &[String],
    alpha: RenyiOrder,
    lemma3: Option<usize>,
    cfg: &OptConfig,
) -> Result<Outcome, Failure> {
    let built = specs
        .iter()
        .map(|s| build_spec(s))
        .collect::<Result<Vec<_>, _>>()?;
    let channels: Vec<QuantumChannel> = built.iter().map(|b| b.channel.clone()).collect();
    let gap = additivity_gap(&channels, alpha, cfg)?;
    let bounds = match lemma3 {
        None => Value::Null,
        Some(trials) => {
            let forms = built
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    b.form.as_ref().ok_or_else(|| {
                        Failure::Invalid(format!("{}: no projective form", specs[i]))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let maps: Vec<(&LinearMap, usize)> = forms.iter().map(|f| (&f.map, f.m)).collect();
            json!({
                "trace_square": to_value(&trace_square_trials(&maps, trials, cfg.seed)?)?,
                "output_purity": to_value(&output_purity_trials(&built, trials, cfg.seed)?)?,
            })
        }
    };
    let failed = bounds
        .as_object()
        .is_some_and(|m| m.values().any(|r| r["violations"].as_u64() != Some(0)));
    Ok(Outcome {
        result: json!({ "gap": to_value(&gap)?, "lemma3": bounds }),
        failed,
    })
}

fn capacity(target: &SpecOnly, chi_trials: usize, cfg: &OptConfig) -> Result<Outcome, Failure> {
    let spec = parse_spec(&target.spec)?;
    let ch = build(&spec)?.channel;
    let g = auto_group(&spec, cfg.seed)?;
    let report = capacity_weakcov(&ch, &g.rho0, &g.pi, &g.big_pi, cfg)?;
    let chi = if chi_trials > 0 {
        Some(chi_product_bound_check(&ch, report.capacity, chi_trials, cfg)?)
    } else {
        None
    };
    Outcome::ok(&json!({
        "group": g.name,
        "capacity": to_value(&report)?,
        "chi_bound": to_value(&chi)?,
    }))
}

fn covariance(target: &SpecOnly, cfg: &OptConfig) -> Result<Outcome, Failure> {
    let spec = parse_spec(&target.spec)?;
    let ch = build(&spec)?.channel;
    let g = auto_group(&spec, cfg.seed)?;
    let report = verify_weak_covariance(&ch, &g.rho0, &g.pi, &g.big_pi)?;
    Outcome::ok(&json!({
        "group": g.name,
        "holds": report.holds(),
        "covariance": to_value(&report)?,
    }))
}

fn eof(state: &str, ensemble_size: Option<usize>, cfg: &OptConfig) -> Result<Outcome, Failure> {
    let rho = if state == "example9" {
        example9_state()
    } else {
        load_bipartite_state(Path::new(state))?
    };
    let ecfg = EofConfig {
        ensemble_size,
        ..EofConfig::from(cfg)
    };
    let report = eof_upper(&rho, &ecfg)?;
    Outcome::ok(&json!({
        "dim_a": rho.dim_a,
        "dim_b": rho.dim_b,
        "eof": to_value(&report)?,
    }))
}

fn dilate(source: &Source) -> Result<Outcome, Failure> {
    let ch = load(source)?;
    let u = ch.stinespring();
    Outcome::ok(&json!({
        "isometry": to_value(&u)?,
        "isometry_defect": u.isometry_defect(),
    }))
}

fn dispatch(cmd: &Command, cfg: &OptConfig) -> Result<Outcome, Failure> {
    match cmd {
        Command::Validate(s) => validate(s),
        Command::Zoo { spec } => zoo(spec.as_deref()),
        Command::Minent { source, alpha } => Outcome::ok(&min_output_entropy(&load(source)?, *alpha, cfg)?),
        Command::Norm(s) => Outcome::ok(&max_output_norm(&load(s)?, cfg)?),
        Command::Characterize { source, alphas } => {
            Outcome::ok(&characterize(&load(source)?, alphas, cfg)?)
        }
        Command::Additivity {
            specs,
            alpha,
            check_lemma3,
        } => additivity(specs, *alpha, *check_lemma3, cfg),
        Command::Capacity { target, chi_trials } => capacity(target, *chi_trials, cfg),
        Command::Covariance(t) => covariance(t, cfg),
        Command::Eof {
            state,
            ensemble_size,
        } => eof(state, *ensemble_size, cfg),
        Command::Dilate(s) => dilate(s),
    }
}

fn render(report: &Value, format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => {
            let mut s = to_canonical_json(report)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let internal = |e: csv::Error| Failure::Internal(e.to_string());
            w.write_record(["metric", "value"]).map_err(internal)?;
            for (k, v) in flatten(report) {
                w.write_record([k, v]).map_err(internal)?;
            }
            w.into_inner().map_err(|e| Failure::Internal(e.to_string()))
        }
    }
}

fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
        },
    }
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            let _ = writeln!(err, "{SPEC_GRAMMAR}");
            return EXIT_USAGE;
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_INTERNAL;
        }
    };

    let g = &cli.global;
    let cfg = OptConfig {
        starts: g.starts,
        seed: g.seed,
        tol: g.tol,
        ..OptConfig::default()
    };
    if let Err(e) = cfg.check() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INVALID;
    }

    let started = Instant::now();
    let outcome = pool.install(|| {
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(&cli.command, &cfg)))
    });
    let outcome = match outcome {
        Ok(Ok(o)) => o,
        Ok(Err(Failure::Invalid(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INVALID;
        }
        Ok(Err(Failure::Internal(msg))) => {
            let _ = writeln!(err, "internal error: {msg}");
            return EXIT_INTERNAL;
        }
        Err(_) => {
            let _ = writeln!(err, "internal error: panic during computation");
            return EXIT_INTERNAL;
        }
    };

    let (specs, files, alpha) = inputs(&cli.command);
    let manifest = Manifest {
        command: command_name(&cli.command),
        specs,
        files,
        config: ConfigEcho {
            seed: g.seed,
            starts: g.starts,
            tol: g.tol,
            alpha,
        },
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: g.timing.then(|| started.elapsed().as_secs_f64()),
    };
    let report = match to_value(&manifest) {
        Ok(m) => json!({ "manifest": m, "result": outcome.result }),
        Err(e) => {
            let _ = writeln!(err, "internal error: {e}");
            return EXIT_INTERNAL;
        }
    };
    let bytes = match render(&report, g.format) {
        Ok(b) => b,
        Err(Failure::Invalid(msg) | Failure::Internal(msg)) => {
            let _ = writeln!(err, "internal error: {msg}");
            return EXIT_INTERNAL;
        }
    };
    let written = match &g.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "internal error: {msg}");
        return EXIT_INTERNAL;
    }
    if outcome.failed {
        let _ = writeln!(err, "check failed; see report");
        return EXIT_INVALID;
    }
    EXIT_OK
}
