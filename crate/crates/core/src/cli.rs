//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 bound violation, 2 parse error, 3 domain error
//! (CPTP violation, catastrophic composition), 64 usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    thm1_uni_evo, thm2_fid_evo, thm5_unitarity_decay, thm8_circuit, thm9_max_correction_multi, BoundReport,
    CircuitSpec,
};
use crate::channel::{canonical, compose};
use crate::error::Error;
use crate::genlib::make_channel;
use crate::io::{parse_channel, parse_circuit, ErrorJson, KrausJson, MatrixJson};
use crate::matcore::identity;
use crate::metrics::{lk_gap_bounds, MetricsReport};
use crate::polar::{channel_polar_from_canonical, classify, equability_from_polar, infidelity_split_from_polar, lk_is_psd};
use crate::sweep::{fig2_csv, fig2_dump, FIG2_BULK, FIG2_KAPPA, FIG2_OUTLIER, fig3_configs, sweep_csv, sweep_element, SweepConfig, SweepResult, FIG3_NOTE};
use crate::verify::{run_suite, to_csv, Suite, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "qpolar", version, about = "Quantum channel decomposition, metrics and error-propagation bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input file (channel, circuit or sweep config JSON).
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output file; stdout when absent. A `<out>.manifest.json` is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Dimensions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    dim: Vec<usize>,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    /// Equability margin; 0.1, or 1 for the fig2 preset.
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Treat a degenerate leading Kraus weight as an error.
    #[arg(long, global = true)]
    strict_lk: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical Kraus form, LK operator, polar factors, equability and classification.
    Decompose,
    /// Fidelity, unitarity, infidelity split and LK gap checks.
    Metrics,
    /// Compose a circuit and evaluate the evolution bounds.
    Compose,
    /// Run a seeded verification suite; writes per-case CSV.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
    /// Per-depth sweep of a repeated element, or a preset figure dump.
    Sweep {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Largest depth for presets.
        #[arg(long, default_value_t = 1000)]
        depth: usize,
        /// Keep sweeping past the first catastrophic depth.
        #[arg(long)]
        keep_going: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SuiteArg {
    Lemmas,
    Theorems,
    Appendix,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    Fig2,
    Fig3,
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::Parse(_) | Error::DimensionMismatch(_) | Error::NonFinite) => EXIT_PARSE,
            CliError::Lib(_) => EXIT_DOMAIN,
            CliError::Io(_) => EXIT_PARSE,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }

    fn to_json(&self) -> ErrorJson {
        let code = self.exit_code();
        match self {
            CliError::Lib(e) => ErrorJson::new(e, code),
            CliError::Io(m) => ErrorJson { error: "Io".into(), message: m.clone(), exit_code: code },
            CliError::Usage(m) => ErrorJson { error: "Usage".into(), message: m.clone(), exit_code: code },
        }
    }
}

/// Written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    pub notes: Vec<String>,
}

struct Output {
    body: String,
    config: Value,
    notes: Vec<String>,
    code: i32,
    /// Reported on stderr after the body is written.
    error: Option<CliError>,
}

impl Output {
    fn ok(body: String, config: Value) -> Self {
        Self { body, config, notes: vec![], code: EXIT_OK, error: None }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    let p = path.as_ref().ok_or_else(|| CliError::Usage("--in is required".into()))?;
    std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn kappa_or(cli: &Cli, default: f64) -> Result<f64, CliError> {
    let k = cli.kappa.unwrap_or(default);
    if k.is_finite() && k > 0.0 {
        Ok(k)
    } else {
        Err(CliError::Usage(format!("--kappa must be positive, got {k}")))
    }
}

fn cmd_decompose(cli: &Cli) -> Result<Output, CliError> {
    let kappa = kappa_or(cli, crate::polar::DEFAULT_KAPPA)?;
    let input = parse_channel(&read_input(&cli.input)?)?;
    let d = input.channel.dim;
    let target = input.target.clone().unwrap_or_else(|| identity(d));
    let can = canonical(&input.channel)?;
    let metrics = MetricsReport::from_canonical(&can, &target)?;
    let pol = channel_polar_from_canonical(can, cli.strict_lk)?;
    let lk = pol.canonical.leading().clone();
    let report = json!({
        "dim": d,
        "target": MatrixJson::from_matrix(&target),
        "canonical": {
            "weights": pol.canonical.weights,
            "degenerate_leading": pol.canonical.degenerate_leading,
            "kraus": KrausJson::from_channel(&pol.canonical.to_channel()).kraus,
        },
        "lk": MatrixJson::from_matrix(&lk),
        "polar": {
            "v": MatrixJson::from_matrix(&pol.v),
            "abs_lk": MatrixJson::from_matrix(&pol.a1_polar.psd),
            "singular_values": pol.a1_polar.singular_values,
            "unique": pol.unique,
            "upsilon_sq_above_half": pol.upsilon_sq_above_half,
            "decoherent_left": KrausJson::from_channel(&pol.decoherent_left),
        },
        "decoherent": lk_is_psd(&lk, 1e-9)?,
        "metrics": metrics,
        "split": infidelity_split_from_polar(&pol, &target)?,
        "equability": equability_from_polar(&pol, kappa)?,
        "classification": classify(&pol.canonical.to_channel(), &target, kappa)?,
    });
    Ok(Output::ok(to_json(&report), json!({ "kappa": kappa, "strict_lk": cli.strict_lk })))
}

fn cmd_metrics(cli: &Cli) -> Result<Output, CliError> {
    let input = parse_channel(&read_input(&cli.input)?)?;
    let target = input.target.clone().unwrap_or_else(|| identity(input.channel.dim));
    let can = canonical(&input.channel)?;
    can.lk(cli.strict_lk)?;
    let metrics = MetricsReport::from_canonical(&can, &target)?;
    let (lemma1, lemma2) = lk_gap_bounds(&input.channel, &target)?;
    let split = channel_polar_from_canonical(can, cli.strict_lk).and_then(|p| infidelity_split_from_polar(&p, &target));
    let holds = lemma1.all_hold() && lemma2.as_ref().is_none_or(BoundReport::all_hold);
    let report = json!({
        "metrics": metrics,
        "split": split.ok(),
        "lemma1": lemma1,
        "lemma2": lemma2,
    });
    let mut out = Output::ok(to_json(&report), json!({ "strict_lk": cli.strict_lk }));
    if !holds {
        out.code = EXIT_VIOLATION;
    }
    Ok(out)
}

fn cmd_compose(cli: &Cli) -> Result<Output, CliError> {
    let (channels, targets) = parse_circuit(&read_input(&cli.input)?)?;
    let circuit = CircuitSpec::new(channels, targets)?;
    let composed = compose(&circuit.channels)?;
    let target = circuit.target_product();
    let metrics = MetricsReport::compute(&composed, &target)?;

    let mut bounds: Vec<BoundReport> = Vec::new();
    let mut skipped = serde_json::Map::new();
    let mut keep = |name: &str, r: crate::Result<Vec<BoundReport>>| match r {
        Ok(rs) => bounds.extend(rs),
        Err(e) => {
            skipped.insert(name.to_string(), Value::String(e.to_string()));
        }
    };
    keep("thm1", thm1_uni_evo(&circuit).map(|r| vec![r]));
    keep("thm2", thm2_fid_evo(&circuit).map(|r| vec![r]));
    keep(
        "thm5",
        thm5_unitarity_decay(&circuit, None).map(|r| vec![r.multiplicative, r.monotonicity, r.subadditivity]),
    );
    keep("thm8", thm8_circuit(&circuit).map(|r| vec![r]));
    keep("thm9", thm9_max_correction_multi(&circuit).map(|r| vec![r]));

    let holds = bounds.iter().all(BoundReport::all_hold);
    let report = json!({
        "dim": circuit.dim(),
        "depth": circuit.len(),
        "composed": KrausJson::from_channel(&canonical(&composed)?.to_channel()),
        "target": MatrixJson::from_matrix(&target),
        "metrics": metrics,
        "bounds": bounds,
        "skipped": skipped,
    });
    let mut out = Output::ok(to_json(&report), json!({}));
    if !holds {
        out.code = EXIT_VIOLATION;
    }
    Ok(out)
}

fn cmd_verify(cli: &Cli, suite: SuiteArg) -> Result<Output, CliError> {
    if cli.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let dims = if cli.dim.is_empty() { vec![2, 3] } else { cli.dim.clone() };
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(CliError::Usage(format!("--dim must be >= 2, got {d}")));
    }
    let suites: &[Suite] = match suite {
        SuiteArg::Lemmas => &[Suite::Lemmas],
        SuiteArg::Theorems => &[Suite::Theorems],
        SuiteArg::Appendix => &[Suite::Appendix],
        SuiteArg::All => &[Suite::Lemmas, Suite::Theorems, Suite::Appendix],
    };
    let mut rows = Vec::new();
    for &s in suites {
        rows.extend(run_suite(s, &dims, cli.trials, cli.seed)?);
    }
    let summary = Summary::of(&rows);
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(to_json(&summary).as_bytes());
    let mut out = Output::ok(to_csv(&rows), json!({ "suite": suite, "dims": dims, "trials": cli.trials }));
    if !summary.all_hold() {
        out.code = EXIT_VIOLATION;
    }
    Ok(out)
}

fn parse_sweep_configs(text: &str) -> Result<Vec<SweepConfig>, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let list = match v.get("sweeps") {
        Some(s) => s.clone(),
        None => Value::Array(vec![v]),
    };
    let cfgs: Vec<SweepConfig> = serde_json::from_value(list).map_err(|e| Error::Parse(e.to_string()))?;
    if cfgs.is_empty() {
        return Err(Error::Parse("no sweeps given".into()).into());
    }
    for c in &cfgs {
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(cfgs)
}

fn cmd_sweep(cli: &Cli, preset: Option<Preset>, depth: usize, keep_going: bool) -> Result<Output, CliError> {
    if depth == 0 {
        return Err(CliError::Usage("--depth must be >= 1".into()));
    }
    if let Some(Preset::Fig2) = preset {
        let kappa = kappa_or(cli, FIG2_KAPPA)?;
        let d = cli.dim.first().copied().unwrap_or(64);
        let dump = fig2_dump(d, FIG2_BULK, FIG2_OUTLIER, kappa, cli.seed)?;
        let config = json!({ "preset": "fig2", "dim": d, "bulk": FIG2_BULK, "outlier": FIG2_OUTLIER, "kappa": kappa });
        return Ok(Output::ok(fig2_csv(&dump), config));
    }
    let (configs, notes) = match preset {
        Some(_) => (fig3_configs(depth), vec![FIG3_NOTE.to_string()]),
        None => (parse_sweep_configs(&read_input(&cli.input)?)?, vec![]),
    };
    let mut results: Vec<SweepResult> = Vec::new();
    for cfg in &configs {
        results.push(sweep_element(&cfg.series, &make_channel(&cfg.element)?, cfg.depth, !keep_going)?);
    }
    let body = sweep_csv(&configs, &results);
    let config = json!({ "sweeps": configs, "keep_going": keep_going });
    let mut out = Output { body, config, notes, code: EXIT_OK, error: None };
    let hits: Vec<String> = configs
        .iter()
        .zip(&results)
        .filter_map(|(c, r)| r.catastrophic_at.map(|m| format!("{} at m = {m}", c.series)))
        .collect();
    if !hits.is_empty() {
        out.code = EXIT_DOMAIN;
        out.notes.push(format!("catastrophic: {}", hits.join("; ")));
        out.error = Some(CliError::Lib(Error::NotNonCatastrophic(hits.join("; "))));
    }
    Ok(out)
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Decompose => "decompose".into(),
        Command::Metrics => "metrics".into(),
        Command::Compose => "compose".into(),
        Command::Verify { suite } => format!("verify {}", suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
        Command::Sweep { .. } => "sweep".into(),
    }
}

fn emit(cli: &Cli, out: &Output, started: SystemTime, clock: Instant) -> Result<(), CliError> {
    match &cli.out {
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(out.body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
        Some(path) => {
            std::fs::write(path, &out.body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let manifest = RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command_name(&cli.command),
                config: out.config.clone(),
                seed: cli.seed,
                started_unix_s: started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                wall_clock_s: clock.elapsed().as_secs_f64(),
                notes: out.notes.clone(),
            };
            let mp = manifest_path(path);
            std::fs::write(&mp, to_json(&manifest)).map_err(|e| CliError::Io(format!("{}: {e}", mp.display())))?;
        }
    }
    Ok(())
}

fn report_error(e: &CliError) -> i32 {
    let j = e.to_json();
    eprintln!("{}", serde_json::to_string(&j).expect("serializable error"));
    j.exit_code
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let started = SystemTime::now();
    let clock = Instant::now();
    let result = match &cli.command {
        Command::Decompose => cmd_decompose(&cli),
        Command::Metrics => cmd_metrics(&cli),
        Command::Compose => cmd_compose(&cli),
        Command::Verify { suite } => cmd_verify(&cli, *suite),
        Command::Sweep { preset, depth, keep_going } => cmd_sweep(&cli, *preset, *depth, *keep_going),
    };
    match result {
        Err(e) => report_error(&e),
        Ok(out) => {
            if let Err(e) = emit(&cli, &out, started, clock) {
                return report_error(&e);
            }
            match &out.error {
                Some(e) => {
                    let mut j = e.to_json();
                    j.exit_code = out.code;
                    eprintln!("{}", serde_json::to_string(&j).expect("serializable error"));
                    out.code
                }
                None => out.code,
            }
        }
    }
}
