//! `accdim` command-line interface.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerically inconclusive,
//! 3 a bound or certificate check failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accdim::architecture::{self, Architecture, ArchitectureError};
use accdim::bounds::{BoundSheet, BoundsError};
use accdim::contraction::{self, ContractionConfig, ContractionError, Tolerances};
use accdim::experiments::{self, ExperimentError, Family, MonteCarloConfig, SweepConfig};
use accdim::witness::{self, WitnessError};
use accdim::Mode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

const TOOL: &str = "accdim";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "accdim",
    version,
    about = "Accessible dimension of quantum circuit architectures"
)]
struct Cli {
    /// Worker threads for sampling (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or inspect architectures.
    #[command(subcommand)]
    Arch(ArchCommand),
    /// Generic Jacobian rank at independent Haar points.
    Dim(DimArgs),
    /// Build and verify a Clifford witness certificate.
    Witness(WitnessArgs),
    /// Closed-form complexity and dimension bounds.
    Bounds(BoundsArgs),
    /// Accessible dimension against slice count.
    Sweep(SweepArgs),
    /// Monte Carlo over randomized nearest-neighbour architectures.
    McArch(McArgs),
    /// Re-run the command recorded in an output file.
    Replay(ReplayArgs),
}

#[derive(Subcommand, Debug)]
enum ArchCommand {
    /// Write an architecture as JSON.
    Gen(ArchGenArgs),
    /// Report the sink of every marked slice.
    Check(ArchCheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    Staircase,
    Brickwork,
    Random,
}

#[derive(Args, Debug, Clone)]
struct ArchSourceArgs {
    /// Architecture JSON file.
    #[arg(long, conflicts_with_all = ["family", "gates"])]
    arch: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    n: Option<usize>,
    /// Number of slices (staircase, brickwork).
    #[arg(long)]
    t: Option<usize>,
    /// Gate count (random).
    #[arg(long)]
    gates: Option<usize>,
    /// Seed of the random architecture.
    #[arg(long, default_value_t = 0)]
    arch_seed: u64,
}

#[derive(Args, Debug, Clone)]
struct NumericArgs {
    #[arg(long, default_value_t = 1e-6)]
    tol_loose: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_tight: f64,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
}

#[derive(Args, Debug)]
struct ArchGenArgs {
    #[command(flatten)]
    source: ArchSourceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ArchCheckArgs {
    #[command(flatten)]
    source: ArchSourceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DimArgs {
    #[command(flatten)]
    source: ArchSourceArgs,
    #[arg(long, default_value = "unitary")]
    mode: Mode,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, env = "ACCDIM_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    numeric: NumericArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sample singular values as CSV.
    #[arg(long)]
    spectra: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    #[command(flatten)]
    source: ArchSourceArgs,
    #[arg(long, default_value = "unitary")]
    mode: Mode,
    #[command(flatten)]
    numeric: NumericArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    n: u32,
    /// Gate count.
    #[arg(long = "R")]
    r: u64,
    /// Gates per slice.
    #[arg(long = "L")]
    l: u64,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t_max: usize,
    #[arg(long, default_value = "unitary")]
    mode: Mode,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, env = "ACCDIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Skip the witness-rank column.
    #[arg(long)]
    no_witness: bool,
    /// Record wall time per row (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    numeric: NumericArgs,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary with the ramp check.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, env = "ACCDIM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// JSON or CSV output of an earlier run.
    #[arg(long)]
    from: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

/// Fully resolved architecture source.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
enum ArchSpec {
    Family {
        family: Family,
        n: usize,
        slices: usize,
    },
    Random {
        n: usize,
        gates: usize,
        seed: u64,
    },
    Explicit {
        architecture: Architecture,
    },
}

impl ArchSpec {
    fn build(&self) -> Result<Architecture, ArchitectureError> {
        match self {
            ArchSpec::Family { family, n, slices } => family.build(*n, *slices),
            ArchSpec::Random { n, gates, seed } => Architecture::random_adjacent(*n, *gates, *seed),
            ArchSpec::Explicit { architecture } => Ok(architecture.clone()),
        }
    }
}

/// Resolved run configuration, embedded in every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum RunConfig {
    ArchGen {
        arch: ArchSpec,
    },
    ArchCheck {
        arch: ArchSpec,
    },
    Dim {
        arch: ArchSpec,
        mode: Mode,
        samples: usize,
        seed: u64,
        contraction: ContractionConfig,
    },
    Witness {
        arch: ArchSpec,
        mode: Mode,
        contraction: ContractionConfig,
    },
    Bounds {
        n: u32,
        gates: u64,
        slice_len: u64,
    },
    Sweep(SweepConfig),
    McArch(MonteCarloConfig),
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    result: T,
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
}

#[derive(Deserialize)]
struct Embedded {
    config: RunConfig,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn inconclusive(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn verdict(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<ArchitectureError> for Failure {
    fn from(e: ArchitectureError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<ContractionError> for Failure {
    fn from(e: ContractionError) -> Self {
        match e {
            ContractionError::Inconclusive(_) => Failure::inconclusive(e.to_string()),
            e => Failure::invalid(e.to_string()),
        }
    }
}

impl From<WitnessError> for Failure {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::CertificateMismatch(_) => Failure::verdict(e.to_string()),
            WitnessError::Contraction(c) => c.into(),
            e => Failure::invalid(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Contraction(c) => c.into(),
            ExperimentError::Witness(w) => w.into(),
            e => Failure::invalid(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("{}: {e}", path.display()))
}

impl ArchSourceArgs {
    fn resolve(&self) -> Result<ArchSpec, Failure> {
        if let Some(path) = &self.arch {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let architecture: Architecture =
                serde_json::from_str(&text).map_err(|e| io_failure(path, e))?;
            return Ok(ArchSpec::Explicit { architecture });
        }
        let family = self
            .family
            .ok_or_else(|| Failure::invalid("give --arch FILE or --family"))?;
        let n = self
            .n
            .ok_or_else(|| Failure::invalid("--n is required with --family"))?;
        match family {
            FamilyArg::Random => {
                let gates = self
                    .gates
                    .ok_or_else(|| Failure::invalid("--gates is required for random"))?;
                Ok(ArchSpec::Random {
                    n,
                    gates,
                    seed: self.arch_seed,
                })
            }
            FamilyArg::Staircase | FamilyArg::Brickwork => {
                let slices = self
                    .t
                    .ok_or_else(|| Failure::invalid("--t is required for staircase/brickwork"))?;
                let family = if family == FamilyArg::Staircase {
                    Family::Staircase
                } else {
                    Family::Brickwork
                };
                Ok(ArchSpec::Family { family, n, slices })
            }
        }
    }
}

impl NumericArgs {
    fn resolve(&self) -> Result<ContractionConfig, Failure> {
        let (loose, tight) = (self.tol_loose, self.tol_tight);
        if !(tight > 0.0 && tight <= loose && loose < 1.0) {
            return Err(Failure::invalid(format!(
                "tolerances must satisfy 0 < tight <= loose < 1, got loose = {loose}, tight = {tight}"
            )));
        }
        Ok(ContractionConfig {
            n_max: self.n_max,
            tolerances: Tolerances { loose, tight },
        })
    }
}

/// Writes through a temporary file in the destination directory so a failed
/// run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| io_failure(path, e))?;
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn envelope_json<T: Serialize>(config: &RunConfig, result: T) -> String {
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        config,
        result,
    };
    serde_json::to_string_pretty(&env).expect("serializable") + "\n"
}

fn header_line(config: &RunConfig) -> String {
    serde_json::to_string(&Header {
        tool: TOOL,
        version: VERSION,
        config,
    })
    .expect("serializable")
}

#[derive(Serialize)]
struct SliceReport {
    index: usize,
    start: usize,
    end: usize,
    sink: Option<usize>,
}

#[derive(Serialize)]
struct ArchCheckResult {
    n: usize,
    gates: usize,
    touched_qubits: usize,
    slices: Vec<SliceReport>,
    causal_slices: usize,
    /// Randomized-block analysis, for nearest-neighbour architectures.
    staircase_blocks: Option<Vec<architecture::StaircaseBlock>>,
}

#[derive(Serialize)]
struct GeneratedArchitecture<'a> {
    #[serde(flatten)]
    architecture: &'a Architecture,
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct WitnessResult<'a> {
    certificate: &'a witness::WitnessCertificate,
    verdict: &'a witness::Verdict,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    rows: &'a [experiments::SweepRow],
    ramp: &'a experiments::RampCheck,
}

/// Output paths for one execution; not part of the embedded config.
#[derive(Default)]
struct Outputs {
    out: Option<PathBuf>,
    secondary: Option<PathBuf>,
    /// JSON on stdout instead of a table, where a table exists.
    json: bool,
}

fn execute(config: &RunConfig, outputs: &Outputs) -> Result<(), Failure> {
    let out = outputs.out.as_deref();
    match config {
        RunConfig::ArchGen { arch } => {
            let architecture = arch.build()?;
            let file = GeneratedArchitecture {
                architecture: &architecture,
                tool: TOOL,
                version: VERSION,
                config,
            };
            emit(
                out,
                &(serde_json::to_string_pretty(&file).expect("serializable") + "\n"),
            )
        }
        RunConfig::ArchCheck { arch } => {
            let architecture = arch.build()?;
            let sinks = architecture::slice_sinks(&architecture);
            let slices: Vec<SliceReport> = architecture
                .slice_ranges()
                .into_iter()
                .zip(&sinks)
                .enumerate()
                .map(|(index, (r, &sink))| SliceReport {
                    index,
                    start: r.start,
                    end: r.end,
                    sink,
                })
                .collect();
            let result = ArchCheckResult {
                n: architecture.n(),
                gates: architecture.gate_count(),
                touched_qubits: architecture.touched_qubits(),
                causal_slices: sinks.iter().filter(|s| s.is_some()).count(),
                slices,
                staircase_blocks: architecture::detect_staircase_slices(&architecture).ok(),
            };
            emit(out, &envelope_json(config, &result))
        }
        RunConfig::Dim {
            arch,
            mode,
            samples,
            seed,
            contraction: cc,
        } => {
            let architecture = arch.build()?;
            let report =
                contraction::accessible_dimension(&architecture, *mode, *samples, *seed, cc)?;
            emit(out, &envelope_json(config, &report))?;
            if let Some(path) = &outputs.secondary {
                write_atomic(
                    path,
                    &format!(
                        "# config: {}\n{}",
                        header_line(config),
                        report.spectra_csv()
                    ),
                )?;
            }
            match report.consensus {
                None => Err(Failure::inconclusive(format!(
                    "rank is inconclusive: {:?}",
                    report.status
                ))),
                Some(d) if !report.bounds_hold() => Err(Failure::verdict(format!(
                    "d_A = {d} violates its bounds (lower {:?}, upper {})",
                    report.lower_bound, report.upper_bound
                ))),
                Some(d) => {
                    if out.is_some() {
                        println!("d_A = {d}");
                    }
                    Ok(())
                }
            }
        }
        RunConfig::Witness {
            arch,
            mode,
            contraction: cc,
        } => {
            let architecture = arch.build()?;
            let cert = witness::witness_point(&architecture, *mode)?;
            let verdict = witness::verify_certificate(&cert, &architecture, cc)?;
            emit(
                out,
                &envelope_json(
                    config,
                    WitnessResult {
                        certificate: &cert,
                        verdict: &verdict,
                    },
                ),
            )?;
            match verdict.rank.value() {
                None => Err(Failure::inconclusive(
                    "rank at the witness point is inconclusive",
                )),
                Some(r) if !verdict.pass => Err(Failure::verdict(format!(
                    "rank {r} at the witness is below T = {}",
                    verdict.slices
                ))),
                Some(r) => {
                    if out.is_some() {
                        println!("certificate verified: T = {}, rank = {r}", verdict.slices);
                    }
                    Ok(())
                }
            }
        }
        RunConfig::Bounds {
            n,
            gates,
            slice_len,
        } => {
            let sheet = BoundSheet::new(*n, *gates, *slice_len)?;
            match out {
                Some(_) => emit(out, &envelope_json(config, &sheet)),
                None if outputs.json => emit(None, &envelope_json(config, &sheet)),
                None => emit(None, &sheet.to_string()),
            }
        }
        RunConfig::Sweep(sweep_config) => {
            let sweep = experiments::growth_sweep(sweep_config)?;
            let csv = experiments::sweep_csv(
                &sweep.rows,
                &Header {
                    tool: TOOL,
                    version: VERSION,
                    config,
                },
            )?;
            emit(out, &csv)?;
            if let Some(path) = &outputs.secondary {
                write_atomic(
                    path,
                    &envelope_json(
                        config,
                        SweepSummary {
                            rows: &sweep.rows,
                            ramp: &sweep.ramp,
                        },
                    ),
                )?;
            }
            let ramp = &sweep.ramp;
            if !(ramp.nondecreasing && ramp.above_lower && ramp.saturated) {
                Err(Failure::verdict(format!("ramp check failed: {ramp:?}")))
            } else if !ramp.inconclusive_rows.is_empty() {
                Err(Failure::inconclusive(format!(
                    "inconclusive rows at T = {:?}",
                    ramp.inconclusive_rows
                )))
            } else {
                Ok(())
            }
        }
        RunConfig::McArch(mc) => {
            let summary = experiments::randomized_architecture_experiment(mc)?;
            emit(out, &envelope_json(config, &summary))?;
            if summary.within_interval {
                Ok(())
            } else {
                Err(Failure::verdict(format!(
                    "p_hat = {} outside [{}, {}]",
                    summary.p_hat, summary.interval.0, summary.interval.1
                )))
            }
        }
    }
}

fn read_embedded(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let json = match text.strip_prefix("# config: ") {
        Some(rest) => rest.lines().next().unwrap_or_default().to_string(),
        None => text,
    };
    let embedded: Embedded = serde_json::from_str(&json).map_err(|e| io_failure(path, e))?;
    Ok(embedded.config)
}

fn resolve(command: Command) -> Result<(RunConfig, Outputs), Failure> {
    let outputs = |out, secondary| Outputs {
        out,
        secondary,
        json: false,
    };
    Ok(match command {
        Command::Arch(ArchCommand::Gen(a)) => (
            RunConfig::ArchGen {
                arch: a.source.resolve()?,
            },
            outputs(a.out, None),
        ),
        Command::Arch(ArchCommand::Check(a)) => (
            RunConfig::ArchCheck {
                arch: a.source.resolve()?,
            },
            outputs(a.out, None),
        ),
        Command::Dim(a) => (
            RunConfig::Dim {
                arch: a.source.resolve()?,
                mode: a.mode,
                samples: a.samples,
                seed: a.seed,
                contraction: a.numeric.resolve()?,
            },
            outputs(a.out, a.spectra),
        ),
        Command::Witness(a) => (
            RunConfig::Witness {
                arch: a.source.resolve()?,
                mode: a.mode,
                contraction: a.numeric.resolve()?,
            },
            outputs(a.out, None),
        ),
        Command::Bounds(a) => (
            RunConfig::Bounds {
                n: a.n,
                gates: a.r,
                slice_len: a.l,
            },
            Outputs {
                out: a.out,
                secondary: None,
                json: a.json,
            },
        ),
        Command::Sweep(a) => {
            let mut config = SweepConfig::new(a.n, a.family, a.t_max, a.samples, a.seed);
            config.mode = a.mode;
            config.witness = !a.no_witness;
            config.timing = a.timing;
            config.contraction = a.numeric.resolve()?;
            (RunConfig::Sweep(config), outputs(a.out, a.summary))
        }
        Command::McArch(a) => {
            if !(a.confidence > 0.0 && a.confidence < 1.0) {
                return Err(Failure::invalid(format!(
                    "--confidence must lie in (0, 1), got {}",
                    a.confidence
                )));
            }
            let config = MonteCarloConfig {
                n: a.n,
                trials: a.trials,
                seed: a.seed,
                alpha: a.alpha,
                confidence: a.confidence,
            };
            (RunConfig::McArch(config), outputs(a.out, None))
        }
        Command::Replay(a) => (read_embedded(&a.from)?, outputs(a.out, None)),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(Failure::invalid("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Failure::invalid(e.to_string()))?;
    }
    let (config, outputs) = resolve(cli.command)?;
    execute(&config, &outputs)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
