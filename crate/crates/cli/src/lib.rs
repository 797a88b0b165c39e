//! `bcur`: command-line driver for the `blockcur` library.
//!
//! Every command validates its arguments, calls into the library and writes
//! results. JSON results are printed to stdout (or `--report`) wrapped in an
//! envelope carrying `schema_version`, the command name, the seed and the
//! full parsed configuration; no timestamps are recorded, so identical
//! invocations produce identical bytes.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure,
//! 4 a validated bound was violated beyond statistical slack. Errors are
//! written to stderr as a JSON object.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use blockcur::bench::{self, storage, AccessReport, ImputationConfig, Placement, StorageLayout, SurrogateSpec, SweepConfig};
use blockcur::cur::{block_cur_boosted, boosting_trials};
use blockcur::sketch::harness::{validate_cur, validate_multiplication, validate_regression, HarnessReport};
use blockcur::sketch::{frobenius_block_probs, multiplication_blocks, regression_blocks, regression_probs};
use blockcur::{io, BlockPartition, CurConfig, Error, Generator, Matrix, RowSampling, SamplingMode, Variant};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_BOUND: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "bcur", version, about = "Block CUR decomposition and experiment drivers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate a synthetic matrix.
    Gen(GenArgs),
    /// Run Block CUR and write C, U, R, W and a JSON report.
    Decompose(DecomposeArgs),
    /// Per-block leverage scores, probabilities and stable ranks.
    Scores(ScoresArgs),
    /// Monte Carlo check of a probabilistic error bound.
    Validate(ValidateArgs),
    /// Executor contacts for block versus column access.
    Simulate(SimulateArgs),
    /// Error-vs-g sweep or held-out-row imputation sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    /// Equal blocks of this many columns; the last block may be shorter.
    #[arg(long, conflicts_with = "boundaries", required_unless_present = "boundaries")]
    pub block_size: Option<usize>,
    /// Interior cut points `i1,i2,...`; block g covers `[i_g, i_{g+1})`.
    #[arg(long, value_delimiter = ',')]
    pub boundaries: Option<Vec<usize>>,
}

impl PartitionArgs {
    fn build(&self, n: usize) -> blockcur::Result<BlockPartition> {
        match (&self.block_size, &self.boundaries) {
            (Some(s), _) => BlockPartition::uniform(n, *s),
            (None, Some(cuts)) => BlockPartition::from_cut_points(n, cuts),
            (None, None) => Err(Error::InvalidArgument("need --block-size or --boundaries".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    With,
    Without,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::With => SamplingMode::WithReplacement,
            ModeArg::Without => SamplingMode::WithoutReplacement,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowArg {
    Uniform,
    Distinct,
    Leverage,
}

impl From<RowArg> for RowSampling {
    fn from(r: RowArg) -> Self {
        match r {
            RowArg::Uniform => RowSampling::Uniform,
            RowArg::Distinct => RowSampling::UniformDistinct,
            RowArg::Leverage => RowSampling::Leverage,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Csv,
    Bcur,
}

impl FormatArg {
    fn ext(self) -> &'static str {
        match self {
            FormatArg::Csv => "csv",
            FormatArg::Bcur => "bcur",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    /// Output file; `.bcur`/`.bin` selects the binary format.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub rows: usize,
    #[arg(long, default_value_t = 100)]
    pub cols: usize,
    #[arg(long, default_value_t = 10)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Time-series surrogate with one planted block instead of `U·V`.
    #[arg(long)]
    pub surrogate: bool,
    /// Block size of the surrogate.
    #[arg(long, default_value_t = 50)]
    pub block_size: usize,
    #[arg(long, default_value_t = 10.0)]
    pub spike_height: f64,
    #[arg(long)]
    pub planted_block: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Target rank.
    #[arg(long)]
    pub k: usize,
    /// Sampled rows `r`.
    #[arg(long = "rows")]
    pub r: usize,
    /// Sampled blocks `g`.
    #[arg(long = "blocks")]
    pub g: usize,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::With)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = RowArg::Uniform)]
    pub row_sampling: RowArg,
    /// Keep sampled rows unscaled.
    #[arg(long)]
    pub unscaled_rows: bool,
    /// Boosting trials; overrides `--delta`.
    #[arg(long, conflicts_with = "delta")]
    pub trials: Option<usize>,
    /// Boost with `⌈ln(1/δ)⌉` trials.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Directory receiving `C`, `U`, `R`, `W` and `report.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoresArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub partition: PartitionArgs,
    /// Samples per second, to annotate blocks with times.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Scores CSV; written to stdout when absent (the JSON summary then goes
    /// to `--report` only).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the Frobenius coverage curve up to this k.
    #[arg(long)]
    pub coverage: Option<usize>,
    #[arg(long, requires = "coverage")]
    pub coverage_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundArg {
    Mult,
    Regression,
    Cur,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(value_enum)]
    pub bound: BoundArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Blocks per trial; derived from the bound when absent.
    #[arg(long)]
    pub g: Option<usize>,
    /// Constant in front of the regression block count.
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    /// Domination factor of the multiplication probabilities.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Left matrix `A`; generated from the seed when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Right matrix `B` (mult: n×p, regression: rows×n).
    #[arg(long)]
    pub input_b: Option<PathBuf>,
    /// Rows of a generated `A`.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Columns of a generated `A`.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Columns of a generated `B` (mult only).
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// Rank of a generated `B` (regression) or target rank (cur).
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Noise level of generated matrices.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Sampled rows (cur only).
    #[arg(long, default_value_t = 0)]
    pub rows: usize,
    /// Boosting trials (cur only); defaults to `⌈ln(1/δ)⌉`.
    #[arg(long)]
    pub boost: Option<usize>,
    #[command(flatten)]
    pub partition: PartitionArgs,
    /// CDF of `error / bound`, CSV `ratio,cdf`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV `trial,error,bound,violated`.
    #[arg(long)]
    pub trials_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementArg {
    RoundRobin,
    Random,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::RoundRobin => Placement::RoundRobin,
            PlacementArg::Random => Placement::Random,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub seed: u64,
    /// Number of blocks `G`.
    #[arg(long)]
    pub blocks: usize,
    #[arg(long)]
    pub block_size: usize,
    #[arg(long)]
    pub executors: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::RoundRobin)]
    pub placement: PlacementArg,
    #[arg(long, default_value_t = 1.0)]
    pub latency: f64,
    #[arg(long, default_value_t = 0.0)]
    pub element_cost: f64,
    /// Matrix rows, for element counts.
    #[arg(long, default_value_t = 1)]
    pub rows: usize,
    /// Explicit block plan.
    #[arg(long, value_delimiter = ',', group = "request")]
    pub plan: Option<Vec<usize>>,
    /// Draw this many blocks uniformly with replacement.
    #[arg(long, group = "request")]
    pub random_blocks: Option<usize>,
    /// Explicit column requests.
    #[arg(long, value_delimiter = ',', group = "request")]
    pub columns: Option<Vec<usize>>,
    /// Draw this many distinct columns uniformly.
    #[arg(long, group = "request")]
    pub random_columns: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Input matrix; a synthetic matrix is generated when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Seed of the generated matrix and first sweep seed.
    #[arg(long)]
    pub seed: u64,
    /// Number of sweep seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 10)]
    pub replicates: u64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub g: Vec<usize>,
    /// Sampled rows (error sweep).
    #[arg(long, default_value_t = 0)]
    pub rows: usize,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[arg(long, value_enum, default_value_t = RowArg::Uniform)]
    pub row_sampling: RowArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Without)]
    pub mode: ModeArg,
    /// Boosting trials per cell.
    #[arg(long, default_value_t = 1)]
    pub boost: usize,
    /// Held-out-row imputation with this many observed rows.
    #[arg(long)]
    pub observed: Option<usize>,
    /// Synthetic size `m×n` as `m,n`.
    #[arg(long, value_delimiter = ',', default_values_t = [200, 200])]
    pub size: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Aggregated CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-cell CSV (error sweep only).
    #[arg(long)]
    pub cells_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema_version: u32,
    command: &'static str,
    seed: Option<u64>,
    config: &'a Command,
    result: R,
}

/// Failure carried to the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub line: Option<u64>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let line = match &e {
            Error::Parse { line, .. } => Some(*line),
            _ => None,
        };
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID },
            kind: if e.is_numerical() { "numerical" } else { "invalid_input" },
            message: e.to_string(),
            line,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        kind: "invalid_argument",
        message: msg.into(),
        line: None,
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            emit_error(&invalid(e.render().to_string().trim_end()));
            return EXIT_INVALID;
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            emit_error(&f);
            f.code
        }
    }
}

fn emit_error(f: &Failure) {
    let body = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": f.kind, "message": f.message, "line": f.line, "exit_code": f.code },
    });
    eprintln!("{body}");
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Gen(a) => cmd_gen(cmd, a),
        Command::Decompose(a) => cmd_decompose(cmd, a),
        Command::Scores(a) => cmd_scores(cmd, a),
        Command::Validate(a) => cmd_validate(cmd, a),
        Command::Simulate(a) => cmd_simulate(cmd, a),
        Command::Sweep(a) => cmd_sweep(cmd, a),
    }
}

fn emit<R: Serialize>(cmd: &Command, name: &'static str, seed: Option<u64>, result: R, report: Option<&Path>) -> Result<(), Failure> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command: name,
        seed,
        config: cmd,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| invalid(e.to_string()))?;
    text.push('\n');
    match report {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load(path: &Path) -> Result<Matrix, Failure> {
    io::load(path).map_err(|e| match e {
        Error::Io(io) => invalid(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}

fn cmd_gen(cmd: &Command, a: &GenArgs) -> Outcome {
    let mut rng = Generator::from_seed(a.seed);
    let (m, planted) = if a.surrogate {
        let spec = SurrogateSpec {
            rows: a.rows,
            cols: a.cols,
            block_size: a.block_size,
            factors: a.rank,
            spike_height: a.spike_height,
            noise_sigma: a.noise,
            planted_block: a.planted_block,
        };
        let s = bench::planted_block_surrogate::<f64>(&spec, &mut rng)?;
        (s.matrix, Some(s.planted_block))
    } else {
        (bench::synthetic_low_rank::<f64>(a.rows, a.cols, a.rank, a.noise, &mut rng)?, None)
    };
    io::save(&m, &a.out)?;
    #[derive(Serialize)]
    struct GenResult {
        shape: (usize, usize),
        planted_block: Option<usize>,
        frobenius_norm: f64,
    }
    let result = GenResult {
        shape: m.shape(),
        planted_block: planted,
        frobenius_norm: m.frobenius_norm(),
    };
    emit(cmd, "gen", Some(a.seed), result, a.report.as_deref())?;
    Ok(0)
}

fn cmd_decompose(cmd: &Command, a: &DecomposeArgs) -> Outcome {
    let matrix = load(&a.input)?;
    let part = a.partition.build(matrix.cols())?;
    let config = CurConfig::new(a.k, a.r, a.g)
        .with_mode(a.mode.into())
        .with_row_sampling(a.row_sampling.into())
        .with_scaled_rows(!a.unscaled_rows);
    config.validate(matrix.rows(), matrix.cols(), &part)?;
    let t = match (a.trials, a.delta) {
        (Some(t), _) => t,
        (None, Some(d)) => boosting_trials(d)?,
        (None, None) => 1,
    };
    if t == 0 {
        return Err(invalid("--trials must be at least 1"));
    }
    let mut rng = Generator::from_seed(a.seed);
    let run = block_cur_boosted(&matrix, &part, &config, t, &mut rng)?;
    fs::create_dir_all(&a.out_dir)?;
    let ext = a.format.ext();
    let best = &run.best;
    for (name, m) in [("C", &best.c), ("U", &best.u), ("R", &best.r), ("W", &best.w)] {
        io::save(m, &a.out_dir.join(format!("{name}.{ext}")))?;
    }
    #[derive(Serialize)]
    struct DecomposeResult<'a> {
        shape_a: (usize, usize),
        blocks: usize,
        boosting_trials: usize,
        best_trial: usize,
        trial_errors: Vec<f64>,
        summary: blockcur::cur::CurSummary<f64>,
        files: Vec<&'a str>,
    }
    let files = match a.format {
        FormatArg::Csv => vec!["C.csv", "U.csv", "R.csv", "W.csv"],
        FormatArg::Bcur => vec!["C.bcur", "U.bcur", "R.bcur", "W.bcur"],
    };
    let result = DecomposeResult {
        shape_a: matrix.shape(),
        blocks: part.len(),
        boosting_trials: t,
        best_trial: run.best_trial,
        trial_errors: run.trial_errors.clone(),
        summary: best.summary(),
        files,
    };
    emit(cmd, "decompose", Some(a.seed), result, Some(&a.out_dir.join("report.json")))?;
    Ok(0)
}

fn cmd_scores(cmd: &Command, a: &ScoresArgs) -> Outcome {
    let matrix = load(&a.input)?;
    let part = a.partition.build(matrix.cols())?;
    let table = bench::score_table(&matrix, &part, a.k, a.sample_rate)?;
    match &a.out {
        Some(p) => table.write_csv(fs::File::create(p)?)?,
        None => table.write_csv(std::io::stdout())?,
    }
    let coverage = match a.coverage {
        Some(kmax) => {
            let curve = bench::coverage_curve(&matrix, kmax)?;
            if let Some(p) = &a.coverage_out {
                bench::pipeline::write_coverage_csv(&curve, fs::File::create(p)?)?;
            }
            Some(curve)
        }
        None => None,
    };
    #[derive(Serialize)]
    struct ScoresResult {
        table: bench::ScoreTable,
        coverage: Option<Vec<(usize, f64)>>,
    }
    let result = ScoresResult { table, coverage };
    if a.out.is_some() || a.report.is_some() {
        emit(cmd, "scores", None, result, a.report.as_deref())?;
    }
    Ok(0)
}

fn cmd_validate(cmd: &Command, a: &ValidateArgs) -> Outcome {
    let mut data_rng = Generator::from_seed(a.seed);
    let mut rng = data_rng.split();
    let noise = a.noise;
    let left = match &a.input {
        Some(p) => load(p)?,
        None => bench::synthetic_low_rank::<f64>(a.m, a.n, a.m.min(a.n), noise, &mut data_rng)?,
    };
    let part = a.partition.build(left.cols())?;
    #[derive(Serialize)]
    struct ValidateResult {
        g: usize,
        alpha: Option<f64>,
        passed: bool,
        violations: usize,
        violation_rate: f64,
        allowed_rate: f64,
        mean_max_z: Option<f64>,
        dominance_failures: Option<usize>,
        max_ratio: f64,
        trials: usize,
    }
    let (report, alpha): (HarnessReport, Option<f64>) = match a.bound {
        BoundArg::Mult => {
            let b = match &a.input_b {
                Some(p) => load(p)?,
                None => bench::synthetic_low_rank::<f64>(a.n, a.p, a.n.min(a.p), noise, &mut data_rng)?,
            };
            let alpha = blockcur::leverage::column_block_stable_rank(&left, &part)?.ok_or(Error::ZeroMatrix)?;
            let g = match a.g {
                Some(g) => g,
                None => multiplication_blocks(a.delta, a.eps, a.beta * alpha)?,
            };
            let probs = frobenius_block_probs(&left, &part, a.beta)?.distribution()?;
            (validate_multiplication(&left, &b, &part, &probs, a.beta, a.delta, g, a.trials, &mut rng)?, Some(alpha))
        }
        BoundArg::Regression => {
            let b = match &a.input_b {
                Some(p) => load(p)?,
                None => bench::synthetic_low_rank::<f64>(a.k, a.n, a.k, 0.0, &mut data_rng)?,
            };
            let (_, v) = regression_probs(&b, &part)?;
            let alpha = blockcur::leverage::block_stable_rank_nonzero(&v, &part)?.ok_or(Error::ZeroMatrix)?;
            let g = match a.g {
                Some(g) => g,
                None => regression_blocks(v.cols(), alpha, a.eps, a.delta, a.constant)?,
            };
            (
                validate_regression(&left, &b, &part, a.eps, a.delta, g, SamplingMode::WithReplacement, a.trials, &mut rng)?,
                Some(alpha),
            )
        }
        BoundArg::Cur => {
            let g = a.g.ok_or_else(|| invalid("cur validation needs --g"))?;
            if a.rows == 0 {
                return Err(invalid("cur validation needs --rows"));
            }
            let t = match a.boost {
                Some(t) => t,
                None => boosting_trials(a.delta)?,
            };
            let config = CurConfig::new(a.k, a.rows, g);
            (validate_cur(&left, &part, &config, a.eps, a.delta, t, a.trials, &mut rng)?, None)
        }
    };
    if let Some(p) = &a.out {
        report.write_cdf_csv(fs::File::create(p)?)?;
    }
    if let Some(p) = &a.trials_out {
        report.write_trials_csv(fs::File::create(p)?)?;
    }
    let passed = report.passed && report.dominance_failures.unwrap_or(0) == 0;
    let result = ValidateResult {
        g: report.g,
        alpha,
        passed,
        violations: report.violations,
        violation_rate: report.violation_rate,
        allowed_rate: report.delta + report.slack,
        mean_max_z: report.mean_max_z,
        dominance_failures: report.dominance_failures,
        max_ratio: report.cdf().last().map_or(0.0, |c| c.0),
        trials: report.trials.len(),
    };
    emit(cmd, "validate", Some(a.seed), result, a.report.as_deref())?;
    Ok(if passed { 0 } else { EXIT_BOUND })
}

fn cmd_simulate(cmd: &Command, a: &SimulateArgs) -> Outcome {
    let mut rng = Generator::from_seed(a.seed);
    let part = BlockPartition::uniform(
        a.blocks.checked_mul(a.block_size).ok_or_else(|| invalid("blocks × block size overflows"))?,
        a.block_size,
    )?;
    let layout = StorageLayout::build(a.placement.into(), a.blocks, a.executors, a.latency, a.element_cost, &mut rng)?;
    #[derive(Serialize)]
    struct SimulateResult {
        layout: StorageLayout,
        report: AccessReport,
        dominance: Option<storage::DominanceCheck>,
    }
    let plan = match (&a.plan, a.random_blocks) {
        (Some(blocks), _) => Some(explicit_plan(blocks, part.len())?),
        (None, Some(g)) => Some(storage::random_block_plan(&part, g, &mut rng)?),
        _ => None,
    };
    let result = if let Some(plan) = plan {
        let check = storage::compare_access(&layout, &part, &plan, a.rows, &mut rng)?;
        SimulateResult {
            layout,
            report: check.block.clone(),
            dominance: Some(check),
        }
    } else {
        let columns = match (&a.columns, a.random_columns) {
            (Some(c), _) => c.clone(),
            (None, Some(c)) => storage::random_columns(part.n(), c, &mut rng)?,
            _ => return Err(invalid("need one of --plan, --random-blocks, --columns, --random-columns")),
        };
        SimulateResult {
            report: storage::simulate_column_access(&layout, &part, &columns, a.rows)?,
            layout,
            dominance: None,
        }
    };
    emit(cmd, "simulate", Some(a.seed), result, a.report.as_deref())?;
    Ok(0)
}

fn explicit_plan(blocks: &[usize], limit: usize) -> Result<blockcur::SamplingPlan, Failure> {
    if blocks.is_empty() {
        return Err(invalid("--plan needs at least one block"));
    }
    if let Some(&b) = blocks.iter().find(|&&b| b >= limit) {
        return Err(Error::UnknownIndex { kind: "block", index: b, limit }.into());
    }
    let p = 1.0 / limit as f64;
    let g = blocks.len() as f64;
    Ok(blockcur::SamplingPlan {
        draws: blocks
            .iter()
            .map(|&block| blockcur::sampler::BlockDraw {
                block,
                probability: p,
                scale: 1.0 / (g * p).sqrt(),
            })
            .collect(),
        mode: SamplingMode::WithReplacement,
        origin: None,
    })
}

fn cmd_sweep(cmd: &Command, a: &SweepArgs) -> Outcome {
    let matrix = match &a.input {
        Some(p) => load(p)?,
        None => {
            if a.size.len() != 2 {
                return Err(invalid("--size takes two values m,n"));
            }
            bench::synthetic_low_rank::<f64>(a.size[0], a.size[1], a.rank, a.noise, &mut Generator::from_seed(a.seed))?
        }
    };
    let part = a.partition.build(matrix.cols())?;
    if a.replicates == 0 {
        return Err(invalid("--replicates must be at least 1"));
    }
    let seeds: Vec<u64> = (0..a.replicates).map(|i| a.seed.wrapping_add(i)).collect();
    if let Some(observed) = a.observed {
        let config = ImputationConfig {
            k: a.k,
            observed,
            g_list: a.g.clone(),
            seeds,
        };
        let table = bench::imputation_sweep(&matrix, &part, &config)?;
        if let Some(p) = &a.out {
            table.write_csv(fs::File::create(p)?)?;
        }
        #[derive(Serialize)]
        struct ImputationResult<'a> {
            rows: &'a [bench::ImputationRow],
            median_decreasing: bool,
        }
        let result = ImputationResult {
            rows: &table.rows,
            median_decreasing: table.median_decreasing(),
        };
        emit(cmd, "sweep", Some(a.seed), result, a.report.as_deref())?;
        return Ok(0);
    }
    if a.rows == 0 {
        return Err(invalid("error sweep needs --rows"));
    }
    let mut config = SweepConfig::new(a.k, a.rows, a.g.clone(), seeds);
    config.row_sampling = a.row_sampling.into();
    config.mode = a.mode.into();
    config.trials = a.boost;
    let table = bench::error_vs_g_sweep(&matrix, &part, &config)?;
    if let Some(p) = &a.out {
        table.write_csv(fs::File::create(p)?)?;
    }
    if let Some(p) = &a.cells_out {
        table.write_cells_csv(fs::File::create(p)?)?;
    }
    #[derive(Serialize)]
    struct SweepResult<'a> {
        rows: &'a [bench::SweepRow],
        mean_non_increasing_u: bool,
        mean_non_increasing_uk: bool,
    }
    let result = SweepResult {
        rows: &table.rows,
        mean_non_increasing_u: table.non_increasing(Variant::U),
        mean_non_increasing_uk: table.non_increasing(Variant::Uk),
    };
    emit(cmd, "sweep", Some(a.seed), result, a.report.as_deref())?;
    Ok(0)
}
