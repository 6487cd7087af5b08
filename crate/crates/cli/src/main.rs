//! `lpsketch`: sketch vectors, estimate l4/l6 distances, and run the
//! Monte-Carlo and k-NN harnesses.

mod config;
mod input;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lpsketch::estimators::{
    est_1p, est_1p_identity, est_1p_margin, est_3p, est_3p_margin, est_d6_1p, est_exact, est_sampling,
    select_estimator, var_crs_predictor,
};
use lpsketch::io::{format_real, load_sketches, write_sketches};
use lpsketch::knn::{knn_repeated, p_sweep, write_knn_csv, BlobSpec, LabeledDataset};
use lpsketch::moments::is_housed;
use lpsketch::simlab::{run_mse, write_mse_csv};
use lpsketch::{
    beta4, compute_moments, exact_lp, sketch_batch, sketch_vector, EntryDistribution, Estimate64, EstimatorId,
    ProjectionSpec, Scheme, Sketch64,
};

use config::{parse_param, MseConfig, PairConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Verify,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Verify => 3,
        }
    }
}

impl From<lpsketch::Error> for CliError {
    fn from(e: lpsketch::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "lpsketch", version, about = "Estimate l4/l6 distances from random projections")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the moment table, exact l2..l8 distances and beta4 for a pair.
    Moments(PairArgs),
    /// Sketch every row of a data file.
    Sketch(SketchArgs),
    /// Estimate the distance between two vectors.
    Estimate(EstimateArgs),
    /// Monte-Carlo MSE versus k.
    Mse(MseArgs),
    /// Nearest-neighbour classification with exact or estimated distances.
    Knn(KnnArgs),
    /// Run the built-in self checks.
    Verify,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// File whose first two rows are the pair.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    pair: Option<PathBuf>,
    /// File whose first row is x.
    #[arg(long)]
    x: Option<PathBuf>,
    /// File whose first row is y.
    #[arg(long)]
    y: Option<PathBuf>,
    /// Dimension (required for svmlight input).
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug)]
struct ProjectionArgs {
    /// Number of projections.
    #[arg(short = 'k', long = "k", default_value_t = 100)]
    k: usize,
    /// Projection seed.
    #[arg(long, env = "LPSKETCH_SEED", default_value_t = 1)]
    seed: u64,
    /// Entry distribution: normal, 3pt or sparse:<s>.
    #[arg(long, default_value = "normal")]
    dist: String,
}

impl ProjectionArgs {
    fn spec(&self, scheme: Scheme, dim: usize) -> Result<ProjectionSpec, CliError> {
        let dist: EntryDistribution = self.dist.parse().map_err(|e: lpsketch::Error| CliError::Usage(e.to_string()))?;
        ProjectionSpec::new(self.seed, self.k, scheme, dist, dim).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
struct SketchArgs {
    /// Data file (dense CSV, or svmlight by extension).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    dim: Option<usize>,
    /// Projection scheme: 1p or 3p.
    #[arg(long, default_value = "1p")]
    scheme: String,
    /// Highest projected power: 3, or 5 for l6 (1p only).
    #[arg(long, default_value_t = 3)]
    max_power: u32,
    #[command(flatten)]
    projection: ProjectionArgs,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// sampling, crs-var-only, 3p, 3p-m, 1p, 1p-m, 1p-i, exact, d6-1p, or
    /// auto (experimental: 1p-i when the plug-in beta4 exceeds --tau, else 1p).
    #[arg(long, default_value = "1p")]
    estimator: String,
    /// Distance order, 4 or 6.
    #[arg(long)]
    p: Option<u32>,
    /// Threshold for `auto` (experimental).
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    /// Sketch file to read instead of raw vectors.
    #[arg(long, conflicts_with_all = ["pair", "x", "y"])]
    sketches: Option<PathBuf>,
    /// Ids of the two sketches (default: the first two).
    #[arg(long, value_delimiter = ',', requires = "sketches")]
    ids: Vec<String>,
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    projection: ProjectionArgs,
}

#[derive(Args, Debug)]
struct MseArgs {
    /// TOML experiment description; other flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pair kind: file, gamma, beta, normal or sparse-overlap.
    #[arg(long, default_value = "gamma")]
    generator: String,
    /// Pair file, for `--generator file`.
    #[arg(long)]
    pair: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// Seed of the generated pair.
    #[arg(long, default_value_t = 0)]
    pair_seed: u64,
    /// Value law for sparse-overlap pairs.
    #[arg(long)]
    values: Option<String>,
    /// Generator parameter, `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    k_grid: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "sampling,3p,3p-m,1p,1p-m,1p-i")]
    estimators: Vec<String>,
    /// Master seed of the trials.
    #[arg(long, env = "LPSKETCH_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "normal")]
    dist: String,
    /// auto, direct or gaussian.
    #[arg(long, default_value = "auto")]
    backend: String,
    /// Threshold for `auto` (experimental).
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KnnArgs {
    /// Labeled training file.
    #[arg(long, requires = "test")]
    train: Option<PathBuf>,
    /// Labeled test file.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Dimension (svmlight input, or the synthetic dataset).
    #[arg(long)]
    dim: Option<usize>,
    /// Generate a two-class sparse Gaussian dataset instead of reading files.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    synthetic: bool,
    #[arg(long, default_value_t = 200)]
    per_class: usize,
    #[arg(long, default_value_t = 0.6)]
    shift: f64,
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    /// Probability of flipping a synthetic row's label.
    #[arg(long, default_value_t = 0.0)]
    label_noise: f64,
    /// Neighbour counts.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
    m: Vec<usize>,
    /// Exact-distance orders for the sweep.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    p: Vec<u32>,
    /// Also classify with estimated distances from this estimator.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(short = 'k', long = "k", default_value_t = 512)]
    k: usize,
    /// Seeds for estimated distances: seed, seed+1, ...
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, env = "LPSKETCH_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}

fn moments(args: &PairArgs) -> CliResult {
    let (x, y) = input::pair(args.pair.as_ref(), args.x.as_ref(), args.y.as_ref(), args.dim)?;
    let m = compute_moments(&x, &y)?;
    let mut out = output(&None)?;
    writeln!(out, "quantity,value")?;
    writeln!(out, "D,{}", m.dim())?;
    for a in 0..=6 {
        for b in 0..=6 {
            if (a, b) != (0, 0) && is_housed(a, b) {
                writeln!(out, "S{a}{b},{}", format_real(m.s(a, b)))?;
            }
        }
    }
    for p in [2, 4, 6, 8] {
        writeln!(out, "l{p},{}", format_real(exact_lp(&x, &y, p)?))?;
    }
    match beta4(&x, &y) {
        Ok(b) => writeln!(out, "beta4,{}", format_real(b))?,
        Err(_) => writeln!(out, "beta4,")?,
    }
    out.flush()?;
    Ok(())
}

fn sketch(args: &SketchArgs) -> CliResult {
    let scheme: Scheme = args.scheme.parse().map_err(|e: lpsketch::Error| CliError::Usage(e.to_string()))?;
    let data = input::dataset(&args.input, args.dim)?;
    let dim = data.dim().ok_or_else(|| CliError::Data("input has no rows".into()))?;
    let spec = args.projection.spec(scheme, dim)?;
    let inputs: Vec<(String, &lpsketch::DataVector64)> =
        data.rows.iter().enumerate().map(|(i, r)| (format!("row{i}"), r)).collect();
    let sketches = sketch_batch(&inputs, &spec, args.max_power).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = output(&args.out)?;
    write_sketches(&sketches, &mut out)?;
    out.flush()?;
    Ok(())
}

fn pick_sketches(all: Vec<Sketch64>, ids: &[String]) -> Result<(Sketch64, Sketch64), CliError> {
    let find = |id: &str| {
        all.iter()
            .find(|s| s.id() == id)
            .cloned()
            .ok_or_else(|| CliError::Data(format!("no sketch with id `{id}`")))
    };
    match ids {
        [] => {
            let mut it = all.iter().cloned();
            match (it.next(), it.next()) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(CliError::Data("sketch file holds fewer than two sketches".into())),
            }
        }
        [a, b] => Ok((find(a)?, find(b)?)),
        _ => Err(CliError::Usage("--ids takes exactly two ids".into())),
    }
}

fn from_sketches(id: EstimatorId, sx: &Sketch64, sy: &Sketch64, tau: f64) -> Result<Estimate64, CliError> {
    Ok(match id {
        EstimatorId::ThreeP => est_3p(sx, sy, None)?,
        EstimatorId::ThreePMargin => est_3p_margin(sx, sy, None)?,
        EstimatorId::OneP => est_1p(sx, sy, None)?,
        EstimatorId::OnePMargin => est_1p_margin(sx, sy)?,
        EstimatorId::OnePIdentity => est_1p_identity(sx, sy, None)?,
        EstimatorId::D6OneP => est_d6_1p(sx, sy)?,
        EstimatorId::Auto => select_estimator(sx, sy, tau, None)?,
        other => {
            return Err(CliError::Usage(format!("{other} needs the raw vectors, not sketches")));
        }
    })
}

fn estimate(args: &EstimateArgs) -> CliResult {
    let id: EstimatorId = args.estimator.parse().map_err(|e: lpsketch::Error| CliError::Usage(e.to_string()))?;
    let p = args.p.unwrap_or(id.order());
    if !matches!(p, 4 | 6) {
        return Err(CliError::Usage(format!("--p must be 4 or 6, got {p}")));
    }
    if id != EstimatorId::Exact && p != id.order() {
        return Err(CliError::Usage(format!("{id} estimates l{}, not l{p}", id.order())));
    }
    let est = if let Some(path) = &args.sketches {
        let all = load_sketches(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let (sx, sy) = pick_sketches(all, &args.ids)?;
        from_sketches(id, &sx, &sy, args.tau)?
    } else {
        let pa = &args.pair;
        let (x, y) = input::pair(pa.pair.as_ref(), pa.x.as_ref(), pa.y.as_ref(), pa.dim)?;
        x.check_same_dim(&y)?;
        let m = compute_moments(&x, &y)?;
        let k = args.projection.k;
        match id {
            EstimatorId::Exact => est_exact(&x, &y, p)?,
            EstimatorId::Sampling => est_sampling(&x, &y, k, args.projection.seed)?,
            EstimatorId::CrsVarOnly => Estimate64 {
                estimator: id,
                value: f64::NAN,
                predicted_variance: Some(var_crs_predictor(&m, k)),
                k,
                p: 4,
            },
            _ => {
                let scheme = id.scheme().expect("projection estimator");
                let spec = args.projection.spec(scheme, x.dim())?;
                let sx = sketch_vector("x", &x, &spec, id.max_power())?;
                let sy = sketch_vector("y", &y, &spec, id.max_power())?;
                let mut e = from_sketches(id, &sx, &sy, args.tau)?;
                if let Some(v) = lpsketch::simlab::theoretical_variance(e.estimator, &m, k) {
                    e.predicted_variance = Some(v);
                }
                e
            }
        }
    };
    let mut out = output(&None)?;
    writeln!(out, "estimator,value,predicted_variance,k,p")?;
    let value = if est.value.is_nan() { String::new() } else { format_real(est.value) };
    writeln!(
        out,
        "{},{},{},{},{}",
        est.estimator,
        value,
        est.predicted_variance.map(format_real).unwrap_or_default(),
        est.k,
        est.p
    )?;
    out.flush()?;
    Ok(())
}

fn mse(args: &MseArgs) -> CliResult {
    let cfg = match &args.config {
        Some(path) => MseConfig::from_toml(&std::fs::read_to_string(path)?)?,
        None => MseConfig {
            k_grid: args.k_grid.clone(),
            trials: args.trials,
            estimators: args.estimators.clone(),
            seed: args.seed,
            distribution: args.dist.clone(),
            backend: args.backend.clone(),
            tau: args.tau,
            output: args.out.clone(),
            pair: PairConfig {
                kind: args.generator.clone(),
                path: args.pair.clone(),
                dim: args.dim,
                seed: Some(args.pair_seed),
                values: args.values.clone(),
                params: args.params.iter().cloned().collect::<BTreeMap<_, _>>(),
            },
        },
    };
    let spec = cfg.to_spec()?;
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = run_mse(&spec)?;
    let mut out = output(&cfg.output)?;
    write_mse_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn labeled(path: &PathBuf, dim: Option<usize>) -> Result<Vec<(lpsketch::DataVector64, i64)>, CliError> {
    let d = input::dataset(path, dim)?;
    let labels = d
        .labels
        .ok_or_else(|| CliError::Data(format!("{}: no label column", path.display())))?;
    Ok(d.rows.into_iter().zip(labels).collect())
}

fn knn(args: &KnnArgs) -> CliResult {
    let ds = if args.synthetic {
        BlobSpec {
            dim: args.dim.unwrap_or(500),
            classes: 2,
            train_per_class: args.per_class,
            test_per_class: args.per_class,
            shift: args.shift,
            informative: 25,
            density: args.density,
            label_noise: args.label_noise,
            seed: args.seed,
        }
        .generate()
        .map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        let (Some(train), Some(test)) = (&args.train, &args.test) else {
            return Err(CliError::Usage("give --train and --test, or --synthetic".into()));
        };
        LabeledDataset::from_parts(labeled(train, args.dim)?, labeled(test, args.dim)?)?
    };
    let mut results = p_sweep(&ds, &args.m, &args.p)?;
    if let Some(e) = &args.estimator {
        let id: EstimatorId = e.parse().map_err(|e: lpsketch::Error| CliError::Usage(e.to_string()))?;
        if args.repeats == 0 {
            return Err(CliError::Usage("--repeats must be positive".into()));
        }
        let seeds: Vec<u64> = (0..args.repeats as u64).map(|i| args.seed.wrapping_add(i)).collect();
        for &m in &args.m {
            results.push(knn_repeated(&ds, m, id, args.k, &seeds)?);
        }
    }
    let mut out = output(&args.out)?;
    write_knn_csv(&results, &mut out)?;
    out.flush()?;
    Ok(())
}

fn verify() -> CliResult {
    let checks = lpsketch::verify::run_quick_suite();
    let mut out = output(&None)?;
    for c in &checks {
        writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    out.flush()?;
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(CliError::Verify)
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Moments(a) => moments(a),
        Command::Sketch(a) => sketch(a),
        Command::Estimate(a) => estimate(a),
        Command::Mse(a) => mse(a),
        Command::Knn(a) => knn(a),
        Command::Verify => verify(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Data(m) => eprintln!("error: {m}"),
                CliError::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(e.code())
        }
    }
}
