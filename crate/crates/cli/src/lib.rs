//! Command-line front end: CSV ingestion, the `solve`, `path`, `bench` and
//! `gen` commands, and CSV emission of weights and traces.
//!
//! Dataset files have a header row followed by one row per sample:
//! `task, x_1, …, x_n, y`. Task ids run densely over `1..=k`; rows of a task
//! need not be contiguous. Floats are written with 17 significant digits so
//! every file reloads bit-for-bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use mtfl_core::{
    build_amtfl1, build_amtfl2, generate_synthetic, nesterov_solve, projected_gradient_solve, solve_path, Amtfl1Spec,
    Amtfl2Spec, ConstrainedProblem, IterationRecord, L21Ball, LeastSquares, Logistic, LossFunction, PathResult,
    Reformulation, SolveResult, SolverConfig, StartMode, SyntheticSpec, Task, TaskDataset, WeightMatrix,
};
use ndarray::{Array1, Array2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Fit one model and write weights.csv and trace.csv.
    Solve,
    /// Fit a sequence of models and write path_summary.csv.
    Path,
    /// Race accelerated against plain projected gradient to a shared target.
    Bench,
    /// Write a synthetic dataset and its ground-truth weights.
    Gen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossKind {
    LeastSquares,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReformulationKind {
    /// Penalized form, parameter `--rho`.
    Amtfl1,
    /// Ball-constrained form, parameter `--z`.
    Amtfl2,
}

impl From<ReformulationKind> for Reformulation {
    fn from(kind: ReformulationKind) -> Self {
        match kind {
            ReformulationKind::Amtfl1 => Reformulation::Amtfl1,
            ReformulationKind::Amtfl2 => Reformulation::Amtfl2,
        }
    }
}

/// Raw command-line flags. Convert with [`RunConfig::from_args`].
#[derive(Debug, Clone, Parser)]
#[command(name = "mtfl", version, about = "l2,1-regularized multi-task feature learning")]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "least-squares")]
    pub loss: LossKind,
    #[arg(long, value_enum, default_value = "amtfl1")]
    pub reformulation: ReformulationKind,
    /// Regularization weight (amtfl1).
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// ℓ2,1-ball radius (amtfl2).
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    /// Comma-separated path parameters: decreasing rho or increasing z.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub params: Option<Vec<f64>>,
    /// Start each path problem from the previous solution.
    #[arg(long)]
    pub warm: bool,
    /// Initial line-search curvature estimate.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub l0: f64,
    /// Relative objective-change tolerance.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of features for generated data.
    #[arg(long, default_value_t = 20)]
    pub features: usize,
    /// Number of tasks for generated data.
    #[arg(long, default_value_t = 5)]
    pub tasks: usize,
    /// Samples per task for generated data.
    #[arg(long, default_value_t = 30)]
    pub samples: usize,
    /// Fraction of zero feature rows in generated ground truth.
    #[arg(long, default_value_t = 0.3)]
    pub sparsity: f64,
    /// Standard deviation of the additive noise in generated targets.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
}

/// Shape of a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenShape {
    pub features: usize,
    pub tasks: usize,
    pub samples_per_task: usize,
    pub sparsity: f64,
    pub noise_sigma: f64,
}

/// A validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub loss: LossKind,
    pub reformulation: Reformulation,
    /// One value for `solve`/`bench`, the whole sequence for `path`.
    pub params: Vec<f64>,
    pub warm: bool,
    pub solver: SolverConfig<f64>,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub shape: GenShape,
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self> {
        let reformulation: Reformulation = args.reformulation.into();
        let (wanted, other) = match reformulation {
            Reformulation::Amtfl1 => (("--rho", args.rho), ("--z", args.z)),
            Reformulation::Amtfl2 => (("--z", args.z), ("--rho", args.rho)),
        };
        if other.1.is_some() {
            bail!("{} does not apply to {:?}; use {}", other.0, args.reformulation, wanted.0);
        }
        let params = match args.command {
            Command::Solve | Command::Bench => {
                if args.params.is_some() {
                    bail!("--params is only used by the path command");
                }
                match wanted.1 {
                    Some(v) => vec![v],
                    None => bail!("{:?} needs {}", args.reformulation, wanted.0),
                }
            }
            Command::Path => {
                if wanted.1.is_some() {
                    bail!("the path command takes its parameters from --params");
                }
                match args.params {
                    Some(p) if !p.is_empty() => p,
                    _ => bail!("the path command needs --params"),
                }
            }
            Command::Gen => Vec::new(),
        };
        if args.warm && args.command != Command::Path {
            bail!("--warm is only used by the path command");
        }
        let needs_seed = args.command == Command::Gen || (args.command == Command::Bench && args.input.is_none());
        if needs_seed && args.seed.is_none() {
            bail!("{:?} on generated data needs --seed", args.command);
        }
        if args.input.is_none() && matches!(args.command, Command::Solve | Command::Path) {
            bail!("{:?} needs --input", args.command);
        }
        let solver = SolverConfig {
            l0: args.l0,
            max_iterations: args.max_iters,
            rel_gap_tol: args.tol,
            ..SolverConfig::default()
        };
        solver.validate()?;
        Ok(Self {
            command: args.command,
            loss: args.loss,
            reformulation,
            params,
            warm: args.warm,
            solver,
            input: args.input,
            out: args.out,
            seed: args.seed,
            shape: GenShape {
                features: args.features,
                tasks: args.tasks,
                samples_per_task: args.samples,
                sparsity: args.sparsity,
                noise_sigma: args.noise,
            },
        })
    }
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    IterationCap,
}

impl Outcome {
    /// `0` converged, `2` iteration cap. Errors exit with `1`.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::IterationCap => 2,
        }
    }

    fn from_converged(converged: bool) -> Self {
        if converged {
            Outcome::Converged
        } else {
            Outcome::IterationCap
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a dataset CSV, grouping rows by task id.
pub fn load_dataset(path: &Path) -> Result<TaskDataset<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let columns = reader.headers().with_context(|| format!("{}: cannot read header", path.display()))?.len();
    if columns < 3 {
        bail!("{}: header has {columns} columns, need task id, at least one feature and a target", path.display());
    }
    let features = columns - 2;
    let mut groups: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != columns {
            bail!("{}:{line}: expected {columns} columns, found {}", path.display(), record.len());
        }
        let id: usize = record[0].parse().with_context(|| {
            format!("{}:{line}: task id {:?} is not a positive integer", path.display(), &record[0])
        })?;
        if id == 0 {
            bail!("{}:{line}: task ids start at 1", path.display());
        }
        let (design, targets) = groups.entry(id).or_default();
        for (c, field) in record.iter().enumerate().skip(1) {
            let value: f64 = field.parse().with_context(|| {
                format!("{}:{line}: column {} value {field:?} is not a number", path.display(), c + 1)
            })?;
            if c == columns - 1 {
                targets.push(value);
            } else {
                design.push(value);
            }
        }
    }
    if groups.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let k = *groups.keys().next_back().expect("nonempty");
    if let Some(missing) = (1..=k).find(|id| !groups.contains_key(id)) {
        bail!("{}: task ids must be dense 1..{k}; id {missing} has no rows", path.display());
    }
    let tasks = groups
        .into_values()
        .map(|(design, targets)| {
            let m = targets.len();
            Task::new(
                Array2::from_shape_vec((m, features), design).expect("row lengths checked"),
                Array1::from(targets),
            )
        })
        .collect();
    Ok(TaskDataset::new(tasks)?)
}

/// Writes a dataset in the format read by [`load_dataset`].
pub fn write_dataset(path: &Path, dataset: &TaskDataset<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut header = vec!["task".to_string()];
    header.extend((1..=dataset.num_features()).map(|i| format!("x_{i}")));
    header.push("y".into());
    w.write_record(&header)?;
    for (j, task) in dataset.tasks().iter().enumerate() {
        for (row, &y) in task.design.rows().into_iter().zip(task.targets.iter()) {
            let mut rec = vec![(j + 1).to_string()];
            rec.extend(row.iter().map(|&x| fmt(x)));
            rec.push(fmt(y));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `W` as `n` rows under the header `col_1..col_k`.
pub fn write_weights(path: &Path, w: &WeightMatrix<f64>) -> Result<()> {
    let mut out = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    out.write_record((1..=w.num_tasks()).map(|j| format!("col_{j}")))?;
    for row in w.as_array().rows() {
        out.write_record(row.iter().map(|&x| fmt(x)))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a file written by [`write_weights`].
pub fn load_weights(path: &Path) -> Result<WeightMatrix<f64>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let k = reader.headers()?.len();
    let mut values = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record?;
        for field in record.iter() {
            values.push(field.parse::<f64>().with_context(|| format!("{}: bad value {field:?}", path.display()))?);
        }
        n += 1;
    }
    let entries = Array2::from_shape_vec((n, k), values).context("ragged weights file")?;
    Ok(WeightMatrix::new(entries)?)
}

pub fn write_trace(path: &Path, trace: &[IterationRecord<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["iteration", "objective", "gamma", "linesearch_trials", "elapsed_seconds"])?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            fmt(r.objective),
            fmt(r.gamma),
            r.linesearch_trials.to_string(),
            fmt(r.elapsed_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_path_summary(path: &Path, result: &PathResult<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["param", "objective", "iterations", "selected_rows"])?;
    for p in &result.points {
        w.write_record([
            fmt(p.param),
            fmt(p.objective),
            p.iterations.to_string(),
            p.solution.selected_rows().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of `bench.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub iterations: usize,
    pub seconds: f64,
    pub reached_target: bool,
}

pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["method", "iterations", "seconds"])?;
    for r in rows {
        w.write_record([r.method.to_string(), r.iterations.to_string(), fmt(r.seconds)])?;
    }
    w.flush()?;
    Ok(())
}

/// Executes a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    if cfg.command == Command::Gen {
        return generate(cfg);
    }
    let dataset = match &cfg.input {
        Some(path) => load_dataset(path)?,
        None => synthetic(cfg)?.dataset,
    };
    match cfg.loss {
        LossKind::LeastSquares => dispatch(cfg, &LeastSquares, &dataset),
        LossKind::Logistic => dispatch(cfg, &Logistic, &dataset),
    }
}

fn synthetic(cfg: &RunConfig) -> Result<mtfl_core::SyntheticData<f64>> {
    let seed = cfg.seed.context("generated data needs a seed")?;
    Ok(generate_synthetic(&SyntheticSpec {
        features: cfg.shape.features,
        tasks: cfg.shape.tasks,
        samples_per_task: cfg.shape.samples_per_task,
        sparsity: cfg.shape.sparsity,
        noise_sigma: cfg.shape.noise_sigma,
        seed,
    })?)
}

fn generate(cfg: &RunConfig) -> Result<Outcome> {
    let data = synthetic(cfg)?;
    write_dataset(&cfg.out.join("dataset.csv"), &data.dataset)?;
    write_weights(&cfg.out.join("truth.csv"), &data.truth)?;
    println!(
        "wrote {} samples, {} features, {} tasks to {}",
        data.dataset.num_samples(),
        data.dataset.num_features(),
        data.dataset.num_tasks(),
        cfg.out.display()
    );
    Ok(Outcome::Converged)
}

fn dispatch<L: LossFunction<f64>>(cfg: &RunConfig, loss: &L, dataset: &TaskDataset<f64>) -> Result<Outcome> {
    match cfg.command {
        Command::Solve => solve(cfg, loss, dataset),
        Command::Path => path(cfg, loss, dataset),
        Command::Bench => bench(cfg, loss, dataset),
        Command::Gen => unreachable!("handled before loading data"),
    }
}

fn report_solve(cfg: &RunConfig, weights: &WeightMatrix<f64>, res: &SolveResult<f64, impl Clone>) -> Result<Outcome> {
    write_weights(&cfg.out.join("weights.csv"), weights)?;
    write_trace(&cfg.out.join("trace.csv"), &res.trace)?;
    println!(
        "objective {} after {} iterations ({}), {} selected rows",
        fmt(res.final_objective),
        res.iterations,
        if res.converged { "converged" } else { "iteration cap" },
        weights.selected_rows()
    );
    Ok(Outcome::from_converged(res.converged))
}

fn solve<L: LossFunction<f64>>(cfg: &RunConfig, loss: &L, dataset: &TaskDataset<f64>) -> Result<Outcome> {
    let param = cfg.params[0];
    match cfg.reformulation {
        Reformulation::Amtfl1 => {
            let problem = build_amtfl1(Amtfl1Spec { loss, dataset, rho: param })?;
            let res = nesterov_solve(&problem, &problem.origin(), &cfg.solver)?;
            report_solve(cfg, &res.solution.w, &res)
        }
        Reformulation::Amtfl2 => {
            let problem = build_amtfl2(Amtfl2Spec { loss, dataset, ball: L21Ball::new(param)? })?;
            let res = nesterov_solve(&problem, &problem.origin(), &cfg.solver)?;
            report_solve(cfg, &res.solution, &res)
        }
    }
}

fn path<L: LossFunction<f64>>(cfg: &RunConfig, loss: &L, dataset: &TaskDataset<f64>) -> Result<Outcome> {
    let mode = if cfg.warm { StartMode::Warm } else { StartMode::Cold };
    let result = solve_path(loss, dataset, cfg.reformulation, &cfg.params, mode, &cfg.solver)?;
    for (i, point) in result.points.iter().enumerate() {
        write_weights(&cfg.out.join(format!("weights_{:03}.csv", i + 1)), &point.solution)?;
    }
    write_path_summary(&cfg.out.join("path_summary.csv"), &result)?;
    println!("{} problems, {} iterations in total ({mode:?} starts)", result.points.len(), result.total_iterations);
    Ok(Outcome::from_converged(result.points.iter().all(|p| p.converged)))
}

/// Relative tolerance of the reference solve that fixes the bench target.
const REFERENCE_TOL: f64 = 1e-10;

fn race<P: ConstrainedProblem<f64>>(problem: &P, x0: &P::Point, cfg: &SolverConfig<f64>) -> Result<Vec<BenchRow>> {
    let reference_cfg =
        SolverConfig { rel_gap_tol: REFERENCE_TOL, max_iterations: cfg.max_iterations.max(100_000), ..*cfg };
    let reference = nesterov_solve(problem, x0, &reference_cfg)?.final_objective;
    let target = reference + cfg.rel_gap_tol * reference.abs().max(1.0);
    let race_cfg = cfg.with_target(target);
    let mut rows = Vec::with_capacity(2);
    // sequential on purpose: the timings must not share the machine
    let start = Instant::now();
    let accelerated = nesterov_solve(problem, x0, &race_cfg)?;
    rows.push(BenchRow {
        method: "nesterov",
        iterations: accelerated.iterations,
        seconds: start.elapsed().as_secs_f64(),
        reached_target: accelerated.converged,
    });
    let start = Instant::now();
    let plain = projected_gradient_solve(problem, x0, &race_cfg)?;
    rows.push(BenchRow {
        method: "projected_gradient",
        iterations: plain.iterations,
        seconds: start.elapsed().as_secs_f64(),
        reached_target: plain.converged,
    });
    println!("target objective {}", fmt(target));
    Ok(rows)
}

fn bench<L: LossFunction<f64>>(cfg: &RunConfig, loss: &L, dataset: &TaskDataset<f64>) -> Result<Outcome> {
    let param = cfg.params[0];
    let rows = match cfg.reformulation {
        Reformulation::Amtfl1 => {
            let problem = build_amtfl1(Amtfl1Spec { loss, dataset, rho: param })?;
            race(&problem, &problem.origin(), &cfg.solver)?
        }
        Reformulation::Amtfl2 => {
            let problem = build_amtfl2(Amtfl2Spec { loss, dataset, ball: L21Ball::new(param)? })?;
            race(&problem, &problem.origin(), &cfg.solver)?
        }
    };
    write_bench(&cfg.out.join("bench.csv"), &rows)?;
    for r in &rows {
        println!("{:<20} {:>8} iterations {:>12.6}s", r.method, r.iterations, r.seconds);
    }
    Ok(Outcome::from_converged(rows.iter().all(|r| r.reached_target)))
}
