use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gcpso_core::config::{default_output_dir, AlgorithmSpec, Budget, ExperimentConfig, ObjectiveSpec};
use gcpso_core::harness::{self, ExperimentOutcome};
use gcpso_core::objectives::BaseFunction;
use gcpso_core::{orbit, Algorithm, LatticeState, LocalMap, Objective, RngStream, Topology};

#[derive(Parser)]
#[command(name = "gcpso", version, about = "Globally coupled particle swarm optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial (or a small experiment) and write its CSVs.
    Run(Overrides),
    /// Run the full multi-trial protocol.
    Experiment {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run gcpso once per coupling strength and compare against zero coupling.
    SweepEpsilon {
        /// Comma-separated coupling strengths in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare two algorithms from a summary.json.
    Compare {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long, default_value = "pso")]
        baseline: String,
        #[arg(long, default_value = "gcpso")]
        challenger: String,
        /// Also write the table as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Iterate a coupled map lattice and dump the space-time field as CSV.
    Cml(CmlArgs),
    /// Write a configuration file with every field at its default.
    InitConfig {
        #[arg(long, value_enum, default_value_t = Preset::Full)]
        preset: Preset,
        /// Destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// List the objective catalog.
    ListObjectives,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// d=30, n=40, 51 trials, 300000 evaluations.
    Full,
    /// d=10, n=40, 11 trials, 1000 iterations.
    Desk,
}

impl Preset {
    fn config(self) -> ExperimentConfig {
        match self {
            Preset::Full => ExperimentConfig::default(),
            Preset::Desk => ExperimentConfig::desk(),
        }
    }
}

/// Flags that override configuration fields. Precedence: flag, then file, then default.
#[derive(Args, Default)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Starting point when no file is given.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Comma-separated algorithm names (`algorithms`).
    #[arg(long, value_delimiter = ',')]
    algorithm: Vec<String>,
    /// Comma-separated objective names (`objectives`).
    #[arg(long, value_delimiter = ',')]
    objective: Vec<String>,
    /// Dimension of every objective (`objectives[].dimension`).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Iteration budget (`budget.iterations`).
    #[arg(long, conflicts_with = "evals")]
    iters: Option<usize>,
    /// Evaluation budget (`budget.evaluations`).
    #[arg(long)]
    evals: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed (`master_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Coupling strength of every gcpso entry (`algorithms[].epsilon`).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory (`output_dir`); defaults to $GCPSO_OUTPUT_DIR or ./results.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Keep every n-th history entry (`history_stride`).
    #[arg(long)]
    stride: Option<usize>,
    /// Worker threads, 0 for one per core (`jobs`).
    #[arg(long)]
    jobs: Option<usize>,
    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    force: bool,
}

impl Overrides {
    fn resolve(&self, base: ExperimentConfig) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => match self.preset {
                Some(p) => p.config(),
                None => base,
            },
        };
        if !self.algorithm.is_empty() {
            config.algorithms = self.algorithm.iter().map(AlgorithmSpec::named).collect();
        }
        if !self.objective.is_empty() {
            let dim = self.dim.or(config.objectives.first().map(|o| o.dimension)).unwrap_or(30);
            config.objectives = self.objective.iter().map(|n| ObjectiveSpec::new(n, dim)).collect();
        }
        if let Some(d) = self.dim {
            for o in &mut config.objectives {
                o.dimension = d;
            }
        }
        if let Some(n) = self.population {
            config.population = n;
        }
        if let Some(k) = self.iters {
            config.budget = Budget::Iterations(k);
        }
        if let Some(e) = self.evals {
            config.budget = Budget::Evaluations(e);
        }
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        if let Some(e) = self.epsilon {
            for a in &mut config.algorithms {
                if Algorithm::from_name(&a.name).ok() == Some(Algorithm::Gcpso) {
                    a.epsilon = Some(e);
                }
            }
        }
        if let Some(o) = &self.output {
            config.output_dir = o.clone();
        }
        if let Some(s) = self.stride {
            config.history_stride = s;
        }
        if let Some(j) = self.jobs {
            config.jobs = j;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct CmlArgs {
    #[arg(long, default_value = "global")]
    topology: String,
    #[arg(long, value_enum, default_value_t = MapKind::Logistic)]
    map: MapKind,
    /// Logistic r or tent slope.
    #[arg(long, default_value_t = 4.0)]
    param: f64,
    /// Number of cells L.
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start every cell at this value instead of random.
    #[arg(long)]
    homogeneous: Option<f64>,
    /// CSV destination; defaults to <output dir>/cml.csv.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    Logistic,
    Tent,
}

const CONFIG_HELP: &str = "\
# gcpso experiment configuration (TOML). Unknown keys are rejected.
#
# trials          independent runs per (algorithm, objective) pair
# master_seed     trial t uses a seed derived from (master_seed, t)
# population      particles per swarm
# budget          { iterations = N } or { evaluations = E }; E includes the
#                 initial swarm, so E evaluations give floor((E - n) / n) iterations
# history_stride  record gbest every k iterations (plus the first and last)
# output_dir      where CSVs go; $GCPSO_OUTPUT_DIR overrides the built-in default
# jobs            worker threads; 0 uses every core
#
# [[algorithms]]  name = pso | gcpso | fips | all_informed | cml_perturbed
#                 optional: label, epsilon (0.1), c1 (2), c2 (2), chi (0.7298),
#                 phi (4.1), neighborhood (full | ring), lambda, v_max_fraction (0.2),
#                 inertia = { kind = \"linear\", start = 0.9, end = 0.4 }
#                          | { kind = \"constant\", w = 0.7 }
#                          | { kind = \"uniform_random\", lo = 0.4, hi = 0.9 }
# [[objectives]]  name (see `gcpso list-objectives`), dimension (30), transform_seed (0)

";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(o) => {
            let base = ExperimentConfig {
                trials: 1,
                algorithms: vec![AlgorithmSpec::named("gcpso")],
                objectives: vec![ObjectiveSpec::new("sphere", 30)],
                ..ExperimentConfig::default()
            };
            experiment(&o, base)
        }
        Command::Experiment { overrides } => experiment(&overrides, ExperimentConfig::default()),
        Command::SweepEpsilon { epsilons, overrides } => sweep(&overrides, &epsilons),
        Command::Compare {
            summary,
            baseline,
            challenger,
            output,
            force,
        } => compare(&summary, &baseline, &challenger, output.as_deref(), force),
        Command::Cml(args) => cml(&args),
        Command::InitConfig { preset, output, force } => {
            let text = format!(
                "{CONFIG_HELP}{}",
                preset.config().to_toml_string()?
            );
            match output {
                Some(path) => {
                    refuse_overwrite(&path, force)?;
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                    println!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::ListObjectives => {
            println!("{:<12} {:>10}  optimum", "name", "box");
            for f in BaseFunction::ALL {
                let o = Objective::base(f, 1)?;
                let x = o.known_optimum_position().map(|p| p[0]).unwrap_or(f64::NAN);
                println!("{:<12} {:>10}  0 at x_j = {x}", f.name(), format!("±{}", f.half_width()));
            }
            println!("suffixes: _shifted, _rotated, _shifted_rotated (e.g. rastrigin_shifted_rotated)");
            Ok(())
        }
    }
}

fn print_summary(outcome: &ExperimentOutcome, elapsed: f64) {
    for r in &outcome.summary.rows {
        println!(
            "{:<16} {:<28} trials={:<3} best={:e} median={:e} mean={:e} std={:e}",
            r.algorithm, r.objective, r.trial_count, r.min, r.median, r.mean, r.std
        );
    }
    println!(
        "{} trials, {} iterations each, {:.2}s",
        outcome.reports.len(),
        outcome.summary.max_iterations,
        elapsed
    );
}

fn experiment(overrides: &Overrides, base: ExperimentConfig) -> Result<()> {
    let config = overrides.resolve(base)?;
    harness::prepare_output_dir(&config.output_dir, overrides.force)?;
    let started = Instant::now();
    let outcome = harness::run_experiment(&config)?;
    harness::write_outputs(&config.output_dir, &outcome, overrides.force)?;
    if let [single] = outcome.reports.as_slice() {
        println!("final best value: {:e}", single.final_best_value);
    }
    print_summary(&outcome, started.elapsed().as_secs_f64());
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

fn sweep(overrides: &Overrides, epsilons: &[f64]) -> Result<()> {
    let config = overrides.resolve(ExperimentConfig::default())?;
    harness::prepare_output_dir(&config.output_dir, overrides.force)?;
    let started = Instant::now();
    let sweep = harness::sweep_epsilon(&config, epsilons)?;
    for d in &sweep.duplicates {
        eprintln!("warning: duplicate epsilon {d} ignored");
    }
    if !epsilons.contains(&0.0) {
        eprintln!("warning: epsilon 0 added as the comparison baseline");
    }
    harness::write_sweep_outputs(&config.output_dir, &sweep, overrides.force)?;
    print_summary(&sweep.outcome, started.elapsed().as_secs_f64());
    for t in &sweep.comparisons {
        println!(
            "{} vs {}: {} wins, {} losses, {} ties",
            t.challenger, t.baseline, t.wins, t.losses, t.ties
        );
    }
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

fn compare(summary: &Path, baseline: &str, challenger: &str, output: Option<&Path>, force: bool) -> Result<()> {
    let text = fs::read_to_string(summary).with_context(|| format!("reading {}", summary.display()))?;
    let summary = gcpso_core::ExperimentSummary::from_json(&text)?;
    let table = harness::compare(&summary, baseline, challenger)?;
    println!(
        "{:<28} {:>14} {:>14} {:>12}  outcome",
        "objective", baseline, challenger, "ratio"
    );
    for r in &table.rows {
        println!(
            "{:<28} {:>14.6e} {:>14.6e} {:>12.4e}  {}",
            r.objective,
            r.baseline_median,
            r.challenger_median,
            r.median_ratio,
            r.outcome.name()
        );
    }
    println!(
        "{challenger} vs {baseline}: {} wins, {} losses, {} ties",
        table.wins, table.losses, table.ties
    );
    if let Some(path) = output {
        refuse_overwrite(path, force)?;
        fs::write(path, harness::comparison_csv(&table))?;
    }
    Ok(())
}

fn cml(args: &CmlArgs) -> Result<()> {
    let topology: Topology = args.topology.parse()?;
    let map = match args.map {
        MapKind::Logistic => LocalMap::Logistic(args.param),
        MapKind::Tent => LocalMap::Tent(args.param),
    };
    map.validate()?;
    let initial = match args.homogeneous {
        Some(v) => LatticeState::homogeneous(args.size, v, args.epsilon, topology)?,
        None => LatticeState::random(args.size, args.epsilon, topology, &mut RngStream::new(args.seed))?,
    };
    let path = args
        .output
        .clone()
        .unwrap_or_else(|| default_output_dir().join("cml.csv"));
    refuse_overwrite(&path, args.force)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let states = orbit(&initial, &map, args.steps);
    let mut out = String::from("time");
    for i in 0..args.size {
        out.push_str(&format!(",c{i}"));
    }
    out.push('\n');
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &states {
        out.push_str(&s.time().to_string());
        for &c in s.cells() {
            lo = lo.min(c);
            hi = hi.max(c);
            out.push(',');
            out.push_str(&format!("{c:e}"));
        }
        out.push('\n');
    }
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    println!("min cell value: {lo:e}");
    println!("max cell value: {hi:e}");
    println!("wrote {} ({} rows x {} cells)", path.display(), states.len(), args.size);
    Ok(())
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} exists; pass --force to overwrite", path.display());
    }
    Ok(())
}
