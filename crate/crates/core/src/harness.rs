//! Multi-trial experiments, summary statistics and comparison tables.
//!
//! Every trial seed is derived from `(master_seed, trial_index)`, so trial
//! `t` of every (algorithm, objective) pair starts from the same stream. Trials
//! run in parallel; results are reassembled in (pair, trial) order, so the
//! output does not depend on scheduling.
//!
//! Files written by [`write_outputs`] (floats in shortest round-trip form):
//!
//! | file          | columns                                                        |
//! |---------------|----------------------------------------------------------------|
//! | `trials.csv`  | `algorithm,objective,trial,iteration,gbest_value`              |
//! | `finals.csv`  | `algorithm,objective,trial,seed,final_best_value,evaluations_used` |
//! | `summary.csv` | `algorithm,objective,trials,mean,std,median,min,max`           |
//! | `curves.csv`  | `algorithm,objective,iteration,median_gbest_value`             |
//! | `summary.json`| the [`ExperimentSummary`] document                             |
//!
//! Wall-clock times are kept out of the files so reruns are byte-identical.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::optimizers::run_with_stride;
use crate::rng::derive_seed;
use crate::swarm::PointVec;

pub const TRIALS_HEADER: &str = "algorithm,objective,trial,iteration,gbest_value";
pub const FINALS_HEADER: &str = "algorithm,objective,trial,seed,final_best_value,evaluations_used";
pub const SUMMARY_HEADER: &str = "algorithm,objective,trials,mean,std,median,min,max";
pub const CURVES_HEADER: &str = "algorithm,objective,iteration,median_gbest_value";
pub const COMPARISON_HEADER: &str =
    "objective,baseline_mean,baseline_median,challenger_mean,challenger_median,median_ratio,outcome";

/// Two medians closer than this are a tie.
pub const TIE_THRESHOLD: f64 = 1e-12;

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub algorithm: String,
    pub objective: String,
    pub trial_index: usize,
    pub seed: u64,
    /// `(iteration, gbest_value)`, starting with the initial swarm.
    pub history: Vec<(usize, f64)>,
    pub final_best_value: f64,
    pub final_best_position: PointVec,
    pub evaluations_used: u64,
    /// Seconds.
    pub wall_time: f64,
}

/// Seed of trial `trial_index` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial_index: usize) -> u64 {
    derive_seed(master_seed, trial_index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub objective: String,
    pub trial_count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Per recorded iteration, the median gbest across trials.
    pub median_curve: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub master_seed: u64,
    pub trials: usize,
    pub population: usize,
    pub max_iterations: usize,
    pub rows: Vec<SummaryRow>,
}

impl ExperimentSummary {
    pub fn row(&self, algorithm: &str, objective: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.objective == objective)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Raw trials plus their summary.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<TrialReport>,
    pub summary: ExperimentSummary,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n - 1` denominator), zero below two samples.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Run every trial of every (algorithm, objective) pair.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let max_iterations = config.max_iterations()?;
    let objectives = config
        .objectives
        .iter()
        .map(|o| o.build())
        .collect::<Result<Vec<_>>>()?;

    let mut tasks = Vec::new();
    for a in 0..config.algorithms.len() {
        for o in 0..objectives.len() {
            for t in 0..config.trials {
                tasks.push((a, o, t));
            }
        }
    }

    let run_task = |&(a, o, t): &(usize, usize, usize)| -> Result<TrialReport> {
        let spec = &config.algorithms[a];
        let objective = &objectives[o];
        let seed = trial_seed(config.master_seed, t);
        let wrap = |e: Error| Error::Trial {
            algorithm: spec.id().to_string(),
            objective: objective.name().to_string(),
            trial: t,
            seed,
            source: Box::new(e),
        };
        let opt = spec
            .optimizer_config(config.population, objective.dim(), max_iterations, seed)
            .map_err(wrap)?;
        let mut report = run_with_stride(&opt, objective, config.history_stride).map_err(wrap)?;
        report.algorithm = spec.id().to_string();
        report.trial_index = t;
        Ok(report)
    };

    let results: Vec<Result<TrialReport>> = if config.jobs == 1 {
        tasks.iter().map(run_task).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?;
        pool.install(|| tasks.par_iter().map(run_task).collect())
    };
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(String, String)> = config
        .algorithms
        .iter()
        .flat_map(|a| objectives.iter().map(move |o| (a.id().to_string(), o.name().to_string())))
        .collect();
    let mut summary = summarize(&reports, &pairs)?;
    summary.master_seed = config.master_seed;
    summary.trials = config.trials;
    summary.population = config.population;
    summary.max_iterations = max_iterations;
    Ok(ExperimentOutcome { reports, summary })
}

/// Aggregate reports per (algorithm, objective) pair, in the order of `pairs`.
/// The order of `reports` does not matter.
pub fn summarize(reports: &[TrialReport], pairs: &[(String, String)]) -> Result<ExperimentSummary> {
    let mut groups: BTreeMap<(&str, &str), Vec<&TrialReport>> = BTreeMap::new();
    for r in reports {
        groups.entry((&r.algorithm, &r.objective)).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (alg, obj) in pairs {
        let mut group = groups.remove(&(alg.as_str(), obj.as_str())).ok_or_else(|| {
            Error::config("reports", format!("no trials for {alg} on {obj}"))
        })?;
        group.sort_by_key(|r| r.trial_index);
        let finals: Vec<f64> = group.iter().map(|r| r.final_best_value).collect();
        rows.push(SummaryRow {
            algorithm: alg.clone(),
            objective: obj.clone(),
            trial_count: finals.len(),
            mean: mean(&finals),
            std: std_dev(&finals),
            median: median(&finals),
            min: finals.iter().copied().fold(f64::INFINITY, f64::min),
            max: finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            median_curve: median_curve(&group),
        });
    }
    let trials = rows.first().map_or(0, |r| r.trial_count);
    Ok(ExperimentSummary {
        master_seed: 0,
        trials,
        population: 0,
        max_iterations: 0,
        rows,
    })
}

fn median_curve(group: &[&TrialReport]) -> Vec<(usize, f64)> {
    let Some(first) = group.first() else {
        return Vec::new();
    };
    first
        .history
        .iter()
        .enumerate()
        .map(|(k, &(iteration, _))| {
            let column: Vec<f64> = group.iter().filter_map(|r| r.history.get(k).map(|h| h.1)).collect();
            (iteration, median(&column))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Loss,
    Tie,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Win => "win",
            Outcome::Loss => "loss",
            Outcome::Tie => "tie",
        }
    }
}

/// Challenger's result against the baseline on one objective, by median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub objective: String,
    pub baseline_mean: f64,
    pub baseline_median: f64,
    pub challenger_mean: f64,
    pub challenger_median: f64,
    /// `challenger_median / baseline_median`; 1 when both are zero.
    pub median_ratio: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub baseline: String,
    pub challenger: String,
    pub rows: Vec<ComparisonRow>,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

/// Per-objective win/loss/tie of `challenger` against `baseline`.
pub fn compare(summary: &ExperimentSummary, baseline: &str, challenger: &str) -> Result<ComparisonTable> {
    let objectives_of = |alg: &str| -> Vec<&str> {
        summary
            .rows
            .iter()
            .filter(|r| r.algorithm == alg)
            .map(|r| r.objective.as_str())
            .collect()
    };
    let base_objs = objectives_of(baseline);
    let chal_objs = objectives_of(challenger);
    if base_objs.is_empty() {
        return Err(Error::config("baseline", format!("`{baseline}` is not in the summary")));
    }
    if chal_objs.is_empty() {
        return Err(Error::config("challenger", format!("`{challenger}` is not in the summary")));
    }
    let base_set: HashSet<_> = base_objs.iter().collect();
    let chal_set: HashSet<_> = chal_objs.iter().collect();
    if base_set != chal_set {
        return Err(Error::config(
            "objectives",
            format!("`{baseline}` and `{challenger}` were run on different objective sets"),
        ));
    }
    let mut table = ComparisonTable {
        baseline: baseline.to_string(),
        challenger: challenger.to_string(),
        rows: Vec::new(),
        wins: 0,
        losses: 0,
        ties: 0,
    };
    for obj in base_objs {
        let b = summary.row(baseline, obj).expect("present");
        let c = summary.row(challenger, obj).expect("present");
        let outcome = if (c.median - b.median).abs() <= TIE_THRESHOLD {
            Outcome::Tie
        } else if c.median < b.median {
            Outcome::Win
        } else {
            Outcome::Loss
        };
        match outcome {
            Outcome::Win => table.wins += 1,
            Outcome::Loss => table.losses += 1,
            Outcome::Tie => table.ties += 1,
        }
        let median_ratio = if b.median == c.median {
            1.0
        } else {
            c.median / b.median
        };
        table.rows.push(ComparisonRow {
            objective: obj.to_string(),
            baseline_mean: b.mean,
            baseline_median: b.median,
            challenger_mean: c.mean,
            challenger_median: c.median,
            median_ratio,
            outcome,
        });
    }
    Ok(table)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn trials_csv(reports: &[TrialReport]) -> String {
    let mut out = String::from(TRIALS_HEADER);
    out.push('\n');
    for r in reports {
        for &(k, v) in &r.history {
            let _ = writeln!(out, "{},{},{},{},{}", r.algorithm, r.objective, r.trial_index, k, num(v));
        }
    }
    out
}

pub fn finals_csv(reports: &[TrialReport]) -> String {
    let mut out = String::from(FINALS_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.algorithm,
            r.objective,
            r.trial_index,
            r.seed,
            num(r.final_best_value),
            r.evaluations_used
        );
    }
    out
}

pub fn summary_csv(summary: &ExperimentSummary) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.objective,
            r.trial_count,
            num(r.mean),
            num(r.std),
            num(r.median),
            num(r.min),
            num(r.max)
        );
    }
    out
}

pub fn curves_csv(summary: &ExperimentSummary) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for r in &summary.rows {
        for &(k, v) in &r.median_curve {
            let _ = writeln!(out, "{},{},{},{}", r.algorithm, r.objective, k, num(v));
        }
    }
    out
}

pub fn comparison_csv(table: &ComparisonTable) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.objective,
            num(r.baseline_mean),
            num(r.baseline_median),
            num(r.challenger_mean),
            num(r.challenger_median),
            num(r.median_ratio),
            r.outcome.name()
        );
    }
    out
}

/// Refuse to write into a non-empty directory unless `force` is set.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir)?.next().is_some();
        if non_empty && !force {
            return Err(Error::config(
                "output_dir",
                format!("{} is not empty; pass --force to overwrite", dir.display()),
            ));
        }
    } else {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Write the experiment files listed in the module docs.
pub fn write_outputs(dir: &Path, outcome: &ExperimentOutcome, force: bool) -> Result<()> {
    prepare_output_dir(dir, force)?;
    fs::write(dir.join("trials.csv"), trials_csv(&outcome.reports))?;
    fs::write(dir.join("finals.csv"), finals_csv(&outcome.reports))?;
    fs::write(dir.join("summary.csv"), summary_csv(&outcome.summary))?;
    fs::write(dir.join("curves.csv"), curves_csv(&outcome.summary))?;
    let mut json = outcome.summary.to_json()?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(())
}

/// Result of an epsilon sweep: one gcpso column per coupling strength.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub epsilons: Vec<f64>,
    /// Values dropped from the request because they repeated.
    pub duplicates: Vec<f64>,
    pub outcome: ExperimentOutcome,
    /// Each epsilon against the zero-coupling column.
    pub comparisons: Vec<ComparisonTable>,
}

pub fn sweep_label(epsilon: f64) -> String {
    format!("gcpso_eps={epsilon}")
}

/// Run gcpso once per coupling strength with a shared master seed.
///
/// Hyperparameters other than epsilon come from the first gcpso entry of
/// `config.algorithms`, if any. Repeated values are dropped; zero is added
/// when missing so every column can be compared against it.
pub fn sweep_epsilon(config: &ExperimentConfig, epsilons: &[f64]) -> Result<SweepOutcome> {
    if epsilons.is_empty() {
        return Err(Error::config("epsilon", "the sweep needs at least one value"));
    }
    let mut unique: Vec<f64> = Vec::new();
    let mut duplicates = Vec::new();
    for &e in epsilons {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::config("epsilon", format!("{e} is outside the range [0,1]")));
        }
        if unique.contains(&e) {
            duplicates.push(e);
        } else {
            unique.push(e);
        }
    }
    if !unique.contains(&0.0) {
        unique.insert(0, 0.0);
    }
    let template = config
        .algorithms
        .iter()
        .find(|a| a.name == "gcpso" || a.name == "psocml")
        .cloned()
        .unwrap_or_else(|| crate::config::AlgorithmSpec::named("gcpso"));
    let mut swept = config.clone();
    swept.algorithms = unique
        .iter()
        .map(|&e| crate::config::AlgorithmSpec {
            name: "gcpso".into(),
            label: Some(sweep_label(e)),
            epsilon: Some(e),
            ..template.clone()
        })
        .collect();
    let outcome = run_experiment(&swept)?;
    let baseline = sweep_label(0.0);
    let comparisons = unique
        .iter()
        .filter(|&&e| e != 0.0)
        .map(|&e| compare(&outcome.summary, &baseline, &sweep_label(e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome {
        epsilons: unique,
        duplicates,
        outcome,
        comparisons,
    })
}

/// Wide table of median final values: one row per objective, one column per epsilon.
pub fn sweep_csv(sweep: &SweepOutcome) -> String {
    let mut out = String::from("objective");
    for e in &sweep.epsilons {
        let _ = write!(out, ",eps={e}");
    }
    out.push('\n');
    let mut objectives: Vec<&str> = Vec::new();
    for r in &sweep.outcome.summary.rows {
        if !objectives.contains(&r.objective.as_str()) {
            objectives.push(&r.objective);
        }
    }
    for obj in objectives {
        out.push_str(obj);
        for &e in &sweep.epsilons {
            let median = sweep
                .outcome
                .summary
                .row(&sweep_label(e), obj)
                .map_or(f64::NAN, |r| r.median);
            let _ = write!(out, ",{}", num(median));
        }
        out.push('\n');
    }
    out
}

/// Long-form comparisons of every epsilon against zero coupling.
pub fn sweep_comparison_csv(sweep: &SweepOutcome) -> String {
    let mut out = format!("challenger,{COMPARISON_HEADER}\n");
    for table in &sweep.comparisons {
        for line in comparison_csv(table).lines().skip(1) {
            let _ = writeln!(out, "{},{line}", table.challenger);
        }
    }
    out
}

pub fn write_sweep_outputs(dir: &Path, sweep: &SweepOutcome, force: bool) -> Result<()> {
    write_outputs(dir, &sweep.outcome, force)?;
    fs::write(dir.join("sweep.csv"), sweep_csv(sweep))?;
    fs::write(dir.join("sweep_comparison.csv"), sweep_comparison_csv(sweep))?;
    Ok(())
}
