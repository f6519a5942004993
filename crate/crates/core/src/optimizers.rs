//! Velocity and position update rules.
//!
//! Five update rules share one iteration skeleton: compute every particle's
//! new velocity from the state at iteration `k`, clamp it, move, clip to the
//! box, evaluate, then fold the fitnesses into the personal and global bests.
//! Velocities are computed for the whole swarm before anyone moves, because
//! the coupled social term reads every particle's current position.
//!
//! Random factors are drawn per particle and per dimension in particle-major,
//! dimension-minor order. `pso`, `gcpso` and `cml_perturbed` use the same
//! schedule (`r1` then `r2` for each component), so `gcpso` with zero
//! coupling and `cml_perturbed` with zero amplitude retrace `pso` exactly.

use serde::{Deserialize, Serialize};

use crate::cml::{LatticeState, LocalMap, Topology};
use crate::error::{Error, Result};
use crate::harness::TrialReport;
use crate::objectives::Objective;
use crate::rng::{derive_seed, RngStream, UniformSource};
use crate::swarm::{apply_bounds_in_place, clamp_velocity_in_place, init_swarm, PointVec, SwarmState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pso,
    /// Globally coupled PSO (also known as PSOCML).
    Gcpso,
    Fips,
    AllInformed,
    CmlPerturbed,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Pso,
        Algorithm::Gcpso,
        Algorithm::Fips,
        Algorithm::AllInformed,
        Algorithm::CmlPerturbed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pso => "pso",
            Algorithm::Gcpso => "gcpso",
            Algorithm::Fips => "fips",
            Algorithm::AllInformed => "all_informed",
            Algorithm::CmlPerturbed => "cml_perturbed",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let name = if name == "psocml" { "gcpso" } else { name };
        Self::ALL.into_iter().find(|a| a.name() == name).ok_or_else(|| {
            let valid: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
            Error::config(
                "algorithm",
                format!("unknown algorithm `{name}`; valid: {}", valid.join(", ")),
            )
        })
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Inertia weight as a function of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InertiaSchedule {
    Constant { w: f64 },
    /// Linear from `start` at the first update to `end` at the last.
    Linear { start: f64, end: f64 },
    /// A fresh uniform draw in `[lo, hi)` each iteration.
    UniformRandom { lo: f64, hi: f64 },
}

impl Default for InertiaSchedule {
    fn default() -> Self {
        InertiaSchedule::Linear { start: 0.9, end: 0.4 }
    }
}

impl InertiaSchedule {
    /// Weight for update `t` (0-based) of `total`. Draws from `rng` only for
    /// the random schedule.
    pub fn weight<R: UniformSource>(&self, t: usize, total: usize, rng: &mut R) -> f64 {
        match *self {
            InertiaSchedule::Constant { w } => w,
            InertiaSchedule::Linear { start, end } => start + (end - start) * progress(t, total),
            InertiaSchedule::UniformRandom { lo, hi } => rng.uniform_in(lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            InertiaSchedule::Constant { w } => w.is_finite(),
            InertiaSchedule::Linear { start, end } => start.is_finite() && end.is_finite(),
            InertiaSchedule::UniformRandom { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config("inertia", format!("invalid schedule {self:?}")))
        }
    }
}

/// `t / (total - 1)`, clipped to `[0, 1]`.
fn progress(t: usize, total: usize) -> f64 {
    if total <= 1 {
        0.0
    } else {
        (t as f64 / (total - 1) as f64).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// Every particle, including itself.
    #[default]
    Full,
    /// Itself and its two ring neighbours.
    Ring,
}

impl Neighborhood {
    pub fn build(self, n: usize) -> Vec<Vec<usize>> {
        match self {
            Neighborhood::Full => (0..n).map(|_| (0..n).collect()).collect(),
            Neighborhood::Ring => (0..n)
                .map(|i| {
                    let mut nb = vec![(i + n - 1) % n, i, (i + 1) % n];
                    nb.sort_unstable();
                    nb.dedup();
                    nb
                })
                .collect(),
        }
    }
}

/// Chaotic velocity perturbation for `cml_perturbed`.
///
/// The amplitude decays linearly from `eta_start` to `eta_end`, both given as
/// fractions of the per-component velocity cap. The chaos source is a
/// globally coupled lattice with one cell per (particle, dimension) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    pub eta_start: f64,
    pub eta_end: f64,
    pub lattice_coupling: f64,
    pub map: LocalMap,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            eta_start: 0.5,
            eta_end: 0.0,
            lattice_coupling: 0.1,
            map: LocalMap::Logistic(4.0),
        }
    }
}

impl Perturbation {
    pub fn amplitude(&self, t: usize, total: usize) -> f64 {
        self.eta_start + (self.eta_end - self.eta_start) * progress(t, total)
    }
}

/// Algorithm choice plus every hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub dimension: usize,
    pub max_iterations: usize,
    pub inertia: InertiaSchedule,
    /// Cognitive coefficient; also the single pull coefficient `c` of `all_informed`.
    pub c1: f64,
    pub c2: f64,
    /// Coupling strength of `gcpso`.
    pub epsilon: f64,
    /// Constriction factor of `fips`.
    pub chi: f64,
    /// Upper bound of the `fips` acceleration draws.
    pub phi: f64,
    pub neighborhood: Neighborhood,
    /// `all_informed` weights; uniform when absent.
    pub lambda: Option<Vec<f64>>,
    pub perturbation: Perturbation,
    /// Velocity cap as a fraction of each box width.
    pub v_max_fraction: f64,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, population: usize, dimension: usize, max_iterations: usize) -> Self {
        Self {
            algorithm,
            population,
            dimension,
            max_iterations,
            inertia: InertiaSchedule::default(),
            c1: 2.0,
            c2: 2.0,
            epsilon: 0.1,
            chi: 0.7298,
            phi: 4.1,
            neighborhood: Neighborhood::Full,
            lambda: None,
            perturbation: Perturbation::default(),
            v_max_fraction: 0.2,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("population", format!("must be at least 2, got {}", self.population)));
        }
        if self.dimension < 1 {
            return Err(Error::config("dimension", "must be at least 1"));
        }
        if self.max_iterations < 1 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        for (field, v) in [("c1", self.c1), ("c2", self.c2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config(
                "epsilon",
                format!("must lie in the range [0,1], got {}", self.epsilon),
            ));
        }
        if !(self.chi.is_finite() && self.chi >= 0.0) {
            return Err(Error::config("chi", format!("must be finite and >= 0, got {}", self.chi)));
        }
        if !(self.phi.is_finite() && self.phi >= 0.0) {
            return Err(Error::config("phi", format!("must be finite and >= 0, got {}", self.phi)));
        }
        if !(self.v_max_fraction.is_finite() && self.v_max_fraction > 0.0) {
            return Err(Error::config(
                "v_max_fraction",
                format!("must be positive, got {}", self.v_max_fraction),
            ));
        }
        self.inertia.validate()?;
        if let Some(lambda) = &self.lambda {
            if lambda.len() != self.population {
                return Err(Error::config(
                    "lambda",
                    format!("needs {} weights, got {}", self.population, lambda.len()),
                ));
            }
            let sum: f64 = lambda.iter().sum();
            if lambda.iter().any(|l| !l.is_finite()) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::config("lambda", format!("weights must sum to 1, got {sum}")));
            }
        }
        let p = &self.perturbation;
        if !(p.eta_start.is_finite() && p.eta_end.is_finite() && p.eta_start >= 0.0 && p.eta_end >= 0.0) {
            return Err(Error::config("perturbation", "amplitudes must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&p.lattice_coupling) {
            return Err(Error::config("perturbation.lattice_coupling", "must lie in [0, 1]"));
        }
        p.map.validate()
    }

    /// `all_informed` weights, defaulting to `1/n` each.
    pub fn lambda_weights(&self) -> Vec<f64> {
        self.lambda
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.population as f64; self.population])
    }
}

/// The additive pieces of one particle's velocity update, before clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityTerms {
    pub inertia: PointVec,
    pub cognitive: PointVec,
    pub social: PointVec,
    pub perturbation: Option<PointVec>,
}

impl VelocityTerms {
    pub fn total(&self) -> PointVec {
        let mut v: Vec<f64> = self
            .inertia
            .iter()
            .zip(self.cognitive.iter())
            .zip(self.social.iter())
            .map(|((a, b), c)| a + b + c)
            .collect();
        if let Some(p) = &self.perturbation {
            for (vj, pj) in v.iter_mut().zip(p.iter()) {
                *vj += pj;
            }
        }
        v.into()
    }
}

/// Sum over all particles of `gbest - x_j`, component-wise.
///
/// Equals `n g - S` with `S` the sum of positions; accumulating the offsets
/// directly keeps the result exactly zero for a collapsed swarm.
pub fn gbest_offset_sum(state: &SwarmState) -> PointVec {
    let g = &state.gbest_position;
    let mut s = vec![0.0; state.dim()];
    for x in &state.positions {
        for ((sj, xj), gj) in s.iter_mut().zip(x.iter()).zip(g.iter()) {
            *sj += gj - xj;
        }
    }
    s.into()
}

/// Social direction of the globally coupled update for particle `i`:
/// `(1-e)(g - x_i) + e/(n-1) sum_{j != i} (g - x_j)`.
///
/// The sum over the other particles is the swarm-wide offset sum minus the
/// particle's own offset, so the term costs O(d) once that sum is known.
pub fn coupled_social_term(state: &SwarmState, i: usize, epsilon: f64) -> Result<PointVec> {
    let n = state.population();
    if n < 2 {
        return Err(Error::config("population", "coupled social term needs at least 2 particles"));
    }
    Ok(coupled_social_with_sum(state, i, epsilon, &gbest_offset_sum(state)))
}

fn coupled_social_with_sum(state: &SwarmState, i: usize, epsilon: f64, offsets: &[f64]) -> PointVec {
    let others = (state.population() - 1) as f64;
    let g = &state.gbest_position;
    let x = &state.positions[i];
    (0..state.dim())
        .map(|j| {
            let own = g[j] - x[j];
            let rest = offsets[j] - own;
            (1.0 - epsilon) * own + (epsilon / others) * rest
        })
        .collect::<Vec<_>>()
        .into()
}

/// Which social direction a PSO-shaped update uses.
enum Social<'a> {
    Gbest,
    Coupled { epsilon: f64, sum: &'a [f64] },
}

/// Velocity terms for the `pso` family: inertia, cognitive pull towards the
/// personal best and social pull, each component with fresh `r1`, `r2`.
fn pso_terms<R: UniformSource>(
    state: &SwarmState,
    i: usize,
    w: f64,
    config: &OptimizerConfig,
    social: &Social<'_>,
    rng: &mut R,
) -> VelocityTerms {
    let d = state.dim();
    let x = &state.positions[i];
    let v = &state.velocities[i];
    let p = &state.pbest_positions[i];
    let direction = match social {
        Social::Gbest => state
            .gbest_position
            .iter()
            .zip(x.iter())
            .map(|(g, xj)| g - xj)
            .collect::<Vec<_>>()
            .into(),
        Social::Coupled { epsilon, sum } => coupled_social_with_sum(state, i, *epsilon, sum),
    };
    let mut inertia = Vec::with_capacity(d);
    let mut cognitive = Vec::with_capacity(d);
    let mut soc = Vec::with_capacity(d);
    for j in 0..d {
        let r1 = rng.next_uniform();
        let r2 = rng.next_uniform();
        inertia.push(w * v[j]);
        cognitive.push(config.c1 * r1 * (p[j] - x[j]));
        soc.push(config.c2 * r2 * direction[j]);
    }
    VelocityTerms {
        inertia: inertia.into(),
        cognitive: cognitive.into(),
        social: soc.into(),
        perturbation: None,
    }
}

fn check_algorithm(config: &OptimizerConfig, want: Algorithm) -> Result<()> {
    if config.algorithm != want {
        return Err(Error::config(
            "algorithm",
            format!("{want} step called with a {} configuration", config.algorithm),
        ));
    }
    Ok(())
}

/// Clamp, move, clip, evaluate and update bests.
fn advance(
    state: &mut SwarmState,
    mut velocities: Vec<PointVec>,
    config: &OptimizerConfig,
    objective: &Objective,
) -> Result<()> {
    let bounds = objective.bounds();
    let v_max = bounds.velocity_limit(config.v_max_fraction);
    let mut fitnesses = Vec::with_capacity(state.population());
    for (i, v) in velocities.iter_mut().enumerate() {
        clamp_velocity_in_place(v, &v_max);
        let x = &mut state.positions[i];
        for (xj, vj) in x.iter_mut().zip(v.iter()) {
            *xj += vj;
        }
        apply_bounds_in_place(x, bounds);
        fitnesses.push(objective.evaluate(x)?);
    }
    state.velocities = velocities;
    state.update_bests(&fitnesses)?;
    state.iteration += 1;
    Ok(())
}

/// Canonical PSO update.
pub fn step_pso<R: UniformSource>(
    state: &mut SwarmState,
    config: &OptimizerConfig,
    objective: &Objective,
    rng: &mut R,
) -> Result<()> {
    check_algorithm(config, Algorithm::Pso)?;
    let w = config.inertia.weight(state.iteration, config.max_iterations, rng);
    let velocities = (0..state.population())
        .map(|i| pso_terms(state, i, w, config, &Social::Gbest, rng).total())
        .collect();
    advance(state, velocities, config, objective)
}

/// Globally coupled PSO update: the social pull blends the particle's own
/// offset from gbest with the mean offset of all other particles.
pub fn step_gcpso<R: UniformSource>(
    state: &mut SwarmState,
    config: &OptimizerConfig,
    objective: &Objective,
    rng: &mut R,
) -> Result<()> {
    check_algorithm(config, Algorithm::Gcpso)?;
    if state.population() < 2 {
        return Err(Error::config("population", "gcpso needs at least 2 particles"));
    }
    let w = config.inertia.weight(state.iteration, config.max_iterations, rng);
    let sum = gbest_offset_sum(state);
    let social = Social::Coupled {
        epsilon: config.epsilon,
        sum: &sum,
    };
    let velocities = (0..state.population())
        .map(|i| pso_terms(state, i, w, config, &social, rng).total())
        .collect();
    advance(state, velocities, config, objective)
}

/// Fully informed update with constriction:
/// `v <- chi (v + sum_m U(0, phi) (p_m - x) / |N_i|)`.
pub fn step_fips<R: UniformSource>(
    state: &mut SwarmState,
    config: &OptimizerConfig,
    objective: &Objective,
    rng: &mut R,
    neighborhoods: &[Vec<usize>],
) -> Result<()> {
    check_algorithm(config, Algorithm::Fips)?;
    let n = state.population();
    if neighborhoods.len() != n {
        return Err(Error::config(
            "neighborhood",
            format!("{} neighbourhoods for {n} particles", neighborhoods.len()),
        ));
    }
    if let Some(i) = neighborhoods.iter().position(|nb| nb.is_empty() || nb.iter().any(|&m| m >= n)) {
        return Err(Error::config(
            "neighborhood",
            format!("neighbourhood of particle {i} is empty or out of range"),
        ));
    }
    let d = state.dim();
    let mut velocities = Vec::with_capacity(n);
    for (i, nb) in neighborhoods.iter().enumerate() {
        let x = &state.positions[i];
        let mut pull = vec![0.0; d];
        for &m in nb {
            let p = &state.pbest_positions[m];
            for j in 0..d {
                pull[j] += rng.uniform_in(0.0, config.phi) * (p[j] - x[j]);
            }
        }
        let size = nb.len() as f64;
        let v: Vec<f64> = state.velocities[i]
            .iter()
            .zip(&pull)
            .map(|(vj, s)| config.chi * (vj + s / size))
            .collect();
        velocities.push(PointVec(v));
    }
    advance(state, velocities, config, objective)
}

/// Every personal best pulls with weight `lambda_i`:
/// `v <- w v + c sum_i lambda_i (p_i - x)`.
pub fn step_all_informed<R: UniformSource>(
    state: &mut SwarmState,
    config: &OptimizerConfig,
    objective: &Objective,
    rng: &mut R,
) -> Result<()> {
    check_algorithm(config, Algorithm::AllInformed)?;
    let lambda = config.lambda_weights();
    if lambda.len() != state.population() {
        return Err(Error::config(
            "lambda",
            format!("needs {} weights, got {}", state.population(), lambda.len()),
        ));
    }
    let w = config.inertia.weight(state.iteration, config.max_iterations, rng);
    let d = state.dim();
    // sum_i lambda_i p_i is shared; the pull is that minus sum(lambda) x
    let mut weighted = vec![0.0; d];
    for (l, p) in lambda.iter().zip(&state.pbest_positions) {
        for j in 0..d {
            weighted[j] += l * p[j];
        }
    }
    let lambda_sum: f64 = lambda.iter().sum();
    let velocities = state
        .positions
        .iter()
        .zip(&state.velocities)
        .map(|(x, v)| {
            (0..d)
                .map(|j| w * v[j] + config.c1 * (weighted[j] - lambda_sum * x[j]))
                .collect::<Vec<_>>()
                .into()
        })
        .collect();
    advance(state, velocities, config, objective)
}

/// PSO update plus a chaotic kick `eta(t) f(z)` per component, where `z` is
/// lattice cell `i * d + j`. The lattice advances one step afterwards.
pub fn step_cml_perturbed<R: UniformSource>(
    state: &mut SwarmState,
    config: &OptimizerConfig,
    objective: &Objective,
    rng: &mut R,
    lattice: &mut LatticeState,
    map: &LocalMap,
) -> Result<()> {
    check_algorithm(config, Algorithm::CmlPerturbed)?;
    let n = state.population();
    let d = state.dim();
    if lattice.len() < n * d {
        return Err(Error::config(
            "lattice_size",
            format!("lattice has {} cells but the swarm needs {}", lattice.len(), n * d),
        ));
    }
    let w = config.inertia.weight(state.iteration, config.max_iterations, rng);
    let eta = config.perturbation.amplitude(state.iteration, config.max_iterations);
    let v_max = objective.bounds().velocity_limit(config.v_max_fraction);
    let cells = lattice.cells();
    let velocities = (0..n)
        .map(|i| {
            let mut terms = pso_terms(state, i, w, config, &Social::Gbest, rng);
            let kick: Vec<f64> = (0..d).map(|j| eta * v_max[j] * map.apply(cells[i * d + j])).collect();
            terms.perturbation = Some(kick.into());
            terms.total()
        })
        .collect();
    advance(state, velocities, config, objective)?;
    lattice.advance(map);
    Ok(())
}

/// Pre-clamp velocity decomposition for particle `i` under `pso` or `gcpso`,
/// drawing from `rng` exactly as one particle of the corresponding step does.
pub fn velocity_terms<R: UniformSource>(
    state: &SwarmState,
    i: usize,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<VelocityTerms> {
    let w = config.inertia.weight(state.iteration, config.max_iterations, rng);
    match config.algorithm {
        Algorithm::Pso => Ok(pso_terms(state, i, w, config, &Social::Gbest, rng)),
        Algorithm::Gcpso => {
            let sum = gbest_offset_sum(state);
            let social = Social::Coupled {
                epsilon: config.epsilon,
                sum: &sum,
            };
            Ok(pso_terms(state, i, w, config, &social, rng))
        }
        other => Err(Error::config(
            "algorithm",
            format!("velocity decomposition is defined for pso and gcpso, not {other}"),
        )),
    }
}

/// A running optimizer: swarm state plus everything its update rule needs.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    objective: Objective,
    state: SwarmState,
    rng: RngStream,
    neighborhoods: Vec<Vec<usize>>,
    lattice: Option<LatticeState>,
    evaluations: u64,
}

impl Optimizer {
    /// Validate the configuration and draw the initial swarm from `config.seed`.
    pub fn new(config: OptimizerConfig, objective: Objective) -> Result<Self> {
        let mut rng = RngStream::new(config.seed);
        let state = init_swarm(&config, &objective, &mut rng)?;
        let neighborhoods = match config.algorithm {
            Algorithm::Fips => config.neighborhood.build(config.population),
            _ => Vec::new(),
        };
        let lattice = match config.algorithm {
            Algorithm::CmlPerturbed => {
                // separate stream so the swarm draws match pso
                let mut lattice_rng = RngStream::new(derive_seed(config.seed, 1));
                Some(LatticeState::random(
                    config.population * config.dimension,
                    config.perturbation.lattice_coupling,
                    Topology::Global,
                    &mut lattice_rng,
                )?)
            }
            _ => None,
        };
        let evaluations = config.population as u64;
        Ok(Self {
            config,
            objective,
            state,
            rng,
            neighborhoods,
            lattice,
            evaluations,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    pub fn lattice(&self) -> Option<&LatticeState> {
        self.lattice.as_ref()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn step(&mut self) -> Result<()> {
        let Self {
            config,
            objective,
            state,
            rng,
            neighborhoods,
            lattice,
            ..
        } = self;
        match config.algorithm {
            Algorithm::Pso => step_pso(state, config, objective, rng)?,
            Algorithm::Gcpso => step_gcpso(state, config, objective, rng)?,
            Algorithm::Fips => step_fips(state, config, objective, rng, neighborhoods)?,
            Algorithm::AllInformed => step_all_informed(state, config, objective, rng)?,
            Algorithm::CmlPerturbed => {
                let map = config.perturbation.map;
                let lattice = lattice.as_mut().expect("lattice is built for cml_perturbed");
                step_cml_perturbed(state, config, objective, rng, lattice, &map)?
            }
        }
        self.evaluations += self.config.population as u64;
        Ok(())
    }
}

/// Run one trial, recording gbest after every iteration.
pub fn run(config: &OptimizerConfig, objective: &Objective) -> Result<TrialReport> {
    run_with_stride(config, objective, 1)
}

/// Run one trial, recording gbest at iteration 0, every `stride`-th
/// iteration, and the last iteration.
pub fn run_with_stride(config: &OptimizerConfig, objective: &Objective, stride: usize) -> Result<TrialReport> {
    let stride = stride.max(1);
    let started = std::time::Instant::now();
    let mut opt = Optimizer::new(config.clone(), objective.clone())?;
    let mut history = vec![(0, opt.state().gbest_value)];
    for k in 1..=config.max_iterations {
        opt.step()?;
        if k % stride == 0 || k == config.max_iterations {
            history.push((k, opt.state().gbest_value));
        }
    }
    let state = opt.state();
    Ok(TrialReport {
        algorithm: config.algorithm.name().to_string(),
        objective: objective.name().to_string(),
        trial_index: 0,
        seed: config.seed,
        history,
        final_best_value: state.gbest_value,
        final_best_position: state.gbest_position.clone(),
        evaluations_used: opt.evaluations(),
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::FixedUniform;
    use crate::swarm::Bounds;

    fn flat(name: &str, d: usize, half: f64) -> Objective {
        Objective::custom(name, Bounds::uniform(d, -half, half).unwrap(), |x| {
            x.iter().map(|v| v * v).sum()
        })
    }

    fn manual_state(xs: &[f64], gbest: f64) -> SwarmState {
        let positions: Vec<PointVec> = xs.iter().map(|&x| PointVec(vec![x])).collect();
        let velocities = xs.iter().map(|_| PointVec::zeros(1)).collect();
        let mut s = SwarmState::new(positions, velocities, &vec![1.0; xs.len()]).unwrap();
        s.gbest_position = PointVec(vec![gbest]);
        s
    }

    fn cfg(algorithm: Algorithm, n: usize, d: usize) -> OptimizerConfig {
        let mut c = OptimizerConfig::new(algorithm, n, d, 10);
        c.inertia = InertiaSchedule::Constant { w: 0.5 };
        c
    }

    #[test]
    fn pso_single_step_by_hand() {
        let mut s = manual_state(&[0.0, 2.0], 0.0);
        let c = cfg(Algorithm::Pso, 2, 1);
        step_pso(&mut s, &c, &flat("sq", 1, 10.0), &mut FixedUniform(0.5)).unwrap();
        assert!((s.velocities[1][0] + 2.0).abs() < 1e-12);
        assert!(s.positions[1][0].abs() < 1e-12);
    }

    #[test]
    fn coupled_term_by_hand_and_limits() {
        let s = manual_state(&[0.0, 1.0, 2.0], 1.0);
        let t = coupled_social_term(&s, 0, 0.3).unwrap();
        assert!((t[0] - 0.55).abs() < 1e-12);
        let plain = coupled_social_term(&s, 2, 0.0).unwrap();
        assert_eq!(plain[0], 1.0 - 2.0);
        let same = manual_state(&[0.7, 0.7, 0.7], 0.7);
        for e in [0.0, 0.4, 1.0] {
            assert_eq!(coupled_social_term(&same, 1, e).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn gcpso_single_step_by_hand() {
        let mut s = manual_state(&[0.0, 1.0, 2.0], 1.0);
        let c = cfg(Algorithm::Gcpso, 3, 1).with_epsilon(0.3);
        step_gcpso(&mut s, &c, &flat("sq", 1, 10.0), &mut FixedUniform(0.5)).unwrap();
        assert!((s.velocities[0][0] - 0.55).abs() < 1e-12);
        assert!((s.positions[0][0] - 0.55).abs() < 1e-12);
    }

    #[test]
    fn fips_single_step_by_hand() {
        let mut s = manual_state(&[0.0, 2.0], 0.0);
        let mut c = cfg(Algorithm::Fips, 2, 1);
        c.chi = 0.7298;
        c.phi = 4.1;
        let nb = Neighborhood::Full.build(2);
        step_fips(&mut s, &c, &flat("sq", 1, 100.0), &mut FixedUniform(0.5), &nb).unwrap();
        assert!((s.velocities[0][0] - 1.49609).abs() < 1e-12);
    }

    #[test]
    fn fips_degenerate_cases() {
        // self-only neighbourhood with pbest = x: pure damping
        let mut s = manual_state(&[1.0, -1.0], 0.0);
        s.velocities = vec![PointVec(vec![0.4]), PointVec(vec![-0.2])];
        let c = cfg(Algorithm::Fips, 2, 1);
        let own = vec![vec![0], vec![1]];
        step_fips(&mut s, &c, &flat("sq", 1, 10.0), &mut RngStream::new(3), &own).unwrap();
        assert!((s.velocities[0][0] - 0.7298 * 0.4).abs() < 1e-15);
        // chi = 1, phi = 0: ballistic
        let mut s = manual_state(&[1.0, -1.0], 0.0);
        s.velocities = vec![PointVec(vec![0.4]), PointVec(vec![-0.2])];
        let mut c = cfg(Algorithm::Fips, 2, 1);
        c.chi = 1.0;
        c.phi = 0.0;
        let full = Neighborhood::Full.build(2);
        step_fips(&mut s, &c, &flat("sq", 1, 10.0), &mut RngStream::new(3), &full).unwrap();
        assert_eq!(s.positions[0][0], 1.4);
        assert_eq!(s.velocities[1][0], -0.2);
    }

    #[test]
    fn fips_rejects_empty_neighborhood() {
        let mut s = manual_state(&[1.0, -1.0], 0.0);
        let c = cfg(Algorithm::Fips, 2, 1);
        let err = step_fips(&mut s, &c, &flat("sq", 1, 10.0), &mut RngStream::new(3), &[vec![0], vec![]]);
        assert!(matches!(err, Err(Error::Config { .. })));
    }

    #[test]
    fn all_informed_symmetric_cancellation() {
        let mut s = manual_state(&[0.0, 2.0], 0.0);
        // move particle 0 to x = 1 while keeping its pbest at 0
        s.positions[0] = PointVec(vec![1.0]);
        let mut c = cfg(Algorithm::AllInformed, 2, 1);
        c.c1 = 1.0;
        c.lambda = Some(vec![0.5, 0.5]);
        step_all_informed(&mut s, &c, &flat("sq", 1, 10.0), &mut FixedUniform(0.5)).unwrap();
        assert_eq!(s.velocities[0][0], 0.0);
    }

    #[test]
    fn all_informed_one_hot_is_gbest_pull() {
        let mut s = manual_state(&[0.0, 3.0, -2.0], 0.0);
        s.gbest_position = s.pbest_positions[0].clone();
        let mut c = cfg(Algorithm::AllInformed, 3, 1);
        c.c1 = 1.5;
        c.lambda = Some(vec![1.0, 0.0, 0.0]);
        step_all_informed(&mut s, &c, &flat("sq", 1, 100.0), &mut FixedUniform(0.5)).unwrap();
        assert!((s.velocities[1][0] - 1.5 * (0.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn all_informed_rejects_bad_lambda() {
        let mut c = cfg(Algorithm::AllInformed, 3, 1);
        c.lambda = Some(vec![0.5, 0.5]);
        assert!(c.validate().is_err());
        c.lambda = Some(vec![0.5, 0.4, 0.4]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn cml_kick_by_hand() {
        // width 10 -> v_max 2, eta 0.05 * 2 = 0.1; f(0.5) = 1
        let mut s = manual_state(&[0.0, 0.0], 0.0);
        let mut c = cfg(Algorithm::CmlPerturbed, 2, 1);
        c.perturbation.eta_start = 0.05;
        c.perturbation.eta_end = 0.05;
        let mut lattice = LatticeState::new(vec![0.5, 0.5], 0.1, Topology::Global).unwrap();
        let map = LocalMap::Logistic(4.0);
        step_cml_perturbed(&mut s, &c, &flat("sq", 1, 5.0), &mut FixedUniform(0.5), &mut lattice, &map).unwrap();
        assert!((s.velocities[0][0] - 0.1).abs() < 1e-15);
        assert_eq!(lattice.time(), 1);
    }

    #[test]
    fn cml_lattice_too_small() {
        let mut s = manual_state(&[0.0, 0.0, 1.0], 0.0);
        let c = cfg(Algorithm::CmlPerturbed, 3, 1);
        let mut lattice = LatticeState::new(vec![0.5, 0.5], 0.1, Topology::Global).unwrap();
        let err = step_cml_perturbed(
            &mut s,
            &c,
            &flat("sq", 1, 5.0),
            &mut FixedUniform(0.5),
            &mut lattice,
            &LocalMap::Logistic(4.0),
        );
        assert!(matches!(err, Err(Error::Config { .. })));
    }

    #[test]
    fn fixed_point_is_stationary() {
        for alg in [Algorithm::Pso, Algorithm::Gcpso, Algorithm::AllInformed, Algorithm::Fips] {
            let mut s = manual_state(&[0.25, 0.25, 0.25], 0.25);
            let mut c = cfg(alg, 3, 1);
            c.epsilon = 0.7;
            let obj = flat("sq", 1, 10.0);
            let mut rng = RngStream::new(1);
            for _ in 0..5 {
                match alg {
                    Algorithm::Pso => step_pso(&mut s, &c, &obj, &mut rng),
                    Algorithm::Gcpso => step_gcpso(&mut s, &c, &obj, &mut rng),
                    Algorithm::AllInformed => step_all_informed(&mut s, &c, &obj, &mut rng),
                    _ => step_fips(&mut s, &c, &obj, &mut rng, &Neighborhood::Full.build(3)),
                }
                .unwrap();
            }
            assert!(s.positions.iter().all(|x| x[0] == 0.25), "{alg}");
            assert!(s.velocities.iter().all(|v| v[0] == 0.0), "{alg}");
        }
    }

    #[test]
    fn ballistic_motion_without_attraction() {
        let mut s = manual_state(&[0.0, 1.0], 0.0);
        s.velocities = vec![PointVec(vec![0.5]), PointVec(vec![-0.25])];
        let mut c = cfg(Algorithm::Pso, 2, 1);
        c.c1 = 0.0;
        c.c2 = 0.0;
        c.inertia = InertiaSchedule::Constant { w: 1.0 };
        let obj = flat("sq", 1, 100.0);
        let mut rng = RngStream::new(9);
        for k in 1..=4 {
            step_pso(&mut s, &c, &obj, &mut rng).unwrap();
            assert_eq!(s.positions[0][0], 0.5 * k as f64);
            assert_eq!(s.positions[1][0], 1.0 - 0.25 * k as f64);
        }
    }

    #[test]
    fn linear_inertia_endpoints() {
        let sched = InertiaSchedule::default();
        let mut rng = FixedUniform(0.0);
        assert_eq!(sched.weight(0, 100, &mut rng), 0.9);
        assert!((sched.weight(99, 100, &mut rng) - 0.4).abs() < 1e-15);
        assert_eq!(sched.weight(0, 1, &mut rng), 0.9);
    }

    #[test]
    fn epsilon_out_of_range_names_field() {
        let c = cfg(Algorithm::Gcpso, 4, 2).with_epsilon(1.5);
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("epsilon") && msg.contains("[0,1]"), "{msg}");
    }

    #[test]
    fn algorithm_names() {
        assert_eq!(Algorithm::from_name("psocml").unwrap(), Algorithm::Gcpso);
        assert!(Algorithm::from_name("ga").is_err());
    }

    #[test]
    fn one_iteration_history() {
        let obj = Objective::by_name("ackley", 3).unwrap();
        let c = OptimizerConfig::new(Algorithm::Gcpso, 5, 3, 1).with_seed(2);
        let r = run(&c, &obj).unwrap();
        assert_eq!(r.history.len(), 2);
        assert!(r.history[1].1 <= r.history[0].1);
        assert_eq!(r.evaluations_used, 10);
    }

    #[test]
    fn sphere_converges() {
        let obj = Objective::by_name("sphere", 2).unwrap();
        for alg in [Algorithm::Pso, Algorithm::Gcpso] {
            for seed in 0..5 {
                let c = OptimizerConfig::new(alg, 20, 2, 200).with_seed(seed);
                let r = run(&c, &obj).unwrap();
                assert!(r.final_best_value < 1e-3, "{alg} seed {seed}: {}", r.final_best_value);
            }
        }
    }
}
