//! Vectors, search boxes and the swarm state shared by every optimizer.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::optimizers::OptimizerConfig;
use crate::rng::UniformSource;

/// A fixed-dimension real vector: position, velocity, shift or lattice row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointVec(pub Vec<f64>);

impl PointVec {
    pub fn zeros(dim: usize) -> Self {
        PointVec(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        PointVec(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PointVec {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for PointVec {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for PointVec {
    fn from(v: Vec<f64>) -> Self {
        PointVec(v)
    }
}

impl From<&[f64]> for PointVec {
    fn from(v: &[f64]) -> Self {
        PointVec(v.to_vec())
    }
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: PointVec,
    upper: PointVec,
}

impl Bounds {
    pub fn new(lower: PointVec, upper: PointVec) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::config(
                "bounds",
                format!("lower has {} entries, upper has {}", lower.dim(), upper.dim()),
            ));
        }
        if lower.dim() == 0 {
            return Err(Error::config("bounds", "dimension must be at least 1"));
        }
        for (j, (lo, hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(
                    "bounds",
                    format!("component {j}: need finite lower < upper, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` in every dimension.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(PointVec::filled(dim, lo), PointVec::filled(dim, hi))
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &PointVec {
        &self.lower
    }

    pub fn upper(&self) -> &PointVec {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Per-component velocity cap: `fraction * (upper - lower)`.
    pub fn velocity_limit(&self, fraction: f64) -> PointVec {
        (0..self.dim()).map(|j| fraction * self.width(j)).collect::<Vec<_>>().into()
    }
}

/// Clip each component into `[-v_max[j], v_max[j]]`.
pub fn clamp_velocity(v: &PointVec, v_max: &PointVec) -> PointVec {
    let mut out = v.clone();
    clamp_velocity_in_place(&mut out, v_max);
    out
}

pub(crate) fn clamp_velocity_in_place(v: &mut [f64], v_max: &[f64]) {
    for (vj, &m) in v.iter_mut().zip(v_max) {
        *vj = vj.clamp(-m, m);
    }
}

/// Clip each component into the box.
pub fn apply_bounds(x: &PointVec, bounds: &Bounds) -> PointVec {
    let mut out = x.clone();
    apply_bounds_in_place(&mut out, bounds);
    out
}

pub(crate) fn apply_bounds_in_place(x: &mut [f64], bounds: &Bounds) {
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = xj.clamp(bounds.lower[j], bounds.upper[j]);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub positions: Vec<PointVec>,
    pub velocities: Vec<PointVec>,
    pub pbest_positions: Vec<PointVec>,
    pub pbest_values: Vec<f64>,
    pub gbest_position: PointVec,
    pub gbest_value: f64,
    /// Number of completed update iterations.
    pub iteration: usize,
}

impl SwarmState {
    /// Build a state whose personal bests are the given positions.
    pub fn new(positions: Vec<PointVec>, velocities: Vec<PointVec>, fitnesses: &[f64]) -> Result<Self> {
        let n = positions.len();
        if n == 0 || velocities.len() != n || fitnesses.len() != n {
            return Err(Error::config(
                "population",
                format!(
                    "{} positions, {} velocities and {} fitnesses do not agree",
                    n,
                    velocities.len(),
                    fitnesses.len()
                ),
            ));
        }
        check_fitnesses(fitnesses)?;
        let (best, &best_value) = argmin(fitnesses);
        Ok(Self {
            gbest_position: positions[best].clone(),
            gbest_value: best_value,
            pbest_positions: positions.clone(),
            pbest_values: fitnesses.to_vec(),
            positions,
            velocities,
            iteration: 0,
        })
    }

    pub fn population(&self) -> usize {
        self.positions.len()
    }

    pub fn dim(&self) -> usize {
        self.gbest_position.dim()
    }

    /// Fold freshly evaluated fitnesses into the personal and global bests.
    ///
    /// Only strict improvements replace a personal best. Among equal personal
    /// bests the lowest particle index wins.
    pub fn update_bests(&mut self, fitnesses: &[f64]) -> Result<()> {
        if fitnesses.len() != self.population() {
            return Err(Error::config(
                "fitnesses",
                format!("expected {} values, got {}", self.population(), fitnesses.len()),
            ));
        }
        check_fitnesses(fitnesses)?;
        for (i, &f) in fitnesses.iter().enumerate() {
            if f < self.pbest_values[i] {
                self.pbest_values[i] = f;
                self.pbest_positions[i].clone_from(&self.positions[i]);
            }
        }
        let (best, &best_value) = argmin(&self.pbest_values);
        self.gbest_value = best_value;
        self.gbest_position.clone_from(&self.pbest_positions[best]);
        Ok(())
    }

    /// Check every structural invariant of the state.
    pub fn validate(&self, bounds: &Bounds) -> std::result::Result<(), String> {
        let n = self.population();
        let d = bounds.dim();
        if n < 1 {
            return Err("empty swarm".into());
        }
        if self.velocities.len() != n || self.pbest_positions.len() != n || self.pbest_values.len() != n {
            return Err("per-particle vectors have inconsistent lengths".into());
        }
        let all = self
            .positions
            .iter()
            .chain(&self.velocities)
            .chain(&self.pbest_positions)
            .chain(std::iter::once(&self.gbest_position));
        for p in all {
            if p.dim() != d {
                return Err(format!("vector of dimension {} in a {d}-dimensional run", p.dim()));
            }
            if !p.is_finite() {
                return Err("non-finite component".into());
            }
        }
        for (i, x) in self.positions.iter().enumerate() {
            if !bounds.contains(x) {
                return Err(format!("particle {i} is outside the bounds"));
            }
        }
        let (best, &best_value) = argmin(&self.pbest_values);
        if best_value.to_bits() != self.gbest_value.to_bits() {
            return Err(format!("gbest_value {} != min pbest {}", self.gbest_value, best_value));
        }
        if self.gbest_position != self.pbest_positions[best] {
            return Err(format!("gbest_position does not match pbest of particle {best}"));
        }
        Ok(())
    }
}

fn check_fitnesses(fitnesses: &[f64]) -> Result<()> {
    match fitnesses.iter().position(|f| f.is_nan()) {
        Some(i) => Err(Error::Evaluation {
            particle: i,
            value: fitnesses[i],
        }),
        None => Ok(()),
    }
}

/// Lowest-index minimum.
fn argmin(values: &[f64]) -> (usize, &f64) {
    values
        .iter()
        .enumerate()
        .fold((0, &values[0]), |acc, (i, v)| if *v < *acc.1 { (i, v) } else { acc })
}

/// Random initial swarm: positions uniform in the box, velocities uniform in
/// `[-v_max, v_max]`, personal bests at the initial positions.
pub fn init_swarm<R: UniformSource>(
    config: &OptimizerConfig,
    objective: &Objective,
    rng: &mut R,
) -> Result<SwarmState> {
    config.validate()?;
    if config.dimension != objective.dim() {
        return Err(Error::config(
            "dimension",
            format!(
                "optimizer is configured for {} dimensions but {} has {}",
                config.dimension,
                objective.name(),
                objective.dim()
            ),
        ));
    }
    let bounds = objective.bounds();
    let v_max = bounds.velocity_limit(config.v_max_fraction);
    let d = config.dimension;
    let mut positions = Vec::with_capacity(config.population);
    let mut velocities = Vec::with_capacity(config.population);
    for _ in 0..config.population {
        let x: Vec<f64> = (0..d)
            .map(|j| rng.uniform_in(bounds.lower()[j], bounds.upper()[j]))
            .collect();
        let v: Vec<f64> = (0..d).map(|j| rng.uniform_in(-v_max[j], v_max[j])).collect();
        positions.push(PointVec(x));
        velocities.push(PointVec(v));
    }
    let fitnesses = positions
        .iter()
        .map(|x| objective.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    SwarmState::new(positions, velocities, &fitnesses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::Objective;
    use crate::optimizers::{Algorithm, OptimizerConfig};
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn state_1d(xs: &[f64], fs: &[f64]) -> SwarmState {
        let positions = xs.iter().map(|&x| PointVec(vec![x])).collect();
        let velocities = xs.iter().map(|_| PointVec::zeros(1)).collect();
        SwarmState::new(positions, velocities, fs).unwrap()
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_velocity(&vec![0.1].into(), &vec![1.0].into()).0, vec![0.1]);
        assert_eq!(
            clamp_velocity(&vec![5.0, -5.0].into(), &vec![1.0, 2.0].into()).0,
            vec![1.0, -2.0]
        );
    }

    #[test]
    fn bounds_examples() {
        let b = Bounds::uniform(1, -1.0, 1.0).unwrap();
        assert_eq!(apply_bounds(&vec![0.3].into(), &b).0, vec![0.3]);
        assert_eq!(apply_bounds(&vec![2.0].into(), &b).0, vec![1.0]);
    }

    #[test]
    fn bounds_reject_inverted_interval() {
        assert!(Bounds::uniform(2, 1.0, 1.0).is_err());
        assert!(Bounds::new(vec![0.0].into(), vec![1.0, 2.0].into()).is_err());
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent(v in prop::collection::vec(-100.0f64..100.0, 1..8), m in 0.01f64..50.0) {
            let v_max = PointVec::filled(v.len(), m);
            let once = clamp_velocity(&PointVec(v), &v_max);
            let twice = clamp_velocity(&once, &v_max);
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.iter().all(|c| c.abs() <= m));
        }

        #[test]
        fn apply_bounds_lands_inside(x in prop::collection::vec(-1e6f64..1e6, 1..8)) {
            let b = Bounds::uniform(x.len(), -3.0, 5.0).unwrap();
            prop_assert!(b.contains(&apply_bounds(&PointVec(x), &b)));
        }
    }

    #[test]
    fn update_bests_no_improvement() {
        let mut s = state_1d(&[0.0, 1.0], &[1.0, 2.0]);
        let before = s.clone();
        s.update_bests(&[5.0, 6.0]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn update_bests_equal_fitness_keeps_pbest() {
        let mut s = state_1d(&[0.0, 1.0], &[1.0, 2.0]);
        s.positions[0] = PointVec(vec![9.0]);
        s.update_bests(&[1.0, 2.0]).unwrap();
        assert_eq!(s.pbest_positions[0].0, vec![0.0]);
        assert_eq!(s.gbest_position.0, vec![0.0]);
    }

    #[test]
    fn update_bests_new_global_best() {
        let mut s = state_1d(&[0.0, 1.0], &[1.0, 2.0]);
        s.positions[1] = PointVec(vec![0.5]);
        s.update_bests(&[3.0, 0.25]).unwrap();
        assert_eq!(s.gbest_position.0, vec![0.5]);
        assert_eq!(s.gbest_value, 0.25);
        assert_eq!(s.pbest_positions[0].0, vec![0.0]);
    }

    #[test]
    fn update_bests_nan_names_particle() {
        let mut s = state_1d(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0]);
        match s.update_bests(&[1.0, 2.0, f64::NAN]) {
            Err(Error::Evaluation { particle, .. }) => assert_eq!(particle, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gbest_ties_go_to_lowest_index() {
        let s = state_1d(&[3.0, 1.0, 2.0], &[1.0, 0.5, 0.5]);
        assert_eq!(s.gbest_position.0, vec![1.0]);
    }

    fn config(n: usize, d: usize) -> OptimizerConfig {
        OptimizerConfig::new(Algorithm::Pso, n, d, 10)
    }

    #[test]
    fn init_is_deterministic() {
        let obj = Objective::by_name("sphere", 3).unwrap();
        let a = init_swarm(&config(6, 3), &obj, &mut RngStream::new(42)).unwrap();
        let b = init_swarm(&config(6, 3), &obj, &mut RngStream::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_two_particles_in_box() {
        let obj = Objective::custom("abs", Bounds::uniform(1, -1.0, 1.0).unwrap(), |x| x[0].abs());
        let s = init_swarm(&config(2, 1), &obj, &mut RngStream::new(3)).unwrap();
        assert!(s.positions.iter().all(|x| (-1.0..=1.0).contains(&x[0])));
        let f: Vec<f64> = s.positions.iter().map(|x| x[0].abs()).collect();
        assert_eq!(s.gbest_value, f[0].min(f[1]));
        s.validate(obj.bounds()).unwrap();
    }

    #[test]
    fn init_gbest_is_brute_force_minimum() {
        let obj = Objective::by_name("sphere", 2).unwrap();
        let s = init_swarm(&config(5, 2), &obj, &mut RngStream::new(11)).unwrap();
        // independent evaluation of the initial points
        let best = s
            .positions
            .iter()
            .map(|x| x[0] * x[0] + x[1] * x[1])
            .fold(f64::INFINITY, f64::min);
        assert!((s.gbest_value - best).abs() <= 1e-12 * best.max(1.0));
        let v_max = obj.bounds().velocity_limit(0.2);
        for v in &s.velocities {
            assert!(v.iter().zip(v_max.iter()).all(|(a, m)| a.abs() <= *m));
        }
    }

    #[test]
    fn init_rejects_dimension_mismatch() {
        let obj = Objective::by_name("sphere", 2).unwrap();
        assert!(matches!(
            init_swarm(&config(5, 3), &obj, &mut RngStream::new(1)),
            Err(Error::Config { .. })
        ));
    }
}
