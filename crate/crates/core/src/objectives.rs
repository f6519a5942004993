//! Benchmark objectives with known optima, and shift/rotation transforms.
//!
//! The catalog holds seven classic functions on their usual search boxes:
//!
//! | name        | box                  | optimum               |
//! |-------------|----------------------|-----------------------|
//! | `sphere`    | `[-100, 100]^d`      | `0` at the origin     |
//! | `ackley`    | `[-32.768, 32.768]^d`| `0` at the origin     |
//! | `rastrigin` | `[-5.12, 5.12]^d`    | `0` at the origin     |
//! | `rosenbrock`| `[-30, 30]^d`        | `0` at `(1, .., 1)`   |
//! | `griewank`  | `[-600, 600]^d`      | `0` at the origin     |
//! | `dejong_f4` | `[-1.28, 1.28]^d`    | `0` at the origin     |
//! | `schwefel`  | `[-500, 500]^d`      | `~0` at `420.9687..`  |
//!
//! Any name may carry a `_shifted`, `_rotated` or `_shifted_rotated` suffix,
//! in which case the function is evaluated as `f(M (x - o))` with a random
//! shift `o` and a random orthogonal `M` generated from a transform seed.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::{RngStream, UniformSource};
use crate::swarm::{Bounds, PointVec};

/// Fraction of the box used for random shifts of catalog objectives.
pub const DEFAULT_SHIFT_RADIUS: f64 = 0.8;

const MAX_ROTATION_ATTEMPTS: usize = 5;

const SCHWEFEL_OPTIMUM: f64 = 420.968_746_359_982_03;
const SCHWEFEL_OFFSET: f64 = 418.982_887_272_433_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFunction {
    Sphere,
    Ackley,
    Rastrigin,
    Rosenbrock,
    Griewank,
    DeJongF4,
    Schwefel,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 7] = [
        BaseFunction::Sphere,
        BaseFunction::Ackley,
        BaseFunction::Rastrigin,
        BaseFunction::Rosenbrock,
        BaseFunction::Griewank,
        BaseFunction::DeJongF4,
        BaseFunction::Schwefel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Griewank => "griewank",
            BaseFunction::DeJongF4 => "dejong_f4",
            BaseFunction::Schwefel => "schwefel",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Symmetric half-width of the standard search box.
    pub fn half_width(self) -> f64 {
        match self {
            BaseFunction::Sphere => 100.0,
            BaseFunction::Ackley => 32.768,
            BaseFunction::Rastrigin => 5.12,
            BaseFunction::Rosenbrock => 30.0,
            BaseFunction::Griewank => 600.0,
            BaseFunction::DeJongF4 => 1.28,
            BaseFunction::Schwefel => 500.0,
        }
    }

    pub fn optimum_position(self, dim: usize) -> PointVec {
        match self {
            BaseFunction::Rosenbrock => PointVec::filled(dim, 1.0),
            BaseFunction::Schwefel => PointVec::filled(dim, SCHWEFEL_OPTIMUM),
            _ => PointVec::zeros(dim),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            BaseFunction::Sphere => x.iter().map(|v| v * v).sum(),
            BaseFunction::Ackley => ackley(x),
            BaseFunction::Rastrigin => x
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BaseFunction::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            BaseFunction::Griewank => {
                let sum: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (v / ((j + 1) as f64).sqrt()).cos())
                    .product();
                1.0 + sum - prod
            }
            BaseFunction::DeJongF4 => x
                .iter()
                .enumerate()
                .map(|(j, v)| (j + 1) as f64 * v.powi(4))
                .sum(),
            BaseFunction::Schwefel => {
                SCHWEFEL_OFFSET * x.len() as f64
                    - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
            }
        }
    }
}

fn ackley(x: &[f64]) -> f64 {
    const A: f64 = 20.0;
    const B: f64 = 0.2;
    const C: f64 = 2.0 * PI;
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (C * v).cos()).sum::<f64>() / d;
    -A * (-B * sq.sqrt()).exp() - cs.exp() + A + std::f64::consts::E
}

/// Shift and orthogonal rotation: `x -> M (x - o)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRotate {
    shift: PointVec,
    /// Row-major `d x d`.
    rotation: Vec<f64>,
}

impl ShiftRotate {
    pub fn identity(dim: usize) -> Self {
        let mut rotation = vec![0.0; dim * dim];
        for i in 0..dim {
            rotation[i * dim + i] = 1.0;
        }
        Self {
            shift: PointVec::zeros(dim),
            rotation,
        }
    }

    /// Build from explicit parts. `rotation` is row-major and must be orthogonal.
    pub fn new(shift: PointVec, rotation: Vec<f64>) -> Result<Self> {
        let d = shift.dim();
        if rotation.len() != d * d {
            return Err(Error::config(
                "rotation",
                format!("expected {} entries for a {d}x{d} matrix, got {}", d * d, rotation.len()),
            ));
        }
        let t = Self { shift, rotation };
        let err = t.orthogonality_error();
        if err >= 1e-10 {
            return Err(Error::config("rotation", format!("not orthogonal (error {err:e})")));
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn shift(&self) -> &PointVec {
        &self.shift
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    /// `M (x - o)`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let centered: Vec<f64> = x.iter().zip(self.shift.iter()).map(|(a, b)| a - b).collect();
        (0..d)
            .map(|r| {
                self.rotation[r * d..(r + 1) * d]
                    .iter()
                    .zip(&centered)
                    .map(|(m, c)| m * c)
                    .sum()
            })
            .collect()
    }

    /// `M^T z + o`, the inverse of [`forward`](Self::forward).
    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|c| {
                (0..d).map(|r| self.rotation[r * d + c] * z[r]).sum::<f64>() + self.shift[c]
            })
            .collect()
    }

    /// `max |(M^T M - I)_{ij}|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        let m = &self.rotation;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| m[k * d + i] * m[k * d + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Random shift and rotation for a box.
///
/// The shift is uniform in the box scaled about its centre by `shift_radius`.
/// The rotation orthonormalizes a matrix of standard-normal draws; a
/// numerically singular draw is retried, up to five attempts in total.
pub fn make_shift_rotate(bounds: &Bounds, rng: &mut RngStream, shift_radius: f64) -> Result<ShiftRotate> {
    if shift_radius.is_nan() || shift_radius < 0.0 {
        return Err(Error::config("shift_radius", "must be non-negative"));
    }
    let d = bounds.dim();
    let shift: Vec<f64> = (0..d)
        .map(|j| {
            let centre = 0.5 * (bounds.lower()[j] + bounds.upper()[j]);
            let half = 0.5 * bounds.width(j) * shift_radius;
            rng.uniform_in(centre - half, centre + half)
        })
        .collect();
    let rotation = random_rotation(d, rng)?;
    Ok(ShiftRotate {
        shift: shift.into(),
        rotation,
    })
}

/// Random orthogonal matrix (row-major).
pub fn random_rotation(d: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    for _ in 0..MAX_ROTATION_ATTEMPTS {
        let raw: Vec<f64> = (0..d * d).map(|_| rng.standard_normal()).collect();
        if let Some(q) = orthonormalize_rows(raw, d) {
            return Ok(q);
        }
    }
    Err(Error::DegenerateRotation {
        attempts: MAX_ROTATION_ATTEMPTS,
    })
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. `None` when a
/// row is (numerically) in the span of the previous ones.
fn orthonormalize_rows(mut m: Vec<f64>, d: usize) -> Option<Vec<f64>> {
    for i in 0..d {
        let original_norm = row_norm(&m, d, i);
        for _pass in 0..2 {
            for k in 0..i {
                let dot: f64 = (0..d).map(|c| m[i * d + c] * m[k * d + c]).sum();
                for c in 0..d {
                    m[i * d + c] -= dot * m[k * d + c];
                }
            }
        }
        let norm = row_norm(&m, d, i);
        if norm.is_nan() || norm <= 1e-8 * original_norm.max(f64::MIN_POSITIVE) {
            return None;
        }
        for c in 0..d {
            m[i * d + c] /= norm;
        }
    }
    Some(m)
}

fn row_norm(m: &[f64], d: usize, i: usize) -> f64 {
    m[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt()
}

type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Base(BaseFunction),
    Custom(CustomFn),
}

/// A named objective on a box, optionally shifted and rotated.
#[derive(Clone)]
pub struct Objective {
    name: String,
    kind: Kind,
    bounds: Bounds,
    transform: Option<ShiftRotate>,
    optimum_value: f64,
    optimum_position: Option<PointVec>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("transformed", &self.transform.is_some())
            .finish()
    }
}

impl Objective {
    /// A catalog function on its standard box.
    pub fn base(function: BaseFunction, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dimension", "must be at least 1"));
        }
        let h = function.half_width();
        Ok(Self {
            name: function.name().to_string(),
            kind: Kind::Base(function),
            bounds: Bounds::uniform(dim, -h, h)?,
            transform: None,
            optimum_value: 0.0,
            optimum_position: Some(function.optimum_position(dim)),
        })
    }

    /// Look up a catalog name, generating any transform from seed 0.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        Self::by_name_with_seed(name, dim, 0)
    }

    /// Look up `base[_shifted][_rotated]`; the transform comes from `transform_seed`.
    pub fn by_name_with_seed(name: &str, dim: usize, transform_seed: u64) -> Result<Self> {
        let (base_name, shifted, rotated) = split_suffix(name);
        let function = BaseFunction::from_name(base_name).ok_or_else(|| {
            Error::config(
                "objective",
                format!("unknown objective `{name}`; valid: {}", catalog_names().join(", ")),
            )
        })?;
        let mut objective = Self::base(function, dim)?;
        if shifted || rotated {
            let mut rng = RngStream::new(transform_seed);
            let mut t = make_shift_rotate(&objective.bounds, &mut rng, DEFAULT_SHIFT_RADIUS)?;
            let identity = ShiftRotate::identity(dim);
            if !shifted {
                t.shift = identity.shift;
            } else if !rotated {
                t.rotation = identity.rotation;
            }
            objective = objective.with_transform(t)?;
            objective.name = name.to_string();
        }
        Ok(objective)
    }

    /// An arbitrary function, mostly for tests. Its optimum is unknown.
    pub fn custom(
        name: impl Into<String>,
        bounds: Bounds,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: Kind::Custom(Arc::new(f)),
            bounds,
            transform: None,
            optimum_value: f64::NAN,
            optimum_position: None,
        }
    }

    /// Evaluate as `f(M (x - o))`; the optimum moves to `M^T x* + o`.
    pub fn with_transform(mut self, transform: ShiftRotate) -> Result<Self> {
        if transform.dim() != self.dim() {
            return Err(Error::config(
                "transform",
                format!("transform has dimension {}, objective {}", transform.dim(), self.dim()),
            ));
        }
        self.optimum_position = self.optimum_position.map(|p| transform.inverse(&p).into());
        self.transform = Some(transform);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn transform(&self) -> Option<&ShiftRotate> {
        self.transform.as_ref()
    }

    pub fn known_optimum_value(&self) -> f64 {
        self.optimum_value
    }

    pub fn known_optimum_position(&self) -> Option<&PointVec> {
        self.optimum_position.as_ref()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::config(
                "dimension",
                format!("{} expects {} coordinates, got {}", self.name, self.dim(), x.len()),
            ));
        }
        Ok(match &self.transform {
            Some(t) => self.eval_raw(&t.forward(x)),
            None => self.eval_raw(x),
        })
    }

    fn eval_raw(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Base(f) => f.eval(x),
            Kind::Custom(f) => f(x),
        }
    }
}

fn split_suffix(name: &str) -> (&str, bool, bool) {
    if let Some(b) = name.strip_suffix("_shifted_rotated") {
        (b, true, true)
    } else if let Some(b) = name.strip_suffix("_shifted") {
        (b, true, false)
    } else if let Some(b) = name.strip_suffix("_rotated") {
        (b, false, true)
    } else {
        (name, false, false)
    }
}

/// Every base catalog name.
pub fn catalog_names() -> Vec<&'static str> {
    BaseFunction::ALL.iter().map(|f| f.name()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_minima() {
        for f in BaseFunction::ALL {
            for d in [1, 2, 10, 30] {
                let o = Objective::base(f, d).unwrap();
                let v = o.evaluate(o.known_optimum_position().unwrap()).unwrap();
                let tol = if f == BaseFunction::Schwefel { 1e-4 } else { 1e-9 };
                assert!(v.abs() <= tol, "{} d={d}: {v}", f.name());
            }
        }
        let ackley = Objective::by_name("ackley", 30).unwrap();
        assert!(ackley.evaluate(&[0.0; 30]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rastrigin_at_ones() {
        let o = Objective::by_name("rastrigin", 2).unwrap();
        let v = o.evaluate(&[1.0, 1.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dejong_weights_by_index() {
        let o = Objective::by_name("dejong_f4", 3).unwrap();
        assert_eq!(o.evaluate(&[1.0, 1.0, 1.0]).unwrap(), 6.0);
        assert_eq!(o.evaluate(&[0.0, 0.0, 2.0]).unwrap(), 48.0);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let o = Objective::by_name("sphere", 3).unwrap();
        assert!(matches!(o.evaluate(&[0.0; 2]), Err(Error::Config { .. })));
    }

    #[test]
    fn unknown_name_lists_catalog() {
        let err = Objective::by_name("booth", 2).unwrap_err().to_string();
        assert!(err.contains("ackley") && err.contains("booth"));
    }

    #[test]
    fn identity_transform_is_transparent() {
        let base = Objective::by_name("rastrigin", 4).unwrap();
        let t = base.clone().with_transform(ShiftRotate::identity(4)).unwrap();
        let x = [0.3, -1.2, 2.5, 4.0];
        assert_eq!(base.evaluate(&x).unwrap(), t.evaluate(&x).unwrap());
    }

    #[test]
    fn shifted_sphere_minimum_at_shift() {
        let o = Objective::by_name("sphere_shifted", 5).unwrap();
        let shift = o.transform().unwrap().shift().clone();
        assert_eq!(o.evaluate(&shift).unwrap(), 0.0);
        // dense random sampling never goes below the value at the shift
        let mut rng = RngStream::new(99);
        for _ in 0..20_000 {
            let x: Vec<f64> = (0..5).map(|_| rng.uniform_in(-100.0, 100.0)).collect();
            assert!(o.evaluate(&x).unwrap() > 0.0);
        }
    }

    #[test]
    fn rotations_are_orthogonal() {
        let mut rng = RngStream::new(5);
        for d in [1, 2, 10, 30] {
            let q = random_rotation(d, &mut rng).unwrap();
            let t = ShiftRotate::new(PointVec::zeros(d), q).unwrap();
            assert!(t.orthogonality_error() < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = vec![1.0, 2.0, 2.0, 4.0];
        assert!(orthonormalize_rows(m, 2).is_none());
    }

    #[test]
    fn transformed_optimum_keeps_value() {
        for f in BaseFunction::ALL {
            let name = format!("{}_shifted_rotated", f.name());
            let o = Objective::by_name_with_seed(&name, 10, 17).unwrap();
            let v = o.evaluate(o.known_optimum_position().unwrap()).unwrap();
            let tol = if f == BaseFunction::Schwefel { 1e-4 } else { 1e-9 };
            assert!(v.abs() <= tol, "{name}: {v}");
        }
    }

    #[test]
    fn evaluation_is_pure() {
        let o = Objective::by_name_with_seed("griewank_shifted_rotated", 8, 3).unwrap();
        let x = [1.0, -20.0, 3.5, 0.0, 7.0, -100.0, 42.0, 5.0];
        let a = o.evaluate(&x).unwrap();
        for _ in 0..10 {
            assert_eq!(a.to_bits(), o.evaluate(&x).unwrap().to_bits());
        }
    }
}
