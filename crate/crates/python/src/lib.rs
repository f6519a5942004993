//! Python bindings: objectives, optimizers, lattices and experiments.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gcpso_core::harness;
use gcpso_core::{
    Algorithm, ExperimentConfig, ExperimentSummary, LatticeState, LocalMap, OptimizerConfig, PointVec,
    SwarmState, Topology,
};

fn value_error(e: gcpso_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn local_map(kind: &str, parameter: f64) -> PyResult<LocalMap> {
    let map = match kind {
        "logistic" => LocalMap::Logistic(parameter),
        "tent" => LocalMap::Tent(parameter),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown map `{other}`; valid: logistic, tent"
            )))
        }
    };
    map.validate().map_err(value_error)?;
    Ok(map)
}

/// A benchmark objective from the catalog.
#[pyclass(name = "Objective", module = "gcpso", skip_from_py_object)]
#[derive(Clone)]
struct PyObjective {
    inner: gcpso_core::Objective,
}

#[pymethods]
impl PyObjective {
    #[new]
    #[pyo3(signature = (name, dim, transform_seed = 0))]
    fn new(name: &str, dim: usize, transform_seed: u64) -> PyResult<Self> {
        gcpso_core::Objective::by_name_with_seed(name, dim, transform_seed)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&x).map_err(value_error)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.bounds().lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.bounds().upper().to_vec()
    }

    #[getter]
    fn known_optimum_value(&self) -> f64 {
        self.inner.known_optimum_value()
    }

    #[getter]
    fn known_optimum_position(&self) -> Option<Vec<f64>> {
        self.inner.known_optimum_position().map(|p| p.to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Objective(name={:?}, dim={})", self.inner.name(), self.inner.dim())
    }
}

#[allow(clippy::too_many_arguments)]
fn optimizer_config(
    algorithm: &str,
    dim: usize,
    population: usize,
    max_iterations: usize,
    seed: u64,
    epsilon: f64,
    c1: f64,
    c2: f64,
    v_max_fraction: f64,
) -> PyResult<OptimizerConfig> {
    let mut c = OptimizerConfig::new(
        Algorithm::from_name(algorithm).map_err(value_error)?,
        population,
        dim,
        max_iterations,
    );
    c.seed = seed;
    c.epsilon = epsilon;
    c.c1 = c1;
    c.c2 = c2;
    c.v_max_fraction = v_max_fraction;
    c.validate().map_err(value_error)?;
    Ok(c)
}

/// A stepping optimizer over one objective.
#[pyclass(name = "Optimizer", module = "gcpso")]
struct PyOptimizer {
    inner: gcpso_core::Optimizer,
}

#[pymethods]
impl PyOptimizer {
    #[new]
    #[pyo3(signature = (algorithm, objective, population = 40, max_iterations = 1000, seed = 0,
                        epsilon = 0.1, c1 = 2.0, c2 = 2.0, v_max_fraction = 0.2))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        algorithm: &str,
        objective: &PyObjective,
        population: usize,
        max_iterations: usize,
        seed: u64,
        epsilon: f64,
        c1: f64,
        c2: f64,
        v_max_fraction: f64,
    ) -> PyResult<Self> {
        let config = optimizer_config(
            algorithm,
            objective.inner.dim(),
            population,
            max_iterations,
            seed,
            epsilon,
            c1,
            c2,
            v_max_fraction,
        )?;
        gcpso_core::Optimizer::new(config, objective.inner.clone())
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// Advance `count` iterations; returns the gbest value afterwards.
    #[pyo3(signature = (count = 1))]
    fn step(&mut self, count: usize) -> PyResult<f64> {
        for _ in 0..count {
            self.inner.step().map_err(value_error)?;
        }
        Ok(self.inner.state().gbest_value)
    }

    #[getter]
    fn iteration(&self) -> usize {
        self.inner.state().iteration
    }

    #[getter]
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }

    #[getter]
    fn gbest_value(&self) -> f64 {
        self.inner.state().gbest_value
    }

    #[getter]
    fn gbest_position(&self) -> Vec<f64> {
        self.inner.state().gbest_position.to_vec()
    }

    #[getter]
    fn positions(&self) -> Vec<Vec<f64>> {
        self.inner.state().positions.iter().map(|p| p.to_vec()).collect()
    }

    #[getter]
    fn velocities(&self) -> Vec<Vec<f64>> {
        self.inner.state().velocities.iter().map(|p| p.to_vec()).collect()
    }

    #[getter]
    fn pbest_values(&self) -> Vec<f64> {
        self.inner.state().pbest_values.clone()
    }
}

/// Run one trial and return its report as a dict.
#[pyfunction]
#[pyo3(signature = (algorithm, objective, population = 40, iterations = 1000, seed = 0,
                    epsilon = 0.1, c1 = 2.0, c2 = 2.0, v_max_fraction = 0.2))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    algorithm: &str,
    objective: &PyObjective,
    population: usize,
    iterations: usize,
    seed: u64,
    epsilon: f64,
    c1: f64,
    c2: f64,
    v_max_fraction: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = optimizer_config(
        algorithm,
        objective.inner.dim(),
        population,
        iterations,
        seed,
        epsilon,
        c1,
        c2,
        v_max_fraction,
    )?;
    let report = gcpso_core::run(&config, &objective.inner).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("algorithm", report.algorithm)?;
    d.set_item("objective", report.objective)?;
    d.set_item("seed", report.seed)?;
    d.set_item("history", report.history)?;
    d.set_item("final_best_value", report.final_best_value)?;
    d.set_item("final_best_position", report.final_best_position.into_inner())?;
    d.set_item("evaluations_used", report.evaluations_used)?;
    Ok(d)
}

/// `(1-e)(g - x_i) + e/(n-1) sum_{j != i} (g - x_j)` for explicit positions.
#[pyfunction]
fn coupled_social_term(positions: Vec<Vec<f64>>, gbest: Vec<f64>, i: usize, epsilon: f64) -> PyResult<Vec<f64>> {
    let state = swarm_from(positions, gbest)?;
    if i >= state.population() {
        return Err(PyValueError::new_err(format!("particle {i} out of range")));
    }
    gcpso_core::coupled_social_term(&state, i, epsilon)
        .map(PointVec::into_inner)
        .map_err(value_error)
}

fn swarm_from(positions: Vec<Vec<f64>>, gbest: Vec<f64>) -> PyResult<SwarmState> {
    let d = gbest.len();
    if positions.iter().any(|p| p.len() != d) {
        return Err(PyValueError::new_err("every position must match the gbest dimension"));
    }
    let n = positions.len();
    let positions: Vec<PointVec> = positions.into_iter().map(PointVec::from).collect();
    let velocities = vec![PointVec::zeros(d); n];
    let mut state = SwarmState::new(positions, velocities, &vec![0.0; n]).map_err(value_error)?;
    state.gbest_position = gbest.into();
    Ok(state)
}

/// A one-dimensional coupled map lattice.
#[pyclass(name = "Lattice", module = "gcpso")]
struct PyLattice {
    inner: LatticeState,
    map: LocalMap,
}

#[pymethods]
impl PyLattice {
    #[new]
    #[pyo3(signature = (cells, coupling, topology = "global", map = "logistic", parameter = 4.0))]
    fn new(cells: Vec<f64>, coupling: f64, topology: &str, map: &str, parameter: f64) -> PyResult<Self> {
        let topology: Topology = topology.parse().map_err(value_error)?;
        Ok(Self {
            inner: LatticeState::new(cells, coupling, topology).map_err(value_error)?,
            map: local_map(map, parameter)?,
        })
    }

    /// Advance `count` steps and return the cells.
    #[pyo3(signature = (count = 1))]
    fn step(&mut self, count: usize) -> Vec<f64> {
        for _ in 0..count {
            self.inner.advance(&self.map);
        }
        self.inner.cells().to_vec()
    }

    /// The space-time field: `steps + 1` rows of cells.
    fn orbit(&self, steps: usize) -> Vec<Vec<f64>> {
        gcpso_core::orbit(&self.inner, &self.map, steps)
            .into_iter()
            .map(|s| s.cells().to_vec())
            .collect()
    }

    #[getter]
    fn cells(&self) -> Vec<f64> {
        self.inner.cells().to_vec()
    }

    #[getter]
    fn time(&self) -> u64 {
        self.inner.time()
    }
}

/// Run an experiment described by a TOML document; returns the summary as JSON.
#[pyfunction]
fn run_experiment(config_toml: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_toml_str(config_toml).map_err(value_error)?;
    let outcome = harness::run_experiment(&config).map_err(value_error)?;
    outcome.summary.to_json().map_err(value_error)
}

/// Win/loss/tie tally of `challenger` against `baseline` in a JSON summary.
#[pyfunction]
fn compare<'py>(py: Python<'py>, summary_json: &str, baseline: &str, challenger: &str) -> PyResult<Bound<'py, PyDict>> {
    let summary = ExperimentSummary::from_json(summary_json).map_err(value_error)?;
    let table = harness::compare(&summary, baseline, challenger).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("wins", table.wins)?;
    d.set_item("losses", table.losses)?;
    d.set_item("ties", table.ties)?;
    let rows: Vec<(String, f64, f64, String)> = table
        .rows
        .into_iter()
        .map(|r| (r.objective, r.baseline_median, r.challenger_median, r.outcome.name().to_string()))
        .collect();
    d.set_item("rows", rows)?;
    Ok(d)
}

#[pyfunction]
fn objective_names() -> Vec<&'static str> {
    gcpso_core::objectives::catalog_names()
}

#[pymodule]
fn gcpso(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyObjective>()?;
    m.add_class::<PyOptimizer>()?;
    m.add_class::<PyLattice>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(coupled_social_term, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(objective_names, m)?)?;
    Ok(())
}
