//! One-dimensional coupled map lattices.
//!
//! Each cell is driven by a chaotic local map and coupled to other cells in
//! one of three ways:
//!
//! * diffusive: nearest neighbours on a ring,
//!   `x'(i) = (1-e) f(x(i)) + e/2 [f(x(i-1)) + f(x(i+1))]`
//! * global: every other cell,
//!   `x'(i) = (1-e) f(x(i)) + e/(L-1) sum_{j != i} f(x(j))`
//! * accumulated: every earlier cell, the first cell uncoupled,
//!   `x'(j) = (1-e) f(x(j)) + e/(j-1) sum_{i < j} f(x(i))`
//!
//! Cells live in `[0, 1]`. Every update is a convex combination of mapped
//! values, so the interval is invariant; results are clipped back into it to
//! absorb rounding, which would otherwise let the logistic map escape.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::UniformSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "snake_case")]
pub enum LocalMap {
    /// `r x (1 - x)`, `r` in `(0, 4]`.
    Logistic(f64),
    /// `s min(x, 1 - x)`, slope `s` in `(0, 2]`.
    Tent(f64),
}

impl LocalMap {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LocalMap::Logistic(r) if !(r > 0.0 && r <= 4.0) => {
                Err(Error::config("map", format!("logistic r must lie in (0, 4], got {r}")))
            }
            LocalMap::Tent(s) if !(s > 0.0 && s <= 2.0) => {
                Err(Error::config("map", format!("tent slope must lie in (0, 2], got {s}")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            LocalMap::Logistic(r) => r * x * (1.0 - x),
            LocalMap::Tent(s) => s * x.min(1.0 - x),
        }
    }
}

impl Default for LocalMap {
    fn default() -> Self {
        LocalMap::Logistic(4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Diffusive,
    Global,
    Accumulated,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Diffusive, Topology::Global, Topology::Accumulated];

    pub fn name(self) -> &'static str {
        match self {
            Topology::Diffusive => "diffusive",
            Topology::Global => "global",
            Topology::Accumulated => "accumulated",
        }
    }

    /// Smallest lattice the coupling is defined for.
    pub fn min_cells(self) -> usize {
        match self {
            Topology::Diffusive => 3,
            Topology::Global | Topology::Accumulated => 2,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Topology::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "topology",
                    format!("unknown topology `{s}`; valid: diffusive, global, accumulated"),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    cells: Vec<f64>,
    time: u64,
    coupling: f64,
    topology: Topology,
}

impl LatticeState {
    pub fn new(cells: Vec<f64>, coupling: f64, topology: Topology) -> Result<Self> {
        if cells.len() < topology.min_cells() {
            return Err(Error::config(
                "lattice_size",
                format!(
                    "{} coupling needs at least {} cells, got {}",
                    topology,
                    topology.min_cells(),
                    cells.len()
                ),
            ));
        }
        if !(0.0..=1.0).contains(&coupling) {
            return Err(Error::config("epsilon", format!("coupling must lie in [0, 1], got {coupling}")));
        }
        if let Some(i) = cells.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::config(
                "cells",
                format!("cell {i} = {} is outside [0, 1]", cells[i]),
            ));
        }
        Ok(Self {
            cells,
            time: 0,
            coupling,
            topology,
        })
    }

    /// Cells drawn uniformly from `[0, 1)`.
    pub fn random<R: UniformSource>(size: usize, coupling: f64, topology: Topology, rng: &mut R) -> Result<Self> {
        let cells = (0..size).map(|_| rng.next_uniform()).collect();
        Self::new(cells, coupling, topology)
    }

    pub fn homogeneous(size: usize, value: f64, coupling: f64, topology: Topology) -> Result<Self> {
        Self::new(vec![value; size], coupling, topology)
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Advance one time step under the lattice's own topology.
    pub fn step(&self, map: &LocalMap) -> LatticeState {
        let mut next = self.clone();
        next.advance(map);
        next
    }

    /// In-place version of [`step`](Self::step).
    pub fn advance(&mut self, map: &LocalMap) {
        let mapped: Vec<f64> = self.cells.iter().map(|&x| map.apply(x)).collect();
        let e = self.coupling;
        match self.topology {
            Topology::Diffusive => diffusive_update(&mapped, e, &mut self.cells),
            Topology::Global => global_update(&mapped, e, &mut self.cells),
            Topology::Accumulated => accumulated_update(&mapped, e, &mut self.cells),
        }
        for c in &mut self.cells {
            *c = c.clamp(0.0, 1.0);
        }
        self.time += 1;
    }
}

fn diffusive_update(mapped: &[f64], e: f64, out: &mut [f64]) {
    let l = mapped.len();
    for i in 0..l {
        let left = mapped[(i + l - 1) % l];
        let right = mapped[(i + 1) % l];
        out[i] = (1.0 - e) * mapped[i] + 0.5 * e * (left + right);
    }
}

fn global_update(mapped: &[f64], e: f64, out: &mut [f64]) {
    let l = mapped.len();
    let total: f64 = mapped.iter().sum();
    let w = e / (l - 1) as f64;
    for i in 0..l {
        out[i] = (1.0 - e) * mapped[i] + w * (total - mapped[i]);
    }
}

fn accumulated_update(mapped: &[f64], e: f64, out: &mut [f64]) {
    out[0] = mapped[0];
    let mut prefix = mapped[0];
    for j in 1..mapped.len() {
        out[j] = (1.0 - e) * mapped[j] + e / j as f64 * prefix;
        prefix += mapped[j];
    }
}

/// Diffusive step; the state's topology must be diffusive.
pub fn step_diffusive(state: &LatticeState, map: &LocalMap) -> Result<LatticeState> {
    expect_topology(state, Topology::Diffusive)?;
    Ok(state.step(map))
}

/// Global step; the state's topology must be global.
pub fn step_global(state: &LatticeState, map: &LocalMap) -> Result<LatticeState> {
    expect_topology(state, Topology::Global)?;
    Ok(state.step(map))
}

/// Accumulated step; the state's topology must be accumulated.
pub fn step_accumulated(state: &LatticeState, map: &LocalMap) -> Result<LatticeState> {
    expect_topology(state, Topology::Accumulated)?;
    Ok(state.step(map))
}

fn expect_topology(state: &LatticeState, want: Topology) -> Result<()> {
    if state.topology != want {
        return Err(Error::config(
            "topology",
            format!("expected a {want} lattice, got {}", state.topology),
        ));
    }
    Ok(())
}

/// The initial state followed by `steps` successors.
pub fn orbit(state: &LatticeState, map: &LocalMap, steps: usize) -> Vec<LatticeState> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    let mut current = state.clone();
    for _ in 0..steps {
        current.advance(map);
        out.push(current.clone());
    }
    out
}

/// Coefficient of `f(x(j))` in the update of `cell`, for every `j`.
pub fn coupling_weights(topology: Topology, size: usize, coupling: f64, cell: usize) -> Vec<f64> {
    let mut w = vec![0.0; size];
    match topology {
        Topology::Diffusive => {
            w[cell] += 1.0 - coupling;
            w[(cell + size - 1) % size] += 0.5 * coupling;
            w[(cell + 1) % size] += 0.5 * coupling;
        }
        Topology::Global => {
            for (j, wj) in w.iter_mut().enumerate() {
                *wj = if j == cell {
                    1.0 - coupling
                } else {
                    coupling / (size - 1) as f64
                };
            }
        }
        Topology::Accumulated => {
            if cell == 0 {
                w[0] = 1.0;
            } else {
                for wj in &mut w[..cell] {
                    *wj = coupling / cell as f64;
                }
                w[cell] = 1.0 - coupling;
            }
        }
    }
    w
}
