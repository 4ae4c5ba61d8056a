//! Cross-layer stencil synthesis, obstacle forcing and the mixed-layer stage state.

use crate::error::{Result, SolverError};
use crate::euler::{ConservedState, GAMMA};
use crate::imex::StageVector;
use crate::mesh::{classify_cells, CellKind, Footprint, KindMap, Layer, SpatialGrid, VelocityGrid};
use crate::moments::{conservative_maxwellian, moments_of, Moments};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fixed-state obstacle, optionally moving by a whole-cell offset every step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub footprint: Footprint,
    pub rho: f64,
    pub pressure: f64,
    #[serde(default)]
    pub u: [f64; 2],
    /// Cell offset applied at the start of every step after the first.
    #[serde(default)]
    pub motion: Option<[isize; 2]>,
}

impl ObstacleSpec {
    pub fn state(&self) -> ConservedState {
        ConservedState::from_primitive(self.rho, self.u[0], self.u[1], self.pressure, GAMMA)
    }

    pub fn moments(&self) -> Moments {
        Moments::new(self.rho, [self.u[0], self.u[1], 0.0], self.pressure / self.rho)
    }
}

/// Solution carried through an IMEX step: conserved variables for every cell and a
/// distribution for kinetic cells only.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    pub hydro: Vec<ConservedState>,
    pub dist: Vec<Option<Vec<f64>>>,
}

impl StageVector for HybridState {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (p, q) in self.hydro.iter_mut().zip(&x.hydro) {
            p.axpy(a, &q.0);
        }
        for (p, q) in self.dist.iter_mut().zip(&x.dist) {
            if let (Some(p), Some(q)) = (p.as_mut(), q.as_ref()) {
                p.axpy(a, q);
            }
        }
    }

    fn scale(&mut self, a: f64) {
        for p in &mut self.hydro {
            p.0.iter_mut().for_each(|x| *x *= a);
        }
        for p in self.dist.iter_mut().flatten() {
            p.scale(a);
        }
    }
}

/// Read-only view of the grid topology used while synthesizing stencils.
#[derive(Clone, Copy)]
pub struct CouplingView<'a> {
    pub grid: &'a SpatialGrid,
    pub vg: &'a VelocityGrid,
    pub kinds: &'a KindMap,
    pub layers: &'a [Layer],
    pub obstacle: Option<&'a ObstacleSpec>,
}

impl CouplingView<'_> {
    pub fn is_obstacle(&self, c: usize) -> bool {
        let (i, j) = self.grid.coords(c);
        self.kinds.physical(i, j) == CellKind::Obstacle
    }

    /// Cell evolved with a distribution.
    pub fn is_kinetic(&self, c: usize) -> bool {
        self.layers[c].is_kinetic() && !self.is_obstacle(c)
    }

    /// Cell evolved with the Euler equations.
    pub fn is_fluid(&self, c: usize) -> bool {
        !self.layers[c].is_kinetic() && !self.is_obstacle(c)
    }
}

/// Conserved variables of any physical cell: stored `U`, moments of `f`, or the
/// obstacle state. Ghost reads are resolved by the caller through the grid.
pub fn synthesize_hydro_state(view: &CouplingView, y: &HybridState, c: usize) -> Result<ConservedState> {
    if view.is_obstacle(c) {
        let ob = view
            .obstacle
            .ok_or_else(|| SolverError::Contract("obstacle cell without an obstacle specification".into()))?;
        return Ok(ob.state());
    }
    if view.layers[c].is_kinetic() {
        let f = y.dist[c]
            .as_ref()
            .ok_or_else(|| SolverError::Contract("kinetic cell without a distribution".into()))?;
        return Ok(ConservedState::from_moments(&moments_of(f, view.vg)?));
    }
    Ok(y.hydro[c])
}

pub fn hydro_snapshot(view: &CouplingView, y: &HybridState) -> Result<Vec<ConservedState>> {
    (0..view.grid.cells())
        .into_par_iter()
        .map(|c| {
            synthesize_hydro_state(view, y, c).map_err(|e| {
                let (i, j) = view.grid.coords(c);
                e.at_cell(i, j, view.layers[c].tag(), 0)
            })
        })
        .collect()
}

/// Distribution of a non-kinetic cell as seen from a kinetic stencil.
pub fn synthesize_distribution(view: &CouplingView, snapshot: &[ConservedState], c: usize) -> Result<Vec<f64>> {
    let m = if view.is_obstacle(c) {
        view.obstacle
            .ok_or_else(|| SolverError::Contract("obstacle cell without an obstacle specification".into()))?
            .moments()
    } else {
        snapshot[c].to_moments(GAMMA)?
    };
    conservative_maxwellian(&m, view.vg)
}

/// Maxwellians of the non-kinetic cells that lie on some kinetic cell's transport stencil.
pub fn neighbor_maxwellians(view: &CouplingView, snapshot: &[ConservedState]) -> Result<Vec<Option<Vec<f64>>>> {
    let grid = view.grid;
    let mut needed = vec![false; grid.cells()];
    for c in 0..grid.cells() {
        if !view.is_kinetic(c) {
            continue;
        }
        let (i, j) = grid.coords(c);
        for d in -2..=2isize {
            for n in [grid.neighbor(i, j, d, 0), grid.neighbor(i, j, 0, d)] {
                if !view.is_kinetic(n) {
                    needed[n] = true;
                }
            }
        }
    }
    needed
        .par_iter()
        .enumerate()
        .map(|(c, &need)| {
            if !need {
                return Ok(None);
            }
            synthesize_distribution(view, snapshot, c).map(Some).map_err(|e| {
                let (i, j) = grid.coords(c);
                e.at_cell(i, j, view.layers[c].tag(), 0)
            })
        })
        .collect()
}

/// Outcome of [`apply_obstacle`].
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleUpdate {
    pub footprint: Footprint,
    pub kinds: KindMap,
    /// Cells uncovered by the move.
    pub vacated: Vec<usize>,
}

/// Moves the obstacle by `shift` cells and reclassifies cells. With `force_kinetic`,
/// vacated cells are reinitialized as layer 2 with the obstacle-state Maxwellian and
/// ring cells that were fluid are converted to layer 2 with the Maxwellian of `U`;
/// without it (fluid-only runs) vacated cells take the obstacle state as fluid cells.
#[allow(clippy::too_many_arguments)]
pub fn apply_obstacle(
    grid: &SpatialGrid,
    vg: &VelocityGrid,
    spec: &ObstacleSpec,
    current: &Footprint,
    shift: [isize; 2],
    force_kinetic: bool,
    old_kinds: &KindMap,
    state: &mut HybridState,
    layers: &mut [Layer],
) -> Result<ObstacleUpdate> {
    let footprint = current.translated(shift[0], shift[1]);
    let kinds = classify_cells(grid, Some(&footprint)).map_err(|e| match e {
        SolverError::Config(msg) => SolverError::Domain(format!("obstacle left the domain: {msg}")),
        e => e,
    })?;
    let mut vacated = Vec::new();
    let fixed = spec.state();
    for c in 0..grid.cells() {
        let (i, j) = grid.coords(c);
        let (was, now) = (old_kinds.physical(i, j), kinds.physical(i, j));
        match now {
            CellKind::Obstacle => {
                layers[c] = Layer::Euler;
                state.hydro[c] = fixed;
                state.dist[c] = None;
            }
            CellKind::Ring | CellKind::Interior if was == CellKind::Obstacle => {
                vacated.push(c);
                if !force_kinetic {
                    layers[c] = Layer::Euler;
                    state.hydro[c] = fixed;
                    state.dist[c] = None;
                    continue;
                }
                layers[c] = Layer::Boltzmann;
                state.hydro[c] = fixed;
                state.dist[c] = Some(conservative_maxwellian(&spec.moments(), vg)?);
            }
            CellKind::Ring if force_kinetic => {
                if !layers[c].is_kinetic() {
                    let m = state.hydro[c].to_moments(GAMMA).map_err(|e| e.at_cell(i, j, 0, 0))?;
                    state.dist[c] = Some(conservative_maxwellian(&m, vg)?);
                }
                layers[c] = Layer::Boltzmann;
            }
            _ => {}
        }
    }
    Ok(ObstacleUpdate { footprint, kinds, vacated })
}
