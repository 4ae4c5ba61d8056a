//! The time loop: obstacle prologue, indicator pass, regime update and one IMEX step
//! over the mixed-layer state.

use super::config::{InitialCondition, ScenarioConfig};
use super::output::{snapshot_dir, write_report, write_snapshot};
use crate::boltzmann::{penalized_collision, penalized_stage, precompute_kernel, SpectralKernel};
use crate::coupling::{apply_obstacle, hydro_snapshot, neighbor_maxwellians, CouplingView, HybridState};
use crate::error::{Result, SolverError};
use crate::esbgk::stage_solve;
use crate::euler::{euler_rhs_cell, pressure, ConservedState, GAMMA};
use crate::imex::{imex_step, ImexOperator, ImexTableau};
use crate::indicators::{l1_distance_to_maxwellian, lambda_burnett, spatial_derivatives, v_eps1_eigenvalues, IndicatorSet, Primitive};
use crate::mesh::{classify_cells, CellKind, Footprint, KindMap, Layer, SpatialGrid, VelocityGrid};
use crate::moments::{conservative_maxwellian, moments_of, Moments};
use crate::regime::{convert_on_transition, regime_update, CellData};
use crate::transport::transport_cell_rhs;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Which layers a run may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Hybrid,
    /// Every cell stays in layer 0.
    PureEuler,
    /// Every cell stays in layer 2.
    PureBoltzmann,
}

/// Accumulated wall-clock seconds per module.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModuleTimes {
    pub coupling: f64,
    pub indicators: f64,
    pub regime: f64,
    pub euler: f64,
    pub transport: f64,
    pub esbgk: f64,
    pub boltzmann: f64,
    pub output: f64,
}

fn lap(slot: &mut f64, t: Instant) {
    *slot += t.elapsed().as_secs_f64();
}

/// Per-cell output moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMoments {
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub temp: f64,
    pub pressure: f64,
}

pub struct Simulation {
    pub cfg: ScenarioConfig,
    pub mode: Mode,
    pub grid: SpatialGrid,
    pub vg: VelocityGrid,
    pub kernel: Option<SpectralKernel>,
    pub kinds: KindMap,
    pub footprint: Option<Footprint>,
    pub layers: Vec<Layer>,
    pub state: HybridState,
    pub eps: Vec<f64>,
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub times: ModuleTimes,
    /// Cell-steps per layer over non-obstacle cells.
    pub cell_steps: [u64; 3],
    /// Wall time of each completed step.
    pub step_times: Vec<f64>,
    tableau: ImexTableau,
}

fn initial_primitive(ic: &InitialCondition, x: f64) -> (f64, [f64; 2], f64) {
    match *ic {
        InitialCondition::Riemann { x0, left, right } => {
            let s = if x <= x0 { left } else { right };
            (s.rho, s.u, s.pressure / s.rho)
        }
        InitialCondition::Uniform { state } => (state.rho, state.u, state.pressure / state.rho),
        InitialCondition::Bimodal { rho0, rho_amp, t0, t_amp, u } => {
            let pi = std::f64::consts::PI;
            (rho0 + rho_amp * (pi * x).sin(), u, t0 + t_amp * (pi * x).cos())
        }
    }
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig, mode: Mode) -> Result<Self> {
        cfg.validate()?;
        let grid = SpatialGrid::new(cfg.nx, cfg.ny, cfg.lx, cfg.ly, (cfg.origin[0], cfg.origin[1]), cfg.boundary)?;
        let vg = VelocityGrid::new(cfg.nv, cfg.vel_extent)?;
        let footprint = cfg.obstacle.map(|o| o.footprint);
        let kinds = classify_cells(&grid, footprint.as_ref())?;
        let kernel = match mode {
            Mode::PureEuler => None,
            _ => Some(precompute_kernel(&vg, &cfg.kernel)?),
        };
        let start = match mode {
            Mode::Hybrid => cfg.initial_layer,
            Mode::PureEuler => Layer::Euler,
            Mode::PureBoltzmann => Layer::Boltzmann,
        };
        let n = grid.cells();
        let mut layers = vec![start; n];
        let mut hydro = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        let mut eps = Vec::with_capacity(n);
        for c in 0..n {
            let (i, j) = grid.coords(c);
            let (x, _) = grid.center(i, j);
            eps.push(cfg.knudsen.at(x));
            if kinds.physical(i, j) == CellKind::Obstacle {
                let ob = cfg.obstacle.as_ref().expect("obstacle kind implies an obstacle");
                layers[c] = Layer::Euler;
                hydro.push(ob.state());
                dist.push(None);
                continue;
            }
            let (rho, u, temp) = initial_primitive(&cfg.initial, x);
            let m = Moments::new(rho, [u[0], u[1], 0.0], temp);
            let f = match cfg.initial {
                InitialCondition::Bimodal { .. } => {
                    let a = conservative_maxwellian(&m, &vg)?;
                    let b = conservative_maxwellian(&Moments::new(rho, [-u[0], -u[1], 0.0], temp), &vg)?;
                    Some(a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect::<Vec<f64>>())
                }
                _ if start.is_kinetic() => Some(conservative_maxwellian(&m, &vg)?),
                _ => None,
            };
            hydro.push(match &f {
                Some(f) => ConservedState::from_moments(&moments_of(f, &vg)?),
                None => ConservedState::from_moments(&m),
            });
            dist.push(if start.is_kinetic() { f } else { None });
        }
        let dt = cfg.dt();
        Ok(Simulation {
            cfg,
            mode,
            grid,
            vg,
            kernel,
            kinds,
            footprint,
            layers,
            state: HybridState { hydro, dist },
            eps,
            step: 0,
            time: 0.0,
            dt,
            times: ModuleTimes::default(),
            cell_steps: [0; 3],
            step_times: Vec::new(),
            tableau: ImexTableau::pr222(),
        })
    }

    fn view(&self) -> CouplingView<'_> {
        CouplingView {
            grid: &self.grid,
            vg: &self.vg,
            kinds: &self.kinds,
            layers: &self.layers,
            obstacle: self.cfg.obstacle.as_ref(),
        }
    }

    pub fn is_obstacle(&self, c: usize) -> bool {
        let (i, j) = self.grid.coords(c);
        self.kinds.physical(i, j) == CellKind::Obstacle
    }

    /// Moves the obstacle (after the first step) and forces the kinetic ring.
    fn prologue(&mut self) -> Result<()> {
        let (Some(spec), Some(fp)) = (self.cfg.obstacle, self.footprint) else {
            return Ok(());
        };
        let t = Instant::now();
        let shift = match spec.motion {
            Some(s) if self.step > 0 => s,
            _ => [0, 0],
        };
        let force = self.mode != Mode::PureEuler;
        let up = apply_obstacle(&self.grid, &self.vg, &spec, &fp, shift, force, &self.kinds, &mut self.state, &mut self.layers)
            .map_err(|e| e.with_step(self.step))?;
        self.kinds = up.kinds;
        self.footprint = Some(up.footprint);
        lap(&mut self.times.coupling, t);
        Ok(())
    }

    /// Indicator pass and regime update from the current state.
    pub fn update_regimes(&mut self) -> Result<()> {
        if self.mode != Mode::Hybrid {
            return Ok(());
        }
        let t = Instant::now();
        let step = self.step;
        let view = self.view();
        let snap = hydro_snapshot(&view, &self.state).map_err(|e| e.with_step(step))?;
        let prims: Vec<Primitive> = snap
            .par_iter()
            .enumerate()
            .map(|(c, u)| {
                u.to_moments(GAMMA).map(|m| Primitive::from(&m)).map_err(|e| {
                    let (i, j) = self.grid.coords(c);
                    e.at_cell(i, j, self.layers[c].tag(), step)
                })
            })
            .collect::<Result<_>>()?;
        let (grid, vg, cfg, state) = (&self.grid, &self.vg, &self.cfg, &self.state);
        let new_layers: Vec<Layer> = (0..grid.cells())
            .into_par_iter()
            .map_init(
                || vec![0.0; vg.len()],
                |scratch, c| {
                    let (i, j) = grid.coords(c);
                    let layer = self.layers[c];
                    if self.kinds.physical(i, j) != CellKind::Interior {
                        return Ok(layer);
                    }
                    let at = |di, dj| prims[grid.neighbor(i, j, di, dj)];
                    let d = spatial_derivatives(&[prims[c], at(-1, 0), at(1, 0), at(0, -1), at(0, 1)], grid.dx, grid.dy);
                    let (la, lb, lc) = v_eps1_eigenvalues(&d, &prims[c], self.eps[c], &cfg.transport_coeffs);
                    let xi_l1 = match (layer, &state.dist[c]) {
                        (Layer::Esbgk, Some(f)) => Some(l1_distance_to_maxwellian(f, vg, scratch).map_err(|e| e.at_cell(i, j, layer.tag(), step))?),
                        _ => None,
                    };
                    let ind = IndicatorSet {
                        lambda_a: la,
                        lambda_b: lb,
                        lambda_c: lc,
                        lambda_burnett: lambda_burnett(&d, &prims[c], self.eps[c], cfg.laplacian_norm),
                        xi_l1,
                    };
                    regime_update(layer, &ind, &cfg.thresholds).map_err(|e| e.at_cell(i, j, layer.tag(), step))
                },
            )
            .collect::<Result<_>>()?;
        lap(&mut self.times.indicators, t);

        let t = Instant::now();
        let changed: Vec<usize> = (0..grid.cells()).filter(|&c| new_layers[c] != self.layers[c]).collect();
        let converted: Vec<(usize, CellData)> = changed
            .par_iter()
            .map(|&c| {
                let (old, new) = (self.layers[c], new_layers[c]);
                let data = match &self.state.dist[c] {
                    Some(f) if old.is_kinetic() => CellData::Kinetic(f.clone()),
                    _ => CellData::Hydro(self.state.hydro[c]),
                };
                convert_on_transition(old, new, data, vg).map(|d| (c, d)).map_err(|e| {
                    let (i, j) = grid.coords(c);
                    e.at_cell(i, j, old.tag(), step)
                })
            })
            .collect::<Result<_>>()?;
        for (c, d) in converted {
            match d {
                CellData::Hydro(u) => {
                    self.state.hydro[c] = u;
                    self.state.dist[c] = None;
                }
                CellData::Kinetic(f) => self.state.dist[c] = Some(f),
            }
        }
        self.layers = new_layers;
        lap(&mut self.times.regime, t);
        Ok(())
    }

    /// One full step: prologue, regime update, IMEX step.
    pub fn step_once(&mut self) -> Result<()> {
        let t0 = Instant::now();
        self.prologue()?;
        self.update_regimes()?;
        for c in 0..self.grid.cells() {
            if !self.is_obstacle(c) {
                self.cell_steps[self.layers[c].tag() as usize] += 1;
            }
        }
        let step = self.step;
        let next = {
            let mut sys = HybridSystem {
                view: CouplingView {
                    grid: &self.grid,
                    vg: &self.vg,
                    kinds: &self.kinds,
                    layers: &self.layers,
                    obstacle: self.cfg.obstacle.as_ref(),
                },
                kernel: self.kernel.as_ref(),
                eps: &self.eps,
                cfg: &self.cfg,
                step,
                times: &mut self.times,
            };
            imex_step(&mut sys, &self.tableau, &self.state, self.dt).map_err(|e| e.with_step(step))?
        };
        self.state = next;
        let t = Instant::now();
        let (vg, layers, grid) = (&self.vg, &self.layers, &self.grid);
        let kinds = &self.kinds;
        self.state
            .hydro
            .par_iter_mut()
            .zip(self.state.dist.par_iter())
            .enumerate()
            .try_for_each(|(c, (u, f))| {
                let (i, j) = grid.coords(c);
                if let (Some(f), true) = (f, layers[c].is_kinetic() && kinds.physical(i, j) != CellKind::Obstacle) {
                    *u = ConservedState::from_moments(&moments_of(f, vg).map_err(|e| e.at_cell(i, j, layers[c].tag(), step))?);
                }
                Ok::<(), SolverError>(())
            })?;
        lap(&mut self.times.coupling, t);
        self.step += 1;
        self.time = self.step as f64 * self.dt;
        self.step_times.push(t0.elapsed().as_secs_f64());
        Ok(())
    }

    /// Moments of every physical cell; obstacle cells report the fixed state.
    pub fn cell_moments(&self) -> Result<Vec<CellMoments>> {
        self.state
            .hydro
            .iter()
            .enumerate()
            .map(|(c, u)| {
                let m = u.to_moments(GAMMA).map_err(|e| {
                    let (i, j) = self.grid.coords(c);
                    e.at_cell(i, j, self.layers[c].tag(), self.step)
                })?;
                Ok(CellMoments { rho: m.rho, ux: m.u[0], uy: m.u[1], temp: m.temp, pressure: pressure(u, GAMMA)? })
            })
            .collect()
    }

    /// Regime tags with `-1` for obstacle cells.
    pub fn regime_map(&self) -> Vec<i8> {
        (0..self.grid.cells())
            .map(|c| if self.is_obstacle(c) { -1 } else { self.layers[c].tag() as i8 })
            .collect()
    }

    /// Percent of non-obstacle cell-steps spent in each layer.
    pub fn layer_percentages(&self) -> [f64; 3] {
        let total: u64 = self.cell_steps.iter().sum();
        if total == 0 {
            return [0.0; 3];
        }
        self.cell_steps.map(|n| 100.0 * n as f64 / total as f64)
    }
}

/// The mixed-layer system: Euler cells follow the explicit tableau only (which is
/// TVD-RK2), ES-BGK and Boltzmann cells use their IMEX splittings.
struct HybridSystem<'a> {
    view: CouplingView<'a>,
    kernel: Option<&'a SpectralKernel>,
    eps: &'a [f64],
    cfg: &'a ScenarioConfig,
    step: usize,
    times: &'a mut ModuleTimes,
}

impl HybridSystem<'_> {
    fn cell_err(&self, c: usize) -> impl Fn(SolverError) -> SolverError + '_ {
        move |e| {
            let (i, j) = self.view.grid.coords(c);
            e.at_cell(i, j, self.view.layers[c].tag(), self.step)
        }
    }
}

impl ImexOperator for HybridSystem<'_> {
    type State = HybridState;

    fn explicit(&mut self, y: &HybridState, _: usize) -> Result<HybridState> {
        let view = self.view;
        let (grid, vg) = (view.grid, view.vg);
        let n = grid.cells();
        let any_kinetic = (0..n).any(|c| view.is_kinetic(c));

        let t = Instant::now();
        let snap = hydro_snapshot(&view, y)?;
        let cache = if any_kinetic { neighbor_maxwellians(&view, &snap)? } else { vec![None; n] };
        lap(&mut self.times.coupling, t);

        let t = Instant::now();
        let hydro: Vec<ConservedState> = (0..n)
            .into_par_iter()
            .map(|c| {
                if !view.is_fluid(c) {
                    return Ok(ConservedState([0.0; 4]));
                }
                let (i, j) = grid.coords(c);
                euler_rhs_cell(grid, &snap, i, j, GAMMA).map(ConservedState).map_err(self.cell_err(c))
            })
            .collect::<Result<_>>()?;
        lap(&mut self.times.euler, t);

        let t = Instant::now();
        let source = |c: usize| -> Result<&[f64]> {
            let f = if view.is_kinetic(c) { y.dist[c].as_deref() } else { cache[c].as_deref() };
            f.ok_or_else(|| SolverError::Contract("transport stencil reads a cell without a distribution".into()))
        };
        let mut dist: Vec<Option<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|c| {
                if !view.is_kinetic(c) {
                    return Ok(None);
                }
                let (i, j) = grid.coords(c);
                let at = |di: isize, dj: isize| source(grid.neighbor(i, j, di, dj));
                let xs = [at(-2, 0)?, at(-1, 0)?, at(0, 0)?, at(1, 0)?, at(2, 0)?];
                let ys = [at(0, -2)?, at(0, -1)?, at(0, 0)?, at(0, 1)?, at(0, 2)?];
                let mut out = vec![0.0; vg.len()];
                transport_cell_rhs(&xs, &ys, vg, grid, self.cfg.transport_scheme, &mut out);
                Ok(Some(out))
            })
            .collect::<Result<_>>()?;
        lap(&mut self.times.transport, t);

        let t = Instant::now();
        if let Some(kernel) = self.kernel {
            let penalty = self.cfg.penalty;
            dist.par_iter_mut().enumerate().try_for_each_init(
                || (kernel.workspace(), vec![0.0; vg.len()]),
                |(ws, q), (c, slot)| {
                    let Some(r) = slot.as_mut() else { return Ok(()) };
                    if view.layers[c] != Layer::Boltzmann {
                        return Ok(());
                    }
                    let f = y.dist[c].as_ref().expect("kinetic cell has a distribution");
                    penalized_collision(f, vg, kernel, self.eps[c], &penalty, ws, q).map_err(self.cell_err(c))?;
                    r.iter_mut().zip(q.iter()).for_each(|(x, d)| *x += d);
                    Ok::<(), SolverError>(())
                },
            )?;
        } else if (0..n).any(|c| view.is_kinetic(c) && view.layers[c] == Layer::Boltzmann) {
            return Err(SolverError::Contract("Boltzmann cells present but no collision kernel was built".into()));
        }
        lap(&mut self.times.boltzmann, t);
        Ok(HybridState { hydro, dist })
    }

    fn implicit_solve(&mut self, rhs: &HybridState, a: f64, _: usize) -> Result<HybridState> {
        let view = self.view;
        let vg = view.vg;
        let mut dist: Vec<Option<Vec<f64>>> = vec![None; rhs.dist.len()];
        for layer in [Layer::Esbgk, Layer::Boltzmann] {
            let t = Instant::now();
            dist.par_iter_mut().enumerate().try_for_each(|(c, slot)| {
                if view.layers[c] != layer || !view.is_kinetic(c) {
                    return Ok(());
                }
                let f = rhs.dist[c]
                    .as_ref()
                    .ok_or_else(|| SolverError::Contract("kinetic cell without a distribution".into()))
                    .map_err(self.cell_err(c))?;
                let mut out = vec![0.0; vg.len()];
                match layer {
                    Layer::Esbgk => stage_solve(f, vg, a, self.eps[c], &self.cfg.esbgk, &mut out).map(|_| ()),
                    _ => penalized_stage(f, vg, a, self.eps[c], &self.cfg.penalty, &mut out),
                }
                .map_err(self.cell_err(c))?;
                *slot = Some(out);
                Ok::<(), SolverError>(())
            })?;
            match layer {
                Layer::Esbgk => lap(&mut self.times.esbgk, t),
                _ => lap(&mut self.times.boltzmann, t),
            }
        }
        Ok(HybridState { hydro: rhs.hydro.clone(), dist })
    }
}

/// Relative per-cell cost of each layer in the collision cost model.
pub const LAYER_COST: [f64; 3] = [1.0, 4.0, 14.0];

/// Wall-clock ratios observed for Tests 1 to 5 on the original hardware.
pub const REFERENCE_SPEEDUP: [f64; 5] = [1.8, 3.0, 2.4, 2.6, 1.3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: u8,
    pub steps: usize,
    pub dt: f64,
    pub final_time: f64,
    pub workers: usize,
    pub times: ModuleTimes,
    pub total_seconds: f64,
    /// Euler, ES-BGK and Boltzmann shares of non-obstacle cell-steps, in percent.
    pub layer_percent: [f64; 3],
    pub cell_steps: [u64; 3],
    /// Hybrid collision cost over the all-Boltzmann cost.
    pub cost_ratio: f64,
    pub sampled_kinetic_steps: usize,
    pub full_kinetic_estimate_seconds: Option<f64>,
    pub speedup: Option<f64>,
    pub reference_speedup: f64,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let p = self.layer_percent;
        let mut s = format!(
            "scenario {}: {} steps to t = {:.4} in {:.1} s ({} workers)\nlayers: euler {:.1}%  es-bgk {:.1}%  boltzmann {:.1}%\ncost ratio vs all-Boltzmann: {:.3}\n",
            self.scenario, self.steps, self.final_time, self.total_seconds, self.workers, p[0], p[1], p[2], self.cost_ratio
        );
        match (self.full_kinetic_estimate_seconds, self.speedup) {
            (Some(e), Some(r)) => s += &format!("all-Boltzmann estimate {e:.1} s, speedup {r:.2} (reference {:.1})\n", self.reference_speedup),
            _ => s += &format!("speedup not sampled (reference {:.1})\n", self.reference_speedup),
        }
        let t = &self.times;
        s += &format!(
            "module seconds: coupling {:.2} indicators {:.2} regime {:.2} euler {:.2} transport {:.2} esbgk {:.2} boltzmann {:.2} output {:.2}",
            t.coupling, t.indicators, t.regime, t.euler, t.transport, t.esbgk, t.boltzmann, t.output
        );
        s
    }
}

/// Cell-step weighted cost of the measured layer shares relative to running every cell in layer 2.
pub fn cost_ratio(percent: [f64; 3]) -> f64 {
    percent.iter().zip(LAYER_COST).map(|(p, c)| p / 100.0 * c).sum::<f64>() / LAYER_COST[2]
}

impl Simulation {
    /// Advances to the configured end time, writing snapshots under `out` when given.
    pub fn run(&mut self, out: Option<&Path>) -> Result<()> {
        let steps = self.cfg.steps();
        let mut marks = self.cfg.snapshot_steps();
        if let Some(k) = self.cfg.snapshot_every.filter(|&k| k > 0) {
            marks.extend((0..=steps).step_by(k));
        }
        marks.sort_unstable();
        marks.dedup();
        if let Some(dir) = out {
            self.maybe_snapshot(dir, &marks)?;
        }
        while self.step < steps {
            self.step_once()?;
            if let Some(dir) = out {
                self.maybe_snapshot(dir, &marks)?;
            }
            log::debug!("step {} t = {:.5} layers {:?}", self.step, self.time, self.cell_steps);
        }
        Ok(())
    }

    fn maybe_snapshot(&mut self, dir: &Path, marks: &[usize]) -> Result<()> {
        if marks.binary_search(&self.step).is_err() {
            return Ok(());
        }
        let t = Instant::now();
        let fields = self.cell_moments()?;
        write_snapshot(&snapshot_dir(dir, self.step), &self.grid, &fields, &self.regime_map(), self.step, self.time, &self.cfg)?;
        lap(&mut self.times.output, t);
        Ok(())
    }
}

fn run_inner(cfg: &ScenarioConfig, out: Option<&Path>, workers: usize) -> Result<RunReport> {
    let t0 = Instant::now();
    let mut sim = Simulation::new(cfg.clone(), Mode::Hybrid)?;
    sim.run(out)?;
    let total = t0.elapsed().as_secs_f64();
    let samples = cfg.speedup_samples.min(sim.cfg.steps());
    let (estimate, speedup) = if samples > 0 {
        let mut full = Simulation::new(cfg.clone(), Mode::PureBoltzmann)?;
        for _ in 0..samples {
            full.step_once()?;
        }
        let e = estimate_full_kinetic_time(&full.step_times, sim.cfg.steps())?;
        (Some(e), Some(e / total))
    } else {
        (None, None)
    };
    let percent = sim.layer_percentages();
    let report = RunReport {
        scenario: cfg.scenario,
        steps: sim.step,
        dt: sim.dt,
        final_time: sim.time,
        workers,
        times: sim.times,
        total_seconds: total,
        layer_percent: percent,
        cell_steps: sim.cell_steps,
        cost_ratio: cost_ratio(percent),
        sampled_kinetic_steps: samples,
        full_kinetic_estimate_seconds: estimate,
        speedup,
        reference_speedup: REFERENCE_SPEEDUP[cfg.scenario as usize - 1],
    };
    if let Some(dir) = out {
        write_report(dir, &report)?;
    }
    Ok(report)
}

/// Runs the hybrid solver for a scenario, then samples all-Boltzmann steps for the
/// speedup estimate. Snapshots and `report.toml` go under `out` when given.
pub fn run_scenario(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SolverError::Config(format!("thread pool: {e}")))?
            .install(|| run_inner(cfg, out, n)),
        None => run_inner(cfg, out, rayon::current_num_threads()),
    }
}

/// Linear extrapolation of sampled step times to a full run.
pub fn estimate_full_kinetic_time(samples: &[f64], total_steps: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(SolverError::Contract("no sampled full-kinetic steps".into()));
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64 * total_steps as f64)
}
