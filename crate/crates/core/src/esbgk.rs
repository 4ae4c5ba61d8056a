//! Layer 1: ES-BGK relaxation and its IMEX time stepping.

use crate::error::Result;
use crate::imex::{imex_step, ImexOperator, ImexTableau};
use crate::mesh::{SpatialGrid, VelocityGrid};
use crate::moments::{anisotropic_gaussian_into, enforce_moments, moments_of, stress_tensor, Moments, StressTensor};
use crate::transport::{kinetic_transport_rhs, TransportScheme};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsbgkParams {
    /// Prandtl-correction parameter; -1/2 gives Pr = 2/3.
    pub beta: f64,
    /// `nu = nu_coeff * rho`.
    pub nu_coeff: f64,
}

impl Default for EsbgkParams {
    fn default() -> Self {
        EsbgkParams { beta: -0.5, nu_coeff: PI / 2.0 }
    }
}

impl EsbgkParams {
    pub fn collision_frequency(&self, rho: f64, _temp: f64) -> f64 {
        self.nu_coeff * rho
    }
}

/// Outcome of one stage solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageInfo {
    pub moments: Moments,
    /// The corrected tensor was not positive definite and `T I` was used.
    pub fallback: bool,
}

/// Relaxed stress `(1 - lambda) Theta* + lambda T I` with
/// `lambda = (1 - beta) a nu / (eps + (1 - beta) a nu)`.
pub fn relaxed_stress(theta: &StressTensor, m: &Moments, a: f64, eps: f64, p: &EsbgkParams) -> StressTensor {
    let nu = p.collision_frequency(m.rho, m.temp);
    let k = (1.0 - p.beta) * a * nu;
    let lam = k / (eps + k);
    StressTensor(theta.0 * (1.0 - lam) + nalgebra::Matrix3::identity() * (lam * m.temp))
}

/// Solves `f = f* + (a nu / eps)(G[f] - f)` in closed form, writing the result to `out`.
///
/// `G` is built from the relaxed tensor and corrected so its discrete density,
/// momentum and energy equal those of `f*`.
pub fn stage_solve(
    f_star: &[f64],
    vg: &VelocityGrid,
    a: f64,
    eps: f64,
    p: &EsbgkParams,
    out: &mut [f64],
) -> Result<StageInfo> {
    let m = moments_of(f_star, vg)?;
    if a == 0.0 {
        out.copy_from_slice(f_star);
        return Ok(StageInfo { moments: m, fallback: false });
    }
    let theta = stress_tensor(f_star, vg, &m);
    let relaxed = relaxed_stress(&theta, &m, a, eps, p);
    let fallback = anisotropic_gaussian_into(&m, &relaxed, p.beta, vg, out)?;
    enforce_moments(out, &m, vg)?;
    let an = a * p.collision_frequency(m.rho, m.temp);
    let (wf, wg) = (eps / (eps + an), an / (eps + an));
    for (o, &f) in out.iter_mut().zip(f_star) {
        *o = wf * f + wg * *o;
    }
    Ok(StageInfo { moments: m, fallback })
}

/// ES-BGK system over an all-kinetic field: transport explicit, relaxation implicit.
pub struct EsbgkSystem<'a> {
    pub grid: &'a SpatialGrid,
    pub vg: &'a VelocityGrid,
    pub eps: &'a [f64],
    pub params: EsbgkParams,
    pub scheme: TransportScheme,
}

impl ImexOperator for EsbgkSystem<'_> {
    type State = Vec<Vec<f64>>;

    fn explicit(&mut self, y: &Self::State, _: usize) -> Result<Self::State> {
        Ok(kinetic_transport_rhs(y, self.vg, self.grid, self.scheme))
    }

    fn implicit_solve(&mut self, rhs: &Self::State, a: f64, _: usize) -> Result<Self::State> {
        let (vg, params, grid) = (self.vg, self.params, self.grid);
        rhs.par_iter()
            .zip(self.eps.par_iter())
            .enumerate()
            .map(|(c, (f, &eps))| {
                let mut out = vec![0.0; vg.len()];
                stage_solve(f, vg, a, eps, &params, &mut out).map_err(|e| {
                    let (i, j) = grid.coords(c);
                    e.at_cell(i, j, 1, 0)
                })?;
                Ok(out)
            })
            .collect()
    }
}

/// One IMEX step of the ES-BGK model on an all-kinetic field.
pub fn esbgk_imex_step(
    field: &[Vec<f64>],
    grid: &SpatialGrid,
    vg: &VelocityGrid,
    dt: f64,
    eps: &[f64],
    params: EsbgkParams,
    scheme: TransportScheme,
    tab: &ImexTableau,
) -> Result<Vec<Vec<f64>>> {
    let mut sys = EsbgkSystem { grid, vg, eps, params, scheme };
    imex_step(&mut sys, tab, &field.to_vec(), dt)
}
