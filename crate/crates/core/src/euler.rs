//! Layer 0: 2D compressible Euler with CWENO reconstruction, local Lax-Friedrichs
//! fluxes and two-stage TVD Runge-Kutta.

use crate::cweno::reconstruct;
use crate::error::{Result, SolverError};
use crate::mesh::SpatialGrid;
use crate::moments::Moments;
use rayon::prelude::*;

pub const GAMMA: f64 = 5.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Axis {
    X,
    Y,
}

/// Conserved variables `(rho, rho u_x, rho u_y, E)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ConservedState(pub [f64; 4]);

impl ConservedState {
    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn from_primitive(rho: f64, ux: f64, uy: f64, p: f64, gamma: f64) -> Self {
        ConservedState([rho, rho * ux, rho * uy, p / (gamma - 1.0) + 0.5 * rho * (ux * ux + uy * uy)])
    }

    /// Uses the kinetic energy identity `E = rho |u|^2/2 + 3 rho T/2`.
    pub fn from_moments(m: &Moments) -> Self {
        ConservedState([m.rho, m.rho * m.u[0], m.rho * m.u[1], m.energy()])
    }

    /// Moments with `T = P / rho` and `u_z = 0`.
    pub fn to_moments(&self, gamma: f64) -> Result<Moments> {
        let p = pressure(self, gamma)?;
        let rho = self.0[0];
        Ok(Moments::new(rho, [self.0[1] / rho, self.0[2] / rho, 0.0], p / rho))
    }

    pub fn axpy(&mut self, a: f64, x: &[f64; 4]) {
        for k in 0..4 {
            self.0[k] += a * x[k];
        }
    }
}

pub fn pressure(u: &ConservedState, gamma: f64) -> Result<f64> {
    let [rho, mx, my, e] = u.0;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(SolverError::Positivity { quantity: "density", value: rho });
    }
    let p = (gamma - 1.0) * (e - 0.5 * (mx * mx + my * my) / rho);
    if !(p > 0.0) || !p.is_finite() {
        return Err(SolverError::Positivity { quantity: "pressure", value: p });
    }
    Ok(p)
}

/// Physical flux `h` (x) or `g` (y).
pub fn flux(u: &ConservedState, axis: Axis, gamma: f64) -> Result<[f64; 4]> {
    let p = pressure(u, gamma)?;
    let [rho, mx, my, e] = u.0;
    let (ux, uy) = (mx / rho, my / rho);
    Ok(match axis {
        Axis::X => [mx, mx * ux + p, mx * uy, ux * (e + p)],
        Axis::Y => [my, my * ux, my * uy + p, uy * (e + p)],
    })
}

/// `|u_n| + c` for the given axis.
pub fn wave_speed(u: &ConservedState, axis: Axis, gamma: f64) -> Result<f64> {
    let p = pressure(u, gamma)?;
    let un = match axis {
        Axis::X => u.0[1],
        Axis::Y => u.0[2],
    } / u.0[0];
    Ok(un.abs() + (gamma * p / u.0[0]).sqrt())
}

pub fn lax_friedrichs_flux(ul: &ConservedState, ur: &ConservedState, axis: Axis, alpha: f64, gamma: f64) -> Result<[f64; 4]> {
    let fl = flux(ul, axis, gamma)?;
    let fr = flux(ur, axis, gamma)?;
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * alpha * (ur.0[k] - ul.0[k]);
    }
    Ok(out)
}

fn valid(u: &ConservedState, gamma: f64) -> bool {
    pressure(u, gamma).is_ok()
}

/// Flux through the face between `s[1]` and `s[2]` of a four-cell stencil.
///
/// A reconstructed face state with non-positive density or pressure is replaced by the
/// adjacent cell average.
pub fn face_flux(s: [&ConservedState; 4], axis: Axis, gamma: f64) -> Result<[f64; 4]> {
    let mut ul = ConservedState::default();
    let mut ur = ConservedState::default();
    for k in 0..4 {
        ul.0[k] = reconstruct(s[0].0[k], s[1].0[k], s[2].0[k]).1;
        ur.0[k] = reconstruct(s[1].0[k], s[2].0[k], s[3].0[k]).0;
    }
    if !valid(&ul, gamma) {
        ul = *s[1];
    }
    if !valid(&ur, gamma) {
        ur = *s[2];
    }
    let alpha = wave_speed(&ul, axis, gamma)?.max(wave_speed(&ur, axis, gamma)?);
    lax_friedrichs_flux(&ul, &ur, axis, alpha, gamma)
}

/// `L(U) = -dh/dx - dg/dy` at one physical cell; ghost neighbors resolve through the grid.
pub fn euler_rhs_cell(grid: &SpatialGrid, states: &[ConservedState], i: usize, j: usize, gamma: f64) -> Result<[f64; 4]> {
    let at = |di: isize, dj: isize| &states[grid.neighbor(i, j, di, dj)];
    let xs = [at(-2, 0), at(-1, 0), at(0, 0), at(1, 0), at(2, 0)];
    let ys = [at(0, -2), at(0, -1), at(0, 0), at(0, 1), at(0, 2)];
    let fxm = face_flux([xs[0], xs[1], xs[2], xs[3]], Axis::X, gamma)?;
    let fxp = face_flux([xs[1], xs[2], xs[3], xs[4]], Axis::X, gamma)?;
    let fym = face_flux([ys[0], ys[1], ys[2], ys[3]], Axis::Y, gamma)?;
    let fyp = face_flux([ys[1], ys[2], ys[3], ys[4]], Axis::Y, gamma)?;
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = -(fxp[k] - fxm[k]) / grid.dx - (fyp[k] - fym[k]) / grid.dy;
    }
    Ok(out)
}

pub fn euler_rhs(grid: &SpatialGrid, states: &[ConservedState], gamma: f64) -> Result<Vec<[f64; 4]>> {
    (0..grid.cells())
        .into_par_iter()
        .map(|c| {
            let (i, j) = grid.coords(c);
            euler_rhs_cell(grid, states, i, j, gamma).map_err(|e| e.at_cell(i, j, 0, 0))
        })
        .collect()
}

/// Standalone Euler field on a grid.
#[derive(Clone, Debug)]
pub struct EulerField {
    pub grid: SpatialGrid,
    pub states: Vec<ConservedState>,
    pub gamma: f64,
}

impl EulerField {
    pub fn totals(&self) -> [f64; 4] {
        let mut t = [0.0; 4];
        for s in &self.states {
            for k in 0..4 {
                t[k] += s.0[k];
            }
        }
        t
    }
}

/// `U1 = U + dt L(U)`, `U^{n+1} = U/2 + U1/2 + dt L(U1)/2`.
pub fn tvd_rk2_step(field: &mut EulerField, dt: f64) -> Result<()> {
    let l0 = euler_rhs(&field.grid, &field.states, field.gamma)?;
    let mut u1 = field.states.clone();
    for (u, l) in u1.iter_mut().zip(&l0) {
        u.axpy(dt, l);
    }
    let l1 = euler_rhs(&field.grid, &u1, field.gamma)?;
    for ((u, a), l) in field.states.iter_mut().zip(&u1).zip(&l1) {
        for k in 0..4 {
            u.0[k] = 0.5 * u.0[k] + 0.5 * a.0[k] + 0.5 * dt * l[k];
        }
    }
    for (c, u) in field.states.iter().enumerate() {
        if let Err(e) = pressure(u, field.gamma) {
            let (i, j) = field.grid.coords(c);
            return Err(e.at_cell(i, j, 0, 0));
        }
    }
    Ok(())
}
