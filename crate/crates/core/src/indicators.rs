//! Regime-switching indicators: eigenvalues of the first-order moment realizability
//! matrix, the Burnett-difference scalar and the L1 distance to equilibrium.

use crate::error::{Result, SolverError};
use crate::mesh::VelocityGrid;
use crate::moments::{enforce_moments, maxwellian_into, moments_of, Moments};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

/// Centered first derivatives `[d/dx, d/dy]` and five-point Laplacians.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivativeBundle {
    pub rho: [f64; 2],
    pub ux: [f64; 2],
    pub uy: [f64; 2],
    pub temp: [f64; 2],
    pub lap_rho: f64,
    pub lap_ux: f64,
    pub lap_uy: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IndicatorSet {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_c: f64,
    pub lambda_burnett: f64,
    /// Only evaluated for kinetic cells.
    pub xi_l1: Option<f64>,
}

impl IndicatorSet {
    pub fn eigenvalues(&self) -> [f64; 3] {
        [self.lambda_a, self.lambda_b, self.lambda_c]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eta0: f64,
    pub eta1: f64,
    pub delta0: f64,
}

impl Thresholds {
    pub fn new(eta0: f64, eta1: f64, delta0: f64) -> Result<Self> {
        let t = Thresholds { eta0, eta1, delta0 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.eta0, self.eta1, self.delta0].iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(SolverError::Config(format!("thresholds must be positive: {self:?}")))
        }
    }
}

/// `mu = mu0 sqrt(T)`, `kappa = kappa0 sqrt(T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportCoefficients {
    pub mu0: f64,
    pub kappa0: f64,
}

impl Default for TransportCoefficients {
    fn default() -> Self {
        TransportCoefficients { mu0: 1.0, kappa0: 1.0 }
    }
}

/// How `|Delta u|^2` enters the Burnett indicator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianNorm {
    /// `(Delta u_x)^2 + (Delta u_y)^2`
    #[default]
    SquaredSum,
    /// `(Delta u_x + Delta u_y)^2`
    SignedSum,
}

/// Primitive fields used by the stencils.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub temp: f64,
}

impl From<&Moments> for Primitive {
    fn from(m: &Moments) -> Self {
        Primitive { rho: m.rho, ux: m.u[0], uy: m.u[1], temp: m.temp }
    }
}

/// Stencil `[center, x-, x+, y-, y+]`.
pub fn spatial_derivatives(s: &[Primitive; 5], dx: f64, dy: f64) -> DerivativeBundle {
    let [c, xm, xp, ym, yp] = s;
    let d = |g: fn(&Primitive) -> f64| [(g(xp) - g(xm)) / (2.0 * dx), (g(yp) - g(ym)) / (2.0 * dy)];
    let lap = |g: fn(&Primitive) -> f64| (g(xm) + g(xp) + g(ym) + g(yp) - 4.0 * g(c)) / (dx * dy);
    DerivativeBundle {
        rho: d(|p| p.rho),
        ux: d(|p| p.ux),
        uy: d(|p| p.uy),
        temp: d(|p| p.temp),
        lap_rho: lap(|p| p.rho),
        lap_ux: lap(|p| p.ux),
        lap_uy: lap(|p| p.uy),
    }
}

struct VEntries {
    p: f64,
    q: f64,
    d: f64,
    lc: f64,
}

fn v_entries(d: &DerivativeBundle, m: &Primitive, eps: f64, tc: &TransportCoefficients) -> VEntries {
    let st = m.temp.sqrt();
    let (mu, kappa) = (tc.mu0 * st, tc.kappa0 * st);
    let xi1 = eps * mu / (m.rho * m.temp);
    let xi2 = eps * eps * 2.0 * kappa * kappa / (3.0 * m.rho * m.rho * m.temp.powi(3));
    let a1 = 4.0 / 3.0 * d.ux[0] - 2.0 / 3.0 * d.uy[1];
    let a2 = d.temp[0] * d.temp[0];
    let b1 = d.ux[1] + d.uy[0];
    let b2 = d.temp[0] * d.temp[1];
    let c1 = 4.0 / 3.0 * d.uy[1] - 2.0 / 3.0 * d.ux[0];
    let c2 = d.temp[1] * d.temp[1];
    let h1 = -2.0 / 3.0 * (d.ux[0] + d.uy[1]);
    VEntries { p: xi1 * a1 + xi2 * a2, q: xi1 * c1 + xi2 * c2, d: xi1 * b1 + xi2 * b2, lc: 1.0 - xi1 * h1 }
}

/// The assembled first-order realizability matrix.
pub fn v_eps1_matrix(d: &DerivativeBundle, m: &Primitive, eps: f64, tc: &TransportCoefficients) -> Matrix3<f64> {
    let e = v_entries(d, m, eps, tc);
    Matrix3::new(1.0 - e.p, -e.d, 0.0, -e.d, 1.0 - e.q, 0.0, 0.0, 0.0, e.lc)
}

/// Closed-form eigenvalues `(lambda_a >= lambda_b, lambda_c)`.
pub fn v_eps1_eigenvalues(d: &DerivativeBundle, m: &Primitive, eps: f64, tc: &TransportCoefficients) -> (f64, f64, f64) {
    let e = v_entries(d, m, eps, tc);
    let root = ((e.p - e.q).powi(2) + 4.0 * e.d * e.d).sqrt();
    let mid = 2.0 - e.p - e.q;
    (0.5 * (mid + root), 0.5 * (mid - root), e.lc)
}

/// `eps^2 (|grad T|^2 / T + |grad u|^2 + sqrt((|Lap u|^2 + |Lap rho / rho|^2)(1 + T^2)))`.
pub fn lambda_burnett(d: &DerivativeBundle, m: &Primitive, eps: f64, norm: LaplacianNorm) -> f64 {
    let grad_t = d.temp[0] * d.temp[0] + d.temp[1] * d.temp[1];
    let grad_u = d.ux.iter().chain(&d.uy).map(|x| x * x).sum::<f64>();
    let lap_u = match norm {
        LaplacianNorm::SquaredSum => d.lap_ux * d.lap_ux + d.lap_uy * d.lap_uy,
        LaplacianNorm::SignedSum => (d.lap_ux + d.lap_uy).powi(2),
    };
    let lr = d.lap_rho / m.rho;
    eps * eps * (grad_t / m.temp + grad_u + ((lap_u + lr * lr) * (1.0 + m.temp * m.temp)).sqrt())
}

/// `sum_k |f_k - M_k| dv^3` with `M` the moment-matched discrete Maxwellian of `f`.
pub fn l1_distance_to_maxwellian(f: &[f64], vg: &VelocityGrid, scratch: &mut [f64]) -> Result<f64> {
    let m = moments_of(f, vg)?;
    maxwellian_into(&m, vg, scratch)?;
    enforce_moments(scratch, &m, vg)?;
    Ok(f.iter().zip(scratch.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() * vg.weight())
}
