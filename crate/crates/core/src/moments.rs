//! Macroscopic moments, equilibria and the realizability matrix.

use crate::error::{Result, SolverError};
use crate::mesh::VelocityGrid;
use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};
use std::f64::consts::PI;

/// Undershoot below `-NEG_TOL * max(f)` is reported by [`undershoot`].
pub const NEG_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub rho: f64,
    pub u: [f64; 3],
    pub temp: f64,
}

impl Moments {
    pub fn new(rho: f64, u: [f64; 3], temp: f64) -> Self {
        Self { rho, u, temp }
    }

    /// Total energy per volume, `rho |u|^2 / 2 + 3 rho T / 2`.
    pub fn energy(&self) -> f64 {
        let u2 = self.u.iter().map(|x| x * x).sum::<f64>();
        0.5 * self.rho * u2 + 1.5 * self.rho * self.temp
    }

    fn check(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(SolverError::Domain(format!("density must be positive, got {}", self.rho)));
        }
        if !(self.temp > 0.0) || !self.temp.is_finite() {
            return Err(SolverError::Domain(format!("temperature must be positive, got {}", self.temp)));
        }
        Ok(())
    }
}

/// Symmetric second central moment per unit density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressTensor(pub Matrix3<f64>);

impl StressTensor {
    pub fn isotropic(t: f64) -> Self {
        StressTensor(Matrix3::identity() * t)
    }

    pub fn temperature(&self) -> f64 {
        self.0.trace() / 3.0
    }
}

pub fn moments_of(f: &[f64], vg: &VelocityGrid) -> Result<Moments> {
    let n = vg.n;
    let w = vg.weight();
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for k1 in 0..n {
        let v1 = vg.nodes[k1];
        for k2 in 0..n {
            let v2 = vg.nodes[k2];
            let row = &f[(k1 * n + k2) * n..(k1 * n + k2 + 1) * n];
            let mut r0 = 0.0;
            let mut r3 = 0.0;
            for (k3, &x) in row.iter().enumerate() {
                r0 += x;
                r3 += vg.nodes[k3] * x;
            }
            s0 += r0;
            s1 += v1 * r0;
            s2 += v2 * r0;
            s3 += r3;
        }
    }
    let rho = s0 * w;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(SolverError::Degenerate(format!("non-positive density {rho:e}")));
    }
    let u = [s1 * w / rho, s2 * w / rho, s3 * w / rho];
    let mut e = 0.0;
    for k1 in 0..n {
        let a = vg.nodes[k1] - u[0];
        for k2 in 0..n {
            let b = vg.nodes[k2] - u[1];
            let ab = a * a + b * b;
            let row = &f[(k1 * n + k2) * n..(k1 * n + k2 + 1) * n];
            for (k3, &x) in row.iter().enumerate() {
                let c = vg.nodes[k3] - u[2];
                e += (ab + c * c) * x;
            }
        }
    }
    let temp = e * w / (3.0 * rho);
    if !(temp > 0.0) || !temp.is_finite() {
        return Err(SolverError::Degenerate(format!("non-positive temperature {temp:e}")));
    }
    Ok(Moments { rho, u, temp })
}

pub fn stress_tensor(f: &[f64], vg: &VelocityGrid, m: &Moments) -> StressTensor {
    let n = vg.n;
    let mut s = [0.0; 6];
    for k1 in 0..n {
        let a = vg.nodes[k1] - m.u[0];
        for k2 in 0..n {
            let b = vg.nodes[k2] - m.u[1];
            let row = &f[(k1 * n + k2) * n..(k1 * n + k2 + 1) * n];
            let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
            for (k3, &x) in row.iter().enumerate() {
                let c = vg.nodes[k3] - m.u[2];
                r0 += x;
                r1 += c * x;
                r2 += c * c * x;
            }
            s[0] += a * a * r0;
            s[1] += a * b * r0;
            s[2] += a * r1;
            s[3] += b * b * r0;
            s[4] += b * r1;
            s[5] += r2;
        }
    }
    let k = vg.weight() / m.rho;
    StressTensor(Matrix3::new(
        s[0] * k, s[1] * k, s[2] * k,
        s[1] * k, s[3] * k, s[4] * k,
        s[2] * k, s[4] * k, s[5] * k,
    ))
}

/// Writes `norm * exp(-(v-u)^T A (v-u) / 2)` on the grid.
///
/// The exponent splits into tables over node pairs, so only O(n^2) exponentials are
/// taken unless the cross tables would overflow.
fn gaussian_into(norm: f64, u: &[f64; 3], a: &Matrix3<f64>, vg: &VelocityGrid, out: &mut [f64]) {
    let n = vg.n;
    let d: Vec<[f64; 3]> = vg.nodes.iter().map(|&v| [v - u[0], v - u[1], v - u[2]]).collect();
    let exy = |k1: usize, k2: usize| {
        let (x, y) = (d[k1][0], d[k2][1]);
        -0.5 * (a[(0, 0)] * x * x + a[(1, 1)] * y * y) - a[(0, 1)] * x * y
    };
    let exz = |k1: usize, k3: usize| {
        let (x, z) = (d[k1][0], d[k3][2]);
        -0.5 * a[(2, 2)] * z * z - a[(0, 2)] * x * z
    };
    let eyz = |k2: usize, k3: usize| -a[(1, 2)] * d[k2][1] * d[k3][2];
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            worst = worst.max(exy(p, q)).max(exz(p, q)).max(eyz(p, q));
        }
    }
    if worst < 300.0 {
        let mut txy = vec![0.0; n * n];
        let mut txz = vec![0.0; n * n];
        let mut tyz = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                txy[p * n + q] = norm * exy(p, q).exp();
                txz[p * n + q] = exz(p, q).exp();
                tyz[p * n + q] = eyz(p, q).exp();
            }
        }
        for k1 in 0..n {
            let rz = &txz[k1 * n..(k1 + 1) * n];
            for k2 in 0..n {
                let c = txy[k1 * n + k2];
                let ry = &tyz[k2 * n..(k2 + 1) * n];
                let o = &mut out[(k1 * n + k2) * n..(k1 * n + k2 + 1) * n];
                for k3 in 0..n {
                    o[k3] = c * rz[k3] * ry[k3];
                }
            }
        }
    } else {
        for k1 in 0..n {
            for k2 in 0..n {
                for k3 in 0..n {
                    out[(k1 * n + k2) * n + k3] = norm * (exy(k1, k2) + exz(k1, k3) + eyz(k2, k3)).exp();
                }
            }
        }
    }
}

/// Pointwise Maxwellian `rho / (2 pi T)^{3/2} exp(-|v-u|^2 / 2T)`.
pub fn maxwellian(m: &Moments, vg: &VelocityGrid) -> Result<Vec<f64>> {
    let mut out = vec![0.0; vg.len()];
    maxwellian_into(m, vg, &mut out)?;
    Ok(out)
}

pub fn maxwellian_into(m: &Moments, vg: &VelocityGrid, out: &mut [f64]) -> Result<()> {
    m.check()?;
    let norm = m.rho / (2.0 * PI * m.temp).powf(1.5);
    gaussian_into(norm, &m.u, &(Matrix3::identity() / m.temp), vg, out);
    Ok(())
}

/// Maxwellian corrected so its discrete density, momentum and energy equal `m` exactly.
pub fn conservative_maxwellian(m: &Moments, vg: &VelocityGrid) -> Result<Vec<f64>> {
    let mut out = maxwellian(m, vg)?;
    enforce_moments(&mut out, m, vg)?;
    Ok(out)
}

/// Multiplies `g` by a quadratic polynomial in `v` so that its discrete
/// `(rho, rho u, E)` equal those of `target` to rounding.
pub fn enforce_moments(g: &mut [f64], target: &Moments, vg: &VelocityGrid) -> Result<()> {
    let n = vg.n;
    let st = target.temp.sqrt();
    let basis = |k1: usize, k2: usize, k3: usize| {
        let v = [
            (vg.nodes[k1] - target.u[0]) / st,
            (vg.nodes[k2] - target.u[1]) / st,
            (vg.nodes[k3] - target.u[2]) / st,
        ];
        Vector5::new(1.0, v[0], v[1], v[2], 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
    };
    let mut s = Matrix5::zeros();
    for k1 in 0..n {
        for k2 in 0..n {
            for k3 in 0..n {
                let gv = g[(k1 * n + k2) * n + k3];
                if gv == 0.0 {
                    continue;
                }
                let p = basis(k1, k2, k3);
                s += p * p.transpose() * gv;
            }
        }
    }
    s *= vg.weight();
    let rhs = Vector5::new(target.rho, 0.0, 0.0, 0.0, 1.5 * target.rho);
    let c = s
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SolverError::Degenerate("moment correction system is singular".into()))?;
    for k1 in 0..n {
        for k2 in 0..n {
            for k3 in 0..n {
                let idx = (k1 * n + k2) * n + k3;
                g[idx] *= basis(k1, k2, k3).dot(&c);
            }
        }
    }
    Ok(())
}

/// Removes from `q` the component `w (c . phi)` with `phi = (1, V, |V|^2/2)` so that
/// the discrete density, momentum and energy of `q` vanish. `w` must be positive.
pub fn project_conservative(q: &mut [f64], w: &[f64], center: &Moments, vg: &VelocityGrid) -> Result<()> {
    let n = vg.n;
    let st = center.temp.sqrt();
    let basis = |idx: usize| {
        let (k1, k2, k3) = (idx / (n * n), (idx / n) % n, idx % n);
        let v = [
            (vg.nodes[k1] - center.u[0]) / st,
            (vg.nodes[k2] - center.u[1]) / st,
            (vg.nodes[k3] - center.u[2]) / st,
        ];
        Vector5::new(1.0, v[0], v[1], v[2], 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
    };
    let mut s = Matrix5::zeros();
    let mut rhs = Vector5::zeros();
    for idx in 0..q.len() {
        let p = basis(idx);
        s += p * p.transpose() * w[idx];
        rhs += p * q[idx];
    }
    let c = s
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SolverError::Degenerate("conservative projection system is singular".into()))?;
    for idx in 0..q.len() {
        q[idx] -= w[idx] * basis(idx).dot(&c);
    }
    Ok(())
}

/// Corrected tensor `(1 - beta) T I + beta Theta`.
pub fn corrected_tensor(m: &Moments, theta: &StressTensor, beta: f64) -> Matrix3<f64> {
    Matrix3::identity() * ((1.0 - beta) * m.temp) + theta.0 * beta
}

/// ES-BGK Gaussian. Returns the distribution and whether the isotropic fallback was taken.
pub fn anisotropic_gaussian(m: &Moments, theta: &StressTensor, beta: f64, vg: &VelocityGrid) -> Result<(Vec<f64>, bool)> {
    let mut out = vec![0.0; vg.len()];
    let fallback = anisotropic_gaussian_into(m, theta, beta, vg, &mut out)?;
    Ok((out, fallback))
}

pub fn anisotropic_gaussian_into(
    m: &Moments,
    theta: &StressTensor,
    beta: f64,
    vg: &VelocityGrid,
    out: &mut [f64],
) -> Result<bool> {
    m.check()?;
    let t = corrected_tensor(m, theta, beta);
    let sym = (t + t.transpose()) * 0.5;
    match sym.cholesky() {
        Some(ch) if sym.determinant() > 0.0 => {
            let det = sym.determinant();
            let inv = ch.inverse();
            let norm = m.rho / ((2.0 * PI).powi(3) * det).sqrt();
            gaussian_into(norm, &m.u, &inv, vg, out);
            Ok(false)
        }
        _ => {
            maxwellian_into(m, vg, out)?;
            Ok(true)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizabilityMatrix {
    pub m: Matrix5<f64>,
    pub a_bar: Matrix3<f64>,
    pub b_bar: Vector3<f64>,
    pub c_bar: f64,
}

impl RealizabilityMatrix {
    /// `I + A - (2/3) B B^T`, the reduced block at `C = 1`.
    pub fn v_eps(&self) -> Matrix3<f64> {
        Matrix3::identity() + self.a_bar - self.b_bar * self.b_bar.transpose() * (2.0 / 3.0)
    }
}

pub fn realizability_matrix(f: &[f64], vg: &VelocityGrid, m: &Moments) -> RealizabilityMatrix {
    let n = vg.n;
    let st = m.temp.sqrt();
    let mut vv = Matrix3::zeros();
    let mut b = Vector3::zeros();
    let mut c = 0.0;
    for k1 in 0..n {
        for k2 in 0..n {
            for k3 in 0..n {
                let x = f[(k1 * n + k2) * n + k3];
                let v = Vector3::new(
                    (vg.nodes[k1] - m.u[0]) / st,
                    (vg.nodes[k2] - m.u[1]) / st,
                    (vg.nodes[k3] - m.u[2]) / st,
                );
                let v2 = v.norm_squared();
                vv += v * v.transpose() * x;
                b += v * (0.5 * (v2 - 5.0) * x);
                let h = 0.5 * v2 - 2.5;
                c += h * h * x;
            }
        }
    }
    let k = vg.weight() / m.rho;
    vv *= k;
    b *= k;
    let c_bar = 0.4 * c * k;
    let a_bar = vv - Matrix3::identity() * (vv.trace() / 3.0);
    let s = (0.4f64).sqrt();
    let inner = Matrix3::identity() + a_bar;
    let mut mm = Matrix5::zeros();
    mm[(0, 0)] = 1.0;
    mm[(0, 4)] = -s;
    mm[(4, 0)] = -s;
    for p in 0..3 {
        for q in 0..3 {
            mm[(1 + p, 1 + q)] = inner[(p, q)];
        }
        mm[(1 + p, 4)] = s * b[p];
        mm[(4, 1 + p)] = s * b[p];
    }
    mm[(4, 4)] = c_bar;
    RealizabilityMatrix { m: mm, a_bar, b_bar: b, c_bar }
}

/// `min(f) / max(f)` when negative beyond tolerance, else `None`.
pub fn undershoot(f: &[f64]) -> Option<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in f {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo < -NEG_TOL * hi).then(|| lo / hi)
}

/// L1 norm `sum |f| dv^3`.
pub fn l1_norm(f: &[f64], vg: &VelocityGrid) -> f64 {
    f.iter().map(|x| x.abs()).sum::<f64>() * vg.weight()
}
