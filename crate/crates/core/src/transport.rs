//! Free transport `-v . grad_x f` with per-node upwinded CWENO fluxes.

use crate::cweno::{reconstruct, reconstruct_linear};
use crate::mesh::{SpatialGrid, VelocityGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Face reconstruction used for the kinetic fluxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TransportScheme {
    /// Optimal CWENO weights held fixed, so the operator is linear in `f`.
    #[default]
    Linear,
    /// Nonlinear CWENO weights, as in the fluid solver.
    Weno,
}

/// Five distributions along one axis, centered on the target cell.
pub type Stencil<'a> = [&'a [f64]; 5];

/// Upwind face value at the face between `s[1]` and `s[2]` for node `k` moving with sign of `v`.
#[inline]
fn face(s0: f64, s1: f64, s2: f64, s3: f64, v: f64, scheme: TransportScheme) -> f64 {
    let rec = match scheme {
        TransportScheme::Linear => reconstruct_linear,
        TransportScheme::Weno => reconstruct,
    };
    if v > 0.0 {
        v * rec(s0, s1, s2).1
    } else {
        v * rec(s1, s2, s3).0
    }
}

/// Adds `-(v_axis / h) (F_{+1/2} - F_{-1/2})` to `out` for every velocity node.
/// `axis` is 0 for x and 1 for y.
pub fn accumulate_axis(s: &Stencil, vg: &VelocityGrid, axis: usize, h: f64, scheme: TransportScheme, out: &mut [f64]) {
    let n = vg.n;
    let inv = 1.0 / h;
    for k in 0..vg.len() {
        let v = if axis == 0 { vg.nodes[k / (n * n)] } else { vg.nodes[(k / n) % n] };
        let (a, b, c, d, e) = (s[0][k], s[1][k], s[2][k], s[3][k], s[4][k]);
        if a == b && b == c && c == d && d == e {
            continue;
        }
        let fm = face(a, b, c, d, v, scheme);
        let fp = face(b, c, d, e, v, scheme);
        out[k] -= (fp - fm) * inv;
    }
}

/// Transport rhs at one cell from its x and y stencils.
pub fn transport_cell_rhs(
    xs: &Stencil,
    ys: &Stencil,
    vg: &VelocityGrid,
    grid: &SpatialGrid,
    scheme: TransportScheme,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|x| *x = 0.0);
    accumulate_axis(xs, vg, 0, grid.dx, scheme, out);
    accumulate_axis(ys, vg, 1, grid.dy, scheme, out);
}

/// Transport rhs for a field holding one distribution per physical cell.
pub fn kinetic_transport_rhs(field: &[Vec<f64>], vg: &VelocityGrid, grid: &SpatialGrid, scheme: TransportScheme) -> Vec<Vec<f64>> {
    (0..grid.cells())
        .into_par_iter()
        .map(|c| {
            let (i, j) = grid.coords(c);
            let at = |di: isize, dj: isize| field[grid.neighbor(i, j, di, dj)].as_slice();
            let xs = [at(-2, 0), at(-1, 0), at(0, 0), at(1, 0), at(2, 0)];
            let ys = [at(0, -2), at(0, -1), at(0, 0), at(0, 1), at(0, 2)];
            let mut out = vec![0.0; vg.len()];
            transport_cell_rhs(&xs, &ys, vg, grid, scheme, &mut out);
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Boundary;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn setup(nx: usize, ny: usize) -> (SpatialGrid, VelocityGrid) {
        (
            SpatialGrid::new(nx, ny, 1.0, ny as f64 / nx as f64, (0.0, 0.0), Boundary::Periodic).unwrap(),
            VelocityGrid::new(4, 2.0).unwrap(),
        )
    }

    fn random_field(grid: &SpatialGrid, vg: &VelocityGrid, seed: u64) -> Vec<Vec<f64>> {
        let mut s = seed | 1;
        (0..grid.cells())
            .map(|_| {
                (0..vg.len())
                    .map(|_| {
                        s ^= s << 13;
                        s ^= s >> 7;
                        s ^= s << 17;
                        (s >> 11) as f64 / (1u64 << 53) as f64
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn uniform_field_has_zero_rhs() {
        let (g, vg) = setup(6, 6);
        let f = vec![vec![0.3; vg.len()]; g.cells()];
        for r in kinetic_transport_rhs(&f, &vg, &g, TransportScheme::Weno) {
            assert!(r.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn single_node_derivative_converges() {
        // f = sin(2 pi x) placed on nodes with v_x = 1 (dv = 1 grid has nodes +-0.5, +-1.5)
        let vg = VelocityGrid::new(4, 2.0).unwrap();
        for scheme in [TransportScheme::Linear, TransportScheme::Weno] {
        let mut errs = vec![];
        for &n in &[32usize, 64, 128] {
            let g = SpatialGrid::new(n, 1, 1.0, 1.0 / n as f64, (0.0, 0.0), Boundary::Periodic).unwrap();
            let h = g.dx;
            let f: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let x = g.center(i, 0).0;
                    let avg = -((2.0 * PI * (x + h / 2.0)).cos() - (2.0 * PI * (x - h / 2.0)).cos()) / (2.0 * PI * h);
                    vec![avg; vg.len()]
                })
                .collect();
            let r = kinetic_transport_rhs(&f, &vg, &g, scheme);
            let k = vg.index(3, 0, 0);
            let v = vg.nodes[3];
            let mut err: f64 = 0.0;
            for i in 0..n {
                let x = g.center(i, 0).0;
                // exact cell average of -v d/dx sin(2 pi x)
                let exact = -v * ((2.0 * PI * (x + h / 2.0)).sin() - (2.0 * PI * (x - h / 2.0)).sin()) / h;
                err += (r[i][k] - exact).abs() * h;
            }
            errs.push(err);
        }
        let order = (errs[1] / errs[2]).log2();
        // nonlinear weights lose an order at the extrema of the sine
        let expected = if scheme == TransportScheme::Linear { 2.5 } else { 1.9 };
        assert!(order >= expected, "{scheme:?} order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn mirror_symmetry_negates_x_term() {
        let (g, vg) = setup(10, 1);
        let f = random_field(&g, &vg, 7);
        let n = vg.n;
        let mirror: Vec<Vec<f64>> = (0..g.cells())
            .map(|c| {
                let src = &f[g.cells() - 1 - c];
                (0..vg.len())
                    .map(|k| {
                        let (k1, rest) = (k / (n * n), k % (n * n));
                        src[(n - 1 - k1) * n * n + rest]
                    })
                    .collect()
            })
            .collect();
        let a = kinetic_transport_rhs(&f, &vg, &g, TransportScheme::Weno);
        let b = kinetic_transport_rhs(&mirror, &vg, &g, TransportScheme::Weno);
        for c in 0..g.cells() {
            for k in 0..vg.len() {
                let (k1, rest) = (k / (n * n), k % (n * n));
                let km = (n - 1 - k1) * n * n + rest;
                assert!((a[c][k] - b[g.cells() - 1 - c][km]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_scheme_is_linear() {
        let (g, vg) = setup(9, 6);
        let f = random_field(&g, &vg, 3);
        let h = random_field(&g, &vg, 11);
        let (a, b) = (0.7, -1.3);
        let mix: Vec<Vec<f64>> = f.iter().zip(&h).map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()).collect();
        let rf = kinetic_transport_rhs(&f, &vg, &g, TransportScheme::Linear);
        let rh = kinetic_transport_rhs(&h, &vg, &g, TransportScheme::Linear);
        let rm = kinetic_transport_rhs(&mix, &vg, &g, TransportScheme::Linear);
        for c in 0..g.cells() {
            for k in 0..vg.len() {
                assert!((rm[c][k] - a * rf[c][k] - b * rh[c][k]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn periodic_sum_vanishes(seed in any::<u64>()) {
            let (g, vg) = setup(7, 5);
            let f = random_field(&g, &vg, seed);
            for scheme in [TransportScheme::Linear, TransportScheme::Weno] {
                let r = kinetic_transport_rhs(&f, &vg, &g, scheme);
                for k in 0..vg.len() {
                    let s: f64 = r.iter().map(|x| x[k]).sum();
                    prop_assert!(s.abs() < 1e-12, "node {} sum {}", k, s);
                }
            }
        }
    }
}
