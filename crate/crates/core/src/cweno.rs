//! Third-order central WENO reconstruction from cell averages.

pub const EPS_WENO: f64 = 1e-6;
const C_SIDE: f64 = 0.25;
const C_CENTER: f64 = 0.5;

/// Values at the left and right faces of the middle cell of `(um, u0, up)`.
///
/// Written in increment form so constant data reproduces exactly.
#[inline]
pub fn reconstruct(um: f64, u0: f64, up: f64) -> (f64, f64) {
    let dm = u0 - um;
    let dp = up - u0;
    let is_l = dm * dm;
    let is_r = dp * dp;
    let d2 = dp - dm;
    let d1 = dp + dm;
    let is_c = 13.0 / 3.0 * d2 * d2 + 0.25 * d1 * d1;
    let al = C_SIDE / ((EPS_WENO + is_l) * (EPS_WENO + is_l));
    let ar = C_SIDE / ((EPS_WENO + is_r) * (EPS_WENO + is_r));
    let ac = C_CENTER / ((EPS_WENO + is_c) * (EPS_WENO + is_c));
    let s = al + ar + ac;
    let (wl, wr, wc) = (al / s, ar / s, ac / s);
    let mid = d2 / 6.0;
    let plus = u0 + 0.5 * (wl * dm + wr * dp) + wc * (0.25 * d1 + mid);
    let minus = u0 - 0.5 * (wl * dm + wr * dp) + wc * (-0.25 * d1 + mid);
    (minus, plus)
}

/// Interface values for every interior cell of a line padded with two values on each side.
/// Entry `k` holds the faces of cell `k + 2` of the input.
pub fn reconstruct_line(line: &[f64]) -> Vec<(f64, f64)> {
    line.windows(3).skip(1).take(line.len().saturating_sub(4)).map(|w| reconstruct(w[0], w[1], w[2])).collect()
}

/// Optimal-weight (linear) third-order face values, for reference.
pub fn reconstruct_linear(um: f64, u0: f64, up: f64) -> (f64, f64) {
    ((2.0 * um + 5.0 * u0 - up) / 6.0, (-um + 5.0 * u0 + 2.0 * up) / 6.0)
}
