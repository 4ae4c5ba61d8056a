//! Exact solution of the 1D Riemann problem for an ideal gas.

#![allow(dead_code)]

#[derive(Clone, Copy, Debug)]
pub struct Prim {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

fn sound(s: Prim, g: f64) -> f64 {
    (g * s.p / s.rho).sqrt()
}

// Pressure function across one nonlinear wave and its derivative.
fn wave(p: f64, s: Prim, g: f64) -> (f64, f64) {
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let c = sound(s, g);
        let e = (g - 1.0) / (2.0 * g);
        let f = 2.0 * c / (g - 1.0) * ((p / s.p).powf(e) - 1.0);
        (f, (p / s.p).powf(-(g + 1.0) / (2.0 * g)) / (s.rho * c))
    }
}

/// Star-region pressure and velocity by Newton iteration.
pub fn star(l: Prim, r: Prim, g: f64) -> (f64, f64) {
    let mut p = 0.5 * (l.p + r.p);
    for _ in 0..100 {
        let (fl, dl) = wave(p, l, g);
        let (fr, dr) = wave(p, r, g);
        let next = (p - (fl + fr + r.u - l.u) / (dl + dr)).max(1e-12);
        let done = (next - p).abs() < 1e-14 * (next + p);
        p = next;
        if done {
            break;
        }
    }
    let (fl, _) = wave(p, l, g);
    let (fr, _) = wave(p, r, g);
    (p, 0.5 * (l.u + r.u) + 0.5 * (fr - fl))
}

/// Samples the self-similar solution at `xi = (x - x0) / t`.
pub fn sample(l: Prim, r: Prim, g: f64, xi: f64) -> Prim {
    let (ps, us) = star(l, r, g);
    let gm = (g - 1.0) / (g + 1.0);
    if xi <= us {
        let c = sound(l, g);
        if ps > l.p {
            let sl = l.u - c * ((g + 1.0) / (2.0 * g) * ps / l.p + (g - 1.0) / (2.0 * g)).sqrt();
            if xi <= sl {
                l
            } else {
                Prim { rho: l.rho * (ps / l.p + gm) / (gm * ps / l.p + 1.0), u: us, p: ps }
            }
        } else {
            let cs = c * (ps / l.p).powf((g - 1.0) / (2.0 * g));
            if xi <= l.u - c {
                l
            } else if xi >= us - cs {
                Prim { rho: l.rho * (ps / l.p).powf(1.0 / g), u: us, p: ps }
            } else {
                let k = 2.0 / (g + 1.0) + gm / c * (l.u - xi);
                Prim { rho: l.rho * k.powf(2.0 / (g - 1.0)), u: 2.0 / (g + 1.0) * (c + (g - 1.0) / 2.0 * l.u + xi), p: l.p * k.powf(2.0 * g / (g - 1.0)) }
            }
        }
    } else {
        let c = sound(r, g);
        if ps > r.p {
            let sr = r.u + c * ((g + 1.0) / (2.0 * g) * ps / r.p + (g - 1.0) / (2.0 * g)).sqrt();
            if xi >= sr {
                r
            } else {
                Prim { rho: r.rho * (ps / r.p + gm) / (gm * ps / r.p + 1.0), u: us, p: ps }
            }
        } else {
            let cs = c * (ps / r.p).powf((g - 1.0) / (2.0 * g));
            if xi >= r.u + c {
                r
            } else if xi <= us + cs {
                Prim { rho: r.rho * (ps / r.p).powf(1.0 / g), u: us, p: ps }
            } else {
                let k = 2.0 / (g + 1.0) - gm / c * (r.u - xi);
                Prim { rho: r.rho * k.powf(2.0 / (g - 1.0)), u: 2.0 / (g + 1.0) * (-c + (g - 1.0) / 2.0 * r.u + xi), p: r.p * k.powf(2.0 * g / (g - 1.0)) }
            }
        }
    }
}

/// Cell average over `[a, b]` by midpoint subsampling.
pub fn cell_average(l: Prim, r: Prim, g: f64, x0: f64, t: f64, a: f64, b: f64, n: usize) -> Prim {
    let mut acc = Prim { rho: 0.0, u: 0.0, p: 0.0 };
    for k in 0..n {
        let x = a + (k as f64 + 0.5) * (b - a) / n as f64;
        let s = sample(l, r, g, (x - x0) / t);
        acc.rho += s.rho;
        acc.u += s.u;
        acc.p += s.p;
    }
    let w = 1.0 / n as f64;
    Prim { rho: acc.rho * w, u: acc.u * w, p: acc.p * w }
}
