//! Diagonally implicit IMEX Runge-Kutta stepping.
//!
//! The stiff part is never evaluated directly: each implicit stage is handed to the
//! operator as `Y = rhs + a g(Y)`, and `g(Y)` is recovered as `(Y - rhs) / a`.

use crate::error::{Result, SolverError};

#[derive(Clone, Debug, PartialEq)]
pub struct ImexTableau {
    pub explicit_a: Vec<Vec<f64>>,
    pub explicit_c: Vec<f64>,
    pub explicit_w: Vec<f64>,
    pub implicit_a: Vec<Vec<f64>>,
    pub implicit_c: Vec<f64>,
    pub implicit_w: Vec<f64>,
}

impl ImexTableau {
    /// PR(2,2,2) with `C = 1/sqrt(2)` and `delta = 1 - 1/(2C)`.
    pub fn pr222() -> Self {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let d = 1.0 - 1.0 / (2.0 * c);
        ImexTableau {
            explicit_a: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            explicit_c: vec![0.0, 1.0],
            explicit_w: vec![0.5, 0.5],
            implicit_a: vec![vec![1.0 - c, 0.0], vec![c - d, d]],
            implicit_c: vec![1.0 - c, c],
            implicit_w: vec![0.5, 0.5],
        }
    }

    pub fn stages(&self) -> usize {
        self.explicit_w.len()
    }

    fn validate(&self) -> Result<()> {
        let s = self.stages();
        for i in 0..s {
            if self.explicit_a[i][i..].iter().any(|&x| x != 0.0) {
                return Err(SolverError::Contract("explicit tableau must be strictly lower triangular".into()));
            }
            if self.implicit_a[i][i + 1..].iter().any(|&x| x != 0.0) || !(self.implicit_a[i][i] > 0.0) {
                return Err(SolverError::Contract("implicit tableau must be lower triangular with positive diagonal".into()));
            }
        }
        Ok(())
    }
}

/// State that supports the linear combinations of a Runge-Kutta step.
pub trait StageVector: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    /// `self *= a`
    fn scale(&mut self, a: f64);
}

impl StageVector for f64 {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn scale(&mut self, a: f64) {
        *self *= a;
    }
}

impl StageVector for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (p, q) in self.iter_mut().zip(x) {
            *p += a * q;
        }
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|p| *p *= a);
    }
}

impl StageVector for Vec<Vec<f64>> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (p, q) in self.iter_mut().zip(x) {
            p.axpy(a, q);
        }
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|p| p.scale(a));
    }
}

pub trait ImexOperator {
    type State: StageVector;
    /// Non-stiff right-hand side at a stage value.
    fn explicit(&mut self, y: &Self::State, stage: usize) -> Result<Self::State>;
    /// Solves `Y = rhs + a g(Y)` for the stiff part `g` (which includes the `1/eps` factor).
    fn implicit_solve(&mut self, rhs: &Self::State, a: f64, stage: usize) -> Result<Self::State>;
}

pub fn imex_step<O: ImexOperator>(op: &mut O, tab: &ImexTableau, y: &O::State, dt: f64) -> Result<O::State> {
    tab.validate()?;
    let s = tab.stages();
    let mut ks: Vec<O::State> = Vec::with_capacity(s);
    let mut gs: Vec<O::State> = Vec::with_capacity(s);
    for i in 0..s {
        let mut rhs = y.clone();
        for j in 0..i {
            if tab.explicit_a[i][j] != 0.0 {
                rhs.axpy(dt * tab.explicit_a[i][j], &ks[j]);
            }
            if tab.implicit_a[i][j] != 0.0 {
                rhs.axpy(dt * tab.implicit_a[i][j], &gs[j]);
            }
        }
        let a = dt * tab.implicit_a[i][i];
        let stage = op.implicit_solve(&rhs, a, i)?;
        let mut g = stage.clone();
        g.axpy(-1.0, &rhs);
        g.scale(1.0 / a);
        ks.push(op.explicit(&stage, i)?);
        gs.push(g);
    }
    let mut out = y.clone();
    for i in 0..s {
        out.axpy(dt * tab.explicit_w[i], &ks[i]);
        out.axpy(dt * tab.implicit_w[i], &gs[i]);
    }
    Ok(out)
}

/// `y' = q(y) - y / eps` with scalar `q`; used to check order and stiff stability.
pub struct ScalarRelaxation<F: FnMut(f64) -> f64> {
    pub eps: f64,
    pub q: F,
}

impl<F: FnMut(f64) -> f64> ImexOperator for ScalarRelaxation<F> {
    type State = f64;
    fn explicit(&mut self, y: &f64, _: usize) -> Result<f64> {
        Ok((self.q)(*y))
    }
    fn implicit_solve(&mut self, rhs: &f64, a: f64, _: usize) -> Result<f64> {
        Ok(rhs / (1.0 + a / self.eps))
    }
}
