//! Axis-by-axis complex FFT over `n^d` cubes (`d` = 2 or 3), last axis contiguous.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct FftNd {
    pub n: usize,
    pub dims: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Per-worker scratch for [`FftNd`].
pub struct FftScratch {
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FftNd {
    pub fn new(n: usize, dims: usize) -> Self {
        assert!(dims == 2 || dims == 3, "only 2D and 3D transforms are supported");
        let mut planner = FftPlanner::new();
        FftNd { n, dims, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> FftScratch {
        let s = self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len());
        FftScratch { lines: vec![Complex64::default(); self.len()], scratch: vec![Complex64::default(); s] }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [Complex64], ws: &mut FftScratch) {
        self.run(&self.fwd, buf, ws);
    }

    /// Unnormalized inverse transform in place.
    pub fn inverse(&self, buf: &mut [Complex64], ws: &mut FftScratch) {
        self.run(&self.inv, buf, ws);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], ws: &mut FftScratch) {
        let n = self.n;
        let total = self.len();
        debug_assert_eq!(buf.len(), total);
        plan.process_with_scratch(buf, &mut ws.scratch);
        let mut stride = n;
        for _ in 1..self.dims {
            // lines along an axis with this stride; each block of n*stride holds `stride` interleaved lines
            let block = n * stride;
            for b in (0..total).step_by(block) {
                let src = &buf[b..b + block];
                let lines = &mut ws.lines[..block];
                for k in 0..n {
                    let row = &src[k * stride..(k + 1) * stride];
                    for (t, &x) in row.iter().enumerate() {
                        lines[t * n + k] = x;
                    }
                }
                plan.process_with_scratch(lines, &mut ws.scratch);
                let dst = &mut buf[b..b + block];
                for k in 0..n {
                    let row = &mut dst[k * stride..(k + 1) * stride];
                    for (t, x) in row.iter_mut().enumerate() {
                        *x = lines[t * n + k];
                    }
                }
            }
            stride *= n;
        }
    }
}

/// Signed integer frequency of FFT index `k`.
#[inline]
pub fn frequency(k: usize, n: usize) -> isize {
    if k < n.div_ceil(2) {
        k as isize
    } else {
        k as isize - n as isize
    }
}
