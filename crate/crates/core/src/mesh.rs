//! Spatial and velocity grids, cell kinds and layer tags.

use crate::error::{Result, SolverError};
use serde::{Deserialize, Serialize};

/// Depth of the ghost frame on every edge.
pub const GHOST: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Ghost cells copy the closest physical cell.
    #[default]
    Copy,
    Periodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dx: f64,
    pub dy: f64,
    pub origin: (f64, f64),
    pub boundary: Boundary,
}

impl SpatialGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, origin: (f64, f64), boundary: Boundary) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(SolverError::Config(format!("cell counts must be positive, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(SolverError::Config(format!("extents must be positive, got {lx}x{ly}")));
        }
        Ok(Self { nx, ny, lx, ly, dx: lx / nx as f64, dy: ly / ny as f64, origin, boundary })
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, c: usize) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.dx,
            self.origin.1 + (j as f64 + 0.5) * self.dy,
        )
    }

    /// Maps a possibly out-of-range (ghost) index to the physical cell it copies.
    #[inline]
    pub fn resolve(&self, i: isize, j: isize) -> (usize, usize) {
        match self.boundary {
            Boundary::Copy => (
                i.clamp(0, self.nx as isize - 1) as usize,
                j.clamp(0, self.ny as isize - 1) as usize,
            ),
            Boundary::Periodic => (
                i.rem_euclid(self.nx as isize) as usize,
                j.rem_euclid(self.ny as isize) as usize,
            ),
        }
    }

    #[inline]
    pub fn neighbor(&self, i: usize, j: usize, di: isize, dj: isize) -> usize {
        let (a, b) = self.resolve(i as isize + di, j as isize + dj);
        self.index(a, b)
    }

    /// The single global time step, `cfl * dx`.
    pub fn time_step(&self, cfl: f64) -> f64 {
        cfl * self.dx.min(self.dy)
    }
}

/// Tensor-product velocity grid on `[-L, L]^3` with cell-centered nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid {
    pub n: usize,
    pub l: f64,
    pub dv: f64,
    pub nodes: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 2 {
            return Err(SolverError::Config(format!("velocity grid needs at least 2 points per axis, got {n}")));
        }
        if !(l > 0.0) {
            return Err(SolverError::Config(format!("velocity cutoff must be positive, got {l}")));
        }
        let dv = 2.0 * l / n as f64;
        let nodes = (0..n).map(|k| -l + (k as f64 + 0.5) * dv).collect();
        Ok(Self { n, l, dv, nodes })
    }

    /// Number of nodes in the full 3D grid.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one node.
    #[inline]
    pub fn weight(&self) -> f64 {
        self.dv * self.dv * self.dv
    }

    /// Flat index, last axis fastest.
    #[inline]
    pub fn index(&self, k1: usize, k2: usize, k3: usize) -> usize {
        (k1 * self.n + k2) * self.n + k3
    }

    #[inline]
    pub fn velocity(&self, k: usize) -> [f64; 3] {
        let n = self.n;
        [self.nodes[k / (n * n)], self.nodes[(k / n) % n], self.nodes[k % n]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Interior,
    Obstacle,
    Ring,
    Ghost,
}

/// Evolution layer of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    Euler = 0,
    Esbgk = 1,
    Boltzmann = 2,
}

impl Layer {
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(r: u8) -> Result<Self> {
        match r {
            0 => Ok(Layer::Euler),
            1 => Ok(Layer::Esbgk),
            2 => Ok(Layer::Boltzmann),
            _ => Err(SolverError::Contract(format!("layer tag {r} outside {{0,1,2}}"))),
        }
    }

    pub fn is_kinetic(self) -> bool {
        self != Layer::Euler
    }
}

/// Obstacle footprint in cell-index units of the physical grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Footprint {
    /// Cells whose centers satisfy `(i+1/2-cx)^2 + (j+1/2-cy)^2 <= r^2`.
    Disk { cx: f64, cy: f64, r: f64 },
    /// Cells with `i0 <= i < i1` and `j0 <= j < j1`.
    Rect { i0: isize, i1: isize, j0: isize, j1: isize },
}

impl Footprint {
    pub fn contains(&self, i: isize, j: isize) -> bool {
        match *self {
            Footprint::Disk { cx, cy, r } => {
                let x = i as f64 + 0.5 - cx;
                let y = j as f64 + 0.5 - cy;
                x * x + y * y <= r * r
            }
            Footprint::Rect { i0, i1, j0, j1 } => i >= i0 && i < i1 && j >= j0 && j < j1,
        }
    }

    /// Shifted copy.
    pub fn translated(&self, di: isize, dj: isize) -> Self {
        match *self {
            Footprint::Disk { cx, cy, r } => Footprint::Disk { cx: cx + di as f64, cy: cy + dj as f64, r },
            Footprint::Rect { i0, i1, j0, j1 } => Footprint::Rect { i0: i0 + di, i1: i1 + di, j0: j0 + dj, j1: j1 + dj },
        }
    }
}

/// Width of the forced-kinetic band around an obstacle.
pub const RING_WIDTH: isize = 2;

/// Cell kinds over the padded grid, `(nx + 2G) x (ny + 2G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KindMap {
    pub nx: usize,
    pub ny: usize,
    kinds: Vec<CellKind>,
}

impl KindMap {
    fn padded_width(&self) -> usize {
        self.nx + 2 * GHOST
    }

    /// Kind at a physical index; negative or overflowing indices land in the ghost frame.
    pub fn get(&self, i: isize, j: isize) -> CellKind {
        let w = self.padded_width() as isize;
        let pi = i + GHOST as isize;
        let pj = j + GHOST as isize;
        if pi < 0 || pj < 0 || pi >= w || pj >= (self.ny + 2 * GHOST) as isize {
            return CellKind::Ghost;
        }
        self.kinds[(pj * w + pi) as usize]
    }

    pub fn physical(&self, i: usize, j: usize) -> CellKind {
        self.get(i as isize, j as isize)
    }

    pub fn count(&self, kind: CellKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    pub fn total(&self) -> usize {
        self.kinds.len()
    }
}

/// Marks obstacle cells, the two-cell forced ring around them and the ghost frame.
pub fn classify_cells(grid: &SpatialGrid, obstacle: Option<&Footprint>) -> Result<KindMap> {
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let w = grid.nx + 2 * GHOST;
    let h = grid.ny + 2 * GHOST;
    let mut kinds = vec![CellKind::Ghost; w * h];
    for j in 0..ny {
        for i in 0..nx {
            kinds[(j as usize + GHOST) * w + i as usize + GHOST] = CellKind::Interior;
        }
    }
    if let Some(fp) = obstacle {
        let g = GHOST as isize;
        let mut any = false;
        for pj in -g..ny + g {
            for pi in -g..nx + g {
                if fp.contains(pi, pj) {
                    if pi < 0 || pj < 0 || pi >= nx || pj >= ny {
                        return Err(SolverError::Config(format!(
                            "obstacle cell ({pi}, {pj}) overlaps the ghost frame"
                        )));
                    }
                    any = true;
                    kinds[(pj + g) as usize * w + (pi + g) as usize] = CellKind::Obstacle;
                }
            }
        }
        if !any {
            return Err(SolverError::Config("obstacle footprint covers no cell".into()));
        }
        let snapshot = kinds.clone();
        let at = |i: isize, j: isize| snapshot[(j + g) as usize * w + (i + g) as usize];
        for j in 0..ny {
            for i in 0..nx {
                if at(i, j) != CellKind::Interior {
                    continue;
                }
                let near = (-RING_WIDTH..=RING_WIDTH).any(|dj| {
                    (-RING_WIDTH..=RING_WIDTH).any(|di| {
                        let (a, b) = (i + di, j + dj);
                        a >= 0 && b >= 0 && a < nx && b < ny && at(a, b) == CellKind::Obstacle
                    })
                });
                if near {
                    kinds[(j + g) as usize * w + (i + g) as usize] = CellKind::Ring;
                }
            }
        }
    }
    Ok(KindMap { nx: grid.nx, ny: grid.ny, kinds })
}
