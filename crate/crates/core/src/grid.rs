//! Cell-centered 3D grids and complex scalar fields.

use crate::error::{CoreError, Result};
use num_complex::Complex64;

/// Axis-aligned box with cell-centered nodes: node i along an axis sits at
/// `lo + (i + 1/2) h`. Nodes therefore never coincide with the box faces,
/// which is how coordinate singularities on r = 0, rt = 0, x3 = 0 are kept
/// off the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: [usize; 3],
}

impl Grid3 {
    pub fn new(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if n[a] < 16 {
                return Err(CoreError::Domain(format!(
                    "grid needs at least 16 points per axis, got {} on axis {a}",
                    n[a]
                )));
            }
            if !(hi[a] > lo[a]) {
                return Err(CoreError::Domain(format!(
                    "empty box on axis {a}: [{}, {}]",
                    lo[a], hi[a]
                )));
            }
        }
        Ok(Grid3 { lo, hi, n })
    }

    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new([lo; 3], [hi; 3], [n; 3])
    }

    pub fn h(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n[axis] as f64
    }

    pub fn node(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + (i as f64 + 0.5) * self.h(axis)
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize, t: f64) -> crate::expr::Point {
        crate::expr::Point::new(self.node(0, i), self.node(1, j), self.node(2, k), t)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h(0) * self.h(1) * self.h(2)
    }
}

/// Complex scalar field sampled on a [`Grid3`].
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Grid3,
    pub data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(grid: &Grid3) -> Self {
        GridField {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Sample a function of (x1, x2, x3) on the grid.
    pub fn sample<F: Fn(f64, f64, f64) -> Complex64 + Sync>(grid: &Grid3, f: F) -> Self {
        use rayon::prelude::*;
        let n = grid.n;
        let data: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|lin| {
                let k = lin % n[2];
                let j = (lin / n[2]) % n[1];
                let i = lin / (n[1] * n[2]);
                f(grid.node(0, i), grid.node(1, j), grid.node(2, k))
            })
            .collect();
        GridField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        (self.grid.cell_volume() * s).sqrt()
    }

    /// True when the two outermost node layers vanish identically.
    pub fn is_interior_supported(&self) -> bool {
        let n = self.grid.n;
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    let boundary = i < 2
                        || j < 2
                        || k < 2
                        || i >= n[0] - 2
                        || j >= n[1] - 2
                        || k >= n[2] - 2;
                    if boundary && self.data[self.grid.idx(i, j, k)].norm_sqr() != 0.0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn axpy(&mut self, a: Complex64, other: &GridField) {
        for (x, y) in self.data.iter_mut().zip(other.data.iter()) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: Complex64) {
        for x in self.data.iter_mut() {
            *x *= a;
        }
    }
}

/// Discrete L2 product `h1 h2 h3 sum conj(u) v`.
pub fn inner_product(u: &GridField, v: &GridField) -> Result<Complex64> {
    if u.grid != v.grid {
        return Err(CoreError::GridMismatch(
            "inner product needs matching grids".into(),
        ));
    }
    let s: Complex64 = u
        .data
        .iter()
        .zip(v.data.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(s * u.grid.cell_volume())
}
