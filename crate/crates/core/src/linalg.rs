//! Sparse symmetric positive-definite systems from five-point stencils.
//!
//! The field solvers assemble a [`StencilMatrix`] over their free nodes and
//! factor it once with a banded Cholesky decomposition. Every solve is
//! followed by residual checks and iterative refinement against the
//! original stencil, so the reported residual is the true one.

use crate::error::{Error, Result};

/// Relative residual every field solve must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const MAX_REFINEMENT_STEPS: usize = 6;

/// Symmetric sparse matrix in row form: diagonal plus off-diagonal entries.
#[derive(Debug, Clone)]
pub struct StencilMatrix {
    diag: Vec<f64>,
    /// Off-diagonal entries per row, `(column, value)`; symmetric by construction.
    off: Vec<Vec<(usize, f64)>>,
}

impl StencilMatrix {
    pub fn new(n: usize) -> Self {
        Self { diag: vec![0.0; n], off: vec![Vec::with_capacity(4); n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    /// Adds `v` at (i, j) and (j, i).
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_ne!(i, j);
        for (row, col) in [(i, j), (j, i)] {
            match self.off[row].iter_mut().find(|(c, _)| *c == col) {
                Some(entry) => entry.1 += v,
                None => self.off[row].push((col, v)),
            }
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.off
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = self.diag[i] * x[i];
            for &(j, v) in &self.off[i] {
                s += v * x[j];
            }
            *yi = s;
        }
    }
}

/// Lower-triangular banded Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i - bw ..= i` at offsets `0 ..= bw`.
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &StencilMatrix) -> Result<Self> {
        let n = a.len();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            l[i * w + bw] = a.diag[i];
            for &(j, v) in &a.off[i] {
                if j < i {
                    l[i * w + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let row_i = &l[i * w + (lo + bw - i)..i * w + (j + bw - i)];
                let row_j = &l[j * w + (lo + bw - j)..j * w + bw];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let s = l[i * w + (j + bw - i)] - dot;
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Convergence { residual: f64::INFINITY });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s -= self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            b[i] /= self.l[i * w + bw];
            let bi = b[i];
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                b[k] -= self.l[i * w + (k + bw - i)] * bi;
            }
        }
    }
}

/// Factored system that reports and enforces its residual.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    matrix: StencilMatrix,
    factor: BandedCholesky,
}

impl SpdSolver {
    pub fn new(matrix: StencilMatrix) -> Result<Self> {
        let factor = BandedCholesky::factor(&matrix)?;
        Ok(Self { matrix, factor })
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// Solves `A x = b`, returning `x` and the achieved relative residual.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = b.len();
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok((vec![0.0; n], 0.0));
        }
        let mut x = b.to_vec();
        self.factor.solve_in_place(&mut x);
        let mut ax = vec![0.0; n];
        let mut rel = f64::INFINITY;
        for _ in 0..MAX_REFINEMENT_STEPS {
            self.matrix.matvec(&x, &mut ax);
            let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            rel = norm(&r) / bnorm;
            if rel <= RESIDUAL_TOLERANCE * 1e-3 {
                break;
            }
            self.factor.solve_in_place(&mut r);
            x.iter_mut().zip(&r).for_each(|(xi, di)| *xi += di);
        }
        if !(rel <= RESIDUAL_TOLERANCE) {
            self.matrix.matvec(&x, &mut ax);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            rel = norm(&r) / bnorm;
            if !(rel <= RESIDUAL_TOLERANCE) {
                return Err(Error::Convergence { residual: rel });
            }
        }
        Ok((x, rel))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
