//! Dense linear algebra helpers.
//!
//! [`MinNormSolver`] computes minimum-norm least-squares solutions through a
//! complete orthogonal decomposition: Householder QR with column pivoting
//! (`A P = Q R`) truncated at the numerical rank, followed by an unpivoted QR
//! of the leading trapezoid (`[R11 R12] = [Lᵀ 0] Zᵀ`).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative rank tolerance against the leading pivot.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `exp(-i t H)` for Hermitian `H` through its eigendecomposition.
pub fn expm_hermitian(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let vectors = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    vectors * phases * vectors.adjoint()
}

/// Householder reflector for `x` (LAPACK convention, `v[0] = 1`).
/// Returns `(beta, tau)` and overwrites `x[1..]` with the tail of `v`.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let tail_sq: f64 = x[1..].iter().map(|v| v * v).sum();
    if tail_sq == 0.0 {
        return (alpha, 0.0);
    }
    let norm = (alpha * alpha + tail_sq).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    (beta, tau)
}

/// `y[offset..] -= tau * v (vᵀ y[offset..])` with `v = [1, tail]`.
fn reflect(tail: &[f64], tau: f64, y: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let mut dot = y[0];
    for (v, yi) in tail.iter().zip(&y[1..]) {
        dot += v * yi;
    }
    let w = tau * dot;
    y[0] -= w;
    for (v, yi) in tail.iter().zip(&mut y[1..]) {
        *yi -= w * v;
    }
}

/// Column-major Householder QR, optionally pivoted, stopping at the numerical
/// rank. Columns beyond the rank are left partially reduced and unused.
struct HouseholderQr {
    rows: usize,
    data: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl HouseholderQr {
    fn factor(rows: usize, cols: usize, mut data: Vec<f64>, pivot: bool, rel_tol: f64) -> Self {
        let steps = rows.min(cols);
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut tau = Vec::with_capacity(steps);
        let col_norm = |data: &[f64], j: usize, from: usize| -> f64 {
            data[j * rows + from..(j + 1) * rows].iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let mut norms: Vec<f64> = (0..cols).map(|j| col_norm(&data, j, 0)).collect();
        let mut reference = norms.clone();
        let mut lead = 0.0f64;
        let mut rank = 0;
        for k in 0..steps {
            if pivot {
                let p = (k..cols)
                    .max_by(|&a, &b| norms[a].total_cmp(&norms[b]))
                    .expect("non-empty column range");
                if p != k {
                    for r in 0..rows {
                        data.swap(k * rows + r, p * rows + r);
                    }
                    norms.swap(k, p);
                    reference.swap(k, p);
                    perm.swap(k, p);
                }
            }
            let (beta, t) = householder(&mut data[k * rows + k..(k + 1) * rows]);
            if k == 0 {
                lead = beta.abs();
            }
            if beta.abs() <= rel_tol * lead || lead == 0.0 {
                break;
            }
            data[k * rows + k] = beta;
            tau.push(t);
            rank += 1;
            let (head, rest) = data.split_at_mut((k + 1) * rows);
            let tail = &head[k * rows + k + 1..(k + 1) * rows];
            for j in (k + 1)..cols {
                let col = &mut rest[(j - k - 1) * rows + k..(j - k) * rows];
                reflect(tail, t, col);
                if pivot {
                    let r_kj = col[0];
                    let updated = (norms[j] * norms[j] - r_kj * r_kj).max(0.0);
                    norms[j] = updated.sqrt();
                    // Recompute when downdating has lost most significant digits.
                    if norms[j] <= 1e-4 * reference[j] {
                        let fresh = col[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                        norms[j] = fresh;
                        reference[j] = fresh;
                    }
                }
            }
        }
        Self { rows, data, tau, perm, rank }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    fn tail(&self, k: usize) -> &[f64] {
        &self.data[k * self.rows + k + 1..(k + 1) * self.rows]
    }

    /// `y ← Qᵀ y` using the first `rank` reflectors.
    fn apply_qt(&self, y: &mut [f64]) {
        for k in 0..self.rank {
            reflect(self.tail(k), self.tau[k], &mut y[k..]);
        }
    }

    /// `y ← Q y` using the first `rank` reflectors.
    fn apply_q(&self, y: &mut [f64]) {
        for k in (0..self.rank).rev() {
            reflect(self.tail(k), self.tau[k], &mut y[k..]);
        }
    }
}

/// Minimum-norm least-squares solver for a fixed matrix.
pub struct MinNormSolver {
    rows: usize,
    cols: usize,
    outer: HouseholderQr,
    /// QR of `[R11 R12]ᵀ`; its `R` is `L`.
    inner: HouseholderQr,
}

impl MinNormSolver {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, RANK_TOLERANCE)
    }

    pub fn with_tolerance(matrix: &DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let (rows, cols) = matrix.shape();
        // nalgebra storage is column-major already.
        let outer = HouseholderQr::factor(rows, cols, matrix.as_slice().to_vec(), true, rel_tol);
        let rank = outer.rank;
        let mut w = vec![0.0; cols * rank];
        for i in 0..rank {
            for j in i..cols {
                w[i * cols + j] = outer.r(i, j);
            }
        }
        let inner = HouseholderQr::factor(cols, rank, w, false, 0.0);
        if inner.rank != rank {
            return Err(Error::Numerical("trapezoidal reduction lost rank".into()));
        }
        Ok(Self { rows, cols, outer, inner })
    }

    pub fn rank(&self) -> usize {
        self.outer.rank
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn l(&self, i: usize, j: usize) -> f64 {
        self.inner.r(i, j)
    }

    /// Minimum-norm minimizer of `‖A x − y‖`.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::invalid(format!("target length {} != {} rows", y.len(), self.rows)));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("target has non-finite entries"));
        }
        let rank = self.rank();
        let mut c = y.to_vec();
        self.outer.apply_qt(&mut c);
        // Lᵀ u = c[..rank], forward substitution.
        let mut w = vec![0.0; self.cols];
        for i in 0..rank {
            let mut acc = c[i];
            for j in 0..i {
                acc -= self.l(j, i) * w[j];
            }
            w[i] = acc / self.l(i, i);
        }
        self.inner.apply_q(&mut w);
        let mut x = vec![0.0; self.cols];
        for (k, &col) in self.outer.perm.iter().enumerate() {
            x[col] = w[k];
        }
        Ok(x)
    }

    /// Vector `g` with `fᵀ A⁺ y = gᵀ y` for every `y`, i.e. `(A⁺)ᵀ f`.
    pub fn pinv_transpose_apply(&self, functional: &[f64]) -> Vec<f64> {
        assert_eq!(functional.len(), self.cols, "functional length must match columns");
        let rank = self.rank();
        let mut z: Vec<f64> = self.outer.perm.iter().map(|&col| functional[col]).collect();
        // Zᵀ f' via the inner reflectors in forward order.
        for k in 0..rank {
            reflect(self.inner.tail(k), self.inner.tau[k], &mut z[k..]);
        }
        // L a = z[..rank], back substitution.
        let mut g = vec![0.0; self.rows];
        for i in (0..rank).rev() {
            let mut acc = z[i];
            for j in (i + 1)..rank {
                acc -= self.l(i, j) * g[j];
            }
            g[i] = acc / self.l(i, i);
        }
        self.outer.apply_q(&mut g);
        g
    }

    /// Row `p` of the pseudoinverse.
    pub fn pinv_row(&self, p: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.cols];
        e[p] = 1.0;
        self.pinv_transpose_apply(&e)
    }
}
