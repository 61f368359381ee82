//! Small dense matrices and a cyclic Jacobi eigensolver.
//!
//! Kernels, link matrices and Gram matrices in this crate are tiny (a handful
//! of blocks), so a self-contained Jacobi sweep gives machine-precision
//! eigenpairs without pulling in a linear-algebra stack.

use crate::scalar::{real, Real};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Real> SquareMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![F::zero(); n * n],
        }
    }

    /// Builds from a row-major slice; panics if the length is not `n*n`.
    pub fn from_row_major(n: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n*n entries");
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "rows must form a square matrix");
            data.extend_from_slice(row);
        }
        SquareMatrix { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Forces exact symmetry by averaging opposite entries.
    pub fn symmetrize(&mut self) {
        let half = real::<F>(0.5);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let m = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, m);
                self.set(j, i, m);
            }
        }
    }

    pub fn frobenius_norm(&self) -> F {
        self.data
            .iter()
            .map(|&x| x * x)
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix<F>) -> F {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), F::max)
    }

    /// `self * v` for a dense vector.
    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j) * v[j])
                    .fold(F::zero(), |a, b| a + b)
            })
            .collect()
    }
}

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, so
/// `a = V diag(w) V^T` up to roundoff. Unsorted.
pub fn symmetric_eigen<F: Real>(a: &SquareMatrix<F>) -> (Vec<F>, SquareMatrix<F>) {
    let n = a.n();
    let mut m = a.clone();
    let mut v = SquareMatrix::zeros(n);
    for i in 0..n {
        v.set(i, i, F::one());
    }
    if n <= 1 {
        return ((0..n).map(|i| m.get(i, i)).collect(), v);
    }

    let eps = F::epsilon();
    for _sweep in 0..64 {
        let mut off = F::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        let scale = m.frobenius_norm();
        if off.sqrt() <= eps * scale.max(F::one()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == F::zero() {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                // Rutishauser's stable rotation.
                let theta = (aqq - app) / (real::<F>(2.0) * apq);
                let t = {
                    let s = if theta >= F::zero() {
                        F::one()
                    } else {
                        -F::one()
                    };
                    s / (theta.abs() + (F::one() + theta * theta).sqrt())
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    ((0..n).map(|i| m.get(i, i)).collect(), v)
}

/// Projects a symmetric matrix onto the positive semidefinite cone by
/// clipping negative eigenvalues at zero.
pub fn psd_project<F: Real>(a: &SquareMatrix<F>) -> SquareMatrix<F> {
    let n = a.n();
    let (w, v) = symmetric_eigen(a);
    let mut out = SquareMatrix::zeros(n);
    for (idx, &lam) in w.iter().enumerate() {
        if lam <= F::zero() {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let add = lam * v.get(i, idx) * v.get(j, idx);
                out.set(i, j, out.get(i, j) + add);
            }
        }
    }
    out.symmetrize();
    out
}
