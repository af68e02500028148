//! Banded LU without pivoting for Z-matrices I − A.
//!
//! For a Z-matrix, elimination without pivoting succeeds with strictly
//! positive pivots exactly when the matrix is a nonsingular M-matrix, i.e.
//! when ρ(A) < 1. A nonpositive pivot therefore certifies that the minimal
//! nonnegative solution of x = Ax + g is not finite (for g > 0).

use super::SparseMatrix;

pub(crate) enum Factorization {
    Ok(BandLu),
    /// Pivot at this row was ≤ 0: I − A is not a nonsingular M-matrix.
    NotMMatrix { row: usize },
    /// Pivot positive but negligible relative to the diagonal: numerically singular.
    NearSingular,
    /// Band storage would exceed the memory budget.
    TooWide,
}

pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

/// Entries beyond this are refused (~512 MB of f64).
const MAX_BAND_ENTRIES: usize = 1 << 26;
const NEAR_SINGULAR: f64 = 1e-13;

impl BandLu {
    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    /// Factor I − A. `dense` forces full bandwidth.
    pub(crate) fn factor(a: &SparseMatrix, dense: bool) -> Factorization {
        let n = a.n;
        let (kl, ku) = if dense {
            (n.saturating_sub(1), n.saturating_sub(1))
        } else {
            a.bandwidths()
        };
        let width = kl + ku + 1;
        if width.saturating_mul(n) > MAX_BAND_ENTRIES {
            return Factorization::TooWide;
        }
        let mut lu = BandLu { n, kl, ku, data: vec![0.0; width * n] };
        for i in 0..n {
            let d = lu.idx(i, i);
            lu.data[d] = 1.0;
            for (j, v) in a.row(i) {
                let k = lu.idx(i, j);
                lu.data[k] -= v;
            }
        }
        let mut diag0 = vec![0.0; n];
        for (i, d) in diag0.iter_mut().enumerate() {
            *d = lu.data[lu.idx(i, i)];
        }
        for k in 0..n {
            let pivot = lu.data[lu.idx(k, k)];
            if pivot <= 0.0 || !pivot.is_finite() {
                return Factorization::NotMMatrix { row: k };
            }
            if pivot <= NEAR_SINGULAR * diag0[k].abs().max(1.0) {
                return Factorization::NearSingular;
            }
            let imax = (k + kl).min(n - 1);
            let jmax = (k + ku).min(n - 1);
            for i in k + 1..=imax {
                let ik = lu.idx(i, k);
                let m = lu.data[ik];
                if m == 0.0 {
                    continue;
                }
                let l = m / pivot;
                lu.data[ik] = l;
                for j in k + 1..=jmax {
                    let kj = lu.data[lu.idx(k, j)];
                    if kj != 0.0 {
                        let ij = lu.idx(i, j);
                        lu.data[ij] -= l * kj;
                    }
                }
            }
        }
        Factorization::Ok(lu)
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(self.kl);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(lo) {
                s -= self.data[self.idx(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + self.ku).min(n - 1);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(i + 1) {
                s -= self.data[self.idx(i, j)] * xj;
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
        x
    }
}
