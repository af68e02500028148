//! Level-major enumeration of the nonnegative integer lattice Z_+^d.
//!
//! States are ordered by level |x| = Σ x_k. Within a level the order is
//! descending lexicographic, so for d = 2 the first levels read
//! (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
//!
//! Ranking and unranking are closed-form (stars and bars), so indices can be
//! computed for any state without materializing the enumeration.

use serde::{Deserialize, Serialize};

/// Binomial coefficient; panics on overflow of u128 (far beyond any usable capacity).
pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub dim: usize,
}

impl Lattice {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "lattice dimension must be positive");
        Lattice { dim }
    }

    /// Number of vectors with |x| = level in `parts` coordinates.
    fn compositions(level: u64, parts: usize) -> u128 {
        if parts == 0 {
            return u128::from(level == 0);
        }
        binom(level + parts as u64 - 1, parts as u64 - 1)
    }

    /// Number of states on the given level.
    pub fn level_size(&self, level: usize) -> usize {
        Self::compositions(level as u64, self.dim) as usize
    }

    /// Index of the first state of `level` (= number of states below it).
    pub fn level_offset(&self, level: usize) -> usize {
        if level == 0 {
            return 0;
        }
        binom(level as u64 - 1 + self.dim as u64, self.dim as u64) as usize
    }

    /// Level of the state at `index`.
    pub fn level_of(&self, index: usize) -> usize {
        // smallest L with offset(L + 1) > index
        let (mut lo, mut hi) = (0usize, 1usize);
        while self.level_offset(hi + 1) <= index {
            hi *= 2;
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.level_offset(mid + 1) > index {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    pub fn rank(&self, x: &[u64]) -> usize {
        assert_eq!(x.len(), self.dim);
        let level: u64 = x.iter().sum();
        let mut pos = self.level_offset(level as usize) as u128;
        let mut rem = level;
        for (k, &xk) in x.iter().enumerate().take(self.dim - 1) {
            let parts = (self.dim - k - 1) as u64;
            // states whose k-th coordinate exceeds xk come first
            if rem > xk {
                pos += binom(rem - xk - 1 + parts, parts);
            }
            rem -= xk;
        }
        pos as usize
    }

    pub fn unrank(&self, index: usize) -> Vec<u64> {
        let level = self.level_of(index);
        let mut r = (index - self.level_offset(level)) as u128;
        let mut rem = level as u64;
        let mut x = Vec::with_capacity(self.dim);
        for k in 0..self.dim - 1 {
            let parts = self.dim - k - 1;
            let mut a = rem;
            loop {
                let block = Self::compositions(rem - a, parts);
                if r < block {
                    break;
                }
                r -= block;
                a -= 1;
            }
            x.push(a);
            rem -= a;
        }
        x.push(rem);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dim_order() {
        let l = Lattice::new(2);
        let got: Vec<Vec<u64>> = (0..6).map(|i| l.unrank(i)).collect();
        assert_eq!(
            got,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn rank_unrank_roundtrip_three_dims() {
        let l = Lattice::new(3);
        let mut prev: Option<Vec<u64>> = None;
        for i in 0..500 {
            let x = l.unrank(i);
            assert_eq!(l.rank(&x), i);
            if let Some(p) = prev {
                let (lp, lx): (u64, u64) = (p.iter().sum(), x.iter().sum());
                assert!(lp < lx || (lp == lx && p > x));
            }
            prev = Some(x);
        }
    }

    #[test]
    fn one_dim_is_identity() {
        let l = Lattice::new(1);
        for i in 0..20 {
            assert_eq!(l.unrank(i), vec![i as u64]);
            assert_eq!(l.rank(&[i as u64]), i);
            assert_eq!(l.level_offset(i), i);
        }
    }
}
