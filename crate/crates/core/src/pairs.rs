use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly ordered index pair `(i, j)` with `i < j`, zero-based.
///
/// Pairs label the coordinates of both skew-symmetric matrices and upper
/// unitriangular matrices. They order lexicographically, which is also the
/// order used for coordinate vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
}

impl Pair {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i < j {
            Ok(Pair { i, j })
        } else {
            Err(Error::Index(format!("pair ({i}, {j}) must satisfy i < j")))
        }
    }

    /// The pair `(min(a, b), max(a, b))`.
    pub fn unordered(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::Index(format!("pair ({a}, {b}) has equal indices")));
        }
        Ok(Pair { i: a.min(b), j: a.max(b) })
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.i >= self.j || self.j >= n {
            return Err(Error::Index(format!("pair ({}, {}) out of range for n = {n}", self.i, self.j)));
        }
        Ok(())
    }

    pub fn count(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    /// All pairs for dimension `n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Pair> {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| Pair { i, j }))
    }

    /// Position of this pair in [`Pair::all`].
    pub fn index(&self, n: usize) -> usize {
        self.i * n - self.i * (self.i + 1) / 2 + (self.j - self.i - 1)
    }

    pub fn from_index(n: usize, mut k: usize) -> Pair {
        for i in 0..n {
            let row = n - i - 1;
            if k < row {
                return Pair { i, j: i + 1 + k };
            }
            k -= row;
        }
        panic!("pair index out of range for n = {n}");
    }

    pub fn contains(&self, k: usize) -> bool {
        self.i == k || self.j == k
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i + 1, self.j + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for n in 2..8 {
            for (k, p) in Pair::all(n).enumerate() {
                assert_eq!(p.index(n), k);
                assert_eq!(Pair::from_index(n, k), p);
            }
            assert_eq!(Pair::all(n).count(), Pair::count(n));
        }
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(Pair::new(2, 1).is_err());
        assert!(Pair::unordered(3, 3).is_err());
        assert_eq!(Pair::unordered(3, 1).unwrap(), Pair { i: 1, j: 3 });
        assert!(Pair { i: 0, j: 4 }.check(4).is_err());
    }
}
