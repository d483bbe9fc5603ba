use super::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Condition numbers above this are treated as singular by [`invert`].
pub const DEFAULT_CONDITION_BOUND: f64 = 1e12;

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: ComplexMatrix,
    perm: Vec<usize>,
    norm_one: f64,
}

impl Lu {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let n = m.require_square("LU factorisation")?;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return Err(Error::Singular { condition: f64::INFINITY });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let t = lu[(k, j)];
                        lu[(i, j)] -= f * t;
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm, norm_one: m.norm_one() })
    }

    pub fn determinant(&self) -> C64 {
        let mut det = ONE;
        for i in 0..self.n {
            det *= self.lu[(i, i)];
        }
        // parity of the pivot permutation
        let mut seen = vec![false; self.n];
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.perm[k];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }

    /// Solves `A x = b` in place.
    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.rows() != self.n {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows, expected {}",
                b.rows(),
                self.n
            )));
        }
        let mut out = ComplexMatrix::zeros(self.n, b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.n, self.n);
        let mut e = vec![ZERO; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            for (i, v) in self.solve_vec(&e).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// One-norm condition number computed from the explicit inverse.
    pub fn condition(&self) -> f64 {
        self.norm_one * self.inverse().norm_one()
    }
}

/// Inverse of `m`, failing when its condition number exceeds `bound`.
pub fn invert_with_bound(m: &ComplexMatrix, bound: f64) -> Result<ComplexMatrix> {
    let lu = Lu::new(m)?;
    let inv = lu.inverse();
    let condition = lu.norm_one * inv.norm_one();
    if !condition.is_finite() || condition > bound {
        return Err(Error::Singular { condition });
    }
    Ok(inv)
}

pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert_with_bound(m, DEFAULT_CONDITION_BOUND)
}

/// Solves `m x = b` for a matrix right-hand side.
pub fn solve(m: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let lu = Lu::new(m)?;
    let condition = lu.condition();
    if !condition.is_finite() || condition > DEFAULT_CONDITION_BOUND {
        return Err(Error::Singular { condition });
    }
    lu.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(invert(&id).unwrap(), id);
    }

    #[test]
    fn unitriangular_two_by_two() {
        let s = c(0.3, -1.2);
        let m = ComplexMatrix::from_rows(&[vec![ONE, s], vec![ZERO, ONE]]).unwrap();
        let inv = invert(&m).unwrap();
        assert!((inv[(0, 1)] + s).norm() < 1e-15);
        assert!((inv[(0, 0)] - ONE).norm() < 1e-15);
        assert!(inv[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn random_five_by_five_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random(5, &mut rng);
            let inv = invert(&m).unwrap();
            let r = (&(&m * &inv) - &ComplexMatrix::identity(5)).max_abs();
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn singular_matrix_reports_condition() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(invert(&m), Err(Error::Singular { .. })));
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]).unwrap();
        match invert(&m) {
            Err(Error::Singular { condition }) => assert!(condition > 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn determinant_tracks_pivot_parity() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((Lu::new(&m).unwrap().determinant() + ONE).norm() < 1e-15);
        let m = ComplexMatrix::from_real_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!((Lu::new(&m).unwrap().determinant() - ONE).norm() < 1e-15);
    }

    #[test]
    fn solve_matches_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random(4, &mut rng);
        let b = ComplexMatrix::from_fn(4, 2, |i, j| c(i as f64, j as f64));
        let x = solve(&m, &b).unwrap();
        assert!((&(&m * &x) - &b).max_abs() < 1e-12);
    }
}
