use super::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Eigenvalues with unit-norm eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
    /// Max-entry residual of `m V - V diag(values)`.
    pub residual: f64,
}

impl Eigen {
    /// Smallest pairwise distance between eigenvalues.
    pub fn min_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..self.values.len() {
            for j in i + 1..self.values.len() {
                gap = gap.min((self.values[i] - self.values[j]).norm());
            }
        }
        gap
    }
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Reduces `a` to upper Hessenberg form in place and returns the unitary
/// `Q` with `a_original = Q H Q^H`.
pub(crate) fn hessenberg(a: &mut ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return q;
    }
    for k in 0..n - 2 {
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // a <- (I - 2 v v^H) a
        for j in 0..n {
            let dot: C64 = (k + 1..n).zip(&v).map(|(i, vi)| vi.conj() * a[(i, j)]).sum();
            for (i, vi) in (k + 1..n).zip(&v) {
                a[(i, j)] -= 2.0 * vi * dot;
            }
        }
        // a <- a (I - 2 v v^H), q <- q (I - 2 v v^H)
        for m in [&mut *a, &mut q] {
            for i in 0..n {
                let dot: C64 = (k + 1..n).zip(&v).map(|(j, vj)| m[(i, j)] * vj).sum();
                for (j, vj) in (k + 1..n).zip(&v) {
                    m[(i, j)] -= 2.0 * dot * vj.conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
    q
}

/// Rotation `[c s; -conj(s) c]` that zeroes the second component of `(x, y)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let nu = (ax * ax + y.norm_sqr()).sqrt();
    (ax / nu, (x / ax) * y.conj() / nu)
}

/// Complex Schur form `a = Z T Z^H` by shifted QR on the Hessenberg form.
fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.rows();
    let mut h = m.clone();
    let mut z = hessenberg(&mut h);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n.saturating_sub(1);
    let mut sweeps = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = scale;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        total += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE || total > MAX_SWEEPS_PER_EIGENVALUE * n {
            let residual = h[(hi, hi - 1)].norm();
            return Err(Error::Convergence { residual });
        }
        let shift = if sweeps % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.25 * h[(hi, hi - 1)].norm())
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half_tr = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
            let (r1, r2) = (half_tr + disc, half_tr - disc);
            if (r1 - d).norm() <= (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };
        let mut x = h[(l, l)] - shift;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (cs, sn) = givens(x, y);
            let col0 = if k > l { k - 1 } else { l };
            for j in col0..n {
                let (p, q) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = cs * p + sn * q;
                h[(k + 1, j)] = -sn.conj() * p + cs * q;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let (p, q) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = p * cs + q * sn.conj();
                h[(i, k + 1)] = -p * sn + q * cs;
            }
            for i in 0..n {
                let (p, q) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = p * cs + q * sn.conj();
                z[(i, k + 1)] = -p * sn + q * cs;
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

/// Rotates `v` so its first non-negligible component is real and positive.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-12 * norm) {
        let phase = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Eigen-decomposition of a square matrix.
///
/// Fails with [`Error::Convergence`] if QR does not converge or the final
/// residual exceeds `1e-10 * max|m|`.
pub fn eigen(m: &ComplexMatrix) -> Result<Eigen> {
    let n = m.require_square("eigen decomposition")?;
    if !m.is_finite() {
        return Err(Error::Invalid("eigen decomposition of a non-finite matrix".into()));
    }
    let (t, z) = schur(m)?;
    let values = t.diagonal();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut vectors = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        let mut x = vec![ZERO; n];
        x[k] = ONE;
        for j in (0..k).rev() {
            let s: C64 = (j + 1..=k).map(|m| t[(j, m)] * x[m]).sum();
            let mut d = t[(j, j)] - lambda;
            if d.norm() < f64::EPSILON * scale {
                d = C64::new(f64::EPSILON * scale, 0.0);
            }
            x[j] = -s / d;
        }
        let mut v: Vec<C64> = (0..n).map(|i| (0..=k).map(|m| z[(i, m)] * x[m]).sum()).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        fix_phase(&mut v);
        for (i, vi) in v.into_iter().enumerate() {
            vectors[(i, k)] = vi;
        }
    }
    let mv = m * &vectors;
    let mut residual = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            residual = residual.max((mv[(i, k)] - vectors[(i, k)] * values[k]).norm());
        }
    }
    if !residual.is_finite() || residual > 1e-10 * scale.max(1e-300) {
        return Err(Error::Convergence { residual });
    }
    Ok(Eigen { values, vectors, residual })
}

/// Eigenvalues only, from the Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    m.require_square("eigenvalues")?;
    if !m.is_finite() {
        return Err(Error::Invalid("eigenvalues of a non-finite matrix".into()));
    }
    Ok(schur(m)?.0.diagonal())
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
    fn diagonal_input() {
        let m = ComplexMatrix::from_diag(&[ONE, c(2.0, 0.0)]);
        let e = eigen(&m).unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0, 2.0]);
        for k in 0..2 {
            let col = e.vectors.column(k);
            let ones = col.iter().filter(|z| (*z - ONE).norm() < 1e-14).count();
            let zeros = col.iter().filter(|z| z.norm() < 1e-14).count();
            assert_eq!((ones, zeros), (1, 1));
        }
    }

    #[test]
    fn skew_two_by_two() {
        let v = 0.7;
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, v], vec![-v, 0.0]]).unwrap();
        let e = eigen(&m).unwrap();
        let mut ims: Vec<f64> = e.values.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + v).abs() < 1e-14 && (ims[1] - v).abs() < 1e-14);
        assert!(e.values.iter().all(|z| z.re.abs() < 1e-14));
    }

    #[test]
    fn jordan_block_is_flagged_not_garbage() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        match eigen(&m) {
            Ok(e) => {
                assert!(e.residual <= 1e-10);
                assert!(e.min_gap() < 1e-6);
            }
            Err(Error::Convergence { .. }) => {}
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(1..=8);
            let m = random(n, &mut rng);
            let e = eigen(&m).unwrap();
            assert!(e.residual < 1e-10 * m.max_abs());
            for k in 0..n {
                let norm: f64 = e.vectors.column(k).iter().map(|z| z.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn larger_matrices_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [10, 12, 16] {
            let m = random(n, &mut rng);
            eigen(&m).unwrap();
        }
    }

    #[test]
    fn hessenberg_is_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random(6, &mut rng);
        let mut h = m.clone();
        let q = hessenberg(&mut h);
        let back = &(&q * &h) * &q.conj_transpose();
        assert!(back.distance(&m) < 1e-13);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], ZERO);
            }
        }
    }
}
