use super::eigen::hessenberg;
use super::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const LEVERRIER_MAX: usize = 8;
const MAX_DIMENSION: usize = 16;

/// Coefficients `c_0..=c_n` of `det(m - mu 1) = sum c_k mu^k`, so `c_n = (-1)^n`.
///
/// Faddeev-LeVerrier is used up to n = 8; larger matrices go through the
/// Hessenberg determinant recurrence, which avoids the cancellation that
/// LeVerrier suffers from at higher degree.
pub fn char_poly(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.require_square("characteristic polynomial")?;
    if n > MAX_DIMENSION {
        return Err(Error::Dimension(format!("characteristic polynomial supports n <= {MAX_DIMENSION}, got {n}")));
    }
    let monic = if n <= LEVERRIER_MAX { leverrier(m) } else { hessenberg_recurrence(m) };
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(monic.into_iter().map(|z| z * sign).collect())
}

/// Coefficients of the monic `det(mu 1 - m)`.
fn leverrier(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut mk = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &mk;
        for i in 0..n {
            next[(i, i)] += coeffs[n - k + 1];
        }
        mk = next;
        coeffs[n - k] = -(a * &mk).trace() / k as f64;
    }
    coeffs
}

fn hessenberg_recurrence(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut h = a.clone();
    hessenberg(&mut h);
    // p[k] = det(mu 1 - H[..k, ..k]) as coefficient vectors
    let mut p: Vec<Vec<C64>> = vec![vec![ONE]];
    for k in 0..n {
        let prev = &p[k];
        let mut next = vec![ZERO; k + 2];
        for (d, c) in prev.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[(k, k)] * c;
        }
        let mut sub = ONE;
        for i in (0..k).rev() {
            sub *= h[(i + 1, i)];
            let factor = h[(i, k)] * sub;
            if factor == ZERO {
                continue;
            }
            for (d, c) in p[i].iter().enumerate() {
                next[d] -= factor * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap_or_else(|| vec![ONE])
}

/// Evaluates a coefficient vector at `x` by Horner's rule.
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
}
