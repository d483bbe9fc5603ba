//! Stokes matrices by sectorial integration.
//!
//! Work happens in the rotated variable `ζ = e^{-iψ}z`, where the positions
//! become `w = e^{iψ}u` and the admissible line is the real axis. The left
//! and right solutions start on the neutral rays `ζ = ±iR`, move radially to
//! `|ζ| = r`, and are compared at `ζ = r` (giving `S₊`) and `ζ = -r` (giving
//! `S₋`). Starting on the neutral rays keeps every column of `e^{ζW}` of unit
//! size, so the comparison loses no digits to exponential dominance.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use super::path::{Path, Segment};
use super::{asymptotic_coefficients, asymptotic_series, default_matching_radius, transport, IntegratorConfig};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, invert, ComplexMatrix, C64, I};
use crate::pairs::Pair;
use crate::poisson_so::{DeformationPoint, SkewSystem, TOL_RESONANCE};
use crate::reflection::StokesMatrix;

/// Which sort of `Re(e^{iψ}u_i)` made `S₊` upper triangular.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    Increasing,
    Decreasing,
}

impl Ordering {
    pub fn as_str(self) -> &'static str {
        match self {
            Ordering::Increasing => "increasing",
            Ordering::Decreasing => "decreasing",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StokesResult {
    /// Stokes matrix in the sorted labelling.
    pub s: StokesMatrix,
    /// `permutation[k]` is the original index placed at position `k`.
    pub permutation: Vec<usize>,
    pub ordering: Ordering,
    /// Max entry of `S₋ - S₊ᵀ`.
    pub s_minus_residual: f64,
    /// Max entry strictly below the diagonal of `S₊`.
    pub triangularity_residual: f64,
    /// Max `|S₊_kk - 1|`.
    pub diagonal_residual: f64,
    pub spectral_residual: f64,
    pub matching_radius: f64,
    pub inner_radius: f64,
}

impl StokesResult {
    /// Largest of the four diagnostics.
    pub fn worst_residual(&self) -> f64 {
        self.s_minus_residual
            .max(self.triangularity_residual)
            .max(self.diagonal_residual)
            .max(self.spectral_residual)
    }
}

/// Computes the Stokes matrix of `V` at `u`, trying the increasing order
/// first and falling back to the decreasing one.
pub fn compute_stokes(v: &SkewSystem, u: &DeformationPoint, cfg: &IntegratorConfig) -> Result<StokesResult> {
    match compute_stokes_ordered(v, u, Ordering::Increasing, cfg) {
        Err(Error::Ordering { residual }) => match compute_stokes_ordered(v, u, Ordering::Decreasing, cfg) {
            Err(Error::Ordering { residual: r2 }) => Err(Error::Ordering { residual: residual.min(r2) }),
            other => other,
        },
        other => other,
    }
}

/// Like [`compute_stokes`] with a fixed ordering convention.
pub fn compute_stokes_ordered(
    v: &SkewSystem,
    u: &DeformationPoint,
    ordering: Ordering,
    cfg: &IntegratorConfig,
) -> Result<StokesResult> {
    cfg.validate()?;
    let n = u.n();
    if v.n() != n {
        return Err(Error::Dimension(format!("V is {}×{} but u has {n} entries", v.n(), v.n())));
    }
    u.check_distinct()?;
    u.check_admissible()?;
    v.check_nonresonant(TOL_RESONANCE)?;
    let perm = sorted_permutation(&u.rotated(), ordering);
    if n == 1 {
        return Ok(StokesResult {
            s: StokesMatrix::identity(1),
            permutation: perm,
            ordering,
            s_minus_residual: 0.0,
            triangularity_residual: 0.0,
            diagonal_residual: 0.0,
            spectral_residual: 0.0,
            matching_radius: cfg.matching_radius.unwrap_or(0.0),
            inner_radius: cfg.inner_radius.unwrap_or(0.0),
        });
    }
    let rot = u.rotated();
    let center = rot.iter().sum::<C64>() / n as f64;
    let w: Vec<C64> = perm.iter().map(|&k| rot[k] - center).collect();
    let vp = v.permuted(&perm);

    let (c_plus, c_minus, radius, inner) = stokes_pair(&vp, &w, cfg)?;

    let mut triangular = 0.0f64;
    let mut diagonal = 0.0f64;
    for i in 0..n {
        diagonal = diagonal.max((c_plus[(i, i)] - C64::new(1.0, 0.0)).norm());
        for j in 0..i {
            triangular = triangular.max(c_plus[(i, j)].norm());
        }
    }
    if triangular > cfg.acceptance_tol {
        return Err(Error::Ordering { residual: triangular });
    }
    let s_minus = c_minus.distance(&c_plus.transpose());
    let s = StokesMatrix::from_coords(n, Pair::all(n).map(|p| c_plus[(p.i, p.j)]).collect())?;
    let spectral = spectral_check(&s, v)?;
    let result = StokesResult {
        s,
        permutation: perm,
        ordering,
        s_minus_residual: s_minus,
        triangularity_residual: triangular,
        diagonal_residual: diagonal,
        spectral_residual: spectral,
        matching_radius: radius,
        inner_radius: inner,
    };
    if s_minus.max(diagonal) > cfg.acceptance_tol {
        return Err(Error::Accuracy(format!(
            "Stokes diagnostics above tolerance: |S- - S+^T| = {s_minus:.3e}, diagonal defect {diagonal:.3e}"
        )));
    }
    Ok(result)
}

fn sorted_permutation(w: &[C64], ordering: Ordering) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..w.len()).collect();
    perm.sort_by(|&a, &b| w[a].re.total_cmp(&w[b].re));
    if ordering == Ordering::Decreasing {
        perm.reverse();
    }
    perm
}

/// Raw connection matrices `(C₊, C₋)` for centred, already ordered `w`.
fn stokes_pair(v: &SkewSystem, w: &[C64], cfg: &IntegratorConfig) -> Result<(ComplexMatrix, ComplexMatrix, f64, f64)> {
    let n = w.len();
    let radius = match cfg.matching_radius {
        Some(r) => r,
        None => default_matching_radius(v, w)?,
    };
    let coeffs = asymptotic_coefficients(v, w, cfg.asymptotic_order)?;
    let g1 = coeffs[1].max_abs();
    if g1 / radius >= 0.01 {
        return Err(Error::Validity { modulus: radius, radius: 100.0 * g1 });
    }
    let wmax = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let inner = cfg.inner_radius.unwrap_or(1.0 / wmax.max(1.0));
    if inner >= radius {
        return Err(Error::Invalid(format!("inner radius {inner} must be below the matching radius {radius}")));
    }
    let vm = v.matrix();
    let coeff = |z: C64, buf: &mut [C64]| {
        let zi = z.inv();
        for i in 0..n {
            for j in 0..n {
                buf[i * n + j] = vm[(i, j)] * zi;
            }
            buf[i * n + i] += w[i];
        }
    };
    let origin = C64::new(0.0, 0.0);

    // Left solution: from +iR down to +ir, then clockwise to r or counter-clockwise to -r.
    let mut left = asymptotic_series(&coeffs, I * radius);
    transport(n, coeff, &Path::starting_line(I * radius, I * inner), &mut left, cfg)?;
    let mut left_plus = left.clone();
    let mut left_minus = left;
    transport(n, coeff, &arc(origin, inner, FRAC_PI_2, 0.0), &mut left_plus, cfg)?;
    transport(n, coeff, &arc(origin, inner, FRAC_PI_2, PI), &mut left_minus, cfg)?;

    let mut right = asymptotic_series(&coeffs, -I * radius);
    transport(n, coeff, &Path::starting_line(-I * radius, -I * inner), &mut right, cfg)?;
    let mut right_plus = right.clone();
    let mut right_minus = right;
    transport(n, coeff, &arc(origin, inner, -FRAC_PI_2, 0.0), &mut right_plus, cfg)?;
    transport(n, coeff, &arc(origin, inner, -FRAC_PI_2, -PI), &mut right_minus, cfg)?;

    // Y_L = X_L e^{iRW}, Y_R = X_R e^{-iRW}, so C = e^{iRW} X_R^{-1} X_L e^{iRW}.
    let phase: Vec<C64> = w.iter().map(|x| (I * radius * x).exp()).collect();
    let connect = |l: &ComplexMatrix, r: &ComplexMatrix| -> Result<ComplexMatrix> {
        let x = &invert(r)? * l;
        Ok(ComplexMatrix::from_fn(n, n, |i, j| phase[i] * x[(i, j)] * phase[j]))
    };
    let c_plus = connect(&left_plus, &right_plus)?;
    let c_minus = connect(&left_minus, &right_minus)?;
    Ok((c_plus, c_minus, radius, inner))
}

fn arc(center: C64, radius: f64, theta0: f64, theta1: f64) -> Path {
    let mut p = Path::new();
    p.push(Segment::Arc { center, radius, theta0, theta1 }).expect("single segment");
    p
}

/// Matching distance between the spectrum of `(Sᵀ)⁻¹S` and `{e^{2πiμ_k}}`,
/// where `μ_k` are the eigenvalues of `V`.
pub fn spectral_check(s: &StokesMatrix, v: &SkewSystem) -> Result<f64> {
    if s.n() != v.n() {
        return Err(Error::Dimension(format!("S is {}×{} but V is {}×{}", s.n(), s.n(), v.n(), v.n())));
    }
    let sm = s.matrix();
    let m = &invert(&sm.transpose())? * &sm;
    let a = eigenvalues(&m)?;
    let b: Vec<C64> = v.eigenvalues()?.iter().map(|mu| (2.0 * PI * I * mu).exp()).collect();
    Ok(spectral_distance(&a, &b))
}

/// Bottleneck matching distance between two equally sized point sets:
/// exhaustive for up to 8 points, greedy beyond.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectral_distance: size mismatch");
    let n = a.len();
    if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let d = p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).fold(0.0, f64::max);
            best = best.min(d);
        });
        if n == 0 {
            0.0
        } else {
            best
        }
    } else {
        let mut used = vec![false; n];
        let mut worst = 0.0f64;
        for x in a {
            let (j, d) = (0..n)
                .filter(|&j| !used[j])
                .map(|j| (j, (x - b[j]).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("unused target");
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}
