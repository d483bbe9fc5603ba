//! Stokes matrices, the reflection representation they generate, and the
//! quadratic bracket on monodromy entries that descends to Stokes data.
//!
//! For an upper unitriangular `S` with Gram matrix `G = ½(S + Sᵀ)`, the
//! reflection `M_i` is the identity except in row `i`, which equals
//! `-2 G_{·i}` with `-1` on the diagonal. The product `M_1 ⋯ M_n` equals
//! `-S⁻¹Sᵀ`.
//!
//! The four-reflection trace is taken in increasing order `M_i M_j M_k M_l`,
//! `i < j < k < l`, which is the order that matches the closed form.

use crate::error::{Error, Result};
use crate::linalg::{invert, ComplexMatrix, Lu, C64, ONE, ZERO};
use crate::pairs::Pair;

/// Default prefactor of the monodromy bracket, `iπ`.
pub const KAPPA_DEFAULT: C64 = C64::new(0.0, std::f64::consts::PI);

/// Upper unitriangular matrix stored through its strictly upper entries.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesMatrix {
    n: usize,
    s: Vec<C64>,
}

impl StokesMatrix {
    pub fn identity(n: usize) -> Self {
        StokesMatrix { n, s: vec![ZERO; Pair::count(n)] }
    }

    /// Coordinates in lexicographic pair order.
    pub fn from_coords(n: usize, coords: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("Stokes matrix must have n >= 1".into()));
        }
        if coords.len() != Pair::count(n) {
            return Err(Error::Dimension(format!(
                "Stokes matrix of size {n} needs {} coordinates, got {}",
                Pair::count(n),
                coords.len()
            )));
        }
        if let Some(k) = coords.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let p = Pair::from_index(n, k);
            return Err(Error::NonFinite { row: p.i, col: p.j });
        }
        Ok(StokesMatrix { n, s: coords })
    }

    /// Accepts `m` only if its diagonal is exactly 1 and its lower triangle
    /// exactly 0.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        Self::from_matrix_tol(m, 0.0)
    }

    /// Like [`StokesMatrix::from_matrix`] with a tolerance; the returned
    /// matrix is exactly unitriangular.
    pub fn from_matrix_tol(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        let n = m.require_square("Stokes matrix")?;
        if !m.is_finite() {
            return Err(Error::Invalid("Stokes matrix has non-finite entries".into()));
        }
        let residual = unitriangular_defect(m);
        if residual > tol {
            return Err(Error::NotUnitriangular { residual });
        }
        Self::from_coords(n, Pair::all(n).map(|p| m[(p.i, p.j)]).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[C64] {
        &self.s
    }

    pub fn coord(&self, p: Pair) -> C64 {
        self.s[p.index(self.n)]
    }

    pub fn set(&mut self, p: Pair, value: C64) {
        let k = p.index(self.n);
        self.s[k] = value;
    }

    /// `s_ab` read at `(min(a, b), max(a, b))`; the diagonal reads as 1.
    pub fn sym(&self, a: usize, b: usize) -> C64 {
        if a == b {
            ONE
        } else {
            self.s[Pair { i: a.min(b), j: a.max(b) }.index(self.n)]
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |a, b| match a.cmp(&b) {
            std::cmp::Ordering::Less => self.s[Pair { i: a, j: b }.index(self.n)],
            std::cmp::Ordering::Equal => ONE,
            std::cmp::Ordering::Greater => ZERO,
        })
    }

    /// `G = ½(S + Sᵀ)`.
    pub fn gram(&self) -> ComplexMatrix {
        let s = self.matrix();
        (&s + &s.transpose()).scale_real(0.5)
    }

    /// `S⁻¹Sᵀ`, whose spectrum is the Casimir data.
    pub fn monodromy_at_infinity(&self) -> Result<ComplexMatrix> {
        let s = self.matrix();
        Ok(&invert(&s)? * &s.transpose())
    }

    pub fn check_nondegenerate(&self) -> Result<()> {
        let s = self.matrix();
        let sym = &s + &s.transpose();
        let det = Lu::new(&sym).map(|lu| lu.determinant()).unwrap_or(ZERO);
        if det.norm() <= 1e-10 {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        Ok(())
    }

    /// Conjugation by a permutation: entry (a, b) becomes entry (perm[a], perm[b]) of the input.
    pub fn permuted_matrix(&self, perm: &[usize]) -> ComplexMatrix {
        self.matrix().permuted(perm)
    }

    pub fn distance(&self, other: &StokesMatrix) -> f64 {
        self.s.iter().zip(&other.s).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Max deviation of `m` from upper unitriangular shape.
pub fn unitriangular_defect(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut residual = 0.0f64;
    for a in 0..n {
        residual = residual.max((m[(a, a)] - ONE).norm());
        for b in 0..a {
            residual = residual.max(m[(a, b)].norm());
        }
    }
    residual
}

/// Monodromy matrices `M_1..M_n` in the reflection basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionTuple {
    pub m: Vec<ComplexMatrix>,
}

impl ReflectionTuple {
    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// Largest `|M_i² - 1|` entry.
    pub fn involution_residual(&self) -> f64 {
        let n = self.n();
        let id = ComplexMatrix::identity(n);
        self.m.iter().map(|m| (m * m).distance(&id)).fold(0.0, f64::max)
    }
}

pub fn reflections_from_stokes(s: &StokesMatrix) -> ReflectionTuple {
    let n = s.n();
    let m = (0..n)
        .map(|i| {
            let mut mi = ComplexMatrix::identity(n);
            for j in 0..n {
                mi[(i, j)] = if j == i { -ONE } else { -s.sym(i, j) };
            }
            mi
        })
        .collect();
    ReflectionTuple { m }
}

/// `M_1 M_2 ⋯ M_n`.
pub fn coxeter_product(s: &StokesMatrix) -> ComplexMatrix {
    let refl = reflections_from_stokes(s);
    ComplexMatrix::product(s.n(), refl.m.iter())
}

fn trace_of(factors: &[&ComplexMatrix]) -> C64 {
    let n = factors[0].rows();
    let mut p = ComplexMatrix::identity(n);
    for f in factors {
        p = &p * f;
    }
    p.trace()
}

fn check_trace(closed: C64, direct: C64, tol: f64) -> Result<C64> {
    let difference = (closed - direct).norm();
    if difference > tol * closed.norm().max(1.0) {
        return Err(Error::Consistency { difference });
    }
    Ok(closed)
}

fn distinct(indices: &[usize], n: usize) -> Result<()> {
    for (a, &x) in indices.iter().enumerate() {
        if x >= n {
            return Err(Error::Index(format!("index {x} out of range for n = {n}")));
        }
        if indices[..a].contains(&x) {
            return Err(Error::Index(format!("indices {indices:?} must be pairwise distinct")));
        }
    }
    Ok(())
}

/// `Tr(M_i M_j) = n - 4 + s_ij²`, cross-checked against the matrix trace.
pub fn trace_pair(s: &StokesMatrix, i: usize, j: usize) -> Result<C64> {
    distinct(&[i, j], s.n())?;
    let closed = trace_pair_formula(s, i, j);
    let refl = reflections_from_stokes(s);
    check_trace(closed, trace_of(&[&refl.m[i], &refl.m[j]]), 1e-12)
}

/// `Tr(M_k M_i M_j M_i) = n - 4 + (s_kj - s_ij s_ik)²`.
pub fn trace_conjugated(s: &StokesMatrix, k: usize, i: usize, j: usize) -> Result<C64> {
    distinct(&[k, i, j], s.n())?;
    let closed = trace_conjugated_formula(s, k, i, j);
    let m = reflections_from_stokes(s).m;
    check_trace(closed, trace_of(&[&m[k], &m[i], &m[j], &m[i]]), 1e-12)
}

/// `Tr(M_i M_j M_k M_l)` for `i < j < k < l`.
pub fn trace_quadruple(s: &StokesMatrix, i: usize, j: usize, k: usize, l: usize) -> Result<C64> {
    distinct(&[i, j, k, l], s.n())?;
    if !(i < j && j < k && k < l) {
        return Err(Error::Index(format!("indices ({i}, {j}, {k}, {l}) must be increasing")));
    }
    let closed = trace_quadruple_formula(s, i, j, k, l);
    let m = reflections_from_stokes(s).m;
    check_trace(closed, trace_of(&[&m[i], &m[j], &m[k], &m[l]]), 1e-11)
}

/// `n - 4 + s_ij²`.
pub fn trace_pair_formula(s: &StokesMatrix, i: usize, j: usize) -> C64 {
    C64::new(s.n() as f64 - 4.0, 0.0) + s.sym(i, j) * s.sym(i, j)
}

/// `n - 4 + (s_kj - s_ij s_ik)²`.
pub fn trace_conjugated_formula(s: &StokesMatrix, k: usize, i: usize, j: usize) -> C64 {
    let t = s.sym(k, j) - s.sym(i, j) * s.sym(i, k);
    C64::new(s.n() as f64 - 4.0, 0.0) + t * t
}

/// Closed form of `Tr(M_i M_j M_k M_l)`, valid for `i < j < k < l`.
pub fn trace_quadruple_formula(s: &StokesMatrix, i: usize, j: usize, k: usize, l: usize) -> C64 {
    let x = |a, b| s.sym(a, b);
    let n = s.n() as f64;
    C64::new(n - 8.0, 0.0)
        + x(i, j) * x(i, j)
        + x(i, k) * x(i, k)
        + x(i, l) * x(i, l)
        + x(j, k) * x(j, k)
        + x(j, l) * x(j, l)
        + x(k, l) * x(k, l)
        - x(i, j) * x(i, k) * x(j, k)
        - x(i, k) * x(i, l) * x(k, l)
        - x(j, k) * x(j, l) * x(k, l)
        - x(i, j) * x(i, l) * x(j, l)
        + x(i, j) * x(i, l) * x(j, k) * x(k, l)
}

fn product_entry(a: &ComplexMatrix, b: &ComplexMatrix, r: usize, c: usize) -> C64 {
    (0..a.cols()).map(|k| a[(r, k)] * b[(k, c)]).sum()
}

fn delta(x: usize, y: usize) -> f64 {
    if x == y {
        1.0
    } else {
        0.0
    }
}

/// `{(M_i)_ab, (M_j)_cd}` with prefactor `kappa`.
pub fn ks_bracket_entry(
    m: &ReflectionTuple,
    i: usize,
    (a, b): (usize, usize),
    j: usize,
    (c, d): (usize, usize),
    kappa: C64,
) -> Result<C64> {
    let n = m.n();
    for x in [i, j, a, b, c, d] {
        if x >= n {
            return Err(Error::Index(format!("index {x} out of range for n = {n}")));
        }
    }
    Ok(ks_entry_unchecked(m, i, (a, b), j, (c, d), kappa))
}

fn ks_entry_unchecked(
    m: &ReflectionTuple,
    i: usize,
    (a, b): (usize, usize),
    j: usize,
    (c, d): (usize, usize),
    kappa: C64,
) -> C64 {
    if i > j {
        return -ks_entry_unchecked(m, j, (c, d), i, (a, b), kappa);
    }
    let (mi, mj) = (&m.m[i], &m.m[j]);
    if i < j {
        kappa
            * (product_entry(mj, mi, c, b) * delta(a, d) + product_entry(mi, mj, a, d) * delta(c, b)
                - mi[(c, b)] * mj[(a, d)]
                - mj[(c, b)] * mi[(a, d)])
    } else {
        kappa * (product_entry(mi, mi, c, b) * delta(a, d) - product_entry(mi, mi, a, d) * delta(c, b))
    }
}

/// `{Tr(M_i M_k), Tr(M_j M_l)}` expanded over matrix entries.
pub fn ks_trace_bracket(s: &StokesMatrix, i: usize, k: usize, j: usize, l: usize, kappa: C64) -> Result<C64> {
    let n = s.n();
    distinct(&[i, k], n)?;
    distinct(&[j, l], n)?;
    let refl = reflections_from_stokes(s);
    let m = &refl.m;
    let br = |x, ab, y, cd| ks_entry_unchecked(&refl, x, ab, y, cd, kappa);
    let mut total = ZERO;
    for a in 0..n {
        for b in 0..n {
            let (mi, mk) = (m[i][(a, b)], m[k][(b, a)]);
            if mi == ZERO && mk == ZERO {
                continue;
            }
            for c in 0..n {
                for d in 0..n {
                    let (mj, ml) = (m[j][(c, d)], m[l][(d, c)]);
                    if mj == ZERO && ml == ZERO {
                        continue;
                    }
                    total += mi * mj * br(k, (b, a), l, (d, c))
                        + mi * ml * br(k, (b, a), j, (c, d))
                        + mk * mj * br(i, (a, b), l, (d, c))
                        + mk * ml * br(i, (a, b), j, (c, d));
                }
            }
        }
    }
    Ok(total)
}

/// Closed form of [`ks_trace_bracket`] for increasing pairs `i < k`, `j < l`.
///
/// Returns `None` for index patterns without a closed form here.
pub fn ks_trace_bracket_closed(s: &StokesMatrix, i: usize, k: usize, j: usize, l: usize, kappa: C64) -> Option<C64> {
    let x = |a, b| s.sym(a, b);
    if i == j && k != l {
        let sign = if k < l { 1.0 } else { -1.0 };
        let (k, l) = (k.min(l), k.max(l));
        if i < k {
            return Some(sign * 2.0 * kappa * x(i, k) * x(i, l) * (2.0 * x(k, l) - x(i, k) * x(i, l)));
        }
        return None;
    }
    if [i, k, j, l].iter().collect::<std::collections::BTreeSet<_>>().len() < 4 {
        return None;
    }
    if i < k && k < j && j < l {
        return Some(ZERO);
    }
    if i < j && j < l && l < k {
        return Some(ZERO);
    }
    if i < j && j < k && k < l {
        return Some(4.0 * kappa * x(i, k) * x(j, l) * (x(i, j) * x(k, l) - x(i, l) * x(k, j)));
    }
    None
}
