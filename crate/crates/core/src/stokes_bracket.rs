//! The quadratic Poisson bracket on Stokes matrices, its Casimirs, and the
//! braid group action.
//!
//! For `p = (i, k)` and `q = (j, l)` with `p < q` lexicographically, the
//! bracket `{s_p, s_q}` is
//!
//! | pattern                  | value                                 |
//! |--------------------------|---------------------------------------|
//! | `i = j`, `k < l`         | `κ/2 (2 s_kl - s_ik s_il)`            |
//! | `i < j`, `k = l`         | `κ/2 (2 s_ij - s_ik s_jk)`            |
//! | `i < k = j < l`          | `κ/2 (s_ik s_kl - 2 s_il)`            |
//! | `i < k < j < l`          | `0`                                   |
//! | `i < j < l < k`          | `0`                                   |
//! | `i < j < k < l`          | `κ (s_ij s_kl - s_il s_kj)`           |
//!
//! with `κ = iπ` by default. The opposite order follows by antisymmetry.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{char_poly, ComplexMatrix, C64, ONE, ZERO};
use crate::pairs::Pair;
use crate::poly::Poly;
use crate::reflection::{unitriangular_defect, StokesMatrix};

pub use crate::reflection::KAPPA_DEFAULT as KAPPA;

/// Index pattern of a coordinate pair `(p, q)`, read after ordering `p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    Equal,
    SharedFirst,
    SharedSecond,
    Chain,
    Separated,
    Nested,
    Crossed,
}

/// Returns the pattern and the sign picked up by ordering the pair.
pub fn classify(p: Pair, q: Pair) -> (Pattern, f64) {
    if p == q {
        return (Pattern::Equal, 1.0);
    }
    let (p, q, sign) = if p < q { (p, q, 1.0) } else { (q, p, -1.0) };
    let (i, k, j, l) = (p.i, p.j, q.i, q.j);
    let pattern = if i == j {
        Pattern::SharedFirst
    } else if k == l {
        Pattern::SharedSecond
    } else if k == j {
        Pattern::Chain
    } else if k < j {
        Pattern::Separated
    } else if l < k {
        Pattern::Nested
    } else {
        Pattern::Crossed
    };
    (pattern, sign)
}

/// The bracket as `Σ c · Π s_pairs`, coefficients relative to `κ`.
fn bracket_terms(p: Pair, q: Pair) -> Vec<(f64, Vec<(usize, usize)>)> {
    let (pattern, sign) = classify(p, q);
    let (p, q) = if p < q { (p, q) } else { (q, p) };
    let (i, k, j, l) = (p.i, p.j, q.i, q.j);
    let terms = match pattern {
        Pattern::Equal | Pattern::Separated | Pattern::Nested => vec![],
        Pattern::SharedFirst => vec![(1.0, vec![(k, l)]), (-0.5, vec![(i, k), (i, l)])],
        Pattern::SharedSecond => vec![(1.0, vec![(i, j)]), (-0.5, vec![(i, k), (j, k)])],
        Pattern::Chain => vec![(0.5, vec![(i, k), (k, l)]), (-1.0, vec![(i, l)])],
        Pattern::Crossed => vec![(1.0, vec![(i, j), (k, l)]), (-1.0, vec![(i, l), (k, j)])],
    };
    terms.into_iter().map(|(c, f)| (sign * c, f)).collect()
}

fn check_pair(p: Pair, n: usize) -> Result<()> {
    p.check(n)
}

/// `{s_p, s_q}` at `S`.
pub fn stokes_bracket(s: &StokesMatrix, p: Pair, q: Pair, kappa: C64) -> Result<C64> {
    check_pair(p, s.n())?;
    check_pair(q, s.n())?;
    Ok(bracket_terms(p, q)
        .into_iter()
        .map(|(c, factors)| factors.iter().fold(kappa * c, |acc, &(a, b)| acc * s.sym(a, b)))
        .sum())
}

/// `{s_p, s_q}` as a polynomial in the coordinates (variable = pair index).
pub fn stokes_bracket_poly(n: usize, p: Pair, q: Pair, kappa: C64) -> Result<Poly> {
    check_pair(p, n)?;
    check_pair(q, n)?;
    let mut out = Poly::zero();
    for (c, factors) in bracket_terms(p, q) {
        let mono = factors.iter().map(|&(a, b)| Pair { i: a.min(b), j: a.max(b) }.index(n)).collect();
        out.add_term(mono, kappa * c);
    }
    Ok(out)
}

/// All brackets `{s_p, s_q}`, stored once per unordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    n: usize,
    entries: BTreeMap<(Pair, Pair), C64>,
}

impl BracketTable {
    pub fn new(n: usize) -> Self {
        BracketTable { n, entries: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stores `{s_p, s_q} = value`; the reverse order reads as `-value`.
    pub fn insert(&mut self, p: Pair, q: Pair, value: C64) {
        if p < q {
            self.entries.insert((p, q), value);
        } else if q < p {
            self.entries.insert((q, p), -value);
        }
    }

    pub fn get(&self, p: Pair, q: Pair) -> C64 {
        if p == q {
            return ZERO;
        }
        if p < q {
            self.entries.get(&(p, q)).copied().unwrap_or(ZERO)
        } else {
            -self.entries.get(&(q, p)).copied().unwrap_or(ZERO)
        }
    }

    /// Entries with `p < q`.
    pub fn entries(&self) -> impl Iterator<Item = (Pair, Pair, C64)> + '_ {
        self.entries.iter().map(|(&(p, q), &v)| (p, q, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Max `|self - other| / max(|other|, floor)` over entries.
    pub fn relative_distance(&self, other: &BracketTable, floor: f64) -> f64 {
        let mut worst = 0.0f64;
        for p in Pair::all(self.n) {
            for q in Pair::all(self.n) {
                if p < q {
                    let (a, b) = (self.get(p, q), other.get(p, q));
                    worst = worst.max((a - b).norm() / b.norm().max(floor));
                }
            }
        }
        worst
    }

    pub fn scale(&self, k: C64) -> BracketTable {
        BracketTable { n: self.n, entries: self.entries.iter().map(|(key, v)| (*key, v * k)).collect() }
    }
}

pub fn bracket_table(s: &StokesMatrix, kappa: C64) -> BracketTable {
    let n = s.n();
    let mut t = BracketTable::new(n);
    for p in Pair::all(n) {
        for q in Pair::all(n) {
            if p < q {
                t.insert(p, q, stokes_bracket(s, p, q, kappa).expect("pairs are in range"));
            }
        }
    }
    t
}

/// `Σ_{p,q} ∂f/∂s_p ∂g/∂s_q {s_p, s_q}`.
pub fn poisson_eval(s: &StokesMatrix, grad_f: &[C64], grad_g: &[C64], kappa: C64) -> Result<C64> {
    let n = s.n();
    let m = Pair::count(n);
    if grad_f.len() != m || grad_g.len() != m {
        return Err(Error::Dimension(format!("gradients must have {m} entries")));
    }
    let pairs: Vec<Pair> = Pair::all(n).collect();
    let mut acc = ZERO;
    for (a, &p) in pairs.iter().enumerate() {
        if grad_f[a] == ZERO {
            continue;
        }
        for (b, &q) in pairs.iter().enumerate() {
            if grad_g[b] != ZERO && p != q {
                acc += grad_f[a] * grad_g[b] * stokes_bracket(s, p, q, kappa)?;
            }
        }
    }
    Ok(acc)
}

/// Symbolic bracket polynomials for a fixed dimension.
#[derive(Clone, Debug)]
pub struct BracketPolys {
    n: usize,
    table: Vec<Vec<Poly>>,
}

impl BracketPolys {
    pub fn new(n: usize, kappa: C64) -> Self {
        let pairs: Vec<Pair> = Pair::all(n).collect();
        let table = pairs
            .iter()
            .map(|&p| pairs.iter().map(|&q| stokes_bracket_poly(n, p, q, kappa).expect("pairs in range")).collect())
            .collect();
        BracketPolys { n, table }
    }

    pub fn get(&self, p: usize, q: usize) -> &Poly {
        &self.table[p][q]
    }

    /// `{f, g}` for polynomial `f`, `g`.
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Poly {
        let m = Pair::count(self.n);
        let df: Vec<Poly> = (0..m).map(|v| f.derivative(v)).collect();
        let dg: Vec<Poly> = (0..m).map(|v| g.derivative(v)).collect();
        let mut out = Poly::zero();
        for (p, fp) in df.iter().enumerate() {
            if fp.is_zero() {
                continue;
            }
            for (q, gq) in dg.iter().enumerate() {
                if gq.is_zero() || self.table[p][q].is_zero() {
                    continue;
                }
                out = &out + &(&(fp * gq) * &self.table[p][q]);
            }
        }
        out
    }

    /// The cyclic sum of iterated brackets of three coordinates, as a polynomial.
    pub fn jacobi_poly(&self, p: usize, q: usize, r: usize) -> Poly {
        let v = |k| Poly::var(k);
        let t1 = self.bracket(&self.table[p][q], &v(r));
        let t2 = self.bracket(&self.table[q][r], &v(p));
        let t3 = self.bracket(&self.table[r][p], &v(q));
        &(&t1 + &t2) + &t3
    }
}

/// Max modulus of the Jacobi cyclic sum over all coordinate triples at `S`,
/// with inner brackets differentiated exactly.
pub fn jacobi_residual(s: &StokesMatrix, kappa: C64) -> f64 {
    let n = s.n();
    let m = Pair::count(n);
    if m < 3 {
        return 0.0;
    }
    let polys = BracketPolys::new(n, kappa);
    let point = s.coords();
    let value: Vec<Vec<C64>> =
        (0..m).map(|p| (0..m).map(|q| polys.get(p, q).eval(point)).collect()).collect();
    // grad[p][q][t] = ∂{s_p, s_q}/∂s_t at S
    let grad: Vec<Vec<Vec<C64>>> = (0..m)
        .map(|p| (0..m).map(|q| (0..m).map(|t| polys.get(p, q).derivative(t).eval(point)).collect()).collect())
        .collect();
    let inner = |p: usize, q: usize, r: usize| -> C64 { (0..m).map(|t| grad[p][q][t] * value[t][r]).sum() };
    let mut worst = 0.0f64;
    for p in 0..m {
        for q in p + 1..m {
            for r in q + 1..m {
                let cyc = inner(p, q, r) + inner(q, r, p) + inner(r, p, q);
                worst = worst.max(cyc.norm());
            }
        }
    }
    worst
}

/// Nontrivial coefficients `c_1..c_{n-1}` of `det(S⁻¹Sᵀ - μ)`.
pub fn casimirs(s: &StokesMatrix) -> Result<Vec<C64>> {
    let coeffs = char_poly(&s.monodromy_at_infinity()?)?;
    let n = s.n();
    Ok(coeffs[1..n].to_vec())
}

/// Polynomial `C₁` for `n = 4` in variables `(p, q, r, x, y, z)` = pair indices 0..6.
pub fn casimir_c1_poly() -> Poly {
    let [p, q, r, x, y, z] = coordinates4();
    let mut c = Poly::real(-4.0);
    for v in [&p, &q, &r, &x, &y, &z] {
        c = &c + &(v * v);
    }
    for t in [mono(&[&p, &q, &x]), mono(&[&p, &r, &y]), mono(&[&q, &r, &z]), mono(&[&x, &y, &z])] {
        c = &c - &t;
    }
    &c + &mono(&[&p, &r, &x, &z])
}

/// Polynomial `C₂` for `n = 4`: the `μ²` coefficient of `det(S⁻¹Sᵀ - μ)`.
pub fn casimir_c2_poly() -> Poly {
    let [p, q, r, x, y, z] = coordinates4();
    let mut c = Poly::real(6.0);
    for v in [&p, &q, &r, &x, &y, &z] {
        c = &c - &(v * v).scale(C64::new(2.0, 0.0));
    }
    for t in [mono(&[&p, &q, &x]), mono(&[&p, &r, &y]), mono(&[&q, &r, &z]), mono(&[&x, &y, &z])] {
        c = &c + &t.scale(C64::new(2.0, 0.0));
    }
    for t in [mono(&[&p, &q, &y, &z]), mono(&[&q, &r, &x, &y])] {
        c = &c - &t.scale(C64::new(2.0, 0.0));
    }
    for t in [mono(&[&p, &p, &z, &z]), mono(&[&q, &q, &y, &y]), mono(&[&r, &r, &x, &x])] {
        c = &c + &t;
    }
    c
}

fn coordinates4() -> [Poly; 6] {
    [Poly::var(0), Poly::var(1), Poly::var(2), Poly::var(3), Poly::var(4), Poly::var(5)]
}

fn mono(factors: &[&Poly]) -> Poly {
    factors.iter().fold(Poly::real(1.0), |acc, f| &acc * *f)
}

/// `(C₁, C₂)` for `n = 4`.
pub fn casimirs_n4_explicit(s: &StokesMatrix) -> Result<(C64, C64)> {
    if s.n() != 4 {
        return Err(Error::Dimension(format!("explicit Casimirs need n = 4, got {}", s.n())));
    }
    Ok((casimir_c1_poly().eval(s.coords()), casimir_c2_poly().eval(s.coords())))
}

/// Central-difference gradient of `f` in the Stokes coordinates, step
/// `1e-6 (1 + |s_p|)` per coordinate.
pub fn fd_gradient(s: &StokesMatrix, f: impl Fn(&StokesMatrix) -> Result<C64>) -> Result<Vec<C64>> {
    let m = s.coords().len();
    let mut grad = Vec::with_capacity(m);
    for k in 0..m {
        let p = Pair::from_index(s.n(), k);
        let h = 1e-6 * (1.0 + s.coord(p).norm());
        let mut plus = s.clone();
        plus.set(p, s.coord(p) + h);
        let mut minus = s.clone();
        minus.set(p, s.coord(p) - h);
        grad.push((f(&plus)? - f(&minus)?) / (2.0 * h));
    }
    Ok(grad)
}

/// Max over coordinates `s_p` and Casimir coefficients `c` of `|{c, s_p}|`
/// with finite-difference gradients of `c`.
pub fn casimir_residual(s: &StokesMatrix, kappa: C64) -> Result<f64> {
    let n = s.n();
    let m = Pair::count(n);
    let mut worst = 0.0f64;
    for k in 0..n.saturating_sub(1) {
        let grad = fd_gradient(s, |t| Ok(casimirs(t)?[k]))?;
        for p in 0..m {
            let mut unit = vec![ZERO; m];
            unit[p] = ONE;
            worst = worst.max(poisson_eval(s, &grad, &unit, kappa)?.norm());
        }
    }
    Ok(worst)
}

/// A braid generator `σ_{index+1}` (acting on rows `index`, `index + 1`) or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BraidLetter {
    pub index: usize,
    pub inverse: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BraidWord {
    pub letters: Vec<BraidLetter>,
}

impl BraidWord {
    /// Letters as signed 1-based generator numbers, negative for inverses.
    pub fn from_signed(gens: &[i64]) -> Result<Self> {
        let mut letters = Vec::with_capacity(gens.len());
        for &g in gens {
            if g == 0 {
                return Err(Error::Index("braid generator 0 does not exist".into()));
            }
            letters.push(BraidLetter { index: (g.unsigned_abs() - 1) as usize, inverse: g < 0 });
        }
        Ok(BraidWord { letters })
    }

    pub fn check(&self, n: usize) -> Result<()> {
        for l in &self.letters {
            if l.index + 1 >= n {
                return Err(Error::Index(format!(
                    "braid generator {} out of range for n = {n}",
                    l.index + 1
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

fn k_matrix(n: usize, i: usize, t: C64) -> ComplexMatrix {
    let mut k = ComplexMatrix::identity(n);
    k[(i, i)] = t;
    k[(i, i + 1)] = ONE;
    k[(i + 1, i)] = ONE;
    k[(i + 1, i + 1)] = ZERO;
    k
}

fn k_inverse(n: usize, i: usize, t: C64) -> ComplexMatrix {
    let mut k = ComplexMatrix::identity(n);
    k[(i, i)] = ZERO;
    k[(i, i + 1)] = ONE;
    k[(i + 1, i)] = ONE;
    k[(i + 1, i + 1)] = -t;
    k
}

const BRAID_TOL: f64 = 1e-10;

/// `σ_i: S ↦ K_i S K_i` with `K_i` the identity except for the block
/// `[[-s_{i,i+1}, 1], [1, 0]]` on rows and columns `i, i+1`.
///
/// The inverse uses `S = K(s')⁻¹ S' K(s')⁻¹` with `s' = s'_{i,i+1}`, since
/// `σ_i` negates that entry.
pub fn braid_generator(s: &StokesMatrix, i: usize, inverse: bool) -> Result<StokesMatrix> {
    let n = s.n();
    if i + 1 >= n {
        return Err(Error::Index(format!("braid generator {} out of range for n = {n}", i + 1)));
    }
    let t = s.sym(i, i + 1);
    let m = s.matrix();
    let out = if inverse {
        let k = k_inverse(n, i, t);
        &(&k * &m) * &k
    } else {
        let k = k_matrix(n, i, -t);
        &(&k * &m) * &k
    };
    let residual = unitriangular_defect(&out);
    if residual > BRAID_TOL * (1.0 + m.max_abs()) {
        return Err(Error::NotUnitriangular { residual });
    }
    StokesMatrix::from_matrix_tol(&out, f64::INFINITY)
}

/// Applies the letters of `w` left to right.
pub fn braid_apply(s: &StokesMatrix, w: &BraidWord) -> Result<StokesMatrix> {
    w.check(s.n())?;
    let mut cur = s.clone();
    for l in &w.letters {
        cur = braid_generator(&cur, l.index, l.inverse)?;
    }
    Ok(cur)
}

/// Component maps of `σ_i` as polynomials in the coordinates, together with
/// the largest coefficient of the lower-triangle and diagonal defects (zero
/// when the action is exactly unitriangular).
pub fn braid_generator_polys(n: usize, i: usize) -> Result<(Vec<Poly>, f64)> {
    if i + 1 >= n {
        return Err(Error::Index(format!("braid generator {} out of range for n = {n}", i + 1)));
    }
    let entry = |a: usize, b: usize| -> Poly {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Poly::var(Pair { i: a, j: b }.index(n)),
            std::cmp::Ordering::Equal => Poly::real(1.0),
            std::cmp::Ordering::Greater => Poly::zero(),
        }
    };
    let t = -Poly::var(Pair { i, j: i + 1 }.index(n));
    let k = |a: usize, b: usize| -> Poly {
        if a == i && b == i {
            t.clone()
        } else if (a == i && b == i + 1) || (a == i + 1 && b == i) {
            Poly::real(1.0)
        } else if a == i + 1 && b == i + 1 {
            Poly::zero()
        } else if a == b {
            Poly::real(1.0)
        } else {
            Poly::zero()
        }
    };
    let mut full = vec![vec![Poly::zero(); n]; n];
    for (a, row) in full.iter_mut().enumerate() {
        for (d, cell) in row.iter_mut().enumerate() {
            let mut acc = Poly::zero();
            for b in 0..n {
                let kab = k(a, b);
                if kab.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let kcd = k(c, d);
                    if kcd.is_zero() {
                        continue;
                    }
                    acc = &acc + &(&(&kab * &entry(b, c)) * &kcd);
                }
            }
            *cell = acc;
        }
    }
    let mut defect = 0.0f64;
    for (a, row) in full.iter().enumerate() {
        defect = defect.max((&row[a] - &Poly::real(1.0)).max_coeff());
        for cell in &row[..a] {
            defect = defect.max(cell.max_coeff());
        }
    }
    let comps = Pair::all(n).map(|p| full[p.i][p.j].clone()).collect();
    Ok((comps, defect))
}

/// Max over generators and coordinate pairs of the defect in
/// `Σ ∂σ(s_p)/∂s_a ∂σ(s_q)/∂s_b {s_a, s_b}(S) = {s_p, s_q}(σ(S))`.
pub fn braid_invariance_residual(s: &StokesMatrix, kappa: C64) -> Result<f64> {
    let n = s.n();
    let m = Pair::count(n);
    let point = s.coords();
    let here = bracket_table(s, kappa);
    let pairs: Vec<Pair> = Pair::all(n).collect();
    let mut worst = 0.0f64;
    for i in 0..n.saturating_sub(1) {
        let (comps, _) = braid_generator_polys(n, i)?;
        let image = braid_generator(s, i, false)?;
        let there = bracket_table(&image, kappa);
        let jac: Vec<Vec<C64>> =
            comps.iter().map(|c| (0..m).map(|v| c.derivative(v).eval(point)).collect()).collect();
        for (a, &p) in pairs.iter().enumerate() {
            for (b, &q) in pairs.iter().enumerate().skip(a + 1) {
                let mut push = ZERO;
                for (x, &px) in pairs.iter().enumerate() {
                    if jac[a][x] == ZERO {
                        continue;
                    }
                    for (y, &qy) in pairs.iter().enumerate() {
                        if jac[b][y] != ZERO {
                            push += jac[a][x] * jac[b][y] * here.get(px, qy);
                        }
                    }
                }
                worst = worst.max((push - there.get(p, q)).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::random;

    const HALF_I_PI: C64 = C64::new(0.0, std::f64::consts::FRAC_PI_2);

    fn pr(i: usize, j: usize) -> Pair {
        Pair::new(i, j).unwrap()
    }

    /// Builds `Σ c · word` where each letter of `word` names a variable.
    fn named(names: &[char], terms: &[(f64, &str)]) -> Poly {
        let mut out = Poly::zero();
        for &(c, word) in terms {
            let mono = word.chars().map(|ch| names.iter().position(|&n| n == ch).unwrap()).collect();
            out.add_term(mono, C64::new(c, 0.0));
        }
        out
    }

    fn quad(terms: &[(f64, &str)]) -> Poly {
        named(&['p', 'q', 'r', 'x', 'y', 'z'], terms)
    }

    #[test]
    fn classifier_covers_all_patterns() {
        assert_eq!(classify(pr(0, 1), pr(0, 1)).0, Pattern::Equal);
        assert_eq!(classify(pr(0, 1), pr(0, 2)), (Pattern::SharedFirst, 1.0));
        assert_eq!(classify(pr(0, 2), pr(0, 1)), (Pattern::SharedFirst, -1.0));
        assert_eq!(classify(pr(0, 2), pr(1, 2)).0, Pattern::SharedSecond);
        assert_eq!(classify(pr(0, 1), pr(1, 2)).0, Pattern::Chain);
        assert_eq!(classify(pr(0, 1), pr(2, 3)).0, Pattern::Separated);
        assert_eq!(classify(pr(0, 3), pr(1, 2)).0, Pattern::Nested);
        assert_eq!(classify(pr(0, 2), pr(1, 3)).0, Pattern::Crossed);
    }

    #[test]
    fn three_by_three_matches_cyclic_display() {
        // x = s12, y = s13, z = s23
        let (x, y, z) = (pr(0, 1), pr(0, 2), pr(1, 2));
        let xyz = |terms: &[(f64, &str)]| named(&['x', 'y', 'z'], terms).scale(HALF_I_PI);
        assert_eq!(stokes_bracket_poly(3, x, y, KAPPA).unwrap(), xyz(&[(2.0, "z"), (-1.0, "xy")]));
        assert_eq!(stokes_bracket_poly(3, y, z, KAPPA).unwrap(), xyz(&[(2.0, "x"), (-1.0, "yz")]));
        assert_eq!(stokes_bracket_poly(3, z, x, KAPPA).unwrap(), xyz(&[(2.0, "y"), (-1.0, "zx")]));
    }

    #[test]
    fn four_by_four_matches_display() {
        let (p, q, r, x, y, z) = (pr(0, 1), pr(0, 2), pr(0, 3), pr(1, 2), pr(1, 3), pr(2, 3));
        let expected: Vec<(Pair, Pair, Poly)> = vec![
            (p, q, quad(&[(2.0, "x"), (-1.0, "pq")])),
            (p, r, quad(&[(2.0, "y"), (-1.0, "pr")])),
            (q, r, quad(&[(2.0, "z"), (-1.0, "qr")])),
            (x, y, quad(&[(2.0, "z"), (-1.0, "xy")])),
            (y, z, quad(&[(2.0, "x"), (-1.0, "yz")])),
            (z, x, quad(&[(2.0, "y"), (-1.0, "zx")])),
            (x, p, quad(&[(2.0, "q"), (-1.0, "xp")])),
            (y, p, quad(&[(2.0, "r"), (-1.0, "yp")])),
            (p, z, Poly::zero()),
            (q, x, quad(&[(2.0, "p"), (-1.0, "qx")])),
            (q, y, quad(&[(2.0, "pz"), (-2.0, "rx")])),
            (z, q, quad(&[(2.0, "r"), (-1.0, "zq")])),
            (r, x, Poly::zero()),
            (r, y, quad(&[(2.0, "p"), (-1.0, "ry")])),
            (r, z, quad(&[(2.0, "q"), (-1.0, "rz")])),
        ];
        assert_eq!(expected.len(), 15);
        for (a, b, e) in expected {
            let got = stokes_bracket_poly(4, a, b, C64::new(2.0, 0.0)).unwrap();
            assert_eq!(got, e, "{{{a}, {b}}}");
        }
        let s = random::stokes(4, 0.5, &mut random::seeded(1));
        let got = stokes_bracket(&s, q, y, KAPPA).unwrap();
        let want = KAPPA * (s.coord(p) * s.coord(z) - s.coord(r) * s.coord(x));
        assert!((got - want).norm() < 1e-15);
        assert_eq!(stokes_bracket(&s, p, z, KAPPA).unwrap(), ZERO);
    }

    #[test]
    fn table_and_eval() {
        assert!(bracket_table(&StokesMatrix::identity(2), KAPPA).is_empty());
        let t = bracket_table(&StokesMatrix::identity(3), KAPPA);
        assert_eq!(t.len(), 3);
        assert!(t.entries().all(|(_, _, v)| v == ZERO));

        let s = random::stokes(4, 0.5, &mut random::seeded(2));
        let t = bracket_table(&s, KAPPA);
        for p in Pair::all(4) {
            for q in Pair::all(4) {
                assert_eq!(t.get(p, q), -t.get(q, p));
                let mut e1 = vec![ZERO; 6];
                let mut e2 = vec![ZERO; 6];
                e1[p.index(4)] = ONE;
                e2[q.index(4)] = ONE;
                assert_eq!(poisson_eval(&s, &e1, &e2, KAPPA).unwrap(), t.get(p, q));
            }
        }
        let g: Vec<C64> = (0..6).map(|k| c(k as f64, 1.0)).collect();
        assert!(poisson_eval(&s, &g, &g, KAPPA).unwrap().norm() < 1e-14);
    }

    #[test]
    fn jacobi_is_exact_symbolically() {
        for n in 3..=4 {
            let polys = BracketPolys::new(n, ONE);
            let m = Pair::count(n);
            for p in 0..m {
                for q in p + 1..m {
                    for r in q + 1..m {
                        assert!(polys.jacobi_poly(p, q, r).is_zero(), "n={n} ({p},{q},{r})");
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_numeric() {
        assert_eq!(jacobi_residual(&StokesMatrix::identity(2), KAPPA), 0.0);
        let mut rng = random::seeded(3);
        for _ in 0..20 {
            let s = random::stokes(3, 1.0, &mut rng);
            assert!(jacobi_residual(&s, KAPPA) < 1e-11);
        }
        for _ in 0..5 {
            let s = random::stokes(5, 1.0, &mut rng);
            assert!(jacobi_residual(&s, KAPPA) < 1e-10);
        }
    }

    #[test]
    fn casimir_values() {
        let sv = c(0.4, -0.2);
        let s = StokesMatrix::from_coords(2, vec![sv]).unwrap();
        let cs = casimirs(&s).unwrap();
        assert!((cs[0] + (C64::new(2.0, 0.0) - sv * sv)).norm() < 1e-14);
        let id = casimirs(&StokesMatrix::identity(4)).unwrap();
        // (1 - μ)^4 = 1 - 4μ + 6μ² - 4μ³ + μ⁴
        let expected = [-4.0, 6.0, -4.0];
        for (a, b) in id.iter().zip(expected) {
            assert!((a - C64::new(b, 0.0)).norm() < 1e-14);
        }
        let (c1, c2) = casimirs_n4_explicit(&StokesMatrix::identity(4)).unwrap();
        assert_eq!((c1, c2), (c(-4.0, 0.0), c(6.0, 0.0)));
        assert!(casimirs_n4_explicit(&StokesMatrix::identity(3)).is_err());
    }

    #[test]
    fn explicit_casimirs_are_char_poly_coefficients() {
        let mut rng = random::seeded(4);
        for _ in 0..10 {
            let s = random::stokes(4, 1.0, &mut rng);
            let cs = casimirs(&s).unwrap();
            let (c1, c2) = casimirs_n4_explicit(&s).unwrap();
            assert!((cs[2] - c1).norm() < 1e-12);
            assert!((cs[0] - c1).norm() < 1e-12);
            assert!((cs[1] - c2).norm() < 1e-12);
        }
    }

    #[test]
    fn explicit_casimirs_commute_symbolically() {
        let polys = BracketPolys::new(4, ONE);
        for c in [casimir_c1_poly(), casimir_c2_poly()] {
            for v in 0..6 {
                assert!(polys.bracket(&c, &Poly::var(v)).is_zero());
            }
        }
    }

    #[test]
    fn printed_second_casimir_variant_does_not_commute() {
        // cubic terms with the opposite sign and p²r² in place of p²z²
        let mut wrong = casimir_c2_poly();
        for t in ["pqx", "pry", "qrz", "xyz"] {
            wrong = &wrong - &quad(&[(4.0, t)]);
        }
        wrong = &(&wrong - &quad(&[(1.0, "ppzz")])) + &quad(&[(1.0, "pprr")]);
        let polys = BracketPolys::new(4, ONE);
        assert!((0..6).any(|v| !polys.bracket(&wrong, &Poly::var(v)).is_zero()));
    }

    #[test]
    fn casimirs_commute_numerically() {
        let mut rng = random::seeded(5);
        for n in 3..=5 {
            let s = random::stokes(n, 0.5, &mut rng);
            assert!(casimir_residual(&s, KAPPA).unwrap() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn braid_component_maps_for_n4() {
        let (comps, defect) = braid_generator_polys(4, 0).unwrap();
        assert_eq!(defect, 0.0);
        let expected = [
            quad(&[(-1.0, "p")]),
            quad(&[(1.0, "x"), (-1.0, "pq")]),
            quad(&[(1.0, "y"), (-1.0, "pr")]),
            quad(&[(1.0, "q")]),
            quad(&[(1.0, "r")]),
            quad(&[(1.0, "z")]),
        ];
        assert_eq!(comps, expected);
        let (comps, _) = braid_generator_polys(4, 1).unwrap();
        let expected = [
            quad(&[(1.0, "q"), (-1.0, "px")]),
            quad(&[(1.0, "p")]),
            quad(&[(1.0, "r")]),
            quad(&[(-1.0, "x")]),
            quad(&[(1.0, "z"), (-1.0, "xy")]),
            quad(&[(1.0, "y")]),
        ];
        assert_eq!(comps, expected);
        let (comps, _) = braid_generator_polys(4, 2).unwrap();
        let expected = [
            quad(&[(1.0, "p")]),
            quad(&[(1.0, "r"), (-1.0, "qz")]),
            quad(&[(1.0, "q")]),
            quad(&[(1.0, "y"), (-1.0, "xz")]),
            quad(&[(1.0, "x")]),
            quad(&[(-1.0, "z")]),
        ];
        assert_eq!(comps, expected);
    }

    #[test]
    fn braid_round_trip_and_relations() {
        let mut rng = random::seeded(6);
        for _ in 0..50 {
            let s = random::stokes(4, 0.5, &mut rng);
            assert_eq!(braid_generator(&StokesMatrix::identity(4), 1, false).unwrap(), StokesMatrix::identity(4));
            for i in 0..3 {
                let back = braid_generator(&braid_generator(&s, i, false).unwrap(), i, true).unwrap();
                assert!(back.distance(&s) < 1e-12);
                let back = braid_generator(&braid_generator(&s, i, true).unwrap(), i, false).unwrap();
                assert!(back.distance(&s) < 1e-12);
            }
            let a = braid_apply(&s, &BraidWord::from_signed(&[1, 2, 1]).unwrap()).unwrap();
            let b = braid_apply(&s, &BraidWord::from_signed(&[2, 1, 2]).unwrap()).unwrap();
            assert!(a.distance(&b) < 1e-11);
        }
        let s = random::stokes(5, 0.5, &mut rng);
        let a = braid_apply(&s, &BraidWord::from_signed(&[1, 3]).unwrap()).unwrap();
        let b = braid_apply(&s, &BraidWord::from_signed(&[3, 1]).unwrap()).unwrap();
        assert!(a.distance(&b) < 1e-12);
        assert_eq!(braid_apply(&s, &BraidWord::default()).unwrap(), s);
        assert!(braid_apply(&s, &BraidWord::from_signed(&[5]).unwrap()).is_err());
        assert!(BraidWord::from_signed(&[0]).is_err());
    }

    #[test]
    fn braids_preserve_spectrum_and_bracket() {
        let mut rng = random::seeded(7);
        for n in 3..=5 {
            let s = random::stokes(n, 0.5, &mut rng);
            let c0 = casimirs(&s).unwrap();
            for i in 0..n - 1 {
                let c1 = casimirs(&braid_generator(&s, i, false).unwrap()).unwrap();
                for (a, b) in c0.iter().zip(&c1) {
                    assert!((a - b).norm() < 1e-11);
                }
            }
        }
        let s = random::stokes(4, 0.5, &mut rng);
        assert!(braid_invariance_residual(&s, KAPPA).unwrap() < 1e-9);
    }
}
