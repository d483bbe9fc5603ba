//! The linear Poisson structure on so(n), the isomonodromic Hamiltonians
//! `H_i` and the Lax form of the deformation equations.
//!
//! Coordinates of a skew matrix `V` are its strictly upper entries `v_ij`.
//! Their bracket is
//!
//! ```text
//! {v_ab, v_cd} = v_ad δ_bc + v_bc δ_ad - v_bd δ_ac - v_ac δ_bd
//! ```
//!
//! with `v_ba = -v_ab`. With `Γ₁ = (v_ij / (u_j - u_i))` and `V_i = [Γ₁, E_i]`
//! the deformation equations read `∂V/∂u_i = [V_i, V]`. This is the
//! orientation compatible with `∂Y/∂u_i = (z E_i - V_i) Y`, and it coincides
//! with the Hamiltonian vector field `{V, H_i}` for
//! `H_i = ½ Σ_{j≠i} v_ij² / (u_i - u_j)`.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, ComplexMatrix, C64, ZERO};
use crate::pairs::Pair;
use crate::poly::LinearForm;

pub const TOL_RESONANCE: f64 = 1e-6;

/// A skew-symmetric matrix stored through its strictly upper coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewSystem {
    n: usize,
    v: Vec<C64>,
}

impl SkewSystem {
    pub fn zeros(n: usize) -> Self {
        SkewSystem { n, v: vec![ZERO; Pair::count(n)] }
    }

    /// Coordinates in lexicographic pair order.
    pub fn from_coords(n: usize, coords: Vec<C64>) -> Result<Self> {
        if coords.len() != Pair::count(n) {
            return Err(Error::Dimension(format!(
                "skew system of size {n} needs {} coordinates, got {}",
                Pair::count(n),
                coords.len()
            )));
        }
        if let Some(k) = coords.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let p = Pair::from_index(n, k);
            return Err(Error::NonFinite { row: p.i, col: p.j });
        }
        Ok(SkewSystem { n, v: coords })
    }

    /// Reads the upper triangle of `m`, requiring `m` to be skew within `tol`.
    pub fn from_matrix(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        let n = m.require_square("skew system")?;
        if !m.is_finite() {
            return Err(Error::Invalid("skew matrix has non-finite entries".into()));
        }
        for i in 0..n {
            if m[(i, i)].norm() > tol {
                return Err(Error::Invalid(format!("diagonal entry ({i}, {i}) of a skew matrix is nonzero")));
            }
            for j in i + 1..n {
                if (m[(i, j)] + m[(j, i)]).norm() > tol {
                    return Err(Error::Invalid(format!("entries ({i}, {j}) and ({j}, {i}) are not opposite")));
                }
            }
        }
        Ok(SkewSystem { n, v: Pair::all(n).map(|p| m[(p.i, p.j)]).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[C64] {
        &self.v
    }

    pub fn coord(&self, p: Pair) -> C64 {
        self.v[p.index(self.n)]
    }

    pub fn set(&mut self, p: Pair, value: C64) {
        let k = p.index(self.n);
        self.v[k] = value;
    }

    /// Full-matrix entry `v_ab` with `v_ba = -v_ab` and zero diagonal.
    pub fn get(&self, a: usize, b: usize) -> C64 {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => self.v[Pair { i: a, j: b }.index(self.n)],
            std::cmp::Ordering::Greater => -self.v[Pair { i: b, j: a }.index(self.n)],
            std::cmp::Ordering::Equal => ZERO,
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |a, b| self.get(a, b))
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: C64) -> Self {
        SkewSystem { n: self.n, v: self.v.iter().map(|z| z * k).collect() }
    }

    /// Conjugation by a permutation: entry (a, b) becomes v_{perm[a], perm[b]}.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = SkewSystem::zeros(self.n);
        for p in Pair::all(self.n) {
            out.set(p, self.get(perm[p.i], perm[p.j]));
        }
        out
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.matrix())
    }

    /// Rejects spectra with `μ_i - μ_j` within `tol` of a nonzero integer.
    pub fn check_nonresonant(&self, tol: f64) -> Result<Vec<C64>> {
        let mu = self.eigenvalues()?;
        for i in 0..mu.len() {
            for j in 0..mu.len() {
                if i == j {
                    continue;
                }
                let d = mu[i] - mu[j];
                let k = d.re.round();
                if k != 0.0 {
                    let distance = (d - C64::new(k, 0.0)).norm();
                    if distance <= tol {
                        return Err(Error::Resonance { i, j, distance });
                    }
                }
            }
        }
        Ok(mu)
    }
}

/// Positions `u_1..u_n` of the irregular-type diagonal together with the
/// angle `psi` of the admissible half-line.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationPoint {
    u: Vec<C64>,
    psi: f64,
}

impl DeformationPoint {
    /// Validates distinctness and admissibility.
    pub fn new(u: Vec<C64>, psi: f64) -> Result<Self> {
        if !psi.is_finite() {
            return Err(Error::Invalid("angle psi must be finite".into()));
        }
        if let Some(k) = u.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k, col: 0 });
        }
        let point = DeformationPoint { u, psi };
        point.check_distinct()?;
        point.check_admissible()?;
        Ok(point)
    }

    /// Validates only distinctness; the angle is chosen to maximise the
    /// admissibility margin.
    pub fn with_best_angle(u: Vec<C64>) -> Result<Self> {
        if let Some(k) = u.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k, col: 0 });
        }
        let psi = best_angle(&u);
        let point = DeformationPoint { u, psi };
        point.check_distinct()?;
        point.check_admissible()?;
        Ok(point)
    }

    pub fn from_real(u: &[f64], psi: f64) -> Result<Self> {
        Self::new(u.iter().map(|&x| C64::new(x, 0.0)).collect(), psi)
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[C64] {
        &self.u
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.u)
    }

    /// Same angle, new positions; validated.
    pub fn with_u(&self, u: Vec<C64>) -> Result<Self> {
        Self::new(u, self.psi)
    }

    pub fn tol_distinct(&self) -> f64 {
        1e-8 * self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn tol_admissible(&self) -> f64 {
        let mut spread = 0.0f64;
        for a in &self.u {
            for b in &self.u {
                spread = spread.max((a - b).norm());
            }
        }
        1e-6 * spread
    }

    pub fn check_distinct(&self) -> Result<()> {
        let tol = self.tol_distinct();
        for i in 0..self.u.len() {
            for j in i + 1..self.u.len() {
                let gap = (self.u[i] - self.u[j]).norm();
                if gap <= tol {
                    return Err(Error::Distinctness { i, j, gap });
                }
            }
        }
        Ok(())
    }

    pub fn check_admissible(&self) -> Result<()> {
        let tol = self.tol_admissible();
        let rot = C64::from_polar(1.0, self.psi);
        for i in 0..self.u.len() {
            for j in i + 1..self.u.len() {
                let margin = (rot * (self.u[i] - self.u[j])).re.abs();
                if margin <= tol {
                    return Err(Error::Admissibility { psi: self.psi, i, j, margin });
                }
            }
        }
        Ok(())
    }

    /// `min_{i<j} |Re(e^{i psi}(u_i - u_j))|`.
    pub fn admissibility_margin(&self) -> f64 {
        margin_at(&self.u, self.psi)
    }

    /// Rotated positions `w_i = e^{i psi} u_i`.
    pub fn rotated(&self) -> Vec<C64> {
        let rot = C64::from_polar(1.0, self.psi);
        self.u.iter().map(|z| rot * z).collect()
    }
}

fn margin_at(u: &[C64], psi: f64) -> f64 {
    let rot = C64::from_polar(1.0, psi);
    let mut m = f64::INFINITY;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            m = m.min((rot * (u[i] - u[j])).re.abs());
        }
    }
    m
}

/// Angle in `[0, pi)` maximising the admissibility margin, found on a grid
/// of 1440 directions.
pub fn best_angle(u: &[C64]) -> f64 {
    const STEPS: usize = 1440;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..STEPS {
        let psi = std::f64::consts::PI * k as f64 / STEPS as f64;
        let m = margin_at(u, psi);
        if m > best.1 + 1e-15 {
            best = (psi, m);
        }
    }
    best.0
}

fn check_sizes(v: &SkewSystem, u: &DeformationPoint) -> Result<()> {
    if v.n() != u.n() {
        return Err(Error::Dimension(format!("V has size {} but u has {} entries", v.n(), u.n())));
    }
    Ok(())
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::Index(format!("index {i} out of range for n = {n}")));
    }
    Ok(())
}

/// `{v_p, v_q}` as a formal combination of coordinates.
pub fn so_bracket(n: usize, p: Pair, q: Pair) -> Result<LinearForm<Pair>> {
    p.check(n)?;
    q.check(n)?;
    let (a, b, c, d) = (p.i, p.j, q.i, q.j);
    let mut out = LinearForm::zero();
    let mut push = |sign: i64, x: usize, y: usize| {
        if x < y {
            out.add_term(sign, Pair { i: x, j: y });
        } else if x > y {
            out.add_term(-sign, Pair { i: y, j: x });
        }
    };
    if b == c {
        push(1, a, d);
    }
    if a == d {
        push(1, b, c);
    }
    if a == c {
        push(-1, b, d);
    }
    if b == d {
        push(-1, a, c);
    }
    Ok(out)
}

/// `{{v_p, v_q}, v_r} + {{v_q, v_r}, v_p} + {{v_r, v_p}, v_q}`, formally.
pub fn so_jacobi_form(n: usize, p: Pair, q: Pair, r: Pair) -> Result<LinearForm<Pair>> {
    let mut total = LinearForm::zero();
    for (x, y, z) in [(p, q, r), (q, r, p), (r, p, q)] {
        for (s, c) in so_bracket(n, x, y)?.terms() {
            total.add_scaled(c, &so_bracket(n, *s, z)?);
        }
    }
    Ok(total)
}

/// Evaluates a formal coordinate combination at `v`.
pub fn eval_form(form: &LinearForm<Pair>, v: &SkewSystem) -> C64 {
    form.eval(|p| v.coord(*p))
}

/// `Γ₁` with entries `v_ij / (u_j - u_i)` and zero diagonal.
pub fn gamma1(v: &SkewSystem, u: &DeformationPoint) -> Result<ComplexMatrix> {
    check_sizes(v, u)?;
    u.check_distinct()?;
    let uu = u.u();
    Ok(ComplexMatrix::from_fn(v.n(), v.n(), |i, j| if i == j { ZERO } else { v.get(i, j) / (uu[j] - uu[i]) }))
}

/// `V_i = [Γ₁, E_i]`.
pub fn v_i(v: &SkewSystem, u: &DeformationPoint, i: usize) -> Result<ComplexMatrix> {
    check_index(i, v.n())?;
    let g = gamma1(v, u)?;
    let n = v.n();
    // Γ₁ E_i keeps column i, E_i Γ₁ keeps row i.
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        let mut x = ZERO;
        if b == i {
            x += g[(a, i)];
        }
        if a == i {
            x -= g[(i, b)];
        }
        x
    }))
}

fn skew_from_full(m: &ComplexMatrix) -> Result<SkewSystem> {
    let n = m.rows();
    let mut worst = 0.0f64;
    for a in 0..n {
        worst = worst.max(m[(a, a)].norm());
        for b in a + 1..n {
            worst = worst.max((m[(a, b)] + m[(b, a)]).norm());
        }
    }
    let scale = m.max_abs().max(1.0);
    if worst > 1e-12 * scale {
        return Err(Error::Accuracy(format!("deformation right-hand side is not skew (defect {worst:.3e})")));
    }
    Ok(SkewSystem { n, v: Pair::all(n).map(|p| 0.5 * (m[(p.i, p.j)] - m[(p.j, p.i)])).collect() })
}

/// `∂V/∂u_i = [V_i, V]`.
pub fn lax_rhs(v: &SkewSystem, u: &DeformationPoint, i: usize) -> Result<SkewSystem> {
    check_sizes(v, u)?;
    let vi = v_i(v, u, i)?;
    skew_from_full(&vi.commutator(&v.matrix()))
}

/// `H_i = ½ Σ_{j≠i} v_ij² / (u_i - u_j)`.
pub fn hamiltonian(v: &SkewSystem, u: &DeformationPoint, i: usize) -> Result<C64> {
    check_sizes(v, u)?;
    check_index(i, v.n())?;
    u.check_distinct()?;
    let uu = u.u();
    Ok((0..v.n()).filter(|&j| j != i).map(|j| 0.5 * v.get(i, j) * v.get(i, j) / (uu[i] - uu[j])).sum())
}

/// Exact coordinate gradient of `H_i`: `∂H_i/∂v_p` for `p` containing `i`.
pub fn hamiltonian_gradient(v: &SkewSystem, u: &DeformationPoint, i: usize) -> Result<Vec<C64>> {
    check_sizes(v, u)?;
    check_index(i, v.n())?;
    u.check_distinct()?;
    let uu = u.u();
    let mut grad = vec![ZERO; Pair::count(v.n())];
    for p in Pair::all(v.n()).filter(|p| p.contains(i)) {
        let j = if p.i == i { p.j } else { p.i };
        grad[p.index(v.n())] = v.coord(p) / (uu[i] - uu[j]);
    }
    Ok(grad)
}

/// `{v_p, H_i}` for every coordinate, by the chain rule over the so(n) bracket.
pub fn hamiltonian_vector_field(v: &SkewSystem, u: &DeformationPoint, i: usize) -> Result<SkewSystem> {
    let grad = hamiltonian_gradient(v, u, i)?;
    let n = v.n();
    let mut out = SkewSystem::zeros(n);
    for p in Pair::all(n) {
        let mut acc = ZERO;
        for q in Pair::all(n) {
            let g = grad[q.index(n)];
            if g == ZERO {
                continue;
            }
            acc += g * eval_form(&so_bracket(n, p, q)?, v);
        }
        out.set(p, acc);
    }
    Ok(out)
}

/// Bracket of two functions given by coordinate gradients.
pub fn so_poisson_eval(v: &SkewSystem, grad_f: &[C64], grad_g: &[C64]) -> Result<C64> {
    let n = v.n();
    let m = Pair::count(n);
    if grad_f.len() != m || grad_g.len() != m {
        return Err(Error::Dimension(format!("gradients must have {m} entries")));
    }
    let mut acc = ZERO;
    for p in Pair::all(n) {
        let gf = grad_f[p.index(n)];
        if gf == ZERO {
            continue;
        }
        for q in Pair::all(n) {
            let gg = grad_g[q.index(n)];
            if gg == ZERO {
                continue;
            }
            acc += gf * gg * eval_form(&so_bracket(n, p, q)?, v);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::random;

    fn pair(i: usize, j: usize) -> Pair {
        Pair::new(i, j).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let f = so_bracket(3, pair(0, 1), pair(1, 2)).unwrap();
        assert_eq!(f, LinearForm::term(1, pair(0, 2)));
        assert!(so_bracket(4, pair(0, 1), pair(2, 3)).unwrap().is_zero());
        assert!(so_bracket(4, pair(0, 1), pair(0, 1)).unwrap().is_zero());
        assert!(so_bracket(3, pair(0, 1), pair(1, 3)).is_err());
    }

    #[test]
    fn bracket_is_antisymmetric_and_jacobi() {
        for n in 2..=5 {
            let pairs: Vec<Pair> = Pair::all(n).collect();
            for &p in &pairs {
                for &q in &pairs {
                    let mut sum = so_bracket(n, p, q).unwrap();
                    sum.add_scaled(1, &so_bracket(n, q, p).unwrap());
                    assert!(sum.is_zero());
                    for &r in &pairs {
                        assert!(so_jacobi_form(n, p, q, r).unwrap().is_zero(), "n={n} {p} {q} {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn gamma1_two_by_two() {
        let v = SkewSystem::from_coords(2, vec![c(0.4, 0.0)]).unwrap();
        let u = DeformationPoint::from_real(&[0.0, 2.0], 0.0).unwrap();
        let g = gamma1(&v, &u).unwrap();
        assert!((g[(0, 1)] - c(0.2, 0.0)).norm() < 1e-16);
        assert!((g[(1, 0)] - c(0.2, 0.0)).norm() < 1e-16);
        assert_eq!(g[(0, 0)], ZERO);
        let zero = gamma1(&SkewSystem::zeros(2), &u).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn gamma1_commutator_recovers_v() {
        let mut rng = random::seeded(1);
        for _ in 0..10 {
            let v = random::skew_complex(5, 1.0, &mut rng);
            let u = random::distinct_real_point(5, &mut rng);
            let g = gamma1(&v, &u).unwrap();
            let r = g.commutator(&u.matrix()).distance(&v.matrix());
            assert!(r < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn coincident_points_are_rejected() {
        assert!(matches!(
            DeformationPoint::from_real(&[1.0, 1.0], 0.0),
            Err(Error::Distinctness { .. })
        ));
        let u = vec![c(0.0, 0.0), c(0.0, 1.0)];
        assert!(matches!(DeformationPoint::new(u.clone(), 0.0), Err(Error::Admissibility { .. })));
        let p = DeformationPoint::with_best_angle(u).unwrap();
        assert!((p.psi() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn lax_rhs_is_trivial_for_two_by_two() {
        let v = SkewSystem::from_coords(2, vec![c(0.7, 0.1)]).unwrap();
        let u = DeformationPoint::from_real(&[0.0, 1.3], 0.0).unwrap();
        for i in 0..2 {
            assert!(lax_rhs(&v, &u, i).unwrap().max_abs() < 1e-16);
            assert!(hamiltonian_vector_field(&v, &u, i).unwrap().max_abs() < 1e-16);
        }
        assert!(lax_rhs(&SkewSystem::zeros(3), &random::distinct_real_point(3, &mut random::seeded(2)), 1)
            .unwrap()
            .max_abs()
            == 0.0);
    }

    #[test]
    fn lax_rhs_sum_matches_direct_products() {
        let mut rng = random::seeded(3);
        let v = random::skew_complex(3, 1.0, &mut rng);
        let u = random::distinct_real_point(3, &mut rng);
        let mut sum = ComplexMatrix::zeros(3, 3);
        for i in 0..3 {
            sum += &lax_rhs(&v, &u, i).unwrap().matrix();
        }
        // Σ_i V_i = [Γ₁, 1] = 0, so the summed flow vanishes.
        let g = gamma1(&v, &u).unwrap();
        let direct = g.commutator(&ComplexMatrix::identity(3)).commutator(&v.matrix());
        assert!(sum.distance(&direct) < 1e-12);
        assert!(sum.max_abs() < 1e-12);
        for i in 0..3 {
            let vi = v_i(&v, &u, i).unwrap();
            let mut e = ComplexMatrix::zeros(3, 3);
            e[(i, i)] = c(1.0, 0.0);
            assert!(vi.distance(&g.commutator(&e)) < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_closed_forms() {
        let v = SkewSystem::from_coords(2, vec![c(0.6, 0.0)]).unwrap();
        let u = DeformationPoint::from_real(&[0.5, -1.0], 0.0).unwrap();
        let h1 = hamiltonian(&v, &u, 0).unwrap();
        assert!((h1 - c(0.36 / 3.0, 0.0)).norm() < 1e-15);
        assert_eq!(hamiltonian(&SkewSystem::zeros(2), &u, 1).unwrap(), ZERO);

        let mut rng = random::seeded(4);
        let v = random::skew_complex(3, 1.0, &mut rng);
        let u = random::distinct_real_point(3, &mut rng);
        for i in 0..3 {
            let mut brute = ZERO;
            for j in 0..3 {
                if j != i {
                    let m = v.matrix();
                    brute += m[(i, j)] * m[(i, j)] / (2.0 * (u.u()[i] - u.u()[j]));
                }
            }
            assert!((hamiltonian(&v, &u, i).unwrap() - brute).norm() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_field_equals_lax_rhs() {
        let mut rng = random::seeded(5);
        for _ in 0..100 {
            let n = 3 + rand::Rng::gen_range(&mut rng, 0..3);
            let v = random::skew_complex(n, 1.0, &mut rng);
            let u = random::distinct_real_point(n, &mut rng);
            for i in 0..n {
                let a = lax_rhs(&v, &u, i).unwrap();
                let b = hamiltonian_vector_field(&v, &u, i).unwrap();
                let r = a.matrix().distance(&b.matrix());
                assert!(r < 1e-12, "n={n} i={i} residual {r}");
            }
        }
    }

    #[test]
    fn resonance_detection() {
        // eigenvalues ±i v; choose v so that 2 i v = 1 is impossible (imaginary), so use complex V
        let v = SkewSystem::from_coords(2, vec![c(0.0, 0.5)]).unwrap();
        // μ = ±i·(0.5i) = ∓0.5, difference 1
        assert!(matches!(v.check_nonresonant(TOL_RESONANCE), Err(Error::Resonance { .. })));
        let v = SkewSystem::from_coords(2, vec![c(0.3, 0.0)]).unwrap();
        assert!(v.check_nonresonant(TOL_RESONANCE).is_ok());
    }

    #[test]
    fn from_matrix_requires_skew() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(SkewSystem::from_matrix(&m, 0.0).is_err());
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let v = SkewSystem::from_matrix(&m, 0.0).unwrap();
        assert_eq!(v.matrix(), m);
    }
}
