//! The Fuchsian system with residues `B_i = -E_i(V + ½)` at `λ = u_i`,
//! its gauge to a diagonal residue at infinity, the Schlesinger equations,
//! and the linear Poisson bracket on residues.
//!
//! Normalisation: the Fuchsian Hamiltonian
//! `ℋ_j = -Σ_{k≠j} Tr(A_j A_k) / (u_j - u_k)` pulled back along
//! `V ↦ (B_i)` equals `2 H_j`, and the residue bracket of pulled-back
//! functions equals `-½` times the so(n) bracket. The Schlesinger flow is
//! `∂A_i/∂u_j = {ℋ_j, A_i}`, so the two factors cancel and the flow agrees
//! with `∂V/∂u_j = {V, H_j}` on gauge invariants.

use crate::error::{Error, Result};
use crate::linalg::{eigen, invert, ComplexMatrix, C64, ONE, ZERO};
use crate::poisson_so::{DeformationPoint, SkewSystem};
use crate::poly::LinearForm;

/// `ℋ_j / H_j` for residues built from a skew system.
pub const HAMILTONIAN_RATIO: f64 = 2.0;

/// `{f, g}_residues / {f, g}_so(n)` for functions of `V` pulled back through
/// the residues.
pub const BRACKET_RATIO: f64 = -0.5;

/// Residues `B_1..B_n` (or gauged `A_i`) and the residue at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueTuple {
    pub b: Vec<ComplexMatrix>,
    pub b_inf: ComplexMatrix,
}

impl ResidueTuple {
    /// Builds a tuple with `B_∞ = -Σ B_i`.
    pub fn from_residues(b: Vec<ComplexMatrix>) -> Result<Self> {
        let n = b.first().map_or(0, ComplexMatrix::rows);
        if n == 0 {
            return Err(Error::Dimension("residue tuple must be nonempty".into()));
        }
        for m in &b {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("residues must all be {n}x{n}")));
            }
        }
        let mut b_inf = ComplexMatrix::zeros(n, n);
        for m in &b {
            b_inf -= m;
        }
        Ok(ResidueTuple { b, b_inf })
    }

    pub fn n(&self) -> usize {
        self.b_inf.rows()
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Max entry of `Σ B_i + B_∞`.
    pub fn sum_residual(&self) -> f64 {
        let mut s = self.b_inf.clone();
        for m in &self.b {
            s += m;
        }
        s.max_abs()
    }

    /// `A(λ) = Σ A_i / (λ - u_i)`.
    pub fn connection_at(&self, u: &DeformationPoint, lambda: C64) -> Result<ComplexMatrix> {
        check_sizes(self, u)?;
        let mut out = ComplexMatrix::zeros(self.n(), self.n());
        for (m, ui) in self.b.iter().zip(u.u()) {
            let d = lambda - ui;
            if d.norm() == 0.0 {
                return Err(Error::Pole(format!("evaluation point {lambda} coincides with a pole")));
            }
            out += &m.scale(ONE / d);
        }
        Ok(out)
    }
}

fn check_sizes(a: &ResidueTuple, u: &DeformationPoint) -> Result<()> {
    if a.len() != u.n() {
        return Err(Error::Dimension(format!("{} residues but {} positions", a.len(), u.n())));
    }
    Ok(())
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::Index(format!("index {i} out of range for n = {n}")));
    }
    Ok(())
}

/// `B_i = -E_i(V + ½)`, `B_∞ = V + ½`.
pub fn residues_from_v(v: &SkewSystem) -> ResidueTuple {
    let n = v.n();
    let vm = v.matrix();
    let shifted = &vm + &ComplexMatrix::identity(n).scale_real(0.5);
    let b = (0..n)
        .map(|i| ComplexMatrix::from_fn(n, n, |a, c| if a == i { -shifted[(i, c)] } else { ZERO }))
        .collect();
    ResidueTuple { b, b_inf: shifted }
}

/// Gauge `A_i = W₀⁻¹ B_i W₀` with `W₀` an eigenbasis of `V`; returns the
/// gauged tuple and `W₀`.
pub fn gauge_to_a(b: &ResidueTuple, v: &SkewSystem) -> Result<(ResidueTuple, ComplexMatrix)> {
    if b.n() != v.n() {
        return Err(Error::Dimension(format!("residues of size {} but V of size {}", b.n(), v.n())));
    }
    let e = eigen(&v.matrix())?;
    let gap = e.min_gap();
    if v.n() > 1 && gap <= 1e-8 * v.max_abs().max(1.0) {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let w = e.vectors;
    let winv = invert(&w)?;
    let conj = |m: &ComplexMatrix| &(&winv * m) * &w;
    let a = ResidueTuple { b: b.b.iter().map(conj).collect(), b_inf: conj(&b.b_inf) };
    let mut off = 0.0f64;
    for r in 0..a.n() {
        for c in 0..a.n() {
            if r != c {
                off = off.max(a.b_inf[(r, c)].norm());
            }
        }
    }
    if off > 1e-9 * v.max_abs().max(1.0) {
        return Err(Error::Accuracy(format!("gauged residue at infinity is not diagonal (off-diagonal {off:.3e})")));
    }
    Ok((a, w))
}

/// `d[i][j] = ∂A_i/∂u_j`.
pub fn schlesinger_rhs(a: &ResidueTuple, u: &DeformationPoint) -> Result<Vec<Vec<ComplexMatrix>>> {
    check_sizes(a, u)?;
    u.check_distinct()?;
    let m = a.len();
    let uu = u.u();
    let mut out = vec![vec![ComplexMatrix::zeros(a.n(), a.n()); m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let term = a.b[i].commutator(&a.b[j]).scale(ONE / (uu[i] - uu[j]));
                out[j][j] -= &term;
                out[i][j] = term;
            }
        }
    }
    Ok(out)
}

/// Key `(residue, row, column)` of a residue entry.
pub type EntryKey = (usize, usize, usize);

/// `{(A_i)_ab, (A_j)_cd} = δ_ij (δ_ad (A_i)_cb - δ_cb (A_i)_ad)`.
pub fn gl_bracket(
    n: usize,
    residues: usize,
    i: usize,
    (a, b): (usize, usize),
    j: usize,
    (c, d): (usize, usize),
) -> Result<LinearForm<EntryKey>> {
    check_index(i, residues)?;
    check_index(j, residues)?;
    for x in [a, b, c, d] {
        check_index(x, n)?;
    }
    let mut out = LinearForm::zero();
    if i == j {
        if a == d {
            out.add_term(1, (i, c, b));
        }
        if c == b {
            out.add_term(-1, (i, a, d));
        }
    }
    Ok(out)
}

fn eval_entry_form(form: &LinearForm<EntryKey>, a: &ResidueTuple) -> C64 {
    form.eval(|&(r, x, y)| a.b[r][(x, y)])
}

/// Bracket of two functions given by entry gradients `g[i][(a, b)] = ∂f/∂(A_i)_ab`.
pub fn gl_poisson_eval(a: &ResidueTuple, grad_f: &[ComplexMatrix], grad_g: &[ComplexMatrix]) -> Result<C64> {
    if grad_f.len() != a.len() || grad_g.len() != a.len() {
        return Err(Error::Dimension("gradient count must match residue count".into()));
    }
    let n = a.n();
    let mut total = ZERO;
    // only same-residue brackets survive
    for (r, (gf, gg)) in grad_f.iter().zip(grad_g).enumerate() {
        let ar = &a.b[r];
        for p in 0..n {
            for q in 0..n {
                let f = gf[(p, q)];
                if f == ZERO {
                    continue;
                }
                // Σ_cd gg_cd (δ_qc... ) expanded: δ_pd (A)_cq - δ_cq (A)_pd
                let mut inner = ZERO;
                for c in 0..n {
                    inner += gg[(c, p)] * ar[(c, q)];
                }
                for d in 0..n {
                    inner -= gg[(q, d)] * ar[(p, d)];
                }
                total += f * inner;
            }
        }
    }
    Ok(total)
}

/// Entry gradient of `Tr(A_i A_k)`.
pub fn trace_pair_gradient(a: &ResidueTuple, i: usize, k: usize) -> Vec<ComplexMatrix> {
    let n = a.n();
    let mut g = vec![ComplexMatrix::zeros(n, n); a.len()];
    g[i] += &a.b[k].transpose();
    g[k] += &a.b[i].transpose();
    g
}

/// `{Tr(A_i A_k), Tr(A_j A_l)}` under the residue bracket.
pub fn gl_trace_bracket(a: &ResidueTuple, i: usize, k: usize, j: usize, l: usize) -> Result<C64> {
    for x in [i, k, j, l] {
        check_index(x, a.len())?;
    }
    gl_poisson_eval(a, &trace_pair_gradient(a, i, k), &trace_pair_gradient(a, j, l))
}

/// `{A^{ab}(μ), A^{cd}(ν)}` for `A(λ) = Σ A_i/(λ - u_i)`, components read
/// through the trace pairing `A^{pq} = Tr(A E_pq) = A_qp`.
///
/// Evaluates both the kernel formula
/// `-f^{(ab)(cd)}_e (A^e(μ) - A^e(ν)) / (μ - ν)` with
/// `[E_ab, E_cd] = δ_bc E_ad - δ_da E_cb`, and the residue-by-residue
/// double sum; they must agree to `1e-9`.
pub fn connection_bracket(
    a: &ResidueTuple,
    u: &DeformationPoint,
    mu: C64,
    nu: C64,
    (p, q): (usize, usize),
    (r, s): (usize, usize),
) -> Result<C64> {
    check_sizes(a, u)?;
    let n = a.n();
    for x in [p, q, r, s] {
        check_index(x, n)?;
    }
    if (mu - nu).norm() == 0.0 {
        return Err(Error::Pole("connection bracket needs distinct evaluation points".into()));
    }
    let am = a.connection_at(u, mu)?;
    let an = a.connection_at(u, nu)?;
    let comp = |m: &ComplexMatrix, x: usize, y: usize| m[(y, x)];
    let mut kernel = ZERO;
    if q == r {
        kernel += comp(&am, p, s) - comp(&an, p, s);
    }
    if s == p {
        kernel -= comp(&am, r, q) - comp(&an, r, q);
    }
    let kernel = -kernel / (mu - nu);

    let mut direct = ZERO;
    // residues at different poles commute, so only the diagonal of the double sum survives
    for i in 0..a.len() {
        let w = ONE / ((mu - u.u()[i]) * (nu - u.u()[i]));
        let form = gl_bracket(n, a.len(), i, (q, p), i, (s, r))?;
        direct += eval_entry_form(&form, a) * w;
    }
    let difference = (kernel - direct).norm();
    if difference > 1e-9 * kernel.norm().max(1.0) {
        return Err(Error::Consistency { difference });
    }
    Ok(kernel)
}

/// `ℋ_j = -Σ_{k≠j} Tr(A_j A_k) / (u_j - u_k)`.
pub fn fuchsian_hamiltonian(a: &ResidueTuple, u: &DeformationPoint, j: usize) -> Result<C64> {
    check_sizes(a, u)?;
    check_index(j, a.len())?;
    u.check_distinct()?;
    let uu = u.u();
    Ok((0..a.len())
        .filter(|&k| k != j)
        .map(|k| -(&a.b[j] * &a.b[k]).trace() / (uu[j] - uu[k]))
        .sum())
}

/// `{ℋ_j, A_i}` for every residue, via the residue bracket and the exact
/// gradient of `ℋ_j`. Equals the Schlesinger derivative `∂A_i/∂u_j`.
pub fn hamiltonian_flow(a: &ResidueTuple, u: &DeformationPoint, j: usize) -> Result<Vec<ComplexMatrix>> {
    check_sizes(a, u)?;
    check_index(j, a.len())?;
    u.check_distinct()?;
    let n = a.n();
    let uu = u.u();
    let m = a.len();
    let mut grad = vec![ComplexMatrix::zeros(n, n); m];
    for k in (0..m).filter(|&k| k != j) {
        let w = -ONE / (uu[j] - uu[k]);
        grad[j] += &a.b[k].transpose().scale(w);
        grad[k] += &a.b[j].transpose().scale(w);
    }
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut d = ComplexMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                let mut unit = vec![ComplexMatrix::zeros(n, n); m];
                unit[i][(x, y)] = ONE;
                d[(x, y)] = gl_poisson_eval(a, &grad, &unit)?;
            }
        }
        out.push(d);
    }
    Ok(out)
}

/// `Tr(B_i B_j) = -v_ij²` for `i ≠ j`.
pub fn trace_pair_closed(v: &SkewSystem, i: usize, j: usize) -> C64 {
    -v.get(i, j) * v.get(i, j)
}

/// `Tr(B_i B_j B_k) = -v_ij v_jk v_ki` for pairwise distinct indices.
pub fn trace_triple_closed(v: &SkewSystem, i: usize, j: usize, k: usize) -> C64 {
    -v.get(i, j) * v.get(j, k) * v.get(k, i)
}

/// `Tr(B_i B_j V) = v_ij Σ_{k≠i,j} v_jk v_ki - ½ v_ij²` for `i ≠ j`.
pub fn trace_bbv_closed(v: &SkewSystem, i: usize, j: usize) -> C64 {
    let sum: C64 = (0..v.n()).filter(|&k| k != i && k != j).map(|k| v.get(j, k) * v.get(k, i)).sum();
    v.get(i, j) * sum - 0.5 * v.get(i, j) * v.get(i, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eigenvalues};
    use crate::pairs::Pair;
    use crate::poisson_so::{hamiltonian, so_poisson_eval};
    use crate::random;

    #[test]
    fn zero_system_residues() {
        let r = residues_from_v(&SkewSystem::zeros(2));
        assert_eq!(r.b[0], ComplexMatrix::from_real_rows(&[vec![-0.5, 0.0], vec![0.0, 0.0]]).unwrap());
        assert_eq!(r.b[1], ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![0.0, -0.5]]).unwrap());
        assert_eq!(r.b_inf, ComplexMatrix::identity(2).scale_real(0.5));
        assert_eq!(r.sum_residual(), 0.0);
    }

    #[test]
    fn triple_trace_example() {
        let mut v = SkewSystem::zeros(3);
        v.set(Pair::new(0, 1).unwrap(), c(1.0, 0.0));
        v.set(Pair::new(1, 2).unwrap(), c(2.0, 0.0));
        v.set(Pair::new(0, 2).unwrap(), c(3.0, 0.0));
        let r = residues_from_v(&v);
        let t = (&(&r.b[0] * &r.b[1]) * &r.b[2]).trace();
        // direct multiplication gives +6 = -v12 v23 v31
        assert_eq!(t, c(6.0, 0.0));
        assert_eq!(trace_triple_closed(&v, 0, 1, 2), t);
    }

    #[test]
    fn trace_identities_random() {
        let mut rng = random::seeded(21);
        for n in 3..=6 {
            for _ in 0..10 {
                let v = random::skew_complex(n, 1.0, &mut rng);
                let r = residues_from_v(&v);
                let vm = v.matrix();
                for i in 0..n {
                    assert_eq!(r.b[i].rows(), n);
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let bb = &r.b[i] * &r.b[j];
                        assert!((bb.trace() - trace_pair_closed(&v, i, j)).norm() < 1e-13);
                        assert!(((&bb * &vm).trace() - trace_bbv_closed(&v, i, j)).norm() < 1e-12);
                        for k in 0..n {
                            if k != i && k != j {
                                let t = (&bb * &r.b[k]).trace();
                                assert!((t - trace_triple_closed(&v, i, j, k)).norm() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gauge_diagonalises_infinity() {
        assert!(matches!(
            gauge_to_a(&residues_from_v(&SkewSystem::zeros(3)), &SkewSystem::zeros(3)),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let v = SkewSystem::from_coords(2, vec![c(0.4, 0.0)]).unwrap();
        let (a, _) = gauge_to_a(&residues_from_v(&v), &v).unwrap();
        let mut d: Vec<C64> = a.b_inf.diagonal();
        d.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((d[0] - c(0.5, -0.4)).norm() < 1e-14 && (d[1] - c(0.5, 0.4)).norm() < 1e-14);

        let mut rng = random::seeded(22);
        let v = random::skew_complex(4, 1.0, &mut rng);
        let b = residues_from_v(&v);
        let (a, _) = gauge_to_a(&b, &v).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let tb = (&b.b[i] * &b.b[j]).trace();
                let ta = (&a.b[i] * &a.b[j]).trace();
                assert!((ta - tb).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn schlesinger_properties() {
        let u = DeformationPoint::from_real(&[0.0, 1.0, 2.5], 0.0).unwrap();
        let diag = ResidueTuple::from_residues(
            (0..3).map(|k| ComplexMatrix::from_diag(&[c(k as f64, 0.0), ONE, c(0.0, 1.0)])).collect(),
        )
        .unwrap();
        let d = schlesinger_rhs(&diag, &u).unwrap();
        assert!(d.iter().flatten().all(|m| m.max_abs() == 0.0));

        let mut rng = random::seeded(23);
        let a = ResidueTuple::from_residues((0..4).map(|_| random::complex_matrix(4, 4, 1.0, &mut rng)).collect())
            .unwrap();
        let u = random::distinct_real_point(4, &mut rng);
        let d = schlesinger_rhs(&a, &u).unwrap();
        for j in 0..4 {
            let mut sum = ComplexMatrix::zeros(4, 4);
            for row in &d {
                sum += &row[j];
            }
            assert!(sum.max_abs() < 1e-12);
        }
    }

    #[test]
    fn gl_bracket_examples() {
        assert!(gl_bracket(2, 2, 0, (0, 1), 1, (1, 0)).unwrap().is_zero());
        let f = gl_bracket(2, 2, 0, (0, 1), 0, (1, 0)).unwrap();
        let mut expected = LinearForm::term(1, (0, 1, 1));
        expected.add_term(-1, (0, 0, 0));
        assert_eq!(f, expected);
        assert!(gl_bracket(2, 2, 0, (0, 0), 0, (0, 0)).unwrap().is_zero());
        assert!(gl_bracket(2, 2, 2, (0, 0), 0, (0, 0)).is_err());
    }

    #[test]
    fn connection_bracket_routes_agree() {
        let u = DeformationPoint::from_real(&[0.0, 1.0, 2.0], 0.0).unwrap();
        let zero = ResidueTuple::from_residues(vec![ComplexMatrix::zeros(3, 3); 3]).unwrap();
        assert_eq!(connection_bracket(&zero, &u, c(5.0, 1.0), c(6.0, 0.0), (0, 1), (1, 2)).unwrap(), ZERO);
        let mut rng = random::seeded(24);
        let a = ResidueTuple::from_residues((0..3).map(|_| random::complex_matrix(3, 3, 1.0, &mut rng)).collect())
            .unwrap();
        assert_eq!(connection_bracket(&a, &u, c(0.3, 1.0), c(2.0, -1.0), (0, 0), (1, 1)).unwrap(), ZERO);
        for (p, q) in [((0, 1), (1, 2)), ((1, 0), (0, 1)), ((2, 1), (0, 2)), ((1, 1), (1, 0))] {
            for _ in 0..5 {
                let mu = random::disc(3.0, &mut rng);
                let nu = random::disc(3.0, &mut rng);
                connection_bracket(&a, &u, mu, nu, p, q).unwrap();
            }
        }
        assert!(matches!(
            connection_bracket(&a, &u, c(0.5, 0.5), c(0.5, 0.5), (0, 1), (1, 0)),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn hamiltonian_normalisation() {
        let v = SkewSystem::from_coords(2, vec![c(0.3, 0.0)]).unwrap();
        let u = DeformationPoint::from_real(&[0.0, 1.0], 0.0).unwrap();
        let r = residues_from_v(&v);
        let curly = fuchsian_hamiltonian(&r, &u, 0).unwrap();
        assert!((curly - c(-0.09, 0.0)).norm() < 1e-15);
        assert!((curly - HAMILTONIAN_RATIO * hamiltonian(&v, &u, 0).unwrap()).norm() < 1e-15);

        let mut rng = random::seeded(25);
        let v = random::skew_complex(4, 1.0, &mut rng);
        let u = random::distinct_real_point(4, &mut rng);
        let r = residues_from_v(&v);
        for j in 0..4 {
            let diff = fuchsian_hamiltonian(&r, &u, j).unwrap() - HAMILTONIAN_RATIO * hamiltonian(&v, &u, j).unwrap();
            assert!(diff.norm() < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_flow_is_schlesinger() {
        let mut rng = random::seeded(26);
        let a = ResidueTuple::from_residues((0..3).map(|_| random::complex_matrix(3, 3, 1.0, &mut rng)).collect())
            .unwrap();
        let u = random::distinct_real_point(3, &mut rng);
        let d = schlesinger_rhs(&a, &u).unwrap();
        for j in 0..3 {
            let flow = hamiltonian_flow(&a, &u, j).unwrap();
            for i in 0..3 {
                assert!(flow[i].distance(&d[i][j]) < 1e-12);
            }
        }
    }

    #[test]
    fn trace_bracket_pulls_back_with_ratio() {
        let mut rng = random::seeded(27);
        for _ in 0..20 {
            let n = 4;
            let v = random::skew_complex(n, 1.0, &mut rng);
            let r = residues_from_v(&v);
            for (i, k, j, l) in [(0, 1, 1, 2), (0, 2, 1, 2), (0, 1, 0, 2), (0, 1, 2, 3), (1, 3, 0, 3)] {
                let gl = gl_trace_bracket(&r, i, k, j, l).unwrap();
                let m = Pair::count(n);
                let mut gf = vec![ZERO; m];
                let mut gg = vec![ZERO; m];
                let p = Pair::unordered(i, k).unwrap();
                let q = Pair::unordered(j, l).unwrap();
                gf[p.index(n)] = -2.0 * v.coord(p);
                gg[q.index(n)] = -2.0 * v.coord(q);
                let so = so_poisson_eval(&v, &gf, &gg).unwrap();
                assert!((gl - BRACKET_RATIO * so).norm() < 1e-11 * (1.0 + so.norm()));
            }
        }
    }

    #[test]
    fn ranks_are_one() {
        let mut rng = random::seeded(28);
        let v = random::skew_complex(4, 1.0, &mut rng);
        let r = residues_from_v(&v);
        for (i, b) in r.b.iter().enumerate() {
            let nonzero = (0..4).filter(|&row| b.row(row).iter().any(|z| z.norm() > 0.0)).count();
            assert_eq!(nonzero, 1);
            let ev = eigenvalues(b).unwrap();
            assert_eq!(ev.iter().filter(|z| z.norm() > 1e-12).count(), 1, "residue {i}");
        }
    }
}
