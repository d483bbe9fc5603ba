//! Randomised verification suites.
//!
//! Each check computes one worst-case residual over seeded random inputs and
//! compares it with a fixed threshold. Checks draw from independent streams
//! derived from the suite seed, so running them in parallel or in isolation
//! gives identical numbers.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flows::{integrate_lax, integrate_schlesinger, DeformationPath};
use crate::fuchsian::{gauge_to_a, residues_from_v, trace_bbv_closed, trace_pair_closed, trace_triple_closed};
use crate::linalg::{eigenvalues, invert, ComplexMatrix, C64};
use crate::monodromy::{
    compute_stokes, fuchsian_loop_monodromy, pushforward_bracket, spectral_distance, IntegratorConfig, PushforwardOptions,
};
use crate::pairs::Pair;
use crate::poisson_so::{DeformationPoint, SkewSystem};
use crate::random::{self, TestRng};
use crate::reflection::{
    coxeter_product, ks_trace_bracket, ks_trace_bracket_closed, reflections_from_stokes, trace_conjugated_formula,
    trace_pair_formula, trace_quadruple_formula,
};
use crate::stokes_bracket::{
    braid_apply, braid_generator, braid_invariance_residual, bracket_table, casimir_residual, casimirs,
    casimirs_n4_explicit, fd_gradient, jacobi_residual, poisson_eval, stokes_bracket, BracketTable, BraidWord,
};

/// One named residual against a threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Check { name: name.into(), residual, threshold, passed: residual < threshold, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "residual": self.residual,
            "threshold": self.threshold,
            "passed": self.passed,
        });
        if let Some(note) = &self.note {
            v["note"] = json!(note);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebraic,
    Monodromy,
    Pushforward,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(Suite::Algebraic),
            "monodromy" => Ok(Suite::Monodromy),
            "pushforward" => Ok(Suite::Pushforward),
            "all" => Ok(Suite::All),
            other => Err(Error::Invalid(format!("unknown suite {other:?}; expected algebraic, monodromy, pushforward or all"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random inputs per algebraic check.
    pub samples: usize,
    /// Random inputs per numerical check.
    pub numeric_samples: usize,
    pub kappa: C64,
    pub cfg: IntegratorConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 42,
            samples: 100,
            numeric_samples: 3,
            kappa: crate::reflection::KAPPA_DEFAULT,
            cfg: IntegratorConfig::default(),
        }
    }
}

fn stream(seed: u64, tag: u64) -> TestRng {
    random::seeded(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag)
}

type Job<'a> = Box<dyn Fn() -> Result<Vec<Check>> + Send + Sync + 'a>;

/// Runs a suite; checks are evaluated concurrently and reported in a fixed order.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let o = opts;
    let mut jobs: Vec<Job> = Vec::new();
    if matches!(suite, Suite::Algebraic | Suite::All) {
        jobs.push(Box::new(move || exact_identities(&mut stream(o.seed, 1), o.samples, &[3, 4, 5, 6])));
        jobs.push(Box::new(move || bracket_definition(&mut stream(o.seed, 2), o.samples.min(20), &[3, 4, 5, 6], o.kappa)));
        jobs.push(Box::new(move || casimir_suite(&mut stream(o.seed, 3), o.samples.min(20), o.kappa)));
        jobs.push(Box::new(move || ks_suite(&mut stream(o.seed, 4), o.samples, &[4, 5], o.kappa).map(|c| vec![c])));
        jobs.push(Box::new(move || braid_suite(&mut stream(o.seed, 5), o.samples, o.kappa)));
    }
    if matches!(suite, Suite::Monodromy | Suite::All) {
        jobs.push(Box::new(move || monodromy_oracle(&mut stream(o.seed, 6), o.numeric_samples, &o.cfg)));
        jobs.push(Box::new(move || isomonodromy(&mut stream(o.seed, 7), &o.cfg)));
        jobs.push(Box::new(move || fuchsian_cross_check(&mut stream(o.seed, 8), o.numeric_samples, &o.cfg)));
    }
    if matches!(suite, Suite::Pushforward | Suite::All) {
        jobs.push(Box::new(move || {
            let r = pushforward_check(&mut stream(o.seed, 9), 3, &o.cfg, o.kappa, PushforwardOptions::default())?;
            Ok(r.checks())
        }));
    }
    let results: Vec<Result<Vec<Check>>> = jobs.par_iter().map(|job| job()).collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn trace_product(factors: &[&ComplexMatrix]) -> C64 {
    let n = factors[0].rows();
    let mut p = ComplexMatrix::identity(n);
    for f in factors {
        p = &p * f;
    }
    p.trace()
}

/// Residue trace identities, reflection trace formulas, the Coxeter identity
/// and `M_i² = 1`, over `samples` random inputs for each `n`.
pub fn exact_identities(rng: &mut TestRng, samples: usize, ns: &[usize]) -> Result<Vec<Check>> {
    let (mut residue, mut reflection, mut coxeter, mut involution) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &n in ns {
        for _ in 0..samples {
            let v = random::skew_complex(n, 1.0, rng);
            let b = residues_from_v(&v).b;
            let vm = v.matrix();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    residue = residue.max((trace_product(&[&b[i], &b[j]]) - trace_pair_closed(&v, i, j)).norm());
                    residue = residue.max((trace_product(&[&b[i], &b[j], &vm]) - trace_bbv_closed(&v, i, j)).norm());
                    for k in (0..n).filter(|&k| k != i && k != j) {
                        let direct = trace_product(&[&b[i], &b[j], &b[k]]);
                        residue = residue.max((direct - trace_triple_closed(&v, i, j, k)).norm());
                    }
                }
            }

            let s = random::stokes(n, 0.5, rng);
            let m = reflections_from_stokes(&s).m;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    reflection = reflection.max((trace_product(&[&m[i], &m[j]]) - trace_pair_formula(&s, i, j)).norm());
                    for k in (0..n).filter(|&k| k != i && k != j) {
                        let direct = trace_product(&[&m[k], &m[i], &m[j], &m[i]]);
                        reflection = reflection.max((direct - trace_conjugated_formula(&s, k, i, j)).norm());
                    }
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        for l in k + 1..n {
                            let direct = trace_product(&[&m[i], &m[j], &m[k], &m[l]]);
                            reflection = reflection.max((direct - trace_quadruple_formula(&s, i, j, k, l)).norm());
                        }
                    }
                }
            }
            let sm = s.matrix();
            let expect = (&invert(&sm)? * &sm.transpose()).scale_real(-1.0);
            coxeter = coxeter.max(coxeter_product(&s).distance(&expect));
            involution = involution.max(reflections_from_stokes(&s).involution_residual());
        }
    }
    Ok(vec![
        Check::new("residue trace identities", residue, 1e-12),
        Check::new("reflection trace formulas", reflection, 1e-11),
        Check::new("Coxeter identity", coxeter, 1e-11),
        Check::new("reflections are involutions", involution, 1e-12),
    ])
}

/// Antisymmetry and the Jacobi identity of the Stokes bracket.
pub fn bracket_definition(rng: &mut TestRng, samples: usize, ns: &[usize], kappa: C64) -> Result<Vec<Check>> {
    let (mut anti, mut jacobi) = (0.0f64, 0.0f64);
    for &n in ns {
        for _ in 0..samples {
            let s = random::stokes(n, 1.0, rng);
            for p in Pair::all(n) {
                for q in Pair::all(n) {
                    anti = anti.max((stokes_bracket(&s, p, q, kappa)? + stokes_bracket(&s, q, p, kappa)?).norm());
                }
            }
            jacobi = jacobi.max(jacobi_residual(&s, kappa));
        }
    }
    Ok(vec![Check::new("bracket antisymmetry", anti, 1e-15), Check::new("bracket Jacobi identity", jacobi, 1e-10)])
}

/// Casimirs commute with every coordinate; the `n = 4` pair is braid invariant.
pub fn casimir_suite(rng: &mut TestRng, samples: usize, kappa: C64) -> Result<Vec<Check>> {
    let mut commute = 0.0f64;
    for n in 3..=5 {
        for _ in 0..samples.min(5) {
            let s = random::stokes(n, 0.5, rng);
            commute = commute.max(casimir_residual(&s, kappa)?);
        }
    }
    let (mut explicit, mut braid, mut spectrum) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let s = random::stokes(4, 0.5, rng);
        let m = Pair::count(4);
        let g1 = fd_gradient(&s, |x| Ok(casimirs_n4_explicit(x)?.0))?;
        let g2 = fd_gradient(&s, |x| Ok(casimirs_n4_explicit(x)?.1))?;
        for k in 0..m {
            let mut e = vec![C64::new(0.0, 0.0); m];
            e[k] = C64::new(1.0, 0.0);
            explicit = explicit.max(poisson_eval(&s, &g1, &e, kappa)?.norm());
            explicit = explicit.max(poisson_eval(&s, &g2, &e, kappa)?.norm());
        }
        let (c1, c2) = casimirs_n4_explicit(&s)?;
        let spec0 = eigenvalues(&s.monodromy_at_infinity()?)?;
        for i in 0..3 {
            for inverse in [false, true] {
                let t = braid_generator(&s, i, inverse)?;
                let (d1, d2) = casimirs_n4_explicit(&t)?;
                braid = braid.max((c1 - d1).norm()).max((c2 - d2).norm());
                spectrum = spectrum.max(spectral_distance(&spec0, &eigenvalues(&t.monodromy_at_infinity()?)?));
            }
        }
    }
    for n in [3, 5] {
        let s = random::stokes(n, 0.5, rng);
        let c0 = casimirs(&s)?;
        for i in 0..n - 1 {
            let c1 = casimirs(&braid_generator(&s, i, false)?)?;
            for (a, b) in c0.iter().zip(&c1) {
                braid = braid.max((a - b).norm());
            }
        }
    }
    Ok(vec![
        Check::new("Casimirs commute (finite differences)", commute, 1e-8),
        Check::new("explicit n=4 Casimirs commute", explicit, 1e-8),
        Check::new("explicit Casimirs braid invariant", braid, 1e-12),
        Check::new("spectrum of S^-1 S^T braid invariant", spectrum, 1e-11),
    ])
}

/// Trace brackets expanded through the monodromy-entry bracket against their
/// closed forms, for every index pattern that has one.
pub fn ks_suite(rng: &mut TestRng, samples: usize, ns: &[usize], kappa: C64) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut patterns = 0usize;
    for &n in ns {
        for _ in 0..samples {
            let s = random::stokes(n, 0.5, rng);
            for i in 0..n {
                for k in i + 1..n {
                    for j in 0..n {
                        for l in j + 1..n {
                            if let Some(closed) = ks_trace_bracket_closed(&s, i, k, j, l, kappa) {
                                worst = worst.max((ks_trace_bracket(&s, i, k, j, l, kappa)? - closed).norm());
                                patterns += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Check::new("trace brackets match closed forms", worst, 1e-10).with_note(format!("{patterns} evaluations")))
}

/// Braid relations, far commutation and invariance of the bracket.
pub fn braid_suite(rng: &mut TestRng, samples: usize, kappa: C64) -> Result<Vec<Check>> {
    let (mut relation, mut far, mut bracket) = (0.0f64, 0.0f64, 0.0f64);
    let word = |g: &[i64]| BraidWord::from_signed(g);
    for n in [4usize, 5] {
        for _ in 0..samples {
            let s = random::stokes(n, 0.5, rng);
            for i in 1..n as i64 - 1 {
                let a = braid_apply(&s, &word(&[i, i + 1, i])?)?;
                let b = braid_apply(&s, &word(&[i + 1, i, i + 1])?)?;
                relation = relation.max(a.distance(&b));
            }
            for i in 1..n as i64 {
                for j in i + 2..n as i64 {
                    let a = braid_apply(&s, &word(&[i, j])?)?;
                    let b = braid_apply(&s, &word(&[j, i])?)?;
                    far = far.max(a.distance(&b));
                }
            }
        }
        for _ in 0..samples.min(10) {
            bracket = bracket.max(braid_invariance_residual(&random::stokes(n, 0.5, rng), kappa)?);
        }
    }
    Ok(vec![
        Check::new("braid relation", relation, 1e-11),
        Check::new("far commutation", far, 1e-11),
        Check::new("bracket braid invariance", bracket, 1e-9),
    ])
}

/// Values of `v` for the two-point closed form `s² = -4 sinh²(πv)`.
pub const N2_VALUES: [f64; 8] = [0.05, -0.05, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3];

/// `n = 2` closed form plus the `n = 3` Stokes diagnostics.
pub fn monodromy_oracle(rng: &mut TestRng, samples: usize, cfg: &IntegratorConfig) -> Result<Vec<Check>> {
    let u2 = DeformationPoint::from_real(&[0.0, 1.0], 0.0)?;
    let mut closed = 0.0f64;
    for v in N2_VALUES {
        let r = compute_stokes(&SkewSystem::from_coords(2, vec![C64::new(v, 0.0)])?, &u2, cfg)?;
        let s = r.s.coords()[0];
        let expect = -4.0 * (std::f64::consts::PI * v).sinh().powi(2);
        closed = closed.max((s * s - expect).norm() / expect.abs());
    }
    let (mut sym, mut tri, mut diag, mut spectral) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let v = random::skew_real(3, 0.3, rng);
        let u = random::distinct_real_point(3, rng);
        let r = compute_stokes(&v, &u, cfg)?;
        sym = sym.max(r.s_minus_residual);
        tri = tri.max(r.triangularity_residual);
        diag = diag.max(r.diagonal_residual);
        spectral = spectral.max(r.spectral_residual);
    }
    Ok(vec![
        Check::new("n=2 Stokes multiplier closed form (relative)", closed, 1e-6),
        Check::new("S- = S+^T", sym, 1e-6),
        Check::new("S+ triangular", tri, 1e-6),
        Check::new("S+ unit diagonal", diag, 1e-6),
        Check::new("spectrum of (S^T)^-1 S", spectral, 1e-6),
    ])
}

/// Outcome of comparing the pushed-forward bracket with the Stokes bracket.
#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardReport {
    pub kappa: C64,
    /// Worst relative entry error against the table at `kappa`.
    pub relative_error: f64,
    /// Largest entry change under step halving, relative to the largest entry.
    pub step_stability: f64,
    /// Least-squares `κ` fitted over all tables.
    pub fitted_kappa: C64,
    /// Worst relative entry error against the table at `fitted_kappa`.
    pub fitted_error: f64,
}

impl PushforwardReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::new(format!("pushforward equals Stokes bracket at kappa = {}", fmt_c(self.kappa)), self.relative_error, 1e-3)
                .with_note(format!(
                    "fitted kappa = {} (relative error {:.2e} at the fitted value)",
                    fmt_c(self.fitted_kappa),
                    self.fitted_error
                )),
            Check::new("pushforward step-halving stability", self.step_stability, 1e-4),
        ]
    }
}

fn fmt_c(z: C64) -> String {
    format!("{:.7}{:+.7}i", z.re, z.im)
}

/// Pushforward of the `so(n)` bracket for `samples` random `V` of size `n`.
pub fn pushforward_check(
    rng: &mut TestRng,
    n: usize,
    cfg: &IntegratorConfig,
    kappa: C64,
    opts: PushforwardOptions,
) -> Result<PushforwardReport> {
    pushforward_samples(rng, n, 1, cfg, kappa, opts)
}

pub fn pushforward_samples(
    rng: &mut TestRng,
    n: usize,
    samples: usize,
    cfg: &IntegratorConfig,
    kappa: C64,
    opts: PushforwardOptions,
) -> Result<PushforwardReport> {
    let mut tables: Vec<(BracketTable, BracketTable, BracketTable)> = Vec::new();
    for _ in 0..samples {
        let v = random::skew_real(n, 0.3, rng);
        let u = random::distinct_real_point(n, rng);
        let t = pushforward_bracket(&v, &u, cfg, opts)?;
        let half = pushforward_bracket(&v, &u, cfg, PushforwardOptions { step: opts.step / 2.0 })?;
        let s = compute_stokes(&v, &u, cfg)?.s;
        tables.push((t, half, bracket_table(&s, C64::new(1.0, 0.0))));
    }
    let floor = 1e-3;
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0f64);
    for (t, _, unit) in &tables {
        for (p, q, b) in unit.entries() {
            num += t.get(p, q) * b.conj();
            den += b.norm_sqr();
        }
    }
    let fitted = if den > 0.0 { num / den } else { C64::new(0.0, 0.0) };
    let (mut rel, mut stab, mut fit) = (0.0f64, 0.0f64, 0.0f64);
    for (t, half, unit) in &tables {
        rel = rel.max(t.relative_distance(&unit.scale(kappa), floor));
        fit = fit.max(t.relative_distance(&unit.scale(fitted), floor));
        let scale = t.entries().map(|(_, _, x)| x.norm()).fold(0.0, f64::max);
        let change = t.entries().map(|(p, q, x)| (half.get(p, q) - x).norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            stab = stab.max(change / scale);
        }
    }
    Ok(PushforwardReport { kappa, relative_error: rel, step_stability: stab, fitted_kappa: fitted, fitted_error: fit })
}

/// Leg of length 0.5 from `(0, 0.7, 1.5)` used by the isomonodromy check.
pub fn standard_leg() -> Result<DeformationPath> {
    let start = DeformationPoint::from_real(&[0.0, 0.7, 1.5], 0.0)?;
    let d = [0.2, -0.1, 0.4];
    let norm = d.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
    DeformationPath::leg(&start, &d.iter().map(|x| C64::new(0.5 * x / norm, 0.0)).collect::<Vec<_>>())
}

/// Stokes and spectral drift along a Lax leg, and agreement of the
/// Schlesinger endpoint with the Lax endpoint.
pub fn isomonodromy(rng: &mut TestRng, cfg: &IntegratorConfig) -> Result<Vec<Check>> {
    let path = standard_leg()?;
    let v0 = random::skew_real(3, 0.3, rng);
    let v1 = integrate_lax(&v0, &path, cfg)?;
    let s0 = compute_stokes(&v0, path.start(), cfg)?;
    let s1 = compute_stokes(&v1, path.end(), cfg)?;
    let drift = s0.s.distance(&s1.s);
    let eig = spectral_distance(&v0.eigenvalues()?, &v1.eigenvalues()?);

    let (a0, _) = gauge_to_a(&residues_from_v(&v0), &v0)?;
    let a1 = integrate_schlesinger(&a0, &path, cfg)?;
    let b1 = residues_from_v(&v1);
    let mut spectra = 0.0f64;
    for i in 0..3 {
        spectra = spectra.max(spectral_distance(&eigenvalues(&a1.b[i])?, &eigenvalues(&b1.b[i])?));
        for j in i + 1..3 {
            let sa = eigenvalues(&(&a1.b[i] + &a1.b[j]))?;
            let sb = eigenvalues(&(&b1.b[i] + &b1.b[j]))?;
            spectra = spectra.max(spectral_distance(&sa, &sb));
        }
    }
    Ok(vec![
        Check::new("Stokes drift along Lax flow", drift, 1e-5),
        Check::new("eigenvalue drift along Lax flow", eig, 1e-9),
        Check::new("Schlesinger vs Lax residue spectra", spectra, 1e-7),
    ])
}

/// Loop monodromy against the reflection formulas built from the computed `S`.
pub fn fuchsian_cross_check(rng: &mut TestRng, samples: usize, cfg: &IntegratorConfig) -> Result<Vec<Check>> {
    let (mut pairs, mut product) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let v = random::skew_real(3, 0.3, rng);
        let u = random::distinct_real_point(3, rng);
        let (p_traces, p_spec) = fuchsian_residuals(&v, &u, cfg)?;
        pairs = pairs.max(p_traces);
        product = product.max(p_spec);
    }
    Ok(vec![
        Check::new("loop traces Tr(M_i M_j) = n-4+s_ij^2", pairs, 1e-5),
        Check::new("spectrum of M_1...M_n vs -S^-1 S^T", product, 1e-5),
    ])
}

/// `(pair-trace residual, product-spectrum residual)` for one input.
pub fn fuchsian_residuals(v: &SkewSystem, u: &DeformationPoint, cfg: &IntegratorConfig) -> Result<(f64, f64)> {
    let n = v.n();
    let st = compute_stokes(v, u, cfg)?;
    let m = fuchsian_loop_monodromy(v, u, None, cfg)?;
    let p = &st.permutation;
    let mut pairs = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            let t = (&m[p[a]] * &m[p[b]]).trace();
            pairs = pairs.max((t - trace_pair_formula(&st.s, a, b)).norm());
        }
    }
    let prod = ComplexMatrix::product(n, p.iter().map(|&k| &m[k]));
    let target = st.s.monodromy_at_infinity()?.scale_real(-1.0);
    let spectral = spectral_distance(&eigenvalues(&prod)?, &eigenvalues(&target)?);
    Ok((pairs, spectral))
}

pub fn checks_to_json(checks: &[Check]) -> Value {
    let all = checks.iter().all(|c| c.passed);
    crate::io::versioned(json!({
        "passed": all,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn small_algebraic_run_passes() {
        let opts = VerifyOptions { samples: 3, ..VerifyOptions::default() };
        let checks = run_suite(Suite::Algebraic, &opts).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        let again = run_suite(Suite::Algebraic, &opts).unwrap();
        assert_eq!(checks, again);
    }
}
