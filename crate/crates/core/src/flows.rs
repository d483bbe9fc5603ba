//! Isomonodromic flows in the positions `u`: the Lax form on `V` and the
//! Schlesinger system on Fuchsian residues, integrated along straight legs.

use crate::error::{Error, Result};
use crate::fuchsian::{schlesinger_rhs, ResidueTuple};
use crate::linalg::{eigenvalues, ComplexMatrix, C64};
use crate::monodromy::ode::integrate;
use crate::monodromy::{compute_stokes, spectral_distance, IntegratorConfig};
use crate::poisson_so::{hamiltonian, hamiltonian_vector_field, lax_rhs, v_i, DeformationPoint, SkewSystem};

/// Samples per leg used to pre-check admissibility.
pub const LEG_SAMPLES: usize = 64;

/// Piecewise-linear path through positions sharing `n` and `ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationPath {
    waypoints: Vec<DeformationPoint>,
}

impl DeformationPath {
    /// Validates every waypoint and [`LEG_SAMPLES`] interior samples of every
    /// leg for distinctness and admissibility.
    pub fn new(waypoints: Vec<DeformationPoint>) -> Result<Self> {
        let first = waypoints.first().ok_or_else(|| Error::Invalid("path needs at least one waypoint".into()))?;
        let (n, psi) = (first.n(), first.psi());
        for w in &waypoints {
            if w.n() != n {
                return Err(Error::Dimension(format!("waypoints mix n = {n} and n = {}", w.n())));
            }
            if w.psi() != psi {
                return Err(Error::Invalid("waypoints must share the angle psi".into()));
            }
        }
        for leg in waypoints.windows(2) {
            for k in 1..LEG_SAMPLES {
                point_on_leg(&leg[0], &leg[1], k as f64 / LEG_SAMPLES as f64)?;
            }
        }
        Ok(DeformationPath { waypoints })
    }

    /// Single straight leg from `start` to `start + delta`.
    pub fn leg(start: &DeformationPoint, delta: &[C64]) -> Result<Self> {
        if delta.len() != start.n() {
            return Err(Error::Dimension(format!("displacement has {} entries, expected {}", delta.len(), start.n())));
        }
        let end = start.with_u(start.u().iter().zip(delta).map(|(a, b)| a + b).collect())?;
        Self::new(vec![start.clone(), end])
    }

    pub fn waypoints(&self) -> &[DeformationPoint] {
        &self.waypoints
    }

    pub fn start(&self) -> &DeformationPoint {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &DeformationPoint {
        self.waypoints.last().expect("nonempty path")
    }

    /// Euclidean length in `ℂⁿ`.
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|l| l[0].u().iter().zip(l[1].u()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }
}

fn point_on_leg(a: &DeformationPoint, b: &DeformationPoint, t: f64) -> Result<DeformationPoint> {
    let u = a.u().iter().zip(b.u()).map(|(x, y)| x + (y - x) * t).collect();
    DeformationPoint::new(u, a.psi()).map_err(|e| Error::Path(format!("leg leaves the admissible region at t = {t:.4}: {e}")))
}

fn leg_velocity(a: &DeformationPoint, b: &DeformationPoint) -> Vec<C64> {
    a.u().iter().zip(b.u()).map(|(x, y)| y - x).collect()
}

/// Which assembly of `dV/du_i` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaxRhs {
    /// `[V_i, V]`.
    Commutator,
    /// `{v_p, H_i}` through the `so(n)` bracket.
    Hamiltonian,
}

/// `V` at the end of `path`, starting from `v0`.
pub fn integrate_lax(v0: &SkewSystem, path: &DeformationPath, cfg: &IntegratorConfig) -> Result<SkewSystem> {
    integrate_lax_with(v0, path, cfg, LaxRhs::Commutator)
}

pub fn integrate_lax_with(v0: &SkewSystem, path: &DeformationPath, cfg: &IntegratorConfig, rhs: LaxRhs) -> Result<SkewSystem> {
    Ok(run_lax(v0, None, path, cfg, rhs)?.0)
}

/// Lax flow with the gauge `dW/du_j = V_j W` carried along; returns `V` and `W`
/// at the end. If `W⁻¹B(V)W` matches a Schlesinger tuple at the start it
/// matches along the whole path.
pub fn integrate_lax_with_gauge(
    v0: &SkewSystem,
    w0: &ComplexMatrix,
    path: &DeformationPath,
    cfg: &IntegratorConfig,
) -> Result<(SkewSystem, ComplexMatrix)> {
    let n = v0.n();
    if w0.rows() != n || w0.cols() != n {
        return Err(Error::Dimension(format!("gauge must be {n}×{n}")));
    }
    let (v, w) = run_lax(v0, Some(w0), path, cfg, LaxRhs::Commutator)?;
    Ok((v, w.expect("gauge integrated")))
}

fn run_lax(
    v0: &SkewSystem,
    w0: Option<&ComplexMatrix>,
    path: &DeformationPath,
    cfg: &IntegratorConfig,
    rhs: LaxRhs,
) -> Result<(SkewSystem, Option<ComplexMatrix>)> {
    cfg.validate()?;
    let n = v0.n();
    if n != path.start().n() {
        return Err(Error::Dimension(format!("V is {n}×{n} but the path has n = {}", path.start().n())));
    }
    let m = v0.coords().len();
    let mut state: Vec<C64> = v0.coords().to_vec();
    if let Some(w) = w0 {
        state.extend_from_slice(w.as_slice());
    }
    let opts = cfg.ode_options();
    for leg in path.waypoints().windows(2) {
        let du = leg_velocity(&leg[0], &leg[1]);
        let mut failure: Option<Error> = None;
        integrate(
            |t, y, dy| {
                dy.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
                if failure.is_some() {
                    return;
                }
                let mut eval = || -> Result<()> {
                    let u = point_on_leg(&leg[0], &leg[1], t)?;
                    let v = SkewSystem::from_coords(n, y[..m].to_vec())?;
                    for (i, dui) in du.iter().enumerate() {
                        if *dui == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let dv = match rhs {
                            LaxRhs::Commutator => lax_rhs(&v, &u, i)?,
                            LaxRhs::Hamiltonian => hamiltonian_vector_field(&v, &u, i)?,
                        };
                        for (d, x) in dy[..m].iter_mut().zip(dv.coords()) {
                            *d += x * dui;
                        }
                        if y.len() > m {
                            let vi = v_i(&v, &u, i)?;
                            for a in 0..n {
                                for b in 0..n {
                                    let mut acc = C64::new(0.0, 0.0);
                                    for k in 0..n {
                                        acc += vi[(a, k)] * y[m + k * n + b];
                                    }
                                    dy[m + a * n + b] += acc * dui;
                                }
                            }
                        }
                    }
                    Ok(())
                };
                if let Err(e) = eval() {
                    failure = Some(e);
                }
            },
            0.0,
            1.0,
            &mut state,
            &opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    let v = SkewSystem::from_coords(n, state[..m].to_vec())?;
    let w = if w0.is_some() { Some(ComplexMatrix::from_fn(n, n, |a, b| state[m + a * n + b])) } else { None };
    Ok((v, w))
}

/// Residues at the end of `path` under the Schlesinger system.
pub fn integrate_schlesinger(a0: &ResidueTuple, path: &DeformationPath, cfg: &IntegratorConfig) -> Result<ResidueTuple> {
    cfg.validate()?;
    let n = a0.n();
    let count = a0.len();
    if count != path.start().n() {
        return Err(Error::Dimension(format!("{count} residues but the path has n = {}", path.start().n())));
    }
    let block = n * n;
    let mut state: Vec<C64> = a0.b.iter().flat_map(|m| m.as_slice().to_vec()).collect();
    let opts = cfg.ode_options();
    for leg in path.waypoints().windows(2) {
        let du = leg_velocity(&leg[0], &leg[1]);
        let mut failure: Option<Error> = None;
        integrate(
            |t, y, dy| {
                dy.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
                if failure.is_some() {
                    return;
                }
                let mut eval = || -> Result<()> {
                    let u = point_on_leg(&leg[0], &leg[1], t)?;
                    let b = (0..count)
                        .map(|i| ComplexMatrix::from_fn(n, n, |r, c| y[i * block + r * n + c]))
                        .collect();
                    let a = ResidueTuple::from_residues(b)?;
                    let d = schlesinger_rhs(&a, &u)?;
                    for i in 0..count {
                        for (j, duj) in du.iter().enumerate() {
                            for (o, x) in dy[i * block..(i + 1) * block].iter_mut().zip(d[i][j].as_slice()) {
                                *o += x * duj;
                            }
                        }
                    }
                    Ok(())
                };
                if let Err(e) = eval() {
                    failure = Some(e);
                }
            },
            0.0,
            1.0,
            &mut state,
            &opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    let b = (0..count).map(|i| ComplexMatrix::from_fn(n, n, |r, c| state[i * block + r * n + c])).collect();
    ResidueTuple::from_residues(b)
}

/// Drift diagnostics along a path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    pub v_end: SkewSystem,
    /// Max entry of `S_end - S_start` in the common sorted labelling.
    pub stokes_drift: f64,
    /// Matching distance between the spectra of `V` at both ends.
    pub eigen_drift: f64,
    pub hamiltonians_start: Vec<C64>,
    pub hamiltonians_end: Vec<C64>,
    pub stokes_start: Vec<C64>,
    pub stokes_end: Vec<C64>,
}

pub fn conservation_report(v0: &SkewSystem, path: &DeformationPath, cfg: &IntegratorConfig) -> Result<ConservationReport> {
    let v1 = integrate_lax(v0, path, cfg)?;
    let s0 = compute_stokes(v0, path.start(), cfg)?;
    let s1 = compute_stokes(&v1, path.end(), cfg)?;
    if s0.permutation != s1.permutation {
        return Err(Error::Path("canonical ordering changed along the path".into()));
    }
    let eig0 = eigenvalues(&v0.matrix())?;
    let eig1 = eigenvalues(&v1.matrix())?;
    let hams = |v: &SkewSystem, u: &DeformationPoint| (0..v.n()).map(|i| hamiltonian(v, u, i)).collect::<Result<Vec<_>>>();
    Ok(ConservationReport {
        stokes_drift: s0.s.distance(&s1.s),
        eigen_drift: spectral_distance(&eig0, &eig1),
        hamiltonians_start: hams(v0, path.start())?,
        hamiltonians_end: hams(&v1, path.end())?,
        stokes_start: s0.s.coords().to_vec(),
        stokes_end: s1.s.coords().to_vec(),
        v_end: v1,
    })
}
