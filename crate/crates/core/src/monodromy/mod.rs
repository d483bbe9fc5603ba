//! Numerical monodromy data of `dY/dz = (U + V/z) Y`.
//!
//! The irregular point at infinity is handled by a formal series
//! `Γ(z) = 1 + Γ₁/z + Γ₂/z² + …` evaluated on a large circle; everything else
//! is propagated by the adaptive integrator in [`ode`].

pub mod ode;
pub mod path;

mod loops;
mod pushforward;
mod stokes;

pub use loops::{default_loop_base, fuchsian_loop_monodromy};
pub use pushforward::{pushforward_bracket, pushforward_jacobian, PushforwardOptions};
pub use stokes::{compute_stokes, compute_stokes_ordered, spectral_check, spectral_distance, Ordering, StokesResult};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::poisson_so::{DeformationPoint, SkewSystem};
use ode::{integrate, OdeOptions, OdeStats};
use path::Path;

/// Knobs shared by every integration in this module and in [`crate::flows`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Longest step, measured as arc length along the path.
    pub max_step: f64,
    /// Radius of the circle on which the formal series is evaluated;
    /// derived from the data when `None`.
    pub matching_radius: Option<f64>,
    /// Radius of the small circle on which left and right solutions are compared.
    pub inner_radius: Option<f64>,
    /// Number of terms `Γ_k` kept, `1..=16`.
    pub asymptotic_order: usize,
    /// Each path segment is covered by at least this many steps.
    pub path_points_per_arc: usize,
    /// Threshold on the `S₋ = S₊ᵀ`, triangularity and unit-diagonal diagnostics.
    pub acceptance_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-13,
            max_step: 1.0,
            matching_radius: None,
            inner_radius: None,
            asymptotic_order: 8,
            path_points_per_arc: 16,
            acceptance_tol: 1e-6,
            max_steps: 2_000_000,
        }
    }
}

pub const MAX_ASYMPTOTIC_ORDER: usize = 16;

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let tol_ok = |t: f64| t > 1e-14 && t < 1e-2;
        if !tol_ok(self.rel_tol) || !tol_ok(self.abs_tol) {
            return Err(Error::Invalid(format!(
                "tolerances must lie in (1e-14, 1e-2), got rel {:e} abs {:e}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Invalid("max_step must be positive".into()));
        }
        for (name, r) in [("matching radius", self.matching_radius), ("inner radius", self.inner_radius)] {
            if let Some(r) = r {
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::Invalid(format!("{name} must be positive and finite")));
                }
            }
        }
        if self.asymptotic_order == 0 || self.asymptotic_order > MAX_ASYMPTOTIC_ORDER {
            return Err(Error::Invalid(format!(
                "asymptotic order must be in 1..={MAX_ASYMPTOTIC_ORDER}, got {}",
                self.asymptotic_order
            )));
        }
        if self.path_points_per_arc == 0 {
            return Err(Error::Invalid("path_points_per_arc must be at least 1".into()));
        }
        if !(self.acceptance_tol > 0.0) {
            return Err(Error::Invalid("acceptance tolerance must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: self.max_steps,
        }
    }
}

/// Propagates `Y' = A(z) Y` along `path` starting from `y0`.
pub fn integrate_linear<F>(a: F, path: &Path, y0: &ComplexMatrix, cfg: &IntegratorConfig) -> Result<ComplexMatrix>
where
    F: Fn(C64) -> ComplexMatrix,
{
    cfg.validate()?;
    let n = y0.require_square("initial fundamental matrix")?;
    let mut y = y0.clone();
    transport(
        n,
        |z, buf| {
            let m = a(z);
            buf.copy_from_slice(m.as_slice());
        },
        path,
        &mut y,
        cfg,
    )?;
    Ok(y)
}

/// In-place transport of `y` (any number of columns) with the coefficient
/// written into an `n × n` buffer by `coeff`.
pub(crate) fn transport<F>(n: usize, mut coeff: F, path: &Path, y: &mut ComplexMatrix, cfg: &IntegratorConfig) -> Result<OdeStats>
where
    F: FnMut(C64, &mut [C64]),
{
    if y.rows() != n {
        return Err(Error::Dimension(format!("state has {} rows, coefficient is {n}×{n}", y.rows())));
    }
    let cols = y.cols();
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    let mut stats = OdeStats::default();
    for seg in path.segments() {
        let len = seg.length();
        if len == 0.0 {
            continue;
        }
        let mut opts = cfg.ode_options();
        opts.max_step = (cfg.max_step / len).min(1.0 / cfg.path_points_per_arc as f64);
        let s = integrate(
            |t, state, dstate| {
                let z = seg.point(t);
                let dz = seg.velocity(t);
                coeff(z, &mut a);
                for i in 0..n {
                    for c in 0..cols {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..n {
                            acc += a[i * n + k] * state[k * cols + c];
                        }
                        dstate[i * cols + c] = acc * dz;
                    }
                }
            },
            0.0,
            1.0,
            y.as_mut_slice(),
            &opts,
        )?;
        stats.absorb(s);
    }
    Ok(stats)
}

/// Coefficients `Γ_0 = 1, Γ_1, …, Γ_order` of the formal solution at infinity.
///
/// Substituting `Y = Γ(z)e^{zU}` gives `[Γ_k, U] = (V + (k-1))Γ_{k-1}` off the
/// diagonal and `k·diag(Γ_k) = -diag(V Γ_k)` from the next order.
pub fn asymptotic_coefficients(v: &SkewSystem, u: &[C64], order: usize) -> Result<Vec<ComplexMatrix>> {
    let n = v.n();
    if u.len() != n {
        return Err(Error::Dimension(format!("V is {n}×{n} but u has {} entries", u.len())));
    }
    let vm = v.matrix();
    let mut out = vec![ComplexMatrix::identity(n)];
    for k in 1..=order {
        let prev = &out[k - 1];
        let rhs = &(&vm * prev) + &prev.scale_real((k - 1) as f64);
        let mut g = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = u[j] - u[i];
                    if d.norm() == 0.0 {
                        return Err(Error::Distinctness { i, j, gap: 0.0 });
                    }
                    g[(i, j)] = rhs[(i, j)] / d;
                }
            }
        }
        let vg = &vm * &g;
        for i in 0..n {
            g[(i, i)] = -vg[(i, i)] / k as f64;
        }
        out.push(g);
    }
    Ok(out)
}

/// `Γ(z)` truncated after `Γ_order/z^order`.
pub fn asymptotic_series(coeffs: &[ComplexMatrix], z: C64) -> ComplexMatrix {
    let n = coeffs[0].rows();
    let inv = z.inv();
    let mut acc = ComplexMatrix::zeros(n, n);
    for g in coeffs.iter().rev() {
        acc = &acc.scale(inv) + g;
    }
    acc
}

/// `Γ(z)·e^{zU}` with `order` correction terms; `z` must satisfy `|z| ≥ radius`.
pub fn asymptotic_init(v: &SkewSystem, u: &DeformationPoint, z: C64, order: usize, radius: f64) -> Result<ComplexMatrix> {
    if z.norm() < radius {
        return Err(Error::Validity { modulus: z.norm(), radius });
    }
    if order == 0 || order > MAX_ASYMPTOTIC_ORDER {
        return Err(Error::Invalid(format!("asymptotic order must be in 1..={MAX_ASYMPTOTIC_ORDER}")));
    }
    let coeffs = asymptotic_coefficients(v, u.u(), order)?;
    let g = asymptotic_series(&coeffs, z);
    let e: Vec<C64> = u.u().iter().map(|ui| (z * ui).exp()).collect();
    Ok(&g * &ComplexMatrix::from_diag(&e))
}

/// Max entry of `Γ'(z) + Γ(z)U - (U + V/z)Γ(z)`, the defect of the truncated
/// series as a solution (with the exponential factor removed).
pub fn asymptotic_residual(v: &SkewSystem, u: &[C64], z: C64, order: usize) -> Result<f64> {
    let coeffs = asymptotic_coefficients(v, u, order)?;
    let n = v.n();
    let g = asymptotic_series(&coeffs, z);
    let mut dg = ComplexMatrix::zeros(n, n);
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        dg = &dg + &c.scale(-(k as f64) * z.powi(-(k as i32) - 1));
    }
    let um = ComplexMatrix::from_diag(u);
    let a = &um + &v.matrix().scale(z.inv());
    let r = &(&dg + &(&g * &um)) - &(&a * &g);
    Ok(r.max_abs())
}

/// Default matching radius for positions `w`:
/// `max(40·max(1, max|w - w̄|, 1/min|w_i - w_j|), 100·‖Γ₁‖)`.
///
/// `R·|w_i - w_j| ≥ 40` bounds the exponentially small error of the truncated
/// series, and `‖Γ₁‖/R ≤ 0.01` keeps the leading correction small.
pub fn default_matching_radius(v: &SkewSystem, w: &[C64]) -> Result<f64> {
    let n = w.len();
    if n <= 1 {
        return Ok(40.0);
    }
    let mean = w.iter().sum::<C64>() / n as f64;
    let spread = w.iter().map(|x| (x - mean).norm()).fold(0.0, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((w[i] - w[j]).norm());
        }
    }
    let g1 = asymptotic_coefficients(v, w, 1)?;
    Ok((40.0 * 1f64.max(spread).max(1.0 / gap)).max(100.0 * g1[1].max_abs()))
}
