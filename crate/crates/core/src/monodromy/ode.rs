//! Dormand–Prince 5(4) with PI step-size control on a flat complex state.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Step-control parameters for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on |dt|.
    pub max_step: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rel_tol: 1e-12, abs_tol: 1e-13, max_step: f64::INFINITY, initial_step: None, max_steps: 2_000_000 }
    }
}

/// Counters from one call of [`integrate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl OdeStats {
    pub fn absorb(&mut self, other: OdeStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
///
/// `f(t, y, dy)` writes the derivative into `dy`. The error norm is the
/// root-mean-square of `err_k / (abs_tol + rel_tol * max(|y_k|, |y_new_k|))`.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y: &mut [C64], opts: &OdeOptions) -> Result<OdeStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let mut stats = OdeStats::default();
    if t0 == t1 || y.is_empty() {
        return Ok(stats);
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::Invalid("integration interval must be finite".into()));
    }
    let dim = y.len();
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); dim]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); dim];
    let mut ynew = vec![C64::new(0.0, 0.0); dim];

    let mut t = t0;
    f(t, y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = match opts.initial_step {
        Some(h) => h.abs().min(span),
        None => initial_step(&mut f, t, dir, y, &k[0], opts, &mut tmp, &mut ynew, &mut stats),
    }
    .min(opts.max_step)
    .min(span);
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Accuracy(format!(
                "step budget of {} exhausted at t = {t:.6e}",
                opts.max_steps
            )));
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let hs = dir * h;
        if h <= 1e-14 * (1.0 + t.abs()) {
            return Err(Error::Path(format!("step size underflow at t = {t:.6e}")));
        }

        stage(&mut tmp, y, hs, &[(A21, &k[0])]);
        f(t + C2 * hs, &tmp, &mut k[1]);
        stage(&mut tmp, y, hs, &[(A31, &k[0]), (A32, &k[1])]);
        f(t + C3 * hs, &tmp, &mut k[2]);
        stage(&mut tmp, y, hs, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
        f(t + C4 * hs, &tmp, &mut k[3]);
        stage(&mut tmp, y, hs, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])]);
        f(t + C5 * hs, &tmp, &mut k[4]);
        stage(&mut tmp, y, hs, &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])]);
        f(t + hs, &tmp, &mut k[5]);
        stage(&mut ynew, y, hs, &[(A71, &k[0]), (A73, &k[2]), (A74, &k[3]), (A75, &k[4]), (A76, &k[5])]);
        let tnew = if last { t1 } else { t + hs };
        let (head, tail) = k.split_at_mut(6);
        f(tnew, &ynew, &mut tail[0]);
        stats.evaluations += 6;

        let mut acc = 0.0;
        for i in 0..dim {
            let e = hs
                * (head[0][i] * E1
                    + head[2][i] * E3
                    + head[3][i] * E4
                    + head[4][i] * E5
                    + head[5][i] * E6
                    + tail[0][i] * E7);
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(ynew[i].norm());
            acc += (e.norm() / sc).powi(2);
        }
        let err = (acc / dim as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Accuracy(format!("non-finite state at t = {t:.6e}")));
        }

        let expo = 0.2 - 0.75 * BETA;
        if err <= 1.0 {
            let mut fac = err.max(1e-16).powf(-expo) * err_old.powf(BETA) * SAFETY;
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            t = tnew;
            stats.accepted += 1;
            last_rejected = false;
            if last {
                return Ok(stats);
            }
            h = (h * fac).min(opts.max_step);
        } else {
            let fac = (err.powf(-expo) * SAFETY).clamp(FAC_MIN, 1.0);
            h *= fac;
            stats.rejected += 1;
            last_rejected = true;
        }
    }
}

fn stage(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &Vec<C64>)]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for (a, k) in terms {
            s += k[i] * *a;
        }
        *o = y[i] + s * h;
    }
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t: f64,
    dir: f64,
    y: &[C64],
    f0: &[C64],
    opts: &OdeOptions,
    tmp: &mut [C64],
    f1: &mut [C64],
    stats: &mut OdeStats,
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let dim = y.len() as f64;
    let scale = |v: &C64, yi: &C64| v.norm() / (opts.abs_tol + opts.rel_tol * yi.norm());
    let d0 = (y.iter().zip(y).map(|(a, b)| scale(a, b).powi(2)).sum::<f64>() / dim).sqrt();
    let d1 = (f0.iter().zip(y).map(|(a, b)| scale(a, b).powi(2)).sum::<f64>() / dim).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y.len() {
        tmp[i] = y[i] + f0[i] * (dir * h0);
    }
    f(t + dir * h0, tmp, f1);
    stats.evaluations += 1;
    let d2 = (f1.iter().zip(f0).zip(y).map(|((a, b), yi)| scale(&(a - b), yi).powi(2)).sum::<f64>() / dim).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let stats = integrate(|_, y, dy| dy[0] = y[0], 0.0, 1.0, &mut y, &OdeOptions::default()).unwrap();
        assert!((y[0].re - std::f64::consts::E).abs() < 1e-11);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn rotation_backwards() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let i = C64::new(0.0, 1.0);
        integrate(|_, y, dy| dy[0] = i * y[0], 0.0, -3.0, &mut y, &OdeOptions::default()).unwrap();
        let expect = C64::from_polar(1.0, -3.0);
        assert!((y[0] - expect).norm() < 1e-11);
    }

    #[test]
    fn zero_rhs_leaves_state() {
        let mut y = vec![C64::new(2.0, -1.0), C64::new(0.5, 0.0)];
        let before = y.clone();
        integrate(|_, _, dy| dy.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0)), 0.0, 5.0, &mut y, &OdeOptions::default())
            .unwrap();
        assert_eq!(y, before);
    }

    #[test]
    fn blow_up_reports_error() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let opts = OdeOptions { max_steps: 100_000, ..OdeOptions::default() };
        let r = integrate(|_, y, dy| dy[0] = y[0] * y[0], 0.0, 2.0, &mut y, &opts);
        assert!(r.is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let opts = OdeOptions { max_steps: 5, ..OdeOptions::default() };
        let r = integrate(|t, _, dy| dy[0] = C64::new((50.0 * t).cos(), 0.0), 0.0, 10.0, &mut y, &opts);
        assert!(matches!(r, Err(Error::Accuracy(_))));
    }
}
