//! Loop monodromy of the Fuchsian system `dY/dλ = Σ B_i/(λ - u_i) Y`.
//!
//! Loops are built in the rotated plane `w = e^{iψ}λ`, where the poles are
//! separated horizontally. Each loop leaves the base point (above every
//! pole) horizontally, descends vertically onto its pole, circles it
//! counter-clockwise, and returns the same way.

use std::f64::consts::{FRAC_PI_2, PI};

use super::path::{Path, Segment};
use super::{transport, IntegratorConfig};
use crate::error::{Error, Result};
use crate::fuchsian::residues_from_v;
use crate::linalg::{ComplexMatrix, C64};
use crate::poisson_so::{DeformationPoint, SkewSystem};

/// Base point used when none is given, in the original λ-plane.
pub fn default_loop_base(u: &DeformationPoint) -> C64 {
    let w = u.rotated();
    let (lo, hi) = extent(&w);
    let mean_re = w.iter().map(|x| x.re).sum::<f64>() / w.len().max(1) as f64;
    let top = w.iter().map(|x| x.im).fold(f64::NEG_INFINITY, f64::max);
    let base_w = C64::new(mean_re, top + 1f64.max(0.5 * (hi - lo)));
    base_w * C64::from_polar(1.0, -u.psi())
}

fn extent(w: &[C64]) -> (f64, f64) {
    let lo = w.iter().map(|x| x.re).fold(f64::INFINITY, f64::min);
    let hi = w.iter().map(|x| x.re).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Monodromy matrices `M_1, …, M_n` (original labelling) of the system with
/// residues `B_i = -E_i(V + 1/2)`, normalised so that the fundamental matrix
/// at the base point is the identity.
pub fn fuchsian_loop_monodromy(
    v: &SkewSystem,
    u: &DeformationPoint,
    base: Option<C64>,
    cfg: &IntegratorConfig,
) -> Result<Vec<ComplexMatrix>> {
    cfg.validate()?;
    let n = u.n();
    if v.n() != n {
        return Err(Error::Dimension(format!("V is {}×{} but u has {n} entries", v.n(), v.n())));
    }
    u.check_distinct()?;
    u.check_admissible()?;
    let rot = C64::from_polar(1.0, u.psi());
    let w = u.rotated();
    let base_w = rot * base.unwrap_or_else(|| default_loop_base(u));
    let top = w.iter().map(|x| x.im).fold(f64::NEG_INFINITY, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((w[i].re - w[j].re).abs());
        }
    }
    let rho = if n > 1 { gap / 3.0 } else { 0.5 };
    if base_w.im <= top + rho {
        return Err(Error::Path(format!(
            "base point must lie above every pole by more than {rho:.3e} in the rotated plane"
        )));
    }

    let res = residues_from_v(v);
    let b: Vec<ComplexMatrix> = res.b.clone();
    let coeff = |z: C64, buf: &mut [C64]| {
        buf.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for (k, bk) in b.iter().enumerate() {
            let f = (z - w[k]).inv();
            for (o, x) in buf.iter_mut().zip(bk.as_slice()) {
                *o += x * f;
            }
        }
    };

    let mut out = Vec::with_capacity(n);
    for (k, &c) in w.iter().enumerate() {
        let corner = C64::new(c.re, base_w.im);
        let touch = c + C64::new(0.0, rho);
        let mut path = Path::starting_line(base_w, corner).line(touch)?;
        path.push(Segment::Arc { center: c, radius: rho, theta0: FRAC_PI_2, theta1: FRAC_PI_2 + 2.0 * PI })?;
        let path = path.line(corner)?.line(base_w)?;
        let others: Vec<C64> = w.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, x)| *x).collect();
        path.check_clearance(&others, rho)?;
        let mut y = ComplexMatrix::identity(n);
        transport(n, coeff, &path, &mut y, cfg)?;
        out.push(y);
    }
    Ok(out)
}
