//! Finite-difference pushforward of the `so(n)` bracket through `V ↦ S`.

use rayon::prelude::*;

use super::stokes::compute_stokes_ordered;
use super::{compute_stokes, IntegratorConfig};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pairs::Pair;
use crate::poisson_so::{eval_form, so_bracket, DeformationPoint, SkewSystem};
use crate::stokes_bracket::BracketTable;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PushforwardOptions {
    /// Central-difference step is `step·(1 + |v_r|)`.
    pub step: f64,
}

impl Default for PushforwardOptions {
    fn default() -> Self {
        PushforwardOptions { step: 1e-5 }
    }
}

/// `J[p][r] = ∂s_p/∂v_r`, with `p` in the sorted labelling of the Stokes
/// matrix at `v` and `r` in the labelling of `v`.
pub fn pushforward_jacobian(
    v: &SkewSystem,
    u: &DeformationPoint,
    cfg: &IntegratorConfig,
    opts: PushforwardOptions,
) -> Result<Vec<Vec<C64>>> {
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::Invalid("finite-difference step must be positive".into()));
    }
    let n = v.n();
    let center = compute_stokes(v, u, cfg)?;
    let m = Pair::count(n);
    let jobs: Vec<(usize, f64)> = (0..m).flat_map(|r| [(r, 1.0), (r, -1.0)]).collect();
    let samples: Vec<Result<Vec<C64>>> = jobs
        .par_iter()
        .map(|&(r, sign)| {
            let pr = Pair::from_index(n, r);
            let h = opts.step * (1.0 + v.coords()[r].norm());
            let mut vp = v.clone();
            vp.set(pr, v.coords()[r] + C64::new(sign * h, 0.0));
            compute_stokes_ordered(&vp, u, center.ordering, cfg)
                .map(|res| res.s.coords().to_vec())
                .map_err(|e| {
                    let dir = if sign > 0.0 { '+' } else { '-' };
                    Error::Accuracy(format!("perturbation v_{pr} {dir} {h:.1e} failed: {e}"))
                })
        })
        .collect();
    let mut jac = vec![vec![C64::new(0.0, 0.0); m]; m];
    for r in 0..m {
        let h = opts.step * (1.0 + v.coords()[r].norm());
        let plus = samples[2 * r].as_ref().map_err(Clone::clone)?;
        let minus = samples[2 * r + 1].as_ref().map_err(Clone::clone)?;
        for p in 0..m {
            jac[p][r] = (plus[p] - minus[p]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `T[p, q] = Σ J[p][r] J[q][r'] {v_r, v_r'}` evaluated at `v`.
pub fn pushforward_bracket(
    v: &SkewSystem,
    u: &DeformationPoint,
    cfg: &IntegratorConfig,
    opts: PushforwardOptions,
) -> Result<BracketTable> {
    let n = v.n();
    let m = Pair::count(n);
    let jac = pushforward_jacobian(v, u, cfg, opts)?;
    let mut so = vec![vec![C64::new(0.0, 0.0); m]; m];
    for r in 0..m {
        for q in 0..m {
            so[r][q] = eval_form(&so_bracket(n, Pair::from_index(n, r), Pair::from_index(n, q))?, v);
        }
    }
    let mut table = BracketTable::new(n);
    for p in 0..m {
        for q in p + 1..m {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..m {
                for rr in 0..m {
                    acc += jac[p][r] * jac[q][rr] * so[r][rr];
                }
            }
            table.insert(Pair::from_index(n, p), Pair::from_index(n, q), acc);
        }
    }
    Ok(table)
}
