//! Seeded generators for test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{eigenvalues, ComplexMatrix, C64};
use crate::pairs::Pair;
use crate::poisson_so::{DeformationPoint, SkewSystem};
use crate::reflection::StokesMatrix;

pub type TestRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the disc `|z| <= radius`.
pub fn disc(radius: f64, rng: &mut impl Rng) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Entries uniform in the disc of the given radius.
pub fn stokes(n: usize, radius: f64, rng: &mut impl Rng) -> StokesMatrix {
    let coords = (0..Pair::count(n)).map(|_| disc(radius, rng)).collect();
    StokesMatrix::from_coords(n, coords).expect("coordinate count matches")
}

/// Real skew matrix with entries uniform in `[-bound, bound]`, rescaled so
/// that its spectral norm is at most `bound`.
pub fn skew_real(n: usize, bound: f64, rng: &mut impl Rng) -> SkewSystem {
    let coords: Vec<C64> = (0..Pair::count(n)).map(|_| C64::new(rng.gen_range(-bound..=bound), 0.0)).collect();
    let v = SkewSystem::from_coords(n, coords).expect("coordinate count matches");
    let radius = eigenvalues(&v.matrix())
        .map(|mu| mu.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    if radius > bound {
        v.scale(C64::new(bound / radius, 0.0))
    } else {
        v
    }
}

/// Complex coordinates uniform in a disc.
pub fn skew_complex(n: usize, radius: f64, rng: &mut impl Rng) -> SkewSystem {
    let coords = (0..Pair::count(n)).map(|_| disc(radius, rng)).collect();
    SkewSystem::from_coords(n, coords).expect("coordinate count matches")
}

/// Real positions in `[-1.5, 1.5]` with pairwise gaps above 0.25, angle 0.
pub fn distinct_real_point(n: usize, rng: &mut impl Rng) -> DeformationPoint {
    let width = 1.5f64.max(0.3 * n as f64);
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-width..=width)).collect();
        let ok = (0..n).all(|i| (i + 1..n).all(|j| (u[i] - u[j]).abs() > 0.25));
        if ok {
            return DeformationPoint::from_real(&u, 0.0).expect("gaps are bounded below");
        }
    }
}

pub fn complex_matrix(rows: usize, cols: usize, radius: f64, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| disc(radius, rng))
}
