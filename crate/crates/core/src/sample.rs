//! Seeded random states and polynomials for property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::hampoly::PolyHamiltonian;
use crate::spectral::{ModeState, TorusGrid};

/// Mode state with real and imaginary parts uniform in `(-amp, amp)`.
pub fn random_state(n: usize, amp: f64, rng: &mut ChaCha8Rng) -> ModeState {
    ModeState::from_vec(
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
            .collect(),
    )
}

/// Momentum-conserving polynomial of the given degree built from `terms`
/// random tuples with coefficients uniform in the unit square.
pub fn random_polynomial(grid: &TorusGrid, degree: usize, terms: usize, rng: &mut ChaCha8Rng) -> PolyHamiltonian {
    let k = grid.size() as i64;
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut tuple: Vec<(i64, i8)> = Vec::with_capacity(degree);
        let mut m = 0i64;
        for _ in 0..degree - 1 {
            let j = rng.gen_range(grid.min_mode()..=grid.max_mode());
            let s: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
            m += s as i64 * j;
            tuple.push((j, s));
        }
        let s: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        // s * j = -m (mod K)
        let j = grid.wrap(-(s as i64) * m.rem_euclid(k));
        tuple.push((j, s));
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        list.push((tuple, c));
    }
    PolyHamiltonian::build(&list, grid, degree).expect("tuples satisfy the momentum condition")
}
