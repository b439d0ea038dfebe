//! Backward error analysis of the splitting step (modified Hamiltonian) and
//! Birkhoff normal form of the result, with small-divisor diagnostics.

mod birkhoff;
mod cohomology;
mod divisors;
mod io;

#[cfg(test)]
mod tests;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hampoly::{resonance_modulus, PolyHamiltonian};
use crate::spectral::FrequencySpec;

pub use birkhoff::{
    birkhoff_normal_form, birkhoff_remainder, commutation_check, normalized_hamiltonian, project_resonant,
    BirkhoffDiagnostics, BirkhoffOutput, Direction,
};
pub use cohomology::{
    flow_modified, modified_hamiltonian, poly_lie_step, solve_cohomology, CohomologySolution, ModifiedHamiltonian,
};
pub use divisors::{auto_gamma, min_small_divisor, SmallDivisor, DIVISOR_MAX_GRID, DIVISOR_MAX_ORDER};
pub use io::{read_birkhoff, read_solution, write_birkhoff, write_solution, Manifest};

/// Sign `s` in the eigenvalue `phi(s i h Omega)` of `phi(ad_{hT})` on a monomial.
///
/// With `ad_B X = {B, X}` and the flow convention `i du/dt = grad H`, the
/// diagonal bracket gives `{hT, X} = i h Omega X`, so `s = +1`. The
/// ε-scaling tests fail with `s = -1`.
pub const EPS_SIGN: f64 = 1.0;

/// Below this modulus `phi(i h Omega)` is treated as a resonant step.
pub const RESONANT_EIGEN_TOL: f64 = 1e-8;

/// `(e^z - 1) / z`, continuous at `z = 0`.
pub fn phi_series(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        // 1 + z/2 + z^2/6 + z^3/24 + z^4/120
        let mut acc = Complex64::new(1.0 / 120.0, 0.0);
        for d in [24.0, 6.0, 2.0, 1.0] {
            acc = acc * z + 1.0 / d;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Eigenvalue of `phi(ad_{hT})` on the monomial with resonance modulus `omega`.
pub fn phi_eigenvalue(h: f64, omega: f64) -> Complex64 {
    phi_series(Complex64::new(0.0, EPS_SIGN * h * omega))
}

/// `phi(ad_{hT}) Q`, coefficient-wise.
pub fn apply_phi_ad(q: &PolyHamiltonian, h: f64, freq: &FrequencySpec) -> PolyHamiltonian {
    q.map_stored(|key, c| c * phi_eigenvalue(h, resonance_modulus(key, freq)))
}

/// Inverse of [`apply_phi_ad`].
pub fn invert_phi_ad(q: &PolyHamiltonian, h: f64, freq: &FrequencySpec) -> Result<PolyHamiltonian> {
    invert_phi_ad_signed(q, h, freq, EPS_SIGN)
}

pub(crate) fn invert_phi_ad_signed(q: &PolyHamiltonian, h: f64, freq: &FrequencySpec, sign: f64) -> Result<PolyHamiltonian> {
    q.try_map_stored(|key, c| {
        let e = phi_series(Complex64::new(0.0, sign * h * resonance_modulus(key, freq)));
        if e.norm() < RESONANT_EIGEN_TOL {
            return Err(Error::ResonantStep {
                tuple: key.to_string(),
                modulus: e.norm(),
            });
        }
        Ok(c / e)
    })
}
