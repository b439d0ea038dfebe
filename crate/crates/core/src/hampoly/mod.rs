//! Real-valued homogeneous polynomials on the mode space, stored by their
//! symmetric coefficients.
//!
//! A polynomial of degree `d` is `P(u) = sum_{j, sigma} P_j^sigma u_{j_1}^{sigma_1} ... u_{j_d}^{sigma_d}`
//! over ordered tuples, where `u^{+1} = u` and `u^{-1} = conj(u)`. The
//! coefficients are invariant under permutations (one value per sorted
//! orbit), satisfy `P_j^{-sigma} = conj(P_j^sigma)` (only one of each conjugate
//! pair is stored) and vanish unless the momentum `sum sigma_i j_i` is `0 mod K`.

mod bracket;
mod flow;
pub(crate) mod graded;
mod io;
mod key;
mod taylor;
mod timepoly;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{japanese, FrequencySpec, ModeState, TorusGrid};

pub use bracket::{ad_quadratic, poisson_bracket};
pub use flow::{poly_flow, FlowOptions, DEFAULT_FLOW_TOL};
pub use graded::{exp_ad_graded, GradedFamily, GradedGenerator, DEFAULT_TAIL_TOL, MAX_SERIES_TERMS};
pub use io::{read_polynomials, write_polynomials};
pub use key::{Factor, MonomialKey};
pub use taylor::{estimated_orbits, taylor_of_v, ORBIT_BUDGET};
pub use timepoly::TimePoly;

/// Relative tolerance of the reality check in [`PolyHamiltonian::evaluate`].
pub const REALITY_TOL: f64 = 1e-12;

/// Relative pruning threshold applied after brackets.
pub const PRUNE_REL: f64 = 1e-16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A homogeneous real-valued polynomial of fixed degree on `C^{N_K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyHamiltonian {
    grid_size: usize,
    degree: usize,
    coeffs: BTreeMap<MonomialKey, Complex64>,
}

/// One term of a fully expanded polynomial: an orbit (conjugates listed
/// separately) and its orbit sum `multiplicity * symmetric coefficient`.
#[derive(Debug, Clone)]
pub(crate) struct Expanded {
    pub key: MonomialKey,
    pub weight: Complex64,
}

impl PolyHamiltonian {
    pub fn zero(grid_size: usize, degree: usize) -> Self {
        Self {
            grid_size,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds `P(u) = Re sum_terms c * prod u_{j_i}^{sigma_i}` from ordered tuples.
    /// Tuples in one orbit are merged; each stored coefficient is the orbit
    /// total divided by the number of ordered tuples in the orbit. Indices are
    /// reduced into `N_K` first.
    pub fn build(terms: &[(Vec<(i64, i8)>, Complex64)], grid: &TorusGrid, degree: usize) -> Result<Self> {
        let mut acc: BTreeMap<MonomialKey, Complex64> = BTreeMap::new();
        for (tuple, c) in terms {
            if tuple.len() != degree {
                return Err(Error::Parameter(format!(
                    "tuple {tuple:?} has length {}, expected degree {degree}",
                    tuple.len()
                )));
            }
            let key = MonomialKey::from_pairs(tuple.iter().map(|&(j, s)| (grid.wrap(j), s)))?;
            let m = key.momentum();
            if m.rem_euclid(grid.size() as i64) != 0 {
                return Err(Error::Momentum {
                    tuple: key.to_string(),
                    momentum: m,
                    grid: grid.size(),
                });
            }
            // Re(c m) = (c m + conj(c) conj(m)) / 2, booked on the stored representative
            let conj = key.conjugate();
            if key == conj {
                *acc.entry(key).or_insert(ZERO) += Complex64::new(c.re, 0.0);
            } else if key < conj {
                *acc.entry(key).or_insert(ZERO) += c * 0.5;
            } else {
                *acc.entry(conj).or_insert(ZERO) += c.conj() * 0.5;
            }
        }
        let mut p = Self::zero(grid.size(), degree);
        for (key, total) in acc {
            let mult = key.multiplicity() as f64;
            p.insert_symmetric(key, total / mult);
        }
        Ok(p)
    }

    /// Builds from symmetric coefficients given on arbitrary orbit
    /// representatives (one entry per orbit; conjugate entries are averaged).
    pub fn from_symmetric(
        coeffs: impl IntoIterator<Item = (MonomialKey, Complex64)>,
        grid_size: usize,
        degree: usize,
    ) -> Result<Self> {
        let mut acc: BTreeMap<MonomialKey, (Complex64, u32)> = BTreeMap::new();
        for (key, c) in coeffs {
            if key.degree() != degree {
                return Err(Error::Parameter(format!("key {key} does not have degree {degree}")));
            }
            let m = key.momentum();
            if m.rem_euclid(grid_size as i64) != 0 {
                return Err(Error::Momentum {
                    tuple: key.to_string(),
                    momentum: m,
                    grid: grid_size,
                });
            }
            let conj = key.conjugate();
            let (stored, value) = if key <= conj { (key, c) } else { (conj, c.conj()) };
            let e = acc.entry(stored).or_insert((ZERO, 0));
            e.0 += value;
            e.1 += 1;
        }
        let mut p = Self::zero(grid_size, degree);
        for (key, (sum, n)) in acc {
            let mut c = sum / n as f64;
            if key.is_self_conjugate() {
                c.im = 0.0;
            }
            if c != ZERO {
                p.coeffs.insert(key, c);
            }
        }
        Ok(p)
    }

    fn insert_symmetric(&mut self, key: MonomialKey, sym: Complex64) {
        let mut c = sym;
        if key.is_self_conjugate() {
            c.im = 0.0;
        }
        if c != ZERO {
            self.coeffs.insert(key, c);
        }
    }

    /// Quadratic diagonal polynomial `(1/2) sum lambda_k |u_k|^2` (`lambda` in mode order).
    pub fn diagonal_quadratic(lambda: &[f64], grid: &TorusGrid) -> Result<Self> {
        grid.check_len(lambda.len())?;
        let terms: Vec<_> = grid
            .modes()
            .zip(lambda)
            .map(|(k, &l)| (vec![(k, 1), (k, -1)], Complex64::new(0.5 * l, 0.0)))
            .collect();
        Self::build(&terms, grid, 2)
    }

    /// `T = (1/2) sum omega_k |u_k|^2`.
    pub fn kinetic(grid: &TorusGrid, freq: &FrequencySpec) -> Result<Self> {
        Self::diagonal_quadratic(freq.table(), grid)
    }

    /// The super-action `J_k` as a quadratic polynomial.
    pub fn super_action(grid: &TorusGrid, k: i64) -> Result<Self> {
        grid.index(k)?;
        let minus = grid.wrap(-k);
        let terms = if minus == k {
            vec![(vec![(k, 1), (k, -1)], Complex64::new(1.0, 0.0))]
        } else {
            vec![
                (vec![(k, 1), (k, -1)], Complex64::new(0.5, 0.0)),
                (vec![(minus, 1), (minus, -1)], Complex64::new(0.5, 0.0)),
            ]
        };
        Self::build(&terms, grid, 2)
    }

    #[inline]
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of stored orbits (one per conjugate pair).
    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored orbits and their symmetric coefficients, in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&MonomialKey, &Complex64)> {
        self.coeffs.iter()
    }

    /// Symmetric coefficient of any orbit (stored or conjugate).
    pub fn coefficient(&self, key: &MonomialKey) -> Complex64 {
        if let Some(c) = self.coeffs.get(key) {
            return *c;
        }
        self.coeffs.get(&key.conjugate()).map(|c| c.conj()).unwrap_or(ZERO)
    }

    /// `sup |P_j^sigma| prod <j_i>^{1/2}`.
    pub fn h_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c.norm() * k.factors().iter().map(|f| japanese(f.mode as i64).sqrt()).product::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid_size != other.grid_size || self.degree != other.degree {
            return Err(Error::Parameter(format!(
                "incompatible polynomials: (K={}, degree {}) vs (K={}, degree {})",
                self.grid_size, self.degree, other.grid_size, other.degree
            )));
        }
        Ok(())
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let e = out.coeffs.entry(k.clone()).or_insert(ZERO);
            *e += c * factor;
        }
        out.coeffs.retain(|_, c| *c != ZERO);
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out.coeffs.retain(|_, c| *c != ZERO);
        out
    }

    /// Coefficient-wise map `c -> f(key, c)` on stored orbits. `f` must be
    /// compatible with conjugation (`f(conj key, conj c) = conj f(key, c)`),
    /// which holds for multipliers `m(Omega)` with `m(-Omega) = conj m(Omega)`.
    pub fn map_stored<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&MonomialKey, Complex64) -> Complex64,
    {
        let mut out = Self::zero(self.grid_size, self.degree);
        for (k, c) in &self.coeffs {
            out.insert_symmetric(k.clone(), f(k, *c));
        }
        out
    }

    /// Fallible version of [`PolyHamiltonian::map_stored`].
    pub fn try_map_stored<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&MonomialKey, Complex64) -> Result<Complex64>,
    {
        let mut out = Self::zero(self.grid_size, self.degree);
        for (k, c) in &self.coeffs {
            out.insert_symmetric(k.clone(), f(k, *c)?);
        }
        Ok(out)
    }

    /// Keeps the stored orbits selected by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&MonomialKey, &Complex64) -> bool) -> Self {
        Self {
            grid_size: self.grid_size,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, c)| keep(k, c))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Drops coefficients below `rel * max |coeff|`.
    pub fn prune(&mut self, rel: f64) {
        let cut = rel * self.max_abs_coefficient();
        self.coeffs.retain(|_, c| c.norm() > cut);
    }

    /// Every orbit with its conjugate listed separately, weighted by orbit sum.
    pub(crate) fn expanded(&self) -> Vec<Expanded> {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for (k, c) in &self.coeffs {
            let w = c * k.multiplicity() as f64;
            let conj = k.conjugate();
            if conj == *k {
                out.push(Expanded { key: k.clone(), weight: w });
            } else {
                out.push(Expanded { key: k.clone(), weight: w });
                out.push(Expanded {
                    key: conj,
                    weight: w.conj(),
                });
            }
        }
        out
    }

    fn check_state(&self, u: &ModeState) -> Result<()> {
        if u.len() != self.grid_size {
            return Err(Error::SizeMismatch {
                expected: self.grid_size,
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `P(u)`, with the imaginary part checked to vanish and discarded.
    pub fn evaluate(&self, u: &ModeState) -> Result<f64> {
        self.check_state(u)?;
        let offset = (self.grid_size / 2) as i64;
        let mut total = ZERO;
        let mut scale = 0.0;
        for e in self.expanded() {
            let term = e.weight * e.key.monomial(&u.u, offset);
            scale += term.norm();
            total += term;
        }
        if total.im.abs() > REALITY_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Reality {
                imag: total.im,
                scale,
            });
        }
        Ok(total.re)
    }

    /// `grad P(u) = 2 dP/d(conj u)`.
    pub fn gradient(&self, u: &ModeState) -> Result<ModeState> {
        self.check_state(u)?;
        let mut g = vec![ZERO; self.grid_size];
        self.accumulate_gradient(&self.expanded(), &u.u, &mut g, Complex64::new(1.0, 0.0));
        Ok(ModeState { u: g })
    }

    /// `out += scale * grad P(u)` using a precomputed expansion.
    pub(crate) fn accumulate_gradient(&self, expanded: &[Expanded], u: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        let offset = (self.grid_size / 2) as i64;
        for e in expanded {
            let factors = e.key.factors();
            let mut i = 0;
            while i < factors.len() {
                let f = factors[i];
                let mut count = 1;
                while i + count < factors.len() && factors[i + count] == f {
                    count += 1;
                }
                if f.sign < 0 {
                    let rest = e.key.monomial_without(u, offset, i);
                    let idx = (f.mode as i64 + offset) as usize;
                    out[idx] += scale * e.weight * (2.0 * count as f64) * rest;
                }
                i += count;
            }
        }
    }
}

/// Resonance modulus `Omega_{j, sigma} = sum sigma_i omega_{j_i}`.
pub fn resonance_modulus(key: &MonomialKey, freq: &FrequencySpec) -> f64 {
    key.factors()
        .iter()
        .map(|f| f.sign as f64 * freq.omega(f.mode as i64))
        .sum()
}

/// Sum of polynomials of equal degree.
pub fn sum_all<'a>(polys: impl IntoIterator<Item = &'a PolyHamiltonian>, grid_size: usize, degree: usize) -> Result<PolyHamiltonian> {
    let mut acc = PolyHamiltonian::zero(grid_size, degree);
    for p in polys {
        acc = acc.add(p)?;
    }
    Ok(acc)
}
