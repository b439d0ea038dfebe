use std::collections::HashMap;

use num_complex::Complex64;

use super::key::{Factor, Factors, MonomialKey};
use super::{PolyHamiltonian, PRUNE_REL, ZERO};
use crate::error::{Error, Result};

/// `{P, X} = 2i sum_k (dP/d conj(u_k) dX/du_k - dP/du_k dX/d conj(u_k))`.
///
/// Contracted term by term: a factor `(k, s)` of an orbit of `P` pairs with a
/// factor `(k, -s)` of an orbit of `X`, contributing
/// `-2i s * count_P * count_X * weight_P * weight_X` to the merged orbit.
pub fn poisson_bracket(p: &PolyHamiltonian, x: &PolyHamiltonian) -> Result<PolyHamiltonian> {
    if p.grid_size != x.grid_size {
        return Err(Error::Parameter(format!(
            "bracket of polynomials on different grids ({} vs {})",
            p.grid_size, x.grid_size
        )));
    }
    let degree = p.degree + x.degree - 2;
    let mut out = PolyHamiltonian::zero(p.grid_size, degree);
    if p.is_empty() || x.is_empty() {
        return Ok(out);
    }
    let pe = p.expanded();
    let xe = x.expanded();

    // index of X's orbits by the distinct factors they contain
    let mut index: HashMap<Factor, Vec<(usize, usize)>> = HashMap::new();
    for (n, e) in xe.iter().enumerate() {
        for_each_distinct(e.key.factors(), |f, count| {
            index.entry(f).or_default().push((n, count));
        });
    }

    let mut acc: HashMap<MonomialKey, Complex64> = HashMap::new();
    for a in &pe {
        for_each_distinct(a.key.factors(), |f, count_a| {
            let Some(partners) = index.get(&f.conj()) else {
                return;
            };
            let rest_a = a.key.without(f);
            let base = Complex64::new(0.0, -2.0 * f.sign as f64) * (count_a as f64) * a.weight;
            for &(n, count_b) in partners {
                let b = &xe[n];
                let mut merged: Factors = rest_a.clone();
                merged.extend(b.key.without(f.conj()));
                let key = MonomialKey::from_factors(merged);
                *acc.entry(key).or_insert(ZERO) += base * (count_b as f64) * b.weight;
            }
        });
    }

    // orbit totals -> symmetric coefficients on stored representatives,
    // averaging each value with the conjugate of its partner
    let mut stored: Vec<(MonomialKey, Complex64)> = Vec::new();
    for (key, total) in &acc {
        let conj = key.conjugate();
        if *key > conj {
            continue;
        }
        let partner = acc.get(&conj).copied().unwrap_or(ZERO);
        let value = if *key == conj {
            Complex64::new(total.re, 0.0)
        } else {
            (total + partner.conj()) * 0.5
        };
        stored.push((key.clone(), value / key.multiplicity() as f64));
    }
    for (key, c) in stored {
        if c != ZERO {
            out.coeffs.insert(key, c);
        }
    }
    out.prune(PRUNE_REL);
    Ok(out)
}

fn for_each_distinct(factors: &[Factor], mut f: impl FnMut(Factor, usize)) {
    let mut i = 0;
    while i < factors.len() {
        let mut c = 1;
        while i + c < factors.len() && factors[i + c] == factors[i] {
            c += 1;
        }
        f(factors[i], c);
        i += c;
    }
}

/// `{P, Z}` for `Z = sum lambda_j |u_j|^2` (no one-half): every coefficient is
/// multiplied by `-2i sum sigma_i lambda_{j_i}`. `lambda` is in mode order.
pub fn ad_quadratic(p: &PolyHamiltonian, lambda: &[f64]) -> Result<PolyHamiltonian> {
    if lambda.len() != p.grid_size {
        return Err(Error::SizeMismatch {
            expected: p.grid_size,
            got: lambda.len(),
        });
    }
    let offset = (p.grid_size / 2) as i64;
    Ok(p.map_stored(|key, c| {
        let s: f64 = key
            .factors()
            .iter()
            .map(|f| f.sign as f64 * lambda[(f.mode as i64 + offset) as usize])
            .sum();
        c * Complex64::new(0.0, -2.0 * s)
    }))
}
