use num_complex::Complex64;

use super::key::{Factor, Factors, MonomialKey};
use super::PolyHamiltonian;
use crate::error::{Error, Result};
use crate::integrators::MethodSpec;
use crate::nonlinearity::NonlinearitySpec;

/// Largest number of stored orbits the enumerating constructors accept.
pub const ORBIT_BUDGET: f64 = 2.0e6;

/// Rough count of momentum-admissible orbits of degree `d` on `K` modes:
/// all multisets of `d` symbols `(j, sigma)`, divided by `K` for the momentum
/// constraint.
pub fn estimated_orbits(grid_size: usize, degree: usize) -> f64 {
    let n = 2 * grid_size;
    let mut c = 1.0;
    for i in 0..degree {
        c *= (n + i) as f64 / (i + 1) as f64;
    }
    c / grid_size as f64
}

/// Visits every sorted `d`-multiset of factors over `N_K` whose momentum is
/// `0 mod K` and which is the stored representative of its conjugate pair.
pub(crate) fn for_each_admissible_orbit(grid_size: usize, degree: usize, mut f: impl FnMut(&MonomialKey)) -> Result<()> {
    let est = estimated_orbits(grid_size, degree);
    if est > ORBIT_BUDGET {
        return Err(Error::Budget(format!(
            "about {est:.3e} orbits of degree {degree} on K = {grid_size}, budget {ORBIT_BUDGET:e}"
        )));
    }
    let min = -((grid_size / 2) as i64);
    let symbols: Vec<Factor> = (0..grid_size as i64)
        .flat_map(|i| {
            let mode = (min + i) as i16;
            [Factor { mode, sign: -1 }, Factor { mode, sign: 1 }]
        })
        .collect();
    let n = symbols.len();
    let mut idx = vec![0usize; degree];
    if degree == 0 {
        return Ok(());
    }
    loop {
        let factors: Factors = idx.iter().map(|&i| symbols[i]).collect();
        let key = MonomialKey::from_factors(factors);
        if key.momentum().rem_euclid(grid_size as i64) == 0 && key <= key.conjugate() {
            f(&key);
        }
        // next nondecreasing index tuple
        let mut pos = degree;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            if idx[pos] + 1 < n {
                let v = idx[pos] + 1;
                for x in idx[pos..].iter_mut() {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// Degree-`(n+2)` Taylor coefficient of the mollified potential `V`:
/// `(P_n)_j^sigma = 2^{-(n+2)} c_n prod omega_{j_i}^{-1/2} phi(h omega_{j_i})` on
/// every tuple with momentum `0 mod K`, where `c_n = G^{(n+2)}(0) / (n+2)!`.
/// The `-K/2` mode enters like any other index (no extra weight).
pub fn taylor_of_v(n: usize, nl: &NonlinearitySpec, method: &MethodSpec) -> Result<PolyHamiltonian> {
    if n == 0 {
        return Err(Error::Parameter("Taylor coefficients start at n = 1".into()));
    }
    let grid = &method.grid;
    let degree = n + 2;
    let cn = nl.taylor_coefficient(n)?;
    if cn == 0.0 {
        return Ok(PolyHamiltonian::zero(grid.size(), degree));
    }
    let phi = method.mollifier.table(method.h, &method.freq);
    let weight: Vec<f64> = method
        .freq
        .table()
        .iter()
        .zip(&phi)
        .map(|(w, p)| p / w.sqrt())
        .collect();
    let offset = (grid.size() / 2) as i64;
    let pref = cn * 0.5f64.powi(degree as i32);
    let mut p = PolyHamiltonian::zero(grid.size(), degree);
    for_each_admissible_orbit(grid.size(), degree, |key| {
        let c = pref
            * key
                .factors()
                .iter()
                .map(|f| weight[(f.mode as i64 + offset) as usize])
                .product::<f64>();
        if c != 0.0 {
            p.coeffs.insert(key.clone(), Complex64::new(c, 0.0));
        }
    })?;
    Ok(p)
}
