use crate::error::{Error, Result};
use crate::spectral::{FrequencySpec, TorusGrid};

/// Largest grid accepted by [`min_small_divisor`].
pub const DIVISOR_MAX_GRID: usize = 16;
/// Largest order accepted by [`min_small_divisor`].
pub const DIVISOR_MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SmallDivisor {
    /// `|Omega|` of the witness.
    pub modulus: f64,
    /// A tuple `(j_i, sigma_i)` achieving it.
    pub witness: Vec<(i64, i8)>,
}

/// Smallest nonzero `|Omega_{j, sigma}|` over tuples of length at most `r + 2`.
///
/// `Omega` depends only on the signed count of each `|j|`, so the search runs
/// over integer profiles `n_a` with `sum |n_a| <= r + 2`; profiles that vanish
/// identically are exactly resonant and skipped. With `k` set, only tuples with
/// `m_k = n_{|k|} != 0` count. No momentum condition is imposed.
pub fn min_small_divisor(freq: &FrequencySpec, r: usize, grid: &TorusGrid, k: Option<i64>) -> Result<SmallDivisor> {
    if grid.size() > DIVISOR_MAX_GRID || r > DIVISOR_MAX_ORDER {
        return Err(Error::Budget(format!(
            "small-divisor search needs K <= {DIVISOR_MAX_GRID} and r <= {DIVISOR_MAX_ORDER} (got K = {}, r = {r}); \
             about (2K)^(r+2) = {:.3e} tuples",
            grid.size(),
            (2.0 * grid.size() as f64).powi(r as i32 + 2)
        )));
    }
    if freq.len() != grid.size() {
        return Err(Error::SizeMismatch {
            expected: grid.size(),
            got: freq.len(),
        });
    }
    let max_abs = (grid.size() / 2) as i64;
    let target = match k {
        Some(k) => {
            grid.index(k)?;
            Some(k.unsigned_abs() as usize)
        }
        None => None,
    };
    let omega: Vec<f64> = (0..=max_abs).map(|a| freq.omega(a)).collect();
    let mut search = Search {
        omega: &omega,
        budget: r + 2,
        target,
        profile: vec![0; omega.len()],
        best: None,
    };
    search.run(0, 0, 0.0);
    let (modulus, profile) = search.best.ok_or_else(|| {
        Error::Parameter("no tuple with a nonzero resonance modulus in range".into())
    })?;
    let mut witness = Vec::new();
    for (a, &n) in profile.iter().enumerate() {
        let a = a as i64;
        let mode = if a <= grid.max_mode() { a } else { -a };
        let sign: i8 = if n > 0 { 1 } else { -1 };
        for _ in 0..n.unsigned_abs() {
            witness.push((mode, sign));
        }
    }
    Ok(SmallDivisor { modulus, witness })
}

struct Search<'a> {
    omega: &'a [f64],
    budget: usize,
    target: Option<usize>,
    profile: Vec<i64>,
    best: Option<(f64, Vec<i64>)>,
}

impl Search<'_> {
    fn run(&mut self, a: usize, used: usize, partial: f64) {
        if a == self.omega.len() {
            if used == 0 || self.target.is_some_and(|t| self.profile[t] == 0) {
                return;
            }
            let m = partial.abs();
            if self.best.as_ref().is_none_or(|(b, _)| m < *b) {
                self.best = Some((m, self.profile.clone()));
            }
            return;
        }
        let room = (self.budget - used) as i64;
        for n in -room..=room {
            self.profile[a] = n;
            self.run(a + 1, used + n.unsigned_abs() as usize, partial + n as f64 * self.omega[a]);
        }
        self.profile[a] = 0;
    }
}

/// Default threshold `max(eps^{1/2}, divisor / 2)`.
pub fn auto_gamma(eps: f64, min_divisor: f64) -> f64 {
    eps.sqrt().max(0.5 * min_divisor)
}
