use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hampoly::{ad_quadratic, poisson_bracket, poly_flow, resonance_modulus, FlowOptions, PolyHamiltonian};
use crate::spectral::{FrequencySpec, ModeState, TorusGrid};

/// Splits `P` into `Pi_gamma P` (orbits with `|Omega| >= gamma`) and the rest.
pub fn project_resonant(p: &PolyHamiltonian, gamma: f64, freq: &FrequencySpec) -> (PolyHamiltonian, PolyHamiltonian) {
    let kept = p.filter(|key, _| resonance_modulus(key, freq).abs() >= gamma);
    let removed = p.filter(|key, _| resonance_modulus(key, freq).abs() < gamma);
    (kept, removed)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BirkhoffDiagnostics {
    /// Smallest `|Omega|` among the orbits divided by `i Omega`.
    pub min_kept_modulus: f64,
    /// Largest `|Omega|` among the orbits left in `Q`.
    pub max_removed_modulus: f64,
    /// `degree -> (kept, removed)` stored-orbit counts.
    pub counts: BTreeMap<usize, (usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffOutput {
    pub gamma: f64,
    /// `chi[l - 1]` has degree `l + 2`.
    pub chi: Vec<PolyHamiltonian>,
    /// `q[l - 1]` has degree `l + 2` and is gamma-resonant.
    pub q: Vec<PolyHamiltonian>,
    pub diagnostics: BirkhoffDiagnostics,
}

/// Which time-one map of `chi` is composed with `T + Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `Phi_chi^{+1}`.
    Forward,
    /// `Phi_chi^{-1}`: with `F o Phi_H^{-t} = e^{t ad_H} F` this is the map
    /// that brings `T + Y` to `T + Q` up to higher order.
    Backward,
}

impl Direction {
    pub const NORMALIZING: Direction = Direction::Backward;

    fn time(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

fn check_family(y: &[PolyHamiltonian], grid_size: usize, what: &str) -> Result<()> {
    for (i, p) in y.iter().enumerate() {
        if p.degree() != i + 3 || p.grid_size() != grid_size {
            return Err(Error::Parameter(format!(
                "{what}[{}] must have degree {} on K = {grid_size}, got degree {} on K = {}",
                i + 1,
                i + 3,
                p.degree(),
                p.grid_size()
            )));
        }
    }
    Ok(())
}

/// Grades `1..=max_grade` of `e^{ad_chi}(T + Y) - T` for `chi = chi_1 + chi_2 + ...`.
/// Entry `0` of the result is unused (always zero).
pub fn normalized_hamiltonian(
    chi: &[PolyHamiltonian],
    y: &[PolyHamiltonian],
    freq: &FrequencySpec,
    max_grade: usize,
) -> Result<Vec<PolyHamiltonian>> {
    let k = freq.len();
    let half_omega: Vec<f64> = freq.table().iter().map(|w| 0.5 * w).collect();
    let zero = |g: usize| PolyHamiltonian::zero(k, g + 2);
    let mut term: Vec<PolyHamiltonian> = (0..=max_grade).map(|g| if g >= 1 && g <= y.len() { y[g - 1].clone() } else { zero(g) }).collect();
    let mut sum = term.clone();
    for step in 1..=max_grade {
        let mut next: Vec<PolyHamiltonian> = (0..=max_grade).map(zero).collect();
        for (m, c) in chi.iter().enumerate() {
            let m = m + 1;
            if c.is_empty() || m > max_grade {
                continue;
            }
            if step == 1 {
                // {chi_m, T}
                next[m] = next[m].add(&ad_quadratic(c, &half_omega)?)?;
            }
            for g in 1..=max_grade - m {
                if !term[g].is_empty() {
                    next[g + m] = next[g + m].add(&poisson_bracket(c, &term[g])?)?;
                }
            }
        }
        let inv = 1.0 / step as f64;
        for g in 0..=max_grade {
            next[g] = next[g].scale(inv);
            sum[g] = sum[g].add(&next[g])?;
        }
        term = next;
    }
    Ok(sum)
}

/// Removes the non-resonant part of `Y_1..Y_r` grade by grade:
/// `F_l = [e^{ad_{chi_{<l}}}(T + Y)]_l`, `chi_l = Pi_gamma F_l / (i Omega)`,
/// `Q_l = F_l - Pi_gamma F_l`, so that `{chi_l, T} = -Pi_gamma F_l`.
pub fn birkhoff_normal_form(
    y: &[PolyHamiltonian],
    gamma: f64,
    freq: &FrequencySpec,
    grid: &TorusGrid,
) -> Result<BirkhoffOutput> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Parameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if freq.len() != grid.size() {
        return Err(Error::SizeMismatch {
            expected: grid.size(),
            got: freq.len(),
        });
    }
    check_family(y, grid.size(), "Y")?;
    let r = y.len();
    let mut chi: Vec<PolyHamiltonian> = Vec::with_capacity(r);
    let mut q: Vec<PolyHamiltonian> = Vec::with_capacity(r);
    let mut diag = BirkhoffDiagnostics {
        min_kept_modulus: f64::INFINITY,
        max_removed_modulus: 0.0,
        counts: BTreeMap::new(),
    };
    for l in 1..=r {
        let f = normalized_hamiltonian(&chi, y, freq, l)?.swap_remove(l);
        let (kept, removed) = project_resonant(&f, gamma, freq);
        for (key, _) in kept.iter() {
            diag.min_kept_modulus = diag.min_kept_modulus.min(resonance_modulus(key, freq).abs());
        }
        for (key, _) in removed.iter() {
            diag.max_removed_modulus = diag.max_removed_modulus.max(resonance_modulus(key, freq).abs());
        }
        diag.counts.insert(l + 2, (kept.len(), removed.len()));
        chi.push(kept.map_stored(|key, c| c / Complex64::new(0.0, resonance_modulus(key, freq))));
        q.push(removed);
    }
    Ok(BirkhoffOutput {
        gamma,
        chi,
        q,
        diagnostics: diag,
    })
}

/// `R(u) = (T + Y)(Phi_chi^{+-1}(u)) - (T + Q)(u)`.
pub fn birkhoff_remainder(
    out: &BirkhoffOutput,
    y: &[PolyHamiltonian],
    freq: &FrequencySpec,
    u: &ModeState,
    direction: Direction,
    tol: f64,
) -> Result<f64> {
    let n = u.len();
    let v = poly_flow(
        &vec![0.0; n],
        &out.chi,
        u,
        direction.time(),
        FlowOptions {
            tol,
            ..FlowOptions::default()
        },
    )?;
    let t = |w: &ModeState| -> f64 { freq.table().iter().zip(&w.u).map(|(o, z)| 0.5 * o * z.norm_sqr()).sum() };
    let mut lhs = t(&v);
    for p in y {
        lhs += p.evaluate(&v)?;
    }
    let mut rhs = t(u);
    for p in &out.q {
        rhs += p.evaluate(u)?;
    }
    Ok(lhs - rhs)
}

/// True iff `{J_k, Q_l} = 0` (to `1e-12` absolute per coefficient) for every `l`.
pub fn commutation_check(q: &[PolyHamiltonian], k: i64, grid: &TorusGrid) -> Result<bool> {
    let j = PolyHamiltonian::super_action(grid, k)?;
    for p in q {
        if poisson_bracket(&j, p)?.max_abs_coefficient() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}
