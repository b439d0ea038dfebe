use std::fmt::Write as _;
use std::str::FromStr;

use super::{enforce_cfl, initial_state, modified_hamiltonian_for, run_trajectory, ExperimentConfig};
use crate::error::{Error, Result};
use crate::hampoly::{taylor_of_v, PolyHamiltonian, DEFAULT_TAIL_TOL};
use crate::integrators::{lie_step, MethodSpec};
use crate::normalform::{
    birkhoff_normal_form, birkhoff_remainder, flow_modified, min_small_divisor, modified_hamiltonian, poly_lie_step,
    solve_cohomology, BirkhoffOutput, Direction, ModifiedHamiltonian,
};
use crate::spectral::{sobolev_norm, ModeState};

/// Values at or below this size on every level count as exactly zero.
pub const EXACT_TOL: f64 = 1e-13;

/// Local error tolerance of the polynomial flows used by the studies.
const STUDY_FLOW_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `||Phi_P^h o Phi_T^h(u) - Phi_{H_h}^h(u)||_{H^{1/2}}` with `P = P_1 + ... + P_r`.
    BeaDefectLie,
    /// Same with the full potential `V` in the kick.
    BeaDefectFull,
    /// `max |H_h(u^n) - H_h(u^0)|` over `nh <= 1/eps`.
    EnergyDrift,
    /// `max_k max |J_k(u^n) - J_k(u^0)|` over `nh <= 1/eps`.
    ActionDrift,
    /// `|(T + Y)(Phi_chi^{-1} u) - (T + Q)(u)|` with `Y` the parts of `H_h`.
    BnfRemainder,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::BeaDefectLie,
        Quantity::BeaDefectFull,
        Quantity::EnergyDrift,
        Quantity::ActionDrift,
        Quantity::BnfRemainder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::BeaDefectLie => "bea_defect_lie",
            Quantity::BeaDefectFull => "bea_defect_full",
            Quantity::EnergyDrift => "energy_drift",
            Quantity::ActionDrift => "action_drift",
            Quantity::BnfRemainder => "bnf_remainder",
        }
    }

    /// Exponent predicted by the theory at order `r`.
    pub fn expected_exponent(self, r: usize) -> f64 {
        match self {
            Quantity::BeaDefectLie | Quantity::BeaDefectFull => r as f64 + 2.0,
            Quantity::EnergyDrift | Quantity::ActionDrift => 3.0,
            Quantity::BnfRemainder => r as f64 + 3.0,
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub eps: f64,
    pub value: f64,
    /// Finite and positive, hence used in the fit.
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub quantity: Quantity,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `log value` against `log eps`; `None` when exact.
    pub exponent: Option<f64>,
    /// Every value is at or below [`EXACT_TOL`].
    pub exact: bool,
    pub expected: f64,
}

impl ScalingTable {
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("eps,value,usable\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.16e},{:.16e},{}", r.eps, r.value, r.usable);
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// ε-independent objects shared by the levels of a study.
struct Prepared {
    method: MethodSpec,
    u1: ModeState,
    taylor: Vec<PolyHamiltonian>,
    hh: Option<ModifiedHamiltonian>,
    bnf: Option<BirkhoffOutput>,
}

fn prepare(base: &ExperimentConfig, quantity: Quantity) -> Result<Prepared> {
    let method = base.method()?;
    enforce_cfl(base, &method)?;
    let u1 = initial_state(base, 1.0)?;
    let mut p = Prepared {
        u1,
        taylor: Vec::new(),
        hh: None,
        bnf: None,
        method,
    };
    match quantity {
        Quantity::BeaDefectLie | Quantity::BeaDefectFull => {
            let sol = solve_cohomology(base.r, &p.method, &base.g, DEFAULT_TAIL_TOL)?;
            p.hh = Some(modified_hamiltonian(&sol)?);
            if quantity == Quantity::BeaDefectLie {
                p.taylor = (1..=base.r)
                    .map(|n| taylor_of_v(n, &base.g, &p.method))
                    .collect::<Result<_>>()?;
            }
        }
        Quantity::EnergyDrift => {
            p.hh = Some(modified_hamiltonian_for(base, &p.method)?.ok_or_else(|| {
                Error::Budget(format!("H_h of order {} on K = {} is over budget", base.r, base.grid_size))
            })?);
        }
        Quantity::ActionDrift => {}
        Quantity::BnfRemainder => {
            let sol = solve_cohomology(base.r, &p.method, &base.g, DEFAULT_TAIL_TOL)?;
            let hh = modified_hamiltonian(&sol)?;
            let k = base.modes.first().copied().unwrap_or(1);
            let div = min_small_divisor(&p.method.freq, base.r, &p.method.grid, Some(k))?;
            p.bnf = Some(birkhoff_normal_form(&hh.parts, 0.5 * div.modulus, &p.method.freq, &p.method.grid)?);
            p.hh = Some(hh);
        }
    }
    Ok(p)
}

fn difference_norm(a: &ModeState, b: &ModeState, p: &Prepared) -> f64 {
    let d = ModeState {
        u: a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect(),
    };
    sobolev_norm(&d, &p.method.grid, 0.5)
}

fn measure(base: &ExperimentConfig, quantity: Quantity, p: &Prepared, eps: f64) -> Result<f64> {
    let u = p.u1.scaled(eps);
    let hh = p.hh.as_ref();
    match quantity {
        Quantity::BeaDefectLie => {
            let a = poly_lie_step(&u, &p.taylor, &p.method)?;
            let b = flow_modified(hh.expect("prepared"), &u, p.method.h, STUDY_FLOW_TOL)?;
            Ok(difference_norm(&a, &b, p))
        }
        Quantity::BeaDefectFull => {
            let a = lie_step(&u, &p.method, &base.g)?;
            let b = flow_modified(hh.expect("prepared"), &u, p.method.h, STUDY_FLOW_TOL)?;
            Ok(difference_norm(&a, &b, p))
        }
        Quantity::EnergyDrift | Quantity::ActionDrift => {
            let n = (1.0 / (eps * base.h)).floor() as usize;
            let report = run_trajectory(base, eps, n, hh)?;
            let s = report.summary();
            Ok(if quantity == Quantity::EnergyDrift {
                s.modified_energy_drift
            } else {
                s.action_drift.iter().copied().fold(0.0, f64::max)
            })
        }
        Quantity::BnfRemainder => {
            let out = p.bnf.as_ref().expect("prepared");
            let y = &hh.expect("prepared").parts;
            Ok(birkhoff_remainder(out, y, &p.method.freq, &u, Direction::NORMALIZING, STUDY_FLOW_TOL)?.abs())
        }
    }
}

/// Measures `quantity` at each ε level and fits the log-log exponent.
pub fn scaling_study(base: &ExperimentConfig, quantity: Quantity, eps_levels: &[f64]) -> Result<ScalingTable> {
    base.validate()?;
    if eps_levels.len() < 3 {
        return Err(Error::Config("a scaling study needs at least three eps levels".into()));
    }
    if eps_levels.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Config("eps levels must be positive".into()));
    }
    let q0 = eps_levels[1] / eps_levels[0];
    if eps_levels
        .windows(2)
        .any(|w| ((w[1] / w[0]) / q0 - 1.0).abs() > 1e-6)
        || q0 == 1.0
    {
        return Err(Error::Config("eps levels must be geometrically spaced".into()));
    }
    let p = prepare(base, quantity)?;
    let mut rows = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        let value = match measure(base, quantity, &p, eps) {
            Ok(v) => v,
            Err(e @ (Error::BlowUp { .. } | Error::NonConvergence(_))) => {
                warn_row(eps, &e);
                f64::NAN
            }
            Err(e) => return Err(e),
        };
        rows.push(ScalingRow {
            eps,
            value,
            usable: value.is_finite() && value > 0.0,
        });
    }
    let exact = rows.iter().all(|r| r.value.is_finite() && r.value.abs() <= EXACT_TOL);
    let exponent = if exact {
        None
    } else {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.usable).map(|r| (r.eps, r.value)).collect();
        if pts.len() < 3 {
            return Err(Error::NonConvergence(format!(
                "only {} usable levels for {}",
                pts.len(),
                quantity.name()
            )));
        }
        fit_exponent(&pts)
    };
    Ok(ScalingTable {
        quantity,
        rows,
        exponent,
        exact,
        expected: quantity.expected_exponent(base.r),
    })
}

fn warn_row(eps: f64, e: &Error) {
    log::warn!("level eps = {eps} flagged: {e}");
}
