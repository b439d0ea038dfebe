//! Experiment configuration, trajectory runs, ε-scaling studies and presets.

pub mod checks;
mod config;
mod presets;
mod study;

#[cfg(test)]
mod tests;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::hampoly::{estimated_orbits, DEFAULT_TAIL_TOL, ORBIT_BUDGET};
use crate::integrators::{cfl_check, flow_v, simulate, MethodSpec, ObserverSpec, Scheme};
use crate::nonlinearity::NonlinearitySpec;
use crate::normalform::{modified_hamiltonian, solve_cohomology, ModifiedHamiltonian};
use crate::report::DriftReport;
use crate::spectral::{power_law_initial_data, to_modes, ModeState};

pub use config::ExperimentConfig;
pub use presets::{preset, preset_names, PRESETS};
pub use study::{fit_exponent, scaling_study, Quantity, ScalingRow, ScalingTable, EXACT_TOL};

/// Power-law datum of the config with `||q0||_{H^{s0}} = eps`, in mode variables.
pub fn initial_state(config: &ExperimentConfig, eps: f64) -> Result<ModeState> {
    let method = config.method()?;
    let state = power_law_initial_data(&method.grid, config.s0, eps)?;
    to_modes(&state, &method.grid, &method.freq)
}

/// Surfaces a failed CFL check as a warning, or as an error under `strict`.
pub fn enforce_cfl(config: &ExperimentConfig, method: &MethodSpec) -> Result<()> {
    let cfl = cfl_check(config.r, config.delta, config.h, &method.freq)?;
    if !cfl.pass {
        if config.strict {
            return Err(Error::Cfl {
                lhs: cfl.lhs,
                rhs: cfl.rhs,
            });
        }
        warn!(
            "CFL condition fails for r = {}: (r+2) h omega_(K/2) = {:.4} > 2 pi - delta = {:.4}",
            config.r, cfl.lhs, cfl.rhs
        );
    }
    Ok(())
}

/// `H_h` of order `config.r`, or `None` when the orbit count is over budget.
pub fn modified_hamiltonian_for(config: &ExperimentConfig, method: &MethodSpec) -> Result<Option<ModifiedHamiltonian>> {
    if config.g.is_zero() {
        return Ok(Some(ModifiedHamiltonian::kinetic_only(&method.freq)));
    }
    let est = estimated_orbits(config.grid_size, config.r + 2);
    if est > ORBIT_BUDGET {
        info!("H_h skipped: about {est:.2e} orbits of degree {} on K = {}", config.r + 2, config.grid_size);
        return Ok(None);
    }
    let sol = solve_cohomology(config.r, method, &config.g, DEFAULT_TAIL_TOL)?;
    Ok(Some(modified_hamiltonian(&sol)?))
}

/// `H_h` along the trajectory of `method`. The Strang and two-step iterates are
/// conjugate to Lie iterates through `Phi_V^{h/2}`, which is applied first.
pub fn modified_energy_observable<'a>(
    hh: &'a ModifiedHamiltonian,
    method: &'a MethodSpec,
    nl: &'a NonlinearitySpec,
) -> impl Fn(&ModeState) -> Result<f64> + 'a {
    move |u: &ModeState| match method.scheme {
        Scheme::Lie => hh.evaluate(u),
        Scheme::Strang | Scheme::TwoStepQP => hh.evaluate(&flow_v(u, 0.5 * method.h, method, nl)?),
    }
}

/// Runs `config` for `n_steps` from the power-law datum of size `eps`.
pub(crate) fn run_trajectory(config: &ExperimentConfig, eps: f64, n_steps: usize, hh: Option<&ModifiedHamiltonian>) -> Result<DriftReport> {
    let method = config.method()?;
    let u0 = initial_state(config, eps)?;
    let observable = hh.map(|hh| modified_energy_observable(hh, &method, &config.g));
    let observer = ObserverSpec {
        modes: config.modes.clone(),
        stride: None,
        modified_energy: observable.as_ref().map(|f| f as &dyn Fn(&ModeState) -> Result<f64>),
    };
    simulate(&u0, &method, &config.g, n_steps, &observer)
}

/// Deterministic trajectory of `config`, written to `config.out` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<DriftReport> {
    config.validate()?;
    let method = config.method()?;
    enforce_cfl(config, &method)?;
    let n = config.n_steps();
    if (n as f64 * config.h - config.t_final).abs() > 1e-9 * config.t_final.max(1.0) {
        warn!("T = {} is not a multiple of h = {}; running {n} steps", config.t_final, config.h);
    }
    let hh = modified_hamiltonian_for(config, &method)?;
    let report = run_trajectory(config, config.eps, n, hh.as_ref())?;
    if let Some(path) = &config.out {
        report.emit_csv(path)?;
    }
    Ok(report)
}
