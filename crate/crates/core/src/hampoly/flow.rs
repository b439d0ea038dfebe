use num_complex::Complex64;

use super::{Expanded, PolyHamiltonian, ZERO};
use crate::error::{Error, Result};
use crate::integrators::unit_phase;
use crate::spectral::ModeState;

/// Default local error tolerance of [`poly_flow`].
pub const DEFAULT_FLOW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Local error per step, relative to the sup norm of the state.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_FLOW_TOL,
            max_steps: 1_000_000,
        }
    }
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Field<'a> {
    lambda: &'a [f64],
    parts: Vec<(&'a PolyHamiltonian, Vec<Expanded>)>,
    v: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl Field<'_> {
    /// `dw/ds = -i e^{i s lambda} grad chi(e^{-i s lambda} w)`.
    fn eval(&mut self, s: f64, w: &[Complex64], out: &mut [Complex64]) {
        let phases: Vec<Complex64> = self.lambda.iter().map(|&l| unit_phase(s * l)).collect();
        for i in 0..w.len() {
            self.v[i] = w[i] * phases[i].conj();
            self.g[i] = ZERO;
        }
        for (p, e) in &self.parts {
            p.accumulate_gradient(e, &self.v, &mut self.g, Complex64::new(1.0, 0.0));
        }
        for i in 0..w.len() {
            out[i] = Complex64::new(0.0, -1.0) * phases[i] * self.g[i];
        }
    }
}

/// Time-`t` flow of `i dv/dt = grad(Z + chi)(v)` with `Z = (1/2) sum lambda_k |v_k|^2`.
///
/// The diagonal part is removed exactly (interaction picture) and the rest is
/// integrated by an adaptive embedded Runge-Kutta 5(4) pair.
pub fn poly_flow(
    z_lambda: &[f64],
    chi: &[PolyHamiltonian],
    u: &ModeState,
    t: f64,
    opts: FlowOptions,
) -> Result<ModeState> {
    let n = u.len();
    if z_lambda.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: z_lambda.len(),
        });
    }
    for p in chi {
        if p.grid_size() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: p.grid_size(),
            });
        }
    }
    let rotate = |w: &[Complex64], s: f64| -> ModeState {
        ModeState {
            u: w.iter()
                .zip(z_lambda)
                .map(|(z, &l)| z * unit_phase(-s * l))
                .collect(),
        }
    };
    let parts: Vec<_> = chi.iter().filter(|p| !p.is_empty()).map(|p| (p, p.expanded())).collect();
    if t == 0.0 || parts.is_empty() {
        return Ok(rotate(&u.u, t));
    }
    let mut field = Field {
        lambda: z_lambda,
        parts,
        v: vec![ZERO; n],
        g: vec![ZERO; n],
    };

    let mut w = u.u.clone();
    let mut s = 0.0;
    let dir = t.signum();
    let mut dt = t.abs() / 8.0;
    let min_dt = 1e-14 * t.abs();
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![ZERO; n]).collect();
    let mut stage = vec![ZERO; n];
    let mut steps = 0;
    field.eval(s, &w, &mut k[0]);
    while (t - s) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::NonConvergence(format!("poly_flow exceeded {} steps", opts.max_steps)));
        }
        let remaining = (t - s).abs();
        let last = dt >= remaining;
        let h = if last { remaining } else { dt } * dir;
        for st in 1..7 {
            for i in 0..n {
                let mut acc = w[i];
                for (j, kj) in k.iter().enumerate().take(st) {
                    if A[st][j] != 0.0 {
                        acc += kj[i] * (h * A[st][j]);
                    }
                }
                stage[i] = acc;
            }
            field.eval(s + C[st] * h, &stage, &mut k[st]);
        }
        // k[6] was evaluated at the 5th-order solution, which is `stage`
        let scale = stage
            .iter()
            .chain(&w)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = ZERO;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[i] * E[j];
                }
            }
            err = err.max((e * h).norm());
        }
        let ratio = err / (opts.tol * scale);
        if ratio <= 1.0 {
            s = if last { t } else { s + h };
            w.copy_from_slice(&stage);
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
            steps += 1;
        }
        let fac = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        dt = h.abs() * fac;
        if dt < min_dt && (t - s) * dir > 0.0 {
            return Err(Error::NonConvergence(format!(
                "step size underflow at s = {s} (dt = {dt:e})"
            )));
        }
    }
    Ok(rotate(&w, t))
}
