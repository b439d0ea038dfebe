//! Split flows of `H = T + V`, the Lie and Strang (mollified impulse) steps,
//! the explicit two-step position/momentum form, the CFL check and the
//! trajectory loop.

use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::report::{DriftReport, DriftRow};
use crate::spectral::{
    quadratic_energy, sinc, sobolev_norm, super_action, FrequencySpec, ModeState, Mollifier, RealState,
    TorusGrid,
};

/// Any `|u_k|` above this aborts a trajectory.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

/// Target number of recorded rows when no stride is given.
pub const DEFAULT_RECORDS: usize = 4000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Lie,
    Strang,
    TwoStepQP,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Lie => "lie",
            Scheme::Strang => "strang",
            Scheme::TwoStepQP => "twostep",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lie" => Ok(Scheme::Lie),
            "strang" => Ok(Scheme::Strang),
            "twostep" => Ok(Scheme::TwoStepQP),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Time step, scheme, mollifier and the discretization they act on.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub grid: TorusGrid,
    pub freq: FrequencySpec,
    pub h: f64,
    pub scheme: Scheme,
    pub mollifier: Mollifier,
}

impl MethodSpec {
    pub fn new(grid: TorusGrid, freq: FrequencySpec, h: f64, scheme: Scheme, mollifier: Mollifier) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("time step must be positive, got {h}")));
        }
        grid.check_len(freq.len())?;
        Ok(Self {
            grid,
            freq,
            h,
            scheme,
            mollifier,
        })
    }

    /// Same method with another step size.
    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.freq.clone(), h, self.scheme, self.mollifier.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub r: usize,
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `(r+2) h omega_{K/2} <= 2 pi - delta`.
pub fn cfl_check(r: usize, delta: f64, h: f64, freq: &FrequencySpec) -> Result<CflReport> {
    if !(delta > 0.0 && delta < std::f64::consts::PI) {
        return Err(Error::Parameter(format!("CFL margin delta must lie in (0, pi), got {delta}")));
    }
    let lhs = (r as f64 + 2.0) * h * freq.omega_half();
    let rhs = 2.0 * std::f64::consts::PI - delta;
    Ok(CflReport {
        r,
        delta,
        lhs,
        rhs,
        pass: lhs <= rhs,
    })
}

/// `e^{i theta}` with the cosine and sine adjusted in their last bits so that
/// the modulus is as close to 1 as doubles allow. Repeated rotations then do not
/// accumulate a systematic growth or decay of `|u_k|`.
pub fn unit_phase(theta: f64) -> Complex64 {
    let (s0, c0) = theta.sin_cos();
    let defect = |c: f64, s: f64| {
        // c^2 + s^2 - 1 with the products' rounding errors restored; the larger
        // square goes first so that both subtractions are exact
        let (a, b) = if c.abs() >= s.abs() { (c, s) } else { (s, c) };
        let aa = a * a;
        let bb = b * b;
        let ea = a.mul_add(a, -aa);
        let eb = b.mul_add(b, -bb);
        ((aa - 1.0) + bb + (ea + eb)).abs()
    };
    let nudge = |x: f64, k: i64| -> f64 {
        if x == 0.0 || k == 0 {
            x
        } else {
            f64::from_bits((x.to_bits() as i64 + k) as u64)
        }
    };
    // nudge the larger component, re-solve the smaller one from c^2 + s^2 = 1
    // and search a few ulps around it
    let swap = s0.abs() > c0.abs();
    let (big0, small0) = if swap { (s0, c0) } else { (c0, s0) };
    let mut best = (defect(c0, s0), c0, s0);
    for db in -3i64..=3 {
        let big = nudge(big0, db);
        let target = (-big.mul_add(big, -1.0)).max(0.0).sqrt().copysign(small0);
        for ds in -3i64..=3 {
            let small = nudge(target, ds);
            let (c, s) = if swap { (small, big) } else { (big, small) };
            let d = defect(c, s);
            if d < best.0 {
                best = (d, c, s);
            }
        }
    }
    Complex64::new(best.1, best.2)
}

/// Exact flow of `T`: `u_k -> e^{-i t omega_k} u_k`.
pub fn flow_t(u: &ModeState, t: f64, freq: &FrequencySpec) -> ModeState {
    ModeState {
        u: u.u
            .iter()
            .zip(freq.table())
            .map(|(z, &w)| z * unit_phase(-t * w))
            .collect(),
    }
}

/// Exact flow of the mollified potential `V`: `u -> u - i t grad V(u)`.
pub fn flow_v(u: &ModeState, t: f64, method: &MethodSpec, nl: &NonlinearitySpec) -> Result<ModeState> {
    method.grid.check_len(u.len())?;
    let mut prop = Propagator::new(method, nl);
    let mut out = u.clone();
    prop.kick(&mut out.u, t);
    Ok(out)
}

/// `Phi_V^{h/2} o Phi_T^h o Phi_V^{h/2}`.
pub fn strang_step(u: &ModeState, method: &MethodSpec, nl: &NonlinearitySpec) -> Result<ModeState> {
    method.grid.check_len(u.len())?;
    let mut prop = Propagator::new(method, nl);
    let mut out = u.clone();
    prop.strang(&mut out.u);
    Ok(out)
}

/// `Phi_V^h o Phi_T^h`.
pub fn lie_step(u: &ModeState, method: &MethodSpec, nl: &NonlinearitySpec) -> Result<ModeState> {
    method.grid.check_len(u.len())?;
    let mut prop = Propagator::new(method, nl);
    let mut out = u.clone();
    prop.lie(&mut out.u);
    Ok(out)
}

/// One step of the explicit cos/sinc update in physical variables.
pub fn two_step_qp(state: &RealState, method: &MethodSpec, nl: &NonlinearitySpec) -> Result<RealState> {
    let grid = &method.grid;
    let mut prop = Propagator::new(method, nl);
    let mut qp = QpCoeffs {
        q: grid.dft_real(&state.q)?,
        p: grid.dft_real(&state.p)?,
    };
    let mut gq = vec![ZERO; grid.size()];
    prop.filtered_force_q(&qp.q, &mut gq);
    prop.two_step(&mut qp, &mut gq);
    Ok(RealState {
        q: grid.idft(&qp.q)?.into_iter().map(|z| z.re).collect(),
        p: grid.idft(&qp.p)?.into_iter().map(|z| z.re).collect(),
    })
}

/// Fourier coefficients of position and momentum, in mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct QpCoeffs {
    pub q: Vec<Complex64>,
    pub p: Vec<Complex64>,
}

/// Step kernels with precomputed multiplier tables and FFT scratch space.
pub struct Propagator {
    grid: TorusGrid,
    freq: FrequencySpec,
    nl: NonlinearitySpec,
    h: f64,
    phi: Vec<f64>,
    sqrt_w: Vec<f64>,
    inv_sqrt_w: Vec<f64>,
    mirror: Vec<usize>,
    slot: Vec<usize>,
    rot_h: Vec<Complex64>,
    cos_h: Vec<f64>,
    sin_h: Vec<f64>,
    buf: Vec<Complex64>,
    force: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(method: &MethodSpec, nl: &NonlinearitySpec) -> Self {
        let grid = method.grid.clone();
        let n = grid.size();
        let freq = method.freq.clone();
        let h = method.h;
        let w = freq.table();
        Self {
            phi: method.mollifier.table(h, &freq),
            sqrt_w: w.iter().map(|x| x.sqrt()).collect(),
            inv_sqrt_w: w.iter().map(|x| 1.0 / x.sqrt()).collect(),
            mirror: (0..n).map(|i| grid.mirror_index(i)).collect(),
            slot: (0..n).map(|i| grid.fft_slot(i)).collect(),
            rot_h: w.iter().map(|&x| unit_phase(-h * x)).collect(),
            cos_h: w.iter().map(|&x| unit_phase(h * x).re).collect(),
            sin_h: w.iter().map(|&x| unit_phase(h * x).im).collect(),
            buf: vec![ZERO; n],
            force: vec![ZERO; n],
            scratch: vec![ZERO; grid.scratch_len()],
            nl: nl.clone(),
            h,
            grid,
            freq,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Position coefficients `q_k = (u_k + conj(u_{-k})) / (2 omega_k^{1/2})`.
    fn q_coeffs(&self, u: &[Complex64], out: &mut [Complex64]) {
        for i in 0..u.len() {
            out[i] = (u[i] + u[self.mirror[i]].conj()) * (0.5 * self.inv_sqrt_w[i]);
        }
    }

    /// `out_k = phi_k * FFT[g(phi q)]_k` for position coefficients `q`.
    pub fn filtered_force_q(&mut self, q: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.size();
        for i in 0..n {
            self.buf[self.slot[i]] = q[i] * self.phi[i];
        }
        self.grid.fft_inverse(&mut self.buf, &mut self.scratch);
        for z in self.buf.iter_mut() {
            *z = Complex64::new(self.nl.g(z.re), 0.0);
        }
        self.grid.fft_forward(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / n as f64;
        for i in 0..n {
            out[i] = self.buf[self.slot[i]] * (scale * self.phi[i]);
        }
    }

    /// `grad V(u)`, in mode order.
    pub fn gradient_v(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        let mut q = std::mem::take(&mut self.force);
        self.q_coeffs(u, &mut q);
        self.filtered_force_q(&q, out);
        for i in 0..out.len() {
            out[i] *= self.inv_sqrt_w[i];
        }
        self.force = q;
    }

    /// `u <- u - i t grad V(u)`.
    pub fn kick(&mut self, u: &mut [Complex64], t: f64) {
        if self.nl.is_zero() || t == 0.0 {
            return;
        }
        let mut f = vec![ZERO; u.len()];
        self.gradient_v(u, &mut f);
        let mi = Complex64::new(0.0, -t);
        for (z, fk) in u.iter_mut().zip(&f) {
            *z += mi * fk;
        }
    }

    /// `u <- Phi_T^h u`.
    pub fn rotate_h(&self, u: &mut [Complex64]) {
        for (z, r) in u.iter_mut().zip(&self.rot_h) {
            *z *= r;
        }
    }

    pub fn lie(&mut self, u: &mut [Complex64]) {
        self.rotate_h(u);
        self.kick(u, self.h);
    }

    pub fn strang(&mut self, u: &mut [Complex64]) {
        self.kick(u, 0.5 * self.h);
        self.rotate_h(u);
        self.kick(u, 0.5 * self.h);
    }

    /// One step of the cos/sinc update; `gq` holds the filtered force at the
    /// current position on entry and at the new position on exit.
    pub fn two_step(&mut self, qp: &mut QpCoeffs, gq: &mut [Complex64]) {
        let h = self.h;
        let n = qp.q.len();
        let mut q_new = vec![ZERO; n];
        for i in 0..n {
            let w = self.sqrt_w[i] * self.sqrt_w[i];
            let s = sinc(h * w);
            // h sinc(h w) p is written sin(h w)/w p so that the linear part is
            // the same rotation as in the p update
            q_new[i] = qp.q[i] * self.cos_h[i] + qp.p[i] * (self.sin_h[i] / w) - gq[i] * (0.5 * h * h * s);
        }
        let mut g_new = vec![ZERO; n];
        if !self.nl.is_zero() {
            self.filtered_force_q(&q_new, &mut g_new);
        }
        for i in 0..n {
            let w = self.sqrt_w[i] * self.sqrt_w[i];
            qp.p[i] = qp.q[i] * (-w * self.sin_h[i]) + qp.p[i] * self.cos_h[i]
                - (gq[i] * self.cos_h[i] + g_new[i]) * (0.5 * h);
        }
        qp.q = q_new;
        gq.copy_from_slice(&g_new);
    }

    /// Potential `(1/K) sum_x G(y(x))` with `y = phi(h Lambda) q` when
    /// `mollified`, else `y = q`.
    pub fn potential(&mut self, u: &[Complex64], mollified: bool) -> f64 {
        if self.nl.is_zero() {
            return 0.0;
        }
        let n = self.grid.size();
        let mut q = vec![ZERO; n];
        self.q_coeffs(u, &mut q);
        for i in 0..n {
            let f = if mollified { self.phi[i] } else { 1.0 };
            self.buf[self.slot[i]] = q[i] * f;
        }
        self.grid.fft_inverse(&mut self.buf, &mut self.scratch);
        self.buf.iter().map(|z| self.nl.big_g(z.re)).sum::<f64>() / n as f64
    }

    /// Full Hamiltonian `T + W` of the space-discretized equation.
    pub fn energy(&mut self, u: &[Complex64]) -> f64 {
        let t = 0.5 * u.iter().zip(self.freq.table()).map(|(z, w)| w * z.norm_sqr()).sum::<f64>();
        t + self.potential(u, false)
    }

    fn to_u(&self, qp: &QpCoeffs, u: &mut [Complex64]) {
        for i in 0..u.len() {
            u[i] = qp.q[i] * self.sqrt_w[i] + Complex64::new(0.0, 1.0) * qp.p[i] / self.sqrt_w[i];
        }
    }

    fn qp_of(&self, u: &[Complex64]) -> QpCoeffs {
        let n = u.len();
        let mut q = vec![ZERO; n];
        let mut p = vec![ZERO; n];
        for i in 0..n {
            let a = u[i];
            let b = u[self.mirror[i]].conj();
            q[i] = (a + b) / (2.0 * self.sqrt_w[i]);
            p[i] = (a - b) * self.sqrt_w[i] / Complex64::new(0.0, 2.0);
        }
        QpCoeffs { q, p }
    }
}

/// Extra scalar recorded alongside the standard observables (typically `H_h`).
pub type ExtraObservable<'a> = &'a dyn Fn(&ModeState) -> Result<f64>;

/// What to record along a trajectory.
pub struct ObserverSpec<'a> {
    pub modes: Vec<i64>,
    /// Record every `stride` steps; `None` means `ceil(n_steps / 4000)`.
    pub stride: Option<usize>,
    pub modified_energy: Option<ExtraObservable<'a>>,
}

impl ObserverSpec<'_> {
    pub fn modes(modes: Vec<i64>) -> Self {
        Self {
            modes,
            stride: None,
            modified_energy: None,
        }
    }
}

fn record(
    prop: &mut Propagator,
    observer: &ObserverSpec<'_>,
    u: &ModeState,
    step: usize,
) -> Result<DriftRow> {
    let grid = prop.grid.clone();
    let actions = observer
        .modes
        .iter()
        .map(|&k| super_action(u, &grid, k))
        .collect::<Result<Vec<_>>>()?;
    let hh = match observer.modified_energy {
        Some(f) => f(u)?,
        None => f64::NAN,
    };
    let energy = quadratic_energy(u, &prop.freq) + prop.potential(&u.u, false);
    Ok(DriftRow {
        step: step as u64,
        time: step as f64 * prop.h,
        energy,
        modified_energy: hh,
        norm_h12: sobolev_norm(u, &grid, 0.5),
        norm_h1: sobolev_norm(u, &grid, 1.0),
        actions,
    })
}

fn check_blow_up(u: &[Complex64], step: usize) -> Result<()> {
    for z in u {
        let a = z.norm();
        if !a.is_finite() || a > BLOW_UP_THRESHOLD {
            return Err(Error::BlowUp { step });
        }
    }
    Ok(())
}

/// Runs `n_steps` of `method.scheme` from `u0`, recording observables at the
/// initial time, every `stride` steps, and at the final step.
pub fn simulate(
    u0: &ModeState,
    method: &MethodSpec,
    nl: &NonlinearitySpec,
    n_steps: usize,
    observer: &ObserverSpec<'_>,
) -> Result<DriftReport> {
    let grid = &method.grid;
    grid.check_len(u0.len())?;
    for &k in &observer.modes {
        grid.index(k)?;
    }
    let stride = observer
        .stride
        .unwrap_or_else(|| n_steps.div_ceil(DEFAULT_RECORDS))
        .max(1);
    let mut prop = Propagator::new(method, nl);
    let mut report = DriftReport::new(observer.modes.clone());
    let mut u = u0.clone();
    report.rows.push(record(&mut prop, observer, &u, 0)?);

    let mut qp = prop.qp_of(&u.u);
    let mut gq = vec![ZERO; grid.size()];
    if method.scheme == Scheme::TwoStepQP {
        prop.filtered_force_q(&qp.q, &mut gq);
    }

    let mut done = 0;
    while done < n_steps {
        let chunk = stride.min(n_steps - done);
        match method.scheme {
            Scheme::Lie => {
                for i in 0..chunk {
                    prop.lie(&mut u.u);
                    check_blow_up(&u.u, done + i + 1)?;
                }
            }
            Scheme::Strang => {
                // consecutive half kicks are merged between records
                let h = prop.h;
                prop.kick(&mut u.u, 0.5 * h);
                for i in 0..chunk {
                    prop.rotate_h(&mut u.u);
                    if i + 1 < chunk {
                        prop.kick(&mut u.u, h);
                    } else {
                        prop.kick(&mut u.u, 0.5 * h);
                    }
                    check_blow_up(&u.u, done + i + 1)?;
                }
            }
            Scheme::TwoStepQP => {
                for i in 0..chunk {
                    prop.two_step(&mut qp, &mut gq);
                    prop.to_u(&qp, &mut u.u);
                    check_blow_up(&u.u, done + i + 1)?;
                }
            }
        }
        done += chunk;
        report.rows.push(record(&mut prop, observer, &u, done)?);
    }
    Ok(report)
}

/// Final state after `n_steps`, without recording.
pub fn propagate(u0: &ModeState, method: &MethodSpec, nl: &NonlinearitySpec, n_steps: usize) -> Result<ModeState> {
    method.grid.check_len(u0.len())?;
    let mut prop = Propagator::new(method, nl);
    let mut u = u0.clone();
    let mut qp = prop.qp_of(&u.u);
    let mut gq = vec![ZERO; u.len()];
    if method.scheme == Scheme::TwoStepQP {
        prop.filtered_force_q(&qp.q, &mut gq);
    }
    for step in 1..=n_steps {
        match method.scheme {
            Scheme::Lie => prop.lie(&mut u.u),
            Scheme::Strang => prop.strang(&mut u.u),
            Scheme::TwoStepQP => {
                prop.two_step(&mut qp, &mut gq);
                prop.to_u(&qp, &mut u.u);
            }
        }
        check_blow_up(&u.u, step)?;
    }
    Ok(u)
}
