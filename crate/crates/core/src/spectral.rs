//! Discrete torus, Fourier transforms, the diagonalizing complex variables
//! and the observables built on them (Sobolev norms, super-actions).
//!
//! Fourier coefficients follow the normalization `u_k = (1/K) sum_x u(x) e^{-ikx}`
//! over the grid `x_m = 2 pi m / K`, with modes `k` in `N_K = [-K/2, K/2)`.
//! Mode vectors are stored in increasing mode order, so position `i` holds mode
//! `i - K/2` (integer division).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative imaginary residue above which `from_modes` logs a warning.
const IMAG_WARN_THRESHOLD: f64 = 1e-10;

/// Japanese bracket `<k> = sqrt(1 + k^2)`.
#[inline]
pub fn japanese(k: i64) -> f64 {
    let k = k as f64;
    (1.0 + k * k).sqrt()
}

/// The discrete torus with `K` equidistant points and its FFT plans.
#[derive(Clone)]
pub struct TorusGrid {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("size", &self.size).finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
    }
}

impl TorusGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Parameter("grid size K must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        })
    }

    /// Number of grid points `K` (also the number of modes).
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn min_mode(&self) -> i64 {
        -((self.size / 2) as i64)
    }

    #[inline]
    pub fn max_mode(&self) -> i64 {
        self.min_mode() + self.size as i64 - 1
    }

    /// True when `K` is even, i.e. the unpaired mode `-K/2` exists.
    #[inline]
    pub fn has_nyquist(&self) -> bool {
        self.size.is_multiple_of(2)
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        self.min_mode()..=self.max_mode()
    }

    #[inline]
    pub fn contains(&self, k: i64) -> bool {
        k >= self.min_mode() && k <= self.max_mode()
    }

    /// Storage position of mode `k`.
    #[inline]
    pub fn index(&self, k: i64) -> Result<usize> {
        if self.contains(k) {
            Ok((k - self.min_mode()) as usize)
        } else {
            Err(Error::ModeOutOfRange { k, grid: self.size })
        }
    }

    /// Mode stored at position `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 + self.min_mode()
    }

    /// Canonical representative of `k mod K` in `N_K`.
    #[inline]
    pub fn wrap(&self, k: i64) -> i64 {
        let n = self.size as i64;
        (k - self.min_mode()).rem_euclid(n) + self.min_mode()
    }

    /// Position of the mode `-k` (aliased into `N_K`).
    #[inline]
    pub fn mirror_index(&self, i: usize) -> usize {
        let k = self.mode(i);
        (self.wrap(-k) - self.min_mode()) as usize
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.size as f64;
        (0..self.size)
            .map(|m| 2.0 * std::f64::consts::PI * m as f64 / n)
            .collect()
    }

    /// Discrete Fourier coefficients of grid values, in mode order.
    pub fn dft(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.size];
        for (n, v) in buf.into_iter().enumerate() {
            let k = self.wrap(n as i64);
            out[(k - self.min_mode()) as usize] = v * scale;
        }
        Ok(out)
    }

    pub fn dft_real(&self, values: &[f64]) -> Result<Vec<Complex64>> {
        let c: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.dft(&c)
    }

    /// Grid values `u(x) = sum_k u_k e^{ikx}` from coefficients in mode order.
    pub fn idft(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(coeffs.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (i, &c) in coeffs.iter().enumerate() {
            let k = self.mode(i);
            buf[k.rem_euclid(self.size as i64) as usize] = c;
        }
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    /// Raw in-place transforms in FFT order (index `n` holds mode `n mod K`),
    /// unnormalized. Scratch must hold `scratch_len()` entries.
    pub(crate) fn fft_forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// FFT-order slot of the mode stored at position `i`.
    #[inline]
    pub(crate) fn fft_slot(&self, i: usize) -> usize {
        self.mode(i).rem_euclid(self.size as i64) as usize
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.size {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected: self.size,
                got: len,
            })
        }
    }
}

/// Mass `rho` and the frequency table `omega_k = sqrt(k^2 + rho)` over `N_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpec {
    rho: f64,
    omega: Vec<f64>,
    min_mode: i64,
}

impl FrequencySpec {
    pub fn new(grid: &TorusGrid, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Parameter(format!("mass rho must be positive, got {rho}")));
        }
        let omega = grid.modes().map(|k| ((k * k) as f64 + rho).sqrt()).collect();
        Ok(Self {
            rho,
            omega,
            min_mode: grid.min_mode(),
        })
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Frequency table in mode order.
    #[inline]
    pub fn table(&self) -> &[f64] {
        &self.omega
    }

    /// `omega_k` for any integer `k` (not restricted to `N_K`).
    #[inline]
    pub fn omega(&self, k: i64) -> f64 {
        let i = k - self.min_mode;
        if i >= 0 && (i as usize) < self.omega.len() {
            self.omega[i as usize]
        } else {
            ((k * k) as f64 + self.rho).sqrt()
        }
    }

    /// `omega_{K/2} = sqrt((K/2)^2 + rho)`, the largest frequency in the CFL bound.
    pub fn omega_half(&self) -> f64 {
        let half = self.omega.len() as f64 / 2.0;
        (half * half + self.rho).sqrt()
    }
}

/// Position and momentum grid functions.
#[derive(Debug, Clone, PartialEq)]
pub struct RealState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl RealState {
    pub fn zeros(size: usize) -> Self {
        Self {
            q: vec![0.0; size],
            p: vec![0.0; size],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|x| x.is_finite())
    }
}

/// Complex mode vector `u = Lambda^{1/2} q + i Lambda^{-1/2} p`, in mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub u: Vec<Complex64>,
}

impl ModeState {
    pub fn zeros(size: usize) -> Self {
        Self {
            u: vec![Complex64::new(0.0, 0.0); size],
        }
    }

    pub fn from_vec(u: Vec<Complex64>) -> Self {
        Self { u }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.u.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Coefficient of mode `k` on `grid`.
    pub fn get(&self, grid: &TorusGrid, k: i64) -> Result<Complex64> {
        Ok(self.u[grid.index(k)?])
    }

    pub fn set(&mut self, grid: &TorusGrid, k: i64, value: Complex64) -> Result<()> {
        let i = grid.index(k)?;
        self.u[i] = value;
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            u: self.u.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Euclidean distance `sqrt(sum |u_k - v_k|^2)`.
    pub fn l2_distance(&self, other: &ModeState) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Fourier multiplier applied before and after the nonlinear kick.
#[derive(Clone)]
pub enum Mollifier {
    /// `phi = 1`.
    Identity,
    /// `phi(x) = sin(x)/x`.
    Sinc,
    Custom {
        id: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Mollifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mollifier({})", self.id())
    }
}

impl PartialEq for Mollifier {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl Mollifier {
    /// A user supplied mollifier; it must satisfy `f(0) == 1` exactly.
    pub fn custom<F>(id: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let v0 = f(0.0);
        if v0 != 1.0 {
            return Err(Error::Parameter(format!("mollifier must satisfy phi(0) = 1, got {v0}")));
        }
        Ok(Mollifier::Custom {
            id: id.into(),
            f: Arc::new(f),
        })
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "identity" | "one" | "1" => Ok(Mollifier::Identity),
            "sinc" => Ok(Mollifier::Sinc),
            other => Err(Error::Config(format!("unknown mollifier '{other}'"))),
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Mollifier::Identity => "identity",
            Mollifier::Sinc => "sinc",
            Mollifier::Custom { id, .. } => id,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Mollifier::Identity => 1.0,
            Mollifier::Sinc => sinc(x),
            Mollifier::Custom { f, .. } => f(x),
        }
    }

    /// Multiplier table `phi(h omega_k)` in mode order.
    pub fn table(&self, h: f64, freq: &FrequencySpec) -> Vec<f64> {
        freq.table().iter().map(|&w| self.eval(h * w)).collect()
    }
}

/// `sin(x)/x`, using the Taylor series near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `u_k = omega_k^{1/2} q_k + i omega_k^{-1/2} p_k`.
pub fn to_modes(state: &RealState, grid: &TorusGrid, freq: &FrequencySpec) -> Result<ModeState> {
    grid.check_len(state.q.len())?;
    grid.check_len(state.p.len())?;
    grid.check_len(freq.len())?;
    let qk = grid.dft_real(&state.q)?;
    let pk = grid.dft_real(&state.p)?;
    let u = qk
        .iter()
        .zip(&pk)
        .zip(freq.table())
        .map(|((q, p), &w)| {
            let s = w.sqrt();
            q * s + Complex64::i() * p / s
        })
        .collect();
    Ok(ModeState { u })
}

/// Inverse of [`to_modes`].
pub fn from_modes(u: &ModeState, grid: &TorusGrid, freq: &FrequencySpec) -> Result<RealState> {
    grid.check_len(u.len())?;
    grid.check_len(freq.len())?;
    let n = grid.size();
    let mut qk = vec![Complex64::new(0.0, 0.0); n];
    let mut pk = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let s = freq.table()[i].sqrt();
        let a = u.u[i];
        let b = u.u[grid.mirror_index(i)].conj();
        qk[i] = (a + b) / (2.0 * s);
        pk[i] = (a - b) * s / Complex64::new(0.0, 2.0);
    }
    let q = grid.idft(&qk)?;
    let p = grid.idft(&pk)?;
    let residue = q.iter().chain(&p).map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = q.iter().chain(&p).map(|z| z.re.abs()).fold(0.0, f64::max);
    if residue > IMAG_WARN_THRESHOLD * scale.max(f64::MIN_POSITIVE) {
        log::warn!("from_modes: imaginary residue {residue:e} relative to {scale:e}");
    }
    Ok(RealState {
        q: q.into_iter().map(|z| z.re).collect(),
        p: p.into_iter().map(|z| z.re).collect(),
    })
}

/// Harmonic action `J_k = (|u_k|^2 + |u_{-k}|^2)/2`, or `|u_{-K/2}|^2` at the unpaired mode.
pub fn super_action(u: &ModeState, grid: &TorusGrid, k: i64) -> Result<f64> {
    grid.check_len(u.len())?;
    let i = grid.index(k)?;
    let j = grid.mirror_index(i);
    if i == j {
        // k = 0 and the unpaired -K/2
        Ok(u.u[i].norm_sqr())
    } else {
        Ok(0.5 * (u.u[i].norm_sqr() + u.u[j].norm_sqr()))
    }
}

/// Canonical action indices: `0..ceil(K/2)` plus `-K/2` when `K` is even.
pub fn canonical_action_modes(grid: &TorusGrid) -> Vec<i64> {
    let mut ks: Vec<i64> = (0..(grid.size() as i64 + 1) / 2).collect();
    if grid.has_nyquist() {
        ks.push(grid.min_mode());
    }
    ks
}

/// `||u||_{H^s} = (sum <k>^{2s} |u_k|^2)^{1/2}` over a coefficient vector in mode order.
pub fn sobolev_norm_coeffs(coeffs: &[Complex64], grid: &TorusGrid, s: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, z)| japanese(grid.mode(i)).powf(2.0 * s) * z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn sobolev_norm(u: &ModeState, grid: &TorusGrid, s: f64) -> f64 {
    sobolev_norm_coeffs(&u.u, grid, s)
}

/// Quadratic part `T(u) = (1/2) sum omega_k |u_k|^2`.
pub fn quadratic_energy(u: &ModeState, freq: &FrequencySpec) -> f64 {
    0.5 * u
        .u
        .iter()
        .zip(freq.table())
        .map(|(z, w)| w * z.norm_sqr())
        .sum::<f64>()
}

/// Power-law datum `q0 = eps Z^{-1} sum <k>^{-s0-0.525} e^{ikx}`, `p0 = 0`,
/// normalized so that `||q0||_{H^{s0}} = eps`.
pub fn power_law_initial_data(grid: &TorusGrid, s0: f64, eps: f64) -> Result<RealState> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("eps must be nonnegative, got {eps}")));
    }
    let coeffs = power_law_coefficients(grid, s0, eps);
    let q = grid.idft(&coeffs)?;
    Ok(RealState {
        q: q.into_iter().map(|z| z.re).collect(),
        p: vec![0.0; grid.size()],
    })
}

/// Fourier coefficients of the power-law datum.
pub fn power_law_coefficients(grid: &TorusGrid, s0: f64, eps: f64) -> Vec<Complex64> {
    let z: f64 = grid.modes().map(|k| japanese(k).powf(-1.05)).sum::<f64>().sqrt();
    grid.modes()
        .map(|k| Complex64::new(eps / z * japanese(k).powf(-s0 - 0.525), 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(values: &[Complex64], grid: &TorusGrid) -> Vec<Complex64> {
        let n = grid.size();
        let xs = grid.points();
        grid.modes()
            .map(|k| {
                xs.iter()
                    .zip(values)
                    .map(|(&x, &v)| v * Complex64::from_polar(1.0, -(k as f64) * x))
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect()
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn mode_set_layout() {
        let g = TorusGrid::new(8).unwrap();
        assert_eq!(g.modes().collect::<Vec<_>>(), vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        assert!(g.contains(-4) && !g.contains(4));
        let g = TorusGrid::new(7).unwrap();
        assert_eq!(g.modes().collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(g.wrap(4), -3);
        assert!(TorusGrid::new(0).is_err());
    }

    #[test]
    fn fft_matches_naive_dft_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 7, 8, 9, 16, 33] {
            let g = TorusGrid::new(n).unwrap();
            let v = random_complex(&mut rng, n);
            let fast = g.dft(&v).unwrap();
            let slow = naive_dft(&v, &g);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-13);
            }
            let back = g.idft(&fast).unwrap();
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, b) in back.iter().zip(&v) {
                assert!((a - b).norm() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [8usize, 9, 64] {
            let g = TorusGrid::new(n).unwrap();
            let v = random_complex(&mut rng, n);
            let lhs = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
            let rhs: f64 = g.dft(&v).unwrap().iter().map(|z| z.norm_sqr()).sum();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }
    }

    #[test]
    fn frequencies() {
        let g = TorusGrid::new(8).unwrap();
        let f = FrequencySpec::new(&g, 2.0).unwrap();
        for k in -3..=3i64 {
            assert_eq!(f.omega(k), f.omega(-k));
        }
        assert!(f.table().iter().all(|&w| w >= 2f64.sqrt()));
        for k in 0..4i64 {
            assert!(f.omega(k + 1) > f.omega(k));
        }
        assert!((f.omega_half() - 18f64.sqrt()).abs() < 1e-15);
        assert!(FrequencySpec::new(&g, 0.0).is_err());
    }

    #[test]
    fn cosine_datum_maps_to_half_modes() {
        let g = TorusGrid::new(8).unwrap();
        let f = FrequencySpec::new(&g, 1.0).unwrap();
        let w1 = f.omega(1);
        let q: Vec<f64> = g.points().iter().map(|x| x.cos() / w1.sqrt()).collect();
        let state = RealState { q, p: vec![0.0; 8] };
        let u = to_modes(&state, &g, &f).unwrap();
        for k in g.modes() {
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            let z = u.get(&g, k).unwrap();
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-15, "k={k}: {z}");
        }
        let back = from_modes(&u, &g, &f).unwrap();
        for (a, b) in back.q.iter().zip(&state.q) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(back.p.iter().all(|p| p.abs() < 1e-15));
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = TorusGrid::new(6).unwrap();
        let f = FrequencySpec::new(&g, 1.0).unwrap();
        let u = to_modes(&RealState::zeros(6), &g, &f).unwrap();
        assert!(u.u.iter().all(|z| z.norm() == 0.0));
        let s = from_modes(&ModeState::zeros(6), &g, &f).unwrap();
        assert_eq!(s, RealState::zeros(6));
    }

    #[test]
    fn unpaired_mode_is_real_on_both_sides() {
        let g = TorusGrid::new(8).unwrap();
        let f = FrequencySpec::new(&g, 3.0).unwrap();
        let w = f.omega(-4);
        let mut u = ModeState::zeros(8);
        u.set(&g, -4, Complex64::new(0.3, -0.7)).unwrap();
        let s = from_modes(&u, &g, &f).unwrap();
        let qk = g.dft_real(&s.q).unwrap();
        let pk = g.dft_real(&s.p).unwrap();
        let i = g.index(-4).unwrap();
        assert!((qk[i] - Complex64::new(0.3 / w.sqrt(), 0.0)).norm() < 1e-15);
        assert!((pk[i] - Complex64::new(-0.7 * w.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn round_trip_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [8usize, 9, 16] {
            let g = TorusGrid::new(n).unwrap();
            let f = FrequencySpec::new(&g, 1.7).unwrap();
            for _ in 0..100 {
                let s = RealState {
                    q: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    p: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                };
                let back = from_modes(&to_modes(&s, &g, &f).unwrap(), &g, &f).unwrap();
                let scale = s.q.iter().chain(&s.p).map(|x| x.abs()).fold(0.0, f64::max);
                for (a, b) in back.q.iter().chain(&back.p).zip(s.q.iter().chain(&s.p)) {
                    assert!((a - b).abs() <= 1e-12 * scale);
                }
                // and the other direction: u carries no symmetry constraint
                let u = ModeState::from_vec(random_complex(&mut rng, n));
                let u2 = to_modes(&from_modes(&u, &g, &f).unwrap(), &g, &f).unwrap();
                assert!(u.l2_distance(&u2) <= 1e-12 * sobolev_norm(&u, &g, 0.0));
            }
        }
    }

    #[test]
    fn super_actions() {
        let g = TorusGrid::new(8).unwrap();
        let mut u = ModeState::zeros(8);
        for k in g.modes() {
            assert_eq!(super_action(&u, &g, k).unwrap(), 0.0);
        }
        u.set(&g, 3, Complex64::new(0.6, 0.0)).unwrap();
        u.set(&g, -3, Complex64::new(0.0, 0.8)).unwrap();
        assert!((super_action(&u, &g, 3).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(super_action(&u, &g, 3).unwrap(), super_action(&u, &g, -3).unwrap());
        u.set(&g, -4, Complex64::new(1.0, 1.0)).unwrap();
        assert!((super_action(&u, &g, -4).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(super_action(&u, &g, 4), Err(Error::ModeOutOfRange { .. })));
        assert_eq!(canonical_action_modes(&g), vec![0, 1, 2, 3, -4]);
        assert_eq!(canonical_action_modes(&TorusGrid::new(7).unwrap()), vec![0, 1, 2, 3]);
    }

    #[test]
    fn quadratic_energy_from_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [8usize, 9] {
            let g = TorusGrid::new(n).unwrap();
            let f = FrequencySpec::new(&g, 2.5).unwrap();
            let u = ModeState::from_vec(random_complex(&mut rng, n));
            let two_t = 2.0 * quadratic_energy(&u, &f);
            let from_actions: f64 = canonical_action_modes(&g)
                .into_iter()
                .map(|k| {
                    let weight = if k == 0 || (g.has_nyquist() && k == g.min_mode()) { 1.0 } else { 2.0 };
                    weight * f.omega(k) * super_action(&u, &g, k).unwrap()
                })
                .sum();
            assert!((two_t - from_actions).abs() <= 1e-12 * two_t);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = TorusGrid::new(8).unwrap();
        let mut u = ModeState::zeros(8);
        u.set(&g, 0, Complex64::new(2.0, 0.0)).unwrap();
        for s in [0.0, 0.5, 1.0, 3.2] {
            assert!((sobolev_norm(&u, &g, s) - 2.0).abs() < 1e-15);
        }
        let mut u = ModeState::zeros(8);
        u.set(&g, 1, Complex64::new(1.0, 0.0)).unwrap();
        assert!((sobolev_norm(&u, &g, 0.5) - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn power_law_normalization() {
        let g = TorusGrid::new(2048).unwrap();
        let s = power_law_initial_data(&g, 1.0, 0.75).unwrap();
        let qk = g.dft_real(&s.q).unwrap();
        assert!((sobolev_norm_coeffs(&qk, &g, 1.0) - 0.75).abs() <= 1e-12 * 0.75);
        assert!(s.p.iter().all(|&p| p == 0.0));
        let s = power_law_initial_data(&g, 0.5, 0.75).unwrap();
        let qk = g.dft_real(&s.q).unwrap();
        assert!((sobolev_norm_coeffs(&qk, &g, 0.5) - 0.75).abs() <= 1e-12 * 0.75);
        // closed form: eps * (sum <k>^{-0.05} / sum <k>^{-1.05})^{1/2}
        let num: f64 = g.modes().map(|k| japanese(k).powf(-0.05)).sum();
        let den: f64 = g.modes().map(|k| japanese(k).powf(-1.05)).sum();
        let h1 = sobolev_norm_coeffs(&qk, &g, 1.0);
        assert!((h1 - 0.75 * (num / den).sqrt()).abs() < 1e-11 * h1, "H1 norm {h1}");
        assert!((h1 - 8.0933).abs() < 1e-4, "H1 norm {h1}");
        let zero = power_law_initial_data(&g, 0.3, 0.0).unwrap();
        assert!(zero.q.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mollifier_constraints() {
        assert!(Mollifier::custom("bad", |x: f64| 1.0 + x + 1e-3).is_err());
        let m = Mollifier::custom("gauss", |x: f64| (-x * x).exp()).unwrap();
        assert_eq!(m.eval(0.0), 1.0);
        assert_eq!(Mollifier::Sinc.eval(0.0), 1.0);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
        assert!(Mollifier::from_id("nope").is_err());
    }
}
