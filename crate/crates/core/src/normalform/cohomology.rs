use num_complex::Complex64;

use super::{invert_phi_ad_signed, EPS_SIGN};
use crate::error::{Error, Result};
use crate::hampoly::{
    exp_ad_graded, poly_flow, taylor_of_v, FlowOptions, GradedFamily, GradedGenerator, PolyHamiltonian, TimePoly,
};
use crate::integrators::{flow_t, MethodSpec};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{FrequencySpec, ModeState, TorusGrid};

/// Solution `B = hT + B_1 + ... + B_r` of the cohomological system.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologySolution {
    pub h: f64,
    pub r: usize,
    pub grid_size: usize,
    pub rho: f64,
    pub mollifier: String,
    /// `b[n - 1]` is `B_n`: `u`-degree `n + 2`, `t`-degree at most `n`, `B_n(0) = 0`.
    pub b: Vec<TimePoly>,
}

impl CohomologySolution {
    pub fn b(&self, n: usize) -> &TimePoly {
        &self.b[n - 1]
    }
}

/// Solves `phi(ad_B) d_t B = P` grade by grade.
///
/// At grade `n` the equation reads `phi(ad_{hT}) d_t B_n = P_n - K_n`, where
/// `K_n` is the grade-`n` part of `phi(ad_B)(d_t B_1 + ... + d_t B_{n-1})`.
pub fn solve_cohomology(r: usize, method: &MethodSpec, nl: &NonlinearitySpec, tail_tol: f64) -> Result<CohomologySolution> {
    if r == 0 {
        return Err(Error::Parameter("the order r must be at least 1".into()));
    }
    let p: Vec<PolyHamiltonian> = (1..=r).map(|n| taylor_of_v(n, nl, method)).collect::<Result<_>>()?;
    solve_cohomology_with(r, method, &p, tail_tol, EPS_SIGN)
}

/// Same as [`solve_cohomology`] for a given list `P_1..P_r` and sign convention.
pub(crate) fn solve_cohomology_with(
    r: usize,
    method: &MethodSpec,
    p: &[PolyHamiltonian],
    tail_tol: f64,
    sign: f64,
) -> Result<CohomologySolution> {
    let k = method.grid.size();
    let h = method.h;
    let freq = &method.freq;
    let lambda: Vec<f64> = freq.table().iter().map(|w| h * w).collect();
    let mut b: Vec<TimePoly> = Vec::with_capacity(r);
    let mut db: Vec<TimePoly> = Vec::with_capacity(r);
    for n in 1..=r {
        let mut seed = GradedFamily::zero(k, n);
        for (m, d) in db.iter().enumerate() {
            seed.set(m + 1, d.clone())?;
        }
        let gen = GradedGenerator {
            b0_lambda: &lambda,
            higher: &b,
            sign,
            t_scale: h,
        };
        let kn = exp_ad_graded(&gen, &seed, n, tail_tol)?.grade(n).clone();
        let rhs = TimePoly::constant(p[n - 1].clone()).add_scaled(&kn, -1.0)?;
        let dbn = rhs.map(|x| invert_phi_ad_signed(x, h, freq, sign))?;
        b.push(dbn.integral());
        db.push(dbn);
    }
    Ok(CohomologySolution {
        h,
        r,
        grid_size: k,
        rho: freq.rho(),
        mollifier: method.mollifier.id().to_string(),
        b,
    })
}

/// `H_h = T + h^{-1} (B_1(h) + ... + B_r(h))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedHamiltonian {
    /// `omega_k` in mode order (the diagonal part is `T`).
    pub omega: Vec<f64>,
    /// Parts of degree `3..=r+2`.
    pub parts: Vec<PolyHamiltonian>,
}

impl ModifiedHamiltonian {
    pub fn kinetic_only(freq: &FrequencySpec) -> Self {
        Self {
            omega: freq.table().to_vec(),
            parts: Vec::new(),
        }
    }

    pub fn evaluate(&self, u: &ModeState) -> Result<f64> {
        let mut s: f64 = self
            .omega
            .iter()
            .zip(&u.u)
            .map(|(w, z)| 0.5 * w * z.norm_sqr())
            .sum();
        for p in &self.parts {
            s += p.evaluate(u)?;
        }
        Ok(s)
    }

    pub fn gradient(&self, u: &ModeState) -> Result<ModeState> {
        let mut g = ModeState {
            u: self.omega.iter().zip(&u.u).map(|(w, z)| z * *w).collect(),
        };
        for p in &self.parts {
            let gp = p.gradient(u)?;
            for (a, b) in g.u.iter_mut().zip(&gp.u) {
                *a += b;
            }
        }
        Ok(g)
    }
}

pub fn modified_hamiltonian(sol: &CohomologySolution) -> Result<ModifiedHamiltonian> {
    let parts = sol
        .b
        .iter()
        .map(|b| Ok(b.eval(sol.h)?.scale(1.0 / sol.h)))
        .collect::<Result<Vec<_>>>()?;
    let grid = TorusGrid::new(sol.grid_size)?;
    let omega = FrequencySpec::new(&grid, sol.rho)?.table().to_vec();
    Ok(ModifiedHamiltonian { omega, parts })
}

/// Time-`t` flow of `i du/dt = grad H_h(u)`.
pub fn flow_modified(hh: &ModifiedHamiltonian, u: &ModeState, t: f64, tol: f64) -> Result<ModeState> {
    poly_flow(
        &hh.omega,
        &hh.parts,
        u,
        t,
        FlowOptions {
            tol,
            ..FlowOptions::default()
        },
    )
}

/// Lie step `Phi_P^h o Phi_T^h` for `P = sum p` depending on `q` only: the
/// polynomial kick is exact, `u <- u - i h grad P(u)`.
pub fn poly_lie_step(u: &ModeState, p: &[PolyHamiltonian], method: &MethodSpec) -> Result<ModeState> {
    let mut v = flow_t(u, method.h, &method.freq);
    let mut kick = vec![Complex64::new(0.0, 0.0); v.len()];
    for x in p {
        let g = x.gradient(&v)?;
        for (a, b) in kick.iter_mut().zip(&g.u) {
            *a += b;
        }
    }
    for (z, g) in v.u.iter_mut().zip(&kick) {
        *z -= Complex64::new(0.0, method.h) * g;
    }
    Ok(v)
}
