use kgnf_core::hampoly::{poisson_bracket, taylor_of_v};
use kgnf_core::harness::ExperimentConfig;
use kgnf_core::integrators::{flow_t, strang_step, Propagator};
use kgnf_core::normalform::project_resonant;
use kgnf_core::sample::{random_polynomial, random_state};
use kgnf_core::spectral::{
    from_modes, power_law_initial_data, sobolev_norm, sobolev_norm_coeffs, super_action, to_modes,
};
use kgnf_core::{FrequencySpec, MethodSpec, ModeState, Mollifier, NonlinearitySpec, RealState, Scheme, TorusGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn method(k: usize, rho: f64, h: f64) -> MethodSpec {
    let grid = TorusGrid::new(k).unwrap();
    let freq = FrequencySpec::new(&grid, rho).unwrap();
    MethodSpec::new(grid, freq, h, Scheme::Strang, Mollifier::Identity).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mode_variables_round_trip(k in 2usize..40, rho in 0.5f64..10.0, seed in any::<u64>()) {
        let m = method(k, rho, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(k, 1.0, &mut rng);
        let s = RealState { q: from_modes(&u, &m.grid, &m.freq).unwrap().q, p: vec![0.0; k] };
        let back = from_modes(&to_modes(&s, &m.grid, &m.freq).unwrap(), &m.grid, &m.freq).unwrap();
        for (a, b) in s.q.iter().zip(&back.q) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn linear_flow_keeps_actions(k in 2usize..40, t in -50.0f64..50.0, seed in any::<u64>()) {
        let m = method(k, 2.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(k, 1.0, &mut rng);
        let v = flow_t(&u, t, &m.freq);
        for j in m.grid.modes() {
            let (a, b) = (super_action(&u, &m.grid, j).unwrap(), super_action(&v, &m.grid, j).unwrap());
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a));
        }
    }

    #[test]
    fn strang_is_reversible(seed in any::<u64>(), h in 0.01f64..0.3) {
        // p -> -p reads u_k -> conj(u_{-k}); then S_h o R o S_h = R
        let nl = NonlinearitySpec::parse("monomial:2:1+monomial:5:-1").unwrap();
        let m = method(16, 8f64.sqrt(), h);
        let flip = |u: &ModeState| ModeState::from_vec(
            (0..u.len()).map(|i| u.u[m.grid.mirror_index(i)].conj()).collect(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(16, 0.2, &mut rng);
        let v = strang_step(&flip(&strang_step(&u, &m, &nl).unwrap()), &m, &nl).unwrap();
        prop_assert!(flip(&u).l2_distance(&v) <= 1e-13);
    }

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>(), dp in 3usize..5, dx in 3usize..5) {
        let grid = TorusGrid::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(&grid, dp, 5, &mut rng);
        let x = random_polynomial(&grid, dx, 5, &mut rng);
        let u = random_state(8, 0.5, &mut rng);
        let a = poisson_bracket(&p, &x).unwrap().evaluate(&u).unwrap();
        let b = poisson_bracket(&x, &p).unwrap().evaluate(&u).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn projection_partitions(seed in any::<u64>(), gamma in 0.0f64..3.0) {
        let m = method(8, 1.7, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(&m.grid, 4, 12, &mut rng);
        let (kept, removed) = project_resonant(&p, gamma, &m.freq);
        prop_assert_eq!(kept.len() + removed.len(), p.len());
        prop_assert_eq!(kept.add(&removed).unwrap(), p);
    }

    #[test]
    fn taylor_sum_is_exact_for_polynomials(seed in any::<u64>(), c2 in -1.0f64..1.0, c3 in -1.0f64..1.0) {
        let m = method(8, 1.0, 0.2);
        let nl = NonlinearitySpec::parse(&format!("monomial:2:{c2}+monomial:3:{c3}")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(8, 0.3, &mut rng);
        let s: f64 = (1..=2).map(|n| taylor_of_v(n, &nl, &m).unwrap().evaluate(&u).unwrap()).sum();
        let v = Propagator::new(&m, &nl).potential(&u.u, true);
        prop_assert!((v - s).abs() <= 1e-14 * (1.0 + v.abs()));
    }

    #[test]
    fn power_law_is_normalized(k in 2usize..300, s0 in 0.0f64..2.0, eps in 0.0f64..2.0) {
        let grid = TorusGrid::new(k).unwrap();
        let q = power_law_initial_data(&grid, s0, eps).unwrap().q;
        let norm = sobolev_norm_coeffs(&grid.dft_real(&q).unwrap(), &grid, s0);
        prop_assert!((norm - eps).abs() <= 1e-12 * (1.0 + eps));
    }

    #[test]
    fn config_round_trips(k in 1usize..64, h in 1e-4f64..1.0, r in 1usize..4, t in 0.0f64..100.0, strict: bool) {
        let c = ExperimentConfig {
            grid_size: k,
            h,
            r,
            t_final: t,
            strict,
            modes: vec![0],
            ..Default::default()
        };
        prop_assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c);
    }
}

#[test]
fn norms_agree_between_state_and_coefficients() {
    let m = method(16, 1.0, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let u = random_state(16, 1.0, &mut rng);
    assert_eq!(sobolev_norm(&u, &m.grid, 0.5), sobolev_norm_coeffs(&u.u, &m.grid, 0.5));
}
