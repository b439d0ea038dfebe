use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cohomology::solve_cohomology_with;
use super::*;
use crate::hampoly::tests::{random_poly, random_state};
use crate::hampoly::{poisson_bracket, taylor_of_v, MonomialKey, DEFAULT_TAIL_TOL};
use crate::integrators::{flow_t, lie_step, MethodSpec, Scheme};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{sobolev_norm, ModeState, Mollifier, TorusGrid};

fn method(k: usize, rho: f64, h: f64) -> MethodSpec {
    let g = TorusGrid::new(k).unwrap();
    let f = FrequencySpec::new(&g, rho).unwrap();
    MethodSpec::new(g, f, h, Scheme::Lie, Mollifier::Sinc).unwrap()
}

fn unit_state(m: &MethodSpec, seed: u64) -> ModeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_state(m.grid.size(), 1.0, &mut rng);
    let n = sobolev_norm(&u, &m.grid, 0.5);
    u.scaled(1.0 / n)
}

fn ratio_ok(ratio: f64, expected_exp: i32) -> bool {
    let e = 0.5f64.powi(expected_exp);
    ratio > e / 2.0 && ratio < e * 2.0
}

#[test]
fn resonance_modulus_examples() {
    let m = method(8, 1.0, 0.1);
    let key = MonomialKey::from_pairs([(1, 1), (1, -1)]).unwrap();
    assert_eq!(resonance_modulus(&key, &m.freq), 0.0);
    let key = MonomialKey::from_pairs([(1, 1), (2, 1), (3, -1)]).unwrap();
    let om = resonance_modulus(&key, &m.freq);
    assert!((om - (2f64.sqrt() + 5f64.sqrt() - 10f64.sqrt())).abs() < 1e-15);
    assert_eq!(resonance_modulus(&key.conjugate(), &m.freq), -om);
}

#[test]
fn phi_series_examples() {
    assert_eq!(phi_series(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    let v = phi_series(Complex64::new(0.0, std::f64::consts::PI));
    assert!((v - Complex64::new(0.0, 2.0 / std::f64::consts::PI)).norm() < 1e-15);
    for i in 1..400 {
        let x = -20.0 + 0.1 * i as f64;
        if i == 200 {
            continue;
        }
        let a = phi_series(Complex64::new(0.0, x)).norm();
        let b = (2.0 * (x / 2.0).sin() / x).abs();
        assert!((a - b).abs() < 1e-14, "{x}");
    }
    // both branches agree at the switch
    for x in [0.99e-4, 1.01e-4] {
        let z = Complex64::new(0.3 * x, 0.9 * x);
        let direct = {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut t = Complex64::new(1.0, 0.0);
            for k in 1..12 {
                acc += t;
                t = t * z / (k as f64 + 1.0);
            }
            acc
        };
        assert!((phi_series(z) - direct).norm() < 1e-15);
    }
}

#[test]
fn phi_inversion() {
    let m = method(8, 1.0, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let q = random_poly(&m.grid, 4, 30, &mut rng);
    let back = invert_phi_ad(&apply_phi_ad(&q, m.h, &m.freq), m.h, &m.freq).unwrap();
    assert!(back.sub(&q).unwrap().max_abs_coefficient() < 1e-12 * q.max_abs_coefficient());

    let res = PolyHamiltonian::super_action(&m.grid, 2).unwrap();
    assert_eq!(invert_phi_ad(&res, m.h, &m.freq).unwrap(), res);

    // u_3 u_{-3}: Omega = 2 omega_3, and h Omega = 2 pi
    let p = PolyHamiltonian::build(&[(vec![(3, 1), (-3, 1)], Complex64::new(1.0, 0.0))], &m.grid, 2).unwrap();
    let h = std::f64::consts::PI / m.freq.omega(3);
    match invert_phi_ad(&p, h, &m.freq) {
        Err(Error::ResonantStep { modulus, .. }) => assert!(modulus < 1e-8),
        other => panic!("expected a resonant step error, got {other:?}"),
    }
}

#[test]
fn first_order_solution_is_linear_in_t() {
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
    let sol = solve_cohomology(1, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let p1 = taylor_of_v(1, &nl, &m).unwrap();
    let expect = invert_phi_ad(&p1, m.h, &m.freq).unwrap();
    let b1 = sol.b(1);
    assert_eq!(b1.t_degree(), Some(1));
    assert!(b1.coefficient(0).is_empty());
    assert!(b1.coefficient(1).sub(&expect).unwrap().max_abs_coefficient() < 1e-15);

    let zero = solve_cohomology(3, &m, &NonlinearitySpec::zero(), DEFAULT_TAIL_TOL).unwrap();
    assert!(zero.b.iter().all(|b| b.is_zero()));
    let hh = modified_hamiltonian(&zero).unwrap();
    let u = unit_state(&m, 1).scaled(0.1);
    assert!(flow_modified(&hh, &u, 0.7, 1e-12).unwrap().l2_distance(&flow_t(&u, 0.7, &m.freq)) < 1e-14);
}

#[test]
fn cohomology_is_triangular() {
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:-0.7").unwrap();
    let s2 = solve_cohomology(2, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let s3 = solve_cohomology(3, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    for n in 1..=2 {
        let d = s2.b(n).add_scaled(s3.b(n), -1.0).unwrap();
        assert!(d.weighted_norm(1.0) < 1e-12 * s2.b(n).weighted_norm(1.0));
    }
    for n in 1..=3 {
        let b = s3.b(n);
        assert!(b.t_degree().unwrap() <= n);
        assert!(b.coefficient(0).is_empty());
        assert_eq!(b.degree(), n + 2);
    }
}

fn lie_defect(m: &MethodSpec, p: &[PolyHamiltonian], hh: &ModifiedHamiltonian, u: &ModeState) -> f64 {
    let a = poly_lie_step(u, p, m).unwrap();
    let b = flow_modified(hh, u, m.h, 1e-13).unwrap();
    let d = ModeState {
        u: a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect(),
    };
    sobolev_norm(&d, &m.grid, 0.5)
}

#[test]
fn backward_error_order_and_sign() {
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
    let u1 = unit_state(&m, 2);
    for r in [1usize, 2] {
        let p: Vec<_> = (1..=r).map(|n| taylor_of_v(n, &nl, &m).unwrap()).collect();
        for (sign, good) in [(EPS_SIGN, true), (-EPS_SIGN, false)] {
            let sol = solve_cohomology_with(r, &m, &p, DEFAULT_TAIL_TOL, sign).unwrap();
            let hh = modified_hamiltonian(&sol).unwrap();
            let d1 = lie_defect(&m, &p, &hh, &u1.scaled(0.1));
            let d2 = lie_defect(&m, &p, &hh, &u1.scaled(0.05));
            let ratio = d2 / d1;
            assert_eq!(ratio_ok(ratio, r as i32 + 2), good, "r={r} sign={sign} ratio={ratio}");
        }
    }
}

#[test]
fn backward_error_with_full_potential() {
    // r = 1 leaves the y^3 term of g to the remainder
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
    let sol = solve_cohomology(1, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let hh = modified_hamiltonian(&sol).unwrap();
    let u1 = unit_state(&m, 3);
    let defect = |eps: f64| {
        let u = u1.scaled(eps);
        let a = lie_step(&u, &m, &nl).unwrap();
        let b = flow_modified(&hh, &u, m.h, 1e-13).unwrap();
        sobolev_norm(&ModeState { u: a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect() }, &m.grid, 0.5)
    };
    let ratio = defect(0.05) / defect(0.1);
    assert!(ratio_ok(ratio, 3), "{ratio}");
}

#[test]
fn modified_hamiltonian_properties() {
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
    let sol = solve_cohomology(2, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let hh = modified_hamiltonian(&sol).unwrap();
    assert_eq!(hh.evaluate(&ModeState::zeros(8)).unwrap(), 0.0);
    let u = unit_state(&m, 4).scaled(0.2);
    let e0 = hh.evaluate(&u).unwrap();
    let v = flow_modified(&hh, &u, 3.0, 1e-12).unwrap();
    assert!((hh.evaluate(&v).unwrap() - e0).abs() < 10.0 * 1e-12 * e0);
    // ellipticity band at ||u||_{H^{1/2}} = 0.05; T alone gives exactly 1/2 for rho = 1
    for seed in 0..100 {
        let u = unit_state(&m, 100 + seed).scaled(0.05);
        let q = hh.evaluate(&u).unwrap() / 0.05f64.powi(2);
        assert!((0.45..0.55).contains(&q), "{q}");
    }
}

#[test]
fn projection_partitions() {
    let m = method(8, 1.0, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let p = random_poly(&m.grid, 4, 40, &mut rng);
    let (kept, removed) = project_resonant(&p, 0.5, &m.freq);
    assert_eq!(kept.add(&removed).unwrap(), p);
    assert_eq!(kept.len() + removed.len(), p.len());
    for (key, _) in kept.iter() {
        assert!(removed.coefficient(key) == Complex64::new(0.0, 0.0));
    }
    let (k, r) = project_resonant(&p, f64::INFINITY, &m.freq);
    assert!(k.is_empty());
    assert_eq!(r, p);
    let (_, r) = project_resonant(&p, f64::MIN_POSITIVE, &m.freq);
    for (key, _) in r.iter() {
        assert_eq!(resonance_modulus(key, &m.freq), 0.0);
    }
}

#[test]
fn birkhoff_trivial_cases() {
    let m = method(8, 1.0, 0.2);
    let grid = &m.grid;
    let res = PolyHamiltonian::build(
        &[(vec![(1, 1), (2, 1), (1, -1), (2, -1)], Complex64::new(0.7, 0.0))],
        grid,
        4,
    )
    .unwrap();
    let y = vec![PolyHamiltonian::zero(8, 3), res.clone()];
    let out = birkhoff_normal_form(&y, 0.1, &m.freq, grid).unwrap();
    assert!(out.chi.iter().all(|c| c.is_empty()));
    assert_eq!(out.q[1], res);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let y1 = random_poly(grid, 3, 20, &mut rng);
    let out = birkhoff_normal_form(std::slice::from_ref(&y1), 0.3, &m.freq, grid).unwrap();
    let (kept, removed) = project_resonant(&y1, 0.3, &m.freq);
    assert_eq!(out.q[0], removed);
    for (key, c) in kept.iter() {
        let expect = c / Complex64::new(0.0, resonance_modulus(key, &m.freq));
        assert!((out.chi[0].coefficient(key) - expect).norm() < 1e-15);
    }
    assert!(birkhoff_normal_form(&[y1], 1.5, &m.freq, grid).is_err());
}

fn bnf_setup() -> (MethodSpec, Vec<PolyHamiltonian>, f64) {
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::monomial(2, 1.0).unwrap();
    let sol = solve_cohomology(2, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let hh = modified_hamiltonian(&sol).unwrap();
    let div = min_small_divisor(&m.freq, 2, &m.grid, Some(1)).unwrap();
    (m, hh.parts, div.modulus / 2.0)
}

#[test]
fn birkhoff_structure() {
    let (m, y, gamma) = bnf_setup();
    let out = birkhoff_normal_form(&y, gamma, &m.freq, &m.grid).unwrap();
    let half: Vec<f64> = m.freq.table().iter().map(|w| 0.5 * w).collect();
    let mut chi = Vec::new();
    for l in 1..=2 {
        for (key, _) in out.q[l - 1].iter() {
            assert!(resonance_modulus(key, &m.freq).abs() < gamma);
        }
        for (key, _) in out.chi[l - 1].iter() {
            assert!(resonance_modulus(key, &m.freq).abs() >= gamma);
        }
        let f = normalized_hamiltonian(&chi, &y, &m.freq, l).unwrap().swap_remove(l);
        let (kept, _) = project_resonant(&f, gamma, &m.freq);
        let lhs = crate::hampoly::ad_quadratic(&out.chi[l - 1], &half).unwrap().add(&kept).unwrap();
        assert!(lhs.max_abs_coefficient() <= 1e-11 * kept.max_abs_coefficient().max(1e-300));
        assert!(out.chi[l - 1].h_norm() <= f.h_norm() / gamma * (1.0 + 1e-12));
        chi.push(out.chi[l - 1].clone());
    }
    // the transformed Hamiltonian agrees with T + Q through grade r
    let full = normalized_hamiltonian(&out.chi, &y, &m.freq, 2).unwrap();
    for l in 1..=2 {
        assert!(full[l].sub(&out.q[l - 1]).unwrap().max_abs_coefficient() < 1e-12);
    }
    for k in [0, 1] {
        assert!(commutation_check(&out.q, k, &m.grid).unwrap(), "k = {k}");
    }
    assert!(commutation_check(&[], 3, &m.grid).unwrap());
    let bracket = poisson_bracket(&PolyHamiltonian::super_action(&m.grid, 1).unwrap(), &out.q[1]).unwrap();
    assert!(bracket.max_abs_coefficient() < 1e-12);
}

#[test]
fn birkhoff_remainder_order() {
    let (m, y, gamma) = bnf_setup();
    let out = birkhoff_normal_form(&y, gamma, &m.freq, &m.grid).unwrap();
    let u1 = unit_state(&m, 5);
    let rem = |eps: f64, dir: Direction| birkhoff_remainder(&out, &y, &m.freq, &u1.scaled(eps), dir, 1e-13).unwrap().abs();
    let ratio = rem(0.05, Direction::NORMALIZING) / rem(0.1, Direction::NORMALIZING);
    assert!(ratio_ok(ratio, 5), "{ratio}");
    // the other time-one map only removes nothing at first order
    let ratio = rem(0.05, Direction::Forward) / rem(0.1, Direction::Forward);
    assert!(ratio_ok(ratio, 3), "{ratio}");
}

#[test]
fn small_divisor_examples() {
    for rho in [1.0, 4.0, 8f64.sqrt(), 9.0] {
        let m = method(8, rho, 0.1);
        let d = min_small_divisor(&m.freq, 0, &m.grid, None).unwrap();
        let expect = (1.0 + rho).sqrt() - rho.sqrt();
        assert!((d.modulus - expect).abs() < 1e-15, "rho {rho}: {} vs {expect}", d.modulus);
        assert!(d.modulus > 0.0);
        // brute force over all sign/mode pairs
        let mut best = f64::INFINITY;
        for a in m.grid.modes() {
            for b in m.grid.modes() {
                for s in [-1.0, 1.0] {
                    let om = m.freq.omega(a) + s * m.freq.omega(b);
                    if a.abs() != b.abs() || s > 0.0 {
                        best = best.min(om.abs());
                    }
                }
            }
        }
        assert!((best - d.modulus).abs() < 1e-15);
    }
    let m = method(4, 2.0, 0.1);
    let d = min_small_divisor(&m.freq, 1, &m.grid, Some(-2)).unwrap();
    assert!(d.witness.iter().any(|&(j, _)| j.abs() == 2));
    let m = method(32, 2.0, 0.1);
    assert!(matches!(min_small_divisor(&m.freq, 1, &m.grid, None), Err(Error::Budget(_))));
    assert_eq!(auto_gamma(0.01, 0.5), 0.25);
    assert_eq!(auto_gamma(0.01, 0.1), 0.1);
}

#[test]
fn serialization_round_trip() {
    let m = method(8, 1.0, 0.2);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
    let sol = solve_cohomology(2, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let mut buf = Vec::new();
    write_solution(&mut buf, &sol).unwrap();
    let back = read_solution(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, sol);

    let hh = modified_hamiltonian(&sol).unwrap();
    let out = birkhoff_normal_form(&hh.parts, 0.2, &m.freq, &m.grid).unwrap();
    let mut buf = Vec::new();
    write_birkhoff(&mut buf, &out, 8, 1.0).unwrap();
    let back = read_birkhoff(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, out);
}

#[test]
fn random_gamma_sample_commutes() {
    // strongly non-resonant draw of rho, gamma below the measured divisor
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let rho: f64 = rng.gen_range(1.0..10.0);
    let m = method(8, rho, 0.1);
    let nl = NonlinearitySpec::parse("monomial:2:1+monomial:3:1").unwrap();
    let sol = solve_cohomology(2, &m, &nl, DEFAULT_TAIL_TOL).unwrap();
    let y = modified_hamiltonian(&sol).unwrap().parts;
    for k in [0i64, 1, 2] {
        let d = min_small_divisor(&m.freq, 2, &m.grid, Some(k)).unwrap();
        let out = birkhoff_normal_form(&y, 0.9 * d.modulus.min(1.0), &m.freq, &m.grid).unwrap();
        assert!(commutation_check(&out.q, k, &m.grid).unwrap());
    }
}
