use super::*;

#[test]
fn config_round_trip() {
    for name in preset_names() {
        let c = preset(name).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c, "{name}");
    }
    let mut c = ExperimentConfig {
        grid_size: 16,
        rho: 8f64.sqrt(),
        h: 0.1 / 3.0,
        modes: vec![-3, 0, 1, 2, 3, 7],
        out: Some("run.csv".into()),
        strict: true,
        ..Default::default()
    };
    c.g = NonlinearitySpec::parse("monomial:2:0.5+monomial:5:-1").unwrap();
    assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c);
}

#[test]
fn config_errors() {
    for bad in ["K = 8\nK = 16", "colour = red", "h = -1", "modes = 0..=9", "K 8", "scheme = euler", "rho = sqrt(x)"] {
        assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))), "{bad}");
    }
    let c = ExperimentConfig::parse("# comment\nrho = sqrt(8)  # trailing\nmodes = 0..=2, -4\n").unwrap();
    assert_eq!(c.rho, 8f64.sqrt());
    assert_eq!(c.modes, vec![0, 1, 2, -4]);
    assert!(matches!(preset("nope"), Err(Error::Config(_))));
}

#[test]
fn zero_final_time_gives_one_row() {
    let c = ExperimentConfig {
        t_final: 0.0,
        ..preset("zero-g").unwrap()
    };
    let report = run_experiment(&c).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].step, 0);
}

#[test]
fn zero_nonlinearity_conserves_everything() {
    let c = ExperimentConfig {
        t_final: 20.0,
        ..preset("zero-g").unwrap()
    };
    let s = run_experiment(&c).unwrap().summary();
    assert!(s.energy_drift <= 1e-12, "{}", s.energy_drift);
    assert!(s.modified_energy_drift <= 1e-12, "{}", s.modified_energy_drift);
    assert!(s.action_drift.iter().all(|&d| d <= 1e-12), "{:?}", s.action_drift);
}

#[test]
fn csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig {
        t_final: 2.0,
        h: 0.01,
        ..preset("energy-drift").unwrap()
    };
    let mut texts = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.csv"));
        c.out = Some(path.clone());
        run_experiment(&c).unwrap();
        texts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert!(texts[0].starts_with(b"step,time,H,Hh,norm_h12,norm_h1,J_0,J_1,J_2\n"));
}

#[test]
fn strict_cfl_is_an_error() {
    let c = ExperimentConfig {
        h: 1.0,
        strict: true,
        ..preset("zero-g").unwrap()
    };
    assert!(matches!(run_experiment(&c), Err(Error::Cfl { .. })));
    let lax = ExperimentConfig { strict: false, t_final: 1.0, ..c };
    assert!(run_experiment(&lax).is_ok());
}

#[test]
fn fit_recovers_power_laws() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&e| (e, 3.0 * e * e * e)).collect();
    assert!((fit_exponent(&pts).unwrap() - 3.0).abs() < 1e-12);
    assert!(fit_exponent(&pts[..1]).is_none());
}

#[test]
fn study_rejects_bad_levels() {
    let c = preset("bea-toy").unwrap();
    for levels in [&[0.1, 0.05][..], &[0.1, 0.05, 0.02], &[0.1, -0.05, 0.025]] {
        assert!(matches!(scaling_study(&c, Quantity::BeaDefectLie, levels), Err(Error::Config(_))));
    }
    assert_eq!("action_drift".parse::<Quantity>().unwrap(), Quantity::ActionDrift);
    assert!("drift".parse::<Quantity>().is_err());
}

#[test]
fn zero_nonlinearity_study_is_exact() {
    let c = preset("zero-g").unwrap();
    let t = scaling_study(&c, Quantity::EnergyDrift, &[0.2, 0.1, 0.05]).unwrap();
    assert!(t.exact);
    assert!(t.exponent.is_none());
    assert!(t.rows.iter().all(|r| r.value <= EXACT_TOL));
}

#[test]
fn bea_study_example() {
    let c = preset("bea-toy").unwrap();
    let t = scaling_study(&c, Quantity::BeaDefectLie, &[0.1, 0.05, 0.025]).unwrap();
    let e = t.exponent.unwrap();
    assert!((e - 4.0).abs() <= 0.7, "{e}");
}
