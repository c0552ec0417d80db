use super::*;

fn ground() -> EnergyEigenstate<f64> {
    EnergyEigenstate::in_box(1.0, 1).unwrap()
}

fn cfg(region: (f64, f64), duration: f64) -> ProtectiveConfig<f64> {
    ProtectiveConfig { state: ground(), region, duration, ramp: 0.25 * duration, pointer_delta: 4.0 }
}

#[test]
fn projections_in_closed_form() {
    let g = ground();
    assert!((expected_projection(&g, (0.0, 0.5)).unwrap() - 0.5).abs() < 1e-15);
    let quarter = 0.25 - 1.0 / (2.0 * std::f64::consts::PI);
    assert!((expected_projection(&g, (0.0, 0.25)).unwrap() - quarter).abs() < 1e-15);
    assert!((quarter - 0.09085).abs() < 1e-5);
    // against quadrature of 2 sin^2(3 pi x)
    let e3 = EnergyEigenstate::in_box(1.0, 3).unwrap();
    let q = simpson(|x: f64| 2.0 * (3.0 * std::f64::consts::PI * x).sin().powi(2), 0.1, 0.7, 2000);
    assert!((expected_projection(&e3, (0.1, 0.7)).unwrap() - q).abs() < 1e-12);
    let h = EnergyEigenstate::harmonic(1.3, 0).unwrap();
    assert!((expected_projection(&h, (f64::NEG_INFINITY, 0.0)).unwrap() - 0.5).abs() < 1e-12);
    assert!(expected_projection(&g, (-0.1, 0.5)).is_err());
    assert!(expected_projection(&g, (0.5, 0.5)).is_err());
}

#[test]
fn projections_over_a_partition_sum_to_one() {
    for state in [ground(), EnergyEigenstate::in_box(2.0, 4).unwrap(), EnergyEigenstate::harmonic(0.7, 3).unwrap()] {
        let r = reconstruct_density(&state, 13).unwrap();
        assert!((r.averages.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn reconstruction_improves_with_more_bins() {
    let g = ground();
    let two = reconstruct_density(&g, 2).unwrap();
    assert!((two.averages[0] - 0.5).abs() < 1e-15 && (two.averages[1] - 0.5).abs() < 1e-15);
    let errs: Vec<f64> = [2, 4, 8, 16, 32].iter().map(|&m| reconstruct_density(&g, m).unwrap().l1_error).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    // piecewise-constant error of a smooth density: h/4 ∫|ρ'| = 1/(32 M)·4·... = 1/M for ρ = 2 sin^2(πx)
    let m32 = errs[4];
    assert!((m32 - 1.0 / 32.0).abs() < 2e-3, "{m32}");
}

#[test]
fn reconstruction_shows_the_node() {
    let r = reconstruct_density(&EnergyEigenstate::in_box(1.0, 2).unwrap(), 32).unwrap();
    let max = r.averages.iter().cloned().fold(0.0, f64::max);
    let min = r.averages.iter().cloned().fold(1.0, f64::min);
    assert!(min < 0.05 * max);
    let json = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<ReconstructionReport>(&json).unwrap(), r);
}

#[test]
fn config_checks() {
    let mut c = cfg((0.0, 0.5), 10.0);
    c.ramp = 0.1;
    assert!(c.validate().is_err());
    c.ramp = 6.0;
    assert!(c.validate().is_err());
    assert!(cfg((0.0, 0.5), -1.0).validate().is_err());
}

#[test]
fn full_region_shifts_by_one() {
    let r = adiabatic_pointer_shift(&cfg((0.0, 1.0), 2.0), &ProtectiveNumerics::default()).unwrap();
    assert!((r.measured - 1.0).abs() < 1e-9, "{}", r.measured);
    assert!(r.overlap > 1.0 - 1e-9);
}

#[test]
fn short_switching_is_rejected() {
    let c = ProtectiveConfig { pointer_delta: 0.3, ..cfg((0.0, 0.25), 0.2) };
    match adiabatic_pointer_shift(&c, &ProtectiveNumerics::default()) {
        Err(Error::NotAdiabatic { overlap }) => assert!(overlap < 0.99),
        other => panic!("{other:?}"),
    }
}

#[test]
fn eigenstate_particle_is_frozen() {
    let r = eigenstate_stationarity(&ground(), 1.0, 0.3, 10).unwrap();
    assert!(r.max_speed < 1e-10, "{}", r.max_speed);
    assert_eq!(r.occupied, vec![2]);
    assert!(r.empty_volume_signal);
    assert_eq!(r.unvisited_averages.len(), 9);
}

#[test]
fn adiabatic_shift_converges_to_the_projection() {
    let errs: Vec<f64> = [1.25, 2.5, 5.0, 10.0]
        .iter()
        .map(|&t| {
            let c = ProtectiveConfig { pointer_delta: 0.5, ..cfg((0.0, 0.25), t) };
            let r = adiabatic_pointer_shift(&c, &ProtectiveNumerics::default()).unwrap();
            assert!(r.norm_drift < 1e-10);
            r.relative_error
        })
        .collect();
    assert!(errs[3] < 0.05);
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..5.0).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn half_box_shift_is_exact_by_symmetry() {
    for t in [1.25, 5.0] {
        let c = ProtectiveConfig { pointer_delta: 0.5, ..cfg((0.0, 0.5), t) };
        let r = adiabatic_pointer_shift(&c, &ProtectiveNumerics::default()).unwrap();
        assert!(r.relative_error < 1e-10, "{}", r.relative_error);
    }
}

#[test]
fn measured_particle_barely_moves() {
    let num = ProtectiveNumerics { track: Some((0.3, 0.0)), ..Default::default() };
    let r = adiabatic_pointer_shift(&cfg((0.6, 0.7), 5.0), &num).unwrap();
    let tr = r.trajectory.unwrap();
    let drift = tr.xs().iter().map(|x| (x - 0.3).abs()).fold(0.0, f64::max);
    assert!(drift < 0.01, "{drift}");
    // the particle sits outside V, so its pointer coordinate stays put
    assert!(tr.qs().iter().all(|q| q.abs() < 1e-12));
    assert!(r.relative_error < 0.05);
}
