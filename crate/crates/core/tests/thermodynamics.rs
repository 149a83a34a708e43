use casimir::aniso_pair::{pair_entropy, pair_free_energy, AnisoPairConfig};
use casimir::dispersion::{DispersionModel, DrudeParams};
use casimir::lifshitz::{
    free_energy_area, zero_t_free_energy_area, EngineOptions, ThermalGeometry,
};
use casimir::quadrature::{integrate, QuadOptions};
use casimir::thermo::{
    classical_limit_ratio, entropy_area, entropy_curve, force_difference, nonmonotonic_check,
    DerivativeOptions, Monotonicity,
};

fn plate_f(a: f64, t: f64, m: &DispersionModel) -> f64 {
    let g = ThermalGeometry::plates(a, t).unwrap();
    free_energy_area(&g, m, m, &EngineOptions::for_entropy())
        .unwrap()
        .value
}

#[test]
fn free_energy_change_equals_entropy_integral() {
    let au = DispersionModel::gold();
    let a = 1e-6;
    let opts = DerivativeOptions::default();
    let quad = QuadOptions {
        rel_tol: 1e-7,
        ..Default::default()
    };
    let (integral, _) = integrate(
        |t| entropy_area(a, &au, &au, t, &opts).unwrap().value,
        10.0,
        300.0,
        &quad,
    )
    .unwrap();
    let delta_f = plate_f(a, 300.0, &au) - plate_f(a, 10.0, &au);
    assert!(
        ((delta_f + integral) / delta_f).abs() < 1e-5,
        "{delta_f} vs {}",
        -integral
    );
}

#[test]
fn low_temperature_entropy_shrinks() {
    let au = DispersionModel::gold();
    let curve = entropy_curve(
        1e-6,
        &au,
        &au,
        &[0.25, 0.5, 1.0, 2.0],
        &DerivativeOptions::default(),
    )
    .unwrap();
    let mags: Vec<f64> = curve.entropy.iter().map(|s| s.abs()).collect();
    assert!(mags.windows(2).all(|w| w[0] < w[1]), "{mags:?}");
    assert!(curve.entropy.iter().all(|&s| s < 0.0));
    for (s, e) in curve.entropy.iter().zip(&curve.errors) {
        assert!(*e < 0.05 * s.abs());
    }
    assert!(curve.flagged.iter().all(|f| !f));
}

#[test]
fn relative_reduction_at_200nm() {
    let au = DispersionModel::gold();
    let o = EngineOptions::default();
    let d = force_difference(200e-9, 296e-6, &au, &au, 1.0, 300.0, &o).unwrap();
    let g = ThermalGeometry::sphere_plate(200e-9, 296e-6, 1.0).unwrap();
    let cold = casimir::lifshitz::sphere_plate_force(&g, &au, &au, &o)
        .unwrap()
        .magnitude();
    let pct = 100.0 * d / cold;
    assert!((pct - 3.6).abs() <= 1.5, "{pct}");
}

#[test]
fn classical_ratio_at_low_temperature_is_the_zero_t_ratio() {
    let p = DrudeParams::gold();
    let a = 200e-9;
    let r = classical_limit_ratio(a, 1.0, &p, &EngineOptions::default()).unwrap();
    let plasma = DispersionModel::plasma(9.0).unwrap();
    let drude = DispersionModel::Drude(p);
    let r0 = zero_t_free_energy_area(a, &plasma, &plasma, 1e-9).unwrap()
        / zero_t_free_energy_area(a, &drude, &drude, 1e-9).unwrap();
    assert!((r - r0).abs() < 1e-3 * r0, "{r} {r0}");
    assert!((r - 1.0).abs() < 0.02);
}

#[test]
fn high_permittivity_dielectric_is_nonmonotone() {
    let grid: Vec<f64> = (0..=60).map(|i| 1.0 + 10.0 * i as f64).collect();
    match nonmonotonic_check(100.0, 2e-6, &grid, &EngineOptions::default()).unwrap() {
        Monotonicity::NonMonotone { from, to } => assert!(from < to && to <= 600.0),
        Monotonicity::Monotone => panic!("expected a decreasing interval"),
    }
}

#[test]
fn aniso_entropy_integrates_to_zero_temperature_free_energy() {
    let cfg = AnisoPairConfig::static_alpha(1e-6, 1e-27).unwrap();
    let tol = 1e-13;
    let opts = DerivativeOptions {
        engine: EngineOptions::default().with_tol(tol),
        ..Default::default()
    };
    let t_lo = 0.1;
    let t_hi = 12_000.0;
    let f0 = pair_free_energy(&cfg, t_lo, tol).unwrap().value;
    let quad = QuadOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-9 * f0.abs(),
        ..Default::default()
    };
    let mut total = 0.0;
    for w in [t_lo, 100.0, 1000.0, t_hi].windows(2) {
        let (v, _) = integrate(
            |t| pair_entropy(&cfg, t, &opts).unwrap().value,
            w[0],
            w[1],
            &quad,
        )
        .unwrap();
        total += v;
    }
    let f_inf = pair_free_energy(&cfg, t_hi, tol).unwrap().value;
    assert!(f_inf.abs() < 1e-8 * f0.abs());
    assert!(((total - f0) / f0).abs() < 1e-5, "{total} vs {f0}");
}
