//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use casimir::aniso_pair::{pair_entropy, pair_free_energy, tau, AnisoPairConfig};
use casimir::dispersion::{DispersionModel, DrudeParams, MaterialTable};
use casimir::lifshitz::{
    free_energy_area, matsubara_term, mim_m0_force, sphere_plate_force, zero_t_free_energy_area,
    EngineOptions, ForceResult, ThermalGeometry,
};
use casimir::reflection::{delta_te_via_impedance, deltas_at, LifshitzPoint};
use casimir::thermo::{classical_limit_ratio, nernst_check, DerivativeOptions};
use casimir::Result;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const HBAR: f64 = 1.054_571_817e-34;
const C: f64 = 299_792_458.0;
const K_B: f64 = 1.380_649e-23;
const R_SPHERE: f64 = 296e-6;

type Outcome = Result<(bool, String)>;

fn pn(r: &ForceResult) -> f64 {
    r.magnitude() * 1e12
}

fn force(a: f64, t: f64, m1: &DispersionModel, m2: &DispersionModel) -> Result<ForceResult> {
    let g = ThermalGeometry::sphere_plate(a, R_SPHERE, t)?;
    sphere_plate_force(&g, m1, m2, &EngineOptions::default())
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn zeta3_series() -> f64 {
    // Σ 1/n³ with the integral remainder 1/(2N²) − 1/(2N³)… folded in.
    let n = 100_000u64;
    let s: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64).powi(3)).sum();
    let nf = n as f64;
    s + 1.0 / (2.0 * nf * nf) - 1.0 / (2.0 * nf.powi(3)) + 1.0 / (4.0 * nf.powi(4))
}

fn c1() -> Outcome {
    let au = DispersionModel::gold();
    let f = pn(&force(200e-9, 300.0, &au, &au)?);
    Ok((
        within(f, 67.22, 0.05),
        format!("Au-Au a=200 nm T=300 K: |F| = {f:.3} pN (67.22 ± 5%)"),
    ))
}

fn c2() -> Outcome {
    let au = DispersionModel::gold();
    let mut ok = true;
    let mut msg = Vec::new();
    for (a, hot, cold, red) in [(400e-9, 9.38, 10.19, 7.9), (1e-6, 0.59, 0.73, 19.0)] {
        let f300 = pn(&force(a, 300.0, &au, &au)?);
        let f1 = pn(&force(a, 1.0, &au, &au)?);
        let reduction = 100.0 * (f1 - f300) / f1;
        ok &= within(f300, hot, 0.05) && within(f1, cold, 0.05) && (reduction - red).abs() <= 1.5;
        msg.push(format!(
            "a={:.0} nm: {f300:.4}/{f1:.4} pN (targets {hot}/{cold}), reduction {reduction:.2}% (target {red}% ± 1.5)",
            a * 1e9
        ));
    }
    Ok((ok, msg.join("; ")))
}

fn c3() -> Outcome {
    let au = DispersionModel::gold();
    let diff = |a: f64| -> Result<f64> {
        Ok(pn(&force(a, 1.0, &au, &au)?) - pn(&force(a, 300.0, &au, &au)?))
    };
    let d200 = diff(200e-9)?;
    let d1000 = diff(1e-6)?;
    let mut positive = true;
    for i in 0..10 {
        let a = 150e-9 + i as f64 * (850e-9 / 9.0);
        positive &= diff(a)? > 0.0;
    }
    let ok = (d200 - 2.54).abs() <= 0.3 && (d1000 - 0.14).abs() <= 0.05 && positive;
    Ok((
        ok,
        format!("ΔF(200 nm) = {d200:.3} pN (2.54 ± 0.3), ΔF(1 μm) = {d1000:.4} pN (0.14 ± 0.05), ΔF > 0 on [150 nm, 1 μm]: {positive}"),
    ))
}

fn c4() -> Outcome {
    let au = DispersionModel::gold();
    let cu = DispersionModel::copper();
    let hot = pn(&force(200e-9, 300.0, &au, &cu)?);
    let cold = pn(&force(200e-9, 1.0, &au, &cu)?);
    let mut ok = within(hot, 67.19, 0.05) && within(cold, 69.75, 0.05);
    let mut msg = format!("Au-Cu a=200 nm: {hot:.3}/{cold:.3} pN (67.19/69.75 ± 5%)");
    for t in [300.0, 1.0] {
        let aucu = pn(&force(1e-6, t, &au, &cu)?);
        let auau = pn(&force(1e-6, t, &au, &au)?);
        let same = (aucu * 100.0).round() == (auau * 100.0).round();
        ok &= same;
        msg.push_str(&format!(
            "; a=1 μm T={t} K: Au-Cu {aucu:.4} vs Au-Au {auau:.4} pN"
        ));
    }
    Ok((ok, msg))
}

fn c5() -> Outcome {
    let au = DispersionModel::gold();
    let mut ok = true;
    let mut msg = Vec::new();
    for (a, expected) in [(50e-9, 34_000.0), (200e-9, 11_000.0), (1e-6, 2_700.0)] {
        let n = force(a, 1.0, &au, &au)?.terms_used as f64;
        let ratio = n / expected;
        ok &= (0.5..=2.0).contains(&ratio);
        msg.push(format!(
            "a={:.0} nm: {n} terms (≈{expected}, ratio {ratio:.2})",
            a * 1e9
        ));
    }
    Ok((ok, msg.join("; ")))
}

fn c6() -> Outcome {
    let mim = DispersionModel::ModifiedIdealMetal;
    let g = ThermalGeometry::sphere_plate(200e-9, R_SPHERE, 300.0)?;
    let term = matsubara_term(0, &g, &mim, &mim, 1e-14)?;
    let quad = 0.5 * K_B * g.t / (2.0 * PI * g.a * g.a) * term.total();
    let closed = -zeta3_series() * K_B * g.t / (16.0 * PI * g.a * g.a);
    let rel = ((quad - closed) / closed).abs();
    let f = mim_m0_force(&g)? * 1e12;
    let oracle = -zeta3_series() / 8.0 * R_SPHERE * K_B * g.t / (g.a * g.a) * 1e12;
    let ok = rel <= 1e-10 && format!("{f:.2}") == "-4.61" && ((f - oracle) / oracle).abs() < 1e-12;
    Ok((
        ok,
        format!("m=0 quadrature vs −ζ(3)k_BT/16πa²: rel. diff {rel:.2e} (≤ 1e-10); mim_m0_force = {f:.4} pN (−4.61)"),
    ))
}

fn sample_models() -> Result<Vec<DispersionModel>> {
    let table = MaterialTable::from_fn("drude-gold", 1e9, 1e20, 300, |z| {
        DispersionModel::gold().eps_at(z, 300.0)
    })?;
    Ok(vec![
        DispersionModel::gold(),
        DispersionModel::copper(),
        DispersionModel::drude(
            DrudeParams::gold().with_bloch_gruneisen(casimir::dispersion::BlochGruneisen::GOLD)?,
        )?,
        DispersionModel::plasma(9.0)?,
        DispersionModel::constant(100.0)?,
        DispersionModel::constant(1.5)?,
        DispersionModel::tabulated(
            table.with_extrapolation(casimir::dispersion::Extrapolation::BOTH),
        ),
        DispersionModel::IdealMetal,
        DispersionModel::ModifiedIdealMetal,
        DispersionModel::Vacuum,
    ])
}

fn point_strategy(models: usize) -> impl Strategy<Value = (usize, u64, f64, f64, f64)> {
    (
        0..models,
        1u64..2000,
        1.0f64..20.0,
        -7.5f64..-5.0,
        0.0f64..2.8,
    )
}

fn c7() -> Outcome {
    let models = sample_models()?;
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = std::cell::Cell::new(0.0f64);
    let res = runner.run(&point_strategy(models.len()), |(i, m, yf, la, lt)| {
        let a = 10f64.powf(la);
        let t = 10f64.powf(lt);
        let x = m as f64 * casimir::constants::dimensionless_gamma(a, t).unwrap();
        let pt = LifshitzPoint::new(m, x * yf, a, t).unwrap();
        let direct = deltas_at(&pt, &models[i]).unwrap().delta_te;
        let via = delta_te_via_impedance(&pt, &models[i]).unwrap();
        let err = if direct == via {
            0.0
        } else {
            (direct - via).abs() / direct.abs().max(via.abs())
        };
        worst.set(worst.get().max(err));
        prop_assert!(
            err <= 1e-12,
            "model {} m={m} y={}: {direct} vs {via}",
            models[i],
            x * yf
        );
        Ok(())
    });
    let ok = res.is_ok();
    let detail = match res {
        Ok(()) => String::new(),
        Err(e) => format!(" ({e})"),
    };
    Ok((
        ok,
        format!(
            "10^4 samples over {} models: worst relative difference {:.2e} (≤ 1e-12){detail}",
            models.len(),
            worst.get()
        ),
    ))
}

fn c8() -> Outcome {
    let au = DispersionModel::gold();
    let temps = [
        0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0, 300.0,
    ];
    let report = nernst_check(1e-6, &au, &au, &temps, &DerivativeOptions::default())?;
    let ok = report.satisfied(0.1);
    let max = report.curve.max_abs();
    Ok((
        ok,
        format!(
            "Drude Au a=1 μm: |S(0.2 K)|/max|S| = {:.3} (< 0.1), S(0.2 K) = {:.3e}, max|S| = {max:.3e} J/(K m²), negative interval {:?}",
            report.low_t_ratio, report.curve.entropy[0], report.negative_interval
        ),
    ))
}

fn c9() -> Outcome {
    let p = DrudeParams::gold();
    let a = 1e3 * C / p.omega_p_radps();
    let t = 50.0 * HBAR * C / (2.0 * PI * K_B * a);
    let r = classical_limit_ratio(a, t, &p, &EngineOptions::default())?;
    Ok((
        within(r, 2.0, 0.05),
        format!(
            "γ=50, ω_p a/c=10³ (a={:.3} μm, T={t:.1} K): ratio {r:.4} (2 ± 5%)",
            a * 1e6
        ),
    ))
}

fn c10() -> Outcome {
    let au = DispersionModel::gold();
    let mut ok = true;
    let mut msg = Vec::new();
    for a in [200e-9, 1e-6] {
        let g = ThermalGeometry::plates(a, 1.0)?;
        let f1 = free_energy_area(&g, &au, &au, &EngineOptions::default())?.value;
        let f0 = zero_t_free_energy_area(a, &au, &au, 1e-8)?;
        let rel = ((f1 - f0) / f0).abs();
        ok &= rel < 2e-3;
        msg.push(format!(
            "a={:.0} nm: T=1 K vs T=0 differ by {:.3}%",
            a * 1e9,
            rel * 100.0
        ));
    }
    let im = DispersionModel::IdealMetal;
    let a = 1e-6;
    let f = zero_t_free_energy_area(a, &im, &im, 1e-10)?;
    let exact = -PI.powi(2) * HBAR * C / (720.0 * a.powi(3));
    let rel = ((f - exact) / exact).abs();
    ok &= rel < 1e-6;
    msg.push(format!("ideal metal vs −π²ħc/720a³: rel. diff {rel:.2e}"));
    Ok((ok, msg.join("; ")))
}

fn c11() -> Outcome {
    let cfg = AnisoPairConfig::static_alpha(1e-6, 1e-27)?;
    let tol = 1e-13;
    let f_ref = pair_free_energy(&cfg, 0.1, tol)?.value;
    let closed = -HBAR * C * cfg.alpha0.powi(2) / (3.0 * PI * cfg.r.powi(7));
    let closed_ok = within(f_ref, closed, 5e-3);

    let t_hot = 20.5 * HBAR * C / (2.0 * PI * K_B * cfg.r);
    let hot_ratio = pair_free_energy(&cfg, t_hot, tol)?.value.abs() / f_ref.abs();
    let vanishes = tau(1, cfg.r, t_hot) > 20.0 && hot_ratio < 1e-6;

    let opts = DerivativeOptions {
        engine: EngineOptions::default().with_tol(tol),
        ..Default::default()
    };
    let temps: Vec<f64> = (0..40).map(|i| 1.0 * 1.25f64.powi(i)).collect();
    let entropy: Vec<f64> = temps
        .iter()
        .map(|&t| pair_entropy(&cfg, t, &opts).map(|s| s.value))
        .collect::<Result<_>>()?;
    let max = entropy.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let negative: Vec<f64> = temps
        .iter()
        .zip(&entropy)
        .filter(|(_, s)| **s < -1e-6 * max)
        .map(|(t, _)| *t)
        .collect();
    let has_negative = !negative.is_empty();
    let low = entropy[0].abs() / max;
    let ok = closed_ok && vanishes && has_negative && low < 1e-3;
    Ok((
        ok,
        format!(
            "F(0.1 K) = {f_ref:.6e} J vs −ħcα0²/3πr⁷ = {closed:.6e} J; |F|/|F(0.1 K)| = {hot_ratio:.1e} at τ(1) = {:.1}; S < 0 for T in [{:.0}, {:.0}] K of grid; |S(1 K)|/max|S| = {low:.1e}",
            tau(1, cfg.r, t_hot),
            negative.first().copied().unwrap_or(f64::NAN),
            negative.last().copied().unwrap_or(f64::NAN),
        ),
    ))
}

fn c12() -> Outcome {
    let models = sample_models()?;
    let mut runner = TestRunner::new(Config {
        cases: 5_000,
        failure_persistence: None,
        ..Config::default()
    });
    let bounds = runner
        .run(&point_strategy(models.len()), |(i, m, yf, la, lt)| {
            let a = 10f64.powf(la);
            let t = 10f64.powf(lt);
            let x = m as f64 * casimir::constants::dimensionless_gamma(a, t).unwrap();
            let d = deltas_at(&LifshitzPoint::new(m, x * yf, a, t).unwrap(), &models[i]).unwrap();
            prop_assert!(0.0 <= d.delta_te && d.delta_te <= d.delta_tm && d.delta_tm <= 1.0);
            Ok(())
        })
        .is_ok();

    let mut nonpositive = true;
    let mut vacuum_zero = true;
    for model in &models {
        let g = ThermalGeometry::plates(500e-9, 100.0)?;
        let r = free_energy_area(&g, model, model, &EngineOptions::default())?;
        nonpositive &= r.per_mode.iter().all(|c| c.tm <= 0.0 && c.te <= 0.0);
        let v = free_energy_area(
            &g,
            model,
            &DispersionModel::Vacuum,
            &EngineOptions::default(),
        )?;
        vacuum_zero &= v.value == 0.0;
    }

    let au = DispersionModel::gold();
    let cu = DispersionModel::copper();
    let in_pool = |n: usize| -> Result<Vec<f64>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool");
        pool.install(|| {
            let mut v = Vec::new();
            for (a, t) in [(200e-9, 1.0), (1e-6, 300.0), (50e-9, 10.0)] {
                v.push(force(a, t, &au, &cu)?.value);
            }
            Ok(v)
        })
    };
    let one = in_pool(1)?;
    let four = in_pool(4)?;
    let deterministic = one
        .iter()
        .zip(&four)
        .all(|(a, b)| a.to_bits() == b.to_bits());

    Ok((
        bounds && nonpositive && vacuum_zero && deterministic,
        format!(
            "0 ≤ Δᵀᴱ ≤ Δᵀᴹ ≤ 1: {bounds}; all terms ≤ 0: {nonpositive}; vacuum exactly 0: {vacuum_zero}; 1 vs 4 threads bitwise equal: {deterministic}"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, c1),
        (2, c2),
        (3, c3),
        (4, c4),
        (5, c5),
        (6, c6),
        (7, c7),
        (8, c8),
        (9, c9),
        (10, c10),
        (11, c11),
        (12, c12),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2}: {} {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
