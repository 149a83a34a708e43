//! Casimir free energy of two particles polarizable only along ẑ, held at
//! the orientation where ẑ·r̂ = 1/√3 so that only the Δ-channel survives.

use crate::constants::{check_positive, C, HBAR, K_B};
use crate::error::{CasimirError, Result};
use crate::summation::CompensatedSum;
use crate::thermo::{refined_negative_derivative, DerivativeEstimate, DerivativeOptions};

/// z-component of the unit separation vector.
pub const ORIENTATION_COSINE: f64 = 0.577_350_269_189_625_8;

const MAX_TERMS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisoPairConfig {
    /// Separation, m.
    pub r: f64,
    /// Static polarizability volume, m³.
    pub alpha0: f64,
    /// Oscillator frequency, rad/s; `None` keeps α static.
    pub omega0: Option<f64>,
}

impl AnisoPairConfig {
    pub fn new(r: f64, alpha0: f64, omega0: Option<f64>) -> Result<Self> {
        let cfg = AnisoPairConfig { r, alpha0, omega0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn static_alpha(r: f64, alpha0: f64) -> Result<Self> {
        Self::new(r, alpha0, None)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("separation r (m)", self.r)?;
        check_positive("polarizability alpha0 (m^3)", self.alpha0)?;
        if let Some(w) = self.omega0 {
            check_positive("oscillator frequency omega0 (rad/s)", w)?;
        }
        Ok(())
    }

    /// α_z(iζ), m³.
    pub fn alpha(&self, zeta: f64) -> f64 {
        match self.omega0 {
            Some(w) => self.alpha0 / (1.0 + (zeta / w).powi(2)),
            None => self.alpha0,
        }
    }

    /// Zero-temperature free energy for a static polarizability, J.
    pub fn static_zero_t_free_energy(&self) -> f64 {
        -HBAR * C * self.alpha0 * self.alpha0 / (3.0 * std::f64::consts::PI * self.r.powi(7))
    }
}

/// τ = 2π r k_B T |n| / (ħc).
pub fn tau(n: i64, r: f64, t: f64) -> f64 {
    2.0 * std::f64::consts::PI * r * K_B * t * n.unsigned_abs() as f64 / (HBAR * C)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFreeEnergy {
    pub value: f64,
    pub terms_used: u64,
    pub tail_estimate: f64,
}

/// Free energy of the pair, J, summed over n ≥ 1 with weight 2.
pub fn pair_free_energy(cfg: &AnisoPairConfig, t: f64, tol: f64) -> Result<PairFreeEnergy> {
    cfg.validate()?;
    check_positive("temperature T (K)", t)?;
    check_positive("tolerance", tol)?;
    let h = tau(1, cfg.r, t);
    let zeta1 = h * C / cfg.r;
    let decay = (-2.0 * h).exp();
    let mut sum = CompensatedSum::new();
    let mut n = 1u64;
    let (terms_used, tail) = loop {
        let tau_n = h * n as f64;
        let z = tau_n * tau_n * (2.0 / 3.0);
        let alpha = cfg.alpha(zeta1 * n as f64);
        let term = z * z * (-2.0 * tau_n).exp() * alpha * alpha;
        sum.add(term);
        // Beyond the maximum of τ⁴e^{−2τ} the terms shrink at least geometrically.
        if tau_n > 2.0 {
            let ratio = (1.0 + 1.0 / n as f64).powi(4) * decay;
            if ratio < 1.0 {
                let tail = term * ratio / (1.0 - ratio);
                if tail <= tol * sum.value().abs() || term == 0.0 {
                    break (n, tail);
                }
            }
        }
        if n >= MAX_TERMS {
            return Err(CasimirError::Truncation {
                terms: n as usize,
                cap: MAX_TERMS as usize,
                tail: term,
            });
        }
        n += 1;
    };
    let prefactor = -2.0 * K_B * t / cfg.r.powi(6);
    Ok(PairFreeEnergy {
        value: prefactor * sum.value(),
        terms_used,
        tail_estimate: (prefactor * tail).abs(),
    })
}

/// S = −∂F/∂T, J/K.
pub fn pair_entropy(
    cfg: &AnisoPairConfig,
    t: f64,
    opts: &DerivativeOptions,
) -> Result<DerivativeEstimate> {
    let tol = opts.engine.tol;
    let f = |temp: f64| Ok(pair_free_energy(cfg, temp, tol)?.value);
    let noise = 4.0 * tol * f(t)?.abs();
    refined_negative_derivative(f, t, noise, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::dimensionless_gamma;
    use proptest::prelude::*;

    fn cfg() -> AnisoPairConfig {
        AnisoPairConfig::static_alpha(1e-6, 1e-27).unwrap()
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(0, 1e-6, 300.0), 0.0);
        let g = dimensionless_gamma(1e-6, 300.0).unwrap();
        assert!((tau(1, 1e-6, 300.0) - g).abs() < 1e-14 * g);
        assert_eq!(tau(-5, 1e-6, 300.0), tau(5, 1e-6, 300.0));
    }

    #[test]
    fn orientation_constant() {
        assert!((ORIENTATION_COSINE - 1.0 / 3f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn config_validated() {
        assert!(AnisoPairConfig::new(0.0, 1.0, None).is_err());
        assert!(AnisoPairConfig::new(1.0, -1.0, None).is_err());
        assert!(AnisoPairConfig::new(1.0, 1.0, Some(0.0)).is_err());
        assert!(pair_free_energy(&cfg(), 0.0, 1e-10).is_err());
    }

    #[test]
    fn low_temperature_matches_closed_form() {
        let c = cfg();
        let f = pair_free_energy(&c, 0.1, 1e-12).unwrap();
        let f0 = c.static_zero_t_free_energy();
        assert!(((f.value - f0) / f0).abs() < 1e-6, "{} {}", f.value, f0);
    }

    #[test]
    fn dispersive_alpha_is_weaker() {
        let s = cfg();
        let d = AnisoPairConfig::new(1e-6, 1e-27, Some(1e15)).unwrap();
        let fs = pair_free_energy(&s, 1.0, 1e-12).unwrap().value;
        let fd = pair_free_energy(&d, 1.0, 1e-12).unwrap().value;
        assert!(fd > fs && fd < 0.0);
    }

    #[test]
    fn vanishes_at_high_temperature() {
        let c = cfg();
        let t = 25.0 * crate::constants::thermal_length_kelvin() / c.r;
        let f = pair_free_energy(&c, t, 1e-12).unwrap().value;
        let f0 = pair_free_energy(&c, 0.1, 1e-12).unwrap().value;
        assert!(f <= 0.0 && (f / f0).abs() < 1e-6);
    }

    #[test]
    fn cutoff_doubling_is_within_tail_bound() {
        let c = cfg();
        let coarse = pair_free_energy(&c, 50.0, 1e-6).unwrap();
        let fine = pair_free_energy(&c, 50.0, 1e-14).unwrap();
        assert!(fine.terms_used > coarse.terms_used);
        assert!((fine.value - coarse.value).abs() <= 10.0 * coarse.tail_estimate);
    }

    proptest! {
        #[test]
        fn never_positive(r in 1e-8f64..1e-5, t in 0.5f64..2000.0) {
            let c = AnisoPairConfig::static_alpha(r, 1e-28).unwrap();
            prop_assert!(pair_free_energy(&c, t, 1e-10).unwrap().value <= 0.0);
        }

        #[test]
        fn static_scaling_in_r_and_t(r in 1e-7f64..1e-5, t in 1.0f64..500.0, lambda in 0.5f64..4.0) {
            let a = AnisoPairConfig::static_alpha(r, 1e-28).unwrap();
            let b = AnisoPairConfig::static_alpha(lambda * r, 1e-28).unwrap();
            let fa = pair_free_energy(&a, t, 1e-13).unwrap().value;
            let fb = pair_free_energy(&b, t / lambda, 1e-13).unwrap().value;
            let expected = fa / lambda.powi(7);
            prop_assert!(((fb - expected) / expected).abs() < 1e-9);
        }
    }
}
