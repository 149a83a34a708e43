//! Physical constants and unit conversions.
//!
//! All formulas in the engine are written in dimensionless Lifshitz
//! variables; this module is the single place where SI constants are
//! restored. Every other module imports its values from here.

use crate::error::{CasimirError, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Riemann ζ(3) (Apéry's constant).
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

/// Rounded eV → rad/s factor used for reproducing published tables.
pub const EV_TO_RADPS_ROUNDED: f64 = 1.519e15;
/// Exact eV → rad/s factor, e/ħ.
pub const EV_TO_RADPS_EXACT: f64 = ELEMENTARY_CHARGE / HBAR;

/// Which eV → angular-frequency factor to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvConversion {
    /// 1 eV = 1.519×10¹⁵ rad/s.
    #[default]
    Rounded,
    /// 1 eV = e/ħ rad/s.
    Exact,
}

impl EvConversion {
    pub fn factor(self) -> f64 {
        match self {
            EvConversion::Rounded => EV_TO_RADPS_ROUNDED,
            EvConversion::Exact => EV_TO_RADPS_EXACT,
        }
    }
}

/// Immutable bundle of the constants, for callers that want them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
    pub ev_to_radps: f64,
}

impl PhysicalConstants {
    pub const fn si(conversion: EvConversion) -> Self {
        let ev_to_radps = match conversion {
            EvConversion::Rounded => EV_TO_RADPS_ROUNDED,
            EvConversion::Exact => EV_TO_RADPS_EXACT,
        };
        PhysicalConstants {
            hbar: HBAR,
            c: C,
            k_b: K_B,
            ev_to_radps,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::si(EvConversion::Rounded)
    }
}

/// Converts an energy in eV to an angular frequency in rad/s.
pub fn ev_to_angular_frequency(e: f64) -> Result<f64> {
    ev_to_angular_frequency_with(e, EvConversion::Rounded)
}

pub fn ev_to_angular_frequency_with(e: f64, conversion: EvConversion) -> Result<f64> {
    if !(e >= 0.0) || !e.is_finite() {
        return Err(CasimirError::invalid(
            "energy (eV)",
            e,
            "must be finite and >= 0",
        ));
    }
    Ok(e * conversion.factor())
}

/// ħc/(2π k_B), the length·temperature scale of the first Matsubara frequency (m·K).
#[inline]
pub fn thermal_length_kelvin() -> f64 {
    HBAR * C / (2.0 * std::f64::consts::PI * K_B)
}

/// Dimensionless temperature γ = 2π a k_B T / (ħ c).
pub fn dimensionless_gamma(a: f64, t: f64) -> Result<f64> {
    check_positive("gap a (m)", a)?;
    check_positive("temperature T (K)", t)?;
    Ok(gamma_unchecked(a, t))
}

#[inline]
pub(crate) fn gamma_unchecked(a: f64, t: f64) -> f64 {
    2.0 * std::f64::consts::PI * a * K_B * t / (HBAR * C)
}

/// Matsubara frequency ζ_m = 2π m k_B T / ħ in rad/s.
pub fn matsubara_frequency(m: i64, t: f64) -> Result<f64> {
    if m < 0 {
        return Err(CasimirError::invalid(
            "Matsubara index m",
            m as f64,
            "must be >= 0",
        ));
    }
    check_positive("temperature T (K)", t)?;
    Ok(m as f64 * first_matsubara(t))
}

#[inline]
pub(crate) fn first_matsubara(t: f64) -> f64 {
    2.0 * std::f64::consts::PI * K_B * t / HBAR
}

pub(crate) fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CasimirError::invalid(what, v, "must be finite and > 0"))
    }
}
