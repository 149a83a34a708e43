//! Single-interface reflection coefficients on the imaginary frequency axis.
//!
//! Coefficients are evaluated in dimensionless variables: `y = q·a` and
//! `x = ζ_m·a/c = m·γ`, so that `p = y/x` and `x·s = √(x²(ε−1) + y²)`.
//! Working with `x·s` and `ε·y` instead of `s` and `ε·p` keeps m = 1 at
//! millikelvin temperatures (p ~ 10¹⁵) finite, and both numerators are
//! written in factored form so nothing cancels as ε → 1.
//!
//! The surface impedance is normalised so that `Z = −1/s`; the TE
//! coefficient is then `(1 + Zp)/(1 − Zp)`.

use crate::constants::{gamma_unchecked, C};
use crate::dispersion::{DispersionModel, ZeroModeClass};
use crate::error::{CasimirError, Result};

/// A point of the Lifshitz integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifshitzPoint {
    pub m: u64,
    /// y = q·a.
    pub y: f64,
    /// Gap, m.
    pub a: f64,
    /// Temperature, K.
    pub t: f64,
}

impl LifshitzPoint {
    /// Validates `a, T > 0` and `y ≥ mγ` (real transverse momentum).
    pub fn new(m: u64, y: f64, a: f64, t: f64) -> Result<Self> {
        crate::constants::check_positive("gap a (m)", a)?;
        crate::constants::check_positive("temperature T (K)", t)?;
        let pt = LifshitzPoint { m, y, a, t };
        if !(y >= pt.x()) || (m == 0 && !(y > 0.0)) {
            return Err(CasimirError::invalid(
                "y = q a",
                y,
                "must satisfy y >= m*gamma (y > 0 at m = 0)",
            ));
        }
        Ok(pt)
    }

    pub fn gamma(&self) -> f64 {
        gamma_unchecked(self.a, self.t)
    }

    /// Dimensionless frequency ζ_m a/c = mγ.
    pub fn x(&self) -> f64 {
        self.m as f64 * self.gamma()
    }

    /// Matsubara frequency ζ_m, rad/s.
    pub fn zeta(&self) -> f64 {
        self.x() * C / self.a
    }

    /// q = y/a, 1/m.
    pub fn q(&self) -> f64 {
        self.y / self.a
    }

    /// p = q c/ζ_m; infinite at m = 0.
    pub fn p(&self) -> f64 {
        self.y / self.x()
    }

    /// k⊥² = q² − ζ_m²/c², factored to avoid cancellation near y = mγ.
    pub fn k_perp_sq(&self) -> f64 {
        let x = self.x();
        (self.y - x) * (self.y + x) / (self.a * self.a)
    }
}

/// Δ^TM and Δ^TE of one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub delta_tm: f64,
    pub delta_te: f64,
}

impl ReflectionPair {
    pub const ZERO: ReflectionPair = ReflectionPair {
        delta_tm: 0.0,
        delta_te: 0.0,
    };
    pub const ONE: ReflectionPair = ReflectionPair {
        delta_tm: 1.0,
        delta_te: 1.0,
    };
}

/// A medium frozen at one Matsubara frequency: everything needed to
/// evaluate Δ(y) cheaply inside the y-integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrozenMedium {
    /// Perfect reflector at m ≥ 1.
    Ideal,
    /// Finite permittivity at x = mγ > 0.
    Dielectric { x: f64, chi: f64, eps: f64, w: f64 },
    /// m = 0: Δ^TM is a constant; Δ^TE is `κ²/(√(κ²+y²)+y)²` with
    /// κ² = L a²/c² (zero for no TE mode, infinite for ideal).
    Static { tm: f64, te_kappa_sq: f64 },
}

impl FrozenMedium {
    /// Freezes `model` at Matsubara index `m` for gap `a` and temperature `t`.
    pub fn new(model: &DispersionModel, m: u64, a: f64, t: f64) -> Result<Self> {
        if m == 0 {
            return Ok(Self::zero_mode(model, a));
        }
        Self::at_frequency(model, m as f64 * gamma_unchecked(a, t), a, t)
    }

    /// Freezes `model` at dimensionless frequency `x = ζa/c > 0`; `t` only
    /// enters temperature-dependent permittivities.
    pub fn at_frequency(model: &DispersionModel, x: f64, a: f64, t: f64) -> Result<Self> {
        if model.is_ideal() {
            return Ok(FrozenMedium::Ideal);
        }
        let zeta = x * C / a;
        let chi = model.chi_at(zeta, t)?;
        Ok(FrozenMedium::Dielectric {
            x,
            chi,
            eps: 1.0 + chi,
            w: x * x * chi,
        })
    }

    fn zero_mode(model: &DispersionModel, a: f64) -> Self {
        let te_kappa_sq = match model.zero_mode_class() {
            ZeroModeClass::TeVanishes => 0.0,
            ZeroModeClass::TeFinite { limit } => limit * a * a / (C * C),
            ZeroModeClass::TeIdeal => f64::INFINITY,
        };
        FrozenMedium::Static {
            tm: model.zero_mode_tm(),
            te_kappa_sq,
        }
    }

    /// Supremum of Δ^TM over y ≥ x.
    pub fn tm_sup(&self) -> f64 {
        match *self {
            FrozenMedium::Ideal => 1.0,
            FrozenMedium::Dielectric { chi, .. } => {
                if chi.is_infinite() {
                    1.0
                } else {
                    chi / (chi + 2.0)
                }
            }
            FrozenMedium::Static { tm, .. } => tm,
        }
    }

    /// Δ's at `y` (y ≥ x).
    #[inline]
    pub fn deltas(&self, y: f64) -> ReflectionPair {
        match *self {
            FrozenMedium::Ideal => ReflectionPair::ONE,
            FrozenMedium::Dielectric { x, chi, eps, w } => {
                if chi == 0.0 {
                    return ReflectionPair::ZERO;
                }
                let xs = (w + y * y).sqrt();
                let te_den = xs + y;
                let delta_te = w / (te_den * te_den);
                // εy − xs = (ε−1)((ε+1)y² − x²)/(εy + xs), scaled by 1/ε².
                let inv = 1.0 / eps;
                let tm_den = y + xs * inv;
                let delta_tm =
                    (chi * inv) * ((1.0 + inv) * y * y - x * x * inv) / (tm_den * tm_den);
                ReflectionPair { delta_tm, delta_te }
            }
            FrozenMedium::Static { tm, te_kappa_sq } => {
                let delta_te = if te_kappa_sq == 0.0 {
                    0.0
                } else if te_kappa_sq.is_infinite() {
                    1.0
                } else {
                    let r = (te_kappa_sq + y * y).sqrt() + y;
                    te_kappa_sq / (r * r)
                };
                ReflectionPair {
                    delta_tm: tm,
                    delta_te,
                }
            }
        }
    }
}

/// Reflection coefficients at a point with m ≥ 1.
pub fn deltas_at(pt: &LifshitzPoint, model: &DispersionModel) -> Result<ReflectionPair> {
    if pt.m == 0 {
        return Err(CasimirError::invalid(
            "Matsubara index m",
            0.0,
            "m = 0 is handled by zero_mode_deltas",
        ));
    }
    Ok(FrozenMedium::new(model, pt.m, pt.a, pt.t)?.deltas(pt.y))
}

/// ζ → 0 limits of the reflection coefficients at transverse momentum `q` (1/m).
pub fn zero_mode_deltas(q: f64, model: &DispersionModel) -> Result<ReflectionPair> {
    crate::constants::check_positive("wave number q (1/m)", q)?;
    let delta_te = match model.zero_mode_class() {
        ZeroModeClass::TeVanishes => 0.0,
        ZeroModeClass::TeIdeal => 1.0,
        ZeroModeClass::TeFinite { limit } => {
            let l = limit / (C * C);
            let r = (l + q * q).sqrt() + q;
            l / (r * r)
        }
    };
    Ok(ReflectionPair {
        delta_tm: model.zero_mode_tm(),
        delta_te,
    })
}

/// MIM coefficients (A_m, B_m) = ((Δ^TM)², (Δ^TE)²).
pub fn mim_coefficients(m: u64) -> (f64, f64) {
    if m == 0 {
        (1.0, 0.0)
    } else {
        (1.0, 1.0)
    }
}

/// Z^TE = −ζ/√(ζ²ε(iζ) + c²k⊥²), dimensionless.
pub fn surface_impedance_te(
    zeta: f64,
    k_perp: f64,
    model: &DispersionModel,
    t: f64,
) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(CasimirError::invalid(
            "frequency zeta (rad/s)",
            zeta,
            "must be > 0",
        ));
    }
    if !(k_perp >= 0.0) {
        return Err(CasimirError::invalid(
            "k_perp (1/m)",
            k_perp,
            "must be >= 0",
        ));
    }
    if model.is_ideal() {
        return Ok(0.0);
    }
    // ζ²ε = ζ² + ζ²(ε−1)
    let zeta_sq_eps = zeta * zeta + model.susceptibility_weight(zeta, t)?;
    let ck = C * k_perp;
    Ok(-zeta / (zeta_sq_eps + ck * ck).sqrt())
}

/// Δ^TE = (1 + Zp)/(1 − Zp).
pub fn delta_te_from_impedance(z: f64, p: f64) -> f64 {
    let zp = z * p;
    (1.0 + zp) / (1.0 - zp)
}

/// Δ^TE through the impedance route at a Lifshitz point (m ≥ 1).
///
/// With Zp = −cq/√(c²q² + ζ²(ε−1)) the numerator 1 + Zp is rationalised,
/// so weakly reflecting media keep full relative accuracy.
pub fn delta_te_via_impedance(pt: &LifshitzPoint, model: &DispersionModel) -> Result<f64> {
    let k_perp = pt.k_perp_sq().max(0.0).sqrt();
    let z = surface_impedance_te(pt.zeta(), k_perp, model, pt.t)?;
    if z == 0.0 {
        return Ok(delta_te_from_impedance(z, pt.p()));
    }
    let zeta = pt.zeta();
    let w = model.susceptibility_weight(zeta, pt.t)?;
    let cq = C * pt.q();
    let root = zeta / -z;
    let zp = -cq / root;
    let one_plus = w / (root * (root + cq));
    Ok(one_plus / (1.0 - zp))
}
