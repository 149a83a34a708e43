//! Lifshitz free energy between parallel plates and the proximity-force
//! sphere-plate force.
//!
//! ```text
//! f(a, T) = k_B T/(2π a²) Σ'_m ∫_{mγ}^∞ y dy [ln(1 − Δ₁ᵀᴹΔ₂ᵀᴹ e^{−2y}) + ln(1 − Δ₁ᵀᴱΔ₂ᵀᴱ e^{−2y})]
//! F(a, T) = 2πR f(a, T)
//! ```
//!
//! The primed sum counts m = 0 with weight ½. Terms are computed in
//! parallel chunks but accumulated strictly in ascending m with
//! compensated summation, so the result does not depend on the number of
//! worker threads.

use rayon::prelude::*;

use crate::constants::{check_positive, gamma_unchecked, C, HBAR, K_B, ZETA3};
use crate::dispersion::DispersionModel;
use crate::error::{CasimirError, Result};
use crate::quadrature::{integrate_vec, QuadOptions};
use crate::reflection::FrozenMedium;
use crate::summation::CompensatedSum;

/// Proximity approximation is flagged beyond this a/R.
pub const PROXIMITY_LIMIT: f64 = 0.05;

/// Temperature handed to permittivity models in the T → 0 continuum.
const ZERO_T_MODEL_TEMPERATURE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalGeometry {
    /// Gap, m.
    pub a: f64,
    /// Sphere radius, m; `None` for two plates.
    pub radius: Option<f64>,
    /// Temperature, K.
    pub t: f64,
}

impl ThermalGeometry {
    pub fn sphere_plate(a: f64, radius: f64, t: f64) -> Result<Self> {
        check_positive("sphere radius R (m)", radius)?;
        Self::validate(a, t)?;
        Ok(ThermalGeometry {
            a,
            radius: Some(radius),
            t,
        })
    }

    pub fn plates(a: f64, t: f64) -> Result<Self> {
        Self::validate(a, t)?;
        Ok(ThermalGeometry { a, radius: None, t })
    }

    fn validate(a: f64, t: f64) -> Result<()> {
        check_positive("gap a (m)", a)?;
        check_positive("temperature T (K)", t)
    }

    pub fn with_temperature(self, t: f64) -> Result<Self> {
        Self::validate(self.a, t)?;
        Ok(ThermalGeometry { t, ..self })
    }

    pub fn with_gap(self, a: f64) -> Result<Self> {
        Self::validate(a, self.t)?;
        Ok(ThermalGeometry { a, ..self })
    }

    /// γ = 2π a k_B T/(ħc).
    pub fn gamma(&self) -> f64 {
        gamma_unchecked(self.a, self.t)
    }

    /// True when a/R is large enough that the proximity approximation is suspect.
    pub fn proximity_warning(&self) -> bool {
        self.radius.is_some_and(|r| self.a / r >= PROXIMITY_LIMIT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// Relative truncation tolerance of the Matsubara sum.
    pub tol: f64,
    /// Relative accuracy of each y-integral.
    pub quad_tol: f64,
    /// Hard cap on the number of Matsubara terms.
    pub max_terms: usize,
    /// Sum at least this many terms regardless of the tail estimate.
    pub min_terms: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            tol: 1e-8,
            quad_tol: 1e-10,
            max_terms: 1_000_000,
            min_terms: 0,
        }
    }
}

impl EngineOptions {
    /// Tighter settings used when results are differentiated numerically.
    pub fn for_entropy() -> Self {
        EngineOptions {
            tol: 1e-10,
            quad_tol: 1e-12,
            ..Default::default()
        }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        EngineOptions { tol, ..self }
    }
}

/// Weighted contribution of one Matsubara index, in the units of the result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeContribution {
    pub m: u64,
    pub tm: f64,
    pub te: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceResult {
    /// J/m² for the plate free energy, N for the sphere-plate force. Negative = attractive.
    pub value: f64,
    pub terms_used: usize,
    /// Magnitude of the estimated truncation remainder, same units as `value`.
    pub tail_estimate: f64,
    pub per_mode: Vec<ModeContribution>,
}

impl ForceResult {
    pub fn magnitude(&self) -> f64 {
        self.value.abs()
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.tail_estimate *= factor.abs();
        for c in &mut self.per_mode {
            c.tm *= factor;
            c.te *= factor;
        }
        self
    }

    /// Sum of the per-mode breakdown in ascending m.
    pub fn breakdown_total(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for c in &self.per_mode {
            s.add(c.tm);
            s.add(c.te);
        }
        s.value()
    }
}

/// ln(1 − P e^{−2y}) for 0 ≤ P ≤ 1, accurate at both ends.
#[inline]
fn log_one_minus(p: f64, y: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let u = p * (-2.0 * y).exp();
    if u < 0.5 {
        (-u).ln_1p()
    } else {
        // 1 − P e^{−2y} = (1 − P) + P(1 − e^{−2y}), both terms ≥ 0
        ((1.0 - p) - p * (-2.0 * y).exp_m1()).ln()
    }
}

#[inline]
fn integrand_channels(y: f64, m1: &FrozenMedium, m2: &FrozenMedium) -> [f64; 2] {
    let d1 = m1.deltas(y);
    let d2 = m2.deltas(y);
    [
        y * log_one_minus(d1.delta_tm * d2.delta_tm, y),
        y * log_one_minus(d1.delta_te * d2.delta_te, y),
    ]
}

/// y·[ln(1 − Δ₁ᵀᴹΔ₂ᵀᴹe^{−2y}) + ln(1 − Δ₁ᵀᴱΔ₂ᵀᴱe^{−2y})] at Matsubara index m.
pub fn matsubara_integrand(
    y: f64,
    m: u64,
    geom: &ThermalGeometry,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
) -> Result<f64> {
    let x = m as f64 * geom.gamma();
    if !(y >= x) || (m == 0 && !(y > 0.0)) {
        return Err(CasimirError::invalid(
            "y",
            y,
            "must satisfy y >= m*gamma (y > 0 at m = 0)",
        ));
    }
    let f1 = FrozenMedium::new(mat1, m, geom.a, geom.t)?;
    let f2 = FrozenMedium::new(mat2, m, geom.a, geom.t)?;
    let [tm, te] = integrand_channels(y, &f1, &f2);
    Ok(tm + te)
}

/// Value of one inner y-integral, split by polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermValue {
    pub tm: f64,
    pub te: f64,
    /// Quadrature error estimate plus the analytic bound on the cut tail.
    pub error: f64,
}

impl TermValue {
    pub fn total(&self) -> f64 {
        self.tm + self.te
    }
}

/// ∫_x^∞ of the integrand for two frozen media.
///
/// The range is cut at Y where the bound
/// `(P_TM + P_TE)(Y/2 + 1/4)e^{−2Y}/(1 − P_max e^{−2Y})` on the remainder
/// falls below `quad_tol·|I|`; P are upper bounds on the Δ products for
/// y ≥ x. Segments are added with doubling length until that holds.
fn inner_integral(
    x: f64,
    f1: &FrozenMedium,
    f2: &FrozenMedium,
    quad_tol: f64,
) -> Result<TermValue> {
    let d1 = f1.deltas(x);
    let d2 = f2.deltas(x);
    let p_tm = f1.tm_sup() * f2.tm_sup();
    let p_te = d1.delta_te * d2.delta_te;
    if p_tm == 0.0 && p_te == 0.0 {
        return Ok(TermValue {
            tm: 0.0,
            te: 0.0,
            error: 0.0,
        });
    }
    let p_max = p_tm.max(p_te);
    let tail_bound = |big_y: f64| -> f64 {
        let e = (-2.0 * big_y).exp();
        (p_tm + p_te) * (0.5 * big_y + 0.25) * e / (1.0 - p_max * e)
    };

    let opts = QuadOptions {
        rel_tol: quad_tol,
        abs_tol: 0.0,
        max_intervals: 400,
    };
    let f = |y: f64| integrand_channels(y, f1, f2);
    let mut lo = x;
    let mut len = 6.0;
    let mut tm = 0.0;
    let mut te = 0.0;
    let mut err = 0.0;
    for _ in 0..12 {
        let hi = lo + len;
        let r = integrate_vec(f, lo, hi, &opts)?;
        tm += r.value[0];
        te += r.value[1];
        err += r.error;
        let bound = tail_bound(hi);
        if bound <= quad_tol * (tm + te).abs() || bound < f64::MIN_POSITIVE {
            return Ok(TermValue {
                tm,
                te,
                error: err + bound,
            });
        }
        lo = hi;
        len *= 2.0;
    }
    Err(CasimirError::QuadratureNonConvergence {
        lo: x,
        hi: lo,
        estimate: tm + te,
        error: err + tail_bound(lo),
    })
}

/// ∫_{mγ}^∞ of the Matsubara integrand, unweighted (no ½ at m = 0).
pub fn matsubara_term(
    m: u64,
    geom: &ThermalGeometry,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    quad_tol: f64,
) -> Result<TermValue> {
    let f1 = FrozenMedium::new(mat1, m, geom.a, geom.t)?;
    let f2 = FrozenMedium::new(mat2, m, geom.a, geom.t)?;
    inner_integral(m as f64 * geom.gamma(), &f1, &f2, quad_tol)
}

/// Geometric extrapolation of the remainder from the last (up to) ten
/// terms. `history` holds |t_1| … |t_m| (m ≥ 1 only).
fn tail_from_history(history: &[f64]) -> f64 {
    let n = history.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let last = history[n - 1];
    if last == 0.0 {
        return 0.0;
    }
    let k = (n - 1).min(10);
    let first = history[n - 1 - k];
    if first == 0.0 {
        return f64::INFINITY;
    }
    let ratio = (last / first).powf(1.0 / k as f64);
    if ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

/// Plate-plate free energy per unit area, J/m².
pub fn free_energy_area(
    geom: &ThermalGeometry,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    opts: &EngineOptions,
) -> Result<ForceResult> {
    ThermalGeometry::validate(geom.a, geom.t)?;
    let prefactor = K_B * geom.t / (2.0 * std::f64::consts::PI * geom.a * geom.a);

    let mut sum = CompensatedSum::new();
    let mut per_mode = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut next_m: u64 = 0;
    let mut chunk: u64 = 32;

    loop {
        let end = (next_m + chunk).min(opts.max_terms as u64);
        if next_m >= end {
            return Err(CasimirError::Truncation {
                terms: next_m as usize,
                cap: opts.max_terms,
                tail: tail_from_history(&history) * prefactor,
            });
        }
        let terms: Vec<Result<TermValue>> = (next_m..end)
            .into_par_iter()
            .map(|m| matsubara_term(m, geom, mat1, mat2, opts.quad_tol))
            .collect();
        for (m, term) in (next_m..end).zip(terms) {
            let term = term?;
            let weight = if m == 0 { 0.5 } else { 1.0 };
            sum.add(weight * term.tm);
            sum.add(weight * term.te);
            per_mode.push(ModeContribution {
                m,
                tm: weight * term.tm,
                te: weight * term.te,
            });
            if m == 0 {
                continue;
            }
            history.push(term.total().abs());
            if (m as usize) + 1 < opts.min_terms.max(3) {
                continue;
            }
            let tail = tail_from_history(&history);
            let partial = sum.value();
            if tail <= opts.tol * partial.abs() {
                let terms_used = m as usize + 1;
                let result = ForceResult {
                    value: partial,
                    terms_used,
                    tail_estimate: tail,
                    per_mode,
                };
                return Ok(result.scaled(prefactor));
            }
        }
        next_m = end;
        chunk = (chunk * 2).min(4096);
    }
}

/// Sphere-plate force in the proximity approximation, N (negative = attractive).
pub fn sphere_plate_force(
    geom: &ThermalGeometry,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    opts: &EngineOptions,
) -> Result<ForceResult> {
    let radius = geom.radius.ok_or_else(|| {
        CasimirError::Config("sphere-plate force requires a sphere radius".into())
    })?;
    let f = free_energy_area(geom, mat1, mat2, opts)?;
    Ok(f.scaled(2.0 * std::f64::consts::PI * radius))
}

/// m = 0 MIM contribution to the sphere-plate force: −ζ(3)/8 · R k_B T/a².
pub fn mim_m0_force(geom: &ThermalGeometry) -> Result<f64> {
    let radius = geom
        .radius
        .ok_or_else(|| CasimirError::Config("MIM force requires a sphere radius".into()))?;
    Ok(-ZETA3 / 8.0 * radius * K_B * geom.t / (geom.a * geom.a))
}

/// m = 0 MIM free energy per area: −ζ(3) k_B T/(16π a²).
pub fn mim_m0_free_energy_area(geom: &ThermalGeometry) -> f64 {
    -ZETA3 * K_B * geom.t / (16.0 * std::f64::consts::PI * geom.a * geom.a)
}

/// −π²ħc/(720 a³), the ideal-metal free energy per area at T = 0.
pub fn ideal_zero_t_free_energy_area(a: f64) -> f64 {
    -std::f64::consts::PI.powi(2) * HBAR * C / (720.0 * a.powi(3))
}

/// T → 0 limit of the free energy per area:
/// `ħc/(4π²a³) ∫₀^∞ dx ∫_x^∞ y dy [...]` with x = ζa/c.
///
/// The frequency integral runs over logarithmically spaced panels from
/// 10⁻¹⁰ to 64, each refined adaptively.
pub fn zero_t_free_energy_area(
    a: f64,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    tol: f64,
) -> Result<f64> {
    check_positive("gap a (m)", a)?;
    let t = ZERO_T_MODEL_TEMPERATURE;
    let inner_tol = (tol * 1e-2).max(1e-14);
    let g = |x: f64| -> Result<f64> {
        let f1 = FrozenMedium::at_frequency(mat1, x, a, t)?;
        let f2 = FrozenMedium::at_frequency(mat2, x, a, t)?;
        Ok(inner_integral(x, &f1, &f2, inner_tol)?.total())
    };

    let mut breaks = vec![0.0];
    breaks.extend((-10..=0).map(|k| 10f64.powi(k)));
    breaks.extend([2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);

    // Scale for the absolute tolerance of each panel.
    let scale = g(1e-3)?.abs().max(f64::MIN_POSITIVE);
    let opts = QuadOptions {
        rel_tol: tol,
        abs_tol: tol * scale / breaks.len() as f64,
        max_intervals: 400,
    };

    let mut total = CompensatedSum::new();
    for w in breaks.windows(2) {
        // Errors inside the closure are surfaced after the panel.
        let failure = std::cell::RefCell::new(None);
        let r = integrate_vec(
            |x| match g(x) {
                Ok(v) => [v],
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    [0.0]
                }
            },
            w[0],
            w[1],
            &opts,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        total.add(r.value[0]);
    }
    Ok(HBAR * C / (4.0 * std::f64::consts::PI.powi(2) * a.powi(3)) * total.value())
}
