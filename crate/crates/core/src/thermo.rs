//! Thermodynamic post-processing of the Lifshitz engine: force differences
//! between temperatures, entropy by Richardson-refined central differences,
//! Nernst-theorem diagnostics and the temperature-monotonicity checks.

use rayon::prelude::*;

use crate::constants::check_positive;
use crate::dispersion::{DispersionModel, DrudeParams};
use crate::error::{CasimirError, Result};
use crate::lifshitz::{free_energy_area, sphere_plate_force, EngineOptions, ThermalGeometry};

/// |F(T_low)| − |F(T_high)| for the sphere-plate force, N.
pub fn force_difference(
    a: f64,
    radius: f64,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    t_low: f64,
    t_high: f64,
    opts: &EngineOptions,
) -> Result<f64> {
    check_positive("T_low (K)", t_low)?;
    if !(t_high >= t_low) {
        return Err(CasimirError::invalid(
            "T_high (K)",
            t_high,
            "must be >= T_low",
        ));
    }
    if t_low == t_high {
        return Ok(0.0);
    }
    let low = ThermalGeometry::sphere_plate(a, radius, t_low)?;
    let high = low.with_temperature(t_high)?;
    let f_low = sphere_plate_force(&low, mat1, mat2, opts)?;
    let f_high = sphere_plate_force(&high, mat1, mat2, opts)?;
    Ok(f_low.magnitude() - f_high.magnitude())
}

/// Controls for numerical differentiation in temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    /// Initial step, K. `None` selects max(0.05 T, 0.05 K), capped at T/2.
    pub step: Option<f64>,
    /// Maximum number of step halvings.
    pub max_halvings: usize,
    /// Stop once successive Richardson estimates agree to this relative level.
    pub rel_tol: f64,
    /// Error estimates above this fraction of |S| are flagged.
    pub flag_fraction: f64,
    pub engine: EngineOptions,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        DerivativeOptions {
            step: None,
            max_halvings: 4,
            rel_tol: 1e-4,
            flag_fraction: 0.05,
            engine: EngineOptions::for_entropy(),
        }
    }
}

impl DerivativeOptions {
    fn initial_step(&self, t: f64) -> f64 {
        self.step
            .unwrap_or_else(|| (0.05 * t).max(0.05))
            .min(0.5 * t)
    }
}

/// One refined derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    /// |difference| between the last two Richardson estimates.
    pub error: f64,
    /// Smallest step used, K.
    pub step: f64,
    /// Error estimate exceeds the flag fraction of |value|.
    pub flagged: bool,
}

/// −dF/dT by central differences with Richardson step-halving.
///
/// `noise` is the absolute uncertainty of a single F evaluation; once the
/// Richardson correction drops below the corresponding derivative noise
/// (`noise/h`) further halving cannot help and the estimate is accepted.
/// Corrections that keep growing above that floor are reported as
/// [`CasimirError::NoisyDerivative`].
pub fn refined_negative_derivative<F>(
    f: F,
    t: f64,
    noise: f64,
    opts: &DerivativeOptions,
) -> Result<DerivativeEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    check_positive("temperature T (K)", t)?;
    let mut h = opts.initial_step(t);
    if !(t - h > 0.0) || !(h > 0.0) {
        return Err(CasimirError::invalid(
            "differencing step (K)",
            h,
            "must satisfy 0 < step < T",
        ));
    }
    let central = |h: f64| -> Result<f64> {
        let (lo, hi) = rayon::join(|| f(t - h), || f(t + h));
        Ok(-(hi? - lo?) / (2.0 * h))
    };

    let mut prev_row = vec![central(h)?];
    let mut best = prev_row[0];
    let mut error = f64::INFINITY;
    let mut growth = 0;
    for level in 1..=opts.max_halvings {
        h *= 0.5;
        let mut row = vec![central(h)?];
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = (factor * row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        let candidate = row[level];
        let err = (candidate - prev_row[level - 1]).abs();
        let floor = 4.0 * noise / h;
        if err > error && err > floor {
            growth += 1;
            if growth >= 2 {
                if error <= opts.flag_fraction * best.abs() {
                    // Earlier estimate was already good; keep it.
                    break;
                }
                return Err(CasimirError::NoisyDerivative { temperature: t });
            }
        } else {
            growth = 0;
        }
        if err <= error {
            best = candidate;
            error = err;
        }
        if err <= opts.rel_tol * candidate.abs() || err <= floor {
            break;
        }
        prev_row = row;
    }
    Ok(DerivativeEstimate {
        value: best,
        error,
        step: h,
        flagged: error > opts.flag_fraction * best.abs() && error > 0.0,
    })
}

/// Casimir entropy per unit area, J/(K·m²), at temperature `t`.
pub fn entropy_area(
    a: f64,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    t: f64,
    opts: &DerivativeOptions,
) -> Result<DerivativeEstimate> {
    check_positive("gap a (m)", a)?;
    let engine = opts.engine;
    let f = |temp: f64| -> Result<f64> {
        let g = ThermalGeometry::plates(a, temp)?;
        Ok(free_energy_area(&g, mat1, mat2, &engine)?.value)
    };
    let f_ref = f(t)?;
    let noise = (engine.tol + 10.0 * engine.quad_tol) * f_ref.abs();
    refined_negative_derivative(f, t, noise, opts)
}

/// Entropy per area sampled over a temperature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub temperatures: Vec<f64>,
    pub entropy: Vec<f64>,
    pub errors: Vec<f64>,
    pub steps: Vec<f64>,
    pub flagged: Vec<bool>,
}

impl EntropyCurve {
    pub fn max_abs(&self) -> f64 {
        self.entropy.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Temperatures bracketing the first run of strictly negative entropy.
    pub fn negative_interval(&self) -> Option<(f64, f64)> {
        let first = self.entropy.iter().position(|&s| s < 0.0)?;
        let mut last = first;
        while last + 1 < self.entropy.len() && self.entropy[last + 1] < 0.0 {
            last += 1;
        }
        Some((self.temperatures[first], self.temperatures[last]))
    }
}

pub fn entropy_curve(
    a: f64,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    temperatures: &[f64],
    opts: &DerivativeOptions,
) -> Result<EntropyCurve> {
    let est: Vec<DerivativeEstimate> = temperatures
        .par_iter()
        .map(|&t| entropy_area(a, mat1, mat2, t, opts))
        .collect::<Result<_>>()?;
    Ok(EntropyCurve {
        temperatures: temperatures.to_vec(),
        entropy: est.iter().map(|e| e.value).collect(),
        errors: est.iter().map(|e| e.error).collect(),
        steps: est.iter().map(|e| e.step).collect(),
        flagged: est.iter().map(|e| e.flagged).collect(),
    })
}

/// Outcome of a Nernst-theorem scan.
#[derive(Debug, Clone, PartialEq)]
pub struct NernstReport {
    pub curve: EntropyCurve,
    /// |S| at the lowest temperature divided by the largest |S| on the grid.
    pub low_t_ratio: f64,
    pub negative_interval: Option<(f64, f64)>,
}

impl NernstReport {
    /// |S(T_min)| < `fraction`·max|S| and a negative-entropy interval exists.
    pub fn satisfied(&self, fraction: f64) -> bool {
        self.low_t_ratio < fraction && self.negative_interval.is_some()
    }
}

pub fn nernst_check(
    a: f64,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    temperatures: &[f64],
    opts: &DerivativeOptions,
) -> Result<NernstReport> {
    validate_grid("temperature grid", temperatures)?;
    let curve = entropy_curve(a, mat1, mat2, temperatures, opts)?;
    let max = curve.max_abs();
    let low_t_ratio = if max == 0.0 {
        0.0
    } else {
        curve.entropy[0].abs() / max
    };
    let negative_interval = curve.negative_interval();
    Ok(NernstReport {
        curve,
        low_t_ratio,
        negative_interval,
    })
}

/// Plasma-model over Drude-model free energy at the same (a, T).
pub fn classical_limit_ratio(
    a: f64,
    t: f64,
    drude: &DrudeParams,
    opts: &EngineOptions,
) -> Result<f64> {
    let g = ThermalGeometry::plates(a, t)?;
    let plasma = DispersionModel::Plasma {
        omega_p_ev: drude.omega_p_ev,
        conversion: drude.conversion,
    };
    let dr = DispersionModel::drude(*drude)?;
    let fp = free_energy_area(&g, &plasma, &plasma, opts)?.value;
    let fd = free_energy_area(&g, &dr, &dr, opts)?.value;
    Ok(fp / fd)
}

/// Temperature behaviour of |F|.
#[derive(Debug, Clone, PartialEq)]
pub enum Monotonicity {
    /// |F| never decreases by more than the noise level along the grid.
    Monotone,
    /// |F| decreases between these grid temperatures (K).
    NonMonotone { from: f64, to: f64 },
}

/// Scans |f(T)| of two plates on `grid` and reports the first interval over
/// which it decreases by more than the relative `noise`.
pub fn temperature_monotonicity(
    a: f64,
    mat1: &DispersionModel,
    mat2: &DispersionModel,
    grid: &[f64],
    noise: f64,
    opts: &EngineOptions,
) -> Result<Monotonicity> {
    validate_grid("temperature grid", grid)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&t| {
            let g = ThermalGeometry::plates(a, t)?;
            Ok(free_energy_area(&g, mat1, mat2, opts)?.magnitude())
        })
        .collect::<Result<_>>()?;
    let mut i = 1;
    while i < values.len() {
        if values[i] < values[i - 1] * (1.0 - noise) {
            let start = i - 1;
            let mut end = i;
            while end + 1 < values.len() && values[end + 1] < values[end] {
                end += 1;
            }
            return Ok(Monotonicity::NonMonotone {
                from: grid[start],
                to: grid[end],
            });
        }
        i += 1;
    }
    Ok(Monotonicity::Monotone)
}

/// Temperature monotonicity of |F| for two constant-ε plates.
pub fn nonmonotonic_check(
    eps0: f64,
    a: f64,
    grid: &[f64],
    opts: &EngineOptions,
) -> Result<Monotonicity> {
    let m = DispersionModel::constant(eps0)?;
    temperature_monotonicity(a, &m, &m, grid, 1e-6, opts)
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Gap,
    Temperature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Strictly increasing values, m for gaps and K for temperatures.
    pub grid: Vec<f64>,
    /// Geometry supplying the parameters that are held fixed.
    pub base: ThermalGeometry,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, grid: Vec<f64>, base: ThermalGeometry) -> Result<Self> {
        validate_grid("sweep grid", &grid)?;
        Ok(SweepSpec {
            variable,
            grid,
            base,
        })
    }

    pub fn geometry_at(&self, value: f64) -> Result<ThermalGeometry> {
        match self.variable {
            SweepVariable::Gap => self.base.with_gap(value),
            SweepVariable::Temperature => self.base.with_temperature(value),
        }
    }

    /// Sphere-plate force (or plate free energy without a radius) at every
    /// grid point, in grid order.
    pub fn run(
        &self,
        mat1: &DispersionModel,
        mat2: &DispersionModel,
        opts: &EngineOptions,
    ) -> Result<Vec<crate::lifshitz::ForceResult>> {
        self.grid
            .par_iter()
            .map(|&v| {
                let g = self.geometry_at(v)?;
                if g.radius.is_some() {
                    sphere_plate_force(&g, mat1, mat2, opts)
                } else {
                    free_energy_area(&g, mat1, mat2, opts)
                }
            })
            .collect()
    }
}

pub(crate) fn validate_grid(what: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CasimirError::Config(format!("{what} is empty")));
    }
    if grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(CasimirError::Config(format!(
            "{what} must contain finite positive values"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CasimirError::Config(format!(
            "{what} must be strictly increasing"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_on_known_function() {
        // F(T) = T³ ⇒ −dF/dT = −3T²
        let opts = DerivativeOptions::default();
        let d = refined_negative_derivative(|t| Ok(t.powi(3)), 2.0, 1e-15, &opts).unwrap();
        assert!((d.value + 12.0).abs() < 1e-9);
        assert!(!d.flagged);
        let d = refined_negative_derivative(|t| Ok((t * 0.7).sin()), 1.3, 1e-15, &opts).unwrap();
        assert!((d.value + 0.7 * (0.91f64).cos()).abs() < 1e-9);
    }

    #[test]
    fn noisy_derivative_is_reported() {
        // Deterministic pseudo-noise far above the declared floor.
        let f = |t: f64| Ok(((t * 1e9).sin()) * 1e-3);
        let opts = DerivativeOptions {
            max_halvings: 6,
            ..Default::default()
        };
        match refined_negative_derivative(f, 1.0, 1e-16, &opts) {
            Err(CasimirError::NoisyDerivative { .. }) => {}
            Ok(d) => assert!(d.flagged, "{d:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn step_is_clamped_below_t() {
        let opts = DerivativeOptions::default();
        assert_eq!(opts.initial_step(10.0), 0.5);
        assert_eq!(opts.initial_step(0.2), 0.05);
        assert_eq!(opts.initial_step(0.04), 0.02);
        let bad = DerivativeOptions {
            step: Some(-1.0),
            ..Default::default()
        };
        assert!(refined_negative_derivative(Ok, 1.0, 0.0, &bad).is_err());
    }

    #[test]
    fn vacuum_entropy_is_zero() {
        let v = DispersionModel::Vacuum;
        for t in [0.5, 10.0, 300.0] {
            let s = entropy_area(1e-6, &v, &v, t, &DerivativeOptions::default()).unwrap();
            assert_eq!(s.value, 0.0);
        }
    }

    #[test]
    fn force_difference_trivial_cases() {
        let au = DispersionModel::gold();
        let o = EngineOptions::default();
        assert_eq!(
            force_difference(2e-7, 296e-6, &au, &au, 5.0, 5.0, &o).unwrap(),
            0.0
        );
        assert!(force_difference(2e-7, 296e-6, &au, &au, 5.0, 4.0, &o).is_err());
        assert!(force_difference(2e-7, 296e-6, &au, &au, 0.0, 4.0, &o).is_err());
    }

    #[test]
    fn identical_drude_ratio_is_one() {
        let p = DrudeParams::gold();
        let g = ThermalGeometry::plates(1e-6, 300.0).unwrap();
        let d = DispersionModel::Drude(p);
        let o = EngineOptions::default();
        let f1 = free_energy_area(&g, &d, &d, &o).unwrap().value;
        let f2 = free_energy_area(&g, &d, &d, &o).unwrap().value;
        assert_eq!(f1 / f2, 1.0);
    }

    #[test]
    fn plasma_drude_ratio_approaches_two_when_classical() {
        let p = DrudeParams::gold();
        let a = 1e3 / (p.omega_p_radps() / crate::constants::C);
        let t = 50.0 * crate::constants::thermal_length_kelvin() / a;
        let r = classical_limit_ratio(a, t, &p, &EngineOptions::default()).unwrap();
        assert!((r - 2.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn near_vacuum_dielectric_is_monotone() {
        let grid: Vec<f64> = (1..=12).map(|i| 50.0 * i as f64).collect();
        let m = nonmonotonic_check(1.0 + 1e-6, 2e-6, &grid, &EngineOptions::default()).unwrap();
        assert_eq!(m, Monotonicity::Monotone);
    }

    #[test]
    fn ideal_metal_is_monotone_increasing() {
        let grid: Vec<f64> = (1..=12).map(|i| 50.0 * i as f64).collect();
        let im = DispersionModel::IdealMetal;
        let m = temperature_monotonicity(2e-6, &im, &im, &grid, 0.0, &EngineOptions::default())
            .unwrap();
        assert_eq!(m, Monotonicity::Monotone);
    }

    #[test]
    fn grids_validated() {
        assert!(validate_grid("g", &[]).is_err());
        assert!(validate_grid("g", &[1.0, 1.0]).is_err());
        assert!(validate_grid("g", &[2.0, 1.0]).is_err());
        assert!(validate_grid("g", &[-1.0, 1.0]).is_err());
        assert!(validate_grid("g", &[1.0, 2.0]).is_ok());
    }

    #[test]
    fn gap_sweep_is_monotone_decreasing() {
        let base = ThermalGeometry::sphere_plate(2e-7, 296e-6, 300.0).unwrap();
        let grid: Vec<f64> = (0..10).map(|i| 150e-9 + i as f64 * 95e-9).collect();
        let spec = SweepSpec::new(SweepVariable::Gap, grid, base).unwrap();
        let au = DispersionModel::gold();
        let rows = spec.run(&au, &au, &EngineOptions::default()).unwrap();
        assert!(rows.windows(2).all(|w| w[1].magnitude() < w[0].magnitude()));
    }
}
