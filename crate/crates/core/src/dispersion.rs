//! Permittivity along the imaginary frequency axis.
//!
//! Every model answers two questions: the value of ε(iζ) at a positive
//! Matsubara frequency, and how the TE reflection coefficient behaves in
//! the ζ → 0 limit. The second is never obtained by evaluating ε at zero;
//! it is the classification `L = lim ζ²[ε(iζ) − 1]` returned by
//! [`DispersionModel::zero_mode_class`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::constants::EvConversion;
use crate::error::{CasimirError, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Bloch–Grüneisen temperature dependence of the relaxation frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGruneisen {
    /// Debye temperature Θ in K.
    pub theta: f64,
    /// Prefactor in eV.
    pub coeff_ev: f64,
    /// Residual (impurity) relaxation frequency in eV, added to ν(T).
    pub impurity_nu_ev: f64,
}

impl BlochGruneisen {
    /// Gold: Θ = 175 K, prefactor 0.0847 eV, no impurity floor.
    pub const GOLD: BlochGruneisen = BlochGruneisen {
        theta: 175.0,
        coeff_ev: 0.0847,
        impurity_nu_ev: 0.0,
    };

    pub fn nu_ev(&self, t: f64) -> Result<f64> {
        Ok(bloch_gruneisen_nu(t, self.theta, self.coeff_ev)? + self.impurity_nu_ev)
    }
}

/// Drude parameters, stored in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParams {
    pub omega_p_ev: f64,
    pub nu_ev: f64,
    /// When set, ν is taken from the Bloch–Grüneisen formula at the
    /// evaluation temperature instead of `nu_ev`.
    pub temperature_dependent_nu: Option<BlochGruneisen>,
    pub conversion: EvConversion,
}

impl DrudeParams {
    pub fn new(omega_p_ev: f64, nu_ev: f64) -> Result<Self> {
        let p = DrudeParams {
            omega_p_ev,
            nu_ev,
            temperature_dependent_nu: None,
            conversion: EvConversion::Rounded,
        };
        p.validate()?;
        Ok(p)
    }

    /// Gold: ω_p = 9.0 eV, ν = 35 meV.
    pub fn gold() -> Self {
        DrudeParams::new(9.0, 0.035).expect("static parameters")
    }

    /// Copper: ω_p = 8.97 eV, ν = 30 meV.
    pub fn copper() -> Self {
        DrudeParams::new(8.97, 0.030).expect("static parameters")
    }

    pub fn with_bloch_gruneisen(mut self, bg: BlochGruneisen) -> Result<Self> {
        self.temperature_dependent_nu = Some(bg);
        self.validate()?;
        Ok(self)
    }

    pub fn with_conversion(mut self, conversion: EvConversion) -> Self {
        self.conversion = conversion;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_p_ev > 0.0) || !self.omega_p_ev.is_finite() {
            return Err(CasimirError::invalid(
                "omega_p (eV)",
                self.omega_p_ev,
                "must be > 0",
            ));
        }
        if !(self.nu_ev >= 0.0) || !self.nu_ev.is_finite() {
            return Err(CasimirError::invalid("nu (eV)", self.nu_ev, "must be >= 0"));
        }
        if let Some(bg) = self.temperature_dependent_nu {
            if !(bg.theta > 0.0) {
                return Err(CasimirError::invalid(
                    "Debye temperature (K)",
                    bg.theta,
                    "must be > 0",
                ));
            }
            if !(bg.coeff_ev > 0.0) {
                return Err(CasimirError::invalid(
                    "Bloch-Gruneisen coefficient (eV)",
                    bg.coeff_ev,
                    "must be > 0",
                ));
            }
            if !(bg.impurity_nu_ev >= 0.0) {
                return Err(CasimirError::invalid(
                    "impurity nu (eV)",
                    bg.impurity_nu_ev,
                    "must be >= 0",
                ));
            }
        }
        Ok(())
    }

    /// True when ν vanishes identically, i.e. the plasma model.
    pub fn is_degenerate(&self) -> bool {
        self.nu_ev == 0.0 && self.temperature_dependent_nu.is_none()
    }

    pub fn omega_p_radps(&self) -> f64 {
        self.omega_p_ev * self.conversion.factor()
    }

    /// Relaxation frequency at temperature `t`, rad/s.
    pub fn nu_radps(&self, t: f64) -> Result<f64> {
        let nu_ev = match self.temperature_dependent_nu {
            Some(bg) => bg.nu_ev(t)?,
            None => self.nu_ev,
        };
        Ok(nu_ev * self.conversion.factor())
    }
}

/// ε(iζ) = 1 + ω_p² / (ζ(ζ + ν)).
pub fn drude_eps(zeta: f64, p: &DrudeParams, t: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(CasimirError::invalid(
            "frequency zeta (rad/s)",
            zeta,
            "must be > 0; the zero mode is handled by zero_mode_class",
        ));
    }
    let wp = p.omega_p_radps();
    let nu = p.nu_radps(t)?;
    Ok(1.0 + wp * wp / (zeta * (zeta + nu)))
}

/// ε(iζ) = 1 + ω_p²/ζ².
pub fn plasma_eps(zeta: f64, omega_p_radps: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(CasimirError::invalid(
            "frequency zeta (rad/s)",
            zeta,
            "must be > 0",
        ));
    }
    let r = omega_p_radps / zeta;
    Ok(1.0 + r * r)
}

fn bg_integrand(x: f64) -> f64 {
    if x < 1e-4 {
        // x⁵eˣ/(eˣ−1)² = x³(1 − x²/12 + …)
        x * x * x * (1.0 - x * x / 12.0)
    } else {
        let em = (-x).exp_m1();
        x.powi(5) * (-x).exp() / (em * em)
    }
}

/// Bloch–Grüneisen relaxation frequency in eV:
/// `coeff·(T/Θ)⁵ ∫₀^{Θ/T} x⁵eˣ/(eˣ−1)² dx`.
pub fn bloch_gruneisen_nu(t: f64, theta: f64, coeff_ev: f64) -> Result<f64> {
    crate::constants::check_positive("temperature T (K)", t)?;
    crate::constants::check_positive("Debye temperature (K)", theta)?;
    let upper = theta / t;
    // The integrand is below 1e-90 past x = 250.
    let hi = upper.min(250.0);
    let opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        max_intervals: 200,
    };
    let (integral, _) = integrate(bg_integrand, 0.0, hi, &opts)?;
    Ok(coeff_ev * (t / theta).powi(5) * integral)
}

/// How reflection-coefficient tables may be extended beyond their grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Extrapolation {
    /// Below the grid, continue ε − 1 ∝ 1/ζ from the first point.
    pub drude_tail_below: bool,
    /// Above the grid, ε = 1.
    pub unity_above: bool,
}

impl Extrapolation {
    pub const NONE: Extrapolation = Extrapolation {
        drude_tail_below: false,
        unity_above: false,
    };
    pub const BOTH: Extrapolation = Extrapolation {
        drude_tail_below: true,
        unity_above: true,
    };
}

/// Tabulated ε(iζ) on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    zeta: Vec<f64>,
    eps: Vec<f64>,
    pub label: String,
    /// Metallic tables reflect TM perfectly at ζ = 0.
    pub metallic: bool,
    pub extrapolation: Extrapolation,
}

/// Lower end of the frequency window a production table should cover.
pub const STANDARD_GRID_MIN: f64 = 1e11;
/// Upper end of the frequency window a production table should cover.
pub const STANDARD_GRID_MAX: f64 = 1e18;

impl MaterialTable {
    /// Builds a table, checking the grid and values.
    ///
    /// With `strict_monotone`, ε must be non-increasing in ζ.
    pub fn new(
        label: impl Into<String>,
        zeta: Vec<f64>,
        eps: Vec<f64>,
        strict_monotone: bool,
    ) -> Result<Self> {
        let label = label.into();
        let fail = |line: usize, reason: String| CasimirError::Table {
            path: PathBuf::from(&label),
            line,
            reason,
        };
        if zeta.len() != eps.len() {
            return Err(fail(0, "grid and value columns differ in length".into()));
        }
        if zeta.len() < 2 {
            return Err(fail(0, "at least two grid points are required".into()));
        }
        for i in 0..zeta.len() {
            if !(zeta[i] > 0.0) || !zeta[i].is_finite() {
                return Err(fail(
                    i + 1,
                    format!("grid value {} is not a positive frequency", zeta[i]),
                ));
            }
            if !(eps[i] >= 1.0) || !eps[i].is_finite() {
                return Err(fail(i + 1, format!("permittivity {} is below 1", eps[i])));
            }
            if i > 0 && zeta[i] <= zeta[i - 1] {
                return Err(fail(
                    i + 1,
                    format!(
                        "grid not strictly increasing ({} after {})",
                        zeta[i],
                        zeta[i - 1]
                    ),
                ));
            }
            if strict_monotone && i > 0 && eps[i] > eps[i - 1] {
                return Err(fail(
                    i + 1,
                    format!(
                        "permittivity increases with frequency ({} after {})",
                        eps[i],
                        eps[i - 1]
                    ),
                ));
            }
        }
        Ok(MaterialTable {
            zeta,
            eps,
            label,
            metallic: true,
            extrapolation: Extrapolation::NONE,
        })
    }

    pub fn with_metallic(mut self, metallic: bool) -> Self {
        self.metallic = metallic;
        self
    }

    pub fn with_extrapolation(mut self, e: Extrapolation) -> Self {
        self.extrapolation = e;
        self
    }

    pub fn zeta_grid(&self) -> &[f64] {
        &self.zeta
    }

    pub fn eps_values(&self) -> &[f64] {
        &self.eps
    }

    pub fn grid_min(&self) -> f64 {
        self.zeta[0]
    }

    pub fn grid_max(&self) -> f64 {
        *self.zeta.last().unwrap()
    }

    pub fn covers_standard_range(&self) -> bool {
        self.grid_min() <= STANDARD_GRID_MIN && self.grid_max() >= STANDARD_GRID_MAX
    }

    /// Samples `eps_fn` on `points` log-spaced frequencies in `[lo, hi]`.
    pub fn from_fn<F>(label: &str, lo: f64, hi: f64, points: usize, eps_fn: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let zeta = log_grid(lo, hi, points)?;
        let eps = zeta
            .iter()
            .map(|&z| eps_fn(z))
            .collect::<Result<Vec<_>>>()?;
        MaterialTable::new(label, zeta, eps, true)
    }

    /// Reads a `zeta_radps,eps` CSV file.
    pub fn load(path: &Path, strict_monotone: bool) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CasimirError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text, path, strict_monotone)
    }

    pub fn parse_csv(text: &str, path: &Path, strict_monotone: bool) -> Result<Self> {
        let fail = |line: usize, reason: String| CasimirError::Table {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut zeta = Vec::new();
        let mut eps = Vec::new();
        let mut lines_of_rows = Vec::new();
        let mut header_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols != ["zeta_radps", "eps"] {
                    return Err(fail(
                        line_no,
                        format!("expected header `zeta_radps,eps`, found `{line}`"),
                    ));
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(fail(
                    line_no,
                    format!("expected 2 columns, found {}", cols.len()),
                ));
            }
            let z: f64 = cols[0]
                .parse()
                .map_err(|_| fail(line_no, format!("malformed frequency `{}`", cols[0])))?;
            let e: f64 = cols[1]
                .parse()
                .map_err(|_| fail(line_no, format!("malformed permittivity `{}`", cols[1])))?;
            zeta.push(z);
            eps.push(e);
            lines_of_rows.push(line_no);
        }
        if !header_seen {
            return Err(fail(0, "missing header `zeta_radps,eps`".into()));
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "table".into());
        // Re-map row indices in validation errors to file line numbers.
        MaterialTable::new(label, zeta, eps, strict_monotone).map_err(|e| match e {
            CasimirError::Table { line, reason, .. } => CasimirError::Table {
                path: path.to_path_buf(),
                line: if line == 0 {
                    0
                } else {
                    lines_of_rows[line - 1]
                },
                reason,
            },
            other => other,
        })
    }

    /// Log-log interpolation of ε − 1.
    pub fn eps_at(&self, zeta: f64) -> Result<f64> {
        tabulated_eps(zeta, self)
    }
}

/// Interpolated ε(iζ) from a table, log-log in (ε − 1).
pub fn tabulated_eps(zeta: f64, table: &MaterialTable) -> Result<f64> {
    Ok(1.0 + tabulated_chi(zeta, table)?)
}

fn tabulated_chi(zeta: f64, table: &MaterialTable) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(CasimirError::invalid(
            "frequency zeta (rad/s)",
            zeta,
            "must be > 0",
        ));
    }
    let (lo, hi) = (table.grid_min(), table.grid_max());
    if zeta < lo {
        if table.extrapolation.drude_tail_below {
            return Ok((table.eps[0] - 1.0) * lo / zeta);
        }
        return Err(CasimirError::Extrapolation {
            zeta,
            min: lo,
            max: hi,
        });
    }
    if zeta > hi {
        if table.extrapolation.unity_above {
            return Ok(0.0);
        }
        return Err(CasimirError::Extrapolation {
            zeta,
            min: lo,
            max: hi,
        });
    }
    let z = &table.zeta;
    let i = z.partition_point(|&g| g <= zeta);
    if i == 0 {
        return Ok(table.eps[0] - 1.0);
    }
    if i == z.len() || z[i - 1] == zeta {
        return Ok(table.eps[i - 1] - 1.0);
    }
    let (z0, z1) = (z[i - 1], z[i]);
    let (e0, e1) = (table.eps[i - 1] - 1.0, table.eps[i] - 1.0);
    let t = (zeta / z0).ln() / (z1 / z0).ln();
    let chi = if e0 > 0.0 && e1 > 0.0 {
        (e0.ln() + t * (e1 / e0).ln()).exp()
    } else {
        e0 + t * (e1 - e0)
    };
    Ok(chi)
}

/// `points` log-spaced values covering `[lo, hi]` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(CasimirError::Config(format!(
            "invalid log grid [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(CasimirError::Config(
            "log grid needs at least 2 points".into(),
        ));
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let n = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                (l0 + (l1 - l0) * i as f64 / n).exp()
            }
        })
        .collect())
}

/// Fate of the TE reflection coefficient in the ζ → 0 limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroModeClass {
    /// ζ²(ε − 1) → 0: no TE zero mode.
    TeVanishes,
    /// ζ²(ε − 1) → L (rad²/s²), finite.
    TeFinite { limit: f64 },
    /// Perfect reflection (ε = ∞).
    TeIdeal,
}

/// Dielectric response of one body.
#[derive(Debug, Clone, PartialEq)]
pub enum DispersionModel {
    Drude(DrudeParams),
    Plasma {
        omega_p_ev: f64,
        conversion: EvConversion,
    },
    ConstantDielectric {
        eps0: f64,
    },
    IdealMetal,
    Tabulated(Arc<MaterialTable>),
    /// Ideal reflection at every m ≥ 1, no TE zero mode.
    ModifiedIdealMetal,
    /// ε = 1 everywhere.
    Vacuum,
}

impl DispersionModel {
    /// A Drude model; ν = 0 without Bloch–Grüneisen is re-tagged as plasma.
    pub fn drude(p: DrudeParams) -> Result<Self> {
        p.validate()?;
        if p.is_degenerate() {
            Ok(DispersionModel::Plasma {
                omega_p_ev: p.omega_p_ev,
                conversion: p.conversion,
            })
        } else {
            Ok(DispersionModel::Drude(p))
        }
    }

    pub fn plasma(omega_p_ev: f64) -> Result<Self> {
        if !(omega_p_ev > 0.0) || !omega_p_ev.is_finite() {
            return Err(CasimirError::invalid(
                "omega_p (eV)",
                omega_p_ev,
                "must be > 0",
            ));
        }
        Ok(DispersionModel::Plasma {
            omega_p_ev,
            conversion: EvConversion::Rounded,
        })
    }

    pub fn constant(eps0: f64) -> Result<Self> {
        if !(eps0 > 1.0) || !eps0.is_finite() {
            return Err(CasimirError::invalid(
                "eps0",
                eps0,
                "must be finite and > 1",
            ));
        }
        Ok(DispersionModel::ConstantDielectric { eps0 })
    }

    pub fn tabulated(table: MaterialTable) -> Self {
        DispersionModel::Tabulated(Arc::new(table))
    }

    pub fn gold() -> Self {
        DispersionModel::Drude(DrudeParams::gold())
    }

    pub fn copper() -> Self {
        DispersionModel::Drude(DrudeParams::copper())
    }

    /// Perfect reflectors bypass ε entirely.
    pub fn is_ideal(&self) -> bool {
        matches!(
            self,
            DispersionModel::IdealMetal | DispersionModel::ModifiedIdealMetal
        )
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, DispersionModel::Vacuum)
    }

    /// ε(iζ) for ζ > 0; `+∞` for the ideal reflectors.
    pub fn eps_at(&self, zeta: f64, t: f64) -> Result<f64> {
        match self {
            DispersionModel::Drude(p) => drude_eps(zeta, p, t),
            DispersionModel::Plasma {
                omega_p_ev,
                conversion,
            } => plasma_eps(zeta, omega_p_ev * conversion.factor()),
            DispersionModel::ConstantDielectric { eps0 } => {
                if !(zeta > 0.0) {
                    return Err(CasimirError::invalid(
                        "frequency zeta (rad/s)",
                        zeta,
                        "must be > 0",
                    ));
                }
                Ok(*eps0)
            }
            DispersionModel::Tabulated(table) => tabulated_eps(zeta, table),
            DispersionModel::IdealMetal | DispersionModel::ModifiedIdealMetal => Ok(f64::INFINITY),
            DispersionModel::Vacuum => Ok(1.0),
        }
    }

    /// ε(iζ) − 1 for ζ > 0, without the cancellation of forming ε first.
    pub fn chi_at(&self, zeta: f64, t: f64) -> Result<f64> {
        if !(zeta > 0.0) {
            return Err(CasimirError::invalid(
                "frequency zeta (rad/s)",
                zeta,
                "must be > 0",
            ));
        }
        match self {
            DispersionModel::Drude(p) => {
                let wp = p.omega_p_radps();
                let nu = p.nu_radps(t)?;
                Ok(wp * wp / (zeta * (zeta + nu)))
            }
            DispersionModel::Plasma {
                omega_p_ev,
                conversion,
            } => {
                let r = omega_p_ev * conversion.factor() / zeta;
                Ok(r * r)
            }
            DispersionModel::ConstantDielectric { eps0 } => Ok(eps0 - 1.0),
            DispersionModel::Tabulated(table) => tabulated_chi(zeta, table),
            DispersionModel::IdealMetal | DispersionModel::ModifiedIdealMetal => Ok(f64::INFINITY),
            DispersionModel::Vacuum => Ok(0.0),
        }
    }

    /// ζ²(ε(iζ) − 1) in rad²/s².
    pub fn susceptibility_weight(&self, zeta: f64, t: f64) -> Result<f64> {
        match self {
            DispersionModel::Drude(p) => {
                let wp = p.omega_p_radps();
                let nu = p.nu_radps(t)?;
                if !(zeta > 0.0) {
                    return Err(CasimirError::invalid(
                        "frequency zeta (rad/s)",
                        zeta,
                        "must be > 0",
                    ));
                }
                Ok(wp * wp * zeta / (zeta + nu))
            }
            DispersionModel::Plasma {
                omega_p_ev,
                conversion,
            } => {
                let wp = omega_p_ev * conversion.factor();
                Ok(wp * wp)
            }
            _ => Ok(zeta * zeta * self.chi_at(zeta, t)?),
        }
    }

    pub fn zero_mode_class(&self) -> ZeroModeClass {
        match self {
            DispersionModel::Drude(p) if p.is_degenerate() => {
                let wp = p.omega_p_radps();
                ZeroModeClass::TeFinite { limit: wp * wp }
            }
            DispersionModel::Drude(_) => ZeroModeClass::TeVanishes,
            DispersionModel::Plasma {
                omega_p_ev,
                conversion,
            } => {
                let wp = omega_p_ev * conversion.factor();
                ZeroModeClass::TeFinite { limit: wp * wp }
            }
            DispersionModel::ConstantDielectric { .. }
            | DispersionModel::Tabulated(_)
            | DispersionModel::ModifiedIdealMetal
            | DispersionModel::Vacuum => ZeroModeClass::TeVanishes,
            DispersionModel::IdealMetal => ZeroModeClass::TeIdeal,
        }
    }

    /// ζ → 0 limit of Δ^TM (independent of transverse momentum).
    pub fn zero_mode_tm(&self) -> f64 {
        match self {
            DispersionModel::Drude(_)
            | DispersionModel::Plasma { .. }
            | DispersionModel::IdealMetal
            | DispersionModel::ModifiedIdealMetal => 1.0,
            DispersionModel::ConstantDielectric { eps0 } => (eps0 - 1.0) / (eps0 + 1.0),
            DispersionModel::Tabulated(t) => {
                if t.metallic {
                    1.0
                } else {
                    let e = t.eps[0];
                    (e - 1.0) / (e + 1.0)
                }
            }
            DispersionModel::Vacuum => 0.0,
        }
    }
}

impl fmt::Display for DispersionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DispersionModel::Drude(p) => {
                write!(f, "drude(omega_p={} eV, nu={} eV)", p.omega_p_ev, p.nu_ev)
            }
            DispersionModel::Plasma { omega_p_ev, .. } => {
                write!(f, "plasma(omega_p={omega_p_ev} eV)")
            }
            DispersionModel::ConstantDielectric { eps0 } => write!(f, "constant(eps0={eps0})"),
            DispersionModel::IdealMetal => write!(f, "ideal"),
            DispersionModel::Tabulated(t) => write!(f, "tabulated({})", t.label),
            DispersionModel::ModifiedIdealMetal => write!(f, "mim"),
            DispersionModel::Vacuum => write!(f, "vacuum"),
        }
    }
}
