//! Command-line front end: material configs, unit parsing, CSV output and
//! the `force`, `sweep`, `diff`, `entropy`, `aniso` and `epsilon` commands.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aniso_pair::{pair_entropy, pair_free_energy, tau, AnisoPairConfig};
use crate::constants::EvConversion;
use crate::dispersion::{
    log_grid, BlochGruneisen, DispersionModel, DrudeParams, Extrapolation, MaterialTable,
};
use crate::error::{CasimirError, Result};
use crate::lifshitz::{free_energy_area, sphere_plate_force, EngineOptions, ThermalGeometry};
use crate::thermo::{entropy_area, DerivativeOptions, SweepVariable};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "CASIMIR_THREADS";

/// Ten significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.9e}")
}

fn split_unit<'a>(text: &'a str, units: &[&'a str]) -> Option<(f64, &'a str)> {
    let s = text.trim();
    for u in units {
        if let Some(num) = s.strip_suffix(u) {
            if let Ok(v) = num.trim().parse::<f64>() {
                return Some((v, u));
            }
        }
    }
    None
}

/// Parses a length such as `200nm`, `1um`, `1μm`, `0.5mm` or `1e-6m` into metres.
pub fn parse_length(text: &str) -> Result<f64> {
    let (v, unit) = split_unit(text, &["nm", "um", "μm", "µm", "mm", "m"]).ok_or_else(|| {
        CasimirError::Config(format!(
            "invalid length `{text}`: expected a number with unit nm, um, μm, mm or m"
        ))
    })?;
    let scale = match unit {
        "nm" => 1e-9,
        "mm" => 1e-3,
        "m" => 1.0,
        _ => 1e-6,
    };
    positive(text, v * scale)
}

/// Parses `300K` or `50mK` into kelvin.
pub fn parse_temperature(text: &str) -> Result<f64> {
    let (v, unit) = split_unit(text, &["mK", "K"]).ok_or_else(|| {
        CasimirError::Config(format!(
            "invalid temperature `{text}`: expected a number with unit K or mK"
        ))
    })?;
    positive(text, if unit == "mK" { v * 1e-3 } else { v })
}

/// Parses an imaginary frequency: `1e14`, `1e14rad/s` or `0.5eV`.
pub fn parse_frequency(text: &str, conversion: EvConversion) -> Result<f64> {
    if let Some((v, _)) = split_unit(text, &["eV"]) {
        return positive(text, v * conversion.factor());
    }
    let num = text.trim().strip_suffix("rad/s").unwrap_or(text.trim());
    let v: f64 = num.trim().parse().map_err(|_| {
        CasimirError::Config(format!("invalid frequency `{text}`: expected rad/s or eV"))
    })?;
    positive(text, v)
}

fn parse_ev(key: &str, text: &str) -> Result<f64> {
    let num = text.trim().strip_suffix("eV").unwrap_or(text.trim());
    num.trim()
        .parse()
        .map_err(|_| CasimirError::Config(format!("invalid value for {key}: `{text}`")))
}

fn positive(text: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CasimirError::Config(format!(
            "`{text}` must be positive and finite"
        )))
    }
}

fn parse_bool(key: &str, text: &str) -> Result<bool> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CasimirError::Config(format!(
            "invalid boolean for {key}: `{text}`"
        ))),
    }
}

/// Parses `key=value` material text; tabulated `file` paths are resolved
/// against `base_dir`.
pub fn parse_material(text: &str, base_dir: Option<&Path>) -> Result<DispersionModel> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (k, v) = token.split_once('=').ok_or_else(|| {
                CasimirError::Config(format!("expected key=value, found `{token}`"))
            })?;
            if pairs.iter().any(|(seen, _)| seen == k) {
                return Err(CasimirError::Config(format!("duplicate key `{k}`")));
            }
            pairs.push((k.to_string(), v.to_string()));
        }
    }
    let get = |k: &str| {
        pairs
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
    };
    let model = get("model")
        .ok_or_else(|| CasimirError::Config("material spec has no `model` key".into()))?;

    let allowed: &[&str] = match model {
        "drude" => &[
            "omega_p_ev",
            "nu_ev",
            "conversion",
            "bg_theta_k",
            "bg_coeff_ev",
            "bg_impurity_nu_ev",
        ],
        "plasma" => &["omega_p_ev", "conversion"],
        "constant" => &["eps0"],
        "tabulated" => &["file", "strict", "metallic", "extrapolation"],
        "ideal" | "mim" | "vacuum" => &[],
        other => {
            return Err(CasimirError::Config(format!(
                "unknown material model `{other}` (expected drude, plasma, constant, ideal, mim, tabulated or vacuum)"
            )))
        }
    };
    for (k, _) in &pairs {
        if k != "model" && !allowed.contains(&k.as_str()) {
            return Err(CasimirError::Config(format!(
                "unknown key `{k}` for model={model}"
            )));
        }
    }
    let required = |k: &str| {
        get(k).ok_or_else(|| CasimirError::Config(format!("model={model} requires `{k}`")))
    };
    let conversion = match get("conversion") {
        None | Some("rounded") => EvConversion::Rounded,
        Some("exact") => EvConversion::Exact,
        Some(other) => {
            return Err(CasimirError::Config(format!(
                "unknown conversion `{other}` (expected rounded or exact)"
            )))
        }
    };

    match model {
        "drude" => {
            let mut p = DrudeParams::new(
                parse_ev("omega_p_ev", required("omega_p_ev")?)?,
                parse_ev("nu_ev", required("nu_ev")?)?,
            )?
            .with_conversion(conversion);
            if get("bg_theta_k").is_some()
                || get("bg_coeff_ev").is_some()
                || get("bg_impurity_nu_ev").is_some()
            {
                let mut bg = BlochGruneisen::GOLD;
                if let Some(v) = get("bg_theta_k") {
                    bg.theta = parse_ev("bg_theta_k", v)?;
                }
                if let Some(v) = get("bg_coeff_ev") {
                    bg.coeff_ev = parse_ev("bg_coeff_ev", v)?;
                }
                if let Some(v) = get("bg_impurity_nu_ev") {
                    bg.impurity_nu_ev = parse_ev("bg_impurity_nu_ev", v)?;
                }
                p = p.with_bloch_gruneisen(bg)?;
            }
            DispersionModel::drude(p)
        }
        "plasma" => {
            let m = DispersionModel::plasma(parse_ev("omega_p_ev", required("omega_p_ev")?)?)?;
            Ok(match m {
                DispersionModel::Plasma { omega_p_ev, .. } => DispersionModel::Plasma {
                    omega_p_ev,
                    conversion,
                },
                other => other,
            })
        }
        "constant" => {
            let eps0 = required("eps0")?;
            DispersionModel::constant(
                eps0.parse().map_err(|_| {
                    CasimirError::Config(format!("invalid value for eps0: `{eps0}`"))
                })?,
            )
        }
        "tabulated" => {
            let file = PathBuf::from(required("file")?);
            let path = match base_dir {
                Some(dir) if file.is_relative() => dir.join(file),
                _ => file,
            };
            let strict = get("strict")
                .map(|v| parse_bool("strict", v))
                .transpose()?
                .unwrap_or(true);
            let metallic = get("metallic")
                .map(|v| parse_bool("metallic", v))
                .transpose()?
                .unwrap_or(false);
            let extrapolation = match get("extrapolation").unwrap_or("none") {
                "none" => Extrapolation::NONE,
                "below" => Extrapolation {
                    drude_tail_below: true,
                    unity_above: false,
                },
                "above" => Extrapolation {
                    drude_tail_below: false,
                    unity_above: true,
                },
                "both" => Extrapolation::BOTH,
                other => {
                    return Err(CasimirError::Config(format!(
                        "unknown extrapolation `{other}` (expected none, below, above or both)"
                    )))
                }
            };
            let table = MaterialTable::load(&path, strict)?
                .with_metallic(metallic)
                .with_extrapolation(extrapolation);
            Ok(DispersionModel::tabulated(table))
        }
        "ideal" => Ok(DispersionModel::IdealMetal),
        "mim" => Ok(DispersionModel::ModifiedIdealMetal),
        _ => Ok(DispersionModel::Vacuum),
    }
}

/// Resolves a material argument: a config file path, an inline
/// `key=value` spec, or one of the names gold, copper, ideal, mim, vacuum.
pub fn load_material(arg: &str) -> Result<DispersionModel> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|source| CasimirError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        return parse_material(&text, path.parent());
    }
    if arg.contains('=') {
        return parse_material(arg, None);
    }
    match arg {
        "gold" | "au" => Ok(DispersionModel::gold()),
        "copper" | "cu" => Ok(DispersionModel::copper()),
        "ideal" => Ok(DispersionModel::IdealMetal),
        "mim" => Ok(DispersionModel::ModifiedIdealMetal),
        "vacuum" => Ok(DispersionModel::Vacuum),
        _ => Err(CasimirError::Config(format!(
            "material `{arg}` is neither a file, an inline key=value spec nor a known name"
        ))),
    }
}

fn material(arg: &str, err: &mut dyn Write) -> Result<DispersionModel> {
    let m = load_material(arg)?;
    if let DispersionModel::Tabulated(t) = &m {
        if !t.covers_standard_range() {
            let _ = writeln!(
                err,
                "warning: table {} spans [{:e}, {:e}] rad/s, narrower than the standard [1e11, 1e18]",
                t.label,
                t.grid_min(),
                t.grid_max()
            );
        }
    }
    Ok(m)
}

/// CSV sink that flushes after every row.
pub struct CsvWriter<W: Write> {
    inner: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut inner: W, header: &[&str], write_header: bool) -> io::Result<Self> {
        if write_header {
            writeln!(inner, "{}", header.join(","))?;
            inner.flush()?;
        }
        Ok(CsvWriter {
            inner,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        writeln!(self.inner, "{}", fields.join(","))?;
        self.inner.flush()
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "casimir",
    version,
    about = "Finite-temperature Casimir forces from the Lifshitz formula"
)]
pub struct Cli {
    /// Worker threads (overrides CASIMIR_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sphere-plate force (or plate free energy without --radius).
    Force(ForceArgs),
    /// Force over a gap or temperature grid.
    Sweep(SweepArgs),
    /// |F(T1)| − |F(T2)| at fixed gap.
    Diff(DiffArgs),
    /// Plate entropy per area over a temperature grid.
    Entropy(EntropyArgs),
    /// Free energy and entropy of the anisotropic particle pair.
    Aniso(AnisoArgs),
    /// Dump ε(iζ) of a material on a frequency grid.
    Epsilon(EpsilonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MaterialArgs {
    #[arg(long, default_value = "gold")]
    pub material_sphere: String,
    #[arg(long, default_value = "gold")]
    pub material_plate: String,
}

#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Relative truncation tolerance of the Matsubara sum.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative accuracy of each wave-number integral.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub max_terms: Option<usize>,
}

impl NumericArgs {
    fn options(&self, base: EngineOptions) -> Result<EngineOptions> {
        let mut o = base;
        if let Some(t) = self.tol {
            o.tol = positive("--tol", t)?;
        }
        if let Some(q) = self.quad_tol {
            o.quad_tol = positive("--quad-tol", q)?;
        }
        if let Some(m) = self.max_terms {
            if m == 0 {
                return Err(CasimirError::Config(
                    "--max-terms must be at least 1".into(),
                ));
            }
            o.max_terms = m;
        }
        Ok(o)
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output CSV file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ForceArgs {
    #[command(flatten)]
    pub materials: MaterialArgs,
    #[arg(long)]
    pub gap: String,
    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long)]
    pub temperature: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Lin,
    Log,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Gap,
    Temperature,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub materials: MaterialArgs,
    #[arg(long, value_enum)]
    pub variable: Variable,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "lin")]
    pub scale: Scale,
    /// Fixed gap for temperature sweeps.
    #[arg(long)]
    pub gap: Option<String>,
    /// Fixed temperature for gap sweeps.
    #[arg(long)]
    pub temperature: Option<String>,
    #[arg(long)]
    pub radius: Option<String>,
    /// Skip rows already present in --output and append the rest.
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DiffArgs {
    #[command(flatten)]
    pub materials: MaterialArgs,
    #[arg(long)]
    pub gap: String,
    #[arg(long, default_value = "296um")]
    pub radius: String,
    /// Lower temperature.
    #[arg(long)]
    pub t1: String,
    /// Higher temperature.
    #[arg(long)]
    pub t2: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "lin")]
    pub scale: Scale,
}

#[derive(Args, Debug, Clone)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub materials: MaterialArgs,
    #[arg(long)]
    pub gap: String,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Initial differencing step, e.g. 0.05K.
    #[arg(long)]
    pub step: Option<String>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AnisoArgs {
    #[arg(long)]
    pub separation: String,
    /// Static polarizability volume, m³.
    #[arg(long)]
    pub alpha0: f64,
    /// Oscillator frequency (rad/s or eV); static polarizability when omitted.
    #[arg(long)]
    pub omega0: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct EpsilonArgs {
    #[arg(long)]
    pub material: String,
    /// Lowest frequency (rad/s or eV).
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub points: usize,
    #[arg(long, default_value = "300K")]
    pub temperature: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn grid(lo: f64, hi: f64, points: usize, scale: Scale) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(CasimirError::Config("--points must be at least 1".into()));
    }
    if !(hi >= lo) || (points > 1 && hi == lo) {
        return Err(CasimirError::Config(
            "grid end must exceed grid start".into(),
        ));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    match scale {
        Scale::Log => log_grid(lo, hi, points),
        Scale::Lin => Ok((0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect()),
    }
}

enum Sink<'a> {
    File(File),
    Borrowed(&'a mut dyn Write),
}

impl Write for Sink<'_> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::File(f) => f.write(buf),
            Sink::Borrowed(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::File(f) => f.flush(),
            Sink::Borrowed(w) => w.flush(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CasimirError + '_ {
    move |source| CasimirError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open_csv<'a>(
    output: &OutputArgs,
    stdout: &'a mut dyn Write,
    header: &[&str],
    resume: bool,
) -> Result<(CsvWriter<Sink<'a>>, usize)> {
    let stdout_path = Path::new("<stdout>");
    match &output.output {
        None => {
            if resume {
                return Err(CasimirError::Config("--resume requires --output".into()));
            }
            let w = CsvWriter::new(Sink::Borrowed(stdout), header, true)
                .map_err(io_err(stdout_path))?;
            Ok((w, 0))
        }
        Some(path) => {
            let done = if resume && path.exists() {
                completed_rows(path, header)?
            } else {
                None
            };
            match done {
                Some(rows) => {
                    let f = OpenOptions::new()
                        .append(true)
                        .open(path)
                        .map_err(io_err(path))?;
                    Ok((
                        CsvWriter::new(Sink::File(f), header, false).map_err(io_err(path))?,
                        rows,
                    ))
                }
                None => {
                    let f = File::create(path).map_err(io_err(path))?;
                    Ok((
                        CsvWriter::new(Sink::File(f), header, true).map_err(io_err(path))?,
                        0,
                    ))
                }
            }
        }
    }
}

/// Number of complete data rows in an existing output, or `None` if empty.
fn completed_rows(path: &Path, header: &[&str]) -> Result<Option<usize>> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(f).lines();
    let first = match lines.next() {
        None => return Ok(None),
        Some(l) => l.map_err(io_err(path))?,
    };
    if first != header.join(",") {
        return Err(CasimirError::Config(format!(
            "cannot resume {}: header does not match this command",
            path.display()
        )));
    }
    let mut rows = 0;
    for l in lines {
        let l = l.map_err(io_err(path))?;
        if l.split(',').count() == header.len() {
            rows += 1;
        }
    }
    Ok(Some(rows))
}

fn warn_proximity(geom: &ThermalGeometry, err: &mut dyn Write) {
    if geom.proximity_warning() {
        let _ = writeln!(
            err,
            "warning: a/R = {:.3} exceeds the proximity-force validity limit",
            geom.a / geom.radius.unwrap_or(f64::INFINITY)
        );
    }
}

fn force_row(
    geom: &ThermalGeometry,
    m1: &DispersionModel,
    m2: &DispersionModel,
    opts: &EngineOptions,
) -> Result<Vec<String>> {
    let r = match geom.radius {
        Some(_) => sphere_plate_force(geom, m1, m2, opts)?,
        None => free_energy_area(geom, m1, m2, opts)?,
    };
    Ok(vec![
        format_float(geom.a),
        format_float(geom.t),
        format_float(r.value),
        r.terms_used.to_string(),
        format_float(r.tail_estimate),
    ])
}

fn force_header(radius: bool) -> [&'static str; 5] {
    if radius {
        [
            "gap_m",
            "temperature_K",
            "force_N",
            "terms_used",
            "tail_estimate_N",
        ]
    } else {
        [
            "gap_m",
            "temperature_K",
            "free_energy_J_per_m2",
            "terms_used",
            "tail_estimate_J_per_m2",
        ]
    }
}

fn geometry(a: f64, radius: Option<f64>, t: f64) -> Result<ThermalGeometry> {
    match radius {
        Some(r) => ThermalGeometry::sphere_plate(a, r, t),
        None => ThermalGeometry::plates(a, t),
    }
}

fn run_force(args: &ForceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let m1 = material(&args.materials.material_sphere, err)?;
    let m2 = material(&args.materials.material_plate, err)?;
    let radius = args.radius.as_deref().map(parse_length).transpose()?;
    let geom = geometry(
        parse_length(&args.gap)?,
        radius,
        parse_temperature(&args.temperature)?,
    )?;
    let opts = args.numeric.options(EngineOptions::default())?;
    warn_proximity(&geom, err);
    let (mut w, _) = open_csv(&args.output, out, &force_header(radius.is_some()), false)?;
    let row = force_row(&geom, &m1, &m2, &opts)?;
    w.row(&row).map_err(io_err(Path::new("output")))
}

fn run_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let m1 = material(&args.materials.material_sphere, err)?;
    let m2 = material(&args.materials.material_plate, err)?;
    let radius = args.radius.as_deref().map(parse_length).transpose()?;
    let opts = args.numeric.options(EngineOptions::default())?;
    let (variable, values, base) =
        match args.variable {
            Variable::Gap => {
                let t = args.temperature.as_deref().ok_or_else(|| {
                    CasimirError::Config("gap sweeps require --temperature".into())
                })?;
                let values = grid(
                    parse_length(&args.from)?,
                    parse_length(&args.to)?,
                    args.points,
                    args.scale,
                )?;
                (
                    SweepVariable::Gap,
                    values.clone(),
                    geometry(values[0], radius, parse_temperature(t)?)?,
                )
            }
            Variable::Temperature => {
                let a = args.gap.as_deref().ok_or_else(|| {
                    CasimirError::Config("temperature sweeps require --gap".into())
                })?;
                let values = grid(
                    parse_temperature(&args.from)?,
                    parse_temperature(&args.to)?,
                    args.points,
                    args.scale,
                )?;
                (
                    SweepVariable::Temperature,
                    values.clone(),
                    geometry(parse_length(a)?, radius, values[0])?,
                )
            }
        };
    let spec = crate::thermo::SweepSpec::new(variable, values, base)?;
    let (mut w, done) = open_csv(
        &args.output,
        out,
        &force_header(radius.is_some()),
        args.resume,
    )?;
    let mut warned = false;
    for &v in spec.grid.iter().skip(done) {
        let g = spec.geometry_at(v)?;
        if !warned && g.proximity_warning() {
            warn_proximity(&g, err);
            warned = true;
        }
        let row = force_row(&g, &m1, &m2, &opts)?;
        w.row(&row).map_err(io_err(Path::new("output")))?;
    }
    Ok(())
}

fn run_diff(args: &DiffArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let m1 = material(&args.materials.material_sphere, err)?;
    let m2 = material(&args.materials.material_plate, err)?;
    let a = parse_length(&args.gap)?;
    let r = parse_length(&args.radius)?;
    let t1 = parse_temperature(&args.t1)?;
    let t2 = parse_temperature(&args.t2)?;
    if t2 <= t1 {
        return Err(CasimirError::Config("--t2 must exceed --t1".into()));
    }
    let opts = args.numeric.options(EngineOptions::default())?;
    let low = ThermalGeometry::sphere_plate(a, r, t1)?;
    warn_proximity(&low, err);
    let f1 = sphere_plate_force(&low, &m1, &m2, &opts)?;
    let f2 = sphere_plate_force(&low.with_temperature(t2)?, &m1, &m2, &opts)?;
    let header = [
        "gap_m",
        "t1_K",
        "t2_K",
        "force_t1_N",
        "force_t2_N",
        "delta_abs_force_N",
    ];
    let (mut w, _) = open_csv(&args.output, out, &header, false)?;
    w.row(&[
        format_float(a),
        format_float(t1),
        format_float(t2),
        format_float(f1.value),
        format_float(f2.value),
        format_float(f1.magnitude() - f2.magnitude()),
    ])
    .map_err(io_err(Path::new("output")))
}

fn temperature_grid(g: &GridArgs) -> Result<Vec<f64>> {
    grid(
        parse_temperature(&g.from)?,
        parse_temperature(&g.to)?,
        g.points,
        g.scale,
    )
}

fn run_entropy(args: &EntropyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let m1 = material(&args.materials.material_sphere, err)?;
    let m2 = material(&args.materials.material_plate, err)?;
    let a = parse_length(&args.gap)?;
    let temps = temperature_grid(&args.grid)?;
    let opts = DerivativeOptions {
        step: args.step.as_deref().map(parse_temperature).transpose()?,
        engine: args.numeric.options(EngineOptions::for_entropy())?,
        ..Default::default()
    };
    let header = [
        "temperature_K",
        "entropy_J_per_K_m2",
        "error_estimate_J_per_K_m2",
        "step_K",
        "flagged",
    ];
    let (mut w, _) = open_csv(&args.output, out, &header, false)?;
    for &t in &temps {
        let s = entropy_area(a, &m1, &m2, t, &opts)?;
        w.row(&[
            format_float(t),
            format_float(s.value),
            format_float(s.error),
            format_float(s.step),
            s.flagged.to_string(),
        ])
        .map_err(io_err(Path::new("output")))?;
    }
    Ok(())
}

fn run_aniso(args: &AnisoArgs, out: &mut dyn Write) -> Result<()> {
    let omega0 = args
        .omega0
        .as_deref()
        .map(|s| parse_frequency(s, EvConversion::Rounded))
        .transpose()?;
    let cfg = AnisoPairConfig::new(parse_length(&args.separation)?, args.alpha0, omega0)?;
    let temps = temperature_grid(&args.grid)?;
    let opts = DerivativeOptions {
        engine: EngineOptions::default().with_tol(positive("--tol", args.tol)?),
        ..Default::default()
    };
    let header = [
        "temperature_K",
        "tau1",
        "free_energy_J",
        "entropy_J_per_K",
        "terms_used",
    ];
    let (mut w, _) = open_csv(&args.output, out, &header, false)?;
    for &t in &temps {
        let f = pair_free_energy(&cfg, t, args.tol)?;
        let s = pair_entropy(&cfg, t, &opts)?;
        w.row(&[
            format_float(t),
            format_float(tau(1, cfg.r, t)),
            format_float(f.value),
            format_float(s.value),
            f.terms_used.to_string(),
        ])
        .map_err(io_err(Path::new("output")))?;
    }
    Ok(())
}

fn run_epsilon(args: &EpsilonArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let m = material(&args.material, err)?;
    if m.is_ideal() {
        return Err(CasimirError::Config(format!(
            "model {m} has no finite permittivity"
        )));
    }
    let lo = parse_frequency(&args.from, EvConversion::Rounded)?;
    let hi = parse_frequency(&args.to, EvConversion::Rounded)?;
    let zetas = grid(lo, hi, args.points, Scale::Log)?;
    let t = parse_temperature(&args.temperature)?;
    let (mut w, _) = open_csv(&args.output, out, &["zeta_radps", "eps"], false)?;
    for &z in &zetas {
        let e = m.eps_at(z, t)?;
        w.row(&[format_float(z), format_float(e)])
            .map_err(io_err(Path::new("output")))?;
    }
    Ok(())
}

fn thread_count(cli: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = cli {
        return if n == 0 {
            Err(CasimirError::Config("--threads must be at least 1".into()))
        } else {
            Ok(Some(n))
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CasimirError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let body = |out: &mut dyn Write, err: &mut dyn Write| match &cli.command {
        Command::Force(a) => run_force(a, out, err),
        Command::Sweep(a) => run_sweep(a, out, err),
        Command::Diff(a) => run_diff(a, out, err),
        Command::Entropy(a) => run_entropy(a, out, err),
        Command::Aniso(a) => run_aniso(a, out),
        Command::Epsilon(a) => run_epsilon(a, out, err),
    };
    if let Some(n) = thread_count(cli.threads)? {
        let configured = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok();
        if !configured && rayon::current_num_threads() != n {
            let _ = writeln!(
                err,
                "warning: thread pool already running with {} threads",
                rayon::current_num_threads()
            );
        }
    }
    body(out, err)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
