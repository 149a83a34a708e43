//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! Integrands may be vector valued (`[f64; N]`) so that several channels
//! sharing the same abscissae (TM and TE, for instance) are integrated in
//! one pass. Subdivision always bisects the interval with the largest
//! error estimate, first one wins on ties, so results are deterministic.

use crate::error::{CasimirError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// 7-point Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 400,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evaluations: usize,
}

impl<const N: usize> QuadResult<N> {
    pub fn total(&self) -> f64 {
        self.value.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: f64,
    resabs: f64,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

fn gk15<const N: usize, F>(f: &F, lo: f64, hi: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);

    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs_k = 0.0;
    let mut fv = [[0.0; N]; 15];
    fv[14] = fc;
    for c in 0..N {
        kronrod[c] = fc[c] * WGK[7];
        gauss[c] = fc[c] * WG[3];
        abs_k += (fc[c] * WGK[7]).abs();
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        for c in 0..N {
            kronrod[c] += WGK[j] * (f1[c] + f2[c]);
            abs_k += WGK[j] * (f1[c].abs() + f2[c].abs());
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * (f1[c] + f2[c]);
            }
        }
    }

    // resasc: Kronrod-weighted deviation from the mean, summed over channels.
    let mut resasc = 0.0;
    for c in 0..N {
        let mean = 0.5 * kronrod[c];
        let mut asc = WGK[7] * (fc[c] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((fv[2 * j][c] - mean).abs() + (fv[2 * j + 1][c] - mean).abs());
        }
        resasc += asc * half.abs();
    }

    let mut value = [0.0; N];
    let mut diff = 0.0;
    for c in 0..N {
        value[c] = kronrod[c] * half;
        diff += ((kronrod[c] - gauss[c]) * half).abs();
    }
    let resabs = abs_k * half.abs();
    Panel {
        lo,
        hi,
        value,
        error: rescale_error(diff, resabs, resasc),
        resabs,
    }
}

/// Integrates a vector-valued `f` over `[lo, hi]`.
///
/// Converges when the summed error estimate is below
/// `max(abs_tol, rel_tol·|Σ value|)`, or at the floating-point floor.
pub fn integrate_vec<const N: usize, F>(
    f: F,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if lo == hi {
        return Ok(QuadResult {
            value: [0.0; N],
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut panels: Vec<Panel<N>> = vec![gk15(&f, lo, hi)];
    let mut evaluations = 15;

    loop {
        let mut value = [0.0; N];
        let mut error = 0.0;
        let mut resabs = 0.0;
        for p in &panels {
            for (v, pv) in value.iter_mut().zip(p.value) {
                *v += pv;
            }
            error += p.error;
            resabs += p.resabs;
        }
        let total: f64 = value.iter().sum();
        let target = opts
            .abs_tol
            .max(opts.rel_tol * total.abs())
            .max(100.0 * f64::EPSILON * resabs);
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if panels.len() >= opts.max_intervals {
            return Err(CasimirError::QuadratureNonConvergence {
                lo,
                hi,
                estimate: total,
                error,
            });
        }

        let (worst, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                    if p.error > be {
                        (i, p.error)
                    } else {
                        (bi, be)
                    }
                });
        let p = panels[worst];
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            // Interval no longer divisible in floating point.
            return Err(CasimirError::QuadratureNonConvergence {
                lo,
                hi,
                estimate: total,
                error,
            });
        }
        panels[worst] = gk15(&f, p.lo, mid);
        panels.insert(worst + 1, gk15(&f, mid, p.hi));
        evaluations += 30;
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x| [f(x)], lo, hi, opts)?;
    Ok((r.value[0], r.error))
}
