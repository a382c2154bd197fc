use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{log_potential, EmpiricalMeasure};
use crate::rng::{mix_seed, substream};
use crate::stats::RunningStats;
use crate::{Error, Result};

/// Cells per axis of the smoothing grid.
pub const CONVERGENCE_GRID: usize = 128;
/// Fixed random points at which potentials are compared.
pub const CONVERGENCE_PROBES: usize = 100;

const TRUNCATION: f64 = 4.0;
const PROBE_TAG: u64 = 0x636f_6e76_6572_6765;

/// Comparison of two consecutive measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_small: usize,
    pub n_large: usize,
    /// `n_min^{-1/4} · diameter`, the same on every row.
    pub sigma: f64,
    /// L¹ distance between the smoothed cell masses, in `[0, 2]`.
    pub distance: f64,
    /// Mean of `|p_small(z) - p_large(z)|` over the probe points.
    pub mean_potential_gap: f64,
    pub max_potential_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Diameter of the union of supports, floored at 1.
    pub diameter: f64,
    /// Probe points shared by every row.
    pub probes: Vec<Complex64>,
    /// Distances are non-increasing down the table.
    pub decreasing: bool,
}

/// Distances between consecutive measures, ordered by increasing `n`.
///
/// Each measure is smoothed with a Gaussian of bandwidth
/// `σ = n_min^{-1/4} · diameter`, `n_min` the smallest size in the table,
/// truncated at `4σ`, binned on a
/// `CONVERGENCE_GRID²` grid over the joint bounding box padded by `4σ`, and
/// the L¹ distance of the binned masses is reported. Potentials are also
/// compared at `CONVERGENCE_PROBES` points drawn from `probe_seed`.
pub fn convergence_diagnostic(measures: &[EmpiricalMeasure], probe_seed: u64) -> Result<ConvergenceTable> {
    if measures.len() < 2 {
        return Err(Error::InvalidArgument("need at least two measures".into()));
    }
    if measures.windows(2).any(|w| w[1].n() < w[0].n()) {
        return Err(Error::InvalidArgument("measures must be ordered by increasing n".into()));
    }
    let (mut lo, mut hi) = measures[0].bounding_box();
    for m in &measures[1..] {
        let (l, h) = m.bounding_box();
        lo = Complex64::new(lo.re.min(l.re), lo.im.min(l.im));
        hi = Complex64::new(hi.re.max(h.re), hi.im.max(h.im));
    }
    let diameter = (hi - lo).norm().max(1.0);
    let probes = probe_points(lo, hi, diameter, probe_seed);
    let sigma = diameter * (measures[0].n() as f64).powf(-0.25);
    let pad = TRUNCATION * sigma;
    let window = Window::new(lo - Complex64::new(pad, pad), hi + Complex64::new(pad, pad));
    let rows: Vec<ConvergenceRow> = measures
        .windows(2)
        .map(|w| {
            let a = window.smoothed(&w[0], sigma);
            let b = window.smoothed(&w[1], sigma);
            let distance = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
            let gaps: Vec<f64> = probes
                .iter()
                .map(|&z| (log_potential(&w[0], z) - log_potential(&w[1], z)).abs())
                .collect();
            let finite: Vec<f64> = gaps.iter().copied().filter(|g| g.is_finite()).collect();
            ConvergenceRow {
                n_small: w[0].n(),
                n_large: w[1].n(),
                sigma,
                distance,
                mean_potential_gap: if finite.is_empty() {
                    f64::NAN
                } else {
                    finite.iter().sum::<f64>() / finite.len() as f64
                },
                max_potential_gap: gaps.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(ConvergenceTable {
        decreasing: rows.windows(2).all(|w| w[1].distance <= w[0].distance),
        rows,
        diameter,
        probes,
    })
}

/// Mean of one row over independent ladders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSummaryRow {
    pub n_small: usize,
    pub n_large: usize,
    pub mean_sigma: f64,
    pub mean_distance: f64,
    /// Zero for a single table.
    pub distance_std_error: f64,
    pub mean_potential_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSummary {
    pub rows: Vec<ConvergenceSummaryRow>,
    pub replicas: usize,
    /// Mean distances are non-increasing down the table.
    pub decreasing: bool,
}

/// Average tables computed on independent replicas with the same sizes.
pub fn summarize_convergence(tables: &[ConvergenceTable]) -> Result<ConvergenceSummary> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one table".into()))?;
    let sizes = |t: &ConvergenceTable| t.rows.iter().map(|r| (r.n_small, r.n_large)).collect::<Vec<_>>();
    if tables.iter().any(|t| sizes(t) != sizes(first)) {
        return Err(Error::InvalidArgument("tables must share their sizes".into()));
    }
    let rows: Vec<ConvergenceSummaryRow> = (0..first.rows.len())
        .map(|k| {
            let mut sigma = RunningStats::new();
            let mut dist = RunningStats::new();
            let mut gap = RunningStats::new();
            for t in tables {
                sigma.push(t.rows[k].sigma);
                dist.push(t.rows[k].distance);
                gap.push(t.rows[k].mean_potential_gap);
            }
            ConvergenceSummaryRow {
                n_small: first.rows[k].n_small,
                n_large: first.rows[k].n_large,
                mean_sigma: sigma.mean(),
                mean_distance: dist.mean(),
                distance_std_error: dist.std_error(),
                mean_potential_gap: gap.mean(),
            }
        })
        .collect();
    Ok(ConvergenceSummary {
        decreasing: rows.windows(2).all(|w| w[1].mean_distance <= w[0].mean_distance),
        rows,
        replicas: tables.len(),
    })
}

fn probe_points(lo: Complex64, hi: Complex64, diameter: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = substream(mix_seed(seed, PROBE_TAG), 0);
    let margin = 0.1 * diameter;
    let (x0, x1) = (lo.re - margin, hi.re + margin);
    let (y0, y1) = (lo.im - margin, hi.im + margin);
    (0..CONVERGENCE_PROBES)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            Complex64::new(x0 + u * (x1 - x0), y0 + v * (y1 - y0))
        })
        .collect()
}

struct Window {
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
}

impl Window {
    fn new(lo: Complex64, hi: Complex64) -> Self {
        let k = CONVERGENCE_GRID as f64;
        Window {
            x0: lo.re,
            y0: lo.im,
            hx: (hi.re - lo.re) / k,
            hy: (hi.im - lo.im) / k,
        }
    }

    /// Cell masses of `m * N(0, σ² I)`, row-major.
    fn smoothed(&self, m: &EmpiricalMeasure, sigma: f64) -> Vec<f64> {
        let k = CONVERGENCE_GRID;
        let mut out = alloc::vec![0.0; k * k];
        let mut wx = Vec::with_capacity(k);
        let mut wy = Vec::with_capacity(k);
        for (z, weight) in m.atoms() {
            let (ix0, ix1) = cell_factors(z.re, sigma, self.x0, self.hx, &mut wx);
            let (iy0, iy1) = cell_factors(z.im, sigma, self.y0, self.hy, &mut wy);
            for iy in iy0..iy1 {
                let fy = weight * wy[iy - iy0];
                let row = &mut out[iy * k..(iy + 1) * k];
                for ix in ix0..ix1 {
                    row[ix] += fy * wx[ix - ix0];
                }
            }
        }
        out
    }
}

/// Masses of the 1D Gaussian centred at `c` in cells `[x0 + i h, x0 + (i+1) h]`
/// within `4σ` of `c`. Degenerate axes (`h = 0`) put everything in cell 0.
fn cell_factors(c: f64, sigma: f64, x0: f64, h: f64, out: &mut Vec<f64>) -> (usize, usize) {
    out.clear();
    let k = CONVERGENCE_GRID;
    if h <= 0.0 {
        out.push(1.0);
        return (0, 1);
    }
    let cell = |x: f64| ((x - x0) / h).floor().clamp(0.0, (k - 1) as f64) as usize;
    let i0 = cell(c - TRUNCATION * sigma);
    let i1 = cell(c + TRUNCATION * sigma) + 1;
    let scale = 1.0 / (sigma * core::f64::consts::SQRT_2);
    let cdf = |x: f64| 0.5 * libm::erf((x - c) * scale);
    for i in i0..i1 {
        let a = x0 + i as f64 * h;
        out.push(cdf(a + h) - cdf(a));
    }
    (i0, i1)
}
