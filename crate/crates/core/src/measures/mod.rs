//! Eigenvalue counting measures and the quantities built on them:
//! log-potentials, Laplacian densities of potential grids, Thouless
//! residuals, tail functionals, log-Hölder profiles and smoothed-distance
//! convergence tables.

mod convergence;
mod grid;
mod thouless;

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub use convergence::{
    convergence_diagnostic, summarize_convergence, ConvergenceRow, ConvergenceSummary, ConvergenceSummaryRow,
    ConvergenceTable, CONVERGENCE_GRID, CONVERGENCE_PROBES,
};
pub use grid::{
    gamma_field, laplacian_density, potential_grid, DensityGrid, GridSpec, PotentialGrid, PotentialKind,
    COLLISION_LIMIT, POSITIVITY_TOLERANCE,
};
pub use thouless::{thouless_residual, thouless_residual_at, ThoulessPoint};

use crate::spectra::SpectralSample;
use crate::{Error, Result};

/// Atoms with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<Complex64>,
    weights: Vec<f64>,
    seed: Option<u64>,
    stream: Option<u64>,
}

impl EmpiricalMeasure {
    /// Equal weights `1/n`.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("a measure needs at least one atom".into()));
        }
        if !points.iter().all(|z| z.is_finite()) {
            return Err(Error::InvalidArgument("atoms must be finite".into()));
        }
        let w = 1.0 / points.len() as f64;
        Ok(EmpiricalMeasure {
            weights: alloc::vec![w; points.len()],
            points,
            seed: None,
            stream: None,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of atoms.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn stream(&self) -> Option<u64> {
        self.stream
    }

    pub fn atoms(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ weights`, one up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `(μ + ν) / 2`.
    pub fn merge(&self, other: &EmpiricalMeasure) -> EmpiricalMeasure {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let weights = self.weights.iter().chain(&other.weights).map(|w| 0.5 * w).collect();
        EmpiricalMeasure {
            points,
            weights,
            seed: None,
            stream: None,
        }
    }

    /// `μ(B_{z, r})` for the closed disk.
    pub fn disk_mass(&self, z: Complex64, r: f64) -> f64 {
        self.atoms().filter(|(w, _)| (w - z).norm() <= r).map(|(_, m)| m).sum()
    }

    /// `min_l |z_l - z|`.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.points.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Corners of the bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for z in &self.points {
            lo.re = lo.re.min(z.re);
            lo.im = lo.im.min(z.im);
            hi.re = hi.re.max(z.re);
            hi.im = hi.im.max(z.im);
        }
        (lo, hi)
    }
}

/// `μ_n = (1/n) Σ δ_{z_l}` over the sample's eigenvalues.
pub fn counting_measure(s: &SpectralSample) -> Result<EmpiricalMeasure> {
    let mut m = EmpiricalMeasure::from_points(s.eigenvalues.clone())?;
    m.seed = s.seed;
    m.stream = s.stream;
    Ok(m)
}

/// `∫ log|w - z| dμ(w)`; `-inf` when `z` is an atom.
pub fn log_potential(m: &EmpiricalMeasure, z: Complex64) -> f64 {
    let mut s = 0.0;
    for (w, mass) in m.atoms() {
        let d = (w - z).norm();
        if d == 0.0 {
            return f64::NEG_INFINITY;
        }
        s += mass * d.ln();
    }
    s
}

/// Tail functional over a family of measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFunctional {
    pub r: f64,
    /// Maximum over the measures: the finite-n surrogate for the limsup.
    pub value: f64,
    /// `∫_{|w|≥R} log|w| dμ` per measure, in input order.
    pub per_measure: Vec<f64>,
    /// Values are non-increasing in input order.
    pub non_increasing: bool,
}

/// `max_k ∫_{|w|≥R} log|w| dμ_k`.
pub fn tail_functional(measures: &[EmpiricalMeasure], r: f64) -> Result<TailFunctional> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("R must be at least 1".into()));
    }
    if measures.is_empty() {
        return Err(Error::InvalidArgument("need at least one measure".into()));
    }
    let per_measure: Vec<f64> = measures
        .iter()
        .map(|m| {
            m.atoms()
                .filter(|(w, _)| w.norm() >= r)
                .map(|(w, mass)| mass * w.norm().ln())
                .sum()
        })
        .collect();
    Ok(TailFunctional {
        r,
        value: per_measure.iter().copied().fold(0.0, f64::max),
        non_increasing: per_measure.windows(2).all(|w| w[1] <= w[0]),
        per_measure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderRow {
    pub delta: f64,
    /// `μ(B_{z0, δ})`.
    pub mass: f64,
    /// `∫_{|w - z0| ≤ δ} |log|w - z0|| dμ`; infinite when an atom sits at `z0`.
    pub c: f64,
    /// `C / log(1/δ)`.
    pub bound: f64,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderProfile {
    pub z0: Complex64,
    pub rows: Vec<HolderRow>,
    /// Number of steps along the δ list where `C` increased.
    pub c_increases: usize,
    /// An atom coincides with `z0`.
    pub atom_at_center: bool,
}

impl HolderProfile {
    pub fn all_bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| r.bound_ok)
    }
}

/// Evaluate `μ(B_{z0,δ}) ≤ C(z0,δ) / log(1/δ)` along a decreasing list of
/// radii in `(0, 1)`.
pub fn log_holder_profile(m: &EmpiricalMeasure, z0: Complex64, deltas: &[f64]) -> Result<HolderProfile> {
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::InvalidArgument("radii must lie in (0, 1)".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    let mut atom_at_center = false;
    let rows: Vec<HolderRow> = deltas
        .iter()
        .map(|&delta| {
            let mut mass = 0.0;
            let mut c = 0.0;
            for (w, weight) in m.atoms() {
                let d = (w - z0).norm();
                if d <= delta {
                    mass += weight;
                    if d == 0.0 {
                        atom_at_center = true;
                        c = f64::INFINITY;
                    } else {
                        c += weight * d.ln().abs();
                    }
                }
            }
            let bound = c / (1.0 / delta).ln();
            HolderRow {
                delta,
                mass,
                c,
                bound,
                bound_ok: mass <= bound + 1e-12,
            }
        })
        .collect();
    let c_increases = rows.windows(2).filter(|w| w[1].c > w[0].c).count();
    Ok(HolderProfile {
        z0,
        rows,
        c_increases,
        atom_at_center,
    })
}
