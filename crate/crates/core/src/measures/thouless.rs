use alloc::vec::Vec;

use num_complex::Complex64;

use super::{log_potential, EmpiricalMeasure, PotentialGrid};
use crate::{Error, Result};

/// Residual `γ(z) - (∫ log|w - z| dμ(w) - E log|c_1|)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThoulessPoint {
    pub z: Complex64,
    pub gamma: f64,
    pub potential: f64,
    /// `NaN` when skipped.
    pub residual: f64,
    /// Too close to an atom, or outside the γ grid.
    pub skipped: bool,
}

/// Residuals with `γ` read off a grid by bilinear interpolation. Points
/// closer than two grid cells to an atom are skipped.
pub fn thouless_residual(
    gamma_field: &PotentialGrid,
    m: &EmpiricalMeasure,
    e_log_c: f64,
    test_points: &[Complex64],
) -> Vec<ThoulessPoint> {
    let min_distance = 2.0 * gamma_field.spec.hx().max(gamma_field.spec.hy());
    test_points
        .iter()
        .map(|&z| {
            let gamma = gamma_field.interpolate(z);
            evaluate(z, gamma, m, e_log_c, min_distance)
        })
        .collect()
}

/// Residuals for `γ` values computed directly at the test points.
pub fn thouless_residual_at(
    gamma: &[f64],
    m: &EmpiricalMeasure,
    e_log_c: f64,
    test_points: &[Complex64],
    min_distance: f64,
) -> Result<Vec<ThoulessPoint>> {
    if gamma.len() != test_points.len() {
        return Err(Error::InvalidArgument("one gamma value per test point is required".into()));
    }
    Ok(test_points
        .iter()
        .zip(gamma)
        .map(|(&z, &g)| evaluate(z, Some(g).filter(|g| g.is_finite()), m, e_log_c, min_distance))
        .collect())
}

fn evaluate(z: Complex64, gamma: Option<f64>, m: &EmpiricalMeasure, e_log_c: f64, min_distance: f64) -> ThoulessPoint {
    let potential = log_potential(m, z);
    match gamma {
        Some(g) if m.distance_to(z) >= min_distance => ThoulessPoint {
            z,
            gamma: g,
            potential,
            residual: g - (potential - e_log_c),
            skipped: false,
        },
        _ => ThoulessPoint {
            z,
            gamma: gamma.unwrap_or(f64::NAN),
            potential,
            residual: f64::NAN,
            skipped: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_points_near_atoms() {
        let m = EmpiricalMeasure::from_points(alloc::vec![Complex64::new(0.0, 0.0)]).unwrap();
        let pts = [Complex64::new(0.01, 0.0), Complex64::new(2.0, 0.0)];
        let r = thouless_residual_at(&[0.0, 2f64.ln()], &m, 0.0, &pts, 0.1).unwrap();
        assert!(r[0].skipped && r[0].residual.is_nan());
        assert!(!r[1].skipped);
        assert!(r[1].residual.abs() < 1e-15);
    }
}
