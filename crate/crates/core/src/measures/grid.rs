use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{log_potential, EmpiricalMeasure};
use crate::ensemble::CoefficientDistribution;
use crate::transfer::{lyapunov, LyapunovMethod};
use crate::{Error, Result};

/// Largest fraction of `-inf` nodes a density pass tolerates.
pub const COLLISION_LIMIT: f64 = 0.01;

/// Cell masses below `-POSITIVITY_TOLERANCE` fail a strict density pass.
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

/// Rectangle `[re0, re1] × [im0, im1]` sampled at `nx × ny` nodes including
/// the edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = GridSpec {
            re0,
            re1,
            im0,
            im1,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re0, self.re1, self.im0, self.im1].iter().all(|x| x.is_finite());
        if !finite || !(self.re1 > self.re0) || !(self.im1 > self.im0) {
            return Err(Error::InvalidArgument("grid rectangle must be finite and nonempty".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 nodes per axis".into()));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        (self.re1 - self.re0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.im1 - self.im0) / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `(ix, iy)` before any jitter.
    pub fn node(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.re0 + ix as f64 * self.hx(), self.im0 + iy as f64 * self.hy())
    }

    /// Nodes in row-major order (`iy` outer).
    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| self.node(ix, iy)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// Lyapunov exponent `γ(z)`.
    GammaField,
    /// Log-potential `p_n(z)` of an empirical measure.
    PnField,
}

impl PotentialKind {
    pub fn tag(&self) -> &'static str {
        match self {
            PotentialKind::GammaField => "gamma_field",
            PotentialKind::PnField => "p_n_field",
        }
    }
}

/// Values on the nodes of `spec` shifted by `offset`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub kind: PotentialKind,
    /// Shift applied to every node.
    pub offset: Complex64,
}

impl PotentialGrid {
    pub fn from_values(spec: GridSpec, kind: PotentialKind, offset: Complex64, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid has {} nodes but {} values were given",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidArgument("grid values must be finite or -inf".into()));
        }
        Ok(PotentialGrid {
            spec,
            values,
            kind,
            offset,
        })
    }

    pub fn from_fn(spec: GridSpec, kind: PotentialKind, offset: Complex64, f: impl FnMut(Complex64) -> f64) -> Result<Self> {
        spec.validate()?;
        let values = spec.nodes().map(|z| z + offset).map(f).collect();
        Self::from_values(spec, kind, offset, values)
    }

    pub fn node(&self, ix: usize, iy: usize) -> Complex64 {
        self.spec.node(ix, iy) + self.offset
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.spec.nx + ix]
    }

    /// Nodes holding the `-inf` sentinel.
    pub fn neg_inf_count(&self) -> usize {
        self.values.iter().filter(|v| **v == f64::NEG_INFINITY).count()
    }

    /// Bilinear interpolation; `None` outside the grid or next to `-inf`.
    pub fn interpolate(&self, z: Complex64) -> Option<f64> {
        let s = &self.spec;
        let x = (z.re - self.offset.re - s.re0) / s.hx();
        let y = (z.im - self.offset.im - s.im0) / s.hy();
        if !(x >= 0.0 && y >= 0.0 && x <= (s.nx - 1) as f64 && y <= (s.ny - 1) as f64) {
            return None;
        }
        let ix = (x.floor() as usize).min(s.nx - 2);
        let iy = (y.floor() as usize).min(s.ny - 2);
        let (fx, fy) = (x - ix as f64, y - iy as f64);
        let v00 = self.value(ix, iy);
        let v10 = self.value(ix + 1, iy);
        let v01 = self.value(ix, iy + 1);
        let v11 = self.value(ix + 1, iy + 1);
        if [v00, v10, v01, v11].iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11))
    }
}

/// `p_n` on the grid. When a node hits an atom exactly, the whole grid is
/// shifted by `(h_x + i h_y)/7` and evaluated again.
pub fn potential_grid(m: &EmpiricalMeasure, spec: GridSpec) -> Result<PotentialGrid> {
    let zero = Complex64::new(0.0, 0.0);
    let grid = PotentialGrid::from_fn(spec, PotentialKind::PnField, zero, |z| log_potential(m, z))?;
    if grid.neg_inf_count() == 0 {
        return Ok(grid);
    }
    let jitter = Complex64::new(spec.hx(), spec.hy()) / 7.0;
    PotentialGrid::from_fn(spec, PotentialKind::PnField, jitter, |z| log_potential(m, z))
}

/// `γ` on the grid from `method`, with the same seed at every node so that
/// neighbouring values share their coefficient draws.
pub fn gamma_field(
    dist: &CoefficientDistribution,
    spec: GridSpec,
    n: usize,
    replicas: usize,
    seed: u64,
    method: LyapunovMethod,
) -> Result<PotentialGrid> {
    let mut err = None;
    let grid = PotentialGrid::from_fn(spec, PotentialKind::GammaField, Complex64::new(0.0, 0.0), |z| {
        match lyapunov(dist, z, n, replicas, seed, method) {
            Ok(est) => est.gamma1,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => grid,
    }
}

/// Cell masses `(1/2π) Δ_h u · h_x h_y` from the five-point stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub offset: Complex64,
    /// Row-major; `None` on the boundary ring and next to `-inf` nodes.
    pub masses: Vec<Option<f64>>,
    /// Sum of all computed masses, negative ones included.
    pub total_mass: f64,
    /// Sum with negative masses clipped to zero.
    pub clipped_mass: f64,
    pub negative_cells: usize,
    pub min_mass: f64,
    /// Interior cells left out because their stencil touched `-inf`.
    pub excluded_cells: usize,
    pub neg_inf_nodes: usize,
}

impl DensityGrid {
    pub fn mass(&self, ix: usize, iy: usize) -> Option<f64> {
        self.masses[iy * self.spec.nx + ix]
    }
}

/// Discrete Laplacian of `g` as cell masses. With `strict`, any mass below
/// `-POSITIVITY_TOLERANCE` is an error.
pub fn laplacian_density(g: &PotentialGrid, strict: bool) -> Result<DensityGrid> {
    let s = g.spec;
    if s.nx < 3 || s.ny < 3 {
        return Err(Error::InvalidArgument("density needs at least 3 nodes per axis".into()));
    }
    let neg_inf_nodes = g.neg_inf_count();
    if neg_inf_nodes as f64 > COLLISION_LIMIT * s.len() as f64 {
        return Err(Error::GridCollisions {
            collisions: neg_inf_nodes,
            cells: s.len(),
        });
    }
    let (hx, hy) = (s.hx(), s.hy());
    let (wx, wy) = (hy / hx, hx / hy);
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut masses = alloc::vec![None; s.len()];
    let mut total_mass = 0.0;
    let mut clipped_mass = 0.0;
    let mut negative_cells = 0;
    let mut min_mass = f64::INFINITY;
    let mut excluded_cells = 0;
    let mut worst: Option<(usize, usize, f64)> = None;
    for iy in 1..s.ny - 1 {
        for ix in 1..s.nx - 1 {
            let u = g.value(ix, iy);
            let (w, e) = (g.value(ix - 1, iy), g.value(ix + 1, iy));
            let (so, no) = (g.value(ix, iy - 1), g.value(ix, iy + 1));
            if [u, w, e, so, no].iter().any(|v| !v.is_finite()) {
                excluded_cells += 1;
                continue;
            }
            // Δu · hx hy = (hy/hx)(w - 2u + e) + (hx/hy)(s - 2u + n)
            let mass = (wx * ((w - u) + (e - u)) + wy * ((so - u) + (no - u))) / two_pi;
            masses[iy * s.nx + ix] = Some(mass);
            total_mass += mass;
            clipped_mass += mass.max(0.0);
            if mass < -POSITIVITY_TOLERANCE {
                negative_cells += 1;
                if worst.is_none_or(|(_, _, m)| mass < m) {
                    worst = Some((ix, iy, mass));
                }
            }
            min_mass = min_mass.min(mass);
        }
    }
    if strict {
        if let Some((ix, iy, mass)) = worst {
            return Err(Error::NegativeDensity { ix, iy, mass });
        }
    }
    Ok(DensityGrid {
        spec: s,
        offset: g.offset,
        masses,
        total_mass,
        clipped_mass,
        negative_cells,
        min_mass,
        excluded_cells,
        neg_inf_nodes,
    })
}
