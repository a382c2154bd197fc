//! Parallel drivers over replicas and grid nodes.
//!
//! Work items are indexed by replica or node and collected in index order,
//! so every result is identical to the sequential core routine whatever the
//! thread count.

use jacobi_spectra_core::ensemble::{sample_replica, CoefficientDistribution, CoefficientSequence};
use jacobi_spectra_core::measures::{GridSpec, PotentialGrid, PotentialKind};
use jacobi_spectra_core::spectra::{build_jacobi, build_periodic, eigenvalues, JacobiMatrix, SpectralSample};
use jacobi_spectra_core::transfer::{replica_growth, LyapunovEstimate, LyapunovMethod, MIN_LYAPUNOV_STEPS};
use jacobi_spectra_core::{Complex64, Error, Result};
use rayon::prelude::*;

use crate::config::BoundaryKind;

/// Run `f` on a pool with `threads` workers, or every logical core.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> std::io::Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    let pool = b.build().map_err(std::io::Error::other)?;
    Ok(pool.install(f))
}

/// Same result as `transfer::lyapunov`, with replicas in parallel.
pub fn lyapunov(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    replicas: usize,
    seed: u64,
    method: LyapunovMethod,
) -> Result<LyapunovEstimate> {
    if n < MIN_LYAPUNOV_STEPS {
        return Err(Error::InvalidArgument(format!(
            "n = {n} is below the minimum of {MIN_LYAPUNOV_STEPS} steps"
        )));
    }
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be at least 1".into()));
    }
    let growth = (0..replicas as u64)
        .into_par_iter()
        .map(|r| replica_growth(dist, z, n, seed, r, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(LyapunovEstimate::from_replicas(method, n, &growth))
}

/// Estimates at many points, same seed at each.
pub fn lyapunov_at(
    dist: &CoefficientDistribution,
    points: &[Complex64],
    n: usize,
    replicas: usize,
    seed: u64,
    method: LyapunovMethod,
) -> Result<Vec<LyapunovEstimate>> {
    points
        .par_iter()
        .map(|&z| lyapunov(dist, z, n, replicas, seed, method))
        .collect()
}

/// Same result as `measures::gamma_field`, nodes in parallel.
pub fn gamma_field(
    dist: &CoefficientDistribution,
    spec: GridSpec,
    n: usize,
    replicas: usize,
    seed: u64,
    method: LyapunovMethod,
) -> Result<(PotentialGrid, Vec<LyapunovEstimate>)> {
    let nodes: Vec<Complex64> = spec.nodes().collect();
    let est = lyapunov_at(dist, &nodes, n, replicas, seed, method)?;
    let values = est.iter().map(|e| e.gamma1).collect();
    let grid = PotentialGrid::from_values(spec, PotentialKind::GammaField, Complex64::new(0.0, 0.0), values)?;
    Ok((grid, est))
}

pub fn build_matrix(seq: &CoefficientSequence, n: usize, boundary: BoundaryKind) -> Result<JacobiMatrix> {
    match boundary {
        BoundaryKind::Dirichlet => build_jacobi(seq, n),
        BoundaryKind::Periodic => build_periodic(seq, n),
    }
}

/// One sampled replica: matrix and spectrum.
#[derive(Debug, Clone)]
pub struct Replica {
    pub index: u64,
    pub matrix: JacobiMatrix,
    pub spectrum: SpectralSample,
}

/// Matrices for `streams` of `seed`, each `n × n`, spectra in parallel.
pub fn spectra(
    dist: &CoefficientDistribution,
    n: usize,
    streams: &[u64],
    seed: u64,
    boundary: BoundaryKind,
) -> Result<Vec<Replica>> {
    streams
        .par_iter()
        .map(|&r| {
            let seq = sample_replica(dist, n, seed, r)?;
            let matrix = build_matrix(&seq, n, boundary)?;
            let spectrum = eigenvalues(&matrix)?;
            Ok(Replica {
                index: r,
                matrix,
                spectrum,
            })
        })
        .collect()
}
