//! The subcommands. Each one turns a resolved config into in-memory output
//! files plus a JSON summary; [`run`] writes them and the manifest row.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use jacobi_spectra_core::ensemble::{
    check_moment_condition, check_support_condition, sample_replica, CoefficientDistribution, HatanoNelsonParams,
};
use jacobi_spectra_core::measures::{
    convergence_diagnostic, counting_measure, summarize_convergence, laplacian_density, log_holder_profile, tail_functional,
    thouless_residual_at, EmpiricalMeasure,
};
use jacobi_spectra_core::rng::mix_seed;
use jacobi_spectra_core::spectra::{eigenvalues, singular_values, tail_bounds};
use jacobi_spectra_core::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{BoundaryKind, ExperimentConfig};
use crate::error::CliError;
use crate::grid_io::write_grid;
use crate::output::{self, warning, Cell, Csv, Header, ManifestRow, Ndjson, OutputFile, SCHEMA_VERSION};
use crate::parallel::{self, with_threads};

const MOMENT_SAMPLES: usize = 100_000;
const MOMENT_TAG: u64 = 0x6d6f_6d65_6e74;
const EXPECTATION_TAG: u64 = 0x656c_6f67_63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SampleSpectrum,
    LyapunovMap,
    ThoulessCheck,
    HolderProfile,
    ConvergenceStudy,
    HnDemo,
    TailBounds,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::SampleSpectrum,
        Subcommand::LyapunovMap,
        Subcommand::ThoulessCheck,
        Subcommand::HolderProfile,
        Subcommand::ConvergenceStudy,
        Subcommand::HnDemo,
        Subcommand::TailBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::SampleSpectrum => "sample-spectrum",
            Subcommand::LyapunovMap => "lyapunov-map",
            Subcommand::ThoulessCheck => "thouless-check",
            Subcommand::HolderProfile => "holder-profile",
            Subcommand::ConvergenceStudy => "convergence-study",
            Subcommand::HnDemo => "hn-demo",
            Subcommand::TailBounds => "tail-bounds",
        }
    }
}

/// Files and summary of one subcommand, not yet written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    pub summary: Value,
    pub warnings: Vec<Value>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: RunOutput,
    pub written: Vec<PathBuf>,
    pub config_hash: String,
    pub wall_time_s: f64,
}

/// Validate the config and check the standing assumptions on the law.
/// A law with one-point support only produces a warning.
pub fn preflight(cfg: &ExperimentConfig) -> Result<(CoefficientDistribution, Vec<Value>), CliError> {
    cfg.validate()?;
    let dist = cfg.distribution.build()?;
    let mut warnings = Vec::new();
    let moments = check_moment_condition(&dist, 1.0, MOMENT_SAMPLES, mix_seed(cfg.seed, MOMENT_TAG))?;
    if !moments.satisfied {
        if moments.exact {
            return Err(CliError::config(
                "moment assumption A2 fails: E(|a|+|1/a|+|b|+|c|+|1/c|) is infinite",
            ));
        }
        warnings.push(warning(
            "A2",
            "moment assumption A2 looks violated: running Monte Carlo means of |a|^±1, |b|, |c|^±1 keep growing",
        ));
    }
    let support = check_support_condition(&dist);
    if !support.satisfied {
        warnings.push(warning(
            "A3",
            "assumption A3 fails: the coefficient law is supported on a single triple, so positivity of the \
             Lyapunov exponent and simplicity of the Lyapunov spectrum are not guaranteed",
        ));
    } else if !support.verified {
        warnings.push(warning("A3", "assumption A3 is declared by the custom law, not verified"));
    }
    Ok((dist, warnings))
}

/// Compute the outputs of `cmd` on a pool of `cfg.threads` workers.
pub fn execute(cmd: Subcommand, cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let (dist, warnings) = preflight(cfg)?;
    let hash = cfg.config_hash();
    let run = || match cmd {
        Subcommand::SampleSpectrum => sample_spectrum(cfg, &dist, &hash),
        Subcommand::LyapunovMap => lyapunov_map(cfg, &dist, &hash),
        Subcommand::ThoulessCheck => thouless_check(cfg, &dist, &hash),
        Subcommand::HolderProfile => holder_profile(cfg, &dist, &hash),
        Subcommand::ConvergenceStudy => convergence_study(cfg, &dist, &hash),
        Subcommand::HnDemo => hn_demo(cfg, &hash),
        Subcommand::TailBounds => tail_bounds_cmd(cfg, &dist, &hash),
    };
    let (files, summary) = with_threads(cfg.threads, run).map_err(|e| CliError::io(Path::new("<thread pool>"), e))??;
    Ok(RunOutput {
        files,
        summary,
        warnings,
    })
}

/// Execute and write the files and manifest row under `out_dir`.
pub fn run(cmd: Subcommand, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let output = execute(cmd, cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let config_hash = cfg.config_hash();
    let row = ManifestRow {
        subcommand: cmd.name().to_string(),
        files: output.files.iter().map(|f| f.name.clone()).collect(),
        schema_version: SCHEMA_VERSION,
        config_hash: config_hash.clone(),
        version: output::version().to_string(),
        wall_time_s,
        threads: cfg.threads.unwrap_or_else(rayon::current_num_threads),
        warnings: output.warnings.clone(),
        summary: output.summary.clone(),
        config: serde_json::from_str(&cfg.canonical_json()).expect("canonical config is JSON"),
    };
    let written = output::commit(out_dir, &output.files, &row)?;
    Ok(RunReport {
        output,
        written,
        config_hash,
        wall_time_s,
    })
}

type Produced = Result<(Vec<OutputFile>, Value), CliError>;

fn streams(count: usize) -> Vec<u64> {
    (0..count as u64).collect()
}

fn boundary_tag(b: BoundaryKind) -> &'static str {
    match b {
        BoundaryKind::Dirichlet => "dirichlet",
        BoundaryKind::Periodic => "periodic",
    }
}

#[derive(Serialize)]
struct EigenRow<'a> {
    kind: &'a str,
    boundary: &'a str,
    replica: u64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SpectrumSummaryRow<'a> {
    kind: &'a str,
    boundary: &'a str,
    replica: u64,
    n: usize,
    spectral_radius: f64,
    max_abs_imag: f64,
    residual_bound: f64,
    trace_residual: f64,
    log_det_residual: f64,
    real_within_tolerance: bool,
}

fn spectrum_summary<'a>(r: &parallel::Replica, boundary: &'a str, imag_tol: f64) -> SpectrumSummaryRow<'a> {
    let s = &r.spectrum;
    let radius = s.spectral_radius();
    SpectrumSummaryRow {
        kind: "summary",
        boundary,
        replica: r.index,
        n: s.n(),
        spectral_radius: radius,
        max_abs_imag: s.max_abs_imag(),
        residual_bound: s.residual_bound,
        trace_residual: s.trace_defect,
        log_det_residual: s.log_det_defect,
        real_within_tolerance: s.max_abs_imag() <= imag_tol * radius.max(1.0),
    }
}

fn sample_spectrum(cfg: &ExperimentConfig, dist: &CoefficientDistribution, hash: &str) -> Produced {
    let reps = parallel::spectra(dist, cfg.n, &streams(cfg.replicas), cfg.seed, cfg.boundary)?;
    let boundary = boundary_tag(cfg.boundary);
    let mut out = Ndjson::new(
        "sample-spectrum.ndjson",
        &Header::new("sample-spectrum", hash),
        json!({ "n": cfg.n, "replicas": cfg.replicas, "boundary": boundary }),
    );
    for r in &reps {
        for z in &r.spectrum.eigenvalues {
            out.row(&EigenRow {
                kind: "eigenvalue",
                boundary,
                replica: r.index,
                re: z.re,
                im: z.im,
            });
        }
    }
    let rows: Vec<_> = reps.iter().map(|r| spectrum_summary(r, boundary, cfg.tolerances.imag)).collect();
    for row in &rows {
        out.row(row);
    }
    let summary = json!({
        "max_abs_imag": rows.iter().map(|r| r.max_abs_imag).fold(0.0, f64::max),
        "max_residual_bound": rows.iter().map(|r| r.residual_bound).fold(0.0, f64::max),
        "max_trace_residual": rows.iter().map(|r| r.trace_residual).fold(0.0, f64::max),
        "all_real_within_tolerance": rows.iter().all(|r| r.real_within_tolerance),
    });
    Ok((vec![out.finish()], summary))
}

#[derive(Serialize)]
struct LyapunovRow {
    re: f64,
    im: f64,
    gamma1: f64,
    gamma2: f64,
    stderr: f64,
    stderr_gamma2: f64,
    log_det_rate: f64,
    n: usize,
    replicas: usize,
    discarded: usize,
}

fn lyapunov_map(cfg: &ExperimentConfig, dist: &CoefficientDistribution, hash: &str) -> Produced {
    let spec = cfg.grid.spec()?;
    let method = cfg.method.method();
    let nodes: Vec<Complex64> = spec.nodes().collect();
    let est = parallel::lyapunov_at(dist, &nodes, cfg.lyapunov_n, cfg.lyapunov_replicas, cfg.seed, method)?;
    let mut out = Ndjson::new(
        "lyapunov-map.ndjson",
        &Header::new("lyapunov-map", hash),
        json!({
            "method": method.tag(),
            "grid": [spec.re0, spec.re1, spec.im0, spec.im1],
            "nx": spec.nx,
            "ny": spec.ny,
        }),
    );
    for (z, e) in nodes.iter().zip(&est) {
        out.row(&LyapunovRow {
            re: z.re,
            im: z.im,
            gamma1: e.gamma1,
            gamma2: e.gamma2,
            stderr: e.std_error,
            stderr_gamma2: e.std_error_gamma2,
            log_det_rate: e.log_det_rate,
            n: e.n_steps,
            replicas: e.replicas,
            discarded: e.discarded,
        });
    }
    let summary = json!({
        "nodes": nodes.len(),
        "min_gamma1": est.iter().map(|e| e.gamma1).fold(f64::INFINITY, f64::min),
        "max_stderr": est.iter().map(|e| e.std_error).fold(0.0, f64::max),
    });
    Ok((vec![out.finish()], summary))
}

/// `points` test points on the circle, offset by half a step from the real axis.
pub fn circle_points(center: Complex64, radius: f64, points: usize) -> Vec<Complex64> {
    (0..points)
        .map(|k| center + Complex64::from_polar(radius, TAU * (k as f64 + 0.5) / points as f64))
        .collect()
}

fn single_measure(
    cfg: &ExperimentConfig,
    dist: &CoefficientDistribution,
    n: usize,
    stream: u64,
) -> Result<EmpiricalMeasure, CliError> {
    let seq = sample_replica(dist, n, cfg.seed, stream)?;
    let j = parallel::build_matrix(&seq, n, cfg.boundary)?;
    Ok(counting_measure(&eigenvalues(&j)?)?)
}

fn thouless_check(cfg: &ExperimentConfig, dist: &CoefficientDistribution, hash: &str) -> Produced {
    let t = &cfg.thouless;
    if t.points == 0 || !(t.radius > 0.0) {
        return Err(CliError::config("thouless: need points >= 1 and radius > 0"));
    }
    let pts = circle_points(Complex64::new(t.center[0], t.center[1]), t.radius, t.points);
    let (measure, est) = rayon::join(
        || single_measure(cfg, dist, cfg.n, 0),
        || parallel::lyapunov_at(dist, &pts, cfg.lyapunov_n, cfg.lyapunov_replicas, cfg.seed, cfg.method.method()),
    );
    let (measure, est) = (measure?, est?);
    let e_log_c = dist.expected_log_abs_c(t.expectation_samples, mix_seed(cfg.seed, EXPECTATION_TAG));
    let gamma: Vec<f64> = est.iter().map(|e| e.gamma1).collect();
    let res = thouless_residual_at(&gamma, &measure, e_log_c.value, &pts, t.min_distance)?;
    let mut csv = Csv::new(
        "thouless-check.csv",
        &Header::new("thouless-check", hash),
        &["re", "im", "gamma", "gamma_stderr", "potential", "e_log_c", "residual", "skipped", "ok"],
    );
    let mut max_residual: f64 = 0.0;
    let mut skipped = 0;
    for (p, e) in res.iter().zip(&est) {
        let ok = !p.skipped && p.residual.abs() <= cfg.tolerances.thouless;
        if p.skipped {
            skipped += 1;
        } else {
            max_residual = max_residual.max(p.residual.abs());
        }
        csv.row(&[
            Cell::F(p.z.re),
            Cell::F(p.z.im),
            Cell::F(p.gamma),
            Cell::F(e.std_error),
            Cell::F(p.potential),
            Cell::F(e_log_c.value),
            Cell::F(p.residual),
            Cell::B(p.skipped),
            Cell::B(ok),
        ]);
    }
    let summary = json!({
        "max_residual": max_residual,
        "skipped": skipped,
        "e_log_c": e_log_c.value,
        "e_log_c_exact": e_log_c.exact,
        "ok": skipped < res.len() && max_residual <= cfg.tolerances.thouless,
    });
    Ok((vec![csv.finish()], summary))
}

/// Midpoints between neighbouring eigenvalues (sorted by real part, then
/// imaginary part) at `count` evenly spaced quantiles.
pub fn quantile_midpoints(points: &[Complex64], count: usize) -> Vec<Complex64> {
    let mut s = points.to_vec();
    s.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    if s.len() < 2 {
        return s.into_iter().take(count.min(1)).collect();
    }
    (1..=count)
        .map(|q| {
            let i = (q * s.len() / (count + 1)).min(s.len() - 2);
            (s[i] + s[i + 1]) / 2.0
        })
        .collect()
}

fn holder_profile(cfg: &ExperimentConfig, dist: &CoefficientDistribution, hash: &str) -> Produced {
    let h = &cfg.holder;
    let m = single_measure(cfg, dist, cfg.n, 0)?;
    let centers: Vec<Complex64> = if h.points.is_empty() {
        quantile_midpoints(m.points(), h.quantiles)
    } else {
        h.points.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    };
    let profiles = centers
        .par_iter()
        .map(|&z0| log_holder_profile(&m, z0, &h.deltas))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(
        "holder-profile.csv",
        &Header::new("holder-profile", hash),
        &["z0_re", "z0_im", "delta", "mass", "c", "bound", "bound_ok", "c_increases", "atom_at_center"],
    );
    for p in &profiles {
        for r in &p.rows {
            csv.row(&[
                Cell::F(p.z0.re),
                Cell::F(p.z0.im),
                Cell::F(r.delta),
                Cell::F(r.mass),
                Cell::F(r.c),
                Cell::F(r.bound),
                Cell::B(r.bound_ok),
                Cell::U(p.c_increases as u64),
                Cell::B(p.atom_at_center),
            ]);
        }
    }
    let summary = json!({
        "centers": profiles.len(),
        "all_bounds_hold": profiles.iter().all(|p| p.all_bounds_hold()),
        "c_increases": profiles.iter().map(|p| p.c_increases).sum::<usize>(),
        "atoms_at_center": profiles.iter().filter(|p| p.atom_at_center).count(),
    });
    Ok((vec![csv.finish()], summary))
}

#[derive(Serialize)]
struct DensityRow {
    total_mass: f64,
    clipped_mass: f64,
    negative_cells: usize,
    min_mass: f64,
    excluded_cells: usize,
    mass_within_tolerance: bool,
}

fn convergence_study(cfg: &ExperimentConfig, dist: &CoefficientDistribution, hash: &str) -> Produced {
    let ladder = &cfg.n_ladder;
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::config("n_ladder needs at least two sizes in non-decreasing order"));
    }
    if let Some(&n) = ladder.iter().find(|&&n| n == 0 || n > jacobi_spectra_core::spectra::MAX_DIMENSION) {
        return Err(CliError::config(format!("n_ladder entry {n} is out of range")));
    }
    // replica r: spectra of the leading n × n blocks of one sequence
    let tables = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let measures = ladder
                .iter()
                .map(|&n| single_measure(cfg, dist, n, r))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(convergence_diagnostic(&measures, cfg.seed)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mean = summarize_convergence(&tables)?;
    let mut csv = Csv::new(
        "convergence-study.csv",
        &Header::new("convergence-study", hash),
        &["replica", "n_small", "n_large", "sigma", "distance", "mean_potential_gap", "max_potential_gap"],
    );
    for (r, t) in tables.iter().enumerate() {
        for row in &t.rows {
            csv.row(&[
                Cell::U(r as u64),
                Cell::U(row.n_small as u64),
                Cell::U(row.n_large as u64),
                Cell::F(row.sigma),
                Cell::F(row.distance),
                Cell::F(row.mean_potential_gap),
                Cell::F(row.max_potential_gap),
            ]);
        }
    }
    let mut means = Csv::new(
        "convergence-study.summary.csv",
        &Header::new("convergence-summary", hash),
        &["n_small", "n_large", "mean_sigma", "mean_distance", "distance_std_error", "mean_potential_gap", "replicas"],
    );
    for row in &mean.rows {
        means.row(&[
            Cell::U(row.n_small as u64),
            Cell::U(row.n_large as u64),
            Cell::F(row.mean_sigma),
            Cell::F(row.mean_distance),
            Cell::F(row.distance_std_error),
            Cell::F(row.mean_potential_gap),
            Cell::U(mean.replicas as u64),
        ]);
    }
    let mut files = vec![csv.finish(), means.finish()];
    let mut summary = json!({
        "decreasing": mean.decreasing,
        "mean_distances": mean.rows.iter().map(|r| r.mean_distance).collect::<Vec<_>>(),
    });
    if cfg.convergence.gamma_density {
        let spec = cfg.grid.spec()?;
        let (g, _) = parallel::gamma_field(
            dist,
            spec,
            cfg.lyapunov_n,
            cfg.lyapunov_replicas,
            cfg.seed,
            cfg.method.method(),
        )?;
        let d = laplacian_density(&g, false)?;
        files.push(write_grid("convergence-study.gamma.ndjson", &g, hash));
        let row = DensityRow {
            total_mass: d.total_mass,
            clipped_mass: d.clipped_mass,
            negative_cells: d.negative_cells,
            min_mass: d.min_mass,
            excluded_cells: d.excluded_cells,
            mass_within_tolerance: (d.total_mass - 1.0).abs() <= cfg.tolerances.density_mass,
        };
        summary["density"] = serde_json::to_value(&row).expect("row serializes");
        let mut out = Ndjson::new("convergence-study.density.ndjson", &Header::new("gamma-density", hash), json!({}));
        out.row(&row);
        files.push(out.finish());
    }
    Ok((files, summary))
}

#[derive(Serialize)]
struct HnSummaryRow<'a> {
    #[serde(flatten)]
    base: SpectrumSummaryRow<'a>,
    complex_count: usize,
}

fn hn_demo(cfg: &ExperimentConfig, hash: &str) -> Produced {
    let h = &cfg.hn_demo;
    if cfg.n < 3 {
        return Err(CliError::config("hn-demo needs n >= 3"));
    }
    let params = HatanoNelsonParams::asymmetric_hopping(h.g, h.onsite.law()).map_err(|e| CliError::config(e.to_string()))?;
    let dist = CoefficientDistribution::hatano_nelson(params).map_err(|e| CliError::config(e.to_string()))?;
    let ids = streams(cfg.replicas);
    let (dir, per) = rayon::join(
        || parallel::spectra(&dist, cfg.n, &ids, cfg.seed, BoundaryKind::Dirichlet),
        || parallel::spectra(&dist, cfg.n, &ids, cfg.seed, BoundaryKind::Periodic),
    );
    let (dir, per) = (dir?, per?);
    let mut out = Ndjson::new(
        "hn-demo.ndjson",
        &Header::new("hn-demo", hash),
        json!({ "n": cfg.n, "replicas": cfg.replicas, "g": h.g }),
    );
    let mut summaries = Vec::new();
    for (boundary, reps) in [("dirichlet", &dir), ("periodic", &per)] {
        for r in reps.iter() {
            for z in &r.spectrum.eigenvalues {
                out.row(&EigenRow {
                    kind: "eigenvalue",
                    boundary,
                    replica: r.index,
                    re: z.re,
                    im: z.im,
                });
            }
        }
        for r in reps.iter() {
            summaries.push(HnSummaryRow {
                base: spectrum_summary(r, boundary, cfg.tolerances.imag),
                complex_count: r.spectrum.eigenvalues.iter().filter(|z| z.im.abs() > h.complex_threshold).count(),
            });
        }
    }
    for s in &summaries {
        out.row(s);
    }
    let (d, p): (Vec<_>, Vec<_>) = summaries.iter().partition(|s| s.base.boundary == "dirichlet");
    let summary = json!({
        "dirichlet_max_abs_imag": d.iter().map(|s| s.base.max_abs_imag).fold(0.0, f64::max),
        "dirichlet_real": d.iter().all(|s| s.base.real_within_tolerance),
        "periodic_min_complex_count": p.iter().map(|s| s.complex_count).min().unwrap_or(0),
    });
    Ok((vec![out.finish()], summary))
}

fn tail_bounds_cmd(cfg: &ExperimentConfig, dist: &CoefficientDistribution, hash: &str) -> Produced {
    let t = &cfg.tail;
    if t.deltas.is_empty() || t.radii.is_empty() {
        return Err(CliError::config("tail: deltas and radii must be non-empty"));
    }
    let reps = parallel::spectra(dist, cfg.n, &streams(cfg.replicas), cfg.seed, cfg.boundary)?;
    let svals = reps
        .par_iter()
        .map(|r| singular_values(&r.matrix))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(
        "tail-bounds.csv",
        &Header::new("tail-bounds", hash),
        &[
            "replica",
            "delta",
            "r",
            "tau1",
            "tau1_bound",
            "tau1_ok",
            "tau_r",
            "tau_r_bound",
            "tau_r_ok",
            "trace_log_value",
            "row_sum_bound",
            "domination_bound",
            "chain_ok",
        ],
    );
    let mut all_ok = true;
    for (r, s) in reps.iter().zip(&svals) {
        let m = counting_measure(&r.spectrum)?;
        let tau1 = tail_functional(std::slice::from_ref(&m), 1.0)?.value;
        for &delta in &t.deltas {
            for &radius in &t.radii {
                let b = tail_bounds(&r.matrix, s, delta, radius)?;
                let tau_r = tail_functional(std::slice::from_ref(&m), radius)?.value;
                let (ok1, okr) = (tau1 <= b.tau1_bound, tau_r <= b.tau_r_bound);
                all_ok &= ok1 && okr && b.chain_ok;
                csv.row(&[
                    Cell::U(r.index),
                    Cell::F(delta),
                    Cell::F(radius),
                    Cell::F(tau1),
                    Cell::F(b.tau1_bound),
                    Cell::B(ok1),
                    Cell::F(tau_r),
                    Cell::F(b.tau_r_bound),
                    Cell::B(okr),
                    Cell::F(b.trace_log_value),
                    Cell::F(b.row_sum_bound),
                    Cell::F(b.domination_bound),
                    Cell::B(b.chain_ok),
                ]);
            }
        }
    }
    Ok((vec![csv.finish()], json!({ "all_ok": all_ok })))
}
