//! Experiment configuration.
//!
//! Values are resolved in this order, later sources winning:
//! built-in defaults, the TOML file, `JACOBI_SPECTRA_SEED`, command-line
//! flags.

use std::path::{Path, PathBuf};

use jacobi_spectra_core::ensemble::{
    CoefficientDistribution, CoefficientTriple, HatanoNelsonParams, RealLaw,
};
use jacobi_spectra_core::measures::GridSpec;
use jacobi_spectra_core::transfer::LyapunovMethod;
use jacobi_spectra_core::Complex64;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// TOML integers are signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

pub const SEED_ENV: &str = "JACOBI_SPECTRA_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Matrix size.
    pub n: usize,
    /// Independent matrices per run.
    pub replicas: usize,
    /// Sizes compared by `convergence-study`.
    pub n_ladder: Vec<usize>,
    pub boundary: BoundaryKind,
    pub method: MethodKind,
    /// Transfer steps per Lyapunov replica.
    pub lyapunov_n: usize,
    pub lyapunov_replicas: usize,
    pub distribution: DistributionConfig,
    pub grid: GridConfig,
    pub thouless: ThoulessConfig,
    pub holder: HolderConfig,
    pub tail: TailConfig,
    pub hn_demo: HnDemoConfig,
    pub convergence: ConvergenceConfig,
    pub tolerances: Tolerances,
    /// Worker threads; `None` uses every logical core. Not hashed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Output directory. Not hashed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            n: 200,
            replicas: 4,
            n_ladder: vec![250, 500, 1000, 2000, 4000],
            boundary: BoundaryKind::Dirichlet,
            method: MethodKind::Norm,
            lyapunov_n: 10_000,
            lyapunov_replicas: 16,
            distribution: DistributionConfig::default(),
            grid: GridConfig::default(),
            thouless: ThoulessConfig::default(),
            holder: HolderConfig::default(),
            tail: TailConfig::default(),
            hn_demo: HnDemoConfig::default(),
            convergence: ConvergenceConfig::default(),
            tolerances: Tolerances::default(),
            threads: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Norm,
    Furstenberg,
    Recurrence,
    Pair,
}

impl MethodKind {
    pub fn method(self) -> LyapunovMethod {
        match self {
            MethodKind::Norm => LyapunovMethod::Norm,
            MethodKind::Furstenberg => LyapunovMethod::Furstenberg,
            MethodKind::Recurrence => LyapunovMethod::Recurrence,
            MethodKind::Pair => LyapunovMethod::QrPair,
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "norm" => Ok(MethodKind::Norm),
            "furstenberg" => Ok(MethodKind::Furstenberg),
            "recurrence" => Ok(MethodKind::Recurrence),
            "pair" => Ok(MethodKind::Pair),
            _ => Err(CliError::config(format!(
                "unknown method '{s}'; expected norm, furstenberg, recurrence or pair"
            ))),
        }
    }
}

/// A law on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawConfig {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
}

impl LawConfig {
    pub fn law(self) -> RealLaw {
        match self {
            LawConfig::Constant { value } => RealLaw::Constant(value),
            LawConfig::Uniform { low, high } => RealLaw::Uniform { low, high },
            LawConfig::Normal { mean, std_dev } => RealLaw::Normal { mean, std_dev },
        }
    }
}

/// One atom of a discrete law. Entries accept a number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(deserialize_with = "complex_entry")]
    pub a: [f64; 2],
    #[serde(deserialize_with = "complex_entry")]
    pub b: [f64; 2],
    #[serde(deserialize_with = "complex_entry")]
    pub c: [f64; 2],
    pub p: f64,
}

fn complex_entry<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 2], D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Real(f64),
        Pair([f64; 2]),
    }
    Ok(match Entry::deserialize(d)? {
        Entry::Real(x) => [x, 0.0],
        Entry::Pair(p) => p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    /// Finitely many weighted triples.
    Atoms { atoms: Vec<AtomConfig> },
    /// Hatano–Nelson laws. Either `g` (constant hopping `e^{±g}`) or all of
    /// `ratio`, `c_modulus`, `c_phase`.
    HatanoNelson {
        onsite: LawConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ratio: Option<LawConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_modulus: Option<LawConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_phase: Option<LawConfig>,
    },
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig::Atoms {
            atoms: vec![
                AtomConfig {
                    a: [1.5, 0.0],
                    b: [0.5, 0.5],
                    c: [0.75, 0.0],
                    p: 0.5,
                },
                AtomConfig {
                    a: [0.5, -0.5],
                    b: [-1.0, 0.0],
                    c: [1.25, 0.0],
                    p: 0.5,
                },
            ],
        }
    }
}

impl DistributionConfig {
    pub fn build(&self) -> Result<CoefficientDistribution, CliError> {
        match self {
            DistributionConfig::Atoms { atoms } => {
                let cx = |x: [f64; 2]| Complex64::new(x[0], x[1]);
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(k, at)| {
                        CoefficientTriple::new(cx(at.a), cx(at.b), cx(at.c))
                            .map(|t| (t, at.p))
                            .map_err(|e| CliError::config(format!("distribution.atoms[{k}]: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                CoefficientDistribution::atoms(atoms).map_err(|e| CliError::config(e.to_string()))
            }
            DistributionConfig::HatanoNelson { .. } => {
                CoefficientDistribution::hatano_nelson(self.hatano_nelson_params()?)
                    .map_err(|e| CliError::config(e.to_string()))
            }
        }
    }

    fn hatano_nelson_params(&self) -> Result<HatanoNelsonParams, CliError> {
        let DistributionConfig::HatanoNelson {
            onsite,
            g,
            ratio,
            c_modulus,
            c_phase,
        } = self
        else {
            return Err(CliError::config("not a Hatano-Nelson distribution"));
        };
        let params = match (g, ratio, c_modulus, c_phase) {
            (Some(g), None, None, None) => HatanoNelsonParams::asymmetric_hopping(*g, onsite.law()),
            (None, Some(r), Some(m), Some(p)) => {
                HatanoNelsonParams::new(onsite.law(), r.law(), m.law(), p.law())
            }
            _ => {
                return Err(CliError::config(
                    "hatano_nelson needs either g alone or all of ratio, c_modulus and c_phase",
                ))
            }
        };
        params.map_err(|e| CliError::config(e.to_string()))
    }
}

/// Rectangular grid of evaluation nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            re: [-3.0, 3.0],
            im: [-3.0, 3.0],
            nx: 25,
            ny: 25,
        }
    }
}

impl GridConfig {
    /// Parse `"re0,re1,im0,im1,nx,ny"`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || CliError::config(format!("grid '{s}' is not of the form re0,re1,im0,im1,nx,ny"));
        if parts.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
        let u = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
        Ok(GridConfig {
            re: [f(0)?, f(1)?],
            im: [f(2)?, f(3)?],
            nx: u(4)?,
            ny: u(5)?,
        })
    }

    pub fn spec(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.re[0], self.re[1], self.im[0], self.im[1], self.nx, self.ny)
            .map_err(|e| CliError::config(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThoulessConfig {
    /// Test points sit on the circle `|z - center| = radius`.
    pub center: [f64; 2],
    pub radius: f64,
    pub points: usize,
    /// Points closer than this to an eigenvalue are skipped.
    pub min_distance: f64,
    /// Monte Carlo draws for `E log|c_1|` when the law is not discrete.
    pub expectation_samples: usize,
}

impl Default for ThoulessConfig {
    fn default() -> Self {
        ThoulessConfig {
            center: [0.0, 0.0],
            radius: 5.0,
            points: 20,
            min_distance: 0.1,
            expectation_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    /// Centers `z0`; empty means midpoints between neighbouring eigenvalues
    /// at `quantiles` evenly spaced quantiles of the spectrum.
    pub points: Vec<[f64; 2]>,
    pub quantiles: usize,
    pub deltas: Vec<f64>,
}

impl Default for HolderConfig {
    fn default() -> Self {
        HolderConfig {
            points: Vec::new(),
            quantiles: 10,
            deltas: vec![0.5, 0.25, 0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub deltas: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for TailConfig {
    fn default() -> Self {
        let e = std::f64::consts::E;
        TailConfig {
            deltas: vec![1.0],
            radii: vec![e, e * e],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HnDemoConfig {
    /// Hopping asymmetry: `a_j = e^{g}`, `c_j = e^{-g}`.
    pub g: f64,
    pub onsite: LawConfig,
    /// `|Im z|` above which an eigenvalue counts as complex.
    pub complex_threshold: f64,
}

impl Default for HnDemoConfig {
    fn default() -> Self {
        HnDemoConfig {
            g: 0.5,
            onsite: LawConfig::Uniform { low: -1.0, high: 1.0 },
            complex_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Also compute `γ` on `grid` and the mass of its discrete Laplacian.
    pub gamma_density: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { gamma_density: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `max |Im z| ≤ imag · max(1, spectral radius)` for real spectra.
    pub imag: f64,
    pub thouless: f64,
    pub weyl_slack: f64,
    /// Allowed `|total mass - 1|` of a Laplacian density.
    pub density_mass: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            imag: 1e-8,
            thouless: 5e-2,
            weyl_slack: 1e-9,
            density_mass: 0.05,
            residual: 1e-8,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        toml::from_str(s).map_err(|e| CliError::config(format!("config: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Read a distribution from a TOML file holding either a
    /// `[distribution]` table or the distribution keys at top level.
    pub fn distribution_from_file(path: &Path) -> Result<DistributionConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        #[derive(Deserialize)]
        struct Wrapped {
            distribution: DistributionConfig,
        }
        let err = |e: toml::de::Error| CliError::config(format!("{}: {}", path.display(), e.message()));
        match toml::from_str::<Wrapped>(&text) {
            Ok(w) => Ok(w.distribution),
            Err(_) => toml::from_str::<DistributionConfig>(&text).map_err(err),
        }
    }

    /// Apply the seed override from the environment.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), CliError> {
        if let Some(v) = lookup(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("{SEED_ENV}='{v}' is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Panics if `seed` exceeds [`MAX_SEED`]; [`validate`](Self::validate)
    /// rejects such configs.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Canonical JSON of everything that affects results.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.threads = None;
        c.out = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Structural checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |v: usize, what: &str| {
            if v == 0 {
                Err(CliError::config(format!("{what} must be at least 1")))
            } else {
                Ok(())
            }
        };
        positive(self.n, "n")?;
        positive(self.replicas, "replicas")?;
        positive(self.lyapunov_replicas, "lyapunov_replicas")?;
        if self.n > jacobi_spectra_core::spectra::MAX_DIMENSION {
            return Err(CliError::config(format!(
                "n = {} exceeds the supported maximum {}",
                self.n,
                jacobi_spectra_core::spectra::MAX_DIMENSION
            )));
        }
        if self.boundary == BoundaryKind::Periodic && self.n < 3 {
            return Err(CliError::config("periodic matrices need n >= 3"));
        }
        if self.lyapunov_n < jacobi_spectra_core::transfer::MIN_LYAPUNOV_STEPS {
            return Err(CliError::config(format!(
                "lyapunov_n must be at least {}",
                jacobi_spectra_core::transfer::MIN_LYAPUNOV_STEPS
            )));
        }
        if self.seed > MAX_SEED {
            return Err(CliError::config(format!("seed must be at most {MAX_SEED} so that TOML can store it")));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads must be at least 1"));
        }
        self.grid.spec()?;
        self.distribution.build()?;
        let t = &self.tolerances;
        for (v, what) in [
            (t.imag, "tolerances.imag"),
            (t.thouless, "tolerances.thouless"),
            (t.weyl_slack, "tolerances.weyl_slack"),
            (t.density_mass, "tolerances.density_mass"),
            (t.residual, "tolerances.residual"),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::config(format!("{what} must be finite and nonnegative")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn hash_ignores_threads_and_out() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.threads = Some(3);
        b.out = Some("elsewhere".into());
        assert_eq!(a.config_hash(), b.config_hash());
        b.seed = 1;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn atoms_accept_real_and_pair_entries() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            [distribution]
            kind = "atoms"
            [[distribution.atoms]]
            a = 1.0
            b = [0.0, 0.5]
            c = 1.0
            p = 1.0
            "#,
        )
        .unwrap();
        let DistributionConfig::Atoms { atoms } = &c.distribution else { panic!() };
        assert_eq!(atoms[0].a, [1.0, 0.0]);
        assert_eq!(atoms[0].b, [0.0, 0.5]);
    }

    #[test]
    fn hatano_nelson_shorthand_and_full_form() {
        let short = ExperimentConfig::from_toml_str(
            "[distribution]\nkind = \"hatano_nelson\"\ng = 0.5\nonsite = { law = \"uniform\", low = -1.0, high = 1.0 }\n",
        )
        .unwrap();
        assert!(short.distribution.build().is_ok());
        let mixed = ExperimentConfig::from_toml_str(
            "[distribution]\nkind = \"hatano_nelson\"\ng = 0.5\nonsite = { law = \"constant\", value = 0.0 }\nratio = { law = \"constant\", value = 1.0 }\n",
        )
        .unwrap();
        assert!(mixed.distribution.build().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("sede = 3").is_err());
    }

    #[test]
    fn env_seed() {
        let mut c = ExperimentConfig::default();
        c.apply_env(|k| (k == SEED_ENV).then(|| "17".to_string())).unwrap();
        assert_eq!(c.seed, 17);
        assert!(c.apply_env(|_| Some("x".into())).is_err());
    }

    #[test]
    fn grid_string() {
        let g = GridConfig::parse("-1,1,-2,2,5,7").unwrap();
        assert_eq!(g, GridConfig { re: [-1.0, 1.0], im: [-2.0, 2.0], nx: 5, ny: 7 });
        assert!(GridConfig::parse("1,2,3").is_err());
    }
}
