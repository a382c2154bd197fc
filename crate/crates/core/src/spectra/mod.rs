//! Dirichlet and periodic Jacobi matrices, their eigenvalues, characteristic
//! polynomials, singular values and the tail-bound chain.

mod bounds;
mod hessenberg;
mod ql;
mod svd;

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub use bounds::{tail_bounds, weyl_check, TailBounds, WeylReport, WeylRow, DOMINATION_ALPHA, DOMINATION_BETA};
pub use svd::{singular_values, svd_with_vectors, JacobiSvd, SVD_SWEEP_CAP, SVD_TOLERANCE};

use crate::ensemble::{CoefficientSequence, CoefficientTriple};
use crate::scaled::{half_exponent, pow2, LogComplex};
use crate::transfer::{solution_pair_iter, ScaledTransferState};
use crate::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 4096;

/// Largest Dirichlet dimension for which a doubtful tridiagonal result is
/// recomputed with the dense Hessenberg solver.
pub const HESSENBERG_FALLBACK_MAX: usize = 1024;

/// Relative tolerance on `residual_bound / max(1, max|z_l|)` below which a
/// tridiagonal result is accepted without cross-checking.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Dirichlet,
    /// Corner entries `J[1,n] = a_1` and `J[n,1] = c_n`.
    Periodic { corner_a: Complex64, corner_c: Complex64 },
}

impl Boundary {
    pub fn tag(&self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic { .. } => "periodic",
        }
    }
}

/// Tridiagonal matrix with `diag = b_1..b_n`, `sub = a_2..a_n` and
/// `sup = c_1..c_{n-1}`, optionally closed periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    diag: Vec<Complex64>,
    sub: Vec<Complex64>,
    sup: Vec<Complex64>,
    boundary: Boundary,
    seed: Option<u64>,
    stream: Option<u64>,
}

impl JacobiMatrix {
    /// Assemble from raw bands. `sub[k]` sits at row `k+1`, column `k` and
    /// `sup[k]` at row `k`, column `k+1` (0-based).
    pub fn from_bands(
        diag: Vec<Complex64>,
        sub: Vec<Complex64>,
        sup: Vec<Complex64>,
        boundary: Boundary,
    ) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        if n > MAX_DIMENSION {
            return Err(Error::TooLarge { n, cap: MAX_DIMENSION });
        }
        if sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::InvalidArgument("off-diagonal bands must have length n - 1".into()));
        }
        if !diag.iter().chain(&sub).chain(&sup).all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        if let Boundary::Periodic { corner_a, corner_c } = boundary {
            if n < 3 {
                return Err(Error::InvalidArgument("periodic matrices need n >= 3".into()));
            }
            if corner_a == ZERO || corner_c == ZERO || !corner_a.is_finite() || !corner_c.is_finite() {
                return Err(Error::InvalidArgument("periodic corners must be finite and nonzero".into()));
            }
        }
        Ok(JacobiMatrix {
            diag,
            sub,
            sup,
            boundary,
            seed: None,
            stream: None,
        })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }
    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }
    pub fn sub(&self) -> &[Complex64] {
        &self.sub
    }
    pub fn sup(&self) -> &[Complex64] {
        &self.sup
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
    pub fn stream(&self) -> Option<u64> {
        self.stream
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let n = self.n();
        if i == j {
            return self.diag[i];
        }
        if i == j + 1 {
            return self.sub[j];
        }
        if j == i + 1 {
            return self.sup[i];
        }
        if let Boundary::Periodic { corner_a, corner_c } = self.boundary {
            if i == 0 && j == n - 1 {
                return corner_a;
            }
            if i == n - 1 && j == 0 {
                return corner_c;
            }
        }
        ZERO
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n();
        let mut out = alloc::vec![ZERO; n * n];
        for i in 0..n {
            for j in i.saturating_sub(1)..(i + 2).min(n) {
                out[i * n + j] = self.get(i, j);
            }
        }
        if let Boundary::Periodic { corner_a, corner_c } = self.boundary {
            out[n - 1] = corner_a;
            out[(n - 1) * n] = corner_c;
        }
        out
    }

    /// `Σ b_j`.
    pub fn trace(&self) -> Complex64 {
        self.diag.iter().sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let corners = match self.boundary {
            Boundary::Periodic { corner_a, corner_c } => corner_a.norm().max(corner_c.norm()),
            Boundary::Dirichlet => 0.0,
        };
        self.diag
            .iter()
            .chain(&self.sub)
            .chain(&self.sup)
            .map(|x| x.norm())
            .fold(corners, f64::max)
    }

    /// Squared Euclidean norm of row `i` (0-based).
    pub fn row_norm_sqr(&self, i: usize) -> f64 {
        let n = self.n();
        let mut s = self.diag[i].norm_sqr();
        if i > 0 {
            s += self.sub[i - 1].norm_sqr();
        }
        if i + 1 < n {
            s += self.sup[i].norm_sqr();
        }
        if let Boundary::Periodic { corner_a, corner_c } = self.boundary {
            if i == 0 {
                s += corner_a.norm_sqr();
            }
            if i == n - 1 {
                s += corner_c.norm_sqr();
            }
        }
        s
    }

    /// `det(zI - J)` in log form.
    pub fn char_poly(&self, z: Complex64) -> LogComplex {
        match self.boundary {
            Boundary::Dirichlet => self.dirichlet_char_poly(z),
            Boundary::Periodic { corner_a, corner_c } => self.periodic_char_poly(z, corner_a, corner_c),
        }
    }

    /// `det J` in log form.
    pub fn log_det(&self) -> LogComplex {
        let p = self.char_poly(ZERO);
        if self.n() % 2 == 1 {
            p.neg()
        } else {
            p
        }
    }

    fn dirichlet_char_poly(&self, z: Complex64) -> LogComplex {
        // P_k = (z - b_k) P_{k-1} - a_k c_{k-1} P_{k-2}
        let mut prev = ONE;
        let mut curr = z - self.diag[0];
        let mut log2: i64 = 0;
        for k in 1..self.n() {
            let next = (z - self.diag[k]) * curr - self.sub[k - 1] * self.sup[k - 1] * prev;
            prev = curr;
            curr = next;
            let m2 = curr.norm_sqr().max(prev.norm_sqr());
            if m2 == 0.0 {
                return LogComplex::ZERO;
            }
            if !(0.25..=4.0).contains(&m2) && m2.is_finite() {
                let k = half_exponent(m2);
                let s = pow2(-k);
                curr *= s;
                prev *= s;
                log2 += k as i64;
            }
        }
        LogComplex::from_scaled(curr, log2)
    }

    /// `det(zI - J) = ∏ c_j · (tr S_n(z) - 1 - det S_n(z))` where the
    /// transfer matrices use `a_1 = J[1,n]` and `c_n = J[n,1]`.
    fn periodic_char_poly(&self, z: Complex64, corner_a: Complex64, corner_c: Complex64) -> LogComplex {
        let n = self.n();
        let mut state = ScaledTransferState::new();
        let mut log_c = LogComplex::ONE;
        for j in 0..n {
            let a = if j == 0 { corner_a } else { self.sub[j - 1] };
            let c = if j == n - 1 { corner_c } else { self.sup[j] };
            let t = CoefficientTriple::unchecked(a, self.diag[j], c);
            if state.step(&t, z).is_err() {
                return LogComplex {
                    log_abs: f64::NAN,
                    phase: Complex64::new(f64::NAN, f64::NAN),
                };
            }
            log_c = log_c.mul(LogComplex::from_complex(c));
        }
        let trace = LogComplex::from_complex(state.unit_part().trace());
        let trace = LogComplex {
            log_abs: trace.log_abs + state.log_scale(),
            phase: trace.phase,
        };
        let inner = LogComplex::sum(&[trace, LogComplex::ONE.neg(), state.log_det().neg()]);
        inner.mul(log_c)
    }
}

fn check_length(seq: &CoefficientSequence, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
    }
    if seq.len() < n {
        return Err(Error::LengthMismatch {
            needed: n,
            available: seq.len(),
        });
    }
    Ok(())
}

/// Dirichlet `J_n` from the first `n` triples.
pub fn build_jacobi(seq: &CoefficientSequence, n: usize) -> Result<JacobiMatrix> {
    check_length(seq, n)?;
    let t = &seq.triples()[..n];
    let diag = t.iter().map(|t| t.b()).collect();
    let sub = t[1..].iter().map(|t| t.a()).collect();
    let sup = t[..n - 1].iter().map(|t| t.c()).collect();
    let mut j = JacobiMatrix::from_bands(diag, sub, sup, Boundary::Dirichlet)?;
    j.seed = Some(seq.seed());
    j.stream = Some(seq.stream());
    Ok(j)
}

/// Periodic `J_n`: the Dirichlet matrix plus `J[1,n] = a_1`, `J[n,1] = c_n`.
pub fn build_periodic(seq: &CoefficientSequence, n: usize) -> Result<JacobiMatrix> {
    if n < 3 {
        return Err(Error::InvalidArgument("periodic matrices need n >= 3".into()));
    }
    let mut j = build_jacobi(seq, n)?;
    let t = seq.triples();
    j.boundary = Boundary::Periodic {
        corner_a: t[0].a(),
        corner_c: t[n - 1].c(),
    };
    Ok(j)
}

/// `f_{n+1}(z)` for the first `n` triples, in log form.
pub fn char_poly_eval(seq: &CoefficientSequence, n: usize, z: Complex64) -> Result<LogComplex> {
    check_length(seq, n)?;
    let pair = solution_pair_iter(seq.triples()[..n].iter().copied(), z)?;
    Ok(pair.next())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSolver {
    /// Tridiagonal solver for Dirichlet matrices with a dense cross-check
    /// when the residual is doubtful; dense solver for periodic ones.
    Auto,
    /// Complex-symmetric tridiagonal QL (Dirichlet only).
    TridiagonalQl,
    /// Balanced complex Hessenberg QR.
    HessenbergQr,
}

/// Eigenvalues of one matrix with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    pub eigenvalues: Vec<Complex64>,
    /// `max_l |P(z_l)| / ∏_{m≠l} max(|z_l - z_m|, ε)` with `P = det(zI - J)`.
    pub residual_bound: f64,
    /// `|Σ z_l - tr J| / (n · max(1, max|J_ij|))`.
    pub trace_defect: f64,
    /// `|log|∏ z_l| - log|det J||`.
    pub log_det_defect: f64,
    /// Solver that produced the eigenvalues.
    pub solver: EigenSolver,
    pub boundary: Boundary,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
}

impl SpectralSample {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |z_l|`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// All eigenvalues of `j` with the automatic solver choice.
pub fn eigenvalues(j: &JacobiMatrix) -> Result<SpectralSample> {
    eigenvalues_with(j, EigenSolver::Auto)
}

pub fn eigenvalues_with(j: &JacobiMatrix, solver: EigenSolver) -> Result<SpectralSample> {
    let n = j.n();
    let dirichlet = matches!(j.boundary, Boundary::Dirichlet);
    match (solver, dirichlet) {
        (EigenSolver::TridiagonalQl, false) => Err(Error::InvalidArgument(
            "the tridiagonal solver only handles Dirichlet matrices".into(),
        )),
        (EigenSolver::TridiagonalQl, true) => finish(j, ql::eigenvalues(j)?, EigenSolver::TridiagonalQl),
        (EigenSolver::HessenbergQr, _) | (EigenSolver::Auto, false) => {
            finish(j, hessenberg::eigenvalues(j)?, EigenSolver::HessenbergQr)
        }
        (EigenSolver::Auto, true) => {
            let first = ql::eigenvalues(j).and_then(|z| finish(j, z, EigenSolver::TridiagonalQl));
            let relative = |s: &SpectralSample| s.residual_bound / s.spectral_radius().max(1.0);
            match first {
                Ok(s) if relative(&s) <= RESIDUAL_TOLERANCE || n > HESSENBERG_FALLBACK_MAX => Ok(s),
                Ok(s) => {
                    let dense = finish(j, hessenberg::eigenvalues(j)?, EigenSolver::HessenbergQr)?;
                    Ok(if relative(&dense) < relative(&s) { dense } else { s })
                }
                Err(e) if n > HESSENBERG_FALLBACK_MAX => Err(e),
                Err(_) => finish(j, hessenberg::eigenvalues(j)?, EigenSolver::HessenbergQr),
            }
        }
    }
}

fn finish(j: &JacobiMatrix, eigenvalues: Vec<Complex64>, solver: EigenSolver) -> Result<SpectralSample> {
    let n = j.n();
    debug_assert_eq!(eigenvalues.len(), n);
    let sum: Complex64 = eigenvalues.iter().sum();
    let trace_defect = (sum - j.trace()).norm() / (n as f64 * j.max_abs().max(1.0));
    let log_prod: f64 = eigenvalues.iter().map(|z| z.norm().ln()).sum();
    let log_det_defect = (log_prod - j.log_det().log_abs).abs();
    Ok(SpectralSample {
        residual_bound: residual_bound(j, &eigenvalues),
        eigenvalues,
        trace_defect,
        log_det_defect,
        solver,
        boundary: j.boundary,
        seed: j.seed,
        stream: j.stream,
    })
}

/// `max_l |P(z_l)| / ∏_{m≠l} max(|z_l - z_m|, ε)` with
/// `ε = 2^{-40} max(1, max|z|)`.
pub fn residual_bound(j: &JacobiMatrix, eigenvalues: &[Complex64]) -> f64 {
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = scale * pow2(-40);
    let mut worst = f64::NEG_INFINITY;
    for (l, &zl) in eigenvalues.iter().enumerate() {
        let p = j.char_poly(zl).log_abs;
        if p == f64::NEG_INFINITY {
            continue;
        }
        let denom: f64 = eigenvalues
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != l)
            .map(|(_, &zm)| (zl - zm).norm().max(eps).ln())
            .sum();
        let r = p - denom;
        if !(r <= worst) {
            worst = r;
        }
    }
    worst.exp()
}
