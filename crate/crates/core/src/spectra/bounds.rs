//! Weyl majorant chain and tail-functional bounds from singular values.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{Boundary, JacobiMatrix};
use crate::{Error, Result};

/// Slack allowed in every inequality of the chain.
const SLACK: f64 = 1e-9;

/// `α` in `tr log^{1+δ}(I + JJ*) ≤ α Σ log^{1+δ}(1 + β |v_j|²)`.
///
/// With `H = JJ*`, `|H_jk| ≤ ‖r_j‖ ‖r_k‖` for rows `r` and `H_jk = 0` for
/// `|j - k| > 2` (cyclically when periodic). By `2xy ≤ x² + y²` the row sums
/// satisfy `d_j ≤ 5 max_{|k-j|≤2} ‖r_k‖²`, and `F(5 max) ≤ Σ_k F(5 ‖r_k‖²)`
/// for nonnegative nondecreasing `F`. Each `k` occurs in at most five
/// neighbourhoods.
pub const DOMINATION_ALPHA: f64 = 5.0;
/// `β` in the domination bound; see [`DOMINATION_ALPHA`].
pub const DOMINATION_BETA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylRow {
    pub m: usize,
    /// `Σ_{j≤m} F(|z_j|)`, eigenvalues by decreasing modulus.
    pub lhs: f64,
    /// `Σ_{j≤m} F(s_j)`, singular values decreasing.
    pub rhs: f64,
}

impl WeylRow {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport {
    pub delta: f64,
    pub rows: Vec<WeylRow>,
    /// Smallest `rhs - lhs`.
    pub min_slack: f64,
    /// Every partial sum satisfies `lhs ≤ rhs + 1e-9`.
    pub ok: bool,
    /// `|lhs_n - rhs_n|`; for `δ = 0` this is `|log|det|` from eigenvalues
    /// minus the same from singular values.
    pub full_sum_gap: f64,
}

/// Partial sums of `F(t) = (log⁺ t)^{1+δ}`, or `F = log` when `δ = 0`.
pub fn weyl_check(eigenvalues: &[Complex64], singular_values: &[f64], delta: f64) -> Result<WeylReport> {
    if eigenvalues.len() != singular_values.len() || eigenvalues.is_empty() {
        return Err(Error::InvalidArgument(
            "need equally many eigenvalues and singular values".into(),
        ));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument("delta must be a finite nonnegative number".into()));
    }
    let f = |t: f64| -> f64 {
        if delta == 0.0 {
            t.ln()
        } else if t > 1.0 {
            t.ln().powf(1.0 + delta)
        } else {
            0.0
        }
    };
    let mut moduli: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let mut sv = singular_values.to_vec();
    sv.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(sv.len());
    let (mut lhs, mut rhs) = (0.0, 0.0);
    let mut min_slack = f64::INFINITY;
    for (m, (z, s)) in moduli.iter().zip(&sv).enumerate() {
        lhs += f(*z);
        rhs += f(*s);
        let row = WeylRow { m: m + 1, lhs, rhs };
        let slack = row.slack();
        if !(slack >= min_slack) {
            min_slack = slack;
        }
        rows.push(row);
    }
    Ok(WeylReport {
        delta,
        rows,
        min_slack,
        ok: min_slack >= -SLACK,
        full_sum_gap: (lhs - rhs).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    pub delta: f64,
    pub r: f64,
    /// `(1/2n) Σ log(1 + s_j²)`.
    pub tau1_bound: f64,
    /// `(1/(2^{1+δ} n log^δ R)) Σ log^{1+δ}(1 + s_j²)`.
    pub tau_r_bound: f64,
    /// `(1/n) tr log^{1+δ}(I + JJ*)`.
    pub trace_log_value: f64,
    /// `(1/n) Σ log^{1+δ}(1 + d_j)` with `d_j` the absolute row sums of `JJ*`.
    pub row_sum_bound: f64,
    /// `(α/n) Σ log^{1+δ}(1 + β |v_j|²)` with `v_j` the `j`-th row of `J`.
    pub domination_bound: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `trace_log_value ≤ row_sum_bound ≤ domination_bound` up to rounding.
    pub chain_ok: bool,
}

pub fn tail_bounds(j: &JacobiMatrix, singular_values: &[f64], delta: f64, r: f64) -> Result<TailBounds> {
    let n = j.n();
    if singular_values.len() != n {
        return Err(Error::InvalidArgument("one singular value per row is required".into()));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("R must exceed 1".into()));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument("delta must be a finite nonnegative number".into()));
    }
    let p = 1.0 + delta;
    let f = |x: f64| (1.0 + x).ln().powf(p);
    let nf = n as f64;
    let log_terms: f64 = singular_values.iter().map(|s| (s * s).ln_1p()).sum();
    let powered: f64 = singular_values.iter().map(|s| f(s * s)).sum();
    let tau1_bound = log_terms / (2.0 * nf);
    let tau_r_bound = powered / (2f64.powf(p) * nf * r.ln().powf(delta));
    let trace_log_value = powered / nf;
    let row_sum_bound = (0..n).map(|i| f(gram_row_sum(j, i))).sum::<f64>() / nf;
    let domination_bound = DOMINATION_ALPHA
        * (0..n).map(|i| f(DOMINATION_BETA * j.row_norm_sqr(i))).sum::<f64>()
        / nf;
    let le = |a: f64, b: f64| a <= b + SLACK * b.abs().max(1.0);
    Ok(TailBounds {
        delta,
        r,
        tau1_bound,
        tau_r_bound,
        trace_log_value,
        row_sum_bound,
        domination_bound,
        alpha: DOMINATION_ALPHA,
        beta: DOMINATION_BETA,
        chain_ok: le(trace_log_value, row_sum_bound) && le(row_sum_bound, domination_bound),
    })
}

/// Columns that can be nonzero in row `i`.
fn row_support(j: &JacobiMatrix, i: usize) -> Vec<usize> {
    let n = j.n();
    let mut cols = Vec::with_capacity(3);
    let periodic = matches!(j.boundary(), Boundary::Periodic { .. });
    let candidates: [Option<usize>; 3] = if periodic {
        [Some((i + n - 1) % n), Some(i), Some((i + 1) % n)]
    } else {
        [i.checked_sub(1), Some(i), (i + 1 < n).then_some(i + 1)]
    };
    for c in candidates.into_iter().flatten() {
        if !cols.contains(&c) {
            cols.push(c);
        }
    }
    cols
}

/// `Σ_k |(JJ*)_{ik}|`.
fn gram_row_sum(j: &JacobiMatrix, i: usize) -> f64 {
    let cols_i = row_support(j, i);
    let mut rows: Vec<usize> = Vec::with_capacity(5);
    for &c in &cols_i {
        // rows with a nonzero in column c are the neighbours of c
        for r in row_support(j, c) {
            if !rows.contains(&r) {
                rows.push(r);
            }
        }
    }
    rows.iter()
        .map(|&k| {
            cols_i
                .iter()
                .map(|&l| j.get(i, l) * j.get(k, l).conj())
                .sum::<Complex64>()
                .norm()
        })
        .sum()
}
