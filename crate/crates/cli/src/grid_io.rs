//! NDJSON serialization of potential grids.
//!
//! The header line carries the grid geometry; rows are `{re, im, value}` in
//! row-major order (imaginary part outer). `-inf` values are written as
//! `null`.

use jacobi_spectra_core::measures::{GridSpec, PotentialGrid, PotentialKind};
use jacobi_spectra_core::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::CliError;
use crate::output::{Header, Ndjson, OutputFile, SCHEMA_VERSION};

pub const GRID_SCHEMA: &str = "potential-grid";

#[derive(Debug, Serialize, Deserialize)]
struct GridRow {
    re: f64,
    im: f64,
    value: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct GridHeader {
    schema: String,
    schema_version: u32,
    kind: String,
    grid: [f64; 4],
    nx: usize,
    ny: usize,
    offset: [f64; 2],
}

pub fn write_grid(name: &str, g: &PotentialGrid, config_hash: &str) -> OutputFile {
    let s = g.spec;
    let mut out = Ndjson::new(
        name,
        &Header::new(GRID_SCHEMA, config_hash),
        json!({
            "kind": g.kind.tag(),
            "grid": [s.re0, s.re1, s.im0, s.im1],
            "nx": s.nx,
            "ny": s.ny,
            "offset": [g.offset.re, g.offset.im],
        }),
    );
    for iy in 0..s.ny {
        for ix in 0..s.nx {
            let z = g.node(ix, iy);
            let v = g.value(ix, iy);
            out.row(&GridRow {
                re: z.re,
                im: z.im,
                value: (v != f64::NEG_INFINITY).then_some(v),
            });
        }
    }
    out.finish()
}

pub fn read_grid(text: &str) -> Result<PotentialGrid, CliError> {
    let bad = |m: String| CliError::Format(format!("grid file: {m}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head: GridHeader = serde_json::from_str(lines.next().ok_or_else(|| bad("empty".into()))?)
        .map_err(|e| bad(format!("header: {e}")))?;
    if head.schema != GRID_SCHEMA || head.schema_version != SCHEMA_VERSION {
        return Err(bad(format!("unsupported schema {} v{}", head.schema, head.schema_version)));
    }
    let kind = match head.kind.as_str() {
        "gamma_field" => PotentialKind::GammaField,
        "p_n_field" => PotentialKind::PnField,
        k => return Err(bad(format!("unknown kind '{k}'"))),
    };
    let [re0, re1, im0, im1] = head.grid;
    let spec = GridSpec::new(re0, re1, im0, im1, head.nx, head.ny).map_err(|e| bad(e.to_string()))?;
    let offset = Complex64::new(head.offset[0], head.offset[1]);
    let mut values = Vec::with_capacity(spec.len());
    for (k, line) in lines.enumerate() {
        let row: GridRow = serde_json::from_str(line).map_err(|e| bad(format!("row {k}: {e}")))?;
        if k >= spec.len() {
            return Err(bad(format!("more than {} rows", spec.len())));
        }
        let z = spec.node(k % spec.nx, k / spec.nx) + offset;
        let tol = 1e-9 * (1.0 + z.norm());
        if (row.re - z.re).abs() > tol || (row.im - z.im).abs() > tol {
            return Err(bad(format!("row {k} is at ({}, {}), expected {z}", row.re, row.im)));
        }
        values.push(row.value.unwrap_or(f64::NEG_INFINITY));
    }
    if values.len() != spec.len() {
        return Err(bad(format!("{} rows, expected {}", values.len(), spec.len())));
    }
    PotentialGrid::from_values(spec, kind, offset, values).map_err(|e| bad(e.to_string()))
}
