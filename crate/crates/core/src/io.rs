//! JSON family and system files, and the bounds CSV table.
//!
//! A family file looks like
//!
//! ```json
//! {"name": "pair", "n": 2,
//!  "matrices": [{"label": "A", "rows": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}]}
//! ```
//!
//! with every entry written as a `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundsRecord;
use crate::error::{JsrError, Result};
use crate::family::MatrixFamily;
use crate::inclusion::{DeltaNorm, PerturbedSystem};
use crate::linalg::ComplexMatrix;

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    #[serde(default)]
    label: Option<String>,
    rows: Rows,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    name: String,
    n: usize,
    matrices: Vec<MatrixDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    name: String,
    n: usize,
    a0: Rows,
    directions: Vec<MatrixDoc>,
    #[serde(default)]
    delta_norm: Option<String>,
    #[serde(default)]
    alpha: Option<f64>,
}

fn structural(message: String) -> JsrError {
    JsrError::Parse { message, line: 0, column: 0 }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| JsrError::Parse { message: e.to_string(), line: e.line(), column: e.column() })
}

fn matrix_from_rows(rows: &Rows, n: usize, what: &str) -> Result<ComplexMatrix> {
    if rows.len() != n {
        return Err(structural(format!("{what} has {} rows, expected {n}", rows.len())));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(structural(format!("{what} row {r} has {} entries, expected {n}", row.len())));
        }
    }
    let entries: Vec<Vec<Complex64>> =
        rows.iter().map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()).collect();
    ComplexMatrix::from_rows(&entries).map_err(|e| structural(format!("{what}: {e}")))
}

fn rows_of(m: &ComplexMatrix) -> Rows {
    m.rows().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

/// Parses a family file. Syntax errors carry the 1-based line and column;
/// shape errors name the offending matrix and row.
pub fn parse_family(text: &str) -> Result<MatrixFamily> {
    let doc: FamilyDoc = from_json(text)?;
    if doc.n == 0 {
        return Err(structural("n must be at least 1".into()));
    }
    if doc.matrices.is_empty() {
        return Err(structural("the matrices array is empty".into()));
    }
    let mut members = Vec::with_capacity(doc.matrices.len());
    let mut labels = Vec::with_capacity(doc.matrices.len());
    for (i, m) in doc.matrices.iter().enumerate() {
        members.push(matrix_from_rows(&m.rows, doc.n, &format!("matrix {i}"))?);
        labels.push(m.label.clone().unwrap_or_else(|| format!("A{i}")));
    }
    MatrixFamily::with_labels(doc.name, members, labels)
}

/// Pretty-printed family file; `parse_family(&emit_family(f))` reproduces
/// `f` exactly.
pub fn emit_family(family: &MatrixFamily) -> String {
    let doc = FamilyDoc {
        name: family.name().to_string(),
        n: family.dim(),
        matrices: family
            .members()
            .iter()
            .zip(family.labels())
            .map(|(m, l)| MatrixDoc { label: Some(l.clone()), rows: rows_of(m) })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

/// A parsed system file together with its name.
#[derive(Clone, Debug)]
pub struct SystemFile {
    pub name: String,
    pub system: PerturbedSystem,
}

/// Parses a perturbed-system file:
/// `{"name", "n", "a0": rows, "directions": [{"label", "rows"}], "delta_norm": "inf" | "2", "alpha"}`.
pub fn parse_system(text: &str) -> Result<SystemFile> {
    let doc: SystemDoc = from_json(text)?;
    if doc.n == 0 {
        return Err(structural("n must be at least 1".into()));
    }
    let a0 = matrix_from_rows(&doc.a0, doc.n, "a0")?;
    let directions = doc
        .directions
        .iter()
        .enumerate()
        .map(|(i, d)| matrix_from_rows(&d.rows, doc.n, &format!("direction {i}")))
        .collect::<Result<Vec<_>>>()?;
    let delta_norm = match doc.delta_norm.as_deref() {
        None => DeltaNorm::default(),
        Some(s) => s.parse().map_err(|e: JsrError| structural(e.to_string()))?,
    };
    let system = PerturbedSystem::new(a0, directions, delta_norm, doc.alpha.unwrap_or(0.0))
        .map_err(|e| structural(e.to_string()))?;
    Ok(SystemFile { name: doc.name, system })
}

pub fn emit_system(name: &str, sys: &PerturbedSystem) -> String {
    let doc = SystemDoc {
        name: name.to_string(),
        n: sys.a0.dim(),
        a0: rows_of(&sys.a0),
        directions: sys
            .directions
            .iter()
            .enumerate()
            .map(|(i, d)| MatrixDoc { label: Some(format!("A{}", i + 1)), rows: rows_of(d) })
            .collect(),
        delta_norm: Some(sys.delta_norm.to_string()),
        alpha: Some(sys.alpha),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

/// `k,lower_k,upper_<norm>…,msr_k,witness_lower,witness_upper_<norm>…`
/// with witnesses written as dash-separated indices.
pub fn bounds_csv(records: &[BoundsRecord]) -> String {
    let labels: Vec<&str> = records.first().map(|r| r.upper.iter().map(|u| u.norm.label()).collect()).unwrap_or_default();
    let mut out = String::from("k,lower_k");
    for l in &labels {
        out.push_str(&format!(",upper_{l}"));
    }
    out.push_str(",msr_k,witness_lower");
    for l in &labels {
        out.push_str(&format!(",witness_upper_{l}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{}", r.k, r.lower));
        for u in &r.upper {
            out.push_str(&format!(",{}", u.value));
        }
        out.push_str(&format!(",{},{}", r.msr, r.lower_witness.compact()));
        for u in &r.upper {
            out.push_str(&format!(",{}", u.witness.compact()));
        }
        out.push('\n');
    }
    out
}
