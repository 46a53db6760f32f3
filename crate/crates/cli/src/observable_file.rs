//! JSON observable files.
//!
//! ```json
//! {"terms": [
//!   {"coeff": [0.5, 0.0],
//!    "factors": [{"vertex": "", "pauli": "z"},
//!                {"vertex": "1.2", "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}]}
//! ]}
//! ```
//!
//! `coeff` defaults to `[1, 0]`. Factors listed for the same vertex multiply
//! left to right. Pauli labels are `i`, `x`, `y`, `z`.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use xyqmc::linalg::{Mat2, C64};
use xyqmc::model::{pauli, Axis};
use xyqmc::state::{ProductObservable, ProductTerm};
use xyqmc::tree::Vertex;

use crate::error::{CliError, Result};

type RawMatrix = [[[f64; 2]; 2]; 2];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactor {
    vertex: String,
    #[serde(default)]
    pauli: Option<String>,
    #[serde(default)]
    matrix: Option<RawMatrix>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawFactor")]
struct Factor {
    vertex: Vertex,
    matrix: Mat2,
}

fn pauli_label(label: &str) -> std::result::Result<Mat2, String> {
    match label.to_ascii_lowercase().as_str() {
        "i" => Ok(Mat2::identity()),
        "x" => Ok(pauli(Axis::X)),
        "y" => Ok(pauli(Axis::Y)),
        "z" => Ok(pauli(Axis::Z)),
        _ => Err(format!("unknown Pauli label `{label}`; expected i, x, y or z")),
    }
}

impl TryFrom<RawFactor> for Factor {
    type Error = String;

    fn try_from(raw: RawFactor) -> std::result::Result<Self, Self::Error> {
        let vertex: Vertex = raw.vertex.parse().map_err(|e: xyqmc::Error| e.to_string())?;
        if !vertex.fits_order(2) {
            return Err(format!("vertex `{vertex}` is not on the tree of order 2"));
        }
        let matrix = match (raw.pauli, raw.matrix) {
            (Some(label), None) => pauli_label(&label)?,
            (None, Some(m)) => {
                let entry = |r: usize, c: usize| C64::new(m[r][c][0], m[r][c][1]);
                let out = Mat2::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1));
                if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err("matrix entries must be finite".into());
                }
                out
            }
            _ => return Err(format!("factor at `{vertex}` needs exactly one of `pauli` or `matrix`")),
        };
        Ok(Factor { vertex, matrix })
    }
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Term {
    #[serde(default = "one")]
    coeff: [f64; 2],
    #[serde(default)]
    factors: Vec<Factor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableFile {
    terms: Vec<Term>,
}

impl From<ObservableFile> for ProductObservable {
    fn from(file: ObservableFile) -> Self {
        let terms = file
            .terms
            .into_iter()
            .map(|t| {
                let mut merged: Vec<(Vertex, Mat2)> = Vec::new();
                for f in t.factors {
                    match merged.iter_mut().find(|(x, _)| *x == f.vertex) {
                        Some((_, m)) => *m *= f.matrix,
                        None => merged.push((f.vertex, f.matrix)),
                    }
                }
                ProductTerm::new(C64::new(t.coeff[0], t.coeff[1]), merged)
            })
            .collect();
        ProductObservable::from_terms(terms)
    }
}

pub fn parse_observable(text: &str) -> std::result::Result<ProductObservable, serde_json::Error> {
    let file: ObservableFile = serde_json::from_str(text)?;
    Ok(file.into())
}

/// Reads `path`, or standard input for `-`.
pub fn read_observable(path: &Path) -> Result<ProductObservable> {
    let name = path.display().to_string();
    let mut text = String::new();
    let read = if name == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|source| CliError::Read { path: name.clone(), source })?;
    parse_observable(&text).map_err(|source| CliError::Parse { path: name, source })
}
