//! JSON matrix and generator files, and the JSON-lines record format.
//!
//! A matrix is either a bare array of rows, `[[2, 1], [1, 1]]`, or an object
//! `{"entries": [[...]], "exact": [["p/q", ...], ...]}` where either key may be
//! omitted (but not both). When both are present they must agree to 1e-9.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flag::{Flag, OppositeFlag};
use crate::group::{GroupElement, GroupError};
use crate::orbit::OrbitRecord;
use crate::rational::{RationalError, RationalMatrix};

/// Input files larger than this are refused before parsing.
pub const MAX_INPUT_BYTES: usize = 16 << 20;
pub const MAX_GENERATORS: usize = 64;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Full(FullMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullMatrix {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorFile {
    List(Vec<MatrixSpec>),
    Wrapped { generators: Vec<MatrixSpec> },
}

fn square(rows: &[Vec<f64>]) -> Result<usize, IoError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Shape("matrix must be a nonempty square array of rows".into()));
    }
    Ok(n)
}

fn element_from_rows(rows: &[Vec<f64>]) -> Result<GroupElement, IoError> {
    let n = square(rows)?;
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(GroupElement::from_row_slice(n, &flat)?)
}

impl MatrixSpec {
    pub fn to_element(&self) -> Result<GroupElement, IoError> {
        self.element(false)
    }

    /// Like `to_element`, with the determinant tolerance of a computed product.
    pub fn to_computed_element(&self) -> Result<GroupElement, IoError> {
        self.element(true)
    }

    fn element(&self, computed: bool) -> Result<GroupElement, IoError> {
        let from_rows = |rows: &[Vec<f64>]| -> Result<GroupElement, IoError> {
            if computed {
                let n = square(rows)?;
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Ok(GroupElement::new_computed(nalgebra::DMatrix::from_row_slice(n, n, &flat))?)
            } else {
                element_from_rows(rows)
            }
        };
        match self {
            MatrixSpec::Rows(rows) => from_rows(rows),
            MatrixSpec::Full(FullMatrix { entries, exact }) => match (entries, exact) {
                (None, None) => Err(IoError::Shape("matrix object needs \"entries\" or \"exact\"".into())),
                (Some(rows), None) => from_rows(rows),
                (None, Some(ex)) => Ok(GroupElement::from_exact(RationalMatrix::from_strings(ex)?)?),
                (Some(rows), Some(ex)) => {
                    let n = square(rows)?;
                    let exact = RationalMatrix::from_strings(ex)?;
                    if exact.dim() != n {
                        return Err(IoError::Shape("entries and exact differ in size".into()));
                    }
                    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                    let m = nalgebra::DMatrix::from_row_slice(n, n, &flat);
                    Ok(GroupElement::with_exact(m, exact)?)
                }
            },
        }
    }

    pub fn from_element(g: &GroupElement) -> Self {
        let rows = crate::linalg::matrix_to_rows(g.matrix());
        match g.exact() {
            Some(ex) => MatrixSpec::Full(FullMatrix {
                entries: Some(rows),
                exact: Some(ex.to_strings()),
            }),
            None => MatrixSpec::Rows(rows),
        }
    }
}

fn check_size(input: &str) -> Result<(), IoError> {
    if input.len() > MAX_INPUT_BYTES {
        return Err(IoError::Shape(format!("input exceeds {MAX_INPUT_BYTES} bytes")));
    }
    Ok(())
}

pub fn parse_matrix(input: &str) -> Result<GroupElement, IoError> {
    check_size(input)?;
    serde_json::from_str::<MatrixSpec>(input)?.to_element()
}

/// Accepts a bare array of matrices or `{"generators": [...]}`.
pub fn parse_generators(input: &str) -> Result<Vec<GroupElement>, IoError> {
    check_size(input)?;
    let specs = match serde_json::from_str::<GeneratorFile>(input)? {
        GeneratorFile::List(v) | GeneratorFile::Wrapped { generators: v } => v,
    };
    if specs.is_empty() || specs.len() > MAX_GENERATORS {
        return Err(IoError::Shape(format!("expected 1..={MAX_GENERATORS} generators")));
    }
    let gens: Vec<GroupElement> = specs.iter().map(MatrixSpec::to_element).collect::<Result<_, _>>()?;
    if gens.iter().any(|g| g.dim() != gens[0].dim()) {
        return Err(IoError::Shape("generators differ in dimension".into()));
    }
    Ok(gens)
}

pub fn generators_to_json(gens: &[GroupElement]) -> String {
    let specs: Vec<MatrixSpec> = gens.iter().map(MatrixSpec::from_element).collect();
    serde_json::to_string_pretty(&specs).expect("matrices serialize")
}

pub fn parse_flag(input: &str) -> Result<Flag, IoError> {
    check_size(input)?;
    Ok(serde_json::from_str(input)?)
}

pub fn parse_opposite_flag(input: &str) -> Result<OppositeFlag, IoError> {
    check_size(input)?;
    Ok(serde_json::from_str(input)?)
}

/// One line of a records file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordLine {
    pub word: Vec<usize>,
    pub matrix: MatrixSpec,
    pub kappa: Vec<f64>,
    pub norm: f64,
    pub k_flag: Flag,
    pub l_flag: OppositeFlag,
}

impl From<&OrbitRecord> for RecordLine {
    fn from(r: &OrbitRecord) -> Self {
        RecordLine {
            word: r.word.clone(),
            matrix: MatrixSpec::from_element(&r.matrix),
            kappa: r.kappa.coords().to_vec(),
            norm: r.norm(),
            k_flag: r.k_flag.clone(),
            l_flag: r.l_flag.clone(),
        }
    }
}

pub fn records_to_jsonl(records: &[OrbitRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&RecordLine::from(r)).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_record_line(line: &str) -> Result<RecordLine, IoError> {
    check_size(line)?;
    let rec: RecordLine = serde_json::from_str(line)?;
    let g = rec.matrix.to_computed_element()?;
    if rec.kappa.len() != g.dim() || rec.k_flag.dim() != g.dim() || rec.l_flag.dim() != g.dim() {
        return Err(IoError::Shape("record fields disagree in dimension".into()));
    }
    Ok(rec)
}
