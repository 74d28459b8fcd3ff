//! Serialization building blocks shared by certificates, campaign
//! reports and the CLI.
//!
//! Numbers travel as text tokens so both modes round-trip losslessly:
//! floats as 17-significant-digit scientific notation, rationals as
//! fraction strings like `3/4`. Matrices either inline in the JSON or
//! point at a CSV file next to it. Reports carry no wall-clock data, so
//! a fixed (command, seed, config) triple reproduces byte-identical
//! output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::matrix::Mat;
use crate::operator::LatticeOperator;
use crate::scalar::{parse_ratio, Scalar};
use crate::space::WeightedSpace;
use crate::tolerance::ToleranceConfig;

/// Header embedded in every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    /// Tag of the statement the report exercises, e.g. "Thm 4.1".
    pub statement: String,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
}

impl Meta {
    pub fn new(statement: &str, seed: u64, tolerances: &ToleranceConfig) -> Self {
        Meta {
            tool: "latcomm".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            statement: statement.to_string(),
            seed,
            tolerances: tolerances.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub dim: usize,
    pub kind: String,
    pub weights: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<SpaceDoc>,
}

pub fn space_to_doc(space: &WeightedSpace) -> SpaceDoc {
    let blocks = space.blocks();
    SpaceDoc {
        dim: space.dim(),
        kind: space.kind().tag().to_string(),
        weights: space.weights().iter().map(|w| w.to_string()).collect(),
        blocks: if blocks.len() > 1 {
            blocks.into_iter().map(space_to_doc).collect()
        } else {
            Vec::new()
        },
    }
}

pub fn space_from_doc(doc: &SpaceDoc) -> Result<WeightedSpace> {
    let space = if doc.blocks.is_empty() {
        let weights = doc
            .weights
            .iter()
            .map(|w| parse_ratio(w))
            .collect::<Result<Vec<_>>>()?;
        WeightedSpace::with_weights(weights)?
    } else {
        let blocks = doc
            .blocks
            .iter()
            .map(space_from_doc)
            .collect::<Result<Vec<_>>>()?;
        WeightedSpace::direct_sum(blocks)?
    };
    if space.dim() != doc.dim {
        return Err(LatticeError::BadDescriptor(format!(
            "space doc says dim {} but weights give {}",
            doc.dim,
            space.dim()
        )));
    }
    Ok(space)
}

/// Matrix body: inline rows of tokens, or a CSV file path relative to
/// the JSON document that references it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixPayload {
    Inline { rows: Vec<Vec<String>> },
    Csv { csv: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub domain: SpaceDoc,
    pub codomain: SpaceDoc,
    /// True when the entries came from exact rational arithmetic.
    pub exact: bool,
    pub matrix: MatrixPayload,
}

pub fn operator_to_doc<S: Scalar>(op: &LatticeOperator<S>) -> OperatorDoc {
    OperatorDoc {
        domain: space_to_doc(op.domain()),
        codomain: space_to_doc(op.codomain()),
        exact: S::EXACT,
        matrix: MatrixPayload::Inline {
            rows: matrix_rows(op.entries()),
        },
    }
}

/// Like `operator_to_doc`, but writes the matrix to `dir/name` and
/// references it by file name.
pub fn operator_to_csv_doc<S: Scalar>(
    op: &LatticeOperator<S>,
    dir: &Path,
    name: &str,
) -> Result<OperatorDoc> {
    write_matrix_csv(op.entries(), &dir.join(name))?;
    Ok(OperatorDoc {
        domain: space_to_doc(op.domain()),
        codomain: space_to_doc(op.codomain()),
        exact: S::EXACT,
        matrix: MatrixPayload::Csv {
            csv: name.to_string(),
        },
    })
}

/// Rebuilds an operator; `base` resolves CSV references.
pub fn operator_from_doc<S: Scalar>(
    doc: &OperatorDoc,
    base: Option<&Path>,
) -> Result<LatticeOperator<S>> {
    let domain = space_from_doc(&doc.domain)?;
    let codomain = space_from_doc(&doc.codomain)?;
    let rows = match &doc.matrix {
        MatrixPayload::Inline { rows } => parse_rows(rows)?,
        MatrixPayload::Csv { csv } => {
            let path = match base {
                Some(b) => b.join(csv),
                None => Path::new(csv).to_path_buf(),
            };
            let text = fs::read_to_string(&path)
                .map_err(|e| LatticeError::MatrixIo(format!("{}: {e}", path.display())))?;
            parse_rows(
                &text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| l.split(',').map(|c| c.trim().to_string()).collect())
                    .collect::<Vec<Vec<String>>>(),
            )?
        }
    };
    LatticeOperator::new(domain, codomain, Mat::from_rows(rows)?)
}

fn matrix_rows<S: Scalar>(m: &Mat<S>) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_token()).collect())
        .collect()
}

fn parse_rows<S: Scalar>(rows: &[Vec<String>]) -> Result<Vec<Vec<S>>> {
    rows.iter()
        .map(|r| r.iter().map(|c| S::parse_token(c)).collect())
        .collect()
}

pub fn write_matrix_csv<S: Scalar>(m: &Mat<S>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in matrix_rows(m) {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| LatticeError::MatrixIo(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    #[test]
    fn space_doc_round_trip() {
        let space = WeightedSpace::direct_sum(vec![
            WeightedSpace::sequence(2).unwrap(),
            WeightedSpace::dyadic(3).unwrap(),
        ])
        .unwrap();
        let doc = space_to_doc(&space);
        assert_eq!(doc.kind, "direct_sum");
        assert_eq!(doc.blocks.len(), 2);
        let back = space_from_doc(&doc).unwrap();
        assert_eq!(back, space);
        assert_eq!(back.block_offsets(), space.block_offsets());
    }

    #[test]
    fn operator_doc_round_trip_inline() {
        let s = WeightedSpace::dyadic(2).unwrap();
        let op = LatticeOperator::from_fn(s.clone(), s, |i, j| {
            Rat::new((i as i64 + 1).into(), (j as i64 + 2).into())
        });
        let doc = operator_to_doc(&op);
        assert!(doc.exact);
        let back: LatticeOperator<Rat> = operator_from_doc(&doc, None).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn operator_doc_round_trip_csv() {
        let dir = std::env::temp_dir().join(format!("latcomm-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let s = WeightedSpace::sequence(2).unwrap();
        let op = LatticeOperator::from_fn(s.clone(), s, |i, j| (i as f64) / 3.0 - (j as f64) / 7.0);
        let doc = operator_to_csv_doc(&op, &dir, "a.csv").unwrap();
        let back: LatticeOperator<f64> = operator_from_doc(&doc, Some(&dir)).unwrap();
        assert_eq!(back, op);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn json_shape_of_meta_is_stable() {
        let meta = Meta::new("Thm 4.1", 7, &ToleranceConfig::default());
        let text = serde_json::to_string(&meta).unwrap();
        let again = serde_json::to_string(&meta).unwrap();
        assert_eq!(text, again);
        assert!(text.contains("\"tool\":\"latcomm\""));
        assert!(text.contains("\"statement\":\"Thm 4.1\""));
    }
}
