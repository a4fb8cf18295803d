//! Graph ingestion: a JSON document carrying the model matrices, and a plain
//! "i j" edge-list format (0-indexed, one undirected edge per line).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{OpenMindedness, ProductConversionGraph, SocialNetwork};
use crate::error::{Error, Result};

/// `{"adjacency": [[...]], "delta": [[...]], "alpha": [...]}`; every field is
/// optional so partial documents (a graph only, say) are accepted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

impl ModelInput {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn network(&self) -> Result<Option<SocialNetwork>> {
        self.adjacency
            .as_deref()
            .map(|rows| SocialNetwork::from_adjacency(square_matrix(rows)?))
            .transpose()
    }

    pub fn conversion(&self) -> Result<Option<ProductConversionGraph>> {
        self.delta
            .as_deref()
            .map(ProductConversionGraph::from_rows)
            .transpose()
    }

    pub fn open_mindedness(&self) -> Result<Option<OpenMindedness>> {
        self.alpha.clone().map(OpenMindedness::new).transpose()
    }

    pub fn from_network(net: &SocialNetwork) -> Self {
        Self {
            adjacency: Some(matrix_rows(net.adjacency())),
            ..Self::default()
        }
    }
}

pub(crate) fn square_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Parses "i j" lines. Blank lines and lines starting with `#` are skipped.
/// The node count is the largest index plus one unless `n` is given.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<SocialNetwork> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut field = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: expected two node indices", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        let i = field()?;
        let j = field()?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: trailing fields after edge",
                lineno + 1
            )));
        }
        edges.push((i, j));
    }
    let n = n.unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(i, j)| i.max(j) + 1)
            .max()
            .unwrap_or(0)
    });
    SocialNetwork::from_edges(n, &edges)
}

pub fn write_edge_list(net: &SocialNetwork) -> String {
    let mut out = String::new();
    for (i, j) in net.edges() {
        writeln!(out, "{i} {j}").expect("writing to a String cannot fail");
    }
    out
}
