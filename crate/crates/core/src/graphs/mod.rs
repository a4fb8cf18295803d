//! The two graphs of the model: the undirected social network and the
//! directed product-conversion graph.

mod conversion;
mod eigen;
pub mod io;
pub mod scc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use conversion::{CaseLabel, ProductConversionGraph, ROW_SUM_TOLERANCE};
pub use eigen::{dominant_left_eigenvector, is_primitive, EigenOptions};

/// Undirected, unweighted, connected graph without self loops.
///
/// Stores the 0/1 adjacency `A`, the row-normalized adjacency
/// `Ã = diag(1/N_i) A`, and neighbor lists for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialNetwork {
    adjacency: DMatrix<f64>,
    normalized: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl SocialNetwork {
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = adjacency.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyGraph);
        }
        let n = rows;
        for i in 0..n {
            for j in 0..n {
                let v = adjacency[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::NonBinaryEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::SelfLoopPresent { node: i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if adjacency[(i, j)] != adjacency[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| adjacency[(i, j)] == 1.0).collect())
            .collect();
        if let Some(node) = neighbors.iter().position(Vec::is_empty) {
            // a single isolated node is still a one-node "connected" graph, but
            // the model needs a neighbor to copy from
            return Err(Error::IsolatedNode { node });
        }
        let components = count_components(&neighbors);
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        let normalized = DMatrix::from_fn(n, n, |i, j| {
            adjacency[(i, j)] / neighbors[i].len() as f64
        });
        Ok(Self {
            adjacency,
            normalized,
            neighbors,
        })
    }

    /// Builds from an undirected edge list on nodes `0..n`. Duplicate edges
    /// collapse; self loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraphSpec(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                return Err(Error::SelfLoopPresent { node: i });
            }
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
        Self::from_adjacency(adjacency)
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Row-normalized adjacency `Ã`.
    pub fn normalized(&self) -> &DMatrix<f64> {
        &self.normalized
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }
}

pub(crate) fn count_components(neighbors: &[Vec<usize>]) -> usize {
    let n = neighbors.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in &neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}

/// Per-node probability of engaging in social conversion, each strictly
/// inside (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OpenMindedness(Vec<f64>);

impl OpenMindedness {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (node, &value) in values.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::OpenMindednessOutOfRange { node, value });
            }
        }
        Ok(Self(values))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch {
                what: "open-mindedness vector",
                expected: n,
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for OpenMindedness {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for OpenMindedness {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OpenMindedness> for Vec<f64> {
    fn from(a: OpenMindedness) -> Self {
        a.0
    }
}

/// `M = diag(α)Ã + I − diag(α)`: the consensus matrix that governs the total
/// mass each absorbing component holds at every node.
pub fn mixing_matrix(net: &SocialNetwork, alpha: &OpenMindedness) -> Result<DMatrix<f64>> {
    let n = net.n();
    alpha.check_len(n)?;
    let a = net.normalized();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let social = alpha[i] * a[(i, j)];
        if i == j {
            social + 1.0 - alpha[i]
        } else {
            social
        }
    }))
}
