use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::scc::{period, strongly_connected_components};
use crate::error::{Error, Result};

/// Rows of a user-supplied conversion matrix may miss 1 by this much; they are
/// renormalized on construction.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Rows already this close to 1 are stored verbatim.
const EXACT_ROW_SUM: f64 = 1e-12;

/// Structure of the conversion graph: number of absorbing strongly connected
/// components and whether transient products exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// One absorbing component covering every product.
    Case1,
    /// One absorbing component plus transient products.
    Case2,
    /// Several absorbing components, no transient products.
    Case3,
    /// Several absorbing components plus transient products.
    Case4,
}

impl CaseLabel {
    fn classify(components: usize, transient: usize) -> Self {
        match (components > 1, transient > 0) {
            (false, false) => CaseLabel::Case1,
            (false, true) => CaseLabel::Case2,
            (true, false) => CaseLabel::Case3,
            (true, true) => CaseLabel::Case4,
        }
    }
}

/// Row-stochastic product-conversion matrix `Δ` with its decomposition into
/// absorbing components `Θ_1..Θ_m` and the transient set `Λ`.
///
/// Products are re-indexed as `Θ_1, …, Θ_m, Λ`, under which
///
/// ```text
/// Δ = [ diag(Δ_1, …, Δ_m)   0  ]
///     [ B_1 … B_m          Δ_0 ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ProductConversionGraph {
    delta: DMatrix<f64>,
    absorbing: Vec<Vec<usize>>,
    transient: Vec<usize>,
    case: CaseLabel,
    aperiodic: Vec<bool>,
    ordering: Vec<usize>,
    absorbing_blocks: Vec<DMatrix<f64>>,
    inflow_blocks: Vec<DMatrix<f64>>,
    transient_block: DMatrix<f64>,
}

impl ProductConversionGraph {
    pub fn new(delta: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = delta.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyGraph);
        }
        let r = rows;
        let mut delta = delta;
        for i in 0..r {
            for j in 0..r {
                let v = delta[(i, j)];
                if v.is_nan() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
            let sum = delta.row(i).sum();
            if !sum.is_finite() || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotRowStochastic { row: i, sum });
            }
            if (sum - 1.0).abs() > EXACT_ROW_SUM {
                delta.row_mut(i).unscale_mut(sum);
            }
        }

        let adj = support(&delta);
        let mut absorbing: Vec<Vec<usize>> = strongly_connected_components(&adj)
            .into_iter()
            .filter(|comp| {
                comp.iter()
                    .all(|&u| adj[u].iter().all(|v| comp.binary_search(v).is_ok()))
            })
            .collect();
        absorbing.sort_by_key(|comp| comp[0]);
        let mut in_absorbing = vec![false; r];
        for comp in &absorbing {
            for &u in comp {
                in_absorbing[u] = true;
            }
        }
        let transient: Vec<usize> = (0..r).filter(|&u| !in_absorbing[u]).collect();
        let case = CaseLabel::classify(absorbing.len(), transient.len());

        let aperiodic: Vec<bool> = absorbing.iter().map(|c| period(&adj, c) == 1).collect();
        for (l, ok) in aperiodic.iter().enumerate() {
            if !ok {
                log::warn!(
                    "absorbing component {} {:?} of the conversion graph is periodic",
                    l,
                    absorbing[l]
                );
            }
        }

        let ordering: Vec<usize> = absorbing
            .iter()
            .flatten()
            .chain(transient.iter())
            .copied()
            .collect();
        let absorbing_blocks = absorbing.iter().map(|c| submatrix(&delta, c, c)).collect();
        let inflow_blocks = absorbing
            .iter()
            .map(|c| submatrix(&delta, &transient, c))
            .collect();
        let transient_block = submatrix(&delta, &transient, &transient);

        Ok(Self {
            delta,
            absorbing,
            transient,
            case,
            aperiodic,
            ordering,
            absorbing_blocks,
            inflow_blocks,
            transient_block,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if let Some(bad) = rows.iter().find(|row| row.len() != r) {
            return Err(Error::NotSquare {
                rows: r,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
    }

    pub fn identity(r: usize) -> Self {
        Self::new(DMatrix::identity(r, r)).expect("identity is row-stochastic")
    }

    /// Number of products.
    pub fn r(&self) -> usize {
        self.delta.nrows()
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }

    pub fn case(&self) -> CaseLabel {
        self.case
    }

    /// Absorbing components in original product indices, ordered by their
    /// smallest member.
    pub fn absorbing_components(&self) -> &[Vec<usize>] {
        &self.absorbing
    }

    pub fn transient(&self) -> &[usize] {
        &self.transient
    }

    pub fn is_aperiodic(&self, component: usize) -> bool {
        self.aperiodic[component]
    }

    /// New index -> original product index for the `Θ_1, …, Θ_m, Λ` layout.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    /// `Δ_l`, the conversion matrix restricted to absorbing component `l`.
    pub fn absorbing_block(&self, component: usize) -> &DMatrix<f64> {
        &self.absorbing_blocks[component]
    }

    /// `B_l`, transient-to-component-`l` conversion probabilities.
    pub fn inflow_block(&self, component: usize) -> &DMatrix<f64> {
        &self.inflow_blocks[component]
    }

    /// `Δ_0`, conversions within the transient set.
    pub fn transient_block(&self) -> &DMatrix<f64> {
        &self.transient_block
    }

    /// Whether `Δ_l` has a column with every entry strictly positive.
    pub fn has_positive_column(&self, component: usize) -> bool {
        let block = &self.absorbing_blocks[component];
        block
            .column_iter()
            .any(|col| col.iter().all(|&v| v > 0.0))
    }

    /// Rebuilds `Δ` in original indexing from the stored blocks.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.r(), self.r());
        for (comp, block) in self.absorbing.iter().zip(&self.absorbing_blocks) {
            scatter(&mut out, block, comp, comp);
        }
        for (comp, block) in self.absorbing.iter().zip(&self.inflow_blocks) {
            scatter(&mut out, block, &self.transient, comp);
        }
        scatter(&mut out, &self.transient_block, &self.transient, &self.transient);
        out
    }

    /// `Δ` permuted into the block layout (rows and columns in `ordering()`).
    pub fn reordered(&self) -> DMatrix<f64> {
        submatrix(&self.delta, &self.ordering, &self.ordering)
    }

    /// Adjacency lists of `G(Δ)`: an edge r -> s whenever `δ_rs > 0`.
    pub fn support(&self) -> Vec<Vec<usize>> {
        support(&self.delta)
    }
}

fn support(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).filter(|&j| m[(i, j)] > 0.0).collect())
        .collect()
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn scatter(out: &mut DMatrix<f64>, block: &DMatrix<f64>, rows: &[usize], cols: &[usize]) {
    for (bi, &i) in rows.iter().enumerate() {
        for (bj, &j) in cols.iter().enumerate() {
            out[(i, j)] = block[(bi, bj)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn eq7() -> ProductConversionGraph {
        ProductConversionGraph::from_rows(&[
            vec![0.6, 0.4, 0.0, 0.0],
            vec![0.3, 0.7, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.8, 0.0, 0.2],
        ])
        .unwrap()
    }

    #[test]
    fn single_component() {
        let g = ProductConversionGraph::from_rows(&[vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
        assert_eq!(g.case(), CaseLabel::Case1);
        assert_eq!(g.absorbing_components(), &[vec![0, 1]]);
        assert!(g.transient().is_empty());
        assert!(g.is_aperiodic(0));
        assert!(g.has_positive_column(0));
    }

    #[test]
    fn block_diagonal_is_case3() {
        let g = ProductConversionGraph::from_rows(&[
            vec![0.6, 0.4, 0.0, 0.0],
            vec![0.3, 0.7, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.1, 0.9],
        ])
        .unwrap();
        assert_eq!(g.case(), CaseLabel::Case3);
        assert_eq!(g.absorbing_components(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn simulation_matrix_is_case4() {
        let g = eq7();
        assert_eq!(g.case(), CaseLabel::Case4);
        assert_eq!(g.absorbing_components(), &[vec![0, 1], vec![2]]);
        assert_eq!(g.transient(), &[3]);
        assert_eq!(g.inflow_block(0).as_slice(), &[0.0, 0.8]);
        assert_eq!(g.inflow_block(1).as_slice(), &[0.0]);
        assert_eq!(g.transient_block()[(0, 0)], 0.2);
        assert_eq!(g.reassemble(), *g.delta());
    }

    #[test]
    fn case2_with_reindexing() {
        // product 0 is transient and feeds the component {1, 2}
        let g = ProductConversionGraph::from_rows(&[
            vec![0.5, 0.25, 0.25],
            vec![0.0, 0.6, 0.4],
            vec![0.0, 0.3, 0.7],
        ])
        .unwrap();
        assert_eq!(g.case(), CaseLabel::Case2);
        assert_eq!(g.ordering(), &[1, 2, 0]);
        let re = g.reordered();
        assert_eq!(re[(2, 2)], 0.5);
        assert_eq!(re[(0, 2)], 0.0);
        assert_eq!(g.reassemble(), *g.delta());
    }

    #[test]
    fn periodic_component_flagged() {
        let g = ProductConversionGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(g.case(), CaseLabel::Case1);
        assert!(!g.is_aperiodic(0));
        assert!(!g.has_positive_column(0));
    }

    #[test]
    fn stochasticity_checks() {
        assert!(matches!(
            ProductConversionGraph::from_rows(&[vec![1.1, -0.1], vec![0.5, 0.5]]),
            Err(Error::NegativeEntry { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            ProductConversionGraph::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]]),
            Err(Error::NotRowStochastic { row: 0, .. })
        ));
        // within tolerance: renormalized
        let g = ProductConversionGraph::from_rows(&[
            vec![0.5, 0.5 + 5e-10],
            vec![0.5, 0.5],
        ])
        .unwrap();
        assert!((g.delta().row(0).sum() - 1.0).abs() < 1e-15);
    }
}
