use nalgebra::{DMatrix, DVector};

use super::scc::{period, strongly_connected_components};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1_000_000,
        }
    }
}

/// Irreducible and aperiodic, i.e. some power of `m` is strictly positive.
///
/// Checked on the support graph: one strongly connected component whose
/// cycle lengths have gcd 1.
pub fn is_primitive(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return false;
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| m[(i, j)] > 0.0).collect())
        .collect();
    let comps = strongly_connected_components(&adj);
    comps.len() == 1 && period(&adj, &comps[0]) == 1
}

/// Normalized dominant left eigenvector `w(M)` of a primitive row-stochastic
/// matrix: `wᵀM = wᵀ`, `w ≻ 0`, `1ᵀw = 1`.
///
/// Power iteration from the uniform vector. The returned vector satisfies
/// `‖wᵀM − wᵀ‖₁ ≤ tol`.
pub fn dominant_left_eigenvector(m: &DMatrix<f64>, opts: EigenOptions) -> Result<DVector<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if let Some((idx, &v)) = m.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeEntry {
            row: idx % rows,
            col: idx / rows,
            value: v,
        });
    }
    if !is_primitive(m) {
        return Err(Error::PeriodicOrReducible);
    }
    let n = rows;
    let mut w = DVector::from_element(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut next = m.tr_mul(&w);
        residual = (&next - &w).lp_norm(1);
        if residual <= opts.tol {
            return Ok(w);
        }
        let s = next.sum();
        next.unscale_mut(s);
        w = next;
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual,
        last: Some(Box::new(DMatrix::from_column_slice(n, 1, w.as_slice()))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Stationary distribution of a 2-state chain: (δ21, δ12) / (δ12 + δ21).
    fn two_state(d12: f64, d21: f64) -> (f64, f64) {
        (d21 / (d12 + d21), d12 / (d12 + d21))
    }

    #[test]
    fn two_state_chains() {
        for &(a, b) in &[(0.4, 0.3), (0.5, 0.1)] {
            let m = DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]);
            let w = dominant_left_eigenvector(&m, EigenOptions::default()).unwrap();
            let (w1, w2) = two_state(a, b);
            assert_abs_diff_eq!(w[0], w1, epsilon = 1e-12);
            assert_abs_diff_eq!(w[1], w2, epsilon = 1e-12);
            assert!((m.tr_mul(&w) - &w).lp_norm(1) <= 1e-12);
        }
        // spot values
        let m = DMatrix::from_row_slice(2, 2, &[0.6, 0.4, 0.3, 0.7]);
        let w = dominant_left_eigenvector(&m, EigenOptions::default()).unwrap();
        assert_abs_diff_eq!(w[0], 3.0 / 7.0, epsilon = 1e-12);
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.1, 0.9]);
        let w = dominant_left_eigenvector(&m, EigenOptions::default()).unwrap();
        assert_abs_diff_eq!(w[0], 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_and_flip_rejected() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            dominant_left_eigenvector(&id, EigenOptions::default()),
            Err(Error::PeriodicOrReducible)
        ));
        let flip = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            dominant_left_eigenvector(&flip, EigenOptions::default()),
            Err(Error::PeriodicOrReducible)
        ));
    }

    #[test]
    fn scalar() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let w = dominant_left_eigenvector(&one, EigenOptions::default()).unwrap();
        assert_eq!(w.as_slice(), &[1.0]);
    }

    #[test]
    fn iteration_cap() {
        let m = DMatrix::from_row_slice(2, 2, &[0.999, 0.001, 0.002, 0.998]);
        let err = dominant_left_eigenvector(
            &m,
            EigenOptions {
                tol: 1e-300,
                max_iter: 5,
            },
        )
        .unwrap_err();
        assert!(err.is_non_convergence());
    }

    fn primitive_matrix() -> impl Strategy<Value = DMatrix<f64>> {
        (2usize..8).prop_flat_map(|n| {
            proptest::collection::vec(0.01f64..1.0, n * n).prop_map(move |v| {
                let mut m = DMatrix::from_row_slice(n, n, &v);
                for i in 0..n {
                    let s = m.row(i).sum();
                    m.row_mut(i).unscale_mut(s);
                }
                m
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn residual_and_positivity(m in primitive_matrix()) {
            let tol = 1e-12;
            let w = dominant_left_eigenvector(&m, EigenOptions { tol, max_iter: 1_000_000 }).unwrap();
            prop_assert!((m.tr_mul(&w) - &w).lp_norm(1) <= tol);
            prop_assert!(w.min() > 0.0);
            prop_assert!((w.sum() - 1.0).abs() < 1e-12);
        }
    }
}
