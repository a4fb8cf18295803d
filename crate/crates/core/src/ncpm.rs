//! Mean-field (independence-approximation) propagation models.
//!
//! * social-self: `f(P) = diag(α)ÃP + (I − diag(α))PΔ`
//! * self-social: `P Δ + diag(α)diag(Pδ)ÃP − diag(α)P diag(δ)` with `δ` the
//!   diagonal of `Δ`
//! * the two-product self-social reduction `h` on `p = p₂ ∈ [0,1]ⁿ` and its
//!   contraction `T`, which share the same unique fixed point.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{OpenMindedness, ProductConversionGraph, SocialNetwork};

/// Row sums of a probability matrix must be within this of 1.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Floating-point drift outside [0, 1] up to this size is snapped back.
pub const SNAP_TOLERANCE: f64 = 1e-15;

/// Internal map outputs whose row sums drift further than this indicate a bug.
const DRIFT_TOLERANCE: f64 = 1e-9;

/// Induced ∞-norm (maximum absolute row sum). For a column vector this is
/// the maximum absolute entry.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `n × R` matrix of adoption probabilities `p_ir = P[node i holds product r]`,
/// each row on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix(DMatrix<f64>);

impl ProbabilityMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let m = snap(m)?;
        for (i, row) in m.row_iter().enumerate() {
            let sum = row.sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(Error::InvariantViolation(format!(
                    "row {i} of probability matrix sums to {sum}"
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let r = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != r) {
            return Err(Error::DimensionMismatch {
                what: "probability matrix row",
                expected: r,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, r, |i, j| rows[i][j]))
    }

    pub fn uniform(n: usize, r: usize) -> Self {
        Self(DMatrix::from_element(n, r, 1.0 / r as f64))
    }

    /// Every row equal to `row` (the rank-one state `1ₙ rowᵀ`).
    pub fn consensus(n: usize, row: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, row.len(), |_, j| row[j]))
    }

    /// Rows drawn uniformly from the simplex.
    pub fn random<G: Rng + ?Sized>(n: usize, r: usize, rng: &mut G) -> Self {
        let mut m = DMatrix::from_fn(n, r, |_, _| rng.sample::<f64, _>(Exp1));
        for mut row in m.row_iter_mut() {
            let s = row.sum();
            row.unscale_mut(s);
        }
        Self(m)
    }

    /// Accepts an output of one of the model maps: snaps rounding drift,
    /// rescales rows back onto the simplex and rejects genuine invariant
    /// violations.
    ///
    /// The self-social map amplifies row-sum errors off the simplex, so
    /// rescaling every step keeps long iterations from drifting away.
    pub(crate) fn from_map_output(m: DMatrix<f64>) -> Result<Self> {
        let mut m = snap(m)?;
        for (i, mut row) in m.row_iter_mut().enumerate() {
            let sum = row.sum();
            if (sum - 1.0).abs() > DRIFT_TOLERANCE {
                return Err(Error::InvariantViolation(format!(
                    "row {i} sums to {sum} after a model step"
                )));
            }
            if sum != 1.0 {
                row /= sum;
            }
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn r(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, node: usize, product: usize) -> f64 {
        self.0[(node, product)]
    }

    /// Largest entrywise spread between rows; zero for a rank-one state.
    pub fn row_spread(&self) -> f64 {
        (0..self.r())
            .map(|c| {
                let col = self.0.column(c);
                col.max() - col.min()
            })
            .fold(0.0, f64::max)
    }

    /// Mean of each column, `1ᵀp_r / n`.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.0.column_iter().map(|c| c.sum() / n).collect()
    }
}

fn snap(mut m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    for (idx, v) in m.iter_mut().enumerate() {
        if *v >= 0.0 && *v <= 1.0 {
            continue;
        }
        if *v >= -SNAP_TOLERANCE && *v < 0.0 {
            *v = 0.0;
        } else if *v > 1.0 && *v <= 1.0 + SNAP_TOLERANCE {
            *v = 1.0;
        } else {
            return Err(Error::InvariantViolation(format!(
                "probability entry {idx} = {v} outside [0, 1]"
            )));
        }
    }
    Ok(m)
}

fn check_dims(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    p: &DMatrix<f64>,
) -> Result<()> {
    alpha.check_len(net.n())?;
    if p.nrows() != net.n() {
        return Err(Error::DimensionMismatch {
            what: "probability matrix rows",
            expected: net.n(),
            found: p.nrows(),
        });
    }
    if p.ncols() != pcg.r() {
        return Err(Error::DimensionMismatch {
            what: "probability matrix columns",
            expected: pcg.r(),
            found: p.ncols(),
        });
    }
    Ok(())
}

/// `diag(α)ÃX + (I − diag(α))XΔ` without domain checks.
pub(crate) fn social_self_raw(
    normalized: &DMatrix<f64>,
    alpha: &[f64],
    delta: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut social = normalized * x;
    let own = x * delta;
    for (i, &a) in alpha.iter().enumerate() {
        for r in 0..x.ncols() {
            social[(i, r)] = a * social[(i, r)] + (1.0 - a) * own[(i, r)];
        }
    }
    social
}

pub(crate) fn self_social_raw(
    normalized: &DMatrix<f64>,
    alpha: &[f64],
    delta: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> DMatrix<f64> {
    let stay = delta.diagonal();
    let stay_mass = x * &stay;
    let neighbors = normalized * x;
    let mut out = x * delta;
    for (i, &a) in alpha.iter().enumerate() {
        for r in 0..x.ncols() {
            out[(i, r)] += a * (stay_mass[i] * neighbors[(i, r)] - x[(i, r)] * stay[r]);
        }
    }
    out
}

/// One step of the social-self model.
pub fn social_self_map(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    p: &ProbabilityMatrix,
) -> Result<ProbabilityMatrix> {
    check_dims(net, alpha, pcg, p.as_matrix())?;
    ProbabilityMatrix::from_map_output(social_self_raw(
        net.normalized(),
        alpha.values(),
        pcg.delta(),
        p.as_matrix(),
    ))
}

/// One step of the self-social model, valid for any number of products.
pub fn self_social_map(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    p: &ProbabilityMatrix,
) -> Result<ProbabilityMatrix> {
    check_dims(net, alpha, pcg, p.as_matrix())?;
    ProbabilityMatrix::from_map_output(self_social_raw(
        net.normalized(),
        alpha.values(),
        pcg.delta(),
        p.as_matrix(),
    ))
}

/// Conversion probabilities of a two-product model, with products labelled so
/// that `δ22 ≥ δ11` (product 2 is the stickier one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoProductParams {
    d11: f64,
    d22: f64,
}

impl TwoProductParams {
    pub fn new(d11: f64, d22: f64) -> Result<Self> {
        for (name, v) in [("delta11", d11), ("delta22", d22)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ParameterOutOfRange { name, value: v });
            }
        }
        if d22 < d11 {
            return Err(Error::ParameterOrderViolated { d11, d22 });
        }
        Ok(Self { d11, d22 })
    }

    pub fn from_conversion(pcg: &ProductConversionGraph) -> Result<Self> {
        if pcg.r() != 2 {
            return Err(Error::DimensionMismatch {
                what: "two-product conversion matrix",
                expected: 2,
                found: pcg.r(),
            });
        }
        Self::new(pcg.delta()[(0, 0)], pcg.delta()[(1, 1)])
    }

    pub fn d11(&self) -> f64 {
        self.d11
    }
    pub fn d12(&self) -> f64 {
        1.0 - self.d11
    }
    pub fn d21(&self) -> f64 {
        1.0 - self.d22
    }
    pub fn d22(&self) -> f64 {
        self.d22
    }

    pub fn conversion(&self) -> ProductConversionGraph {
        ProductConversionGraph::from_rows(&[
            vec![self.d11, self.d12()],
            vec![self.d21(), self.d22],
        ])
        .expect("two-product parameters form a stochastic matrix")
    }

    /// `K_i = δ12 + δ21 + δ22 α_i`.
    pub fn k(&self, alpha_i: f64) -> f64 {
        self.d12() + self.d21() + self.d22 * alpha_i
    }

    /// Per-node Lipschitz constant of `T`: `(2δ22 − δ11)α_i / K_i`.
    pub fn t_lipschitz(&self, alpha_i: f64) -> f64 {
        (2.0 * self.d22 - self.d11) * alpha_i / self.k(alpha_i)
    }

    /// Every parameter strictly inside (0, 1).
    fn check_interior(&self) -> Result<()> {
        for (name, v) in [("delta11", self.d11), ("delta22", self.d22)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::ParameterOutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

fn check_vector(net: &SocialNetwork, alpha: &OpenMindedness, x: &DVector<f64>) -> Result<()> {
    alpha.check_len(net.n())?;
    if x.len() != net.n() {
        return Err(Error::DimensionMismatch {
            what: "two-product state",
            expected: net.n(),
            found: x.len(),
        });
    }
    Ok(())
}

/// `h(x) = δ12·1 + (1−δ12−δ21)x + δ11 diag(α)Ãx − δ22 diag(α)x
///        + (δ22−δ11) diag(α)diag(x)Ãx`
pub fn two_product_h(
    params: &TwoProductParams,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_vector(net, alpha, x)?;
    let nb = net.normalized() * x;
    let (d11, d12, d21, d22) = (params.d11, params.d12(), params.d21(), params.d22);
    Ok(DVector::from_fn(x.len(), |i, _| {
        let a = alpha[i];
        d12 + (1.0 - d12 - d21) * x[i] + d11 * a * nb[i] - d22 * a * x[i]
            + (d22 - d11) * a * x[i] * nb[i]
    }))
}

/// `T(x) = K⁻¹(δ12·1 + δ11 diag(α)Ãx + (δ22−δ11) diag(α)diag(x)Ãx)` with
/// `K = (δ12+δ21)I + δ22 diag(α)`.
pub fn two_product_t(
    params: &TwoProductParams,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_vector(net, alpha, x)?;
    let nb = net.normalized() * x;
    let (d11, d12, d22) = (params.d11, params.d12(), params.d22);
    Ok(DVector::from_fn(x.len(), |i, _| {
        let a = alpha[i];
        (d12 + d11 * a * nb[i] + (d22 - d11) * a * x[i] * nb[i]) / params.k(a)
    }))
}

/// A map iterated by [`iterate`]. Vector states are `n × 1` matrices.
#[derive(Debug, Clone, Copy)]
pub enum MapKind<'a> {
    SocialSelf {
        net: &'a SocialNetwork,
        alpha: &'a OpenMindedness,
        pcg: &'a ProductConversionGraph,
    },
    SelfSocial {
        net: &'a SocialNetwork,
        alpha: &'a OpenMindedness,
        pcg: &'a ProductConversionGraph,
    },
    TwoProductH {
        params: &'a TwoProductParams,
        net: &'a SocialNetwork,
        alpha: &'a OpenMindedness,
    },
    TwoProductT {
        params: &'a TwoProductParams,
        net: &'a SocialNetwork,
        alpha: &'a OpenMindedness,
    },
}

impl MapKind<'_> {
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match *self {
            MapKind::SocialSelf { net, alpha, pcg } => {
                check_dims(net, alpha, pcg, x)?;
                let out = social_self_raw(net.normalized(), alpha.values(), pcg.delta(), x);
                Ok(ProbabilityMatrix::from_map_output(out)?.into_inner())
            }
            MapKind::SelfSocial { net, alpha, pcg } => {
                check_dims(net, alpha, pcg, x)?;
                let out = self_social_raw(net.normalized(), alpha.values(), pcg.delta(), x);
                Ok(ProbabilityMatrix::from_map_output(out)?.into_inner())
            }
            MapKind::TwoProductH { params, net, alpha } => {
                let v = two_product_h(params, net, alpha, &column(x)?)?;
                Ok(snap(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))?)
            }
            MapKind::TwoProductT { params, net, alpha } => {
                let v = two_product_t(params, net, alpha, &column(x)?)?;
                Ok(snap(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))?)
            }
        }
    }
}

fn column(x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.ncols() != 1 {
        return Err(Error::DimensionMismatch {
            what: "vector state columns",
            expected: 1,
            found: x.ncols(),
        });
    }
    Ok(x.column(0).into_owned())
}

#[derive(Debug, Clone, Copy)]
pub struct IterateOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every iterate; a run that hits `max_iter` then returns its
    /// trajectory instead of an error.
    pub keep_trajectory: bool,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1_000_000,
            keep_trajectory: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    /// `x_0, x_1, …` when requested, else empty.
    pub trajectory: Vec<DMatrix<f64>>,
    pub fixed_point: Option<DMatrix<f64>>,
    pub last: DMatrix<f64>,
    pub iterations: usize,
    /// `‖x_k − x_{k−1}‖_∞` for every step taken.
    pub residuals: Vec<f64>,
}

impl IterationReport {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn converged(&self) -> bool {
        self.fixed_point.is_some()
    }

    /// Geometric-mean ratio of successive step sizes over the last ten steps.
    pub fn rate_estimate(&self) -> Option<f64> {
        let r = &self.residuals;
        let span = r.len().checked_sub(1)?.min(10);
        if span == 0 {
            return None;
        }
        let (first, last) = (r[r.len() - 1 - span], r[r.len() - 1]);
        if first <= 0.0 || last <= 0.0 {
            return None;
        }
        Some((last / first).powf(1.0 / span as f64))
    }

    pub fn report(&self) -> FixedPointReport {
        FixedPointReport {
            fixed_point: crate::graphs::io::matrix_rows(
                self.fixed_point.as_ref().unwrap_or(&self.last),
            ),
            residual: self.residual(),
            iterations: self.iterations,
            rate_estimate: self.rate_estimate(),
            converged: self.converged(),
        }
    }
}

/// JSON shape of a fixed-point computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub fixed_point: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
    pub rate_estimate: Option<f64>,
    pub converged: bool,
}

/// Plain Picard iteration `x_{k+1} = map(x_k)` until
/// `‖x_{k+1} − x_k‖_∞ ≤ tol`.
pub fn iterate(map: &MapKind<'_>, initial: DMatrix<f64>, opts: IterateOptions) -> Result<IterationReport> {
    let mut trajectory = Vec::new();
    let mut residuals = Vec::new();
    let mut x = initial;
    for k in 1..=opts.max_iter {
        let next = map.apply(&x)?;
        let res = inf_norm(&(&next - &x));
        residuals.push(res);
        if opts.keep_trajectory {
            trajectory.push(std::mem::replace(&mut x, next));
        } else {
            x = next;
        }
        if res <= opts.tol {
            if opts.keep_trajectory {
                trajectory.push(x.clone());
            }
            return Ok(IterationReport {
                trajectory,
                fixed_point: Some(x.clone()),
                last: x,
                iterations: k,
                residuals,
            });
        }
    }
    if opts.keep_trajectory {
        trajectory.push(x.clone());
        return Ok(IterationReport {
            trajectory,
            fixed_point: None,
            last: x,
            iterations: opts.max_iter,
            residuals,
        });
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        last: Some(Box::new(x)),
    })
}

/// Runs exactly `steps` iterations and returns `x_0..=x_steps`.
pub fn trajectory(map: &MapKind<'_>, initial: DMatrix<f64>, steps: usize) -> Result<Vec<DMatrix<f64>>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial);
    for _ in 0..steps {
        let next = map.apply(out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TwoProductSolution {
    pub p_star: DVector<f64>,
    pub iterations: usize,
    /// `‖T(p*) − p*‖_∞`
    pub t_residual: f64,
    /// `‖h(p*) − p*‖_∞`
    pub h_residual: f64,
}

/// Unique fixed point of the two-product self-social model, found by
/// iterating the contraction `T` from `½·1`.
pub fn solve_two_product_fixed_point(
    params: &TwoProductParams,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    tol: f64,
) -> Result<TwoProductSolution> {
    solve_two_product_with(
        params,
        net,
        alpha,
        IterateOptions {
            tol,
            ..IterateOptions::default()
        },
    )
}

/// [`solve_two_product_fixed_point`] with an explicit iteration cap.
pub fn solve_two_product_with(
    params: &TwoProductParams,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    opts: IterateOptions,
) -> Result<TwoProductSolution> {
    let tol = opts.tol;
    params.check_interior()?;
    alpha.check_len(net.n())?;
    let n = net.n();
    let map = MapKind::TwoProductT { params, net, alpha };
    let run = iterate(
        &map,
        DMatrix::from_element(n, 1, 0.5),
        IterateOptions {
            keep_trajectory: false,
            ..opts
        },
    )?;
    let p_star = run.last.column(0).into_owned();
    let t_residual = (two_product_t(params, net, alpha, &p_star)? - &p_star).amax();
    let h_residual = (two_product_h(params, net, alpha, &p_star)? - &p_star).amax();
    if t_residual > tol || h_residual > 10.0 * tol {
        return Err(Error::InvariantViolation(format!(
            "fixed point check failed: |T(p)-p| = {t_residual:e}, |h(p)-p| = {h_residual:e}"
        )));
    }
    Ok(TwoProductSolution {
        p_star,
        iterations: run.iterations,
        t_residual,
        h_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k2() -> SocialNetwork {
        SocialNetwork::from_edges(2, &[(0, 1)]).unwrap()
    }

    fn half() -> ProductConversionGraph {
        ProductConversionGraph::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn social_self_fixed_point_is_consensus_on_stationary_row() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.2, 0.7, 0.4]).unwrap();
        let pcg = ProductConversionGraph::from_rows(&[vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
        let p_star = ProbabilityMatrix::consensus(3, &[3.0 / 7.0, 4.0 / 7.0]).unwrap();
        let out = social_self_map(&net, &alpha, &pcg, &p_star).unwrap();
        assert!(inf_norm(&(out.as_matrix() - p_star.as_matrix())) < 1e-15);
    }

    #[test]
    fn social_self_two_node_step() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let p = ProbabilityMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let out = social_self_map(&k2(), &alpha, &half(), &p).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(out.get(i, 0), 0.75, epsilon = 1e-15);
            assert_abs_diff_eq!(out.get(i, 1), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn social_only_limit() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let alpha = OpenMindedness::uniform(3, 1.0 - 1e-12).unwrap();
        let pcg = ProductConversionGraph::from_rows(&[vec![0.1, 0.9], vec![0.8, 0.2]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ProbabilityMatrix::random(3, 2, &mut rng);
        let out = social_self_map(&net, &alpha, &pcg, &p).unwrap();
        let expected = net.normalized() * p.as_matrix();
        assert!(inf_norm(&(out.as_matrix() - expected)) < 1e-11);
    }

    #[test]
    fn self_social_two_node_step() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let p = ProbabilityMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let out = self_social_map(&k2(), &alpha, &half(), &p).unwrap();
        assert_abs_diff_eq!(out.get(0, 1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn self_social_symmetric_fixed_point_and_single_product() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.3, 0.6, 0.9]).unwrap();
        let pcg = ProductConversionGraph::from_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let p = ProbabilityMatrix::uniform(3, 2);
        let out = self_social_map(&net, &alpha, &pcg, &p).unwrap();
        assert!(inf_norm(&(out.as_matrix() - p.as_matrix())) < 1e-15);

        let one = ProductConversionGraph::identity(1);
        let p = ProbabilityMatrix::uniform(3, 1);
        assert_eq!(self_social_map(&net, &alpha, &one, &p).unwrap(), p);
    }

    #[test]
    fn self_social_preserves_row_sums() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.3, 0.6, 0.9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let delta = ProbabilityMatrix::random(3, 3, &mut rng).into_inner();
            let pcg = ProductConversionGraph::new(delta).unwrap();
            let p = ProbabilityMatrix::random(3, 3, &mut rng);
            let out = self_social_map(&net, &alpha, &pcg, &p).unwrap();
            for row in out.as_matrix().row_iter() {
                // brute-force sum of entries
                let mut s = 0.0;
                for v in row.iter() {
                    s += v;
                }
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let p = ProbabilityMatrix::uniform(2, 3);
        assert!(matches!(
            social_self_map(&k2(), &alpha, &half(), &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn h_special_values() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.3, 0.6, 0.9]).unwrap();
        let params = TwoProductParams::new(0.4, 0.4).unwrap();
        let h = two_product_h(&params, &net, &alpha, &DVector::from_element(3, 0.5)).unwrap();
        for v in h.iter() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
        let params = TwoProductParams::new(0.3, 0.5).unwrap();
        let h = two_product_h(&params, &net, &alpha, &DVector::zeros(3)).unwrap();
        for v in h.iter() {
            assert_abs_diff_eq!(*v, 0.7, epsilon = 1e-15);
        }
    }

    #[test]
    fn t_endpoints() {
        // δ12 = 0.7, δ21 = 0.5, δ22 = 0.5, α = 0.5: K = 1.45
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::uniform(3, 0.5).unwrap();
        let params = TwoProductParams::new(0.3, 0.5).unwrap();
        let t0 = two_product_t(&params, &net, &alpha, &DVector::zeros(3)).unwrap();
        let t1 = two_product_t(&params, &net, &alpha, &DVector::from_element(3, 1.0)).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(t0[i], 0.7 / 1.45, epsilon = 1e-15);
            assert_abs_diff_eq!(t1[i], 0.95 / 1.45, epsilon = 1e-15);
        }
    }

    #[test]
    fn parameter_order() {
        assert!(matches!(
            TwoProductParams::new(0.6, 0.5),
            Err(Error::ParameterOrderViolated { .. })
        ));
        let pcg = ProductConversionGraph::from_rows(&[vec![0.6, 0.4], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            TwoProductParams::from_conversion(&pcg),
            Err(Error::ParameterOrderViolated { .. })
        ));
        let edge = TwoProductParams::new(0.0, 0.5).unwrap();
        let net = k2();
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        assert!(matches!(
            solve_two_product_fixed_point(&edge, &net, &alpha, 1e-10),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }

    /// Root of the scalar symmetric reduction `h(q) = q` by bisection.
    fn bisect_symmetric(d11: f64, d22: f64, a: f64) -> f64 {
        let (d12, d21) = (1.0 - d11, 1.0 - d22);
        let g = |q: f64| {
            d12 - (d12 + d21) * q + d11 * a * q - d22 * a * q + (d22 - d11) * a * q * q
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn symmetric_pair_matches_bisection() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let params = TwoProductParams::new(0.3, 0.5).unwrap();
        let sol = solve_two_product_fixed_point(&params, &k2(), &alpha, 1e-13).unwrap();
        let q = bisect_symmetric(0.3, 0.5, 0.5);
        assert_abs_diff_eq!(q, 0.5628289564810413, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.p_star[0], q, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.p_star[1], q, epsilon = 1e-12);
    }

    #[test]
    fn equal_stickiness_gives_half() {
        let net = SocialNetwork::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.1, 0.5, 0.8, 0.95]).unwrap();
        let params = TwoProductParams::new(0.5, 0.5).unwrap();
        let sol = solve_two_product_fixed_point(&params, &net, &alpha, 1e-12).unwrap();
        for v in sol.p_star.iter() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-12);
        }
        let run = iterate(
            &MapKind::TwoProductH {
                params: &params,
                net: &net,
                alpha: &alpha,
            },
            DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 0.0, 1.0]),
            IterateOptions::default(),
        )
        .unwrap();
        assert!((run.last.add_scalar(-0.5)).amax() < 1e-9);
    }

    #[test]
    fn iterate_trajectory_mode_and_rate() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.2, 0.5, 0.7]).unwrap();
        let pcg = ProductConversionGraph::from_rows(&[vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
        let map = MapKind::SocialSelf {
            net: &net,
            alpha: &alpha,
            pcg: &pcg,
        };
        let start = ProbabilityMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]])
            .unwrap()
            .into_inner();
        let capped = iterate(
            &map,
            start.clone(),
            IterateOptions {
                tol: 1e-14,
                max_iter: 5,
                keep_trajectory: true,
            },
        )
        .unwrap();
        assert!(!capped.converged());
        assert_eq!(capped.trajectory.len(), 6);
        let err = iterate(
            &map,
            start.clone(),
            IterateOptions {
                tol: 1e-14,
                max_iter: 5,
                keep_trajectory: false,
            },
        )
        .unwrap_err();
        match err {
            Error::NotConverged { last, iterations, .. } => {
                assert_eq!(iterations, 5);
                assert_eq!(*last.unwrap(), capped.last);
            }
            other => panic!("unexpected {other:?}"),
        }
        let run = iterate(&map, start, IterateOptions::default()).unwrap();
        let rate = run.rate_estimate().unwrap();
        // ε(Δ) = 0.7 + 0.3 · 0.3
        assert!(rate <= 0.79 + 1e-6, "rate {rate}");
        let json = serde_json::to_value(run.report()).unwrap();
        assert!(json["converged"].as_bool().unwrap());
    }

    #[test]
    fn probability_matrix_validation() {
        assert!(ProbabilityMatrix::from_rows(&[vec![0.5, 0.4]]).is_err());
        assert!(ProbabilityMatrix::from_rows(&[vec![1.5, -0.5]]).is_err());
        let snapped = ProbabilityMatrix::from_rows(&[vec![1.0 + 1e-16, -1e-16]]).unwrap();
        assert_eq!(snapped.get(0, 0), 1.0);
        assert_eq!(snapped.get(0, 1), 0.0);
    }
}
