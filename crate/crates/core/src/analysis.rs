//! Asymptotic predictions for the social-self model, fixed-point certificates
//! and stability checks for the two-product self-social model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{
    dominant_left_eigenvector, io::matrix_rows, mixing_matrix, CaseLabel, EigenOptions,
    OpenMindedness, ProductConversionGraph, SocialNetwork,
};
use crate::ncpm::{social_self_raw, ProbabilityMatrix, TwoProductParams};

/// Transient mass below which component totals are read off.
pub const TRANSIENT_CUTOFF: f64 = 1e-12;
/// Iteration cap while waiting for transient mass to decay.
pub const TRANSIENT_MAX_STEPS: usize = 1_000_000;
/// Largest network handled with a dense eigendecomposition.
pub const DENSE_EIGEN_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionConstants {
    /// `ζ(Δ) = 1 − Σ_r min_s δ_sr`
    pub zeta: f64,
    /// `ε(Δ) = α_max + (1 − α_max)ζ(Δ)`
    pub epsilon: f64,
}

/// Per-step contraction factor of the social-self map in the induced ∞-norm
/// when `Δ` is a single strongly connected component.
pub fn contraction_constants(
    pcg: &ProductConversionGraph,
    alpha: &OpenMindedness,
) -> Result<ContractionConstants> {
    if pcg.case() != CaseLabel::Case1 {
        return Err(Error::WrongCase {
            expected: CaseLabel::Case1,
            found: pcg.case(),
        });
    }
    if !pcg.has_positive_column(0) {
        return Err(Error::NoPositiveColumn { component: 0 });
    }
    Ok(constants_for(pcg.delta(), alpha.max()))
}

fn constants_for(delta: &DMatrix<f64>, alpha_max: f64) -> ContractionConstants {
    let zeta = 1.0 - delta.column_iter().map(|c| c.min()).sum::<f64>();
    ContractionConstants {
        zeta,
        epsilon: alpha_max + (1.0 - alpha_max) * zeta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaProvenance {
    ClosedForm,
    Simulated,
}

/// Predicted limit of the social-self model. Every row of the limit is the
/// same, so only the row template is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPrediction {
    pub case: CaseLabel,
    pub n: usize,
    /// `lim p_ir(t)`, identical for every node `i`.
    pub row: Vec<f64>,
    /// `ε(Δ)` when `Δ` is strongly connected.
    pub rate: Option<f64>,
    /// Limiting share `γ_l` of each absorbing component.
    pub gammas: Option<Vec<f64>>,
    pub provenance: Option<GammaProvenance>,
    /// Steps iterated before reading `γ` numerically.
    pub steps: Option<usize>,
}

impl AsymptoticPrediction {
    pub fn limit(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.row.len(), |_, r| self.row[r])
    }

    pub fn report(&self) -> AnalysisReport {
        AnalysisReport {
            case: self.case,
            limit: matrix_rows(&self.limit()),
            rate: self.rate,
            gammas: self.gammas.clone(),
            gamma_provenance: self.provenance,
            stability: None,
        }
    }
}

/// JSON report of an asymptotic analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub case: CaseLabel,
    pub limit: Vec<Vec<f64>>,
    pub rate: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub gamma_provenance: Option<GammaProvenance>,
    pub stability: Option<StabilitySummary>,
}

/// Assumptions under which the limit exists, as human-readable failures.
fn assumption_failures(pcg: &ProductConversionGraph) -> Vec<String> {
    let mut failed = Vec::new();
    for (l, comp) in pcg.absorbing_components().iter().enumerate() {
        if !pcg.is_aperiodic(l) {
            failed.push(format!("absorbing component {l} {comp:?} is periodic"));
        }
        if !pcg.has_positive_column(l) {
            failed.push(format!(
                "absorbing component {l} {comp:?} has no strictly positive column"
            ));
        }
    }
    let d0 = pcg.transient_block();
    for (k, &r) in pcg.transient().iter().enumerate() {
        if d0.row(k).sum() >= 1.0 {
            failed.push(format!("transient product {r} never leaves the transient set"));
        }
    }
    failed
}

/// Limit of `P(t)` under the social-self model from `p0`.
pub fn predict_asymptotics(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    p0: &ProbabilityMatrix,
) -> Result<AsymptoticPrediction> {
    alpha.check_len(net.n())?;
    let (n, r) = (net.n(), pcg.r());
    if p0.n() != n || p0.r() != r {
        return Err(Error::DimensionMismatch {
            what: "initial probability matrix entries",
            expected: n * r,
            found: p0.n() * p0.r(),
        });
    }
    let failed = assumption_failures(pcg);
    if !failed.is_empty() {
        return Err(Error::AssumptionViolated(failed));
    }
    let components = pcg.absorbing_components();
    let stationary = components
        .iter()
        .enumerate()
        .map(|(l, _)| dominant_left_eigenvector(pcg.absorbing_block(l), EigenOptions::default()))
        .collect::<Result<Vec<_>>>()?;

    let (gammas, provenance, steps) = match pcg.case() {
        CaseLabel::Case1 | CaseLabel::Case2 => (vec![1.0], None, None),
        CaseLabel::Case3 => {
            let w = mixing_weights(net, alpha)?;
            (component_shares(&w, p0.as_matrix(), components), Some(GammaProvenance::ClosedForm), None)
        }
        CaseLabel::Case4 => {
            let (p, steps) = decay_transient(net, alpha, pcg, p0.as_matrix())?;
            let w = mixing_weights(net, alpha)?;
            (component_shares(&w, &p, components), Some(GammaProvenance::Simulated), Some(steps))
        }
    };

    let mut row = vec![0.0; r];
    for ((comp, w), g) in components.iter().zip(&stationary).zip(&gammas) {
        for (k, &prod) in comp.iter().enumerate() {
            row[prod] = g * w[k];
        }
    }
    let rate = (pcg.case() == CaseLabel::Case1).then(|| constants_for(pcg.delta(), alpha.max()).epsilon);
    let gammas = matches!(pcg.case(), CaseLabel::Case3 | CaseLabel::Case4).then_some(gammas);
    Ok(AsymptoticPrediction {
        case: pcg.case(),
        n,
        row,
        rate,
        gammas,
        provenance,
        steps,
    })
}

fn mixing_weights(net: &SocialNetwork, alpha: &OpenMindedness) -> Result<DVector<f64>> {
    dominant_left_eigenvector(&mixing_matrix(net, alpha)?, EigenOptions::default())
}

/// `γ_l = wᵀ P^{Θ_l} 1`.
fn component_shares(w: &DVector<f64>, p: &DMatrix<f64>, components: &[Vec<usize>]) -> Vec<f64> {
    components
        .iter()
        .map(|comp| {
            (0..p.nrows())
                .map(|i| w[i] * comp.iter().map(|&c| p[(i, c)]).sum::<f64>())
                .sum()
        })
        .collect()
}

/// Iterates the social-self map until every node holds less than
/// [`TRANSIENT_CUTOFF`] on transient products.
fn decay_transient(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    p0: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, usize)> {
    let transient = pcg.transient();
    let mass = |p: &DMatrix<f64>| {
        (0..p.nrows())
            .map(|i| transient.iter().map(|&c| p[(i, c)]).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut p = p0.clone();
    for step in 0..=TRANSIENT_MAX_STEPS {
        if mass(&p) < TRANSIENT_CUTOFF {
            return Ok((p, step));
        }
        p = social_self_raw(net.normalized(), alpha.values(), pcg.delta(), &p);
    }
    Err(Error::NotConverged {
        iterations: TRANSIENT_MAX_STEPS,
        residual: mass(&p),
        last: Some(Box::new(p)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointBounds {
    pub lower: f64,
    /// `δ12 / (δ12 + δ21)`
    pub upper: f64,
    /// Per node: `(1 − α_i/2)/α_i · (δ22 − δ11)/(δ22 + δ11)`, a bound on
    /// `p*_i − (Ãp*)_i`.
    pub gap_bound: Vec<f64>,
}

/// Certificates that any fixed point of the two-product model satisfies.
pub fn fixed_point_bounds(params: &TwoProductParams, alpha: &OpenMindedness) -> Result<FixedPointBounds> {
    let switching = params.d12() + params.d21();
    if switching <= 0.0 {
        return Err(Error::ParameterOutOfRange {
            name: "delta12 + delta21",
            value: switching,
        });
    }
    let stay = params.d11() + params.d22();
    let ratio = if stay > 0.0 {
        (params.d22() - params.d11()) / stay
    } else {
        0.0
    };
    Ok(FixedPointBounds {
        lower: 0.5,
        upper: params.d12() / switching,
        gap_bound: alpha
            .values()
            .iter()
            .map(|&a| (1.0 - a / 2.0) / a * ratio)
            .collect(),
    })
}

/// `8δ11δ22 / ((δ22 − δ11)² + 8δ11δ22)`: below this open-mindedness the
/// fixed point is locally stable.
pub fn local_stability_threshold(params: &TwoProductParams) -> f64 {
    let (d11, d22) = (params.d11(), params.d22());
    let num = 8.0 * d11 * d22;
    let den = (d22 - d11).powi(2) + num;
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

/// `(δ22 + δ11) / (3δ22 − δ11)`: below this the model converges globally.
pub fn global_stability_threshold(params: &TwoProductParams) -> f64 {
    let (d11, d22) = (params.d11(), params.d22());
    let den = 3.0 * d22 - d11;
    if den > 0.0 {
        (d22 + d11) / den
    } else {
        1.0
    }
}

/// Jacobian of `h` at `p`:
/// `(1−δ12−δ21)I + δ11 diag(α)Ã − δ22 diag(α)
///  + (δ22−δ11) diag(α)(diag(Ãp) + diag(p)Ã)`.
pub fn two_product_jacobian(
    params: &TwoProductParams,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    p: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    alpha.check_len(net.n())?;
    if p.len() != net.n() {
        return Err(Error::DimensionMismatch {
            what: "two-product state",
            expected: net.n(),
            found: p.len(),
        });
    }
    let a = net.normalized();
    let nb = a * p;
    let (d11, d22) = (params.d11(), params.d22());
    let base = 1.0 - params.d12() - params.d21();
    Ok(DMatrix::from_fn(net.n(), net.n(), |i, j| {
        let al = alpha[i];
        let mut v = (d11 + (d22 - d11) * p[i]) * al * a[(i, j)];
        if i == j {
            v += base - d22 * al + (d22 - d11) * al * nb[i];
        }
        v
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub local_threshold: f64,
    pub global_threshold: f64,
    /// `α_i` below the local threshold.
    pub local_sufficient: Vec<bool>,
    /// `α_i` below the global threshold.
    pub global_sufficient: Vec<bool>,
    /// Spectral radius of the Jacobian at the fixed point.
    pub spectral_radius: f64,
    /// Largest imaginary part among the Jacobian eigenvalues (dense method only).
    pub max_imag: Option<f64>,
    pub eigen_method: EigenMethod,
    /// `max_i max(ε_i, K_iε_i + K_i − 1)`
    pub global_rate_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub local: Vec<bool>,
    pub global: Vec<bool>,
    pub rho: f64,
    pub rate_bound: f64,
}

impl StabilityReport {
    pub fn summary(&self) -> StabilitySummary {
        StabilitySummary {
            local: self.local_sufficient.clone(),
            global: self.global_sufficient.clone(),
            rho: self.spectral_radius,
            rate_bound: self.global_rate_bound,
        }
    }
}

/// Sufficient stability conditions per node plus the exact spectral radius of
/// the linearization at `p_star`.
pub fn check_stability(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    params: &TwoProductParams,
    p_star: &DVector<f64>,
) -> Result<StabilityReport> {
    let jac = two_product_jacobian(params, net, alpha, p_star)?;
    let local_threshold = local_stability_threshold(params);
    let global_threshold = global_stability_threshold(params);
    let (spectral_radius, max_imag, eigen_method) = if net.n() <= DENSE_EIGEN_LIMIT {
        let eig = jac.complex_eigenvalues();
        let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (rho, Some(imag), EigenMethod::Dense)
    } else {
        (real_spectral_radius(&jac), None, EigenMethod::PowerIteration)
    };
    let global_rate_bound = alpha
        .values()
        .iter()
        .map(|&a| {
            let (eps, k) = (params.t_lipschitz(a), params.k(a));
            eps.max(k * eps + k - 1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        local_threshold,
        global_threshold,
        local_sufficient: alpha.values().iter().map(|&a| a < local_threshold).collect(),
        global_sufficient: alpha.values().iter().map(|&a| a < global_threshold).collect(),
        spectral_radius,
        max_imag,
        eigen_method,
        global_rate_bound,
    })
}

/// Spectral radius of a matrix with real spectrum, from power iteration on
/// `J²` (whose dominant eigenvalue is `ρ(J)²` and nonnegative).
fn real_spectral_radius(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    x.normalize_mut();
    let mut estimate = 0.0;
    for _ in 0..10_000 {
        let y = j * (j * &x);
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        x = y / norm;
        if (next - estimate).abs() <= 1e-12 * next.max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}
