use nalgebra::DMatrix;
use thiserror::Error;

use crate::graphs::CaseLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("adjacency entry ({row}, {col}) = {value} is not 0 or 1")]
    NonBinaryEntry { row: usize, col: usize, value: f64 },

    #[error("adjacency not symmetric at ({row}, {col}): social network must be undirected")]
    NotSymmetric { row: usize, col: usize },

    #[error("node {node} has a self loop: social network must have a zero diagonal")]
    SelfLoopPresent { node: usize },

    #[error("node {node} has no neighbors: every node needs degree >= 1")]
    IsolatedNode { node: usize },

    #[error("social network is disconnected ({components} components): it must be connected")]
    Disconnected { components: usize },

    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, not 1")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("open-mindedness of node {node} is {value}; it must lie strictly inside (0, 1)")]
    OpenMindednessOutOfRange { node: usize, value: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: Option<Box<DMatrix<f64>>>,
    },

    #[error("matrix is periodic or reducible; the dominant left eigenvector is not unique")]
    PeriodicOrReducible,

    #[error("absorbing component {component} has no strictly positive column")]
    NoPositiveColumn { component: usize },

    #[error("operation requires {expected:?}, but the conversion graph is {found:?}")]
    WrongCase { expected: CaseLabel, found: CaseLabel },

    #[error("asymptotic assumptions violated: {}", .0.join("; "))]
    AssumptionViolated(Vec<String>),

    #[error("initial distribution row {row} invalid: {reason}")]
    InvalidInitialDistribution { row: usize, reason: String },

    #[error("probability invariant violated: {0}")]
    InvariantViolation(String),

    #[error("two-product parameters need delta22 >= delta11 (got delta11 = {d11}, delta22 = {d22}); relabel the products")]
    ParameterOrderViolated { d11: f64, d22: f64 },

    #[error("parameter {name} = {value} out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("budget of company {company} ({budget}) does not exceed the interiority threshold {threshold}")]
    BudgetConditionViolated {
        company: usize,
        budget: f64,
        threshold: f64,
    },

    #[error("allocation infeasible for company {company}: {reason}")]
    InfeasibleAllocation { company: usize, reason: String },

    #[error("total quality investment is zero and no preset quality is configured")]
    ZeroQualityVector,

    #[error("invalid game configuration: {0}")]
    InvalidGameConfig(String),

    #[error("graph generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("invalid graph specification: {0}")]
    InvalidGraphSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of an iterative numerical procedure, as opposed to
    /// bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}
