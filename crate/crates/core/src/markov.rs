//! Agent-based Monte Carlo simulation of the exact `Rⁿ`-state Markov chains.
//!
//! All nodes update synchronously from the previous state. Sample paths use
//! independent ChaCha8 streams keyed by `(seed, sample index)` and are
//! accumulated as integer counts, so results do not depend on thread count.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{OpenMindedness, ProductConversionGraph, SocialNetwork};
use crate::ncpm::ProbabilityMatrix;

/// Order of the two conversion mechanisms within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationModel {
    /// With probability `α_i` copy a random neighbour, otherwise convert by `Δ`.
    SocialSelf,
    /// Convert by `Δ` first; nodes that stay then copy a random neighbour
    /// with probability `α_i`.
    SelfSocial,
}

/// Realized product of every node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentStateVector {
    states: Vec<usize>,
    products: usize,
}

impl AgentStateVector {
    pub fn new(states: Vec<usize>, products: usize) -> Result<Self> {
        if let Some((node, &s)) = states.iter().enumerate().find(|(_, &s)| s >= products) {
            return Err(Error::InvariantViolation(format!(
                "node {node} holds product {s}, only {products} exist"
            )));
        }
        Ok(Self { states, products })
    }

    /// Every node holds `product`.
    pub fn consensus(n: usize, product: usize, products: usize) -> Result<Self> {
        Self::new(vec![product; n], products)
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn products(&self) -> usize {
        self.products
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, node: usize) -> usize {
        self.states[node]
    }
}

/// Inverse-CDF sampling over a probability row. Zero-probability entries are
/// never returned; ties go to the lowest index.
#[derive(Debug, Clone)]
struct CategoricalRow {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl CategoricalRow {
    fn new(row: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let mut last_positive = 0;
        let cumulative = row
            .into_iter()
            .enumerate()
            .map(|(k, p)| {
                if p > 0.0 {
                    last_positive = k;
                }
                acc += p;
                acc
            })
            .collect();
        Self {
            cumulative,
            last_positive,
        }
    }

    fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .map_or(self.last_positive, |k| k.min(self.last_positive))
    }
}

/// Model data rearranged for fast stepping.
struct Stepper<'a> {
    net: &'a SocialNetwork,
    alpha: &'a [f64],
    rows: Vec<CategoricalRow>,
}

impl<'a> Stepper<'a> {
    fn new(
        net: &'a SocialNetwork,
        alpha: &'a OpenMindedness,
        pcg: &ProductConversionGraph,
    ) -> Result<Self> {
        alpha.check_len(net.n())?;
        let rows = pcg
            .delta()
            .row_iter()
            .map(|r| CategoricalRow::new(r.iter().copied()))
            .collect();
        Ok(Self {
            net,
            alpha: alpha.values(),
            rows,
        })
    }

    fn check_state(&self, state: &[usize]) -> Result<()> {
        if state.len() != self.net.n() {
            return Err(Error::DimensionMismatch {
                what: "agent state length",
                expected: self.net.n(),
                found: state.len(),
            });
        }
        Ok(())
    }

    fn copy_neighbor<G: Rng + ?Sized>(&self, old: &[usize], node: usize, rng: &mut G) -> usize {
        let nb = self.net.neighbors(node);
        old[nb[rng.random_range(0..nb.len())]]
    }

    fn social_self<G: Rng + ?Sized>(&self, old: &[usize], new: &mut [usize], rng: &mut G) {
        for (i, slot) in new.iter_mut().enumerate() {
            *slot = if rng.random::<f64>() < self.alpha[i] {
                self.copy_neighbor(old, i, rng)
            } else {
                self.rows[old[i]].sample(rng)
            };
        }
    }

    fn self_social<G: Rng + ?Sized>(&self, old: &[usize], new: &mut [usize], rng: &mut G) {
        for (i, slot) in new.iter_mut().enumerate() {
            let converted = self.rows[old[i]].sample(rng);
            *slot = if converted != old[i] {
                converted
            } else if rng.random::<f64>() < self.alpha[i] {
                self.copy_neighbor(old, i, rng)
            } else {
                old[i]
            };
        }
    }

    fn step<G: Rng + ?Sized>(
        &self,
        model: SimulationModel,
        old: &[usize],
        new: &mut [usize],
        rng: &mut G,
    ) {
        match model {
            SimulationModel::SocialSelf => self.social_self(old, new, rng),
            SimulationModel::SelfSocial => self.self_social(old, new, rng),
        }
    }
}

fn step_with<G: Rng + ?Sized>(
    model: SimulationModel,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    state: &AgentStateVector,
    rng: &mut G,
) -> Result<AgentStateVector> {
    let stepper = Stepper::new(net, alpha, pcg)?;
    stepper.check_state(state.states())?;
    if state.products() != pcg.r() {
        return Err(Error::DimensionMismatch {
            what: "number of products",
            expected: pcg.r(),
            found: state.products(),
        });
    }
    let mut next = vec![0; state.len()];
    stepper.step(model, state.states(), &mut next, rng);
    Ok(AgentStateVector {
        states: next,
        products: state.products(),
    })
}

/// One synchronous step of the social-then-self chain.
pub fn step_social_self<G: Rng + ?Sized>(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    state: &AgentStateVector,
    rng: &mut G,
) -> Result<AgentStateVector> {
    step_with(SimulationModel::SocialSelf, net, alpha, pcg, state, rng)
}

/// One synchronous step of the self-then-social chain.
pub fn step_self_social<G: Rng + ?Sized>(
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    state: &AgentStateVector,
    rng: &mut G,
) -> Result<AgentStateVector> {
    step_with(SimulationModel::SelfSocial, net, alpha, pcg, state, rng)
}

/// Draws each node's initial product independently from its row of `p0`.
pub fn sample_initial_state<G: Rng + ?Sized>(p0: &ProbabilityMatrix, rng: &mut G) -> AgentStateVector {
    let states = p0
        .as_matrix()
        .row_iter()
        .map(|r| CategoricalRow::new(r.iter().copied()).sample(rng))
        .collect();
    AgentStateVector {
        states,
        products: p0.r(),
    }
}

/// Sample frequencies `p̂_ir(t)` over independent paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalTrajectory {
    model: SimulationModel,
    horizon: usize,
    samples: usize,
    seed: u64,
    n: usize,
    r: usize,
    /// Indexed `[(t·n + i)·R + r]`.
    counts: Vec<u64>,
}

/// JSON summary of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub model: SimulationModel,
    pub seed: u64,
    pub samples: usize,
    pub horizon: usize,
    pub nodes: usize,
    pub products: usize,
}

impl EmpiricalTrajectory {
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn samples(&self) -> usize {
        self.samples
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn model(&self) -> SimulationModel {
        self.model
    }
    pub fn nodes(&self) -> usize {
        self.n
    }
    pub fn products(&self) -> usize {
        self.r
    }

    fn index(&self, t: usize, node: usize, product: usize) -> usize {
        assert!(t <= self.horizon && node < self.n && product < self.r, "index out of range");
        (t * self.n + node) * self.r + product
    }

    /// Number of paths with `node` holding `product` at time `t`.
    pub fn count(&self, t: usize, node: usize, product: usize) -> u64 {
        self.counts[self.index(t, node, product)]
    }

    pub fn p_hat(&self, t: usize, node: usize, product: usize) -> f64 {
        self.count(t, node, product) as f64 / self.samples as f64
    }

    /// Binomial standard error `√(p̂(1−p̂)/S)`.
    pub fn std_error(&self, t: usize, node: usize, product: usize) -> f64 {
        let p = self.p_hat(t, node, product);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// `n × R` matrix of frequencies at time `t`.
    pub fn estimate_at(&self, t: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.r, |i, r| self.p_hat(t, i, r))
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            model: self.model,
            seed: self.seed,
            samples: self.samples,
            horizon: self.horizon,
            nodes: self.n,
            products: self.r,
        }
    }

    /// `t,node,product,p_hat` rows, 0-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,node,product,p_hat\n");
        for t in 0..=self.horizon {
            for i in 0..self.n {
                for r in 0..self.r {
                    let _ = writeln!(out, "{t},{i},{r},{:.16e}", self.p_hat(t, i, r));
                }
            }
        }
        out
    }
}

/// Runs `samples` independent paths of length `horizon` from initial states
/// drawn from `p0` and returns the frequency tensor.
#[allow(clippy::too_many_arguments)]
pub fn estimate_trajectories(
    model: SimulationModel,
    net: &SocialNetwork,
    alpha: &OpenMindedness,
    pcg: &ProductConversionGraph,
    p0: &ProbabilityMatrix,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalTrajectory> {
    if samples == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "samples",
            value: 0.0,
        });
    }
    let (n, r) = (net.n(), pcg.r());
    if p0.n() != n {
        return Err(Error::InvalidInitialDistribution {
            row: p0.n().min(n),
            reason: format!("{} rows for {n} nodes", p0.n()),
        });
    }
    if p0.r() != r {
        return Err(Error::InvalidInitialDistribution {
            row: 0,
            reason: format!("{} columns for {r} products", p0.r()),
        });
    }
    let stepper = Stepper::new(net, alpha, pcg)?;
    let initial: Vec<CategoricalRow> = p0
        .as_matrix()
        .row_iter()
        .map(|row| CategoricalRow::new(row.iter().copied()))
        .collect();
    let len = (horizon + 1) * n * r;
    let counts = (0..samples)
        .into_par_iter()
        .fold(
            || (vec![0u64; len], vec![0usize; n], vec![0usize; n]),
            |(mut acc, mut cur, mut next), s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                for (slot, row) in cur.iter_mut().zip(&initial) {
                    *slot = row.sample(&mut rng);
                }
                for t in 0..=horizon {
                    if t > 0 {
                        stepper.step(model, &cur, &mut next, &mut rng);
                        std::mem::swap(&mut cur, &mut next);
                    }
                    let base = t * n * r;
                    for (i, &p) in cur.iter().enumerate() {
                        acc[base + i * r + p] += 1;
                    }
                }
                (acc, cur, next)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(EmpiricalTrajectory {
        model,
        horizon,
        samples,
        seed,
        n,
        r,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> SocialNetwork {
        SocialNetwork::from_edges(2, &[(0, 1)]).unwrap()
    }

    fn half() -> ProductConversionGraph {
        ProductConversionGraph::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn categorical_row_skips_zero_mass() {
        let row = CategoricalRow::new([0.0, 0.3, 0.0, 0.7, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let k = row.sample(&mut rng);
            assert!(k == 1 || k == 3);
        }
    }

    #[test]
    fn consensus_is_absorbing_under_identity() {
        let net = SocialNetwork::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.1, 0.4, 0.6, 0.9]).unwrap();
        let pcg = ProductConversionGraph::identity(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for draw in 0..100 {
            let state = AgentStateVector::consensus(4, draw % 3, 3).unwrap();
            let a = step_social_self(&net, &alpha, &pcg, &state, &mut rng).unwrap();
            let b = step_self_social(&net, &alpha, &pcg, &state, &mut rng).unwrap();
            assert_eq!(a, state);
            assert_eq!(b, state);
        }
    }

    #[test]
    fn single_product_is_constant() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let pcg = ProductConversionGraph::identity(1);
        let p0 = ProbabilityMatrix::uniform(2, 1);
        let traj =
            estimate_trajectories(SimulationModel::SelfSocial, &k2(), &alpha, &pcg, &p0, 5, 10, 0)
                .unwrap();
        for t in 0..=5 {
            assert_eq!(traj.count(t, 0, 0), 10);
        }
    }

    #[test]
    fn open_minded_limit_copies_neighbor() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let alpha = OpenMindedness::uniform(3, 1.0 - 1e-12).unwrap();
        let pcg = half();
        let state = AgentStateVector::new(vec![0, 1, 1], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let next = step_social_self(&net, &alpha, &pcg, &state, &mut rng).unwrap();
            assert_eq!(next.get(0), 1);
            assert_eq!(next.get(1), 0);
            assert_eq!(next.get(2), 0);
        }
    }

    fn within_three_sigma(model: SimulationModel, exact: f64) {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let p0 = ProbabilityMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let samples = 100_000;
        let traj = estimate_trajectories(model, &k2(), &alpha, &half(), &p0, 1, samples, 17).unwrap();
        let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
        for i in 0..2 {
            let p = traj.p_hat(1, i, 1);
            assert!((p - exact).abs() <= 3.0 * sigma, "{model:?} node {i}: {p} vs {exact}");
        }
    }

    #[test]
    fn two_node_social_self_matches_enumeration() {
        within_three_sigma(SimulationModel::SocialSelf, 0.25);
    }

    #[test]
    fn two_node_self_social_matches_enumeration() {
        within_three_sigma(SimulationModel::SelfSocial, 0.5);
    }

    #[test]
    fn reproducible_and_partitioned() {
        let net = SocialNetwork::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let alpha = OpenMindedness::new(vec![0.2, 0.5, 0.8]).unwrap();
        let pcg = ProductConversionGraph::from_rows(&[
            vec![0.5, 0.3, 0.2],
            vec![0.1, 0.8, 0.1],
            vec![0.0, 0.4, 0.6],
        ])
        .unwrap();
        let p0 = ProbabilityMatrix::uniform(3, 3);
        let run = |seed| {
            estimate_trajectories(SimulationModel::SocialSelf, &net, &alpha, &pcg, &p0, 20, 500, seed)
                .unwrap()
        };
        let a = run(9);
        assert_eq!(a, run(9));
        assert_ne!(a, run(10));
        for t in 0..=20 {
            for i in 0..3 {
                let total: u64 = (0..3).map(|r| a.count(t, i, r)).sum();
                assert_eq!(total, 500);
            }
        }
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 1 + 21 * 3 * 3);
        assert!(csv.starts_with("t,node,product,p_hat\n0,0,0,"));
        let json = serde_json::to_value(a.summary()).unwrap();
        assert_eq!(json["seed"], 9);
    }

    #[test]
    fn one_sample_at_time_zero_is_one_hot() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let p0 = ProbabilityMatrix::from_rows(&[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let traj =
            estimate_trajectories(SimulationModel::SocialSelf, &k2(), &alpha, &half(), &p0, 0, 1, 4)
                .unwrap();
        for i in 0..2 {
            let row: Vec<f64> = (0..2).map(|r| traj.p_hat(0, i, r)).collect();
            assert!(row == [1.0, 0.0] || row == [0.0, 1.0]);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let alpha = OpenMindedness::uniform(2, 0.5).unwrap();
        let p0 = ProbabilityMatrix::uniform(3, 2);
        assert!(matches!(
            estimate_trajectories(SimulationModel::SocialSelf, &k2(), &alpha, &half(), &p0, 1, 1, 0),
            Err(Error::InvalidInitialDistribution { .. })
        ));
        let p0 = ProbabilityMatrix::uniform(2, 2);
        assert!(estimate_trajectories(SimulationModel::SocialSelf, &k2(), &alpha, &half(), &p0, 1, 0, 0).is_err());
        assert!(AgentStateVector::new(vec![0, 2], 2).is_err());
    }
}
