//! Multi-stage investment games between companies selling competing products.
//!
//! Each company `r` splits a budget `c_r` between seeding individuals
//! (`x_ir`, which buys the attention of a virtual node always holding `H_r`)
//! and, in the seeding-quality game, product quality `w_r`. Payoff at a stage
//! is the expected number of adopters `1ᵀp_r(t+1)`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{OpenMindedness, ProductConversionGraph, SocialNetwork};
use crate::ncpm::ProbabilityMatrix;

/// Slack allowed when checking that spending stays within budget.
pub const BUDGET_TOLERANCE: f64 = 1e-9;
/// Largest payoff improvement still accepted as "no profitable deviation".
pub const GAIN_TOLERANCE: f64 = 1e-9;

/// Preset relative quality `ξ` with weight `u`, smoothing the quality share
/// to `g_r(w) = (w_r + ξ_r u)/(1ᵀw + u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityPreset {
    xi: Vec<f64>,
    u: f64,
}

impl QualityPreset {
    pub fn new(xi: Vec<f64>, u: f64) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::InvalidGameConfig(format!("preset weight u = {u} must be positive")));
        }
        if xi.iter().any(|&v| v.is_nan() || v <= 0.0) {
            return Err(Error::InvalidGameConfig("preset quality must be entrywise positive".into()));
        }
        let sum: f64 = xi.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGameConfig(format!("preset quality sums to {sum}, not 1")));
        }
        Ok(Self { xi, u })
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn u(&self) -> f64 {
        self.u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameMode {
    /// Budgets buy seeding and product quality; self conversion follows the
    /// quality shares `g(w)`.
    SeedingQuality { preset: Option<QualityPreset> },
    /// Budgets buy seeding only; self conversion follows a fixed `Δ`.
    SeedingOnly { conversion: ProductConversionGraph },
}

#[derive(Debug, Clone)]
pub struct GameConfig {
    net: SocialNetwork,
    alpha: OpenMindedness,
    budgets: Vec<f64>,
    gamma: f64,
    mode: GameMode,
}

impl GameConfig {
    pub fn new(
        net: SocialNetwork,
        alpha: OpenMindedness,
        budgets: Vec<f64>,
        gamma: f64,
        mode: GameMode,
    ) -> Result<Self> {
        alpha.check_len(net.n())?;
        if budgets.len() < 2 {
            return Err(Error::InvalidGameConfig("at least two companies are required".into()));
        }
        if let Some(b) = budgets.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidGameConfig(format!("budget {b} must be positive")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidGameConfig(format!("gamma = {gamma} must be positive")));
        }
        let r = budgets.len();
        let products = match &mode {
            GameMode::SeedingQuality { preset: Some(p) } => Some(p.xi.len()),
            GameMode::SeedingQuality { preset: None } => None,
            GameMode::SeedingOnly { conversion } => Some(conversion.r()),
        };
        if let Some(k) = products.filter(|&k| k != r) {
            return Err(Error::DimensionMismatch {
                what: "products in game mode",
                expected: r,
                found: k,
            });
        }
        Ok(Self {
            net,
            alpha,
            budgets,
            gamma,
            mode,
        })
    }

    pub fn net(&self) -> &SocialNetwork {
        &self.net
    }
    pub fn alpha(&self) -> &OpenMindedness {
        &self.alpha
    }
    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn mode(&self) -> &GameMode {
        &self.mode
    }
    pub fn n(&self) -> usize {
        self.net.n()
    }
    pub fn companies(&self) -> usize {
        self.budgets.len()
    }

    fn total_budget(&self) -> f64 {
        self.budgets.iter().sum()
    }

    fn check_state(&self, p: &ProbabilityMatrix) -> Result<()> {
        if p.n() != self.n() || p.r() != self.companies() {
            return Err(Error::DimensionMismatch {
                what: "game state entries",
                expected: self.n() * self.companies(),
                found: p.n() * p.r(),
            });
        }
        Ok(())
    }

    /// `β = ÃP`: neighbourhood adoption averages.
    fn neighbor_average(&self, p: &ProbabilityMatrix) -> DMatrix<f64> {
        self.net.normalized() * p.as_matrix()
    }
}

/// Seeding matrix `X` (`n × R`) and quality vector `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub x: DMatrix<f64>,
    pub w: Vec<f64>,
}

impl Allocation {
    pub fn new(x: DMatrix<f64>, w: Vec<f64>) -> Result<Self> {
        if x.ncols() != w.len() {
            return Err(Error::DimensionMismatch {
                what: "quality vector length",
                expected: x.ncols(),
                found: w.len(),
            });
        }
        Ok(Self { x, w })
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        Self {
            x: DMatrix::zeros(n, r),
            w: vec![0.0; r],
        }
    }

    /// `1ᵀx_r + w_r`
    pub fn spend(&self, company: usize) -> f64 {
        self.x.column(company).sum() + self.w[company]
    }

    /// Non-negative, within budget, and quality-free in the seeding-only game.
    pub fn check_feasible(&self, config: &GameConfig) -> Result<()> {
        let (n, r) = (config.n(), config.companies());
        if self.x.shape() != (n, r) {
            return Err(Error::DimensionMismatch {
                what: "seeding matrix entries",
                expected: n * r,
                found: self.x.len(),
            });
        }
        for c in 0..r {
            let reason = if self.x.column(c).iter().chain([&self.w[c]]).any(|&v| v.is_nan() || v < 0.0) {
                Some("negative or non-finite investment".to_string())
            } else if self.spend(c) > config.budgets[c] + BUDGET_TOLERANCE {
                Some(format!("spends {} of budget {}", self.spend(c), config.budgets[c]))
            } else if matches!(config.mode, GameMode::SeedingOnly { .. }) && self.w[c] != 0.0 {
                Some("quality investment in the seeding-only game".to_string())
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::InfeasibleAllocation { company: c, reason });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub ok: bool,
    /// Budget each company must strictly exceed.
    pub thresholds: Vec<f64>,
}

/// Smallest budget guaranteeing an interior stage equilibrium.
///
/// Seeding-quality: `max{nγ·1ᵀ(1−α)/1ᵀα, (n/α_min − 1)γ}`;
/// seeding-only: `(1ᵀα/α_min − 1)γ`.
pub fn budget_threshold(config: &GameConfig) -> f64 {
    let n = config.n() as f64;
    let (sum, min, gamma) = (config.alpha.sum(), config.alpha.min(), config.gamma);
    match config.mode {
        GameMode::SeedingQuality { .. } => {
            let closed = config.alpha.values().iter().map(|a| 1.0 - a).sum::<f64>();
            (n * gamma * closed / sum).max((n / min - 1.0) * gamma)
        }
        GameMode::SeedingOnly { .. } => (sum / min - 1.0) * gamma,
    }
}

pub fn verify_budget_conditions(config: &GameConfig) -> BudgetCheck {
    let t = budget_threshold(config);
    BudgetCheck {
        ok: config.budgets.iter().all(|&c| c > t),
        thresholds: vec![t; config.companies()],
    }
}

fn require_budget(config: &GameConfig) -> Result<()> {
    let t = budget_threshold(config);
    match config.budgets.iter().position(|&c| c.is_nan() || c <= t) {
        Some(company) => Err(Error::BudgetConditionViolated {
            company,
            budget: config.budgets[company],
            threshold: t,
        }),
        None => Ok(()),
    }
}

fn require_interior(config: &GameConfig, alloc: &Allocation, quality: bool) -> Result<()> {
    for c in 0..config.companies() {
        let interior = alloc.x.column(c).iter().all(|&v| v > 0.0) && (!quality || alloc.w[c] > 0.0);
        if !interior {
            return Err(Error::BudgetConditionViolated {
                company: c,
                budget: config.budgets[c],
                threshold: budget_threshold(config),
            });
        }
    }
    Ok(())
}

/// Stage equilibrium of the seeding-quality game at state `p`:
/// `x*_ir = α_i c'_r/n + α_iγ 1ᵀβ_r/n − γβ_ir` and
/// `w*_r = (1 − 1ᵀα/n)(c'_r + γ1ᵀβ_r) − ξ_r u`, where `c'_r = c_r + ξ_r u`
/// with a preset and `c_r` without.
pub fn nash_seeding_quality(config: &GameConfig, p: &ProbabilityMatrix) -> Result<Allocation> {
    let GameMode::SeedingQuality { preset } = &config.mode else {
        return Err(Error::InvalidGameConfig("seeding-quality equilibrium requested for a seeding-only game".into()));
    };
    config.check_state(p)?;
    require_budget(config)?;
    let (n, r, gamma) = (config.n(), config.companies(), config.gamma);
    let nf = n as f64;
    let beta = config.neighbor_average(p);
    let mean_alpha = config.alpha.sum() / nf;
    let mut x = DMatrix::zeros(n, r);
    let mut w = vec![0.0; r];
    for c in 0..r {
        let shift = preset.as_ref().map_or(0.0, |q| q.xi[c] * q.u);
        let effective = config.budgets[c] + shift;
        let reach = gamma * beta.column(c).sum();
        for i in 0..n {
            let a = config.alpha[i];
            x[(i, c)] = a * effective / nf + a * reach / nf - gamma * beta[(i, c)];
        }
        w[c] = (1.0 - mean_alpha) * (effective + reach) - shift;
    }
    let alloc = Allocation { x, w };
    require_interior(config, &alloc, preset.is_none())?;
    Ok(alloc)
}

/// Stage equilibrium of the seeding-only game:
/// `x*_r = (c_r + γ1ᵀβ_r)/1ᵀα · α − γβ_r`.
pub fn nash_seeding_only(config: &GameConfig, p: &ProbabilityMatrix) -> Result<Allocation> {
    if !matches!(config.mode, GameMode::SeedingOnly { .. }) {
        return Err(Error::InvalidGameConfig("seeding-only equilibrium requested for a seeding-quality game".into()));
    }
    config.check_state(p)?;
    require_budget(config)?;
    let (n, r, gamma) = (config.n(), config.companies(), config.gamma);
    let beta = config.neighbor_average(p);
    let sum_alpha = config.alpha.sum();
    let x = DMatrix::from_fn(n, r, |i, c| {
        (config.budgets[c] + gamma * beta.column(c).sum()) / sum_alpha * config.alpha[i]
            - gamma * beta[(i, c)]
    });
    let alloc = Allocation { x, w: vec![0.0; r] };
    require_interior(config, &alloc, false)?;
    Ok(alloc)
}

/// Equilibrium for whichever game `config` describes.
pub fn nash_allocation(config: &GameConfig, p: &ProbabilityMatrix) -> Result<Allocation> {
    match config.mode {
        GameMode::SeedingQuality { .. } => nash_seeding_quality(config, p),
        GameMode::SeedingOnly { .. } => nash_seeding_only(config, p),
    }
}

/// Quality shares `g(w)`.
pub fn quality_shares(w: &[f64], preset: Option<&QualityPreset>) -> Result<Vec<f64>> {
    let total: f64 = w.iter().sum();
    match preset {
        Some(q) => Ok(w
            .iter()
            .zip(&q.xi)
            .map(|(wr, xi)| (wr + xi * q.u) / (total + q.u))
            .collect()),
        None if total > 0.0 => Ok(w
            .iter()
            .map(|&wr| if wr == 0.0 { 0.0 } else { wr / total })
            .collect()),
        None => Err(Error::ZeroQualityVector),
    }
}

/// `α_i(γβ_ir + x_ir)/(Σ_s x_is + γ)`: the social part of both games.
fn social_part(config: &GameConfig, beta: &DMatrix<f64>, x: &DMatrix<f64>, i: usize, r: usize) -> f64 {
    let seeded: f64 = x.row(i).sum();
    config.alpha[i] * (config.gamma * beta[(i, r)] + x[(i, r)]) / (seeded + config.gamma)
}

/// One stage of the seeding-quality game:
/// `p_ir' = α_i(γβ_ir + x_ir)/(Σ_s x_is + γ) + (1 − α_i)g_r(w)`.
pub fn game_step_seeding_quality(
    config: &GameConfig,
    p: &ProbabilityMatrix,
    alloc: &Allocation,
) -> Result<ProbabilityMatrix> {
    let GameMode::SeedingQuality { preset } = &config.mode else {
        return Err(Error::InvalidGameConfig("seeding-quality step requested for a seeding-only game".into()));
    };
    config.check_state(p)?;
    alloc.check_feasible(config)?;
    let g = quality_shares(&alloc.w, preset.as_ref())?;
    let beta = config.neighbor_average(p);
    let out = DMatrix::from_fn(config.n(), config.companies(), |i, r| {
        social_part(config, &beta, &alloc.x, i, r) + (1.0 - config.alpha[i]) * g[r]
    });
    ProbabilityMatrix::from_map_output(out)
}

/// One stage of the seeding-only game:
/// `p_ir' = α_i(γβ_ir + x_ir)/(Σ_s x_is + γ) + (1 − α_i)(PΔ)_ir`.
pub fn game_step_seeding_only(
    config: &GameConfig,
    p: &ProbabilityMatrix,
    alloc: &Allocation,
) -> Result<ProbabilityMatrix> {
    let GameMode::SeedingOnly { conversion } = &config.mode else {
        return Err(Error::InvalidGameConfig("seeding-only step requested for a seeding-quality game".into()));
    };
    config.check_state(p)?;
    alloc.check_feasible(config)?;
    let beta = config.neighbor_average(p);
    let own = p.as_matrix() * conversion.delta();
    let out = DMatrix::from_fn(config.n(), config.companies(), |i, r| {
        social_part(config, &beta, &alloc.x, i, r) + (1.0 - config.alpha[i]) * own[(i, r)]
    });
    ProbabilityMatrix::from_map_output(out)
}

pub fn game_step(config: &GameConfig, p: &ProbabilityMatrix, alloc: &Allocation) -> Result<ProbabilityMatrix> {
    match config.mode {
        GameMode::SeedingQuality { .. } => game_step_seeding_quality(config, p, alloc),
        GameMode::SeedingOnly { .. } => game_step_seeding_only(config, p, alloc),
    }
}

/// Seeding-only stage under equilibrium play in matrix form:
/// `diag(α)(1cᵀ + γ11ᵀÃP)/(1ᵀc + nγ) + (I − diag(α))PΔ`.
pub fn seeding_only_nash_step(config: &GameConfig, p: &ProbabilityMatrix) -> Result<ProbabilityMatrix> {
    let GameMode::SeedingOnly { conversion } = &config.mode else {
        return Err(Error::InvalidGameConfig("seeding-only step requested for a seeding-quality game".into()));
    };
    config.check_state(p)?;
    let (n, r) = (config.n(), config.companies());
    let reach: Vec<f64> = config.neighbor_average(p).row_sum().iter().copied().collect();
    let denom = config.total_budget() + n as f64 * config.gamma;
    let own = p.as_matrix() * conversion.delta();
    let out = DMatrix::from_fn(n, r, |i, c| {
        let a = config.alpha[i];
        a * (config.budgets[c] + config.gamma * reach[c]) / denom + (1.0 - a) * own[(i, c)]
    });
    ProbabilityMatrix::from_map_output(out)
}

/// Average adoption after one seeding-quality stage under equilibrium play:
/// `(c_r + nγp_r)/(1ᵀc + nγ)`.
pub fn closed_loop_average_step(config: &GameConfig, average: &[f64]) -> Vec<f64> {
    let ng = config.n() as f64 * config.gamma;
    let denom = config.total_budget() + ng;
    config
        .budgets
        .iter()
        .zip(average)
        .map(|(c, p)| (c + ng * p) / denom)
        .collect()
}

/// Limit `c_r/1ᵀc` of the seeding-quality closed loop.
pub fn closed_loop_limit(config: &GameConfig) -> Vec<f64> {
    let total = config.total_budget();
    config.budgets.iter().map(|c| c / total).collect()
}

/// `nγ/(1ᵀc + nγ)`
pub fn closed_loop_rate(config: &GameConfig) -> f64 {
    let ng = config.n() as f64 * config.gamma;
    ng / (config.total_budget() + ng)
}

/// Contraction modulus of the seeding-only closed loop,
/// `max_i α_i nγ/(1ᵀc + nγ) + (1 − α_i)ζ(Δ)`.
pub fn seeding_only_modulus(config: &GameConfig) -> Result<f64> {
    let GameMode::SeedingOnly { conversion } = &config.mode else {
        return Err(Error::InvalidGameConfig("modulus defined for the seeding-only game".into()));
    };
    let zeta = 1.0 - conversion.delta().column_iter().map(|c| c.min()).sum::<f64>();
    let rate = closed_loop_rate(config);
    Ok(config
        .alpha
        .values()
        .iter()
        .map(|a| a * rate + (1.0 - a) * zeta)
        .fold(0.0, f64::max))
}

/// `1ᵀp_r`
pub fn payoff(p: &ProbabilityMatrix, company: usize) -> f64 {
    p.as_matrix().column(company).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseReport {
    pub company: usize,
    pub max_gain: f64,
    pub evaluated: usize,
    pub ok: bool,
}

/// Random full-budget reallocation of `company`: Dirichlet-uniform draws for
/// the first `trials` deviations, then pairwise transfers of
/// `step · c_r` cycling through `step_sizes`.
#[allow(clippy::too_many_arguments)]
pub fn best_response_check(
    config: &GameConfig,
    p: &ProbabilityMatrix,
    alloc: &Allocation,
    company: usize,
    trials: usize,
    step_sizes: &[f64],
    seed: u64,
) -> Result<BestResponseReport> {
    if company >= config.companies() {
        return Err(Error::InvalidGameConfig(format!("no company {company}")));
    }
    alloc.check_feasible(config)?;
    let base = payoff(&game_step(config, p, alloc)?, company);
    let quality = matches!(config.mode, GameMode::SeedingQuality { .. });
    let n = config.n();
    let slots = if quality { n + 1 } else { n };
    let budget = config.budgets[company];
    let current: Vec<f64> = alloc
        .x
        .column(company)
        .iter()
        .copied()
        .chain(quality.then_some(alloc.w[company]))
        .collect();
    let transfers = if step_sizes.is_empty() { 0 } else { trials };
    let gains = (0..trials + transfers)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let spend = if k < trials {
                dirichlet(slots, budget, &mut rng)
            } else {
                let step = step_sizes[(k - trials) % step_sizes.len()] * budget;
                transfer(&current, step, &mut rng)
            };
            let mut dev = alloc.clone();
            for (i, &v) in spend.iter().take(n).enumerate() {
                dev.x[(i, company)] = v;
            }
            if quality {
                dev.w[company] = spend[n];
            }
            match game_step(config, p, &dev) {
                Ok(next) => Ok(payoff(&next, company) - base),
                // a deviation leaving no quality at all is infeasible
                Err(Error::ZeroQualityVector) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_gain = gains.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(BestResponseReport {
        company,
        max_gain,
        evaluated: trials + transfers,
        ok: max_gain <= GAIN_TOLERANCE,
    })
}

fn dirichlet<G: Rng + ?Sized>(k: usize, total: f64, rng: &mut G) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|d| total * d / s).collect()
}

fn transfer<G: Rng + ?Sized>(current: &[f64], amount: f64, rng: &mut G) -> Vec<f64> {
    let k = current.len();
    let from = rng.random_range(0..k);
    let to = (from + rng.random_range(1..k)) % k;
    let moved = amount.min(current[from]);
    let mut out = current.to_vec();
    out[from] -= moved;
    out[to] += moved;
    out
}

/// How a company invests during a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Nash,
    /// Dirichlet-uniform split of the whole budget each stage.
    Random,
}

/// States, allocations and payoffs of a closed-loop run.
#[derive(Debug, Clone)]
pub struct GameRun {
    /// `P(0), …, P(T)`
    pub states: Vec<ProbabilityMatrix>,
    /// Allocation used to move from `P(t)` to `P(t+1)`.
    pub allocations: Vec<Allocation>,
}

impl GameRun {
    /// `t,company,payoff,p_avg` for `t = 1..=T` (payoff of the stage ending at `t`).
    pub fn payoff_csv(&self) -> String {
        let mut out = String::from("t,company,payoff,p_avg\n");
        for (t, p) in self.states.iter().enumerate().skip(1) {
            for c in 0..p.r() {
                let total = payoff(p, c);
                let _ = writeln!(out, "{t},{c},{total:.16e},{:.16e}", total / p.n() as f64);
            }
        }
        out
    }

    /// `t,node,company,x` with `t` the stage whose state the allocation acts on.
    pub fn seeding_csv(&self) -> String {
        let mut out = String::from("t,node,company,x\n");
        for (t, a) in self.allocations.iter().enumerate() {
            for i in 0..a.x.nrows() {
                for c in 0..a.x.ncols() {
                    let _ = writeln!(out, "{t},{i},{c},{:.16e}", a.x[(i, c)]);
                }
            }
        }
        out
    }

    /// `t,company,w`
    pub fn quality_csv(&self) -> String {
        let mut out = String::from("t,company,w\n");
        for (t, a) in self.allocations.iter().enumerate() {
            for (c, w) in a.w.iter().enumerate() {
                let _ = writeln!(out, "{t},{c},{w:.16e}");
            }
        }
        out
    }

    pub fn average_adoption(&self, t: usize) -> Vec<f64> {
        self.states[t].column_means()
    }
}

/// Plays `horizon` stages from `p0` with one policy per company.
pub fn run_closed_loop(
    config: &GameConfig,
    p0: ProbabilityMatrix,
    policies: &[Policy],
    horizon: usize,
    seed: u64,
) -> Result<GameRun> {
    config.check_state(&p0)?;
    if policies.len() != config.companies() {
        return Err(Error::DimensionMismatch {
            what: "policies",
            expected: config.companies(),
            found: policies.len(),
        });
    }
    let quality = matches!(config.mode, GameMode::SeedingQuality { .. });
    let (n, r) = (config.n(), config.companies());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![p0];
    let mut allocations = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let p = states.last().expect("non-empty");
        let nash = if policies.contains(&Policy::Nash) {
            Some(nash_allocation(config, p)?)
        } else {
            None
        };
        let mut alloc = Allocation::zeros(n, r);
        for (c, policy) in policies.iter().enumerate() {
            match policy {
                Policy::Nash => {
                    let eq = nash.as_ref().expect("computed above");
                    alloc.x.set_column(c, &eq.x.column(c));
                    alloc.w[c] = eq.w[c];
                }
                Policy::Random => {
                    let split = dirichlet(if quality { n + 1 } else { n }, config.budgets[c], &mut rng);
                    for (i, &v) in split.iter().take(n).enumerate() {
                        alloc.x[(i, c)] = v;
                    }
                    if quality {
                        alloc.w[c] = split[n];
                    }
                }
            }
        }
        let next = game_step(config, p, &alloc)?;
        allocations.push(alloc);
        states.push(next);
    }
    Ok(GameRun { states, allocations })
}
