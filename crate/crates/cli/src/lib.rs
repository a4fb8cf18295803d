//! Experiment runner behind the `ncpm` binary. Each experiment reads one
//! JSON config and writes CSV/JSON files whose first line (CSV) or `config`
//! field (JSON) holds the fully resolved config, seeds included.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ncpm_core::analysis::{check_stability, fixed_point_bounds, predict_asymptotics};
use ncpm_core::games::{budget_threshold, closed_loop_limit, run_closed_loop, verify_budget_conditions, GameMode, Policy};
use ncpm_core::graphs::io::{matrix_rows, ModelInput};
use ncpm_core::markov::{estimate_trajectories, SimulationModel};
use ncpm_core::ncpm::{solve_two_product_with, trajectory, IterateOptions, MapKind};
use ncpm_core::TwoProductParams;
use serde_json::json;

pub use config::{ExperimentConfig, ExperimentKind, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("did not converge: {0}")]
    NotConverged(ncpm_core::Error),

    #[error(transparent)]
    Model(ncpm_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        let path = path.into();
        CliError::Config {
            path: if path.is_empty() { ".".into() } else { path },
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::NotConverged(_) => 3,
            CliError::Model(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<ncpm_core::Error> for CliError {
    fn from(e: ncpm_core::Error) -> Self {
        if e.is_non_convergence() {
            CliError::NotConverged(e)
        } else {
            CliError::Model(e)
        }
    }
}

/// Files written by one run plus a one-line result.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    header: String,
    config: serde_json::Value,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let dir = cfg.out_dir();
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        let config = serde_json::to_value(cfg).expect("config serializes");
        Ok(Self {
            header: format!("# config={config}\n"),
            dir,
            config,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("{}{body}", self.header);
        self.write(name, &text)
    }

    fn json(&mut self, name: &str, mut value: serde_json::Value) -> Result<(), CliError> {
        value["config"] = self.config.clone();
        let text = serde_json::to_string_pretty(&value).expect("json serializes") + "\n";
        self.write(name, &text)
    }

    fn finish(self, summary: String) -> RunOutput {
        RunOutput { files: self.files, summary }
    }
}

/// Reads a config file and applies command-line overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    cfg.apply(overrides);
    Ok(cfg)
}

pub fn run_experiment(cfg: ExperimentConfig, kind: ExperimentKind) -> Result<RunOutput, CliError> {
    let cfg = cfg.resolve(kind)?;
    log::info!("running {kind:?} with seed {}", cfg.seed());
    match kind {
        ExperimentKind::CompareMcNcpm => compare(&cfg),
        ExperimentKind::Asymptotics => asymptotics(&cfg),
        ExperimentKind::Stability => stability(&cfg),
        ExperimentKind::Game => game(&cfg),
    }
}

fn compare(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let net = cfg.network()?;
    let alpha = cfg.open_mindedness(net.n())?;
    let pcg = cfg.conversion()?;
    let p0 = cfg.initial(net.n(), pcg.r())?;
    let model = cfg.model.unwrap_or(SimulationModel::SocialSelf);
    let (horizon, samples, seed) = (cfg.horizon(), cfg.samples(), cfg.seed());
    let mc = estimate_trajectories(model, &net, &alpha, &pcg, &p0, horizon, samples, seed)?;
    let map = match model {
        SimulationModel::SocialSelf => MapKind::SocialSelf { net: &net, alpha: &alpha, pcg: &pcg },
        SimulationModel::SelfSocial => MapKind::SelfSocial { net: &net, alpha: &alpha, pcg: &pcg },
    };
    let mf = trajectory(&map, p0.into_inner(), horizon)?;
    let mut body = String::from("t,node,product,p_hat,ncpm,gap\n");
    let (mut max_gap, mut at) = (0.0f64, (0, 0, 0));
    for (t, state) in mf.iter().enumerate() {
        for i in 0..net.n() {
            for r in 0..pcg.r() {
                let (est, val) = (mc.p_hat(t, i, r), state[(i, r)]);
                let gap = (est - val).abs();
                if gap > max_gap {
                    (max_gap, at) = (gap, (t, i, r));
                }
                let _ = writeln!(body, "{t},{i},{r},{est:.16e},{val:.16e},{gap:.16e}");
            }
        }
    }
    let mut out = Writer::new(cfg)?;
    out.csv("compare.csv", &body)?;
    out.json(
        "compare_summary.json",
        json!({
            "max_gap": max_gap,
            "max_gap_at": {"t": at.0, "node": at.1, "product": at.2},
            "noise_scale": (0.25 / samples as f64).sqrt(),
            "simulation": mc.summary(),
        }),
    )?;
    Ok(out.finish(format!("max |MC - NCPM| = {max_gap:.3e} at t={}, node {}, product {}", at.0, at.1, at.2)))
}

fn asymptotics(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let net = cfg.network()?;
    let alpha = cfg.open_mindedness(net.n())?;
    let pcg = cfg.conversion()?;
    let p0 = cfg.initial(net.n(), pcg.r())?;
    let prediction = predict_asymptotics(&net, &alpha, &pcg, &p0)?;
    let map = MapKind::SocialSelf { net: &net, alpha: &alpha, pcg: &pcg };
    let traj = trajectory(&map, p0.into_inner(), cfg.horizon())?;
    let limit = prediction.limit();
    let mut body = String::from("t,node,product,p,limit_gap\n");
    for (t, state) in traj.iter().enumerate() {
        for i in 0..state.nrows() {
            for r in 0..state.ncols() {
                let v = state[(i, r)];
                let _ = writeln!(body, "{t},{i},{r},{v:.16e},{:.16e}", (v - limit[(i, r)]).abs());
            }
        }
    }
    let final_gap = (traj.last().expect("non-empty") - &limit).amax();
    let mut out = Writer::new(cfg)?;
    out.json(
        "prediction.json",
        json!({
            "prediction": prediction.report(),
            "gamma_steps": prediction.steps,
            "final_gap": final_gap,
        }),
    )?;
    out.csv("trajectory.csv", &body)?;
    Ok(out.finish(format!(
        "{:?}: limit row {:?}, gap at t={} is {final_gap:.3e}",
        prediction.case,
        prediction.row,
        cfg.horizon()
    )))
}

fn stability(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let net = cfg.network()?;
    let alpha = cfg.open_mindedness(net.n())?;
    let pcg = cfg.conversion()?;
    let params = TwoProductParams::from_conversion(&pcg).map_err(|e| CliError::config("delta", e.to_string()))?;
    let opts = IterateOptions {
        tol: cfg.tol(),
        max_iter: cfg.max_iter(),
        keep_trajectory: false,
    };
    let sol = solve_two_product_with(&params, &net, &alpha, opts)?;
    let report = check_stability(&net, &alpha, &params, &sol.p_star)?;
    let bounds = fixed_point_bounds(&params, &alpha)?;
    let mut out = Writer::new(cfg)?;
    out.json(
        "stability.json",
        json!({
            "fixed_point": sol.p_star.as_slice(),
            "iterations": sol.iterations,
            "t_residual": sol.t_residual,
            "h_residual": sol.h_residual,
            "bounds": bounds,
            "report": report,
        }),
    )?;
    Ok(out.finish(format!(
        "fixed point found in {} iterations; spectral radius {:.6}",
        sol.iterations, report.spectral_radius
    )))
}

fn game(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let net = cfg.network()?;
    let alpha = cfg.open_mindedness(net.n())?;
    let config = cfg.game_config(net, alpha)?;
    let policies = cfg.policies();
    if policies.len() != config.companies() {
        return Err(CliError::config(
            "game.policies",
            format!("{} policies for {} companies", policies.len(), config.companies()),
        ));
    }
    let budgets = verify_budget_conditions(&config);
    if policies.contains(&Policy::Nash) && !budgets.ok {
        return Err(CliError::config(
            "game.budgets",
            format!("every budget must exceed {:?} for an interior equilibrium", budgets.thresholds),
        ));
    }
    let p0 = cfg.initial(config.n(), config.companies())?;
    let run = run_closed_loop(&config, p0, &policies, cfg.horizon(), cfg.seed().wrapping_add(3))?;
    let mut avg = String::from("t,company,p_avg\n");
    for t in 0..run.states.len() {
        for (c, v) in run.average_adoption(t).iter().enumerate() {
            let _ = writeln!(avg, "{t},{c},{v:.16e}");
        }
    }
    let last = run.average_adoption(run.states.len() - 1);
    let mut out = Writer::new(cfg)?;
    out.csv("payoff.csv", &run.payoff_csv())?;
    out.csv("adoption.csv", &avg)?;
    out.csv("seeding.csv", &run.seeding_csv())?;
    if matches!(config.mode(), GameMode::SeedingQuality { .. }) {
        out.csv("quality.csv", &run.quality_csv())?;
    }
    out.json(
        "game_summary.json",
        json!({
            "budget_threshold": budget_threshold(&config),
            "budget_check": budgets,
            "closed_loop_limit": closed_loop_limit(&config),
            "final_average_adoption": last,
        }),
    )?;
    Ok(out.finish(format!("average adoption at t={}: {last:.6?}", cfg.horizon())))
}

/// Generates the configured graph and writes its adjacency and edge list.
pub fn generate_graph(cfg: ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut cfg = cfg;
    cfg.kind = None;
    let seed = *cfg.seed.get_or_insert(0);
    cfg.out_dir.get_or_insert_with(|| PathBuf::from(config::DEFAULT_OUT_DIR));
    if let Some(s) = cfg.graph.effective_seed(seed) {
        cfg.graph = match cfg.graph {
            ncpm_core::generators::GraphSpec::ErdosRenyi { n, p, .. } => {
                ncpm_core::generators::GraphSpec::ErdosRenyi { n, p, seed: Some(s) }
            }
            ncpm_core::generators::GraphSpec::PowerLaw { n, exponent, min_degree, .. } => {
                ncpm_core::generators::GraphSpec::PowerLaw { n, exponent, min_degree, seed: Some(s) }
            }
            other => other,
        };
    }
    let net = cfg.network()?;
    let mut edges = String::from("i,j\n");
    for (i, j) in net.edges() {
        let _ = writeln!(edges, "{i},{j}");
    }
    let mut out = Writer::new(&cfg)?;
    out.json(
        "graph.json",
        json!({
            "adjacency": ModelInput::from_network(&net).adjacency,
            "degrees": net.degrees(),
            "normalized": matrix_rows(net.normalized()),
        }),
    )?;
    out.csv("edges.csv", &edges)?;
    Ok(out.finish(format!("{} nodes, {} edges", net.n(), net.edges().len())))
}
