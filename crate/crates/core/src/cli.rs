//! Experiment runner: JSON run configuration, the `run`, `tune` and `synth`
//! subcommands, and exit-code mapping.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{self, Method, MethodResult, MethodSettings};
use crate::datagen::{self, DynamicsKind, SyntheticScenario};
use crate::error::{OrlError, Result};
use crate::io::{self, OfflineShape};
use crate::residual::{OfflinePredictionSet, Trajectory};
use crate::rls::ProjectionSettings;
use crate::tuning::{self, TuningInputs, TuningReport};

/// Forgetting factor for every expert, or one per expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Scalar(f64),
    PerExpert(Vec<f64>),
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Scalar(0.8)
    }
}

impl GammaSpec {
    pub fn resolve(&self, experts: usize) -> Result<Vec<f64>> {
        let gammas = match self {
            GammaSpec::Scalar(g) => vec![*g; experts],
            GammaSpec::PerExpert(v) if v.len() == experts => v.clone(),
            GammaSpec::PerExpert(v) => {
                return Err(OrlError::config(format!(
                    "gamma lists {} values for {experts} experts",
                    v.len()
                )))
            }
        };
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return Err(OrlError::config(format!("gamma must lie in (0, 1], got {g}")));
        }
        Ok(gammas)
    }
}

fn default_p() -> usize {
    2
}
fn default_k() -> usize {
    60
}
fn default_epsilon() -> f64 {
    1.0
}
fn default_norm_bound() -> f64 {
    5.0
}
fn default_lambda() -> f64 {
    1e-4
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

/// Everything one `run` needs. Unset shape fields are inferred from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(rename = "N", default)]
    pub experts: Option<usize>,
    #[serde(rename = "T", default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub gamma: GammaSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(rename = "D", default = "default_norm_bound")]
    pub norm_bound: f64,
    #[serde(rename = "D_r", default)]
    pub residual_bound: Option<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub projection: ProjectionSettings,
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub offline: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticScenario>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Overrides the synthetic scenario's seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| OrlError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| OrlError::io(path, e))?;
        Self::from_json(&text).map_err(|e| OrlError::config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 || self.k < 1 {
            return Err(OrlError::config("p and k must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(OrlError::config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.norm_bound >= 0.0 && self.norm_bound.is_finite()) {
            return Err(OrlError::config(format!("D must be nonnegative, got {}", self.norm_bound)));
        }
        if let Some(dr) = self.residual_bound {
            if !(dr > 0.0 && dr.is_finite()) {
                return Err(OrlError::config(format!("D_r must be positive, got {dr}")));
            }
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(OrlError::config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.methods.is_empty() {
            return Err(OrlError::config("no methods selected"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(OrlError::config(format!("method `{m}` listed twice")));
            }
        }
        if let Some(n) = self.experts {
            self.gamma.resolve(n)?;
        } else if let GammaSpec::Scalar(_) = self.gamma {
            self.gamma.resolve(1)?;
        }
        match (&self.synthetic, &self.trajectory, &self.offline) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => Ok(()),
            (Some(_), _, _) => Err(OrlError::config("give either a synthetic scenario or input files, not both")),
            (None, None, None) => Err(OrlError::config("no input: set `synthetic` or both `trajectory` and `offline`")),
            (None, _, _) => Err(OrlError::config("both `trajectory` and `offline` are required")),
        }
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub offline: Option<PathBuf>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<Method>>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        if self.trajectory.is_some() || self.offline.is_some() {
            config.synthetic = None;
            config.trajectory = self.trajectory.clone().or(config.trajectory.take());
            config.offline = self.offline.clone().or(config.offline.take());
        }
        if let Some(seed) = self.seed {
            config.seed = Some(seed);
        }
        if let Some(methods) = &self.methods {
            config.methods = methods.clone();
        }
    }
}

/// A validated run with its data loaded.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub trajectory: Trajectory,
    pub offline: OfflinePredictionSet,
    pub settings: MethodSettings,
    pub methods: Vec<Method>,
}

fn check_matches(context: &'static str, configured: Option<usize>, actual: usize) -> Result<()> {
    match configured {
        Some(c) => OrlError::check_dim(context, c, actual),
        None => Ok(()),
    }
}

fn load_data(config: &RunConfig) -> Result<(Trajectory, OfflinePredictionSet)> {
    if let Some(scenario) = &config.synthetic {
        let mut scenario = scenario.clone();
        if let Some(seed) = config.seed {
            scenario.seed = seed;
        }
        let data = datagen::generate(&scenario)?;
        return Ok((data.trajectory, data.offline));
    }
    let (traj_path, off_path) = match (&config.trajectory, &config.offline) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(OrlError::config("both `trajectory` and `offline` are required")),
    };
    let trajectory = io::load_trajectory(traj_path)?;
    let offline = io::load_offline_predictions(
        off_path,
        OfflineShape {
            experts: config.experts,
            horizon: config.horizon,
            dim: Some(trajectory.dim()),
        },
    )?;
    Ok((trajectory, offline))
}

/// Validates `config` and loads its data without writing anything.
pub fn prepare_run(config: &RunConfig) -> Result<PreparedRun> {
    config.validate()?;
    let (trajectory, offline) = load_data(config)?;
    check_matches("configured n", config.n, offline.dim())?;
    check_matches("configured N", config.experts, offline.experts())?;
    check_matches("configured T", config.horizon, offline.horizon())?;
    let gammas = config.gamma.resolve(offline.experts())?;

    let realized = bench::realized_residual_bound(&trajectory, &offline)?;
    let dr = config.residual_bound.unwrap_or(realized);
    if dr > 0.0 {
        let limit = tuning::lambda_max(dr, config.norm_bound)?;
        if config.lambda > limit {
            log::warn!(
                "lambda={} exceeds lambda_max={limit:.6e} for D_r={dr}, D={}; the regret guarantee does not cover this run",
                config.lambda,
                config.norm_bound
            );
        }
    }
    Ok(PreparedRun {
        trajectory,
        offline,
        settings: MethodSettings {
            p: config.p,
            k: config.k,
            lambda: config.lambda,
            gammas,
            epsilon: config.epsilon,
            bound: config.norm_bound,
            projection: config.projection,
            residual_bound: config.residual_bound,
        },
        methods: config.methods.clone(),
    })
}

/// Runs every configured method and writes the loss curves, weights and
/// `summary.csv` to the output directory. Nothing is written unless every
/// method succeeds.
pub fn cmd_run(config: &RunConfig) -> Result<Vec<MethodResult>> {
    let out = config
        .out
        .clone()
        .ok_or_else(|| OrlError::config("no output directory: set `out` or pass --out"))?;
    let run = prepare_run(config)?;
    let traces = run
        .methods
        .iter()
        .map(|m| bench::run_method(*m, &run.trajectory, &run.offline, &run.settings))
        .collect::<Result<Vec<_>>>()?;
    let streams = bench::residual_streams(&run.trajectory, &run.offline, run.settings.p, run.settings.k)?;
    let comparator = bench::hindsight_static_comparator(&streams, run.settings.bound)?;
    let results = traces
        .iter()
        .map(|t| bench::summarize(t, &comparator))
        .collect::<Result<Vec<_>>>()?;
    bench::emit_plot_data(&traces, &out)?;
    bench::write_summary(&results, &out)?;
    Ok(results)
}

/// `key=value` lines printed by `tune`.
pub fn tune_lines(report: &TuningReport) -> String {
    format!(
        "lambda_max={}\nalpha={}\ngamma={}\ngamma_clamped={}\nexpert_term={}\n",
        report.lambda_max, report.alpha, report.gamma, report.gamma_clamped, report.expert_term
    )
}

pub fn cmd_tune(inputs: &TuningInputs) -> Result<String> {
    let report = inputs.report()?;
    if report.gamma_clamped {
        log::warn!("forgetting schedule clamped to gamma={}", report.gamma);
    }
    Ok(tune_lines(&report))
}

/// Generates `scenario` and writes its trajectory and offline predictions.
pub fn cmd_synth(scenario: &SyntheticScenario, trajectory: &Path, offline: &Path) -> Result<()> {
    let data = datagen::generate(scenario)?;
    for path in [trajectory, offline] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| OrlError::io(dir, e))?;
        }
    }
    io::write_trajectory(trajectory, &data.trajectory)?;
    io::write_offline_predictions(offline, &data.offline)
}

#[derive(Debug, Parser)]
#[command(name = "orl", version, about = "Online residual learning over offline trajectory predictions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured methods and write loss curves and a summary.
    Run(RunArgs),
    /// Print the theoretical learning rate and forgetting factor.
    Tune(TuneArgs),
    /// Generate a synthetic trajectory and offline experts.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long)]
    pub offline: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of orl, online, offline_experts, best_offline.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Reads D_r, D, T and N from a run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Residual bound D_r.
    #[arg(long = "residual-bound")]
    pub residual_bound: Option<f64>,
    /// Spectral-norm bound D.
    #[arg(long = "norm-bound")]
    pub norm_bound: Option<f64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Path-length budget V_T.
    #[arg(long = "path-length", default_value_t = 0.0)]
    pub path_length: f64,
    #[arg(long)]
    pub experts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Run configuration whose `synthetic` section is the base scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for `trajectory.csv` and `offline.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long)]
    pub offline: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dynamics: Option<DynamicsKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Number of experts, drawn from the standard corruption mix.
    #[arg(long)]
    pub experts: Option<usize>,
    /// Disturbance radius d_max.
    #[arg(long, allow_negative_numbers = true)]
    pub disturbance: Option<f64>,
}

fn run_args(args: RunArgs) -> Result<String> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    Overrides {
        out: args.out,
        trajectory: args.trajectory,
        offline: args.offline,
        seed: args.seed,
        methods: args.methods,
    }
    .apply(&mut config);
    let results = cmd_run(&config)?;
    let mut text = String::new();
    for r in results {
        text.push_str(&format!(
            "{}: cumloss={:.6e} ade_sq={:.6e} ade_l2={:.6e} regret_static={:.6e}\n",
            r.method, r.cumloss, r.ade_sq, r.ade_l2, r.regret_static
        ));
    }
    Ok(text)
}

fn tune_args(args: TuneArgs) -> Result<String> {
    let config = args.config.as_deref().map(RunConfig::load).transpose()?;
    let missing = |name: &str| OrlError::config(format!("tune needs {name}"));
    let inputs = TuningInputs {
        residual_bound: args
            .residual_bound
            .or(config.as_ref().and_then(|c| c.residual_bound))
            .ok_or_else(|| missing("--residual-bound"))?,
        norm_bound: args
            .norm_bound
            .or(config.as_ref().map(|c| c.norm_bound))
            .ok_or_else(|| missing("--norm-bound"))?,
        horizon: args
            .horizon
            .or(config.as_ref().and_then(|c| c.horizon))
            .ok_or_else(|| missing("--horizon"))?,
        path_length: args.path_length,
        experts: args
            .experts
            .or(config.as_ref().and_then(|c| c.experts))
            .ok_or_else(|| missing("--experts"))?,
    };
    cmd_tune(&inputs)
}

fn synth_args(args: SynthArgs) -> Result<String> {
    let base = match &args.config {
        Some(path) => Some(
            RunConfig::load(path)?
                .synthetic
                .ok_or_else(|| OrlError::config(format!("{} has no `synthetic` section", path.display())))?,
        ),
        None => None,
    };
    let mut scenario = base.unwrap_or_else(|| {
        let (n, horizon) = (args.n.unwrap_or(2), args.horizon.unwrap_or(1000));
        SyntheticScenario::new(
            n,
            2,
            horizon,
            DynamicsKind::StaticLinear,
            0.5,
            datagen::standard_expert_mix(n, horizon, 3),
            0,
        )
    });
    if let Some(n) = args.n {
        scenario.n = n;
    }
    if let Some(p) = args.p {
        scenario.p = p;
    }
    if let Some(h) = args.horizon {
        scenario.horizon = h;
    }
    if let Some(d) = args.dynamics {
        scenario.dynamics = d;
    }
    if let Some(d) = args.disturbance {
        scenario.disturbance = d;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(count) = args.experts {
        scenario.experts = datagen::standard_expert_mix(scenario.n, scenario.horizon, count);
    }
    let (trajectory, offline) = match (args.trajectory, args.offline, args.out) {
        (Some(t), Some(o), _) => (t, o),
        (t, o, Some(dir)) => (
            t.unwrap_or_else(|| dir.join("trajectory.csv")),
            o.unwrap_or_else(|| dir.join("offline.csv")),
        ),
        _ => return Err(OrlError::config("synth needs --out or both --trajectory and --offline")),
    };
    cmd_synth(&scenario, &trajectory, &offline)?;
    Ok(format!("wrote {} and {}\n", trajectory.display(), offline.display()))
}

/// Parses `args` (program name first), runs the subcommand, prints its output
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run_args(a),
        Command::Tune(a) => tune_args(a),
        Command::Synth(a) => synth_args(a),
    };
    match outcome {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::ExpertCorruption;

    fn scenario() -> SyntheticScenario {
        let mut sc = SyntheticScenario::new(
            2,
            2,
            40,
            DynamicsKind::StaticLinear,
            0.5,
            vec![ExpertCorruption::noisy(1.0), ExpertCorruption::biased(vec![1.0, -1.0])],
            3,
        );
        sc.initial_spread = 2.0;
        sc
    }

    fn config(out: &Path) -> RunConfig {
        RunConfig {
            k: 2,
            synthetic: Some(scenario()),
            out: Some(out.to_path_buf()),
            ..RunConfig::default()
        }
    }

    #[test]
    fn defaults_follow_reference_setup() {
        let c = RunConfig::default();
        assert_eq!((c.p, c.k, c.lambda, c.epsilon), (2, 60, 1e-4, 1.0));
        assert_eq!(c.gamma, GammaSpec::Scalar(0.8));
        assert_eq!(c.methods, Method::ALL.to_vec());
    }

    #[test]
    fn config_round_trips() {
        let mut c = config(Path::new("results"));
        c.gamma = GammaSpec::PerExpert(vec![0.9, 0.7]);
        c.residual_bound = Some(3.0);
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
        let from_text = RunConfig::from_json(r#"{"gamma": 0.9, "N": 3, "D_r": 2.0, "methods": ["orl"]}"#).unwrap();
        assert_eq!(from_text.experts, Some(3));
        assert_eq!(RunConfig::from_json(&from_text.to_json()).unwrap(), from_text);
    }

    #[test]
    fn gamma_broadcasts_and_checks() {
        assert_eq!(GammaSpec::Scalar(0.8).resolve(3).unwrap(), vec![0.8; 3]);
        assert!(GammaSpec::PerExpert(vec![0.8, 0.9]).resolve(3).is_err());
        assert!(GammaSpec::Scalar(0.0).resolve(1).is_err());
        assert!(GammaSpec::Scalar(1.0).resolve(1).is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"methods": ["oracle"]}"#).is_err());
        let base = config(Path::new("x"));
        let bad = [
            RunConfig { lambda: 0.0, ..base.clone() },
            RunConfig { methods: vec![], ..base.clone() },
            RunConfig { methods: vec![Method::Orl, Method::Orl], ..base.clone() },
            RunConfig { synthetic: None, ..base.clone() },
            RunConfig { trajectory: Some("t.csv".into()), ..base.clone() },
            RunConfig { gamma: GammaSpec::Scalar(1.5), ..base.clone() },
        ];
        for c in bad {
            assert_eq!(c.validate().unwrap_err().exit_code(), 1, "{c:?}");
        }
        let wrong_n = RunConfig { n: Some(3), ..base };
        assert_eq!(prepare_run(&wrong_n).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn run_writes_all_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let results = cmd_run(&config(dir.path())).unwrap();
        assert_eq!(results.len(), 4);
        for m in Method::ALL {
            assert!(dir.path().join(format!("loss_{m}.csv")).exists());
        }
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 5);
        assert!(summary.starts_with("method,cumloss,ade_sq,ade_l2,regret_static\n"));
    }

    #[test]
    fn missing_input_leaves_no_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results");
        let traj = dir.path().join("trajectory.csv");
        cmd_synth(&scenario(), &traj, &dir.path().join("offline.csv")).unwrap();
        let c = RunConfig {
            trajectory: Some(traj),
            offline: Some(dir.path().join("absent.csv")),
            synthetic: None,
            ..config(&out)
        };
        assert_eq!(cmd_run(&c).unwrap_err().exit_code(), 3);
        assert!(!out.exists());
    }

    #[test]
    fn file_inputs_match_synthetic_run() {
        let dir = tempfile::tempdir().unwrap();
        let (traj, off) = (dir.path().join("t.csv"), dir.path().join("o.csv"));
        cmd_synth(&scenario(), &traj, &off).unwrap();
        let a = cmd_run(&config(&dir.path().join("a"))).unwrap();
        let mut c = config(&dir.path().join("b"));
        Overrides {
            trajectory: Some(traj),
            offline: Some(off),
            ..Overrides::default()
        }
        .apply(&mut c);
        let b = cmd_run(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tune_examples() {
        let inputs = TuningInputs {
            residual_bound: 1.0,
            norm_bound: 1.0,
            horizon: 100,
            path_length: 0.0,
            experts: 20,
        };
        let text = cmd_tune(&inputs).unwrap();
        assert!(text.starts_with("lambda_max=0.125\n"), "{text}");
        assert!(text.contains("gamma=0.98371"));
        assert!(text.contains("expert_term=23.96"));
        let single = cmd_tune(&TuningInputs { experts: 1, ..inputs }).unwrap();
        assert!(single.contains("expert_term=0\n"));
        let clamped = cmd_tune(&TuningInputs { horizon: 2, path_length: 1e6, ..inputs }).unwrap();
        assert!(clamped.contains("gamma_clamped=true"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["orl", "frobnicate"]), 1);
        assert_eq!(main_with_args(["orl", "run", "--methods", "orl,nope"]), 1);
        assert_eq!(main_with_args(["orl", "synth", "--dynamics", "chaotic", "--out", "x"]), 1);
        assert_eq!(main_with_args(["orl", "run"]), 1);
        assert_eq!(main_with_args(["orl", "--help"]), 0);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(main_with_args(["orl", "synth", "--disturbance", "-1", "--out", out]), 1);
        assert_eq!(main_with_args(["orl", "synth", "--horizon", "30", "--seed", "7", "--out", out]), 0);
        let traj = dir.path().join("trajectory.csv");
        assert!(traj.exists());
        let first = fs::read(&traj).unwrap();
        assert_eq!(main_with_args(["orl", "synth", "--horizon", "30", "--seed", "7", "--out", out]), 0);
        assert_eq!(fs::read(&traj).unwrap(), first);
    }
}
