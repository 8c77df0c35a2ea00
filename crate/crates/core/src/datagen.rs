//! Synthetic targets and corrupted offline experts for verification runs.
//!
//! The target follows an autoregressive law around a fixed center `c`:
//!
//! ```text
//! r_{t+1} = c + A_t · (r_{t-p+1:t} − c) + g(r_t − c) + d_t
//! ```
//!
//! where `A_t ∈ ℝ^{n×np}` acts on the stacked window (oldest block first) and
//! `d_t` is drawn uniformly from the ball of radius `disturbance`.
//!
//! * `static_linear`: `A_t = A`, with `A` supplied or `[0 … 0 ρQ]` for a random
//!   orthogonal `Q`; `g = 0`.
//! * `drifting_linear`: newest block `ρ·Q·R(ωt)` where `R` rotates coordinate
//!   pairs `(0,1), (2,3), …` by angle `ωt`; `g = 0`.
//! * `nonlinear_sine`: static `A` plus `g(x) = a·sin(f·x)` elementwise.
//!
//! Each offline expert starts from a base trajectory (the realized truth, or the
//! disturbance-free rollout from the same initial history) and applies an
//! optional bias, Gaussian noise, and a linear drift that begins at an onset
//! time.
//!
//! Randomness comes from ChaCha8, a counter-based stream cipher, keyed by the
//! scenario seed. Independent parts of the scenario draw from separate ChaCha
//! streams, so adding an expert does not change the target trajectory.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{OrlError, Result};
use crate::residual::{OfflinePredictionSet, TargetState, Trajectory};

const STREAM_STRUCTURE: u64 = 0;
const STREAM_DISTURBANCE: u64 = 1;
const STREAM_EXPERT_BASE: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    StaticLinear,
    DriftingLinear,
    NonlinearSine,
}

impl DynamicsKind {
    pub const ALL: [DynamicsKind; 3] = [
        DynamicsKind::StaticLinear,
        DynamicsKind::DriftingLinear,
        DynamicsKind::NonlinearSine,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DynamicsKind::StaticLinear => "static_linear",
            DynamicsKind::DriftingLinear => "drifting_linear",
            DynamicsKind::NonlinearSine => "nonlinear_sine",
        }
    }
}

impl std::str::FromStr for DynamicsKind {
    type Err = OrlError;

    fn from_str(s: &str) -> Result<Self> {
        DynamicsKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = DynamicsKind::ALL.iter().map(DynamicsKind::name).collect();
            OrlError::config(format!("unknown dynamics kind `{s}` (valid kinds: {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExpertBase {
    /// The realized target, disturbances included.
    Truth,
    /// Disturbance-free rollout of the target law from the initial history.
    #[default]
    Nominal,
}

/// How one offline expert deviates from its base trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExpertCorruption {
    #[serde(default)]
    pub base: ExpertBase,
    /// Constant offset added at every time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Vec<f64>>,
    /// Standard deviation of iid Gaussian noise per coordinate.
    #[serde(default)]
    pub noise_scale: f64,
    /// From this time on the prediction drifts away linearly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_onset: Option<usize>,
    /// Drift per step after the onset; defaults to `0.5` in every coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_rate: Option<Vec<f64>>,
}

impl ExpertCorruption {
    /// An exact copy of the realized target.
    pub fn exact() -> Self {
        ExpertCorruption {
            base: ExpertBase::Truth,
            ..Default::default()
        }
    }

    pub fn biased(bias: Vec<f64>) -> Self {
        ExpertCorruption {
            bias: Some(bias),
            ..Default::default()
        }
    }

    pub fn noisy(noise_scale: f64) -> Self {
        ExpertCorruption {
            noise_scale,
            ..Default::default()
        }
    }

    /// Exact copy of the truth until `onset`, then drifting at `rate` per step.
    pub fn exact_then_drifting(onset: usize, rate: Vec<f64>) -> Self {
        ExpertCorruption {
            base: ExpertBase::Truth,
            drift_onset: Some(onset),
            drift_rate: Some(rate),
            ..Default::default()
        }
    }
}

/// `count` experts cycling through a drift that starts at `T/2`, a unit bias,
/// and unit Gaussian noise.
pub fn standard_expert_mix(n: usize, horizon: usize, count: usize) -> Vec<ExpertCorruption> {
    (0..count)
        .map(|i| match i % 3 {
            0 => ExpertCorruption::exact_then_drifting(horizon / 2, vec![0.5; n]),
            1 => ExpertCorruption::biased(vec![1.0; n]),
            _ => ExpertCorruption::noisy(1.0),
        })
        .collect()
}

fn default_spectral_radius() -> f64 {
    0.9
}
fn default_rotation_rate() -> f64 {
    2e-3
}
fn default_sine_amplitude() -> f64 {
    1.0
}
fn default_sine_frequency() -> f64 {
    0.2
}
fn default_initial_spread() -> f64 {
    20.0
}
fn default_center_value() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticScenario {
    pub n: usize,
    pub p: usize,
    /// Final online time `T`.
    pub horizon: usize,
    /// Prediction delay the scenario is meant to be run with.
    #[serde(default = "one")]
    pub k: usize,
    pub dynamics: DynamicsKind,
    /// Radius `d_max` of the disturbance ball.
    pub disturbance: f64,
    pub experts: Vec<ExpertCorruption>,
    pub seed: u64,
    /// Row-major `n × np` coefficients of `A`; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_spectral_radius")]
    pub spectral_radius: f64,
    /// Rotation rate `ω` (radians per step) of the drifting kind.
    #[serde(default = "default_rotation_rate")]
    pub rotation_rate: f64,
    #[serde(default = "default_sine_amplitude")]
    pub sine_amplitude: f64,
    #[serde(default = "default_sine_frequency")]
    pub sine_frequency: f64,
    /// Equilibrium point; defaults to `100` in every coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Radius of the random initial offset from the center.
    #[serde(default = "default_initial_spread")]
    pub initial_spread: f64,
}

fn one() -> usize {
    1
}

impl SyntheticScenario {
    /// A scenario with default shape parameters.
    pub fn new(
        n: usize,
        p: usize,
        horizon: usize,
        dynamics: DynamicsKind,
        disturbance: f64,
        experts: Vec<ExpertCorruption>,
        seed: u64,
    ) -> Self {
        SyntheticScenario {
            n,
            p,
            horizon,
            k: 1,
            dynamics,
            disturbance,
            experts,
            seed,
            coefficients: None,
            spectral_radius: default_spectral_radius(),
            rotation_rate: default_rotation_rate(),
            sine_amplitude: default_sine_amplitude(),
            sine_frequency: default_sine_frequency(),
            center: None,
            initial_spread: default_initial_spread(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.p < 1 || self.k < 1 {
            return Err(OrlError::config("scenario needs n, p, k ≥ 1"));
        }
        if self.horizon < 1 {
            return Err(OrlError::config("scenario horizon must be at least 1"));
        }
        if self.experts.is_empty() {
            return Err(OrlError::config("scenario needs at least one expert"));
        }
        if !(self.disturbance >= 0.0 && self.disturbance.is_finite()) {
            return Err(OrlError::config(format!(
                "disturbance bound must be nonnegative, got {}",
                self.disturbance
            )));
        }
        if !(self.initial_spread >= 0.0 && self.initial_spread.is_finite()) {
            return Err(OrlError::config("initial spread must be nonnegative"));
        }
        if let Some(c) = &self.center {
            if c.len() != self.n {
                return Err(OrlError::config(format!("center has {} entries, n={}", c.len(), self.n)));
            }
        }
        for (i, ex) in self.experts.iter().enumerate() {
            for (name, v) in [("bias", &ex.bias), ("drift_rate", &ex.drift_rate)] {
                if let Some(v) = v {
                    if v.len() != self.n {
                        return Err(OrlError::config(format!(
                            "expert {} {name} has {} entries, n={}",
                            i + 1,
                            v.len(),
                            self.n
                        )));
                    }
                }
            }
            if !(ex.noise_scale >= 0.0 && ex.noise_scale.is_finite()) {
                return Err(OrlError::config(format!(
                    "expert {} noise scale must be nonnegative",
                    i + 1
                )));
            }
        }
        if self.coefficients.is_none() && !(self.spectral_radius >= 0.0 && self.spectral_radius < 1.0) {
            return Err(OrlError::config(format!(
                "spectral radius must lie in [0, 1) for bounded states, got {}",
                self.spectral_radius
            )));
        }
        Ok(())
    }
}

/// Facts about a generated scenario that the online learner is not told.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Largest realized residual norm over all experts and `t ∈ [0, T]`.
    pub residual_bound: f64,
    /// Coefficients `A` of the linear part (the generating matrix for `static_linear`).
    pub coefficients: DMatrix<f64>,
    pub center: DVector<f64>,
    /// Disturbance-free rollout, aligned with the trajectory's time indices.
    pub nominal: Trajectory,
}

#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub trajectory: Trajectory,
    pub offline: OfflinePredictionSet,
    pub truth: GroundTruth,
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn rotation(n: usize, angle: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(n, n);
    let (s, c) = angle.sin_cos();
    for pair in 0..n / 2 {
        let (i, j) = (2 * pair, 2 * pair + 1);
        r[(i, i)] = c;
        r[(i, j)] = -s;
        r[(j, i)] = s;
        r[(j, j)] = c;
    }
    r
}

/// Spectral radius of the block companion matrix of `x_{t+1} = A·x_{t-p+1:t}`.
pub fn companion_spectral_radius(coefficients: &DMatrix<f64>, n: usize, p: usize) -> f64 {
    let np = n * p;
    let mut comp = DMatrix::zeros(np, np);
    // state ordered oldest block first; shift blocks up, newest row from A
    for b in 0..p - 1 {
        for i in 0..n {
            comp[(b * n + i, (b + 1) * n + i)] = 1.0;
        }
    }
    comp.rows_mut((p - 1) * n, n).copy_from(coefficients);
    comp.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn uniform_ball(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    if radius == 0.0 {
        return DVector::zeros(n);
    }
    loop {
        let dir = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = dir.norm();
        if norm > 0.0 {
            let u: f64 = rng.random();
            return dir * (radius * u.powf(1.0 / n as f64) / norm);
        }
    }
}

struct Law<'a> {
    scenario: &'a SyntheticScenario,
    base: DMatrix<f64>,
    center: DVector<f64>,
}

impl Law<'_> {
    fn coefficients_at(&self, t: i64) -> DMatrix<f64> {
        let s = self.scenario;
        match s.dynamics {
            DynamicsKind::DriftingLinear => {
                let n = s.n;
                let mut a = self.base.clone();
                let newest = a.columns((s.p - 1) * n, n) * rotation(n, s.rotation_rate * t as f64);
                a.columns_mut((s.p - 1) * n, n).copy_from(&newest);
                a
            }
            _ => self.base.clone(),
        }
    }

    // next state from the window r_{t-p+1..t} (oldest first)
    fn next(&self, t: i64, window: &[DVector<f64>]) -> DVector<f64> {
        let s = self.scenario;
        let n = s.n;
        let mut stacked = DVector::zeros(n * s.p);
        for (b, r) in window.iter().enumerate() {
            stacked.rows_mut(b * n, n).copy_from(&(r - &self.center));
        }
        let mut out = &self.center + self.coefficients_at(t) * stacked;
        if s.dynamics == DynamicsKind::NonlinearSine {
            let last = window.last().expect("p ≥ 1") - &self.center;
            out += last.map(|x| s.sine_amplitude * (s.sine_frequency * x).sin());
        }
        out
    }

    fn rollout(&self, history: &[DVector<f64>], disturbances: Option<&[DVector<f64>]>) -> Vec<DVector<f64>> {
        let p = self.scenario.p;
        let mut states: Vec<DVector<f64>> = history.to_vec();
        for t in 0..=self.scenario.horizon {
            let window = &states[states.len() - p..];
            let mut next = self.next(t as i64 - 1, window);
            if let Some(d) = disturbances {
                next += &d[t];
            }
            states.push(next);
        }
        states
    }
}

/// Builds the target trajectory (with `p` steps of history at negative times)
/// and one offline prediction column per expert over `[0, T]`.
pub fn generate(scenario: &SyntheticScenario) -> Result<GeneratedData> {
    scenario.validate()?;
    let (n, p, horizon) = (scenario.n, scenario.p, scenario.horizon);

    let mut structure = ChaCha8Rng::seed_from_u64(scenario.seed);
    structure.set_stream(STREAM_STRUCTURE);

    let base = match &scenario.coefficients {
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n * p) {
                return Err(OrlError::config(format!("coefficients must be {n} rows of {} entries", n * p)));
            }
            DMatrix::from_fn(n, n * p, |i, j| rows[i][j])
        }
        None => {
            let mut a = DMatrix::zeros(n, n * p);
            let q = random_orthogonal(n, &mut structure) * scenario.spectral_radius;
            a.columns_mut((p - 1) * n, n).copy_from(&q);
            a
        }
    };
    if scenario.dynamics != DynamicsKind::NonlinearSine || scenario.coefficients.is_some() {
        let radius = companion_spectral_radius(&base, n, p);
        if radius >= 1.0 {
            return Err(OrlError::config(format!(
                "linear part has spectral radius {radius:.6} ≥ 1; states would be unbounded"
            )));
        }
    }
    let center = scenario
        .center
        .as_ref()
        .map(|c| DVector::from_column_slice(c))
        .unwrap_or_else(|| DVector::from_element(n, default_center_value()));
    let offset = uniform_ball(n, scenario.initial_spread, &mut structure);
    let history: Vec<DVector<f64>> = (0..p).map(|_| &center + &offset).collect();

    let mut dist_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    dist_rng.set_stream(STREAM_DISTURBANCE);
    let disturbances: Vec<DVector<f64>> = (0..=horizon)
        .map(|_| uniform_ball(n, scenario.disturbance, &mut dist_rng))
        .collect();

    let law = Law {
        scenario,
        base: base.clone(),
        center: center.clone(),
    };
    let truth_states = law.rollout(&history, Some(&disturbances));
    let nominal_states = law.rollout(&history, None);
    if truth_states.iter().any(|s| !s.iter().all(|x| x.is_finite())) {
        return Err(OrlError::input("generated trajectory is not finite"));
    }

    let start = -(p as i64);
    let to_traj = |states: &[DVector<f64>]| {
        Trajectory::new(
            start,
            states.iter().cloned().map(TargetState::new).collect(),
        )
    };
    let trajectory = to_traj(&truth_states)?;
    let nominal = to_traj(&nominal_states)?;

    let mut columns = Vec::with_capacity(scenario.experts.len());
    for (i, spec) in scenario.experts.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        rng.set_stream(STREAM_EXPERT_BASE + i as u64);
        let drift_rate = spec
            .drift_rate
            .as_ref()
            .map(|v| DVector::from_column_slice(v))
            .unwrap_or_else(|| DVector::from_element(n, 0.5));
        let bias = spec.bias.as_ref().map(|v| DVector::from_column_slice(v));
        let column = (0..=horizon)
            .map(|t| {
                let base_state = match spec.base {
                    ExpertBase::Truth => trajectory.get(t as i64),
                    ExpertBase::Nominal => nominal.get(t as i64),
                }
                .expect("rollout covers [0, T]");
                let mut x = base_state.as_vector().clone();
                if let Some(b) = &bias {
                    x += b;
                }
                if spec.noise_scale > 0.0 {
                    for v in x.iter_mut() {
                        *v += spec.noise_scale * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                if let Some(onset) = spec.drift_onset {
                    if t >= onset {
                        x += &drift_rate * (t - onset) as f64;
                    }
                }
                TargetState::new(x)
            })
            .collect();
        columns.push(column);
    }
    let offline = OfflinePredictionSet::new(columns)?;

    let mut residual_bound: f64 = 0.0;
    for i in 0..offline.experts() {
        for t in 0..=horizon as i64 {
            let e = trajectory.get(t).expect("covered").as_vector()
                - offline.get(i, t).expect("covered").as_vector();
            residual_bound = residual_bound.max(e.norm());
        }
    }

    Ok(GeneratedData {
        trajectory,
        offline,
        truth: GroundTruth {
            residual_bound,
            coefficients: base,
            center,
            nominal,
        },
    })
}
