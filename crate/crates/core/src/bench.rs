//! Evaluation harness: the four prediction methods, ADE, hindsight comparators
//! and regret, plus CSV emission of the resulting curves.
//!
//! Every method issues its `k`-step-ahead prediction for `t + k` at time
//! `t ∈ [0, T − k]`, so all traces score the same times `t ∈ [k, T]`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleConfig, ExpertEnsemble, StepRecord};
use crate::error::{OrlError, Result};
use crate::io::{fmt_f64, CsvOut};
use crate::residual::{squared_loss, OfflinePredictionSet, RegressorVector, ResidualWindow, TargetState, Trajectory};
use crate::rls::{project_with, spectral_norm, KStepLearnerBank, ProjectionMethod, ProjectionSettings, RlsParams};
use crate::tuning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Residual-corrected experts under exponential weights.
    Orl,
    /// RLS on the raw target states, no offline knowledge.
    Online,
    /// Raw offline predictions under exponential weights.
    OfflineExperts,
    /// The single offline expert with the smallest ADE in hindsight.
    BestOffline,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Orl,
        Method::Online,
        Method::OfflineExperts,
        Method::BestOffline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Orl => "orl",
            Method::Online => "online",
            Method::OfflineExperts => "offline_experts",
            Method::BestOffline => "best_offline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = OrlError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(Method::name).collect();
                OrlError::config(format!("unknown method `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Hyperparameters shared by all methods of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSettings {
    pub p: usize,
    pub k: usize,
    pub lambda: f64,
    /// One forgetting factor per expert; the online method uses the first.
    pub gammas: Vec<f64>,
    pub epsilon: f64,
    /// Spectral-norm bound `D`.
    pub bound: f64,
    pub projection: ProjectionSettings,
    /// Known residual bound `D_r`, if any.
    pub residual_bound: Option<f64>,
}

impl MethodSettings {
    fn rls_params(&self, n: usize, gamma: f64) -> RlsParams {
        RlsParams {
            n,
            p: self.p,
            gamma,
            epsilon: self.epsilon,
            bound: self.bound,
            projection: self.projection,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: i64,
    pub prediction: TargetState,
    pub expert_predictions: Vec<TargetState>,
    pub expert_losses: Vec<f64>,
    pub loss: f64,
    pub cumloss: f64,
    /// Expert weights after the feedback at `t`, for ensemble methods.
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: Method,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    fn from_rows(method: Method, rows: impl IntoIterator<Item = (i64, TargetState, Vec<TargetState>, Vec<f64>, f64, Option<Vec<f64>>)>) -> Self {
        let mut cum = 0.0;
        let rows = rows
            .into_iter()
            .map(|(t, prediction, expert_predictions, expert_losses, loss, weights)| {
                cum += loss;
                TraceRow {
                    t,
                    prediction,
                    expert_predictions,
                    expert_losses,
                    loss,
                    cumloss: cum,
                    weights,
                }
            })
            .collect();
        RunTrace { method, rows }
    }

    fn from_records(method: Method, records: Vec<StepRecord>) -> Self {
        RunTrace::from_rows(
            method,
            records.into_iter().map(|r| {
                (r.t, r.aggregate_prediction, r.expert_predictions, r.expert_losses, r.loss, Some(r.weights))
            }),
        )
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumloss)
    }

    /// Rows with `t ≤ last`.
    pub fn prefix(&self, last: i64) -> RunTrace {
        RunTrace {
            method: self.method,
            rows: self.rows.iter().take_while(|r| r.t <= last).cloned().collect(),
        }
    }

    pub fn times(&self) -> Option<(i64, i64)> {
        Some((self.rows.first()?.t, self.rows.last()?.t))
    }
}

fn check_inputs(trajectory: &Trajectory, offline: &OfflinePredictionSet, settings: &MethodSettings) -> Result<()> {
    OrlError::check_dim("trajectory vs offline", offline.dim(), trajectory.dim())?;
    let horizon = offline.horizon() as i64;
    if trajectory.start_time() > 0 || trajectory.end_time() < horizon {
        return Err(OrlError::input(format!(
            "trajectory covers t∈[{}, {}], offline grid needs [0, {horizon}]",
            trajectory.start_time(),
            trajectory.end_time()
        )));
    }
    if settings.k as i64 > horizon {
        return Err(OrlError::config(format!(
            "delay k={} leaves nothing to score within T={horizon}",
            settings.k
        )));
    }
    if settings.gammas.len() != offline.experts() {
        return Err(OrlError::config(format!(
            "{} forgetting factors for {} experts",
            settings.gammas.len(),
            offline.experts()
        )));
    }
    Ok(())
}

/// Runs one method over the horizon `[0, T]` of `offline`.
pub fn run_method(
    method: Method,
    trajectory: &Trajectory,
    offline: &OfflinePredictionSet,
    settings: &MethodSettings,
) -> Result<RunTrace> {
    check_inputs(trajectory, offline, settings)?;
    let n = offline.dim();
    let trace = match method {
        Method::Orl | Method::OfflineExperts => {
            let learners = (method == Method::Orl).then(|| {
                settings
                    .gammas
                    .iter()
                    .map(|g| settings.rls_params(n, *g))
                    .collect()
            });
            let mut ensemble = ExpertEnsemble::new(
                offline.experts(),
                n,
                EnsembleConfig {
                    lambda: settings.lambda,
                    k: settings.k,
                    p: settings.p,
                    learners,
                    residual_bound: settings.residual_bound,
                },
            )?;
            let records = ensemble.run(trajectory, offline)?;
            let trace = RunTrace::from_records(method, records);
            let check = hedge_bound(&trace, settings.lambda, settings.k)?;
            if check.applicable && check.slack < 0.0 {
                return Err(OrlError::Invariant(format!(
                    "{method}: aggregate loss exceeds best expert by more than ln N/λ (slack {})",
                    check.slack
                )));
            }
            trace
        }
        Method::Online => run_online(trajectory, offline.horizon(), settings)?,
        Method::BestOffline => {
            let best = best_offline_expert(trajectory, offline, settings.k)?;
            let k = settings.k as i64;
            let rows = (k..=offline.horizon() as i64)
                .map(|t| {
                    let pred = offline.get(best, t).expect("grid complete").clone();
                    let loss = squared_loss(trajectory.get(t).expect("checked"), &pred)?;
                    Ok((t, pred.clone(), vec![pred], vec![loss], loss, None))
                })
                .collect::<Result<Vec<_>>>()?;
            RunTrace::from_rows(method, rows)
        }
    };
    Ok(trace)
}

fn run_online(trajectory: &Trajectory, horizon: usize, settings: &MethodSettings) -> Result<RunTrace> {
    let n = trajectory.dim();
    let k = settings.k as i64;
    let mut bank = KStepLearnerBank::new(settings.k, settings.rls_params(n, settings.gammas[0]))?;
    let mut pending: std::collections::VecDeque<(i64, TargetState, RegressorVector)> = Default::default();
    let mut rows = Vec::new();
    for t in 0..=horizon as i64 {
        let truth = trajectory.get(t).expect("checked");
        let x_t = trajectory.window(t, settings.p)?;
        if t >= k {
            let (target, pred, x_old) = pending.pop_front().expect("prediction issued k steps ago");
            debug_assert_eq!(target, t);
            let loss = squared_loss(truth, &pred)?;
            bank.update_at(t, truth.as_vector(), &x_old)?;
            rows.push((t, pred.clone(), vec![pred], vec![loss], loss, None));
        }
        if t + k <= horizon as i64 {
            let pred = TargetState::new(bank.predict_at(t, &x_t)?);
            pending.push_back((t + k, pred, x_t));
        }
    }
    Ok(RunTrace::from_rows(Method::Online, rows))
}

/// Index of the offline expert with the smallest loss over `t ∈ [k, T]`.
pub fn best_offline_expert(trajectory: &Trajectory, offline: &OfflinePredictionSet, k: usize) -> Result<usize> {
    let mut best = (0, f64::INFINITY);
    for i in 0..offline.experts() {
        let mut total = 0.0;
        for t in k as i64..=offline.horizon() as i64 {
            let truth = trajectory
                .get(t)
                .ok_or_else(|| OrlError::input(format!("trajectory has no state at t={t}")))?;
            total += squared_loss(truth, offline.get(i, t).expect("grid complete"))?;
        }
        if total < best.1 {
            best = (i, total);
        }
    }
    Ok(best.0)
}

/// Average displacement error in both conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ade {
    /// Mean squared loss per scored step.
    pub squared: f64,
    /// Mean Euclidean displacement per scored step.
    pub euclidean: f64,
}

pub fn ade(trace: &RunTrace) -> Result<Ade> {
    if trace.rows.is_empty() {
        return Err(OrlError::input(format!("{}: empty trace", trace.method)));
    }
    let len = trace.rows.len() as f64;
    Ok(Ade {
        squared: trace.rows.iter().map(|r| r.loss).sum::<f64>() / len,
        euclidean: trace.rows.iter().map(|r| r.loss.sqrt()).sum::<f64>() / len,
    })
}

/// Outcome of checking the exponential-weights bound on a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeCheck {
    /// `min_i L_i + ln N / λ − L` (nonnegative when the bound holds).
    pub slack: f64,
    /// The guarantee covers this run: one-step feedback and every loss at
    /// most `1/(2λ)`.
    pub applicable: bool,
}

pub fn hedge_bound(trace: &RunTrace, lambda: f64, k: usize) -> Result<HedgeCheck> {
    let experts = trace
        .rows
        .first()
        .map(|r| r.expert_losses.len())
        .ok_or_else(|| OrlError::input("empty trace"))?;
    let mut totals = vec![0.0; experts];
    let mut max_loss: f64 = 0.0;
    for row in &trace.rows {
        for (tot, l) in totals.iter_mut().zip(&row.expert_losses) {
            *tot += l;
            max_loss = max_loss.max(*l);
        }
    }
    let best = totals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(HedgeCheck {
        slack: best + (experts as f64).ln() / lambda - trace.cumulative_loss(),
        applicable: k == 1 && 2.0 * lambda * max_loss <= 1.0,
    })
}

/// One expert's residual targets `e_t` paired with the regressors `z_{t−k}`
/// that scored them, for `t ∈ [k, T]`.
#[derive(Debug, Clone)]
pub struct ResidualStream {
    pub times: Vec<i64>,
    pub targets: Vec<DVector<f64>>,
    pub regressors: Vec<DVector<f64>>,
}

impl ResidualStream {
    /// Entries with `t ≤ last`.
    pub fn prefix(&self, last: i64) -> ResidualStream {
        let len = self.times.iter().take_while(|t| **t <= last).count();
        ResidualStream {
            times: self.times[..len].to_vec(),
            targets: self.targets[..len].to_vec(),
            regressors: self.regressors[..len].to_vec(),
        }
    }
}

/// Largest residual norm `‖r_t − r̂_{t,i}‖` over the offline grid.
pub fn realized_residual_bound(trajectory: &Trajectory, offline: &OfflinePredictionSet) -> Result<f64> {
    OrlError::check_dim("trajectory vs offline", offline.dim(), trajectory.dim())?;
    let mut bound: f64 = 0.0;
    for t in 0..=offline.horizon() as i64 {
        let truth = trajectory
            .get(t)
            .ok_or_else(|| OrlError::input(format!("trajectory has no state at t={t}")))?;
        for pred in offline.at(t)? {
            bound = bound.max((truth.as_vector() - pred.as_vector()).norm());
        }
    }
    Ok(bound)
}

/// Residual streams of every expert, regressors built exactly as the online
/// learners build them.
pub fn residual_streams(
    trajectory: &Trajectory,
    offline: &OfflinePredictionSet,
    p: usize,
    k: usize,
) -> Result<Vec<ResidualStream>> {
    OrlError::check_dim("trajectory vs offline", offline.dim(), trajectory.dim())?;
    let n = offline.dim();
    let horizon = offline.horizon() as i64;
    (0..offline.experts())
        .map(|i| {
            let mut window = ResidualWindow::new(n, p)?;
            let mut regs: Vec<RegressorVector> = Vec::new();
            let mut stream = ResidualStream {
                times: Vec::new(),
                targets: Vec::new(),
                regressors: Vec::new(),
            };
            for t in 0..=horizon {
                let truth = trajectory
                    .get(t)
                    .ok_or_else(|| OrlError::input(format!("trajectory has no state at t={t}")))?;
                let e = truth.as_vector() - offline.get(i, t).expect("grid complete").as_vector();
                if t >= k as i64 {
                    stream.times.push(t);
                    stream.targets.push(e.clone());
                    stream.regressors.push(regs[(t - k as i64) as usize].as_vector().clone());
                }
                window.push(e)?;
                regs.push(window.regressor());
            }
            Ok(stream)
        })
        .collect()
}

/// Best static residual predictor of one expert in hindsight.
#[derive(Debug, Clone)]
pub struct ExpertComparator {
    /// Minimizer over `{‖M‖ ≤ D}`.
    pub matrix: DMatrix<f64>,
    /// Minimizer over all matrices.
    pub unconstrained: DMatrix<f64>,
    /// `Σ ‖e_t − M z_{t−k}‖²` at `matrix`.
    pub loss: f64,
    pub unconstrained_loss: f64,
    pub constrained: bool,
}

#[derive(Debug, Clone)]
pub struct StaticComparator {
    pub experts: Vec<ExpertComparator>,
    pub first_time: i64,
    pub last_time: i64,
}

impl StaticComparator {
    pub fn losses(&self) -> Vec<f64> {
        self.experts.iter().map(|e| e.loss).collect()
    }

    pub fn best_loss(&self) -> f64 {
        self.experts.iter().map(|e| e.loss).fold(f64::INFINITY, f64::min)
    }
}

fn stream_loss(stream: &ResidualStream, m: &DMatrix<f64>) -> f64 {
    stream
        .targets
        .iter()
        .zip(&stream.regressors)
        .map(|(e, z)| (e - m * z).norm_squared())
        .sum()
}

/// Per expert, the minimizer of `Σ ‖e_t − M z_{t−k}‖² + ‖M‖_F²`, constrained to
/// `‖M‖ ≤ D` by a weighted projection when the unconstrained one is infeasible.
pub fn hindsight_static_comparator(streams: &[ResidualStream], bound: f64) -> Result<StaticComparator> {
    let first = streams.first().ok_or_else(|| OrlError::input("no residual streams"))?;
    let (first_time, last_time) = match (first.times.first(), first.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(OrlError::input("empty residual stream")),
    };
    let settings = ProjectionSettings {
        method: ProjectionMethod::Weighted,
        max_iters: 200_000,
        tolerance: 1e-8,
    };
    let experts = streams
        .iter()
        .map(|s| {
            if s.times.first() != Some(&first_time) || s.times.last() != Some(&last_time) {
                return Err(OrlError::input("residual streams cover different times"));
            }
            let n = s.targets[0].len();
            let m = s.regressors[0].len();
            let mut gram = DMatrix::identity(m, m);
            let mut cross = DMatrix::zeros(n, m);
            for (e, z) in s.targets.iter().zip(&s.regressors) {
                gram.ger(1.0, z, z, 1.0);
                cross.ger(1.0, e, z, 1.0);
            }
            let chol = Cholesky::new(gram.clone())
                .ok_or_else(|| OrlError::Invariant("ridge Gram matrix not positive definite".into()))?;
            let unconstrained = chol.solve(&cross.transpose()).transpose();
            let constrained = spectral_norm(&unconstrained) > bound;
            let matrix = if constrained {
                project_with(&unconstrained, &gram, bound, &settings)
            } else {
                unconstrained.clone()
            };
            Ok(ExpertComparator {
                loss: stream_loss(s, &matrix),
                unconstrained_loss: stream_loss(s, &unconstrained),
                matrix,
                unconstrained,
                constrained,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StaticComparator {
        experts,
        first_time,
        last_time,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub comparator: String,
    pub comparator_loss: f64,
    pub regret: f64,
    /// Path length of the comparator sequence (0 for static comparators).
    pub path_length: f64,
}

/// `L_T(method) − min_i L_T(comparator_i)`.
pub fn empirical_regret(trace: &RunTrace, comparator: &StaticComparator) -> Result<RegretReport> {
    match trace.times() {
        Some((a, b)) if a == comparator.first_time && b == comparator.last_time => {}
        other => {
            return Err(OrlError::input(format!(
                "trace covers {:?}, comparator covers ({}, {})",
                other, comparator.first_time, comparator.last_time
            )))
        }
    }
    let (best, comp_loss) = comparator
        .experts
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.loss))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let steps = (comparator.last_time - comparator.first_time + 1) as usize;
    let path_length = tuning::path_length(&vec![comparator.experts[best].matrix.clone(); steps.max(1)])?;
    Ok(RegretReport {
        comparator: format!("static residual predictor of expert {}", best + 1),
        comparator_loss: comp_loss,
        regret: trace.cumulative_loss() - comp_loss,
        path_length,
    })
}

/// Evaluates a user-supplied comparator sequence for one expert: returns its
/// cumulative loss and path length.
pub fn evaluate_comparator_sequence(stream: &ResidualStream, sequence: &[DMatrix<f64>]) -> Result<(f64, f64)> {
    OrlError::check_dim("comparator sequence", stream.times.len(), sequence.len())?;
    let loss = stream
        .targets
        .iter()
        .zip(&stream.regressors)
        .zip(sequence)
        .map(|((e, z), m)| (e - m * z).norm_squared())
        .sum();
    Ok((loss, tuning::path_length(sequence)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub cumloss: f64,
    pub ade_sq: f64,
    pub ade_l2: f64,
    pub regret_static: f64,
}

pub fn summarize(trace: &RunTrace, comparator: &StaticComparator) -> Result<MethodResult> {
    let a = ade(trace)?;
    Ok(MethodResult {
        method: trace.method,
        cumloss: trace.cumulative_loss(),
        ade_sq: a.squared,
        ade_l2: a.euclidean,
        regret_static: empirical_regret(trace, comparator)?.regret,
    })
}

fn ensure_dir(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| OrlError::io(out_dir, e))
}

/// Writes `loss_<method>.csv` for every trace and `weights.csv` from the first
/// ensemble trace (ORL preferred).
pub fn emit_plot_data(traces: &[RunTrace], out_dir: &Path) -> Result<()> {
    if traces.is_empty() {
        return Err(OrlError::input("no traces to emit"));
    }
    ensure_dir(out_dir)?;
    for trace in traces {
        let mut out = CsvOut::create(&out_dir.join(format!("loss_{}.csv", trace.method)))?;
        out.line(&["t".into(), "loss".into(), "cumloss".into()])?;
        for row in &trace.rows {
            out.line(&[row.t.to_string(), fmt_f64(row.loss), fmt_f64(row.cumloss)])?;
        }
        out.finish()?;
    }
    let weighted = traces
        .iter()
        .find(|t| t.method == Method::Orl)
        .or_else(|| traces.iter().find(|t| t.rows.first().is_some_and(|r| r.weights.is_some())));
    if let Some(trace) = weighted {
        let experts = trace.rows.first().and_then(|r| r.weights.as_ref()).map_or(0, Vec::len);
        let mut out = CsvOut::create(&out_dir.join("weights.csv"))?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=experts).map(|i| format!("w_{i}")));
        out.line(&header)?;
        for row in &trace.rows {
            let mut line = vec![row.t.to_string()];
            line.extend(row.weights.iter().flatten().map(|w| fmt_f64(*w)));
            out.line(&line)?;
        }
        out.finish()?;
    }
    Ok(())
}

/// Writes `summary.csv`: `method,cumloss,ade_sq,ade_l2,regret_static`.
pub fn write_summary(results: &[MethodResult], out_dir: &Path) -> Result<()> {
    ensure_dir(out_dir)?;
    let mut out = CsvOut::create(&out_dir.join("summary.csv"))?;
    out.line(&["method", "cumloss", "ade_sq", "ade_l2", "regret_static"].map(String::from))?;
    for r in results {
        out.line(&[
            r.method.name().to_string(),
            fmt_f64(r.cumloss),
            fmt_f64(r.ade_sq),
            fmt_f64(r.ade_l2),
            fmt_f64(r.regret_static),
        ])?;
    }
    out.finish()
}
