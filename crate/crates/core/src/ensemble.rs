//! Exponential weights over corrected experts.
//!
//! Each expert is an offline prediction column plus a [`KStepLearnerBank`] that
//! predicts its residual. The ensemble scores every expert's pending prediction
//! once the truth arrives, reweights the experts with the softmax of their
//! losses, updates their residual learners, and then issues the next
//! `k`-step-ahead aggregate from the updated weights.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::error::{OrlError, Result};
use crate::residual::{
    corrected_prediction, residual, squared_loss, OfflinePredictionSet, RegressorVector,
    ResidualWindow, TargetState,
};
use crate::rls::{KStepLearnerBank, RlsParams};

/// A point of the probability simplex over experts.
///
/// Weights are carried in the log domain as well, so experts whose weight
/// underflows to zero keep a finite log-weight and renormalization never
/// divides by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    log_weights: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(len: usize) -> Result<Self> {
        if len < 1 {
            return Err(OrlError::config("ensemble needs at least one expert"));
        }
        let w = 1.0 / len as f64;
        Ok(WeightVector {
            log_weights: vec![w.ln(); len],
            weights: vec![w; len],
        })
    }

    /// Validates and wraps explicit weights (nonnegative, summing to one).
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(OrlError::config("ensemble needs at least one expert"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(OrlError::input("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(OrlError::input(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightVector {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn normalized(unnormalized_log: Vec<f64>) -> Result<Self> {
        let top = unnormalized_log
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(OrlError::Invariant(format!(
                "weight update produced log-weight maximum {top}"
            )));
        }
        let shifted: Vec<f64> = unnormalized_log.iter().map(|a| a - top).collect();
        let total: f64 = shifted.iter().map(|a| a.exp()).sum();
        let log_total = total.ln();
        let weights = shifted.iter().map(|a| a.exp() / total).collect();
        Ok(WeightVector {
            log_weights: shifted.iter().map(|a| a - log_total).collect(),
            weights,
        })
    }
}

/// `wᵢ ← wᵢ·exp(−λℓᵢ) / Σⱼ wⱼ·exp(−λℓⱼ)`, evaluated in the log domain with the
/// largest term factored out.
pub fn update_weights(weights: &WeightVector, losses: &[f64], lambda: f64) -> Result<WeightVector> {
    OrlError::check_dim("weight update losses", weights.len(), losses.len())?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(OrlError::config(format!("learning rate must be finite and nonnegative, got {lambda}")));
    }
    if let Some(bad) = losses.iter().find(|l| !l.is_finite()) {
        return Err(OrlError::input(format!("non-finite loss {bad}")));
    }
    let floor = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let scaled = weights
        .log_weights
        .iter()
        .zip(losses)
        .map(|(lw, l)| lw - lambda * (l - floor))
        .collect();
    WeightVector::normalized(scaled)
}

/// `Σᵢ wᵢ r̂ᵢ`, summed in ascending expert order.
pub fn aggregate(weights: &WeightVector, predictions: &[TargetState]) -> Result<TargetState> {
    OrlError::check_dim("aggregate predictions", weights.len(), predictions.len())?;
    let n = predictions[0].dim();
    let mut acc = DVector::zeros(n);
    for (w, pred) in weights.as_slice().iter().zip(predictions) {
        OrlError::check_dim("aggregate prediction", n, pred.dim())?;
        acc.axpy(*w, pred.as_vector(), 1.0);
    }
    Ok(TargetState::new(acc))
}

/// Settings for an [`ExpertEnsemble`].
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub lambda: f64,
    /// Prediction delay.
    pub k: usize,
    /// Regressor memory.
    pub p: usize,
    /// Residual learner per expert; `None` disables correction, so experts
    /// report their raw offline predictions.
    pub learners: Option<Vec<RlsParams>>,
    /// Known residual bound `D_r`; larger residuals are logged, not rejected.
    pub residual_bound: Option<f64>,
}

/// A prediction issued at time `target_time − k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub target_time: i64,
    pub expert_predictions: Vec<TargetState>,
    pub aggregate: TargetState,
}

/// Everything learned when the truth for one scored time arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: i64,
    pub aggregate_prediction: TargetState,
    pub expert_predictions: Vec<TargetState>,
    pub expert_losses: Vec<f64>,
    /// Loss of the aggregate prediction.
    pub loss: f64,
    /// Weights after incorporating this step's losses.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
struct CorrectedExpert {
    bank: Option<KStepLearnerBank>,
    window: ResidualWindow,
    // z_{t-k+1}, …, z_t once warmed up
    regressors: VecDeque<RegressorVector>,
}

/// `N` corrected experts combined by exponential weights.
#[derive(Debug, Clone)]
pub struct ExpertEnsemble {
    lambda: f64,
    k: usize,
    dim: usize,
    weights: WeightVector,
    experts: Vec<CorrectedExpert>,
    pending: VecDeque<Forecast>,
    residual_bound: Option<f64>,
    bound_violations: usize,
    next_time: i64,
    observed_current: bool,
}

impl ExpertEnsemble {
    pub fn new(experts: usize, dim: usize, config: EnsembleConfig) -> Result<Self> {
        if experts < 1 {
            return Err(OrlError::config("ensemble needs at least one expert"));
        }
        if !(config.lambda > 0.0 && config.lambda.is_finite()) {
            return Err(OrlError::config(format!(
                "learning rate must be positive, got {}",
                config.lambda
            )));
        }
        if config.k < 1 {
            return Err(OrlError::config("prediction delay k must be at least 1"));
        }
        if dim < 1 {
            return Err(OrlError::config("state dimension must be positive"));
        }
        let banks: Vec<Option<KStepLearnerBank>> = match &config.learners {
            Some(params) => {
                if params.len() != experts {
                    return Err(OrlError::config(format!(
                        "{} learner configurations for {experts} experts",
                        params.len()
                    )));
                }
                params
                    .iter()
                    .map(|prm| {
                        if prm.n != dim || prm.p != config.p {
                            return Err(OrlError::config(format!(
                                "learner shape (n={}, p={}) does not match ensemble (n={dim}, p={})",
                                prm.n, prm.p, config.p
                            )));
                        }
                        KStepLearnerBank::new(config.k, *prm).map(Some)
                    })
                    .collect::<Result<_>>()?
            }
            None => vec![None; experts],
        };
        let experts = banks
            .into_iter()
            .map(|bank| {
                Ok(CorrectedExpert {
                    bank,
                    window: ResidualWindow::new(dim, config.p)?,
                    regressors: VecDeque::with_capacity(config.k + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpertEnsemble {
            lambda: config.lambda,
            k: config.k,
            dim,
            weights: WeightVector::uniform(experts.len())?,
            experts,
            pending: VecDeque::new(),
            residual_bound: config.residual_bound,
            bound_violations: 0,
            next_time: 0,
            observed_current: false,
        })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of residuals seen so far whose norm exceeded the configured bound.
    pub fn bound_violations(&self) -> usize {
        self.bound_violations
    }

    /// Residual learners of expert `i`, if correction is enabled.
    pub fn bank(&self, expert: usize) -> Option<&KStepLearnerBank> {
        self.experts.get(expert)?.bank.as_ref()
    }

    /// Reveals the truth at time `t`: scores the prediction issued at `t − k`,
    /// reweights the experts and updates the active residual learners.
    ///
    /// Must be called for `t = 0, 1, 2, …` in order.
    pub fn observe(
        &mut self,
        t: i64,
        truth: &TargetState,
        offline: &OfflinePredictionSet,
    ) -> Result<Option<StepRecord>> {
        if t != self.next_time || self.observed_current {
            return Err(OrlError::input(format!(
                "ensemble expected feedback for t={}, got t={t}",
                self.next_time
            )));
        }
        OrlError::check_dim("ensemble truth", self.dim, truth.dim())?;
        OrlError::check_dim("ensemble experts", self.experts.len(), offline.experts())?;
        let offline_now = offline.at(t)?;

        let record = match self.pending.front() {
            Some(f) if f.target_time == t => {
                let forecast = self.pending.pop_front().expect("front exists");
                let expert_losses = forecast
                    .expert_predictions
                    .iter()
                    .map(|pred| squared_loss(truth, pred))
                    .collect::<Result<Vec<_>>>()?;
                let loss = squared_loss(truth, &forecast.aggregate)?;
                self.weights = update_weights(&self.weights, &expert_losses, self.lambda)?;
                Some(StepRecord {
                    t,
                    aggregate_prediction: forecast.aggregate,
                    expert_predictions: forecast.expert_predictions,
                    expert_losses,
                    loss,
                    weights: self.weights.as_slice().to_vec(),
                })
            }
            _ => None,
        };

        let k = self.k as i64;
        for (i, expert) in self.experts.iter_mut().enumerate() {
            let e = residual(truth, offline_now[i])?;
            if let Some(bound) = self.residual_bound {
                let norm = e.norm();
                if norm > bound {
                    if self.bound_violations == 0 {
                        log::warn!(
                            "residual of expert {} at t={t} has norm {norm:.6e} above the bound D_r={bound}",
                            i + 1
                        );
                    }
                    self.bound_violations += 1;
                }
            }
            if let Some(bank) = expert.bank.as_mut() {
                if t >= k {
                    let z_scored = expert
                        .regressors
                        .front()
                        .ok_or_else(|| OrlError::Invariant("missing scored regressor".into()))?;
                    bank.update_at(t, &e, z_scored)?;
                }
            }
            expert.window.push(e)?;
            expert.regressors.push_back(expert.window.regressor());
            if expert.regressors.len() > self.k {
                expert.regressors.pop_front();
            }
        }

        self.observed_current = true;
        Ok(record)
    }

    /// Issues the aggregate prediction for `t + k` from the current weights.
    pub fn forecast(&mut self, t: i64, offline: &OfflinePredictionSet) -> Result<Forecast> {
        if t != self.next_time || !self.observed_current {
            return Err(OrlError::input(format!(
                "forecast at t={t} requires feedback for that time first"
            )));
        }
        let target_time = t + self.k as i64;
        let offline_ahead = offline.at(target_time)?;
        let expert_predictions = self
            .experts
            .iter()
            .zip(offline_ahead)
            .map(|(expert, off)| match &expert.bank {
                Some(bank) => {
                    let z_t = expert
                        .regressors
                        .back()
                        .ok_or_else(|| OrlError::Invariant("missing current regressor".into()))?;
                    let e_hat = bank.predict_at(t, z_t)?;
                    corrected_prediction(&e_hat, off)
                }
                None => Ok(off.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        let forecast = Forecast {
            target_time,
            aggregate: aggregate(&self.weights, &expert_predictions)?,
            expert_predictions,
        };
        self.pending.push_back(forecast.clone());
        Ok(forecast)
    }

    /// Advances the clock past `t` without issuing a prediction (end of horizon).
    pub fn finish_step(&mut self, t: i64) -> Result<()> {
        if t != self.next_time || !self.observed_current {
            return Err(OrlError::input(format!("cannot finish step t={t}")));
        }
        self.next_time += 1;
        self.observed_current = false;
        Ok(())
    }

    /// One full round: feedback for `t`, then the prediction for `t + k`.
    pub fn step(
        &mut self,
        t: i64,
        truth: &TargetState,
        offline: &OfflinePredictionSet,
    ) -> Result<(Forecast, Option<StepRecord>)> {
        if offline.get(0, t + self.k as i64).is_none() {
            return Err(OrlError::input(format!(
                "missing offline prediction at (t={}, expert=1)",
                t + self.k as i64
            )));
        }
        let record = self.observe(t, truth, offline)?;
        let forecast = self.forecast(t, offline)?;
        self.finish_step(t)?;
        Ok((forecast, record))
    }

    /// Processes a whole horizon: every `t` in `[0, T]` is observed and a
    /// prediction is issued while `t + k ≤ T`. Returns the scored records.
    pub fn run(
        &mut self,
        truth: &crate::residual::Trajectory,
        offline: &OfflinePredictionSet,
    ) -> Result<Vec<StepRecord>> {
        let horizon = offline.horizon() as i64;
        let mut records = Vec::new();
        for t in self.next_time..=horizon {
            let r_t = truth
                .get(t)
                .ok_or_else(|| OrlError::input(format!("trajectory has no state at t={t}")))?;
            let record = if t + (self.k as i64) <= horizon {
                self.step(t, r_t, offline)?.1
            } else {
                let rec = self.observe(t, r_t, offline)?;
                self.finish_step(t)?;
                rec
            };
            records.extend(record);
        }
        Ok(records)
    }
}
