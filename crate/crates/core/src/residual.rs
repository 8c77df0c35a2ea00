//! Domain types and the residual algebra shared by every other module.
//!
//! A [`TargetState`] is a point of the target trajectory. Each offline expert
//! supplies one predicted state per time step; the difference between truth and
//! that prediction is the expert's [`ResidualError`]. Residual predictors work on
//! [`RegressorVector`]s, which stack the `p` most recent residuals oldest first.

use std::collections::VecDeque;
use std::ops::Deref;

use nalgebra::DVector;

use crate::error::{OrlError, Result};

/// A point of the target trajectory in `n`-dimensional real space.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState(DVector<f64>);

impl TargetState {
    pub fn new(values: DVector<f64>) -> Self {
        TargetState(values)
    }

    pub fn from_slice(values: &[f64]) -> Self {
        TargetState(DVector::from_column_slice(values))
    }

    pub fn zeros(n: usize) -> Self {
        TargetState(DVector::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for TargetState {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl From<Vec<f64>> for TargetState {
    fn from(values: Vec<f64>) -> Self {
        TargetState(DVector::from_vec(values))
    }
}

/// A contiguous run of target states.
///
/// Time `0` is the first online step; initial conditions live at negative
/// indices, so a trajectory with `p` steps of history starts at `-p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    start_time: i64,
    states: Vec<TargetState>,
}

impl Trajectory {
    pub fn new(start_time: i64, states: Vec<TargetState>) -> Result<Self> {
        if states.is_empty() {
            return Err(OrlError::input("trajectory has no states"));
        }
        let n = states[0].dim();
        if n == 0 {
            return Err(OrlError::input("trajectory states have dimension 0"));
        }
        for (offset, s) in states.iter().enumerate() {
            OrlError::check_dim("trajectory state", n, s.dim())?;
            if !s.is_finite() {
                return Err(OrlError::input(format!(
                    "non-finite trajectory state at t={}",
                    start_time + offset as i64
                )));
            }
        }
        Ok(Trajectory { start_time, states })
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    /// Last time index covered (inclusive).
    pub fn end_time(&self) -> i64 {
        self.start_time + self.states.len() as i64 - 1
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[TargetState] {
        &self.states
    }

    pub fn get(&self, t: i64) -> Option<&TargetState> {
        if t < self.start_time {
            return None;
        }
        self.states.get((t - self.start_time) as usize)
    }

    /// Iterates `(t, state)` pairs in time order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &TargetState)> {
        let start = self.start_time;
        self.states
            .iter()
            .enumerate()
            .map(move |(i, s)| (start + i as i64, s))
    }

    /// Stacks `r_{t-p+1..t}` oldest first, zero-filling times before the
    /// trajectory start.
    pub fn window(&self, t: i64, p: usize) -> Result<RegressorVector> {
        let n = self.dim();
        let mut values = DVector::zeros(n * p);
        for (block, tau) in ((t - p as i64 + 1)..=t).enumerate() {
            if let Some(s) = self.get(tau) {
                values.rows_mut(block * n, n).copy_from(s.as_vector());
            } else if tau > self.end_time() {
                return Err(OrlError::input(format!(
                    "trajectory ends at t={}, window requested up to t={t}",
                    self.end_time()
                )));
            }
        }
        Ok(RegressorVector(values))
    }
}

/// `N` offline trajectory predictions over the grid `t ∈ [0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflinePredictionSet {
    horizon: usize,
    dim: usize,
    // predictions[expert][t]
    predictions: Vec<Vec<TargetState>>,
}

impl OfflinePredictionSet {
    /// `predictions[i][t]` is expert `i`'s prediction of the state at time `t`.
    pub fn new(predictions: Vec<Vec<TargetState>>) -> Result<Self> {
        if predictions.is_empty() {
            return Err(OrlError::input("offline prediction set has no experts"));
        }
        let len = predictions[0].len();
        if len == 0 {
            return Err(OrlError::input("offline prediction set has no time steps"));
        }
        let dim = predictions[0][0].dim();
        for (i, column) in predictions.iter().enumerate() {
            if column.len() != len {
                return Err(OrlError::input(format!(
                    "expert {} covers {} time steps, expert 1 covers {len}",
                    i + 1,
                    column.len()
                )));
            }
            for (t, s) in column.iter().enumerate() {
                OrlError::check_dim("offline prediction", dim, s.dim())?;
                if !s.is_finite() {
                    return Err(OrlError::input(format!(
                        "non-finite offline prediction for expert {} at t={t}",
                        i + 1
                    )));
                }
            }
        }
        Ok(OfflinePredictionSet {
            horizon: len - 1,
            dim,
            predictions,
        })
    }

    /// Final time `T` of the grid.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn experts(&self) -> usize {
        self.predictions.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Prediction of expert `expert` (0-based) for time `t`.
    pub fn get(&self, expert: usize, t: i64) -> Option<&TargetState> {
        if t < 0 {
            return None;
        }
        self.predictions.get(expert)?.get(t as usize)
    }

    pub fn column(&self, expert: usize) -> &[TargetState] {
        &self.predictions[expert]
    }

    /// All experts' predictions for time `t`, in expert order.
    pub fn at(&self, t: i64) -> Result<Vec<&TargetState>> {
        (0..self.experts())
            .map(|i| {
                self.get(i, t).ok_or_else(|| {
                    OrlError::input(format!(
                        "missing offline prediction at (t={t}, expert={})",
                        i + 1
                    ))
                })
            })
            .collect()
    }
}

/// Difference between the true state and an expert's offline prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualError {
    pub time: i64,
    /// 0-based expert index.
    pub expert: usize,
    pub values: DVector<f64>,
}

impl ResidualError {
    pub fn between(
        truth: &TargetState,
        offline: &TargetState,
        time: i64,
        expert: usize,
    ) -> Result<Self> {
        Ok(ResidualError {
            time,
            expert,
            values: residual(truth, offline)?,
        })
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

/// `p` consecutive residuals (or states) stacked oldest first; length `n·p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorVector(DVector<f64>);

impl RegressorVector {
    pub fn new(values: DVector<f64>) -> Self {
        RegressorVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        RegressorVector(DVector::zeros(len))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }
}

impl Deref for RegressorVector {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Elementwise `truth − offline`.
pub fn residual(truth: &TargetState, offline: &TargetState) -> Result<DVector<f64>> {
    OrlError::check_dim("residual", truth.dim(), offline.dim())?;
    Ok(truth.as_vector() - offline.as_vector())
}

/// Stacks the last `p` entries of `history` oldest first.
///
/// `history` is in time order and ends at the current time. Missing entries
/// before the start of the history are zero, so the output always has length
/// `n·p`.
pub fn stack_regressors(history: &[DVector<f64>], n: usize, p: usize) -> Result<RegressorVector> {
    if p < 1 {
        return Err(OrlError::config("regressor memory p must be at least 1"));
    }
    let mut values = DVector::zeros(n * p);
    let take = history.len().min(p);
    let first_block = p - take;
    for (j, e) in history[history.len() - take..].iter().enumerate() {
        OrlError::check_dim("regressor history", n, e.len())?;
        values.rows_mut((first_block + j) * n, n).copy_from(e);
    }
    Ok(RegressorVector(values))
}

/// Offline prediction plus the predicted residual.
pub fn corrected_prediction(residual_hat: &DVector<f64>, offline: &TargetState) -> Result<TargetState> {
    OrlError::check_dim("corrected prediction", offline.dim(), residual_hat.len())?;
    Ok(TargetState(residual_hat + offline.as_vector()))
}

/// `‖truth − prediction‖²`.
pub fn squared_loss(truth: &TargetState, prediction: &TargetState) -> Result<f64> {
    OrlError::check_dim("squared loss", truth.dim(), prediction.dim())?;
    Ok((truth.as_vector() - prediction.as_vector()).norm_squared())
}

/// Rolling window over the `p` most recent residuals of one stream.
///
/// Starts zero-filled, which is how regressors are defined before enough
/// history exists.
#[derive(Debug, Clone)]
pub struct ResidualWindow {
    n: usize,
    p: usize,
    recent: VecDeque<DVector<f64>>,
}

impl ResidualWindow {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p < 1 {
            return Err(OrlError::config("regressor memory p must be at least 1"));
        }
        Ok(ResidualWindow {
            n,
            p,
            recent: VecDeque::with_capacity(p),
        })
    }

    pub fn push(&mut self, e: DVector<f64>) -> Result<()> {
        OrlError::check_dim("residual window", self.n, e.len())?;
        if self.recent.len() == self.p {
            self.recent.pop_front();
        }
        self.recent.push_back(e);
        Ok(())
    }

    pub fn regressor(&self) -> RegressorVector {
        let mut values = DVector::zeros(self.n * self.p);
        let first_block = self.p - self.recent.len();
        for (j, e) in self.recent.iter().enumerate() {
            values.rows_mut((first_block + j) * self.n, self.n).copy_from(e);
        }
        RegressorVector(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn s(x: &[f64]) -> TargetState {
        TargetState::from_slice(x)
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual(&s(&[3.0, 4.0]), &s(&[1.0, 1.0])).unwrap(), v(&[2.0, 3.0]));
        assert_eq!(residual(&s(&[1.5, -2.0]), &s(&[1.5, -2.0])).unwrap(), v(&[0.0, 0.0]));
        assert_eq!(residual(&s(&[0.5]), &s(&[-0.5])).unwrap(), v(&[1.0]));
        assert!(matches!(
            residual(&s(&[1.0]), &s(&[1.0, 2.0])),
            Err(OrlError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stack_oldest_first() {
        let z = stack_regressors(&[v(&[1.0]), v(&[2.0])], 1, 2).unwrap();
        assert_eq!(z.as_vector(), &v(&[1.0, 2.0]));

        let z = stack_regressors(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], 2, 2).unwrap();
        assert_eq!(z.as_vector(), &v(&[1.0, 0.0, 0.0, 1.0]));

        let z = stack_regressors(&[v(&[7.0, 8.0]), v(&[3.0, 4.0])], 2, 1).unwrap();
        assert_eq!(z.as_vector(), &v(&[3.0, 4.0]));
    }

    #[test]
    fn stack_zero_pads_short_history() {
        let z = stack_regressors(&[v(&[5.0])], 1, 3).unwrap();
        assert_eq!(z.as_vector(), &v(&[0.0, 0.0, 5.0]));
        let z = stack_regressors(&[], 2, 2).unwrap();
        assert_eq!(z.len(), 4);
        assert!(z.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn stack_rejects_zero_memory() {
        assert!(matches!(stack_regressors(&[v(&[1.0])], 1, 0), Err(OrlError::Config(_))));
        assert!(ResidualWindow::new(1, 0).is_err());
    }

    #[test]
    fn corrected_prediction_examples() {
        let off = s(&[2.0, -1.0]);
        assert_eq!(corrected_prediction(&v(&[0.0, 0.0]), &off).unwrap(), off);
        assert_eq!(corrected_prediction(&v(&[1.0]), &s(&[2.0])).unwrap(), s(&[3.0]));
        assert_eq!(
            corrected_prediction(&v(&[-2.0, 1.0]), &off).unwrap(),
            TargetState::zeros(2)
        );
        assert!(corrected_prediction(&v(&[1.0]), &off).is_err());
    }

    #[test]
    fn squared_loss_examples() {
        assert_eq!(squared_loss(&s(&[1.0, 2.0]), &s(&[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(squared_loss(&s(&[3.0, 4.0]), &s(&[0.0, 0.0])).unwrap(), 25.0);
        assert_eq!(squared_loss(&s(&[1.0]), &s(&[-1.0])).unwrap(), 4.0);
    }

    #[test]
    fn window_matches_stack() {
        let mut w = ResidualWindow::new(2, 3).unwrap();
        let mut hist = Vec::new();
        for i in 0..5 {
            let e = v(&[i as f64, -(i as f64)]);
            w.push(e.clone()).unwrap();
            hist.push(e);
            assert_eq!(w.regressor(), stack_regressors(&hist, 2, 3).unwrap());
        }
    }

    #[test]
    fn trajectory_window_zero_fills_before_start() {
        let traj = Trajectory::new(-1, vec![s(&[1.0]), s(&[2.0]), s(&[3.0])]).unwrap();
        assert_eq!(traj.end_time(), 1);
        assert_eq!(traj.window(0, 3).unwrap().as_vector(), &v(&[0.0, 1.0, 2.0]));
        assert_eq!(traj.window(1, 2).unwrap().as_vector(), &v(&[2.0, 3.0]));
        assert!(traj.window(2, 1).is_err());
    }

    #[test]
    fn trajectory_rejects_mixed_dimensions() {
        assert!(Trajectory::new(0, vec![s(&[1.0]), s(&[1.0, 2.0])]).is_err());
        assert!(Trajectory::new(0, vec![]).is_err());
    }

    #[test]
    fn offline_set_reports_missing_time() {
        let set = OfflinePredictionSet::new(vec![vec![s(&[0.0]), s(&[1.0])]]).unwrap();
        assert_eq!(set.horizon(), 1);
        let err = set.at(2).unwrap_err().to_string();
        assert!(err.contains("t=2"), "{err}");
        assert!(OfflinePredictionSet::new(vec![vec![s(&[0.0])], vec![]]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec_n(n: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-100.0..100.0f64, n)
        }

        proptest! {
            #[test]
            fn loss_of_corrected_prediction_is_residual_gap(
                (r, off, eh) in (1usize..5).prop_flat_map(|n| (vec_n(n), vec_n(n), vec_n(n)))
            ) {
                let r = TargetState::from(r);
                let off = TargetState::from(off);
                let eh = DVector::from_vec(eh);
                let lhs = squared_loss(&r, &corrected_prediction(&eh, &off).unwrap()).unwrap();
                let rhs = (residual(&r, &off).unwrap() - &eh).norm_squared();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            }

            #[test]
            fn stack_length_is_n_times_p(n in 1usize..4, p in 1usize..5, len in 0usize..8) {
                let hist: Vec<_> = (0..len).map(|i| DVector::from_element(n, i as f64)).collect();
                prop_assert_eq!(stack_regressors(&hist, n, p).unwrap().len(), n * p);
            }

            #[test]
            fn loss_symmetric_nonnegative(
                (a, b) in (1usize..5).prop_flat_map(|n| (vec_n(n), vec_n(n)))
            ) {
                let a = TargetState::from(a);
                let b = TargetState::from(b);
                let ab = squared_loss(&a, &b).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, squared_loss(&b, &a).unwrap());
                prop_assert_eq!(squared_loss(&a, &a).unwrap(), 0.0);
                prop_assert_eq!(ab == 0.0, a == b);
            }
        }
    }
}
