//! Projected recursive least squares with a forgetting factor.
//!
//! One [`RlsLearner`] tracks a linear predictor `M̂ ∈ ℝ^{n×np}` of the next
//! residual from the stacked regressor of the `p` previous residuals. After every
//! ordinary RLS step the predictor is projected back onto the spectral-norm ball
//! `{‖M‖ ≤ D}` in the metric weighted by the current precision matrix.
//!
//! With `k`-step delayed feedback the truth for a prediction arrives `k` steps
//! after it was issued. [`KStepLearnerBank`] keeps `k` independent learners;
//! the learner `t mod k` is the only one touched at time `t`, so each learner
//! sees an ordinary one-step problem on its own residue class.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{OrlError, Result};
use crate::residual::RegressorVector;

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let top = SymmetricEigen::new(gram).eigenvalues.max();
    top.max(0.0).sqrt()
}

/// Frobenius projection onto `{‖M‖ ≤ bound}`: clip every singular value at `bound`.
pub fn clip_singular_values(m: &DMatrix<f64>, bound: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let clipped = svd.singular_values.map(|s| s.min(bound));
    u * DMatrix::from_diagonal(&clipped) * v_t
}

/// `tr((M − M*) P (M − M*)ᵀ)`.
pub fn weighted_distance_sq(m: &DMatrix<f64>, m_star: &DMatrix<f64>, weight: &DMatrix<f64>) -> f64 {
    let diff = m - m_star;
    (&diff * weight).component_mul(&diff).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    /// Minimizes the precision-weighted Frobenius distance: singular-value
    /// clipping when the weight is a multiple of identity, accelerated
    /// projected gradient otherwise.
    #[default]
    Weighted,
    /// Approximate: rescales `M*` by `D/‖M*‖`. Feasible but not the weighted
    /// minimizer.
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionSettings {
    pub method: ProjectionMethod,
    pub max_iters: usize,
    /// Stop once an accepted iteration improves the objective by less than
    /// this fraction of its value.
    pub tolerance: f64,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        ProjectionSettings {
            method: ProjectionMethod::Weighted,
            max_iters: 500,
            tolerance: 1e-10,
        }
    }
}

fn is_scaled_identity(p: &DMatrix<f64>) -> bool {
    let m = p.nrows();
    let c = p.trace() / m as f64;
    let mut dev = 0.0;
    for j in 0..m {
        for i in 0..m {
            let target = if i == j { c } else { 0.0 };
            dev += (p[(i, j)] - target).powi(2);
        }
    }
    dev.sqrt() <= 1e-12 * p.norm()
}

fn scale_into_ball(m_star: &DMatrix<f64>, norm: f64, bound: f64) -> DMatrix<f64> {
    if norm <= bound {
        m_star.clone()
    } else if bound == 0.0 {
        DMatrix::zeros(m_star.nrows(), m_star.ncols())
    } else {
        m_star * (bound / norm)
    }
}

/// `argmin_{‖M‖ ≤ bound} ‖M − M*‖_{F,P}` with the default settings.
pub fn project(m_star: &DMatrix<f64>, weight: &DMatrix<f64>, bound: f64) -> DMatrix<f64> {
    project_with(m_star, weight, bound, &ProjectionSettings::default())
}

/// Weighted projection onto the spectral-norm ball.
///
/// Feasible inputs are returned unchanged. The iterative path starts from the
/// rescaled point and only accepts improving iterates, so its weighted distance
/// never exceeds that of [`ProjectionMethod::Scaling`].
pub fn project_with(
    m_star: &DMatrix<f64>,
    weight: &DMatrix<f64>,
    bound: f64,
    settings: &ProjectionSettings,
) -> DMatrix<f64> {
    let norm = spectral_norm(m_star);
    if norm <= bound {
        return m_star.clone();
    }
    if bound == 0.0 {
        return DMatrix::zeros(m_star.nrows(), m_star.ncols());
    }
    match settings.method {
        ProjectionMethod::Scaling => scale_into_ball(m_star, norm, bound),
        ProjectionMethod::Weighted if is_scaled_identity(weight) => {
            clip_singular_values(m_star, bound)
        }
        ProjectionMethod::Weighted => weighted_pgd(m_star, weight, bound, norm, settings),
    }
}

// Monotone FISTA with restart on ½‖M − M*‖²_{F,P}; gradient (M − M*)P,
// Lipschitz constant λ_max(P).
fn weighted_pgd(
    m_star: &DMatrix<f64>,
    weight: &DMatrix<f64>,
    bound: f64,
    norm: f64,
    settings: &ProjectionSettings,
) -> DMatrix<f64> {
    let lipschitz = SymmetricEigen::new(weight.clone()).eigenvalues.max();
    if lipschitz.is_nan() || lipschitz <= 0.0 {
        return scale_into_ball(m_star, norm, bound);
    }
    let step = 1.0 / lipschitz;
    let objective = |m: &DMatrix<f64>| 0.5 * weighted_distance_sq(m, m_star, weight);

    let mut x = scale_into_ball(m_star, norm, bound);
    let mut fx = objective(&x);
    let mut y = x.clone();
    let mut momentum = 1.0_f64;

    for _ in 0..settings.max_iters {
        let grad = (&y - m_star) * weight;
        let candidate = clip_singular_values(&(&y - grad * step), bound);
        let fc = objective(&candidate);
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        if fc <= fx {
            let improvement = fx - fc;
            let x_prev = std::mem::replace(&mut x, candidate);
            fx = fc;
            if improvement <= settings.tolerance * fx {
                break;
            }
            y = &x + (&x - &x_prev) * ((momentum - 1.0) / next_momentum);
            momentum = next_momentum;
        } else {
            // overshoot: restart momentum from the best point
            if y == x {
                break;
            }
            y = x.clone();
            momentum = 1.0;
        }
    }
    x
}

/// Hyperparameters shared by every learner of one expert.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlsParams {
    pub n: usize,
    pub p: usize,
    /// Forgetting factor in `(0, 1]`.
    pub gamma: f64,
    /// Initial precision `P₀ = εI`.
    pub epsilon: f64,
    /// Spectral-norm bound `D` of the feasible set.
    pub bound: f64,
    pub projection: ProjectionSettings,
}

impl RlsParams {
    pub fn new(n: usize, p: usize, gamma: f64, epsilon: f64, bound: f64) -> Self {
        RlsParams {
            n,
            p,
            gamma,
            epsilon,
            bound,
            projection: ProjectionSettings::default(),
        }
    }

    pub fn regressor_len(&self) -> usize {
        self.n * self.p
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.p < 1 {
            return Err(OrlError::config(format!(
                "state dimension and memory must be positive (n={}, p={})",
                self.n, self.p
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(OrlError::config(format!(
                "forgetting factor must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(OrlError::config(format!(
                "regularization epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.bound >= 0.0 && self.bound.is_finite()) {
            return Err(OrlError::config(format!(
                "norm bound D must be nonnegative, got {}",
                self.bound
            )));
        }
        Ok(())
    }
}

/// Smallest ridge level kept in `P`, relative to its mean eigenvalue.
///
/// Without it `γ^t ε` underflows on long horizons and `P` turns singular
/// along directions the regressors never excite.
pub const MIN_RELATIVE_REGULARIZATION: f64 = 1e-12;

/// One expert's residual predictor.
#[derive(Debug, Clone)]
pub struct RlsLearner {
    params: RlsParams,
    predictor: DMatrix<f64>,
    precision: DMatrix<f64>,
    // ridge part of `precision`: γ^t ε, or the floor once that is smaller
    regularization: f64,
    steps_seen: usize,
}

impl RlsLearner {
    /// `P = εI`; `M̂` is `initial` or zero.
    pub fn new(params: RlsParams, initial: Option<DMatrix<f64>>) -> Result<Self> {
        params.validate()?;
        let (n, np) = (params.n, params.regressor_len());
        let predictor = match initial {
            Some(m) => {
                if m.nrows() != n || m.ncols() != np {
                    return Err(OrlError::config(format!(
                        "initial predictor must be {n}x{np}, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let norm = spectral_norm(&m);
                if norm > params.bound {
                    return Err(OrlError::config(format!(
                        "initial predictor norm {norm} exceeds bound D={}",
                        params.bound
                    )));
                }
                m
            }
            None => DMatrix::zeros(n, np),
        };
        Ok(RlsLearner {
            params,
            predictor,
            precision: DMatrix::identity(np, np) * params.epsilon,
            regularization: params.epsilon,
            steps_seen: 0,
        })
    }

    pub fn params(&self) -> &RlsParams {
        &self.params
    }

    pub fn predictor(&self) -> &DMatrix<f64> {
        &self.predictor
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn steps_seen(&self) -> usize {
        self.steps_seen
    }

    /// `ê = M̂ z`.
    pub fn predict(&self, z: &RegressorVector) -> Result<DVector<f64>> {
        OrlError::check_dim("rls regressor", self.params.regressor_len(), z.len())?;
        Ok(&self.predictor * z.as_vector())
    }

    /// Incorporates the residual `e` observed for the prediction made from `z_used`.
    pub fn update(&mut self, e: &DVector<f64>, z_used: &RegressorVector) -> Result<()> {
        OrlError::check_dim("rls residual", self.params.n, e.len())?;
        OrlError::check_dim("rls regressor", self.params.regressor_len(), z_used.len())?;
        let z = z_used.as_vector();

        self.precision *= self.params.gamma;
        self.precision.ger(1.0, z, z, 1.0);
        self.regularization *= self.params.gamma;
        let m = z.len();
        let floor = MIN_RELATIVE_REGULARIZATION * self.precision.trace() / m as f64;
        if self.regularization < floor {
            for i in 0..m {
                self.precision[(i, i)] += floor - self.regularization;
            }
            self.regularization = floor;
        }
        self.steps_seen += 1;
        if z.iter().all(|x| *x == 0.0) {
            // zero gain: the predictor and its projection are unchanged
            return Ok(());
        }

        let chol = Cholesky::new(self.precision.clone()).ok_or_else(|| {
            OrlError::Invariant("precision matrix lost positive definiteness".into())
        })?;
        let gain = chol.solve(z);
        let innovation = e - &self.predictor * z;
        let mut candidate = self.predictor.clone();
        candidate.ger(1.0, &innovation, &gain, 1.0);

        self.predictor = project_with(
            &candidate,
            &self.precision,
            self.params.bound,
            &self.params.projection,
        );
        Ok(())
    }
}

/// `k` learners on disjoint residue classes of time for `k`-step delayed feedback.
#[derive(Debug, Clone)]
pub struct KStepLearnerBank {
    learners: Vec<RlsLearner>,
    last_update: Option<i64>,
}

impl KStepLearnerBank {
    pub fn new(k: usize, params: RlsParams) -> Result<Self> {
        if k < 1 {
            return Err(OrlError::config("prediction delay k must be at least 1"));
        }
        let learner = RlsLearner::new(params, None)?;
        Ok(KStepLearnerBank {
            learners: vec![learner; k],
            last_update: None,
        })
    }

    pub fn k(&self) -> usize {
        self.learners.len()
    }

    pub fn learners(&self) -> &[RlsLearner] {
        &self.learners
    }

    /// Learner active at time `t`: `t mod k`.
    pub fn learner_index(&self, t: i64) -> usize {
        t.rem_euclid(self.k() as i64) as usize
    }

    /// Feeds back the residual at time `t`, which scores the prediction made at
    /// `t − k` from `z_scored`. Only learner `t mod k` changes.
    pub fn update_at(&mut self, t: i64, e_t: &DVector<f64>, z_scored: &RegressorVector) -> Result<()> {
        let k = self.k() as i64;
        if t < k {
            return Err(OrlError::input(format!(
                "feedback at t={t} cannot score a prediction with delay k={k}"
            )));
        }
        if let Some(last) = self.last_update {
            if t <= last {
                return Err(OrlError::input(format!(
                    "feedback times must increase: got t={t} after t={last}"
                )));
            }
        }
        let j = self.learner_index(t);
        self.learners[j].update(e_t, z_scored)?;
        self.last_update = Some(t);
        Ok(())
    }

    /// Prediction `ê_{t+k}` issued at time `t` by learner `t mod k`.
    pub fn predict_at(&self, t: i64, z_t: &RegressorVector) -> Result<DVector<f64>> {
        self.learners[self.learner_index(t)].predict(z_t)
    }

    /// Update learner `t mod k` with `(e_t, z_{t−k})`, then predict `ê_{t+k}` from `z_t`.
    pub fn step(
        &mut self,
        t: i64,
        e_t: &DVector<f64>,
        z_t_minus_k: &RegressorVector,
        z_t: &RegressorVector,
    ) -> Result<DVector<f64>> {
        self.update_at(t, e_t, z_t_minus_k)?;
        self.predict_at(t, z_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(gamma: f64, epsilon: f64, bound: f64) -> RlsParams {
        RlsParams::new(1, 1, gamma, epsilon, bound)
    }

    fn z1(x: f64) -> RegressorVector {
        RegressorVector::new(DVector::from_element(1, x))
    }

    #[test]
    fn init_sets_scaled_identity_precision() {
        let l = RlsLearner::new(scalar_params(1.0, 1.0, 10.0), None).unwrap();
        assert_eq!(l.precision()[(0, 0)], 1.0);
        assert_eq!(l.predictor()[(0, 0)], 0.0);

        let l = RlsLearner::new(RlsParams::new(2, 3, 0.9, 0.5, 1.0), None).unwrap();
        assert_eq!(l.precision(), &(DMatrix::identity(6, 6) * 0.5));
        assert_eq!(l.predictor().shape(), (2, 6));
    }

    #[test]
    fn init_rejects_bad_hyperparameters() {
        assert!(RlsLearner::new(scalar_params(0.0, 1.0, 1.0), None).is_err());
        assert!(RlsLearner::new(scalar_params(1.1, 1.0, 1.0), None).is_err());
        assert!(RlsLearner::new(scalar_params(0.9, 0.0, 1.0), None).is_err());
        assert!(RlsLearner::new(scalar_params(0.9, 1.0, -1.0), None).is_err());
        let too_big = DMatrix::from_element(1, 1, 2.0);
        assert!(matches!(
            RlsLearner::new(scalar_params(0.9, 1.0, 1.0), Some(too_big)),
            Err(OrlError::Config(_))
        ));
        let ok = DMatrix::from_element(1, 1, 0.5);
        assert!(RlsLearner::new(scalar_params(0.9, 1.0, 1.0), Some(ok)).is_ok());
    }

    #[test]
    fn predict_examples() {
        let l = RlsLearner::new(scalar_params(1.0, 1.0, 10.0), None).unwrap();
        assert_eq!(l.predict(&z1(3.0)).unwrap()[0], 0.0);

        let l = RlsLearner::new(scalar_params(1.0, 1.0, 10.0), Some(DMatrix::from_element(1, 1, 0.5)))
            .unwrap();
        assert_eq!(l.predict(&z1(2.0)).unwrap()[0], 1.0);
        assert!(l.predict(&RegressorVector::zeros(2)).is_err());
    }

    #[test]
    fn constant_residual_selects_newest_block() {
        // oldest-first stacking: z = [e_{t-1}; e_t], so "ê_{t+1} = e_t" is [0 I]
        let mut m = DMatrix::zeros(2, 4);
        m[(0, 2)] = 1.0;
        m[(1, 3)] = 1.0;
        let l = RlsLearner::new(RlsParams::new(2, 2, 1.0, 1.0, 1.0), Some(m)).unwrap();
        let z = RegressorVector::new(DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(l.predict(&z).unwrap(), DVector::from_column_slice(&[3.0, 4.0]));
    }

    #[test]
    fn update_matches_ridge_by_hand() {
        // argmin (1−M)² + M² = 0.5, then argmin 2(1−M)² + M² = 2/3
        let mut l = RlsLearner::new(scalar_params(1.0, 1.0, 10.0), None).unwrap();
        let e = DVector::from_element(1, 1.0);
        l.update(&e, &z1(1.0)).unwrap();
        assert_eq!(l.precision()[(0, 0)], 2.0);
        assert!((l.predictor()[(0, 0)] - 0.5).abs() < 1e-15);
        l.update(&e, &z1(1.0)).unwrap();
        assert_eq!(l.precision()[(0, 0)], 3.0);
        assert!((l.predictor()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(l.steps_seen(), 2);
    }

    #[test]
    fn zero_innovation_keeps_predictor() {
        let m0 = DMatrix::from_element(1, 1, 0.25);
        let mut l = RlsLearner::new(scalar_params(0.9, 1.0, 10.0), Some(m0.clone())).unwrap();
        l.update(&DVector::from_element(1, 0.5), &z1(2.0)).unwrap();
        assert_eq!(l.predictor(), &m0);
        assert!((l.precision()[(0, 0)] - (0.9 + 4.0)).abs() < 1e-15);
    }

    #[test]
    fn survives_long_unexcited_horizons() {
        // all-zero regressors, then excitation along one direction only
        let params = RlsParams::new(2, 2, 0.8, 1.0, 3.0);
        let mut l = RlsLearner::new(params, None).unwrap();
        let zero = RegressorVector::zeros(4);
        for _ in 0..4000 {
            l.update(&DVector::zeros(2), &zero).unwrap();
        }
        for t in 0..4000 {
            let x = t as f64;
            let z = RegressorVector::new(DVector::from_vec(vec![x - 1.0, x - 1.0, x, x]));
            l.update(&DVector::from_vec(vec![x + 1.0, x + 1.0]), &z).unwrap();
        }
        let z = RegressorVector::new(DVector::from_vec(vec![4000.0, 4000.0, 4001.0, 4001.0]));
        let pred = l.predict(&z).unwrap();
        assert!((pred[0] - 4002.0).abs() < 1e-3, "{pred}");
        assert!(spectral_norm(l.predictor()) <= 3.0 + 1e-10);
    }

    #[test]
    fn projection_examples() {
        let p = DMatrix::identity(2, 2);
        let feasible = DMatrix::from_row_slice(1, 2, &[0.3, 0.4]);
        assert_eq!(project(&feasible, &p, 1.0), feasible);

        for w in [0.01, 1.0, 250.0] {
            let out = project(&DMatrix::from_element(1, 1, 2.0), &DMatrix::from_element(1, 1, w), 1.0);
            assert!((out[(0, 0)] - 1.0).abs() < 1e-12, "weight {w}: {out}");
        }

        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let out = project(&m, &p, 1.0);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!((out - expected).norm() < 1e-12);
    }

    #[test]
    fn projection_onto_zero_ball() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, -3.0]);
        let out = project(&m, &DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]), 0.0);
        assert_eq!(out, DMatrix::zeros(1, 2));
    }

    #[test]
    fn scaling_fallback_is_feasible() {
        let settings = ProjectionSettings {
            method: ProjectionMethod::Scaling,
            ..Default::default()
        };
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, -1.0, 2.0]);
        let out = project_with(&m, &DMatrix::identity(2, 2), 1.5, &settings);
        assert!((spectral_norm(&out) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_known_values() {
        assert_eq!(spectral_norm(&DMatrix::zeros(2, 3)), 0.0);
        let m = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        assert!((spectral_norm(&m) - 5.0).abs() < 1e-12);
        let m = DMatrix::from_row_slice(2, 4, &[-1.0, 0.0, 2.0, 0.0, 0.0, -1.0, 0.0, 2.0]);
        assert!((spectral_norm(&m) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bank_rejects_bad_schedule() {
        let params = scalar_params(0.9, 1.0, 10.0);
        assert!(KStepLearnerBank::new(0, params).is_err());
        let mut bank = KStepLearnerBank::new(3, params).unwrap();
        let e = DVector::from_element(1, 1.0);
        assert!(bank.update_at(2, &e, &z1(1.0)).is_err());
        bank.update_at(3, &e, &z1(1.0)).unwrap();
        assert!(bank.update_at(3, &e, &z1(1.0)).is_err());
        assert!(bank.update_at(1, &e, &z1(1.0)).is_err());
    }

    #[test]
    fn bank_routes_by_residue() {
        let params = scalar_params(0.9, 1.0, 10.0);
        let mut bank = KStepLearnerBank::new(3, params).unwrap();
        assert_eq!(bank.learner_index(0), 0);
        assert_eq!(bank.learner_index(4), 1);
        let e = DVector::from_element(1, 1.0);
        bank.step(4, &e, &z1(1.0), &z1(1.0)).unwrap();
        let seen: Vec<_> = bank.learners().iter().map(|l| l.steps_seen()).collect();
        assert_eq!(seen, vec![0, 1, 0]);
        assert_eq!(bank.learners()[0].predictor()[(0, 0)], 0.0);
        assert!(bank.learners()[1].predictor()[(0, 0)] > 0.0);
    }

    #[test]
    fn sixty_step_bank() {
        let bank = KStepLearnerBank::new(60, RlsParams::new(2, 2, 0.8, 1.0, 5.0)).unwrap();
        assert_eq!(bank.k(), 60);
        assert_eq!(bank.learners().len(), 60);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
            prop::collection::vec(-scale..scale, rows * cols)
                .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
        }

        fn spd(m: usize) -> impl Strategy<Value = DMatrix<f64>> {
            (matrix(m, m, 1.0), 0.01..1.0f64).prop_map(move |(a, shift)| {
                &a * a.transpose() + DMatrix::identity(m, m) * shift
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn projection_lands_in_ball(
                (m, w) in (1usize..4, 1usize..7).prop_flat_map(|(r, c)| (matrix(r, c, 5.0), spd(c))),
                bound in 0.0..3.0f64,
            ) {
                let out = project(&m, &w, bound);
                prop_assert!(spectral_norm(&out) <= bound * (1.0 + 1e-12) + 1e-12);
                let scaled = project_with(&m, &w, bound, &ProjectionSettings {
                    method: ProjectionMethod::Scaling, ..Default::default()
                });
                prop_assert!(
                    weighted_distance_sq(&out, &m, &w)
                        <= weighted_distance_sq(&scaled, &m, &w) * (1.0 + 1e-12) + 1e-12
                );
            }

            #[test]
            fn learner_invariants_hold(
                n in 1usize..3, p in 1usize..3,
                gamma in prop::sample::select(vec![0.7, 0.9, 1.0]),
                bound in 0.1..2.0f64,
                seq in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..60),
            ) {
                let params = RlsParams::new(n, p, gamma, 1.0, bound);
                let mut l = RlsLearner::new(params, None).unwrap();
                let mut hist: Vec<DVector<f64>> = Vec::new();
                let mut z = RegressorVector::zeros(n * p);
                for (t, raw) in seq.iter().enumerate() {
                    let e = DVector::from_iterator(n, raw.iter().copied().take(n));
                    let pred = l.predict(&z).unwrap();
                    prop_assert!(pred.norm() <= bound * z.norm() * (1.0 + 1e-9) + 1e-12);
                    l.update(&e, &z).unwrap();
                    prop_assert!(spectral_norm(l.predictor()) <= bound * (1.0 + 1e-10) + 1e-12);
                    let min_eig = SymmetricEigen::new(l.precision().clone()).eigenvalues.min();
                    let floor = gamma.powi(t as i32 + 1);
                    prop_assert!(min_eig >= floor * (1.0 - 1e-10), "{} < {}", min_eig, floor);
                    hist.push(e);
                    z = crate::residual::stack_regressors(&hist, n, p).unwrap();
                }
            }
        }
    }
}
