//! Multiobjective stochastic linear bandits.
//!
//! Playing action `a ∈ R^d` returns `Θ*a + ξ` with one noisy reward per
//! objective. Each objective keeps its own ridge-regression state
//! ([`LinUcbState`]); [`explore_ucb`] alternates a fixed isotropic
//! exploration action with the candidate action that maximizes the
//! scalarized upper confidence bound.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pareto::ObjectiveSet;
use crate::scalarize::{argmax_scalarized, ScalarizerSpec, WeightSampler};

pub const DEFAULT_NUM_ACTIONS: usize = 1000;
pub const DEFAULT_PERTURB_STD: f64 = 0.01;
pub const DEFAULT_UCB_SCALE: f64 = 1.8;
pub const DEFAULT_REFERENCE: f64 = -2.0;

const NORM_TOL: f64 = 1e-9;

/// Ridge-regression hyperparameters shared by every objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinUcbConfig {
    /// Ridge regularizer.
    pub reg: f64,
    /// Failure probability of the confidence ellipsoid.
    pub delta: f64,
    /// Upper bound on `‖θ*‖`.
    pub param_norm_bound: f64,
    /// Sub-Gaussian variance proxy of the reward noise.
    pub noise_var: f64,
}

impl Default for LinUcbConfig {
    fn default() -> Self {
        Self {
            reg: 1.0,
            delta: 0.1,
            param_norm_bound: 1.0,
            noise_var: 1.0,
        }
    }
}

impl LinUcbConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.reg > 0.0
            && self.delta > 0.0
            && self.delta <= 1.0
            && self.param_norm_bound >= 0.0
            && self.noise_var >= 0.0
            && [self.reg, self.param_norm_bound, self.noise_var]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid LinUCB configuration {self:?}")))
        }
    }
}

/// Radius `β` of the confidence ellipsoid `‖θ − θ̂‖_M ≤ β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceRadius {
    pub beta: f64,
}

/// Least-squares state for one objective.
///
/// Keeps the inverse regularized Gram matrix `M⁻¹ = (reg·I + Σ aaᵀ)⁻¹`
/// updated by Sherman–Morrison, the reward-weighted action sum `Σ r·a`, and
/// `θ̂ = M⁻¹ Σ r·a`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinUcbState {
    cov_inv: DMatrix<f64>,
    xty: DVector<f64>,
    theta_hat: DVector<f64>,
    observations: usize,
    config: LinUcbConfig,
}

/// Plug-in means `θ̂ᵀa` and exploration bonuses per candidate action.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbBounds {
    pub means: Vec<f64>,
    pub bonuses: Vec<f64>,
}

impl UcbBounds {
    pub fn upper(&self) -> impl Iterator<Item = f64> + '_ {
        self.means.iter().zip(&self.bonuses).map(|(m, b)| m + b)
    }
}

impl LinUcbState {
    pub fn new(dim: usize, config: LinUcbConfig) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("action dimension must be >= 1".into()));
        }
        config.validate()?;
        Ok(Self {
            cov_inv: DMatrix::identity(dim, dim) / config.reg,
            xty: DVector::zeros(dim),
            theta_hat: DVector::zeros(dim),
            observations: 0,
            config,
        })
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    pub fn cov_inv(&self) -> &DMatrix<f64> {
        &self.cov_inv
    }

    pub fn theta_hat(&self) -> &DVector<f64> {
        &self.theta_hat
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    pub fn config(&self) -> &LinUcbConfig {
        &self.config
    }

    /// Rank-one update with `(action, reward)`.
    pub fn add_observation(&mut self, action: &[f64], reward: f64) -> Result<()> {
        if action.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: action.len(),
            });
        }
        let a = DVector::from_column_slice(action);
        if a.norm() > 1.0 + NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "action norm {} exceeds 1",
                a.norm()
            )));
        }
        if !reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        let y = &self.cov_inv * &a;
        let denom = 1.0 + a.dot(&y);
        self.cov_inv -= (&y * y.transpose()) / denom;
        self.xty += reward * &a;
        self.theta_hat = &self.cov_inv * &self.xty;
        self.observations += 1;
        Ok(())
    }

    /// `β = √reg·S + √(2σ²(ln(1/δ) − (d/2)·ln(reg) − ½·ln det M⁻¹))`.
    pub fn confidence_radius(&self) -> Result<ConfidenceRadius> {
        let c = &self.config;
        let chol = self
            .cov_inv
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let d = self.dim() as f64;
        let log_term = -c.delta.ln() - d / 2.0 * c.reg.ln() - logdet / 2.0;
        let beta = c.reg.sqrt() * c.param_norm_bound + (2.0 * c.noise_var * log_term.max(0.0)).sqrt();
        Ok(ConfidenceRadius { beta })
    }

    /// Means `θ̂ᵀaⱼ` and bonuses `scale·β·‖aⱼ‖_{M⁻¹}` for each row of
    /// `actions` (`N × d`).
    pub fn ucb_bounds(&self, actions: &DMatrix<f64>, scale: f64) -> Result<UcbBounds> {
        if actions.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: actions.ncols(),
            });
        }
        let beta = self.confidence_radius()?.beta;
        let means = actions * &self.theta_hat;
        let projected = actions * &self.cov_inv;
        let bonuses = projected
            .row_iter()
            .zip(actions.row_iter())
            .map(|(p, a)| scale * beta * p.dot(&a).max(0.0).sqrt())
            .collect();
        Ok(UcbBounds {
            means: means.iter().copied().collect(),
            bonuses,
        })
    }

    /// State with an arbitrary estimate, for exercising the selection step.
    #[cfg(test)]
    pub(crate) fn with_estimate(theta_hat: &[f64], config: LinUcbConfig) -> Self {
        let mut s = Self::new(theta_hat.len(), config).unwrap();
        s.theta_hat = DVector::from_column_slice(theta_hat);
        s
    }
}

/// True parameters, candidate actions and the exploration basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    theta: DMatrix<f64>,
    actions: DMatrix<f64>,
    exploration_basis: DMatrix<f64>,
}

impl BanditInstance {
    /// Checks `‖Θ*ᵢ‖ ≤ 1`, `‖a‖ ≤ 1` for actions and basis vectors, and
    /// `λ_min(Σ eeᵀ) ≥ ½`.
    pub fn new(
        theta: DMatrix<f64>,
        actions: DMatrix<f64>,
        exploration_basis: DMatrix<f64>,
    ) -> Result<Self> {
        let d = theta.ncols();
        if d == 0 || theta.nrows() == 0 || actions.nrows() == 0 || exploration_basis.nrows() == 0 {
            return Err(Error::InvalidParameter("bandit instance has an empty matrix".into()));
        }
        for m in [&actions, &exploration_basis] {
            if m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.ncols(),
                });
            }
        }
        for (what, m) in [("parameter", &theta), ("action", &actions), ("exploration", &exploration_basis)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("bandit instance"));
            }
            if let Some(row) = m.row_iter().position(|r| r.norm() > 1.0 + NORM_TOL) {
                return Err(Error::InvalidParameter(format!("{what} row {row} has norm > 1")));
            }
        }
        let gram = exploration_basis.transpose() * &exploration_basis;
        let min_eig = SymmetricEigen::new(gram).eigenvalues.min();
        if min_eig < 0.5 - NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "exploration basis is not isotropic: smallest eigenvalue {min_eig}"
            )));
        }
        Ok(Self {
            theta,
            actions,
            exploration_basis,
        })
    }

    pub fn num_objectives(&self) -> usize {
        self.theta.nrows()
    }

    pub fn dim(&self) -> usize {
        self.theta.ncols()
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn actions(&self) -> &DMatrix<f64> {
        &self.actions
    }

    pub fn exploration_basis(&self) -> &DMatrix<f64> {
        &self.exploration_basis
    }

    /// Noiseless reward `Θ*a`.
    pub fn expected_reward(&self, action: &[f64]) -> Vec<f64> {
        (&self.theta * DVector::from_column_slice(action))
            .iter()
            .copied()
            .collect()
    }

    /// Expected rewards of every candidate action, one row per action.
    pub fn candidate_rewards(&self) -> ObjectiveSet {
        let rewards = &self.actions * self.theta.transpose();
        ObjectiveSet::from_rows(rewards.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()))
            .expect("instance has at least one action")
    }
}

/// The `2d` vectors `±eⱼ`; their Gram matrix is `2I`.
pub fn signed_basis(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * d, d, |r, c| {
        if r / 2 == c {
            if r % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        }
    })
}

/// `n` independent uniform draws from the unit sphere in `R^d`.
pub fn random_unit_vectors<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut row in m.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    m
}

/// Noise on the anti-correlated partner row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Fixed standard deviation.
    Absolute(f64),
    /// Standard deviation as a fraction of the partner row's norm.
    RelativeToNorm(f64),
}

impl Default for Perturbation {
    fn default() -> Self {
        Self::Absolute(DEFAULT_PERTURB_STD)
    }
}

/// Parameter rows in near-antipodal pairs: `θ₂ᵢ = −θ₂ᵢ₊₁ + η`, then every
/// row is scaled to unit norm. An odd `k` leaves the last row independent.
pub fn make_anticorrelated<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    perturbation: Perturbation,
    num_actions: usize,
    rng: &mut R,
) -> Result<BanditInstance> {
    if k == 0 || d < 2 || num_actions == 0 {
        return Err(Error::InvalidParameter(format!(
            "anti-correlated instance needs k >= 1, d >= 2, N >= 1 (got k={k}, d={d}, N={num_actions})"
        )));
    }
    let mut theta = DMatrix::from_fn(k, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    for pair in 0..k / 2 {
        let partner = theta.row(2 * pair + 1).clone_owned();
        let std = match perturbation {
            Perturbation::Absolute(s) => s,
            Perturbation::RelativeToNorm(f) => f * partner.norm(),
        };
        for c in 0..d {
            let eta: f64 = rng.sample(StandardNormal);
            theta[(2 * pair, c)] = -partner[c] + std * eta;
        }
    }
    for mut row in theta.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    let actions = random_unit_vectors(num_actions, d, rng);
    BanditInstance::new(theta, actions, signed_basis(d))
}

/// `Θ*ᵢ = eᵢ` for the first `k` axes; candidates are `n` random unit
/// vectors followed by `e₁..e_k`. Intended for reference point `0`, where
/// the frontier over the whole sphere is its positive orthant part.
pub fn make_lower_bound_instance<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<BanditInstance> {
    if k == 0 || d < k {
        return Err(Error::InvalidParameter(format!(
            "lower-bound instance needs 1 <= k <= d (got k={k}, d={d})"
        )));
    }
    let theta = DMatrix::from_fn(k, d, |r, c| if r == c { 1.0 } else { 0.0 });
    let random = random_unit_vectors(n, d, rng);
    let actions = DMatrix::from_fn(n + k, d, |r, c| {
        if r < n {
            random[(r, c)]
        } else if r - n == c {
            1.0
        } else {
            0.0
        }
    });
    BanditInstance::new(theta, actions, signed_basis(d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploreUcbConfig {
    /// Total number of actions played; must be even.
    pub horizon: usize,
    pub scalarizer: ScalarizerSpec,
    pub sampler: WeightSampler,
    /// UCB vectors are scalarized after shifting by this point.
    pub reference: Vec<f64>,
    pub noise_std: f64,
    /// Multiplier on the theoretical confidence radius.
    pub ucb_scale: f64,
    pub linucb: LinUcbConfig,
}

impl ExploreUcbConfig {
    pub fn new(horizon: usize, scalarizer: ScalarizerSpec, sampler: WeightSampler, k: usize) -> Self {
        Self {
            horizon,
            scalarizer,
            sampler,
            reference: vec![DEFAULT_REFERENCE; k],
            noise_std: 1.0,
            ucb_scale: DEFAULT_UCB_SCALE,
            linucb: LinUcbConfig::default(),
        }
    }
}

/// Record of one ExploreUCB run, in play order (exploration, exploitation,
/// exploration, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ExploreUcbTrace {
    /// `T × d` actions played.
    pub actions: DMatrix<f64>,
    /// `Θ*a` for every played action.
    pub expected_rewards: ObjectiveSet,
    /// Candidate index chosen at each exploitation step.
    pub exploit_indices: Vec<usize>,
}

/// Runs ExploreUCB for `config.horizon` plays.
///
/// Round `i` plays exploration vector `i mod |E|`, then draws `λ` and plays
/// the candidate maximizing `s(λ, UCB(a) − z)`, with
/// `UCB(a)ᵢ = θ̂ᵢᵀa + scale·β·‖a‖_{M⁻¹}`. Every play updates all `k`
/// per-objective states with its own noisy reward.
pub fn explore_ucb<R: Rng + ?Sized>(
    instance: &BanditInstance,
    config: &ExploreUcbConfig,
    rng: &mut R,
) -> Result<ExploreUcbTrace> {
    let k = instance.num_objectives();
    let d = instance.dim();
    if config.horizon == 0 || !config.horizon.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be a positive even number, got {}",
            config.horizon
        )));
    }
    if config.reference.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: config.reference.len(),
        });
    }
    if !(config.noise_std >= 0.0 && config.ucb_scale >= 0.0) {
        return Err(Error::InvalidParameter("noise_std and ucb_scale must be >= 0".into()));
    }

    let mut states = (0..k)
        .map(|_| LinUcbState::new(d, config.linucb))
        .collect::<Result<Vec<_>>>()?;
    let mut actions = DMatrix::zeros(config.horizon, d);
    let mut rewards = ObjectiveSet::empty(k)?;
    let mut exploit_indices = Vec::with_capacity(config.horizon / 2);

    let basis = instance.exploration_basis();
    for round in 0..config.horizon / 2 {
        let explore: Vec<f64> = basis.row(round % basis.nrows()).iter().copied().collect();
        play(instance, &mut states, &explore, config.noise_std, rng)?;
        actions.set_row(2 * round, &basis.row(round % basis.nrows()));
        rewards.push(&instance.expected_reward(&explore))?;

        let weights = config.sampler.sample(k, rng);
        let ucb = ucb_vectors(&states, instance.actions(), config.ucb_scale)?;
        let index = argmax_scalarized(&ucb, &config.scalarizer, &weights, &config.reference)?;
        let exploit: Vec<f64> = instance.actions().row(index).iter().copied().collect();
        play(instance, &mut states, &exploit, config.noise_std, rng)?;
        actions.set_row(2 * round + 1, &instance.actions().row(index));
        rewards.push(&instance.expected_reward(&exploit))?;
        exploit_indices.push(index);
    }
    Ok(ExploreUcbTrace {
        actions,
        expected_rewards: rewards,
        exploit_indices,
    })
}

fn play<R: Rng + ?Sized>(
    instance: &BanditInstance,
    states: &mut [LinUcbState],
    action: &[f64],
    noise_std: f64,
    rng: &mut R,
) -> Result<()> {
    let expected = instance.expected_reward(action);
    for (state, mean) in states.iter_mut().zip(expected) {
        let noise: f64 = rng.sample(StandardNormal);
        state.add_observation(action, mean + noise_std * noise)?;
    }
    Ok(())
}

/// Upper confidence vectors `(UCB₁(a), …, UCB_k(a))` for every candidate.
pub fn ucb_vectors(states: &[LinUcbState], actions: &DMatrix<f64>, scale: f64) -> Result<ObjectiveSet> {
    let k = states.len();
    let per_objective = states
        .iter()
        .map(|s| s.ucb_bounds(actions, scale).map(|b| b.upper().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let mut set = ObjectiveSet::empty(k)?;
    let mut row = vec![0.0; k];
    for j in 0..actions.nrows() {
        for (i, upper) in per_objective.iter().enumerate() {
            row[i] = upper[j];
        }
        set.push(&row)?;
    }
    Ok(set)
}
