//! Clipped-surrogate policy gradient over per-token advantages, with a
//! finite-difference gradient verifier.
//!
//! Policies are softmax-linear in observation features; a tabular policy is
//! the same machinery over one-hot state features. Gradients are analytic,
//! and plain gradient descent is the reference optimizer so the
//! finite-difference check stays exact.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("non-finite loss term at token {token_index}: {detail}")]
    NonFiniteLoss { token_index: usize, detail: String },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("token {token_index}: {detail}")]
    BadToken { token_index: usize, detail: String },
}

/// How observations are encoded for the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyStructure {
    /// One-hot features over an enumerated state space.
    Tabular,
    /// Dense feature vectors.
    LinearSoftmax,
}

/// Contiguous legal action ids `[start, end)` for one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet {
    pub start: usize,
    pub end: usize,
}

impl ActionSet {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, action: usize) -> bool {
        (self.start..self.end).contains(&action)
    }
}

/// A stochastic policy: action logits are linear in the observation
/// features, one weight row per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyModel {
    pub structure: PolicyStructure,
    pub n_features: usize,
    pub n_actions: usize,
    /// Row-major `[action][feature]` weights.
    pub params: Vec<f64>,
}

impl PolicyModel {
    pub fn linear(n_features: usize, n_actions: usize) -> Self {
        Self {
            structure: PolicyStructure::LinearSoftmax,
            n_features,
            n_actions,
            params: vec![0.0; n_features * n_actions],
        }
    }

    pub fn tabular(n_states: usize, n_actions: usize) -> Self {
        Self {
            structure: PolicyStructure::Tabular,
            n_features: n_states,
            n_actions,
            params: vec![0.0; n_states * n_actions],
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn logit(&self, features: &[f64], action: usize) -> f64 {
        let row = &self.params[action * self.n_features..(action + 1) * self.n_features];
        row.iter().zip(features).map(|(w, x)| w * x).sum()
    }

    /// Log-probabilities over a legal action set (indexed from
    /// `legal.start`).
    pub fn log_probs(&self, features: &[f64], legal: ActionSet) -> Vec<f64> {
        let logits: Vec<f64> = (legal.start..legal.end).map(|a| self.logit(features, a)).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        logits.into_iter().map(|z| z - lse).collect()
    }

    pub fn log_prob(&self, features: &[f64], legal: ActionSet, action: usize) -> f64 {
        debug_assert!(legal.contains(action));
        self.log_probs(features, legal)[action - legal.start]
    }

    /// Action probabilities per [`log_probs`](Self::log_probs); sums to one
    /// over the legal set.
    pub fn probs(&self, features: &[f64], legal: ActionSet) -> Vec<f64> {
        self.log_probs(features, legal).into_iter().map(f64::exp).collect()
    }

    /// The actual sampling distribution: softmax at `temperature`, truncated
    /// to the smallest prefix of probability mass `>= top_p` (ties broken by
    /// lower action id), renormalized. Exact and deterministic, shared by
    /// the sampler and the exhaustive enumerator.
    pub fn sampling_distribution(
        &self,
        features: &[f64],
        legal: ActionSet,
        temperature: f64,
        top_p: f64,
    ) -> Vec<(usize, f64)> {
        debug_assert!(temperature > 0.0 && top_p > 0.0 && top_p <= 1.0);
        let logits: Vec<f64> =
            (legal.start..legal.end).map(|a| self.logit(features, a) / temperature).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let total: f64 = weights.iter().sum();

        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&i, &j| {
            weights[j].partial_cmp(&weights[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
        });
        let mut kept = Vec::with_capacity(order.len());
        let mut mass = 0.0;
        for idx in order {
            kept.push(idx);
            mass += weights[idx] / total;
            if mass >= top_p {
                break;
            }
        }
        kept.sort_unstable();
        let kept_total: f64 = kept.iter().map(|&i| weights[i]).sum();
        kept.into_iter().map(|i| (legal.start + i, weights[i] / kept_total)).collect()
    }

    pub fn to_json_file(&self, path: &std::path::Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        std::fs::write(path, json)
    }

    pub fn from_json_file(path: &std::path::Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Draws one action. The returned log-probability is the full softmax
    /// `log pi(a|s)` used for training, not the truncated sampling
    /// probability.
    pub fn sample_action(
        &self,
        features: &[f64],
        legal: ActionSet,
        temperature: f64,
        top_p: f64,
        rng: &mut impl Rng,
    ) -> (usize, f64) {
        let dist = self.sampling_distribution(features, legal, temperature, top_p);
        let draw: f64 = rng.gen();
        let mut cumulative = 0.0;
        let mut chosen = dist.last().expect("nonempty action set").0;
        for &(action, p) in &dist {
            cumulative += p;
            if draw < cumulative {
                chosen = action;
                break;
            }
        }
        (chosen, self.log_prob(features, legal, chosen))
    }
}

/// Optimizer hyperparameters, defaults following the usual small-batch
/// group-sampling setup: 16 samples per question, temperature 1.0, top-p
/// 0.95, no KL or entropy regularization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimStep {
    pub clip_eps: f64,
    pub learning_rate: f64,
    pub kl_coefficient: f64,
    pub entropy_coefficient: f64,
    /// Trajectories sampled per question (N).
    pub group_size: usize,
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for OptimStep {
    fn default() -> Self {
        Self {
            clip_eps: 0.2,
            learning_rate: 0.5,
            kl_coefficient: 0.0,
            entropy_coefficient: 0.0,
            group_size: 16,
            temperature: 1.0,
            top_p: 0.95,
        }
    }
}

impl OptimStep {
    pub fn validate(&self) -> Result<(), OptimError> {
        // negated comparisons so NaN fails validation
        if !(self.clip_eps > 0.0) {
            return Err(OptimError::InvalidConfig(format!("clip_eps {} must be > 0", self.clip_eps)));
        }
        if !(self.learning_rate > 0.0) {
            return Err(OptimError::InvalidConfig(format!(
                "learning_rate {} must be > 0",
                self.learning_rate
            )));
        }
        if self.group_size < 2 {
            return Err(OptimError::InvalidConfig(format!(
                "group_size {} must be >= 2",
                self.group_size
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(OptimError::InvalidConfig(format!(
                "temperature {} must be > 0",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(OptimError::InvalidConfig(format!(
                "top_p {} must be in (0, 1]",
                self.top_p
            )));
        }
        Ok(())
    }
}

/// One policy decision with its credited advantage.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSample {
    pub features: Vec<f64>,
    pub legal: ActionSet,
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
}

/// Per-token tuples flattened over one or more trajectory groups, plus the
/// batch's mean reward carried along for step statistics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainBatch {
    pub tokens: Vec<TokenSample>,
    pub mean_reward: f64,
}

impl TrainBatch {
    pub fn new(tokens: Vec<TokenSample>) -> Result<Self, OptimError> {
        for (i, tok) in tokens.iter().enumerate() {
            if !tok.old_log_prob.is_finite() {
                return Err(OptimError::BadToken {
                    token_index: i,
                    detail: format!("old_log_prob {}", tok.old_log_prob),
                });
            }
            if !tok.advantage.is_finite() {
                return Err(OptimError::BadToken {
                    token_index: i,
                    detail: format!("advantage {}", tok.advantage),
                });
            }
            if !tok.legal.contains(tok.action) {
                return Err(OptimError::BadToken {
                    token_index: i,
                    detail: format!("action {} outside legal set", tok.action),
                });
            }
        }
        Ok(Self { tokens, mean_reward: 0.0 })
    }

    pub fn with_mean_reward(mut self, mean_reward: f64) -> Self {
        self.mean_reward = mean_reward;
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Deterministic pairwise tree sum, independent of thread schedule.
fn pairwise_sum(values: &mut Vec<f64>) -> f64 {
    while values.len() > 1 {
        let mut next = Vec::with_capacity(values.len().div_ceil(2));
        for pair in values.chunks(2) {
            next.push(pair.iter().sum());
        }
        *values = next;
    }
    values.first().copied().unwrap_or(0.0)
}

/// Loss value and analytic parameter gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossAndGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Clipped surrogate loss over the batch:
/// `-mean_k min(rho_k * A_k, clip(rho_k, 1-eps, 1+eps) * A_k)` with
/// `rho = exp(log pi(a|s) - old_log_prob)`, plus KL and entropy terms when
/// their coefficients are nonzero. The token mean runs over credited policy
/// tokens only.
pub fn surrogate_loss(
    policy: &PolicyModel,
    batch: &TrainBatch,
    opt: &OptimStep,
) -> Result<LossAndGrad, OptimError> {
    if batch.is_empty() {
        return Err(OptimError::EmptyBatch);
    }
    let m = batch.len() as f64;
    let mut grad = vec![0.0; policy.param_count()];
    let mut terms = Vec::with_capacity(batch.len());

    for (k, tok) in batch.tokens.iter().enumerate() {
        let log_probs = policy.log_probs(&tok.features, tok.legal);
        let local = tok.action - tok.legal.start;
        let log_pi = log_probs[local];
        let ratio = (log_pi - tok.old_log_prob).exp();
        if !ratio.is_finite() {
            return Err(OptimError::NonFiniteLoss {
                token_index: k,
                detail: format!("ratio exp({} - {})", log_pi, tok.old_log_prob),
            });
        }
        let unclipped = ratio * tok.advantage;
        let clipped = ratio.clamp(1.0 - opt.clip_eps, 1.0 + opt.clip_eps) * tok.advantage;
        let mut term = -unclipped.min(clipped);

        // d/dparams of -min(...): the clipped branch is locally constant, so
        // only tokens on the unclipped branch contribute.
        let surrogate_coeff =
            if unclipped <= clipped { -tok.advantage * ratio / m } else { 0.0 };

        let probs: Vec<f64> = log_probs.iter().map(|lp| lp.exp()).collect();

        let mut kl_coeff = 0.0;
        if opt.kl_coefficient != 0.0 {
            // k3 estimator of KL(pi || pi_old) per token.
            let inv_ratio = (tok.old_log_prob - log_pi).exp();
            let kl = inv_ratio - (tok.old_log_prob - log_pi) - 1.0;
            term += opt.kl_coefficient * kl;
            kl_coeff = opt.kl_coefficient * (1.0 - inv_ratio) / m;
        }

        let mut entropy = 0.0;
        if opt.entropy_coefficient != 0.0 {
            entropy = -log_probs.iter().zip(&probs).map(|(lp, p)| p * lp).sum::<f64>();
            term -= opt.entropy_coefficient * entropy;
        }

        if !term.is_finite() {
            return Err(OptimError::NonFiniteLoss { token_index: k, detail: format!("{term}") });
        }
        terms.push(term / m);

        for (b, (&p_b, &lp_b)) in probs.iter().zip(&log_probs).enumerate() {
            let action_b = tok.legal.start + b;
            // d log pi(a) / d logit_b = [b == a] - pi_b
            let dlogpi = (b == local) as u8 as f64 - p_b;
            let mut coeff = (surrogate_coeff + kl_coeff) * dlogpi;
            if opt.entropy_coefficient != 0.0 {
                // dH/dlogit_b = -pi_b (log pi_b + H)
                coeff += opt.entropy_coefficient / m * p_b * (lp_b + entropy);
            }
            if coeff != 0.0 {
                let row = &mut grad[action_b * policy.n_features..(action_b + 1) * policy.n_features];
                for (g, &x) in row.iter_mut().zip(&tok.features) {
                    *g += coeff * x;
                }
            }
        }
    }

    Ok(LossAndGrad { loss: pairwise_sum(&mut terms), grad })
}

/// Statistics of one optimization step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub mean_reward: f64,
    pub loss: f64,
    pub grad_norm: f64,
    pub mean_abs_adv: f64,
}

/// One plain gradient-descent step on the surrogate loss. The batch carries
/// advantages precomputed from pooled returns.
pub fn train_step(
    policy: &mut PolicyModel,
    batch: &TrainBatch,
    opt: &OptimStep,
) -> Result<StepStats, OptimError> {
    opt.validate()?;
    let LossAndGrad { loss, grad } = surrogate_loss(policy, batch, opt)?;
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    for (w, g) in policy.params.iter_mut().zip(&grad) {
        *w -= opt.learning_rate * g;
    }
    let mean_abs_adv =
        batch.tokens.iter().map(|t| t.advantage.abs()).sum::<f64>() / batch.len() as f64;
    Ok(StepStats { mean_reward: batch.mean_reward, loss, grad_norm, mean_abs_adv })
}

/// Randomized (policy, batch) fixture for gradient verification: random
/// weights, random feature vectors (one-hot for tabular policies), random
/// legal action ranges, and old log-probs perturbed off the current policy
/// so importance ratios are exercised away from 1.
pub fn sample_check_instance(
    structure: PolicyStructure,
    n_features: usize,
    n_actions: usize,
    n_tokens: usize,
    seed: u64,
) -> (PolicyModel, TrainBatch) {
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut policy = match structure {
        PolicyStructure::Tabular => PolicyModel::tabular(n_features, n_actions),
        PolicyStructure::LinearSoftmax => PolicyModel::linear(n_features, n_actions),
    };
    for w in &mut policy.params {
        *w = rng.gen_range(-0.5..0.5);
    }
    let tokens = (0..n_tokens)
        .map(|_| {
            let features: Vec<f64> = match structure {
                PolicyStructure::Tabular => {
                    let mut onehot = vec![0.0; n_features];
                    onehot[rng.gen_range(0..n_features)] = 1.0;
                    onehot
                }
                PolicyStructure::LinearSoftmax => {
                    (0..n_features).map(|_| rng.gen_range(-1.0..1.0)).collect()
                }
            };
            let start = rng.gen_range(0..n_actions - 1);
            let legal = ActionSet::new(start, rng.gen_range(start + 2..=n_actions));
            let action = rng.gen_range(legal.start..legal.end);
            let old_log_prob =
                policy.log_prob(&features, legal, action) + rng.gen_range(-0.05..0.05);
            TokenSample {
                features,
                legal,
                action,
                old_log_prob,
                advantage: rng.gen_range(-1.5..1.5),
            }
        })
        .collect();
    let batch = TrainBatch::new(tokens).expect("generated tokens are finite");
    (policy, batch)
}

/// Central finite differences over every parameter against the analytic
/// gradient. The error for parameter i is
/// `|g_a - g_fd| / max(1, |g_a|, |g_fd|)`; returns the maximum over
/// parameters (0 when both gradients vanish).
pub fn gradient_check(
    policy: &PolicyModel,
    batch: &TrainBatch,
    opt: &OptimStep,
) -> Result<f64, OptimError> {
    const H: f64 = 1e-5;
    let analytic = surrogate_loss(policy, batch, opt)?.grad;
    let mut probe = policy.clone();
    let mut max_err = 0.0f64;
    for i in 0..probe.param_count() {
        let original = probe.params[i];
        probe.params[i] = original + H;
        let plus = surrogate_loss(&probe, batch, opt)?.loss;
        probe.params[i] = original - H;
        let minus = surrogate_loss(&probe, batch, opt)?.loss;
        probe.params[i] = original;
        let fd = (plus - minus) / (2.0 * H);
        let denom = 1.0f64.max(analytic[i].abs()).max(fd.abs());
        max_err = max_err.max((analytic[i] - fd).abs() / denom);
    }
    Ok(max_err)
}
