//! Prospective bounded returns, group-pooled position advantages, and
//! per-token broadcast.
//!
//! For a trajectory with T iterations the heterogeneous rewards occupy
//! positions 1..=T+1 (auxiliary rewards then the task reward). Returns are
//! accumulated backward with a discount and clipped into the reward range at
//! every step, so late task success propagates forward without unbounded
//! growth. Advantages standardize each return against the union of all
//! returns from the N trajectories sampled for the same question, then every
//! token of an iteration inherits its iteration's advantage.

use crate::transcript::{segment_spans, Trajectory};
use crate::verifiers::RewardVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CreditError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Transcript(#[from] crate::transcript::TranscriptError),
}

/// Discount and clip bounds for return accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnConfig {
    /// Discount factor in (0, 1].
    pub gamma: f64,
    /// Lower clip bound (the reward range minimum).
    pub r_min: f64,
    /// Upper clip bound (the reward range maximum).
    pub r_max: f64,
    /// Normalization stabilizer added to the pooled standard deviation.
    pub epsilon: f64,
}

impl Default for ReturnConfig {
    fn default() -> Self {
        // Rewards are binary, so the reward range is [0, 1]. The discount
        // must sit strictly below 1: at gamma = 1 the clip saturates every
        // position of a successful trajectory to r_max, which erases the
        // margin between faithful and unfaithful critiques.
        Self { gamma: 0.7, r_min: 0.0, r_max: 1.0, epsilon: 1e-8 }
    }
}

impl ReturnConfig {
    pub fn validate(&self) -> Result<(), CreditError> {
        // negated comparisons so NaN fails validation
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(CreditError::InvalidConfig(format!(
                "gamma must be in (0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.r_min < self.r_max) {
            return Err(CreditError::InvalidConfig(format!(
                "r_min {} must be below r_max {}",
                self.r_min, self.r_max
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(CreditError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Clipped prospective returns `[G_1, ..., G_{T+1}]` for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSequence {
    pub values: Vec<f64>,
}

impl ReturnSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-position advantages plus their broadcast onto token spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageAssignment {
    pub per_position: Vec<f64>,
    /// One entry per token; zero on uncredited (preamble) tokens.
    pub per_token: Vec<f64>,
}

/// The N trajectories sampled for one question, with their reward vectors.
/// Normalization needs a nondegenerate pool, so N >= 2.
#[derive(Debug, Clone)]
pub struct TrajectoryGroup {
    pub question_id: String,
    pub members: Vec<(Trajectory, RewardVector)>,
}

impl TrajectoryGroup {
    pub fn new(
        question_id: impl Into<String>,
        members: Vec<(Trajectory, RewardVector)>,
    ) -> Result<Self, CreditError> {
        if members.len() < 2 {
            return Err(CreditError::InvalidConfig(format!(
                "trajectory group needs at least 2 members, got {}",
                members.len()
            )));
        }
        for (traj, rv) in &members {
            if rv.aux.len() != traj.iteration_count() {
                return Err(CreditError::LengthMismatch {
                    expected: traj.iteration_count(),
                    got: rv.aux.len(),
                });
            }
        }
        Ok(Self { question_id: question_id.into(), members })
    }
}

fn accumulate_returns(rv: &RewardVector, cfg: &ReturnConfig, clip: bool) -> Vec<f64> {
    let rewards = rv.positions();
    let mut values = vec![0.0; rewards.len()];
    let mut next = 0.0;
    for (i, &r) in rewards.iter().enumerate().rev() {
        let mut g = r + cfg.gamma * next;
        if clip {
            g = g.clamp(cfg.r_min, cfg.r_max);
        }
        values[i] = g;
        next = g;
    }
    values
}

/// Backward-accumulated returns `G_t = clip(r_t + gamma * G_{t+1})` with
/// boundary `G_{T+2} = 0`, clipped into `[r_min, r_max]` at every step.
pub fn bounded_returns(
    rv: &RewardVector,
    cfg: &ReturnConfig,
) -> Result<ReturnSequence, CreditError> {
    cfg.validate()?;
    for &r in rv.aux.iter().chain([&rv.task]) {
        let r = r as f64;
        if r < cfg.r_min || r > cfg.r_max {
            return Err(CreditError::InvalidConfig(format!(
                "reward {r} outside [{}, {}]",
                cfg.r_min, cfg.r_max
            )));
        }
    }
    Ok(ReturnSequence { values: accumulate_returns(rv, cfg, true) })
}

/// Same backward accumulation with the clip replaced by the identity (the
/// no-clipping ablation). Values may leave the reward range.
pub fn unbounded_returns(
    rv: &RewardVector,
    cfg: &ReturnConfig,
) -> Result<ReturnSequence, CreditError> {
    cfg.validate()?;
    Ok(ReturnSequence { values: accumulate_returns(rv, cfg, false) })
}

/// Advantages for every member of one group, plus a degeneracy flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledAdvantages {
    /// Shapes mirror the input return sequences.
    pub per_member: Vec<Vec<f64>>,
    /// Set when the pooled standard deviation is exactly zero; all
    /// advantages are then zero rather than an error.
    pub degenerate: bool,
}

/// Jointly normalizes all returns of one question's trajectory group:
/// `A_t^j = (G_t^j - mean(pool)) / (std(pool) + epsilon)` with the
/// population standard deviation over the union of all positions of all
/// members.
pub fn pooled_advantages(
    group: &[ReturnSequence],
    epsilon: f64,
) -> Result<PooledAdvantages, CreditError> {
    if !(epsilon > 0.0) {
        return Err(CreditError::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let count: usize = group.iter().map(ReturnSequence::len).sum();
    if group.is_empty() || count < 2 {
        return Err(CreditError::InvalidConfig(format!(
            "pool needs at least 2 returns, got {count}"
        )));
    }
    let sum: f64 = group.iter().flat_map(|s| &s.values).sum();
    let mean = sum / count as f64;
    let var: f64 = group
        .iter()
        .flat_map(|s| &s.values)
        .map(|g| (g - mean) * (g - mean))
        .sum::<f64>()
        / count as f64;
    let std = var.sqrt();
    // An all-equal pool has zero spread by definition even when the rounded
    // mean makes the computed variance a few ulps positive.
    let first = group.iter().flat_map(|s| &s.values).next().copied();
    let degenerate =
        std == 0.0 || group.iter().flat_map(|s| &s.values).all(|&g| Some(g) == first);
    let per_member = group
        .iter()
        .map(|s| {
            s.values
                .iter()
                .map(|g| if degenerate { 0.0 } else { (g - mean) / (std + epsilon) })
                .collect()
        })
        .collect();
    Ok(PooledAdvantages { per_member, degenerate })
}

/// Broadcasts per-position advantages onto token spans: every token of
/// iteration t's segment receives `A_t`, final-segment tokens receive
/// `A_{T+1}`, and uncredited preamble tokens receive zero.
pub fn broadcast_advantages(
    traj: &Trajectory,
    per_position: &[f64],
) -> Result<AdvantageAssignment, CreditError> {
    let expected = traj.iteration_count() + 1;
    if per_position.len() != expected {
        return Err(CreditError::LengthMismatch { expected, got: per_position.len() });
    }
    let segments = segment_spans(traj)?;
    let mut per_token = vec![0.0; traj.token_count];
    for (segment, &adv) in segments.iter().zip(per_position) {
        for slot in &mut per_token[segment.span.start..segment.span.end] {
            *slot = adv;
        }
    }
    Ok(AdvantageAssignment { per_position: per_position.to_vec(), per_token })
}
