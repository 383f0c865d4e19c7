//! Prospective bounded sequence optimization for reflective
//! generate-and-critique episodes.
//!
//! The pipeline: [`transcript`] parses round-structured reflective episodes
//! into trajectories with token-span bookkeeping; [`verifiers`] scores them
//! with heterogeneous binary rewards (one auxiliary reward per critique plus
//! a task reward for the final statement) behind pluggable backends;
//! [`credit`] turns reward vectors into clipped prospective returns and
//! group-pooled position-specific advantages broadcast onto token spans;
//! [`optimizer`] runs a clipped-surrogate policy-gradient step over those
//! advantages; [`synthenv`] provides a desk-scale reflective environment
//! with exact oracle verifiers and a brute-force expectation oracle; and
//! [`harness`] wires everything into seeded, reproducible experiments with
//! ablation comparisons.

pub mod credit;
pub mod harness;
pub mod optimizer;
pub mod seeds;
pub mod synthenv;
pub mod transcript;
pub mod verifiers;

pub use credit::{
    bounded_returns, broadcast_advantages, pooled_advantages, unbounded_returns,
    AdvantageAssignment, CreditError, PooledAdvantages, ReturnConfig, ReturnSequence,
    TrajectoryGroup,
};
pub use harness::{
    compare_ablations, evaluate_policy, run_training, write_run_outputs, AblationReport,
    EvalStats, HarnessError, MetricsRecord, RunConfig, TrainOutcome,
};
pub use optimizer::{
    gradient_check, sample_check_instance, surrogate_loss, train_step, ActionSet, OptimError,
    OptimStep, PolicyModel, PolicyStructure, StepStats, TokenSample, TrainBatch,
};
pub use synthenv::{
    enumerate_expected_objective, generate_tasks, monte_carlo_objective, oracle_verifiers,
    pretrained_policy, sample_trajectory, solved_policy, Encoder, EnvConfig, EnvError,
    EpisodeConfig, EpisodeRecord, SynthTask, Variant,
};
pub use transcript::{
    parse_transcript, render_transcript, segment_spans, Iteration, Question, Segment, SegmentKind,
    Span, Trajectory, TrajectoryRecord, TranscriptError, Verdict,
};
pub use verifiers::{
    aux_reward, score_trajectory, task_reward, CritiqueView, Judgment, MockBackend,
    OracleBackend, RemoteBackend, RemoteConfig, RewardVector, VerifierBackend, VerifierError,
    VerifierSet,
};
