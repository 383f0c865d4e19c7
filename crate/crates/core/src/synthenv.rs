//! Desk-scale reflective-formalization environment with exact verifiers.
//!
//! A task hides a short string over a small alphabet; the question reveals a
//! masked clue. The policy alternates statement attempts (one action per
//! symbol position) with a verdict action that either terminates the episode
//! or continues refinement, exactly the generate-and-critique loop the rest
//! of the crate scores and optimizes.
//!
//! Two difficulty variants: in `Revealing`, each critique exposes which
//! positions matched (confirming symbols and ruling out failures), so
//! history makes later iterations genuinely better; in `Blind`, critiques
//! carry no content and only the clue informs the policy. A policy that
//! declares `Correct` immediately ends episodes fastest but earns no
//! critique reward unless its statement is actually right, which reproduces
//! the degeneration hazard that terminal-only training falls into.

use crate::credit::{bounded_returns, ReturnConfig};
use crate::optimizer::{ActionSet, PolicyModel, PolicyStructure};
use crate::seeds;
use crate::transcript::{Question, Trajectory, Verdict};
use crate::verifiers::{OracleBackend, VerifierSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("enumeration too large: about {leaves} leaves exceeds the guard of {guard}")]
    TooLarge { leaves: u64, guard: u64 },
}

/// Feedback visibility of the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Critiques carry no content; only the clue informs statements.
    Blind,
    /// Critiques reveal per-position match feedback and the verdict slot
    /// observes whether the current statement matches.
    Revealing,
}

/// Environment shape and difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Alphabet size A.
    pub alphabet_size: usize,
    /// Hidden-target length L.
    pub target_len: usize,
    /// Probability that the clue reveals a position.
    pub reveal_prob: f64,
    pub variant: Variant,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { alphabet_size: 4, target_len: 3, reveal_prob: 0.5, variant: Variant::Revealing }
    }
}

impl EnvConfig {
    pub fn alphabet(&self) -> Vec<char> {
        (0..self.alphabet_size).map(symbol_char).collect()
    }
}

fn symbol_char(symbol: usize) -> char {
    (b'a' + symbol as u8) as char
}

/// Episode loop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Iteration cap; the loop stops here even without a Correct verdict.
    pub max_iterations: usize,
    pub temperature: f64,
    pub top_p: f64,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { max_iterations: 5, temperature: 1.0, top_p: 0.95, seed: 0 }
    }
}

/// One task: a hidden target recoverable from the task seed, plus the
/// masked clue rendered into the question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTask {
    pub id: String,
    pub seed: u64,
    pub target: Vec<usize>,
    pub clue: Vec<Option<usize>>,
}

impl SynthTask {
    fn from_seed(env: &EnvConfig, id: String, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target: Vec<usize> =
            (0..env.target_len).map(|_| rng.gen_range(0..env.alphabet_size)).collect();
        let clue = target
            .iter()
            .map(|&s| if rng.gen::<f64>() < env.reveal_prob { Some(s) } else { None })
            .collect();
        Self { id, seed, target, clue }
    }

    /// Target as statement text, e.g. `"b a d"`.
    pub fn target_string(&self) -> String {
        symbols_to_statement(&self.target)
    }

    pub fn question(&self, env: &EnvConfig) -> Question {
        let alphabet: Vec<String> = env.alphabet().iter().map(char::to_string).collect();
        let clue: Vec<String> = self
            .clue
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Some(s) => format!("pos{}={}", i + 1, symbol_char(*s)),
                None => format!("pos{}=?", i + 1),
            })
            .collect();
        Question::new(
            self.id.clone(),
            format!(
                "recover the hidden string of {} symbols over {{{}}}; clue: {}",
                self.target.len(),
                alphabet.join(" "),
                clue.join(" ")
            ),
        )
    }
}

fn symbols_to_statement(symbols: &[usize]) -> String {
    symbols.iter().map(|&s| symbol_char(s).to_string()).collect::<Vec<_>>().join(" ")
}

/// Generates a task pool deterministically from one seed.
pub fn generate_tasks(env: &EnvConfig, seed: u64, count: usize, prefix: &str) -> Vec<SynthTask> {
    (0..count)
        .map(|i| {
            let task_seed = seeds::derive(seed, &[i as u64]);
            SynthTask::from_seed(env, format!("{prefix}{i:04}"), task_seed)
        })
        .collect()
}

/// Exact verifiers for a set of tasks: syntax is alphabet membership,
/// consistency is equality with the hidden target, critique faithfulness is
/// verdict agreement with the ground truth.
pub fn oracle_verifiers(env: &EnvConfig, tasks: &[SynthTask]) -> VerifierSet {
    let mut backend = OracleBackend::new(env.alphabet());
    for task in tasks {
        backend.insert_target(task.id.clone(), task.target_string());
    }
    VerifierSet::new(Arc::new(backend))
}

/// Observation encoder for one (environment, policy structure, cap) choice.
/// Action ids: `0..A` emit symbols, `A` is the Incorrect verdict, `A+1` the
/// Correct verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encoder {
    pub env: EnvConfig,
    pub structure: PolicyStructure,
    /// Largest iteration index the encoding supports.
    pub cap: usize,
}

impl Encoder {
    pub fn new(env: EnvConfig, structure: PolicyStructure, cap: usize) -> Self {
        assert!(cap >= 1, "cap must be at least 1");
        Self { env, structure, cap }
    }

    pub fn n_actions(&self) -> usize {
        self.env.alphabet_size + 2
    }

    pub fn statement_actions(&self) -> ActionSet {
        ActionSet::new(0, self.env.alphabet_size)
    }

    pub fn verdict_actions(&self) -> ActionSet {
        ActionSet::new(self.env.alphabet_size, self.env.alphabet_size + 2)
    }

    pub fn incorrect_action(&self) -> usize {
        self.env.alphabet_size
    }

    pub fn correct_action(&self) -> usize {
        self.env.alphabet_size + 1
    }

    fn tabular_states(&self) -> usize {
        let a1 = self.env.alphabet_size + 1;
        self.cap * self.env.target_len * a1 * a1 + self.cap * 2
    }

    pub fn feature_dim(&self) -> usize {
        match self.structure {
            PolicyStructure::Tabular => self.tabular_states(),
            // bias, verdict flag, iteration fraction, matched flag,
            // position one-hot, known one-hot, last-failed one-hot
            PolicyStructure::LinearSoftmax => {
                4 + self.env.target_len + 2 * (self.env.alphabet_size + 1)
            }
        }
    }

    pub fn new_policy(&self) -> PolicyModel {
        match self.structure {
            PolicyStructure::Tabular => PolicyModel::tabular(self.tabular_states(), self.n_actions()),
            PolicyStructure::LinearSoftmax => {
                PolicyModel::linear(self.feature_dim(), self.n_actions())
            }
        }
    }

    fn one_hot(&self, index: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.feature_dim()];
        v[index] = 1.0;
        v
    }

    fn statement_state_index(
        &self,
        t: usize,
        pos: usize,
        known: Option<usize>,
        last_failed: Option<usize>,
    ) -> usize {
        let a1 = self.env.alphabet_size + 1;
        let known_idx = known.map_or(0, |s| s + 1);
        let failed_idx = last_failed.map_or(0, |s| s + 1);
        (((t - 1) * self.env.target_len + pos) * a1 + known_idx) * a1 + failed_idx
    }

    fn verdict_state_index(&self, t: usize, matched: bool) -> usize {
        let a1 = self.env.alphabet_size + 1;
        self.cap * self.env.target_len * a1 * a1 + (t - 1) * 2 + matched as usize
    }

    /// Features for emitting symbol `pos` of iteration `t` (1-based), given
    /// what is known about the position and the last failed symbol there.
    pub fn statement_features(
        &self,
        t: usize,
        pos: usize,
        known: Option<usize>,
        last_failed: Option<usize>,
    ) -> Vec<f64> {
        debug_assert!(t >= 1 && t <= self.cap && pos < self.env.target_len);
        let a1 = self.env.alphabet_size + 1;
        let known_idx = known.map_or(0, |s| s + 1);
        let failed_idx = last_failed.map_or(0, |s| s + 1);
        match self.structure {
            PolicyStructure::Tabular => {
                self.one_hot(self.statement_state_index(t, pos, known, last_failed))
            }
            PolicyStructure::LinearSoftmax => {
                let mut v = vec![0.0; self.feature_dim()];
                v[0] = 1.0;
                v[2] = (t - 1) as f64 / (self.cap.max(2) - 1) as f64;
                v[4 + pos] = 1.0;
                v[4 + self.env.target_len + known_idx] = 1.0;
                v[4 + self.env.target_len + a1 + failed_idx] = 1.0;
                v
            }
        }
    }

    /// Features for the verdict decision of iteration `t`. `matched` is the
    /// revealing-variant signal that the current statement equals the
    /// target; the blind variant always passes false.
    pub fn verdict_features(&self, t: usize, matched: bool) -> Vec<f64> {
        debug_assert!(t >= 1 && t <= self.cap);
        match self.structure {
            PolicyStructure::Tabular => self.one_hot(self.verdict_state_index(t, matched)),
            PolicyStructure::LinearSoftmax => {
                let mut v = vec![0.0; self.feature_dim()];
                v[0] = 1.0;
                v[1] = 1.0;
                v[2] = (t - 1) as f64 / (self.cap.max(2) - 1) as f64;
                v[3] = matched as u8 as f64;
                v
            }
        }
    }
}

/// One sampled policy decision, kept alongside the trajectory so credited
/// advantages can be attached to exactly the tokens the policy produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStep {
    /// 1-based iteration the decision belongs to.
    pub iteration: usize,
    pub features: Vec<f64>,
    pub legal: ActionSet,
    pub action: usize,
    /// Full-softmax log-probability at sampling time.
    pub log_prob: f64,
}

/// A sampled episode: the rendered trajectory plus its policy decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub trajectory: Trajectory,
    pub steps: Vec<ActionStep>,
}

struct Knowledge {
    known: Vec<Option<usize>>,
    last_failed: Vec<Option<usize>>,
}

impl Knowledge {
    fn new(task: &SynthTask) -> Self {
        Self { known: task.clue.clone(), last_failed: vec![None; task.clue.len()] }
    }

    fn absorb(&mut self, symbols: &[usize], target: &[usize]) {
        for (i, (&s, &t)) in symbols.iter().zip(target).enumerate() {
            if s == t {
                self.known[i] = Some(t);
            } else {
                self.last_failed[i] = Some(s);
            }
        }
    }
}

fn critique_text(env: &EnvConfig, symbols: &[usize], target: &[usize]) -> String {
    match env.variant {
        Variant::Blind => String::new(),
        Variant::Revealing => {
            let marks: Vec<&str> = symbols
                .iter()
                .zip(target)
                .map(|(s, t)| if s == t { "ok" } else { "bad" })
                .collect();
            format!("fb {}", marks.join(" "))
        }
    }
}

/// Samples one episode. The loop runs until the verdict action is Correct
/// or the iteration cap is reached. The final segment re-emits the last
/// statement under teacher forcing: the symbols are fixed to the last
/// attempt, but each one is recorded as a policy decision (with its current
/// log-probability) so the final position's advantage lands on trainable
/// tokens. All randomness comes from the supplied rng.
pub fn sample_trajectory(
    policy: &PolicyModel,
    enc: &Encoder,
    task: &SynthTask,
    cfg: &EpisodeConfig,
    rng: &mut impl Rng,
) -> EpisodeRecord {
    assert!(cfg.max_iterations >= 1 && cfg.max_iterations <= enc.cap);
    let env = &enc.env;
    let mut knowledge = Knowledge::new(task);
    let mut rounds: Vec<(String, String, Verdict)> = Vec::new();
    let mut steps: Vec<ActionStep> = Vec::new();
    let mut last_symbols: Vec<usize> = Vec::new();
    let mut iterations = 0;

    for t in 1..=cfg.max_iterations {
        iterations = t;
        let mut symbols = Vec::with_capacity(env.target_len);
        for pos in 0..env.target_len {
            let (known, failed) = match env.variant {
                Variant::Revealing => (knowledge.known[pos], knowledge.last_failed[pos]),
                Variant::Blind => (task.clue[pos], None),
            };
            let features = enc.statement_features(t, pos, known, failed);
            let legal = enc.statement_actions();
            let (action, log_prob) =
                policy.sample_action(&features, legal, cfg.temperature, cfg.top_p, rng);
            steps.push(ActionStep { iteration: t, features, legal, action, log_prob });
            symbols.push(action);
        }
        let matched = symbols == task.target;

        let verdict_signal = env.variant == Variant::Revealing && matched;
        let features = enc.verdict_features(t, verdict_signal);
        let legal = enc.verdict_actions();
        let (action, log_prob) =
            policy.sample_action(&features, legal, cfg.temperature, cfg.top_p, rng);
        steps.push(ActionStep { iteration: t, features, legal, action, log_prob });
        let verdict =
            if action == enc.correct_action() { Verdict::Correct } else { Verdict::Incorrect };

        rounds.push((
            symbols_to_statement(&symbols),
            critique_text(env, &symbols, &task.target),
            verdict,
        ));
        last_symbols = symbols;

        if env.variant == Variant::Revealing {
            knowledge.absorb(&last_symbols, &task.target);
        }
        if verdict == Verdict::Correct {
            break;
        }
    }

    // Teacher-forced re-emission of the last statement: the context is the
    // refreshed per-position knowledge, so the credited final advantage
    // reinforces or discourages exactly the copy/retry behavior the
    // iteration loop relies on.
    let last_statement = symbols_to_statement(&last_symbols);
    for (pos, &symbol) in last_symbols.iter().enumerate() {
        let (known, failed) = match env.variant {
            Variant::Revealing => (knowledge.known[pos], knowledge.last_failed[pos]),
            Variant::Blind => (task.clue[pos], None),
        };
        let features = enc.statement_features(iterations, pos, known, failed);
        let legal = enc.statement_actions();
        let log_prob = policy.log_prob(&features, legal, symbol);
        steps.push(ActionStep {
            iteration: iterations + 1,
            features,
            legal,
            action: symbol,
            log_prob,
        });
    }

    let trajectory = Trajectory::from_parts(task.id.clone(), &rounds, &last_statement)
        .expect("environment rounds are canonical by construction");
    EpisodeRecord { trajectory, steps }
}

/// Exact expectation of the first-position return and of the task reward
/// over every trajectory the sampling distribution can produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedObjective {
    pub expected_g1: f64,
    pub expected_task_reward: f64,
    pub leaves: u64,
}

/// Monte-Carlo estimate of the same two expectations, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean_g1: f64,
    pub se_g1: f64,
    pub mean_task: f64,
    pub se_task: f64,
    pub samples: usize,
}

const ENUMERATION_GUARD: u64 = 1_000_000;

fn worst_case_leaves(env: &EnvConfig, cap: usize) -> u64 {
    let statements = (env.alphabet_size as u64).saturating_pow(env.target_len as u32);
    let mut leaves: u64 = statements.saturating_mul(2);
    for _ in 1..cap {
        leaves = statements.saturating_mul(leaves.saturating_add(1));
    }
    leaves
}

/// Brute-force oracle: walks the whole episode tree with exact branch
/// probabilities (including temperature and top-p truncation) and
/// accumulates the expectation of `G_1` and of the task reward.
pub fn enumerate_expected_objective(
    policy: &PolicyModel,
    enc: &Encoder,
    task: &SynthTask,
    cfg: &EpisodeConfig,
    rcfg: &ReturnConfig,
) -> Result<ExpectedObjective, EnvError> {
    assert!(cfg.max_iterations >= 1 && cfg.max_iterations <= enc.cap);
    let leaves = worst_case_leaves(&enc.env, cfg.max_iterations);
    if leaves > ENUMERATION_GUARD {
        return Err(EnvError::TooLarge { leaves, guard: ENUMERATION_GUARD });
    }

    struct Walker<'a> {
        policy: &'a PolicyModel,
        enc: &'a Encoder,
        task: &'a SynthTask,
        cfg: &'a EpisodeConfig,
        rcfg: &'a ReturnConfig,
        expected_g1: f64,
        expected_task: f64,
        leaves: u64,
    }

    impl Walker<'_> {
        fn statements(
            &self,
            t: usize,
            knowledge: &Knowledge,
        ) -> Vec<(Vec<usize>, f64)> {
            let env = &self.enc.env;
            let mut branches: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
            for pos in 0..env.target_len {
                let (known, failed) = match env.variant {
                    Variant::Revealing => (knowledge.known[pos], knowledge.last_failed[pos]),
                    Variant::Blind => (self.task.clue[pos], None),
                };
                let features = self.enc.statement_features(t, pos, known, failed);
                let dist = self.policy.sampling_distribution(
                    &features,
                    self.enc.statement_actions(),
                    self.cfg.temperature,
                    self.cfg.top_p,
                );
                let mut next = Vec::with_capacity(branches.len() * dist.len());
                for (prefix, p) in &branches {
                    for &(symbol, q) in &dist {
                        let mut longer = prefix.clone();
                        longer.push(symbol);
                        next.push((longer, p * q));
                    }
                }
                branches = next;
            }
            branches
        }

        fn leaf(&mut self, prob: f64, aux: &[u8], task_reward: u8) {
            let rv = crate::verifiers::RewardVector::new(aux.to_vec(), task_reward);
            let g1 = bounded_returns(&rv, self.rcfg)
                .expect("validated return config")
                .values[0];
            self.expected_g1 += prob * g1;
            self.expected_task += prob * task_reward as f64;
            self.leaves += 1;
        }

        fn walk(&mut self, t: usize, knowledge: &Knowledge, prob: f64, aux: &[u8]) {
            let env = self.enc.env;
            for (symbols, p_stmt) in self.statements(t, knowledge) {
                let matched = symbols == self.task.target;
                let verdict_signal = env.variant == Variant::Revealing && matched;
                let features = self.enc.verdict_features(t, verdict_signal);
                let dist = self.policy.sampling_distribution(
                    &features,
                    self.enc.verdict_actions(),
                    self.cfg.temperature,
                    self.cfg.top_p,
                );
                for &(action, q) in &dist {
                    let branch_prob = prob * p_stmt * q;
                    let says_correct = action == self.enc.correct_action();
                    let faithful = (says_correct == matched) as u8;
                    let mut aux_here = aux.to_vec();
                    aux_here.push(faithful);
                    if says_correct || t == self.cfg.max_iterations {
                        self.leaf(branch_prob, &aux_here, matched as u8);
                    } else {
                        let mut next = Knowledge {
                            known: knowledge.known.clone(),
                            last_failed: knowledge.last_failed.clone(),
                        };
                        if env.variant == Variant::Revealing {
                            next.absorb(&symbols, &self.task.target);
                        }
                        self.walk(t + 1, &next, branch_prob, &aux_here);
                    }
                }
            }
        }
    }

    rcfg.validate().expect("return config");
    let mut walker = Walker {
        policy,
        enc,
        task,
        cfg,
        rcfg,
        expected_g1: 0.0,
        expected_task: 0.0,
        leaves: 0,
    };
    let knowledge = Knowledge::new(task);
    walker.walk(1, &knowledge, 1.0, &[]);
    Ok(ExpectedObjective {
        expected_g1: walker.expected_g1,
        expected_task_reward: walker.expected_task,
        leaves: walker.leaves,
    })
}

/// Monte-Carlo counterpart of [`enumerate_expected_objective`] running the
/// real sampling and scoring pipeline.
pub fn monte_carlo_objective(
    policy: &PolicyModel,
    enc: &Encoder,
    task: &SynthTask,
    cfg: &EpisodeConfig,
    rcfg: &ReturnConfig,
    samples: usize,
    seed: u64,
) -> McEstimate {
    let verifiers = oracle_verifiers(&enc.env, std::slice::from_ref(task));
    let question = task.question(&enc.env);
    let mut sum_g1 = 0.0;
    let mut sum_g1_sq = 0.0;
    let mut sum_task = 0.0;
    let mut sum_task_sq = 0.0;
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, &[i as u64]));
        let episode = sample_trajectory(policy, enc, task, cfg, &mut rng);
        let rv = crate::verifiers::score_trajectory(&question, &episode.trajectory, &verifiers)
            .expect("oracle verifiers are always available");
        let g1 = bounded_returns(&rv, rcfg).expect("validated return config").values[0];
        sum_g1 += g1;
        sum_g1_sq += g1 * g1;
        sum_task += rv.task as f64;
        sum_task_sq += (rv.task as f64) * (rv.task as f64);
    }
    let n = samples as f64;
    let mean_g1 = sum_g1 / n;
    let mean_task = sum_task / n;
    let var_g1 = (sum_g1_sq / n - mean_g1 * mean_g1).max(0.0);
    let var_task = (sum_task_sq / n - mean_task * mean_task).max(0.0);
    McEstimate {
        mean_g1,
        se_g1: (var_g1 / n).sqrt(),
        mean_task,
        se_task: (var_task / n).sqrt(),
        samples,
    }
}

/// Hand-built policy weights that solve the environment: copy confirmed
/// symbols, avoid the last failure, and give a faithful verdict. Only
/// meaningful for the linear-softmax encoding.
pub fn solved_policy(enc: &Encoder) -> PolicyModel {
    assert_eq!(enc.structure, PolicyStructure::LinearSoftmax);
    let mut policy = enc.new_policy();
    let f = enc.feature_dim();
    let a = enc.env.alphabet_size;
    let l = enc.env.target_len;
    const W: f64 = 30.0;
    for s in 0..a {
        // emit symbol s whenever the position is known to be s
        policy.params[s * f + 4 + l + (s + 1)] = W;
        // never repeat the symbol that just failed here
        policy.params[s * f + 4 + l + (a + 1) + (s + 1)] = -W;
    }
    // verdict: Correct beats Incorrect exactly when the match signal is on
    policy.params[enc.correct_action() * f + 3] = 2.0 * W;
    policy.params[enc.incorrect_action() * f] = W;
    policy
}

/// Warm-start weights approximating a supervised-finetuned reflective
/// policy: it copies known symbols fairly reliably and avoids repeating its
/// last failure, but its self-validation is superficial — an eager-approve
/// verdict that ends most episodes after a single round no matter whether
/// the statement is right. Reinforcement learning starts here.
pub fn pretrained_policy(enc: &Encoder) -> PolicyModel {
    let copy_w = 2.5;
    let avoid_w = 2.5;
    let approve_w = 1.2;
    let mut policy = enc.new_policy();
    let f = enc.feature_dim();
    let a = enc.env.alphabet_size;
    let l = enc.env.target_len;
    match enc.structure {
        PolicyStructure::LinearSoftmax => {
            for s in 0..a {
                policy.params[s * f + 4 + l + (s + 1)] = copy_w;
                policy.params[s * f + 4 + l + (a + 1) + (s + 1)] = -avoid_w;
            }
            policy.params[enc.correct_action() * f] = approve_w;
        }
        PolicyStructure::Tabular => {
            for t in 1..=enc.cap {
                for pos in 0..l {
                    for s in 0..a {
                        for failed in std::iter::once(None).chain((0..a).map(Some)) {
                            let state = enc.statement_state_index(t, pos, Some(s), failed);
                            policy.params[s * f + state] += copy_w;
                        }
                        for known in std::iter::once(None).chain((0..a).map(Some)) {
                            let state = enc.statement_state_index(t, pos, known, Some(s));
                            policy.params[s * f + state] -= avoid_w;
                        }
                    }
                }
                for matched in [false, true] {
                    let state = enc.verdict_state_index(t, matched);
                    policy.params[enc.correct_action() * f + state] = approve_w;
                }
            }
        }
    }
    policy
}
