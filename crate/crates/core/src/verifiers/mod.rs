//! Reward predicates behind a pluggable verifier backend.
//!
//! Three backends ship: an exact oracle for the synthetic environment, a
//! scripted mock for pipeline tests, and an HTTP client for hosted
//! compile/judge services. Remote failures raise [`VerifierError`] — they are
//! never silently mapped to reward 0, which would corrupt the training
//! signal.

mod remote;

pub use remote::{RemoteBackend, RemoteConfig};

use crate::transcript::{Question, Trajectory, Verdict};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifierError {
    /// A backend could not answer after retries. `position` names the
    /// trajectory location being scored when the failure surfaced.
    #[error("verifier backend {backend} unavailable ({cause}){}", position_suffix(.position))]
    Unavailable {
        backend: String,
        cause: String,
        position: Option<String>,
    },
}

fn position_suffix(position: &Option<String>) -> String {
    match position {
        Some(p) => format!(" at {p}"),
        None => String::new(),
    }
}

impl VerifierError {
    pub fn unavailable(backend: impl Into<String>, cause: impl Into<String>) -> Self {
        VerifierError::Unavailable {
            backend: backend.into(),
            cause: cause.into(),
            position: None,
        }
    }

    fn at_position(self, pos: String) -> Self {
        match self {
            VerifierError::Unavailable { backend, cause, .. } => VerifierError::Unavailable {
                backend,
                cause,
                position: Some(pos),
            },
        }
    }
}

/// Outcome of one predicate call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub pass: bool,
    pub detail: String,
}

impl Judgment {
    pub fn pass(detail: impl Into<String>) -> Self {
        Judgment { pass: true, detail: detail.into() }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Judgment { pass: false, detail: detail.into() }
    }
}

/// A critique paired with its verdict, as seen by the faithfulness predicate.
#[derive(Debug, Clone, Copy)]
pub struct CritiqueView<'a> {
    pub text: &'a str,
    pub verdict: Verdict,
}

/// The three predicates every backend must answer. Implementations must be
/// deterministic for fixed inputs so results are cache-safe.
pub trait VerifierBackend: Send + Sync {
    /// Stable identifier used in cache keys and error messages.
    fn id(&self) -> &str;

    /// Syntactic validity of a formal statement.
    fn syntax_check(&self, statement: &str) -> Result<Judgment, VerifierError>;

    /// Semantic consistency between question and statement.
    fn consistency_check(&self, question: &Question, statement: &str)
        -> Result<Judgment, VerifierError>;

    /// Whether the critique accurately diagnoses the statement/question
    /// relationship.
    fn critique_check(
        &self,
        question: &Question,
        statement: &str,
        critique: CritiqueView<'_>,
    ) -> Result<Judgment, VerifierError>;
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Predicate {
    Syntax,
    Consistency,
    Critique,
}

#[derive(PartialEq, Eq, Hash)]
struct CacheKey {
    predicate: Predicate,
    question_id: String,
    // Full content rather than a digest: group sampling re-scores many
    // duplicates and a hash collision would silently corrupt rewards.
    statement: String,
    critique: Option<String>,
}

/// A shareable backend handle with a concurrent result cache. Cloning is
/// cheap; all clones share the cache.
#[derive(Clone)]
pub struct VerifierSet {
    backend: Arc<dyn VerifierBackend>,
    cache: Arc<RwLock<HashMap<CacheKey, Judgment>>>,
}

impl VerifierSet {
    pub fn new(backend: Arc<dyn VerifierBackend>) -> Self {
        Self { backend, cache: Arc::new(RwLock::new(HashMap::new())) }
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    fn cached<F>(&self, key: CacheKey, compute: F) -> Result<Judgment, VerifierError>
    where
        F: FnOnce() -> Result<Judgment, VerifierError>,
    {
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let value = compute()?;
        self.cache
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| value.clone());
        Ok(value)
    }

    pub fn syntax_check(&self, statement: &str) -> Result<Judgment, VerifierError> {
        let key = CacheKey {
            predicate: Predicate::Syntax,
            question_id: String::new(),
            statement: statement.to_string(),
            critique: None,
        };
        self.cached(key, || self.backend.syntax_check(statement))
    }

    pub fn consistency_check(
        &self,
        question: &Question,
        statement: &str,
    ) -> Result<Judgment, VerifierError> {
        let key = CacheKey {
            predicate: Predicate::Consistency,
            question_id: question.id.clone(),
            statement: statement.to_string(),
            critique: None,
        };
        self.cached(key, || self.backend.consistency_check(question, statement))
    }

    pub fn critique_check(
        &self,
        question: &Question,
        statement: &str,
        critique: CritiqueView<'_>,
    ) -> Result<Judgment, VerifierError> {
        let key = CacheKey {
            predicate: Predicate::Critique,
            question_id: question.id.clone(),
            statement: statement.to_string(),
            critique: Some(format!("{}\n{}", critique.verdict.keyword(), critique.text)),
        };
        self.cached(key, || self.backend.critique_check(question, statement, critique))
    }
}

/// Heterogeneous reward positions of one trajectory: one auxiliary reward
/// per iteration followed by the task reward, all binary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardVector {
    pub aux: Vec<u8>,
    pub task: u8,
}

impl RewardVector {
    pub fn new(aux: Vec<u8>, task: u8) -> Self {
        debug_assert!(aux.iter().all(|&r| r <= 1) && task <= 1);
        Self { aux, task }
    }

    /// Positions 1..=T+1 as floats: aux rewards then the task reward.
    pub fn positions(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.aux.iter().map(|&r| r as f64).collect();
        out.push(self.task as f64);
        out
    }

    /// Copy with every auxiliary entry zeroed (the terminal-only ablation).
    pub fn terminal_only(&self) -> Self {
        Self { aux: vec![0; self.aux.len()], task: self.task }
    }
}

/// Binary task reward: 1 iff the statement passes the syntax check and the
/// consistency check. Consistency is short-circuited when syntax fails.
pub fn task_reward(
    question: &Question,
    answer: &str,
    v: &VerifierSet,
) -> Result<u8, VerifierError> {
    if !v.syntax_check(answer)?.pass {
        return Ok(0);
    }
    Ok(v.consistency_check(question, answer)?.pass as u8)
}

/// Binary auxiliary reward: 1 iff the critique faithfully diagnoses the
/// statement. False positives, false negatives, and premature termination
/// all score 0 under the exact oracle.
pub fn aux_reward(
    question: &Question,
    statement: &str,
    critique: CritiqueView<'_>,
    v: &VerifierSet,
) -> Result<u8, VerifierError> {
    Ok(v.critique_check(question, statement, critique)?.pass as u8)
}

/// Scores a whole trajectory: one auxiliary reward per iteration, then the
/// task reward on the final statement. Errors carry the failing position.
pub fn score_trajectory(
    question: &Question,
    traj: &Trajectory,
    v: &VerifierSet,
) -> Result<RewardVector, VerifierError> {
    let mut aux = Vec::with_capacity(traj.iterations.len());
    for it in &traj.iterations {
        let critique = CritiqueView { text: &it.critique, verdict: it.verdict };
        let r = aux_reward(question, &it.statement, critique, v)
            .map_err(|e| e.at_position(format!("iteration {}", it.index)))?;
        aux.push(r);
    }
    let task = task_reward(question, &traj.final_statement, v)
        .map_err(|e| e.at_position("final statement".to_string()))?;
    Ok(RewardVector::new(aux, task))
}

/// Exact oracle backend over hidden targets: syntax is alphabet membership,
/// consistency is equality with the question's hidden target, and critique
/// faithfulness is agreement between the verdict and the ground truth.
pub struct OracleBackend {
    alphabet: Vec<char>,
    targets: HashMap<String, String>,
}

impl OracleBackend {
    pub fn new(alphabet: Vec<char>) -> Self {
        Self { alphabet, targets: HashMap::new() }
    }

    pub fn with_target(mut self, question_id: impl Into<String>, target: impl Into<String>) -> Self {
        self.targets.insert(question_id.into(), target.into());
        self
    }

    pub fn insert_target(&mut self, question_id: impl Into<String>, target: impl Into<String>) {
        self.targets.insert(question_id.into(), target.into());
    }

    fn target_for(&self, question: &Question) -> Result<&str, VerifierError> {
        self.targets.get(&question.id).map(String::as_str).ok_or_else(|| {
            VerifierError::unavailable("oracle", format!("no target for question {}", question.id))
        })
    }

    fn is_consistent(&self, question: &Question, statement: &str) -> Result<bool, VerifierError> {
        Ok(statement == self.target_for(question)?)
    }
}

impl VerifierBackend for OracleBackend {
    fn id(&self) -> &str {
        "oracle"
    }

    fn syntax_check(&self, statement: &str) -> Result<Judgment, VerifierError> {
        if statement.trim().is_empty() {
            return Ok(Judgment::fail("empty statement"));
        }
        for c in statement.chars() {
            if !c.is_whitespace() && !self.alphabet.contains(&c) {
                return Ok(Judgment::fail(format!("symbol {c:?} outside alphabet")));
            }
        }
        Ok(Judgment::pass("all symbols in alphabet"))
    }

    fn consistency_check(
        &self,
        question: &Question,
        statement: &str,
    ) -> Result<Judgment, VerifierError> {
        if self.is_consistent(question, statement)? {
            Ok(Judgment::pass("statement equals hidden target"))
        } else {
            Ok(Judgment::fail("statement differs from hidden target"))
        }
    }

    fn critique_check(
        &self,
        question: &Question,
        statement: &str,
        critique: CritiqueView<'_>,
    ) -> Result<Judgment, VerifierError> {
        let truly_consistent = self.is_consistent(question, statement)?;
        let claimed_consistent = critique.verdict == Verdict::Correct;
        if claimed_consistent == truly_consistent {
            Ok(Judgment::pass("verdict agrees with ground truth"))
        } else if claimed_consistent {
            Ok(Judgment::fail("premature termination: verdict Correct on inconsistent statement"))
        } else {
            Ok(Judgment::fail("false alarm: verdict Incorrect on consistent statement"))
        }
    }
}

/// Scripted backend for parser and pipeline tests: fixture tables keyed by
/// the exact content, with a configurable default.
pub struct MockBackend {
    default_pass: bool,
    syntax: HashMap<String, bool>,
    consistency: HashMap<(String, String), bool>,
    critique: HashMap<(String, String), bool>,
}

impl MockBackend {
    pub fn passing() -> Self {
        Self::with_default(true)
    }

    pub fn failing() -> Self {
        Self::with_default(false)
    }

    pub fn with_default(default_pass: bool) -> Self {
        Self {
            default_pass,
            syntax: HashMap::new(),
            consistency: HashMap::new(),
            critique: HashMap::new(),
        }
    }

    pub fn set_syntax(&mut self, statement: impl Into<String>, pass: bool) {
        self.syntax.insert(statement.into(), pass);
    }

    pub fn set_consistency(
        &mut self,
        question_id: impl Into<String>,
        statement: impl Into<String>,
        pass: bool,
    ) {
        self.consistency.insert((question_id.into(), statement.into()), pass);
    }

    pub fn set_critique(
        &mut self,
        question_id: impl Into<String>,
        statement: impl Into<String>,
        pass: bool,
    ) {
        self.critique.insert((question_id.into(), statement.into()), pass);
    }
}

impl VerifierBackend for MockBackend {
    fn id(&self) -> &str {
        "mock"
    }

    fn syntax_check(&self, statement: &str) -> Result<Judgment, VerifierError> {
        let pass = *self.syntax.get(statement).unwrap_or(&self.default_pass);
        Ok(Judgment { pass, detail: "scripted".to_string() })
    }

    fn consistency_check(
        &self,
        question: &Question,
        statement: &str,
    ) -> Result<Judgment, VerifierError> {
        let key = (question.id.clone(), statement.to_string());
        let pass = *self.consistency.get(&key).unwrap_or(&self.default_pass);
        Ok(Judgment { pass, detail: "scripted".to_string() })
    }

    fn critique_check(
        &self,
        question: &Question,
        statement: &str,
        _critique: CritiqueView<'_>,
    ) -> Result<Judgment, VerifierError> {
        let key = (question.id.clone(), statement.to_string());
        let pass = *self.critique.get(&key).unwrap_or(&self.default_pass);
        Ok(Judgment { pass, detail: "scripted".to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::Trajectory;

    fn oracle_set(target: &str) -> (Question, VerifierSet) {
        let q = Question::new("q1", "recover the hidden string");
        let backend = OracleBackend::new(vec!['a', 'b', 'c', 'd']).with_target("q1", target);
        (q, VerifierSet::new(Arc::new(backend)))
    }

    #[test]
    fn task_reward_truth_table() {
        // Exhaustive over (syntax pass, consistency pass).
        let q = Question::new("q", "");
        for (syn, cons, expected) in
            [(true, true, 1), (true, false, 0), (false, true, 0), (false, false, 0)]
        {
            let mut mock = MockBackend::with_default(true);
            mock.set_syntax("s", syn);
            mock.set_consistency("q", "s", cons);
            let v = VerifierSet::new(Arc::new(mock));
            assert_eq!(task_reward(&q, "s", &v).unwrap(), expected, "syn={syn} cons={cons}");
        }
    }

    #[test]
    fn task_reward_short_circuits_consistency_on_syntax_failure() {
        struct Strict;
        impl VerifierBackend for Strict {
            fn id(&self) -> &str {
                "strict"
            }
            fn syntax_check(&self, _: &str) -> Result<Judgment, VerifierError> {
                Ok(Judgment::fail("nope"))
            }
            fn consistency_check(&self, _: &Question, _: &str) -> Result<Judgment, VerifierError> {
                panic!("consistency must not be called when syntax fails");
            }
            fn critique_check(
                &self,
                _: &Question,
                _: &str,
                _: CritiqueView<'_>,
            ) -> Result<Judgment, VerifierError> {
                unreachable!()
            }
        }
        let v = VerifierSet::new(Arc::new(Strict));
        assert_eq!(task_reward(&Question::new("q", ""), "s", &v).unwrap(), 0);
    }

    #[test]
    fn aux_reward_truth_table_under_oracle() {
        // Exhaustive over (verdict, truly consistent).
        let (q, v) = oracle_set("a b");
        let cases = [
            (Verdict::Correct, "a b", 1),   // true positive
            (Verdict::Incorrect, "a c", 1), // true negative
            (Verdict::Correct, "a c", 0),   // premature termination
            (Verdict::Incorrect, "a b", 0), // false alarm
        ];
        for (verdict, statement, expected) in cases {
            let critique = CritiqueView { text: "", verdict };
            assert_eq!(aux_reward(&q, statement, critique, &v).unwrap(), expected);
        }
    }

    #[test]
    fn oracle_syntax_checks_alphabet_membership() {
        let (_, v) = oracle_set("a b");
        assert!(v.syntax_check("a b c d").unwrap().pass);
        assert!(!v.syntax_check("a z").unwrap().pass);
        assert!(!v.syntax_check("  ").unwrap().pass);
    }

    #[test]
    fn scores_case_study_shaped_trajectory() {
        let (q, v) = oracle_set("a c");
        let rounds = vec![
            ("a b".to_string(), "second symbol off".to_string(), Verdict::Incorrect),
            ("a c".to_string(), "matches now".to_string(), Verdict::Correct),
        ];
        let traj = Trajectory::from_parts("q1", &rounds, "a c").unwrap();
        let rv = score_trajectory(&q, &traj, &v).unwrap();
        assert_eq!(rv, RewardVector::new(vec![1, 1], 1));
    }

    #[test]
    fn scores_empty_loop_trajectory() {
        let (q, v) = oracle_set("a c");
        let traj = Trajectory::from_parts("q1", &[], "a c").unwrap();
        let rv = score_trajectory(&q, &traj, &v).unwrap();
        assert_eq!(rv, RewardVector::new(vec![], 1));
    }

    #[test]
    fn all_correct_critiques_on_wrong_statements_score_zero() {
        let (q, v) = oracle_set("a c");
        let rounds = vec![
            ("a a".to_string(), String::new(), Verdict::Incorrect),
            ("b b".to_string(), String::new(), Verdict::Correct),
        ];
        let traj = Trajectory::from_parts("q1", &rounds, "b b").unwrap();
        let rv = score_trajectory(&q, &traj, &v).unwrap();
        assert_eq!(rv.aux, vec![1, 0]);
        assert_eq!(rv.task, 0);
    }

    #[test]
    fn unknown_oracle_question_raises_with_position() {
        let (_, v) = oracle_set("a c");
        let other = Question::new("missing", "");
        let traj = Trajectory::from_parts("missing", &[], "a c").unwrap();
        let err = score_trajectory(&other, &traj, &v).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("final statement"), "{msg}");
    }

    #[test]
    fn determinism_across_repeated_and_concurrent_calls() {
        let (q, v) = oracle_set("a c");
        let rounds = vec![("a a".to_string(), String::new(), Verdict::Incorrect)];
        let traj = Trajectory::from_parts("q1", &rounds, "a c").unwrap();
        let first = score_trajectory(&q, &traj, &v).unwrap();
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (q, v, traj) = (q.clone(), v.clone(), traj.clone());
                std::thread::spawn(move || score_trajectory(&q, &traj, &v).unwrap())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), first);
        }
    }

    #[test]
    fn cache_serves_repeat_queries_without_backend_calls() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        struct Counting(AtomicUsize);
        impl VerifierBackend for Counting {
            fn id(&self) -> &str {
                "counting"
            }
            fn syntax_check(&self, _: &str) -> Result<Judgment, VerifierError> {
                self.0.fetch_add(1, Ordering::SeqCst);
                Ok(Judgment::pass(""))
            }
            fn consistency_check(&self, _: &Question, _: &str) -> Result<Judgment, VerifierError> {
                Ok(Judgment::pass(""))
            }
            fn critique_check(
                &self,
                _: &Question,
                _: &str,
                _: CritiqueView<'_>,
            ) -> Result<Judgment, VerifierError> {
                Ok(Judgment::pass(""))
            }
        }
        let backend = Arc::new(Counting(AtomicUsize::new(0)));
        let v = VerifierSet::new(backend.clone());
        for _ in 0..10 {
            v.syntax_check("same statement").unwrap();
        }
        assert_eq!(backend.0.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn terminal_only_zeroes_aux() {
        let rv = RewardVector::new(vec![1, 0, 1], 1);
        assert_eq!(rv.terminal_only(), RewardVector::new(vec![0, 0, 0], 1));
        assert_eq!(rv.positions(), vec![1.0, 0.0, 1.0, 1.0]);
    }
}
