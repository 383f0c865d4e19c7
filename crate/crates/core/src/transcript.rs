//! Reflective-trajectory data model and the round-structured transcript format.
//!
//! A transcript is one continuous generation that interleaves formal-statement
//! attempts with self-critiques inside a `<think>…</think>` region, one
//! `<round>…</round>` block per iteration, followed by a final fenced
//! statement after the think region closes:
//!
//! ````text
//! <think>
//! <round>
//! ```
//! s_1
//! ```
//! critique of s_1
//! Incorrect
//! </round>
//! <round>
//! ...
//! Correct
//! </round>
//! </think>
//! ```
//! final statement
//! ```
//! ````
//!
//! The parser is tolerant to leading/trailing prose and to draft fenced
//! blocks before the statement block of a round (the statement is the last
//! fenced block of the round). Token spans are computed from a pluggable
//! tokenizer; whitespace splitting is the reference implementation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";
const ROUND_OPEN: &str = "<round>";
const ROUND_CLOSE: &str = "</round>";
const FENCE: &str = "```";

#[derive(Debug, Error)]
pub enum TranscriptError {
    /// The input text does not follow the round-structured grammar. Carries
    /// the byte offset of the first violation.
    #[error("malformed transcript at byte {offset}: {reason}")]
    Malformed { reason: String, offset: usize },
    /// A trajectory handed to the renderer breaks its own invariants.
    #[error("trajectory invariant violated: {0}")]
    InvariantViolation(String),
}

impl TranscriptError {
    fn malformed(reason: impl Into<String>, offset: usize) -> Self {
        TranscriptError::Malformed { reason: reason.into(), offset }
    }
}

/// A natural-language problem statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
}

impl Question {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into() }
    }
}

/// Outcome of a self-critique: whether the critique declared the statement
/// semantically consistent with the question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Correct,
    Incorrect,
}

impl Verdict {
    pub fn keyword(self) -> &'static str {
        match self {
            Verdict::Correct => "Correct",
            Verdict::Incorrect => "Incorrect",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// One statement/critique pair inside a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    /// 1-based position within the trajectory.
    pub index: usize,
    pub statement: String,
    pub critique: String,
    pub verdict: Verdict,
    pub statement_span: Span,
    pub critique_span: Span,
}

/// One reflective episode: the ordered iterations plus the final answer
/// segment, with token-span bookkeeping against the source text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub question_id: String,
    pub iterations: Vec<Iteration>,
    pub final_statement: String,
    pub final_span: Span,
    pub token_count: usize,
}

impl Trajectory {
    /// Number of iterations T.
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    pub fn with_question_id(mut self, id: impl Into<String>) -> Self {
        self.question_id = id.into();
        self
    }

    /// Checks every structural invariant; returns the first violation.
    pub fn validate(&self) -> Result<(), TranscriptError> {
        let fail = |msg: String| Err(TranscriptError::InvariantViolation(msg));
        let t = self.iterations.len();
        for (i, it) in self.iterations.iter().enumerate() {
            if it.index != i + 1 {
                return fail(format!("iteration index {} at position {}", it.index, i));
            }
            if it.verdict == Verdict::Correct && i + 1 != t {
                return fail(format!("verdict Correct at non-final iteration {}", it.index));
            }
            if it.statement_span.end > it.critique_span.start {
                return fail(format!("statement span overlaps critique span at iteration {}", it.index));
            }
            if it.critique_span.end > self.token_count || it.statement_span.end > self.token_count {
                return fail(format!("span exceeds token count at iteration {}", it.index));
            }
            if i > 0 {
                let prev = &self.iterations[i - 1];
                if prev.critique_span.end > it.statement_span.start {
                    return fail(format!("iterations {} and {} overlap", prev.index, it.index));
                }
            }
        }
        if let Some(last) = self.iterations.last() {
            if last.critique_span.end > self.final_span.start {
                return fail("final span precedes last iteration".to_string());
            }
        }
        if self.final_span.end > self.token_count {
            return fail("final span exceeds token count".to_string());
        }
        Ok(())
    }

    /// Builds a trajectory with canonical spans from bare contents by
    /// rendering the canonical transcript and parsing it back.
    pub fn from_parts(
        question_id: impl Into<String>,
        rounds: &[(String, String, Verdict)],
        final_statement: &str,
    ) -> Result<Trajectory, TranscriptError> {
        let text = render_parts(rounds, final_statement)?;
        let traj = parse_transcript(&text)?;
        Ok(traj.with_question_id(question_id))
    }
}

/// Content-only JSONL record for a trajectory (span bookkeeping omitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub question_id: String,
    pub iterations: Vec<IterationRecord>,
    pub final_statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub statement: String,
    pub critique: String,
    pub verdict: Verdict,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(t: &Trajectory) -> Self {
        TrajectoryRecord {
            question_id: t.question_id.clone(),
            iterations: t
                .iterations
                .iter()
                .map(|it| IterationRecord {
                    index: it.index,
                    statement: it.statement.clone(),
                    critique: it.critique.clone(),
                    verdict: it.verdict,
                })
                .collect(),
            final_statement: t.final_statement.clone(),
        }
    }
}

impl TrajectoryRecord {
    /// Reconstructs a full trajectory with canonical spans.
    pub fn into_trajectory(self) -> Result<Trajectory, TranscriptError> {
        let rounds: Vec<(String, String, Verdict)> = self
            .iterations
            .into_iter()
            .map(|r| (r.statement, r.critique, r.verdict))
            .collect();
        Trajectory::from_parts(self.question_id, &rounds, &self.final_statement)
    }
}

/// Token span over the source text, in byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

/// Pluggable tokenizer used only for span bookkeeping. Credit assignment
/// needs consistent spans, not any particular vocabulary.
pub trait SpanTokenizer {
    fn tokenize(&self, text: &str) -> Vec<TokenSpan>;
}

/// Reference tokenizer: maximal runs of non-whitespace bytes.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl SpanTokenizer for WhitespaceTokenizer {
    fn tokenize(&self, text: &str) -> Vec<TokenSpan> {
        let mut out = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i].is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            out.push(TokenSpan { start, end: i });
        }
        out
    }
}

fn verdict_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b(Correct|Incorrect)\b").expect("static regex"))
}

/// Byte range of a fenced code block: the inner content plus where the
/// closing fence line ends.
struct FencedBlock {
    close_end: usize,
    content_start: usize,
    content_end: usize,
}

/// Finds fenced blocks: a fence is a line whose first non-blank characters
/// are three backticks; content runs between the opening and closing fence
/// lines exclusive.
fn find_fenced_blocks(text: &str, base: usize) -> Vec<FencedBlock> {
    let mut blocks = Vec::new();
    let mut open: Option<(usize, usize)> = None; // (fence line start, content start)
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        let line_start = pos;
        pos += line.len();
        let trimmed = line.trim_start();
        if !trimmed.starts_with(FENCE) {
            continue;
        }
        match open.take() {
            None => open = Some((line_start, line_start + line.len())),
            Some((_fence_start, content_start)) => {
                let content_end = line_start;
                blocks.push(FencedBlock {
                    close_end: base + pos.min(text.len()),
                    content_start: base + content_start,
                    content_end: base + content_end,
                });
            }
        }
    }
    blocks
}

/// Trims one trailing newline (the one the renderer inserts before a fence).
fn trim_block_content(text: &str) -> &str {
    text.strip_suffix('\n').unwrap_or(text)
}

/// Parses a round-structured transcript into a [`Trajectory`] using the
/// whitespace reference tokenizer. The question id is not part of the text
/// format and is left empty.
pub fn parse_transcript(text: &str) -> Result<Trajectory, TranscriptError> {
    parse_transcript_with(text, &WhitespaceTokenizer)
}

/// [`parse_transcript`] with an injected tokenizer for span bookkeeping.
pub fn parse_transcript_with(
    text: &str,
    tokenizer: &dyn SpanTokenizer,
) -> Result<Trajectory, TranscriptError> {
    let think_open = text.find(THINK_OPEN);
    let region_start = think_open.map(|p| p + THINK_OPEN.len()).unwrap_or(0);
    let think_close = text[region_start..]
        .find(THINK_CLOSE)
        .map(|p| p + region_start)
        .ok_or_else(|| {
            TranscriptError::malformed("missing </think>", think_open.unwrap_or(0))
        })?;

    let tokens = tokenizer.tokenize(text);
    let token_count = tokens.len();
    // First token whose byte range starts at or after `byte`.
    let token_at = |byte: usize| tokens.partition_point(|t| t.start < byte);

    let mut iterations = Vec::new();
    let mut cursor = region_start;
    while let Some(rel) = text[cursor..think_close].find(ROUND_OPEN) {
        let round_open = cursor + rel;
        let body_start = round_open + ROUND_OPEN.len();
        let rel_close = text[body_start..think_close].find(ROUND_CLOSE).ok_or_else(|| {
            TranscriptError::malformed("unclosed <round>", round_open)
        })?;
        let body_end = body_start + rel_close;
        let round_end = body_end + ROUND_CLOSE.len();

        let body = &text[body_start..body_end];
        let block = find_fenced_blocks(body, body_start)
            .into_iter()
            .last()
            .ok_or_else(|| TranscriptError::malformed("round has no fenced block", round_open))?;

        let statement = trim_block_content(&text[block.content_start..block.content_end]);
        let critique_region = &text[block.close_end..body_end];

        let verdict_match = verdict_regex()
            .find_iter(&text[round_open..round_end])
            .last()
            .ok_or_else(|| TranscriptError::malformed("round has no verdict", round_open))?;
        let verdict = match verdict_match.as_str() {
            "Correct" => Verdict::Correct,
            _ => Verdict::Incorrect,
        };

        // The canonical renderer appends the verdict as the last token of the
        // round; strip it back off so critique text round-trips.
        let trimmed = critique_region.trim_end();
        let critique = match trimmed.rsplit_once(|c: char| c.is_whitespace()) {
            Some((head, tail)) if tail == "Correct" || tail == "Incorrect" => head.trim_end(),
            None if trimmed == "Correct" || trimmed == "Incorrect" => "",
            _ => trimmed,
        };
        let critique = critique.trim_start();

        // Token spans: statement covers the block content, critique covers
        // the text between the closing fence and </round>.
        let statement_span = Span::new(token_at(block.content_start), token_at(block.content_end));
        let critique_span = Span::new(token_at(block.close_end), token_at(body_end));

        iterations.push(Iteration {
            index: iterations.len() + 1,
            statement: statement.to_string(),
            critique: critique.to_string(),
            verdict,
            statement_span,
            critique_span,
        });
        if verdict == Verdict::Correct && text[round_end..think_close].contains(ROUND_OPEN) {
            return Err(TranscriptError::malformed(
                "verdict Correct at non-final round",
                round_open,
            ));
        }
        cursor = round_end;
    }

    let tail_start = think_close + THINK_CLOSE.len();
    let final_block = find_fenced_blocks(&text[tail_start..], tail_start)
        .into_iter()
        .next()
        .ok_or_else(|| TranscriptError::malformed("no final fenced block", tail_start))?;
    let final_statement = trim_block_content(&text[final_block.content_start..final_block.content_end]);
    let final_span = Span::new(token_at(final_block.content_start), token_at(final_block.content_end));

    let traj = Trajectory {
        question_id: String::new(),
        iterations,
        final_statement: final_statement.to_string(),
        final_span,
        token_count,
    };
    traj.validate()?;
    Ok(traj)
}

/// Rejects content that would break the transcript grammar when embedded.
fn check_embeddable(kind: &str, text: &str) -> Result<(), TranscriptError> {
    for marker in [THINK_OPEN, THINK_CLOSE, ROUND_OPEN, ROUND_CLOSE] {
        if text.contains(marker) {
            return Err(TranscriptError::InvariantViolation(format!(
                "{kind} contains structural marker {marker}"
            )));
        }
    }
    if text.lines().any(|l| l.trim_start().starts_with(FENCE)) {
        return Err(TranscriptError::InvariantViolation(format!(
            "{kind} contains a fence line"
        )));
    }
    Ok(())
}

fn render_parts(
    rounds: &[(String, String, Verdict)],
    final_statement: &str,
) -> Result<String, TranscriptError> {
    let t = rounds.len();
    for (i, (statement, critique, verdict)) in rounds.iter().enumerate() {
        check_embeddable("statement", statement)?;
        check_embeddable("critique", critique)?;
        if *verdict == Verdict::Correct && i + 1 != t {
            return Err(TranscriptError::InvariantViolation(format!(
                "verdict Correct at non-final iteration {}",
                i + 1
            )));
        }
    }
    check_embeddable("final statement", final_statement)?;

    let mut out = String::new();
    out.push_str(THINK_OPEN);
    out.push('\n');
    for (statement, critique, verdict) in rounds {
        out.push_str(ROUND_OPEN);
        out.push('\n');
        out.push_str(FENCE);
        out.push('\n');
        if !statement.is_empty() {
            out.push_str(statement);
            out.push('\n');
        }
        out.push_str(FENCE);
        out.push('\n');
        if !critique.is_empty() {
            out.push_str(critique);
            out.push('\n');
        }
        out.push_str(verdict.keyword());
        out.push('\n');
        out.push_str(ROUND_CLOSE);
        out.push('\n');
    }
    out.push_str(THINK_CLOSE);
    out.push('\n');
    out.push_str(FENCE);
    out.push('\n');
    if !final_statement.is_empty() {
        out.push_str(final_statement);
        out.push('\n');
    }
    out.push_str(FENCE);
    out.push('\n');
    Ok(out)
}

/// Emits the canonical transcript for a trajectory. `parse(render(t)) == t`
/// for trajectories whose spans are canonical (e.g. built by
/// [`Trajectory::from_parts`] or by the parser itself).
pub fn render_transcript(traj: &Trajectory) -> Result<String, TranscriptError> {
    traj.validate()?;
    let rounds: Vec<(String, String, Verdict)> = traj
        .iterations
        .iter()
        .map(|it| (it.statement.clone(), it.critique.clone(), it.verdict))
        .collect();
    render_parts(&rounds, &traj.final_statement)
}

/// What a segment of credited tokens belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// 1-based iteration index.
    Iteration(usize),
    Final,
}

/// A credited token segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub span: Span,
}

/// Splits a trajectory's credited token range into T+1 contiguous segments:
/// one per iteration (statement, critique, and everything up to the next
/// iteration, including the tokens announcing termination) and one final
/// segment running to the end of the text. Tokens before the first segment
/// are the uncredited preamble.
pub fn segment_spans(traj: &Trajectory) -> Result<Vec<Segment>, TranscriptError> {
    traj.validate()?;
    let mut segments = Vec::with_capacity(traj.iterations.len() + 1);
    let mut starts: Vec<usize> = traj.iterations.iter().map(|it| it.statement_span.start).collect();
    starts.push(traj.final_span.start);
    for (i, it) in traj.iterations.iter().enumerate() {
        segments.push(Segment {
            kind: SegmentKind::Iteration(it.index),
            span: Span::new(starts[i], starts[i + 1]),
        });
    }
    segments.push(Segment {
        kind: SegmentKind::Final,
        span: Span::new(traj.final_span.start, traj.token_count),
    });
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(s: &str, c: &str, v: Verdict) -> (String, String, Verdict) {
        (s.to_string(), c.to_string(), v)
    }

    #[test]
    fn parses_two_round_transcript() {
        let text = "<think>\n<round>\n```\na b\n```\nmismatch at second symbol\nIncorrect\n</round>\n<round>\n```\na c\n```\nlooks right\nCorrect\n</round>\n</think>\n```\na c\n```\n";
        let traj = parse_transcript(text).unwrap();
        assert_eq!(traj.iteration_count(), 2);
        assert_eq!(traj.iterations[0].verdict, Verdict::Incorrect);
        assert_eq!(traj.iterations[1].verdict, Verdict::Correct);
        assert_eq!(traj.iterations[0].statement, "a b");
        assert_eq!(traj.iterations[0].critique, "mismatch at second symbol");
        assert_eq!(traj.final_statement, "a c");
    }

    #[test]
    fn parses_empty_loop() {
        let text = "<think></think>\n```\nx y z\n```\n";
        let traj = parse_transcript(text).unwrap();
        assert_eq!(traj.iteration_count(), 0);
        assert_eq!(traj.final_statement, "x y z");
    }

    #[test]
    fn tolerates_prose_and_draft_blocks() {
        let text = "prompt preamble here\n<think>\n<round>\nlet me try a draft first\n```\ndraft one\n```\nhmm, another attempt:\n```\nreal statement\n```\nthe draft was off; this one still misses a constraint\nIncorrect\n</round>\n</think>\nhere is the final answer\n```\nreal statement\n```\ntrailing words\n";
        let traj = parse_transcript(text).unwrap();
        assert_eq!(traj.iteration_count(), 1);
        assert_eq!(traj.iterations[0].statement, "real statement");
        assert!(traj.iterations[0].critique.starts_with("the draft was off"));
        assert_eq!(traj.final_statement, "real statement");
    }

    #[test]
    fn missing_think_close_is_malformed() {
        let err = parse_transcript("<think>\n<round>\n```\ns\n```\nIncorrect\n</round>\n").unwrap_err();
        match err {
            TranscriptError::Malformed { reason, offset } => {
                assert!(reason.contains("</think>"));
                assert_eq!(offset, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_without_fence_is_malformed() {
        let text = "<think>\n<round>\nno code here\nIncorrect\n</round>\n</think>\n```\nf\n```\n";
        let err = parse_transcript(text).unwrap_err();
        match err {
            TranscriptError::Malformed { reason, offset } => {
                assert!(reason.contains("fenced block"));
                assert_eq!(offset, text.find("<round>").unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_without_verdict_is_malformed() {
        let text = "<think>\n<round>\n```\ns\n```\nno verdict word\n</round>\n</think>\n```\nf\n```\n";
        let err = parse_transcript(text).unwrap_err();
        assert!(matches!(err, TranscriptError::Malformed { ref reason, .. } if reason.contains("verdict")));
    }

    #[test]
    fn missing_final_block_is_malformed() {
        let text = "<think></think>\nnothing fenced after\n";
        let err = parse_transcript(text).unwrap_err();
        assert!(matches!(err, TranscriptError::Malformed { ref reason, .. } if reason.contains("final")));
    }

    #[test]
    fn correct_before_final_round_rejected_by_parse_and_render() {
        let text = "<think>\n<round>\n```\ns\n```\nCorrect\n</round>\n<round>\n```\nu\n```\nIncorrect\n</round>\n</think>\n```\nf\n```\n";
        assert!(parse_transcript(text).is_err());
        let rounds = vec![
            round("s", "", Verdict::Correct),
            round("u", "", Verdict::Incorrect),
        ];
        assert!(matches!(
            render_parts(&rounds, "f"),
            Err(TranscriptError::InvariantViolation(_))
        ));
    }

    #[test]
    fn render_rejects_embedded_markers() {
        let rounds = vec![round("s </round> t", "c", Verdict::Incorrect)];
        assert!(render_parts(&rounds, "f").is_err());
        let rounds = vec![round("s", "has\n``` fence", Verdict::Incorrect)];
        assert!(render_parts(&rounds, "f").is_err());
    }

    #[test]
    fn round_trip_small_cases() {
        for rounds in [
            vec![],
            vec![round("a b c", "", Verdict::Correct)],
            vec![
                round("a b", "second symbol wrong", Verdict::Incorrect),
                round("a c", "matches now, calling it Correct", Verdict::Correct),
            ],
        ] {
            let t = Trajectory::from_parts("", &rounds, "a c").unwrap();
            let rendered = render_transcript(&t).unwrap();
            assert_eq!(parse_transcript(&rendered).unwrap(), t);
        }
    }

    #[test]
    fn verdict_taken_from_last_occurrence() {
        let text = "<think>\n<round>\n```\ns\n```\nI first thought Correct but it is actually\nIncorrect\n</round>\n</think>\n```\nf\n```\n";
        let traj = parse_transcript(text).unwrap();
        assert_eq!(traj.iterations[0].verdict, Verdict::Incorrect);
        assert_eq!(traj.iterations[0].critique, "I first thought Correct but it is actually");
    }

    #[test]
    fn segments_partition_credited_range() {
        let rounds = vec![
            round("a a", "fb bad ok", Verdict::Incorrect),
            round("b a", "fb ok ok", Verdict::Correct),
        ];
        let t = Trajectory::from_parts("q", &rounds, "b a").unwrap();
        let segs = segment_spans(&t).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs.last().unwrap().kind, SegmentKind::Final);
        // contiguous, ordered, ending at token_count
        for w in segs.windows(2) {
            assert_eq!(w[0].span.end, w[1].span.start);
        }
        assert_eq!(segs.last().unwrap().span.end, t.token_count);
        // statement and critique tokens live inside their segment
        for (seg, it) in segs.iter().zip(&t.iterations) {
            assert!(seg.span.start <= it.statement_span.start);
            assert!(it.critique_span.end <= seg.span.end);
        }
        assert!(segs[2].span.start <= t.final_span.start && t.final_span.end <= segs[2].span.end);
    }

    #[test]
    fn single_segment_for_empty_loop() {
        let t = Trajectory::from_parts("q", &[], "z z").unwrap();
        let segs = segment_spans(&t).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::Final);
        assert_eq!(segs[0].span.end, t.token_count);
    }

    #[test]
    fn injected_tokenizer_changes_spans_not_content() {
        // splits runs of alphanumerics, so punctuation separates tokens
        struct AlnumTokenizer;
        impl SpanTokenizer for AlnumTokenizer {
            fn tokenize(&self, text: &str) -> Vec<TokenSpan> {
                let mut out = Vec::new();
                let mut start = None;
                for (i, c) in text.char_indices() {
                    if c.is_alphanumeric() {
                        start.get_or_insert(i);
                    } else if let Some(s) = start.take() {
                        out.push(TokenSpan { start: s, end: i });
                    }
                }
                if let Some(s) = start {
                    out.push(TokenSpan { start: s, end: text.len() });
                }
                out
            }
        }

        let text = "<think>\n<round>\n```\nf(x) <= 80\n```\nendpoint-case missing\nIncorrect\n</round>\n</think>\n```\nf(x) <= 81\n```\n";
        let whitespace = parse_transcript(text).unwrap();
        let alnum = parse_transcript_with(text, &AlnumTokenizer).unwrap();
        // content identical under either tokenizer
        assert_eq!(alnum.iterations[0].statement, whitespace.iterations[0].statement);
        assert_eq!(alnum.final_statement, whitespace.final_statement);
        // "endpoint-case missing" + verdict: 3 whitespace tokens, 4 alnum
        assert_eq!(whitespace.iterations[0].critique_span.len(), 3);
        assert_eq!(alnum.iterations[0].critique_span.len(), 4);
        alnum.validate().unwrap();
        let segs = segment_spans(&alnum).unwrap();
        assert_eq!(segs.last().unwrap().span.end, alnum.token_count);
    }

    #[test]
    fn jsonl_record_round_trip() {
        let rounds = vec![round("a b", "off by one", Verdict::Incorrect)];
        let t = Trajectory::from_parts("q7", &rounds, "a c").unwrap();
        let record = TrajectoryRecord::from(&t);
        let line = serde_json::to_string(&record).unwrap();
        let back: TrajectoryRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.into_trajectory().unwrap(), t);
    }
}
