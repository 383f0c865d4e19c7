//! Per-step metrics records, JSONL persistence, and plot-data export.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use super::HarnessError;

/// One training step's metrics. `iteration_histogram[t-1]` counts episodes
/// that ran exactly `t` iterations and sums to the episode count.
/// `critique_faithfulness` and `task_success` are measured against the true
/// oracle rewards even when an ablation zeroes what the optimizer sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub mean_reward: f64,
    pub loss: f64,
    pub grad_norm: f64,
    pub mean_abs_adv: f64,
    pub mean_episode_tokens: f64,
    pub iteration_histogram: Vec<usize>,
    pub critique_faithfulness: f64,
    pub task_success: f64,
    /// Largest return value this step produced before normalization; can
    /// exceed `r_max` only when clipping is disabled.
    pub max_return: f64,
}

impl MetricsRecord {
    pub fn episode_count(&self) -> usize {
        self.iteration_histogram.iter().sum()
    }
}

pub fn write_metrics_jsonl(path: &Path, records: &[MetricsRecord]) -> Result<(), HarnessError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(|e| HarnessError::Config(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_metrics_jsonl(path: &Path) -> Result<Vec<MetricsRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| HarnessError::Config(e.to_string())))
        .collect()
}

/// Writes one CSV per curve: reward, episode length, and the iteration
/// histogram over time. One data row per training step.
pub fn emit_plots_data(records: &[MetricsRecord], dir: &Path) -> Result<(), HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Config("metrics log is empty".to_string()));
    }
    std::fs::create_dir_all(dir)?;

    let mut reward = String::from("step,mean_reward\n");
    let mut length = String::from("step,mean_episode_tokens\n");
    let cap = records.iter().map(|r| r.iteration_histogram.len()).max().unwrap_or(0);
    let mut iterations = String::from("step");
    for t in 1..=cap {
        iterations.push_str(&format!(",iterations_{t}"));
    }
    iterations.push('\n');

    for r in records {
        reward.push_str(&format!("{},{}\n", r.step, r.mean_reward));
        length.push_str(&format!("{},{}\n", r.step, r.mean_episode_tokens));
        iterations.push_str(&r.step.to_string());
        for t in 0..cap {
            let count = r.iteration_histogram.get(t).copied().unwrap_or(0);
            iterations.push_str(&format!(",{count}"));
        }
        iterations.push('\n');
    }

    std::fs::write(dir.join("reward.csv"), reward)?;
    std::fs::write(dir.join("length.csv"), length)?;
    std::fs::write(dir.join("iterations.csv"), iterations)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: u64) -> MetricsRecord {
        MetricsRecord {
            step,
            mean_reward: 0.25 * step as f64,
            loss: -0.1,
            grad_norm: 0.5,
            mean_abs_adv: 0.9,
            mean_episode_tokens: 40.0,
            iteration_histogram: vec![3, 1, 0],
            critique_faithfulness: 0.5,
            task_success: 0.25,
            max_return: 1.0,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.jsonl");
        let records = vec![record(0), record(1)];
        write_metrics_jsonl(&path, &records).unwrap();
        assert_eq!(read_metrics_jsonl(&path).unwrap(), records);
    }

    #[test]
    fn plot_rows_match_steps() {
        let dir = tempfile::tempdir().unwrap();
        let records: Vec<MetricsRecord> = (0..5).map(record).collect();
        emit_plots_data(&records, dir.path()).unwrap();
        for name in ["reward.csv", "length.csv", "iterations.csv"] {
            let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(text.lines().count(), 1 + records.len(), "{name}");
        }
        // histogram columns sum to the episode count per row
        let text = std::fs::read_to_string(dir.path().join("iterations.csv")).unwrap();
        for line in text.lines().skip(1) {
            let total: usize =
                line.split(',').skip(1).map(|v| v.parse::<usize>().unwrap()).sum();
            assert_eq!(total, 4);
        }
    }

    #[test]
    fn empty_log_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plots_data(&[], dir.path()).is_err());
    }
}
