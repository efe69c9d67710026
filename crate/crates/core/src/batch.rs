//! Running many trials and summarizing them.

use log::warn;
use rayon::prelude::*;

use crate::config::TrialConfig;
use crate::metrics::{pearson_r, regression_p_value};
use crate::signaling::Signal;
use crate::trial::{run_trial, TrialReport};
use crate::world::TribeId;

/// One trial's fate within a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchEntry {
    pub index: usize,
    pub seed: u32,
    pub result: Result<TrialReport, String>,
}

/// How enabling one signal relates to tribe score across a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalCorrelation {
    pub signal: usize,
    pub label: String,
    pub enabled_tribes: usize,
    /// Mean score of tribes with the signal divided by the mean of all tribes.
    pub relative_score: Option<f64>,
    pub r: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub trials: usize,
    pub failures: usize,
    pub wins: [usize; 2],
    pub ties: usize,
    /// Mean normalized score per tribe slot over two-tribe trials.
    pub mean_normalized: [f64; 2],
    pub mean_score: [f64; 2],
    pub correlations: Vec<SignalCorrelation>,
}

/// Runs every config, in parallel when `threads` is not 1. Results come back
/// in input order whatever the scheduling, so output is reproducible.
pub fn run_batch(configs: &[TrialConfig], threads: Option<usize>) -> (Vec<BatchEntry>, BatchSummary) {
    let run = |(index, c): (usize, &TrialConfig)| BatchEntry {
        index,
        seed: c.seed,
        result: run_trial(c).map_err(|e| {
            warn!("trial {index} (seed {}) failed: {e}", c.seed);
            e.to_string()
        }),
    };
    let entries: Vec<BatchEntry> = match threads {
        Some(1) => configs.iter().enumerate().map(run).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| configs.par_iter().enumerate().map(run).collect()),
            Err(e) => {
                warn!("could not build a {n}-thread pool ({e}); running serially");
                configs.iter().enumerate().map(run).collect()
            }
        },
        None => configs.par_iter().enumerate().map(run).collect(),
    };
    let reports: Vec<&TrialReport> = entries.iter().filter_map(|e| e.result.as_ref().ok()).collect();
    let summary = summarize(&reports, entries.len());
    (entries, summary)
}

/// Aggregates finished trials. `attempted` includes failed ones.
pub fn summarize(reports: &[&TrialReport], attempted: usize) -> BatchSummary {
    let mut wins = [0; 2];
    let mut ties = 0;
    let mut norm = [0.0; 2];
    let mut raw = [0.0; 2];
    let mut pairs = 0;
    let mut raw_counts = [0usize; 2];
    for r in reports {
        for t in r.tribes.iter().take(2) {
            raw[t.tribe] += t.mean_score;
            raw_counts[t.tribe] += 1;
        }
        if r.tribes.len() == 2 {
            pairs += 1;
            norm[0] += r.tribes[0].normalized_score;
            norm[1] += r.tribes[1].normalized_score;
            match r.winner {
                Some(w) => wins[w] += 1,
                None => ties += 1,
            }
        }
    }
    let mean = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
    BatchSummary {
        trials: attempted,
        failures: attempted - reports.len(),
        wins,
        ties,
        mean_normalized: [mean(norm[0], pairs), mean(norm[1], pairs)],
        mean_score: [mean(raw[0], raw_counts[0]), mean(raw[1], raw_counts[1])],
        correlations: signal_correlations(reports),
    }
}

/// Score used when relating tribe traits to performance: the normalized
/// score in contests, the raw mean otherwise.
fn tribe_score(r: &TrialReport, t: TribeId) -> f64 {
    let s = &r.tribes[t];
    if r.tribes.len() == 2 {
        s.normalized_score
    } else {
        s.mean_score
    }
}

/// Per-signal correlation between the enabled indicator and score, taken
/// over every tribe in the batch.
pub fn signal_correlations(reports: &[&TrialReport]) -> Vec<SignalCorrelation> {
    let width = reports
        .iter()
        .flat_map(|r| r.tribes.iter().map(|t| t.signal_mask.len()))
        .max()
        .unwrap_or(0);
    let tribes: Vec<(&str, f64)> = reports
        .iter()
        .flat_map(|r| r.tribes.iter().map(move |t| (t.signal_mask.as_str(), tribe_score(r, t.tribe))))
        .collect();
    let overall = if tribes.is_empty() {
        0.0
    } else {
        tribes.iter().map(|t| t.1).sum::<f64>() / tribes.len() as f64
    };
    (0..width)
        .map(|s| {
            let xs: Vec<f64> = tribes
                .iter()
                .map(|(bits, _)| if bits.as_bytes().get(s) == Some(&b'1') { 1.0 } else { 0.0 })
                .collect();
            let ys: Vec<f64> = tribes.iter().map(|t| t.1).collect();
            let enabled: Vec<f64> = xs.iter().zip(&ys).filter(|(x, _)| **x == 1.0).map(|(_, y)| *y).collect();
            let r = pearson_r(&xs, &ys).ok();
            let p = r.and_then(|r| regression_p_value(r, xs.len()).ok());
            SignalCorrelation {
                signal: s,
                label: Signal::from_index(s).map_or_else(|| format!("S{s}"), |sig| sig.abbreviation()),
                enabled_tribes: enabled.len(),
                relative_score: (!enabled.is_empty() && overall > 0.0)
                    .then(|| enabled.iter().sum::<f64>() / enabled.len() as f64 / overall),
                r,
                p,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u32) -> TrialConfig {
        TrialConfig {
            seed,
            trial_length: 3000.0,
            lifespan: 1500.0,
            animats_per_tribe: 3,
            ..TrialConfig::default()
        }
    }

    #[test]
    fn single_trial_batch_matches_trial() {
        let c = tiny(3);
        let (entries, summary) = run_batch(std::slice::from_ref(&c), Some(1));
        let direct = run_trial(&c).unwrap();
        assert_eq!(entries[0].result.as_ref().unwrap(), &direct);
        assert_eq!(summary.trials, 1);
        assert_eq!(summary.failures, 0);
        assert_eq!(summary.wins[0] + summary.wins[1] + summary.ties, 1);
        assert!((summary.mean_normalized[0] - direct.tribes[0].normalized_score).abs() < 1e-9);
    }

    #[test]
    fn failures_are_recorded_and_batch_continues() {
        let mut bad = tiny(1);
        bad.lifespan = bad.trial_length * 2.0;
        let (entries, summary) = run_batch(&[bad, tiny(2)], Some(1));
        assert!(entries[0].result.is_err());
        assert!(entries[1].result.is_ok());
        assert_eq!(summary.failures, 1);
    }

    #[test]
    fn parallel_equals_serial() {
        let configs: Vec<_> = (1..=4).map(tiny).collect();
        let (a, _) = run_batch(&configs, Some(1));
        let (b, _) = run_batch(&configs, Some(3));
        assert_eq!(a, b);
    }
}
