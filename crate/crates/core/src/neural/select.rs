use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// Roulette draw over the normalized outputs.
    #[default]
    Probabilistic,
    /// Highest output wins; ties go to the lowest index.
    WinnerTakesAll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputDecision {
    pub winner: usize,
    /// Selection probabilities per choice slot; zero for masked slots.
    pub probabilities: Vec<f64>,
}

impl OutputDecision {
    pub fn one_hot(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.probabilities.len()];
        v[self.winner] = 1.0;
        v
    }
}

/// Pre-normalization weights: raw output shifted into (0, 2), plus the
/// bonus, with the commanded slot scaled by the obedience multiplier.
pub fn selection_weights(
    raw: &[f64],
    enabled: &[bool],
    bonus: f64,
    command: Option<usize>,
    obedience: f64,
) -> Vec<f64> {
    raw.iter()
        .zip(enabled)
        .enumerate()
        .map(|(i, (&r, &on))| {
            if !on {
                return 0.0;
            }
            let w = r + 1.0 + bonus;
            if command == Some(i) {
                w * obedience
            } else {
                w
            }
        })
        .collect()
}

/// Chooses one output from `raw` (choice slots only, memory excluded).
pub fn probabilistic_select(
    raw: &[f64],
    enabled: &[bool],
    bonus: f64,
    command: Option<usize>,
    obedience: f64,
    mode: SelectionMode,
    rng: &mut Rng,
) -> Result<OutputDecision> {
    debug_assert_eq!(raw.len(), enabled.len());
    if !enabled.iter().any(|&e| e) {
        return Err(Error::AllMasked);
    }
    let weights = selection_weights(raw, enabled, bonus, command, obedience);
    let total: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        // Only reachable with obedience 0 and a single enabled slot.
        let n = enabled.iter().filter(|&&e| e).count() as f64;
        enabled.iter().map(|&e| if e { 1.0 / n } else { 0.0 }).collect()
    };
    let winner = match mode {
        SelectionMode::Probabilistic => roulette(&probabilities, enabled, rng.random()),
        SelectionMode::WinnerTakesAll => argmax(&weights, enabled),
    };
    Ok(OutputDecision {
        winner,
        probabilities,
    })
}

/// Uniform choice over enabled slots, used while acting randomly.
pub fn uniform_select(enabled: &[bool], rng: &mut Rng) -> Result<OutputDecision> {
    let slots: Vec<usize> = (0..enabled.len()).filter(|&i| enabled[i]).collect();
    if slots.is_empty() {
        return Err(Error::AllMasked);
    }
    let p = 1.0 / slots.len() as f64;
    let winner = slots[rng.index(slots.len())];
    let probabilities = enabled.iter().map(|&e| if e { p } else { 0.0 }).collect();
    Ok(OutputDecision {
        winner,
        probabilities,
    })
}

/// Subtract-until-negative walk; falls back to the last enabled slot when
/// rounding leaves a remainder.
fn roulette(probabilities: &[f64], enabled: &[bool], mut draw: f64) -> usize {
    let mut last = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if !enabled[i] {
            continue;
        }
        last = i;
        if draw < p {
            return i;
        }
        draw -= p;
    }
    last
}

fn argmax(weights: &[f64], enabled: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for (i, &w) in weights.iter().enumerate() {
        if enabled[i] && best.is_none_or(|b| w > weights[b]) {
            best = Some(i);
        }
    }
    best.unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::rng::Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn equal_raw_gives_uniform() {
        let enabled = [true, false, true, true];
        let d = probabilistic_select(&[0.3; 4], &enabled, 0.05, None, 6.0, SelectionMode::Probabilistic, &mut Rng::new(1)).unwrap();
        for (i, &p) in d.probabilities.iter().enumerate() {
            let expected = if enabled[i] { 1.0 / 3.0 } else { 0.0 };
            assert!((p - expected).abs() < 1e-12);
        }
        assert!(enabled[d.winner]);
    }

    #[test]
    fn obedience_arithmetic() {
        let enabled = [true; 12];
        let d = probabilistic_select(&[0.0; 12], &enabled, 0.05, Some(4), 6.0, SelectionMode::Probabilistic, &mut Rng::new(1)).unwrap();
        let expected = 6.3 / (6.3 + 11.0 * 1.05);
        assert!((d.probabilities[4] - expected).abs() < 1e-12);
        assert!((d.probabilities[4] - 0.353).abs() < 1e-3);
    }

    #[test]
    fn obedience_extremes() {
        let enabled = [true; 12];
        let mut rng = Rng::new(2);
        let refuse = probabilistic_select(&[0.2; 12], &enabled, 0.05, Some(3), 0.0, SelectionMode::Probabilistic, &mut rng).unwrap();
        assert_eq!(refuse.probabilities[3], 0.0);
        let ignore = probabilistic_select(&[0.2; 12], &enabled, 0.05, Some(3), 1.0, SelectionMode::Probabilistic, &mut rng).unwrap();
        let plain = probabilistic_select(&[0.2; 12], &enabled, 0.05, None, 6.0, SelectionMode::Probabilistic, &mut rng).unwrap();
        assert_eq!(ignore.probabilities, plain.probabilities);
        let strong = probabilistic_select(&[0.2; 12], &enabled, 0.05, Some(3), 1e9, SelectionMode::Probabilistic, &mut rng).unwrap();
        assert!(strong.probabilities[3] > 0.999_999);
        for _ in 0..200 {
            let d = probabilistic_select(&[0.2; 12], &enabled, 0.05, Some(3), 0.0, SelectionMode::Probabilistic, &mut rng).unwrap();
            assert_ne!(d.winner, 3);
        }
    }

    #[test]
    fn all_masked_is_an_error() {
        let r = probabilistic_select(&[0.0; 3], &[false; 3], 0.05, None, 6.0, SelectionMode::Probabilistic, &mut Rng::new(1));
        assert!(matches!(r, Err(Error::AllMasked)));
    }

    #[test]
    fn winner_takes_all_picks_lowest_max() {
        let d = probabilistic_select(&[0.1, 0.5, 0.5, -0.2], &[true; 4], 0.05, None, 6.0, SelectionMode::WinnerTakesAll, &mut Rng::new(1)).unwrap();
        assert_eq!(d.winner, 1);
    }

    #[test]
    fn frequencies_match_probabilities() {
        let raw = [0.9, -0.5, 0.1, 0.4, -0.95, 0.0];
        let enabled = [true; 6];
        let mut rng = Rng::new(77);
        let n = 100_000;
        let mut counts = [0u64; 6];
        let mut probs = Vec::new();
        for _ in 0..n {
            let d = probabilistic_select(&raw, &enabled, 0.05, None, 6.0, SelectionMode::Probabilistic, &mut rng).unwrap();
            counts[d.winner] += 1;
            probs = d.probabilities;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| (c as f64 - p * n as f64).powi(2) / (p * n as f64))
            .sum();
        let p = 1.0 - ChiSquared::new(5.0).unwrap().cdf(chi2);
        assert!(p > 0.01, "chi2={chi2} p={p}");
    }

    proptest! {
        #[test]
        fn probabilities_normalized(raw in proptest::collection::vec(-0.999..0.999f64, 12), bonus in 0.0..0.5f64, seed in any::<u32>()) {
            let mut enabled = [true; 12];
            enabled[5] = false;
            let d = probabilistic_select(&raw, &enabled, bonus, None, 6.0, SelectionMode::Probabilistic, &mut Rng::new(seed)).unwrap();
            let total: f64 = d.probabilities.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(enabled[d.winner]);
            prop_assert_eq!(d.probabilities[5], 0.0);
            if bonus > 0.0 {
                for i in (0..12).filter(|&i| enabled[i]) {
                    prop_assert!(d.probabilities[i] > 0.0);
                }
            }
        }

        #[test]
        fn argmax_invariant_under_shift(raw in proptest::collection::vec(-0.999..0.999f64, 8), bonus in 0.0..1.0f64) {
            let enabled = [true; 8];
            let a = probabilistic_select(&raw, &enabled, bonus, None, 6.0, SelectionMode::WinnerTakesAll, &mut Rng::new(1)).unwrap();
            let b = probabilistic_select(&raw, &enabled, 0.0, None, 6.0, SelectionMode::WinnerTakesAll, &mut Rng::new(2)).unwrap();
            prop_assert_eq!(a.winner, b.winner);
        }
    }
}
