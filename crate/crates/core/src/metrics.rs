//! Decision-sequence counting, differentiation factors and statistics.

use std::collections::VecDeque;

use log::{debug, warn};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::world::{TribeId, World};

/// Time separations between the two decisions of a counted sequence.
pub const LAGS: [usize; 4] = [1, 2, 4, 8];
pub const DF_SCALE: f64 = 10_000.0;

/// Per-animat counts of decision pairs `(d[t - lag], d[t])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceCounter {
    n: usize,
    counts: Vec<Vec<u64>>,
    recent: VecDeque<usize>,
}

impl SequenceCounter {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: vec![vec![0; n * n]; LAGS.len()],
            recent: VecDeque::with_capacity(LAGS[LAGS.len() - 1]),
        }
    }

    pub fn choices(&self) -> usize {
        self.n
    }

    /// Adds one decision. Pairs are counted only when `counting` is set,
    /// but every decision enters the history.
    pub fn record(&mut self, decision: usize, counting: bool) {
        debug_assert!(decision < self.n);
        if counting {
            for (li, &lag) in LAGS.iter().enumerate() {
                if self.recent.len() >= lag {
                    let prev = self.recent[self.recent.len() - lag];
                    self.counts[li][prev * self.n + decision] += 1;
                }
            }
        }
        if self.recent.len() == LAGS[LAGS.len() - 1] {
            self.recent.pop_front();
        }
        self.recent.push_back(decision);
    }

    /// Flat `prev * n + cur` table for one lag.
    pub fn counts(&self, lag: usize) -> &[u64] {
        let li = LAGS.iter().position(|&l| l == lag).expect("unsupported lag");
        &self.counts[li]
    }

    pub fn total(&self, lag: usize) -> u64 {
        self.counts(lag).iter().sum()
    }
}

/// Differentiation factor over a group of count tables (one per animat).
///
/// Each table is scaled to sum to `scale`; for every sequence the
/// population standard deviation across animats is taken, and the factor is
/// the mean of those deviations.
pub fn differentiation_factor(tables: &[&[u64]], scale: f64) -> f64 {
    let Some(first) = tables.first() else { return 0.0 };
    let cells = first.len();
    let freqs: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| {
            let total: u64 = t.iter().sum();
            if total == 0 {
                debug!("animat without counted decisions contributes zero frequencies");
                vec![0.0; cells]
            } else {
                t.iter().map(|&c| scale * c as f64 / total as f64).collect()
            }
        })
        .collect();
    let a = freqs.len() as f64;
    let mut sum_sigma = 0.0;
    for n in 0..cells {
        let mean = freqs.iter().map(|f| f[n]).sum::<f64>() / a;
        let var = freqs.iter().map(|f| (f[n] - mean).powi(2)).sum::<f64>() / a;
        sum_sigma += var.sqrt();
    }
    sum_sigma / cells as f64
}

/// Mean-centered Pearson correlation.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value for a regression slope with correlation `r` over `n`
/// points.
pub fn regression_p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    Ok((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

/// Scales a score pair to sum to 1000.
pub fn normalize_scores(a: f64, b: f64) -> (f64, f64) {
    let total = a + b;
    if total <= 0.0 {
        warn!("normalizing an all-zero score pair");
        return (500.0, 500.0);
    }
    let na = 1000.0 * a / total;
    (na, 1000.0 - na)
}

/// One tribe's state at a sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TribeSample {
    pub time: f64,
    pub tribe: usize,
    pub score: i64,
    pub adf: f64,
    pub sdf: f64,
    pub towers_completed: u32,
    pub random_start: bool,
}

/// Snapshot of one tribe: summed health of living members, differentiation
/// factors over lag-one sequences, and completed towers.
pub fn sample_tribe(world: &World, tribe: TribeId, random_start: bool) -> TribeSample {
    let members: Vec<_> = world.animats.iter().filter(|a| a.tribe == tribe).collect();
    let actions: Vec<&[u64]> = members.iter().map(|a| a.action_sequences.counts(1)).collect();
    let signals: Vec<&[u64]> = members.iter().map(|a| a.signal_sequences.counts(1)).collect();
    TribeSample {
        time: world.now(),
        tribe,
        score: members.iter().map(|a| a.knowledge.health).sum(),
        adf: differentiation_factor(&actions, DF_SCALE),
        sdf: differentiation_factor(&signals, DF_SCALE),
        towers_completed: world.towers.get(tribe).map_or(0, |t| t.completions),
        random_start,
    }
}
