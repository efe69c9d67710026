//! Shared fixtures for the benchmarks.

use brickworld::neural::{NetKind, Network};
use brickworld::{Rng, TrialConfig};

/// A standard two-tribe trial cut down to `seconds` of simulated time.
pub fn short_trial(seconds: f64) -> TrialConfig {
    TrialConfig {
        trial_length: seconds,
        lifespan: seconds / 2.0,
        ..TrialConfig::default()
    }
}

/// A network the size of the standard action network, with inputs for it.
pub fn action_network(seed: u32) -> (Network, Vec<f64>) {
    let mut rng = Rng::new(seed);
    let net = Network::random(NetKind::Action, 66, 59, 23, &mut rng);
    let inputs = (0..66).map(|_| rng.random()).collect();
    (net, inputs)
}
