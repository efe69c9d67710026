use crate::error::{Error, Result};
use crate::rng::Rng;

/// Magnitude bound applied to every weight after an update.
pub const WEIGHT_LIMIT: f64 = 1.0 - f64::EPSILON;

pub fn activation(x: f64) -> f64 {
    x.tanh()
}

pub fn activation_deriv(x: f64) -> f64 {
    let t = x.tanh();
    1.0 - t * t
}

/// Hidden-layer size for the given input and output counts.
pub fn hidden_units(n_in: usize, n_out: usize) -> usize {
    (n_in + n_out) * 2 / 3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    Action,
    Signal,
}

/// A fully connected one-hidden-layer tanh network.
///
/// `w_ih` is stored row-major by input (`i * n_hidden + j`), `w_ho` by
/// hidden unit (`j * n_out + k`).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub kind: NetKind,
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    pub w_ih: Vec<f64>,
    pub w_ho: Vec<f64>,
}

/// Intermediate values from one forward pass, kept for training.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    /// tanh of the scaled inputs, i.e. what each hidden unit sees.
    pub input_act: Vec<f64>,
    pub hidden_pre: Vec<f64>,
    pub hidden_act: Vec<f64>,
    pub output_pre: Vec<f64>,
    /// Raw outputs in (-1, 1).
    pub outputs: Vec<f64>,
}

/// Weight-space direction for one update, laid out like the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub ih: Vec<f64>,
    pub ho: Vec<f64>,
}

impl Network {
    pub fn zeros(kind: NetKind, n_in: usize, n_hidden: usize, n_out: usize) -> Self {
        Self {
            kind,
            n_in,
            n_hidden,
            n_out,
            w_ih: vec![0.0; n_in * n_hidden],
            w_ho: vec![0.0; n_hidden * n_out],
        }
    }

    /// Random initialisation: each weight is `crandom() / sf`, sf being the
    /// size of the largest layer.
    pub fn random(kind: NetKind, n_in: usize, n_hidden: usize, n_out: usize, rng: &mut Rng) -> Self {
        let mut net = Self::zeros(kind, n_in, n_hidden, n_out);
        let sf = n_in.max(n_hidden).max(n_out) as f64;
        for w in net.w_ih.iter_mut().chain(net.w_ho.iter_mut()) {
            *w = rng.crandom() / sf;
        }
        net
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn weight_ih(&self, i: usize, j: usize) -> f64 {
        self.w_ih[i * self.n_hidden + j]
    }

    pub fn weight_ho(&self, j: usize, k: usize) -> f64 {
        self.w_ho[j * self.n_out + k]
    }

    /// Forward pass over inputs in `[0, 1]`.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<Activations> {
        if inputs.len() != self.n_in {
            return Err(Error::InputSize {
                expected: self.n_in,
                got: inputs.len(),
            });
        }
        let input_act: Vec<f64> = inputs.iter().map(|&x| activation(2.0 * x - 1.0)).collect();
        let mut hidden_pre = vec![0.0; self.n_hidden];
        for (i, &a) in input_act.iter().enumerate() {
            let row = &self.w_ih[i * self.n_hidden..(i + 1) * self.n_hidden];
            for (h, &w) in hidden_pre.iter_mut().zip(row) {
                *h += w * a;
            }
        }
        let hidden_act: Vec<f64> = hidden_pre.iter().map(|&h| activation(h)).collect();
        let mut output_pre = vec![0.0; self.n_out];
        for (j, &a) in hidden_act.iter().enumerate() {
            let row = &self.w_ho[j * self.n_out..(j + 1) * self.n_out];
            for (o, &w) in output_pre.iter_mut().zip(row) {
                *o += w * a;
            }
        }
        let outputs = output_pre.iter().map(|&o| activation(o)).collect();
        Ok(Activations {
            input_act,
            hidden_pre,
            hidden_act,
            output_pre,
            outputs,
        })
    }

    /// Descent direction for output errors `errors[k] = target_k - y_k`.
    ///
    /// This is the negative gradient of `0.5 * sum(errors^2)`; hidden errors
    /// are propagated through the output derivative and the current weights.
    pub fn gradient(&self, act: &Activations, errors: &[f64]) -> Gradient {
        let delta_out: Vec<f64> = errors
            .iter()
            .zip(&act.output_pre)
            .map(|(&e, &o)| e * activation_deriv(o))
            .collect();
        let mut ho = vec![0.0; self.w_ho.len()];
        let mut delta_hidden = vec![0.0; self.n_hidden];
        for j in 0..self.n_hidden {
            let mut back = 0.0;
            for k in 0..self.n_out {
                ho[j * self.n_out + k] = delta_out[k] * act.hidden_act[j];
                back += delta_out[k] * self.w_ho[j * self.n_out + k];
            }
            delta_hidden[j] = back * activation_deriv(act.hidden_pre[j]);
        }
        let mut ih = vec![0.0; self.w_ih.len()];
        for i in 0..self.n_in {
            for j in 0..self.n_hidden {
                ih[i * self.n_hidden + j] = delta_hidden[j] * act.input_act[i];
            }
        }
        Gradient { ih, ho }
    }

    /// One training step scaled by `lr`, weights clamped afterwards.
    pub fn apply_errors(&mut self, act: &Activations, errors: &[f64], lr: f64) {
        if lr == 0.0 {
            return;
        }
        let g = self.gradient(act, errors);
        for (w, d) in self.w_ho.iter_mut().zip(&g.ho) {
            *w = (*w + lr * d).clamp(-WEIGHT_LIMIT, WEIGHT_LIMIT);
        }
        for (w, d) in self.w_ih.iter_mut().zip(&g.ih) {
            *w = (*w + lr * d).clamp(-WEIGHT_LIMIT, WEIGHT_LIMIT);
        }
    }

    /// Trains all outputs toward `target` using the raw outputs as actuals.
    pub fn backprop_update(&mut self, inputs: &[f64], target: &[f64], lr: f64) -> Result<()> {
        let act = self.evaluate(inputs)?;
        let errors: Vec<f64> = target.iter().zip(&act.outputs).map(|(t, y)| t - y).collect();
        self.apply_errors(&act, &errors, lr);
        Ok(())
    }

    pub fn weights_in_bounds(&self) -> bool {
        self.w_ih
            .iter()
            .chain(&self.w_ho)
            .all(|w| w.abs() < 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::rng::Rng;

    #[test]
    fn typical_hidden_size() {
        assert_eq!(hidden_units(66, 23), 59);
    }

    #[test]
    fn init_is_bounded_and_deterministic() {
        let a = Network::random(NetKind::Action, 66, 59, 23, &mut Rng::new(9));
        let b = Network::random(NetKind::Action, 66, 59, 23, &mut Rng::new(9));
        assert_eq!(a, b);
        assert!(a.w_ih.iter().chain(&a.w_ho).all(|w| w.abs() < 1.0 / 66.0));
    }

    #[test]
    fn activation_basics() {
        assert_eq!(activation(0.0), 0.0);
        assert!((activation(40.0) - 1.0).abs() < 1e-12);
        for x in [-2.0, -0.5, 0.0, 0.5, 2.0] {
            let h = 1e-5;
            let fd = (activation(x + h) - activation(x - h)) / (2.0 * h);
            let rel = (fd - activation_deriv(x)).abs() / activation_deriv(x).abs();
            assert!(rel < 1e-6, "x={x} rel={rel}");
        }
    }

    #[test]
    fn zero_weights_give_zero_outputs() {
        let net = Network::zeros(NetKind::Action, 4, 3, 2);
        let act = net.evaluate(&[0.1, 0.9, 1.0, 0.0]).unwrap();
        assert_eq!(act.outputs, vec![0.0, 0.0]);
    }

    #[test]
    fn input_scaling() {
        let net = Network::zeros(NetKind::Action, 2, 1, 1);
        let act = net.evaluate(&[0.5, 1.0]).unwrap();
        assert_eq!(act.input_act[0], 0.0);
        assert_eq!(act.input_act[1], 1.0f64.tanh());
    }

    #[test]
    fn hand_evaluated_two_two_two() {
        let mut net = Network::zeros(NetKind::Action, 2, 2, 2);
        net.w_ih = vec![0.3, -0.2, 0.5, 0.7];
        net.w_ho = vec![-0.4, 0.1, 0.9, -0.6];
        let x = [0.25, 0.8];
        let a0 = (2.0f64 * 0.25 - 1.0).tanh();
        let a1 = (2.0f64 * 0.8 - 1.0).tanh();
        let h0 = 0.3 * a0 + 0.5 * a1;
        let h1 = -0.2 * a0 + 0.7 * a1;
        let o0 = (-0.4 * h0.tanh() + 0.9 * h1.tanh()).tanh();
        let o1 = (0.1 * h0.tanh() - 0.6 * h1.tanh()).tanh();
        let out = net.evaluate(&x).unwrap().outputs;
        assert!((out[0] - o0).abs() < 1e-12);
        assert!((out[1] - o1).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let net = Network::zeros(NetKind::Signal, 3, 2, 2);
        assert!(matches!(net.evaluate(&[0.0; 4]), Err(Error::InputSize { .. })));
    }

    #[test]
    fn zero_rate_is_identity() {
        let mut net = Network::random(NetKind::Action, 5, 4, 3, &mut Rng::new(1));
        let before = net.clone();
        net.backprop_update(&[0.2, 0.4, 0.6, 0.8, 1.0], &[1.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn repeated_training_raises_target_output() {
        let mut rng = Rng::new(4);
        let mut net = Network::random(NetKind::Action, 6, 5, 3, &mut rng);
        let x = [0.1, 0.9, 0.3, 0.7, 0.5, 0.0];
        let target = [1.0, -1.0, -1.0];
        let mut last = net.evaluate(&x).unwrap().outputs[0];
        for _ in 0..100 {
            net.backprop_update(&x, &target, 0.05).unwrap();
            let now = net.evaluate(&x).unwrap().outputs[0];
            assert!(now > last);
            last = now;
        }
    }

    proptest! {
        #[test]
        fn evaluation_is_pure(seed in any::<u32>()) {
            let mut rng = Rng::new(seed);
            let net = Network::random(NetKind::Signal, 8, 6, 4, &mut rng);
            let x: Vec<f64> = (0..8).map(|_| rng.random()).collect();
            prop_assert_eq!(net.evaluate(&x).unwrap(), net.evaluate(&x).unwrap());
        }

        #[test]
        fn weights_stay_bounded(seed in any::<u32>(), lr in -5.0..5.0f64) {
            let mut rng = Rng::new(seed);
            let mut net = Network::random(NetKind::Action, 6, 5, 4, &mut rng);
            for _ in 0..20 {
                let x: Vec<f64> = (0..6).map(|_| rng.random()).collect();
                net.backprop_update(&x, &[1.0, -1.0, 1.0, -1.0], lr).unwrap();
            }
            prop_assert!(net.weights_in_bounds());
        }
    }
}
