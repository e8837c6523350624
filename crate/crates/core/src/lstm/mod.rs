//! Stacked LSTM regressor with a scalar dense head.
//!
//! Each layer uses the standard four-gate cell (no peepholes):
//!
//! ```text
//! f = σ(W_f x + U_f h + b_f)      forget gate
//! i = σ(W_i x + U_i h + b_i)      input gate
//! g = tanh(W_g x + U_g h + b_g)   candidate
//! o = σ(W_o x + U_o h + b_o)      output gate
//! c' = f ⊙ c + i ⊙ g
//! h' = o ⊙ tanh(c')
//! ```
//!
//! Layer 0 consumes one scalar per time step. Every layer's hidden output
//! goes through inverted dropout before reaching the next layer; for the last
//! layer only the final hidden state is used, and it is dropped out before
//! the head. State starts at zero for every window.

mod cell;
mod gradcheck;
mod matrix;
mod network;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub use cell::{cell_step, StepCache};
pub use gradcheck::{gradient_check, numeric_gradients};
pub use matrix::Matrix;
pub use network::{backward_sequence, forward_sequence, ForwardCache, LstmState, Mode};

pub const DEFAULT_LAYER_SIZES: [usize; 3] = [60, 60, 60];
pub const DEFAULT_DROPOUT: f64 = 0.2;

/// Gate order used for storage and iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget = 0,
    Input = 1,
    Candidate = 2,
    Output = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Candidate, Gate::Output];

    pub fn name(self) -> &'static str {
        match self {
            Gate::Forget => "forget",
            Gate::Input => "input",
            Gate::Candidate => "candidate",
            Gate::Output => "output",
        }
    }
}

/// Weights of one gate: input matrix, recurrent matrix and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    /// hidden_size × in_size
    pub w: Matrix,
    /// hidden_size × hidden_size
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(in_size: usize, hidden_size: usize) -> Self {
        Self {
            w: Matrix::zeros(hidden_size, in_size),
            u: Matrix::zeros(hidden_size, hidden_size),
            b: vec![0.0; hidden_size],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    in_size: usize,
    hidden_size: usize,
    gates: [GateParams; 4],
}

impl LstmLayerParams {
    pub fn zeros(in_size: usize, hidden_size: usize) -> Self {
        Self {
            in_size,
            hidden_size,
            gates: std::array::from_fn(|_| GateParams::zeros(in_size, hidden_size)),
        }
    }

    /// Build from explicit gate weights, checking every shape.
    pub fn from_gates(in_size: usize, hidden_size: usize, gates: [GateParams; 4]) -> Result<Self> {
        for (gate, p) in Gate::ALL.iter().zip(&gates) {
            let ok = p.w.rows() == hidden_size
                && p.w.cols() == in_size
                && p.u.rows() == hidden_size
                && p.u.cols() == hidden_size
                && p.b.len() == hidden_size;
            if !ok {
                return Err(Error::Shape(format!(
                    "{} gate shapes do not match in_size {in_size}, hidden_size {hidden_size}",
                    gate.name()
                )));
            }
        }
        Ok(Self { in_size, hidden_size, gates })
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn gate(&self, gate: Gate) -> &GateParams {
        &self.gates[gate as usize]
    }

    pub fn gate_mut(&mut self, gate: Gate) -> &mut GateParams {
        &mut self.gates[gate as usize]
    }

    pub fn gates(&self) -> &[GateParams; 4] {
        &self.gates
    }
}

/// Layers plus dense head. Also used as the container for gradients
/// (see [`Gradients`]).
#[derive(Debug, Clone, PartialEq)]
pub struct StackedLstm {
    layers: Vec<LstmLayerParams>,
    head_weights: Vec<f64>,
    head_bias: f64,
    dropout_rate: f64,
}

/// Gradients share the parameter layout; `dropout_rate` is carried along
/// unchanged and ignored.
pub type Gradients = StackedLstm;

impl StackedLstm {
    pub fn new(
        layers: Vec<LstmLayerParams>,
        head_weights: Vec<f64>,
        head_bias: f64,
        dropout_rate: f64,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Config(format!("dropout rate {dropout_rate} is not in [0, 1)")));
        }
        if layers[0].in_size != 1 {
            return Err(Error::Shape(format!("layer 0 must take 1 input, takes {}", layers[0].in_size)));
        }
        for k in 1..layers.len() {
            if layers[k].in_size != layers[k - 1].hidden_size {
                return Err(Error::Shape(format!(
                    "layer {k} takes {} inputs but layer {} emits {}",
                    layers[k].in_size,
                    k - 1,
                    layers[k - 1].hidden_size
                )));
            }
        }
        let top = layers[layers.len() - 1].hidden_size;
        if head_weights.len() != top {
            return Err(Error::Shape(format!("head has {} weights, top layer has {top} units", head_weights.len())));
        }
        Ok(Self { layers, head_weights, head_bias, dropout_rate })
    }

    /// All-zero network with the given layer sizes.
    pub fn zeros(layer_sizes: &[usize], dropout_rate: f64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let layers = layer_sizes
            .iter()
            .enumerate()
            .map(|(k, &h)| LstmLayerParams::zeros(if k == 0 { 1 } else { layer_sizes[k - 1] }, h))
            .collect();
        Self::new(layers, vec![0.0; layer_sizes[layer_sizes.len() - 1]], 0.0, dropout_rate)
    }

    /// Zeros with the same shapes as `self`.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for s in z.param_slices_mut() {
            s.fill(0.0);
        }
        z
    }

    pub fn layers(&self) -> &[LstmLayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LstmLayerParams] {
        &mut self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.hidden_size).collect()
    }

    pub fn head_weights(&self) -> &[f64] {
        &self.head_weights
    }

    pub fn head_weights_mut(&mut self) -> &mut [f64] {
        &mut self.head_weights
    }

    pub fn head_bias(&self) -> f64 {
        self.head_bias
    }

    pub fn set_head_bias(&mut self, b: f64) {
        self.head_bias = b;
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn set_dropout_rate(&mut self, rate: f64) -> Result<()> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate {rate} is not in [0, 1)")));
        }
        self.dropout_rate = rate;
        Ok(())
    }

    /// Every trainable parameter as a list of slices, in a fixed order:
    /// per layer, per gate `W`, `U`, `b`; then head weights; then head bias.
    pub fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 12 + 2);
        for layer in &self.layers {
            for g in &layer.gates {
                out.push(g.w.as_slice());
                out.push(g.u.as_slice());
                out.push(g.b.as_slice());
            }
        }
        out.push(self.head_weights.as_slice());
        out.push(std::slice::from_ref(&self.head_bias));
        out
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 12 + 2);
        for layer in &mut self.layers {
            for g in &mut layer.gates {
                out.push(g.w.as_mut_slice());
                out.push(g.u.as_mut_slice());
                out.push(g.b.as_mut_slice());
            }
        }
        out.push(self.head_weights.as_mut_slice());
        out.push(std::slice::from_mut(&mut self.head_bias));
        out
    }

    pub fn num_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// `self += scale * other`, elementwise over matching layouts.
    pub fn add_scaled(&mut self, other: &StackedLstm, scale: f64) {
        for (dst, src) in self.param_slices_mut().into_iter().zip(other.param_slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for s in self.param_slices_mut() {
            for v in s.iter_mut() {
                *v *= k;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.param_slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// Euclidean norm over all parameters.
    pub fn l2_norm(&self) -> f64 {
        self.param_slices().iter().flat_map(|s| s.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.is_empty() {
        return Err(Error::Config("at least one layer size is required".into()));
    }
    if let Some(k) = layer_sizes.iter().position(|&s| s == 0) {
        return Err(Error::Config(format!("layer {k} has zero units")));
    }
    Ok(())
}

/// Glorot-uniform bound for a `fan_out × fan_in` matrix.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Randomly initialized network.
///
/// `W` and `U` are drawn from `U[-L, L]`, `L = sqrt(6 / (fan_in + fan_out))`
/// per matrix; biases are zero except the forget gate, which starts at 1.
/// The head uses the same uniform rule with `fan_out = 1`.
pub fn init_network(layer_sizes: &[usize], dropout_rate: f64, seed: u64) -> Result<StackedLstm> {
    let mut net = StackedLstm::zeros(layer_sizes, dropout_rate)?;
    let mut rng = rng::substream(seed, 0);
    for layer in &mut net.layers {
        let (n_in, n_h) = (layer.in_size, layer.hidden_size);
        for (gate, p) in Gate::ALL.iter().zip(&mut layer.gates) {
            let lw = glorot_limit(n_in, n_h);
            p.w.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-lw..=lw));
            let lu = glorot_limit(n_h, n_h);
            p.u.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-lu..=lu));
            if *gate == Gate::Forget {
                p.b.fill(1.0);
            }
        }
    }
    let lh = glorot_limit(net.head_weights.len(), 1);
    net.head_weights.iter_mut().for_each(|v| *v = rng.random_range(-lh..=lh));
    Ok(net)
}
