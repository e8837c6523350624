use rand::Rng;

use super::cell::{cell_step, StepCache};
use super::matrix::dot;
use super::{Gate, Gradients, StackedLstm};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active, masks drawn from `seed`; a cache is returned.
    Train { seed: u64 },
    /// No dropout, no scaling, no cache.
    Infer,
}

/// Hidden and cell state for every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl LstmState {
    pub fn zeros(net: &StackedLstm) -> Self {
        let sizes = net.layer_sizes();
        Self {
            h: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            c: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// Activations and dropout masks recorded by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `steps[layer][t]`
    steps: Vec<Vec<StepCache>>,
    /// `masks[layer][t]` for lower layers; the top layer holds one mask for
    /// its final hidden state. Entries are `0` or `1 / (1 - rate)`.
    masks: Vec<Vec<Vec<f64>>>,
    /// Dropped-out final hidden state fed to the head.
    head_input: Vec<f64>,
    prediction: f64,
}

impl ForwardCache {
    pub fn steps(&self) -> &[Vec<StepCache>] {
        &self.steps
    }

    pub fn masks(&self) -> &[Vec<Vec<f64>>] {
        &self.masks
    }

    pub fn head_input(&self) -> &[f64] {
        &self.head_input
    }

    pub fn prediction(&self) -> f64 {
        self.prediction
    }

    /// Final state of every layer.
    pub fn final_state(&self) -> LstmState {
        let last = |layer: &Vec<StepCache>| layer[layer.len() - 1].clone();
        LstmState {
            h: self.steps.iter().map(|l| last(l).h).collect(),
            c: self.steps.iter().map(|l| last(l).c).collect(),
        }
    }
}

fn draw_mask<R: Rng>(rng: &mut R, n: usize, rate: f64) -> Vec<f64> {
    if rate == 0.0 {
        return vec![1.0; n];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..n).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect()
}

/// Run a window through the network from zero state.
pub fn forward_sequence(window: &[f64], net: &StackedLstm, mode: Mode) -> Result<(f64, Option<ForwardCache>)> {
    if window.is_empty() {
        return Err(Error::Shape("forward pass needs a non-empty window".into()));
    }
    if let Some(k) = window.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("window value {k} is not finite")));
    }

    let layers = net.layers();
    let top = layers.len() - 1;
    let steps_len = window.len();
    let train_seed = match mode {
        Mode::Train { seed } => Some(seed),
        Mode::Infer => None,
    };

    let mut seq: Vec<Vec<f64>> = window.iter().map(|&v| vec![v]).collect();
    let mut all_steps = Vec::with_capacity(layers.len());
    let mut all_masks = Vec::with_capacity(layers.len());
    let mut head_input = Vec::new();

    for (l, layer) in layers.iter().enumerate() {
        let n = layer.hidden_size();
        let mut h = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut layer_steps = Vec::with_capacity(if train_seed.is_some() { steps_len } else { 0 });
        let mut outputs = Vec::with_capacity(steps_len);
        for x in &seq {
            let step = cell_step(x, &h, &c, layer)?;
            h.clone_from(&step.h);
            c.clone_from(&step.c);
            if l < top {
                outputs.push(step.h.clone());
            }
            if train_seed.is_some() {
                layer_steps.push(step);
            }
        }

        if let Some(seed) = train_seed {
            let mut mask_rng = rng::substream(seed, l as u64);
            let rate = net.dropout_rate();
            let mask_count = if l < top { steps_len } else { 1 };
            let masks: Vec<Vec<f64>> = (0..mask_count).map(|_| draw_mask(&mut mask_rng, n, rate)).collect();
            if l < top {
                for (out, m) in outputs.iter_mut().zip(&masks) {
                    out.iter_mut().zip(m).for_each(|(o, k)| *o *= k);
                }
            } else {
                head_input = h.iter().zip(&masks[0]).map(|(v, k)| v * k).collect();
            }
            all_masks.push(masks);
            all_steps.push(layer_steps);
        } else if l == top {
            head_input = h;
        }
        seq = outputs;
    }

    let prediction = dot(net.head_weights(), &head_input) + net.head_bias();
    let cache = train_seed.map(|_| ForwardCache {
        steps: all_steps,
        masks: all_masks,
        head_input,
        prediction,
    });
    Ok((prediction, cache))
}

/// Exact gradients of the prediction, scaled by `upstream = dLoss/dPrediction`.
pub fn backward_sequence(cache: &ForwardCache, net: &StackedLstm, upstream: f64) -> Result<Gradients> {
    let layers = net.layers();
    if cache.steps.len() != layers.len()
        || cache.steps.iter().zip(layers).any(|(s, l)| s.is_empty() || s[0].h.len() != l.hidden_size())
    {
        return Err(Error::Usage("forward cache does not belong to this network".into()));
    }

    let mut grads = net.zeros_like();
    let top = layers.len() - 1;
    let steps_len = cache.steps[0].len();

    grads.set_head_bias(upstream);
    for (g, x) in grads.head_weights_mut().iter_mut().zip(&cache.head_input) {
        *g = upstream * x;
    }

    // gradient w.r.t. the raw (pre-dropout) hidden output of the current layer
    let n_top = layers[top].hidden_size();
    let mut dh_ext: Vec<Vec<f64>> = vec![vec![0.0; n_top]; steps_len];
    for j in 0..n_top {
        dh_ext[steps_len - 1][j] = upstream * net.head_weights()[j] * cache.masks[top][0][j];
    }

    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let n = layer.hidden_size();
        let mut dh_next = vec![0.0; n];
        let mut dc_next = vec![0.0; n];
        let mut dx_seq = if l > 0 { vec![vec![0.0; layer.in_size()]; steps_len] } else { Vec::new() };
        let mut dz: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);

        for t in (0..steps_len).rev() {
            let s = &cache.steps[l][t];
            for j in 0..n {
                let dh = dh_ext[t][j] + dh_next[j];
                let o = s.output[j];
                let tc = s.tanh_c[j];
                let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
                let (f, i, g) = (s.forget[j], s.input[j], s.candidate[j]);
                dz[Gate::Forget as usize][j] = dc * s.c_prev[j] * f * (1.0 - f);
                dz[Gate::Input as usize][j] = dc * g * i * (1.0 - i);
                dz[Gate::Candidate as usize][j] = dc * i * (1.0 - g * g);
                dz[Gate::Output as usize][j] = dh * tc * o * (1.0 - o);
                dc_next[j] = dc * f;
            }

            dh_next.fill(0.0);
            let glayer = &mut grads.layers_mut()[l];
            for gate in Gate::ALL {
                let d = &dz[gate as usize];
                let gp = glayer.gate_mut(gate);
                gp.w.add_outer(d, &s.x);
                gp.u.add_outer(d, &s.h_prev);
                gp.b.iter_mut().zip(d).for_each(|(b, v)| *b += v);

                let p = layer.gate(gate);
                p.u.tr_mul_vec_acc(d, &mut dh_next);
                if l > 0 {
                    p.w.tr_mul_vec_acc(d, &mut dx_seq[t]);
                }
            }
        }

        if l > 0 {
            let masks = &cache.masks[l - 1];
            for (dx, m) in dx_seq.iter_mut().zip(masks) {
                dx.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
            }
            dh_ext = dx_seq;
        }
    }

    Ok(grads)
}
