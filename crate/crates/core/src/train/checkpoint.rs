//! Versioned text checkpoint.
//!
//! One `key value...` record per line, in a fixed order:
//!
//! ```text
//! oilcast-checkpoint 1
//! config.epochs 50
//! ...
//! scaler.min 3.2e0
//! scaler.max 4.4e0
//! network.layers 3
//! network.dropout_rate 2e-1
//! layer.0.shape 1 60
//! layer.0.forget.w 6.1e-2 -1.3e-1 ...
//! ...
//! head.weights ...
//! head.bias 0e0
//! end
//! ```
//!
//! Floats use Rust's shortest round-trip `{:e}` form, so loading a saved
//! checkpoint reproduces every parameter bit for bit. The trailing `end`
//! record makes truncation detectable.

use std::fmt::Write as _;

use super::{Forecaster, ScalerFit, TrainConfig};
use crate::error::{Error, Result};
use crate::lstm::{Gate, GateParams, LstmLayerParams, Matrix, StackedLstm};
use crate::preprocess::Scaler;

pub const CHECKPOINT_MAGIC: &str = "oilcast-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Forecaster,
    pub scaler: Scaler,
    pub config: TrainConfig,
}

fn floats(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {v:e}");
    }
}

pub fn save_checkpoint(model: &Forecaster, scaler: &Scaler, config: &TrainConfig) -> Vec<u8> {
    let mut s = String::new();
    let _ = writeln!(s, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}");

    let c = config;
    let _ = writeln!(s, "config.epochs {}", c.epochs);
    let _ = writeln!(s, "config.batch_size {}", c.batch_size);
    let _ = writeln!(s, "config.learning_rate {:e}", c.learning_rate);
    let _ = writeln!(s, "config.adam_beta1 {:e}", c.adam_beta1);
    let _ = writeln!(s, "config.adam_beta2 {:e}", c.adam_beta2);
    let _ = writeln!(s, "config.adam_epsilon {:e}", c.adam_epsilon);
    let _ = writeln!(s, "config.plateau_factor {:e}", c.plateau_factor);
    let _ = writeln!(s, "config.plateau_patience {}", c.plateau_patience);
    let _ = writeln!(s, "config.plateau_min_delta {:e}", c.plateau_min_delta);
    let _ = writeln!(s, "config.min_learning_rate {:e}", c.min_learning_rate);
    let _ = writeln!(s, "config.window_len {}", c.window_len);
    let sizes: Vec<String> = c.layer_sizes.iter().map(usize::to_string).collect();
    let _ = writeln!(s, "config.layer_sizes {}", sizes.join(","));
    let _ = writeln!(s, "config.dropout_rate {:e}", c.dropout_rate);
    let _ = writeln!(s, "config.seed {}", c.seed);
    match c.clip_norm {
        Some(v) => {
            let _ = writeln!(s, "config.clip_norm {v:e}");
        }
        None => s.push_str("config.clip_norm none\n"),
    }
    let _ = writeln!(s, "config.train_fraction {:e}", c.train_fraction);
    let _ = writeln!(s, "config.validation_fraction {:e}", c.validation_fraction);
    let _ = writeln!(s, "config.log_transform {}", c.log_transform);
    let _ = writeln!(s, "config.scaler_fit {}", c.scaler_fit.as_str());

    let _ = writeln!(s, "scaler.min {:e}", scaler.min());
    let _ = writeln!(s, "scaler.max {:e}", scaler.max());

    let net = &model.net;
    let _ = writeln!(s, "model.window_len {}", model.window_len);
    let _ = writeln!(s, "network.layers {}", net.layers().len());
    let _ = writeln!(s, "network.dropout_rate {:e}", net.dropout_rate());
    for (k, layer) in net.layers().iter().enumerate() {
        let _ = writeln!(s, "layer.{k}.shape {} {}", layer.in_size(), layer.hidden_size());
        for gate in Gate::ALL {
            let p = layer.gate(gate);
            for (part, values) in [("w", p.w.as_slice()), ("u", p.u.as_slice()), ("b", p.b.as_slice())] {
                let _ = write!(s, "layer.{k}.{}.{part}", gate.name());
                floats(&mut s, values);
                s.push('\n');
            }
        }
    }
    s.push_str("head.weights");
    floats(&mut s, net.head_weights());
    s.push('\n');
    let _ = writeln!(s, "head.bias {:e}", net.head_bias());
    s.push_str("end\n");
    s.into_bytes()
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err<T>(&self, offset: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Checkpoint { offset, msg: msg.into() })
    }

    /// Next line, with its starting byte offset.
    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        if start >= self.text.len() {
            return self.err(start, "unexpected end of checkpoint");
        }
        let rest = &self.text[start..];
        match rest.find('\n') {
            Some(n) => {
                self.pos = start + n + 1;
                Ok((start, &rest[..n]))
            }
            None => self.err(self.text.len(), "unexpected end of checkpoint (unterminated line)"),
        }
    }

    /// Next record, which must carry `key`; returns the value fields.
    fn record(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (offset, line) = self.line()?;
        let mut fields = line.split(' ');
        let found = fields.next().unwrap_or("");
        if found != key {
            return self.err(offset, format!("expected `{key}`, found `{found}`"));
        }
        Ok((offset, fields.collect()))
    }

    fn single(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (offset, fields) = self.record(key)?;
        if fields.len() != 1 {
            return self.err(offset, format!("`{key}` takes one value, found {}", fields.len()));
        }
        Ok((offset, fields[0]))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (offset, v) = self.single(key)?;
        v.parse().or_else(|_| self.err(offset, format!("bad value `{v}` for `{key}`")))
    }

    fn floats(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let (offset, fields) = self.record(key)?;
        if fields.len() != expected {
            return self.err(offset, format!("`{key}` needs {expected} values, found {}", fields.len()));
        }
        fields
            .iter()
            .map(|f| f.parse::<f64>().or_else(|_| self.err(offset, format!("bad float `{f}` in `{key}`"))))
            .collect()
    }
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Checkpoint { offset: e.valid_up_to(), msg: "checkpoint is not UTF-8".into() })?;
    let mut r = Reader { text, pos: 0 };

    let (offset, header) = r.line()?;
    let version = match header.split_once(' ') {
        Some((magic, v)) if magic == CHECKPOINT_MAGIC => v,
        _ => return r.err(offset, "not an oilcast checkpoint"),
    };
    if version != CHECKPOINT_VERSION.to_string() {
        return Err(Error::Version { found: version.to_string(), expected: CHECKPOINT_VERSION });
    }

    let epochs = r.parse("config.epochs")?;
    let batch_size = r.parse("config.batch_size")?;
    let learning_rate = r.parse("config.learning_rate")?;
    let adam_beta1 = r.parse("config.adam_beta1")?;
    let adam_beta2 = r.parse("config.adam_beta2")?;
    let adam_epsilon = r.parse("config.adam_epsilon")?;
    let plateau_factor = r.parse("config.plateau_factor")?;
    let plateau_patience = r.parse("config.plateau_patience")?;
    let plateau_min_delta = r.parse("config.plateau_min_delta")?;
    let min_learning_rate = r.parse("config.min_learning_rate")?;
    let window_len = r.parse("config.window_len")?;
    let (offset, sizes) = r.single("config.layer_sizes")?;
    let layer_sizes = sizes
        .split(',')
        .map(str::parse)
        .collect::<std::result::Result<Vec<usize>, _>>()
        .or_else(|_| r.err(offset, format!("bad layer sizes `{sizes}`")))?;
    let dropout_rate = r.parse("config.dropout_rate")?;
    let seed = r.parse("config.seed")?;
    let (offset, clip) = r.single("config.clip_norm")?;
    let clip_norm = match clip {
        "none" => None,
        v => Some(v.parse().or_else(|_| r.err(offset, format!("bad clip norm `{v}`")))?),
    };
    let train_fraction = r.parse("config.train_fraction")?;
    let validation_fraction = r.parse("config.validation_fraction")?;
    let log_transform = r.parse("config.log_transform")?;
    let (offset, fit) = r.single("config.scaler_fit")?;
    let scaler_fit = ScalerFit::parse(fit).map_or_else(|| r.err(offset, format!("bad scaler fit `{fit}`")), Ok)?;
    let config = TrainConfig {
        epochs,
        batch_size,
        learning_rate,
        adam_beta1,
        adam_beta2,
        adam_epsilon,
        plateau_factor,
        plateau_patience,
        plateau_min_delta,
        min_learning_rate,
        window_len,
        layer_sizes,
        dropout_rate,
        seed,
        clip_norm,
        train_fraction,
        validation_fraction,
        log_transform,
        scaler_fit,
    };

    let scaler_offset = r.pos;
    let min = r.parse("scaler.min")?;
    let max = r.parse("scaler.max")?;
    let scaler = Scaler::new(min, max).or_else(|e| r.err(scaler_offset, e.to_string()))?;

    let model_window = r.parse("model.window_len")?;
    let net_offset = r.pos;
    let layer_count: usize = r.parse("network.layers")?;
    let net_dropout = r.parse("network.dropout_rate")?;
    let mut layers = Vec::with_capacity(layer_count);
    for k in 0..layer_count {
        let (offset, shape) = r.record(&format!("layer.{k}.shape"))?;
        let dims: Vec<usize> = shape.iter().filter_map(|f| f.parse().ok()).collect();
        if dims.len() != 2 || shape.len() != 2 {
            return r.err(offset, format!("bad shape for layer {k}"));
        }
        let (n_in, n_h) = (dims[0], dims[1]);
        let mut gates = Vec::with_capacity(4);
        for gate in Gate::ALL {
            let name = gate.name();
            let w = r.floats(&format!("layer.{k}.{name}.w"), n_h * n_in)?;
            let u = r.floats(&format!("layer.{k}.{name}.u"), n_h * n_h)?;
            let b = r.floats(&format!("layer.{k}.{name}.b"), n_h)?;
            gates.push(GateParams { w: Matrix::from_vec(n_h, n_in, w), u: Matrix::from_vec(n_h, n_h, u), b });
        }
        let gates: [GateParams; 4] = gates.try_into().expect("four gates");
        layers.push(LstmLayerParams::from_gates(n_in, n_h, gates).or_else(|e| r.err(offset, e.to_string()))?);
    }
    let top = layers.last().map_or(0, LstmLayerParams::hidden_size);
    let head_weights = r.floats("head.weights", top)?;
    let head_bias = r.parse("head.bias")?;
    r.record("end")?;
    let net = StackedLstm::new(layers, head_weights, head_bias, net_dropout).or_else(|e| r.err(net_offset, e.to_string()))?;

    Ok(Checkpoint { model: Forecaster::new(net, model_window), scaler, config })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::init_network;

    fn sample() -> (Forecaster, Scaler, TrainConfig) {
        let config = TrainConfig {
            layer_sizes: vec![3, 2],
            window_len: 5,
            clip_norm: Some(0.5),
            seed: 12345,
            ..TrainConfig::default()
        };
        let mut net = init_network(&config.layer_sizes, config.dropout_rate, 3).unwrap();
        net.set_head_bias(-0.0);
        net.head_weights_mut()[0] = 1.0 / 3.0;
        (Forecaster::new(net, 5), Scaler::new(3.8, 4.5).unwrap(), config)
    }

    fn bits(n: &StackedLstm) -> Vec<u64> {
        n.param_slices().iter().flat_map(|s| s.iter().map(|v| v.to_bits())).collect()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (model, scaler, config) = sample();
        let bytes = save_checkpoint(&model, &scaler, &config);
        let ck = load_checkpoint(&bytes).unwrap();
        assert_eq!(bits(&ck.model.net), bits(&model.net));
        assert_eq!(ck.model, model);
        assert_eq!(ck.scaler.min().to_bits(), scaler.min().to_bits());
        assert_eq!(ck.scaler.max().to_bits(), scaler.max().to_bits());
        assert_eq!(ck.config, config);
        assert_eq!(save_checkpoint(&ck.model, &ck.scaler, &ck.config), bytes);
    }

    #[test]
    fn truncation_is_detected_at_every_cut() {
        let (model, scaler, config) = sample();
        let bytes = save_checkpoint(&model, &scaler, &config);
        for cut in (0..bytes.len() - 1).step_by(7) {
            match load_checkpoint(&bytes[..cut]) {
                Err(Error::Checkpoint { offset, .. }) => assert!(offset <= cut),
                other => panic!("cut at {cut}: {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_version_and_magic() {
        let (model, scaler, config) = sample();
        let text = String::from_utf8(save_checkpoint(&model, &scaler, &config)).unwrap();
        let bumped = text.replacen("oilcast-checkpoint 1", "oilcast-checkpoint 7", 1);
        assert!(matches!(load_checkpoint(bumped.as_bytes()), Err(Error::Version { .. })));
        assert!(matches!(load_checkpoint(b"something else\n"), Err(Error::Checkpoint { offset: 0, .. })));
    }

    #[test]
    fn corrupt_value_reports_line_offset() {
        let (model, scaler, config) = sample();
        let text = String::from_utf8(save_checkpoint(&model, &scaler, &config)).unwrap();
        let bad = text.replacen("config.seed 12345", "config.seed x", 1);
        let line_start = bad.find("config.seed").unwrap();
        match load_checkpoint(bad.as_bytes()) {
            Err(Error::Checkpoint { offset, .. }) => assert_eq!(offset, line_start),
            other => panic!("{other:?}"),
        }
    }
}
