//! Central finite-difference verification of the analytic BPTT gradients.

use super::network::{backward_sequence, forward_sequence, Mode};
use super::{Gradients, StackedLstm};
use crate::error::{Error, Result};

const REL_FLOOR: f64 = 1e-8;

fn squared_error(net: &StackedLstm, window: &[f64], target: f64) -> Result<f64> {
    let (p, _) = forward_sequence(window, net, Mode::Infer)?;
    Ok((p - target) * (p - target))
}

/// `(L(θ + h·e_k) − L(θ − h·e_k)) / 2h` for every parameter `k`, with
/// `L = (prediction − target)²`.
pub fn numeric_gradients(net: &StackedLstm, window: &[f64], target: f64, fd_step: f64) -> Result<Gradients> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::Usage(format!("finite-difference step must be positive, got {fd_step}")));
    }
    let mut probe = net.clone();
    let mut out = net.zeros_like();
    let counts: Vec<usize> = net.param_slices().iter().map(|s| s.len()).collect();
    for (slice_idx, &count) in counts.iter().enumerate() {
        for k in 0..count {
            let original = probe.param_slices()[slice_idx][k];
            probe.param_slices_mut()[slice_idx][k] = original + fd_step;
            let plus = squared_error(&probe, window, target)?;
            probe.param_slices_mut()[slice_idx][k] = original - fd_step;
            let minus = squared_error(&probe, window, target)?;
            probe.param_slices_mut()[slice_idx][k] = original;
            out.param_slices_mut()[slice_idx][k] = (plus - minus) / (2.0 * fd_step);
        }
    }
    Ok(out)
}

/// Largest `|analytic − numeric| / max(|analytic|, |numeric|, 1e-8)` over all
/// parameters, for the squared-error loss on one window.
pub fn gradient_check(net: &StackedLstm, window: &[f64], target: f64, fd_step: f64) -> Result<f64> {
    if net.dropout_rate() != 0.0 {
        return Err(Error::Usage("gradient check requires dropout rate 0".into()));
    }
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::Usage(format!("finite-difference step must be positive, got {fd_step}")));
    }
    let (pred, cache) = forward_sequence(window, net, Mode::Train { seed: 0 })?;
    let cache = cache.expect("train mode returns a cache");
    let analytic = backward_sequence(&cache, net, 2.0 * (pred - target))?;
    let numeric = numeric_gradients(net, window, target, fd_step)?;

    let mut worst = 0.0_f64;
    for (a, n) in analytic.param_slices().iter().zip(numeric.param_slices()) {
        for (&x, &y) in a.iter().zip(n) {
            let rel = (x - y).abs() / x.abs().max(y.abs()).max(REL_FLOOR);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
