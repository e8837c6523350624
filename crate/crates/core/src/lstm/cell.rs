use super::{Gate, LstmLayerParams};
use crate::error::{Error, Result};

/// Everything one time step of one layer needs for its backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Advance one layer by one step. Returns the cache; the new state is
/// `cache.h` / `cache.c`.
pub fn cell_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], params: &LstmLayerParams) -> Result<StepCache> {
    let n = params.hidden_size();
    if x.len() != params.in_size() || h_prev.len() != n || c_prev.len() != n {
        return Err(Error::Shape(format!(
            "cell_step expects x[{}], h[{n}], c[{n}]; got x[{}], h[{}], c[{}]",
            params.in_size(),
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }

    let preact = |gate: Gate| {
        let p = params.gate(gate);
        let mut z = p.b.clone();
        p.w.mul_vec_acc(x, &mut z);
        p.u.mul_vec_acc(h_prev, &mut z);
        z
    };
    let forget: Vec<f64> = preact(Gate::Forget).into_iter().map(sigmoid).collect();
    let input: Vec<f64> = preact(Gate::Input).into_iter().map(sigmoid).collect();
    let candidate: Vec<f64> = preact(Gate::Candidate).into_iter().map(f64::tanh).collect();
    let output: Vec<f64> = preact(Gate::Output).into_iter().map(sigmoid).collect();

    let c: Vec<f64> = (0..n).map(|j| forget[j] * c_prev[j] + input[j] * candidate[j]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = (0..n).map(|j| output[j] * tanh_c[j]).collect();

    Ok(StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        forget,
        input,
        candidate,
        output,
        c,
        tanh_c,
        h,
    })
}
