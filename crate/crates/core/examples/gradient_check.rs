//! Compare analytic BPTT gradients with central finite differences on a
//! small random network.

use oilcast::lstm::{backward_sequence, forward_sequence, gradient_check, init_network, Mode};

fn main() -> oilcast::Result<()> {
    let net = init_network(&[6, 4], 0.0, 11)?;
    let window: Vec<f64> = (0..10).map(|t| (t as f64 * 0.4).sin() * 0.5 + 0.5).collect();
    let target = 0.3;

    let (prediction, cache) = forward_sequence(&window, &net, Mode::Train { seed: 0 })?;
    let grads = backward_sequence(&cache.expect("train mode keeps a cache"), &net, 2.0 * (prediction - target))?;
    println!("{} parameters, prediction {prediction:.6}, gradient norm {:.6}", net.num_params(), grads.l2_norm());

    for step in [1e-3, 1e-4, 1e-5, 1e-6] {
        println!("fd step {step:e}: max relative error {:.3e}", gradient_check(&net, &window, target, step)?);
    }
    Ok(())
}
