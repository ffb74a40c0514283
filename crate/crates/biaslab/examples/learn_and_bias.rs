//! Run the same society with and without confirmation bias.

use biaslab::bias::{apply_core_bias, BiasSpec};
use biaslab::builders::complete_uniform;
use biaslab::learn::run;

fn main() -> biaslab::Result<()> {
    let net = complete_uniform(5, Some(&[0.35, 0.1, 0.2, 0.25, 0.1]))?;
    let x0 = [0.15, 0.3, 0.5, 0.65, 0.75];

    let biased_net = apply_core_bias(&net, &x0, 0.78)?;
    println!("rewired network:\n{}", biaslab::io::to_text(&biased_net));

    for (label, spec) in [("no bias", None), ("core bias q=0.78", Some(BiasSpec::core(0.78)))] {
        let tr = run(&net, &x0, spec.as_ref(), 1e-9, 10_000)?;
        println!(
            "{label:>18}: converged at t = {:?}, consensus {:?}, x1 = {:.4?}",
            tr.belief_convergence_time,
            tr.consensus_value,
            tr.beliefs(1)
        );
    }

    // Partial cutting: only a fraction of the severed weight is dropped.
    for phi in [0.0, 0.65, 1.0] {
        let tr = run(&net, &x0, Some(&BiasSpec::phi(0.78, phi)), 1e-9, 10_000)?;
        println!("phi = {phi:.2}: converged at t = {:?}", tr.belief_convergence_time);
    }
    Ok(())
}
