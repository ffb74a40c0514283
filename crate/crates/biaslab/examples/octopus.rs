//! A network that reaches the average belief even under strong bias.

use biaslab::bias::BiasSpec;
use biaslab::builders::octopus_layout;
use biaslab::learn::run;

fn main() -> biaslab::Result<()> {
    let x0 = [0.05, 0.2, 0.35, 0.5, 0.6, 0.8, 0.95];
    let q = 0.7;
    let layout = octopus_layout(&x0, q)?;
    println!("mean {:.4}, center {:?}, layers {:?}", layout.truth, layout.center, layout.layers);
    let tr = run(&layout.network, &x0, Some(&BiasSpec::core(q)), 1e-12, 1000)?;
    println!("consensus {:?} after {:?} periods (depth {})", tr.consensus_value, tr.belief_convergence_time, layout.depth());
    Ok(())
}
