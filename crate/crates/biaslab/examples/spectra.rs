//! Influence vectors, eigenvalues and convergence-time bounds.

use biaslab::bias::apply_core_bias;
use biaslab::metrics::wisdom_index;
use biaslab::spectral::{average_convergence_time, consensus_time_bounds, spectrum, worst_case_consensus_time};
use biaslab::ListeningNetwork;

fn main() -> biaslab::Result<()> {
    let t = ListeningNetwork::new(vec![
        vec![0.0, 0.55, 0.25, 0.2],
        vec![0.8, 0.0, 0.2, 0.0],
        vec![0.0, 0.7, 0.0, 0.3],
        vec![0.7, 0.0, 0.3, 0.0],
    ])?;
    let x0 = [0.2, 0.5, 0.75, 0.9];
    let star = apply_core_bias(&t, &x0, 0.6)?;
    for (name, net) in [("before", &t), ("after", &star)] {
        let s = spectrum(net)?;
        println!("{name:>6}: influence {:.4?}, slem {:.4}, wisdom index {:.3}", s.influence, s.slem, wisdom_index(&s));
    }

    let sym = ListeningNetwork::new(vec![vec![0.6, 0.3, 0.1], vec![0.3, 0.5, 0.2], vec![0.1, 0.2, 0.7]])?;
    let (lo, hi) = consensus_time_bounds(&sym, 0.01)?;
    println!(
        "symmetric: average time {}, worst case {} within [{lo}, {hi}]",
        average_convergence_time(&sym, 0.01)?,
        worst_case_consensus_time(&sym, 0.01)?
    );
    Ok(())
}
