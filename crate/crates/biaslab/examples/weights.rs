//! Turn an undirected graph into a symmetric listening network.

use biaslab::builders::{max_degree_weights, metropolis_hastings_weights, SimpleGraph};
use biaslab::spectral::spectrum;

fn main() -> biaslab::Result<()> {
    let g = SimpleGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4)])?;
    for (name, net) in [("max degree", max_degree_weights(&g)?), ("metropolis-hastings", metropolis_hastings_weights(&g)?)] {
        let s = spectrum(&net)?;
        println!("{name}: slem {:.4}\n{}", s.slem, biaslab::io::to_text(&net));
    }
    Ok(())
}
