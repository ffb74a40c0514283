//! A small paired sweep: convergence time with and without bias.

use biaslab::simlab::{run_experiment, write_outputs, Scale, ScenarioConfig};

fn main() -> biaslab::Result<()> {
    let mut cfg = ScenarioConfig::set1(Scale::Desk, 11);
    cfg.n_networks = 10;
    cfg.n_assignments = 5;
    let out = run_experiment(&cfg, None)?;
    let s = &out.summary;
    println!("runs: {}", s.runs);
    println!("mean time without bias {:?}, with bias {:?}", s.no_bias.mean, s.bias.mean);
    if let Some(t) = &s.paired_test {
        println!("paired t = {:.2}, p = {:.2e}", t.t_statistic, t.p_value);
    }
    let dir = std::env::temp_dir().join("biaslab-sweep-example");
    write_outputs(&dir, &out)?;
    println!("wrote {}", dir.display());
    Ok(())
}
