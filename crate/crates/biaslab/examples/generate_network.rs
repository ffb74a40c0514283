//! Grow a meeting-based network and look at its degree profile.

use biaslab::builders::{generate_meeting_network, GeneratorParams};
use biaslab::io;

fn main() -> biaslab::Result<()> {
    let params = GeneratorParams { n: 200, m0: 20, m_r: 10, m_n: 10, ..GeneratorParams::with_n(200, 7) };
    let net = generate_meeting_network(&params)?;
    let deg = net.degrees(false);
    let mean_out = deg.out_degree.iter().sum::<usize>() as f64 / net.n() as f64;
    println!("agents: {}", net.n());
    println!("strongly connected: {}, aperiodic: {}", net.is_strongly_connected(), net.is_aperiodic());
    println!("mean out-degree: {mean_out:.2}, max in-degree: {}", deg.in_degree.iter().max().unwrap());
    let path = std::env::temp_dir().join("biaslab-network.txt");
    io::write_network(&path, &net, false)?;
    println!("agent 0 listens to {:?}", net.out_neighbors(0).collect::<Vec<_>>());
    println!("wrote {}", path.display());
    Ok(())
}
