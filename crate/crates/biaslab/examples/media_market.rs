//! Where the most extreme outlet sits as the number of outlets grows.

use biaslab::media::{audience_share, fringe_ideology, Fringe};

fn main() -> biaslab::Result<()> {
    for q in [0.0, 0.5, 0.8] {
        let row: Vec<String> = (1..=6)
            .map(|m| match fringe_ideology(m, q).map(|mk| mk.fringe) {
                Ok(Fringe::Point { value }) => format!("{value:.3}"),
                Ok(Fringe::Interval { lo, hi }) => format!("[{lo:.2},{hi:.2}]"),
                Ok(Fringe::None) => "none".into(),
                Err(e) => e.to_string(),
            })
            .collect();
        println!("q = {q:.1}: {}", row.join("  "));
    }
    println!("shares at (0.25, 0.75), q = 0.6: {:?}", audience_share(&[0.25, 0.75], 0.6)?);
    Ok(())
}
