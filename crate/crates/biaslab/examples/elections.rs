//! Majority votes along a learning path and the shock elections bias causes.

use biaslab::bias::BiasSpec;
use biaslab::builders::complete_uniform;
use biaslab::learn::run;
use biaslab::metrics::{detect_shock, BeliefBuckets, SwingRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> biaslab::Result<()> {
    let net = complete_uniform(5, Some(&[0.35, 0.1, 0.2, 0.25, 0.1]))?;
    let x0 = [0.15, 0.3, 0.5, 0.65, 0.75];
    let biased = run(&net, &x0, Some(&BiasSpec::core(0.78)), 1e-9, 10_000)?;
    let record = detect_shock(&biased, 1, SwingRule::CountsLeft);
    println!("in scope: {}, shock periods: {:?}", record.in_scope, record.shock_times);
    let mut table = Vec::new();
    record.write_csv(&mut table)?;
    let text = String::from_utf8(table).expect("csv is utf-8");
    for line in text.lines().take(5) {
        println!("{line}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let buckets = BeliefBuckets::sample(&mut rng);
    println!("bucket shares {:.3?}, mean {:.3}", buckets.fractions, buckets.mean());
    println!("first beliefs: {:?}", &buckets.assign(20, &mut rng)[..6]);
    Ok(())
}
