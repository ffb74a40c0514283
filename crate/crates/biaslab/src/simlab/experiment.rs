use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::config::{BeliefSource, NetworkSource, ScenarioConfig};
use crate::bias::BiasSpec;
use crate::builders::{generate_meeting_network, GeneratorParams};
use crate::error::{Error, Result};
use crate::io::read_network;
use crate::learn::{simulate, SimOptions};
use crate::metrics::{information_loss, polarization, BeliefBuckets, ElectionTracker, Winner};
use crate::network::ListeningNetwork;
use crate::seeds;

pub const ARMS: [&str; 2] = ["no_bias", "bias"];

/// One arm of a paired run, observed on periods 0..=horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmRecord {
    pub convergence_time: Option<usize>,
    /// Mean belief at the end of the run, when the arm converged.
    pub consensus: Option<f64>,
    pub polarization: Vec<f64>,
    pub winners: Vec<Winner>,
    pub in_scope: bool,
    pub shock_times: Vec<usize>,
    pub tie_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub network_id: usize,
    pub assignment_id: usize,
    pub q: f64,
    pub seed: u64,
    pub horizon: usize,
    pub information_loss: usize,
    pub no_bias: ArmRecord,
    pub bias: ArmRecord,
}

impl RunRecord {
    pub fn arm(&self, k: usize) -> &ArmRecord {
        if k == 0 {
            &self.no_bias
        } else {
            &self.bias
        }
    }

    pub fn consensus_delta(&self) -> Option<f64> {
        Some(self.bias.consensus? - self.no_bias.consensus?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub converged: usize,
    pub unconverged: usize,
    pub mean: Option<f64>,
    pub min: Option<usize>,
    pub max: Option<usize>,
    pub histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedTest {
    pub pairs: usize,
    pub mean_difference: f64,
    pub t_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub no_bias: ArmSummary,
    pub bias: ArmSummary,
    pub faster_with_bias_fraction: f64,
    pub slower_with_bias_fraction: f64,
    /// Bias minus no-bias convergence time over runs where both converged.
    pub paired_test: Option<PairedTest>,
    /// Per-period mean polarization by arm; runs shorter than the longest
    /// horizon carry their last value forward.
    pub polarization: BTreeMap<&'static str, Vec<f64>>,
    /// Per-period share of all runs with a shock at that period.
    pub shock_fraction: BTreeMap<&'static str, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

/// Runs every (network, assignment) pair with and without bias on the same
/// network and beliefs. Results depend on the master seed only.
pub fn run_experiment(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Error::ConfigInvalid(format!("thread pool: {e}")))?;
    let shared = match &cfg.network {
        NetworkSource::File { path } => Some(read_network(path)?),
        NetworkSource::Generator(_) => None,
    };
    let mut records = pool.install(|| {
        (0..cfg.n_networks)
            .into_par_iter()
            .map(|net_id| -> Result<Vec<RunRecord>> {
                let net = match (&shared, &cfg.network) {
                    (Some(net), _) => net.clone(),
                    (None, NetworkSource::Generator(p)) => generate_meeting_network(&GeneratorParams {
                        seed: seeds::derive(cfg.master_seed, &[seeds::tag("network"), net_id as u64]),
                        ..p.clone()
                    })?,
                    _ => unreachable!(),
                };
                (0..cfg.n_assignments).into_par_iter().map(|a| run_pair(cfg, &net, net_id, a)).collect()
            })
            .collect::<Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect::<Vec<_>>();
    records.sort_by_key(|r| (r.network_id, r.assignment_id));
    let summary = summarize(&records);
    Ok(ExperimentOutput { records, summary })
}

pub fn draw_beliefs<R: Rng>(source: BeliefSource, n: usize, rng: &mut R) -> Vec<f64> {
    match source {
        BeliefSource::Uniform01 => (0..n).map(|_| rng.random::<f64>()).collect(),
        BeliefSource::Buckets => BeliefBuckets::sample(rng).assign(n, rng),
    }
}

fn run_pair(cfg: &ScenarioConfig, net: &ListeningNetwork, network_id: usize, assignment_id: usize) -> Result<RunRecord> {
    let seed = seeds::derive(cfg.master_seed, &[seeds::tag("run"), network_id as u64, assignment_id as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = cfg.q.draw(&mut rng);
    let x0 = draw_beliefs(cfg.beliefs, net.n(), &mut rng);
    let spec = cfg.bias.with_q(q);

    let probe = SimOptions { eps: cfg.eps, t_max: cfg.t_max, min_periods: 0, stop_when_unreachable: true };
    let tau = simulate(net, &x0, None, &probe, None, |_, _| {})?.convergence_time;
    let horizon = tau.map_or(cfg.t_max, |t| t + cfg.election_extra_periods).min(cfg.t_max);

    let fixed = SimOptions { eps: cfg.eps, t_max: horizon, min_periods: horizon, stop_when_unreachable: false };
    let (no_bias, _) = run_arm(cfg, net, &x0, None, &fixed, horizon, seeds::derive(seed, &[0]))?;
    let open = SimOptions { eps: cfg.eps, t_max: cfg.t_max, min_periods: horizon, stop_when_unreachable: true };
    let (bias, rewired) = run_arm(cfg, net, &x0, Some(&spec), &open, horizon, seeds::derive(seed, &[1]))?;
    Ok(RunRecord {
        network_id,
        assignment_id,
        q,
        seed,
        horizon,
        information_loss: information_loss(net, &rewired)?,
        no_bias,
        bias,
    })
}

fn run_arm(
    cfg: &ScenarioConfig,
    net: &ListeningNetwork,
    x0: &[f64],
    spec: Option<&BiasSpec>,
    opts: &SimOptions,
    horizon: usize,
    tie_seed: u64,
) -> Result<(ArmRecord, ListeningNetwork)> {
    let mut tracker = ElectionTracker::new(tie_seed, cfg.swing_rule);
    let mut pol = Vec::with_capacity(horizon + 1);
    let out = simulate(net, x0, spec, opts, None, |t, x| {
        if t <= horizon {
            pol.push(polarization(x));
            tracker.observe(x);
        }
    })?;
    let election = tracker.finish();
    let consensus = out.convergence_time.map(|_| out.last.iter().sum::<f64>() / out.last.len() as f64);
    let arm = ArmRecord {
        convergence_time: out.convergence_time,
        consensus,
        polarization: pol,
        winners: election.tallies.iter().map(|t| t.winner).collect(),
        in_scope: election.in_scope,
        shock_times: election.shock_times,
        tie_seed,
    };
    Ok((arm, out.network))
}

fn arm_summary(times: impl Iterator<Item = Option<usize>>) -> ArmSummary {
    let mut s = ArmSummary { converged: 0, unconverged: 0, mean: None, min: None, max: None, histogram: BTreeMap::new() };
    let mut total = 0usize;
    for t in times {
        match t {
            Some(t) => {
                s.converged += 1;
                total += t;
                *s.histogram.entry(t).or_default() += 1;
            }
            None => s.unconverged += 1,
        }
    }
    if s.converged > 0 {
        s.mean = Some(total as f64 / s.converged as f64);
        s.min = s.histogram.keys().next().copied();
        s.max = s.histogram.keys().next_back().copied();
    }
    s
}

pub fn paired_t_test(diffs: &[f64]) -> Option<PairedTest> {
    let n = diffs.len();
    if n < 2 {
        return None;
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let (t, p) = if se == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / se;
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
        (t, 2.0 * dist.sf(t.abs()))
    };
    Some(PairedTest { pairs: n, mean_difference: mean, t_statistic: t, p_value: p })
}

/// A pure fold over records sorted by (network_id, assignment_id).
pub fn summarize(records: &[RunRecord]) -> Summary {
    let runs = records.len();
    let frac = |k: usize| if runs == 0 { 0.0 } else { k as f64 / runs as f64 };
    let mut faster = 0;
    let mut slower = 0;
    let mut diffs = Vec::new();
    for r in records {
        if let (Some(a), Some(b)) = (r.no_bias.convergence_time, r.bias.convergence_time) {
            faster += usize::from(b < a);
            slower += usize::from(b > a);
            diffs.push(b as f64 - a as f64);
        }
    }
    let len = records.iter().map(|r| r.horizon + 1).max().unwrap_or(0);
    let mut pol = BTreeMap::new();
    let mut shocks = BTreeMap::new();
    for (k, arm) in ARMS.iter().enumerate() {
        let mut sum = vec![0.0; len];
        let mut count = vec![0usize; len];
        for r in records {
            let p = &r.arm(k).polarization;
            for (t, slot) in sum.iter_mut().enumerate() {
                *slot += p.get(t).or(p.last()).copied().unwrap_or(0.0);
            }
            for &t in &r.arm(k).shock_times {
                count[t] += 1;
            }
        }
        pol.insert(*arm, sum.into_iter().map(|s| s / runs.max(1) as f64).collect());
        shocks.insert(*arm, count.into_iter().map(frac).collect());
    }
    Summary {
        runs,
        no_bias: arm_summary(records.iter().map(|r| r.no_bias.convergence_time)),
        bias: arm_summary(records.iter().map(|r| r.bias.convergence_time)),
        faster_with_bias_fraction: frac(faster),
        slower_with_bias_fraction: frac(slower),
        paired_test: paired_t_test(&diffs),
        polarization: pol,
        shock_fraction: shocks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::complete_uniform;
    use crate::simlab::config::{QSource, Scale};

    fn tiny(seed: u64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::set1(Scale::Desk, seed);
        cfg.network = NetworkSource::Generator(GeneratorParams { n: 60, m0: 10, m_r: 5, m_n: 5, ..Default::default() });
        cfg.n_networks = 3;
        cfg.n_assignments = 4;
        cfg
    }

    #[test]
    fn paired_arms_share_inputs() {
        let out = run_experiment(&tiny(5), Some(2)).unwrap();
        assert_eq!(out.records.len(), 12);
        for r in &out.records {
            assert_eq!(r.no_bias.polarization[0], r.bias.polarization[0]);
            assert_eq!(r.no_bias.polarization.len(), r.horizon + 1);
            assert_eq!(r.bias.winners.len(), r.horizon + 1);
            assert!((0.05..0.15).contains(&r.q));
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let a = run_experiment(&tiny(11), Some(1)).unwrap();
        let b = run_experiment(&tiny(11), Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_bias_arms_coincide() {
        let mut cfg = tiny(2);
        cfg.q = QSource::Fixed { q: 0.0 };
        let out = run_experiment(&cfg, None).unwrap();
        for r in &out.records {
            assert_eq!(r.no_bias.convergence_time, r.bias.convergence_time);
            assert_eq!(r.no_bias.polarization, r.bias.polarization);
            assert_eq!(r.information_loss, 0);
        }
        assert_eq!(out.summary.faster_with_bias_fraction, 0.0);
    }

    #[test]
    fn summary_counts() {
        let out = run_experiment(&tiny(8), None).unwrap();
        let s = &out.summary;
        assert_eq!(s.no_bias.converged + s.no_bias.unconverged, 12);
        assert_eq!(s.no_bias.histogram.values().sum::<usize>(), s.no_bias.converged);
        assert!(s.no_bias.min <= s.no_bias.max);
        assert_eq!(s.polarization["bias"].len(), out.records.iter().map(|r| r.horizon + 1).max().unwrap());
    }

    #[test]
    fn t_test_known_values() {
        let p = paired_t_test(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        // mean 2.5, sd sqrt(5/3), t = 2.5 / (sd / 2) = 3.873
        assert!((p.t_statistic - 3.872983346207417).abs() < 1e-12);
        assert!((p.p_value - 0.030466).abs() < 1e-5);
        assert_eq!(paired_t_test(&[0.0, 0.0]).unwrap().p_value, 1.0);
    }

    #[test]
    fn fixed_network_source() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.txt");
        crate::io::write_network(&path, &complete_uniform(5, None).unwrap(), false).unwrap();
        let mut cfg = tiny(1);
        cfg.network = NetworkSource::File { path };
        cfg.n_networks = 2;
        let out = run_experiment(&cfg, None).unwrap();
        assert!(out.records.iter().all(|r| r.no_bias.convergence_time == Some(1)));
    }
}
