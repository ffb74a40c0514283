//! Society-level diagnostics: polarization, mean-field predictions, roles,
//! wisdom, information loss and elections.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::apply_core_bias;
use crate::builders::{circulant, random_regular, regular_network};
use crate::error::{Error, Result};
use crate::learn::Trajectory;
use crate::network::ListeningNetwork;
use crate::seeds;
use crate::spectral::SpectralSummary;
use crate::tol;

/// Cross-sectional variance of beliefs around their current mean.
pub fn polarization(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n
}

/// Closed form x_it = (1 - k_i^t) mu + k_i^t x_i0, where k_i is agent i's
/// self-weight in excess of its average weight on others. Exact on complete
/// networks with uniform off-diagonal rows; k_i tends to T_ii as n grows.
pub fn mean_field_predict(net: &ListeningNetwork, x0: &[f64], t: usize) -> Result<Vec<f64>> {
    let n = net.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let mu = x0.iter().sum::<f64>() / n as f64;
    Ok(x0
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let own = net.get(i, i);
            let excess = if n > 1 { own - (1.0 - own) / (n - 1) as f64 } else { 1.0 };
            let keep = excess.powi(t as i32);
            (1.0 - keep) * mu + keep * x
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Influencer,
    Listener,
    Neither,
}

/// Influencers cut links but keep every listener, and so do all agents
/// they still listen to. Listeners mirror this on the in-link side.
pub fn classify_roles(t: &ListeningNetwork, t_star: &ListeningNetwork) -> Result<Vec<Role>> {
    if t.n() != t_star.n() {
        return Err(Error::ShapeMismatch(t.n(), t_star.n()));
    }
    let n = t.n();
    let (d, ds) = (t.degrees(false), t_star.degrees(false));
    let cuts = |i: usize| ds.out_degree[i] < d.out_degree[i] && ds.in_degree[i] == d.in_degree[i];
    let is_cut = |i: usize| ds.in_degree[i] < d.in_degree[i] && ds.out_degree[i] == d.out_degree[i];
    Ok((0..n)
        .map(|i| {
            if cuts(i) && t_star.out_neighbors(i).all(cuts) {
                Role::Influencer
            } else if is_cut(i) && (0..n).filter(|&j| j != i && t_star.get(j, i) > 0.0).all(is_cut) {
                Role::Listener
            } else {
                Role::Neither
            }
        })
        .collect())
}

/// n times the largest influence weight: 1 for equal influence.
pub fn wisdom_index(summary: &SpectralSummary) -> f64 {
    summary.influence.len() as f64 * summary.influence.iter().copied().fold(0.0, f64::max)
}

/// Agents that carry influence in the giant closed component of T but not
/// in that of T*. For strongly connected T this is n minus the size of the
/// largest closed component of T*.
pub fn information_loss(t: &ListeningNetwork, t_star: &ListeningNetwork) -> Result<usize> {
    if t.n() != t_star.n() {
        return Err(Error::ShapeMismatch(t.n(), t_star.n()));
    }
    let before = t.giant_component();
    let after = t_star.giant_component();
    Ok(before.iter().filter(|i| after.binary_search(i).is_err()).count())
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkFamily {
    Fixed(ListeningNetwork),
    Circulant { n: usize, d: usize },
    /// A fresh uniformly random connected d-regular graph per trial.
    RandomRegular { n: usize, d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Monte Carlo share of draws x0 ~ U[0,1]^n for which core bias at strength
/// q leaves some agent without influence.
pub fn disconnection_probability(family: &NetworkFamily, q: f64, trials: usize, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::PreconditionViolated("trials must be at least 1".into()));
    }
    let fixed = match family {
        NetworkFamily::Fixed(net) => Some(net.clone()),
        NetworkFamily::Circulant { n, d } => Some(circulant(*n, *d)?),
        NetworkFamily::RandomRegular { .. } => None,
    };
    let hits = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<usize> {
            let mut rng = seeds::stream(seed, &[seeds::tag("disconnection"), k as u64]);
            let net = match (&fixed, family) {
                (Some(net), _) => net.clone(),
                (None, NetworkFamily::RandomRegular { n, d }) => regular_network(&random_regular(*n, *d, &mut rng)?)?,
                _ => unreachable!(),
            };
            let x0: Vec<f64> = (0..net.n()).map(|_| rng.random::<f64>()).collect();
            let star = apply_core_bias(&net, &x0, q)?;
            Ok(usize::from(information_loss(&net, &star)? > 0))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let p = hits as f64 / trials as f64;
    Ok(Estimate { probability: p, std_error: (p * (1.0 - p) / trials as f64).sqrt(), trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    Left,
    Right,
}

/// How a voter sitting exactly at 0.5 decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwingRule {
    #[default]
    CoinToss,
    /// Deterministically votes Left.
    CountsLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub votes_left: usize,
    pub votes_right: usize,
    /// Voters at exactly 0.5 resolved by coin.
    pub ties_broken: usize,
    /// Whether the overall result needed a coin.
    pub split: bool,
    pub winner: Winner,
}

/// Sincere voting: Left below 0.5, Right above, a coin at 0.5; a drawn
/// election is settled by one more coin.
pub fn run_election<R: Rng>(x: &[f64], rule: SwingRule, tie_rng: &mut R) -> Tally {
    let mut left = 0;
    let mut ties = 0;
    for &v in x {
        if v < 0.5 {
            left += 1;
        } else if v == 0.5 {
            match rule {
                SwingRule::CountsLeft => left += 1,
                SwingRule::CoinToss => {
                    ties += 1;
                    if tie_rng.random_bool(0.5) {
                        left += 1;
                    }
                }
            }
        }
    }
    let right = x.len() - left;
    let split = left == right;
    let winner = match left.cmp(&right) {
        std::cmp::Ordering::Greater => Winner::Left,
        std::cmp::Ordering::Less => Winner::Right,
        std::cmp::Ordering::Equal => {
            if tie_rng.random_bool(0.5) {
                Winner::Left
            } else {
                Winner::Right
            }
        }
    };
    Tally { votes_left: left, votes_right: right, ties_broken: ties, split, winner }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectionRecord {
    pub tallies: Vec<Tally>,
    pub shock_times: Vec<usize>,
    pub tie_seed: u64,
    pub rule: SwingRule,
    /// False when Left does not win both at t = 0 and in the limit; such
    /// records report no shocks.
    pub in_scope: bool,
}

impl ElectionRecord {
    /// CSV with columns t, votes_left, votes_right, winner, is_shock.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "votes_left", "votes_right", "winner", "is_shock"])?;
        for (t, tally) in self.tallies.iter().enumerate() {
            let shock = self.shock_times.binary_search(&t).is_ok();
            w.write_record([
                t.to_string(),
                tally.votes_left.to_string(),
                tally.votes_right.to_string(),
                format!("{:?}", tally.winner).to_lowercase(),
                shock.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Incremental election bookkeeping, fed one period at a time.
pub struct ElectionTracker {
    rng: ChaCha8Rng,
    tie_seed: u64,
    rule: SwingRule,
    tallies: Vec<Tally>,
}

impl ElectionTracker {
    pub fn new(tie_seed: u64, rule: SwingRule) -> Self {
        ElectionTracker { rng: seeds::stream(tie_seed, &[seeds::tag("ties")]), tie_seed, rule, tallies: Vec::new() }
    }

    pub fn observe(&mut self, x: &[f64]) {
        let tally = run_election(x, self.rule, &mut self.rng);
        self.tallies.push(tally);
    }

    /// Closes the record; the last observed period stands in for the limit.
    pub fn finish(self) -> ElectionRecord {
        let winners: Vec<Winner> = self.tallies.iter().map(|t| t.winner).collect();
        let in_scope = winners.first() == Some(&Winner::Left) && winners.last() == Some(&Winner::Left);
        let shock_times = if in_scope {
            (1..winners.len().saturating_sub(1)).filter(|&t| winners[t] == Winner::Right).collect()
        } else {
            Vec::new()
        };
        ElectionRecord { tallies: self.tallies, shock_times, tie_seed: self.tie_seed, rule: self.rule, in_scope }
    }
}

/// Runs an election at every recorded period of a trajectory.
pub fn detect_shock(traj: &Trajectory, tie_seed: u64, rule: SwingRule) -> ElectionRecord {
    let mut tracker = ElectionTracker::new(tie_seed, rule);
    for st in &traj.states {
        tracker.observe(&st.beliefs);
    }
    tracker.finish()
}

/// Five belief positions with population shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefBuckets {
    pub positions: [f64; 5],
    pub fractions: [f64; 5],
}

pub const BUCKET_POSITIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

impl BeliefBuckets {
    pub fn new(positions: [f64; 5], fractions: [f64; 5]) -> Result<Self> {
        if positions[2] != 0.5 || positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ConfigInvalid("bucket positions must increase with the middle at 0.5".into()));
        }
        if fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) || (fractions.iter().sum::<f64>() - 1.0).abs() > tol::EQ {
            return Err(Error::ConfigInvalid("bucket fractions must lie in (0, 1) and sum to 1".into()));
        }
        Ok(BeliefBuckets { positions, fractions })
    }

    /// Left camp outnumbers the right and the population mean is left of 0.5.
    pub fn left_majority(&self) -> bool {
        let f = &self.fractions;
        f[0] + f[1] > f[3] + f[4] && self.mean() < 0.5
    }

    pub fn mean(&self) -> f64 {
        self.positions.iter().zip(&self.fractions).map(|(x, f)| x * f).sum()
    }

    /// Swing share 0.2, extreme-left share U[0.1, 0.35], extreme-right share
    /// U[0.1, 0.25] redrawn until the mean sits left of 0.5.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let f_el = rng.random_range(0.1..=0.35);
        loop {
            let f_cr = rng.random_range(0.1..=0.25);
            let b = BeliefBuckets { positions: BUCKET_POSITIONS, fractions: [f_el, 0.45 - f_el, 0.2, f_cr, 0.35 - f_cr] };
            if b.mean() < 0.5 {
                return b;
            }
        }
    }

    /// Assigns n agents to buckets by largest-remainder rounding, in random order.
    pub fn assign<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let raw: Vec<f64> = self.fractions.iter().map(|f| f * n as f64).collect();
        let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
        let mut rest: Vec<usize> = (0..5).collect();
        rest.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
        let short = n - counts.iter().sum::<usize>();
        for &k in rest.iter().take(short) {
            counts[k] += 1;
        }
        let mut x: Vec<f64> = counts.iter().zip(&self.positions).flat_map(|(&c, &p)| std::iter::repeat_n(p, c)).collect();
        x.shuffle(rng);
        x
    }
}
