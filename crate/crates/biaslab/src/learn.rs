//! DeGroot belief dynamics: x_{t+1} = T x_t, optionally on a network
//! rewired by confirmation bias once or every period.

use std::io::Write;

use crate::bias::{self, BiasSpec, Mode};
use crate::error::{Error, Result};
use crate::network::{spread, BeliefState, ListeningNetwork, SparseRows};
use crate::spectral;

#[derive(Debug, Clone, PartialEq)]
pub enum Networks {
    Static(ListeningNetwork),
    /// `networks[t]` maps the beliefs of period t to period t + 1.
    PerPeriod(Vec<ListeningNetwork>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<BeliefState>,
    pub networks: Networks,
    pub consensus_value: Option<f64>,
    pub belief_convergence_time: Option<usize>,
}

impl Trajectory {
    pub fn beliefs(&self, t: usize) -> &[f64] {
        &self.states[t].beliefs
    }

    pub fn last(&self) -> &[f64] {
        &self.states.last().expect("trajectory holds x0").beliefs
    }

    /// CSV with columns t, agent_id, belief.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "agent_id", "belief"])?;
        for st in &self.states {
            for (i, b) in st.beliefs.iter().enumerate() {
                w.write_record([st.t.to_string(), i.to_string(), format!("{b:?}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn step(net: &ListeningNetwork, x: &BeliefState) -> Result<BeliefState> {
    Ok(BeliefState { t: x.t + 1, beliefs: net.apply(&x.beliefs)? })
}

/// Iterates until the belief spread drops below `eps` or `t_max` periods
/// have elapsed. One-shot bias specs rewire once against x0; generalized
/// per-period specs rewire before every step against the current beliefs.
pub fn run(net: &ListeningNetwork, x0: &[f64], spec: Option<&BiasSpec>, eps: f64, t_max: usize) -> Result<Trajectory> {
    let mut states = Vec::new();
    let mut per_period = Vec::new();
    let opts = SimOptions { eps, t_max, min_periods: 0, stop_when_unreachable: false };
    let out = simulate(net, x0, spec, &opts, Some(&mut per_period), |t, x| states.push(BeliefState { t, beliefs: x.to_vec() }))?;
    let networks = if is_per_period(spec) { Networks::PerPeriod(per_period) } else { Networks::Static(out.network) };
    let consensus_value = match &networks {
        Networks::Static(net) => limit_consensus(net, x0),
        Networks::PerPeriod(_) => None,
    };
    Ok(Trajectory { states, networks, consensus_value, belief_convergence_time: out.convergence_time })
}

fn is_per_period(spec: Option<&BiasSpec>) -> bool {
    matches!(spec, Some(s) if s.mode == Mode::Generalized && s.per_period)
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub convergence_time: Option<usize>,
    /// Last period simulated.
    pub periods: usize,
    pub last: Vec<f64>,
    /// The network in force at the end of the run.
    pub network: ListeningNetwork,
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub eps: f64,
    pub t_max: usize,
    /// Keep stepping after convergence until this period.
    pub min_periods: usize,
    /// Stop (after `min_periods`) once convergence is provably out of reach:
    /// a static network whose closed classes settle at least `eps` apart.
    pub stop_when_unreachable: bool,
}

/// The iteration engine behind [`run`]. `observe` sees every state from t = 0.
pub fn simulate<F: FnMut(usize, &[f64])>(
    net: &ListeningNetwork,
    x0: &[f64],
    spec: Option<&BiasSpec>,
    opts: &SimOptions,
    mut per_period_log: Option<&mut Vec<ListeningNetwork>>,
    mut observe: F,
) -> Result<Outcome> {
    let SimOptions { eps, t_max, min_periods, stop_when_unreachable } = *opts;
    if x0.len() != net.n() {
        return Err(Error::DimensionMismatch { expected: net.n(), got: x0.len() });
    }
    if !(eps > 0.0) {
        return Err(Error::PreconditionViolated(format!("eps must be positive, got {eps}")));
    }
    if t_max == 0 {
        return Err(Error::PreconditionViolated("t_max must be at least 1".into()));
    }
    let rewire_each_period = is_per_period(spec);
    let mut current = match spec {
        Some(s) if !rewire_each_period => bias::apply(net, x0, s)?,
        Some(s) => {
            s.validate()?;
            net.clone()
        }
        None => net.clone(),
    };
    let reachable = !stop_when_unreachable || rewire_each_period || can_converge(&current, x0, eps);
    let mut rows = SparseRows::new(&current);
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut converged = None;
    let mut t = 0;
    observe(0, &x);
    loop {
        if converged.is_none() && spread(&x) < eps {
            converged = Some(t);
        }
        let done = converged.is_some() || !reachable;
        if t >= t_max || (done && t >= min_periods) {
            break;
        }
        if rewire_each_period {
            current = bias::apply_generalized_bias(&current, &x, spec.expect("per-period spec"))?;
            rows = SparseRows::new(&current);
            if let Some(log) = per_period_log.as_deref_mut() {
                log.push(current.clone());
            }
        }
        rows.step_into(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        t += 1;
        observe(t, &x);
    }
    Ok(Outcome { convergence_time: converged, periods: t, last: x, network: current })
}

/// s . x0 for a strongly connected aperiodic network.
pub fn consensus(net: &ListeningNetwork, x0: &[f64]) -> Result<f64> {
    if !net.is_ergodic() {
        return Err(Error::NotErgodic);
    }
    if x0.len() != net.n() {
        return Err(Error::DimensionMismatch { expected: net.n(), got: x0.len() });
    }
    let s = if net.is_symmetric() { vec![1.0 / net.n() as f64; net.n()] } else { spectral::influence(net)? };
    Ok(s.iter().zip(x0).map(|(a, b)| a * b).sum())
}

/// Long-run common belief when the network has a single aperiodic closed
/// class (agents outside it carry no influence); None otherwise.
pub fn limit_consensus(net: &ListeningNetwork, x0: &[f64]) -> Option<f64> {
    if net.is_ergodic() {
        return consensus(net, x0).ok();
    }
    let closed = net.closed_components();
    if closed.len() != 1 || !net.is_aperiodic() {
        return None;
    }
    let s = spectral::influence(net).ok()?;
    Some(s.iter().zip(x0).map(|(a, b)| a * b).sum())
}

/// False only when the spread provably stays at or above `eps` forever:
/// every closed class settles on its own consensus and the spread can
/// never drop below the gap between those values.
pub fn can_converge(net: &ListeningNetwork, x0: &[f64], eps: f64) -> bool {
    let closed = net.closed_components();
    if closed.len() < 2 {
        return true;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for class in &closed {
        let Some(c) = class_consensus(net, class, x0) else {
            return true;
        };
        lo = lo.min(c);
        hi = hi.max(c);
    }
    hi - lo < eps
}

fn class_consensus(net: &ListeningNetwork, class: &[usize], x0: &[f64]) -> Option<f64> {
    if class.len() == 1 {
        return Some(x0[class[0]]);
    }
    let m = class.len();
    let rows: Vec<Vec<f64>> = class.iter().map(|&i| class.iter().map(|&j| net.get(i, j)).collect()).collect();
    let sub = ListeningNetwork::new(rows).ok()?;
    if !sub.is_aperiodic() {
        return None;
    }
    let s = spectral::influence(&sub).ok()?;
    debug_assert_eq!(s.len(), m);
    Some(class.iter().zip(&s).map(|(&i, w)| w * x0[i]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;

    const X3: [f64; 5] = [0.15, 0.3, 0.5, 0.65, 0.75];

    fn five_agent() -> ListeningNetwork {
        ListeningNetwork::new(vec![vec![0.35, 0.1, 0.2, 0.25, 0.1]; 5]).unwrap()
    }

    fn three_agent() -> ListeningNetwork {
        ListeningNetwork::new(vec![vec![0.55, 0.4, 0.05], vec![0.4, 0.55, 0.05], vec![0.05, 0.05, 0.9]]).unwrap()
    }

    #[test]
    fn identical_rows_reach_consensus_in_one_step() {
        let x1 = step(&five_agent(), &BeliefState::new(X3.to_vec()).unwrap()).unwrap();
        assert!(x1.beliefs.iter().all(|v| (v - 0.42).abs() < 1e-12));
        assert_eq!(x1.t, 1);
    }

    #[test]
    fn identity_leaves_beliefs() {
        let x = BeliefState::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(step(&ListeningNetwork::identity(2), &x).unwrap().beliefs, x.beliefs);
    }

    #[test]
    fn three_agent_times_at_calibrated_eps() {
        let x = [0.0, 1.0, 0.7];
        let time = |spec: Option<BiasSpec>| run(&three_agent(), &x, spec.as_ref(), tol::EPS_SMALL, tol::T_MAX).unwrap().belief_convergence_time;
        assert_eq!(time(None), Some(33));
        assert_eq!(time(Some(BiasSpec::core(0.3))), Some(135));
        assert_eq!(time(Some(BiasSpec::phi(0.3, 0.0))), Some(12));
        assert_eq!(time(Some(BiasSpec::phi(0.3, 0.65))), Some(33));
    }

    #[test]
    fn constant_start_converges_at_zero() {
        let tr = run(&three_agent(), &[0.4, 0.4, 0.4], Some(&BiasSpec::core(0.9)), 1e-6, 10).unwrap();
        assert_eq!(tr.belief_convergence_time, Some(0));
        assert_eq!(tr.states.len(), 1);
    }

    #[test]
    fn trajectory_is_consistent() {
        let tr = run(&three_agent(), &[0.0, 1.0, 0.7], None, 1e-6, 1000).unwrap();
        let Networks::Static(net) = &tr.networks else { panic!() };
        for w in tr.states.windows(2) {
            let next = net.apply(&w[0].beliefs).unwrap();
            assert!(next.iter().zip(&w[1].beliefs).all(|(a, b)| (a - b).abs() <= 1e-12));
        }
        let c = tr.consensus_value.unwrap();
        assert!(tr.last().iter().all(|v| (v - c).abs() < 1e-6));
        // symmetric network: consensus is the plain mean
        assert!((c - (1.7 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn per_period_logs_every_network() {
        let spec = BiasSpec::generalized_uniform(0.5, 0.5, true);
        let tr = run(&three_agent(), &[0.0, 1.0, 0.7], Some(&spec), 1e-3, 50).unwrap();
        let Networks::PerPeriod(nets) = &tr.networks else { panic!() };
        assert_eq!(nets.len() + 1, tr.states.len());
        for (t, net) in nets.iter().enumerate() {
            let next = net.apply(&tr.states[t].beliefs).unwrap();
            assert!(next.iter().zip(&tr.states[t + 1].beliefs).all(|(a, b)| (a - b).abs() <= 1e-12));
        }
        assert!(tr.consensus_value.is_none());
    }

    #[test]
    fn split_classes_stop_early() {
        // two closed pairs with distant beliefs never converge
        let net = ListeningNetwork::new(vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ])
        .unwrap();
        let x = [0.0, 0.2, 0.8, 1.0];
        assert!(!can_converge(&net, &x, 1e-3));
        let opts = SimOptions { eps: 1e-3, t_max: 1_000_000, min_periods: 7, stop_when_unreachable: true };
        let out = simulate(&net, &x, None, &opts, None, |_, _| {}).unwrap();
        assert_eq!(out.periods, 7);
        assert_eq!(out.convergence_time, None);
        assert!(can_converge(&net, &[0.1, 0.3, 0.2, 0.2], 1e-3));
        assert!(matches!(consensus(&net, &x), Err(Error::NotErgodic)));
    }

    #[test]
    fn four_agent_consensus_matches_long_iteration() {
        let t = ListeningNetwork::new(vec![
            vec![0.0, 0.55, 0.25, 0.2],
            vec![0.8, 0.0, 0.2, 0.0],
            vec![0.0, 0.7, 0.0, 0.3],
            vec![0.7, 0.0, 0.3, 0.0],
        ])
        .unwrap();
        let x0 = [0.2, 0.5, 0.75, 0.9];
        let c = consensus(&t, &x0).unwrap();
        let mut x = x0.to_vec();
        for _ in 0..10_000 {
            x = t.apply(&x).unwrap();
        }
        assert!(x.iter().all(|v| (v - c).abs() < 1e-9));
        assert!((c - 0.494).abs() < 1e-3);
    }

    #[test]
    fn trajectory_csv_layout() {
        let tr = run(&five_agent(), &X3, None, 1e-9, 10).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,agent_id,belief"));
        assert_eq!(lines.next(), Some("0,0,0.15"));
        assert_eq!(text.lines().count(), 1 + 2 * 5);
    }
}
