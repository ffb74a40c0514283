//! Listening networks, belief states and structural queries.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Row-stochastic listening matrix. Entry (i, j) is the weight agent i puts on agent j.
#[derive(Debug, Clone, PartialEq)]
pub struct ListeningNetwork {
    n: usize,
    w: Vec<f64>,
    symmetric: bool,
    strongly_connected: bool,
    aperiodic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
    pub include_self: bool,
}

/// Beliefs of every agent at period `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub t: usize,
    pub beliefs: Vec<f64>,
}

impl BeliefState {
    pub fn new(beliefs: Vec<f64>) -> Result<Self> {
        check_beliefs(&beliefs)?;
        Ok(BeliefState { t: 0, beliefs })
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn spread(&self) -> f64 {
        spread(&self.beliefs)
    }
}

pub fn check_beliefs(x: &[f64]) -> Result<()> {
    for (agent, &value) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::BeliefOutOfRange { agent, value });
        }
    }
    Ok(())
}

/// max - min of a belief vector (0 for an empty vector).
pub fn spread(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

impl ListeningNetwork {
    /// Validates a matrix given as rows.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut w = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquare { row: i, len: row.len(), n });
            }
            w.extend(row);
        }
        Self::from_flat(n, w)
    }

    /// Validates a row-major n*n buffer.
    pub fn from_flat(n: usize, mut w: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if w.len() != n * n {
            return Err(Error::NonSquare { row: w.len() / n, len: w.len() % n, n });
        }
        for i in 0..n {
            let row = &mut w[i * n..(i + 1) * n];
            for (j, v) in row.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if *v < -tol::EQ {
                    return Err(Error::NegativeWeight { row: i, col: j, value: *v });
                }
                if *v > 1.0 + tol::EQ {
                    return Err(Error::WeightAboveOne { row: i, col: j, value: *v });
                }
                *v = v.clamp(0.0, 1.0);
            }
            let sum: f64 = row.iter().sum();
            let dev = (sum - 1.0).abs();
            if dev > tol::STOCHASTIC {
                return Err(Error::RowSumViolation { row: i, sum });
            }
            if dev > tol::EQ {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(Self::with_flags(n, w))
    }

    fn with_flags(n: usize, w: Vec<f64>) -> Self {
        let mut net = ListeningNetwork { n, w, symmetric: false, strongly_connected: false, aperiodic: false };
        net.symmetric = (0..n).all(|i| (i + 1..n).all(|j| (net.get(i, j) - net.get(j, i)).abs() <= tol::EQ));
        let comps = net.strongly_connected_components();
        net.strongly_connected = comps.len() == 1;
        net.aperiodic = comps.iter().all(|c| net.component_period(c) <= 1);
        net
    }

    /// Rebuilds from a buffer produced by a weight-moving transform of a valid network.
    pub(crate) fn from_transform(n: usize, w: Vec<f64>) -> Self {
        debug_assert!((0..n).all(|i| (w[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0).abs() <= tol::STOCHASTIC));
        Self::with_flags(n, w)
    }

    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Self::with_flags(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.w
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.strongly_connected
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    pub fn is_ergodic(&self) -> bool {
        self.strongly_connected && self.aperiodic
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(f64::INFINITY, f64::min)
    }

    /// T x.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n).map(|i| dot(self.row(i), x)).collect())
    }

    /// x T, the left action used for influence vectors.
    pub fn apply_left(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(self.row(i)) {
                *o += yi * t;
            }
        }
        out
    }

    pub fn degrees(&self, include_self: bool) -> DegreeProfile {
        let mut in_degree = vec![0; self.n];
        let mut out_degree = vec![0; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                if (i != j || include_self) && self.get(i, j) > 0.0 {
                    out_degree[i] += 1;
                    in_degree[j] += 1;
                }
            }
        }
        DegreeProfile { in_degree, out_degree, include_self }
    }

    /// Out-neighbors of `i` (positive entries), self excluded.
    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().filter(move |&(j, &v)| j != i && v > 0.0).map(|(j, _)| j)
    }

    fn digraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.n, 0);
        for _ in 0..self.n {
            g.add_node(());
        }
        for i in 0..self.n {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v > 0.0 {
                    g.add_edge((i as u32).into(), (j as u32).into(), ());
                }
            }
        }
        g
    }

    /// SCC partition of the positive-entry digraph: members ascending,
    /// components by decreasing size, ties by smallest member.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let g = self.digraph();
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    /// Components with no positive link leaving them, in the same order.
    pub fn closed_components(&self) -> Vec<Vec<usize>> {
        let comps = self.strongly_connected_components();
        let mut label = vec![0; self.n];
        for (k, c) in comps.iter().enumerate() {
            for &i in c {
                label[i] = k;
            }
        }
        comps
            .into_iter()
            .enumerate()
            .filter(|(k, c)| c.iter().all(|&i| self.row(i).iter().enumerate().all(|(j, &v)| v == 0.0 || label[j] == *k)))
            .map(|(_, c)| c)
            .collect()
    }

    /// Largest closed component; ties go to the one holding the smallest index.
    pub fn giant_component(&self) -> Vec<usize> {
        self.closed_components().into_iter().next().unwrap_or_default()
    }

    /// Period of one SCC: gcd of level differences along internal edges.
    /// Returns 0 for a single node without a self-loop.
    fn component_period(&self, comp: &[usize]) -> usize {
        let mut inside = vec![false; self.n];
        for &i in comp {
            inside[i] = true;
        }
        let mut level = vec![usize::MAX; self.n];
        let root = comp[0];
        level[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for (v, &t) in self.row(u).iter().enumerate() {
                if t == 0.0 || !inside[v] {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    g = gcd(g, (level[u] + 1).abs_diff(level[v]));
                }
            }
        }
        g
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Compressed positive entries of each row, for fast repeated stepping.
pub(crate) struct SparseRows {
    start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseRows {
    pub(crate) fn new(net: &ListeningNetwork) -> Self {
        let mut start = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for i in 0..net.n() {
            for (j, &v) in net.row(i).iter().enumerate() {
                if v != 0.0 {
                    col.push(j);
                    val.push(v);
                }
            }
            start.push(col.len());
        }
        SparseRows { start, col, val }
    }

    /// out = y T
    pub(crate) fn left_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            let (a, b) = (self.start[i], self.start[i + 1]);
            for (&j, &v) in self.col[a..b].iter().zip(&self.val[a..b]) {
                out[j] += yi * v;
            }
        }
    }

    pub(crate) fn step_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (a, b) = (self.start[i], self.start[i + 1]);
            *o = self.col[a..b].iter().zip(&self.val[a..b]).map(|(&j, &v)| v * x[j]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_agent() -> ListeningNetwork {
        ListeningNetwork::new(vec![vec![0.35, 0.1, 0.2, 0.25, 0.1]; 5]).unwrap()
    }

    #[test]
    fn identity_is_symmetric_but_split() {
        let net = ListeningNetwork::identity(3);
        assert!(net.is_symmetric());
        assert!(!net.is_strongly_connected());
        assert_eq!(net.strongly_connected_components().len(), 3);
        assert!(net.is_aperiodic());
    }

    #[test]
    fn identical_rows_network_flags() {
        let net = five_agent();
        assert!(net.is_strongly_connected());
        assert!(net.is_aperiodic());
        assert!(!net.is_symmetric());
    }

    #[test]
    fn row_sum_violation() {
        let err = ListeningNetwork::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::RowSumViolation { row: 0, .. }));
    }

    #[test]
    fn small_deviation_is_renormalized() {
        let net = ListeningNetwork::new(vec![vec![0.5, 0.5 + 5e-10], vec![0.5, 0.5]]).unwrap();
        assert!((net.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_and_ragged_inputs() {
        assert!(matches!(
            ListeningNetwork::new(vec![vec![1.1, -0.1], vec![0.5, 0.5]]),
            Err(Error::NegativeWeight { .. } | Error::WeightAboveOne { .. })
        ));
        assert!(matches!(ListeningNetwork::new(vec![vec![1.0], vec![0.5, 0.5]]), Err(Error::NonSquare { .. })));
        let clamped = ListeningNetwork::new(vec![vec![1.0, -1e-13], vec![0.5, 0.5]]).unwrap();
        assert_eq!(clamped.get(0, 1), 0.0);
    }

    #[test]
    fn four_agent_degrees() {
        let net = ListeningNetwork::new(vec![
            vec![0.0, 0.55, 0.25, 0.2],
            vec![0.8, 0.0, 0.2, 0.0],
            vec![0.0, 0.7, 0.0, 0.3],
            vec![0.7, 0.0, 0.3, 0.0],
        ])
        .unwrap();
        let d = net.degrees(false);
        assert_eq!(d.out_degree, vec![3, 2, 2, 2]);
        assert_eq!(d.in_degree, vec![2, 2, 3, 2]);
    }

    #[test]
    fn complete_zero_diagonal_degrees() {
        let n = 5;
        let rows = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 0.25 }).collect()).collect();
        let d = ListeningNetwork::new(rows).unwrap().degrees(false);
        assert!(d.in_degree.iter().chain(&d.out_degree).all(|&k| k == 4));
        assert!(ListeningNetwork::identity(3).degrees(false).out_degree.iter().all(|&k| k == 0));
    }

    #[test]
    fn bipartite_ring_is_periodic() {
        let ring = ListeningNetwork::new(vec![
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
        ])
        .unwrap();
        assert!(ring.is_strongly_connected());
        assert!(!ring.is_aperiodic());
        let triangle_plus_pair = ListeningNetwork::new(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        // cycles of length 2 and 3
        assert!(triangle_plus_pair.is_aperiodic());
    }

    #[test]
    fn closed_components_and_ties() {
        // 0 -> 1 <-> 2 ; 3 <-> 4 ; 0 leaks, so only {1,2} and {3,4} are closed
        let net = ListeningNetwork::new(vec![
            vec![0.5, 0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.0, 0.5, 0.5],
        ])
        .unwrap();
        assert_eq!(net.closed_components(), vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(net.giant_component(), vec![1, 2]);
    }

    #[test]
    fn sparse_step_matches_dense() {
        let net = five_agent();
        let x = [0.15, 0.3, 0.5, 0.65, 0.75];
        let mut out = vec![0.0; 5];
        SparseRows::new(&net).step_into(&x, &mut out);
        assert_eq!(out, net.apply(&x).unwrap());
    }
}
