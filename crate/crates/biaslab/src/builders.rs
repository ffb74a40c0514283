//! Network families: the meeting-based random generator, octopus networks,
//! circulants, degree-based weightings and identical-rows networks.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bias::severs;
use crate::error::{Error, Result};
use crate::network::{check_beliefs, ListeningNetwork};
use crate::seeds;
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub n: usize,
    pub m0: usize,
    pub m_r: usize,
    pub p_r: f64,
    pub m_n: usize,
    pub p_n: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { n: 1000, m0: 40, m_r: 20, p_r: 0.8, m_n: 20, p_n: 0.8, seed: 0 }
    }
}

impl GeneratorParams {
    pub fn with_n(n: usize, seed: u64) -> Self {
        GeneratorParams { n, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m0 == 0 || self.m0 > self.n {
            return Err(Error::ConfigInvalid(format!("need 1 <= m0 <= n, got m0 = {}, n = {}", self.m0, self.n)));
        }
        for (name, p) in [("p_r", self.p_r), ("p_n", self.p_n)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ParameterOutOfRange { name, value: p });
            }
        }
        Ok(())
    }
}

pub const GENERATOR_ATTEMPTS: usize = 100;

/// Meeting-based directed network: a randomly oriented complete cluster of
/// m0 agents, then each entrant meets m_r random agents and m_n neighbours
/// of the agents it linked to. Every link gets a random direction; weights
/// are uniform over each agent's out-links. Restarts on a fresh substream
/// until the result is strongly connected.
pub fn generate_meeting_network(params: &GeneratorParams) -> Result<ListeningNetwork> {
    params.validate()?;
    for attempt in 0..GENERATOR_ATTEMPTS {
        let mut rng = seeds::stream(params.seed, &[seeds::tag("meeting-network"), attempt as u64]);
        let out = meeting_links(params, &mut rng);
        if out.iter().any(|o| o.is_empty()) {
            continue;
        }
        let n = params.n;
        let mut w = vec![0.0; n * n];
        for (i, links) in out.iter().enumerate() {
            let v = 1.0 / links.len() as f64;
            for &j in links {
                w[i * n + j] = v;
            }
        }
        let net = ListeningNetwork::from_flat(n, w)?;
        if net.is_strongly_connected() {
            return Ok(net);
        }
    }
    Err(Error::GenerationFailed { attempts: GENERATOR_ATTEMPTS })
}

/// Out-neighbour sets (i listens to j) of one generator draw.
pub fn meeting_links<R: Rng>(params: &GeneratorParams, rng: &mut R) -> Vec<BTreeSet<usize>> {
    let n = params.n;
    let mut out = vec![BTreeSet::new(); n];
    let mut inn = vec![BTreeSet::new(); n];
    fn link<R: Rng>(a: usize, b: usize, rng: &mut R, out: &mut [BTreeSet<usize>], inn: &mut [BTreeSet<usize>]) {
        let (from, to) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        out[from].insert(to);
        inn[to].insert(from);
    }
    for a in 0..params.m0 {
        for b in a + 1..params.m0 {
            link(a, b, rng, &mut out, &mut inn);
        }
    }
    for v in params.m0..n {
        let met: Vec<usize> = sample(rng, v, params.m_r.min(v)).into_iter().collect();
        let mut linked = Vec::new();
        for &u in &met {
            if rng.random_bool(params.p_r) {
                link(v, u, rng, &mut out, &mut inn);
                linked.push(u);
            }
        }
        let mut pool = BTreeSet::new();
        for &u in &linked {
            pool.extend(out[u].iter().copied());
            pool.extend(inn[u].iter().copied());
        }
        pool.remove(&v);
        for u in &met {
            pool.remove(u);
        }
        let pool: Vec<usize> = pool.into_iter().collect();
        let picks = sample(rng, pool.len(), params.m_n.min(pool.len()));
        for k in picks {
            if rng.random_bool(params.p_n) {
                link(v, pool[k], rng, &mut out, &mut inn);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    Single(usize),
    /// Both agents put `gamma` on `a` and `1 - gamma` on `b`.
    Pair { a: usize, b: usize, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OctopusLayout {
    pub truth: f64,
    pub center: Center,
    /// layers[k - 1] holds the agents k hops from the center.
    pub layers: Vec<Vec<usize>>,
    pub network: ListeningNetwork,
}

impl OctopusLayout {
    /// Periods until every agent holds the mean exactly (up to rounding).
    pub fn depth(&self) -> usize {
        let n = self.network.n();
        let mut hit = vec![usize::MAX; n];
        match self.center {
            Center::Single(a) => hit[a] = 0,
            Center::Pair { a, b, .. } => {
                hit[a] = 1;
                hit[b] = 1;
            }
        }
        for layer in &self.layers {
            for &i in layer {
                let latest = self.network.out_neighbors(i).map(|j| hit[j]).max().unwrap_or(0);
                hit[i] = latest + 1;
            }
        }
        hit.into_iter().max().unwrap_or(0)
    }
}

pub fn octopus(x0: &[f64], q: f64) -> Result<ListeningNetwork> {
    Ok(octopus_layout(x0, q)?.network)
}

/// A layered star that reaches the mean belief without any link being cut
/// at strength q. The center is an agent holding the mean, or the closest
/// pair straddling it; every other agent listens to one agent a hop closer
/// to the center (the closest in belief, lowest index on ties). Agents next
/// to a two-agent center that are compatible with both blend them.
pub fn octopus_layout(x0: &[f64], q: f64) -> Result<OctopusLayout> {
    check_beliefs(x0)?;
    if x0.is_empty() {
        return Err(Error::Empty);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::ParameterOutOfRange { name: "q", value: q });
    }
    let n = x0.len();
    let truth = x0.iter().sum::<f64>() / n as f64;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x0[a].total_cmp(&x0[b]).then(a.cmp(&b)));
    if let Some(w) = order.windows(2).find(|w| severs(x0[w[0]], x0[w[1]], q)) {
        return Err(Error::Infeasible(format!(
            "beliefs {} and {} are {} apart with no agent in between",
            x0[w[0]],
            x0[w[1]],
            (x0[w[1]] - x0[w[0]]).abs()
        )));
    }
    let center = match (0..n).find(|&i| (x0[i] - truth).abs() <= tol::EQ) {
        Some(a) => Center::Single(a),
        None => {
            let below = (0..n).filter(|&i| x0[i] < truth).max_by(|&a, &b| x0[a].total_cmp(&x0[b]).then(b.cmp(&a)));
            let above = (0..n).filter(|&i| x0[i] > truth).min_by(|&a, &b| x0[a].total_cmp(&x0[b]).then(a.cmp(&b)));
            match (below, above) {
                (Some(a), Some(b)) if !severs(x0[a], x0[b], q) => {
                    Center::Pair { a, b, gamma: (truth - x0[b]) / (x0[a] - x0[b]) }
                }
                _ => return Err(Error::NoCenterPair),
            }
        }
    };
    let mut w = vec![0.0; n * n];
    let mut placed = vec![false; n];
    let mut frontier = match center {
        Center::Single(a) => {
            w[a * n + a] = 1.0;
            placed[a] = true;
            vec![a]
        }
        Center::Pair { a, b, gamma } => {
            for r in [a, b] {
                w[r * n + a] = gamma;
                w[r * n + b] = 1.0 - gamma;
                placed[r] = true;
            }
            vec![a, b]
        }
    };
    let mut layers = Vec::new();
    while !frontier.is_empty() {
        let mut layer = Vec::new();
        for i in 0..n {
            if placed[i] {
                continue;
            }
            let targets: Vec<usize> = frontier.iter().copied().filter(|&j| !severs(x0[i], x0[j], q)).collect();
            if targets.is_empty() {
                continue;
            }
            match center {
                Center::Pair { a, b, gamma } if layers.is_empty() && targets.len() == 2 => {
                    w[i * n + a] = gamma;
                    w[i * n + b] = 1.0 - gamma;
                }
                _ => {
                    let j = *targets
                        .iter()
                        .min_by(|&&j, &&k| (x0[i] - x0[j]).abs().total_cmp(&(x0[i] - x0[k]).abs()).then(j.cmp(&k)))
                        .expect("nonempty");
                    w[i * n + j] = 1.0;
                }
            }
            layer.push(i);
        }
        for &i in &layer {
            placed[i] = true;
        }
        if !layer.is_empty() {
            layers.push(layer.clone());
        }
        frontier = layer;
    }
    if placed.iter().any(|p| !p) {
        return Err(Error::Infeasible("some agents cannot reach the center".into()));
    }
    Ok(OctopusLayout { truth, center, layers, network: ListeningNetwork::from_flat(n, w)? })
}

/// Ring lattice: i listens to i +- 1, ..., i +- d/2 with weight 1/d each.
pub fn circulant(n: usize, d: usize) -> Result<ListeningNetwork> {
    if d < 2 || !d.is_multiple_of(2) || d > n.saturating_sub(1) {
        return Err(Error::BadDegree { n, d });
    }
    let mut w = vec![0.0; n * n];
    let v = 1.0 / d as f64;
    for i in 0..n {
        for k in 1..=d / 2 {
            w[i * n + (i + k) % n] = v;
            w[i * n + (i + n - k) % n] = v;
        }
    }
    ListeningNetwork::from_flat(n, w)
}

/// Undirected simple graph as sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::DimensionMismatch { expected: n, got: a.max(b) + 1 });
            }
            if a == b {
                return Err(Error::PreconditionViolated(format!("self-loop at {a}")));
            }
            adj[a].insert(b);
            adj[b].insert(a);
        }
        Ok(SimpleGraph { adj: adj.into_iter().map(|s| s.into_iter().collect()).collect() })
    }

    /// Reads the positive off-diagonal pattern of a network, which must be symmetric.
    pub fn from_network(net: &ListeningNetwork) -> Result<Self> {
        let n = net.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in net.out_neighbors(i) {
                if net.get(j, i) == 0.0 {
                    return Err(Error::PreconditionViolated(format!("link {i} -> {j} has no reverse")));
                }
                if i < j {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// T_ij = 1/d_max on edges, T_ii = 1 - d_i/d_max.
pub fn max_degree_weights(g: &SimpleGraph) -> Result<ListeningNetwork> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.n();
    let d_max = (0..n).map(|i| g.degree(i)).max().unwrap_or(0) as f64;
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for &j in g.neighbors(i) {
            w[i * n + j] = 1.0 / d_max;
        }
        w[i * n + i] = 1.0 - g.degree(i) as f64 / d_max;
    }
    ListeningNetwork::from_flat(n, w)
}

/// T_ij = min(1/d_i, 1/d_j) on edges, T_ii = sum_k max(0, 1/d_i - 1/d_k).
pub fn metropolis_hastings_weights(g: &SimpleGraph) -> Result<ListeningNetwork> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.n();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        if g.degree(i) == 0 {
            w[i * n + i] = 1.0;
            continue;
        }
        let di = 1.0 / g.degree(i) as f64;
        let mut stay = 0.0;
        for &k in g.neighbors(i) {
            let dk = 1.0 / g.degree(k) as f64;
            w[i * n + k] = di.min(dk);
            stay += (di - dk).max(0.0);
        }
        w[i * n + i] = stay;
    }
    ListeningNetwork::from_flat(n, w)
}

/// Every row equal to `row`, or uniform 1/n.
pub fn complete_uniform(n: usize, row: Option<&[f64]>) -> Result<ListeningNetwork> {
    let row: Vec<f64> = match row {
        Some(r) => {
            if r.len() != n || r.iter().any(|v| *v < 0.0) || (r.iter().sum::<f64>() - 1.0).abs() > tol::STOCHASTIC {
                return Err(Error::BadRow);
            }
            r.to_vec()
        }
        None => vec![1.0 / n as f64; n],
    };
    ListeningNetwork::from_flat(n, row.repeat(n))
}

/// Complete network with self-weight `d` and (1 - d)/(n - 1) on every other agent.
pub fn complete_with_diagonal(n: usize, d: f64) -> Result<ListeningNetwork> {
    if n < 2 || !(0.0..=1.0).contains(&d) {
        return Err(Error::BadRow);
    }
    let off = (1.0 - d) / (n - 1) as f64;
    let w = (0..n * n).map(|k| if k / n == k % n { d } else { off }).collect();
    ListeningNetwork::from_flat(n, w)
}

/// Star with `n - 1` leaves under max-degree weighting.
pub fn star(n: usize) -> Result<ListeningNetwork> {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
    max_degree_weights(&SimpleGraph::from_edges(n, &edges)?)
}

/// Random connected symmetric network with every T_ii >= `min_diag`:
/// a path backbone plus random extra edges, random symmetric weights
/// scaled so the heaviest row leaves exactly `min_diag` on its diagonal.
pub fn random_symmetric<R: Rng>(n: usize, density: f64, min_diag: f64, rng: &mut R) -> ListeningNetwork {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || rng.random_bool(density) {
                let v = rng.random_range(0.1..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
    }
    let heaviest = (0..n).map(|i| a[i * n..(i + 1) * n].iter().sum::<f64>()).fold(0.0, f64::max);
    let scale = if heaviest > 0.0 { (1.0 - min_diag) / heaviest } else { 0.0 };
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                a[i * n + j] *= scale;
                off += a[i * n + j];
            }
        }
        a[i * n + i] = 1.0 - off;
    }
    ListeningNetwork::from_flat(n, a).expect("symmetric construction is stochastic")
}

/// Uniformly paired random d-regular simple connected graph (rejection sampling).
pub fn random_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<SimpleGraph> {
    if d == 0 || d >= n || !(n * d).is_multiple_of(2) {
        return Err(Error::BadDegree { n, d });
    }
    'retry: for _ in 0..100_000 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
        let mut edges = BTreeSet::new();
        while !stubs.is_empty() {
            let a = stubs.swap_remove(rng.random_range(0..stubs.len()));
            let b = stubs.swap_remove(rng.random_range(0..stubs.len()));
            if a == b || !edges.insert((a.min(b), a.max(b))) {
                continue 'retry;
            }
        }
        let edges: Vec<_> = edges.into_iter().collect();
        let g = SimpleGraph::from_edges(n, &edges)?;
        if max_degree_weights(&g)?.is_strongly_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed { attempts: 100_000 })
}

/// Equal weight 1/d on every edge of a d-regular graph, no self-links.
pub fn regular_network(g: &SimpleGraph) -> Result<ListeningNetwork> {
    max_degree_weights(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn;
    use proptest::prelude::{any, prop_assert, prop_assume, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circulant_examples() {
        let ring = circulant(6, 2).unwrap();
        assert_eq!(ring.get(0, 1), 0.5);
        assert_eq!(ring.get(0, 5), 0.5);
        assert_eq!(ring.get(0, 0), 0.0);
        let k5 = circulant(5, 4).unwrap();
        assert!((0..5).all(|i| (0..5).all(|j| k5.get(i, j) == if i == j { 0.0 } else { 0.25 })));
        assert!(matches!(circulant(6, 3), Err(Error::BadDegree { .. })));
        assert!(matches!(circulant(4, 4), Err(Error::BadDegree { .. })));
    }

    #[test]
    fn circulant_is_vertex_transitive() {
        let net = circulant(12, 4).unwrap();
        assert!(net.is_symmetric());
        let n = 12;
        for shift in 0..n {
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(net.get(i, j), net.get((i + shift) % n, (j + shift) % n));
                }
            }
        }
    }

    #[test]
    fn star_weightings() {
        let g = SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let md = max_degree_weights(&g).unwrap();
        let mh = metropolis_hastings_weights(&g).unwrap();
        for net in [&md, &mh] {
            for leaf in 1..4 {
                assert!((net.get(leaf, 0) - 1.0 / 3.0).abs() < 1e-15);
                assert!((net.get(0, leaf) - 1.0 / 3.0).abs() < 1e-15);
                assert!((net.get(leaf, leaf) - 2.0 / 3.0).abs() < 1e-15);
            }
            assert_eq!(net.get(0, 0), 0.0);
        }
        let edge = max_degree_weights(&SimpleGraph::from_edges(2, &[(0, 1)]).unwrap()).unwrap();
        assert_eq!(edge.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(max_degree_weights(&SimpleGraph::from_edges(3, &[]).unwrap()), Err(Error::EmptyGraph)));
    }

    #[test]
    fn regular_graph_weightings_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_regular(10, 4, &mut rng).unwrap();
        let md = max_degree_weights(&g).unwrap();
        assert_eq!(md, metropolis_hastings_weights(&g).unwrap());
        assert!((0..10).all(|i| md.get(i, i) == 0.0));
        assert!((0..10).all(|i| md.out_neighbors(i).all(|j| md.get(i, j) == 0.25)));
    }

    #[test]
    fn complete_uniform_examples() {
        let row = [0.35, 0.1, 0.2, 0.25, 0.1];
        let t = complete_uniform(5, Some(&row)).unwrap();
        assert!((0..5).all(|i| t.row(i) == row));
        assert!(complete_uniform(4, None).unwrap().as_flat().iter().all(|v| *v == 0.25));
        assert!(matches!(complete_uniform(2, Some(&[0.5, 0.6])), Err(Error::BadRow)));
    }

    #[test]
    fn meeting_network_small() {
        let p = GeneratorParams { n: 200, seed: 11, ..Default::default() };
        let net = generate_meeting_network(&p).unwrap();
        assert_eq!(net.n(), 200);
        assert!(net.is_strongly_connected());
        for i in 0..200 {
            assert_eq!(net.get(i, i), 0.0);
            let k = net.out_neighbors(i).count() as f64;
            assert!(net.out_neighbors(i).all(|j| net.get(i, j) == 1.0 / k));
            assert!(net.out_neighbors(i).all(|j| net.get(j, i) == 0.0));
        }
        assert_eq!(generate_meeting_network(&p).unwrap(), net);
    }

    #[test]
    fn meeting_network_without_growth() {
        let p = GeneratorParams { n: 40, m0: 40, seed: 5, ..Default::default() };
        let net = generate_meeting_network(&p).unwrap();
        for i in 0..40 {
            for j in i + 1..40 {
                assert!((net.get(i, j) > 0.0) ^ (net.get(j, i) > 0.0));
            }
        }
    }

    #[test]
    fn octopus_three_agents() {
        let lay = octopus_layout(&[0.2, 0.5, 0.8], 0.7).unwrap();
        assert_eq!(lay.center, Center::Single(1));
        assert_eq!(lay.layers, vec![vec![0, 2]]);
        let tr = learn::run(&lay.network, &[0.2, 0.5, 0.8], None, 1e-9, 10).unwrap();
        assert!(tr.states[1].beliefs.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn octopus_constant_beliefs() {
        let lay = octopus_layout(&[0.3; 4], 0.9).unwrap();
        assert_eq!(lay.center, Center::Single(0));
        assert_eq!(lay.layers, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn octopus_pair_center() {
        let x = [0.1, 0.3, 0.35, 0.85];
        let lay = octopus_layout(&x, 0.4).unwrap();
        let Center::Pair { a, b, gamma } = lay.center else { panic!("{:?}", lay.center) };
        assert_eq!((a, b), (2, 3));
        assert!((gamma * x[2] + (1.0 - gamma) * x[3] - 0.4).abs() < 1e-15);
        // 0.3 is compatible with both center agents and blends them; 0.1 only reaches 0.35
        assert_eq!(lay.network.get(1, 2), gamma);
        assert_eq!(lay.network.get(0, 2), 1.0);
        assert_eq!(lay.depth(), 2);
        assert!(matches!(octopus(&[0.0, 1.0], 0.5), Err(Error::Infeasible(_))));
    }

    proptest! {
        #[test]
        fn mh_weights_symmetric_stochastic(n in 2usize..12, seed in any::<u64>(), p in 0.1f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.random_bool(p)).collect();
            prop_assume!(!edges.is_empty());
            let net = metropolis_hastings_weights(&SimpleGraph::from_edges(n, &edges).unwrap()).unwrap();
            prop_assert!(net.is_symmetric());
            for i in 0..n {
                prop_assert!((net.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
