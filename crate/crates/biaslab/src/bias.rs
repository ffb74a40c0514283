//! Confirmation-bias rewiring: links to agents whose beliefs are too far
//! away are cut (or weakened) and the weight moves to the self-loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ListeningNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Core,
    PhiExtension,
    Generalized,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strength {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl Strength {
    pub fn for_agent(&self, i: usize) -> f64 {
        match self {
            Strength::Uniform(q) => *q,
            Strength::PerAgent(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weakening {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl Weakening {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            Weakening::Scalar(a) => *a,
            Weakening::Matrix(m) => m[i][j],
        }
    }
}

/// Bias parameters. Read from JSON as
/// `{"mode", "q" | "q_vec", "phi", "alpha", "per_period"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct BiasSpec {
    pub mode: Mode,
    pub q: Strength,
    pub phi: f64,
    pub alpha: Weakening,
    pub per_period: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSpec {
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_vec: Option<Vec<f64>>,
    #[serde(default = "one")]
    phi: f64,
    #[serde(default = "unit_alpha")]
    alpha: Weakening,
    #[serde(default)]
    per_period: bool,
}

fn one() -> f64 {
    1.0
}

fn unit_alpha() -> Weakening {
    Weakening::Scalar(1.0)
}

impl TryFrom<RawSpec> for BiasSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let q = match (raw.q, raw.q_vec) {
            (Some(q), None) => Strength::Uniform(q),
            (None, Some(v)) => Strength::PerAgent(v),
            _ => return Err(Error::ConfigInvalid("bias needs exactly one of q, q_vec".into())),
        };
        let spec = BiasSpec { mode: raw.mode, q, phi: raw.phi, alpha: raw.alpha, per_period: raw.per_period };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<BiasSpec> for RawSpec {
    fn from(s: BiasSpec) -> Self {
        let (q, q_vec) = match s.q {
            Strength::Uniform(q) => (Some(q), None),
            Strength::PerAgent(v) => (None, Some(v)),
        };
        RawSpec { mode: s.mode, q, q_vec, phi: s.phi, alpha: s.alpha, per_period: s.per_period }
    }
}

impl BiasSpec {
    pub fn core(q: f64) -> Self {
        BiasSpec { mode: Mode::Core, q: Strength::Uniform(q), phi: 1.0, alpha: Weakening::Scalar(1.0), per_period: false }
    }

    pub fn phi(q: f64, phi: f64) -> Self {
        BiasSpec { mode: Mode::PhiExtension, phi, ..Self::core(q) }
    }

    pub fn generalized(q: Strength, alpha: Weakening, per_period: bool) -> Self {
        BiasSpec { mode: Mode::Generalized, q, phi: 1.0, alpha, per_period }
    }

    /// Scalar-alpha convenience constructor.
    pub fn generalized_uniform(q: f64, alpha: f64, per_period: bool) -> Self {
        Self::generalized(Strength::Uniform(q), Weakening::Scalar(alpha), per_period)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::ParameterOutOfRange { name, value: v })
            }
        };
        match &self.q {
            Strength::Uniform(q) => unit("q", *q)?,
            Strength::PerAgent(v) => v.iter().try_for_each(|&q| unit("q", q))?,
        }
        unit("phi", self.phi)?;
        match &self.alpha {
            Weakening::Scalar(a) => unit("alpha", *a)?,
            Weakening::Matrix(m) => m.iter().flatten().try_for_each(|&a| unit("alpha", a))?,
        }
        if self.mode == Mode::Core {
            let plain = self.phi == 1.0
                && matches!(self.q, Strength::Uniform(_))
                && matches!(self.alpha, Weakening::Scalar(a) if a == 1.0)
                && !self.per_period;
            if !plain {
                return Err(Error::ModeMismatch("core mode takes only a uniform q".into()));
            }
        }
        if self.mode != Mode::Generalized && self.per_period {
            return Err(Error::ModeMismatch("per_period requires generalized mode".into()));
        }
        Ok(())
    }

    fn check_shape(&self, n: usize) -> Result<()> {
        if let Strength::PerAgent(v) = &self.q {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        if let Weakening::Matrix(m) = &self.alpha {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: m.len() });
            }
        }
        Ok(())
    }
}

/// The cut predicate: strictly farther apart than 1 - q.
#[inline]
pub fn severs(xi: f64, xj: f64, q: f64) -> bool {
    (xi - xj).abs() > 1.0 - q
}

fn check(net: &ListeningNetwork, x: &[f64], q: f64) -> Result<()> {
    if x.len() != net.n() {
        return Err(Error::DimensionMismatch { expected: net.n(), got: x.len() });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParameterOutOfRange { name: "q", value: q });
    }
    Ok(())
}

/// Cuts every link (i, j) with |x_i - x_j| > 1 - q; the weight joins T_ii.
pub fn apply_core_bias(net: &ListeningNetwork, x0: &[f64], q: f64) -> Result<ListeningNetwork> {
    apply_phi_bias(net, x0, q, 1.0)
}

/// Like the core rule, but only `phi` of each cut weight goes to the
/// self-loop; the rest is shared by the surviving links in proportion to
/// their weights. With no survivors everything goes to the self-loop.
pub fn apply_phi_bias(net: &ListeningNetwork, x0: &[f64], q: f64, phi: f64) -> Result<ListeningNetwork> {
    check(net, x0, q)?;
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::ParameterOutOfRange { name: "phi", value: phi });
    }
    let n = net.n();
    let mut w = net.as_flat().to_vec();
    for i in 0..n {
        let row = &mut w[i * n..(i + 1) * n];
        let mut cut = 0.0;
        let mut kept = 0.0;
        let mut cut_mask = vec![false; n];
        for j in 0..n {
            if j == i || row[j] == 0.0 {
                continue;
            }
            if severs(x0[i], x0[j], q) {
                cut += row[j];
                cut_mask[j] = true;
            } else {
                kept += row[j];
            }
        }
        if cut == 0.0 {
            continue;
        }
        if kept == 0.0 || phi == 1.0 {
            for (j, m) in cut_mask.iter().enumerate() {
                if *m {
                    row[j] = 0.0;
                }
            }
            row[i] += cut;
            continue;
        }
        let spill = (1.0 - phi) * cut;
        for j in 0..n {
            if cut_mask[j] {
                row[j] = 0.0;
            } else if j != i && row[j] > 0.0 {
                row[j] += spill * row[j] / kept;
            }
        }
        row[i] += phi * cut;
    }
    Ok(ListeningNetwork::from_transform(n, w))
}

/// One period of the generalized rule: links with |x_i - x_j| > 1 - q_i
/// lose a fraction alpha_ij of their weight to T_ii. Compares the beliefs
/// passed in, so per-period callers hand over the current state.
pub fn apply_generalized_bias(net_prev: &ListeningNetwork, x_t: &[f64], spec: &BiasSpec) -> Result<ListeningNetwork> {
    if spec.mode != Mode::Generalized {
        return Err(Error::ModeMismatch(format!("expected generalized, got {:?}", spec.mode)));
    }
    spec.validate()?;
    let n = net_prev.n();
    if x_t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x_t.len() });
    }
    spec.check_shape(n)?;
    let mut w = net_prev.as_flat().to_vec();
    for i in 0..n {
        let q = spec.q.for_agent(i);
        let row = &mut w[i * n..(i + 1) * n];
        let mut moved = 0.0;
        for j in 0..n {
            if j == i || row[j] == 0.0 || !severs(x_t[i], x_t[j], q) {
                continue;
            }
            let a = spec.alpha.at(i, j);
            moved += a * row[j];
            row[j] *= 1.0 - a;
        }
        row[i] += moved;
    }
    Ok(ListeningNetwork::from_transform(n, w))
}

/// One-shot application of any spec to the initial beliefs.
pub fn apply(net: &ListeningNetwork, x0: &[f64], spec: &BiasSpec) -> Result<ListeningNetwork> {
    spec.validate()?;
    match spec.mode {
        Mode::Core => apply_core_bias(net, x0, spec.q.for_agent(0)),
        Mode::PhiExtension => match spec.q {
            Strength::Uniform(q) => apply_phi_bias(net, x0, q, spec.phi),
            Strength::PerAgent(_) => Err(Error::ModeMismatch("phi extension takes a uniform q".into())),
        },
        Mode::Generalized => apply_generalized_bias(net, x0, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_agent() -> ListeningNetwork {
        ListeningNetwork::new(vec![vec![0.55, 0.4, 0.05], vec![0.4, 0.55, 0.05], vec![0.05, 0.05, 0.9]]).unwrap()
    }

    fn close(a: &ListeningNetwork, b: &[[f64; 3]; 3]) {
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.get(i, j) - b[i][j]).abs() < 1e-12, "({i},{j}) {} vs {}", a.get(i, j), b[i][j]);
            }
        }
    }

    const X: [f64; 3] = [0.0, 1.0, 0.7];

    #[test]
    fn three_agent_core() {
        close(&apply_core_bias(&three_agent(), &X, 0.3).unwrap(), &[[0.95, 0.0, 0.05], [0.0, 0.95, 0.05], [0.05, 0.05, 0.9]]);
    }

    #[test]
    fn three_agent_phi_variants() {
        close(&apply_phi_bias(&three_agent(), &X, 0.3, 0.0).unwrap(), &[[0.55, 0.0, 0.45], [0.0, 0.55, 0.45], [0.05, 0.05, 0.9]]);
        close(&apply_phi_bias(&three_agent(), &X, 0.3, 0.65).unwrap(), &[[0.81, 0.0, 0.19], [0.0, 0.81, 0.19], [0.05, 0.05, 0.9]]);
    }

    #[test]
    fn zero_q_changes_nothing() {
        assert_eq!(apply_core_bias(&three_agent(), &X, 0.0).unwrap(), three_agent());
    }

    #[test]
    fn threshold_is_strict() {
        let net = ListeningNetwork::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        // gap 0.5 == 1 - q keeps the link
        assert_eq!(apply_core_bias(&net, &[0.25, 0.75], 0.5).unwrap(), net);
        assert_eq!(apply_core_bias(&net, &[0.25, 0.75], 0.51).unwrap(), ListeningNetwork::identity(2));
    }

    #[test]
    fn dimension_and_mode_errors() {
        assert!(matches!(apply_core_bias(&three_agent(), &[0.1], 0.3), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(apply_generalized_bias(&three_agent(), &X, &BiasSpec::core(0.3)), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn spec_json_forms() {
        let s: BiasSpec = serde_json::from_str(r#"{"mode":"core","q":0.3}"#).unwrap();
        assert_eq!(s, BiasSpec::core(0.3));
        let g: BiasSpec =
            serde_json::from_str(r#"{"mode":"generalized","q_vec":[0.1,0.2],"alpha":[[1,0.5],[0.5,1]],"per_period":true}"#).unwrap();
        assert!(matches!(g.alpha, Weakening::Matrix(_)));
        let back: BiasSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<BiasSpec>(r#"{"mode":"core","q":0.3,"phi":0.5}"#).is_err());
        assert!(serde_json::from_str::<BiasSpec>(r#"{"mode":"core"}"#).is_err());
    }

    fn arb_net(n: usize) -> impl Strategy<Value = ListeningNetwork> {
        proptest::collection::vec(proptest::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], n), n).prop_map(
            move |mut rows| {
                for (i, r) in rows.iter_mut().enumerate() {
                    r[i] += 0.05;
                    let s: f64 = r.iter().sum();
                    r.iter_mut().for_each(|v| *v /= s);
                }
                ListeningNetwork::new(rows).unwrap()
            },
        )
    }

    fn arb_case() -> impl Strategy<Value = (ListeningNetwork, Vec<f64>, f64, f64)> {
        (2usize..8).prop_flat_map(|n| (arb_net(n), proptest::collection::vec(0.0f64..=1.0, n), 0.0f64..=1.0, 0.0f64..=1.0))
    }

    fn row_sums_ok(net: &ListeningNetwork) -> bool {
        (0..net.n()).all(|i| (net.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12)
    }

    proptest! {
        #[test]
        fn weight_only_moves_to_diagonal((net, x, q, a) in arb_case()) {
            let outs = [
                apply_core_bias(&net, &x, q).unwrap(),
                apply_generalized_bias(&net, &x, &BiasSpec::generalized_uniform(q, a, false)).unwrap(),
            ];
            for out in &outs {
                prop_assert!(row_sums_ok(out));
                for i in 0..net.n() {
                    for j in 0..net.n() {
                        if i == j {
                            prop_assert!(out.get(i, j) >= net.get(i, j));
                        } else {
                            prop_assert!(out.get(i, j) <= net.get(i, j));
                        }
                    }
                }
            }
        }

        #[test]
        fn phi_rows_stay_stochastic((net, x, q, phi) in arb_case()) {
            prop_assert!(row_sums_ok(&apply_phi_bias(&net, &x, q, phi).unwrap()));
        }

        #[test]
        fn phi_one_and_unit_alpha_equal_core((net, x, q, _a) in arb_case()) {
            let core = apply_core_bias(&net, &x, q).unwrap();
            prop_assert_eq!(&apply_phi_bias(&net, &x, q, 1.0).unwrap(), &core);
            prop_assert_eq!(&apply_generalized_bias(&net, &x, &BiasSpec::generalized_uniform(q, 1.0, false)).unwrap(), &core);
        }

        #[test]
        fn zero_alpha_is_identity((net, x, q, _a) in arb_case()) {
            prop_assert_eq!(apply_generalized_bias(&net, &x, &BiasSpec::generalized_uniform(q, 0.0, true)).unwrap(), net);
        }

        #[test]
        fn cut_set_grows_with_q((net, x, q, q2) in arb_case()) {
            let (lo, hi) = if q <= q2 { (q, q2) } else { (q2, q) };
            let a = apply_core_bias(&net, &x, lo).unwrap();
            let b = apply_core_bias(&net, &x, hi).unwrap();
            for i in 0..net.n() {
                for j in 0..net.n() {
                    if i != j && net.get(i, j) > 0.0 && a.get(i, j) == 0.0 {
                        prop_assert_eq!(b.get(i, j), 0.0);
                    }
                }
            }
        }

        #[test]
        fn core_is_idempotent((net, x, q, _a) in arb_case()) {
            let once = apply_core_bias(&net, &x, q).unwrap();
            prop_assert_eq!(apply_core_bias(&once, &x, q).unwrap(), once.clone());
        }

        #[test]
        fn symmetric_input_gives_symmetric_output(n in 2usize..8, seed in any::<u64>(), x in proptest::collection::vec(0.0f64..=1.0, 8), q in 0.0f64..=1.0) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let net = crate::builders::random_symmetric(n, 0.6, 0.0, &mut rng);
            let out = apply_core_bias(&net, &x[..n], q).unwrap();
            prop_assert!(out.is_symmetric());
        }
    }
}
