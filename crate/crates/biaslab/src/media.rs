//! Hotelling-style media market with biased listeners spread uniformly on [0, 1].
//!
//! The fringe outlet is the leftmost one; its mirror image 1 - mu is the
//! right fringe.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fringe {
    /// A monopolist may sit anywhere in the interval.
    Interval { lo: f64, hi: f64 },
    Point { value: f64 },
    /// No equilibrium.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediaMarket {
    pub m: usize,
    pub q: f64,
    pub fringe: Fringe,
    pub exists: bool,
    /// An equilibrium profile, when one is known in closed form.
    pub ideologies: Option<Vec<f64>>,
}

impl MediaMarket {
    pub fn fringe_point(&self) -> Option<f64> {
        match self.fringe {
            Fringe::Point { value } => Some(value),
            _ => None,
        }
    }
}

/// Most extreme equilibrium ideology with `m` outlets and bias strength `q`.
pub fn fringe_ideology(m: usize, q: f64) -> Result<MediaMarket> {
    if m < 1 {
        return Err(Error::BadM);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParameterOutOfRange { name: "q", value: q });
    }
    let reach = 1.0 - q;
    let point = |cap: f64| Fringe::Point { value: cap.min(reach) };
    let (fringe, ideologies) = match m {
        1 => (Fringe::Interval { lo: q.min(reach), hi: q.max(reach) }, Some(vec![0.5])),
        2 => {
            let v = 0.5f64.min(reach);
            (Fringe::Point { value: v }, Some(vec![v, 1.0 - v]))
        }
        3 if q <= 0.75 => (Fringe::None, None),
        3 => (Fringe::Point { value: reach }, None),
        4 => (point(0.25), None),
        5 => (point(1.0 / 6.0), None),
        _ => (point(1.0 / (2 * m - 4) as f64), None),
    };
    Ok(MediaMarket { m, q, exists: fringe != Fringe::None, fringe, ideologies })
}

/// Audience of each outlet when listeners pick the closest ideology within
/// reach 1 - q; outlets sharing an ideology split its audience evenly.
pub fn audience_share(ideologies: &[f64], q: f64) -> Result<Vec<f64>> {
    if ideologies.windows(2).any(|w| w[0] > w[1]) || ideologies.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::PreconditionViolated("ideologies must be sorted within [0, 1]".into()));
    }
    let reach = 1.0 - q;
    let mut shares = vec![0.0; ideologies.len()];
    let mut start = 0;
    while start < ideologies.len() {
        let mu = ideologies[start];
        let end = start + ideologies[start..].iter().take_while(|&&v| v == mu).count();
        let left = if start == 0 { 0.0 } else { 0.5 * (ideologies[start - 1] + mu) };
        let right = ideologies.get(end).map_or(1.0, |&next| 0.5 * (mu + next));
        let lo = left.max(mu - reach).max(0.0);
        let hi = right.min(mu + reach).min(1.0);
        let each = (hi - lo).max(0.0) / (end - start) as f64;
        shares[start..end].iter_mut().for_each(|s| *s = each);
        start = end;
    }
    Ok(shares)
}

/// Rows (M, q, fringe, exists) over a grid.
pub fn fringe_table(ms: &[usize], qs: &[f64]) -> Result<Vec<MediaMarket>> {
    let mut rows = Vec::with_capacity(ms.len() * qs.len());
    for &m in ms {
        for &q in qs {
            rows.push(fringe_ideology(m, q)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fr(m: usize, q: f64) -> Option<f64> {
        fringe_ideology(m, q).unwrap().fringe_point()
    }

    #[test]
    fn closed_form_cases() {
        assert_eq!(fringe_ideology(1, 0.3).unwrap().fringe, Fringe::Interval { lo: 0.3, hi: 0.7 });
        assert_eq!(fr(2, 0.4), Some(0.5));
        assert!((fr(2, 0.8).unwrap() - 0.2).abs() < 1e-15);
        assert!(!fringe_ideology(3, 0.5).unwrap().exists);
        assert!(!fringe_ideology(3, 0.75).unwrap().exists);
        assert!((fr(3, 0.8).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(fr(4, 0.5), Some(0.25));
        assert_eq!(fr(5, 0.8), Some(1.0 / 6.0));
        assert_eq!(fr(10, 0.0), Some(1.0 / 16.0));
        assert!(matches!(fringe_ideology(0, 0.5), Err(Error::BadM)));
    }

    #[test]
    fn shares_examples() {
        assert_eq!(audience_share(&[0.5], 0.3).unwrap(), vec![1.0]);
        assert_eq!(audience_share(&[0.25, 0.75], 0.0).unwrap(), vec![0.5, 0.5]);
        assert!((audience_share(&[0.2], 0.9).unwrap()[0] - 0.2).abs() < 1e-12);
        assert_eq!(audience_share(&[0.5, 0.5], 0.0).unwrap(), vec![0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn shares_cover_at_most_everyone(mut mus in proptest::collection::vec(0.0f64..=1.0, 1..8), q in 0.0f64..=1.0) {
            mus.sort_by(f64::total_cmp);
            let total: f64 = audience_share(&mus, q).unwrap().iter().sum();
            prop_assert!(total <= 1.0 + 1e-12);
            let reach = 1.0 - q;
            let covered = mus[0] - reach <= 0.0
                && mus[mus.len() - 1] + reach >= 1.0
                && mus.windows(2).all(|w| w[1] - w[0] <= 2.0 * reach);
            if covered {
                prop_assert!((total - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(total < 1.0);
            }
        }
    }
}
