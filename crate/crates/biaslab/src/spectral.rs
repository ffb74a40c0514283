//! Spectra, influence vectors, SLEM, Dirichlet energy and convergence times.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ListeningNetwork, SparseRows};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SymmetricExact,
    GeneralPower,
}

/// Eigen-summary of a network. On the general path `eigenvalues` holds only
/// the two leading moduli (1 and the SLEM estimate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub influence: Vec<f64>,
    pub slem: f64,
    pub method: Method,
}

impl SpectralSummary {
    pub fn is_approximate(&self) -> bool {
        self.method == Method::GeneralPower
    }
}

pub fn spectrum(net: &ListeningNetwork) -> Result<SpectralSummary> {
    if net.is_symmetric() {
        let eigenvalues = symmetric_eigenvalues(net);
        let n = net.n();
        let slem = if n < 2 { 0.0 } else { eigenvalues[1].abs().max(eigenvalues[n - 1].abs()) };
        return Ok(SpectralSummary { eigenvalues, influence: vec![1.0 / n as f64; n], slem, method: Method::SymmetricExact });
    }
    let influence = influence(net)?;
    let slem = slem_power(net, &influence)?;
    Ok(SpectralSummary { eigenvalues: vec![1.0, slem], influence, slem, method: Method::GeneralPower })
}

/// Full real spectrum of a symmetric network, sorted descending.
pub fn symmetric_eigenvalues(net: &ListeningNetwork) -> Vec<f64> {
    let m = DMatrix::from_row_slice(net.n(), net.n(), net.as_flat());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Stationary distribution s = s T by power iteration from the uniform
/// vector. Iterates the lazy chain (I + T)/2, which has the same fixed
/// points but also settles on periodic chains.
pub fn influence(net: &ListeningNetwork) -> Result<Vec<f64>> {
    let n = net.n();
    let rows = SparseRows::new(net);
    let mut s = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for it in 0..tol::POWER_MAX_ITER {
        rows.left_into(&s, &mut next);
        let mut diff = 0.0;
        let mut total = 0.0;
        for (a, b) in next.iter_mut().zip(&s) {
            *a = 0.5 * (*a + b);
            diff += (*a - b).abs();
            total += *a;
        }
        next.iter_mut().for_each(|v| *v /= total);
        std::mem::swap(&mut s, &mut next);
        if diff < tol::POWER_TOL && it > 0 {
            return Ok(s);
        }
    }
    Err(Error::NoConvergence { iterations: tol::POWER_MAX_ITER })
}

/// |lambda_2| estimate: iterate y <- y T, projecting out the stationary
/// direction each step, and read off the average growth rate.
fn slem_power(net: &ListeningNetwork, s: &[f64]) -> Result<f64> {
    let n = net.n();
    if n < 2 {
        return Ok(0.0);
    }
    let rows = SparseRows::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(0x51e3);
    let mut y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut next = vec![0.0; n];
    let deflate = |v: &mut [f64]| {
        let c: f64 = v.iter().sum();
        v.iter_mut().zip(s).for_each(|(a, b)| *a -= c * b);
    };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    deflate(&mut y);
    let n0 = norm(&y);
    y.iter_mut().for_each(|v| *v /= n0);
    const WINDOW: usize = 64;
    let mut log_growth = Vec::new();
    let mut last = f64::NAN;
    let cap = 200_000;
    for it in 0..cap {
        rows.left_into(&y, &mut next);
        deflate(&mut next);
        let g = norm(&next);
        if g < 1e-300 {
            return Ok(0.0);
        }
        next.iter_mut().for_each(|v| *v /= g);
        std::mem::swap(&mut y, &mut next);
        log_growth.push(g.ln());
        if it >= 2 * WINDOW && it % WINDOW == 0 {
            let k = log_growth.len();
            let est = (log_growth[k - WINDOW..].iter().sum::<f64>() / WINDOW as f64).exp();
            if (est - last).abs() < 1e-10 {
                return Ok(est.min(1.0));
            }
            last = est;
        }
    }
    if last.is_finite() {
        Ok(last.min(1.0))
    } else {
        Err(Error::NoConvergence { iterations: cap })
    }
}

/// E(f) = 1/2 sum_ij (f_i - f_j)^2 s_i T_ij. Symmetric networks use the
/// uniform s, which is stationary even when they are disconnected.
pub fn dirichlet_energy(net: &ListeningNetwork, f: &[f64]) -> Result<f64> {
    if !net.is_symmetric() && !net.is_ergodic() {
        return Err(Error::NotErgodic);
    }
    if f.len() != net.n() {
        return Err(Error::DimensionMismatch { expected: net.n(), got: f.len() });
    }
    let s = if net.is_symmetric() { vec![1.0 / net.n() as f64; net.n()] } else { influence(net)? };
    Ok(dirichlet_with(net, &s, f))
}

pub(crate) fn dirichlet_with(net: &ListeningNetwork, s: &[f64], f: &[f64]) -> f64 {
    let n = net.n();
    let mut e = 0.0;
    for i in 0..n {
        for (j, &t) in net.row(i).iter().enumerate() {
            if t > 0.0 {
                let d = f[i] - f[j];
                e += d * d * s[i] * t;
            }
        }
    }
    0.5 * e
}

/// Average convergence time: first t > 0 at which the mean squared distance
/// of the rows of T^t to the influence vector falls below `eps`. Uses the
/// spectrum when the network is symmetric and direct iteration otherwise.
pub fn average_convergence_time(net: &ListeningNetwork, eps: f64) -> Result<usize> {
    if !net.is_ergodic() {
        return Err(Error::NotErgodic);
    }
    check_eps(eps)?;
    if !net.is_symmetric() {
        return average_convergence_time_direct(net, eps);
    }
    let ev = symmetric_eigenvalues(net);
    let n = net.n() as f64;
    let sq: Vec<f64> = ev[1..].iter().map(|l| l * l).collect();
    let mut pow = sq.clone();
    for t in 1..=tol::TAU_HORIZON {
        if pow.iter().sum::<f64>() / n < eps {
            return Ok(t);
        }
        pow.iter_mut().zip(&sq).for_each(|(p, l)| *p *= l);
    }
    Err(Error::ExceededHorizon { horizon: tol::TAU_HORIZON })
}

/// The same quantity by explicit powers of T.
pub fn average_convergence_time_direct(net: &ListeningNetwork, eps: f64) -> Result<usize> {
    if !net.is_ergodic() {
        return Err(Error::NotErgodic);
    }
    check_eps(eps)?;
    let n = net.n();
    let s = if net.is_symmetric() { vec![1.0 / n as f64; n] } else { influence(net)? };
    let t_mat = DMatrix::from_row_slice(n, n, net.as_flat());
    let mut p = t_mat.clone();
    for t in 1..=tol::TAU_HORIZON {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = p[(i, j)] - s[j];
                total += d * d;
            }
        }
        if total / (n as f64) < eps {
            return Ok(t);
        }
        p = &p * &t_mat;
    }
    Err(Error::ExceededHorizon { horizon: tol::TAU_HORIZON })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!("eps must be positive, got {eps}")))
    }
}

/// Lower and upper consensus-time bounds from the SLEM and the smallest
/// influence weight. Natural logs throughout.
pub fn consensus_time_bounds(net: &ListeningNetwork, eps: f64) -> Result<(usize, usize)> {
    if !net.is_ergodic() {
        return Err(Error::NotErgodic);
    }
    let sum = spectrum(net)?;
    let s_min = sum.influence.iter().copied().fold(f64::INFINITY, f64::min);
    bounds_from(sum.slem, s_min, eps)
}

pub fn bounds_from(slem: f64, s_min: f64, eps: f64) -> Result<(usize, usize)> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::PreconditionViolated(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(0.0..1.0).contains(&slem) {
        return Err(Error::NotErgodic);
    }
    if slem < 1e-14 {
        return Ok((0, 1));
    }
    let rate = 2.0 * (1.0 / slem).ln();
    let lower = ((1.0 / (4.0 * eps)).ln() - (1.0 / s_min).ln()) / rate;
    let upper = (1.0 / eps).ln() / rate;
    Ok((lower.floor().max(0.0) as usize, upper.ceil() as usize))
}

/// Periods until sum_i s_i (x_it - c)^2 < eps, with c = s . x0.
pub fn consensus_time(net: &ListeningNetwork, s: &[f64], x0: &[f64], eps: f64, t_max: usize) -> Option<usize> {
    let c: f64 = s.iter().zip(x0).map(|(a, b)| a * b).sum();
    let rows = SparseRows::new(net);
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    for t in 0..=t_max {
        let dev: f64 = s.iter().zip(&x).map(|(w, v)| w * (v - c) * (v - c)).sum();
        if dev < eps {
            return Some(t);
        }
        rows.step_into(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
    }
    None
}

/// Worst consensus time over every corner x0 in {0,1}^n.
pub fn worst_case_consensus_time(net: &ListeningNetwork, eps: f64) -> Result<usize> {
    let n = net.n();
    if n > 20 {
        return Err(Error::PreconditionViolated("corner search is limited to n <= 20".into()));
    }
    if !net.is_ergodic() {
        return Err(Error::NotErgodic);
    }
    let s = spectrum(net)?.influence;
    let mut worst = 0;
    for mask in 0u32..(1 << n) {
        let x0: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
        let t = consensus_time(net, &s, &x0, eps, tol::TAU_HORIZON)
            .ok_or(Error::ExceededHorizon { horizon: tol::TAU_HORIZON })?;
        worst = worst.max(t);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub holds: Vec<bool>,
    pub pass: bool,
    pub worst_violation: f64,
}

/// Compares sorted spectra index by index: lambda*_j >= lambda_j.
pub fn eigen_monotonicity_check(t: &ListeningNetwork, t_star: &ListeningNetwork) -> Result<MonotonicityReport> {
    if t.n() != t_star.n() {
        return Err(Error::ShapeMismatch(t.n(), t_star.n()));
    }
    for (name, net) in [("T", t), ("T*", t_star)] {
        if !net.is_symmetric() {
            return Err(Error::PreconditionViolated(format!("{name} is not symmetric")));
        }
        if net.min_diagonal() < 0.5 - tol::EQ {
            return Err(Error::PreconditionViolated(format!("{name} has a diagonal entry below 1/2")));
        }
    }
    let before = symmetric_eigenvalues(t);
    let after = symmetric_eigenvalues(t_star);
    let gaps: Vec<f64> = before.iter().zip(&after).map(|(b, a)| b - a).collect();
    let holds: Vec<bool> = gaps.iter().map(|g| *g <= 1e-9).collect();
    let worst_violation = gaps.iter().copied().fold(0.0, f64::max);
    Ok(MonotonicityReport { pass: holds.iter().all(|h| *h), before, after, holds, worst_violation })
}
