//! DeGroot social learning under confirmation bias.
//!
//! Listening networks are row-stochastic matrices; agents repeatedly average
//! the beliefs of those they listen to. Confirmation bias cuts links to
//! agents whose initial beliefs are too far away, which slows learning,
//! shifts influence and can flip elections along the way.
//!
//! ```
//! use biaslab::{bias::BiasSpec, builders::complete_uniform, learn::run};
//!
//! let net = complete_uniform(5, Some(&[0.35, 0.1, 0.2, 0.25, 0.1])).unwrap();
//! let x0 = [0.15, 0.3, 0.5, 0.65, 0.75];
//! let plain = run(&net, &x0, None, 1e-9, 100).unwrap();
//! let biased = run(&net, &x0, Some(&BiasSpec::core(0.78)), 1e-9, 1000).unwrap();
//! assert_eq!(plain.belief_convergence_time, Some(1));
//! assert!(biased.belief_convergence_time.unwrap() > 1);
//! ```

pub mod bias;
pub mod builders;
pub mod error;
pub mod io;
pub mod learn;
pub mod media;
pub mod metrics;
pub mod network;
pub mod seeds;
pub mod simlab;
pub mod spectral;
pub mod tol;

pub use bias::{BiasSpec, Mode};
pub use error::{Error, Result};
pub use learn::{run, Trajectory};
pub use network::{BeliefState, ListeningNetwork};
pub use spectral::{spectrum, SpectralSummary};
