//! Online learning with delayed bandit feedback.
//!
//! The crate simulates an adversary, a delay sequence and one or more
//! learners round by round. Learners are EXP3 (finite arms) and FKM
//! (bandit convex optimisation); both can be wrapped in a two-dimensional
//! doubling trick that needs neither the horizon nor the total delay.
//! Multi-agent runs measure how discounted ergodic play approaches coarse
//! correlated and Nash equilibria.

pub mod body;
pub mod cost;
pub mod delay;
pub mod doubling;
pub mod error;
pub mod exp3;
pub mod experiment;
pub mod fkm;
pub mod game;
pub mod learner;
pub mod queue;
pub mod rng;
pub mod sim;
pub mod step;

pub use error::{Error, Result};
