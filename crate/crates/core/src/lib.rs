//! Lane-free highway traffic in which every vehicle plans its own
//! acceleration with Monte-Carlo tree search, optionally guided by a policy
//! network trained on self-play decisions.
//!
//! * [`traffic`]: vehicles, actions, kinematics, collision tests and the safety field.
//! * [`env`]: the highway, episodes and per-vehicle observation.
//! * [`mcts`]: rewards, the generic search loop and the traffic planner.
//! * [`nn`]: features, the network, training, self-play and calibration.
//! * [`guided`]: prior-guided search with batch-predicted priors.
//! * [`experiment`]: configuration, experiment grids and the CLI commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod error;
pub mod experiment;
pub mod guided;
pub mod mcts;
pub mod nn;
pub mod traffic;

pub use error::{Error, Result};
