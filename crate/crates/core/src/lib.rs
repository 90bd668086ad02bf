//! Discrete-time simulation of multi-message push gossip over mobile
//! wireless networks, with Monte Carlo and exact oracles for the walk,
//! occupancy and conductance quantities that govern spreading time.
//!
//! A run proceeds in slots. Each slot every node takes one step of a random
//! walk over an `s × s` grid of subsquares, a random subset of nodes become
//! senders and each sender pushes one message to its nearest potential
//! receiver. Reception is decided either by an SINR threshold or by a
//! constant success probability.
//!
//! ```
//! use mobgossip::{engine, SimConfig};
//!
//! let cfg = SimConfig::new(64, 1, 1.0 / 3.0);
//! let metrics = engine::run(&cfg).unwrap();
//! assert!(metrics.completion[0].is_some());
//! ```

pub mod analysis;
pub mod config;
pub mod engine;
pub mod mobility;
pub mod model;
pub mod phy;
pub mod protocol;
pub mod rng;

pub use config::{
    validate, ConfigError, InjectionSchedule, Mobility, PhyMode, Protocol, SimConfig, StopCondition,
};
pub use engine::{run, MetricsSeries, SlotOutcome, World};
pub use model::{MessageId, NodeState};
pub use rng::{derive_stream, RngStream};
