//! Entanglement-gradient routing for quantum repeater networks.
//!
//! The crate models a network of repeater nodes joined by leveled entangled
//! links ([`network`]), evolves per-link utilities and per-node gradients
//! ([`gradient`]), scores candidate paths at the endpoints ([`path`]), and runs
//! a decentralized multi-thread search that returns the maximal-gradient path
//! ([`router`]). Closed-form analyses of gradient reception ([`rate`]) and of
//! end-to-end fidelity and key security ([`fidelity`]) round it out;
//! [`harness`] drives parameter sweeps and baseline comparisons.
//!
//! Everything stochastic is seeded; identical inputs give bit-identical output.

pub mod error;
pub mod fidelity;
pub mod gradient;
pub mod harness;
pub mod network;
pub mod path;
pub mod rate;
pub mod router;

pub use error::{Error, Result};
pub use network::{
    generate_network, parse_network, write_network, EntangledLink, EntangledPath, GenerationSpec,
    LinkId, NodeId, NodeIdx, QuantumNetwork, QuantumNode,
};

pub use router::{run_routing, RouteResult, RoutingParams};
