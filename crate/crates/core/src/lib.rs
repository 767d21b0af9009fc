//! Simulation of asynchronous broadcasting with soft and loud beeps.
//!
//! Nodes of a labeled graph run deterministic automata; an adversary chooses
//! when each sent beep is delivered. The crate provides the graph model, the
//! frame codec, two equivalent execution engines, delivery adversaries
//! (including constructive confusion attacks), the broadcasting protocols for
//! the ad-hoc, neighborhood-aware and full-knowledge settings, and exact cost
//! predictions.

pub mod adversary;
pub mod algorithms;
pub mod analysis;
pub mod codec;
pub mod engine;
pub mod experiment;
pub mod graph;
