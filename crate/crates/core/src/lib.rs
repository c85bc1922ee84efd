//! Cycle-level software model of a temporal neural network (TNN) built from
//! ramp-no-leak neuron columns.
//!
//! The crate covers the whole path from raw MNIST-style images to learned
//! columns:
//!
//! - [`dataio`]: IDX readers and the one-image-per-line text format.
//! - [`encode`]: posneg, linear and log spike-time encoders.
//! - [`pipeline`]: comparator-bank dataflow and its area/energy/EDP cost model.
//! - [`neuron`]: RNL neurons and 1-WTA columns.
//! - [`gamma`]: gamma-reset generator and the relaxed-cycle controller.
//! - [`stdp`]: per-cycle weight updates, including the no-input/no-output case.
//! - [`network`]: the training/inference loop with fixed or relaxed cycles.
//! - [`metrics`]: spike-time histograms, purity and cycle savings.

pub mod config;
pub mod dataio;
pub mod encode;
pub mod gamma;
pub mod metrics;
pub mod network;
pub mod neuron;
pub mod pipeline;
pub mod spike;
pub mod stdp;
pub mod trace;

pub use spike::{SpikeTime, SpikeVolley};
