//! Spike-time-dependent plasticity applied at every gamma reset.
//!
//! | input `x` | output `z` | case          | update        |
//! |-----------|------------|---------------|---------------|
//! | finite    | finite, `x <= z` | capture | `+u_capture`  |
//! | finite    | finite, `x > z`  | backoff | `-u_backoff`  |
//! | finite    | inf        | search        | `+u_search`   |
//! | inf       | finite     | backoff       | `-u_backoff`  |
//! | inf       | inf        | quiet         | `+u_quiet` (half a unit by default) |
//!
//! All magnitudes are in half units and results saturate into `[0, w_max]`.

use serde::Deserialize;

use crate::neuron::{Column, SynapseWeight};
use crate::spike::{SpikeTime, SpikeVolley};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StdpError {
    #[error("column already updated this gamma cycle")]
    AlreadyUpdated,
    #[error("volley has {found} lines, column expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Update magnitudes in half units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StdpParams {
    pub u_capture: u8,
    pub u_backoff: u8,
    pub u_search: u8,
    pub u_quiet: u8,
    pub w_max: u8,
}

impl Default for StdpParams {
    fn default() -> Self {
        Self {
            u_capture: 2,
            u_backoff: 2,
            u_search: 2,
            u_quiet: 1,
            w_max: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleCase {
    Capture,
    BackoffLate,
    Search,
    BackoffNoInput,
    Quiet,
}

pub fn classify_case(x: SpikeTime, z: SpikeTime) -> RuleCase {
    match (x.is_finite(), z.is_finite()) {
        (true, true) if x <= z => RuleCase::Capture,
        (true, true) => RuleCase::BackoffLate,
        (true, false) => RuleCase::Search,
        (false, true) => RuleCase::BackoffNoInput,
        (false, false) => RuleCase::Quiet,
    }
}

pub fn delta(case: RuleCase, p: &StdpParams) -> i32 {
    match case {
        RuleCase::Capture => p.u_capture as i32,
        RuleCase::BackoffLate | RuleCase::BackoffNoInput => -(p.u_backoff as i32),
        RuleCase::Search => p.u_search as i32,
        RuleCase::Quiet => p.u_quiet as i32,
    }
}

pub fn apply_update(w: SynapseWeight, case: RuleCase, p: &StdpParams) -> SynapseWeight {
    w.saturating_step(delta(case, p), p.w_max)
}

/// Per-column guard so a column is updated exactly once per gamma cycle.
#[derive(Clone, Debug, Default)]
pub struct UpdateGuard {
    done: bool,
}

impl UpdateGuard {
    pub fn reset(&mut self) {
        self.done = false;
    }
}

/// Updates one column at grst.
///
/// With a winner, only the winning neuron learns, with `z` = its spike time.
/// With no winner, every neuron learns with `z = inf`, so lines with input
/// search and silent lines take the quiet increment.
pub fn update_column(
    col: &mut Column,
    volley: &SpikeVolley,
    winner: Option<usize>,
    winner_time: SpikeTime,
    p: &StdpParams,
    guard: &mut UpdateGuard,
) -> Result<(), StdpError> {
    if guard.done {
        return Err(StdpError::AlreadyUpdated);
    }
    if volley.len() != col.lines() {
        return Err(StdpError::LengthMismatch {
            expected: col.lines(),
            found: volley.len(),
        });
    }
    guard.done = true;
    match winner {
        Some(i) => update_neuron(&mut col.neurons[i].weights, volley, winner_time, p),
        None => {
            for n in &mut col.neurons {
                update_neuron(&mut n.weights, volley, SpikeTime::INF, p);
            }
        }
    }
    Ok(())
}

fn update_neuron(weights: &mut [SynapseWeight], volley: &SpikeVolley, z: SpikeTime, p: &StdpParams) {
    for (w, &x) in weights.iter_mut().zip(&volley.times) {
        *w = apply_update(*w, classify_case(x, z), p);
    }
}
