//! Ramp-no-leak (RNL) neurons and winner-take-all columns.
//!
//! An input spike arriving at time `s` on a synapse of weight `w` contributes
//! `min(t - s + 1, floor(w))` to the body potential at time `t >= s`: the ramp
//! starts rising in the arrival cycle, climbs one unit per cycle and holds at
//! the weight. There is no leak. A neuron fires at the first cycle its summed
//! potential reaches the threshold.

use crate::spike::{SpikeTime, SpikeVolley};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NeuronError {
    #[error("volley has {found} lines, neuron expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("column already fired this gamma cycle")]
    Inhibited,
    #[error("threshold must be at least 1")]
    ZeroThreshold,
}

/// Saturating synaptic weight stored in half units, so a `+0.5u` step is
/// exact. The weight value is `half_units / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynapseWeight(u8);

impl SynapseWeight {
    pub const ZERO: SynapseWeight = SynapseWeight(0);

    /// Clamps into `[0, 2 * w_max]`.
    pub fn from_half_units(half_units: u32, w_max: u8) -> Self {
        SynapseWeight(half_units.min(2 * w_max as u32) as u8)
    }

    pub fn from_units(units: u8, w_max: u8) -> Self {
        Self::from_half_units(2 * units as u32, w_max)
    }

    pub fn half_units(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f32 {
        self.0 as f32 / 2.0
    }

    /// Ramp height: whole units only.
    pub fn ramp_height(self) -> u32 {
        (self.0 / 2) as u32
    }

    /// Adds `delta` half units, saturating into `[0, 2 * w_max]`.
    pub fn saturating_step(self, delta: i32, w_max: u8) -> Self {
        let v = (self.0 as i32 + delta).clamp(0, 2 * w_max as i32);
        SynapseWeight(v as u8)
    }
}

/// Potential contributed by one synapse at cycle `t`, in whole units.
pub fn rnl_response(w: SynapseWeight, s: SpikeTime, t: u16) -> u32 {
    match s.value() {
        Some(s) if t >= s => ((t - s) as u32 + 1).min(w.ramp_height()),
        _ => 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnlNeuron {
    pub weights: Vec<SynapseWeight>,
    pub threshold: u32,
}

impl RnlNeuron {
    pub fn new(weights: Vec<SynapseWeight>, threshold: u32) -> Result<Self, NeuronError> {
        if threshold == 0 {
            return Err(NeuronError::ZeroThreshold);
        }
        Ok(Self { weights, threshold })
    }

    pub fn lines(&self) -> usize {
        self.weights.len()
    }

    /// First cycle in `0..period` at which the potential reaches the
    /// threshold, or `INF`.
    pub fn spike_time(&self, volley: &SpikeVolley, period: u16) -> Result<SpikeTime, NeuronError> {
        if volley.len() != self.weights.len() {
            return Err(NeuronError::LengthMismatch {
                expected: self.weights.len(),
                found: volley.len(),
            });
        }
        let active = ActiveLines::from_volley(volley, period);
        Ok(self.spike_time_active(&active, &mut Vec::new()))
    }

    /// Same as [`RnlNeuron::spike_time`] over a pre-filtered set of active
    /// lines. `scratch` is reused across calls to avoid allocating.
    ///
    /// Runs in `O(active + period)`: each ramp adds +1 to the potential slope
    /// at its arrival and -1 once it reaches the weight.
    pub fn spike_time_active(&self, active: &ActiveLines, scratch: &mut Vec<i32>) -> SpikeTime {
        let period = active.period as usize;
        scratch.clear();
        scratch.resize(period + 1, 0);
        for &(line, s) in &active.lines {
            let h = self.weights[line as usize].ramp_height() as usize;
            if h == 0 {
                continue;
            }
            let s = s as usize;
            scratch[s] += 1;
            scratch[(s + h).min(period)] -= 1;
        }
        let mut rate = 0i64;
        let mut potential = 0i64;
        for (t, &d) in scratch[..period].iter().enumerate() {
            rate += d as i64;
            potential += rate;
            if potential >= self.threshold as i64 {
                return SpikeTime::at(t as u16);
            }
        }
        SpikeTime::INF
    }
}

/// Input lines that spike inside the gamma period, with their times.
#[derive(Clone, Debug, Default)]
pub struct ActiveLines {
    pub period: u16,
    pub lines: Vec<(u32, u16)>,
}

impl ActiveLines {
    pub fn from_volley(volley: &SpikeVolley, period: u16) -> Self {
        let lines = volley
            .times
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.value().filter(|&t| t < period).map(|t| (i as u32, t)))
            .collect();
        Self { period, lines }
    }
}

/// Earliest spike wins; ties go to the lowest index.
pub fn select_winner(times: &[SpikeTime]) -> (Option<usize>, SpikeTime) {
    let mut best: (Option<usize>, SpikeTime) = (None, SpikeTime::INF);
    for (i, &t) in times.iter().enumerate() {
        if t.is_finite() && t < best.1 {
            best = (Some(i), t);
        }
    }
    best
}

/// A group of neurons sharing the same input lines under 1-WTA inhibition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub neurons: Vec<RnlNeuron>,
    pub inhibited: bool,
}

impl Column {
    pub fn new(neurons: Vec<RnlNeuron>) -> Self {
        Self {
            neurons,
            inhibited: false,
        }
    }

    pub fn lines(&self) -> usize {
        self.neurons.first().map_or(0, RnlNeuron::lines)
    }

    /// Runs the column for one gamma cycle. The winner suppresses the others
    /// and the column stays inhibited until [`Column::reset`].
    pub fn wta(&mut self, volley: &SpikeVolley, period: u16) -> Result<(Option<usize>, SpikeTime), NeuronError> {
        if self.inhibited {
            return Err(NeuronError::Inhibited);
        }
        if volley.len() != self.lines() {
            return Err(NeuronError::LengthMismatch {
                expected: self.lines(),
                found: volley.len(),
            });
        }
        let active = ActiveLines::from_volley(volley, period);
        let mut scratch = Vec::new();
        let times: Vec<SpikeTime> = self
            .neurons
            .iter()
            .map(|n| n.spike_time_active(&active, &mut scratch))
            .collect();
        let result = select_winner(&times);
        if result.0.is_some() {
            self.inhibited = true;
        }
        Ok(result)
    }

    /// Gamma reset: lifts inhibition.
    pub fn reset(&mut self) {
        self.inhibited = false;
    }
}
