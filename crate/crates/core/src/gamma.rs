//! Gamma reset (grst) generator and the relaxed-cycle controller.
//!
//! The generator is an up counter: it pulses grst when the counter reaches
//! `period - 1`, or earlier when the controller's control line is high, and
//! restarts from zero.
//!
//! The controller keeps one latch per monitored column. Each latch is the OR of
//! its column's neuron outputs, held until the next grst. Control is the AND of
//! all latches. Latches update on step `k`'s spikes and the generator acts on
//! the same edge, so a cycle whose last column fires at time `t` lasts `t + 1`
//! steps.

use std::fmt;

use crate::spike::SpikeTime;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GammaError {
    #[error("gamma period must be at least 1")]
    ZeroPeriod,
    #[error("controller must monitor at least one column")]
    NoColumns,
    #[error("spike vector has {found} columns, controller monitors {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorState {
    pub counter: u16,
    pub period: u16,
}

impl GeneratorState {
    pub fn new(period: u16) -> Result<Self, GammaError> {
        if period == 0 {
            return Err(GammaError::ZeroPeriod);
        }
        Ok(Self { counter: 0, period })
    }

    /// One clock edge. Returns the grst pulse and the next state.
    pub fn step(self, control: bool) -> (bool, GeneratorState) {
        let grst = self.counter == self.period - 1 || control;
        let counter = if grst { 0 } else { self.counter + 1 };
        (grst, GeneratorState { counter, ..self })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllerState {
    pub column_latches: Vec<bool>,
}

impl ControllerState {
    pub fn new(columns: usize) -> Result<Self, GammaError> {
        if columns == 0 {
            return Err(GammaError::NoColumns);
        }
        Ok(Self {
            column_latches: vec![false; columns],
        })
    }

    pub fn columns(&self) -> usize {
        self.column_latches.len()
    }

    /// ORs this step's per-column outputs into the latches.
    pub fn observe(&mut self, spikes: &[bool]) -> Result<(), GammaError> {
        if spikes.len() != self.column_latches.len() {
            return Err(GammaError::LengthMismatch {
                expected: self.column_latches.len(),
                found: spikes.len(),
            });
        }
        for (latch, &s) in self.column_latches.iter_mut().zip(spikes) {
            *latch |= s;
        }
        Ok(())
    }

    pub fn control(&self) -> bool {
        self.column_latches.iter().all(|&l| l)
    }

    pub fn clear(&mut self) {
        self.column_latches.iter_mut().for_each(|l| *l = false);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GammaMode {
    /// Control wired to 0: every cycle lasts the full period.
    Fixed,
    /// Control wired to the controller: cycles end once every column fired.
    Relaxed,
}

impl std::str::FromStr for GammaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(GammaMode::Fixed),
            "relaxed" => Ok(GammaMode::Relaxed),
            other => Err(format!("unknown gamma mode {other:?} (expected fixed or relaxed)")),
        }
    }
}

impl fmt::Display for GammaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaMode::Fixed => "fixed",
            GammaMode::Relaxed => "relaxed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GrstCause {
    Period,
    Control,
}

impl fmt::Display for GrstCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrstCause::Period => "period",
            GrstCause::Control => "control",
        })
    }
}

/// Hardware faults that the verification scenarios must catch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// grst never clears the controller latches.
    LatchNeverClears,
    /// The generator ignores the control line.
    ControlIgnored,
}

/// What one clock edge did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub control: bool,
    pub grst: Option<GrstCause>,
}

/// Generator and controller advancing in lock-step.
#[derive(Clone, Debug)]
pub struct GammaClock {
    generator: GeneratorState,
    controller: ControllerState,
    mode: GammaMode,
    fault: Fault,
}

impl GammaClock {
    pub fn new(period: u16, columns: usize, mode: GammaMode) -> Result<Self, GammaError> {
        Ok(Self {
            generator: GeneratorState::new(period)?,
            controller: ControllerState::new(columns)?,
            mode,
            fault: Fault::None,
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn period(&self) -> u16 {
        self.generator.period
    }

    pub fn generator(&self) -> GeneratorState {
        self.generator
    }

    pub fn controller(&self) -> &ControllerState {
        &self.controller
    }

    /// Advances one clock with this step's per-column outputs.
    pub fn step(&mut self, spikes: &[bool]) -> Result<StepOutcome, GammaError> {
        self.controller.observe(spikes)?;
        let control = self.mode == GammaMode::Relaxed && self.controller.control();
        let wired = control && self.fault != Fault::ControlIgnored;
        let at_period = self.generator.counter == self.generator.period - 1;
        let (grst, next) = self.generator.step(wired);
        self.generator = next;
        let cause = grst.then_some(if wired { GrstCause::Control } else { GrstCause::Period });
        if grst && self.fault != Fault::LatchNeverClears {
            self.controller.clear();
        }
        debug_assert!(!grst || wired || at_period);
        Ok(StepOutcome { control, grst: cause })
    }

    /// Runs one whole gamma cycle given each column's first output time.
    /// Returns the cycle length in clock steps and what ended it.
    pub fn run_cycle(&mut self, first_spikes: &[SpikeTime]) -> Result<(u16, GrstCause), GammaError> {
        let mut spikes = vec![false; first_spikes.len()];
        for step in 0..self.generator.period {
            for (s, t) in spikes.iter_mut().zip(first_spikes) {
                *s = t.value() == Some(step);
            }
            if let Some(cause) = self.step(&spikes)?.grst {
                return Ok((step + 1, cause));
            }
        }
        unreachable!("generator pulses grst within one period")
    }
}

/// Cycle length implied by column first-spike times, computed directly.
pub fn relaxed_length(first_spikes: &[SpikeTime], period: u16) -> u16 {
    let last = first_spikes.iter().max().copied().unwrap_or(SpikeTime::INF);
    match last.value() {
        Some(t) if t < period => t + 1,
        _ => period,
    }
}

/// One gamma cycle as seen by the monitored (final-layer) columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleRecord {
    pub length: u16,
    pub cause: GrstCause,
    /// (column, winner spike time) for every monitored column that fired.
    pub winners: Vec<(usize, SpikeTime)>,
    /// Step at which the last monitored column fired, when all of them did.
    pub decision_time: Option<u16>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GammaTrace {
    pub period: u16,
    pub cycles: Vec<CycleRecord>,
}

impl GammaTrace {
    pub fn new(period: u16) -> Self {
        Self {
            period,
            cycles: Vec::new(),
        }
    }

    pub fn total_clock_cycles(&self) -> u64 {
        self.cycles.iter().map(|c| c.length as u64).sum()
    }

    pub const CSV_HEADER: &'static str = "cycle,length,cause,winners";

    /// Winners are `column:time` pairs joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.cycles.len() * 24);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (i, c) in self.cycles.iter().enumerate() {
            let winners: Vec<String> = c.winners.iter().map(|(col, t)| format!("{col}:{t}")).collect();
            out.push_str(&format!("{i},{},{},{}\n", c.length, c.cause, winners.join(";")));
        }
        out
    }
}

/// Result of one functional scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const SCENARIO_COLUMNS: usize = 3;

/// Runs the three grst functional scenarios back to back on one
/// generator/controller pair:
///
/// 1. all columns spike in the same step: early grst on that step;
/// 2. columns spike one by one (steps 2, 5, 9 at period 16, scaled otherwise):
///    control stays low until the last one, then grst;
/// 3. no column spikes: grst exactly every `period` steps.
pub fn verify_scenarios(period: u16, fault: Fault) -> Result<Vec<ScenarioResult>, GammaError> {
    let mut clock = GammaClock::new(period, SCENARIO_COLUMNS, GammaMode::Relaxed)?.with_fault(fault);
    let mut results = Vec::new();

    let simultaneous = (period / 4).min(period - 1);
    let (len, cause) = clock.run_cycle(&[SpikeTime::at(simultaneous); SCENARIO_COLUMNS])?;
    let want = simultaneous + 1;
    results.push(ScenarioResult {
        name: "simultaneous spikes",
        passed: len == want && (cause == GrstCause::Control || want == period),
        detail: format!("spikes at {simultaneous}: cycle length {len} ({cause}), expected {want}"),
    });

    let staggered: Vec<u16> = [2u16, 5, 9]
        .iter()
        .map(|&s| ((s as u32 * period as u32) / 16).min(period as u32 - 1) as u16)
        .collect();
    let mut control_before_last = false;
    let mut outcome = None;
    for step in 0..period {
        let spikes: Vec<bool> = staggered.iter().map(|&s| s == step).collect();
        let out = clock.step(&spikes)?;
        if step < staggered[2] && out.control {
            control_before_last = true;
        }
        if let Some(cause) = out.grst {
            outcome = Some((step + 1, cause));
            break;
        }
    }
    let want = staggered[2] + 1;
    results.push(ScenarioResult {
        name: "staggered spikes",
        passed: !control_before_last && outcome.map(|o| o.0) == Some(want),
        detail: match outcome {
            Some((len, cause)) => format!(
                "spikes at {staggered:?}: cycle length {len} ({cause}), expected {want}, early control: {control_before_last}"
            ),
            None => format!("spikes at {staggered:?}: no grst within {period} steps"),
        },
    });

    let mut lengths = Vec::new();
    for _ in 0..3 {
        let (len, cause) = clock.run_cycle(&[SpikeTime::INF; SCENARIO_COLUMNS])?;
        lengths.push((len, cause));
    }
    results.push(ScenarioResult {
        name: "no spikes",
        passed: lengths.iter().all(|&(l, c)| l == period && c == GrstCause::Period),
        detail: format!("cycle lengths {lengths:?}, expected {period} each"),
    });
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_counts_and_resets() {
        let g = GeneratorState::new(16).unwrap();
        let (grst, g1) = g.step(false);
        assert!(!grst);
        assert_eq!(g1.counter, 1);

        let g5 = GeneratorState { counter: 5, period: 16 };
        assert_eq!(g5.step(true), (true, GeneratorState { counter: 0, period: 16 }));

        let mut g = GeneratorState::new(16).unwrap();
        let mut pulses = Vec::new();
        for k in 0..64 {
            let (grst, next) = g.step(false);
            if grst {
                pulses.push(k);
            }
            g = next;
        }
        assert_eq!(pulses, [15, 31, 47, 63]);
        assert_eq!(GeneratorState::new(0), Err(GammaError::ZeroPeriod));
    }

    #[test]
    fn controller_latches() {
        let mut c = ControllerState::new(3).unwrap();
        c.observe(&[true, true, true]).unwrap();
        assert!(c.control());

        let mut c = ControllerState::new(3).unwrap();
        c.observe(&[false, false, false]).unwrap();
        assert_eq!(c.column_latches, [false; 3]);
        c.observe(&[true, false, false]).unwrap();
        c.observe(&[false, false, false]).unwrap();
        assert_eq!(c.column_latches, [true, false, false]);
        assert!(!c.control());
        c.observe(&[false, true, false]).unwrap();
        c.observe(&[false, false, true]).unwrap();
        assert!(c.control());

        c.clear();
        let once = c.clone();
        c.clear();
        assert_eq!(c, once);
        assert!(!c.control());

        assert_eq!(ControllerState::new(0), Err(GammaError::NoColumns));
        assert!(matches!(c.observe(&[true]), Err(GammaError::LengthMismatch { .. })));
    }

    #[test]
    fn one_edge_delay() {
        let mut clock = GammaClock::new(16, 1, GammaMode::Relaxed).unwrap();
        assert_eq!(clock.run_cycle(&[SpikeTime::at(5)]).unwrap(), (6, GrstCause::Control));
        assert_eq!(clock.run_cycle(&[SpikeTime::INF]).unwrap(), (16, GrstCause::Period));
        assert_eq!(clock.run_cycle(&[SpikeTime::at(15)]).unwrap(), (16, GrstCause::Control));
        assert_eq!(relaxed_length(&[SpikeTime::at(5)], 16), 6);

        let mut fixed = GammaClock::new(16, 1, GammaMode::Fixed).unwrap();
        assert_eq!(fixed.run_cycle(&[SpikeTime::at(5)]).unwrap(), (16, GrstCause::Period));
    }

    #[test]
    fn scenarios_pass() {
        for period in [16, 8, 4, 32] {
            let r = verify_scenarios(period, Fault::None).unwrap();
            assert!(r.iter().all(|s| s.passed), "{period}: {r:?}");
        }
    }

    #[test]
    fn stuck_latch_breaks_scenario_three() {
        let r = verify_scenarios(16, Fault::LatchNeverClears).unwrap();
        assert!(!r[2].passed);
        let r = verify_scenarios(16, Fault::ControlIgnored).unwrap();
        assert!(!r[0].passed && !r[1].passed && r[2].passed);
    }

    #[test]
    fn trace_csv() {
        let trace = GammaTrace {
            period: 16,
            cycles: vec![
                CycleRecord {
                    length: 6,
                    cause: GrstCause::Control,
                    winners: vec![(0, SpikeTime::at(5)), (1, SpikeTime::at(3))],
                    decision_time: Some(5),
                },
                CycleRecord {
                    length: 16,
                    cause: GrstCause::Period,
                    winners: vec![],
                    decision_time: None,
                },
            ],
        };
        assert_eq!(
            trace.to_csv(),
            "cycle,length,cause,winners\n0,6,control,0:5;1:3\n1,16,period,\n"
        );
        assert_eq!(trace.total_clock_cycles(), 22);
    }
}
