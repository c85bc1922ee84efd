//! Encoder -> column layers -> gamma control, run one image per gamma cycle.
//!
//! Every column of layer 0 sees the whole encoded volley. Column `j` of layer
//! `k` drives input line `j` of layer `k + 1` with its winner's spike time.
//! In relaxed mode the controller watches the final layer only; inner layers
//! free-run and anything they emit after grst is lost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataio::LabeledDataset;
use crate::encode::{EncoderKind, EncoderTable};
use crate::gamma::{CycleRecord, GammaClock, GammaError, GammaMode, GammaTrace, GrstCause};
use crate::neuron::{select_winner, ActiveLines, Column, RnlNeuron, SynapseWeight};
use crate::spike::{SpikeTime, SpikeVolley};
use crate::stdp::{update_column, StdpParams, UpdateGuard};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("network needs at least one layer")]
    NoLayers,
    #[error("layer {0} has no columns or no neurons")]
    EmptyLayer(usize),
    #[error("gamma period must be at least 1")]
    ZeroPeriod,
    #[error("threshold list has {found} entries for {layers} layers")]
    ThresholdCount { layers: usize, found: usize },
    #[error("layer {0} threshold must be at least 1")]
    ZeroThreshold(usize),
    #[error("volley has {found} lines, layer 0 expects {expected}")]
    VolleyWidth { expected: usize, found: usize },
    #[error("training needs a non-empty dataset")]
    EmptyDataset,
    #[error("weights file: {0}")]
    Weights(String),
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LayerShape {
    pub columns: usize,
    pub neurons: usize,
}

impl std::fmt::Display for LayerShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.columns, self.neurons)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub layers: Vec<LayerShape>,
    pub period: u16,
    /// One threshold per layer, or a single value shared by all layers.
    pub thresholds: Vec<u32>,
    pub encoder: EncoderKind,
    pub stdp: StdpParams,
    pub mode: GammaMode,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn threshold(&self, layer: usize) -> u32 {
        if self.thresholds.len() == 1 {
            self.thresholds[0]
        } else {
            self.thresholds[layer]
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.layers.is_empty() {
            return Err(NetworkError::NoLayers);
        }
        if let Some(i) = self.layers.iter().position(|l| l.columns == 0 || l.neurons == 0) {
            return Err(NetworkError::EmptyLayer(i));
        }
        if self.period == 0 {
            return Err(NetworkError::ZeroPeriod);
        }
        if self.thresholds.len() != 1 && self.thresholds.len() != self.layers.len() {
            return Err(NetworkError::ThresholdCount {
                layers: self.layers.len(),
                found: self.thresholds.len(),
            });
        }
        if let Some(i) = (0..self.layers.len()).find(|&i| self.threshold(i) == 0) {
            return Err(NetworkError::ZeroThreshold(i));
        }
        Ok(())
    }
}

/// Where an image ended up: the earliest-firing final-layer column (ties go to
/// the lower column index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Winner {
    pub column: usize,
    pub neuron: usize,
    pub time: SpikeTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImageRecord {
    pub epoch: u32,
    pub image: usize,
    pub winner: Option<Winner>,
}

impl ImageRecord {
    pub fn spike_time(&self) -> SpikeTime {
        self.winner.map_or(SpikeTime::INF, |w| w.time)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub gamma_cycles: u64,
    pub total_clock_cycles: u64,
    pub trace: GammaTrace,
    pub records: Vec<ImageRecord>,
}

impl RunSummary {
    pub const CSV_HEADER: &'static str = "cycle,epoch,image,column,neuron,spike_time,length,cause";

    /// One row per processed image; winner fields are empty when nothing fired.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 32);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (i, (r, c)) in self.records.iter().zip(&self.trace.cycles).enumerate() {
            let (col, neuron) = match r.winner {
                Some(w) => (w.column.to_string(), w.neuron.to_string()),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{i},{},{},{col},{neuron},{},{},{}\n",
                r.epoch,
                r.image,
                r.spike_time(),
                c.length,
                c.cause
            ));
        }
        out
    }
}

/// Outcome of one gamma cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleOutput {
    /// Per final-layer column: winning neuron and its spike time.
    pub outputs: Vec<(Option<usize>, SpikeTime)>,
    pub length: u16,
    pub record: CycleRecord,
}

impl CycleOutput {
    pub fn winner(&self) -> Option<Winner> {
        let times: Vec<SpikeTime> = self.outputs.iter().map(|o| o.1).collect();
        let (column, time) = select_winner(&times);
        column.map(|c| Winner {
            column: c,
            neuron: self.outputs[c].0.expect("finite column time has a neuron"),
            time,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub columns: Vec<Column>,
}

#[derive(Clone, Debug)]
pub struct Network {
    config: NetworkConfig,
    input_lines: usize,
    layers: Vec<Layer>,
    clock: GammaClock,
    encoder: EncoderTable,
    guards: Vec<Vec<UpdateGuard>>,
}

impl Network {
    /// Builds a network whose layer 0 reads `input_lines` lines, with weights
    /// drawn uniformly from `[0, w_max]` half-units by the seeded generator.
    pub fn new(config: NetworkConfig, input_lines: usize) -> Result<Self, NetworkError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let top = 2 * config.stdp.w_max as u32;
        let mut fan_in = input_lines;
        let mut layers = Vec::with_capacity(config.layers.len());
        for (li, shape) in config.layers.iter().enumerate() {
            let threshold = config.threshold(li);
            let columns = (0..shape.columns)
                .map(|_| {
                    let neurons = (0..shape.neurons)
                        .map(|_| {
                            let weights = (0..fan_in)
                                .map(|_| SynapseWeight::from_half_units(rng.gen_range(0..=top), config.stdp.w_max))
                                .collect();
                            RnlNeuron { weights, threshold }
                        })
                        .collect();
                    Column::new(neurons)
                })
                .collect();
            layers.push(Layer { columns });
            fan_in = shape.columns;
        }
        let final_columns = config.layers.last().map(|l| l.columns).unwrap_or(0);
        let clock = GammaClock::new(config.period, final_columns, config.mode)?;
        let guards = config
            .layers
            .iter()
            .map(|l| vec![UpdateGuard::default(); l.columns])
            .collect();
        Ok(Self {
            encoder: EncoderTable::new(config.encoder),
            config,
            input_lines,
            layers,
            clock,
            guards,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_lines(&self) -> usize {
        self.input_lines
    }

    pub fn encode(&self, pixels: &[u8]) -> SpikeVolley {
        self.encoder.encode(pixels)
    }

    /// Presents one volley for one gamma cycle. With `learn`, STDP runs at the
    /// closing grst.
    pub fn run_gamma_cycle(&mut self, volley: &SpikeVolley, learn: bool) -> Result<CycleOutput, NetworkError> {
        if volley.len() != self.input_lines {
            return Err(NetworkError::VolleyWidth {
                expected: self.input_lines,
                found: volley.len(),
            });
        }
        let period = self.config.period;
        let mut scratch = Vec::new();
        let mut inputs: Vec<SpikeVolley> = Vec::with_capacity(self.layers.len());
        let mut winners: Vec<Vec<(Option<usize>, SpikeTime)>> = Vec::with_capacity(self.layers.len());
        let mut current = volley.clone();
        for layer in &mut self.layers {
            let active = ActiveLines::from_volley(&current, period);
            let mut layer_out = Vec::with_capacity(layer.columns.len());
            for col in &mut layer.columns {
                let times: Vec<SpikeTime> = col
                    .neurons
                    .iter()
                    .map(|n| n.spike_time_active(&active, &mut scratch))
                    .collect();
                let w = select_winner(&times);
                col.inhibited = w.0.is_some();
                layer_out.push(w);
            }
            let next = SpikeVolley::new(layer_out.iter().map(|w| w.1).collect());
            inputs.push(std::mem::replace(&mut current, next));
            winners.push(layer_out);
        }

        let final_times: Vec<SpikeTime> = winners.last().expect("validated").iter().map(|w| w.1).collect();
        let (length, cause) = self.clock.run_cycle(&final_times)?;

        // Nothing emitted at or after grst exists for this cycle.
        for layer_winners in &mut winners {
            for w in layer_winners.iter_mut() {
                if w.1.truncate(length).is_inf() {
                    *w = (None, SpikeTime::INF);
                }
            }
        }

        if learn {
            for (li, layer) in self.layers.iter_mut().enumerate() {
                let seen = SpikeVolley::new(inputs[li].times.iter().map(|t| t.truncate(length)).collect());
                for (ci, col) in layer.columns.iter_mut().enumerate() {
                    let guard = &mut self.guards[li][ci];
                    let (winner, time) = winners[li][ci];
                    update_column(col, &seen, winner, time, &self.config.stdp, guard)
                        .expect("one update per column per cycle");
                }
            }
        }

        // grst: lift inhibition and re-arm the update guards.
        for layer in &mut self.layers {
            layer.columns.iter_mut().for_each(Column::reset);
        }
        self.guards.iter_mut().flatten().for_each(UpdateGuard::reset);

        let outputs = winners.pop().expect("validated");
        let record = CycleRecord {
            length,
            cause,
            winners: outputs
                .iter()
                .enumerate()
                .filter(|(_, w)| w.1.is_finite())
                .map(|(c, w)| (c, w.1))
                .collect(),
            decision_time: outputs
                .iter()
                .map(|w| w.1.value())
                .collect::<Option<Vec<u16>>>()
                .and_then(|ts| ts.into_iter().max()),
        };
        debug_assert!(cause != GrstCause::Control || outputs.iter().all(|w| w.1.is_finite()));
        Ok(CycleOutput {
            outputs,
            length,
            record,
        })
    }

    fn run(&mut self, dataset: &LabeledDataset, epochs: u32, learn: bool) -> Result<RunSummary, NetworkError> {
        let mut summary = RunSummary {
            trace: GammaTrace::new(self.config.period),
            ..RunSummary::default()
        };
        for epoch in 0..epochs {
            for (image, img) in dataset.images.iter().enumerate() {
                let volley = self.encode(&img.pixels);
                let out = self.run_gamma_cycle(&volley, learn)?;
                summary.gamma_cycles += 1;
                summary.total_clock_cycles += out.length as u64;
                summary.records.push(ImageRecord {
                    epoch,
                    image,
                    winner: out.winner(),
                });
                summary.trace.cycles.push(out.record);
            }
        }
        Ok(summary)
    }

    /// One gamma cycle per image per epoch, learning at every grst.
    pub fn train(&mut self, dataset: &LabeledDataset, epochs: u32) -> Result<RunSummary, NetworkError> {
        if dataset.is_empty() {
            return Err(NetworkError::EmptyDataset);
        }
        self.run(dataset, epochs, true)
    }

    /// Same loop with learning disabled.
    pub fn infer(&mut self, dataset: &LabeledDataset) -> Result<RunSummary, NetworkError> {
        self.run(dataset, 1, false)
    }

    /// Text dump of all weights in half units: a header line, then one line
    /// per neuron in layer/column/neuron order.
    pub fn weights_text(&self) -> String {
        let shapes: Vec<String> = self.config.layers.iter().map(ToString::to_string).collect();
        let mut out = format!(
            "tnn-weights v1 layers={} lines={} w_max={}\n",
            shapes.join(","),
            self.input_lines,
            self.config.stdp.w_max
        );
        for layer in &self.layers {
            for col in &layer.columns {
                for n in &col.neurons {
                    let ws: Vec<String> = n.weights.iter().map(|w| w.half_units().to_string()).collect();
                    out.push_str(&ws.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Loads weights written by [`Network::weights_text`] into a network of
    /// the same shape.
    pub fn load_weights(&mut self, text: &str) -> Result<(), NetworkError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| NetworkError::Weights("empty file".into()))?;
        let expected = self.weights_text();
        let expected_header = expected.lines().next().unwrap_or_default();
        if header != expected_header {
            return Err(NetworkError::Weights(format!(
                "shape mismatch: file has {header:?}, network is {expected_header:?}"
            )));
        }
        let w_max = self.config.stdp.w_max;
        let mut lineno = 1;
        for layer in &mut self.layers {
            for col in &mut layer.columns {
                for n in &mut col.neurons {
                    lineno += 1;
                    let line = lines
                        .next()
                        .ok_or_else(|| NetworkError::Weights(format!("missing neuron line {lineno}")))?;
                    let parsed: Result<Vec<u32>, _> = line.split_whitespace().map(str::parse).collect();
                    let parsed = parsed.map_err(|e| NetworkError::Weights(format!("line {lineno}: {e}")))?;
                    if parsed.len() != n.weights.len() || parsed.iter().any(|&h| h > 2 * w_max as u32) {
                        return Err(NetworkError::Weights(format!("line {lineno}: bad weight row")));
                    }
                    n.weights = parsed
                        .into_iter()
                        .map(|h| SynapseWeight::from_half_units(h, w_max))
                        .collect();
                }
            }
        }
        Ok(())
    }
}
