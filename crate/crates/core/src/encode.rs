//! Pixel-intensity to spike-time encoders.
//!
//! Every encoder produces two channels per pixel. The volley layout is all
//! positive lines first, then all negative lines.
//!
//! Reference formulas for an intensity `v` in `0..=255` and gamma period `T`:
//!
//! - **posneg(θ)**: `pos = v > θ`, `neg = v <= θ`; a set bit spikes at time 0,
//!   a clear bit never spikes.
//! - **linear(T)**: `v == 0` never spikes, otherwise with level
//!   `q = ceil(v * T / 256)` (so `1 <= q <= T`) the spike time is `T - q`.
//!   One level spans 256 / T intensities; integer levels `0, 1, 2, ...` map to
//!   `inf, T-1, T-2, ...`.
//! - **log(T)**: `v == 0` never spikes, otherwise
//!   `min(T - 1, floor(log2(255 / v) * (T - 1) / 8))`.
//!
//! The negative channel of linear/log is the same encoder applied to the
//! negated intensity `|v - 255|`.

use std::fmt;
use std::str::FromStr;

use crate::dataio::PixelImage;
use crate::spike::{SpikeTime, SpikeVolley};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("gamma period must be at least 2, got {0}")]
    PeriodTooShort(u16),
    #[error("unknown encoder {0:?} (expected posneg, linear or log)")]
    UnknownEncoder(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    PosNeg { threshold: u8 },
    Linear { period: u16 },
    Log { period: u16 },
}

impl EncoderKind {
    pub fn validate(self) -> Result<Self, EncodeError> {
        match self {
            EncoderKind::Linear { period } | EncoderKind::Log { period } if period < 2 => {
                Err(EncodeError::PeriodTooShort(period))
            }
            _ => Ok(self),
        }
    }

    /// Builds an encoder from its CLI/config name. `threshold` only applies to
    /// posneg and `period` only to linear/log.
    pub fn from_name(name: &str, threshold: u8, period: u16) -> Result<Self, EncodeError> {
        match name.to_ascii_lowercase().as_str() {
            "posneg" => Ok(EncoderKind::PosNeg { threshold }),
            "linear" => EncoderKind::Linear { period }.validate(),
            "log" => EncoderKind::Log { period }.validate(),
            _ => Err(EncodeError::UnknownEncoder(name.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::PosNeg { .. } => "posneg",
            EncoderKind::Linear { .. } => "linear",
            EncoderKind::Log { .. } => "log",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncoderKind {
    type Err = EncodeError;

    /// Parses a bare name with defaults (threshold 127, period 16).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EncoderKind::from_name(s, 127, 16)
    }
}

/// Comparator pair for one pixel. Equality joins the negative branch, so the
/// two bits always complement each other.
pub fn posneg_bits(pixel: u8, threshold: u8) -> (u8, u8) {
    if pixel > threshold {
        (1, 0)
    } else {
        (0, 1)
    }
}

pub fn bit_to_spiketime(bit: u8) -> SpikeTime {
    if bit != 0 {
        SpikeTime::ZERO
    } else {
        SpikeTime::INF
    }
}

/// Linear level of an intensity: `ceil(v * T / 256)`, in `0..=T`.
pub fn linear_level(v: u8, period: u16) -> u32 {
    (v as u32 * period as u32).div_ceil(256)
}

/// Maps an integer level to a spike time: level 0 never spikes, level `q`
/// spikes at `T - q`.
pub fn level_to_spiketime(level: u32, period: u16) -> SpikeTime {
    if level == 0 {
        SpikeTime::INF
    } else {
        let q = level.min(period as u32);
        SpikeTime::at((period as u32 - q) as u16)
    }
}

fn log_time(v: u8, period: u16) -> SpikeTime {
    if v == 0 {
        return SpikeTime::INF;
    }
    let last = period - 1;
    let t = ((255.0 / v as f64).log2() * last as f64 / 8.0).floor() as u32;
    SpikeTime::at(t.min(last as u32) as u16)
}

/// Single-channel encoding of one intensity. For posneg this is the positive
/// comparator output.
pub fn scalar_encode(v: u8, kind: EncoderKind) -> SpikeTime {
    match kind {
        EncoderKind::PosNeg { threshold } => bit_to_spiketime(posneg_bits(v, threshold).0),
        EncoderKind::Linear { period } => level_to_spiketime(linear_level(v, period), period),
        EncoderKind::Log { period } => log_time(v, period),
    }
}

/// Negative-channel encoding: `encode(|v - max|)` with `max = 255`. For
/// posneg this is the negative comparator output.
pub fn negate_then_encode(v: u8, kind: EncoderKind) -> SpikeTime {
    match kind {
        EncoderKind::PosNeg { threshold } => bit_to_spiketime(posneg_bits(v, threshold).1),
        _ => scalar_encode(255 - v, kind),
    }
}

/// Precomputed per-intensity spike times for both channels.
#[derive(Clone, Debug)]
pub struct EncoderTable {
    kind: EncoderKind,
    positive: [SpikeTime; 256],
    negative: [SpikeTime; 256],
}

impl EncoderTable {
    pub fn new(kind: EncoderKind) -> Self {
        let mut positive = [SpikeTime::INF; 256];
        let mut negative = [SpikeTime::INF; 256];
        for v in 0..=255u8 {
            positive[v as usize] = scalar_encode(v, kind);
            negative[v as usize] = negate_then_encode(v, kind);
        }
        Self {
            kind,
            positive,
            negative,
        }
    }

    pub fn kind(&self) -> EncoderKind {
        self.kind
    }

    pub fn encode(&self, pixels: &[u8]) -> SpikeVolley {
        let mut times = Vec::with_capacity(pixels.len() * 2);
        times.extend(pixels.iter().map(|&p| self.positive[p as usize]));
        times.extend(pixels.iter().map(|&p| self.negative[p as usize]));
        SpikeVolley::new(times)
    }
}

pub fn encode_image(img: &PixelImage, kind: EncoderKind) -> SpikeVolley {
    EncoderTable::new(kind).encode(&img.pixels)
}

/// Splits a volley back into its (positive, negative) halves.
pub fn split_channels(volley: &SpikeVolley) -> (&[SpikeTime], &[SpikeTime]) {
    volley.times.split_at(volley.len() / 2)
}
