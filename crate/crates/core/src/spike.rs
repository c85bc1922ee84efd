//! Spike times and volleys shared by every stage of the network.

use std::fmt;
use std::str::FromStr;

/// A discrete event time inside a gamma cycle, or `INF` when no spike occurs.
///
/// `INF` orders after every finite time, so `min` over a set of spike times
/// yields the earliest spike.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpikeTime(u16);

impl SpikeTime {
    pub const INF: SpikeTime = SpikeTime(u16::MAX);
    pub const ZERO: SpikeTime = SpikeTime(0);

    /// Finite spike at cycle index `t`.
    ///
    /// `t` must be below `u16::MAX`, which is reserved for `INF`.
    pub fn at(t: u16) -> SpikeTime {
        assert!(t != u16::MAX, "u16::MAX is reserved for INF");
        SpikeTime(t)
    }

    pub fn is_finite(self) -> bool {
        self.0 != u16::MAX
    }

    pub fn is_inf(self) -> bool {
        !self.is_finite()
    }

    /// Cycle index, or `None` for `INF`.
    pub fn value(self) -> Option<u16> {
        self.is_finite().then_some(self.0)
    }

    /// Drops spikes that land at or after `limit` (they never happen inside a
    /// cycle of that length).
    pub fn truncate(self, limit: u16) -> SpikeTime {
        if self.0 < limit {
            self
        } else {
            SpikeTime::INF
        }
    }
}

impl fmt::Display for SpikeTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(t) => write!(f, "{t}"),
            None => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid spike time token {0:?}")]
pub struct ParseSpikeTimeError(pub String);

impl FromStr for SpikeTime {
    type Err = ParseSpikeTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(SpikeTime::INF);
        }
        match s.parse::<u16>() {
            Ok(t) if t != u16::MAX => Ok(SpikeTime(t)),
            _ => Err(ParseSpikeTimeError(s.to_string())),
        }
    }
}

/// Spike times presented to a layer in one gamma cycle, one per input line.
///
/// Encoders lay the positive channel out first, then the negative channel, so
/// line `i` and line `i + pixels` always refer to the same pixel.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SpikeVolley {
    pub times: Vec<SpikeTime>,
}

impl SpikeVolley {
    pub fn new(times: Vec<SpikeTime>) -> Self {
        Self { times }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn finite_count(&self) -> usize {
        self.times.iter().filter(|t| t.is_finite()).count()
    }

    /// Line-text form: decimal times separated by spaces, `inf` for no spike.
    pub fn to_line(&self) -> String {
        let mut out = String::with_capacity(self.times.len() * 3);
        for (i, t) in self.times.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.to_string());
        }
        out
    }

    pub fn parse_line(line: &str) -> Result<Self, ParseSpikeTimeError> {
        line.split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(SpikeVolley::new)
    }
}
