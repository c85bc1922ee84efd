//! Compact binary form of a [`RunSummary`].
//!
//! Little-endian layout:
//!
//! ```text
//! "TNNT" | version u8 = 1 | period u16 | cycles u32
//! per cycle:
//!   epoch u32 | image u32
//!   length u16 | cause u8 (0 period, 1 control) | decision u16 (0xffff: none)
//!   winner column u32 | neuron u32 | time u16   (column 0xffffffff: none)
//!   n u16 | n x (column u32, time u16)
//! ```
//!
//! Spike times use 0xffff for `inf`.

use crate::gamma::{CycleRecord, GammaTrace, GrstCause};
use crate::network::{ImageRecord, RunSummary, Winner};
use crate::spike::SpikeTime;

const MAGIC: &[u8; 4] = b"TNNT";
const VERSION: u8 = 1;
const NONE16: u16 = u16::MAX;
const NONE32: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("not a trace file")]
    BadMagic,
    #[error("unsupported trace version {0}")]
    Version(u8),
    #[error("trace truncated at byte {0}")]
    Truncated(usize),
    #[error("invalid grst cause byte {0}")]
    BadCause(u8),
    #[error("{0} trailing bytes after the last cycle")]
    Trailing(usize),
}

fn time_bits(t: SpikeTime) -> u16 {
    t.value().unwrap_or(NONE16)
}

fn bits_time(b: u16) -> SpikeTime {
    if b == NONE16 {
        SpikeTime::INF
    } else {
        SpikeTime::at(b)
    }
}

pub fn encode_summary(summary: &RunSummary) -> Vec<u8> {
    let mut out = Vec::with_capacity(11 + summary.records.len() * 32);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&summary.trace.period.to_le_bytes());
    out.extend_from_slice(&(summary.records.len() as u32).to_le_bytes());
    for (r, c) in summary.records.iter().zip(&summary.trace.cycles) {
        out.extend_from_slice(&r.epoch.to_le_bytes());
        out.extend_from_slice(&(r.image as u32).to_le_bytes());
        out.extend_from_slice(&c.length.to_le_bytes());
        out.push(match c.cause {
            GrstCause::Period => 0,
            GrstCause::Control => 1,
        });
        out.extend_from_slice(&c.decision_time.unwrap_or(NONE16).to_le_bytes());
        let (col, neuron, t) = match r.winner {
            Some(w) => (w.column as u32, w.neuron as u32, time_bits(w.time)),
            None => (NONE32, NONE32, NONE16),
        };
        out.extend_from_slice(&col.to_le_bytes());
        out.extend_from_slice(&neuron.to_le_bytes());
        out.extend_from_slice(&t.to_le_bytes());
        out.extend_from_slice(&(c.winners.len() as u16).to_le_bytes());
        for &(col, t) in &c.winners {
            out.extend_from_slice(&(col as u32).to_le_bytes());
            out.extend_from_slice(&time_bits(t).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], TraceError> {
        let slice = self
            .bytes
            .get(self.at..self.at + N)
            .ok_or(TraceError::Truncated(self.at))?;
        self.at += N;
        Ok(slice.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, TraceError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, TraceError> {
        Ok(u16::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32, TraceError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
}

pub fn decode_summary(bytes: &[u8]) -> Result<RunSummary, TraceError> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<4>().map_err(|_| TraceError::BadMagic)? != MAGIC {
        return Err(TraceError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(TraceError::Version(version));
    }
    let period = r.u16()?;
    let n = r.u32()? as usize;
    let mut trace = GammaTrace::new(period);
    let mut records = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let epoch = r.u32()?;
        let image = r.u32()? as usize;
        let length = r.u16()?;
        let cause = match r.u8()? {
            0 => GrstCause::Period,
            1 => GrstCause::Control,
            b => return Err(TraceError::BadCause(b)),
        };
        let decision = r.u16()?;
        let col = r.u32()?;
        let neuron = r.u32()?;
        let t = r.u16()?;
        let winner = (col != NONE32).then(|| Winner {
            column: col as usize,
            neuron: neuron as usize,
            time: bits_time(t),
        });
        let count = r.u16()?;
        let mut winners = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let c = r.u32()? as usize;
            winners.push((c, bits_time(r.u16()?)));
        }
        records.push(ImageRecord { epoch, image, winner });
        trace.cycles.push(CycleRecord {
            length,
            cause,
            winners,
            decision_time: (decision != NONE16).then_some(decision),
        });
    }
    if r.at != bytes.len() {
        return Err(TraceError::Trailing(bytes.len() - r.at));
    }
    Ok(RunSummary {
        gamma_cycles: n as u64,
        total_clock_cycles: trace.total_clock_cycles(),
        trace,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_time() -> impl Strategy<Value = SpikeTime> {
        prop_oneof![Just(SpikeTime::INF), (0u16..16).prop_map(SpikeTime::at)]
    }

    prop_compose! {
        fn arb_cycle()(
            epoch in 0u32..4,
            image in 0usize..1000,
            length in 1u16..=16,
            control in any::<bool>(),
            decision in prop::option::of(0u16..16),
            winner in prop::option::of((0usize..64, 0usize..12, arb_time())),
            winners in prop::collection::vec((0usize..64, arb_time()), 0..5),
        ) -> (ImageRecord, CycleRecord) {
            (
                ImageRecord {
                    epoch,
                    image,
                    winner: winner.map(|(column, neuron, time)| Winner { column, neuron, time }),
                },
                CycleRecord {
                    length,
                    cause: if control { GrstCause::Control } else { GrstCause::Period },
                    winners,
                    decision_time: decision,
                },
            )
        }
    }

    proptest! {
        #[test]
        fn round_trip(cycles in prop::collection::vec(arb_cycle(), 0..20)) {
            let (records, cycles): (Vec<_>, Vec<_>) = cycles.into_iter().unzip();
            let trace = GammaTrace { period: 16, cycles };
            let summary = RunSummary {
                gamma_cycles: records.len() as u64,
                total_clock_cycles: trace.total_clock_cycles(),
                trace,
                records,
            };
            let bytes = encode_summary(&summary);
            prop_assert_eq!(decode_summary(&bytes).unwrap(), summary);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(decode_summary(b"nope"), Err(TraceError::BadMagic));
        assert_eq!(decode_summary(b"TNNT\x02\x10\x00"), Err(TraceError::Version(2)));
        let mut ok = encode_summary(&RunSummary {
            trace: GammaTrace::new(16),
            ..RunSummary::default()
        });
        ok.push(0);
        assert_eq!(decode_summary(&ok), Err(TraceError::Trailing(1)));
        assert!(matches!(
            decode_summary(b"TNNT\x01\x10\x00\x01\x00\x00\x00"),
            Err(TraceError::Truncated(_))
        ));
    }
}
