//! Spike-time histograms, clustering purity and gamma-cycle savings, plus the
//! markdown/CSV tables that report them.

use std::collections::HashMap;

use crate::gamma::GammaTrace;
use crate::network::{ImageRecord, RunSummary};
use crate::spike::SpikeTime;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{records} records but {labels} labels")]
    LabelCount { records: usize, labels: usize },
    #[error("trace is empty")]
    EmptyTrace,
}

/// Counts per spike time `0..period` plus an `inf` bucket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeHistogram {
    pub counts: Vec<u64>,
    pub inf: u64,
}

impl SpikeHistogram {
    pub fn new(period: u16) -> Self {
        Self {
            counts: vec![0; period as usize],
            inf: 0,
        }
    }

    /// Times at or beyond the period land in `inf`, since they cannot occur
    /// inside the cycle.
    pub fn add(&mut self, t: SpikeTime) {
        match t.value() {
            Some(v) if (v as usize) < self.counts.len() => self.counts[v as usize] += 1,
            _ => self.inf += 1,
        }
    }

    pub fn from_times(period: u16, times: impl IntoIterator<Item = SpikeTime>) -> Self {
        let mut h = Self::new(period);
        times.into_iter().for_each(|t| h.add(t));
        h
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.inf
    }

    pub fn count(&self, t: SpikeTime) -> u64 {
        match t.value() {
            Some(v) => self.counts.get(v as usize).copied().unwrap_or(0),
            None => self.inf,
        }
    }

    /// Most populated bucket (earliest on ties) and its count.
    pub fn mode(&self) -> Option<(SpikeTime, u64)> {
        let mut best: Option<(SpikeTime, u64)> = None;
        for (t, &c) in self.counts.iter().enumerate() {
            if c > 0 && best.is_none_or(|b| c > b.1) {
                best = Some((SpikeTime::at(t as u16), c));
            }
        }
        if self.inf > 0 && best.is_none_or(|b| self.inf > b.1) {
            best = Some((SpikeTime::INF, self.inf));
        }
        best
    }
}

/// Histogram of per-image winner spike times.
pub fn spike_histogram(summary: &RunSummary) -> SpikeHistogram {
    SpikeHistogram::from_times(
        summary.trace.period,
        summary.records.iter().map(ImageRecord::spike_time),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityReport {
    pub purity: f64,
    /// (column, neuron) -> (majority label, majority count, group size)
    pub groups: Vec<((usize, usize), u8, usize, usize)>,
    pub unassigned: usize,
}

/// Clustering purity over winner groups.
///
/// Images are grouped by winning (column, neuron); each group scores the size
/// of its majority label. Images with no winner score zero.
pub fn purity(records: &[ImageRecord], labels: &[u8]) -> Result<PurityReport, MetricsError> {
    if records.len() != labels.len() {
        return Err(MetricsError::LabelCount {
            records: records.len(),
            labels: labels.len(),
        });
    }
    let mut by_group: HashMap<(usize, usize), HashMap<u8, usize>> = HashMap::new();
    let mut unassigned = 0;
    for (r, &label) in records.iter().zip(labels) {
        match r.winner {
            Some(w) => {
                *by_group
                    .entry((w.column, w.neuron))
                    .or_default()
                    .entry(label)
                    .or_default() += 1
            }
            None => unassigned += 1,
        }
    }
    let mut groups: Vec<_> = by_group
        .into_iter()
        .map(|(key, counts)| {
            let size = counts.values().sum();
            // highest count, then lowest label, so the report is deterministic
            let (label, count) = counts
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .expect("non-empty group");
            (key, label, count, size)
        })
        .collect();
    groups.sort_by_key(|g| g.0);
    let matched: usize = groups.iter().map(|g| g.2).sum();
    let purity = if records.is_empty() {
        0.0
    } else {
        matched as f64 / records.len() as f64
    };
    Ok(PurityReport {
        purity,
        groups,
        unassigned,
    })
}

/// Fraction of gamma-cycle time saved relative to always running `period`
/// steps.
///
/// `realized` uses the actual cycle lengths. `potential` uses the step at
/// which the last monitored column fired, i.e. what an ideal controller with
/// no edge delay would achieve; cycles where some column never fired count
/// as a full period.
pub fn cycle_savings(trace: &GammaTrace, period: u16) -> Result<(f64, f64), MetricsError> {
    if trace.cycles.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    let n = trace.cycles.len() as f64;
    let p = period as f64;
    let mean_len = trace.cycles.iter().map(|c| c.length as f64).sum::<f64>() / n;
    let mean_decision = trace
        .cycles
        .iter()
        .map(|c| c.decision_time.map_or(p, |t| (t as f64).min(p)))
        .sum::<f64>()
        / n;
    Ok((1.0 - mean_len / p, 1.0 - mean_decision / p))
}

/// A small table that renders as markdown or CSV.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&format!("**{}**\n\n", self.title));
        }
        out.push_str(&format!("| {} |\n", self.header.join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Spike-time occurrence table: one row per time that occurs in any column,
/// then `inf` and `Total`.
pub fn histogram_table(title: &str, columns: &[(&str, &SpikeHistogram)]) -> Table {
    let mut header = vec!["Spike Time".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    let longest = columns.iter().map(|(_, h)| h.counts.len()).max().unwrap_or(0);
    let mut rows = Vec::new();
    for t in 0..longest {
        let st = SpikeTime::at(t as u16);
        if columns.iter().any(|(_, h)| h.count(st) > 0) {
            let mut row = vec![t.to_string()];
            row.extend(columns.iter().map(|(_, h)| h.count(st).to_string()));
            rows.push(row);
        }
    }
    let mut inf = vec!["inf".to_string()];
    inf.extend(columns.iter().map(|(_, h)| h.inf.to_string()));
    rows.push(inf);
    let mut total = vec!["Total".to_string()];
    total.extend(columns.iter().map(|(_, h)| h.total().to_string()));
    rows.push(total);
    Table {
        title: title.to_string(),
        header,
        rows,
    }
}

/// Purity table: one row per threshold, one column per encoder.
pub fn purity_table(encoders: &[&str], rows: &[(u32, Vec<f64>)]) -> Table {
    let mut header = vec!["Threshold".to_string()];
    header.extend(encoders.iter().map(|e| e.to_string()));
    Table {
        title: "Purity of Different Encoders".to_string(),
        header,
        rows: rows
            .iter()
            .map(|(th, ps)| {
                let mut r = vec![th.to_string()];
                r.extend(ps.iter().map(|p| format!("{p:.4}")));
                r
            })
            .collect(),
    }
}
