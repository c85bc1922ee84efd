//! Encoder dataflow and hardware cost model.
//!
//! A bank of `n` comparator units samples `n` pixels of the buffered image per
//! clock, so an image of `p` pixels takes `ceil(p / n)` cycles. Each unit holds
//! a positive and a negative comparator.
//!
//! Energy is split in two parts:
//!
//! - dynamic: per unit per cycle, `P_dyn * t_nominal`, independent of the
//!   actual clock frequency;
//! - leakage: per unit per cycle, `P_leak / f`, so it shrinks as the clock
//!   speeds up.
//!
//! Units idling in a ragged final cycle still pay both, which is why comparator
//! counts that do not divide the pixel count cost more energy.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("comparator count must be at least 1")]
    ZeroComparators,
    #[error("clock frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("timing violation: clock period {period_s:e} s is shorter than the critical path {critical_path_s:e} s")]
    TimingViolation { period_s: f64, critical_path_s: f64 },
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error("sweep value must be positive, got {0}")]
    BadSweepValue(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparatorBankConfig {
    pub comparator_count: u64,
    pub clock_frequency_hz: f64,
    pub pixels_per_image: u64,
}

impl ComparatorBankConfig {
    /// 49 units (7x7 pixels per cycle) on a 28x28 image at 1 GHz.
    pub fn mnist_default() -> Self {
        Self {
            comparator_count: 49,
            clock_frequency_hz: 1e9,
            pixels_per_image: 784,
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if self.comparator_count == 0 {
            return Err(CostError::ZeroComparators);
        }
        if !(self.clock_frequency_hz > 0.0 && self.clock_frequency_hz.is_finite()) {
            return Err(CostError::BadFrequency(self.clock_frequency_hz));
        }
        Ok(())
    }

    /// Seconds to encode one image.
    pub fn image_time(&self) -> Result<f64, CostError> {
        self.validate()?;
        let cycles = cycles_required(self.pixels_per_image, self.comparator_count)?;
        Ok(cycles as f64 / self.clock_frequency_hz)
    }
}

/// Per-unit constants from 45 nm synthesis at 1 GHz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitCostParams {
    /// sq-nm
    pub area_per_comparator: f64,
    /// W, measured at the nominal clock
    pub dynamic_power: f64,
    /// W
    pub leakage_power: f64,
    /// s
    pub nominal_clock_period: f64,
    /// s
    pub critical_path: f64,
}

impl Default for UnitCostParams {
    fn default() -> Self {
        Self {
            area_per_comparator: 1.33,
            dynamic_power: 546.3058e-9,
            leakage_power: 35.7914e-9,
            nominal_clock_period: 1e-9,
            critical_path: 0.04e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostReport {
    pub cycles: u64,
    pub processing_time: f64,
    pub area: f64,
    pub dynamic_energy: f64,
    pub leakage_energy: f64,
    pub total_energy: f64,
    pub edp: f64,
    pub wasted_comparator_cycles: u64,
}

impl CostReport {
    pub const CSV_HEADER: &'static str =
        "cycles,processing_time,area,dynamic_energy,leakage_energy,total_energy,edp,wasted_comparator_cycles";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.cycles,
            self.processing_time,
            self.area,
            self.dynamic_energy,
            self.leakage_energy,
            self.total_energy,
            self.edp,
            self.wasted_comparator_cycles
        )
    }
}

pub fn cycles_required(pixels: u64, comparators: u64) -> Result<u64, CostError> {
    if comparators == 0 {
        return Err(CostError::ZeroComparators);
    }
    Ok(pixels.div_ceil(comparators))
}

pub fn cost_report(cfg: &ComparatorBankConfig, unit: &UnitCostParams) -> Result<CostReport, CostError> {
    cfg.validate()?;
    let period = 1.0 / cfg.clock_frequency_hz;
    // Allow a period equal to the critical path up to float noise.
    if period < unit.critical_path * (1.0 - 1e-12) {
        return Err(CostError::TimingViolation {
            period_s: period,
            critical_path_s: unit.critical_path,
        });
    }
    let n = cfg.comparator_count;
    let cycles = cycles_required(cfg.pixels_per_image, n)?;
    let unit_cycles = (n * cycles) as f64;
    let processing_time = cycles as f64 / cfg.clock_frequency_hz;
    let dynamic_energy = unit_cycles * unit.dynamic_power * unit.nominal_clock_period;
    let leakage_energy = unit_cycles * unit.leakage_power * period;
    let total_energy = dynamic_energy + leakage_energy;
    Ok(CostReport {
        cycles,
        processing_time,
        area: n as f64 * unit.area_per_comparator,
        dynamic_energy,
        leakage_energy,
        total_energy,
        edp: total_energy * processing_time,
        wasted_comparator_cycles: n * cycles - cfg.pixels_per_image,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    ComparatorCount,
    Frequency,
    ImageSize,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "comparators" | "comparator_count" | "comparator-count" => Ok(SweepAxis::ComparatorCount),
            "frequency" => Ok(SweepAxis::Frequency),
            "image_size" | "image-size" => Ok(SweepAxis::ImageSize),
            other => Err(format!(
                "unknown sweep axis {other:?} (expected comparators, frequency or image-size)"
            )),
        }
    }
}

/// One report per value, in input order. A failing row (for example a clock
/// faster than the critical path allows) does not abort the sweep.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &ComparatorBankConfig,
    unit: &UnitCostParams,
) -> Result<Vec<Result<CostReport, CostError>>, CostError> {
    if values.is_empty() {
        return Err(CostError::EmptySweep);
    }
    if let Some(&bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(CostError::BadSweepValue(bad));
    }
    Ok(values
        .iter()
        .map(|&v| {
            let mut cfg = *base;
            match axis {
                SweepAxis::ComparatorCount => cfg.comparator_count = v.round() as u64,
                SweepAxis::Frequency => cfg.clock_frequency_hz = v,
                SweepAxis::ImageSize => cfg.pixels_per_image = v.round() as u64,
            }
            cost_report(&cfg, unit)
        })
        .collect())
}

/// CSV with exactly the [`CostReport`] columns. Failed rows keep their slot
/// with empty fields so row `i` always matches sweep value `i`.
pub fn sweep_csv(rows: &[Result<CostReport, CostError>]) -> String {
    let mut out = String::new();
    out.push_str(CostReport::CSV_HEADER);
    out.push('\n');
    for row in rows {
        match row {
            Ok(r) => out.push_str(&r.csv_row()),
            Err(_) => out.push_str(",,,,,,,"),
        }
        out.push('\n');
    }
    out
}

/// Seconds to encode `images` images back to back.
pub fn throughput(images: u64, cfg: &ComparatorBankConfig) -> Result<f64, CostError> {
    Ok(images as f64 * cfg.image_time()?)
}

/// Whole images that fit in `budget_s` seconds.
pub fn capacity(budget_s: f64, cfg: &ComparatorBankConfig) -> Result<u64, CostError> {
    cfg.validate()?;
    if budget_s <= 0.0 {
        return Ok(0);
    }
    let cycles = cycles_required(cfg.pixels_per_image, cfg.comparator_count)?;
    if cycles == 0 {
        return Ok(u64::MAX);
    }
    // Nudge so budgets that are exact multiples survive float rounding.
    let budget_cycles = budget_s * cfg.clock_frequency_hz * (1.0 + 1e-12);
    Ok((budget_cycles / cycles as f64).floor() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u64, f: f64, px: u64) -> ComparatorBankConfig {
        ComparatorBankConfig {
            comparator_count: n,
            clock_frequency_hz: f,
            pixels_per_image: px,
        }
    }

    #[test]
    fn cycles() {
        assert_eq!(cycles_required(784, 49), Ok(16));
        assert_eq!(cycles_required(784, 784), Ok(1));
        assert_eq!(cycles_required(784, 100), Ok(8));
        assert_eq!(cycles_required(784, 0), Err(CostError::ZeroComparators));
    }

    #[test]
    fn report_basics() {
        let unit = UnitCostParams::default();
        let r = cost_report(&cfg(49, 1e9, 784), &unit).unwrap();
        assert_eq!(r.cycles, 16);
        assert!((r.processing_time - 16e-9).abs() < 1e-21);
        assert!((r.area - 65.17).abs() < 1e-9);
        assert_eq!(r.wasted_comparator_cycles, 0);
        assert_eq!(r.total_energy, r.dynamic_energy + r.leakage_energy);
        assert_eq!(r.edp, r.total_energy * r.processing_time);

        let r = cost_report(&cfg(100, 1e9, 784), &unit).unwrap();
        assert_eq!(r.wasted_comparator_cycles, 16);

        let r = cost_report(&cfg(1, 1e9, 784), &unit).unwrap();
        assert!((r.processing_time - 784e-9).abs() < 1e-20);
    }

    #[test]
    fn timing_violation() {
        let unit = UnitCostParams::default();
        assert!(cost_report(&cfg(49, 25e9, 784), &unit).is_ok());
        assert!(matches!(
            cost_report(&cfg(49, 100e9, 784), &unit),
            Err(CostError::TimingViolation { .. })
        ));
        assert!(matches!(
            cost_report(&cfg(49, 0.0, 784), &unit),
            Err(CostError::BadFrequency(_))
        ));
    }

    #[test]
    fn sweep_keeps_failed_rows() {
        let unit = UnitCostParams::default();
        let rows = sweep(SweepAxis::Frequency, &[1e8, 1e9, 1e11], &cfg(49, 1e9, 784), &unit).unwrap();
        assert!(rows[0].is_ok() && rows[1].is_ok() && rows[2].is_err());
        let csv = sweep_csv(&rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CostReport::CSV_HEADER);
        assert_eq!(lines[3], ",,,,,,,");
        assert_eq!(
            sweep(SweepAxis::Frequency, &[], &cfg(49, 1e9, 784), &unit),
            Err(CostError::EmptySweep)
        );
        assert!(sweep(SweepAxis::Frequency, &[-1.0], &cfg(49, 1e9, 784), &unit).is_err());
    }

    #[test]
    fn capacity_edges() {
        let c = ComparatorBankConfig::mnist_default();
        assert_eq!(capacity(0.0, &c), Ok(0));
        assert_eq!(capacity(1e-3, &c), Ok(62_500));
        assert_eq!(capacity(16e-9, &c), Ok(1));
        assert!((throughput(60, &c).unwrap() - 960e-9).abs() < 1e-18);
    }
}
