//! `tnn`: encode images, sweep the encoder cost model, verify the gamma
//! controller and run train/infer experiments.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 a verification
//! scenario failed.

mod experiment;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tnn_core::dataio::{read_idx_images, read_idx_labels, read_linetext, LabeledDataset, PixelImage};
use tnn_core::encode::{posneg_bits, EncoderKind, EncoderTable};
use tnn_core::gamma::{verify_scenarios, Fault};
use tnn_core::pipeline::{sweep, sweep_csv, ComparatorBankConfig, SweepAxis, UnitCostParams};

#[derive(Parser)]
#[command(name = "tnn", version, about = "Temporal neural network column simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncoderName {
    Posneg,
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Comparators,
    Frequency,
    ImageSize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultName {
    None,
    LatchNeverClears,
    ControlIgnored,
}

#[derive(Subcommand)]
enum Command {
    /// Encode images into spike-time text files.
    ///
    /// posneg writes PREFIX.pos.txt and PREFIX.neg.txt (one line of 0/1 bits
    /// per image); linear and log write PREFIX.spikes.txt (one volley per line,
    /// positive lines then negative lines, `inf` for no spike).
    Encode {
        /// IDX3 image file
        #[arg(long, conflicts_with = "text", required_unless_present = "text")]
        idx: Option<PathBuf>,
        /// Line-text image file (one image per line)
        #[arg(long)]
        text: Option<PathBuf>,
        #[arg(long, default_value_t = 28)]
        width: usize,
        #[arg(long, default_value_t = 28)]
        height: usize,
        /// IDX1 label file; labels are copied to PREFIX.labels.txt
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "posneg")]
        encoder: EncoderName,
        /// posneg pixel threshold
        #[arg(long, default_value_t = 127)]
        threshold: u8,
        /// gamma period for linear/log
        #[arg(long, default_value_t = 16)]
        period: u16,
        /// Encode only the first N images
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the comparator-bank cost model along one axis and print CSV.
    CostSweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated sweep values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 49)]
        comparators: u64,
        #[arg(long, default_value_t = 1e9)]
        frequency: f64,
        #[arg(long, default_value_t = 784)]
        pixels: u64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the three gamma-reset functional scenarios.
    VerifyGamma {
        #[arg(long, default_value_t = 16)]
        period: u16,
        #[arg(long, value_enum, default_value = "none", hide = true)]
        inject_fault: FaultName,
    },
    /// Train on the configured training set and write weights and traces.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured test set without learning.
    Infer {
        #[arg(long)]
        config: PathBuf,
        /// Weights written by `train`; defaults to the seeded initial weights
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and test every encoder at every threshold and write the
    /// occurrence, purity and savings tables.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated thresholds; defaults to the config's threshold
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Encode {
            idx,
            text,
            width,
            height,
            labels,
            encoder,
            threshold,
            period,
            limit,
            out,
        } => {
            let kind = match encoder {
                EncoderName::Posneg => EncoderKind::PosNeg { threshold },
                EncoderName::Linear => EncoderKind::Linear { period }.validate()?,
                EncoderName::Log => EncoderKind::Log { period }.validate()?,
            };
            let images = match (&idx, &text) {
                (Some(path), _) => load_idx_images(path)?,
                (None, Some(path)) => {
                    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    read_linetext(BufReader::new(file), width, height)
                        .with_context(|| format!("reading {}", path.display()))?
                }
                (None, None) => bail!("one of --idx or --text is required"),
            };
            let with_labels = labels.is_some();
            let labels = labels.map(|p| load_idx_labels(&p)).transpose()?;
            let mut dataset = LabeledDataset::from_parts("input", images, labels)?;
            if let Some(n) = limit {
                dataset = dataset.take(n);
            }
            encode(&dataset, kind, &out, with_labels)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CostSweep {
            axis,
            values,
            comparators,
            frequency,
            pixels,
            out,
        } => {
            let axis = match axis {
                Axis::Comparators => SweepAxis::ComparatorCount,
                Axis::Frequency => SweepAxis::Frequency,
                Axis::ImageSize => SweepAxis::ImageSize,
            };
            let base = ComparatorBankConfig {
                comparator_count: comparators,
                clock_frequency_hz: frequency,
                pixels_per_image: pixels,
            };
            base.validate()?;
            let rows = sweep(axis, &values, &base, &UnitCostParams::default())?;
            for (v, row) in values.iter().zip(&rows) {
                if let Err(e) = row {
                    eprintln!("warning: value {v}: {e}");
                }
            }
            let csv = sweep_csv(&rows);
            match out {
                Some(path) => write_file(&path, csv.as_bytes())?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyGamma { period, inject_fault } => {
            let fault = match inject_fault {
                FaultName::None => Fault::None,
                FaultName::LatchNeverClears => Fault::LatchNeverClears,
                FaultName::ControlIgnored => Fault::ControlIgnored,
            };
            let results = verify_scenarios(period, fault)?;
            let passed = results.iter().filter(|r| r.passed).count();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            println!("{passed}/{} scenarios passed", results.len());
            Ok(if passed == results.len() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Train { config, out } => experiment::train(&config, &out).map(|_| ExitCode::SUCCESS),
        Command::Infer { config, weights, out } => {
            experiment::infer(&config, weights.as_deref(), &out).map(|_| ExitCode::SUCCESS)
        }
        Command::Report {
            config,
            thresholds,
            out,
        } => experiment::report(&config, &thresholds, &out).map(|_| ExitCode::SUCCESS),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// A zero-byte file is an empty image set.
pub(crate) fn load_idx_images(path: &Path) -> Result<Vec<PixelImage>> {
    let bytes = read_file(path)?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    read_idx_images(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn load_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_file(path)?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    read_idx_labels(&bytes, None).with_context(|| format!("parsing {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn encode(dataset: &LabeledDataset, kind: EncoderKind, prefix: &Path, with_labels: bool) -> Result<()> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    match kind {
        EncoderKind::PosNeg { threshold } => {
            let (mut pos, mut neg) = (String::new(), String::new());
            for img in &dataset.images {
                let (p, n): (Vec<String>, Vec<String>) = img
                    .pixels
                    .iter()
                    .map(|&v| {
                        let (p, n) = posneg_bits(v, threshold);
                        (p.to_string(), n.to_string())
                    })
                    .unzip();
                pos.push_str(&p.join(" "));
                pos.push('\n');
                neg.push_str(&n.join(" "));
                neg.push('\n');
            }
            write_file(&with_suffix(prefix, ".pos.txt"), pos.as_bytes())?;
            write_file(&with_suffix(prefix, ".neg.txt"), neg.as_bytes())?;
        }
        EncoderKind::Linear { .. } | EncoderKind::Log { .. } => {
            let table = EncoderTable::new(kind);
            let mut spikes = String::new();
            for img in &dataset.images {
                spikes.push_str(&table.encode(&img.pixels).to_line());
                spikes.push('\n');
            }
            write_file(&with_suffix(prefix, ".spikes.txt"), spikes.as_bytes())?;
        }
    }
    if with_labels {
        let text: String = dataset
            .labels()
            .unwrap_or_default()
            .iter()
            .map(|l| format!("{l}\n"))
            .collect();
        write_file(&with_suffix(prefix, ".labels.txt"), text.as_bytes())?;
    }
    Ok(())
}
