//! train / infer / report: config-driven runs and their artifacts.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};

use tnn_core::config::RunConfig;
use tnn_core::dataio::LabeledDataset;
use tnn_core::encode::EncoderKind;
use tnn_core::metrics::{cycle_savings, histogram_table, purity, purity_table, spike_histogram, Table};
use tnn_core::network::{Network, NetworkConfig, RunSummary};
use tnn_core::trace::encode_summary;

use crate::{load_idx_images, load_idx_labels, write_file};

enum Split {
    Train,
    Test,
}

fn load_split(cfg: &RunConfig, split: Split) -> Result<LabeledDataset> {
    let (name, images, labels, limit) = match split {
        Split::Train => ("train", &cfg.train_images, &cfg.train_labels, cfg.train_limit),
        Split::Test => ("test", &cfg.test_images, &cfg.test_labels, cfg.test_limit),
    };
    let images = images.as_ref().ok_or_else(|| anyhow!("config has no {name}_images"))?;
    let labels = labels.as_deref().map(load_idx_labels).transpose()?;
    let dataset = LabeledDataset::from_parts(name, load_idx_images(images)?, labels)
        .with_context(|| format!("loading {name} set"))?;
    let dataset = match limit {
        Some(n) => dataset.take(n),
        None => dataset,
    };
    if dataset.is_empty() {
        return Err(anyhow!("{name} set {} has no images", images.display()));
    }
    Ok(dataset)
}

fn new_network(config: NetworkConfig, dataset: &LabeledDataset) -> Result<Network> {
    let pixels = dataset.images[0].pixels.len();
    Ok(Network::new(config, 2 * pixels)?)
}

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn write_table(out: &Path, stem: &str, table: &Table) -> Result<()> {
    write_file(&out.join(format!("{stem}.md")), table.to_markdown().as_bytes())?;
    write_file(&out.join(format!("{stem}.csv")), table.to_csv().as_bytes())
}

fn savings_table(runs: &[(String, &RunSummary)], period: u16) -> Table {
    let rows = runs
        .iter()
        .filter_map(|(name, s)| {
            let (realized, potential) = cycle_savings(&s.trace, period).ok()?;
            Some(vec![
                name.clone(),
                s.gamma_cycles.to_string(),
                s.total_clock_cycles.to_string(),
                format!("{realized:.4}"),
                format!("{potential:.4}"),
            ])
        })
        .collect();
    Table {
        title: format!("Gamma cycle savings against a fixed {period}-step cycle"),
        header: [
            "Run",
            "Gamma Cycles",
            "Clock Cycles",
            "Realized Savings",
            "Potential Savings",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    }
}

/// Summary CSV, gamma trace CSV and binary trace for one phase.
fn write_run(out: &Path, phase: &str, summary: &RunSummary) -> Result<()> {
    write_file(&out.join(format!("{phase}.summary.csv")), summary.to_csv().as_bytes())?;
    write_file(
        &out.join(format!("{phase}.gamma.csv")),
        summary.trace.to_csv().as_bytes(),
    )?;
    write_file(&out.join(format!("{phase}.trace.bin")), &encode_summary(summary))?;
    let hist = spike_histogram(summary);
    let title = format!("{phase} spike time occurrences");
    write_table(
        out,
        &format!("{phase}.histogram"),
        &histogram_table(&title, &[("Count", &hist)]),
    )?;
    match hist.mode() {
        Some((t, n)) => println!("{phase}: {} cycles, mode {n} at time {t}", summary.gamma_cycles),
        None => println!("{phase}: {} cycles", summary.gamma_cycles),
    }
    Ok(())
}

pub fn train(config: &Path, out: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let dataset = load_split(&cfg, Split::Train)?;
    let mut net = new_network(cfg.network.clone(), &dataset)?;
    let summary = net.train(&dataset, cfg.epochs)?;
    create_dir(out)?;
    write_file(&out.join("weights.txt"), net.weights_text().as_bytes())?;
    write_run(out, "train", &summary)?;
    write_table(
        out,
        "train.savings",
        &savings_table(&[("train".into(), &summary)], cfg.network.period),
    )
}

pub fn infer(config: &Path, weights: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let dataset = load_split(&cfg, Split::Test)?;
    let mut net = new_network(cfg.network.clone(), &dataset)?;
    if let Some(path) = weights {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        net.load_weights(&text)
            .with_context(|| format!("loading {}", path.display()))?;
    }
    let summary = net.infer(&dataset)?;
    create_dir(out)?;
    write_run(out, "test", &summary)?;
    write_table(
        out,
        "test.savings",
        &savings_table(&[("test".into(), &summary)], cfg.network.period),
    )?;
    if let Some(labels) = dataset.labels() {
        let report = purity(&summary.records, &labels)?;
        let name = display_name(cfg.network.encoder);
        let table = purity_table(&[name], &[(cfg.network.threshold(0), vec![report.purity])]);
        write_table(out, "test.purity", &table)?;
        println!("test: purity {:.4} over {} groups", report.purity, report.groups.len());
    }
    Ok(())
}

fn display_name(kind: EncoderKind) -> &'static str {
    match kind {
        EncoderKind::Linear { .. } => "Linear",
        EncoderKind::Log { .. } => "Log",
        EncoderKind::PosNeg { .. } => "PosNeg",
    }
}

/// Every encoder at every threshold: train, test, then tabulate.
pub fn report(config: &Path, thresholds: &[u32], out: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let train_set = load_split(&cfg, Split::Train)?;
    let test_set = load_split(&cfg, Split::Test)?;
    let labels = test_set.labels();
    let thresholds = if thresholds.is_empty() {
        vec![cfg.network.threshold(0)]
    } else {
        thresholds.to_vec()
    };
    let period = cfg.network.period;
    let posneg = match cfg.network.encoder {
        EncoderKind::PosNeg { threshold } => threshold,
        _ => 127,
    };
    let encoders = [
        EncoderKind::Linear { period },
        EncoderKind::Log { period },
        EncoderKind::PosNeg { threshold: posneg },
    ];
    let names: Vec<&str> = encoders.iter().map(|&e| display_name(e)).collect();

    create_dir(out)?;
    let mut purity_rows = Vec::new();
    let mut runs: Vec<(String, RunSummary)> = Vec::new();
    for &theta in &thresholds {
        let mut thresholds_cfg = cfg.network.thresholds.clone();
        thresholds_cfg[0] = theta;
        let mut train_hists = Vec::new();
        let mut test_hists = Vec::new();
        let mut purities = Vec::new();
        for &encoder in &encoders {
            let config = NetworkConfig {
                encoder,
                thresholds: thresholds_cfg.clone(),
                ..cfg.network.clone()
            };
            config.validate()?;
            let mut net = new_network(config, &train_set)?;
            let trained = net.train(&train_set, cfg.epochs)?;
            let tested = net.infer(&test_set)?;
            train_hists.push(spike_histogram(&trained));
            test_hists.push(spike_histogram(&tested));
            if let Some(labels) = &labels {
                purities.push(purity(&tested.records, labels)?.purity);
            }
            let name = display_name(encoder);
            runs.push((format!("{name} {theta} train"), trained));
            runs.push((format!("{name} {theta} test"), tested));
        }
        for (phase, hists) in [("train", &train_hists), ("test", &test_hists)] {
            let columns: Vec<(&str, _)> = names.iter().copied().zip(hists.iter()).collect();
            let title = format!("{phase} spike time occurrences, threshold {theta}");
            let table = histogram_table(&title, &columns);
            write_table(out, &format!("occurrences.{phase}.{theta}"), &table)?;
            println!("{}", table.to_markdown());
        }
        if labels.is_some() {
            purity_rows.push((theta, purities));
        }
    }
    if !purity_rows.is_empty() {
        let table = purity_table(&names, &purity_rows);
        write_table(out, "purity", &table)?;
        println!("{}", table.to_markdown());
    }
    let refs: Vec<(String, &RunSummary)> = runs.iter().map(|(n, s)| (n.clone(), s)).collect();
    let table = savings_table(&refs, period);
    write_table(out, "savings", &table)?;
    println!("{}", table.to_markdown());
    Ok(())
}
