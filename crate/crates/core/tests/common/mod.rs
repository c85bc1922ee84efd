#![allow(dead_code)]

use std::path::PathBuf;

use tnn_core::dataio::{read_idx_images, read_idx_labels, LabeledDataset};
use tnn_core::encode::EncoderKind;
use tnn_core::gamma::GammaMode;
use tnn_core::network::{LayerShape, NetworkConfig};
use tnn_core::stdp::StdpParams;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn desk(split: &str) -> LabeledDataset {
    let dir = data_dir();
    let images = std::fs::read(dir.join(format!("desk-{split}-images.idx3-ubyte"))).unwrap();
    let labels = std::fs::read(dir.join(format!("desk-{split}-labels.idx1-ubyte"))).unwrap();
    LabeledDataset::from_parts(
        split,
        read_idx_images(&images).unwrap(),
        Some(read_idx_labels(&labels, Some(9)).unwrap()),
    )
    .unwrap()
}

pub fn single_layer(columns: usize, neurons: usize, threshold: u32, seed: u64) -> NetworkConfig {
    NetworkConfig {
        layers: vec![LayerShape { columns, neurons }],
        period: 16,
        thresholds: vec![threshold],
        encoder: EncoderKind::PosNeg { threshold: 127 },
        stdp: StdpParams::default(),
        mode: GammaMode::Relaxed,
        seed,
    }
}

/// The desk-scale network used for the stabilization, savings and purity
/// checks.
pub fn desk_config() -> NetworkConfig {
    single_layer(4, 32, 4800, 1)
}

pub fn read_numbers(path: &str) -> Vec<u8> {
    std::fs::read_to_string(data_dir().join(path))
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect()
}
