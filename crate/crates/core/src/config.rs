//! Run configuration: a flat `key = value` file (TOML syntax, no tables).
//!
//! ```toml
//! train_images = "desk-train-images.idx3-ubyte"
//! train_labels = "desk-train-labels.idx1-ubyte"
//! test_images  = "desk-test-images.idx3-ubyte"
//! test_labels  = "desk-test-labels.idx1-ubyte"
//! epochs = 3
//! layers = "64x10"          # or "64x10,8x4"
//! threshold = 2744          # or "2744,6", one per layer
//! encoder = "posneg"        # posneg | linear | log
//! posneg_threshold = 127
//! period = 16
//! mode = "relaxed"          # fixed | relaxed
//! seed = 1
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::encode::EncoderKind;
use crate::gamma::GammaMode;
use crate::network::{LayerShape, NetworkConfig};
use crate::stdp::StdpParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: {key}: {message}")]
    Invalid {
        line: usize,
        key: &'static str,
        message: String,
    },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberList {
    One(u32),
    Many(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    train_images: Option<String>,
    train_labels: Option<String>,
    test_images: Option<String>,
    test_labels: Option<String>,
    train_limit: Option<usize>,
    test_limit: Option<usize>,
    #[serde(default = "default_epochs")]
    epochs: u32,
    layers: String,
    threshold: NumberList,
    #[serde(default = "default_encoder")]
    encoder: String,
    #[serde(default = "default_posneg_threshold")]
    posneg_threshold: u32,
    #[serde(default = "default_period")]
    period: u32,
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default)]
    seed: u64,
    u_capture: Option<u8>,
    u_backoff: Option<u8>,
    u_search: Option<u8>,
    u_quiet: Option<u8>,
    w_max: Option<u8>,
}

fn default_epochs() -> u32 {
    1
}
fn default_encoder() -> String {
    "posneg".into()
}
fn default_posneg_threshold() -> u32 {
    127
}
fn default_period() -> u32 {
    16
}
fn default_mode() -> String {
    "relaxed".into()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub epochs: u32,
}

/// 1-based line on which `key` is assigned, for diagnostics.
fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(0, |i| i + 1)
}

pub fn parse_layers(s: &str) -> Result<Vec<LayerShape>, String> {
    s.split(',')
        .map(|part| {
            let (c, n) = part
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| format!("{part:?} is not COLUMNSxNEURONS"))?;
            let columns = c.trim().parse().map_err(|_| format!("bad column count {c:?}"))?;
            let neurons = n.trim().parse().map_err(|_| format!("bad neuron count {n:?}"))?;
            Ok(LayerShape { columns, neurons })
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let invalid = |key: &'static str, message: String| ConfigError::Invalid {
            line: line_of(text, key),
            key,
            message,
        };

        let layers = parse_layers(&raw.layers).map_err(|m| invalid("layers", m))?;
        let thresholds = match raw.threshold {
            NumberList::One(v) => vec![v],
            NumberList::Many(s) => s
                .split(',')
                .map(|p| p.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|e| invalid("threshold", e.to_string()))?,
        };
        let period = u16::try_from(raw.period)
            .ok()
            .filter(|&p| p >= 2)
            .ok_or_else(|| invalid("period", format!("{} is outside 2..=65534", raw.period)))?;
        let posneg = u8::try_from(raw.posneg_threshold).map_err(|_| {
            invalid(
                "posneg_threshold",
                format!("{} is outside 0..=255", raw.posneg_threshold),
            )
        })?;
        let encoder =
            EncoderKind::from_name(&raw.encoder, posneg, period).map_err(|e| invalid("encoder", e.to_string()))?;
        let mode: GammaMode = raw.mode.parse().map_err(|m| invalid("mode", m))?;

        let d = StdpParams::default();
        let stdp = StdpParams {
            u_capture: raw.u_capture.unwrap_or(d.u_capture),
            u_backoff: raw.u_backoff.unwrap_or(d.u_backoff),
            u_search: raw.u_search.unwrap_or(d.u_search),
            u_quiet: raw.u_quiet.unwrap_or(d.u_quiet),
            w_max: raw.w_max.unwrap_or(d.w_max),
        };
        if stdp.w_max == 0 || stdp.w_max > 127 {
            return Err(invalid("w_max", format!("{} is outside 1..=127", stdp.w_max)));
        }

        let network = NetworkConfig {
            layers,
            period,
            thresholds,
            encoder,
            stdp,
            mode,
            seed: raw.seed,
        };
        network.validate().map_err(|e| {
            let key = match e {
                crate::network::NetworkError::ThresholdCount { .. }
                | crate::network::NetworkError::ZeroThreshold(_) => "threshold",
                _ => "layers",
            };
            invalid(key, e.to_string())
        })?;

        let resolve = |p: Option<String>| p.map(|p| base_dir.join(p));
        Ok(Self {
            network,
            train_images: resolve(raw.train_images),
            train_labels: resolve(raw.train_labels),
            test_images: resolve(raw.test_images),
            test_labels: resolve(raw.test_labels),
            train_limit: raw.train_limit,
            test_limit: raw.test_limit,
            epochs: raw.epochs,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
train_images = "train.idx"
epochs = 3
layers = "64x10"
threshold = 2744
encoder = "posneg"
seed = 9
"#;

    #[test]
    fn parses_defaults() {
        let c = RunConfig::parse(GOOD, Path::new("/data")).unwrap();
        assert_eq!(
            c.network.layers,
            vec![LayerShape {
                columns: 64,
                neurons: 10
            }]
        );
        assert_eq!(c.network.thresholds, vec![2744]);
        assert_eq!(c.network.period, 16);
        assert_eq!(c.network.mode, GammaMode::Relaxed);
        assert_eq!(c.network.encoder, EncoderKind::PosNeg { threshold: 127 });
        assert_eq!(c.network.stdp, StdpParams::default());
        assert_eq!(c.train_images, Some(PathBuf::from("/data/train.idx")));
        assert_eq!(c.epochs, 3);
    }

    #[test]
    fn multi_layer_thresholds() {
        let text = GOOD
            .replace("\"64x10\"", "\"64x10, 8x4\"")
            .replace("2744", "\"2744,6\"");
        let c = RunConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(c.network.layers.len(), 2);
        assert_eq!(c.network.thresholds, vec![2744, 6]);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = GOOD.replace("posneg", "gray");
        let err = RunConfig::parse(&bad, Path::new(".")).unwrap_err().to_string();
        assert!(err.starts_with("line 6: encoder"), "{err}");

        let bad = GOOD.replace("64x10", "64by10");
        let err = RunConfig::parse(&bad, Path::new(".")).unwrap_err().to_string();
        assert!(err.starts_with("line 4: layers"), "{err}");

        let unknown = format!("{GOOD}colour = 3\n");
        let err = RunConfig::parse(&unknown, Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("line 8"), "{err}");

        let err = RunConfig::parse("layers = \"1x1\"\n", Path::new("."))
            .unwrap_err()
            .to_string();
        assert!(err.contains("threshold"), "{err}");
    }
}
