//! MNIST-style IDX ingestion and the one-image-per-line text format used by
//! the encoder test bench.
//!
//! IDX image layout (big-endian):
//!
//! ```text
//! 0..4    magic 0x00000803
//! 4..8    image count
//! 8..12   rows
//! 12..16  cols
//! 16..    count * rows * cols bytes, row-major
//! ```
//!
//! Label files use magic `0x00000801`, a count, then one byte per label.

use std::io::{self, BufRead, Write};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated IDX stream: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("IDX dimensions overflow: {count} x {rows} x {cols}")]
    DimensionOverflow { count: u32, rows: u32, cols: u32 },
    #[error("label {value} at record {index} is out of range 0..={max}")]
    LabelOutOfRange { index: usize, value: u8, max: u8 },
    #[error("line {line}: expected {expected} tokens, found {found}")]
    TokenCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: token {token:?} is not an integer")]
    BadToken { line: usize, token: String },
    #[error("line {line}: value {value} outside 0..=255")]
    ValueOutOfRange { line: usize, value: i64 },
    #[error("image has {found} pixels, expected {expected}")]
    PixelCount { expected: usize, found: usize },
    #[error("dataset images disagree on shape: {0}x{1} vs {2}x{3}")]
    MixedShapes(usize, usize, usize, usize),
    #[error("dataset labels must be present for all images or none")]
    PartialLabels,
    #[error("{images} images but {labels} labels")]
    LabelCountMismatch { images: usize, labels: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A fixed-size grid of 8-bit intensities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelImage {
    pub pixels: Vec<u8>,
    pub width: usize,
    pub height: usize,
    pub label: Option<u8>,
}

impl PixelImage {
    pub fn new(pixels: Vec<u8>, width: usize, height: usize) -> Result<Self, DataError> {
        if pixels.len() != width * height {
            return Err(DataError::PixelCount {
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self {
            pixels,
            width,
            height,
            label: None,
        })
    }

    pub fn with_label(mut self, label: u8) -> Self {
        self.label = Some(label);
        self
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct LabeledDataset {
    pub name: String,
    pub images: Vec<PixelImage>,
}

impl LabeledDataset {
    /// Checks shape agreement and all-or-none labelling.
    pub fn new(name: impl Into<String>, images: Vec<PixelImage>) -> Result<Self, DataError> {
        if let Some(first) = images.first() {
            let labelled = first.label.is_some();
            for img in &images[1..] {
                if (img.width, img.height) != (first.width, first.height) {
                    return Err(DataError::MixedShapes(first.width, first.height, img.width, img.height));
                }
                if img.label.is_some() != labelled {
                    return Err(DataError::PartialLabels);
                }
            }
        }
        Ok(Self {
            name: name.into(),
            images,
        })
    }

    /// Joins a parallel label file by index.
    pub fn from_parts(
        name: impl Into<String>,
        mut images: Vec<PixelImage>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self, DataError> {
        if let Some(labels) = labels {
            if labels.len() != images.len() {
                return Err(DataError::LabelCountMismatch {
                    images: images.len(),
                    labels: labels.len(),
                });
            }
            for (img, l) in images.iter_mut().zip(labels) {
                img.label = Some(l);
            }
        }
        Self::new(name, images)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn labels(&self) -> Option<Vec<u8>> {
        self.images.iter().map(|i| i.label).collect()
    }

    /// First `n` images (or all of them).
    pub fn take(&self, n: usize) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            images: self.images.iter().take(n).cloned().collect(),
        }
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated {
            needed: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), DataError> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(DataError::BadMagic { expected, found });
    }
    Ok(())
}

/// Parses an IDX3 image stream. Pixels are returned as stored, no scaling.
pub fn read_idx_images(bytes: &[u8]) -> Result<Vec<PixelImage>, DataError> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4)?;
    let rows = be_u32(bytes, 8)?;
    let cols = be_u32(bytes, 12)?;
    let overflow = DataError::DimensionOverflow { count, rows, cols };
    let per_image = (rows as usize)
        .checked_mul(cols as usize)
        .ok_or(DataError::DimensionOverflow { count, rows, cols })?;
    let needed = per_image
        .checked_mul(count as usize)
        .and_then(|n| n.checked_add(16))
        .ok_or(overflow)?;
    if bytes.len() < needed {
        return Err(DataError::Truncated {
            needed,
            found: bytes.len(),
        });
    }
    let payload = &bytes[16..needed];
    if per_image == 0 {
        return Ok((0..count)
            .map(|_| PixelImage {
                pixels: Vec::new(),
                width: cols as usize,
                height: rows as usize,
                label: None,
            })
            .collect());
    }
    Ok(payload
        .chunks_exact(per_image)
        .map(|chunk| PixelImage {
            pixels: chunk.to_vec(),
            width: cols as usize,
            height: rows as usize,
            label: None,
        })
        .collect())
}

/// Parses an IDX1 label stream. With `max_label = Some(m)` every label must be
/// at most `m` (9 for MNIST).
pub fn read_idx_labels(bytes: &[u8], max_label: Option<u8>) -> Result<Vec<u8>, DataError> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let needed = count.checked_add(8).ok_or(DataError::DimensionOverflow {
        count: count as u32,
        rows: 1,
        cols: 1,
    })?;
    if bytes.len() < needed {
        return Err(DataError::Truncated {
            needed,
            found: bytes.len(),
        });
    }
    let labels = bytes[8..needed].to_vec();
    if let Some(max) = max_label {
        if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(DataError::LabelOutOfRange { index, value, max });
        }
    }
    Ok(labels)
}

/// Serializes images as space-separated decimal pixels, one image per line.
pub fn write_linetext<W: Write>(images: &[PixelImage], mut sink: W) -> Result<(), DataError> {
    for img in images {
        let mut line = String::with_capacity(img.pixels.len() * 4);
        for (i, p) in img.pixels.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&p.to_string());
        }
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    sink.flush()?;
    Ok(())
}

/// Inverse of [`write_linetext`]. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn read_linetext<R: BufRead>(source: R, width: usize, height: usize) -> Result<Vec<PixelImage>, DataError> {
    let expected = width * height;
    let mut images = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut pixels = Vec::with_capacity(expected);
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DataError::BadToken {
                line: lineno,
                token: token.to_string(),
            })?;
            if !(0..=255).contains(&value) {
                return Err(DataError::ValueOutOfRange { line: lineno, value });
            }
            pixels.push(value as u8);
        }
        if pixels.len() != expected {
            return Err(DataError::TokenCount {
                line: lineno,
                expected,
                found: pixels.len(),
            });
        }
        images.push(PixelImage {
            pixels,
            width,
            height,
            label: None,
        });
    }
    Ok(images)
}

/// Builds an in-memory IDX3 stream. Handy for tests and for re-exporting
/// subsets.
pub fn idx_images_bytes(images: &[PixelImage], rows: u32, cols: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * (rows * cols) as usize);
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    for img in images {
        out.extend_from_slice(&img.pixels);
    }
    out
}

pub fn idx_labels_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn two_mnist_images() {
        let mut bytes = header(0x803, &[2, 28, 28]);
        bytes.extend((0..1568).map(|i| (i % 256) as u8));
        let images = read_idx_images(&bytes).unwrap();
        assert_eq!(images.len(), 2);
        assert!(images.iter().all(|i| i.len() == 784 && i.width == 28));
        assert_eq!(images[1].pixels[0], (784 % 256) as u8);
    }

    #[test]
    fn zero_images() {
        let bytes = header(0x803, &[0, 28, 28]);
        assert!(read_idx_images(&bytes).unwrap().is_empty());
    }

    #[test]
    fn image_errors_are_distinct() {
        let mut short = header(0x803, &[2, 28, 28]);
        short.extend(vec![0u8; 1567]);
        assert!(matches!(read_idx_images(&short), Err(DataError::Truncated { .. })));

        let bad = header(0x801, &[0, 28, 28]);
        assert!(matches!(read_idx_images(&bad), Err(DataError::BadMagic { .. })));

        let huge = header(0x803, &[u32::MAX, u32::MAX, u32::MAX]);
        assert!(matches!(
            read_idx_images(&huge),
            Err(DataError::DimensionOverflow { .. })
        ));

        assert!(matches!(read_idx_images(&[0, 0]), Err(DataError::Truncated { .. })));
    }

    #[test]
    fn labels() {
        let mut bytes = header(0x801, &[3]);
        bytes.extend([4, 0, 9]);
        assert_eq!(read_idx_labels(&bytes, Some(9)).unwrap(), vec![4, 0, 9]);
        assert!(read_idx_labels(&header(0x801, &[0]), Some(9)).unwrap().is_empty());

        let mut bad = header(0x801, &[2]);
        bad.extend([1, 12]);
        assert!(matches!(
            read_idx_labels(&bad, Some(9)),
            Err(DataError::LabelOutOfRange {
                index: 1,
                value: 12,
                ..
            })
        ));
        assert_eq!(read_idx_labels(&bad, None).unwrap(), vec![1, 12]);
        assert!(matches!(
            read_idx_labels(&header(0x803, &[0]), None),
            Err(DataError::BadMagic { .. })
        ));
    }

    #[test]
    fn linetext_write() {
        let img = PixelImage::new(vec![0, 255, 127, 1], 2, 2).unwrap();
        let mut out = Vec::new();
        write_linetext(&[img], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0 255 127 1\n");

        let mut empty = Vec::new();
        write_linetext(&[], &mut empty).unwrap();
        assert!(empty.is_empty());

        let big = PixelImage::new(vec![7; 784], 28, 28).unwrap();
        let mut out = Vec::new();
        write_linetext(&[big], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.split_whitespace().count(), 784);
    }

    #[test]
    fn linetext_read_errors() {
        let ok = read_linetext("0 255 127 1\n".as_bytes(), 2, 2).unwrap();
        assert_eq!(ok[0].pixels, vec![0, 255, 127, 1]);

        let short = vec!["0"; 783].join(" ");
        assert!(matches!(
            read_linetext(short.as_bytes(), 28, 28),
            Err(DataError::TokenCount {
                line: 1,
                expected: 784,
                found: 783
            })
        ));
        assert!(matches!(
            read_linetext("0 1 x 3".as_bytes(), 2, 2),
            Err(DataError::BadToken { .. })
        ));
        assert!(matches!(
            read_linetext("0 1 256 3".as_bytes(), 2, 2),
            Err(DataError::ValueOutOfRange { value: 256, .. })
        ));
    }

    #[test]
    fn dataset_validation() {
        let a = PixelImage::new(vec![0; 4], 2, 2).unwrap();
        let b = PixelImage::new(vec![0; 6], 3, 2).unwrap();
        assert!(matches!(
            LabeledDataset::new("x", vec![a.clone(), b]),
            Err(DataError::MixedShapes(..))
        ));
        assert!(matches!(
            LabeledDataset::new("x", vec![a.clone().with_label(1), a.clone()]),
            Err(DataError::PartialLabels)
        ));
        assert!(matches!(
            LabeledDataset::from_parts("x", vec![a.clone()], Some(vec![1, 2])),
            Err(DataError::LabelCountMismatch { .. })
        ));
        let ds = LabeledDataset::from_parts("x", vec![a.clone(), a], Some(vec![3, 4])).unwrap();
        assert_eq!(ds.labels(), Some(vec![3, 4]));
    }

    proptest! {
        #[test]
        fn linetext_round_trip(
            images in prop::collection::vec(prop::collection::vec(any::<u8>(), 12), 0..10)
        ) {
            let images: Vec<PixelImage> = images
                .into_iter()
                .map(|p| PixelImage::new(p, 4, 3).unwrap())
                .collect();
            let mut buf = Vec::new();
            write_linetext(&images, &mut buf).unwrap();
            let back = read_linetext(buf.as_slice(), 4, 3).unwrap();
            prop_assert_eq!(back, images);
        }

        #[test]
        fn idx_preserves_order(
            images in prop::collection::vec(prop::collection::vec(any::<u8>(), 6), 0..8)
        ) {
            let images: Vec<PixelImage> = images
                .into_iter()
                .map(|p| PixelImage::new(p, 3, 2).unwrap())
                .collect();
            let bytes = idx_images_bytes(&images, 2, 3);
            prop_assert_eq!(read_idx_images(&bytes).unwrap(), images);
        }
    }
}
