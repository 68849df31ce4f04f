//! Digit images for the 3-vs-5 task: IDX ingestion with bilinear 28×28→8×8
//! downsampling, a preprocessed 8×8 CSV path, and the row-per-step
//! sequence view.

use std::fs::File;
use std::io::{BufReader, Read as _};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};

use crate::error::{Error, Result};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;
/// Class counts of the full standard training+test set restricted to {3, 5}.
pub const FULL_THREES: usize = 7141;
pub const FULL_FIVES: usize = 6313;

/// 8×8 images in [0, 1], row-major, with digit labels 3 or 5.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl ImageDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// (threes, fives)
    pub fn class_counts(&self) -> (usize, usize) {
        let threes = self.labels.iter().filter(|&&l| l == 3).count();
        (threes, self.len() - threes)
    }

    /// Class 3 → 0, class 5 → 1.
    pub fn binary_labels(&self) -> Vec<usize> {
        self.labels.iter().map(|&l| usize::from(l == 5)).collect()
    }
}

fn read_u32(r: &mut impl std::io::Read, what: &str) -> Result<u32> {
    r.read_u32::<BigEndian>()
        .map_err(|e| Error::Data(format!("reading {what}: {e}")))
}

/// Raw IDX image file: (rows, cols, pixel bytes per image).
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let mut r = BufReader::new(
        File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
    );
    let magic = read_u32(&mut r, "image magic")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Data(format!(
            "{}: bad image magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}",
            path.display()
        )));
    }
    let count = read_u32(&mut r, "image count")? as usize;
    let rows = read_u32(&mut r, "row count")? as usize;
    let cols = read_u32(&mut r, "column count")? as usize;
    let mut images = Vec::with_capacity(count);
    let mut buf = vec![0u8; rows * cols];
    for i in 0..count {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Data(format!("image {i}: {e}")))?;
        images.push(buf.clone());
    }
    Ok((rows, cols, images))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let mut r = BufReader::new(
        File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
    );
    let magic = read_u32(&mut r, "label magic")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::Data(format!(
            "{}: bad label magic {magic:#010x}, expected {IDX_LABEL_MAGIC:#010x}",
            path.display()
        )));
    }
    let count = read_u32(&mut r, "label count")? as usize;
    let mut labels = vec![0u8; count];
    r.read_exact(&mut labels)
        .map_err(|e| Error::Data(format!("label bytes: {e}")))?;
    Ok(labels)
}

/// Bilinear resample of a row-major grid, pixel-center aligned (so constant
/// images stay constant and edges are not over-weighted).
pub fn bilinear_downsample(
    src: &[f64],
    src_rows: usize,
    src_cols: usize,
    dst_rows: usize,
    dst_cols: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(dst_rows * dst_cols);
    let ry = src_rows as f64 / dst_rows as f64;
    let rx = src_cols as f64 / dst_cols as f64;
    for i in 0..dst_rows {
        let y = ((i as f64 + 0.5) * ry - 0.5).clamp(0.0, (src_rows - 1) as f64);
        let y0 = y.floor() as usize;
        let y1 = (y0 + 1).min(src_rows - 1);
        let fy = y - y0 as f64;
        for j in 0..dst_cols {
            let x = ((j as f64 + 0.5) * rx - 0.5).clamp(0.0, (src_cols - 1) as f64);
            let x0 = x.floor() as usize;
            let x1 = (x0 + 1).min(src_cols - 1);
            let fx = x - x0 as f64;
            let top = src[y0 * src_cols + x0] * (1.0 - fx) + src[y0 * src_cols + x1] * fx;
            let bottom = src[y1 * src_cols + x0] * (1.0 - fx) + src[y1 * src_cols + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Build the 3-vs-5 dataset from IDX image+label files, downsampling to 8×8
/// and scaling pixels to [0, 1].
pub fn load_mnist_3v5_idx(images_path: &Path, labels_path: &Path) -> Result<ImageDataset> {
    let (rows, cols, raw) = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if raw.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} images but {} labels",
            raw.len(),
            labels.len()
        )));
    }
    let mut images = Vec::new();
    let mut kept_labels = Vec::new();
    for (img, &label) in raw.iter().zip(&labels) {
        if label != 3 && label != 5 {
            continue;
        }
        let gray: Vec<f64> = img.iter().map(|&b| b as f64 / 255.0).collect();
        let small = if (rows, cols) == (8, 8) {
            gray
        } else {
            bilinear_downsample(&gray, rows, cols, 8, 8)
        };
        images.push(small);
        kept_labels.push(label);
    }
    if images.is_empty() {
        return Err(Error::Data("no class-3 or class-5 images in input".into()));
    }
    Ok(ImageDataset {
        images,
        labels: kept_labels,
    })
}

/// Preprocessed CSV: 65 columns per row, 64 pixels then the digit label.
/// Pixels may be stored in [0, 1] or [0, 255]; byte-range files are scaled
/// down.
pub fn load_mnist_3v5_csv(path: &Path) -> Result<ImageDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        if record.len() != 65 {
            return Err(Error::Data(format!(
                "row {row}: {} columns, expected 65",
                record.len()
            )));
        }
        let pixels: Vec<f64> = record
            .iter()
            .take(64)
            .enumerate()
            .map(|(c, s)| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {row} column {c}: {s:?}")))
            })
            .collect::<Result<_>>()?;
        let label: u8 = record[64]
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("row {row}: label {:?}", &record[64])))?;
        if label != 3 && label != 5 {
            return Err(Error::Data(format!("row {row}: label {label}, expected 3 or 5")));
        }
        images.push(pixels);
        labels.push(label);
    }
    if images.is_empty() {
        return Err(Error::Data(format!("{}: no rows", path.display())));
    }
    let peak = images
        .iter()
        .flat_map(|img| img.iter())
        .fold(0.0f64, |m, v| m.max(*v));
    if peak > 1.0 {
        for img in &mut images {
            for p in img.iter_mut() {
                *p /= 255.0;
            }
        }
    }
    Ok(ImageDataset { images, labels })
}

/// Row-per-step sequence view of an 8×8 image: 8 steps of 8 pixel values,
/// top to bottom.
pub fn image_to_sequence(image: &[f64]) -> Result<Vec<Vec<f64>>> {
    if image.len() != 64 {
        return Err(Error::Input(format!("expected 64 pixels, got {}", image.len())));
    }
    Ok(image.chunks(8).map(|row| row.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use byteorder::WriteBytesExt;
    use std::io::Write;

    fn write_idx_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_u32::<BigEndian>(IDX_IMAGE_MAGIC).unwrap();
        f.write_u32::<BigEndian>(images.len() as u32).unwrap();
        f.write_u32::<BigEndian>(rows as u32).unwrap();
        f.write_u32::<BigEndian>(cols as u32).unwrap();
        for img in images {
            f.write_all(img).unwrap();
        }
        f
    }

    fn write_idx_labels(labels: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_u32::<BigEndian>(IDX_LABEL_MAGIC).unwrap();
        f.write_u32::<BigEndian>(labels.len() as u32).unwrap();
        f.write_all(labels).unwrap();
        f
    }

    #[test]
    fn constant_image_downsamples_to_constant() {
        let src = vec![0.6; 28 * 28];
        let out = bilinear_downsample(&src, 28, 28, 8, 8);
        assert_eq!(out.len(), 64);
        for v in out {
            assert_abs_diff_eq!(v, 0.6, epsilon = 1e-12);
        }
    }

    #[test]
    fn horizontal_gradient_downsamples_monotonically() {
        let src: Vec<f64> = (0..28 * 28).map(|i| (i % 28) as f64 / 27.0).collect();
        let out = bilinear_downsample(&src, 28, 28, 8, 8);
        for r in 0..8 {
            for c in 1..8 {
                assert!(out[r * 8 + c] > out[r * 8 + c - 1]);
            }
        }
        // every row identical for a purely horizontal gradient
        for r in 1..8 {
            for c in 0..8 {
                assert_abs_diff_eq!(out[r * 8 + c], out[c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn idx_roundtrip_filters_to_3_and_5() {
        let images = vec![vec![0u8; 28 * 28], vec![255u8; 28 * 28], vec![128u8; 28 * 28]];
        let imgf = write_idx_images(28, 28, &images);
        let labf = write_idx_labels(&[3, 7, 5]);
        let ds = load_mnist_3v5_idx(imgf.path(), labf.path()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels, vec![3, 5]);
        assert_eq!(ds.class_counts(), (1, 1));
        assert_eq!(ds.binary_labels(), vec![0, 1]);
        assert!(ds.images[0].iter().all(|&p| p == 0.0));
        for &p in &ds.images[1] {
            assert_abs_diff_eq!(p, 128.0 / 255.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_u32::<BigEndian>(0xdeadbeef).unwrap();
        let err = read_idx_labels(f.path()).unwrap_err();
        assert!(err.to_string().contains("magic"), "{err}");
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let imgf = write_idx_images(8, 8, &[vec![0u8; 64]]);
        let labf = write_idx_labels(&[3, 5]);
        assert!(load_mnist_3v5_idx(imgf.path(), labf.path()).is_err());
    }

    #[test]
    fn csv_mode_parses_and_rescales() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let pixels: Vec<String> = (0..64).map(|i| format!("{}", i * 4)).collect();
        writeln!(f, "{},3", pixels.join(",")).unwrap();
        writeln!(f, "{},5", vec!["0"; 64].join(",")).unwrap();
        let ds = load_mnist_3v5_csv(f.path()).unwrap();
        assert_eq!(ds.len(), 2);
        // max raw value 63·4 = 252 > 1 → scaled by 255
        assert_abs_diff_eq!(ds.images[0][63], 252.0 / 255.0, epsilon = 1e-12);
        assert_eq!(ds.labels, vec![3, 5]);
    }

    #[test]
    fn csv_mode_rejects_bad_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1,2,3").unwrap();
        assert!(load_mnist_3v5_csv(f.path()).is_err());

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{},9", vec!["0"; 64].join(",")).unwrap();
        let err = load_mnist_3v5_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("label 9"), "{err}");
    }

    #[test]
    fn sequence_view_rows_top_to_bottom() {
        let image: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let seq = image_to_sequence(&image).unwrap();
        assert_eq!(seq.len(), 8);
        assert_eq!(seq[0], (0..8).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(seq[7], (56..64).map(|i| i as f64).collect::<Vec<_>>());
        assert!(image_to_sequence(&[0.0; 10]).is_err());
    }
}
