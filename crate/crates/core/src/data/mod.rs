//! Dataset ingestion and batching.
//!
//! Pixels are stored as `u8 / 255.0` in a `[N, C, H, W]` tensor. Two on-disk
//! formats are read: the big-endian IDX files MNIST and FashionMNIST ship in,
//! and RAWDS, a little-endian container this crate writes for SVHN.

mod batch;
mod idx;
mod rawds;

pub use batch::{batch_iter, shuffled_indices, Batch, BatchIter};
pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use rawds::{load_rawds, save_rawds, RAWDS_MAGIC, RAWDS_VERSION};

use std::fmt;
use std::path::{Path, PathBuf};

use crate::engine::Tensor;
use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Tensor,
    pub labels: Vec<u8>,
    pub name: String,
    pub split: Split,
}

impl Dataset {
    /// Checks the dataset invariants: non-empty, labels below 10, pixel
    /// values in `[0, 1]`, and one of the two supported geometries.
    pub fn new(images: Tensor, labels: Vec<u8>, name: impl Into<String>, split: Split) -> Result<Self> {
        let (n, c, h, w) = images.dims4()?;
        if labels.len() != n {
            return Err(Error::CountMismatch {
                images: n,
                labels: labels.len(),
            });
        }
        if !matches!((c, h, w), (1, 28, 28) | (3, 32, 32)) {
            return Err(Error::Shape(format!(
                "unsupported image geometry {c}x{h}x{w}; expected 1x28x28 or 3x32x32"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::LabelOutOfRange {
                label: bad as usize,
                classes: NUM_CLASSES,
            });
        }
        if images.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Parameter("pixel values must lie in [0, 1]".into()));
        }
        Ok(Dataset {
            images,
            labels,
            name: name.into(),
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(C, H, W)` of a single image.
    pub fn image_shape(&self) -> (usize, usize, usize) {
        let s = self.images.shape();
        (s[1], s[2], s[3])
    }

    /// The first `n` samples (all of them if `n` exceeds the length).
    pub fn take(&self, n: usize) -> Result<Dataset> {
        let n = n.min(self.len());
        Ok(Dataset {
            images: self.images.slice_outer(0, n)?,
            labels: self.labels[..n].to_vec(),
            name: self.name.clone(),
            split: self.split,
        })
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Ok(Dataset {
            images: self.images.gather_outer(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: self.name.clone(),
            split: self.split,
        })
    }
}

/// The three benchmark datasets and where their files live under a data
/// directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    FashionMnist,
    Svhn,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::FashionMnist => "fashionmnist",
            DatasetKind::Svhn => "svhn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnist" => Ok(DatasetKind::Mnist),
            "fashionmnist" | "fashion-mnist" | "fashion_mnist" => Ok(DatasetKind::FashionMnist),
            "svhn" => Ok(DatasetKind::Svhn),
            other => Err(Error::Config(format!("unknown dataset {other:?} (mnist, fashionmnist, svhn)"))),
        }
    }

    pub fn channels(self) -> usize {
        match self {
            DatasetKind::Svhn => 3,
            _ => 1,
        }
    }

    pub fn input_size(self) -> usize {
        match self {
            DatasetKind::Svhn => 32,
            _ => 28,
        }
    }

    /// Files for one split: `(images, labels)` for IDX datasets, a single
    /// RAWDS file for SVHN (returned twice).
    pub fn files(self, data_dir: &Path, split: Split) -> (PathBuf, PathBuf) {
        let dir = data_dir.join(self.name());
        match self {
            DatasetKind::Svhn => {
                let f = dir.join(format!("{split}.rawds"));
                (f.clone(), f)
            }
            _ => {
                let prefix = match split {
                    Split::Train => "train",
                    Split::Test => "t10k",
                };
                (
                    dir.join(format!("{prefix}-images-idx3-ubyte")),
                    dir.join(format!("{prefix}-labels-idx1-ubyte")),
                )
            }
        }
    }

    pub fn load(self, data_dir: &Path, split: Split) -> Result<Dataset> {
        let (images, labels) = self.files(data_dir, split);
        let mut ds = match self {
            DatasetKind::Svhn => load_rawds(&images)?,
            _ => load_idx(&images, &labels)?,
        };
        ds.name = self.name().to_string();
        ds.split = split;
        Ok(ds)
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
