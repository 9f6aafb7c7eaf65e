use rand::Rng;

use super::Dataset;
use crate::engine::Tensor;
use crate::rng::{stream, Stream};

#[derive(Debug, Clone)]
pub struct Batch {
    pub images: Tensor,
    pub labels: Vec<usize>,
}

/// Iterator over mini-batches in a fixed order. The final batch may be
/// short.
pub struct BatchIter<'a> {
    ds: &'a Dataset,
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

/// Fisher–Yates permutation of `0..n` driven by the shuffle stream of `seed`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream(seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

/// Batches of `ds` in original order, or in a seed-determined shuffled
/// order. A zero batch size is treated as one.
pub fn batch_iter(ds: &Dataset, batch_size: usize, shuffle: bool, seed: u64) -> BatchIter<'_> {
    let order = if shuffle {
        shuffled_indices(ds.len(), seed)
    } else {
        (0..ds.len()).collect()
    };
    BatchIter {
        ds,
        order,
        batch_size: batch_size.max(1),
        pos: 0,
    }
}

impl BatchIter<'_> {
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let idx = &self.order[self.pos..end];
        self.pos = end;
        Some(Batch {
            images: self.ds.images.gather_outer(idx).expect("indices in range"),
            labels: idx.iter().map(|&i| self.ds.labels[i] as usize).collect(),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.order.len() - self.pos).div_ceil(self.batch_size);
        (left, Some(left))
    }
}
