//! Occurrence frequencies and the Jaccard co-occurrence matrix over items.
//!
//! `J(i, j)` is the number of subjects that selected both items divided by
//! the number that selected at least one of them. When neither item was ever
//! selected the ratio is taken to be 0, which keeps unselected items isolated.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Dataset, ItemId};

/// Number of subjects whose selection contains `item`.
pub fn occurrence_frequency(dataset: &Dataset, item: ItemId) -> Result<usize> {
    dataset.check_item(item)?;
    Ok(dataset
        .responses()
        .iter()
        .filter(|r| r.contains(item))
        .count())
}

/// Occurrence frequency of every item, indexed by item id.
pub fn frequencies(dataset: &Dataset) -> Vec<usize> {
    let mut freq = vec![0; dataset.num_items()];
    for r in dataset.responses() {
        for item in r.selected() {
            freq[item.index()] += 1;
        }
    }
    freq
}

/// `(both, either)`: subjects selecting both items and subjects selecting at
/// least one of them.
pub fn co_occurrence(dataset: &Dataset, i: ItemId, j: ItemId) -> Result<(usize, usize)> {
    dataset.check_item(i)?;
    dataset.check_item(j)?;
    let mut both = 0;
    let mut either = 0;
    for r in dataset.responses() {
        let (a, b) = (r.contains(i), r.contains(j));
        both += usize::from(a && b);
        either += usize::from(a || b);
    }
    Ok((both, either))
}

#[inline]
pub(crate) fn ratio(both: usize, either: usize) -> f64 {
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// Jaccard coefficient of two items, in `[0, 1]`.
pub fn jaccard(dataset: &Dataset, i: ItemId, j: ItemId) -> Result<f64> {
    let (both, either) = co_occurrence(dataset, i, j)?;
    Ok(ratio(both, either))
}

/// Dense symmetric item-by-item similarity matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    size: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from row-major values. Rejects non-square, asymmetric
    /// or out-of-range input.
    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {size}x{size} matrix, got {}",
                size * size,
                values.len()
            )));
        }
        for i in 0..size {
            for j in 0..size {
                let v = values[i * size + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "similarity ({i},{j}) = {v} outside [0,1]"
                    )));
                }
                if v != values[j * size + i] {
                    return Err(Error::InvalidArgument(format!(
                        "similarity matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { size, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Panics if either id is out of range.
    #[inline]
    pub fn get(&self, i: ItemId, j: ItemId) -> f64 {
        assert!(i.index() < self.size && j.index() < self.size);
        self.values[i.index() * self.size + j.index()]
    }

    pub fn row(&self, i: ItemId) -> &[f64] {
        let start = i.index() * self.size;
        &self.values[start..start + self.size]
    }

    /// Tab-separated dump in item id order, one row per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size {
            let row: Vec<String> = self.row(ItemId(i)).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Like [`to_tsv`](Self::to_tsv) with a header row and a leading label
    /// column.
    pub fn to_labeled_tsv(&self, dataset: &Dataset) -> String {
        let mut out = String::from("item");
        for label in dataset.item_labels().labels() {
            out.push('\t');
            out.push_str(label);
        }
        out.push('\n');
        for i in 0..self.size {
            out.push_str(dataset.item_label(ItemId(i)));
            for v in self.row(ItemId(i)) {
                out.push('\t');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Bitset of subjects per item.
struct Incidence {
    words: usize,
    bits: Vec<u64>,
}

impl Incidence {
    fn new(dataset: &Dataset) -> Self {
        let words = dataset.num_subjects().div_ceil(64).max(1);
        let mut bits = vec![0u64; words * dataset.num_items()];
        for r in dataset.responses() {
            let (w, b) = (r.subject.index() / 64, r.subject.index() % 64);
            for item in r.selected() {
                bits[item.index() * words + w] |= 1 << b;
            }
        }
        Self { words, bits }
    }

    fn column(&self, item: usize) -> &[u64] {
        &self.bits[item * self.words..(item + 1) * self.words]
    }
}

/// Jaccard coefficient for every item pair. Rows are computed in parallel;
/// every entry is bit-identical to [`jaccard`] on the same pair.
pub fn similarity_matrix(dataset: &Dataset) -> SimilarityMatrix {
    let n = dataset.num_items();
    let inc = Incidence::new(dataset);
    let freq: Vec<u32> = (0..n)
        .map(|i| inc.column(i).iter().map(|w| w.count_ones()).sum())
        .collect();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        let ci = inc.column(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let both: u32 = ci
                .iter()
                .zip(inc.column(j))
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            let either = freq[i] + freq[j] - both;
            *slot = ratio(both as usize, either as usize);
        }
    });
    SimilarityMatrix { size: n, values }
}
