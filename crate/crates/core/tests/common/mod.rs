#![allow(dead_code)]

use prefdiag::model::Dataset;
use proptest::prelude::*;

/// Datasets with `1..=max_items` items and `1..=max_subjects` subjects, each
/// subject selecting an arbitrary (possibly empty) subset.
pub fn dataset(max_items: usize, max_subjects: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_items, 1..=max_subjects).prop_flat_map(|(n, s)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), s).prop_map(move |rows| {
            let selections: Vec<Vec<usize>> = rows
                .iter()
                .map(|row| (0..n).filter(|&j| row[j]).collect())
                .collect();
            Dataset::from_indices(n, &selections).unwrap()
        })
    })
}

/// Like [`dataset`] but every subject selects at least one item.
pub fn nonempty_dataset(max_items: usize, max_subjects: usize) -> impl Strategy<Value = Dataset> {
    dataset(max_items, max_subjects).prop_filter("empty selection", |d| d.responses().iter().all(|r| !r.is_empty()))
}

pub fn rmd() -> Dataset {
    Dataset::from_indices(6, &[vec![0, 1], vec![0, 1, 2], vec![3, 4], vec![4, 5, 1]]).unwrap()
}
