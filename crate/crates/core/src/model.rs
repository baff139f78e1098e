//! Domain types for selection data.
//!
//! A [`Dataset`] holds exactly one [`ResponseDatum`] per subject: the subject's
//! identifier paired with the set of items it selected as preferable. Items and
//! subjects are interned to dense zero-based ids; the original labels travel
//! with the dataset so renderers can display them.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense zero-based item identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub usize);

/// Dense zero-based subject identifier. Equal to the index of the subject's
/// response in [`Dataset::responses`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectId(pub usize);

impl ItemId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl SubjectId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for SubjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PID{}", self.0)
    }
}

/// Bijection between string labels and dense ids, in first-interned order.
#[derive(Clone, Debug, Default)]
pub struct LabelTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `label`, assigning the next free id if it is new.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

impl PartialEq for LabelTable {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for LabelTable {}

/// One subject's answer: the subject paired with the items it selected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseDatum {
    pub subject: SubjectId,
    selected: Vec<ItemId>,
}

impl ResponseDatum {
    /// Sorts and deduplicates `selected`.
    pub fn new(subject: SubjectId, mut selected: Vec<ItemId>) -> Self {
        selected.sort_unstable();
        selected.dedup();
        Self { subject, selected }
    }

    /// Selected items in ascending id order.
    pub fn selected(&self) -> &[ItemId] {
        &self.selected
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.selected.binary_search(&item).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Non-fatal findings about a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Warning {
    /// The subject selected nothing; it is left out of profile computation.
    EmptySelection(SubjectId),
    /// Nobody selected the item; it ends up as an isolated node.
    NeverSelected(ItemId),
}

/// The full set of answers, one per subject, over a fixed item catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    items: LabelTable,
    subjects: LabelTable,
    responses: Vec<ResponseDatum>,
}

impl Dataset {
    /// Builds a dataset from labelled rows.
    ///
    /// With `catalog = Some(..)` every selected label must be declared there;
    /// otherwise the catalog is inferred in order of first appearance.
    pub fn from_labeled<S, I>(catalog: Option<&[S]>, rows: I) -> Result<Self>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (String, Vec<String>)>,
    {
        let mut items = LabelTable::new();
        let closed = catalog.is_some();
        for label in catalog.into_iter().flatten() {
            items.intern(label.as_ref());
        }
        let mut subjects = LabelTable::new();
        let mut responses = Vec::new();
        for (subject, selected) in rows {
            if subjects.get(&subject).is_some() {
                return Err(Error::DuplicateSubject { label: subject });
            }
            let sid = SubjectId(subjects.intern(&subject));
            let mut ids = Vec::with_capacity(selected.len());
            for label in &selected {
                let id = match items.get(label) {
                    Some(id) => id,
                    None if closed => {
                        return Err(Error::UnknownItem {
                            label: label.clone(),
                        })
                    }
                    None => items.intern(label),
                };
                ids.push(ItemId(id));
            }
            responses.push(ResponseDatum::new(sid, ids));
        }
        Self::from_parts(items, subjects, responses)
    }

    /// Builds a dataset from raw item indices, labelling items `a0, a1, ..`
    /// and subjects `s0, s1, ..`.
    pub fn from_indices(num_items: usize, selections: &[Vec<usize>]) -> Result<Self> {
        let mut items = LabelTable::new();
        for j in 0..num_items {
            items.intern(&format!("a{j}"));
        }
        let mut subjects = LabelTable::new();
        let mut responses = Vec::with_capacity(selections.len());
        for (i, sel) in selections.iter().enumerate() {
            subjects.intern(&format!("s{i}"));
            let mut ids = Vec::with_capacity(sel.len());
            for &j in sel {
                if j >= num_items {
                    return Err(Error::item_index(j, num_items));
                }
                ids.push(ItemId(j));
            }
            responses.push(ResponseDatum::new(SubjectId(i), ids));
        }
        Self::from_parts(items, subjects, responses)
    }

    fn from_parts(
        items: LabelTable,
        subjects: LabelTable,
        responses: Vec<ResponseDatum>,
    ) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidArgument(
                "catalog must contain at least one item".into(),
            ));
        }
        debug_assert_eq!(subjects.len(), responses.len());
        debug_assert!(responses
            .iter()
            .enumerate()
            .all(|(l, r)| r.subject.index() == l));
        Ok(Self {
            items,
            subjects,
            responses,
        })
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_subjects(&self) -> usize {
        self.responses.len()
    }

    pub fn responses(&self) -> &[ResponseDatum] {
        &self.responses
    }

    pub fn response(&self, subject: SubjectId) -> Result<&ResponseDatum> {
        self.responses
            .get(subject.index())
            .ok_or_else(|| Error::subject_index(subject.index(), self.num_subjects()))
    }

    pub fn items(&self) -> impl ExactSizeIterator<Item = ItemId> {
        (0..self.num_items()).map(ItemId)
    }

    pub fn subjects(&self) -> impl ExactSizeIterator<Item = SubjectId> {
        (0..self.num_subjects()).map(SubjectId)
    }

    pub fn item_labels(&self) -> &LabelTable {
        &self.items
    }

    pub fn subject_labels(&self) -> &LabelTable {
        &self.subjects
    }

    /// Label of an item. Panics if the id is out of range.
    pub fn item_label(&self, item: ItemId) -> &str {
        self.items.label(item.index()).expect("item id in range")
    }

    /// Label of a subject. Panics if the id is out of range.
    pub fn subject_label(&self, subject: SubjectId) -> &str {
        self.subjects
            .label(subject.index())
            .expect("subject id in range")
    }

    pub fn item_id(&self, label: &str) -> Option<ItemId> {
        self.items.get(label).map(ItemId)
    }

    pub fn subject_id(&self, label: &str) -> Option<SubjectId> {
        self.subjects.get(label).map(SubjectId)
    }

    pub(crate) fn check_item(&self, item: ItemId) -> Result<()> {
        if item.index() < self.num_items() {
            Ok(())
        } else {
            Err(Error::item_index(item.index(), self.num_items()))
        }
    }

    pub(crate) fn check_subject(&self, subject: SubjectId) -> Result<()> {
        if subject.index() < self.num_subjects() {
            Ok(())
        } else {
            Err(Error::subject_index(subject.index(), self.num_subjects()))
        }
    }

    /// Reports empty selections and never-selected items.
    pub fn validate(&self) -> Vec<Warning> {
        let mut warnings = Vec::new();
        let mut seen = vec![false; self.num_items()];
        for r in &self.responses {
            if r.is_empty() {
                warnings.push(Warning::EmptySelection(r.subject));
            }
            for item in r.selected() {
                seen[item.index()] = true;
            }
        }
        warnings.extend(
            seen.iter()
                .enumerate()
                .filter(|(_, &s)| !s)
                .map(|(j, _)| Warning::NeverSelected(ItemId(j))),
        );
        warnings
    }
}

/// Free-function form of [`Dataset::validate`].
pub fn validate(dataset: &Dataset) -> Vec<Warning> {
    dataset.validate()
}
