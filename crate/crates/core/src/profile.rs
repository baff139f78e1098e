//! Per-subject preference strength and characteristic objects.
//!
//! With one response per subject, the strength of subject `i`'s preference
//! for item `j` is `W = 1 / F(j)` if `i` selected `j` and 0 otherwise: each
//! subject that selected an item gets an equal share of it. From `W` each
//! subject gets
//!
//! * a *primary cluster*: the cluster holding its strongest single `W`;
//! * a *secondary cluster*: among the other clusters, either the weakest
//!   ([`SecondaryMode::Weakest`]) or the strongest
//!   ([`SecondaryMode::RunnerUp`]);
//! * *gateway items* in both: every member attaining the cluster's max `W`;
//! * a *switch*: a synthetic node that sits between the two clusters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::model::{Dataset, ItemId, SubjectId};
use crate::similarity::{frequencies, occurrence_frequency};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondaryMode {
    /// The non-primary cluster the subject prefers least.
    #[default]
    Weakest,
    /// The non-primary cluster the subject prefers most.
    RunnerUp,
}

impl fmt::Display for SecondaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecondaryMode::Weakest => "weakest",
            SecondaryMode::RunnerUp => "runner-up",
        })
    }
}

impl FromStr for SecondaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weakest" => Ok(SecondaryMode::Weakest),
            "runner-up" | "runner_up" | "runnerup" => Ok(SecondaryMode::RunnerUp),
            other => Err(Error::InvalidArgument(format!(
                "unknown secondary mode `{other}` (expected weakest or runner-up)"
            ))),
        }
    }
}

/// Identifier of the switch node owned by one subject.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SwitchId(pub usize);

impl SwitchId {
    pub fn owner(self) -> SubjectId {
        SubjectId(self.0)
    }
}

impl From<SubjectId> for SwitchId {
    fn from(s: SubjectId) -> Self {
        SwitchId(s.index())
    }
}

/// A subject's primary cluster and the gateways into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimaryAttachment {
    pub subject: SubjectId,
    pub cluster: usize,
    pub gateways: Vec<ItemId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceProfile {
    pub subject: SubjectId,
    pub primary_cluster: usize,
    pub primary_gateways: Vec<ItemId>,
    pub secondary_cluster: usize,
    pub secondary_gateways: Vec<ItemId>,
    pub switch_id: SwitchId,
}

impl PreferenceProfile {
    pub fn primary(&self) -> PrimaryAttachment {
        PrimaryAttachment {
            subject: self.subject,
            cluster: self.primary_cluster,
            gateways: self.primary_gateways.clone(),
        }
    }

    pub fn to_json(&self, dataset: &Dataset, mode: SecondaryMode) -> Value {
        let labels = |items: &[ItemId]| -> Vec<&str> {
            items.iter().map(|&j| dataset.item_label(j)).collect()
        };
        json!({
            "subject": dataset.subject_label(self.subject),
            "primary_cluster": self.primary_cluster,
            "primary_gateways": labels(&self.primary_gateways),
            "secondary_cluster": self.secondary_cluster,
            "secondary_gateways": labels(&self.secondary_gateways),
            "mode": mode,
        })
    }
}

/// Output of [`build_profiles`]: profiles in subject order plus the subjects
/// skipped for having an empty selection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileSet {
    pub mode: SecondaryMode,
    pub profiles: Vec<PreferenceProfile>,
    pub skipped: Vec<SubjectId>,
}

impl ProfileSet {
    pub fn to_json(&self, dataset: &Dataset) -> Value {
        json!({
            "mode": self.mode,
            "profiles": self.profiles.iter().map(|p| p.to_json(dataset, self.mode)).collect::<Vec<_>>(),
            "skipped": self.skipped.iter().map(|&s| dataset.subject_label(s)).collect::<Vec<_>>(),
        })
    }
}

#[inline]
fn strength(selected: bool, freq: usize) -> f64 {
    if selected && freq > 0 {
        1.0 / freq as f64
    } else {
        0.0
    }
}

/// `W(subject, item)`: `1 / F(item)` if the subject selected the item, else 0.
pub fn preference_strength(dataset: &Dataset, subject: SubjectId, item: ItemId) -> Result<f64> {
    let selected = dataset.response(subject)?.contains(item);
    let freq = occurrence_frequency(dataset, item)?;
    Ok(strength(selected, freq))
}

/// Precomputed frequencies shared by every per-subject query.
struct Strengths<'a> {
    dataset: &'a Dataset,
    clustering: &'a Clustering,
    freq: Vec<usize>,
}

impl<'a> Strengths<'a> {
    fn new(dataset: &'a Dataset, clustering: &'a Clustering) -> Result<Self> {
        if clustering.num_items() != dataset.num_items() {
            return Err(Error::Consistency(format!(
                "clustering covers {} items, dataset has {}",
                clustering.num_items(),
                dataset.num_items()
            )));
        }
        Ok(Self {
            dataset,
            clustering,
            freq: frequencies(dataset),
        })
    }

    fn w(&self, subject: SubjectId, item: ItemId) -> f64 {
        let selected = self.dataset.responses()[subject.index()].contains(item);
        strength(selected, self.freq[item.index()])
    }

    /// Max `W` over each cluster's members.
    fn cluster_scores(&self, subject: SubjectId) -> Vec<f64> {
        let mut scores = vec![0.0f64; self.clustering.k()];
        for &item in self.dataset.responses()[subject.index()].selected() {
            let c = self.clustering.cluster_of(item);
            scores[c] = scores[c].max(self.w(subject, item));
        }
        scores
    }

    fn nonempty(&self, subject: SubjectId) -> Result<()> {
        if self.dataset.response(subject)?.is_empty() {
            Err(Error::DegenerateSubject(subject))
        } else {
            Ok(())
        }
    }

    fn primary(&self, subject: SubjectId) -> Result<usize> {
        self.nonempty(subject)?;
        Ok(argmax(&self.cluster_scores(subject), |_| false))
    }

    fn secondary(&self, subject: SubjectId, mode: SecondaryMode) -> Result<usize> {
        if self.clustering.k() < 2 {
            return Err(Error::NoSecondaryCluster);
        }
        self.nonempty(subject)?;
        let scores = self.cluster_scores(subject);
        let primary = argmax(&scores, |_| false);
        // Clusters made only of never-selected items are passed over when any
        // other candidate exists, so those items stay isolated.
        let mut live = vec![false; self.clustering.k()];
        for item in self.dataset.items() {
            if self.freq[item.index()] > 0 {
                live[self.clustering.cluster_of(item)] = true;
            }
        }
        let any_live = (0..live.len()).any(|c| c != primary && live[c]);
        let skip = |c: usize| c == primary || (any_live && !live[c]);
        Ok(match mode {
            SecondaryMode::Weakest => argmin(&scores, skip),
            SecondaryMode::RunnerUp => argmax(&scores, skip),
        })
    }

    fn gateways(&self, subject: SubjectId, cluster: usize) -> Result<Vec<ItemId>> {
        self.dataset.response(subject)?;
        if cluster >= self.clustering.k() {
            return Err(Error::InvalidArgument(format!(
                "cluster {cluster} >= k = {}",
                self.clustering.k()
            )));
        }
        let members = self.clustering.members(cluster);
        if members.is_empty() {
            return Err(Error::EmptyCluster);
        }
        let best = members
            .iter()
            .map(|&j| self.w(subject, j))
            .fold(0.0f64, f64::max);
        if best > 0.0 {
            return Ok(members
                .into_iter()
                .filter(|&j| self.w(subject, j) == best)
                .collect());
        }
        // Nothing selected here: fall back to one representative, preferring
        // the medoid, but never an item nobody selected while a selected
        // member exists.
        let medoid = self.clustering.medoid(cluster);
        let pick = if self.freq[medoid.index()] > 0 {
            medoid
        } else {
            members
                .iter()
                .copied()
                .find(|j| self.freq[j.index()] > 0)
                .unwrap_or(medoid)
        };
        Ok(vec![pick])
    }
}

/// Index of the maximum, ties to the lowest index, ignoring skipped clusters.
fn argmax(scores: &[f64], skip: impl Fn(usize) -> bool) -> usize {
    pick(scores, skip, |a, b| a > b)
}

fn argmin(scores: &[f64], skip: impl Fn(usize) -> bool) -> usize {
    pick(scores, skip, |a, b| a < b)
}

fn pick(scores: &[f64], skip: impl Fn(usize) -> bool, better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best: Option<usize> = None;
    for (c, &s) in scores.iter().enumerate() {
        if skip(c) {
            continue;
        }
        if best.is_none_or(|b| better(s, scores[b])) {
            best = Some(c);
        }
    }
    best.expect("at least one candidate cluster")
}

/// Cluster holding the subject's strongest preference; ties to the lowest
/// cluster index.
pub fn primary_cluster(dataset: &Dataset, clustering: &Clustering, subject: SubjectId) -> Result<usize> {
    Strengths::new(dataset, clustering)?.primary(subject)
}

/// Every member of `cluster` with the subject's maximal `W`. When the subject
/// selected nothing in the cluster, a single representative: the medoid, or
/// if nobody ever selected the medoid, the lowest-id member someone selected.
pub fn gateway_items(
    dataset: &Dataset,
    clustering: &Clustering,
    subject: SubjectId,
    cluster: usize,
) -> Result<Vec<ItemId>> {
    Strengths::new(dataset, clustering)?.gateways(subject, cluster)
}

/// Cluster the subject's switch points to: the weakest (or, in runner-up
/// mode, the strongest) cluster other than the primary. Clusters nobody
/// selected anything from are only chosen when nothing else is left.
pub fn secondary_cluster(
    dataset: &Dataset,
    clustering: &Clustering,
    subject: SubjectId,
    mode: SecondaryMode,
) -> Result<usize> {
    Strengths::new(dataset, clustering)?.secondary(subject, mode)
}

/// Primary cluster and gateways for every subject with a nonempty selection.
/// Works for any `k`, including 1.
pub fn primary_attachments(dataset: &Dataset, clustering: &Clustering) -> Result<Vec<PrimaryAttachment>> {
    let s = Strengths::new(dataset, clustering)?;
    dataset
        .subjects()
        .filter(|&i| !dataset.responses()[i.index()].is_empty())
        .map(|subject| {
            let cluster = s.primary(subject)?;
            Ok(PrimaryAttachment {
                subject,
                cluster,
                gateways: s.gateways(subject, cluster)?,
            })
        })
        .collect()
}

/// All characteristic objects for every subject with a nonempty selection.
pub fn build_profiles(dataset: &Dataset, clustering: &Clustering, mode: SecondaryMode) -> Result<ProfileSet> {
    if clustering.k() < 2 {
        return Err(Error::NoSecondaryCluster);
    }
    let s = Strengths::new(dataset, clustering)?;
    let mut profiles = Vec::new();
    let mut skipped = Vec::new();
    for subject in dataset.subjects() {
        if dataset.responses()[subject.index()].is_empty() {
            skipped.push(subject);
            continue;
        }
        let primary_cluster = s.primary(subject)?;
        let secondary_cluster = s.secondary(subject, mode)?;
        profiles.push(PreferenceProfile {
            subject,
            primary_cluster,
            primary_gateways: s.gateways(subject, primary_cluster)?,
            secondary_cluster,
            secondary_gateways: s.gateways(subject, secondary_cluster)?,
            switch_id: SwitchId::from(subject),
        });
    }
    Ok(ProfileSet {
        mode,
        profiles,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::similarity_matrix;

    fn rmd() -> Dataset {
        Dataset::from_indices(6, &[vec![0, 1], vec![0, 1, 2], vec![3, 4], vec![4, 5, 1]]).unwrap()
    }

    fn rmd_blocks(d: &Dataset) -> Clustering {
        Clustering::from_assignment(&similarity_matrix(d), 2, vec![0, 0, 0, 1, 1, 1]).unwrap()
    }

    #[test]
    fn strength_examples() {
        let d = rmd();
        assert_eq!(preference_strength(&d, SubjectId(0), ItemId(0)).unwrap(), 0.5);
        assert_eq!(preference_strength(&d, SubjectId(0), ItemId(1)).unwrap(), 1.0 / 3.0);
        assert_eq!(preference_strength(&d, SubjectId(0), ItemId(3)).unwrap(), 0.0);
        assert!(preference_strength(&d, SubjectId(4), ItemId(0)).is_err());
        assert!(preference_strength(&d, SubjectId(0), ItemId(6)).is_err());
    }

    #[test]
    fn primary_examples() {
        let d = rmd();
        let c = rmd_blocks(&d);
        assert_eq!(primary_cluster(&d, &c, SubjectId(0)).unwrap(), 0);
        assert_eq!(primary_cluster(&d, &c, SubjectId(2)).unwrap(), 1);
        // subject 3: W(a5) = 1 in block 1 beats W(a1) = 1/3 in block 0
        assert_eq!(primary_cluster(&d, &c, SubjectId(3)).unwrap(), 1);
    }

    #[test]
    fn primary_tie_goes_to_cluster_zero() {
        let d = Dataset::from_indices(2, &[vec![0, 1]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 2, vec![1, 0]).unwrap();
        assert_eq!(primary_cluster(&d, &c, SubjectId(0)).unwrap(), 0);
    }

    #[test]
    fn empty_selection_is_degenerate() {
        let d = Dataset::from_indices(2, &[vec![0], vec![]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 2, vec![0, 1]).unwrap();
        assert!(matches!(
            primary_cluster(&d, &c, SubjectId(1)),
            Err(Error::DegenerateSubject(SubjectId(1)))
        ));
    }

    #[test]
    fn gateway_examples() {
        let d = rmd();
        let c = rmd_blocks(&d);
        assert_eq!(gateway_items(&d, &c, SubjectId(0), 0).unwrap(), vec![ItemId(0)]);
        // block {a3,a4,a5}: subject 0 has W = 0 everywhere, medoid is a4
        assert_eq!(c.medoid(1), ItemId(4));
        assert_eq!(gateway_items(&d, &c, SubjectId(0), 1).unwrap(), vec![ItemId(4)]);
        assert_eq!(gateway_items(&d, &c, SubjectId(2), 1).unwrap(), vec![ItemId(3)]);
    }

    #[test]
    fn tied_gateways_are_all_returned() {
        let d = Dataset::from_indices(3, &[vec![0, 2], vec![1], vec![1]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 2, vec![0, 1, 0]).unwrap();
        assert_eq!(gateway_items(&d, &c, SubjectId(0), 0).unwrap(), vec![ItemId(0), ItemId(2)]);
    }

    #[test]
    fn unselected_medoid_is_not_a_fallback_gateway() {
        // items 0 and 1 share a cluster with no co-occurrence, so the medoid
        // is the lower id, 0, which nobody selected.
        let d = Dataset::from_indices(3, &[vec![1], vec![2]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 2, vec![0, 0, 1]).unwrap();
        assert_eq!(c.medoid(0), ItemId(0));
        assert_eq!(gateway_items(&d, &c, SubjectId(1), 0).unwrap(), vec![ItemId(1)]);
    }

    fn three_cluster_case() -> (Dataset, Clustering) {
        // clusters A = {0,1}, B = {2,3}, C = {4}; subject 0 picks 0 (F = 2) and
        // 2 (F = 4); W-max per cluster is 1/2, 1/4, 0.
        let d = Dataset::from_indices(
            5,
            &[vec![0, 2], vec![0, 2], vec![2, 3], vec![2, 4, 1], vec![3]],
        )
        .unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 3, vec![0, 0, 1, 1, 2]).unwrap();
        (d, c)
    }

    #[test]
    fn secondary_modes() {
        let (d, c) = three_cluster_case();
        assert_eq!(primary_cluster(&d, &c, SubjectId(0)).unwrap(), 0);
        assert_eq!(secondary_cluster(&d, &c, SubjectId(0), SecondaryMode::Weakest).unwrap(), 2);
        assert_eq!(secondary_cluster(&d, &c, SubjectId(0), SecondaryMode::RunnerUp).unwrap(), 1);
    }

    #[test]
    fn secondary_tie_and_two_cluster_cases() {
        let d = rmd();
        let c = rmd_blocks(&d);
        for mode in [SecondaryMode::Weakest, SecondaryMode::RunnerUp] {
            assert_eq!(secondary_cluster(&d, &c, SubjectId(0), mode).unwrap(), 1);
            assert_eq!(secondary_cluster(&d, &c, SubjectId(2), mode).unwrap(), 0);
        }
        // subject selects only in cluster 2 of 4: others tie at 0
        let d = Dataset::from_indices(4, &[vec![2], vec![0, 1, 3]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 4, vec![0, 1, 2, 3]).unwrap();
        for mode in [SecondaryMode::Weakest, SecondaryMode::RunnerUp] {
            assert_eq!(secondary_cluster(&d, &c, SubjectId(0), mode).unwrap(), 0);
        }
    }

    #[test]
    fn unselected_cluster_is_not_a_secondary_target() {
        let d = Dataset::from_indices(3, &[vec![1], vec![2]]).unwrap();
        let sim = similarity_matrix(&d);
        let c = Clustering::from_assignment(&sim, 3, vec![0, 1, 2]).unwrap();
        assert_eq!(secondary_cluster(&d, &c, SubjectId(0), SecondaryMode::Weakest).unwrap(), 2);
        let only_dead = Clustering::from_assignment(&sim, 2, vec![0, 1, 1]).unwrap();
        assert_eq!(secondary_cluster(&d, &only_dead, SubjectId(0), SecondaryMode::Weakest).unwrap(), 0);
    }

    #[test]
    fn single_cluster_has_no_secondary() {
        let d = rmd();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 1, vec![0; 6]).unwrap();
        assert!(matches!(
            secondary_cluster(&d, &c, SubjectId(0), SecondaryMode::Weakest),
            Err(Error::NoSecondaryCluster)
        ));
        assert!(matches!(
            build_profiles(&d, &c, SecondaryMode::Weakest),
            Err(Error::NoSecondaryCluster)
        ));
        assert_eq!(primary_attachments(&d, &c).unwrap().len(), 4);
    }

    #[test]
    fn rmd_profiles() {
        let d = rmd();
        let c = rmd_blocks(&d);
        let set = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        assert_eq!(set.profiles.len(), 4);
        let p2 = &set.profiles[2];
        assert_eq!(p2.primary_cluster, 1);
        assert_eq!(p2.primary_gateways, vec![ItemId(3)]);
        assert_eq!(p2.secondary_cluster, 0);
        assert_eq!(p2.secondary_gateways, vec![ItemId(0)]);
        assert_eq!(p2.switch_id, SwitchId(2));
        for p in &set.profiles {
            assert_ne!(p.primary_cluster, p.secondary_cluster);
            assert_eq!(p.secondary_gateways.len(), 1);
        }
    }

    #[test]
    fn uniform_selection_picks_cluster_zero() {
        let d = Dataset::from_indices(4, &[vec![0, 1, 2, 3], vec![0, 1, 2, 3]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 2, vec![1, 0, 1, 0]).unwrap();
        let set = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        assert!(set.profiles.iter().all(|p| p.primary_cluster == 0 && p.secondary_cluster == 1));
    }

    #[test]
    fn empty_subjects_are_skipped() {
        let d = Dataset::from_indices(2, &[vec![0], vec![], vec![1]]).unwrap();
        let c = Clustering::from_assignment(&similarity_matrix(&d), 2, vec![0, 1]).unwrap();
        let set = build_profiles(&d, &c, SecondaryMode::RunnerUp).unwrap();
        assert_eq!(set.skipped, vec![SubjectId(1)]);
        assert_eq!(set.profiles.iter().map(|p| p.subject).collect::<Vec<_>>(), vec![SubjectId(0), SubjectId(2)]);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("runner-up".parse::<SecondaryMode>().unwrap(), SecondaryMode::RunnerUp);
        assert_eq!("weakest".parse::<SecondaryMode>().unwrap(), SecondaryMode::Weakest);
        assert!("strongest".parse::<SecondaryMode>().is_err());
        assert_eq!(serde_json::to_string(&SecondaryMode::RunnerUp).unwrap(), "\"runner-up\"");
    }
}
