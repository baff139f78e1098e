//! Synthetic questionnaires with a planted cluster structure.
//!
//! Items are split into contiguous, evenly sized blocks. Every subject gets a
//! home block and a different away block. With probability `switch_prob` a
//! subject's switch fires; a fired subject takes each pick from home with
//! probability `primary_select_prob` and from away otherwise. Subjects whose
//! switch does not fire pick only from home. Selections hold 2 to 8 items.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::model::Dataset;

pub const MIN_SELECTION: usize = 2;
pub const MAX_SELECTION: usize = 8;
/// Largest side for which best-match scoring enumerates cluster matchings.
pub const MAX_MATCH_CLUSTERS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub num_items: usize,
    pub num_subjects: usize,
    pub num_planted_clusters: usize,
    pub primary_select_prob: f64,
    pub switch_prob: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    /// Fifty items, thirty-two subjects, four planted clusters.
    fn default() -> Self {
        Self {
            num_items: 50,
            num_subjects: 32,
            num_planted_clusters: 4,
            primary_select_prob: 0.8,
            switch_prob: 0.15,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.num_items < MIN_SELECTION {
            return bad(format!("need at least {MIN_SELECTION} items, got {}", self.num_items));
        }
        if self.num_subjects == 0 {
            return bad("need at least one subject".into());
        }
        if self.num_planted_clusters == 0 || self.num_planted_clusters > self.num_items {
            return bad(format!(
                "planted clusters must be in 1..={}, got {}",
                self.num_items, self.num_planted_clusters
            ));
        }
        if !(self.primary_select_prob > 0.0 && self.primary_select_prob <= 1.0) {
            return bad(format!("primary_select_prob must be in (0, 1], got {}", self.primary_select_prob));
        }
        if !(self.switch_prob >= 0.0 && self.switch_prob < 1.0) {
            return bad(format!("switch_prob must be in [0, 1), got {}", self.switch_prob));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    /// Planted block of every item.
    pub item_clusters: Vec<usize>,
    pub home: Vec<usize>,
    /// `None` only when there is a single planted block.
    pub away: Vec<Option<usize>>,
    /// Whether the subject's switch fired.
    pub switched: Vec<bool>,
}

impl PlantedTruth {
    pub fn num_clusters(&self) -> usize {
        self.item_clusters.iter().max().map_or(0, |&c| c + 1)
    }

    pub fn to_json(&self, dataset: &Dataset) -> Value {
        let items: serde_json::Map<String, Value> = dataset
            .items()
            .map(|j| (dataset.item_label(j).to_owned(), json!(self.item_clusters[j.index()])))
            .collect();
        let subjects: Vec<Value> = dataset
            .subjects()
            .map(|s| {
                let i = s.index();
                json!({
                    "subject": dataset.subject_label(s),
                    "home": self.home[i],
                    "away": self.away[i],
                    "switched": self.switched[i],
                })
            })
            .collect();
        json!({
            "num_clusters": self.num_clusters(),
            "item_clusters": items,
            "subjects": subjects,
        })
    }
}

/// Cluster of item `j` when `n` items are split into `c` contiguous blocks.
pub fn planted_block(j: usize, n: usize, c: usize) -> usize {
    j * c / n
}

pub fn generate(params: &SynthParams) -> Result<(Dataset, PlantedTruth)> {
    params.validate()?;
    let n = params.num_items;
    let c = params.num_planted_clusters;
    let item_clusters: Vec<usize> = (0..n).map(|j| planted_block(j, n, c)).collect();
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (j, &b) in item_clusters.iter().enumerate() {
        blocks[b].push(j);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut selections = Vec::with_capacity(params.num_subjects);
    let mut home = Vec::with_capacity(params.num_subjects);
    let mut away = Vec::with_capacity(params.num_subjects);
    let mut switched = Vec::with_capacity(params.num_subjects);
    for _ in 0..params.num_subjects {
        let h = rng.gen_range(0..c);
        let a = (c > 1).then(|| (h + 1 + rng.gen_range(0..c - 1)) % c);
        let fired = a.is_some() && rng.gen_bool(params.switch_prob);
        let available = blocks[h].len() + a.map_or(0, |a| blocks[a].len());
        let size = rng.gen_range(MIN_SELECTION..=MAX_SELECTION).min(available);

        let mut pools = [blocks[h].clone(), a.map_or_else(Vec::new, |a| blocks[a].clone())];
        let mut picked = Vec::with_capacity(size);
        while picked.len() < size {
            let mut side = usize::from(fired && !rng.gen_bool(params.primary_select_prob));
            if pools[side].is_empty() {
                side = 1 - side;
            }
            let pool = &mut pools[side];
            let at = rng.gen_range(0..pool.len());
            picked.push(pool.swap_remove(at));
        }
        picked.sort_unstable();
        selections.push(picked);
        home.push(h);
        away.push(a);
        switched.push(fired);
    }
    let dataset = Dataset::from_indices(n, &selections)?;
    Ok((
        dataset,
        PlantedTruth {
            item_clusters,
            home,
            away,
            switched,
        },
    ))
}

/// For every found cluster, the planted cluster it is matched to under the
/// matching that maximizes the number of agreeing items. Found clusters left
/// over when there are more found than planted clusters map to `None`.
pub fn best_match(found: &[usize], planted: &[usize]) -> Result<Vec<Option<usize>>> {
    if found.len() != planted.len() {
        return Err(Error::InvalidArgument(format!(
            "found clustering covers {} items, planted covers {}",
            found.len(),
            planted.len()
        )));
    }
    let kf = found.iter().max().map_or(0, |&c| c + 1);
    let kp = planted.iter().max().map_or(0, |&c| c + 1);
    let mut overlap = vec![vec![0usize; kp]; kf];
    for (&f, &p) in found.iter().zip(planted) {
        overlap[f][p] += 1;
    }
    let transposed = kf > kp;
    let (rows, cols) = if transposed { (kp, kf) } else { (kf, kp) };
    if cols > MAX_MATCH_CLUSTERS {
        return Err(Error::InvalidArgument(format!(
            "best-match scoring supports at most {MAX_MATCH_CLUSTERS} clusters per side"
        )));
    }
    let weight = |r: usize, c: usize| if transposed { overlap[c][r] } else { overlap[r][c] };

    // best[r][mask]: most agreement for rows r.. given columns in mask are used.
    let full = 1usize << cols;
    let mut best = vec![vec![0usize; full]; rows + 1];
    for r in (0..rows).rev() {
        for mask in 0..full {
            let mut top = 0;
            for c in 0..cols {
                if mask & (1 << c) == 0 {
                    top = top.max(weight(r, c) + best[r + 1][mask | (1 << c)]);
                }
            }
            best[r][mask] = top;
        }
    }
    let mut pairs = vec![None; rows];
    let mut mask = 0;
    for (r, pair) in pairs.iter_mut().enumerate() {
        let target = best[r][mask];
        if let Some(c) = (0..cols).find(|&c| mask & (1 << c) == 0 && weight(r, c) + best[r + 1][mask | (1 << c)] == target) {
            *pair = Some(c);
            mask |= 1 << c;
        }
    }
    let mut mapping = vec![None; kf];
    for (r, c) in pairs.into_iter().enumerate() {
        if let Some(c) = c {
            if transposed {
                mapping[c] = Some(r);
            } else {
                mapping[r] = Some(c);
            }
        }
    }
    Ok(mapping)
}

/// Fraction of items whose cluster agrees with the planted one under the
/// best one-to-one matching of cluster indices.
pub fn best_match_accuracy(found: &[usize], planted: &[usize]) -> Result<f64> {
    let mapping = best_match(found, planted)?;
    if found.is_empty() {
        return Ok(1.0);
    }
    let hits = found
        .iter()
        .zip(planted)
        .filter(|&(&f, &p)| mapping[f] == Some(p))
        .count();
    Ok(hits as f64 / found.len() as f64)
}

pub fn cluster_recovery_score(found: &Clustering, truth: &PlantedTruth) -> Result<f64> {
    best_match_accuracy(found.assignment(), &truth.item_clusters)
}
