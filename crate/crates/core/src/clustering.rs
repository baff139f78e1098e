//! k-medoids over a similarity matrix.
//!
//! Each restart starts from a seeded random assignment with no empty cluster
//! and then alternates two steps until the medoid list stops changing:
//!
//! 1. every cluster's medoid becomes the member with the largest total
//!    similarity `M` to the other members;
//! 2. every item moves to the cluster whose medoid it is most similar to.
//!
//! The objective is the sum over clusters of the medoid's `M`. Neither step
//! can lower it: step 1 maximises each term for a fixed partition, and step 2
//! maximises every item's similarity to its medoid with the medoids held in
//! their own clusters. Ties go to the lowest item id or cluster index.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{Dataset, ItemId};
use crate::similarity::SimilarityMatrix;

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

/// Sums of similarities are compared with this slack so that float rounding
/// in the summation order cannot flip a tie.
pub const TIE_EPS: f64 = 1e-12;

/// Random initial draws attempted before falling back to seeding each cluster
/// with one shuffled item.
const MAX_INIT_REDRAWS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusteringParams {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub restarts: usize,
}

impl ClusteringParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            restarts: DEFAULT_RESTARTS,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self, num_items: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.k > num_items {
            return Err(Error::InvalidArgument(format!(
                "k = {} exceeds the number of items ({num_items})",
                self.k
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A partition of the items into `k` disjoint nonempty clusters, each with a
/// medoid.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    k: usize,
    assignment: Vec<usize>,
    medoids: Vec<ItemId>,
    objective: f64,
    converged: bool,
}

impl Clustering {
    /// Completes a partition with its medoids and objective.
    pub fn from_assignment(sim: &SimilarityMatrix, k: usize, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != sim.size() {
            return Err(Error::InvalidArgument(format!(
                "assignment covers {} items, matrix has {}",
                assignment.len(),
                sim.size()
            )));
        }
        if let Some(&c) = assignment.iter().find(|&&c| c >= k) {
            return Err(Error::InvalidArgument(format!("cluster index {c} >= k = {k}")));
        }
        let members = members_by_cluster(&assignment, k);
        let medoids = members
            .iter()
            .map(|m| compute_medoid(sim, m))
            .collect::<Result<Vec<_>>>()?;
        let objective = objective_of(sim, &members, &medoids);
        Ok(Self {
            k,
            assignment,
            medoids,
            objective,
            converged: true,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_items(&self) -> usize {
        self.assignment.len()
    }

    /// Cluster index of each item, indexed by item id.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn medoids(&self) -> &[ItemId] {
        &self.medoids
    }

    pub fn medoid(&self, cluster: usize) -> ItemId {
        self.medoids[cluster]
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// False when the restart that produced this clustering hit
    /// `max_iterations` before its medoids settled.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn cluster_of(&self, item: ItemId) -> usize {
        self.assignment[item.index()]
    }

    /// Members of `cluster` in ascending id order.
    pub fn members(&self, cluster: usize) -> Vec<ItemId> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == cluster)
            .map(|(j, _)| ItemId(j))
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Objective recomputed from the assignment and the stored medoids.
    pub fn recompute_objective(&self, sim: &SimilarityMatrix) -> f64 {
        objective_of(sim, &members_by_cluster(&self.assignment, self.k), &self.medoids)
    }

    /// `{k, medoids, assignment, objective}` with item labels.
    pub fn to_json(&self, dataset: &Dataset) -> Value {
        let assignment: serde_json::Map<String, Value> = self
            .assignment
            .iter()
            .enumerate()
            .map(|(j, &c)| (dataset.item_label(ItemId(j)).to_owned(), json!(c)))
            .collect();
        json!({
            "k": self.k,
            "medoids": self.medoids.iter().map(|&m| dataset.item_label(m)).collect::<Vec<_>>(),
            "assignment": assignment,
            "objective": self.objective,
            "converged": self.converged,
        })
    }
}

fn members_by_cluster(assignment: &[usize], k: usize) -> Vec<Vec<ItemId>> {
    let mut members = vec![Vec::new(); k];
    for (j, &c) in assignment.iter().enumerate() {
        members[c].push(ItemId(j));
    }
    members
}

fn objective_of(sim: &SimilarityMatrix, members: &[Vec<ItemId>], medoids: &[ItemId]) -> f64 {
    members
        .iter()
        .zip(medoids)
        .map(|(m, &med)| resemblance(sim, m, med))
        .sum()
}

#[inline]
fn resemblance(sim: &SimilarityMatrix, members: &[ItemId], j: ItemId) -> f64 {
    let row = sim.row(j);
    members
        .iter()
        .filter(|&&l| l != j)
        .map(|l| row[l.index()])
        .sum()
}

/// Total similarity of member `j` to the other members of its cluster.
pub fn within_cluster_resemblance(sim: &SimilarityMatrix, members: &[ItemId], j: ItemId) -> Result<f64> {
    if !members.contains(&j) {
        return Err(Error::InvalidArgument(format!("{j} is not a member of the cluster")));
    }
    check_items(sim, members)?;
    Ok(resemblance(sim, members, j))
}

/// The member maximising [`within_cluster_resemblance`]; ties go to the
/// lowest id.
pub fn compute_medoid(sim: &SimilarityMatrix, members: &[ItemId]) -> Result<ItemId> {
    check_items(sim, members)?;
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(ItemId, f64)> = None;
    for &j in &sorted {
        let m = resemblance(sim, &sorted, j);
        if best.is_none_or(|(_, b)| m > b + TIE_EPS) {
            best = Some((j, m));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::EmptyCluster)
}

fn check_items(sim: &SimilarityMatrix, items: &[ItemId]) -> Result<()> {
    match items.iter().find(|j| j.index() >= sim.size()) {
        Some(j) => Err(Error::item_index(j.index(), sim.size())),
        None => Ok(()),
    }
}

/// Sends every item to the cluster whose medoid it is most similar to. Ties
/// go to the lowest cluster index; each medoid stays in its own cluster.
pub fn assign_to_medoids(sim: &SimilarityMatrix, medoids: &[ItemId]) -> Result<Vec<usize>> {
    check_items(sim, medoids)?;
    if medoids.is_empty() {
        return Err(Error::InvalidArgument("no medoids given".into()));
    }
    let mut sorted = medoids.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("medoids must be distinct".into()));
    }
    Ok(assign_unchecked(sim, medoids))
}

fn assign_unchecked(sim: &SimilarityMatrix, medoids: &[ItemId]) -> Vec<usize> {
    let rows: Vec<&[f64]> = medoids.iter().map(|&m| sim.row(m)).collect();
    let mut assignment: Vec<usize> = (0..sim.size())
        .map(|j| {
            let mut best = 0;
            for c in 1..rows.len() {
                if rows[c][j] > rows[best][j] {
                    best = c;
                }
            }
            best
        })
        .collect();
    for (c, m) in medoids.iter().enumerate() {
        assignment[m.index()] = c;
    }
    assignment
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    MedoidUpdate,
    Reassignment,
}

/// Objective after one step of the alternation. After a reassignment it is
/// measured against the medoids that drove it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub kind: StepKind,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub steps: Vec<TraceStep>,
}

struct RestartOutcome {
    clustering: Clustering,
    trace: RestartTrace,
}

fn initial_assignment(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut counts = vec![0usize; k];
    for _ in 0..MAX_INIT_REDRAWS {
        counts.iter_mut().for_each(|c| *c = 0);
        let assignment: Vec<usize> = (0..n)
            .map(|_| {
                let c = rng.gen_range(0..k);
                counts[c] += 1;
                c
            })
            .collect();
        if counts.iter().all(|&c| c > 0) {
            return assignment;
        }
    }
    // k close to n: nonempty draws are too rare, seed each cluster with one
    // item of a random permutation and scatter the rest.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut assignment = vec![0; n];
    for (pos, &j) in order.iter().enumerate() {
        assignment[j] = if pos < k { pos } else { rng.gen_range(0..k) };
    }
    assignment
}

fn run_restart(sim: &SimilarityMatrix, params: &ClusteringParams, restart: usize) -> RestartOutcome {
    let seed = params.seed ^ restart as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = params.k;
    let mut assignment = initial_assignment(sim.size(), k, &mut rng);
    let mut members = members_by_cluster(&assignment, k);
    let mut medoids: Vec<ItemId> = members
        .iter()
        .map(|m| compute_medoid(sim, m).expect("initial clusters are nonempty"))
        .collect();
    let mut steps = vec![TraceStep {
        kind: StepKind::MedoidUpdate,
        objective: objective_of(sim, &members, &medoids),
    }];

    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        assignment = assign_unchecked(sim, &medoids);
        members = members_by_cluster(&assignment, k);
        steps.push(TraceStep {
            kind: StepKind::Reassignment,
            objective: objective_of(sim, &members, &medoids),
        });
        let next: Vec<ItemId> = members
            .iter()
            .map(|m| compute_medoid(sim, m).expect("medoids stay in their clusters"))
            .collect();
        steps.push(TraceStep {
            kind: StepKind::MedoidUpdate,
            objective: objective_of(sim, &members, &next),
        });
        let settled = next == medoids;
        medoids = next;
        if settled {
            converged = true;
            break;
        }
    }

    let objective = objective_of(sim, &members, &medoids);
    RestartOutcome {
        clustering: Clustering {
            k,
            assignment,
            medoids,
            objective,
            converged,
        },
        trace: RestartTrace {
            restart,
            seed,
            iterations,
            converged,
            objective,
            steps,
        },
    }
}

/// Best of `params.restarts` seeded k-medoids runs. Restart `r` is seeded
/// with `params.seed ^ r`; the highest objective wins, ties to the lowest
/// restart index. The result does not depend on the rayon thread count.
pub fn k_medoids(sim: &SimilarityMatrix, params: &ClusteringParams) -> Result<Clustering> {
    k_medoids_traced(sim, params).map(|(c, _)| c)
}

/// [`k_medoids`] plus the per-restart objective trace.
pub fn k_medoids_traced(
    sim: &SimilarityMatrix,
    params: &ClusteringParams,
) -> Result<(Clustering, Vec<RestartTrace>)> {
    params.validate(sim.size())?;
    let outcomes: Vec<RestartOutcome> = (0..params.restarts)
        .into_par_iter()
        .map(|r| run_restart(sim, params, r))
        .collect();
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate().skip(1) {
        if o.clustering.objective > outcomes[best].clustering.objective + TIE_EPS {
            best = r;
        }
    }
    let mut traces = Vec::with_capacity(outcomes.len());
    let mut winner = None;
    for (r, o) in outcomes.into_iter().enumerate() {
        if r == best {
            winner = Some(o.clustering);
        }
        traces.push(o.trace);
    }
    Ok((winner.expect("at least one restart"), traces))
}
