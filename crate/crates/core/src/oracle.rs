//! Brute-force reference implementations used to cross-check the fast paths.
//! They share no code with the modules they check.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::{Dataset, ItemId, SubjectId};
use crate::similarity::SimilarityMatrix;

/// Largest item count `oracle_best_clustering` will enumerate.
pub const MAX_ORACLE_ITEMS: usize = 10;

fn selected(dataset: &Dataset, subject: usize, item: ItemId) -> bool {
    dataset.responses()[subject].selected().contains(&item)
}

/// Exact Jaccard coefficient by walking every subject.
pub fn oracle_jaccard(dataset: &Dataset, i: ItemId, j: ItemId) -> Result<Ratio<u64>> {
    dataset.check_item(i)?;
    dataset.check_item(j)?;
    let mut both = 0u64;
    let mut either = 0u64;
    for s in 0..dataset.num_subjects() {
        let (a, b) = (selected(dataset, s, i), selected(dataset, s, j));
        both += u64::from(a && b);
        either += u64::from(a || b);
    }
    Ok(if either == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(both, either)
    })
}

/// Preference strength in its general form: over all answers, the share of
/// the item's selections that were made by `subject`. Written so it also
/// holds when one subject contributes several answers.
pub fn oracle_preference_strength(dataset: &Dataset, subject: SubjectId, item: ItemId) -> Result<Ratio<u64>> {
    dataset.check_item(item)?;
    dataset.check_subject(subject)?;
    let mut by_subject = 0u64;
    let mut total = 0u64;
    for (l, answer) in dataset.responses().iter().enumerate() {
        if selected(dataset, l, item) {
            total += 1;
            by_subject += u64::from(answer.subject == subject);
        }
    }
    Ok(if total == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(by_subject, total)
    })
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn block_objective(sim: &SimilarityMatrix, block: &[usize]) -> f64 {
    block
        .iter()
        .map(|&m| {
            block
                .iter()
                .filter(|&&x| x != m)
                .map(|&x| sim.get(ItemId(m), ItemId(x)))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Exhaustive maximum of the summed medoid resemblance over every partition
/// of the items into exactly `k` nonempty blocks. Returns the first maximal
/// partition in restricted-growth order together with its objective.
pub fn oracle_best_clustering(sim: &SimilarityMatrix, k: usize) -> Result<(Vec<usize>, f64)> {
    let n = sim.size();
    if n > MAX_ORACLE_ITEMS {
        return Err(Error::InfeasibleOracle {
            items: n,
            limit: MAX_ORACLE_ITEMS,
        });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must be in 1..={n}, got {k}")));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut labels = vec![0usize; n];
    enumerate(&mut labels, 1, 1, k, &mut |labels| {
        let mut blocks = vec![Vec::new(); k];
        for (j, &b) in labels.iter().enumerate() {
            blocks[b].push(j);
        }
        let total: f64 = blocks.iter().map(|b| block_objective(sim, b)).sum();
        if best.as_ref().is_none_or(|(_, v)| total > *v) {
            best = Some((labels.to_vec(), total));
        }
    });
    Ok(best.expect("at least one partition exists for 1 <= k <= n"))
}

/// Restricted growth strings: `labels[pos]` ranges over `0..=used` (a new
/// block only when below `k`), and only strings using all `k` blocks count.
fn enumerate(labels: &mut [usize], pos: usize, used: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    let n = labels.len();
    if n - pos < k - used {
        return;
    }
    if pos == n {
        if used == k {
            visit(labels);
        }
        return;
    }
    for b in 0..used.min(k) {
        labels[pos] = b;
        enumerate(labels, pos + 1, used, k, visit);
    }
    if used < k {
        labels[pos] = used;
        enumerate(labels, pos + 1, used + 1, k, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::similarity_matrix;

    fn rmd() -> Dataset {
        Dataset::from_indices(6, &[vec![0, 1], vec![0, 1, 2], vec![3, 4], vec![4, 5, 1]]).unwrap()
    }

    fn stirling2(n: usize, k: usize) -> usize {
        match (n, k) {
            (0, 0) => 1,
            (_, 0) | (0, _) => 0,
            _ => k * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
        }
    }

    #[test]
    fn jaccard_examples() {
        let d = rmd();
        assert_eq!(oracle_jaccard(&d, ItemId(0), ItemId(1)).unwrap(), Ratio::new(2, 3));
        assert_eq!(oracle_jaccard(&d, ItemId(2), ItemId(2)).unwrap(), Ratio::from_integer(1));
        assert_eq!(oracle_jaccard(&d, ItemId(0), ItemId(3)).unwrap(), Ratio::from_integer(0));
        assert!(oracle_jaccard(&d, ItemId(0), ItemId(6)).is_err());
    }

    #[test]
    fn strength_examples() {
        let d = rmd();
        assert_eq!(oracle_preference_strength(&d, SubjectId(2), ItemId(3)).unwrap(), Ratio::from_integer(1));
        assert_eq!(oracle_preference_strength(&d, SubjectId(2), ItemId(4)).unwrap(), Ratio::new(1, 2));
        assert_eq!(oracle_preference_strength(&d, SubjectId(2), ItemId(5)).unwrap(), Ratio::from_integer(0));
        assert_eq!(oracle_preference_strength(&d, SubjectId(0), ItemId(1)).unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn enumeration_counts_match_stirling_numbers() {
        for n in 1..=7 {
            for k in 1..=n {
                let mut count = 0;
                enumerate(&mut vec![0; n], 1, 1, k, &mut |_| count += 1);
                assert_eq!(count, stirling2(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn rmd_two_blocks() {
        let sim = similarity_matrix(&rmd());
        let (labels, objective) = oracle_best_clustering(&sim, 2).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1]);
        assert!((objective - (7.0 / 6.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn singletons_score_zero() {
        let sim = similarity_matrix(&rmd());
        assert_eq!(oracle_best_clustering(&sim, 6).unwrap().1, 0.0);
    }

    #[test]
    fn one_block_takes_the_best_row_sum() {
        let sim = similarity_matrix(&rmd());
        let best_row = (0..6)
            .map(|m| (0..6).filter(|&x| x != m).map(|x| sim.get(ItemId(m), ItemId(x))).sum::<f64>())
            .fold(0.0, f64::max);
        assert_eq!(oracle_best_clustering(&sim, 1).unwrap().1, best_row);
    }

    #[test]
    fn too_many_items() {
        let d = Dataset::from_indices(11, &[vec![0, 1]]).unwrap();
        assert!(matches!(
            oracle_best_clustering(&similarity_matrix(&d), 2),
            Err(Error::InfeasibleOracle { items: 11, limit: 10 })
        ));
    }
}
