mod common;

use std::collections::{BTreeMap, BTreeSet};

use prefdiag::clustering::{k_medoids, Clustering, ClusteringParams};
use prefdiag::diagram::{build_diagram, diagram_stats, EdgeKind, NodeId, NodeKind, PreferenceDiagram};
use prefdiag::model::Dataset;
use prefdiag::profile::{build_profiles, SecondaryMode};
use prefdiag::similarity::{frequencies, similarity_matrix, SimilarityMatrix};
use proptest::prelude::*;

fn setup(d: &Dataset, k: usize, seed: u64) -> (SimilarityMatrix, Clustering) {
    let sim = similarity_matrix(d);
    let c = k_medoids(&sim, &ClusteringParams::new(k.min(d.num_items())).with_seed(seed)).unwrap();
    (sim, c)
}

fn edge_set(g: &PreferenceDiagram) -> BTreeSet<(NodeId, NodeId, EdgeKind, u64)> {
    g.edges
        .iter()
        .map(|e| {
            let (a, b) = if e.a <= e.b { (e.a, e.b) } else { (e.b, e.a) };
            (a, b, e.kind, e.weight.to_bits())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn structural_invariants(d in common::dataset(14, 10), k in 2usize..5, seed in any::<u64>()) {
        prop_assume!(d.num_items() >= 2);
        let (sim, c) = setup(&d, k, seed);
        let set = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        let part1 = build_diagram(&d, &c, &set.profiles, &sim, false).unwrap();
        let part2 = build_diagram(&d, &c, &set.profiles, &sim, true).unwrap();
        part1.validate().unwrap();
        part2.validate().unwrap();

        for g in [&part1, &part2] {
            for e in g.edges.iter().filter(|e| e.kind == EdgeKind::Resemblance) {
                let (NodeId::Item(a), NodeId::Item(b)) = (e.a, e.b) else {
                    panic!("resemblance edge between non-items");
                };
                prop_assert_eq!(c.cluster_of(a), c.cluster_of(b));
                prop_assert!(e.weight > 0.0);
            }
            let degrees = g.degrees();
            for (j, &f) in frequencies(&d).iter().enumerate() {
                if f == 0 {
                    let id = NodeId::Item(prefdiag::model::ItemId(j));
                    prop_assert!(g.node(id).is_some());
                    prop_assert_eq!(degrees.get(&id).copied().unwrap_or(0), 0);
                }
            }
        }

        let s1 = diagram_stats(&part1);
        prop_assert_eq!(s1.switches, 0);
        prop_assert_eq!(s1.switch_link_edges, 0);
        let s2 = diagram_stats(&part2);
        prop_assert_eq!(s2.switches, set.profiles.len());
        for p in &set.profiles {
            let switch = NodeId::Switch(p.subject);
            let subject = NodeId::Subject(p.subject);
            let to_subject = part2
                .edges
                .iter()
                .filter(|e| e.kind == EdgeKind::SwitchLink && [e.a, e.b].contains(&switch) && [e.a, e.b].contains(&subject))
                .count();
            prop_assert_eq!(to_subject, 1);
        }
        let freq = frequencies(&d);
        let reachable: usize = set
            .profiles
            .iter()
            .map(|p| 1 + p.secondary_gateways.iter().filter(|g| freq[g.index()] > 0).count())
            .sum();
        prop_assert_eq!(s2.switch_link_edges, reachable);
    }

    #[test]
    fn cluster_relabeling_preserves_edges(d in common::dataset(12, 10), k in 2usize..5, seed in any::<u64>(), shift in 1usize..4) {
        prop_assume!(d.num_items() >= 2);
        let (sim, c) = setup(&d, k, seed);
        let k = c.k();
        let relabeled = Clustering::from_assignment(
            &sim,
            k,
            c.assignment().iter().map(|&a| (a + shift) % k).collect(),
        )
        .unwrap();
        for mode in [SecondaryMode::Weakest, SecondaryMode::RunnerUp] {
            for switches in [false, true] {
                let a = build_profiles(&d, &c, mode).unwrap();
                let b = build_profiles(&d, &relabeled, mode).unwrap();
                let ga = build_diagram(&d, &c, &a.profiles, &sim, switches).unwrap();
                let gb = build_diagram(&d, &relabeled, &b.profiles, &sim, switches).unwrap();
                let resemblance = |g: &PreferenceDiagram| {
                    edge_set(g).into_iter().filter(|e| e.2 == EdgeKind::Resemblance).collect::<BTreeSet<_>>()
                };
                prop_assert_eq!(resemblance(&ga), resemblance(&gb));
                prop_assert_eq!(ga.nodes.len(), gb.nodes.len());
            }
        }
    }
}

#[test]
fn without_cluster_ties_relabeling_gives_identical_edges() {
    let d = common::rmd();
    let (sim, c) = setup(&d, 2, 0);
    let swapped = Clustering::from_assignment(&sim, 2, c.assignment().iter().map(|&a| 1 - a).collect()).unwrap();
    for switches in [false, true] {
        let a = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        let b = build_profiles(&d, &swapped, SecondaryMode::Weakest).unwrap();
        let ga = build_diagram(&d, &c, &a.profiles, &sim, switches).unwrap();
        let gb = build_diagram(&d, &swapped, &b.profiles, &sim, switches).unwrap();
        assert_eq!(edge_set(&ga), edge_set(&gb));
        let clusters = |g: &PreferenceDiagram| -> BTreeMap<NodeId, Option<usize>> {
            g.nodes.iter().filter(|n| n.kind == NodeKind::Item).map(|n| (n.id, n.cluster)).collect()
        };
        let (ca, cb) = (clusters(&ga), clusters(&gb));
        assert!(ca.iter().all(|(id, cl)| cb[id] == cl.map(|x| 1 - x)));
    }
}

#[test]
fn json_dump_round_trips() {
    let d = common::rmd();
    let (sim, c) = setup(&d, 2, 0);
    let set = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
    let g = build_diagram(&d, &c, &set.profiles, &sim, true).unwrap();
    let text = g.to_json().unwrap();
    assert_eq!(PreferenceDiagram::from_json(&text).unwrap(), g);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["nodes", "edges", "granularity"] {
        assert!(value.get(key).is_some(), "{key}");
    }
}
