mod common;

use prefdiag::clustering::{k_medoids, ClusteringParams};
use prefdiag::diagram::{build_diagram, DiagramEdge, DiagramNode, EdgeKind, NodeId, NodeKind, PreferenceDiagram};
use prefdiag::layout::{spring_layout, spring_layout_from, spring_layout_traced, LayoutParams, Point};
use prefdiag::model::ItemId;
use prefdiag::profile::{build_profiles, SecondaryMode};
use prefdiag::similarity::similarity_matrix;
use prefdiag::synth::{generate, SynthParams};
use proptest::prelude::*;

fn graph(nodes: usize, edges: &[(usize, usize, f64)]) -> PreferenceDiagram {
    PreferenceDiagram {
        granularity: 1,
        include_switches: false,
        nodes: (0..nodes)
            .map(|j| DiagramNode {
                id: NodeId::Item(ItemId(j)),
                kind: NodeKind::Item,
                label: format!("a{j}"),
                cluster: Some(0),
                image_ref: None,
            })
            .collect(),
        edges: edges
            .iter()
            .map(|&(a, b, weight)| DiagramEdge {
                a: NodeId::Item(ItemId(a)),
                b: NodeId::Item(ItemId(b)),
                kind: EdgeKind::Resemblance,
                weight,
            })
            .collect(),
    }
}

fn dist(l: &prefdiag::layout::LayoutResult, a: usize, b: usize) -> f64 {
    l.position(NodeId::Item(ItemId(a)))
        .unwrap()
        .distance(l.position(NodeId::Item(ItemId(b))).unwrap())
}

/// Real root of `a w (d - 1) = r / d^2`, i.e. `d^3 - d^2 - r/(a w) = 0`, by
/// Cardano's formula after the shift `d = t + 1/3`.
fn two_body_distance(params: &LayoutParams, weight: f64) -> f64 {
    let q = params.repulsion_scale / (params.attraction_scale * weight);
    let p = -1.0 / 3.0;
    let q_shifted = -2.0 / 27.0 - q;
    let disc = (q_shifted / 2.0).powi(2) + (p / 3.0_f64).powi(3);
    let u = (-q_shifted / 2.0 + disc.sqrt()).cbrt();
    // u * v = -p / 3; avoids cancellation in the second cube root
    let v = -p / (3.0 * u);
    u + v + 1.0 / 3.0
}

#[test]
fn cardano_root_balances_forces() {
    let params = LayoutParams::default();
    for w in [0.1, 0.5, 1.0, 3.0] {
        let d = two_body_distance(&params, w);
        let pull = params.attraction_scale * w * (d - 1.0);
        let push = params.repulsion_scale / (d * d);
        assert!((pull - push).abs() < 1e-9 * push, "w={w}");
    }
}

#[test]
fn two_bodies_settle_at_force_balance() {
    for seed in 0..10 {
        for w in [0.05, 0.2, 0.5, 1.0, 2.0] {
            let params = LayoutParams::default().with_seed(seed);
            let l = spring_layout(&graph(2, &[(0, 1, w)]), &params);
            let expected = two_body_distance(&params, w);
            let got = dist(&l, 0, 1);
            assert!((got - expected).abs() <= 0.05 * expected, "seed {seed} w {w}: {got} vs {expected}");
            assert!(l.converged);
        }
    }
}

#[test]
fn heavier_edge_is_shorter() {
    for seed in 0..10 {
        let params = LayoutParams::default().with_seed(seed);
        let l = spring_layout(&graph(3, &[(0, 1, 1.0), (1, 2, 0.25)]), &params);
        assert!(dist(&l, 0, 1) < dist(&l, 1, 2), "seed {seed}");
        let l = spring_layout(&graph(3, &[(0, 1, 0.25), (1, 2, 1.0)]), &params);
        assert!(dist(&l, 0, 1) > dist(&l, 1, 2), "seed {seed}");
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    let g = graph(5, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 0.2), (3, 4, 0.7)]);
    let params = LayoutParams::default().with_seed(99);
    let a = spring_layout(&g, &params);
    let b = spring_layout(&g, &params);
    for (pa, pb) in a.positions.values().zip(b.positions.values()) {
        assert_eq!((pa.x.to_bits(), pa.y.to_bits()), (pb.x.to_bits(), pb.y.to_bits()));
    }
}

fn sorted_distances(l: &prefdiag::layout::LayoutResult) -> Vec<f64> {
    let pts: Vec<Point> = l.positions.values().copied().collect();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            out.push(pts[i].distance(pts[j]));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn rigid_motion_of_the_start_leaves_distances_unchanged() {
    let g = graph(4, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 0.8), (3, 0, 0.3)]);
    let params = LayoutParams {
        tolerance: 1e-9,
        iterations: 2000,
        ..LayoutParams::default()
    };
    let start = [
        Point::new(480.0, 490.0),
        Point::new(530.0, 470.0),
        Point::new(520.0, 540.0),
        Point::new(460.0, 525.0),
    ];
    let base = sorted_distances(&spring_layout_from(&g, &params, &start).unwrap());
    for (angle, shift) in [(0.7_f64, (10.0, -20.0)), (2.5, (-35.0, 5.0)), (4.0, (0.0, 40.0))] {
        let (s, c) = angle.sin_cos();
        let moved: Vec<Point> = start
            .iter()
            .map(|p| {
                let (x, y) = (p.x - 500.0, p.y - 500.0);
                Point::new(500.0 + c * x - s * y + shift.0, 500.0 + s * x + c * y + shift.1)
            })
            .collect();
        let other = sorted_distances(&spring_layout_from(&g, &params, &moved).unwrap());
        for (a, b) in base.iter().zip(&other) {
            assert!((a - b).abs() <= 1e-6 * a, "{base:?} vs {other:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_descends_once_the_cap_stops_binding(
        n in 2usize..6,
        weights in prop::collection::vec(0.05f64..2.0, 10),
        seed in any::<u64>(),
    ) {
        let edges: Vec<(usize, usize, f64)> = (1..n).map(|j| (j - 1, j, weights[j])).collect();
        let g = graph(n, &edges);
        let params = LayoutParams::default().with_seed(seed);
        let (_, trace) = spring_layout_traced(&g, &params, None).unwrap();
        for pair in trace.windows(2) {
            let free = !pair[1].capped && !pair[1].clamped;
            if free {
                prop_assert!(pair[1].energy <= pair[0].energy + 1e-9 * pair[0].energy.abs(), "{:?}", pair);
            }
        }
    }
}

#[test]
fn full_scale_positions_are_finite_and_on_canvas() {
    let params = SynthParams {
        switch_prob: 0.2,
        seed: 7,
        ..SynthParams::default()
    };
    let (d, _) = generate(&params).unwrap();
    let sim = similarity_matrix(&d);
    for k in [3, 5, 7, 8] {
        let c = k_medoids(&sim, &ClusteringParams::new(k).with_seed(7)).unwrap();
        let set = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        for switches in [false, true] {
            let g = build_diagram(&d, &c, &set.profiles, &sim, switches).unwrap();
            let layout_params = LayoutParams::default().with_seed(k as u64);
            let l = spring_layout(&g, &layout_params);
            assert_eq!(l.positions.len(), g.nodes.len());
            for p in l.positions.values() {
                assert!(p.x.is_finite() && p.y.is_finite());
                assert!(layout_params.canvas.contains(*p), "{p:?}");
            }
        }
    }
}
