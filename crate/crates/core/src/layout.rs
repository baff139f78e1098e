//! Spring-model layout.
//!
//! Every link is a Hooke spring with unit rest length and stiffness
//! `attraction_scale * weight`; every pair of nodes repels with force
//! `repulsion_scale / d^2`. Each iteration moves every node along its net
//! force, capped at a temperature that decays geometrically by `cooling`.
//! The net force is the negative gradient of
//!
//! ```text
//! E = sum_links  attraction_scale * w * (d - 1)^2 / 2
//!   + sum_pairs  repulsion_scale / d
//! ```
//!
//! and uncapped steps are gradient descent on that energy with a per-node
//! step of `1 / (6 * a * sum of the node's link weights)`, bounded by
//! `MAX_STEP`. That step puts a linked pair exactly on its rest point in one
//! move from nearby, so weakly linked nodes settle before the temperature
//! freezes them. Two nodes joined by one link settle where
//! `a * w * (d - 1) = r / d^2`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{NodeId, PreferenceDiagram};
use crate::error::{Error, Result};

/// Distances below this are treated as this for force computation.
const MIN_DISTANCE: f64 = 1e-2;
/// Step bound for unlinked and very weakly linked nodes.
const MAX_STEP: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Canvas {
    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x.is_finite()
            && p.y.is_finite()
            && (0.0..=self.width).contains(&p.x)
            && (0.0..=self.height).contains(&p.y)
    }

    fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub iterations: usize,
    /// Stop once no node moves farther than this in one iteration.
    pub tolerance: f64,
    pub seed: u64,
    pub canvas: Canvas,
    pub repulsion_scale: f64,
    pub attraction_scale: f64,
    /// Per-iteration temperature decay factor, in (0, 1).
    pub cooling: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            iterations: 500,
            tolerance: 1e-3,
            seed: 0,
            canvas: Canvas {
                width: 1000.0,
                height: 1000.0,
            },
            repulsion_scale: 2000.0,
            attraction_scale: 0.05,
            cooling: 0.95,
        }
    }
}

impl LayoutParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.iterations >= 1
            && self.tolerance > 0.0
            && self.canvas.width > 0.0
            && self.canvas.height > 0.0
            && self.canvas.width.is_finite()
            && self.canvas.height.is_finite()
            && self.repulsion_scale > 0.0
            && self.attraction_scale > 0.0
            && self.cooling > 0.0
            && self.cooling < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid layout parameters: {self:?}")))
        }
    }

    /// Starting temperature: a tenth of the shorter canvas side.
    pub fn initial_temperature(&self) -> f64 {
        self.canvas.width.min(self.canvas.height) / 10.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    pub canvas: Canvas,
    pub positions: BTreeMap<NodeId, Point>,
    pub converged: bool,
    /// Largest single-node displacement in the final iteration.
    pub residual: f64,
    pub iterations: usize,
}

impl LayoutResult {
    pub fn position(&self, id: NodeId) -> Option<Point> {
        self.positions.get(&id).copied()
    }
}

/// Per-iteration diagnostics from [`spring_layout_traced`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    /// Energy after the iteration's move.
    pub energy: f64,
    pub max_displacement: f64,
    /// Some node's step was shortened by the temperature.
    pub capped: bool,
    /// Some node was pulled back inside the canvas.
    pub clamped: bool,
}

struct System {
    ids: Vec<NodeId>,
    springs: Vec<(usize, usize, f64)>,
}

impl System {
    fn new(diagram: &PreferenceDiagram) -> Self {
        let index: HashMap<NodeId, usize> = diagram.node_index();
        let springs = diagram
            .edges
            .iter()
            .filter_map(|e| Some((*index.get(&e.a)?, *index.get(&e.b)?, e.weight)))
            .collect();
        Self {
            ids: diagram.nodes.iter().map(|n| n.id).collect(),
            springs,
        }
    }
}

/// Unit vector from `q` to `p` and the (floored) distance. Coincident points
/// get a fixed direction that depends only on the pair.
fn separation(p: Point, q: Point, i: usize, j: usize) -> (f64, f64, f64) {
    let (dx, dy) = (p.x - q.x, p.y - q.y);
    let d = dx.hypot(dy);
    if d < 1e-9 {
        let angle = (i * 7919 + j * 104_729) as f64;
        return (angle.cos(), angle.sin(), MIN_DISTANCE);
    }
    (dx / d, dy / d, d.max(MIN_DISTANCE))
}

fn energy(system: &System, params: &LayoutParams, pos: &[Point]) -> f64 {
    let mut e = 0.0;
    for &(a, b, w) in &system.springs {
        let d = pos[a].distance(pos[b]);
        e += 0.5 * params.attraction_scale * w * (d - 1.0).powi(2);
    }
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            e += params.repulsion_scale / pos[i].distance(pos[j]).max(MIN_DISTANCE);
        }
    }
    e
}

/// Total spring plus repulsion energy of a placement.
pub fn system_energy(diagram: &PreferenceDiagram, params: &LayoutParams, positions: &LayoutResult) -> f64 {
    let system = System::new(diagram);
    let pos: Vec<Point> = system
        .ids
        .iter()
        .map(|id| positions.position(*id).unwrap_or_default())
        .collect();
    energy(&system, params, &pos)
}

fn forces(system: &System, params: &LayoutParams, pos: &[Point]) -> Vec<(f64, f64)> {
    let n = pos.len();
    let mut f = vec![(0.0, 0.0); n];
    for i in 0..n {
        for j in i + 1..n {
            let (ux, uy, d) = separation(pos[i], pos[j], i, j);
            let push = params.repulsion_scale / (d * d);
            f[i].0 += ux * push;
            f[i].1 += uy * push;
            f[j].0 -= ux * push;
            f[j].1 -= uy * push;
        }
    }
    for &(a, b, w) in &system.springs {
        let (ux, uy, d) = separation(pos[b], pos[a], b, a);
        let pull = params.attraction_scale * w * (d - 1.0);
        f[a].0 += ux * pull;
        f[a].1 += uy * pull;
        f[b].0 -= ux * pull;
        f[b].1 -= uy * pull;
    }
    f
}

fn step_sizes(system: &System, params: &LayoutParams) -> Vec<f64> {
    let mut load = vec![0.0; system.ids.len()];
    for &(a, b, w) in &system.springs {
        load[a] += w;
        load[b] += w;
    }
    load.into_iter()
        .map(|l| (1.0 / (6.0 * params.attraction_scale * l)).min(MAX_STEP))
        .collect()
}

fn simulate(
    system: &System,
    params: &LayoutParams,
    mut pos: Vec<Point>,
    mut trace: Option<&mut Vec<IterationRecord>>,
) -> (Vec<Point>, bool, f64, usize) {
    let canvas = params.canvas;
    let mut temperature = params.initial_temperature();
    let steps = step_sizes(system, params);
    let mut residual = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.iterations {
        iterations += 1;
        let f = forces(system, params, &pos);
        let mut max_disp = 0.0f64;
        let mut capped = false;
        let mut clamped = false;
        for ((p, (fx, fy)), &step) in pos.iter_mut().zip(f).zip(&steps) {
            let (fx, fy) = (fx * step, fy * step);
            let len = fx.hypot(fy);
            let scale = if len > temperature {
                capped = true;
                temperature / len
            } else {
                1.0
            };
            let target = Point::new(p.x + fx * scale, p.y + fy * scale);
            let next = canvas.clamp(target);
            clamped |= next != target;
            max_disp = max_disp.max(p.distance(next));
            *p = next;
        }
        temperature *= params.cooling;
        residual = max_disp;
        if let Some(t) = trace.as_deref_mut() {
            t.push(IterationRecord {
                energy: energy(system, params, &pos),
                max_displacement: max_disp,
                capped,
                clamped,
            });
        }
        if max_disp < params.tolerance {
            converged = true;
            break;
        }
    }
    (pos, converged, residual, iterations)
}

fn initial_positions(n: usize, params: &LayoutParams) -> Vec<Point> {
    if n == 1 {
        return vec![params.canvas.center()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    (0..n)
        .map(|_| {
            Point::new(
                rng.gen_range(0.0..=params.canvas.width),
                rng.gen_range(0.0..=params.canvas.height),
            )
        })
        .collect()
}

fn finish(system: &System, params: &LayoutParams, out: (Vec<Point>, bool, f64, usize)) -> LayoutResult {
    let (pos, converged, residual, iterations) = out;
    LayoutResult {
        canvas: params.canvas,
        positions: system.ids.iter().copied().zip(pos).collect(),
        converged,
        residual,
        iterations,
    }
}

/// Lays out `diagram` from seeded random starting positions. A lone node is
/// placed at the canvas center. Deterministic for a fixed seed.
///
/// Parameters are not validated here; see [`LayoutParams::validate`].
pub fn spring_layout(diagram: &PreferenceDiagram, params: &LayoutParams) -> LayoutResult {
    let system = System::new(diagram);
    let start = initial_positions(system.ids.len(), params);
    finish(&system, params, simulate(&system, params, start, None))
}

/// Like [`spring_layout`] but from the given starting positions, one per
/// node in diagram order.
pub fn spring_layout_from(
    diagram: &PreferenceDiagram,
    params: &LayoutParams,
    initial: &[Point],
) -> Result<LayoutResult> {
    let system = System::new(diagram);
    check_initial(&system, params, initial)?;
    Ok(finish(&system, params, simulate(&system, params, initial.to_vec(), None)))
}

/// [`spring_layout_from`] (or seeded start when `initial` is `None`) with a
/// record of every iteration.
pub fn spring_layout_traced(
    diagram: &PreferenceDiagram,
    params: &LayoutParams,
    initial: Option<&[Point]>,
) -> Result<(LayoutResult, Vec<IterationRecord>)> {
    let system = System::new(diagram);
    let start = match initial {
        Some(p) => {
            check_initial(&system, params, p)?;
            p.to_vec()
        }
        None => initial_positions(system.ids.len(), params),
    };
    let mut trace = Vec::new();
    let out = simulate(&system, params, start, Some(&mut trace));
    Ok((finish(&system, params, out), trace))
}

fn check_initial(system: &System, params: &LayoutParams, initial: &[Point]) -> Result<()> {
    if initial.len() != system.ids.len() {
        return Err(Error::InvalidArgument(format!(
            "{} starting positions for {} nodes",
            initial.len(),
            system.ids.len()
        )));
    }
    if let Some(p) = initial.iter().find(|p| !params.canvas.contains(**p)) {
        return Err(Error::InvalidArgument(format!("starting position {p:?} is off the canvas")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{DiagramEdge, DiagramNode, EdgeKind, NodeKind};
    use crate::model::ItemId;

    pub(crate) fn path(weights: &[f64]) -> PreferenceDiagram {
        let nodes = (0..=weights.len())
            .map(|j| DiagramNode {
                id: NodeId::Item(ItemId(j)),
                kind: NodeKind::Item,
                label: format!("a{j}"),
                cluster: Some(0),
                image_ref: None,
            })
            .collect();
        let edges = weights
            .iter()
            .enumerate()
            .map(|(j, &w)| DiagramEdge {
                a: NodeId::Item(ItemId(j)),
                b: NodeId::Item(ItemId(j + 1)),
                kind: EdgeKind::Resemblance,
                weight: w,
            })
            .collect();
        PreferenceDiagram {
            granularity: 1,
            include_switches: false,
            nodes,
            edges,
        }
    }

    #[test]
    fn empty_diagram() {
        let r = spring_layout(&PreferenceDiagram::default(), &LayoutParams::default());
        assert!(r.positions.is_empty());
        assert!(r.converged);
    }

    #[test]
    fn single_node_sits_at_center() {
        let p = LayoutParams::default();
        let r = spring_layout(&path(&[]), &p);
        assert_eq!(r.position(NodeId::Item(ItemId(0))), Some(p.canvas.center()));
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn deterministic_for_seed() {
        let g = path(&[1.0, 0.5, 0.25]);
        let p = LayoutParams::default().with_seed(11);
        let a = spring_layout(&g, &p);
        let b = spring_layout(&g, &p);
        for (id, pa) in &a.positions {
            let pb = b.positions[id];
            assert_eq!(pa.x.to_bits(), pb.x.to_bits());
            assert_eq!(pa.y.to_bits(), pb.y.to_bits());
        }
    }

    #[test]
    fn coincident_start_separates() {
        let g = path(&[1.0]);
        let c = LayoutParams::default().canvas.center();
        let r = spring_layout_from(&g, &LayoutParams::default(), &[c, c]).unwrap();
        let d = r.positions.values().copied().collect::<Vec<_>>();
        assert!(d[0].distance(d[1]) > 1.0);
    }

    #[test]
    fn bad_initial_positions() {
        let g = path(&[1.0]);
        let p = LayoutParams::default();
        assert!(spring_layout_from(&g, &p, &[Point::new(1.0, 1.0)]).is_err());
        assert!(spring_layout_from(&g, &p, &[Point::new(1.0, 1.0), Point::new(-5.0, 1.0)]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LayoutParams::default().validate().is_ok());
        let p = LayoutParams {
            cooling: 1.0,
            ..LayoutParams::default()
        };
        assert!(p.validate().is_err());
        let p = LayoutParams {
            tolerance: 0.0,
            ..LayoutParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn point_serializes_as_pair() {
        assert_eq!(serde_json::to_string(&Point::new(1.5, 2.0)).unwrap(), "[1.5,2.0]");
    }
}
