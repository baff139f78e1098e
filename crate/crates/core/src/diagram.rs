//! The preference diagram graph.
//!
//! Nodes are items, subjects and (optionally) one switch per subject. Links:
//!
//! * `Resemblance` between two items of the same cluster with `J > 0`,
//!   weighted by `J`;
//! * `PrimaryPreference` from a subject to each of its primary gateways,
//!   weighted by `W`;
//! * `SwitchLink` chains `subject - switch - secondary gateway`, both links
//!   weighted `0.5 * W` of the primary gateway.
//!
//! A part-1 diagram has no switches; a part-2 diagram has them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::model::{Dataset, ItemId, SubjectId};
use crate::profile::{PreferenceProfile, PrimaryAttachment};
use crate::similarity::{frequencies, SimilarityMatrix};

/// Switch link weight as a fraction of the subject's primary gateway weight.
pub const SWITCH_WEIGHT_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Item(ItemId),
    Subject(SubjectId),
    /// The switch owned by a subject.
    Switch(SubjectId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Item(j) => write!(f, "item:{}", j.0),
            NodeId::Subject(s) => write!(f, "subject:{}", s.0),
            NodeId::Switch(s) => write!(f, "switch:{}", s.0),
        }
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad node id `{s}`"));
        let (kind, idx) = s.split_once(':').ok_or_else(bad)?;
        let idx: usize = idx.parse().map_err(|_| bad())?;
        match kind {
            "item" => Ok(NodeId::Item(ItemId(idx))),
            "subject" => Ok(NodeId::Subject(SubjectId(idx))),
            "switch" => Ok(NodeId::Switch(SubjectId(idx))),
            _ => Err(bad()),
        }
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Item,
    Subject,
    Switch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub cluster: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Resemblance,
    PrimaryPreference,
    SwitchLink,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreferenceDiagram {
    pub granularity: usize,
    pub include_switches: bool,
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<DiagramEdge>,
}

impl PreferenceDiagram {
    pub fn node(&self, id: NodeId) -> Option<&DiagramNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Map from node id to position in [`nodes`](Self::nodes).
    pub fn node_index(&self) -> HashMap<NodeId, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect()
    }

    pub fn degrees(&self) -> HashMap<NodeId, usize> {
        let mut deg: HashMap<NodeId, usize> = self.nodes.iter().map(|n| (n.id, 0)).collect();
        for e in &self.edges {
            *deg.entry(e.a).or_default() += 1;
            *deg.entry(e.b).or_default() += 1;
        }
        deg
    }

    /// Checks the structural invariants: unique nodes, known endpoints, no
    /// self-loops, no duplicate edges, positive weights, kind/endpoint
    /// agreement, and no switch material when `include_switches` is off.
    pub fn validate(&self) -> Result<()> {
        let index = self.node_index();
        if index.len() != self.nodes.len() {
            return Err(Error::Consistency("duplicate node id".into()));
        }
        for n in &self.nodes {
            let kind_ok = matches!(
                (n.id, n.kind),
                (NodeId::Item(_), NodeKind::Item)
                    | (NodeId::Subject(_), NodeKind::Subject)
                    | (NodeId::Switch(_), NodeKind::Switch)
            );
            if !kind_ok {
                return Err(Error::Consistency(format!("node {} has kind {:?}", n.id, n.kind)));
            }
            if n.kind == NodeKind::Switch && !self.include_switches {
                return Err(Error::Consistency(format!("switch node {} in a part-1 diagram", n.id)));
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            for end in [e.a, e.b] {
                if !index.contains_key(&end) {
                    return Err(Error::Consistency(format!("edge endpoint {end} does not exist")));
                }
            }
            if e.a == e.b {
                return Err(Error::Consistency(format!("self-loop on {}", e.a)));
            }
            let key = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            if !seen.insert(key) {
                return Err(Error::Consistency(format!("duplicate edge {} - {}", e.a, e.b)));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::Consistency(format!("edge {} - {} has weight {}", e.a, e.b, e.weight)));
            }
            let ends_ok = match e.kind {
                EdgeKind::Resemblance => matches!((e.a, e.b), (NodeId::Item(_), NodeId::Item(_))),
                EdgeKind::PrimaryPreference => matches!(
                    (e.a, e.b),
                    (NodeId::Subject(_), NodeId::Item(_)) | (NodeId::Item(_), NodeId::Subject(_))
                ),
                EdgeKind::SwitchLink => {
                    self.include_switches
                        && match (e.a, e.b) {
                            (NodeId::Subject(s), NodeId::Switch(t))
                            | (NodeId::Switch(t), NodeId::Subject(s)) => s == t,
                            (NodeId::Switch(_), NodeId::Item(_))
                            | (NodeId::Item(_), NodeId::Switch(_)) => true,
                            _ => false,
                        }
                }
            };
            if !ends_ok {
                return Err(Error::Consistency(format!(
                    "{:?} edge cannot join {} and {}",
                    e.kind, e.a, e.b
                )));
            }
        }
        Ok(())
    }

    /// Copy without item nodes that have no links.
    pub fn without_isolated_items(&self) -> Self {
        let deg = self.degrees();
        let mut out = self.clone();
        out.nodes
            .retain(|n| !(n.kind == NodeKind::Item && deg.get(&n.id).copied().unwrap_or(0) == 0));
        out
    }

    /// Sets `image_ref` on items whose label appears in `manifest`.
    pub fn attach_images(&mut self, manifest: &HashMap<String, String>) {
        for n in self.nodes.iter_mut().filter(|n| n.kind == NodeKind::Item) {
            n.image_ref = manifest.get(&n.label).cloned();
        }
    }

    /// Canonical JSON document.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates a canonical JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }
}

fn check_inputs(dataset: &Dataset, clustering: &Clustering, sim: &SimilarityMatrix) -> Result<()> {
    if clustering.num_items() != dataset.num_items() || sim.size() != dataset.num_items() {
        return Err(Error::Consistency(format!(
            "dataset has {} items, clustering {}, similarity matrix {}",
            dataset.num_items(),
            clustering.num_items(),
            sim.size()
        )));
    }
    Ok(())
}

fn check_side(
    dataset: &Dataset,
    clustering: &Clustering,
    subject: SubjectId,
    cluster: usize,
    gateways: &[ItemId],
) -> Result<()> {
    if subject.index() >= dataset.num_subjects() {
        return Err(Error::Consistency(format!("unknown subject {subject}")));
    }
    if cluster >= clustering.k() {
        return Err(Error::Consistency(format!(
            "{subject}: cluster {cluster} >= k = {}",
            clustering.k()
        )));
    }
    if gateways.is_empty() {
        return Err(Error::Consistency(format!("{subject}: empty gateway set")));
    }
    for &g in gateways {
        if g.index() >= dataset.num_items() || clustering.cluster_of(g) != cluster {
            return Err(Error::Consistency(format!(
                "{subject}: gateway {g} is not in cluster {cluster}"
            )));
        }
    }
    Ok(())
}

struct Builder<'a> {
    dataset: &'a Dataset,
    freq: Vec<usize>,
    diagram: PreferenceDiagram,
}

impl<'a> Builder<'a> {
    fn new(dataset: &'a Dataset, clustering: &Clustering, sim: &SimilarityMatrix, include_switches: bool) -> Self {
        let mut diagram = PreferenceDiagram {
            granularity: clustering.k(),
            include_switches,
            ..Default::default()
        };
        for item in dataset.items() {
            diagram.nodes.push(DiagramNode {
                id: NodeId::Item(item),
                kind: NodeKind::Item,
                label: dataset.item_label(item).to_owned(),
                cluster: Some(clustering.cluster_of(item)),
                image_ref: None,
            });
        }
        for c in 0..clustering.k() {
            let members = clustering.members(c);
            for (x, &i) in members.iter().enumerate() {
                for &j in &members[x + 1..] {
                    let w = sim.get(i, j);
                    if w > 0.0 {
                        diagram.edges.push(DiagramEdge {
                            a: NodeId::Item(i),
                            b: NodeId::Item(j),
                            kind: EdgeKind::Resemblance,
                            weight: w,
                        });
                    }
                }
            }
        }
        Self {
            dataset,
            freq: frequencies(dataset),
            diagram,
        }
    }

    fn strength(&self, subject: SubjectId, item: ItemId) -> f64 {
        let f = self.freq[item.index()];
        if f > 0 && self.dataset.responses()[subject.index()].contains(item) {
            1.0 / f as f64
        } else {
            0.0
        }
    }

    /// Adds the subject node and its primary links; returns the max primary
    /// weight.
    fn attach_primary(&mut self, subject: SubjectId, gateways: &[ItemId]) -> Result<f64> {
        self.diagram.nodes.push(DiagramNode {
            id: NodeId::Subject(subject),
            kind: NodeKind::Subject,
            label: self.dataset.subject_label(subject).to_owned(),
            cluster: None,
            image_ref: None,
        });
        let mut max_w = 0.0f64;
        for &g in gateways {
            let w = self.strength(subject, g);
            if w <= 0.0 {
                return Err(Error::Consistency(format!(
                    "{subject}: primary gateway {g} was not selected by the subject"
                )));
            }
            max_w = max_w.max(w);
            self.diagram.edges.push(DiagramEdge {
                a: NodeId::Subject(subject),
                b: NodeId::Item(g),
                kind: EdgeKind::PrimaryPreference,
                weight: w,
            });
        }
        Ok(max_w)
    }

    fn attach_switch(&mut self, subject: SubjectId, gateways: &[ItemId], weight: f64) {
        let switch = NodeId::Switch(subject);
        self.diagram.nodes.push(DiagramNode {
            id: switch,
            kind: NodeKind::Switch,
            label: format!("SWT{}", subject.index()),
            cluster: None,
            image_ref: None,
        });
        self.diagram.edges.push(DiagramEdge {
            a: NodeId::Subject(subject),
            b: switch,
            kind: EdgeKind::SwitchLink,
            weight,
        });
        // An item nobody selected stays isolated even when it is the only
        // gateway left; the switch then hangs from the subject alone.
        let reachable: Vec<ItemId> = gateways.iter().copied().filter(|g| self.freq[g.index()] > 0).collect();
        for g in reachable {
            self.diagram.edges.push(DiagramEdge {
                a: switch,
                b: NodeId::Item(g),
                kind: EdgeKind::SwitchLink,
                weight,
            });
        }
    }
}

fn check_unique_subjects<I: IntoIterator<Item = SubjectId>>(subjects: I) -> Result<()> {
    let mut seen = HashSet::new();
    for s in subjects {
        if !seen.insert(s) {
            return Err(Error::Consistency(format!("{s} is profiled twice")));
        }
    }
    Ok(())
}

/// Part-1 diagram from primary attachments alone; usable with a single
/// cluster.
pub fn build_cluster_diagram(
    dataset: &Dataset,
    clustering: &Clustering,
    attachments: &[PrimaryAttachment],
    sim: &SimilarityMatrix,
) -> Result<PreferenceDiagram> {
    check_inputs(dataset, clustering, sim)?;
    check_unique_subjects(attachments.iter().map(|a| a.subject))?;
    for a in attachments {
        check_side(dataset, clustering, a.subject, a.cluster, &a.gateways)?;
    }
    let mut b = Builder::new(dataset, clustering, sim, false);
    for a in attachments {
        b.attach_primary(a.subject, &a.gateways)?;
    }
    Ok(b.diagram)
}

/// Builds the diagram for a set of profiles. With `include_switches` every
/// profiled subject gets a switch node chained to its secondary gateways.
pub fn build_diagram(
    dataset: &Dataset,
    clustering: &Clustering,
    profiles: &[PreferenceProfile],
    sim: &SimilarityMatrix,
    include_switches: bool,
) -> Result<PreferenceDiagram> {
    if !include_switches {
        let primaries: Vec<PrimaryAttachment> = profiles.iter().map(PreferenceProfile::primary).collect();
        return build_cluster_diagram(dataset, clustering, &primaries, sim);
    }
    check_inputs(dataset, clustering, sim)?;
    check_unique_subjects(profiles.iter().map(|p| p.subject))?;
    for p in profiles {
        check_side(dataset, clustering, p.subject, p.primary_cluster, &p.primary_gateways)?;
        check_side(dataset, clustering, p.subject, p.secondary_cluster, &p.secondary_gateways)?;
        if p.primary_cluster == p.secondary_cluster {
            return Err(Error::Consistency(format!(
                "{}: primary and secondary cluster coincide",
                p.subject
            )));
        }
        if p.switch_id.owner() != p.subject {
            return Err(Error::Consistency(format!("{}: switch owned by another subject", p.subject)));
        }
    }
    let mut b = Builder::new(dataset, clustering, sim, true);
    for p in profiles {
        let w = b.attach_primary(p.subject, &p.primary_gateways)?;
        b.attach_switch(p.subject, &p.secondary_gateways, SWITCH_WEIGHT_FACTOR * w);
    }
    Ok(b.diagram)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DiagramStats {
    pub items: usize,
    pub subjects: usize,
    pub switches: usize,
    pub resemblance_edges: usize,
    pub primary_preference_edges: usize,
    pub switch_link_edges: usize,
    /// Item nodes per cluster index.
    pub cluster_sizes: Vec<usize>,
    /// Nodes without links.
    pub isolated: Vec<NodeId>,
}

pub fn diagram_stats(diagram: &PreferenceDiagram) -> DiagramStats {
    let mut stats = DiagramStats {
        cluster_sizes: vec![0; diagram.granularity],
        ..Default::default()
    };
    for n in &diagram.nodes {
        match n.kind {
            NodeKind::Item => {
                stats.items += 1;
                if let Some(c) = n.cluster {
                    if c >= stats.cluster_sizes.len() {
                        stats.cluster_sizes.resize(c + 1, 0);
                    }
                    stats.cluster_sizes[c] += 1;
                }
            }
            NodeKind::Subject => stats.subjects += 1,
            NodeKind::Switch => stats.switches += 1,
        }
    }
    for e in &diagram.edges {
        match e.kind {
            EdgeKind::Resemblance => stats.resemblance_edges += 1,
            EdgeKind::PrimaryPreference => stats.primary_preference_edges += 1,
            EdgeKind::SwitchLink => stats.switch_link_edges += 1,
        }
    }
    let deg = diagram.degrees();
    stats.isolated = diagram
        .nodes
        .iter()
        .filter(|n| deg[&n.id] == 0)
        .map(|n| n.id)
        .collect();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_profiles, SecondaryMode};
    use crate::similarity::similarity_matrix;

    fn rmd() -> (Dataset, SimilarityMatrix, Clustering) {
        let d = Dataset::from_indices(6, &[vec![0, 1], vec![0, 1, 2], vec![3, 4], vec![4, 5, 1]])
            .unwrap();
        let sim = similarity_matrix(&d);
        let c = Clustering::from_assignment(&sim, 2, vec![0, 0, 0, 1, 1, 1]).unwrap();
        (d, sim, c)
    }

    fn rmd_diagram(include_switches: bool) -> PreferenceDiagram {
        let (d, sim, c) = rmd();
        let p = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        build_diagram(&d, &c, &p.profiles, &sim, include_switches).unwrap()
    }

    #[test]
    fn rmd_part1_resemblance_edges() {
        let g = rmd_diagram(false);
        g.validate().unwrap();
        let res: Vec<(usize, usize, f64)> = g
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Resemblance)
            .map(|e| match (e.a, e.b) {
                (NodeId::Item(a), NodeId::Item(b)) => (a.0, b.0, e.weight),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(
            res,
            vec![
                (0, 1, 2.0 / 3.0),
                (0, 2, 0.5),
                (1, 2, 1.0 / 3.0),
                (3, 4, 0.5),
                (4, 5, 0.5),
            ]
        );
        let s = diagram_stats(&g);
        assert_eq!((s.items, s.subjects, s.switches), (6, 4, 0));
        assert_eq!(s.primary_preference_edges, 4);
        assert_eq!(s.cluster_sizes, vec![3, 3]);
    }

    #[test]
    fn rmd_part2_switch_chains() {
        let g = rmd_diagram(true);
        g.validate().unwrap();
        let s = diagram_stats(&g);
        assert_eq!(s.switches, 4);
        assert_eq!(s.switch_link_edges, 8);
        // subject 0: primary gateway a0 (W = 1/2), secondary gateway a4
        let w = g
            .edges
            .iter()
            .find(|e| e.a == NodeId::Switch(SubjectId(0)))
            .unwrap();
        assert_eq!(w.b, NodeId::Item(ItemId(4)));
        assert_eq!(w.weight, 0.25);
    }

    #[test]
    fn no_co_occurrence_means_no_resemblance() {
        let d = Dataset::from_indices(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        let sim = similarity_matrix(&d);
        let c = Clustering::from_assignment(&sim, 2, vec![0, 0, 1, 1]).unwrap();
        let p = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        let g = build_diagram(&d, &c, &p.profiles, &sim, false).unwrap();
        let s = diagram_stats(&g);
        assert_eq!(s.resemblance_edges, 0);
        assert_eq!(s.primary_preference_edges, 4);
    }

    #[test]
    fn empty_diagram_stats() {
        let s = diagram_stats(&PreferenceDiagram::default());
        assert_eq!(s, DiagramStats::default());
    }

    #[test]
    fn unselected_item_is_isolated() {
        let d = Dataset::from_indices(4, &[vec![0, 1], vec![2]]).unwrap();
        let sim = similarity_matrix(&d);
        let c = Clustering::from_assignment(&sim, 2, vec![0, 0, 1, 0]).unwrap();
        let p = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        let g = build_diagram(&d, &c, &p.profiles, &sim, true).unwrap();
        assert_eq!(diagram_stats(&g).isolated, vec![NodeId::Item(ItemId(3))]);
        assert_eq!(g.without_isolated_items().nodes.len(), g.nodes.len() - 1);
    }

    #[test]
    fn inconsistent_profile_is_rejected() {
        let (d, sim, c) = rmd();
        let mut p = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        p.profiles[0].primary_gateways = vec![ItemId(5)];
        assert!(matches!(
            build_diagram(&d, &c, &p.profiles, &sim, true),
            Err(Error::Consistency(_))
        ));
        let c3 = Clustering::from_assignment(&sim, 3, vec![0, 0, 0, 1, 1, 2]).unwrap();
        let p = build_profiles(&d, &c, SecondaryMode::Weakest).unwrap();
        assert!(build_diagram(&d, &c3, &p.profiles, &sim, true).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = rmd_diagram(true);
        let text = g.to_json().unwrap();
        assert_eq!(PreferenceDiagram::from_json(&text).unwrap(), g);
        assert!(text.contains("\"id\": \"switch:0\""));
    }

    #[test]
    fn from_json_rejects_self_loop() {
        let text = r#"{"granularity": 1, "include_switches": false,
            "nodes": [{"id": "item:0", "kind": "item", "label": "a", "cluster": 0}],
            "edges": [{"a": "item:0", "b": "item:0", "kind": "resemblance", "weight": 1.0}]}"#;
        assert!(PreferenceDiagram::from_json(text).is_err());
    }

    #[test]
    fn node_id_strings() {
        for id in [NodeId::Item(ItemId(3)), NodeId::Subject(SubjectId(0)), NodeId::Switch(SubjectId(12))] {
            assert_eq!(id.to_string().parse::<NodeId>().unwrap(), id);
        }
        assert!("thing:1".parse::<NodeId>().is_err());
    }

    #[test]
    fn images_attach_by_label() {
        let mut g = rmd_diagram(false);
        let manifest: HashMap<String, String> = [("a2".to_string(), "img/a2.png".to_string())].into();
        g.attach_images(&manifest);
        assert_eq!(g.node(NodeId::Item(ItemId(2))).unwrap().image_ref.as_deref(), Some("img/a2.png"));
        assert!(g.node(NodeId::Item(ItemId(1))).unwrap().image_ref.is_none());
    }
}
