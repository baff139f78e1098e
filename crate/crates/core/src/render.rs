//! SVG and DOT output.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagram::{EdgeKind, NodeId, NodeKind, PreferenceDiagram};
use crate::error::{Error, Result};
use crate::layout::{LayoutResult, Point};

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleOptions {
    pub node_radius: f64,
    pub item_labels: bool,
    pub subject_labels: bool,
    pub cluster_hulls: bool,
}

impl Default for StyleOptions {
    fn default() -> Self {
        Self {
            node_radius: 8.0,
            item_labels: true,
            subject_labels: true,
            cluster_hulls: true,
        }
    }
}

pub fn cluster_color(cluster: usize) -> &'static str {
    PALETTE[cluster % PALETTE.len()]
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Renders an SVG 1.1 document. Items are circles (or images when
/// `image_ref` is set) colored by cluster, subjects squares, switches
/// diamonds; resemblance links are thin solid lines, primary preference
/// links bold, switch links dashed.
pub fn render_svg(diagram: &PreferenceDiagram, layout: &LayoutResult, style: &StyleOptions) -> Result<String> {
    let mut pos = Vec::with_capacity(diagram.nodes.len());
    for n in &diagram.nodes {
        pos.push(layout.position(n.id).ok_or_else(|| {
            Error::Consistency(format!("layout has no position for node {}", n.id))
        })?);
    }
    let at = diagram.node_index();
    let (w, h) = (layout.canvas.width, layout.canvas.height);
    let r = style.node_radius;
    // room for nodes and labels sitting on the canvas edge
    let pad = 3.0 * r + 12.0;
    let (vw, vh) = (w + 2.0 * pad, h + 2.0 * pad);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" \
         version=\"1.1\" width=\"{vw}\" height=\"{vh}\" viewBox=\"{} {} {vw} {vh}\">",
        -pad,
        -pad
    );

    if style.cluster_hulls {
        // Hulls wrap the linked core of each cluster; items with no
        // resemblance link would stretch them across the canvas.
        let linked: HashSet<NodeId> = diagram
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Resemblance)
            .flat_map(|e| [e.a, e.b])
            .collect();
        let mut clusters: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
        for (n, &p) in diagram.nodes.iter().zip(&pos) {
            if let (NodeKind::Item, Some(c), true) = (n.kind, n.cluster, linked.contains(&n.id)) {
                clusters.entry(c).or_default().push(p);
            }
        }
        let hulls: Vec<(usize, Vec<Point>)> = clusters
            .into_iter()
            .map(|(c, pts)| (c, convex_hull(pts)))
            .filter(|(_, hull)| hull.len() >= 3)
            .collect();
        if !hulls.is_empty() {
            svg.push_str("<g class=\"hulls\">\n");
            for (c, hull) in hulls {
                let points: Vec<String> = hull.iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect();
                let color = cluster_color(c);
                let _ = writeln!(
                    svg,
                    "<polygon class=\"hull cluster-{c}\" points=\"{}\" fill=\"{color}\" fill-opacity=\"0.12\" \
                     stroke=\"{color}\" stroke-opacity=\"0.4\" stroke-linejoin=\"round\" stroke-width=\"{:.2}\"/>",
                    points.join(" "),
                    2.0 * r
                );
            }
            svg.push_str("</g>\n");
        }
    }

    if !diagram.edges.is_empty() {
        svg.push_str("<g class=\"edges\">\n");
        for e in &diagram.edges {
            let (Some(&ia), Some(&ib)) = (at.get(&e.a), at.get(&e.b)) else {
                return Err(Error::Consistency(format!("edge {} - {} has a missing endpoint", e.a, e.b)));
            };
            let (pa, pb) = (pos[ia], pos[ib]);
            let (class, stroke, width, extra) = match e.kind {
                EdgeKind::Resemblance => ("resemblance", "#888888", 0.5 + 2.5 * e.weight, ""),
                EdgeKind::PrimaryPreference => ("primary-preference", "#222222", 3.0, ""),
                EdgeKind::SwitchLink => ("switch-link", "#c0392b", 1.5, " stroke-dasharray=\"6,4\""),
            };
            let _ = writeln!(
                svg,
                "<line class=\"edge {class}\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                 stroke=\"{stroke}\" stroke-width=\"{width:.2}\"{extra}/>",
                pa.x, pa.y, pb.x, pb.y
            );
        }
        svg.push_str("</g>\n");
    }

    if !diagram.nodes.is_empty() {
        svg.push_str("<g class=\"nodes\">\n");
        for (n, p) in diagram.nodes.iter().zip(&pos) {
            let id = escape(&n.id.to_string());
            match n.kind {
                NodeKind::Item => {
                    let color = n.cluster.map_or("#cccccc", cluster_color);
                    match &n.image_ref {
                        Some(href) => {
                            let href = escape(href);
                            let _ = writeln!(
                                svg,
                                "<image class=\"node item\" id=\"{id}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" \
                                 height=\"{:.2}\" href=\"{href}\" xlink:href=\"{href}\"/>",
                                p.x - 2.0 * r,
                                p.y - 2.0 * r,
                                4.0 * r,
                                4.0 * r
                            );
                        }
                        None => {
                            let _ = writeln!(
                                svg,
                                "<circle class=\"node item\" id=\"{id}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r:.2}\" \
                                 fill=\"{color}\" stroke=\"#333333\"/>",
                                p.x, p.y
                            );
                        }
                    }
                    if style.item_labels && n.image_ref.is_none() {
                        label(&mut svg, *p, r, &n.label);
                    }
                }
                NodeKind::Subject => {
                    let _ = writeln!(
                        svg,
                        "<rect class=\"node subject\" id=\"{id}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" \
                         height=\"{:.2}\" fill=\"#ffffff\" stroke=\"#222222\" stroke-width=\"2\"/>",
                        p.x - r,
                        p.y - r,
                        2.0 * r,
                        2.0 * r
                    );
                    if style.subject_labels {
                        label(&mut svg, *p, r, &n.label);
                    }
                }
                NodeKind::Switch => {
                    let _ = writeln!(
                        svg,
                        "<polygon class=\"node switch\" id=\"{id}\" points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} \
                         {:.2},{:.2}\" fill=\"#c0392b\" stroke=\"#222222\"/>",
                        p.x,
                        p.y - r,
                        p.x + r,
                        p.y,
                        p.x,
                        p.y + r,
                        p.x - r,
                        p.y
                    );
                }
            }
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn label(svg: &mut String, p: Point, r: f64, text: &str) {
    let _ = writeln!(
        svg,
        "<text class=\"label\" x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
         text-anchor=\"middle\">{}</text>",
        p.x,
        p.y + r + 11.0,
        escape(text)
    );
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT graph. Node ids are the diagram ids (`item:3`,
/// `subject:0`, `switch:0`); kinds, clusters and weights are attributes.
pub fn render_dot(diagram: &PreferenceDiagram) -> String {
    let mut out = String::from("graph {\n");
    for n in &diagram.nodes {
        let (kind, shape) = match n.kind {
            NodeKind::Item => ("item", "circle"),
            NodeKind::Subject => ("subject", "box"),
            NodeKind::Switch => ("switch", "diamond"),
        };
        let shown = if n.kind == NodeKind::Switch { "" } else { n.label.as_str() };
        let _ = write!(
            out,
            "  {} [kind={kind}, shape={shape}, label={}",
            dot_quote(&n.id.to_string()),
            dot_quote(shown)
        );
        if let Some(c) = n.cluster {
            let _ = write!(out, ", cluster={c}, style=filled, fillcolor={}", dot_quote(cluster_color(c)));
        }
        if let Some(img) = &n.image_ref {
            let _ = write!(out, ", image={}", dot_quote(img));
        }
        out.push_str("];\n");
    }
    for e in &diagram.edges {
        let (kind, style) = match e.kind {
            EdgeKind::Resemblance => ("resemblance", "solid"),
            EdgeKind::PrimaryPreference => ("primary_preference", "bold"),
            EdgeKind::SwitchLink => ("switch_link", "dashed"),
        };
        let _ = writeln!(
            out,
            "  {} -- {} [kind={kind}, style={style}, weight={}];",
            dot_quote(&e.a.to_string()),
            dot_quote(&e.b.to_string()),
            e.weight
        );
    }
    out.push_str("}\n");
    out
}
