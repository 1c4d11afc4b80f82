use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TopicGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
    Svg,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" | "gv" => Ok(ExportFormat::Dot),
            "svg" => Ok(ExportFormat::Svg),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Node radius in pixels; grows with relative frequency.
fn node_size(graph: &TopicGraph, i: usize) -> f64 {
    let max = graph.frequencies.iter().copied().fold(0.0, f64::max);
    let f = if max > 0.0 { graph.frequencies[i] / max } else { 0.0 };
    8.0 + 32.0 * f.max(0.0).sqrt()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
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

pub fn export_graph(graph: &TopicGraph, format: ExportFormat, seed: u64) -> Vec<u8> {
    match format {
        ExportFormat::GraphMl => graphml(graph),
        ExportFormat::Dot => dot(graph),
        ExportFormat::Svg => svg(graph, seed),
    }
    .into_bytes()
}

fn graphml(g: &TopicGraph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n  \
         <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n  \
         <key id=\"category\" for=\"node\" attr.name=\"category\" attr.type=\"string\"/>\n  \
         <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n  \
         <key id=\"frequency\" for=\"node\" attr.name=\"frequency\" attr.type=\"double\"/>\n  \
         <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n  \
         <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n  \
         <graph id=\"topics\" edgedefault=\"undirected\">\n",
    );
    for i in 0..g.n {
        let _ = write!(
            out,
            "    <node id=\"t{}\">\n      <data key=\"label\">{}</data>\n      \
             <data key=\"category\">{}</data>\n      <data key=\"color\">{}</data>\n      \
             <data key=\"frequency\">{}</data>\n      <data key=\"size\">{}</data>\n    </node>\n",
            i + 1,
            escape(&g.labels[i]),
            g.categories[i].as_str(),
            g.categories[i].color(),
            g.frequencies[i],
            node_size(g, i),
        );
    }
    for (e, &(i, j, w)) in g.pmfg_edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{e}\" source=\"t{}\" target=\"t{}\">\n      <data key=\"weight\">{w}</data>\n    </edge>",
            i + 1,
            j + 1,
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn dot(g: &TopicGraph) -> String {
    let quote = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
    let mut out = String::from("graph topics {\n  node [shape=circle, style=filled];\n");
    for i in 0..g.n {
        let _ = writeln!(
            out,
            "  t{} [label=\"{}\", category=\"{}\", fillcolor=\"{}\", frequency={}, width={:.3}];",
            i + 1,
            quote(&g.labels[i]),
            g.categories[i].as_str(),
            g.categories[i].color(),
            g.frequencies[i],
            node_size(g, i) / 36.0,
        );
    }
    for &(i, j, w) in &g.pmfg_edges {
        let _ = writeln!(out, "  t{} -- t{} [weight={w}];", i + 1, j + 1);
    }
    out.push_str("}\n");
    out
}

/// Seeded Fruchterman–Reingold layout over the filtered edges, scaled into
/// the unit square.
pub fn layout(g: &TopicGraph, seed: u64) -> Vec<(f64, f64)> {
    let n = g.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    if n < 2 {
        return vec![(0.5, 0.5); n];
    }
    let k = (1.0 / n as f64).sqrt();
    let iterations = 300;
    for it in 0..iterations {
        let temp = 0.1 * (1.0 - it as f64 / iterations as f64);
        let mut disp = vec![(0.0f64, 0.0f64); n];
        for a in 0..n {
            for b in a + 1..n {
                let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
                let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
                let f = k * k / dist;
                disp[a].0 += dx / dist * f;
                disp[a].1 += dy / dist * f;
                disp[b].0 -= dx / dist * f;
                disp[b].1 -= dy / dist * f;
            }
        }
        for &(a, b, _) in &g.pmfg_edges {
            let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
            let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
            let f = dist * dist / k;
            disp[a].0 -= dx / dist * f;
            disp[a].1 -= dy / dist * f;
            disp[b].0 += dx / dist * f;
            disp[b].1 += dy / dist * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d.0 * d.0 + d.1 * d.1).sqrt().max(1e-12);
            let step = len.min(temp);
            p.0 += d.0 / len * step;
            p.1 += d.1 / len * step;
        }
    }
    let (min_x, max_x) = pos.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (min_y, max_y) = pos.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let span = |lo: f64, hi: f64| if hi - lo > 1e-12 { hi - lo } else { 1.0 };
    pos.iter()
        .map(|p| ((p.0 - min_x) / span(min_x, max_x), (p.1 - min_y) / span(min_y, max_y)))
        .collect()
}

fn svg(g: &TopicGraph, seed: u64) -> String {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 60.0;
    let pos = layout(g, seed);
    let px = |p: (f64, f64)| (MARGIN + p.0 * (SIZE - 2.0 * MARGIN), MARGIN + p.1 * (SIZE - 2.0 * MARGIN));
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for &(i, j, w) in &g.pmfg_edges {
        let (a, b) = (px(pos[i]), px(pos[j]));
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-width=\"{:.2}\"><title>{:.3}</title></line>",
            a.0,
            a.1,
            b.0,
            b.1,
            0.5 + 3.0 * w.abs(),
            w
        );
    }
    for i in 0..g.n {
        let (x, y) = px(pos[i]);
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"{}\" stroke=\"#333\"><title>{}</title></circle>\n\
             <text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
            node_size(g, i) / 2.0,
            g.categories[i].color(),
            escape(&g.labels[i]),
            escape(&g.labels[i]),
        );
    }
    out.push_str("</svg>\n");
    out
}
