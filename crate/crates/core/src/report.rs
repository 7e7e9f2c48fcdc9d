//! Deterministic SVG figures: path decompositions, score traces and analyzer
//! overlays. Output depends only on the inputs, so files can be diffed.

use std::fmt::Write as _;

use crate::analyzer::Trajectory;
use crate::gcode::fixed;
use crate::graph::LatticeGraph;
use crate::lattice::Point3;
use crate::optimizer::{OptimizerConfig, PathClass, Solution};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;

const STYLE: &str = "<style>\n\
.strut{stroke:#c8c8c8;stroke-width:1}\n\
.long{stroke:#1f6fb4;fill:none;stroke-width:2}\n\
.medium{stroke:#2ca02c;fill:none;stroke-width:2}\n\
.short{stroke:#d62728;fill:none;stroke-width:2}\n\
.printed{stroke:#ff7f0e;fill:none;stroke-width:1.5}\n\
.score{fill:#1f6fb4}\n\
.axis{stroke:#000;stroke-width:1}\n\
text{font-family:sans-serif;font-size:12px}\n\
</style>\n";

fn num(x: f64) -> String {
    fixed(x, 3)
}

/// Maps model millimetres to SVG user units with y pointing up.
struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Frame {
        let (mut min_x, mut min_y, mut max_x, mut max_y) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        if !min_x.is_finite() {
            (min_x, min_y, max_x, max_y) = (0.0, 0.0, 1.0, 1.0);
        }
        let span_x = (max_x - min_x).max(1e-9);
        let span_y = (max_y - min_y).max(1e-9);
        let scale = (WIDTH - 2.0 * MARGIN) / span_x.max(span_y);
        Frame { min_x, max_y, scale, height: span_y * scale + 2.0 * MARGIN + 30.0 }
    }

    fn xy(&self, p: &Point3) -> (String, String) {
        (num(MARGIN + (p.x - self.min_x) * self.scale), num(MARGIN + (self.max_y - p.y) * self.scale))
    }

    fn open(&self, out: &mut String, title: &str) {
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = num(WIDTH),
            h = num(self.height)
        );
        out.push_str(STYLE);
        let _ = writeln!(out, "<title>{}</title>", escape(title));
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn polyline(out: &mut String, frame: &Frame, class: &str, points: impl IntoIterator<Item = Point3>) {
    let coords: Vec<String> = points
        .into_iter()
        .map(|p| {
            let (x, y) = frame.xy(&p);
            format!("{x},{y}")
        })
        .collect();
    let _ = writeln!(out, "<polyline class=\"{class}\" points=\"{}\"/>", coords.join(" "));
}

fn struts(out: &mut String, frame: &Frame, graph: &LatticeGraph) {
    out.push_str("<g id=\"nominal\">\n");
    for e in graph.edges() {
        let (x1, y1) = frame.xy(&graph.position(e.u));
        let (x2, y2) = frame.xy(&graph.position(e.v));
        let _ = writeln!(out, "<line class=\"strut\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\"/>");
    }
    out.push_str("</g>\n");
}

fn legend(out: &mut String, frame: &Frame, entries: &[(&str, String)]) {
    let y = frame.height - 20.0;
    out.push_str("<g id=\"legend\">\n");
    for (k, (class, label)) in entries.iter().enumerate() {
        let x = MARGIN + 180.0 * k as f64;
        let _ = writeln!(
            out,
            "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"16\" height=\"4\"/>",
            num(x),
            num(y - 4.0)
        );
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{}</text>", num(x + 22.0), num(y), escape(label));
    }
    out.push_str("</g>\n");
}

/// Nominal struts in grey with every path of `solution` drawn on top, coloured by
/// its long/medium/short class.
pub fn paths_svg(graph: &LatticeGraph, solution: &Solution, config: &OptimizerConfig, title: &str) -> String {
    let frame = Frame::fit(graph.node_pos());
    let mut out = String::new();
    frame.open(&mut out, title);
    struts(&mut out, &frame, graph);
    out.push_str("<g id=\"paths\">\n");
    for path in &solution.paths {
        let class = PathClass::of(path.node_count(), config).as_str();
        polyline(&mut out, &frame, class, path.nodes.iter().map(|&n| graph.position(n)));
    }
    out.push_str("</g>\n");
    legend(
        &mut out,
        &frame,
        &[
            ("long", format!("long (>= {} nodes)", config.classify_long_min_nodes)),
            (
                "medium",
                format!("medium ({}-{} nodes)", config.classify_medium_min_nodes, config.classify_long_min_nodes - 1),
            ),
            ("short", format!("short (< {} nodes)", config.classify_medium_min_nodes)),
        ],
    );
    out.push_str("</svg>\n");
    out
}

/// Scatter of score against iteration, one circle per iteration.
pub fn scores_svg(scores: &[f64], title: &str) -> String {
    let (w, h) = (WIDTH, 400.0);
    let (lo, hi) = scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = scores.len().max(2) as f64 - 1.0;
    let px = |k: usize| MARGIN + (w - 2.0 * MARGIN) * k as f64 / n;
    let py = |s: f64| h - MARGIN - (h - 2.0 * MARGIN) * (s - lo) / span;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = num(w),
        h = num(h)
    );
    out.push_str(STYLE);
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/>\n<line class=\"axis\" x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\"/>",
        m = num(MARGIN),
        b = num(h - MARGIN),
        r = num(w - MARGIN)
    );
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">iteration</text>", num(w / 2.0), num(h - 8.0));
    let _ = writeln!(out, "<text x=\"4\" y=\"{}\">{}</text>", num(MARGIN - 8.0), num(hi));
    let _ = writeln!(out, "<text x=\"4\" y=\"{}\">{}</text>", num(h - MARGIN), num(lo));
    out.push_str("<g id=\"scores\">\n");
    for (k, &s) in scores.iter().enumerate() {
        let _ = writeln!(out, "<circle class=\"score\" cx=\"{}\" cy=\"{}\" r=\"2\"/>", num(px(k)), num(py(s)));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Reconstructed polylines over the nominal struts, when given.
pub fn overlay_svg(trajectory: &Trajectory, nominal: Option<&LatticeGraph>, title: &str) -> String {
    let pts = trajectory.polylines.iter().flatten().chain(nominal.into_iter().flat_map(|g| g.node_pos()));
    let frame = Frame::fit(pts);
    let mut out = String::new();
    frame.open(&mut out, title);
    if let Some(g) = nominal {
        struts(&mut out, &frame, g);
    }
    out.push_str("<g id=\"printed\">\n");
    for line in &trajectory.polylines {
        polyline(&mut out, &frame, "printed", line.iter().copied());
    }
    out.push_str("</g>\n");
    legend(&mut out, &frame, &[("strut", "nominal".into()), ("printed", "reconstructed".into())]);
    out.push_str("</svg>\n");
    out
}
