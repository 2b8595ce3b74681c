//! Rectangle layouts, geometric graph construction and SVG rendering.

use std::fmt::Write as _;

use crate::error::{param, Error, Result};
use crate::graph::{Coloring, DecompositionGraph, GraphInput};

/// Minimum metal width in nm.
pub const DEFAULT_WIDTH_NM: i64 = 20;
/// Minimum metal spacing in nm.
pub const DEFAULT_SPACING_NM: i64 = 20;
pub const DEFAULT_HALF_PITCH_NM: i64 = 20;

/// Default minimum coloring distance for `k` masks: `2·s + 2·w` for
/// quadruple patterning and below, `3·s + 2.5·w` from pentuple up.
pub fn default_min_s(k: usize) -> i64 {
    if k >= 5 {
        3 * DEFAULT_SPACING_NM + (5 * DEFAULT_WIDTH_NM) / 2
    } else {
        2 * DEFAULT_SPACING_NM + 2 * DEFAULT_WIDTH_NM
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub polygon: u64,
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl Rect {
    pub fn new(polygon: u64, x1: i64, y1: i64, x2: i64, y2: i64) -> Result<Self> {
        if x1 >= x2 || y1 >= y2 {
            return param(format!("degenerate rect ({x1},{y1})-({x2},{y2})"));
        }
        Ok(Rect { polygon, x1, y1, x2, y2 })
    }

    /// Axis gaps `(dx, dy)` between the closed point sets; zero on an axis
    /// where the projections touch or overlap.
    pub fn axis_gaps(&self, other: &Rect) -> (i64, i64) {
        let dx = (self.x1.max(other.x1) - self.x2.min(other.x2)).max(0);
        let dy = (self.y1.max(other.y1) - self.y2.min(other.y2)).max(0);
        (dx, dy)
    }

    /// True when the two rectangles share a boundary segment (or area) of
    /// positive length, i.e. they touch along more than a corner.
    pub fn abuts(&self, other: &Rect) -> bool {
        let ox = self.x2.min(other.x2) - self.x1.max(other.x1);
        let oy = self.y2.min(other.y2) - self.y1.max(other.y1);
        ox >= 0 && oy >= 0 && (ox > 0 || oy > 0)
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        let ox = self.x2.min(other.x2) - self.x1.max(other.x1);
        let oy = self.y2.min(other.y2) - self.y1.max(other.y1);
        ox > 0 && oy > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Rectilinear,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Rectilinear => "rectilinear",
        }
    }

    /// Distance compared in a monotone integer form so no floating point is
    /// involved: squared length for Euclidean, plain length for L1.
    fn measure(self, dx: i64, dy: i64) -> i128 {
        match self {
            Metric::Euclidean => (dx as i128) * (dx as i128) + (dy as i128) * (dy as i128),
            Metric::Rectilinear => (dx + dy) as i128,
        }
    }

    fn threshold(self, d: i64) -> i128 {
        match self {
            Metric::Euclidean => (d as i128) * (d as i128),
            Metric::Rectilinear => d as i128,
        }
    }

    /// Gap between two rectangles in nm.
    pub fn gap(self, a: &Rect, b: &Rect) -> f64 {
        let (dx, dy) = a.axis_gaps(b);
        match self {
            Metric::Euclidean => (dx as f64).hypot(dy as f64),
            Metric::Rectilinear => (dx + dy) as f64,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "rectilinear" => Ok(Metric::Rectilinear),
            _ => param(format!("unknown metric '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub rects: Vec<Rect>,
    pub min_s: i64,
    pub hp: i64,
}

impl Layout {
    pub fn new(rects: Vec<Rect>, min_s: i64, hp: i64) -> Result<Self> {
        if min_s <= 0 || hp <= 0 {
            return param(format!("min_s and hp must be positive (got {min_s}, {hp})"));
        }
        Ok(Layout { rects, min_s, hp })
    }
}

/// Geometric graph plus any non-fatal findings.
#[derive(Debug, Clone)]
pub struct BuiltGraph {
    pub graph: DecompositionGraph,
    pub warnings: Vec<String>,
}

/// One vertex per rectangle. Conflict edges join rectangles of different
/// polygons with `gap < min_s`, stitch edges join abutting rectangles of the
/// same polygon, friendly edges join different polygons with
/// `min_s < gap < min_s + hp`.
pub fn build_graph(layout: &Layout, metric: Metric) -> Result<BuiltGraph> {
    let rects = &layout.rects;
    let n = rects.len();
    let reach = layout.min_s + layout.hp;
    let conflict_limit = metric.threshold(layout.min_s);
    let friendly_limit = metric.threshold(reach);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (rects[i].x1, i));

    let mut input = GraphInput::new(n);
    let mut warnings = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let a = &rects[i];
        for &j in &order[pos + 1..] {
            let b = &rects[j];
            if b.x1 - a.x2 >= reach {
                break;
            }
            if (b.y1 - a.y2) >= reach || (a.y1 - b.y2) >= reach {
                continue;
            }
            let (u, v) = if i < j { (i, j) } else { (j, i) };
            if a.polygon == b.polygon {
                if a.abuts(b) {
                    input.stitch_edges.push((u, v));
                }
                continue;
            }
            let (dx, dy) = a.axis_gaps(b);
            let d = metric.measure(dx, dy);
            if d < conflict_limit {
                if a.overlaps(b) {
                    warnings.push(format!("rects {u} and {v} of different polygons overlap"));
                }
                input.conflict_edges.push((u, v));
            } else if d > conflict_limit && d < friendly_limit {
                input.friendly_edges.push((u, v));
            }
        }
    }
    let graph = DecompositionGraph::try_from(input)?;
    Ok(BuiltGraph { graph, warnings })
}

fn parse_i64(tok: &str, line: usize, what: &str) -> Result<i64> {
    tok.parse::<i64>().map_err(|_| Error::Parse { line, message: format!("bad {what} '{tok}'") })
}

/// Parse the `.lay` text format.
pub fn parse_layout_file(text: &str) -> Result<Layout> {
    let mut header = false;
    let mut min_s = None;
    let mut hp = None;
    let mut rects = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if !header {
            if toks == ["lay", "1"] {
                header = true;
                continue;
            }
            return Err(Error::Parse { line, message: "expected header 'lay 1'".into() });
        }
        match toks[0] {
            "param" if toks.len() == 3 => {
                let value = parse_i64(toks[2], line, "parameter value")?;
                match toks[1] {
                    "min_s" => min_s = Some(value),
                    "hp" => hp = Some(value),
                    other => return Err(Error::Parse { line, message: format!("unknown parameter '{other}'") }),
                }
            }
            "rect" if toks.len() == 6 => {
                let polygon = toks[1]
                    .parse::<u64>()
                    .map_err(|_| Error::Parse { line, message: format!("bad polygon id '{}'", toks[1]) })?;
                let c: Vec<i64> = toks[2..].iter().map(|t| parse_i64(t, line, "coordinate")).collect::<Result<_>>()?;
                let rect = Rect::new(polygon, c[0], c[1], c[2], c[3])
                    .map_err(|e| Error::Parse { line, message: e.to_string() })?;
                rects.push(rect);
            }
            _ => return Err(Error::Parse { line, message: format!("malformed line '{content}'") }),
        }
    }
    if !header {
        return Err(Error::Parse { line: 1, message: "missing header 'lay 1'".into() });
    }
    let min_s = min_s.unwrap_or(default_min_s(4));
    let hp = hp.unwrap_or(DEFAULT_HALF_PITCH_NM);
    Layout::new(rects, min_s, hp).map_err(|e| Error::Parse { line: 1, message: e.to_string() })
}

pub fn write_layout_file(layout: &Layout) -> String {
    let mut out = String::from("lay 1\n");
    let _ = writeln!(out, "param min_s {}", layout.min_s);
    let _ = writeln!(out, "param hp {}", layout.hp);
    for r in &layout.rects {
        let _ = writeln!(out, "rect {} {} {} {} {}", r.polygon, r.x1, r.y1, r.x2, r.y2);
    }
    out
}

pub const PALETTE: [&str; 16] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45", "#fabed4", "#469990",
    "#dcbeff", "#9a6324", "#fffac8", "#800000", "#aaffc3", "#000075",
];

/// Render each rectangle filled by its mask color. Layout y grows upward,
/// so the drawing is flipped vertically.
pub fn emit_svg(layout: &Layout, coloring: &Coloring) -> Result<String> {
    if coloring.k() > PALETTE.len() {
        return param(format!("K={} exceeds palette size {}", coloring.k(), PALETTE.len()));
    }
    if coloring.len() != layout.rects.len() {
        return Err(Error::Dimension { expected: layout.rects.len(), actual: coloring.len() });
    }
    let (mut x0, mut y0, mut x1, mut y1) = (0i64, 0i64, 1i64, 1i64);
    if let Some(first) = layout.rects.first() {
        (x0, y0, x1, y1) = (first.x1, first.y1, first.x2, first.y2);
        for r in &layout.rects {
            x0 = x0.min(r.x1);
            y0 = y0.min(r.y1);
            x1 = x1.max(r.x2);
            y1 = y1.max(r.y2);
        }
    }
    let mut out = String::new();
    let _ =
        writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">", x0, -y1, x1 - x0, y1 - y0);
    for (r, &c) in layout.rects.iter().zip(coloring.colors()) {
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            r.x1,
            -r.y2,
            r.x2 - r.x1,
            r.y2 - r.y1,
            PALETTE[c as usize]
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(rects: Vec<Rect>, min_s: i64, hp: i64) -> Layout {
        Layout::new(rects, min_s, hp).unwrap()
    }

    #[test]
    fn conflict_within_min_s() {
        let l = layout(vec![Rect::new(0, 0, 0, 20, 20).unwrap(), Rect::new(1, 70, 0, 90, 20).unwrap()], 80, 20);
        let g = build_graph(&l, Metric::Euclidean).unwrap().graph;
        assert_eq!(g.conflict_edges().len(), 1);
        assert!(g.stitch_edges().is_empty());
    }

    #[test]
    fn stitch_for_abutting_same_polygon() {
        let l = layout(vec![Rect::new(3, 0, 0, 40, 20).unwrap(), Rect::new(3, 40, 0, 80, 20).unwrap()], 80, 20);
        let g = build_graph(&l, Metric::Euclidean).unwrap().graph;
        assert_eq!(g.stitch_edges().len(), 1);
        assert!(g.conflict_edges().is_empty());
    }

    #[test]
    fn friendly_band() {
        let l = layout(vec![Rect::new(0, 0, 0, 20, 20).unwrap(), Rect::new(1, 110, 0, 130, 20).unwrap()], 80, 20);
        let g = build_graph(&l, Metric::Euclidean).unwrap().graph;
        assert!(g.conflict_edges().is_empty());
        assert_eq!(g.friendly_edges(), &[(0, 1)]);
    }

    #[test]
    fn gap_exactly_min_s_is_neither() {
        let l = layout(vec![Rect::new(0, 0, 0, 20, 20).unwrap(), Rect::new(1, 100, 0, 120, 20).unwrap()], 80, 20);
        let g = build_graph(&l, Metric::Euclidean).unwrap().graph;
        assert!(g.conflict_edges().is_empty() && g.friendly_edges().is_empty());
    }

    #[test]
    fn diagonal_metric_differs() {
        // dx = dy = 50: euclidean 70.7 < 80, rectilinear 100 >= 80
        let rects = vec![Rect::new(0, 0, 0, 20, 20).unwrap(), Rect::new(1, 70, 70, 90, 90).unwrap()];
        let l = layout(rects, 80, 30);
        assert_eq!(build_graph(&l, Metric::Euclidean).unwrap().graph.conflict_edges().len(), 1);
        let rl = build_graph(&l, Metric::Rectilinear).unwrap().graph;
        assert!(rl.conflict_edges().is_empty());
        assert_eq!(rl.friendly_edges().len(), 1);
    }

    #[test]
    fn corner_touch_is_not_abutment() {
        let a = Rect::new(0, 0, 0, 10, 10).unwrap();
        let b = Rect::new(0, 10, 10, 20, 20).unwrap();
        assert!(!a.abuts(&b));
        assert!(a.abuts(&Rect::new(0, 10, 5, 20, 20).unwrap()));
    }

    #[test]
    fn overlap_warning() {
        let l = layout(vec![Rect::new(0, 0, 0, 40, 20).unwrap(), Rect::new(1, 30, 0, 60, 20).unwrap()], 80, 20);
        let b = build_graph(&l, Metric::Euclidean).unwrap();
        assert_eq!(b.warnings.len(), 1);
        assert_eq!(b.graph.conflict_edges().len(), 1);
    }

    #[test]
    fn parse_layout_examples() {
        let l = parse_layout_file("lay 1\nparam min_s 80\nparam hp 20\nrect 0 0 0 40 20").unwrap();
        assert_eq!(l.rects, vec![Rect { polygon: 0, x1: 0, y1: 0, x2: 40, y2: 20 }]);
        assert_eq!((l.min_s, l.hp), (80, 20));
        assert!(matches!(parse_layout_file("rect 0 0 0 40 20"), Err(Error::Parse { line: 1, .. })));
        let neg = parse_layout_file("lay 1\nrect 0 -40 0 -10 20").unwrap();
        assert_eq!(neg.rects[0].x1, -40);
        assert!(matches!(parse_layout_file("lay 1\nrect 0 5 0 5 20"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_layout_file("").is_err());
    }

    #[test]
    fn layout_roundtrip() {
        let l = parse_layout_file("lay 1\nparam min_s 80\nparam hp 20\nrect 2 0 0 40 20\nrect 2 40 0 60 20\n").unwrap();
        assert_eq!(parse_layout_file(&write_layout_file(&l)).unwrap(), l);
    }

    #[test]
    fn svg_examples() {
        let l = layout(vec![Rect::new(0, 0, 0, 40, 20).unwrap()], 80, 20);
        let c = Coloring::new(vec![0], 4).unwrap();
        let svg = emit_svg(&l, &c).unwrap();
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(PALETTE[0]));
        assert_eq!(svg, emit_svg(&l, &c).unwrap());

        let empty = layout(vec![], 80, 20);
        let svg = emit_svg(&empty, &Coloring::new(vec![], 4).unwrap()).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect").count(), 0);

        let big = Coloring::new(vec![0], 17).unwrap();
        assert!(emit_svg(&l, &big).is_err());
    }

    #[test]
    fn default_spacing_rules() {
        assert_eq!(default_min_s(4), 80);
        assert_eq!(default_min_s(5), 110);
    }
}
