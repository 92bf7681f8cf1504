//! Figures and tables.
//!
//! Voronoi cells are built by clipping the plot rectangle against the
//! perpendicular-bisector half-plane of every other center (Sutherland-Hodgman,
//! `O(k²)` per cell). Each polygon edge remembers whether it came from the
//! rectangle or from the bisector with center `j`, which is how shared cell
//! boundaries are recovered for drawing.
//!
//! The data-to-pixel map uses one scale factor for both axes, so nearest-center
//! relations are the same in data and pixel coordinates.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::cost::{Assignment, CenterSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::experiments::{BoundCheck, BoundStatus, ExperimentResult};

/// Cluster `i` is drawn with `PALETTE[i % 20]`.
pub const PALETTE: [&str; 20] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
];

pub fn color(cluster: usize) -> &'static str {
    PALETTE[cluster % PALETTE.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    /// Bounding box of the points and centers, grown by `margin` of its extent
    /// on every side (a degenerate extent is replaced by 1).
    pub fn around(dataset: &Dataset<f64>, centers: &CenterSet<f64>, margin: f64) -> Self {
        let (lo, hi) = dataset.bounds();
        let mut min = [lo[0], lo[1]];
        let mut max = [hi[0], hi[1]];
        for c in centers.iter() {
            for d in 0..2 {
                min[d] = min[d].min(c[d]);
                max[d] = max[d].max(c[d]);
            }
        }
        for d in 0..2 {
            let extent = if max[d] > min[d] { max[d] - min[d] } else { 1.0 };
            min[d] -= margin * extent;
            max[d] += margin * extent;
        }
        Rect { min, max }
    }

    fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.min[0], self.min[1]],
            [self.max[0], self.min[1]],
            [self.max[0], self.max[1]],
            [self.min[0], self.max[1]],
        ]
    }
}

/// What produced a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSource {
    Boundary,
    /// Bisector with the given center.
    Bisector(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub center: usize,
    /// Counter-clockwise vertices; empty if the cell has no area.
    pub vertices: Vec<[f64; 2]>,
    /// `edges[i]` runs from `vertices[i]` to `vertices[i + 1]` (cyclically).
    pub edges: Vec<EdgeSource>,
}

impl VoronoiCell {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        point_in_polygon(&self.vertices, p)
    }
}

/// Even-odd ray casting test.
pub fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

// Vertices are kept with the source of their *incoming* edge while clipping.
type Tagged = Vec<([f64; 2], EdgeSource)>;

/// Keeps the side where `n·x <= c`.
fn clip(poly: &Tagged, n: [f64; 2], c: f64, tag: EdgeSource) -> Tagged {
    let side = |p: [f64; 2]| n[0] * p[0] + n[1] * p[1] - c;
    let scale = (n[0].abs() + n[1].abs()).max(c.abs()).max(1.0);
    let eps = 1e-12 * scale;
    let mut out = Vec::with_capacity(poly.len() + 2);
    let len = poly.len();
    for i in 0..len {
        let (a, _) = poly[i];
        let (b, t) = poly[(i + 1) % len];
        let (sa, sb) = (side(a), side(b));
        let (ia, ib) = (sa <= eps, sb <= eps);
        let cross = || {
            let s = sa / (sa - sb);
            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
        };
        match (ia, ib) {
            (true, true) => out.push((b, t)),
            (true, false) => out.push((cross(), t)),
            (false, true) => {
                out.push((cross(), tag));
                out.push((b, t));
            }
            (false, false) => {}
        }
    }
    out.dedup_by(|x, y| (x.0[0] - y.0[0]).abs() <= eps && (x.0[1] - y.0[1]).abs() <= eps);
    while out.len() > 1 {
        let (f, l) = (out[0].0, out[out.len() - 1].0);
        if (f[0] - l[0]).abs() <= eps && (f[1] - l[1]).abs() <= eps {
            // zero-length closing edge
            out.remove(0);
        } else {
            break;
        }
    }
    if out.len() < 3 {
        out.clear();
    }
    out
}

/// Voronoi cells of 2-D `centers` clipped to `rect`. Coincident centers give
/// the whole cell to the lowest index.
pub fn voronoi_cells(centers: &CenterSet<f64>, rect: Rect) -> Result<Vec<VoronoiCell>> {
    if centers.dim() != 2 {
        return Err(Error::UnsupportedDimension(centers.dim()));
    }
    let mut cells = Vec::with_capacity(centers.len());
    for (i, ci) in centers.iter().enumerate() {
        let mut poly: Tagged = rect.corners().iter().map(|&p| (p, EdgeSource::Boundary)).collect();
        for (j, cj) in centers.iter().enumerate() {
            if i == j || poly.is_empty() {
                continue;
            }
            if ci == cj {
                if j < i {
                    poly.clear();
                }
                continue;
            }
            // |x - ci|² <= |x - cj|²  <=>  2(cj - ci)·x <= |cj|² - |ci|²
            let n = [2.0 * (cj[0] - ci[0]), 2.0 * (cj[1] - ci[1])];
            let c = cj[0] * cj[0] + cj[1] * cj[1] - ci[0] * ci[0] - ci[1] * ci[1];
            poly = clip(&poly, n, c, EdgeSource::Bisector(j));
        }
        let len = poly.len();
        let vertices = poly.iter().map(|(p, _)| *p).collect();
        let edges = (0..len).map(|v| poly[(v + 1) % len].1).collect();
        cells.push(VoronoiCell {
            center: i,
            vertices,
            edges,
        });
    }
    Ok(cells)
}

/// Shared boundaries between cells `i < j`, each as a segment.
pub fn voronoi_edges(cells: &[VoronoiCell]) -> Vec<(usize, usize, [f64; 2], [f64; 2])> {
    let mut out = Vec::new();
    for cell in cells {
        let n = cell.vertices.len();
        for (v, src) in cell.edges.iter().enumerate() {
            if let EdgeSource::Bisector(j) = *src {
                if cell.center < j {
                    out.push((cell.center, j, cell.vertices[v], cell.vertices[(v + 1) % n]));
                }
            }
        }
    }
    out
}

/// What to draw: points colored by cluster, center markers and Voronoi cells.
#[derive(Debug, Clone)]
pub struct PlotSpec<'a> {
    pub dataset: &'a Dataset<f64>,
    pub centers: &'a CenterSet<f64>,
    pub assignment: &'a Assignment,
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
}

impl<'a> PlotSpec<'a> {
    pub fn new(dataset: &'a Dataset<f64>, centers: &'a CenterSet<f64>, assignment: &'a Assignment) -> Self {
        Self {
            dataset,
            centers,
            assignment,
            width: 600,
            height: 600,
            title: None,
        }
    }
}

struct Transform {
    scale: f64,
    offset: [f64; 2],
    origin: [f64; 2],
    height: f64,
}

impl Transform {
    fn new(rect: Rect, width: f64, height: f64) -> Self {
        let sx = width / (rect.max[0] - rect.min[0]);
        let sy = height / (rect.max[1] - rect.min[1]);
        let scale = sx.min(sy);
        let offset = [
            (width - scale * (rect.max[0] - rect.min[0])) / 2.0,
            (height - scale * (rect.max[1] - rect.min[1])) / 2.0,
        ];
        Self {
            scale,
            offset,
            origin: rect.min,
            height,
        }
    }

    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.offset[0] + self.scale * (p[0] - self.origin[0]),
            self.height - (self.offset[1] + self.scale * (p[1] - self.origin[1])),
        ]
    }
}

fn points_attr(tr: &Transform, pts: &[[f64; 2]]) -> String {
    let mut s = String::new();
    for (i, &p) in pts.iter().enumerate() {
        let q = tr.apply(p);
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.3},{:.3}", q[0], q[1]);
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// The SVG document as a string. Output depends only on the inputs.
pub fn clustering_svg(plot: &PlotSpec<'_>) -> Result<String> {
    let (d, centers, labels) = (plot.dataset, plot.centers, plot.assignment);
    if d.dim() != 2 {
        return Err(Error::UnsupportedDimension(d.dim()));
    }
    if centers.dim() != 2 {
        return Err(Error::UnsupportedDimension(centers.dim()));
    }
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if labels.len() != d.len() || labels.clusters() != centers.len() {
        return Err(Error::Shape("assignment does not match dataset and centers".into()));
    }
    let rect = Rect::around(d, centers, 0.05);
    let cells = voronoi_cells(centers, rect)?;
    let (w, h) = (plot.width as f64, plot.height as f64);
    let tr = Transform::new(rect, w, h);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        plot.width, plot.height, plot.width, plot.height
    );
    if let Some(t) = &plot.title {
        let _ = writeln!(s, "<title>{}</title>", escape(t));
    }
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
        plot.width, plot.height
    );

    let _ = writeln!(s, r#"<g id="cells" stroke="none" fill-opacity="0.12">"#);
    for cell in &cells {
        if cell.vertices.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<polygon class="voronoi-cell" data-center="{}" fill="{}" points="{}"/>"#,
            cell.center,
            color(cell.center),
            points_attr(&tr, &cell.vertices)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g id="edges" fill="none" stroke="#333333" stroke-width="1">"##);
    for (i, j, a, b) in voronoi_edges(&cells) {
        let _ = writeln!(
            s,
            r#"<polyline class="voronoi-edge" data-cells="{i} {j}" points="{}"/>"#,
            points_attr(&tr, &[a, b])
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="points" stroke="none">"#);
    for (p, &l) in d.points().zip(labels.labels()) {
        let q = tr.apply([p[0], p[1]]);
        let _ = writeln!(
            s,
            r#"<circle class="point" data-cluster="{l}" cx="{:.3}" cy="{:.3}" r="1.8" fill="{}"/>"#,
            q[0],
            q[1],
            color(l)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g id="centers" stroke="#000000" stroke-width="1.5">"##);
    for (j, c) in centers.iter().enumerate() {
        let q = tr.apply([c[0], c[1]]);
        let _ = writeln!(
            s,
            r#"<circle class="center" data-center="{j}" cx="{:.3}" cy="{:.3}" r="4" fill="{}"/>"#,
            q[0],
            q[1],
            color(j)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn render_clustering_svg(plot: &PlotSpec<'_>, path: impl AsRef<Path>) -> Result<()> {
    let svg = clustering_svg(plot)?;
    fs::write(path, svg)?;
    Ok(())
}

pub const STUDY_CSV_HEADER: &str = "m,strategy,refine,mean,stderr,ref_cost,gap";

/// One row per `(track, m)`, tracks in result order. Floats are written in
/// shortest round-trip form.
pub fn write_study_csv_to<W: Write>(result: &ExperimentResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{STUDY_CSV_HEADER}")?;
    for t in &result.tracks {
        for s in &t.per_m {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.m, t.strategy, t.refined, s.mean_cost, s.stderr, s.mean_ref_cost, s.gap
            )?;
        }
    }
    Ok(())
}

pub fn write_study_csv(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_study_csv_to(result, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// JSON summary: spec echo, per-track reference expectations, trends,
/// dominance rows and bound checks.
pub fn write_study_json(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(result).expect("result serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_bound_csv_to<W: Write>(checks: &[BoundCheck], mut out: W) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writeln!(out, "instance,m,k,expected,optimum,ratio,bound,status")?;
    for c in checks {
        let status = match &c.status {
            BoundStatus::Pass => "pass".to_string(),
            BoundStatus::Fail => "fail".to_string(),
            BoundStatus::Degenerate => "degenerate".to_string(),
            BoundStatus::Error(e) => format!("error: {}", e.replace(',', ";")),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.instance,
            c.m,
            c.k,
            opt(c.expected),
            opt(c.optimum),
            opt(c.ratio),
            c.bound,
            status
        )?;
    }
    Ok(())
}
