//! SVG overlays of polygons, components and frames.

use std::fmt::Write as _;

use compseq_core::{BBox, ComponentQuad, Point2};

use crate::ingest::AnnotationRecord;

/// Frame colors, cycled by component index.
const PALETTE: [&str; 8] = ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub polygons: bool,
    pub components: bool,
    /// Label each component with its frame index.
    pub frame_labels: bool,
    pub margin: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { polygons: true, components: true, frame_labels: false, margin: 10 }
    }
}

fn fmt_points(points: &[Point2], dx: f64, dy: f64) -> String {
    let mut s = String::new();
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", p.x + dx, p.y + dy);
    }
    s
}

fn record_bbox(record: &AnnotationRecord) -> Option<BBox> {
    let mut pts: Vec<Point2> = Vec::new();
    for inst in &record.instances {
        pts.extend_from_slice(inst.polygon.vertices());
        for q in inst.components.iter().flatten() {
            pts.extend_from_slice(&q.v);
        }
    }
    BBox::of_points(&pts)
}

/// Renders one image's instances. Ignored instances are drawn dashed in
/// grey; component quads are colored by frame index.
pub fn render_svg(record: &AnnotationRecord, opts: &RenderOptions) -> String {
    let m = f64::from(opts.margin);
    let bb = record_bbox(record).unwrap_or(BBox { min: Point2::default(), max: Point2::default() });
    let (dx, dy) = (m - bb.min.x, m - bb.min.y);
    let w = (bb.width() + 2.0 * m).ceil();
    let h = (bb.height() + 2.0 * m).ceil();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(&record.image));
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for (idx, inst) in record.instances.iter().enumerate() {
        let _ = writeln!(s, r#"<g id="instance-{idx}">"#);
        if opts.components {
            for (f, q) in inst.components.iter().flatten().enumerate() {
                push_quad(&mut s, q, f, dx, dy, opts.frame_labels);
            }
        }
        if opts.polygons {
            let style = if inst.ignore {
                r##"fill="none" stroke="#888888" stroke-dasharray="4 2""##
            } else {
                r##"fill="none" stroke="#000000""##
            };
            let _ = writeln!(
                s,
                r#"<polygon points="{}" {style} stroke-width="1"/>"#,
                fmt_points(inst.polygon.vertices(), dx, dy)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn push_quad(s: &mut String, q: &ComponentQuad, frame: usize, dx: f64, dy: f64, label: bool) {
    let color = PALETTE[frame % PALETTE.len()];
    let _ = writeln!(
        s,
        r#"<polygon class="frame-{frame}" points="{}" fill="{color}" fill-opacity="0.25" stroke="{color}" stroke-width="0.5"/>"#,
        fmt_points(&q.v, dx, dy)
    );
    if label {
        let c = (q.v[0] + q.v[1] + q.v[2] + q.v[3]) / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="8" text-anchor="middle" fill="{color}">{frame}</text>"#,
            c.x + dx,
            c.y + dy
        );
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
