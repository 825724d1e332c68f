//! SVG rendering of a point set and its hood in the unit square.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::geom::Point2;

const SIZE_PX: u32 = 800;

/// Points as dots, the hood as a polyline through its corners. The y axis
/// points up; coordinates are written unchanged.
pub fn render_svg(points: &[Point2], hood: &[Point2]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE_PX}" height="{SIZE_PX}" viewBox="0 0 1 1">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="1" height="1" fill="white" stroke="#999" stroke-width="0.002"/>"##
    );
    let _ = writeln!(s, r#"<g transform="matrix(1 0 0 -1 0 1)">"#);
    let _ = writeln!(s, r#"<g class="points" fill="black">"#);
    for p in points {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="0.0025"/>"#, p.x, p.y);
    }
    let _ = writeln!(s, "</g>");
    let vertices: Vec<String> = hood.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
    let _ = writeln!(
        s,
        r#"<polyline class="hood" fill="none" stroke="red" stroke-width="0.003" points="{}"/>"#,
        vertices.join(" ")
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

pub fn emit_svg(points: &[Point2], hood: &[Point2], path: &Path) -> io::Result<()> {
    std::fs::write(path, render_svg(points, hood))
}

/// Vertices of the first `class="hood"` polyline in an SVG produced by
/// [`render_svg`].
pub fn hood_polyline(svg: &str) -> Option<Vec<Point2>> {
    let line = svg.lines().find(|l| l.contains(r#"class="hood""#))?;
    let attr = line.split("points=\"").nth(1)?.split('"').next()?;
    attr.split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            Some(Point2::new(x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}
