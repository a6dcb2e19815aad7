//! Static orthographic Bloch-sphere plots.

use std::f64::consts::PI;
use std::fmt::Write;

use qaum::training::BlochCheckpoint;

const SIZE: f64 = 420.0;
const RADIUS: f64 = 160.0;
const AZIMUTH: f64 = 35.0 * PI / 180.0;
const ELEVATION: f64 = 20.0 * PI / 180.0;

/// Screen coordinates and depth (positive towards the viewer).
fn project(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let (sa, ca) = AZIMUTH.sin_cos();
    let (se, ce) = ELEVATION.sin_cos();
    let right = -sa * x + ca * y;
    let up = -se * ca * x - se * sa * y + ce * z;
    let depth = ce * ca * x + ce * sa * y + se * z;
    (SIZE / 2.0 + RADIUS * right, SIZE / 2.0 + 10.0 - RADIUS * up, depth)
}

fn polyline(svg: &mut String, points: &[(f64, f64)], style: &str) {
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
}

/// Great circle through unit vectors `a` and `b`; the far half is dashed.
fn great_circle(svg: &mut String, a: [f64; 3], b: [f64; 3]) {
    const FRONT: &str = r##"stroke="#999""##;
    const BACK: &str = r##"stroke="#bbb" stroke-dasharray="3,3""##;
    let mut segment: Vec<(f64, f64)> = Vec::new();
    let mut front = None;
    for k in 0..=180 {
        let (s, c) = (2.0 * PI * k as f64 / 180.0).sin_cos();
        let (px, py, d) = project(c * a[0] + s * b[0], c * a[1] + s * b[1], c * a[2] + s * b[2]);
        let side = d >= 0.0;
        if front.is_some_and(|f| f != side) {
            polyline(svg, &segment, if side { BACK } else { FRONT });
            segment = vec![*segment.last().unwrap()];
        }
        front = Some(side);
        segment.push((px, py));
    }
    polyline(svg, &segment, if front == Some(true) { FRONT } else { BACK });
}

pub fn render(checkpoint: &BlochCheckpoint) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{h}" viewBox="0 0 {SIZE} {h}" font-family="sans-serif" font-size="12">"#,
        h = SIZE + 30.0
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">epoch {}</text>"#, SIZE / 2.0, checkpoint.epoch);
    let (cx, cy, _) = project(0.0, 0.0, 0.0);
    let _ = writeln!(svg, r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{RADIUS}" fill="none" stroke="#666"/>"##);
    great_circle(&mut svg, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
    great_circle(&mut svg, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);

    for (v, name) in [([1.0, 0.0, 0.0], "x"), ([0.0, 1.0, 0.0], "y"), ([0.0, 0.0, 1.0], "|0⟩"), ([0.0, 0.0, -1.0], "|1⟩")] {
        let (px, py, _) = project(v[0], v[1], v[2]);
        let (lx, ly, _) = project(1.12 * v[0], 1.12 * v[1], 1.12 * v[2]);
        let _ = writeln!(svg, r##"<line x1="{cx:.2}" y1="{cy:.2}" x2="{px:.2}" y2="{py:.2}" stroke="#999"/>"##);
        let _ = writeln!(svg, r#"<text x="{lx:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#, ly + 4.0);
    }

    // Back hemisphere first so front points are drawn on top.
    let mut points: Vec<_> = checkpoint
        .points
        .iter()
        .map(|p| {
            let (px, py, d) = project(p.x, p.y, p.z);
            (d, px, py, p.label)
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (d, px, py, label) in points {
        let opacity = if d >= 0.0 { 0.9 } else { 0.35 };
        if label == 1 {
            let _ = writeln!(
                svg,
                r##"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="#d62728" fill-opacity="{opacity}"/>"##,
                px - 2.5,
                py - 2.5
            );
        } else {
            let _ = writeln!(
                svg,
                r##"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="none" stroke="#1f77b4" stroke-opacity="{opacity}"/>"##
            );
        }
    }

    let ly = SIZE + 15.0;
    let _ = writeln!(svg, r##"<rect x="20" y="{:.1}" width="7" height="7" fill="#d62728"/>"##, ly - 7.0);
    let _ = writeln!(svg, r#"<text x="32" y="{ly:.1}">pulsar</text>"#);
    let _ = writeln!(svg, r##"<circle cx="104" cy="{:.1}" r="3.5" fill="none" stroke="#1f77b4"/>"##, ly - 3.5);
    let _ = writeln!(svg, r#"<text x="112" y="{ly:.1}">non-pulsar</text>"#);
    svg.push_str("</svg>\n");
    svg
}
