//! Static SVG pictures of maps, optionally with a vertex function.

use std::fmt::Write;

use crate::calculus::VertexFunction;
use crate::map::{Color, CriticalMap};

/// Side of the square view box.
pub const VIEWBOX: f64 = 1000.0;

const MARGIN: f64 = 40.0;

/// Renders the faces of `map`, and its vertices coloured by `f` when given:
/// the real part picks the hue, the modulus the lightness.
pub fn render_svg(map: &CriticalMap, f: Option<&VertexFunction>) -> String {
    let pos: Vec<_> = (0..map.num_vertices()).map(|v| map.pos(v)).collect();
    let (mut lo, mut hi) = (pos[0], pos[0]);
    for p in &pos {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(f64::MIN_POSITIVE);
    let scale = (VIEWBOX - 2.0 * MARGIN) / span;
    // centre the bounding box and flip the imaginary axis
    let off_x = (VIEWBOX - (hi.re - lo.re) * scale) / 2.0;
    let off_y = (VIEWBOX - (hi.im - lo.im) * scale) / 2.0;
    let xy = |v: usize| {
        let p = pos[v];
        (
            off_x + (p.re - lo.re) * scale,
            VIEWBOX - off_y - (p.im - lo.im) * scale,
        )
    };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEWBOX} {VIEWBOX}" width="{VIEWBOX}" height="{VIEWBOX}">"#
    )
    .unwrap();
    writeln!(
        out,
        r##"<rect width="100%" height="100%" fill="#ffffff"/>"##
    )
    .unwrap();
    writeln!(
        out,
        r##"<g fill="#eef2f7" stroke="#44546a" stroke-width="1.5">"##
    )
    .unwrap();
    for face in map.faces() {
        let points: Vec<String> = face
            .iter()
            .map(|&v| {
                let (x, y) = xy(v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(out, r#"<polygon points="{}"/>"#, points.join(" ")).unwrap();
    }
    writeln!(out, "</g>").unwrap();

    let radius = (0.12 * map.delta() * scale).clamp(2.0, 12.0);
    let (re_lo, re_hi, max_mod) = match f {
        Some(f) => f.values().iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, 0.0f64),
            |(a, b, m), z| (a.min(z.re), b.max(z.re), m.max(z.norm())),
        ),
        None => (0.0, 0.0, 0.0),
    };
    writeln!(out, r##"<g stroke="#222222" stroke-width="0.8">"##).unwrap();
    for v in 0..map.num_vertices() {
        let (x, y) = xy(v);
        let fill = match f {
            Some(f) => {
                let z = f[v];
                let t = if re_hi > re_lo {
                    (z.re - re_lo) / (re_hi - re_lo)
                } else {
                    0.5
                };
                let hue = 240.0 * (1.0 - t);
                let light = if max_mod > 0.0 {
                    15.0 + 60.0 * z.norm() / max_mod
                } else {
                    50.0
                };
                format!("hsl({hue:.1},85%,{light:.1}%)")
            }
            None => match map.color(v) {
                Color::Gamma => "#000000".to_string(),
                Color::GammaStar => "#ffffff".to_string(),
            },
        };
        let r = if v == map.origin() {
            radius * 1.6
        } else {
            radius
        };
        writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}" fill="{fill}"/>"#
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "</svg>").unwrap();
    out
}
