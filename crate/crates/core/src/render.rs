//! Deterministic SVG output for similarity heatmaps and dendrograms.
//!
//! Both emitters write plain SVG text with fixed-precision coordinates, so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::clustering::Dendrogram;
use crate::corpus::LanguageCode;

pub const HEATMAP_LOW: (u8, u8, u8) = (8, 48, 107);
pub const HEATMAP_HIGH: (u8, u8, u8) = (255, 255, 229);
pub const CELL: usize = 12;
pub const DENDROGRAM_HEIGHT: f64 = 400.0;
const LEAF_SPACING: f64 = 16.0;
const LABEL_SPACE: usize = 72;

/// Linear two-stop color for a similarity clamped to `[-1, 1]`.
pub fn heat_color(value: f64) -> (u8, u8, u8) {
    let t = (value.clamp(-1.0, 1.0) + 1.0) / 2.0;
    let mix = |lo: u8, hi: u8| (lo as f64 + t * (hi as f64 - lo as f64)).round() as u8;
    (
        mix(HEATMAP_LOW.0, HEATMAP_HIGH.0),
        mix(HEATMAP_LOW.1, HEATMAP_HIGH.1),
        mix(HEATMAP_LOW.2, HEATMAP_HIGH.2),
    )
}

pub fn heatmap_svg(title: &str, languages: &[LanguageCode], matrix: &Array2<f64>) -> String {
    let l = languages.len();
    let grid = l * CELL;
    let (w, h) = (LABEL_SPACE + grid + 8, LABEL_SPACE + grid + 8);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="monospace" font-size="9">"#
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", escape(title)).unwrap();
    for (i, lang) in languages.iter().enumerate() {
        let y = LABEL_SPACE + i * CELL + CELL - 3;
        writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{lang}</text>"#, LABEL_SPACE - 4).unwrap();
        let x = LABEL_SPACE + i * CELL + CELL - 3;
        writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="start" transform="rotate(-90 {x} {})">{lang}</text>"#,
            LABEL_SPACE - 4,
            LABEL_SPACE - 4
        )
        .unwrap();
    }
    for i in 0..l {
        for j in 0..l {
            let (r, g, b) = heat_color(matrix[[i, j]]);
            writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({r},{g},{b})"><title>{} {} {:.6}</title></rect>"#,
                LABEL_SPACE + j * CELL,
                LABEL_SPACE + i * CELL,
                languages[i],
                languages[j],
                matrix[[i, j]]
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn dendrogram_svg(title: &str, dendrogram: &Dendrogram) -> String {
    let order = dendrogram.leaf_order();
    let l = order.len();
    let max_h = dendrogram.height(dendrogram.root());
    let scale = if max_h > 0.0 { DENDROGRAM_HEIGHT / max_h } else { 0.0 };
    let top = 16.0;
    let base = top + DENDROGRAM_HEIGHT;
    let left = 16.0;
    let width = left * 2.0 + LEAF_SPACING * l as f64;
    let height = base + LABEL_SPACE as f64;

    // x of each node, y from its height
    let mut x = vec![0.0; 2 * l - 1];
    for (pos, &leaf) in order.iter().enumerate() {
        x[leaf] = left + LEAF_SPACING * (pos as f64 + 0.5);
    }
    for m in &dendrogram.merges {
        x[m.node] = (x[m.left] + x[m.right]) / 2.0;
    }
    let y = |node: usize| base - dendrogram.height(node) * scale;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}" font-family="monospace" font-size="9">"#
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", escape(title)).unwrap();
    for m in &dendrogram.merges {
        let ym = y(m.node);
        writeln!(
            out,
            r#"<path class="merge" d="M{:.2},{:.2} V{ym:.2} H{:.2} V{:.2}" fill="none" stroke="black"><title>{:.6}</title></path>"#,
            x[m.left],
            y(m.left),
            x[m.right],
            y(m.right),
            m.height
        )
        .unwrap();
    }
    for &leaf in &order {
        let lx = x[leaf];
        let ly = base + 4.0;
        writeln!(
            out,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
            dendrogram.leaves[leaf]
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
