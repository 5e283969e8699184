//! Styled SVG emission with per-node region metadata.

use std::fmt::Write as _;

use crate::graph::{Condition, FlowChart};

use super::layout::Layout;
use super::style::{StyleFamily, StyleSpec};
use super::{GenError, Region, RegionMap, ShapeKind};

fn esc(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() {
        format!("{}", v as i64)
    } else {
        format!("{v:.1}")
    }
}

fn css_for(style: &StyleSpec) -> String {
    let mut css = String::from(
        ".node text { font: 13px sans-serif; fill: #1A1A1A; }\n\
         .edge { stroke: #333333; fill: none; stroke-width: 1.5; }\n\
         .edge-label { font: 12px sans-serif; fill: #333333; }\n\
         .overlay { font: bold 18px sans-serif; fill: #FF0000; }\n",
    );
    match style.family {
        StyleFamily::BlackWhite => {
            css.push_str(".node .body { fill: #FFFFFF; stroke: #000000; stroke-width: 1.5; }\n");
        }
        StyleFamily::Default => {
            css.push_str(".node .body { fill: #ECECFF; stroke: #9370DB; stroke-width: 1.5; }\n");
        }
        StyleFamily::SingleColor => {
            let color = style.colors.first().map(String::as_str).unwrap_or("#FFFFFF");
            let _ = writeln!(
                css,
                ".node .body {{ fill: {color}; stroke: #333333; stroke-width: 1.5; }}"
            );
        }
        StyleFamily::MultiColor => {
            css.push_str(".node .body { stroke: #333333; stroke-width: 1.5; }\n");
            for (i, color) in style.colors.iter().enumerate() {
                let _ = writeln!(css, ".c{i} .body {{ fill: {color}; }}");
            }
        }
    }
    css
}

fn diamond_polygon(x: f64, y: f64, w: f64, h: f64) -> Vec<[f64; 2]> {
    vec![
        [x + w / 2.0, y],
        [x + w, y + h / 2.0],
        [x + w / 2.0, y + h],
        [x, y + h / 2.0],
    ]
}

fn node_body_svg(kind: ShapeKind, x: f64, y: f64, w: f64, h: f64) -> String {
    match kind {
        ShapeKind::Rect => format!(
            "<rect class=\"body\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
            fmt_num(x),
            fmt_num(y),
            fmt_num(w),
            fmt_num(h)
        ),
        ShapeKind::Rounded => format!(
            "<rect class=\"body\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"8\"/>",
            fmt_num(x),
            fmt_num(y),
            fmt_num(w),
            fmt_num(h)
        ),
        ShapeKind::Stadium => format!(
            "<rect class=\"body\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"{}\"/>",
            fmt_num(x),
            fmt_num(y),
            fmt_num(w),
            fmt_num(h),
            fmt_num(h / 2.0)
        ),
        ShapeKind::Diamond => {
            let points: Vec<String> = diamond_polygon(x, y, w, h)
                .iter()
                .map(|p| format!("{},{}", fmt_num(p[0]), fmt_num(p[1])))
                .collect();
            format!("<polygon class=\"body\" points=\"{}\"/>", points.join(" "))
        }
    }
}

/// Emits the chart as SVG text plus the region map read back from the same
/// geometry the markup was written from. Byte-deterministic for a fixed
/// (chart, layout, style) triple.
pub fn render_svg(
    chart: &FlowChart,
    layout: &Layout,
    style: &StyleSpec,
    overlay_labels: bool,
) -> Result<(String, RegionMap), GenError> {
    for label in chart.labels() {
        layout.node(label)?;
    }
    let (canvas_w, canvas_h) = layout.canvas;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt_num(canvas_w),
        fmt_num(canvas_h),
        fmt_num(canvas_w),
        fmt_num(canvas_h)
    );
    let _ = writeln!(svg, "<style>\n{}</style>", css_for(style));
    svg.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" \
         markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">\
         <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#333333\"/></marker></defs>\n",
    );

    // Edges first so node bodies paint over the elbow joints.
    for edge in chart.edges() {
        let from = layout.node(&edge.from)?.bbox;
        let to = layout.node(&edge.to)?.bbox;
        let (x1, y1) = (from.x + from.w / 2.0, from.y + from.h);
        let (x2, y2) = (to.x + to.w / 2.0, to.y);
        let mid_y = (y1 + y2) / 2.0;
        // Orthogonal elbow: drop to the midpoint band, shift, then drop in.
        let points = if x1 == x2 {
            format!("{},{} {},{}", fmt_num(x1), fmt_num(y1), fmt_num(x2), fmt_num(y2))
        } else {
            format!(
                "{},{} {},{} {},{} {},{}",
                fmt_num(x1),
                fmt_num(y1),
                fmt_num(x1),
                fmt_num(mid_y),
                fmt_num(x2),
                fmt_num(mid_y),
                fmt_num(x2),
                fmt_num(y2)
            )
        };
        let _ = writeln!(
            svg,
            "<polyline class=\"edge\" points=\"{points}\" marker-end=\"url(#arrow)\"/>"
        );
        let label_text = match &edge.condition {
            Condition::Unconditional => None,
            other => Some(other.to_string()),
        };
        if let Some(text) = label_text {
            let lx = (x1 + x2) / 2.0;
            let _ = writeln!(
                svg,
                "<text class=\"edge-label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                fmt_num(lx),
                fmt_num(mid_y - 4.0),
                esc(&text)
            );
        }
    }

    let mut regions = RegionMap::new(layout.canvas);
    for (idx, node) in chart.nodes().enumerate() {
        let positioned = layout.node(&node.label)?;
        let b = positioned.bbox;
        let kind = positioned.shape;
        let class = match style.family {
            StyleFamily::MultiColor => {
                format!("node c{}", idx % style.colors.len().max(1))
            }
            _ => "node".to_string(),
        };
        let _ = writeln!(
            svg,
            "<g class=\"{class}\" data-label=\"{}\">",
            esc(node.label.as_str())
        );
        let _ = writeln!(svg, "{}", node_body_svg(kind, b.x, b.y, b.w, b.h));
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
            fmt_num(b.x + b.w / 2.0),
            fmt_num(b.y + b.h / 2.0),
            esc(&node.statement)
        );
        if overlay_labels {
            let _ = writeln!(
                svg,
                "<text class=\"overlay\" x=\"{}\" y=\"{}\">{}</text>",
                fmt_num(b.x + 4.0),
                fmt_num(b.y + 16.0),
                esc(node.label.as_str())
            );
        }
        svg.push_str("</g>\n");
        let polygon = match kind {
            ShapeKind::Diamond => Some(diamond_polygon(b.x, b.y, b.w, b.h)),
            _ => None,
        };
        regions.insert(Region {
            label: node.label.clone(),
            shape_kind: kind,
            bbox: b,
            polygon,
        });
    }
    svg.push_str("</svg>\n");
    Ok((svg, regions))
}
