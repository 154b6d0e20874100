//! Native SVG plots: phase-diagram heat maps with a locus overlay and
//! trajectory line plots. Plain rectangles and polylines, no dependencies,
//! deterministic output.

use lct_core::bifurcation::{CellClass, LocusPoint, PhaseDiagram};
use std::fmt::Write as _;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

fn cell_color(class: CellClass) -> &'static str {
    match class {
        CellClass::Stable => "#2e8b57",
        CellClass::Unstable => "#c0392b",
        CellClass::Critical => "#f1c40f",
        CellClass::Singular => "#95a5a6",
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>",
        MARGIN,
        MARGIN,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let _ = write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{fx:.2}</text>",
            frame.x(fx),
            HEIGHT - MARGIN + 18.0
        );
        let _ = write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{fy:.2}</text>",
            MARGIN - 6.0,
            frame.y(fy) + 4.0
        );
    }
    let _ = write!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">{x_label}</text>",
        WIDTH / 2.0,
        HEIGHT - 14.0
    );
    let _ = write!(
        out,
        "<text x=\"16\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

/// Heat map of a phase diagram (sigma horizontal, epsilon vertical) with an
/// optional Hopf-locus polyline.
pub fn phase_diagram_svg(diagram: &PhaseDiagram, locus: Option<&[LocusPoint]>) -> String {
    let frame = Frame {
        x_min: diagram.sigma_grid[0],
        x_max: *diagram.sigma_grid.last().unwrap(),
        y_min: diagram.epsilon_grid[0],
        y_max: *diagram.epsilon_grid.last().unwrap(),
    };
    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = write!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    let n_sigma = diagram.sigma_grid.len();
    let n_eps = diagram.epsilon_grid.len();
    let cell_w = (WIDTH - 2.0 * MARGIN) / n_sigma as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / n_eps as f64;
    for (i, _) in diagram.epsilon_grid.iter().enumerate() {
        for (j, _) in diagram.sigma_grid.iter().enumerate() {
            let class = diagram.cell(i, j).class;
            let x = MARGIN + j as f64 * cell_w;
            let y = HEIGHT - MARGIN - (i + 1) as f64 * cell_h;
            let _ = write!(
                out,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                cell_w + 0.5,
                cell_h + 0.5,
                cell_color(class)
            );
        }
    }

    if let Some(points) = locus {
        if points.len() > 1 {
            let mut path = String::new();
            for p in points {
                let _ = write!(path, "{:.2},{:.2} ", frame.x(p.sigma), frame.y(p.epsilon));
            }
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#ffe680\" stroke-width=\"3\"/>",
                path.trim_end()
            );
        }
    }

    axes(&mut out, &frame, "sigma", "epsilon");
    out.push_str("</svg>");
    out
}

/// Line plot of selected trajectory components.
pub fn trajectory_svg(times: &[f64], series: &[(String, Vec<f64>)]) -> String {
    const COLORS: [&str; 8] = [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    ];
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, values) in series {
        for v in values {
            y_min = y_min.min(*v);
            y_max = y_max.max(*v);
        }
    }
    if y_min >= y_max || !y_min.is_finite() {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let frame = Frame {
        x_min: times[0],
        x_max: *times.last().unwrap(),
        y_min: y_min - pad,
        y_max: y_max + pad,
    };
    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = write!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    for (s, (name, values)) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        let stride = (times.len() / 2000).max(1);
        let mut path = String::new();
        for (i, (&t, v)) in times.iter().zip(values.iter()).enumerate() {
            if i % stride == 0 || i + 1 == times.len() {
                let _ = write!(path, "{:.2},{:.2} ", frame.x(t), frame.y(*v));
            }
        }
        let _ = write!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.trim_end()
        );
        let _ = write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            WIDTH - MARGIN + 6.0,
            MARGIN + 16.0 * s as f64
        );
    }
    axes(&mut out, &frame, "t", "state");
    out.push_str("</svg>");
    out
}
