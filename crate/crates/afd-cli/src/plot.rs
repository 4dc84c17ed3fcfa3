//! Minimal standalone SVG plots: area-versus-time series and final-time
//! density curves. No timestamps or external assets, so outputs are
//! byte-stable across runs.

use std::fmt::Write as _;

use afd_core::diagnose::EvaluationReport;

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_min) / (self.x_max - self.x_min) * (W - 2.0 * MARGIN)
    }
    fn y(&self, v: f64) -> f64 {
        H - MARGIN - (v - self.y_min) / (self.y_max - self.y_min) * (H - 2.0 * MARGIN)
    }
}

fn svg_header(title: &str) -> String {
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}">"#,
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            r#"<text x="{tx}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#
        ),
        w = W,
        h = H,
        tx = W / 2.0,
        title = title
    )
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    write!(
        out,
        r#"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        x = MARGIN,
        y = MARGIN,
        w = W - 2.0 * MARGIN,
        h = H - 2.0 * MARGIN
    )
    .unwrap();
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        write!(
            out,
            concat!(
                r#"<text x="{px}" y="{pyb}" font-family="sans-serif" font-size="11" text-anchor="middle">{fx:.3}</text>"#,
                r#"<text x="{pxl}" y="{py}" font-family="sans-serif" font-size="11" text-anchor="end">{fy:.3}</text>"#
            ),
            px = frame.x(fx),
            pyb = H - MARGIN + 18.0,
            fx = fx,
            pxl = MARGIN - 6.0,
            py = frame.y(fy) + 4.0,
            fy = fy
        )
        .unwrap();
    }
    write!(
        out,
        concat!(
            r#"<text x="{cx}" y="{by}" font-family="sans-serif" font-size="13" text-anchor="middle">{xl}</text>"#,
            r#"<text x="16" y="{cy}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {cy})">{yl}</text>"#
        ),
        cx = W / 2.0,
        by = H - 14.0,
        xl = x_label,
        cy = H / 2.0,
        yl = y_label
    )
    .unwrap();
}

fn polyline(out: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str) {
    let mut path = String::new();
    for (x, y) in points {
        write!(path, "{:.2},{:.2} ", frame.x(*x), frame.y(*y)).unwrap();
    }
    write!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"/>"#,
        path.trim_end(),
        color
    )
    .unwrap();
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN + 16.0 + 18.0 * i as f64;
        write!(
            out,
            concat!(
                r#"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="{c}" stroke-width="2"/>"#,
                r#"<text x="{tx}" y="{ty}" font-family="sans-serif" font-size="12">{l}</text>"#
            ),
            x0 = W - MARGIN - 150.0,
            x1 = W - MARGIN - 120.0,
            y = y,
            c = color,
            tx = W - MARGIN - 112.0,
            ty = y + 4.0,
            l = label
        )
        .unwrap();
    }
}

/// Common-area-versus-time chart: one series per model pair plus the total.
pub fn area_vs_time_svg(report: &EvaluationReport) -> String {
    let y_max = report
        .total_areas
        .iter()
        .fold(1.0f64, |a, &b| a.max(b))
        .max(1e-9);
    let frame = Frame {
        x_min: 0.0,
        x_max: *report.times.last().expect("nonempty report"),
        y_min: 0.0,
        y_max: y_max * 1.05,
    };
    let mut out = svg_header("Common area at each measurement time");
    axes(&mut out, &frame, "time, s", "common area");
    let mut entries = Vec::new();
    for (p, &(i, j)) in report.pair_indices.iter().enumerate() {
        let pts: Vec<(f64, f64)> = report
            .times
            .iter()
            .zip(report.pair_areas.iter().map(|row| row[p]))
            .map(|(&t, a)| (t, a))
            .collect();
        let color = COLORS[p % COLORS.len()];
        polyline(&mut out, &frame, &pts, color);
        entries.push((format!("pair ({i},{j})"), color));
    }
    let total_pts: Vec<(f64, f64)> = report
        .times
        .iter()
        .zip(&report.total_areas)
        .map(|(&t, &a)| (t, a))
        .collect();
    polyline(&mut out, &frame, &total_pts, "black");
    entries.push(("total".to_string(), "black"));
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Fitted densities at the final measurement time.
pub fn final_pdfs_svg(report: &EvaluationReport) -> String {
    let pdfs = report.pdfs.last().expect("nonempty report");
    let lo = pdfs
        .iter()
        .map(|p| p.mu - 4.0 * p.sigma)
        .fold(f64::INFINITY, f64::min);
    let hi = pdfs
        .iter()
        .map(|p| p.mu + 4.0 * p.sigma)
        .fold(f64::NEG_INFINITY, f64::max);
    let n = 400;
    let curves: Vec<Vec<(f64, f64)>> = pdfs
        .iter()
        .map(|p| {
            (0..=n)
                .map(|k| {
                    let y = lo + (hi - lo) * k as f64 / n as f64;
                    (y, p.density(y))
                })
                .collect()
        })
        .collect();
    let peak = curves
        .iter()
        .flatten()
        .map(|(_, d)| *d)
        .fold(1e-12f64, f64::max);
    let frame = Frame {
        x_min: lo,
        x_max: hi,
        y_min: 0.0,
        y_max: peak * 1.05,
    };
    let t_final = *report.times.last().expect("nonempty report");
    let mut out = svg_header(&format!("Fitted output densities at t = {t_final} s"));
    axes(&mut out, &frame, "output", "density");
    let mut entries = Vec::new();
    for (m, curve) in curves.iter().enumerate() {
        let color = COLORS[m % COLORS.len()];
        polyline(&mut out, &frame, curve, color);
        entries.push((format!("model {m}"), color));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}
