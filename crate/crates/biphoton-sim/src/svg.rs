//! Minimal self-contained SVG plots. Presentation only: nothing downstream
//! parses these files, so the goal is a small, well-formed picture, not a
//! plotting library.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PORT_COLORS: [(&str, &str); 4] = [
    ("H", "#1f77b4"),
    ("V", "#d62728"),
    ("D", "#2ca02c"),
    ("A", "#9467bd"),
];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min)
            * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min)
                * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(
        s,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">{title}</text>",
        WIDTH / 2.0
    );
    s
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_ticks: &[f64], y_ticks: &[f64]) {
    let x0 = frame.x(frame.x_min);
    let x1 = frame.x(frame.x_max);
    let y0 = frame.y(frame.y_min);
    let y1 = frame.y(frame.y_max);
    let _ = writeln!(
        s,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    for &t in x_ticks {
        let x = frame.x(t);
        let _ = writeln!(
            s,
            "  <line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            s,
            "  <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{t}</text>",
            y0 + 20.0
        );
    }
    for &t in y_ticks {
        let y = frame.y(t);
        let _ = writeln!(
            s,
            "  <line x1=\"{}\" y1=\"{y}\" x2=\"{x0}\" y2=\"{y}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{t:.0}</text>",
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        "  <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{y_label}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn polyline(s: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str, dashed: bool) {
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
        .collect();
    let dash = if dashed { " stroke-dasharray=\"6 3\"" } else { "" };
    let _ = writeln!(
        s,
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
        coords.join(" ")
    );
}

/// Fringe-scan plot: analytic curves per port with the Monte Carlo totals
/// overlaid as dots.
pub fn scan_svg(
    angles_deg: &[f64],
    analytic_hz: &[[f64; 4]],
    sampled_hz: &[[f64; 4]],
) -> String {
    let y_max = analytic_hz
        .iter()
        .chain(sampled_hz.iter())
        .flatten()
        .copied()
        .fold(1.0_f64, f64::max)
        * 1.08;
    let frame = Frame {
        x_min: angles_deg.first().copied().unwrap_or(0.0),
        x_max: angles_deg.last().copied().unwrap_or(90.0),
        y_min: 0.0,
        y_max,
    };
    let mut s = open_svg("Coincidence rate vs idler analyzer angle");
    let x_ticks: Vec<f64> = (0..5)
        .map(|i| frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0)
        .collect();
    let y_ticks: Vec<f64> = (0..=4).map(|i| y_max * i as f64 / 4.0).collect();
    axes(
        &mut s,
        &frame,
        "analyzer half-wave plate angle (deg)",
        "rate (1/s)",
        &x_ticks,
        &y_ticks,
    );
    for (p, (label, color)) in PORT_COLORS.iter().enumerate() {
        let curve: Vec<(f64, f64)> = angles_deg
            .iter()
            .zip(analytic_hz)
            .map(|(&a, row)| (a, row[p]))
            .collect();
        polyline(&mut s, &frame, &curve, color, false);
        for (&a, row) in angles_deg.iter().zip(sampled_hz) {
            let _ = writeln!(
                s,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.6\"/>",
                frame.x(a),
                frame.y(row[p])
            );
        }
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" fill=\"{color}\">{label}</text>",
            WIDTH - MARGIN_RIGHT - 60.0,
            MARGIN_TOP + 18.0 * (p as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Lock-trace plot: the emitted phase over time against the target band.
pub fn lock_svg(times_s: &[f64], phi_rad: &[f64], target_rad: f64, band_rad: f64) -> String {
    let y_lo = phi_rad
        .iter()
        .copied()
        .fold(target_rad - band_rad, f64::min)
        - 0.02;
    let y_hi = phi_rad
        .iter()
        .copied()
        .fold(target_rad + band_rad, f64::max)
        + 0.02;
    let frame = Frame {
        x_min: 0.0,
        x_max: times_s.last().copied().unwrap_or(1.0),
        y_min: y_lo,
        y_max: y_hi,
    };
    let mut s = open_svg("Locked output phase vs time");
    let x_ticks: Vec<f64> = (0..5).map(|i| frame.x_max * i as f64 / 4.0).collect();
    axes(
        &mut s,
        &frame,
        "time (s)",
        "phase (rad)",
        &x_ticks,
        &[],
    );
    for (y, dashed) in [
        (target_rad, false),
        (target_rad - band_rad, true),
        (target_rad + band_rad, true),
    ] {
        polyline(
            &mut s,
            &frame,
            &[(frame.x_min, y), (frame.x_max, y)],
            "#888888",
            dashed,
        );
    }
    let trace: Vec<(f64, f64)> = times_s.iter().copied().zip(phi_rad.iter().copied()).collect();
    polyline(&mut s, &frame, &trace, "#1f77b4", false);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_plot_is_well_formed() {
        let angles = [0.0, 45.0, 90.0];
        let analytic = [[1.0, 2.0, 3.0, 4.0]; 3];
        let sampled = [[1.1, 2.1, 2.9, 4.2]; 3];
        let svg = scan_svg(&angles, &analytic, &sampled);
        assert!(svg.starts_with("<svg xmlns="));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert_eq!(svg.matches("<circle").count(), 12);
    }

    #[test]
    fn lock_plot_draws_trace_and_band() {
        let svg = lock_svg(&[0.0, 0.5, 1.0], &[-1.52, -1.57, -1.58], -1.5708, 0.05);
        assert!(svg.starts_with("<svg xmlns="));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
    }
}
