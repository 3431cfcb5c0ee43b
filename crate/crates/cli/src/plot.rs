//! Small deterministic SVG charts.

use std::fmt::Write as _;

use decisive_core::Error;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    NcapScatter,
    Deviation,
}

impl std::str::FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ncap-scatter" => Ok(PlotKind::NcapScatter),
            "deviation" => Ok(PlotKind::Deviation),
            other => Err(format!("unknown plot kind {other}; expected ncap-scatter or deviation")),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round the upper bound up to a tidy value.
fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for step in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if step * mag >= v {
            return step * mag;
        }
    }
    10.0 * mag
}

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + x / self.x_max * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - y / self.y_max * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str, x_ticks: usize) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, y0) = (frame.px(0.0), frame.py(0.0));
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        frame.px(frame.x_max)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{:.2}" stroke="black"/>"#,
        frame.py(frame.y_max)
    );
    for k in 0..=x_ticks {
        let v = frame.x_max * k as f64 / x_ticks as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.px(v),
            y0 + 16.0,
            trim_num(v)
        );
    }
    for k in 0..=4 {
        let v = frame.y_max * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.py(v) + 4.0,
            trim_num(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn trim_num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// N_AL on x (0 to 4) against N_CP on y, one labelled point per system.
pub fn ncap_scatter(points: &[(String, u8, f64)]) -> Result<String, Error> {
    if points.is_empty() {
        return Err(Error::EmptyData);
    }
    let y_top = points.iter().map(|p| p.2).fold(0.0, f64::max);
    let frame = Frame { x_max: 4.0, y_max: nice_ceiling(y_top * 1.1) };
    let mut out = String::new();
    open(&mut out, "NCAP coordinates", &frame, "N_AL", "N_CP", 4);
    for (id, n_al, n_cp) in points {
        let (x, y) = (frame.px(f64::from(*n_al)), frame.py(*n_cp));
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="steelblue"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{} ({}, {:.2})</text>"#,
            x + 8.0,
            y - 8.0,
            escape(id),
            n_al,
            n_cp
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Deviation from the reference path over time as a polyline.
pub fn deviation_plot(label: &str, series: &[(f64, f64)]) -> Result<String, Error> {
    if series.is_empty() {
        return Err(Error::EmptyData);
    }
    let t0 = series[0].0;
    let span = series.last().map_or(0.0, |s| s.0 - t0);
    let d_top = series.iter().map(|s| s.1).fold(0.0, f64::max);
    let frame = Frame { x_max: nice_ceiling(span), y_max: nice_ceiling(d_top * 1.1) };
    let mut out = String::new();
    open(&mut out, &format!("Deviation {label}"), &frame, "time (s)", "deviation (m)", 5);
    let pts: Vec<String> = series
        .iter()
        .map(|(t, d)| format!("{:.2},{:.2}", frame.px(t - t0), frame.py(*d)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-width="1.5"/>"#,
        pts.join(" ")
    );
    out.push_str("</svg>\n");
    Ok(out)
}
