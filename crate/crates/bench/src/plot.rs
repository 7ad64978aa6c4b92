//! Static SVG charts of sweep results: planning time against victim count,
//! one row per map with an MSMRTA panel and an MRGA panel, one series per
//! robot count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::sweep::{Algorithm, SweepError, SweepRow};

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;
const LEGEND_W: f64 = 110.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Series of one panel: robot count -> (victims, median microseconds).
type Panel = BTreeMap<usize, Vec<(usize, u64)>>;

/// Smallest "nice" value (1, 2 or 5 times a power of ten) at or above `x`.
pub fn nice_ceiling(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|s| s * mag)
        .find(|&v| v >= x)
        .unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn collect(rows: &[SweepRow]) -> BTreeMap<String, [Panel; 2]> {
    let mut maps: BTreeMap<String, [Panel; 2]> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        let slot = match r.algorithm {
            Algorithm::Msmrta => 0,
            Algorithm::Mrga => 1,
            Algorithm::Reduction => continue,
        };
        let Some(t) = r.median_time_us else { continue };
        maps.entry(r.map_id.clone()).or_default()[slot]
            .entry(r.n_robots)
            .or_default()
            .push((r.n_victims, t));
    }
    for panels in maps.values_mut() {
        for series in panels.iter_mut().flat_map(|p| p.values_mut()) {
            series.sort_unstable();
        }
    }
    maps
}

fn panel(out: &mut String, x0: f64, y0: f64, title: &str, series: &Panel, x_max: f64) {
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let (ox, oy) = (x0 + MARGIN_L, y0 + MARGIN_T + plot_h);
    let data_max = series.values().flatten().map(|&(_, t)| t).max().unwrap_or(0) as f64;
    let y_max = nice_ceiling(data_max);
    let sx = |v: f64| ox + v / x_max * plot_w;
    let sy = |t: f64| oy - t / y_max * plot_h;

    let _ = writeln!(
        out,
        r#"<g class="panel" data-title="{t}" data-y-max="{y_max}"><text x="{cx}" y="{ty}" text-anchor="middle" font-size="14">{t}</text>"#,
        t = escape(title),
        cx = ox + plot_w / 2.0,
        ty = y0 + MARGIN_T - 20.0,
    );
    let _ = writeln!(
        out,
        r#"<line x1="{ox}" y1="{oy}" x2="{x2}" y2="{oy}" stroke="black"/><line x1="{ox}" y1="{oy}" x2="{ox}" y2="{y2}" stroke="black"/>"#,
        x2 = ox + plot_w,
        y2 = oy - plot_h,
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            out,
            r##"<line x1="{a}" y1="{y}" x2="{ox}" y2="{y}" stroke="black"/><text x="{tx}" y="{ty}" text-anchor="end" font-size="10">{v}</text><line x1="{ox}" y1="{y}" x2="{x2}" y2="{y}" stroke="#ddd"/>"##,
            a = ox - 4.0,
            tx = ox - 6.0,
            ty = y + 3.0,
            x2 = ox + plot_w,
        );
    }
    for i in 0..=5 {
        let v = x_max * i as f64 / 5.0;
        let x = sx(v);
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{oy}" x2="{x}" y2="{b}" stroke="black"/><text x="{x}" y="{ty}" text-anchor="middle" font-size="10">{v}</text>"#,
            b = oy + 4.0,
            ty = oy + 16.0,
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{cx}" y="{ty}" text-anchor="middle" font-size="12">Victims (count)</text><text x="{lx}" y="{cy}" text-anchor="middle" font-size="12" transform="rotate(-90 {lx} {cy})">Planning time (µs, median)</text>"#,
        cx = ox + plot_w / 2.0,
        ty = oy + 36.0,
        lx = x0 + 18.0,
        cy = oy - plot_h / 2.0,
    );
    for (i, (robots, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = pts
            .iter()
            .map(|&(m, t)| format!("{:.2},{:.2}", sx(m as f64), sy(t as f64)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-robots="{robots}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        for &(m, t) in pts {
            let _ = writeln!(
                out,
                r#"<circle class="point" data-value="{t}" cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                sx(m as f64),
                sy(t as f64)
            );
        }
    }
    out.push_str("</g>\n");
}

/// Renders all maps into one SVG document.
pub fn render_svg(rows: &[SweepRow]) -> Result<String, SweepError> {
    let maps = collect(rows);
    if maps.is_empty() {
        return Err(SweepError::Empty);
    }
    let robot_counts: Vec<usize> = {
        let mut v: Vec<usize> = maps.values().flat_map(|p| p.iter().flat_map(|s| s.keys().copied())).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let x_max = nice_ceiling(rows.iter().map(|r| r.n_victims).max().unwrap_or(1) as f64);
    let width = 2.0 * PANEL_W + LEGEND_W;
    let height = PANEL_H * maps.len() as f64 + 30.0;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (row, (map_id, panels)) in maps.iter().enumerate() {
        let y0 = 30.0 + PANEL_H * row as f64;
        let _ = writeln!(
            out,
            r#"<g class="map" data-map="{id}"><text x="10" y="{ty}" font-size="15" font-weight="bold">Map {id}</text>"#,
            id = escape(map_id),
            ty = y0 + 5.0,
        );
        panel(&mut out, 0.0, y0, "MSMRTA", &panels[0], x_max);
        panel(&mut out, PANEL_W, y0, "MRGA", &panels[1], x_max);
        out.push_str("</g>\n");
    }
    let lx = 2.0 * PANEL_W + 10.0;
    let _ = writeln!(out, r#"<g class="legend"><text x="{lx}" y="60" font-size="12">Robots</text>"#);
    for (i, n) in robot_counts.iter().enumerate() {
        let ly = 80.0 + 18.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}" font-size="11">N = {n}</text>"#,
            x2 = lx + 20.0,
            tx = lx + 26.0,
            ty = ly + 4.0,
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn render_plot(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    let svg = render_svg(rows)?;
    std::fs::write(path, svg).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}
