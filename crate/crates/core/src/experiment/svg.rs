//! Stacked-bar figures: one file per (model, d), one panel per
//! (scenario, method), one bar per transfer function.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::pid::Method;

use super::{GridResult, GridRow};

const LEGEND: [&str; 5] = ["UnqR", "UnqC", "Shd", "Syn", "Hres"];
const COLORS: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#bdbdbd"];

const PANEL_W: f64 = 280.0;
const PANEL_H: f64 = 190.0;
const MARGIN_L: f64 = 48.0;
const MARGIN_T: f64 = 40.0;
const GAP: f64 = 28.0;
const PLOT_TOP: f64 = 22.0;
const PLOT_BOTTOM: f64 = 26.0;

/// Vertical extent of one bar: positive terms stack up from zero and
/// negative ones down.
fn extent(terms: &[f64; 5]) -> (f64, f64) {
    let up: f64 = terms.iter().filter(|&&v| v > 0.0).sum();
    let down: f64 = terms.iter().filter(|&&v| v < 0.0).sum();
    (down, up)
}

fn nice_ceil(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (v * 10.0 - 1e-9).ceil() / 10.0
    }
}

pub fn render_svg(result: &GridResult, model: Model, d: f64) -> Option<String> {
    let rows: Vec<&GridRow> = result
        .rows
        .iter()
        .filter(|r| r.key.model == model && r.key.d == d)
        .collect();
    if rows.is_empty() {
        return None;
    }
    let mut scenarios: Vec<u8> = rows.iter().map(|r| r.key.scenario).collect();
    scenarios.sort_unstable();
    scenarios.dedup();
    let mut methods: Vec<Method> = rows.iter().map(|r| r.spectrum.method).collect();
    methods.sort_unstable();
    methods.dedup();
    let mut transfers: Vec<_> = rows.iter().map(|r| r.key.transfer).collect();
    transfers.sort_unstable();
    transfers.dedup();

    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for r in &rows {
        let (a, b) = extent(&r.spectrum.terms());
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let (lo, hi) = (-nice_ceil(-lo), nice_ceil(hi).max(0.1));
    let normalized = rows.iter().all(|r| r.spectrum.normalized);

    let width = MARGIN_L + methods.len() as f64 * (PANEL_W + GAP);
    let height = MARGIN_T + scenarios.len() as f64 * (PANEL_H + GAP) + 30.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let units = if normalized { "normalized" } else { "bits" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{} spectra, d = {d} ({units})</text>"#,
        width / 2.0,
        model.as_str().to_uppercase()
    );

    let plot_h = PANEL_H - PLOT_TOP - PLOT_BOTTOM;
    let y_of = |v: f64, top: f64| top + PLOT_TOP + (hi - v) / (hi - lo) * plot_h;
    for (i, &sc) in scenarios.iter().enumerate() {
        for (j, &m) in methods.iter().enumerate() {
            let x0 = MARGIN_L + j as f64 * (PANEL_W + GAP);
            let top = MARGIN_T + i as f64 * (PANEL_H + GAP);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">Scenario {sc}, {m}</text>"#,
                x0 + PANEL_W / 2.0,
                top + 12.0
            );
            let ticks: &[f64] = if lo < 0.0 { &[lo, 0.0, hi] } else { &[0.0, hi] };
            for &v in ticks {
                let y = y_of(v, top);
                let stroke = if v == 0.0 { "#000" } else { "#ccc" };
                let _ = writeln!(
                    s,
                    r#"<line x1="{x0}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{stroke}" stroke-width="0.8"/>"#,
                    x0 + PANEL_W
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
                    x0 - 4.0,
                    y + 4.0
                );
            }
            let slot = PANEL_W / transfers.len() as f64;
            for (k, &t) in transfers.iter().enumerate() {
                let bx = x0 + k as f64 * slot + slot * 0.15;
                let bw = slot * 0.7;
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    bx + bw / 2.0,
                    top + PANEL_H - 8.0,
                    t.label()
                );
                let Some(row) = rows
                    .iter()
                    .find(|r| r.key.scenario == sc && r.key.transfer == t && r.spectrum.method == m)
                else {
                    continue;
                };
                let (mut up, mut down) = (0.0, 0.0);
                for (term, (&v, color)) in row.spectrum.terms().iter().zip(COLORS).enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let (a, b) = if v > 0.0 {
                        up += v;
                        (up - v, up)
                    } else {
                        down += v;
                        (down, down - v)
                    };
                    let (ya, yb) = (y_of(b, top), y_of(a, top));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{bx:.2}" y="{ya:.2}" width="{bw:.2}" height="{:.2}" fill="{color}"><title>{} {} = {v}</title></rect>"#,
                        (yb - ya).max(0.0),
                        t.label(),
                        LEGEND[term]
                    );
                }
            }
        }
    }
    let ly = height - 16.0;
    for (k, (name, color)) in LEGEND.iter().zip(COLORS).enumerate() {
        let lx = MARGIN_L + k as f64 * 80.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{ly}">{name}</text>"#,
            ly - 10.0,
            lx + 16.0
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// Writes `spectra_<model>_d<d>.svg` into `dir` for every (model, d) present.
pub fn emit_svg(result: &GridResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::InvalidConfig("no result rows to plot".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut keys: Vec<(Model, f64)> = result.rows.iter().map(|r| (r.key.model, r.key.d)).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    let mut written = Vec::new();
    for (model, d) in keys {
        let Some(svg) = render_svg(result, model, d) else { continue };
        let path = dir.join(format!("spectra_{}_d{d}.svg", model.as_str()));
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
