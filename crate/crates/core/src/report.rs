// SPDX-License-Identifier: Apache-2.0

//! Tables and plots over a run's history.

use std::fmt::Write as _;

use serde::Serialize;

use crate::eval::{QorRecord, Status};
use crate::evolve::{incumbent, EvolveError, RunDir};
use crate::grid::QorVector;
use crate::mutate::line_distance;
use crate::pareto::{delta, front, MetricKey, PLOT_KEYS};

/// One candidate of a report. Deltas are percent reductions against the
/// baseline; the baseline row carries raw values only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub iteration: u32,
    pub candidate_id: String,
    pub status: Status,
    pub repair_attempts: u32,
    /// Changed lines relative to the baseline document.
    pub loc_modified: usize,
    pub qor: Option<QorVector>,
    /// Per `MetricKey::ALL`; `None` for the baseline, failed records, and
    /// metrics whose baseline value is zero.
    pub deltas: Vec<Option<f64>>,
}

pub fn report_rows(dir: &RunDir) -> Result<Vec<ReportRow>, EvolveError> {
    let history = dir.history()?;
    let base = history.first().ok_or_else(|| EvolveError::Run("history is empty".into()))?;
    let base_doc = dir.object(&base.candidate_id)?;
    let base_lines: Vec<&str> = base_doc.lines().collect();
    let mut rows = Vec::with_capacity(history.len());
    for r in &history {
        let doc = dir.object(&r.candidate_id)?;
        let deltas = match (&base.qor, &r.qor) {
            (Some(b), Some(q)) if r.iteration != base.iteration => MetricKey::ALL.iter().map(|k| delta(k.get(b), k.get(q)).ok()).collect(),
            _ => vec![None; MetricKey::ALL.len()],
        };
        rows.push(ReportRow {
            iteration: r.iteration,
            candidate_id: r.candidate_id.clone(),
            status: r.status,
            repair_attempts: r.repair_attempts,
            loc_modified: line_distance(&base_lines, &doc.lines().collect::<Vec<_>>()),
            qor: r.qor,
            deltas,
        });
    }
    Ok(rows)
}

fn column(k: MetricKey) -> String {
    k.name().replace('-', "_")
}

/// Comma-separated table with a header row. Empty cells mean "not
/// applicable"; `NA` marks a delta whose baseline value is zero.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("iteration,candidate_id,status,repair_attempts,loc_modified");
    for k in MetricKey::ALL {
        let _ = write!(s, ",{}", column(k));
    }
    for k in MetricKey::ALL {
        let _ = write!(s, ",delta_{}", column(k));
    }
    s.push('\n');
    let first = rows.first().map(|r| r.iteration);
    let base = rows.first().and_then(|r| r.qor);
    for r in rows {
        let _ = write!(s, "{},{},{},{},{}", r.iteration, r.candidate_id, r.status, r.repair_attempts, r.loc_modified);
        for k in MetricKey::ALL {
            match &r.qor {
                Some(q) => {
                    let _ = write!(s, ",{}", k.get(q));
                }
                None => s.push(','),
            }
        }
        for (k, d) in MetricKey::ALL.iter().zip(&r.deltas) {
            match d {
                Some(d) => {
                    let _ = write!(s, ",{d:.4}");
                }
                None if r.qor.is_some() && Some(r.iteration) != first && base.is_some_and(|b| k.get(&b) == 0.0) => s.push_str(",NA"),
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

/// The data behind a plot.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    /// Ok records in iteration order.
    pub points: Vec<PlotPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotPoint {
    pub iteration: u32,
    pub candidate_id: String,
    pub dr_wl: f64,
    pub gr_rt: f64,
    pub on_front: bool,
    pub baseline: bool,
    pub selected: bool,
}

pub fn plot_data(dir: &RunDir) -> Result<PlotData, EvolveError> {
    let history = dir.history()?;
    let spec = dir.config()?.objectives;
    let selected = incumbent(&history, &spec)?.iteration;
    let on_front: Vec<u32> = front(&history, &PLOT_KEYS).iter().map(|r| r.iteration).collect();
    let points = history
        .iter()
        .filter(|r| r.is_ok())
        .map(|r: &QorRecord| {
            let q = r.qor.expect("ok records carry qor");
            PlotPoint {
                iteration: r.iteration,
                candidate_id: r.candidate_id.clone(),
                dr_wl: q.dr_wl,
                gr_rt: q.gr_rt,
                on_front: on_front.contains(&r.iteration),
                baseline: r.iteration == 0,
                selected: r.iteration == selected,
            }
        })
        .collect();
    Ok(PlotData { points })
}

/// Sidecar table: one row per ok record.
pub fn plot_csv(data: &PlotData) -> String {
    let mut s = String::from("iteration,candidate_id,dr_wl,gr_rt,on_front,baseline,selected\n");
    for p in &data.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.iteration, p.candidate_id, p.dr_wl, p.gr_rt, p.on_front as u8, p.baseline as u8, p.selected as u8
        );
    }
    s
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 64.0;

/// Scatter of GR runtime (x) against detailed wirelength (y).
pub fn plot_svg(data: &PlotData, title: &str) -> String {
    let pts = &data.points;
    let range = |f: fn(&PlotPoint) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        let pad = ((hi - lo) * 0.05).max(hi.abs() * 1e-3).max(1e-9);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = range(|p| p.gr_rt);
    let (y0, y1) = range(|p| p.dr_wl);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, xml_escape(title));
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(xv), b + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, sy(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">GR runtime (s)</text>"#, W / 2.0, H - 20.0);
    let _ = writeln!(s, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">DR wirelength</text>"#, H / 2.0, H / 2.0);

    let mut fr: Vec<&PlotPoint> = pts.iter().filter(|p| p.on_front).collect();
    fr.sort_by(|a, b| a.gr_rt.total_cmp(&b.gr_rt).then(b.dr_wl.total_cmp(&a.dr_wl)));
    if fr.len() > 1 {
        let path: Vec<String> = fr.iter().map(|p| format!("{:.2},{:.2}", sx(p.gr_rt), sy(p.dr_wl))).collect();
        let _ = writeln!(s, r##"<polyline class="front" points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##, path.join(" "));
    }
    for p in pts {
        let _ = writeln!(
            s,
            r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="{}"><title>iteration {}</title></circle>"##,
            sx(p.gr_rt),
            sy(p.dr_wl),
            if p.on_front { "#d62728" } else { "#1f77b4" },
            p.iteration
        );
    }
    for p in pts.iter().filter(|p| p.baseline) {
        let _ = writeln!(
            s,
            r#"<rect class="baseline" x="{:.2}" y="{:.2}" width="10" height="10" fill="none" stroke="black" stroke-width="2"/>"#,
            sx(p.gr_rt) - 5.0,
            sy(p.dr_wl) - 5.0
        );
    }
    for p in pts.iter().filter(|p| p.selected) {
        let (cx, cy) = (sx(p.gr_rt), sy(p.dr_wl));
        let _ = writeln!(
            s,
            r##"<path class="selected" d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2} Z" fill="none" stroke="#2ca02c" stroke-width="2"/>"##,
            cx,
            cy - 8.0,
            cx + 8.0,
            cy,
            cx,
            cy + 8.0,
            cx - 8.0,
            cy
        );
    }
    let ly = MARGIN - 18.0;
    let _ = writeln!(
        s,
        r##"<circle cx="{}" cy="{ly}" r="3" fill="#1f77b4"/><text x="{}" y="{}">candidate</text>"##,
        r - 260.0,
        r - 252.0,
        ly + 4.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="10" height="10" fill="none" stroke="black" stroke-width="2"/><text x="{}" y="{}">baseline</text>"#,
        r - 175.0,
        ly - 5.0,
        r - 160.0,
        ly + 4.0
    );
    let _ = writeln!(
        s,
        r##"<path d="M{} {} l6 6 l-6 6 l-6 -6 Z" fill="none" stroke="#2ca02c" stroke-width="2"/><text x="{}" y="{}">selected</text>"##,
        r - 80.0,
        ly - 6.0,
        r - 68.0,
        ly + 4.0
    );
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{run_evolution, ClockKind, Control, EvolutionConfig};
    use crate::io::{emit_benchmark, generate, SynthParams};
    use crate::mutate::ScriptedProvider;

    fn small_run(dir: &std::path::Path, iterations: u32) -> RunDir {
        let p = SynthParams { name: "small".into(), nx: 8, ny: 8, nets: 20, band: Some((3, 5, 2)), seed: 11, ..SynthParams::congested() };
        let design = dir.join("small.gr");
        std::fs::write(&design, emit_benchmark(&generate(&p))).unwrap();
        let mut c = EvolutionConfig::new(design, dir.join("run"));
        c.max_iterations = iterations;
        c.eval.clock = ClockKind::Work;
        run_evolution(&c, &mut ScriptedProvider::new(3), Control::default()).unwrap();
        RunDir::open(dir.join("run")).unwrap()
    }

    #[test]
    fn deltas_recompute_from_raw_columns() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = small_run(tmp.path(), 6);
        let rows = report_rows(&dir).unwrap();
        let csv = report_csv(&rows);
        let lines: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
        let header = &lines[0];
        let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
        let base = &lines[1];
        assert!(header.len() == base.len());
        for k in MetricKey::ALL {
            let name = column(k);
            assert_eq!(base[col(&format!("delta_{name}"))], "", "baseline row is raw only");
            for row in &lines[2..] {
                let d = row[col(&format!("delta_{name}"))];
                if row[col("status")] != "ok" {
                    assert_eq!(d, "");
                    continue;
                }
                let b: f64 = base[col(&name)].parse().unwrap();
                let o: f64 = row[col(&name)].parse().unwrap();
                if b == 0.0 {
                    assert_eq!(d, "NA");
                } else {
                    let stored: f64 = d.parse().unwrap();
                    assert!((stored - (b - o) / b * 100.0).abs() <= 0.01);
                }
            }
        }
        assert_eq!(rows[0].loc_modified, 0);
    }

    #[test]
    fn plot_has_one_row_per_ok_record() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = small_run(tmp.path(), 5);
        let data = plot_data(&dir).unwrap();
        let ok = dir.history().unwrap().iter().filter(|r| r.is_ok()).count();
        assert_eq!(plot_csv(&data).lines().count() - 1, ok);
        let svg = plot_svg(&data, "small");
        assert_eq!(svg.matches("class=\"point\"").count(), ok);
        assert_eq!(svg.matches("class=\"baseline\"").count(), 1);
        assert_eq!(svg.matches("class=\"selected\"").count(), 1);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn baseline_only_run_has_one_marker() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = small_run(tmp.path(), 0);
        let data = plot_data(&dir).unwrap();
        assert_eq!(data.points.len(), 1);
        assert!(data.points[0].baseline && data.points[0].selected && data.points[0].on_front);
        let svg = plot_svg(&data, "t");
        assert_eq!(svg.matches("class=\"point\"").count(), 1);
        assert!(!svg.contains("polyline"));
    }
}
