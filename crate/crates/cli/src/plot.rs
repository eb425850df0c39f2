//! SER-vs-SNR line plots as standalone SVG, drawn only from table rows.
//!
//! SER is plotted on a log axis from 1e-5 to 1. Points below the floor
//! (including zero-error points) are drawn on the floor as hollow
//! downward triangles. Points without a scored run are left out and break
//! the line.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::harness::SerReport;
use crate::table::{tables, SerTable};

pub const SER_FLOOR: f64 = 1e-5;
const DECADES: i32 = 5;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 560.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 400.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub algorithm: String,
    pub detector: String,
    /// (SNR dB, SER) in ascending SNR; `None` where nothing was scored.
    pub points: Vec<(f64, Option<f64>)>,
}

impl Series {
    pub fn label(&self) -> String {
        let alg = match self.algorithm.as_str() {
            "comon" => "Comon",
            "jade" => "JADE",
            "fastica" => "FastICA",
            other => other,
        };
        match self.detector.as_str() {
            "sud" => "SUD".to_string(),
            "ica" => format!("ICA ({alg})"),
            "sudica" => format!("SUD-ICA ({alg})"),
            other => format!("{other} ({alg})"),
        }
    }

    fn color(&self) -> &'static str {
        if self.detector == "sud" {
            return "#000000";
        }
        match self.algorithm.as_str() {
            "comon" => "#1f77b4",
            "jade" => "#d62728",
            "fastica" => "#2ca02c",
            _ => "#7f7f7f",
        }
    }

    fn dash(&self) -> Option<&'static str> {
        (self.detector == "sudica").then_some("7 4")
    }
}

/// Series of a table: SUD first, then per algorithm ICA before SUD-ICA.
pub fn series(table: &SerTable) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in &table.rows {
        let idx = match out
            .iter()
            .position(|s| s.algorithm == r.algorithm && s.detector == r.detector)
        {
            Some(i) => i,
            None => {
                out.push(Series {
                    algorithm: r.algorithm.clone(),
                    detector: r.detector.clone(),
                    points: Vec::new(),
                });
                out.len() - 1
            }
        };
        out[idx].points.push((r.snr_db, r.mean_ser));
    }
    let rank = |s: &Series| -> (u8, String, u8) {
        let det = match s.detector.as_str() {
            "sud" => 0,
            "ica" => 1,
            "sudica" => 2,
            _ => 3,
        };
        (u8::from(det != 0), s.algorithm.clone(), det)
    };
    out.sort_by_key(rank);
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

fn x_range(table: &SerTable) -> (f64, f64) {
    let lo = table.rows.iter().map(|r| r.snr_db).fold(f64::INFINITY, f64::min);
    let hi = table.rows.iter().map(|r| r.snr_db).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        (-1.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn marker(out: &mut String, shape: &str, x: f64, y: f64, color: &str, filled: bool) {
    let fill = if filled { color } else { "#ffffff" };
    let style = format!(r#"fill="{fill}" stroke="{color}" stroke-width="1.5""#);
    match shape {
        "circle" => {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" {style}/>"#);
        }
        "square" => {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" {style}/>"#,
                x - 3.5,
                y - 3.5
            );
        }
        "diamond" => {
            let _ = writeln!(
                out,
                r#"<polygon points="{x:.2},{:.2} {:.2},{y:.2} {x:.2},{:.2} {:.2},{y:.2}" {style}/>"#,
                y - 4.5,
                x + 4.5,
                y + 4.5,
                x - 4.5
            );
        }
        _ => {
            // Downward triangle: a clamped point.
            let _ = writeln!(
                out,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {x:.2},{:.2}" {style}/>"#,
                x - 5.0,
                y - 4.0,
                x + 5.0,
                y - 4.0,
                y + 5.0
            );
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render one table. Output bytes depend only on the rows.
pub fn render_svg(table: &SerTable) -> String {
    let (x0, x1) = x_range(table);
    let px = |snr: f64| LEFT + (snr - x0) / (x1 - x0) * (RIGHT - LEFT);
    // y = 1 at TOP, y = 1e-5 at BOTTOM.
    let py = |ser: f64| TOP + (-ser.log10()) / f64::from(DECADES) * (BOTTOM - TOP);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let noise = match table.noise.as_str() {
        "awgn" => "AWGN".to_string(),
        "pink" => "pink noise".to_string(),
        "none" => "noise-free".to_string(),
        other => other.to_string(),
    };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="26" text-anchor="middle" font-size="15">SER vs SNR, {}, M = {}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(&noise),
        table.symbols
    );

    // Decade grid and labels.
    for k in 0..=DECADES {
        let y = py(10f64.powi(-k));
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{RIGHT}" y2="{y:.2}" stroke="#dddddd"/>"##
        );
        let label = if k == 0 { "1".to_string() } else { format!("1e-{k}") };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    // Ticks at every SNR in the table.
    let mut ticks: Vec<f64> = table.rows.iter().map(|r| r.snr_db).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for t in &ticks {
        let x = px(*t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{BOTTOM}" stroke="#eeeeee"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            BOTTOM + 18.0,
            fmt_num(*t)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000"/>"##,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 40.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">symbol error rate</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    let all = series(table);
    for (i, s) in all.iter().enumerate() {
        let color = s.color();
        let shape = match s.detector.as_str() {
            "sud" => "diamond",
            "sudica" => "square",
            _ => "circle",
        };
        let dash = s
            .dash()
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        // Lines over consecutive scored points.
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let mut segments = Vec::new();
        for &(snr, ser) in &s.points {
            match ser {
                Some(v) => segment.push((px(snr), py(v.max(SER_FLOOR)))),
                None => segments.push(std::mem::take(&mut segment)),
            }
        }
        segments.push(segment);
        for seg in segments.iter().filter(|seg| seg.len() >= 2) {
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                pts.join(" ")
            );
        }
        for &(snr, ser) in &s.points {
            if let Some(v) = ser {
                if v < SER_FLOOR {
                    marker(&mut out, "clamped", px(snr), py(SER_FLOOR), color, false);
                } else {
                    marker(&mut out, shape, px(snr), py(v), color, true);
                }
            }
        }

        // Legend entry.
        let ly = TOP + 10.0 + 22.0 * i as f64;
        let lx = RIGHT + 20.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.8"{dash}/>"#,
            lx + 28.0
        );
        marker(&mut out, shape, lx + 14.0, ly, color, true);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 36.0,
            ly + 4.0,
            escape(&s.label())
        );
    }
    let note_y = TOP + 10.0 + 22.0 * all.len() as f64;
    marker(&mut out, "clamped", RIGHT + 34.0, note_y, "#000000", false);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">below 1e-5</text>"#,
        RIGHT + 56.0,
        note_y + 4.0
    );
    out.push_str("</svg>\n");
    out
}

pub fn render_tables(tables: &[SerTable], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.svg", t.file_stem()));
        fs::write(&path, render_svg(t))
            .map_err(|e| io::Error::other(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

pub fn render_plot(report: &SerReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    render_tables(&tables(report), dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::CsvRow;

    fn row(snr: f64, alg: &str, det: &str, ser: Option<f64>) -> CsvRow {
        CsvRow {
            snr_db: snr,
            algorithm: alg.into(),
            detector: det.into(),
            mean_ser: ser,
            stderr: None,
            failed_runs: 0,
            mean_iterations: None,
        }
    }

    fn full_table() -> SerTable {
        let mut rows = Vec::new();
        for snr in [-10.0, -5.0, 0.0] {
            rows.push(row(snr, "none", "sud", Some(0.05)));
            for alg in ["comon", "jade", "fastica"] {
                rows.push(row(snr, alg, "ica", Some(0.04)));
                rows.push(row(snr, alg, "sudica", Some(0.03)));
            }
        }
        SerTable {
            noise: "awgn".into(),
            symbols: 5000,
            rows,
        }
    }

    #[test]
    fn seven_series_with_sud_first() {
        let s = series(&full_table());
        assert_eq!(s.len(), 7);
        assert_eq!(s[0].label(), "SUD");
        assert_eq!(s[1].label(), "ICA (Comon)");
        assert_eq!(s[2].label(), "SUD-ICA (Comon)");
        assert!(s.iter().all(|x| x.points.len() == 3));
        let svg = render_svg(&full_table());
        assert_eq!(svg.matches("<polyline").count(), 7);
        assert_eq!(svg, render_svg(&full_table()));
    }

    #[test]
    fn zero_error_point_is_clamped_and_marked() {
        let mut t = full_table();
        t.rows[0].mean_ser = Some(0.0);
        let svg = render_svg(&t);
        // One clamped marker in the plot plus the legend note.
        let hollow = svg.matches(r##"fill="#ffffff" stroke="#000000""##).count();
        assert_eq!(hollow, 2);
        let floor_y = format!("{:.2}", BOTTOM);
        assert!(svg.contains(&floor_y));
    }

    #[test]
    fn single_point_series_has_marker_without_line() {
        let t = SerTable {
            noise: "pink".into(),
            symbols: 2000,
            rows: vec![row(-5.0, "jade", "ica", Some(0.01))],
        };
        let svg = render_svg(&t);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn unscored_points_break_the_line() {
        let mut t = full_table();
        for r in &mut t.rows {
            if r.algorithm == "jade" && r.detector == "ica" && r.snr_db == -5.0 {
                r.mean_ser = None;
            }
        }
        let svg = render_svg(&t);
        assert_eq!(svg.matches("<polyline").count(), 6);
    }
}
