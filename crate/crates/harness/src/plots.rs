//! Scatter CSVs and standalone SVG renderings of preferences and final fronts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use psl_eps::indicators::cached_reference_set;
use psl_eps::Benchmark;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::run::RunRecord;

const SIZE: f64 = 420.0;
const MARGIN: f64 = 40.0;
const MAX_REFERENCE_MARKS: usize = 2000;

/// What a plot needs from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotInput {
    pub label: String,
    pub problem: Benchmark,
    /// `None` when the run did not log preferences.
    pub preferences: Option<Vec<Vec<f64>>>,
    pub final_front: Vec<Vec<f64>>,
}

impl PlotInput {
    pub fn from_record(r: &RunRecord) -> Self {
        let label = r
            .dir
            .as_ref()
            .and_then(|d| d.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| r.config.dir_name());
        Self {
            label,
            problem: r.config.problem,
            preferences: (!r.preferences.is_empty()).then(|| r.preferences.iter().map(|e| e.weights.clone()).collect()),
            final_front: r.final_front.iter().map(|f| f.to_vec()).collect(),
        }
    }

    /// Reads a run directory written by [`crate::run::run_single`].
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| fs::read_to_string(dir.join(name));
        let mut config = RunConfig::default();
        let text = read("config.txt")
            .map_err(|e| HarnessError::Config(format!("{}: no config.txt ({e})", dir.display())))?;
        config.apply_text(&text)?;
        let preferences = match read("preferences.csv") {
            Ok(text) => Some(parse_rows(&text, 2)?),
            Err(_) => None,
        };
        let final_front = match read("final_front.csv") {
            Ok(text) => parse_rows(&text, 0)?,
            Err(_) => Vec::new(),
        };
        Ok(Self {
            label: dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| config.dir_name()),
            problem: config.problem,
            preferences,
            final_front,
        })
    }
}

fn parse_rows(text: &str, skip_cols: usize) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .skip(skip_cols)
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| HarnessError::Config(format!("bad number `{v}`")))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Default, Clone)]
pub struct PlotSummary {
    pub written: Vec<PathBuf>,
    pub notices: Vec<String>,
}

/// Writes preference and front plots for every input into `out`.
///
/// Inputs without a preference log get a notice instead of a preference plot.
/// No inputs means no files.
pub fn emit_plots(inputs: &[PlotInput], out: &Path) -> Result<PlotSummary> {
    let mut summary = PlotSummary::default();
    if inputs.is_empty() {
        return Ok(summary);
    }
    fs::create_dir_all(out)?;
    for input in inputs {
        let m = input.problem.dims().0;
        match &input.preferences {
            Some(prefs) if !prefs.is_empty() => {
                let csv = out.join(format!("{}_preferences.csv", input.label));
                fs::write(&csv, points_csv("l", prefs, None))?;
                let svg = out.join(format!("{}_preferences.svg", input.label));
                fs::write(&svg, preference_svg(prefs, m, &input.label))?;
                summary.written.extend([csv, svg]);
            }
            _ => summary
                .notices
                .push(format!("{}: no preference log, preference plot skipped", input.label)),
        }
        if input.final_front.is_empty() {
            summary
                .notices
                .push(format!("{}: no final front, front plot skipped", input.label));
            continue;
        }
        let reference = cached_reference_set(input.problem)?;
        let stride = reference.front.points.len().div_ceil(MAX_REFERENCE_MARKS).max(1);
        let ref_pts: Vec<Vec<f64>> = reference.front.points.iter().step_by(stride).map(|p| p.to_vec()).collect();
        let csv = out.join(format!("{}_front.csv", input.label));
        let mut text = points_csv("f", &input.final_front, Some("model"));
        for line in points_csv("f", &ref_pts, Some("reference")).lines().skip(1) {
            text.push_str(line);
            text.push('\n');
        }
        fs::write(&csv, text)?;
        let svg = out.join(format!("{}_front.svg", input.label));
        fs::write(&svg, front_svg(&input.final_front, &ref_pts, &input.label))?;
        summary.written.extend([csv, svg]);
    }
    Ok(summary)
}

fn points_csv(prefix: &str, points: &[Vec<f64>], tag: Option<&str>) -> String {
    let m = points.first().map_or(0, |p| p.len());
    let mut cols: Vec<String> = Vec::new();
    if tag.is_some() {
        cols.push("set".into());
    }
    cols.extend((1..=m).map(|k| format!("{prefix}{k}")));
    let mut out = cols.join(",");
    out.push('\n');
    for p in points {
        if let Some(t) = tag {
            let _ = write!(out, "{t},");
        }
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let full = SIZE + 2.0 * MARGIN;
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
            MARGIN * 0.6,
            escape(title)
        );
        Self { body }
    }

    /// `(u, v)` in the unit square, `v` pointing up.
    fn dot(&mut self, u: f64, v: f64, r: f64, color: &str) {
        let x = MARGIN + u * SIZE;
        let y = MARGIN + (1.0 - v) * SIZE;
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}" fill-opacity="0.6"/>"#);
    }

    fn polyline(&mut self, pts: &[(f64, f64)]) {
        let coords: Vec<String> = pts
            .iter()
            .map(|(u, v)| format!("{:.2},{:.2}", MARGIN + u * SIZE, MARGIN + (1.0 - v) * SIZE))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
            coords.join(" ")
        );
    }

    fn label(&mut self, u: f64, v: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            MARGIN + u * SIZE,
            MARGIN + (1.0 - v) * SIZE,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const SIN60: f64 = 0.866_025_403_784_438_6;

/// Barycentric position in an equilateral triangle with l1 at bottom left,
/// l2 at bottom right and l3 on top.
pub fn ternary(w: &[f64]) -> (f64, f64) {
    (w[1] + 0.5 * w[2], w[2] * SIN60)
}

fn preference_svg(prefs: &[Vec<f64>], m: usize, title: &str) -> String {
    let mut svg = Svg::new(&format!("{title}: sampled preferences"));
    if m == 3 {
        svg.polyline(&[(0.0, 0.0), (1.0, 0.0), (0.5, SIN60), (0.0, 0.0)]);
        svg.label(-0.06, -0.04, "l1");
        svg.label(1.01, -0.04, "l2");
        svg.label(0.48, SIN60 + 0.03, "l3");
        for w in prefs {
            let (u, v) = ternary(w);
            svg.dot(u, v, 1.5, "steelblue");
        }
    } else {
        svg.polyline(&[(0.0, 1.0), (0.0, 0.0), (1.0, 0.0)]);
        svg.polyline(&[(0.0, 1.0), (1.0, 0.0)]);
        svg.label(0.95, -0.05, "l1");
        svg.label(-0.06, 0.98, "l2");
        for w in prefs {
            svg.dot(w[0], w[1], 1.5, "steelblue");
        }
    }
    svg.finish()
}

fn front_svg(model: &[Vec<f64>], reference: &[Vec<f64>], title: &str) -> String {
    let m = reference.first().or(model.first()).map_or(2, |p| p.len());
    let all = || reference.iter().chain(model);
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for p in all() {
        for k in 0..m {
            if p[k].is_finite() {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    let unit = |p: &[f64], k: usize| {
        let span = hi[k] - lo[k];
        if span > 0.0 {
            (p[k] - lo[k]) / span
        } else {
            0.5
        }
    };
    // 3D fronts use an isometric view of the normalized objectives
    let place = |p: &[f64]| -> (f64, f64) {
        if m == 3 {
            let (a, b, c) = (unit(p, 0), unit(p, 1), unit(p, 2));
            (0.5 + 0.5 * (a - b) * SIN60, 0.5 + 0.5 * c - 0.25 * (a + b))
        } else {
            (unit(p, 0), unit(p, 1))
        }
    };
    let mut svg = Svg::new(&format!("{title}: final front (red) vs reference (grey)"));
    if m == 2 {
        svg.polyline(&[(0.0, 1.0), (0.0, 0.0), (1.0, 0.0)]);
        svg.label(0.95, -0.05, "f1");
        svg.label(-0.06, 0.98, "f2");
    }
    for p in reference {
        let (u, v) = place(p);
        svg.dot(u, v, 1.0, "grey");
    }
    for p in model {
        if p.iter().all(|v| v.is_finite()) {
            let (u, v) = place(p);
            svg.dot(u, v, 2.5, "crimson");
        }
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ternary_corners() {
        assert_eq!(ternary(&[1.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(ternary(&[0.0, 1.0, 0.0]), (1.0, 0.0));
        assert_eq!(ternary(&[0.0, 0.0, 1.0]), (0.5, SIN60));
    }

    #[test]
    fn empty_input_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("plots");
        let s = emit_plots(&[], &out).unwrap();
        assert!(s.written.is_empty());
        assert!(!out.exists());
    }

    #[test]
    fn missing_log_is_skipped_with_notice() {
        let dir = tempfile::tempdir().unwrap();
        let input = PlotInput {
            label: "a".into(),
            problem: Benchmark::Zdt3,
            preferences: None,
            final_front: vec![vec![0.0, 1.0], vec![0.5, 0.2]],
        };
        let s = emit_plots(&[input], dir.path()).unwrap();
        assert_eq!(s.notices.len(), 1);
        assert_eq!(s.written.len(), 2);
        let svg = fs::read_to_string(dir.path().join("a_front.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("crimson").count(), 2);
    }

    #[test]
    fn preference_plot_has_one_mark_per_sample() {
        let dir = tempfile::tempdir().unwrap();
        let prefs = vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]];
        let input = PlotInput {
            label: "b".into(),
            problem: Benchmark::Dtlz7,
            preferences: Some(prefs.clone()),
            final_front: Vec::new(),
        };
        let s = emit_plots(&[input], dir.path()).unwrap();
        assert_eq!(s.written.len(), 2);
        let svg = fs::read_to_string(dir.path().join("b_preferences.svg")).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        let csv = fs::read_to_string(dir.path().join("b_preferences.csv")).unwrap();
        assert_eq!(parse_rows(&csv, 0).unwrap(), prefs);
    }
}
