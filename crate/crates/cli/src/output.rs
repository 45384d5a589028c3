//! Result persistence: JSON-lines records, summary JSON, CSV tables and SVG plots.
//!
//! Every writer has a matching reader. The JSON-lines file holds one
//! [`PointRecord`] per grid point (schema `gradperc.record/1`); the summary
//! holds the whole [`ResultRecord`] (schema `gradperc.result/1`). Field
//! names follow the Rust types and are stable within a schema version.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::experiment::{ExperimentSpec, PointRecord, PointResult, ResultRecord, RECORD_SCHEMA, RESULT_SCHEMA};

/// Paths written for `--out base.jsonl`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub table: PathBuf,
}

impl OutputPaths {
    pub fn from_base(path: &Path) -> Self {
        let stem = path.with_extension("");
        let sibling = |suffix: &str| {
            let mut s = stem.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self { records: sibling(".jsonl"), summary: sibling(".summary.json"), table: sibling(".csv") }
    }
}

pub fn write_records(record: &ResultRecord, path: &Path) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for line in record.point_records() {
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> anyhow::Result<Vec<PointRecord>> {
    let input = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PointRecord = serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), k + 1))?;
        if rec.schema != RECORD_SCHEMA {
            bail!("{}:{}: unsupported schema {:?}", path.display(), k + 1, rec.schema);
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_summary(record: &ResultRecord, path: &Path) -> anyhow::Result<()> {
    let out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(out, record)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> anyhow::Result<ResultRecord> {
    let input = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let rec: ResultRecord = serde_json::from_reader(input).with_context(|| format!("parsing {}", path.display()))?;
    if rec.schema != RESULT_SCHEMA {
        bail!("{}: unsupported schema {:?}", path.display(), rec.schema);
    }
    Ok(rec)
}

/// JSON view of a record without the fields allowed to differ between
/// reruns (wall clock, worker count, output path).
pub fn numeric_view(record: &ResultRecord) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(record)?;
    if let Value::Object(map) = &mut v {
        map.remove("wall_clock_seconds");
        if let Some(Value::Object(spec)) = map.get_mut("spec") {
            spec.remove("workers");
            spec.remove("output");
        }
    }
    Ok(v)
}

/// Header row plus numeric rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> anyhow::Result<Self> {
        let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().with_context(|| format!("non-numeric cell {f:?}")))
                .collect::<anyhow::Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Flattens a record's points into a table; strips expand to one row each.
pub fn record_table(record: &ResultRecord) -> Table {
    let mut table: Option<Table> = None;
    let mut push = |cols: &[&str], row: Vec<f64>| {
        table.get_or_insert_with(|| Table::new(cols)).push(row);
    };
    for point in &record.points {
        match point {
            PointResult::Crossing { n, p, estimate, duality_violations } => push(
                &["n", "p", "mean", "stderr", "trials", "duality_violations"],
                vec![*n as f64, *p, estimate.mean, estimate.stderr, estimate.trials as f64, *duality_violations as f64],
            ),
            PointResult::Charlen { p, length } => {
                push(&["p", "length", "probes"], vec![*p, opt(length.length().map(f64::from)), length.probes.len() as f64])
            }
            PointResult::Sigma { half_height, sigma, length_at_sigma, consistency } => push(
                &["N", "sigma", "degenerate", "length_at_sigma", "consistency"],
                vec![
                    *half_height as f64,
                    sigma.sigma as f64,
                    flag(sigma.degenerate),
                    opt(length_at_sigma.as_ref().and_then(|l| l.length()).map(f64::from)),
                    opt(*consistency),
                ],
            ),
            PointResult::Arms { arms, n1, n2, p, estimate } => push(
                &["j", "n1", "n2", "p", "mean", "stderr", "trials"],
                vec![*arms as f64, *n1 as f64, *n2 as f64, *p, estimate.mean, estimate.stderr, estimate.trials as f64],
            ),
            PointResult::Quasimult { p, result } => push(
                &["j", "n1", "n2", "p", "inner", "outer", "whole", "ratio"],
                vec![
                    result.arms as f64,
                    result.n1 as f64,
                    result.n2 as f64,
                    *p,
                    result.inner.mean,
                    result.outer.mean,
                    result.whole.mean,
                    opt(result.ratio),
                ],
            ),
            PointResult::Relation { relation } => push(
                &["p", "length", "pi4", "product"],
                vec![
                    relation.p,
                    opt(relation.length.length().map(f64::from)),
                    opt(relation.pi4.map(|e| e.mean)),
                    opt(relation.product),
                ],
            ),
            PointResult::Front { half_height, sigma, strips, .. } => {
                for (k, s) in strips.iter().enumerate() {
                    let st = s.stats;
                    push(
                        &[
                            "N", "sigma", "strip", "verified", "edges", "edges_in_window", "max_abs_y", "max_backtrack",
                            "boundary_black", "boundary_white",
                        ],
                        vec![
                            *half_height as f64,
                            *sigma as f64,
                            k as f64,
                            flag(s.verified && s.chirality),
                            s.edges as f64,
                            opt(st.map(|x| x.edge_count_in_window as f64)),
                            opt(st.map(|x| x.max_abs_y)),
                            opt(st.map(|x| x.max_backtrack)),
                            opt(st.map(|x| x.boundary_black as f64)),
                            opt(st.map(|x| x.boundary_white as f64)),
                        ],
                    );
                }
            }
            PointResult::Length { half_height, sigma, edges, pi2, ratio, .. } => push(
                &["N", "sigma", "t", "mean_edges", "stderr", "pi2", "ratio"],
                vec![
                    *half_height as f64,
                    *sigma as f64,
                    crate::experiment::LENGTH_WINDOW_T as f64,
                    edges.mean,
                    edges.stderr,
                    pi2.mean,
                    opt(*ratio),
                ],
            ),
            PointResult::Asymmetry { half_height, sigma, full, lower, full_z, lower_z, .. } => push(
                &["N", "sigma", "strips", "full_mean", "full_stderr", "full_z", "lower_mean", "lower_stderr", "lower_z"],
                vec![
                    *half_height as f64,
                    *sigma as f64,
                    full.trials as f64,
                    full.mean,
                    full.stderr,
                    opt(*full_z),
                    lower.mean,
                    lower.stderr,
                    opt(*lower_z),
                ],
            ),
        }
    }
    table.unwrap_or_else(|| Table::new(&[]))
}

/// Data of a log-log plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// `(slope, ln prefactor)` of a fitted line, if any.
    pub fit: Option<(f64, f64)>,
}

const DATA_TAG: &str = "gradperc-data:";
const PROVENANCE_TAG: &str = "gradperc-provenance:";

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Comment-safe JSON (`--` cannot appear inside XML comments).
fn comment_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string(v)?.replace("--", "-\\u002d"))
}

/// Renders a static SVG 1.1 log-log plot. The plotted data and the spec that
/// produced it are embedded as JSON comments for [`read_svg`].
pub fn render_svg(plot: &Plot, spec: &ExperimentSpec) -> anyhow::Result<String> {
    let (w, h, m) = (640.0, 480.0, 60.0);
    let pts: Vec<(f64, f64)> = plot.points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#)?;
    writeln!(svg, "<!-- {PROVENANCE_TAG} {} -->", comment_json(spec)?)?;
    writeln!(svg, "<!-- {DATA_TAG} {} -->", comment_json(plot)?)?;
    writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#)?;
    writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, w / 2.0, xml_escape(&plot.title))?;
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#, w / 2.0, h - 12.0, xml_escape(&plot.x_label))?;
    writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        xml_escape(&plot.y_label)
    )?;
    writeln!(svg, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m)?;
    if !pts.is_empty() {
        let lx: Vec<f64> = pts.iter().map(|p| p.0.log10()).collect();
        let ly: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = ((hi - lo) * 0.08).max(0.05);
            (lo - pad, hi + pad)
        };
        let ((x0, x1), (y0, y1)) = (range(&lx), range(&ly));
        let sx = |v: f64| m + (v - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |v: f64| h - m - (v - y0) / (y1 - y0) * (h - 2.0 * m);
        for (a, b) in lx.iter().zip(&ly) {
            writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(*a), sy(*b))?;
        }
        if let Some((slope, ln_a)) = plot.fit {
            let line = |lxv: f64| (ln_a / std::f64::consts::LN_10) + slope * lxv;
            writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
                sx(x0),
                sy(line(x0)),
                sx(x1),
                sy(line(x1))
            )?;
            writeln!(svg, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" fill="firebrick">slope {slope:.3}</text>"#, m + 8.0, m + 18.0)?;
        }
        for (v, label) in [(x0, x0), (x1, x1)] {
            writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{:.3}</text>"#, sx(v), h - m + 16.0, 10f64.powf(label))?;
        }
        for (v, label) in [(y0, y0), (y1, y1)] {
            writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{:.3}</text>"#, m - 4.0, sy(v), 10f64.powf(label))?;
        }
    }
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

pub fn write_svg(plot: &Plot, spec: &ExperimentSpec, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, render_svg(plot, spec)?).with_context(|| format!("writing {}", path.display()))
}

/// Recovers the embedded plot data and provenance from an SVG written by [`write_svg`].
pub fn read_svg(path: &Path) -> anyhow::Result<(Plot, ExperimentSpec)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let grab = |tag: &str| -> anyhow::Result<&str> {
        let start = text.find(tag).with_context(|| format!("{}: no {tag} comment", path.display()))? + tag.len();
        let end = text[start..].find("-->").context("unterminated comment")? + start;
        Ok(text[start..end].trim())
    };
    let plot: Plot = serde_json::from_str(grab(DATA_TAG)?)?;
    let spec: ExperimentSpec = serde_json::from_str(grab(PROVENANCE_TAG)?)?;
    Ok((plot, spec))
}

/// Plot of a fit-producing record, if it has data.
pub fn record_plot(record: &ResultRecord) -> Option<Plot> {
    use crate::experiment::ExperimentKind::*;
    let (x_label, y_label) = match record.spec.kind {
        NuFit | Charlen => ("|p - 1/2|", "L_eps(p)"),
        SigmaFit | Sigma => ("N", "sigma_N"),
        ArmFit | Arms => ("n", "pi_j(n1, n)"),
        LengthFit => ("sigma", "front edges per window"),
        _ => return None,
    };
    let points = record.fit_data();
    if points.is_empty() {
        return None;
    }
    Some(Plot {
        title: format!("{} (seed {})", record.spec.kind.name(), record.spec.master_seed),
        x_label: x_label.into(),
        y_label: y_label.into(),
        points,
        fit: record.fit.map(|f| (f.slope, f.intercept)),
    })
}
