//! CSV, summary and image output for an experiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::experiment::{Mode, RunImages, RunRecord};

pub const CSV_HEADER: [&str; 12] = [
    "problem",
    "level",
    "seed",
    "mode",
    "p1",
    "p2",
    "q1",
    "q2",
    "k",
    "rel_error",
    "residual_final",
    "wall_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One CSV row in header order.
pub fn csv_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.problem.clone(),
        r.level.to_string(),
        r.seed.to_string(),
        r.mode.to_string(),
        opt(r.p.map(|p| p.0)),
        opt(r.p.map(|p| p.1)),
        opt(r.q.map(|q| q.0)),
        opt(r.q.map(|q| q.1)),
        r.k.to_string(),
        opt(r.rel_error),
        r.residual_final.to_string(),
        format!("{:.3}", r.wall.as_secs_f64() * 1e3),
    ]
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Noise level as a percentage, e.g. `0.001 -> "0.1%"`.
pub fn percent(level: f64) -> String {
    let s = format!("{:.6}", level * 100.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}%")
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// Aggregates over seeds for one `(level, mode)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub level: f64,
    pub mode: Mode,
    pub runs: usize,
    pub median_p: Option<(f64, f64)>,
    pub median_k: f64,
    pub median_rel_error: Option<f64>,
    pub not_converged: usize,
}

pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(u64, Mode), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.level.to_bits(), r.mode)).or_default().push(r);
    }
    let mut rows: Vec<SummaryRow> = cells
        .into_values()
        .map(|rs| {
            let mut k: Vec<f64> = rs.iter().map(|r| r.k as f64).collect();
            let mut e: Vec<f64> = rs.iter().filter_map(|r| r.rel_error).collect();
            let mut p1: Vec<f64> = rs.iter().filter_map(|r| r.p.map(|p| p.0 as f64)).collect();
            let mut p2: Vec<f64> = rs.iter().filter_map(|r| r.p.map(|p| p.1 as f64)).collect();
            SummaryRow {
                level: rs[0].level,
                mode: rs[0].mode,
                runs: rs.len(),
                median_p: median(&mut p1).zip(median(&mut p2)),
                median_k: median(&mut k).expect("nonempty cell"),
                median_rel_error: median(&mut e),
                not_converged: rs.iter().filter(|r| !r.converged()).count(),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.level.total_cmp(&b.level).then(a.mode.cmp(&b.mode)));
    rows
}

fn fmt_p(p: Option<(f64, f64)>, one_d: bool) -> String {
    match p {
        None => "-".into(),
        Some((p1, _)) if one_d => format!("{p1}"),
        Some((p1, p2)) => format!("{p1}x{p2}"),
    }
}

/// Plain-text summary: one line per `(level, mode)` plus the list of runs
/// that stopped without meeting the discrepancy principle.
pub fn summary_text(problem: &str, records: &[RunRecord]) -> String {
    let one_d = records.iter().all(|r| r.p.is_none_or(|p| p.1 == 1));
    let mut s = String::new();
    writeln!(s, "problem: {problem}").unwrap();
    writeln!(s, "level\tmode\truns\tmedian_p\tmedian_k\tmedian_rel_error\tnot_converged").unwrap();
    for row in summarize(records) {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            percent(row.level),
            row.mode,
            row.runs,
            fmt_p(row.median_p, one_d),
            row.median_k,
            row.median_rel_error.map_or("-".into(), |e| format!("{e:.4e}")),
            row.not_converged
        )
        .unwrap();
    }
    let flagged: Vec<&RunRecord> = records.iter().filter(|r| !r.converged()).collect();
    if !flagged.is_empty() {
        writeln!(s, "NOT CONVERGED:").unwrap();
        for r in flagged {
            writeln!(
                s,
                "  {} ({:?} after {} steps, residual {:e})",
                r.tag(),
                r.termination,
                r.k,
                r.residual_final
            )
            .unwrap();
        }
    }
    s
}

/// Table in the layout of the published results: one row per noise level,
/// and per mode the truncation index (a hyphen without preconditioner), the
/// number of steps and the relative error, all medians over seeds.
pub fn pretty_table(records: &[RunRecord]) -> String {
    let one_d = records.iter().all(|r| r.p.is_none_or(|p| p.1 == 1));
    let rows = summarize(records);
    let mut s = String::new();
    writeln!(
        s,
        "{:>10} | {:>10} | {:>9} | {:>7} | {:>10}",
        "noise", "mode", "p", "k", "rel. error"
    )
    .unwrap();
    writeln!(s, "{}", "-".repeat(58)).unwrap();
    for row in rows {
        writeln!(
            s,
            "{:>10} | {:>10} | {:>9} | {:>7} | {:>10}",
            percent(row.level),
            row.mode.to_string(),
            fmt_p(row.median_p, one_d),
            row.median_k,
            row.median_rel_error.map_or("-".into(), |e| format!("{e:.4}"))
        )
        .unwrap();
    }
    s
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub images: Vec<PathBuf>,
}

pub fn write_outputs(
    dir: &Path,
    problem: &str,
    runs: &[(RunRecord, Option<RunImages>)],
) -> Result<Written> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let records: Vec<RunRecord> = runs.iter().map(|(r, _)| r.clone()).collect();
    let csv = dir.join("results.csv");
    write_csv(&csv, &records)?;
    let summary = dir.join("summary.txt");
    fs::write(&summary, summary_text(problem, &records))
        .with_context(|| format!("writing {}", summary.display()))?;
    let mut images = Vec::new();
    for (r, img) in runs {
        if let Some(img) = img {
            let tag = r.tag();
            let noisy = dir.join(format!("noisy_{tag}.pgm"));
            let restored = dir.join(format!("restored_{tag}.pgm"));
            img.noisy.write_pgm(&noisy)?;
            img.restored.write_pgm(&restored)?;
            images.push(noisy);
            images.push(restored);
        }
    }
    Ok(Written {
        csv,
        summary,
        images,
    })
}
