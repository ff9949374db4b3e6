//! File emission: CSV writers with a fixed column set and order, a summary
//! reader for post-processing, and the equilibrium JSON report.
//!
//! All floating-point values are printed with 6 significant digits so reruns
//! diff cleanly; trailing zeros are trimmed. Writers emit `\n` line endings
//! and never reorder rows, so identical inputs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sweep::{
    MultiFirmRow, NashReport, RawRow, ResultRow, SnapshotRow, SweepOutput, TrajectoryRow,
};

/// Columns of `summary.csv`, in order.
pub const SUMMARY_COLUMNS: [&str; 17] = [
    "family",
    "instance",
    "K",
    "T",
    "T0",
    "X",
    "variant",
    "rule",
    "epsilon",
    "alg_row",
    "alg_col",
    "N",
    "mean_share_row",
    "ci95",
    "variance",
    "eeog_mean",
    "eeog_median",
];

/// Columns of the trajectory CSVs (`trajectories.csv`, `relative.csv`).
pub const TRAJECTORY_COLUMNS: [&str; 6] = ["family", "instance", "alg", "t", "value", "ci95"];

/// Formats a float with 6 significant digits, trimming trailing zeros.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).clamp(0, 17) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(csv::Writer::from_path(path)?)
}

/// Writes the flat cell-summary table.
pub fn write_summary_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.family.as_str(),
            r.instance.as_str(),
            &r.k.to_string(),
            &r.t.to_string(),
            &r.t0.to_string(),
            &opt_usize(r.x),
            r.variant.as_deref().unwrap_or(""),
            r.rule.as_str(),
            &opt_f64(r.epsilon),
            r.alg_row.as_str(),
            r.alg_col.as_deref().unwrap_or(""),
            &r.n.to_string(),
            &fmt_sig6(r.mean_share_row),
            &fmt_sig6(r.ci95),
            &fmt_sig6(r.variance),
            &fmt_sig6(r.eeog_mean),
            &fmt_sig6(r.eeog_median),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a summary CSV back into rows (used by equilibrium post-processing).
pub fn read_summary_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(SUMMARY_COLUMNS) {
        return Err(Error::InvalidArgument(format!(
            "{} does not have the summary column layout",
            path.display()
        )));
    }
    let parse_usize = |field: &str, name: &str| {
        field.parse::<usize>().map_err(|_| {
            Error::InvalidArgument(format!("bad integer '{field}' in column {name}"))
        })
    };
    let parse_f64 = |field: &str, name: &str| {
        field
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad number '{field}' in column {name}")))
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        rows.push(ResultRow {
            family: field(0).to_string(),
            instance: field(1).to_string(),
            k: parse_usize(field(2), "K")?,
            t: parse_usize(field(3), "T")?,
            t0: parse_usize(field(4), "T0")?,
            x: if field(5).is_empty() { None } else { Some(parse_usize(field(5), "X")?) },
            variant: if field(6).is_empty() { None } else { Some(field(6).to_string()) },
            rule: field(7).to_string(),
            epsilon: if field(8).is_empty() { None } else { Some(parse_f64(field(8), "epsilon")?) },
            alg_row: field(9).to_string(),
            alg_col: if field(10).is_empty() { None } else { Some(field(10).to_string()) },
            n: parse_usize(field(11), "N")?,
            mean_share_row: parse_f64(field(12), "mean_share_row")?,
            ci95: parse_f64(field(13), "ci95")?,
            variance: parse_f64(field(14), "variance")?,
            eeog_mean: parse_f64(field(15), "eeog_mean")?,
            eeog_median: parse_f64(field(16), "eeog_median")?,
        });
    }
    Ok(rows)
}

fn write_trajectory_rows(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRAJECTORY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.family.as_str(),
            r.instance.as_str(),
            r.alg.as_str(),
            &r.t.to_string(),
            &fmt_sig6(r.value),
            &fmt_sig6(r.ci95),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes mean-reputation trajectories.
pub fn write_trajectories_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    write_trajectory_rows(path, rows)
}

/// Writes relative-reputation trajectories (pair labels in the alg column).
pub fn write_relative_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    write_trajectory_rows(path, rows)
}

/// Writes distribution snapshots (one bin per line).
pub fn write_snapshots_csv(path: &Path, rows: &[SnapshotRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["family", "instance", "alg", "t", "bin_lo", "bin_hi", "count"])?;
    for r in rows {
        w.write_record([
            r.family.as_str(),
            r.instance.as_str(),
            r.alg.as_str(),
            &r.t.to_string(),
            &fmt_sig6(r.bin_lo),
            &fmt_sig6(r.bin_hi),
            &r.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes welfare and effective-end-of-game versus firm count.
pub fn write_multi_firm_csv(path: &Path, rows: &[MultiFirmRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "family",
        "instance",
        "firms",
        "N",
        "welfare_mean",
        "welfare_ci95",
        "regret_mean",
        "regret_ci95",
        "eeog_mean",
        "eeog_ci95",
        "eeog_median",
    ])?;
    for r in rows {
        w.write_record([
            r.family.as_str(),
            r.instance.as_str(),
            &r.firms.to_string(),
            &r.n.to_string(),
            &fmt_sig6(r.welfare_mean),
            &fmt_sig6(r.welfare_ci95),
            &fmt_sig6(r.regret_mean),
            &fmt_sig6(r.regret_ci95),
            &fmt_sig6(r.eeog_mean),
            &fmt_sig6(r.eeog_ci95),
            &fmt_sig6(r.eeog_median),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one line per simulation.
pub fn write_raw_csv(path: &Path, rows: &[RawRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "family", "instance", "T", "T0", "X", "variant", "rule", "epsilon", "alg_row", "alg_col",
        "sim", "value", "eeog",
    ])?;
    for r in rows {
        w.write_record([
            r.family.as_str(),
            r.instance.as_str(),
            &r.t.to_string(),
            &r.t0.to_string(),
            &opt_usize(r.x),
            r.variant.as_deref().unwrap_or(""),
            r.rule.as_str(),
            &opt_f64(r.epsilon),
            r.alg_row.as_str(),
            r.alg_col.as_deref().unwrap_or(""),
            &r.sim.to_string(),
            &fmt_sig6(r.value),
            &r.eeog.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one wide 3x3 entrant-share matrix per (instance, X, variant) group
/// of temporary-monopoly or advantage rows: incumbent algorithms across the
/// columns, entrant algorithms down the rows.
pub fn write_entrant_matrices(dir: &Path, rows: &[ResultRow]) -> Result<Vec<PathBuf>> {
    let mut groups: Vec<(String, String, usize, Option<String>)> = Vec::new();
    for r in rows {
        if r.family != "temp_monopoly" && r.family != "advantage" {
            continue;
        }
        let key = (r.family.clone(), r.instance.clone(), r.x.unwrap_or(0), r.variant.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let algs = ["TS", "DEG", "DG"];
    let mut written = Vec::new();
    for (family, instance, x, variant) in groups {
        let suffix = match variant.as_deref() {
            None | Some("full") => String::new(),
            Some(v) => format!("_{v}"),
        };
        let path = dir.join(format!("entrant_share_{instance}_X{x}{suffix}.csv"));
        let mut w = writer(&path)?;
        w.write_record([
            "entrant", "TS_mean", "TS_ci95", "DEG_mean", "DEG_ci95", "DG_mean", "DG_ci95",
        ])?;
        for entrant in algs {
            let mut record = vec![entrant.to_string()];
            for incumbent in algs {
                let cell = rows.iter().find(|r| {
                    r.family == family
                        && r.instance == instance
                        && r.x == Some(x)
                        && r.variant == variant
                        && r.alg_row == entrant
                        && r.alg_col.as_deref() == Some(incumbent)
                });
                match cell {
                    Some(r) => {
                        record.push(fmt_sig6(r.mean_share_row));
                        record.push(fmt_sig6(r.ci95));
                    }
                    None => {
                        record.push(String::new());
                        record.push(String::new());
                    }
                }
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// Writes per-instance share/variance tables for the randomized-choice
/// family: one line per (T, rule, matchup).
pub fn write_hmr_tables(dir: &Path, rows: &[ResultRow]) -> Result<Vec<PathBuf>> {
    let mut instances: Vec<String> = Vec::new();
    for r in rows {
        if r.family == "hmr" && !instances.contains(&r.instance) {
            instances.push(r.instance.clone());
        }
    }
    let mut written = Vec::new();
    for instance in instances {
        let path = dir.join(format!("hmr_{instance}.csv"));
        let mut w = writer(&path)?;
        w.write_record([
            "T", "rule", "epsilon", "alg_row", "alg_col", "mean_share_row", "ci95", "variance",
        ])?;
        for r in rows.iter().filter(|r| r.family == "hmr" && r.instance == instance) {
            w.write_record([
                r.t.to_string().as_str(),
                r.rule.as_str(),
                &opt_f64(r.epsilon),
                r.alg_row.as_str(),
                r.alg_col.as_deref().unwrap_or(""),
                &fmt_sig6(r.mean_share_row),
                &fmt_sig6(r.ci95),
                &fmt_sig6(r.variance),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

fn round_sig6(x: f64) -> f64 {
    fmt_sig6(x).parse().unwrap_or(x)
}

/// Writes equilibrium reports as JSON.
pub fn write_nash_json(path: &Path, reports: &[NashReport]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let value = serde_json::Value::Array(
        reports
            .iter()
            .map(|r| {
                serde_json::json!({
                    "family": r.family,
                    "instance": r.instance,
                    "T": r.t,
                    "T0": r.t0,
                    "rule": r.rule,
                    "epsilon": r.epsilon.map(round_sig6),
                    "strategies": r.strategies,
                    "share_matrix": r.matrix.iter()
                        .map(|row| row.iter().map(|&v| round_sig6(v)).collect::<Vec<f64>>())
                        .collect::<Vec<_>>(),
                    "pure_equilibria": r.equilibria.iter()
                        .map(|(a, b)| vec![a.clone(), b.clone()])
                        .collect::<Vec<_>>(),
                    "weakly_dominant": r.weakly_dominant,
                })
            })
            .collect(),
    );
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::InvalidArgument(format!("serializing nash report: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes every file a sweep's output calls for into `dir` and returns the
/// paths written. `summary.csv` is always produced; the rest appear only
/// when the sweep collected the corresponding rows.
pub fn write_all(dir: &Path, output: &SweepOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let summary = dir.join("summary.csv");
    write_summary_csv(&summary, &output.summary)?;
    written.push(summary);

    if !output.trajectories.is_empty() {
        let path = dir.join("trajectories.csv");
        write_trajectories_csv(&path, &output.trajectories)?;
        written.push(path);
    }
    if !output.relative.is_empty() {
        let path = dir.join("relative.csv");
        write_relative_csv(&path, &output.relative)?;
        written.push(path);
    }
    if !output.snapshots.is_empty() {
        let path = dir.join("snapshots.csv");
        write_snapshots_csv(&path, &output.snapshots)?;
        written.push(path);
    }
    if !output.multi_firm.is_empty() {
        let path = dir.join("multi_firm.csv");
        write_multi_firm_csv(&path, &output.multi_firm)?;
        written.push(path);
    }
    if !output.raw.is_empty() {
        let path = dir.join("raw.csv");
        write_raw_csv(&path, &output.raw)?;
        written.push(path);
    }
    written.extend(write_entrant_matrices(dir, &output.summary)?);
    written.extend(write_hmr_tables(dir, &output.summary)?);
    Ok(written)
}
