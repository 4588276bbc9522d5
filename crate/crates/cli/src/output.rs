//! CSV writers. Floating-point values are serialized with 17 significant
//! digits so they round-trip exactly and identical runs produce identical
//! bytes; files use LF line endings and carry a header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use vqivp::{ConvergenceReport, Field, Trajectory};

/// 17-significant-digit form of `x`, round-trip exact for f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        format!("cannot create {}: {e}", path.display())
    })?))
}

/// `snapshots.csv`: one row per stored time level, grid point and field.
/// Snapshot indices are thinned by `stride`, always keeping the final level.
pub fn write_snapshots(path: &Path, traj: &Trajectory, stride: usize) -> Result<(), String> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| format!("write {}: {e}", path.display());
    writeln!(w, "step,t,i,x,field,value").map_err(io)?;
    let last = traj.snapshots.len() - 1;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        if k % stride != 0 && k != last {
            continue;
        }
        for (field, values) in &snap.fields {
            for (i, value) in values.iter().enumerate() {
                writeln!(
                    w,
                    "{k},{},{i},{},{field},{}",
                    fmt_float(snap.time),
                    fmt_float(traj.domain.point(i)),
                    fmt_float(*value)
                )
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// `stats.csv`: per-step optimizer accounting.
pub fn write_stats(path: &Path, traj: &Trajectory) -> Result<(), String> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| format!("write {}: {e}", path.display());
    writeln!(w, "step,t,minimizations,cost_evals,best_cost,wall_ms").map_err(io)?;
    for s in &traj.stats {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.step,
            fmt_float(s.time),
            s.minimizations,
            s.cost_evals,
            fmt_float(s.best_cost),
            fmt_float(s.wall_ms)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `convergence.csv` for runs with an exact solution: per coarsest-grid time
/// the per-resolution L1 errors and consecutive ratios. Undefined ratios are
/// written as `nan`.
pub fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<(), String> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| format!("write {}: {e}", path.display());
    let levels = &report.levels;
    let mut header = String::from("t");
    for n in levels {
        header.push_str(&format!(",l1_n{n}"));
    }
    for pair in levels.windows(2) {
        header.push_str(&format!(",ratio_{}_{}", pair[0], pair[1]));
    }
    writeln!(w, "{header}").map_err(io)?;

    let coarsest = levels[0];
    let times = &report.times[&coarsest];
    for (k, t) in times.iter().enumerate() {
        let mut row = fmt_float(*t);
        for n in levels {
            let idx = k << (n - coarsest);
            row.push(',');
            row.push_str(&fmt_float(report.errors[n][idx]));
        }
        for pair in levels.windows(2) {
            let idx = k << (pair[0] - coarsest);
            let value = report.ratios[&(pair[0], pair[1])][idx];
            row.push(',');
            row.push_str(&value.map_or_else(|| "nan".into(), fmt_float));
        }
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `convergence.csv` for self-convergence runs: per coarsest-grid time the
/// injected-difference norms and their ratio for every consecutive triple.
pub fn write_self_convergence(path: &Path, report: &ConvergenceReport) -> Result<(), String> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| format!("write {}: {e}", path.display());
    let levels = &report.levels;
    let coarsest = levels[0];
    let mut header = String::from("t");
    for triple in levels.windows(3) {
        let n = triple[0];
        header.push_str(&format!(",num_n{n},den_n{n},sc_n{n}"));
    }
    writeln!(w, "{header}").map_err(io)?;

    let times = &report.times[&coarsest];
    for (k, t) in times.iter().enumerate() {
        let mut row = fmt_float(*t);
        for triple in levels.windows(3) {
            let n = triple[0];
            let idx = k << (n - coarsest);
            let (nums, dens) = &report.num_den[&n];
            let ratio = report.ratios[&(n, n + 1)][idx];
            row.push_str(&format!(
                ",{},{},{}",
                fmt_float(nums[idx]),
                fmt_float(dens[idx]),
                ratio.map_or_else(|| "nan".into(), fmt_float)
            ));
        }
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `evalcount.csv`: average cost evaluations per step for each mode count
/// and Courant factor.
pub fn write_evalcount(path: &Path, rows: &[(u32, usize, f64, f64)]) -> Result<(), String> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| format!("write {}: {e}", path.display());
    writeln!(w, "m,M,cfl,avg_evals_per_step").map_err(io)?;
    for (m, modes, cfl, avg) in rows {
        writeln!(w, "{m},{modes},{},{}", fmt_float(*cfl), fmt_float(*avg)).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Rewrites `snapshots.csv` rows of one field as gnuplot-ready blocks of
/// `t x value` lines, one block per stored time level.
pub fn write_heatmap(snapshots_csv: &Path, field: Field, out: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(snapshots_csv)
        .map_err(|e| format!("cannot read {}: {e}", snapshots_csv.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| format!("{} is empty", snapshots_csv.display()))?;
    if header != "step,t,i,x,field,value" {
        return Err(format!(
            "{} does not look like a snapshots file",
            snapshots_csv.display()
        ));
    }

    let mut w = create(out)?;
    let io = |e: std::io::Error| format!("write {}: {e}", out.display());
    let mut current_step: Option<&str> = None;
    let mut wrote_any = false;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(format!(
                "malformed row in {}: {line:?}",
                snapshots_csv.display()
            ));
        }
        if cells[4] != field.as_str() {
            continue;
        }
        if current_step.is_some_and(|s| s != cells[0]) {
            writeln!(w).map_err(io)?;
        }
        current_step = Some(cells[0]);
        writeln!(w, "{} {} {}", cells[1], cells[3], cells[5]).map_err(io)?;
        wrote_any = true;
    }
    if !wrote_any {
        return Err(format!(
            "no rows for field {field} in {}",
            snapshots_csv.display()
        ));
    }
    w.flush().map_err(io)
}
