//! Result files written into a run directory.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::{RunResult, SweepPoint};
use crate::error::SimResult;
use crate::evolution::Level;

fn write_json<T: Serialize>(path: &Path, value: &T) -> SimResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn t_label(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

/// `pattern.csv`, `metrics.json`, `diagnostics.json`, plus `qgrid.csv`,
/// `pdf.csv` and `pattern_t<t>.csv` when present.
pub fn write_run(result: &RunResult, dir: &Path) -> SimResult<()> {
    fs::create_dir_all(dir)?;
    result.pattern.write_csv(&dir.join("pattern.csv"))?;
    for (t, p) in &result.extra_patterns {
        p.write_csv(&dir.join(format!("pattern_t{}.csv", t_label(*t))))?;
    }
    write_json(
        &dir.join("metrics.json"),
        &json!({
            "case": result.config.case.label(),
            "stage": result.config.stage,
            "V0": result.metrics.visibility,
            "D0": result.metrics.distinguishability,
            "C0": result.metrics.coherence,
            "residual": result.metrics.residual,
            "fringe_visibility": result.visibility,
        }),
    )?;
    write_json(
        &dir.join("diagnostics.json"),
        &json!({ "config": result.config, "diagnostics": result.diagnostics }),
    )?;
    if let Some(q) = &result.qgrid {
        q.write_csv(BufWriter::new(fs::File::create(dir.join("qgrid.csv"))?))?;
    }
    if let Some(pdf) = &result.pdf {
        let mut w = BufWriter::new(fs::File::create(dir.join("pdf.csv"))?);
        writeln!(w, "chi,density")?;
        for (c, d) in pdf.chi.iter().zip(&pdf.density) {
            writeln!(w, "{c:.8e},{d:.8e}")?;
        }
        w.flush()?;
    }
    Ok(())
}

/// One `qgrid_eps<ε>.csv` per point and a `sweep.json` summary.
pub fn write_sweep(points: &[SweepPoint], level: Level, dir: &Path) -> SimResult<()> {
    fs::create_dir_all(dir)?;
    let mut summary = Vec::with_capacity(points.len());
    for p in points {
        p.qgrid.write_csv(BufWriter::new(fs::File::create(dir.join(format!("qgrid_eps{}.csv", t_label(p.epsilon))))?))?;
        let (_, _, x, y) = p.qgrid.argmax();
        summary.push(json!({ "epsilon": p.epsilon, "overlap": p.overlap, "peak": [x, y] }));
    }
    write_json(&dir.join("sweep.json"), &json!({ "level": level, "points": summary }))
}

/// A subdirectory per case plus `suite.json` with each case's metrics.
pub fn write_suite(results: &[(crate::duality::SphereCaseName, RunResult)], dir: &Path) -> SimResult<()> {
    fs::create_dir_all(dir)?;
    let mut summary = Vec::with_capacity(results.len());
    for (name, r) in results {
        write_run(r, &dir.join(name.as_str()))?;
        summary.push(json!({
            "case": name,
            "V0": r.metrics.visibility,
            "D0": r.metrics.distinguishability,
            "C0": r.metrics.coherence,
            "fringe_visibility": r.visibility,
        }));
    }
    write_json(&dir.join("suite.json"), &summary)
}
