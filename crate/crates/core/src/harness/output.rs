use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::{Derived, ScenarioConfig};
use super::scenario::{Diagnostics, ScenarioResult};
use crate::error::Result;

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ScenarioConfig,
    derived: &'a Derived,
    diagnostics: &'a Diagnostics,
    cfl_ratio: f64,
    halt_reason: Option<&'a str>,
}

/// Writes `snapshots.csv`, `solid.csv`, `energy.csv` and `summary.json`
/// into `dir`, creating it if needed.
pub fn write_outputs(result: &ScenarioResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("snapshots.csv"))?;
    w.write_record(["time", "x", "zeta"])?;
    for snap in &result.snapshots {
        for (x, z) in result.node_coords.iter().zip(&snap.zeta) {
            w.serialize((snap.time, x, z))?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("solid.csv"))?;
    w.write_record(["time", "x", "xdot"])?;
    for s in &result.trajectory {
        w.serialize((s.time, s.x, s.xdot))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("energy.csv"))?;
    w.write_record(["time", "energy", "mass"])?;
    for e in &result.energy {
        w.serialize((e.time, e.energy, e.mass))?;
    }
    w.flush()?;

    let summary = Summary {
        config: &result.config,
        derived: &result.derived,
        diagnostics: &result.diagnostics,
        cfl_ratio: result.derived.cfl_ratio,
        halt_reason: result.diagnostics.halt_reason.as_deref(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

/// Writes any serializable table of rows as CSV with a header.
pub fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
