//! CSV and metadata writers for run records.
//!
//! Every float is printed with [`format_float`], which round-trips exactly,
//! so repeated runs of the same configuration produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::driver::RunRecord;
use crate::error::Result;

/// Sample points per element when dumping a solution curve.
const SNAPSHOT_SAMPLES: usize = 20;

/// Scientific notation with 17 significant digits; parsing the result gives
/// back the identical f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes trajectory.csv, snapshots.csv, diagnostics.csv, meta.txt and,
/// when the data exists, errors.csv and energy.csv into `dir`.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trajectory.csv"), trajectory_csv(record))?;
    fs::write(dir.join("snapshots.csv"), snapshots_csv(record))?;
    if record.snapshots.iter().any(|s| s.l2_error.is_some()) {
        fs::write(dir.join("errors.csv"), errors_csv(record))?;
    }
    if !record.energy.is_empty() {
        fs::write(dir.join("energy.csv"), energy_csv(record))?;
    }
    fs::write(dir.join("diagnostics.csv"), diagnostics_csv(record))?;
    fs::write(dir.join("meta.txt"), meta_text(record))?;
    Ok(())
}

fn trajectory_csv(record: &RunRecord) -> String {
    let n_nodes = record.trajectory.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 0..n_nodes {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    for (t, nodes) in record.times.iter().zip(&record.trajectory) {
        out.push_str(&format_float(*t));
        for x in nodes {
            out.push(',');
            out.push_str(&format_float(*x));
        }
        out.push('\n');
    }
    out
}

fn snapshots_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,x,u\n");
    for snap in &record.snapshots {
        let u = &snap.solution;
        let mesh = u.mesh();
        let t_str = format_float(snap.t);
        for n in 0..mesh.n_elements() {
            let (a, _) = mesh.element(n);
            let h = mesh.size(n);
            for s in 0..SNAPSHOT_SAMPLES {
                let p = s as f64 / (SNAPSHOT_SAMPLES - 1) as f64;
                let _ = writeln!(
                    out,
                    "{t_str},{},{}",
                    format_float(a + p * h),
                    format_float(u.eval_local(n, p))
                );
            }
        }
    }
    out
}

fn errors_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,l2_error\n");
    for snap in &record.snapshots {
        if let Some(err) = snap.l2_error {
            let _ = writeln!(out, "{},{}", format_float(snap.t), format_float(err));
        }
    }
    out
}

fn energy_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,energy\n");
    for (t, e) in &record.energy {
        let _ = writeln!(out, "{},{}", format_float(*t), format_float(*e));
    }
    out
}

fn diagnostics_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,newton_iterations,equidistribution_residual,mass_drift\n");
    for step in &record.steps {
        let total = step.newton_iterations_first + step.newton_iterations_second.unwrap_or(0);
        let _ = writeln!(
            out,
            "{},{total},{},{}",
            format_float(step.t),
            format_float(step.equidistribution_residual),
            format_float(step.mass_drift)
        );
    }
    out
}

/// Key-value description of the run; the solve command accepts the file
/// back via --config.
fn meta_text(record: &RunRecord) -> String {
    let c = &record.config;
    let snapshots = c
        .snapshots
        .iter()
        .map(|s| format_float(*s))
        .collect::<Vec<_>>()
        .join(",");
    let mut out = String::new();
    let _ = writeln!(out, "schema-version = 1");
    let _ = writeln!(out, "problem = {}", c.problem);
    let _ = writeln!(out, "monitor = {}", c.monitor.as_str());
    let _ = writeln!(out, "mesh = {}", c.mesh_mode.as_str());
    let _ = writeln!(out, "degree = {}", c.degree);
    let _ = writeln!(out, "elements = {}", c.elements);
    let _ = writeln!(out, "t0 = {}", format_float(c.t0));
    let _ = writeln!(out, "tf = {}", format_float(c.tf));
    let _ = writeln!(out, "dt = {}", format_float(c.dt));
    let _ = writeln!(out, "tau = {}", format_float(c.tau));
    let _ = writeln!(out, "sigma-scale = {}", format_float(c.sigma_scale));
    let _ = writeln!(out, "smooth-sweeps = {}", c.smooth_sweeps);
    let _ = writeln!(out, "mmpde-sub-steps = {}", c.mmpde_sub_steps);
    let _ = writeln!(out, "mmpde-stencil = {}", c.mmpde_stencil.as_str());
    let _ = writeln!(out, "snapshots = {snapshots}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{run, MeshMode, RunConfig};
    use crate::mmpde::MmpdeStencil;
    use crate::monitor::MonitorKind;
    use crate::stepping::NewtonConfig;

    fn tiny_run() -> RunRecord {
        let config = RunConfig {
            problem: "burgers".to_string(),
            monitor: MonitorKind::Optimal,
            mesh_mode: MeshMode::Fixed,
            degree: 1,
            elements: 4,
            t0: 0.0,
            tf: 0.02,
            dt: 0.01,
            tau: 0.1,
            sigma_scale: 10.0,
            smooth_sweeps: 2,
            mmpde_sub_steps: 1,
            mmpde_stencil: MmpdeStencil::Difference,
            newton: NewtonConfig::default(),
            snapshots: vec![0.02],
        };
        run(&config).unwrap()
    }

    #[test]
    fn formatted_floats_round_trip() {
        let values = [
            0.0,
            -0.0,
            1.0 / 3.0,
            0.1 + 0.2,
            -1.4e-3,
            1e-300,
            6.02e23,
            f64::MIN_POSITIVE,
        ];
        for &v in &values {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "round trip of {v} via {s}");
        }
    }

    #[test]
    fn writers_produce_expected_files_and_shapes() {
        let record = tiny_run();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&record, dir.path()).unwrap();

        let trajectory = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        let lines: Vec<&str> = trajectory.lines().collect();
        assert_eq!(lines.len(), 1 + 3, "header plus one row per time");
        assert_eq!(lines[0], "t,x_0,x_1,x_2,x_3,x_4");
        assert_eq!(lines[1].split(',').count(), 6);

        let snapshots = std::fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
        assert_eq!(snapshots.lines().count(), 1 + 4 * SNAPSHOT_SAMPLES);

        let diagnostics = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert_eq!(diagnostics.lines().count(), 1 + 2);

        // Burgers' has neither an exact solution nor a potential.
        assert!(!dir.path().join("errors.csv").exists());
        assert!(!dir.path().join("energy.csv").exists());

        let meta = std::fs::read_to_string(dir.path().join("meta.txt")).unwrap();
        assert!(meta.starts_with("schema-version = 1\n"));
        assert!(meta.contains("problem = burgers"));
        assert!(meta.contains("mesh = fixed"));
        assert!(meta.contains("degree = 1"));
    }

    #[test]
    fn repeated_writes_are_byte_identical() {
        let record = tiny_run();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_outputs(&record, dir_a.path()).unwrap();
        // A second, independent run of the same configuration.
        let again = tiny_run();
        write_outputs(&again, dir_b.path()).unwrap();
        for name in ["trajectory.csv", "snapshots.csv", "diagnostics.csv", "meta.txt"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
}
