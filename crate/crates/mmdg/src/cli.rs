//! Command line interface: single runs, experiment presets, and the
//! bundled error tables.
//!
//! A run's configuration is resolved in three layers: a base (an explicit
//! preset, or per-problem defaults), then a config file, then flags. The
//! meta.txt written next to the results parses back as a config file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::driver::{run, MeshMode, RunConfig, RunOutcome};
use crate::error::{Error, Result};
use crate::mmpde::MmpdeStencil;
use crate::monitor::MonitorKind;
use crate::output::{format_float, write_outputs};
use crate::stepping::NewtonConfig;

#[derive(Parser)]
#[command(name = "mmdg", about = "Adaptive moving-mesh dG solver for semi-linear PDEs in 1D")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run one configuration and write its CSV outputs.
    Solve(SolveArgs),
    /// Run a bundled multi-configuration experiment (table1 or table2).
    Table(TableArgs),
}

#[derive(Args)]
pub struct SolveArgs {
    /// Problem id: burgers, burgers-fisher, schlogl.
    #[arg(long)]
    pub(crate) problem: Option<String>,
    /// Mesh density monitor: optimal, arc-length, curvature.
    #[arg(long)]
    pub(crate) monitor: Option<String>,
    /// Mesh handling: fixed or moving.
    #[arg(long)]
    pub(crate) mesh: Option<String>,
    /// Polynomial degree of the dG basis (1 to 4).
    #[arg(long)]
    pub(crate) degree: Option<usize>,
    /// Number of mesh elements.
    #[arg(long)]
    pub(crate) elements: Option<usize>,
    /// Time step size.
    #[arg(long)]
    pub(crate) dt: Option<f64>,
    /// MMPDE relaxation time.
    #[arg(long)]
    pub(crate) tau: Option<f64>,
    /// Scale factor of the interior penalty sigma = scale * eps * (k+1)^2.
    #[arg(long)]
    pub(crate) sigma_scale: Option<f64>,
    /// Jacobi smoothing sweeps applied to the monitor density.
    #[arg(long)]
    pub(crate) smooth_sweeps: Option<usize>,
    /// Start time.
    #[arg(long)]
    pub(crate) t0: Option<f64>,
    /// End time.
    #[arg(long)]
    pub(crate) tf: Option<f64>,
    /// Comma-separated times at which to store the solution.
    #[arg(long)]
    pub(crate) snapshots: Option<String>,
    /// Directory for the output files.
    #[arg(long, default_value = "out")]
    pub(crate) out_dir: PathBuf,
    /// Config file (key = value lines, same keys as the flags).
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Start from a named experiment: fig2, fig3, fig6, table1, table2.
    #[arg(long)]
    pub(crate) seed_preset: Option<String>,
}

#[derive(Args)]
pub struct TableArgs {
    /// Which table to produce: table1 or table2.
    #[arg(long)]
    pub(crate) name: String,
    /// Directory for the output files.
    #[arg(long, default_value = "out")]
    pub(crate) out_dir: PathBuf,
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Table(args) => run_table(&args.name, &args.out_dir),
    }
}

/// Resolve, run, and write one configuration. An aborted run still writes
/// everything up to the failing step, then surfaces the failure.
pub fn run_solve(args: &SolveArgs) -> Result<()> {
    let config = resolve_config(args)?;
    let record = run(&config)?;
    write_outputs(&record, &args.out_dir)?;
    println!(
        "{} on a {} mesh: {} of {} steps -> {}",
        config.problem,
        config.mesh_mode,
        record.steps.len(),
        config.step_count(),
        args.out_dir.display()
    );
    fail_if_aborted(record.outcome)
}

fn fail_if_aborted(outcome: RunOutcome) -> Result<()> {
    match outcome {
        RunOutcome::Completed => Ok(()),
        RunOutcome::Aborted { step, t, reason } => {
            Err(Error::RunAborted { step, t, reason })
        }
    }
}

/// Baseline configuration for a problem id; every field can be overridden.
pub fn problem_defaults(problem: &str) -> Result<RunConfig> {
    let base = |problem: &str| RunConfig {
        problem: problem.to_string(),
        monitor: MonitorKind::Optimal,
        mesh_mode: MeshMode::Moving,
        degree: 2,
        elements: 40,
        t0: 0.0,
        tf: 1.0,
        dt: 1e-3,
        tau: 0.1,
        sigma_scale: 10.0,
        smooth_sweeps: 2,
        mmpde_sub_steps: 1,
        mmpde_stencil: MmpdeStencil::Difference,
        newton: NewtonConfig::default(),
        snapshots: vec![],
    };
    match problem {
        "burgers" => Ok(RunConfig {
            mesh_mode: MeshMode::Fixed,
            degree: 1,
            elements: 120,
            dt: 5e-3,
            snapshots: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            ..base(problem)
        }),
        "burgers-fisher" => Ok(RunConfig {
            t0: -0.2,
            tf: 0.0,
            snapshots: vec![-0.1, -0.05, -0.04, -0.035, -0.03],
            ..base(problem)
        }),
        "schlogl" => Ok(RunConfig {
            snapshots: vec![0.001, 0.01, 0.25, 0.5, 0.75, 1.0],
            ..base(problem)
        }),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// Named experiment configurations.
pub fn preset(name: &str) -> Result<RunConfig> {
    match name {
        // Fixed-mesh Burgers' baseline and its moving-mesh counterpart.
        "fig2" => problem_defaults("burgers"),
        "fig3" => Ok(RunConfig {
            mesh_mode: MeshMode::Moving,
            elements: 40,
            ..problem_defaults("burgers")?
        }),
        // Burgers'-Fisher error table base; the table command varies the
        // monitor.
        "table1" => problem_defaults("burgers-fisher"),
        // Schlogl error table base; the table command varies monitor and
        // degree.
        "table2" => problem_defaults("schlogl"),
        "fig6" => problem_defaults("schlogl"),
        other => Err(Error::InvalidConfig(format!(
            "unknown preset '{other}' (expected fig2, fig3, fig6, table1, or table2)"
        ))),
    }
}

/// Base, then config file, then flags.
pub fn resolve_config(args: &SolveArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => Overrides::default(),
    };
    let flags = overrides_from_flags(args)?;
    let mut config = match &args.seed_preset {
        Some(name) => preset(name)?,
        None => {
            let id = flags
                .problem
                .clone()
                .or_else(|| file.problem.clone())
                .ok_or_else(|| {
                    Error::InvalidConfig(
                        "no problem selected: pass --problem, --seed-preset, or --config".into(),
                    )
                })?;
            problem_defaults(&id)?
        }
    };
    file.apply(&mut config);
    flags.apply(&mut config);
    Ok(config)
}

/// Runs every configuration of a bundled table, writes per-run outputs
/// under `<out_dir>/<name>/<label>/`, and a combined error table.
pub fn run_table(name: &str, out_dir: &Path) -> Result<()> {
    let variants: Vec<RunConfig> = match name {
        "table1" => MonitorKind::all()
            .iter()
            .map(|&monitor| {
                Ok(RunConfig {
                    monitor,
                    ..preset("table1")?
                })
            })
            .collect::<Result<_>>()?,
        "table2" => {
            let mut v = Vec::new();
            for degree in [1, 2] {
                for monitor in MonitorKind::all() {
                    v.push(RunConfig {
                        monitor,
                        degree,
                        ..preset("table2")?
                    });
                }
            }
            v
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown table '{other}' (expected table1 or table2)"
            )))
        }
    };

    let times = variants[0].snapshots.clone();
    let mut combined = String::from("monitor,degree");
    for t in &times {
        combined.push_str(&format!(",t={t}"));
    }
    combined.push('\n');

    let table_dir = out_dir.join(name);
    for config in &variants {
        let label = if name == "table1" {
            config.monitor.as_str().to_string()
        } else {
            format!("{}-k{}", config.monitor.as_str(), config.degree)
        };
        let record = run(config)?;
        write_outputs(&record, &table_dir.join(&label))?;
        combined.push_str(&format!("{},{}", config.monitor.as_str(), config.degree));
        for snap in &record.snapshots {
            combined.push(',');
            combined.push_str(&format_float(snap.l2_error.unwrap_or(f64::NAN)));
        }
        combined.push('\n');
        println!("{name}: {} k={} done", config.monitor.as_str(), config.degree);
        fail_if_aborted(record.outcome)?;
    }
    fs::create_dir_all(&table_dir)?;
    fs::write(table_dir.join(format!("{name}.csv")), combined)?;
    Ok(())
}

/// Partial configuration from one source; `None` means "keep the base".
#[derive(Clone, Debug, Default)]
struct Overrides {
    problem: Option<String>,
    monitor: Option<MonitorKind>,
    mesh: Option<MeshMode>,
    degree: Option<usize>,
    elements: Option<usize>,
    t0: Option<f64>,
    tf: Option<f64>,
    dt: Option<f64>,
    tau: Option<f64>,
    sigma_scale: Option<f64>,
    smooth_sweeps: Option<usize>,
    mmpde_sub_steps: Option<usize>,
    mmpde_stencil: Option<MmpdeStencil>,
    snapshots: Option<Vec<f64>>,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = &self.problem {
            config.problem = v.clone();
        }
        if let Some(v) = self.monitor {
            config.monitor = v;
        }
        if let Some(v) = self.mesh {
            config.mesh_mode = v;
        }
        if let Some(v) = self.degree {
            config.degree = v;
        }
        if let Some(v) = self.elements {
            config.elements = v;
        }
        if let Some(v) = self.t0 {
            config.t0 = v;
        }
        if let Some(v) = self.tf {
            config.tf = v;
        }
        if let Some(v) = self.dt {
            config.dt = v;
        }
        if let Some(v) = self.tau {
            config.tau = v;
        }
        if let Some(v) = self.sigma_scale {
            config.sigma_scale = v;
        }
        if let Some(v) = self.smooth_sweeps {
            config.smooth_sweeps = v;
        }
        if let Some(v) = self.mmpde_sub_steps {
            config.mmpde_sub_steps = v;
        }
        if let Some(v) = self.mmpde_stencil {
            config.mmpde_stencil = v;
        }
        if let Some(v) = &self.snapshots {
            config.snapshots = v.clone();
        }
    }
}

fn overrides_from_flags(args: &SolveArgs) -> Result<Overrides> {
    let mut over = Overrides {
        problem: args.problem.clone(),
        degree: args.degree,
        elements: args.elements,
        t0: args.t0,
        tf: args.tf,
        dt: args.dt,
        tau: args.tau,
        sigma_scale: args.sigma_scale,
        smooth_sweeps: args.smooth_sweeps,
        ..Overrides::default()
    };
    if let Some(s) = &args.monitor {
        over.monitor = Some(s.parse()?);
    }
    if let Some(s) = &args.mesh {
        over.mesh = Some(s.parse()?);
    }
    if let Some(s) = &args.snapshots {
        over.snapshots = Some(parse_snapshot_list(s)?);
    }
    Ok(over)
}

fn parse_config_file(path: &Path) -> Result<Overrides> {
    let text = fs::read_to_string(path)?;
    let mut over = Overrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{}:{}: expected 'key = value'",
                path.display(),
                idx + 1
            ))
        })?;
        apply_key(&mut over, key.trim(), value.trim()).map_err(|e| {
            Error::InvalidConfig(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
    }
    Ok(over)
}

fn apply_key(over: &mut Overrides, key: &str, value: &str) -> Result<()> {
    match key {
        "schema-version" => {
            if value != "1" {
                return Err(Error::InvalidConfig(format!(
                    "unsupported schema version '{value}'"
                )));
            }
        }
        "problem" => over.problem = Some(value.to_string()),
        "monitor" => over.monitor = Some(value.parse()?),
        "mesh" => over.mesh = Some(value.parse()?),
        "degree" => over.degree = Some(parse_usize(key, value)?),
        "elements" => over.elements = Some(parse_usize(key, value)?),
        "t0" => over.t0 = Some(parse_f64(key, value)?),
        "tf" => over.tf = Some(parse_f64(key, value)?),
        "dt" => over.dt = Some(parse_f64(key, value)?),
        "tau" => over.tau = Some(parse_f64(key, value)?),
        "sigma-scale" => over.sigma_scale = Some(parse_f64(key, value)?),
        "smooth-sweeps" => over.smooth_sweeps = Some(parse_usize(key, value)?),
        "mmpde-sub-steps" => over.mmpde_sub_steps = Some(parse_usize(key, value)?),
        "mmpde-stencil" => over.mmpde_stencil = Some(value.parse()?),
        "snapshots" => over.snapshots = Some(parse_snapshot_list(value)?),
        other => {
            return Err(Error::InvalidConfig(format!("unknown config key '{other}'")));
        }
    }
    Ok(())
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("invalid number for {key}: '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("invalid integer for {key}: '{value}'")))
}

fn parse_snapshot_list(value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(vec![]);
    }
    value
        .split(',')
        .map(|s| parse_f64("snapshots", s.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn empty_args() -> SolveArgs {
        SolveArgs {
            problem: None,
            monitor: None,
            mesh: None,
            degree: None,
            elements: None,
            dt: None,
            tau: None,
            sigma_scale: None,
            smooth_sweeps: None,
            t0: None,
            tf: None,
            snapshots: None,
            out_dir: PathBuf::from("out"),
            config: None,
            seed_preset: None,
        }
    }

    #[test]
    fn burgers_defaults_match_the_fixed_baseline() {
        let c = problem_defaults("burgers").unwrap();
        assert_eq!(c.mesh_mode, MeshMode::Fixed);
        assert_eq!(c.degree, 1);
        assert_eq!(c.elements, 120);
        assert_eq!(c.dt, 5e-3);
        assert_eq!(c.snapshots.len(), 6);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn presets_are_valid_and_distinct() {
        for name in ["fig2", "fig3", "fig6", "table1", "table2"] {
            let c = preset(name).unwrap();
            assert!(c.validate().is_ok(), "preset {name} is invalid");
        }
        let fig3 = preset("fig3").unwrap();
        assert_eq!(fig3.mesh_mode, MeshMode::Moving);
        assert_eq!(fig3.elements, 40);
        let table1 = preset("table1").unwrap();
        assert_eq!(table1.problem, "burgers-fisher");
        assert_eq!(table1.t0, -0.2);
        assert!(preset("fig99").is_err());
    }

    #[test]
    fn flags_override_config_file_which_overrides_defaults() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment line").unwrap();
        writeln!(file, "problem = schlogl").unwrap();
        writeln!(file, "degree = 3").unwrap();
        writeln!(file, "elements = 10").unwrap();
        file.flush().unwrap();

        let mut args = empty_args();
        args.config = Some(file.path().to_path_buf());
        args.degree = Some(4);
        let config = resolve_config(&args).unwrap();
        assert_eq!(config.problem, "schlogl");
        assert_eq!(config.degree, 4, "flag beats file");
        assert_eq!(config.elements, 10, "file beats defaults");
        assert_eq!(config.dt, 1e-3, "untouched default survives");
    }

    #[test]
    fn meta_output_parses_back_as_config() {
        let config = preset("fig2").unwrap();
        let record = crate::driver::RunRecord {
            config: config.clone(),
            outcome: RunOutcome::Completed,
            times: vec![],
            trajectory: vec![],
            steps: vec![],
            snapshots: vec![],
            energy: vec![],
            ic_range: (0.0, 0.0),
            value_range: (0.0, 0.0),
        };
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&record, dir.path()).unwrap();

        let mut args = empty_args();
        args.config = Some(dir.path().join("meta.txt"));
        let back = resolve_config(&args).unwrap();
        assert_eq!(back.problem, config.problem);
        assert_eq!(back.degree, config.degree);
        assert_eq!(back.elements, config.elements);
        assert_eq!(back.dt, config.dt);
        assert_eq!(back.snapshots, config.snapshots);
    }

    #[test]
    fn missing_problem_is_an_error() {
        let args = empty_args();
        match resolve_config(&args) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("no problem selected")),
            _ => panic!("expected InvalidConfig"),
        }
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "problem = burgers").unwrap();
        writeln!(file, "colour = blue").unwrap();
        file.flush().unwrap();

        let mut args = empty_args();
        args.config = Some(file.path().to_path_buf());
        let err = resolve_config(&args).unwrap_err();
        assert!(err.to_string().contains("unknown config key"), "{err}");
    }

    #[test]
    fn snapshot_lists_parse() {
        assert_eq!(parse_snapshot_list("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_snapshot_list("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_snapshot_list("0.1,x").is_err());
    }
}
