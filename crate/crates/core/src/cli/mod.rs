//! Experiment runner behind the `tsr` binary: configs, sweeps, CSV and
//! manifest output, and the self-test suite.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.

mod check;
mod config;
mod run;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use check::{check_suite, suite_exit_code, CheckOptions, CheckOutcome, FailureKind};
pub use config::{
    CoupledQubitsConfig, ExperimentConfig, HyperfineShape, IntegratorConfig, MethodKind, ModelKind, OutputConfig,
    RadicalPairConfig, SimplifiedRpConfig, SweepAxis, TimeGrid, TimeUnit,
};
pub use run::{
    run_experiment, CurveResult, PointResult, RunReport, Vanish, MANIFEST, NEGATIVITY_CSV, PROBABILITIES_CSV,
    SUMMARY_CSV, TSR_CSV,
};

use crate::error::{Error, Result};
use crate::steering::{mub_d4_vectors, read_assemblage, verify_mub, MeasurementSet, MubTable};
use crate::tsr::{assemble_problem, dual_certificate_check, solve, SdpOptions};
use crate::steering::enumerate_strategies;

impl Error {
    /// 2 for failures of the numerics, 1 for everything the caller could fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepSizeUnderflow { .. } | Error::FullyDecayed(_) | Error::Solver { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tsr", version, about = "Temporal steering robustness under open-system dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify the five mutually unbiased bases of C^4.
    MubCheck {
        /// use the table as printed, whose φ_{4|3} is broken
        #[arg(long)]
        as_printed: bool,
        /// write mub_overlaps.csv and a manifest here
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Two exchange-coupled decaying qubits.
    CoupledQubits(RunArgs),
    /// Radical pair with recombination shelving and dephasing.
    RadicalPair(RunArgs),
    /// Radical pair with only the axial hyperfine coupling, in closed form.
    SimplifiedRp(RunArgs),
    /// Solve the robustness SDP for an assemblage file.
    TsrFromFile {
        /// assemblage JSON (the format written by `write_assemblage`)
        file: PathBuf,
        /// write tsr.csv and a manifest here
        #[arg(long)]
        output: Option<PathBuf>,
        /// solver override, e.g. `max_iterations=50`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Basis verification, solver checks and invariant spot checks.
    SelfTest {
        /// inject the printed (broken) basis table
        #[arg(long)]
        corrupt_mub: bool,
        /// cap interior-point iterations
        #[arg(long)]
        max_iterations: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// TOML config, or a manifest.json from an earlier run
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// override a config key, e.g. `time.points=50` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// same as `--set output.dir=DIR`
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// same as `--set workers=N`; 0 uses every core
    #[arg(long)]
    pub workers: Option<usize>,
    /// print the resolved config and exit
    #[arg(long)]
    pub dry_run: bool,
}

impl RunArgs {
    /// Resolves the config for `model`: file (or preset), then overrides.
    pub fn resolve(&self, model: ModelKind) -> Result<ExperimentConfig> {
        let mut overrides = self.set.clone();
        if let Some(dir) = &self.output {
            overrides.push(format!("output.dir={}", toml::Value::String(dir.display().to_string())));
        }
        if let Some(n) = self.workers {
            overrides.push(format!("workers={n}"));
        }
        let cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path, &overrides)?,
            None => ExperimentConfig::preset(model).with_overrides(&overrides)?,
        };
        if cfg.model != model {
            return Err(Error::Config {
                field: "model".into(),
                message: format!("config is for {}, not {}", cfg.model.name(), model.name()),
            });
        }
        Ok(cfg)
    }
}

fn report_run(report: &RunReport) {
    let unit = report.time_unit.name();
    for c in &report.curves {
        let params = if c.parameters.is_empty() {
            String::new()
        } else {
            format!(" [{}]", c.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", "))
        };
        if let Some(e) = &c.error {
            println!("curve {}{params}: FAILED: {e}", c.index);
            continue;
        }
        let vanish = match &c.vanish {
            Some(v) => format!("vanishes at {} {unit} (bracket {} .. {})", v.time, v.bracket.0, v.bracket.1),
            None => "does not vanish on the grid".into(),
        };
        println!(
            "curve {}{params}: {} points, {} failed, max TSR {}, nonmonotonicity {}, {vanish}",
            c.index,
            c.points.len(),
            c.failed_points(),
            c.tsr_max.map_or("-".into(), |v| format!("{v:.6}")),
            c.nonmonotonicity.map_or("-".into(), |v| format!("{v:.3e}")),
        );
    }
    println!("wrote {} files to {} in {:.1} s", report.files.len(), report.dir.display(), report.wall_time_s);
}

fn run_model(model: ModelKind, args: &RunArgs) -> Result<i32> {
    let cfg = args.resolve(model)?;
    if args.dry_run {
        print!("{}", cfg.to_toml_string());
        return Ok(0);
    }
    let report = run_experiment(&cfg)?;
    report_run(&report);
    Ok(report.exit_code())
}

#[derive(Serialize)]
struct SmallManifest<'a, T: Serialize> {
    software: &'static str,
    version: &'static str,
    command: &'a str,
    input: T,
    files: Vec<&'a str>,
}

fn write_manifest<T: Serialize>(dir: &Path, command: &str, input: T, files: Vec<&str>) -> Result<()> {
    let m = SmallManifest { software: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), command, input, files };
    std::fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

fn mub_check(as_printed: bool, output: Option<&Path>) -> Result<i32> {
    let table = if as_printed { MubTable::AsPrinted } else { MubTable::Corrected };
    let set = MeasurementSet::from_bases(mub_d4_vectors(table))?;
    let report = verify_mub(&set);
    println!("{report}");
    if let Some(dir) = output {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("mub_overlaps.csv"))?;
        w.write_record(["x", "a", "y", "b", "overlap"])?;
        for x in 0..set.n_settings() {
            for a in 0..set.n_outcomes() {
                for y in 0..set.n_settings() {
                    for b in 0..set.n_outcomes() {
                        let o: crate::qmat::C64 =
                            set.vector(x, a).iter().zip(set.vector(y, b)).map(|(p, q)| p.conj() * q).sum();
                        let row = [x + 1, a + 1, y + 1, b + 1].map(|v| v.to_string());
                        w.write_record(row.iter().cloned().chain([o.norm_sqr().to_string()]))?;
                    }
                }
            }
        }
        w.flush()?;
        write_manifest(dir, "mub-check", &report, vec!["mub_overlaps.csv"])?;
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn tsr_from_file(file: &Path, output: Option<&Path>, set: &[String]) -> Result<i32> {
    let asm = read_assemblage(file)?;
    let mut table = toml::Table::try_from(SdpOptions::default()).expect("options serialize");
    for o in set {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::config(o.clone(), "override must look like key=value"))?;
        let v: toml::Value = toml::from_str::<toml::Table>(&format!("v = {}", v.trim()))
            .map_err(|e| Error::config(k.trim(), e.to_string()))?
            .remove("v")
            .expect("parsed key");
        table.insert(k.trim().trim_start_matches("solver.").to_string(), v);
    }
    let opts: SdpOptions = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        let msg = e.to_string();
        Error::config("solver", msg.trim().to_string())
    })?;
    let problem = assemble_problem(&asm, enumerate_strategies(asm.n_settings(), asm.n_outcomes())?)?;
    let sol = solve(&problem, &opts);
    let cert = dual_certificate_check(&sol, &problem);
    let summary = sol.summary();
    println!("{}", summary.to_json_line());
    println!("{}", serde_json::to_string(&cert)?);
    let value = match (sol.status, crate::tsr::clamp_value(sol.primal_value)) {
        (crate::tsr::SolveStatus::Optimal, Some(v)) => Some(v),
        _ => None,
    };
    if let Some(dir) = output {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join(TSR_CSV))?;
        w.write_record(["file", "tsr", "dual_value", "gap", "status", "iterations"])?;
        w.write_record([
            file.display().to_string(),
            value.map(|v| v.to_string()).unwrap_or_default(),
            sol.dual_value.to_string(),
            sol.gap.to_string(),
            sol.status.to_string(),
            sol.iterations.to_string(),
        ])?;
        w.flush()?;
        #[derive(Serialize)]
        struct Input<'a> {
            file: String,
            solver: &'a SdpOptions,
        }
        write_manifest(dir, "tsr-from-file", Input { file: file.display().to_string(), solver: &opts }, vec![TSR_CSV])?;
    }
    Ok(if value.is_some() { 0 } else { 2 })
}

fn self_test(opts: CheckOptions) -> i32 {
    let out = check_suite(opts);
    for o in &out {
        println!("{o}");
    }
    let failed = out.iter().filter(|o| !o.pass).count();
    println!("{} of {} checks passed", out.len() - failed, out.len());
    suite_exit_code(&out)
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::MubCheck { as_printed, output } => mub_check(*as_printed, output.as_deref()),
        Command::CoupledQubits(a) => run_model(ModelKind::CoupledQubits, a),
        Command::RadicalPair(a) => run_model(ModelKind::RadicalPair, a),
        Command::SimplifiedRp(a) => run_model(ModelKind::SimplifiedRp, a),
        Command::TsrFromFile { file, output, set } => tsr_from_file(file, output.as_deref(), set),
        Command::SelfTest { corrupt_mub, max_iterations } => {
            Ok(self_test(CheckOptions { corrupt_mub: *corrupt_mub, max_iterations: *max_iterations }))
        }
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
