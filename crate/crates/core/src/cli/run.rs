//! Runs a configured experiment and writes its CSV files and manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{render_value, ExperimentConfig, ModelKind, TimeUnit};
use crate::dynamics::{
    build_coupled_qubit_liouvillian, build_radical_pair_liouvillian, coupled_qubit_label, electron_pair_basis,
    radical_pair_initial_state, radical_pair_label, undecayed_projector, CoupledQubitParams, ReductionMode,
    ReductionSpec, ELECTRON1, ELECTRON2, QUBIT1, QUBIT2,
};
use crate::error::{Error, Result};
use crate::measures::{
    negativity, nonmonotonicity, simplified_rp_assemblages, simplified_rp_label, simplified_rp_state, TimeSeries,
};
use crate::qmat::{partial_trace, DensityMatrix, SpaceLabel};
use crate::steering::{
    build_mubs_d4, evolve_assemblage, initial_assemblage, verify_mub, Assemblage, MeasurementSet, MubReport,
};
use crate::tsr::tsr_with;

/// One solved time point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResult {
    pub time: f64,
    /// None when the solve failed
    pub tsr: Option<f64>,
    pub status: String,
    pub iterations: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vanish {
    pub time: f64,
    pub bracket: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveResult {
    pub index: usize,
    /// swept keys and their values at this curve
    pub parameters: Vec<(String, String)>,
    /// 1-based basis indices
    pub settings: Vec<usize>,
    pub points: Vec<PointResult>,
    pub negativity: Vec<(f64, f64)>,
    /// (time, p(a|x) setting-major)
    pub probabilities: Vec<(f64, Vec<f64>)>,
    pub nonmonotonicity: Option<f64>,
    pub vanish: Option<Vanish>,
    pub tsr_max: Option<f64>,
    /// set when the curve could not be evolved at all
    pub error: Option<String>,
}

impl CurveResult {
    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| p.tsr.is_none()).count()
    }

    /// The successfully solved part of the TSR curve.
    pub fn tsr_series(&self) -> Option<TimeSeries> {
        let (t, v): (Vec<f64>, Vec<f64>) = self.points.iter().filter_map(|p| p.tsr.map(|v| (p.time, v))).unzip();
        TimeSeries::new(t, v).ok()
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub time_unit: TimeUnit,
    pub curves: Vec<CurveResult>,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

impl RunReport {
    /// Curves that failed outright plus individual failed points.
    pub fn failures(&self) -> usize {
        self.curves.iter().map(|c| c.failed_points() + usize::from(c.error.is_some())).sum()
    }

    /// 0 when everything solved, 2 when any point or curve failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 {
            0
        } else {
            2
        }
    }
}

pub const TSR_CSV: &str = "tsr.csv";
pub const NEGATIVITY_CSV: &str = "negativity.csv";
pub const PROBABILITIES_CSV: &str = "probabilities.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const MANIFEST: &str = "manifest.json";

/// Refuses to run on a basis set that fails verification.
fn checked_mubs() -> Result<(MeasurementSet, MubReport)> {
    let set = build_mubs_d4();
    let report = verify_mub(&set);
    if !report.pass {
        return Err(Error::InvalidParameter(format!("built-in bases failed verification: {report}")));
    }
    Ok((set, report))
}

fn physical_times(cfg: &ExperimentConfig, samples: &[f64]) -> Vec<f64> {
    let scale = match cfg.time.unit {
        TimeUnit::InverseGamma => 1.0 / cfg.coupled_qubits.gamma,
        TimeUnit::InverseG => 1.0 / cfg.coupled_qubits.g,
        TimeUnit::Seconds => 1.0,
        TimeUnit::Microseconds => 1e-6,
    };
    samples.iter().map(|t| t * scale).collect()
}

fn electron_label() -> SpaceLabel {
    SpaceLabel::new([(ELECTRON1, 2), (ELECTRON2, 2)]).expect("static label")
}

struct Evolved {
    assemblages: Vec<Assemblage>,
    negativity: Vec<f64>,
}

fn marginal_negativity(asm: &Assemblage, label: &SpaceLabel, party: &str) -> Result<f64> {
    let rho = DensityMatrix::new(asm.marginal(0).symmetrized())?;
    negativity(&rho, label, party)
}

fn evolve(cfg: &ExperimentConfig, mubs: &MeasurementSet, times: &[f64]) -> Result<Evolved> {
    let zero_based: Vec<usize> = cfg.settings.iter().map(|s| s - 1).collect();
    let meas = mubs.select(&zero_based)?;
    let method = cfg.integrator.method();
    match cfg.model {
        ModelKind::CoupledQubits => {
            let c = &cfg.coupled_qubits;
            let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: c.g, gamma: c.gamma })?;
            let label = coupled_qubit_label();
            let asm0 = initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &label, &[QUBIT1, QUBIT2])?;
            let assemblages = evolve_assemblage(&asm0, &l, times, None, method)?;
            let negativity =
                assemblages.iter().map(|a| marginal_negativity(a, &label, QUBIT2)).collect::<Result<_>>()?;
            Ok(Evolved { assemblages, negativity })
        }
        ModelKind::RadicalPair => {
            let l = build_radical_pair_liouvillian(&cfg.radical_pair.params())?;
            let label = radical_pair_label();
            let keep = [ELECTRON1, ELECTRON2];
            let meas = meas.in_frame(&electron_pair_basis())?;
            let asm0 = initial_assemblage(&radical_pair_initial_state(), &meas, &label, &keep)?;
            let spec = match cfg.radical_pair.reduction {
                ReductionMode::TraceOut => ReductionSpec::trace_out(label, &keep)?,
                ReductionMode::ProjectAndRenormalize => ReductionSpec::project(label, &keep, undecayed_projector())?,
            };
            let assemblages = evolve_assemblage(&asm0, &l, times, Some(&spec), method)?;
            let el = electron_label();
            let negativity = assemblages.iter().map(|a| marginal_negativity(a, &el, ELECTRON2)).collect::<Result<_>>()?;
            Ok(Evolved { assemblages, negativity })
        }
        ModelKind::SimplifiedRp => {
            let p = cfg.simplified_rp.params();
            let el = electron_label();
            let meas = meas.in_frame(&electron_pair_basis())?;
            let asm0 = initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &el, &[ELECTRON1, ELECTRON2])?;
            let assemblages = simplified_rp_assemblages(&p, &asm0, times)?;
            // entanglement is tracked for the singlet start, not the mixed one
            let full = simplified_rp_label();
            let negativity = times
                .iter()
                .map(|&t| {
                    let rho = simplified_rp_state(&p, t)?;
                    let pair = DensityMatrix::new(partial_trace(rho.matrix(), &full, &[ELECTRON1, ELECTRON2])?)?;
                    negativity(&pair, &el, ELECTRON2)
                })
                .collect::<Result<_>>()?;
            Ok(Evolved { assemblages, negativity })
        }
    }
}

fn solve_point(cfg: &ExperimentConfig, time: f64, asm: &Assemblage) -> PointResult {
    match tsr_with(asm, &cfg.solver) {
        Ok((value, sol)) => {
            PointResult { time, tsr: Some(value), status: sol.status.to_string(), iterations: sol.iterations, gap: sol.gap }
        }
        Err(Error::Solver { status, iterations, gap }) => PointResult { time, tsr: None, status, iterations, gap },
        Err(e) => PointResult { time, tsr: None, status: format!("error: {e}"), iterations: 0, gap: f64::NAN },
    }
}

fn run_curve(index: usize, point: &[(String, toml::Value)], cfg: &ExperimentConfig, mubs: &MeasurementSet) -> CurveResult {
    let samples = cfg.time.samples();
    let mut out = CurveResult {
        index,
        parameters: point.iter().map(|(k, v)| (k.clone(), render_value(v))).collect(),
        settings: cfg.settings.clone(),
        points: Vec::new(),
        negativity: Vec::new(),
        probabilities: Vec::new(),
        nonmonotonicity: None,
        vanish: None,
        tsr_max: None,
        error: None,
    };
    let evolved = match evolve(cfg, mubs, &physical_times(cfg, &samples)) {
        Ok(e) => e,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.points = samples.par_iter().zip(&evolved.assemblages).map(|(&t, asm)| solve_point(cfg, t, asm)).collect();
    out.negativity = samples.iter().copied().zip(evolved.negativity).collect();
    out.probabilities = samples
        .iter()
        .zip(&evolved.assemblages)
        .map(|(&t, asm)| {
            let p = (0..asm.n_settings()).flat_map(|x| (0..asm.n_outcomes()).map(move |a| (x, a)));
            (t, p.map(|(x, a)| asm.probability(x, a)).collect())
        })
        .collect();
    if let Some(series) = out.tsr_series() {
        out.nonmonotonicity = nonmonotonicity(&series).ok();
        out.vanish = series.vanishes_at(cfg.output.vanish_threshold).map(|(time, bracket)| Vanish { time, bracket });
        out.tsr_max = series.values().iter().copied().reduce(f64::max);
    }
    out
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn writer(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<csv::Writer<std::fs::File>> {
    let path = dir.join(name);
    files.push(path.clone());
    Ok(csv::Writer::from_path(path)?)
}

fn write_csvs(dir: &Path, axes: &[String], curves: &[CurveResult]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let head = |rest: &[&str]| {
        let mut h = vec!["curve".to_string()];
        h.extend(axes.iter().cloned());
        h.extend(rest.iter().map(|s| s.to_string()));
        h
    };
    let lead = |c: &CurveResult| {
        let mut r = vec![c.index.to_string()];
        r.extend(c.parameters.iter().map(|(_, v)| v.clone()));
        r
    };

    let mut w = writer(dir, TSR_CSV, &mut files)?;
    w.write_record(head(&["time", "tsr", "status", "iterations", "gap"]))?;
    for c in curves {
        for p in &c.points {
            let mut r = lead(c);
            r.extend([fmt(p.time), opt(p.tsr), p.status.clone(), p.iterations.to_string(), fmt(p.gap)]);
            w.write_record(r)?;
        }
    }
    w.flush()?;

    let mut w = writer(dir, NEGATIVITY_CSV, &mut files)?;
    w.write_record(head(&["time", "negativity"]))?;
    for c in curves {
        for &(t, n) in &c.negativity {
            let mut r = lead(c);
            r.extend([fmt(t), fmt(n)]);
            w.write_record(r)?;
        }
    }
    w.flush()?;

    let mut w = writer(dir, PROBABILITIES_CSV, &mut files)?;
    w.write_record(head(&["time", "x", "a", "probability"]))?;
    for c in curves {
        for (t, probs) in &c.probabilities {
            let na = probs.len() / c.settings.len().max(1);
            for (k, p) in probs.iter().enumerate() {
                let mut r = lead(c);
                r.extend([fmt(*t), c.settings[k / na].to_string(), (k % na + 1).to_string(), fmt(*p)]);
                w.write_record(r)?;
            }
        }
    }
    w.flush()?;

    let mut w = writer(dir, SUMMARY_CSV, &mut files)?;
    w.write_record(head(&[
        "settings",
        "points",
        "failed",
        "tsr_max",
        "nonmonotonicity",
        "vanish_time",
        "vanish_lo",
        "vanish_hi",
        "error",
    ]))?;
    for c in curves {
        let mut r = lead(c);
        let settings = c.settings.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        r.extend([
            settings,
            c.points.len().to_string(),
            c.failed_points().to_string(),
            opt(c.tsr_max),
            opt(c.nonmonotonicity),
            opt(c.vanish.as_ref().map(|v| v.time)),
            opt(c.vanish.as_ref().map(|v| v.bracket.0)),
            opt(c.vanish.as_ref().map(|v| v.bracket.1)),
            c.error.clone().unwrap_or_default(),
        ]);
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(files)
}

#[derive(Serialize)]
struct CurveStats<'a> {
    index: usize,
    parameters: &'a [(String, String)],
    settings: &'a [usize],
    solves: usize,
    failed: usize,
    total_iterations: usize,
    max_iterations: usize,
    max_gap: Option<f64>,
    nonmonotonicity: Option<f64>,
    vanish: Option<&'a Vanish>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    software: &'static str,
    version: &'static str,
    model: &'static str,
    time_unit: &'static str,
    config: &'a ExperimentConfig,
    mub_check: &'a MubReport,
    workers: usize,
    files: Vec<String>,
    curves: Vec<CurveStats<'a>>,
    wall_time_s: f64,
}

/// Runs every curve of the sweep and writes `tsr.csv`, `negativity.csv`,
/// `probabilities.csv`, `summary.csv` and `manifest.json` into the output
/// directory. Failed solves are recorded per point and do not stop the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    let curves_cfg = cfg.curves()?;
    let (mubs, mub_report) = checked_mubs()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let curves: Vec<CurveResult> = pool.install(|| {
        curves_cfg.iter().enumerate().map(|(k, (point, c))| run_curve(k, point, c, &mubs)).collect()
    });

    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    let axes: Vec<String> = cfg.sweep.iter().map(|a| a.parameter.clone()).collect();
    let mut files = write_csvs(&dir, &axes, &curves)?;

    let stats = curves
        .iter()
        .map(|c| CurveStats {
            index: c.index,
            parameters: &c.parameters,
            settings: &c.settings,
            solves: c.points.len(),
            failed: c.failed_points(),
            total_iterations: c.points.iter().map(|p| p.iterations).sum(),
            max_iterations: c.points.iter().map(|p| p.iterations).max().unwrap_or(0),
            max_gap: c.points.iter().filter(|p| p.tsr.is_some()).map(|p| p.gap).reduce(f64::max),
            nonmonotonicity: c.nonmonotonicity,
            vanish: c.vanish.as_ref(),
            error: c.error.as_deref(),
        })
        .collect();
    let wall_time_s = start.elapsed().as_secs_f64();
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        model: cfg.model.name(),
        time_unit: cfg.time.unit.name(),
        config: cfg,
        mub_check: &mub_report,
        workers: pool.current_num_threads(),
        files: files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        curves: stats,
        wall_time_s,
    };
    let path = dir.join(MANIFEST);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(path);
    Ok(RunReport { dir, time_unit: cfg.time.unit, curves, files, wall_time_s })
}
