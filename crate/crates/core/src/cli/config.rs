//! Experiment configuration: one TOML file, with `key=value` overrides that
//! address the same dotted keys.
//!
//! ```toml
//! model = "radical-pair"        # coupled-qubits | radical-pair | simplified-rp
//! settings = [1, 2]             # basis indices, 1..=5
//! workers = 0                   # 0 = one per core
//!
//! [time]
//! start = 0.0
//! stop = 70.0
//! points = 141
//! unit = "microseconds"         # inverse-gamma | inverse-g | seconds | microseconds
//!
//! [radical_pair]
//! theta = 0.0                   # radians
//! hyperfine = "axial"           # axial | half-transverse
//! a_z = 1e5                     # rad/s
//! reduction = "trace-out"       # trace-out | project-and-renormalize
//!
//! [integrator]
//! method = "exponential"        # exponential | runge-kutta (uses rtol, atol, max_steps)
//!
//! [[sweep]]
//! parameter = "radical_pair.theta"
//! values = [0.0, 0.7853981633974483, 1.5707963267948966]
//!
//! [output]
//! dir = "out/radical-pair"
//! ```
//!
//! Every section is optional except `model` and `time`; omitted fields take
//! the defaults below. A sweep axis names any model, `settings`, solver or
//! integrator key; one curve is computed per point of the Cartesian product
//! of all axes, first axis slowest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    CoupledQubitParams, HyperfineTensor, IntegratorOptions, Method, RadicalPairParams, ReductionMode,
};
use crate::error::{Error, Result};
use crate::measures::SimplifiedRpParams;
use crate::tsr::SdpOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    CoupledQubits,
    RadicalPair,
    SimplifiedRp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::CoupledQubits => "coupled-qubits",
            ModelKind::RadicalPair => "radical-pair",
            ModelKind::SimplifiedRp => "simplified-rp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    /// multiples of 1/γ (coupled qubits)
    InverseGamma,
    /// multiples of 1/g (coupled qubits)
    InverseG,
    Seconds,
    Microseconds,
}

impl TimeUnit {
    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::InverseGamma => "inverse-gamma",
            TimeUnit::InverseG => "inverse-g",
            TimeUnit::Seconds => "seconds",
            TimeUnit::Microseconds => "microseconds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub unit: TimeUnit,
}

impl TimeGrid {
    /// Evenly spaced samples in the declared unit, endpoints included.
    pub fn samples(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| if k + 1 == n { self.stop } else { self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupledQubitsConfig {
    /// exchange coupling, sets the frequency unit
    pub g: f64,
    /// decay rate in the same unit as g
    pub gamma: f64,
}

impl Default for CoupledQubitsConfig {
    fn default() -> Self {
        Self { g: 1.0, gamma: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperfineShape {
    /// diag(0, 0, A_z)
    Axial,
    /// diag(A_z/2, A_z/2, A_z)
    HalfTransverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadicalPairConfig {
    /// tesla
    pub b0: f64,
    pub theta: f64,
    pub phi: f64,
    pub hyperfine: HyperfineShape,
    /// rad/s
    pub a_z: f64,
    /// 1/s
    pub kappa: f64,
    /// 1/s
    pub gamma_dephasing: f64,
    pub reduction: ReductionMode,
}

impl Default for RadicalPairConfig {
    fn default() -> Self {
        let p = RadicalPairParams::default();
        Self {
            b0: p.b0,
            theta: p.theta,
            phi: p.phi,
            hyperfine: HyperfineShape::Axial,
            a_z: p.hyperfine.az,
            kappa: p.kappa,
            gamma_dephasing: p.gamma_dephasing,
            reduction: ReductionMode::TraceOut,
        }
    }
}

impl RadicalPairConfig {
    pub fn params(&self) -> RadicalPairParams {
        let hyperfine = match self.hyperfine {
            HyperfineShape::Axial => HyperfineTensor::axial(self.a_z),
            HyperfineShape::HalfTransverse => HyperfineTensor::half_transverse(self.a_z),
        };
        RadicalPairParams {
            b0: self.b0,
            theta: self.theta,
            phi: self.phi,
            hyperfine,
            kappa: self.kappa,
            gamma_dephasing: self.gamma_dephasing,
            ..RadicalPairParams::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplifiedRpConfig {
    pub a: f64,
    /// rad/s
    pub a_z: f64,
}

impl Default for SimplifiedRpConfig {
    fn default() -> Self {
        Self { a: 0.5, a_z: 1e5 }
    }
}

impl SimplifiedRpConfig {
    pub fn params(&self) -> SimplifiedRpParams {
        SimplifiedRpParams { a: self.a, a_z: self.a_z }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    RungeKutta,
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: MethodKind,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let o = IntegratorOptions::default();
        // Over tens of μs of radical-pair precession the adaptive integrator's
        // accumulated error breaks no-signalling at the 1e-8 level; the
        // exponential stays at round-off. rtol/atol only apply to runge-kutta.
        Self { method: MethodKind::Exponential, rtol: o.rtol, atol: o.atol, max_steps: o.max_steps }
    }
}

impl IntegratorConfig {
    pub fn method(&self) -> Method {
        match self.method {
            MethodKind::RungeKutta => {
                Method::RungeKutta(IntegratorOptions { rtol: self.rtol, atol: self.atol, max_steps: self.max_steps })
            }
            MethodKind::Exponential => Method::Exponential,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// TSR below this counts as vanished
    pub vanish_threshold: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), vanish_threshold: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// dotted config key, e.g. `coupled_qubits.gamma` or `settings`
    pub parameter: String,
    pub values: Vec<toml::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default = "default_settings")]
    pub settings: Vec<usize>,
    #[serde(default)]
    pub workers: usize,
    pub time: TimeGrid,
    #[serde(default)]
    pub coupled_qubits: CoupledQubitsConfig,
    #[serde(default)]
    pub radical_pair: RadicalPairConfig,
    #[serde(default)]
    pub simplified_rp: SimplifiedRpConfig,
    #[serde(default)]
    pub solver: SdpOptions,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
}

fn default_settings() -> Vec<usize> {
    vec![1, 2]
}

/// Keys a sweep may not touch: they shape the run rather than a curve.
const UNSWEEPABLE: [&str; 5] = ["model", "time", "output", "sweep", "workers"];

impl ExperimentConfig {
    /// Defaults reproducing one figure per model: decay rates γ ∈ {g, 4g, 9g}
    /// for the coupled qubits, θ ∈ {0, π/4, π/2} for the radical pair and
    /// a ∈ {0, 0.25, 0.4, 0.5, 1} for the simplified model.
    pub fn preset(model: ModelKind) -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
        let num = |v: &[f64]| v.iter().map(|&x| toml::Value::Float(x)).collect();
        let (time, sweep) = match model {
            ModelKind::CoupledQubits => (
                TimeGrid { start: 0.0, stop: 5.0, points: 101, unit: TimeUnit::InverseGamma },
                SweepAxis { parameter: "coupled_qubits.gamma".into(), values: num(&[1.0, 4.0, 9.0]) },
            ),
            ModelKind::RadicalPair => (
                TimeGrid { start: 0.0, stop: 70.0, points: 141, unit: TimeUnit::Microseconds },
                SweepAxis { parameter: "radical_pair.theta".into(), values: num(&[0.0, FRAC_PI_4, FRAC_PI_2]) },
            ),
            ModelKind::SimplifiedRp => (
                TimeGrid { start: 0.0, stop: 10.0 * PI / 1e5 * 1e6, points: 401, unit: TimeUnit::Microseconds },
                SweepAxis { parameter: "simplified_rp.a".into(), values: num(&[0.0, 0.25, 0.4, 0.5, 1.0]) },
            ),
        };
        Self {
            model,
            settings: default_settings(),
            workers: 0,
            time,
            coupled_qubits: CoupledQubitsConfig::default(),
            radical_pair: RadicalPairConfig::default(),
            simplified_rp: SimplifiedRpConfig::default(),
            solver: SdpOptions::default(),
            integrator: IntegratorConfig::default(),
            output: OutputConfig { dir: PathBuf::from("out").join(model.name()), ..OutputConfig::default() },
            sweep: vec![sweep],
        }
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        Self::from_table(table, overrides)
    }

    /// Reads a TOML config, or the `config` entry of a run manifest when the
    /// file ends in `.json`.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value = serde_json::from_str(&text)?;
            let cfg = manifest
                .get("config")
                .ok_or_else(|| Error::config(path.display().to_string(), "manifest has no `config` entry"))?;
            let cfg: Self = serde_json::from_value(cfg.clone())
                .map_err(|e| Error::config(format!("{}: config", path.display()), e.to_string()))?;
            return cfg.with_overrides(overrides);
        }
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config { field, message } if field == "<file>" => Error::config(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        Self::from_table(self.to_table(), overrides)
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn from_table(mut table: toml::Table, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            let (key, value) = parse_override(o)?;
            set_key(&mut table, &key, value)?;
        }
        let cfg = Self::deserialize(toml::Value::Table(table)).map_err(|e| {
            let msg = e.to_string();
            Error::config(field_of(&msg).unwrap_or("<config>"), msg.trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.settings.is_empty() {
            return Err(Error::config("settings", "at least one basis index is required"));
        }
        if let Some(&bad) = self.settings.iter().find(|&&s| !(1..=5).contains(&s)) {
            return Err(Error::config("settings", format!("basis index {bad} outside 1..=5")));
        }
        let mut seen = self.settings.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.settings.len() {
            return Err(Error::config("settings", "basis indices must be distinct"));
        }
        let t = &self.time;
        if t.points < 2 {
            return Err(Error::config("time.points", format!("need at least 2 points, got {}", t.points)));
        }
        if !(t.start >= 0.0) || !t.start.is_finite() {
            return Err(Error::config("time.start", format!("must be finite and non-negative, got {}", t.start)));
        }
        if !(t.stop > t.start) || !t.stop.is_finite() {
            return Err(Error::config("time.stop", format!("must be finite and above start, got {}", t.stop)));
        }
        let unit_ok = match self.model {
            ModelKind::CoupledQubits => true,
            _ => matches!(t.unit, TimeUnit::Seconds | TimeUnit::Microseconds),
        };
        if !unit_ok {
            return Err(Error::config("time.unit", format!("{} is not a time unit for {}", t.unit.name(), self.model.name())));
        }
        if !(self.output.vanish_threshold > 0.0) {
            return Err(Error::config("output.vanish_threshold", "must be positive"));
        }
        let s = &self.solver;
        if s.max_iterations == 0 {
            return Err(Error::config("solver.max_iterations", "must be at least 1"));
        }
        for (name, v) in [
            ("solver.gap_tol", s.gap_tol),
            ("solver.feasibility_tol", s.feasibility_tol),
            ("solver.accept_gap_tol", s.accept_gap_tol),
            ("solver.accept_feasibility_tol", s.accept_feasibility_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::config(name, format!("must be positive, got {v}")));
            }
        }
        if !(s.step_fraction > 0.0 && s.step_fraction < 1.0) {
            return Err(Error::config("solver.step_fraction", "must lie in (0, 1)"));
        }
        if self.integrator.method == MethodKind::RungeKutta && !(self.integrator.rtol > 0.0 && self.integrator.atol > 0.0) {
            return Err(Error::config("integrator", "rtol and atol must be positive"));
        }
        let check = |field: &str, r: Result<()>| {
            r.map_err(|e| Error::config(field, e.to_string().trim_start_matches("invalid parameter: ").to_string()))
        };
        match self.model {
            ModelKind::CoupledQubits => {
                let c = &self.coupled_qubits;
                check("coupled_qubits", CoupledQubitParams { g: c.g, gamma: c.gamma }.validate())?;
                if t.unit == TimeUnit::InverseGamma && c.gamma == 0.0 {
                    return Err(Error::config("time.unit", "inverse-gamma needs a non-zero coupled_qubits.gamma"));
                }
            }
            ModelKind::RadicalPair => {
                check("radical_pair", self.radical_pair.params().validate())?;
            }
            ModelKind::SimplifiedRp => check("simplified_rp", self.simplified_rp.params().validate())?,
        }
        let mut names = Vec::new();
        for (k, axis) in self.sweep.iter().enumerate() {
            let field = format!("sweep[{k}]");
            let root = axis.parameter.split('.').next().unwrap_or("");
            if UNSWEEPABLE.contains(&root) {
                return Err(Error::config(field, format!("`{}` cannot be swept", axis.parameter)));
            }
            if axis.values.is_empty() {
                return Err(Error::config(field, "needs at least one value"));
            }
            if names.contains(&axis.parameter) {
                return Err(Error::config(field, format!("`{}` is swept twice", axis.parameter)));
            }
            names.push(axis.parameter.clone());
        }
        Ok(())
    }

    /// One resolved config per sweep point, each validated, with the swept
    /// values in axis order.
    pub fn curves(&self) -> Result<Vec<(Vec<(String, toml::Value)>, ExperimentConfig)>> {
        let mut base = self.clone();
        base.sweep.clear();
        let mut out = vec![(Vec::new(), base.to_table())];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(out.len() * axis.values.len());
            for (point, table) in &out {
                for v in &axis.values {
                    let mut t = table.clone();
                    set_key(&mut t, &axis.parameter, v.clone())?;
                    let mut p = point.clone();
                    p.push((axis.parameter.clone(), v.clone()));
                    next.push((p, t));
                }
            }
            out = next;
        }
        out.into_iter()
            .map(|(point, table)| {
                let cfg = Self::from_table(table, &[]).map_err(|e| match e {
                    Error::Config { field, message } => Error::config(
                        format!("sweep point {}", render_point(&point)),
                        format!("{field}: {message}"),
                    ),
                    other => other,
                })?;
                Ok((point, cfg))
            })
            .collect()
    }
}

pub(crate) fn render_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Array(items) => items.iter().map(render_value).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn render_point(point: &[(String, toml::Value)]) -> String {
    point.iter().map(|(k, v)| format!("{k}={}", render_value(v))).collect::<Vec<_>>().join(", ")
}

/// `key=value`, with the value read as a TOML literal or else as a bare string.
fn parse_override(text: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(text, "override key is empty"));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn set_key(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut cur = table;
    for (depth, part) in parts.iter().enumerate() {
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(parts[..=depth].join("."), "is not a section"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Pulls the offending key out of a toml/serde message when it names one.
fn field_of(msg: &str) -> Option<&str> {
    for marker in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            return rest.split('`').next();
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
model = "coupled-qubits"
[time]
start = 0.0
stop = 2.0
points = 5
unit = "inverse-gamma"
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.settings, vec![1, 2]);
        assert_eq!(cfg.coupled_qubits, CoupledQubitsConfig::default());
        assert_eq!(cfg.time.samples(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn overrides_address_config_keys() {
        let o = ["coupled_qubits.gamma=4".to_string(), "settings=[1,2,3]".into(), "output.dir=elsewhere".into()];
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &o).unwrap();
        assert_eq!(cfg.coupled_qubits.gamma, 4.0);
        assert_eq!(cfg.settings, vec![1, 2, 3]);
        assert_eq!(cfg.output.dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let field = |text: &str, o: &[&str]| {
            let o: Vec<String> = o.iter().map(|s| s.to_string()).collect();
            match ExperimentConfig::from_toml_str(text, &o) {
                Err(Error::Config { field, message }) => (field, message),
                other => panic!("expected a config error, got {other:?}"),
            }
        };
        assert_eq!(field(MINIMAL, &["settings=[1,6]"]).0, "settings");
        assert_eq!(field(MINIMAL, &["time.points=1"]).0, "time.points");
        assert_eq!(field(MINIMAL, &["coupled_qubits.gama=1"]).0, "gama");
        assert_eq!(field(MINIMAL, &["time.unit=seconds", "model=radical-pair", "time.unit=fortnights"]).0, "fortnights");
        assert_eq!(field(MINIMAL, &["model=radical-pair"]).0, "time.unit");
        // syntax errors carry the line
        let (_, msg) = field("model = \"coupled-qubits\"\n[time\n", &[]);
        assert!(msg.contains("line 2"), "{msg}");
        let (_, msg) = field(&format!("{MINIMAL}\n[[sweep]]\nparameter = \"time.stop\"\nvalues = [1.0]\n"), &[]);
        assert!(msg.contains("cannot be swept"), "{msg}");
    }

    #[test]
    fn sweeps_expand_in_order() {
        let text = format!(
            "{MINIMAL}\n[[sweep]]\nparameter = \"coupled_qubits.gamma\"\nvalues = [1, 4.0]\n\
             [[sweep]]\nparameter = \"settings\"\nvalues = [[1, 2], [1, 2, 3]]\n"
        );
        let cfg = ExperimentConfig::from_toml_str(&text, &[]).unwrap();
        let curves = cfg.curves().unwrap();
        assert_eq!(curves.len(), 4);
        let got: Vec<(f64, usize)> = curves.iter().map(|(_, c)| (c.coupled_qubits.gamma, c.settings.len())).collect();
        assert_eq!(got, vec![(1.0, 2), (1.0, 3), (4.0, 2), (4.0, 3)]);
        assert_eq!(render_value(&curves[1].0[1].1), "1 2 3");
        assert!(curves.iter().all(|(_, c)| c.sweep.is_empty()));

        let bad = format!("{MINIMAL}\n[[sweep]]\nparameter = \"coupled_qubits.gamma\"\nvalues = [1, -2]\n");
        let err = ExperimentConfig::from_toml_str(&bad, &[]).unwrap().curves().unwrap_err();
        assert!(err.to_string().contains("coupled_qubits.gamma=-2"), "{err}");
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for model in [ModelKind::CoupledQubits, ModelKind::RadicalPair, ModelKind::SimplifiedRp] {
            let cfg = ExperimentConfig::preset(model);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), &[]).unwrap();
            assert_eq!(back, cfg);
        }
    }
}
