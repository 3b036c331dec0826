//! The `self-test` suite: basis verification, solver checks against known
//! values, and invariant spot checks on the dynamics.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::dynamics::{
    build_coupled_qubit_liouvillian, coupled_qubit_label, CoupledQubitParams, Method, QUBIT1, QUBIT2,
};
use crate::measures::{negativity, simplified_rp_state, SimplifiedRpParams};
use crate::qmat::{c, ComplexMatrix, DensityMatrix, SpaceLabel, ZERO};
use crate::steering::{
    build_mubs_d4, enumerate_strategies, evolve_assemblage, initial_assemblage, mub_d4_vectors, verify_mub, Assemblage, MeasurementSet, MubTable,
};
use crate::tsr::{assemble_problem, dual_certificate_check, solve, tsr_with, SdpOptions, SolveStatus};

/// Deliberate faults for demonstrating that the suite catches them.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CheckOptions {
    /// build the bases from the table as printed, with its broken vector
    pub corrupt_mub: bool,
    /// cap on interior-point iterations for every solve
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Validation,
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub kind: FailureKind,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// 0 if every check passed; otherwise 1 when a validation check failed and
/// 2 when only numerical checks did.
pub fn suite_exit_code(outcomes: &[CheckOutcome]) -> i32 {
    let failed = |k: FailureKind| outcomes.iter().any(|o| !o.pass && o.kind == k);
    if failed(FailureKind::Validation) {
        1
    } else if failed(FailureKind::Numerical) {
        2
    } else {
        0
    }
}

type Check = fn(&Ctx) -> std::result::Result<String, String>;

struct Ctx {
    mubs: MeasurementSet,
    opts: SdpOptions,
}

impl Ctx {
    fn tsr(&self, asm: &Assemblage) -> std::result::Result<f64, String> {
        tsr_with(asm, &self.opts).map(|(v, _)| v).map_err(|e| e.to_string())
    }

    fn mub_assemblage(&self, n: usize) -> std::result::Result<Assemblage, String> {
        let meas = self.mubs.first(n).map_err(|e| e.to_string())?;
        initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &coupled_qubit_label(), &[QUBIT1, QUBIT2])
            .map_err(|e| e.to_string())
    }
}

fn near(name: &str, got: f64, want: f64, tol: f64) -> std::result::Result<String, String> {
    let msg = format!("{name} = {got:.10} (expected {want:.10}, tol {tol:e})");
    if (got - want).abs() < tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn mub_verify(ctx: &Ctx) -> std::result::Result<String, String> {
    let r = verify_mub(&ctx.mubs);
    if r.pass {
        Ok(r.to_string())
    } else {
        Err(r.to_string())
    }
}

fn strategy_table(_: &Ctx) -> std::result::Result<String, String> {
    let s = enumerate_strategies(5, 4).map_err(|e| e.to_string())?;
    for x in 0..5 {
        for a in 0..4 {
            let cover = (0..s.len()).filter(|&l| s.d(l, a, x)).count();
            if cover != 256 {
                return Err(format!("outcome {a} of setting {x} covered by {cover} strategies, expected 256"));
            }
        }
    }
    Ok(format!("{} strategies, uniform covering 256", s.len()))
}

fn pauli_pair(ctx: &Ctx) -> std::result::Result<String, String> {
    let (o, h) = (c(1.0, 0.0), c(FRAC_1_SQRT_2, 0.0));
    let meas = MeasurementSet::from_bases(vec![vec![vec![o, ZERO], vec![ZERO, o]], vec![vec![h, h], vec![h, -h]]])
        .map_err(|e| e.to_string())?;
    let label = SpaceLabel::new([("q", 2)]).map_err(|e| e.to_string())?;
    let asm = initial_assemblage(&DensityMatrix::maximally_mixed(2), &meas, &label, &["q"]).map_err(|e| e.to_string())?;
    near("TSR(Pauli X/Z on I/2)", ctx.tsr(&asm)?, 3.0 - 2.0 * 2f64.sqrt(), 1e-6)
}

/// Solves two MUBs on I/4 directly and checks status, gap and certificate.
fn duality_gap(ctx: &Ctx) -> std::result::Result<String, String> {
    let asm = ctx.mub_assemblage(2)?;
    let strategies = enumerate_strategies(2, 4).map_err(|e| e.to_string())?;
    let problem = assemble_problem(&asm, strategies).map_err(|e| e.to_string())?;
    let sol = solve(&problem, &ctx.opts);
    let cert = dual_certificate_check(&sol, &problem);
    let detail = format!(
        "status {}, {} iterations, gap {:.2e}, certificate residual {:.2e}",
        sol.status, sol.iterations, sol.gap, cert.feasibility_residual
    );
    if sol.status == SolveStatus::Optimal && sol.gap.abs() < 1e-7 && cert.pass {
        near("TSR(2 MUBs on I/4)", sol.primal_value, 1.0 / 3.0, 1e-6).map(|m| format!("{m}; {detail}"))
    } else {
        Err(detail)
    }
}

fn mub_values(ctx: &Ctx) -> std::result::Result<String, String> {
    let mut parts = Vec::new();
    for (n, want) in [(1, 0.0), (3, 0.5), (4, 0.6)] {
        parts.push(near(&format!("TSR({n} MUBs)"), ctx.tsr(&ctx.mub_assemblage(n)?)?, want, 1e-6)?);
    }
    Ok(parts.join("; "))
}

fn unsteerable_floor(ctx: &Ctx) -> std::result::Result<String, String> {
    let asm = ctx.mub_assemblage(3)?;
    let flat = asm
        .map_members(|m| Ok(ComplexMatrix::identity(4).scale_real(m.trace().re / 4.0)))
        .map_err(|e| e.to_string())?;
    let v = ctx.tsr(&flat)?;
    if v < 1e-7 {
        Ok(format!("fully depolarized three-setting assemblage gives {v:e}"))
    } else {
        Err(format!("fully depolarized assemblage gives {v:e}"))
    }
}

fn depolarizing_monotone(ctx: &Ctx) -> std::result::Result<String, String> {
    let asm = ctx.mub_assemblage(2)?;
    let mut prev = ctx.tsr(&asm)?;
    let mut vals = vec![prev];
    for p in [0.1, 0.3, 0.6] {
        let noisy = asm
            .map_members(|m| Ok(&m.scale_real(1.0 - p) + &ComplexMatrix::identity(4).scale_real(p * m.trace().re / 4.0)))
            .map_err(|e| e.to_string())?;
        let v = ctx.tsr(&noisy)?;
        vals.push(v);
        if v > prev + 1e-6 {
            return Err(format!("TSR rose under depolarization: {vals:?}"));
        }
        prev = v;
    }
    Ok(format!("TSR under p = 0, 0.1, 0.3, 0.6: {vals:.6?}"))
}

fn coupled_consistency(_: &Ctx) -> std::result::Result<String, String> {
    let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma: 1.0 }).map_err(|e| e.to_string())?;
    let meas = build_mubs_d4().first(3).map_err(|e| e.to_string())?;
    let asm0 = initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &coupled_qubit_label(), &[QUBIT1, QUBIT2])
        .map_err(|e| e.to_string())?;
    let series = evolve_assemblage(&asm0, &l, &[0.0, 0.5, 2.0], None, Method::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for asm in &series {
        worst = worst.max(asm.max_signaling());
        for x in 0..asm.n_settings() {
            for a in 0..asm.n_outcomes() {
                worst = worst.max((asm.probability(x, a) - 0.25).abs());
            }
        }
    }
    if worst < 1e-8 {
        Ok(format!("no-signalling and p(a|x) = 1/4 hold to {worst:.1e}"))
    } else {
        Err(format!("deviation {worst:e}"))
    }
}

fn singlet_negativity(_: &Ctx) -> std::result::Result<String, String> {
    let rho = simplified_rp_state(&SimplifiedRpParams { a: 0.5, a_z: 1e5 }, 0.0).map_err(|e| e.to_string())?;
    let label = crate::measures::simplified_rp_label();
    let pair = crate::qmat::partial_trace(rho.matrix(), &label, &["electron1", "electron2"]).map_err(|e| e.to_string())?;
    let pair = DensityMatrix::new(pair).map_err(|e| e.to_string())?;
    let el = SpaceLabel::new([("electron1", 2), ("electron2", 2)]).map_err(|e| e.to_string())?;
    near("N(singlet)", negativity(&pair, &el, "electron2").map_err(|e| e.to_string())?, 0.5, 1e-12)
}

const CHECKS: [(&str, FailureKind, Check); 9] = [
    ("mub-verify", FailureKind::Validation, mub_verify),
    ("strategy-table", FailureKind::Validation, strategy_table),
    ("duality-gap", FailureKind::Numerical, duality_gap),
    ("tsr-pauli-pair", FailureKind::Numerical, pauli_pair),
    ("tsr-mub-values", FailureKind::Numerical, mub_values),
    ("unsteerable-floor", FailureKind::Numerical, unsteerable_floor),
    ("depolarizing-monotone", FailureKind::Numerical, depolarizing_monotone),
    ("coupled-qubit-consistency", FailureKind::Numerical, coupled_consistency),
    ("singlet-negativity", FailureKind::Numerical, singlet_negativity),
];

pub fn check_suite(opts: CheckOptions) -> Vec<CheckOutcome> {
    let table = if opts.corrupt_mub { MubTable::AsPrinted } else { MubTable::Corrected };
    let mubs = MeasurementSet::from_bases(mub_d4_vectors(table)).expect("table is well-formed");
    let mut sdp = SdpOptions::default();
    if let Some(n) = opts.max_iterations {
        sdp.max_iterations = n;
    }
    let ctx = Ctx { mubs, opts: sdp };
    CHECKS
        .iter()
        .map(|&(name, kind, f)| {
            let (pass, detail) = match f(&ctx) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, pass, kind, detail }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes() {
        let out = check_suite(CheckOptions::default());
        for o in &out {
            assert!(o.pass, "{o}");
        }
        assert_eq!(suite_exit_code(&out), 0);
    }

    #[test]
    fn corrupted_table_fails_at_verification() {
        let out = check_suite(CheckOptions { corrupt_mub: true, ..Default::default() });
        let mub = out.iter().find(|o| o.name == "mub-verify").unwrap();
        assert!(!mub.pass);
        assert_eq!(suite_exit_code(&out), 1);
    }

    #[test]
    fn iteration_cap_fails_at_duality_gap() {
        let out = check_suite(CheckOptions { max_iterations: Some(1), ..Default::default() });
        let gap = out.iter().find(|o| o.name == "duality-gap").unwrap();
        assert!(!gap.pass && gap.detail.contains("iteration-limit"), "{gap}");
        assert!(out.iter().find(|o| o.name == "mub-verify").unwrap().pass);
        assert_eq!(suite_exit_code(&out), 2);
    }
}
