//! Temporal steering robustness: the minimum noise weight that makes an
//! assemblage admit a hidden-state model, as a semidefinite program over
//! deterministic strategies.

mod certificate;
mod coords;
mod ipm;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use certificate::{dual_certificate_check, CertificateReport};

use crate::error::{Error, Result};
use crate::qmat::{clip_psd, ComplexMatrix};
use crate::steering::{enumerate_strategies, Assemblage, DeterministicStrategySet};

/// Values in [−1e-7, 1e-9] are numerical zeros.
pub const ZERO_FLOOR: f64 = 1e-9;
pub const NEGATIVE_FLOOR: f64 = -1e-7;

#[derive(Clone, Debug)]
pub struct SdpProblem {
    dim: usize,
    n_settings: usize,
    n_outcomes: usize,
    strategies: DeterministicStrategySet,
    data: Vec<ComplexMatrix>,
}

impl SdpProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    /// One σ_λ block per deterministic strategy.
    pub fn n_blocks(&self) -> usize {
        self.strategies.len()
    }

    /// One matrix inequality per (a, x).
    pub fn n_constraints(&self) -> usize {
        self.n_settings * self.n_outcomes
    }

    pub fn strategies(&self) -> &DeterministicStrategySet {
        &self.strategies
    }

    pub fn group(&self, x: usize, a: usize) -> usize {
        x * self.n_outcomes + a
    }

    /// σ_{a|x} as stored in the problem (after clipping).
    pub fn member(&self, x: usize, a: usize) -> &ComplexMatrix {
        &self.data[self.group(x, a)]
    }

    pub(crate) fn datum(&self, g: usize) -> &ComplexMatrix {
        &self.data[g]
    }

    /// Σ_λ D_λ(a|x) σ_λ − σ_{a|x} for given blocks.
    pub fn constraint_block(&self, blocks: &[ComplexMatrix], x: usize, a: usize) -> ComplexMatrix {
        let mut s = -self.member(x, a);
        for (l, block) in blocks.iter().enumerate() {
            if self.strategies.d(l, a, x) {
                s += block;
            }
        }
        s
    }
}

pub fn assemble_problem(asm: &Assemblage, strategies: DeterministicStrategySet) -> Result<SdpProblem> {
    if strategies.n_settings() != asm.n_settings() || strategies.n_outcomes() != asm.n_outcomes() {
        return Err(Error::dims(format!(
            "strategies cover {} settings x {} outcomes, assemblage has {} x {}",
            strategies.n_settings(),
            strategies.n_outcomes(),
            asm.n_settings(),
            asm.n_outcomes()
        )));
    }
    Ok(SdpProblem {
        dim: asm.dim(),
        n_settings: asm.n_settings(),
        n_outcomes: asm.n_outcomes(),
        strategies,
        data: asm.members().iter().map(clip_psd).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdpOptions {
    pub max_iterations: usize,
    /// Target for |primal − dual| / (1 + |primal| + |dual|).
    pub gap_tol: f64,
    /// Target for the primal and dual residual norms, relative to 1 + data norm.
    pub feasibility_tol: f64,
    /// If the targets cannot be reached (stalled factorization or iteration
    /// cap), an iterate within these looser bounds still counts as optimal.
    pub accept_gap_tol: f64,
    pub accept_feasibility_tol: f64,
    /// fraction of the distance to the cone boundary taken per step
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gap_tol: 1e-10,
            feasibility_tol: 1e-9,
            accept_gap_tol: 1e-8,
            accept_feasibility_tol: 1e-9,
            step_fraction: 0.98,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    InfeasibleNumerics,
    IterationLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::InfeasibleNumerics => "infeasible-numerics",
            SolveStatus::IterationLimit => "iteration-limit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Σ_λ tr σ_λ − 1
    pub primal_value: f64,
    /// Σ ⟨F_ax, σ_ax⟩ − 1
    pub dual_value: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// ‖Σ_λ D σ_λ − S − σ‖ over all constraints, in Hermitian coordinates
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Σ ⟨X, Z⟩ over all cone blocks
    pub complementarity: f64,
    /// σ_λ, one per strategy
    pub primal_blocks: Vec<ComplexMatrix>,
    /// Slack of each constraint, indexed like the assemblage members.
    pub slacks: Vec<ComplexMatrix>,
    /// F_{a|x}, indexed like the assemblage members.
    pub multipliers: Vec<ComplexMatrix>,
    pub wall_time: Duration,
}

/// One-line record of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl SdpSolution {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            value: self.primal_value,
            dual_value: self.dual_value,
            gap: self.gap,
            status: self.status,
            iterations: self.iterations,
            wall_time_s: self.wall_time.as_secs_f64(),
        }
    }
}

impl SolveSummary {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    ipm::solve(problem, opts)
}

/// Maps numerical zeros to 0; values below −1e-7 are an error.
pub fn clamp_value(v: f64) -> Option<f64> {
    if v < NEGATIVE_FLOOR || !v.is_finite() {
        None
    } else if v <= ZERO_FLOOR {
        Some(0.0)
    } else {
        Some(v)
    }
}

/// Solves for every strategy and returns the clamped value with the full
/// solution. Non-optimal statuses are errors.
pub fn tsr_with(asm: &Assemblage, opts: &SdpOptions) -> Result<(f64, SdpSolution)> {
    let strategies = enumerate_strategies(asm.n_settings(), asm.n_outcomes())?;
    let problem = assemble_problem(asm, strategies)?;
    let sol = solve(&problem, opts);
    let failed = |sol: &SdpSolution| Error::Solver { status: sol.status.to_string(), iterations: sol.iterations, gap: sol.gap };
    if sol.status != SolveStatus::Optimal {
        return Err(failed(&sol));
    }
    let value = clamp_value(sol.primal_value).ok_or_else(|| failed(&sol))?;
    Ok((value, sol))
}

pub fn tsr(asm: &Assemblage) -> Result<f64> {
    Ok(tsr_with(asm, &SdpOptions::default())?.0)
}
