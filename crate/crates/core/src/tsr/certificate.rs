use serde::Serialize;

use super::{SdpProblem, SdpSolution};
use crate::qmat::{eigh_unchecked, ComplexMatrix};

pub const CERTIFICATE_TOL: f64 = 1e-7;

/// Weak-duality check recomputed from the stored multipliers alone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    /// Σ ⟨F_ax, σ_ax⟩ − 1, a lower bound on the robustness when feasible
    pub dual_value: f64,
    pub primal_value: f64,
    /// max of Hermiticity defects and negative parts of F_ax and I − Σ_x F_{λ(x)|x}
    pub feasibility_residual: f64,
    /// all multipliers vanish, so the bound is the trivial −1
    pub vacuous: bool,
    pub pass: bool,
}

fn negative_part(m: &ComplexMatrix) -> f64 {
    let (vals, _) = eigh_unchecked(&m.symmetrized());
    (-vals[0]).max(0.0).max(m.hermiticity_defect())
}

pub fn dual_certificate_check(sol: &SdpSolution, problem: &SdpProblem) -> CertificateReport {
    let f = &sol.multipliers;
    let d = problem.dim();
    let mut residual = 0.0_f64;
    if f.len() != problem.n_constraints() || f.iter().any(|m| m.rows() != d || m.cols() != d) {
        residual = f64::INFINITY;
    } else {
        for m in f {
            residual = residual.max(negative_part(m));
        }
        let strategies = problem.strategies();
        for l in 0..strategies.len() {
            let mut z = ComplexMatrix::identity(d);
            for (x, &a) in strategies.assignment(l).iter().enumerate() {
                z -= &f[problem.group(x, a)];
            }
            residual = residual.max(negative_part(&z));
        }
    }
    let dual_value = if residual.is_finite() {
        (0..problem.n_constraints()).map(|g| f[g].inner_real(problem.datum(g))).sum::<f64>() - 1.0
    } else {
        f64::NAN
    };
    let vacuous = f.iter().all(|m| m.max_abs() == 0.0);
    CertificateReport {
        dual_value,
        primal_value: sol.primal_value,
        feasibility_residual: residual,
        vacuous,
        pass: residual < CERTIFICATE_TOL && dual_value <= sol.primal_value + CERTIFICATE_TOL,
    }
}
