//! The dual multipliers F_{a|x} certify a lower bound on the TSR
//! independently of the primal solution. Checks the certificate, then
//! breaks it on purpose.

use temporal_steering::dynamics::{coupled_qubit_label, QUBIT1, QUBIT2};
use temporal_steering::qmat::{ComplexMatrix, DensityMatrix};
use temporal_steering::steering::{build_mubs_d4, enumerate_strategies, initial_assemblage};
use temporal_steering::tsr::{assemble_problem, dual_certificate_check, solve, SdpOptions};

fn main() -> temporal_steering::Result<()> {
    let meas = build_mubs_d4().first(2)?;
    let asm = initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &coupled_qubit_label(), &[QUBIT1, QUBIT2])?;
    let problem = assemble_problem(&asm, enumerate_strategies(2, 4)?)?;
    let sol = solve(&problem, &SdpOptions::default());
    println!("primal {:.10}  dual {:.10}  gap {:.1e}  ({})", sol.primal_value, sol.dual_value, sol.gap, sol.status);
    println!("{:?}", dual_certificate_check(&sol, &problem));

    let mut forged = sol.clone();
    forged.multipliers[0] += &ComplexMatrix::identity(4).scale_real(0.2);
    let report = dual_certificate_check(&forged, &problem);
    println!("after inflating F_(0|0): pass = {}, residual {:.3}", report.pass, report.feasibility_residual);
    Ok(())
}
