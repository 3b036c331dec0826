//! More measurement settings never lower the TSR. Evolves all five MUBs
//! once and solves the first n of them at a few times.

use temporal_steering::dynamics::{build_coupled_qubit_liouvillian, coupled_qubit_label, CoupledQubitParams, Method, QUBIT1, QUBIT2};
use temporal_steering::qmat::DensityMatrix;
use temporal_steering::steering::{build_mubs_d4, evolve_assemblage, initial_assemblage};
use temporal_steering::tsr::tsr;

fn main() -> temporal_steering::Result<()> {
    let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma: 1.0 })?;
    let asm0 = initial_assemblage(&DensityMatrix::maximally_mixed(4), &build_mubs_d4(), &coupled_qubit_label(), &[QUBIT1, QUBIT2])?;
    let times = [0.0, 0.5, 1.0, 2.0];
    // n = 5 means 1024 strategies per solve; pass --five to include it
    let max_n = if std::env::args().any(|a| a == "--five") { 5 } else { 4 };

    print!("   t ");
    for n in 1..=max_n {
        print!("     n={n}   ");
    }
    println!();
    for (t, asm) in times.iter().zip(evolve_assemblage(&asm0, &l, &times, None, Method::default())?) {
        print!("{t:4.1} ");
        for n in 1..=max_n {
            let subset: Vec<usize> = (0..n).collect();
            print!("  {:.6}", tsr(&asm.select_settings(&subset)?)?);
        }
        println!();
    }
    Ok(())
}
