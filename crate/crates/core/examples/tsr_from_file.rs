//! Round-trips an assemblage through the JSON format and solves it, the
//! same path as `tsr tsr-from-file`.
//!
//!     cargo run --example tsr_from_file [path.json]

use temporal_steering::dynamics::{coupled_qubit_label, QUBIT1, QUBIT2};
use temporal_steering::qmat::DensityMatrix;
use temporal_steering::steering::{build_mubs_d4, initial_assemblage, read_assemblage, write_assemblage};
use temporal_steering::tsr::tsr_with;

fn main() -> temporal_steering::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let meas = build_mubs_d4().first(3)?;
            let asm = initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &coupled_qubit_label(), &[QUBIT1, QUBIT2])?;
            let p = std::env::temp_dir().join("three_mubs.json");
            write_assemblage(&p, &asm)?;
            println!("wrote {}", p.display());
            p
        }
    };
    let asm = read_assemblage(&path)?;
    println!("d = {}, {} settings x {} outcomes", asm.dim(), asm.n_settings(), asm.n_outcomes());
    let (value, sol) = tsr_with(&asm, &Default::default())?;
    println!("TSR = {value:.10}");
    println!("{}", sol.summary().to_json_line());
    Ok(())
}
