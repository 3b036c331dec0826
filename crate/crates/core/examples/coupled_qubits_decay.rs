//! TSR of two MUB settings on I/4 decaying under the coupled-qubit model,
//! for three decay rates. Times are in units of 1/γ.
//!
//!     cargo run --release --example coupled_qubits_decay

use temporal_steering::dynamics::{build_coupled_qubit_liouvillian, coupled_qubit_label, CoupledQubitParams, Method, QUBIT1, QUBIT2};
use temporal_steering::measures::{nonmonotonicity, TimeSeries};
use temporal_steering::qmat::DensityMatrix;
use temporal_steering::steering::{build_mubs_d4, evolve_assemblage, initial_assemblage};
use temporal_steering::tsr::tsr;

fn main() -> temporal_steering::Result<()> {
    let meas = build_mubs_d4().first(2)?;
    let asm0 = initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &coupled_qubit_label(), &[QUBIT1, QUBIT2])?;
    let scaled: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25).collect();

    for gamma in [1.0, 4.0, 9.0] {
        let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma })?;
        let times: Vec<f64> = scaled.iter().map(|s| s / gamma).collect();
        let values = evolve_assemblage(&asm0, &l, &times, None, Method::default())?
            .iter()
            .map(tsr)
            .collect::<temporal_steering::Result<Vec<_>>>()?;
        let series = TimeSeries::new(scaled.clone(), values)?;
        println!("gamma = {gamma}g  (nonmonotonicity {:.1e})", nonmonotonicity(&series)?);
        for (t, v) in series.iter().step_by(4) {
            println!("  gamma*t = {t:4.1}  TSR = {v:.6}");
        }
    }
    Ok(())
}
