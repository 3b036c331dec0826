//! Electron-pair TSR in the radical-pair model for three field angles.
//! The wavy, angle-dependent curves are the compass signal.
//!
//!     cargo run --release --example radical_pair_compass

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use temporal_steering::dynamics::*;
use temporal_steering::measures::{nonmonotonicity, TimeSeries};
use temporal_steering::steering::{build_mubs_d4, evolve_assemblage, initial_assemblage};
use temporal_steering::tsr::tsr;

fn main() -> temporal_steering::Result<()> {
    let label = radical_pair_label();
    let keep = [ELECTRON1, ELECTRON2];
    let meas = build_mubs_d4().first(2)?.in_frame(&electron_pair_basis())?;
    let asm0 = initial_assemblage(&radical_pair_initial_state(), &meas, &label, &keep)?;
    let spec = ReductionSpec::trace_out(label, &keep)?;
    let micros: Vec<f64> = (0..=35).map(|k| 2.0 * k as f64).collect();
    let times: Vec<f64> = micros.iter().map(|m| m * 1e-6).collect();

    for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
        let l = build_radical_pair_liouvillian(&RadicalPairParams { theta, ..RadicalPairParams::default() })?;
        let values = evolve_assemblage(&asm0, &l, &times, Some(&spec), Method::Exponential)?
            .iter()
            .map(tsr)
            .collect::<temporal_steering::Result<Vec<_>>>()?;
        let series = TimeSeries::new(micros.clone(), values)?;
        println!("theta = {theta:.4}  nonmonotonicity {:.4}", nonmonotonicity(&series)?);
        for (t, v) in series.iter().step_by(5) {
            println!("  t = {t:4.0} us  TSR = {v:.5}");
        }
    }
    Ok(())
}
