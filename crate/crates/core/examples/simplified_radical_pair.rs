//! Closed-form radical pair: electron-pair negativity oscillates with an
//! amplitude set by the nuclear mixture weight a, and the nucleus never
//! gets entangled with either electron.

use std::f64::consts::PI;

use temporal_steering::measures::{negativity, oscillation_amplitude, simplified_rp_label, simplified_rp_state, SimplifiedRpParams, TimeSeries};
use temporal_steering::qmat::{partial_trace, DensityMatrix, SpaceLabel};

fn main() -> temporal_steering::Result<()> {
    let label = simplified_rp_label();
    let pair = SpaceLabel::new([("electron1", 2), ("electron2", 2)])?;
    let a_z = 1e5;
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * PI / a_z / 40.0).collect();

    for a in [0.0, 0.25, 0.4, 0.5, 1.0] {
        let p = SimplifiedRpParams { a, a_z };
        let mut values = Vec::new();
        for &t in &times {
            let rho = simplified_rp_state(&p, t)?;
            let electrons = DensityMatrix::new(partial_trace(rho.matrix(), &label, &["electron1", "electron2"])?)?;
            values.push(negativity(&electrons, &pair, "electron2")?);
        }
        let series = TimeSeries::new(times.clone(), values)?;
        let min = series.values().iter().copied().fold(f64::INFINITY, f64::min);
        println!("a = {a:4}  amplitude {:.4}  min N {min:.4}", oscillation_amplitude(&series));
    }
    Ok(())
}
