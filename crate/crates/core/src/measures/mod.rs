//! Negativity, the closed-form simplified radical pair, and quantities
//! computed from sampled time series.

mod simplified;

use std::io::Write;
use std::path::Path;

pub use simplified::{
    simplified_rp_assemblages, simplified_rp_channel, simplified_rp_label, simplified_rp_state, MixedUnitaryChannel,
    SimplifiedRpParams,
};

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eigenvalues, partial_transpose, DensityMatrix, SpaceLabel};

/// N = (‖ρ^{T_party}‖₁ − 1)/2, the summed magnitude of the negative
/// eigenvalues of the partial transpose. A singlet has N = 1/2.
pub fn negativity(rho: &DensityMatrix, label: &SpaceLabel, party: &str) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), label, party)?;
    let vals = hermitian_eigenvalues(&pt)?;
    Ok(vals.iter().filter(|&&v| v < 0.0).fold(0.0, |acc, v| acc - v))
}

/// Values sampled on a strictly ascending time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::dims(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly ascending".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// CSV with header `time,<value_column>`; floats use shortest
    /// round-trip formatting, so output is byte-stable for equal inputs.
    pub fn write_csv<W: Write>(&self, out: W, value_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", value_column])?;
        for (t, v) in self.iter() {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, value_column: &str) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?, value_column)
    }

    /// Start of the trailing run of samples strictly below `threshold`,
    /// with the grid interval that brackets it (previous sample time, start
    /// time). A series that dips and then revives has not vanished.
    pub fn vanishes_at(&self, threshold: f64) -> Option<(f64, (f64, f64))> {
        let k = self.values.iter().rposition(|&v| !(v < threshold)).map_or(0, |k| k + 1);
        let t = *self.times.get(k)?;
        let lo = if k == 0 { t } else { self.times[k - 1] };
        Some((t, (lo, t)))
    }
}

/// Σ_k max(0, v_{k+1} − v_k): total rise of the sampled series.
pub fn nonmonotonicity(series: &TimeSeries) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter("nonmonotonicity needs at least two points".into()));
    }
    Ok(series.values.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum())
}

/// max − min of the sampled values.
pub fn oscillation_amplitude(series: &TimeSeries) -> f64 {
    let max = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::testing::*;
    use crate::qmat::{c, kron};

    fn pair() -> SpaceLabel {
        SpaceLabel::new([("A", 2), ("B", 2)]).unwrap()
    }

    #[test]
    fn negativity_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = DensityMatrix::pure(&[c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((negativity(&singlet, &pair(), "B").unwrap() - 0.5).abs() < 1e-14);
        assert!((negativity(&singlet, &pair(), "A").unwrap() - 0.5).abs() < 1e-14);
        assert!(negativity(&DensityMatrix::maximally_mixed(4), &pair(), "B").unwrap().abs() < 1e-15);
        let mut r = rng(71);
        let product = DensityMatrix::new(kron(&random_state(&mut r, 2), &random_state(&mut r, 2))).unwrap();
        assert!(negativity(&product, &pair(), "B").unwrap() < 1e-14);
        assert!(negativity(&product, &pair(), "C").is_err());
    }

    #[test]
    fn negativity_is_invariant_under_local_unitaries() {
        let mut r = rng(72);
        for _ in 0..10 {
            let rho = DensityMatrix::new(random_state(&mut r, 4)).unwrap();
            let u = kron(&random_unitary(&mut r, 2), &random_unitary(&mut r, 2));
            let rotated = DensityMatrix::new(u.sandwich(rho.matrix()).symmetrized()).unwrap();
            let (n0, n1) = (negativity(&rho, &pair(), "B").unwrap(), negativity(&rotated, &pair(), "B").unwrap());
            assert!((n0 - n1).abs() < 1e-10);
        }
    }

    #[test]
    fn nonmonotonicity_examples() {
        let s = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 0.3, 0.1]).unwrap();
        assert!((nonmonotonicity(&s).unwrap() - 0.3).abs() < 1e-15);
        let decay = TimeSeries::new((0..20).map(f64::from).collect(), (0..20).map(|k| (-0.3 * k as f64).exp()).collect()).unwrap();
        assert_eq!(nonmonotonicity(&decay).unwrap(), 0.0);
        assert!(nonmonotonicity(&TimeSeries::new(vec![0.0], vec![1.0]).unwrap()).is_err());
        assert_eq!(oscillation_amplitude(&s), 1.0);
    }

    #[test]
    fn series_validation_and_csv() {
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(vec![0.0], vec![1.0, 2.0]).is_err());
        let s = TimeSeries::new(vec![0.0, 0.5, 1.0], vec![0.25, 0.1, 1e-7]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, "tsr").unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,tsr\n0,0.25\n0.5,0.1\n1,0.0000001\n");
        assert_eq!(s.vanishes_at(1e-6), Some((1.0, (0.5, 1.0))));
        assert_eq!(s.vanishes_at(1e-9), None);
        assert_eq!(s.vanishes_at(1.0), Some((0.0, (0.0, 0.0))));
        let revival = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.3, 0.0, 0.2, 0.0, 0.0]).unwrap();
        assert_eq!(revival.vanishes_at(1e-6), Some((3.0, (2.0, 3.0))));
    }
}
