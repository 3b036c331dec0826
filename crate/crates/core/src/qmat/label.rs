use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Named tensor factors of a Hilbert space, most significant first
/// (the ordering used by [`super::kron`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLabel {
    factors: Vec<(String, usize)>,
}

impl SpaceLabel {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> = factors.into_iter().map(|(n, d)| (n.into(), d)).collect();
        for (i, (name, d)) in factors.iter().enumerate() {
            if *d == 0 {
                return Err(Error::InvalidParameter(format!("subsystem `{name}` has dimension 0")));
            }
            if factors[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::InvalidParameter(format!("subsystem `{name}` listed twice")));
            }
        }
        Ok(Self { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|(_, d)| *d).collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownSubsystem(name.to_string()))
    }

    /// Joint dimension of the named subsystems.
    pub fn dim_of(&self, names: &[&str]) -> Result<usize> {
        names.iter().map(|n| self.position(n).map(|k| self.factors[k].1)).product()
    }

    /// Sub-label made of the named factors, in label order.
    pub fn restrict(&self, names: &[&str]) -> Result<SpaceLabel> {
        let mask = self.mask(names)?;
        Ok(SpaceLabel {
            factors: self.factors.iter().zip(&mask).filter(|(_, &k)| k).map(|(f, _)| f.clone()).collect(),
        })
    }

    pub(crate) fn stride(&self, k: usize) -> usize {
        self.factors[k + 1..].iter().map(|(_, d)| d).product()
    }

    pub(crate) fn mask(&self, names: &[&str]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.factors.len()];
        for name in names {
            mask[self.position(name)?] = true;
        }
        Ok(mask)
    }

    pub(crate) fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        let d = self.dim();
        if m.rows() != d || m.cols() != d {
            return Err(Error::dims(format!(
                "label {:?} has dimension {d}, matrix is {}x{}",
                self.factors,
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }

    /// Full-space index offsets contributed by every multi-index of the
    /// selected factors and by every multi-index of the rest. Any full index
    /// is uniquely `kept[i] + rest[j]`.
    pub(crate) fn split_offsets(&self, selected: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let mut kept = vec![0usize];
        let mut rest = vec![0usize];
        for (k, (_, d)) in self.factors.iter().enumerate() {
            let stride = self.stride(k);
            let target = if selected[k] { &mut kept } else { &mut rest };
            *target = target.iter().flat_map(|&base| (0..*d).map(move |v| base + v * stride)).collect();
        }
        (kept, rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_lookup() {
        let l = SpaceLabel::new([("e1", 2), ("e2", 2), ("nuc", 2), ("s", 2), ("t", 2)]).unwrap();
        assert_eq!(l.dim(), 32);
        assert_eq!(l.position("nuc").unwrap(), 2);
        assert_eq!(l.dim_of(&["e1", "e2"]).unwrap(), 4);
        assert_eq!(l.stride(0), 16);
        assert!(l.position("x").is_err());
        assert!(SpaceLabel::new([("a", 2), ("a", 3)]).is_err());
        assert!(SpaceLabel::new([("a", 0)]).is_err());
    }

    #[test]
    fn split_offsets_cover_every_index_once() {
        let l = SpaceLabel::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let (kept, rest) = l.split_offsets(&[true, false, true]);
        let mut all: Vec<usize> = kept.iter().flat_map(|k| rest.iter().map(move |r| k + r)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }
}
