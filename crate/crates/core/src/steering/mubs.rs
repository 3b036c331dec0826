//! Measurement sets and the five mutually unbiased bases of C⁴.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{c, ComplexMatrix, C64, ZERO};

/// Projective measurement settings: `bases[x][a]` is the vector whose
/// projector is M_{a|x}.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    dim: usize,
    bases: Vec<Vec<Vec<C64>>>,
}

impl MeasurementSet {
    /// Builds the set without checking orthonormality (see [`verify_mub`]
    /// and [`MeasurementSet::validate`]).
    pub fn from_bases(bases: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        let dim = bases.first().and_then(|b| b.first()).map_or(0, |v| v.len());
        if dim == 0 {
            return Err(Error::InvalidParameter("measurement set needs at least one vector".into()));
        }
        for basis in &bases {
            if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
                return Err(Error::dims(format!("every basis must hold {dim} vectors of length {dim}")));
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn computational(dim: usize) -> Self {
        let basis = (0..dim).map(|a| (0..dim).map(|k| if k == a { c(1.0, 0.0) } else { ZERO }).collect()).collect();
        Self { dim, bases: vec![basis] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_settings(&self) -> usize {
        self.bases.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, x: usize, a: usize) -> &[C64] {
        &self.bases[x][a]
    }

    pub fn projector(&self, x: usize, a: usize) -> ComplexMatrix {
        ComplexMatrix::projector(&self.bases[x][a])
    }

    /// Keeps the listed settings (0-based), in the given order.
    pub fn select(&self, settings: &[usize]) -> Result<Self> {
        let bases = settings
            .iter()
            .map(|&x| {
                self.bases
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("setting {x} out of range 0..{}", self.bases.len())))
            })
            .collect::<Result<_>>()?;
        Ok(Self { dim: self.dim, bases })
    }

    pub fn first(&self, n: usize) -> Result<Self> {
        self.select(&(0..n).collect::<Vec<_>>())
    }

    /// Re-expresses every vector through `frame`, where `frame[k]` is the
    /// physical image of the reference basis vector |k+1⟩.
    pub fn in_frame(&self, frame: &[[C64; 4]]) -> Result<Self> {
        if frame.len() != self.dim || self.dim != 4 {
            return Err(Error::dims("frame must be a 4x4 change of basis".to_string()));
        }
        let bases = self
            .bases
            .iter()
            .map(|basis| {
                basis
                    .iter()
                    .map(|v| (0..4).map(|row| (0..4).map(|k| v[k] * frame[k][row]).sum()).collect())
                    .collect()
            })
            .collect();
        Ok(Self { dim: self.dim, bases })
    }

    /// Fails unless the set passes [`verify_mub`].
    pub fn validate(&self) -> Result<()> {
        let report = verify_mub(self);
        if report.pass {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("measurement set failed verification: {report}")))
        }
    }
}

/// Which version of the appendix table to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MubTable {
    /// With φ_{4|3} = (|1⟩ + |2⟩ − i|3⟩ + i|4⟩)/2.
    Corrected,
    /// With φ_{4|3} = (|1⟩ + |2⟩ − i|3⟩ + |4⟩)/2, which is not orthogonal to
    /// the rest of its basis.
    AsPrinted,
}

/// The five bases, in reference order, as coefficient vectors.
pub fn mub_d4_vectors(table: MubTable) -> Vec<Vec<Vec<C64>>> {
    let (o, i) = (c(1.0, 0.0), c(0.0, 1.0));
    let rows: [[[C64; 4]; 4]; 5] = [
        [[o, ZERO, ZERO, ZERO], [ZERO, o, ZERO, ZERO], [ZERO, ZERO, o, ZERO], [ZERO, ZERO, ZERO, o]],
        [[o, o, o, o], [o, o, -o, -o], [o, -o, -o, o], [o, -o, o, -o]],
        [
            [o, -o, -i, -i],
            [o, -o, i, i],
            [o, o, i, -i],
            match table {
                MubTable::Corrected => [o, o, -i, i],
                MubTable::AsPrinted => [o, o, -i, o],
            },
        ],
        [[o, -i, -i, -o], [o, -i, i, o], [o, i, i, -o], [o, i, -i, o]],
        [[o, -i, -o, -i], [o, -i, o, i], [o, i, -o, i], [o, i, o, -i]],
    ];
    rows.iter()
        .enumerate()
        .map(|(x, basis)| {
            let scale = if x == 0 { 1.0 } else { 0.5 };
            basis.iter().map(|v| v.iter().map(|z| z * scale).collect()).collect()
        })
        .collect()
}

/// Five mutually unbiased bases of C⁴ (settings x = 0..5, outcomes a = 0..4).
pub fn build_mubs_d4() -> MeasurementSet {
    let set = MeasurementSet::from_bases(mub_d4_vectors(MubTable::Corrected)).expect("well-formed table");
    debug_assert!(verify_mub(&set).pass);
    set
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MubReport {
    pub dim: usize,
    pub settings: usize,
    /// max |⟨φ_a|φ_b⟩|² − δ_ab| within a basis
    pub orthonormality: f64,
    /// max_x max |Σ_a M_{a|x} − I|
    pub completeness: f64,
    /// max |⟨φ_{a|x}|φ_{b|y}⟩|² − 1/d| over x ≠ y
    pub unbiasedness: f64,
    /// distinct vector pairs compared (norms are checked on top)
    pub pairs_checked: usize,
    pub pass: bool,
}

impl std::fmt::Display for MubReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} bases in d={}: orthonormality {:.2e}, completeness {:.2e}, unbiasedness {:.2e} over {} pairs -> {}",
            self.settings,
            self.dim,
            self.orthonormality,
            self.completeness,
            self.unbiasedness,
            self.pairs_checked,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

pub const MUB_TOL: f64 = 1e-10;

pub fn verify_mub(set: &MeasurementSet) -> MubReport {
    let d = set.dim();
    let n = set.n_settings();
    let overlap = |x: usize, a: usize, y: usize, b: usize| -> f64 {
        set.vector(x, a).iter().zip(set.vector(y, b)).map(|(p, q)| p.conj() * q).sum::<C64>().norm_sqr()
    };
    let mut ortho = 0.0_f64;
    let mut unbiased = 0.0_f64;
    let mut completeness = 0.0_f64;
    let mut pairs = 0;
    for x in 0..n {
        for a in 0..d {
            for y in x..n {
                let b0 = if y == x { a } else { 0 };
                for b in b0..d {
                    if b != a || y != x {
                        pairs += 1;
                    }
                    let o = overlap(x, a, y, b);
                    if x == y {
                        let want = if a == b { 1.0 } else { 0.0 };
                        ortho = ortho.max((o - want).abs());
                    } else {
                        unbiased = unbiased.max((o - 1.0 / d as f64).abs());
                    }
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        for a in 0..d {
            sum += &set.projector(x, a);
        }
        completeness = completeness.max(sum.max_abs_diff(&ComplexMatrix::identity(d)));
    }
    MubReport {
        dim: d,
        settings: n,
        orthonormality: ortho,
        completeness,
        unbiasedness: unbiased,
        pairs_checked: pairs,
        pass: ortho < MUB_TOL && completeness < MUB_TOL && unbiased < MUB_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrected_table_is_a_complete_set_of_mubs() {
        let set = build_mubs_d4();
        let r = verify_mub(&set);
        assert!(r.pass, "{r}");
        // 20 vectors: 20·19/2 distinct pairs, plus the 20 norms
        assert_eq!(r.pairs_checked, 190);
        for x in 0..5 {
            let mut sum = ComplexMatrix::zeros(4, 4);
            for a in 0..4 {
                let p = set.projector(x, a);
                assert!(p.matmul(&p).max_abs_diff(&p) < 1e-15);
                sum += &p;
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        }
    }

    #[test]
    fn cross_basis_overlaps_are_one_quarter() {
        let set = build_mubs_d4();
        for x in 0..5 {
            for y in 0..5 {
                for a in 0..4 {
                    for b in 0..4 {
                        let o = set.projector(x, a).matmul(&set.projector(y, b)).trace().re;
                        let want = if x != y {
                            0.25
                        } else if a == b {
                            1.0
                        } else {
                            0.0
                        };
                        assert!((o - want).abs() < 1e-15, "x={x} a={a} y={y} b={b}: {o}");
                    }
                }
            }
        }
    }

    #[test]
    fn printed_table_fails() {
        let set = MeasurementSet::from_bases(mub_d4_vectors(MubTable::AsPrinted)).unwrap();
        let r = verify_mub(&set);
        assert!(!r.pass);
        // still unit length, but ⟨φ_{1|3}|φ_{4|3}⟩ = (1 + i)/4
        assert!(r.unbiasedness > 1e-3, "{r}");
        assert!(r.orthonormality > 1e-3, "{r}");
        assert!(set.validate().is_err());
    }

    #[test]
    fn computational_basis_alone_passes() {
        for d in [2, 4] {
            assert!(verify_mub(&MeasurementSet::computational(d)).pass);
        }
    }

    #[test]
    fn selection() {
        let set = build_mubs_d4();
        assert_eq!(set.first(3).unwrap().n_settings(), 3);
        assert_eq!(set.select(&[4, 0]).unwrap().vector(0, 1), set.vector(4, 1));
        assert!(set.select(&[5]).is_err());
    }
}
