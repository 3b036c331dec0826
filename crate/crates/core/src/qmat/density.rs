use super::{eigh_unchecked, spectral_compose, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Tolerance on trace and negative eigenvalues for a valid state.
pub const STATE_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let m = ComplexMatrix::hermitian(m)?;
        let tr = m.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace is {tr}, expected 1")));
        }
        let (vals, _) = eigh_unchecked(&m);
        if let Some(&min) = vals.first() {
            if min < -STATE_TOL {
                return Err(Error::InvalidParameter(format!("density matrix has eigenvalue {min:e}")));
            }
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    /// |ψ><ψ| for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self(ComplexMatrix::projector(&v)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.matmul(&self.0).trace().re
    }

    /// <ψ|ρ|ψ> for a normalized vector.
    pub fn population(&self, psi: &[C64]) -> f64 {
        let rho_psi = self.0.apply(psi);
        psi.iter().zip(&rho_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn fidelity_with_pure(&self, psi: &[C64]) -> f64 {
        self.population(psi)
    }

    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }
}

/// Symmetrizes and removes round-off negativity: eigenvalues in
/// `[-STATE_TOL·tr, 0)` are set to zero and the original trace restored.
/// Larger negative eigenvalues are left alone so later validation sees them.
pub fn clip_psd(m: &ComplexMatrix) -> ComplexMatrix {
    let h = m.symmetrized();
    let tr = h.trace().re;
    let (vals, vecs) = eigh_unchecked(&h);
    let min = vals.first().copied().unwrap_or(0.0);
    if min >= 0.0 || min < -STATE_TOL * tr.abs().max(1.0) {
        return h;
    }
    let clipped = spectral_compose(&vals, &vecs, |v| v.max(0.0));
    let new_tr = clipped.trace().re;
    if new_tr > 0.0 {
        clipped.scale_real(tr / new_tr)
    } else {
        clipped
    }
}
