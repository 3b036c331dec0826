//! The pure-hyperfine radical pair without Zeeman term or recombination:
//!
//!   ρ(t) = a·ρ¹(t) ⊗ |↑⟩⟨↑| + (1 − a)·ρ²(t) ⊗ |↓⟩⟨↓|,
//!   ρ¹ = U|s⟩⟨s|U†, U = exp(iA_z σ_z¹ t),  ρ² with U† in place of U.
//!
//! With e^{−iHt} evolution this is the hyperfine coupling H = −A_z σ_z¹σ_z^n;
//! the sign only swaps which nuclear weight goes with which phase.

use serde::{Deserialize, Serialize};

use crate::dynamics::{electron_pair_basis, ELECTRON1, ELECTRON2, NUCLEUS};
use crate::error::{Error, Result};
use crate::qmat::{c, kron, ComplexMatrix, DensityMatrix, SpaceLabel};
use crate::steering::Assemblage;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplifiedRpParams {
    /// initial weight of nuclear spin up
    pub a: f64,
    /// hyperfine strength, rad/s
    pub a_z: f64,
}

impl SimplifiedRpParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::InvalidParameter(format!("nuclear weight a = {} outside [0, 1]", self.a)));
        }
        if !self.a_z.is_finite() {
            return Err(Error::InvalidParameter("A_z must be finite".into()));
        }
        Ok(())
    }
}

pub fn simplified_rp_label() -> SpaceLabel {
    SpaceLabel::new([(ELECTRON1, 2), (ELECTRON2, 2), (NUCLEUS, 2)]).expect("static label")
}

/// exp(i·phase·σ_z) ⊗ I on the electron pair.
fn phase_unitary(phase: f64) -> ComplexMatrix {
    let u1 = ComplexMatrix::diag(&[c(0.0, phase).exp(), c(0.0, -phase).exp()]);
    kron(&u1, &ComplexMatrix::identity(2))
}

/// σ ↦ Σ_k w_k U_k σ U_k†.
#[derive(Clone, Debug)]
pub struct MixedUnitaryChannel {
    terms: Vec<(f64, ComplexMatrix)>,
}

impl MixedUnitaryChannel {
    pub fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
        for (w, u) in &self.terms {
            if *w != 0.0 {
                out += &u.sandwich(m).scale_real(*w);
            }
        }
        out.symmetrized()
    }
}

/// The reduced two-electron dynamics at time t: a·U₁σU₁† + (1 − a)·U₂σU₂†.
pub fn simplified_rp_channel(p: &SimplifiedRpParams, t: f64) -> Result<MixedUnitaryChannel> {
    p.validate()?;
    let phase = p.a_z * t;
    Ok(MixedUnitaryChannel { terms: vec![(p.a, phase_unitary(phase)), (1.0 - p.a, phase_unitary(-phase))] })
}

/// ρ(t) on (electron1, electron2, nucleus), starting from the singlet.
pub fn simplified_rp_state(p: &SimplifiedRpParams, t: f64) -> Result<DensityMatrix> {
    p.validate()?;
    let singlet = ComplexMatrix::projector(&electron_pair_basis()[0]);
    let phase = p.a_z * t;
    let rho1 = phase_unitary(phase).sandwich(&singlet);
    let rho2 = phase_unitary(-phase).sandwich(&singlet);
    let up = ComplexMatrix::diag_real(&[1.0, 0.0]);
    let down = ComplexMatrix::diag_real(&[0.0, 1.0]);
    let rho = &kron(&rho1, &up).scale_real(p.a) + &kron(&rho2, &down).scale_real(1.0 - p.a);
    DensityMatrix::new(rho.symmetrized())
}

/// Applies the channel at each time to every member of an electron-pair
/// assemblage.
pub fn simplified_rp_assemblages(p: &SimplifiedRpParams, asm0: &Assemblage, times: &[f64]) -> Result<Vec<Assemblage>> {
    if asm0.dim() != 4 {
        return Err(Error::dims(format!("electron-pair assemblage must be 4-dimensional, got {}", asm0.dim())));
    }
    times
        .iter()
        .map(|&t| {
            let ch = simplified_rp_channel(p, t)?;
            let asm = asm0.map_members(|m| Ok(ch.apply(m)))?;
            asm.validate()?;
            Ok(asm)
        })
        .collect()
}
