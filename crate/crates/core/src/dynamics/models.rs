//! The two physical models: a pair of exchange-coupled decaying qubits, and
//! a radical pair (two electron spins, one nuclear spin, two shelving
//! ancillas recording singlet and triplet recombination).

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::{CollapseTerm, Liouvillian};
use crate::error::{Error, Result};
use crate::qmat::{kron_all, kron_vec, pauli, re, ComplexMatrix, DensityMatrix, SpaceLabel, C64, ONE, ZERO};

pub const QUBIT1: &str = "qubit1";
pub const QUBIT2: &str = "qubit2";

pub const ELECTRON1: &str = "electron1";
pub const ELECTRON2: &str = "electron2";
pub const NUCLEUS: &str = "nucleus";
pub const ANCILLA_S: &str = "ancillaS";
pub const ANCILLA_T: &str = "ancillaT";

/// Bohr magneton over ħ, in rad s⁻¹ T⁻¹ (CODATA 2018).
const BOHR_MAGNETON_OVER_HBAR: f64 = 9.274_010_078_3e-24 / 1.054_571_817e-34;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledQubitParams {
    /// Exchange coupling g (angular frequency).
    pub g: f64,
    /// Decay rate of each qubit, same units as `g`.
    pub gamma: f64,
}

impl CoupledQubitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling g must be positive, got {}", self.g)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("decay rate must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }
}

pub fn coupled_qubit_label() -> SpaceLabel {
    SpaceLabel::new([(QUBIT1, 2), (QUBIT2, 2)]).unwrap()
}

/// H = g(σ₁⁺σ₂⁻ + σ₁⁻σ₂⁺) with σ⁻ = |g⟩⟨e| on each qubit at rate γ.
/// Basis order is |gg⟩, |ge⟩, |eg⟩, |ee⟩ (ground = index 0).
pub fn build_coupled_qubit_liouvillian(p: &CoupledQubitParams) -> Result<Liouvillian> {
    p.validate()?;
    let id = ComplexMatrix::identity(2);
    let (lo, hi) = (pauli::lower(), pauli::raise());
    let exchange = &kron_all([&hi, &lo]) + &kron_all([&lo, &hi]);
    let h = exchange.scale_real(p.g);
    let collapse = vec![
        CollapseTerm { operator: kron_all([&lo, &id]), rate: p.gamma },
        CollapseTerm { operator: kron_all([&id, &lo]), rate: p.gamma },
    ];
    Liouvillian::new(coupled_qubit_label(), h, collapse)
}

/// Diagonal hyperfine tensor A = diag(A_x, A_y, A_z) in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfineTensor {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl HyperfineTensor {
    /// A = diag(0, 0, A_z)
    pub fn axial(az: f64) -> Self {
        Self { ax: 0.0, ay: 0.0, az }
    }

    /// A = diag(A_z/2, A_z/2, A_z)
    pub fn half_transverse(az: f64) -> Self {
        Self { ax: az / 2.0, ay: az / 2.0, az }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadicalPairParams {
    /// Field magnitude in tesla.
    pub b0: f64,
    /// Polar angle of the field, in [0, π/2].
    pub theta: f64,
    pub phi: f64,
    pub hyperfine: HyperfineTensor,
    /// Spin-selective recombination rate κ, s⁻¹.
    pub kappa: f64,
    /// Electron dephasing rate Γ, s⁻¹.
    pub gamma_dephasing: f64,
    /// μ_B g_s / 2ħ in rad s⁻¹ T⁻¹.
    pub gyromagnetic: f64,
}

impl Default for RadicalPairParams {
    fn default() -> Self {
        Self {
            b0: 47e-6,
            theta: 0.0,
            phi: 0.0,
            hyperfine: HyperfineTensor::axial(1e5),
            kappa: 1e4,
            gamma_dephasing: 1e3,
            gyromagnetic: Self::electron_gyromagnetic(),
        }
    }
}

impl RadicalPairParams {
    /// μ_B g_s / 2ħ with g_s = 2.
    pub fn electron_gyromagnetic() -> f64 {
        BOHR_MAGNETON_OVER_HBAR
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v} is out of range")));
        if !(self.b0 >= 0.0) || !self.b0.is_finite() {
            return bad("b0", self.b0);
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&self.theta) {
            return bad("theta", self.theta);
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return bad("kappa", self.kappa);
        }
        if !(self.gamma_dephasing >= 0.0) || !self.gamma_dephasing.is_finite() {
            return bad("gamma_dephasing", self.gamma_dephasing);
        }
        if !self.phi.is_finite() || !self.gyromagnetic.is_finite() {
            return bad("phi/gyromagnetic", self.phi);
        }
        let h = self.hyperfine;
        if ![h.ax, h.ay, h.az].iter().all(|v| v.is_finite()) {
            return bad("hyperfine", h.az);
        }
        Ok(())
    }

    /// γB as a Cartesian vector (rad/s).
    pub fn zeeman_vector(&self) -> [f64; 3] {
        let w = self.gyromagnetic * self.b0;
        [w * self.phi.cos() * self.theta.sin(), w * self.phi.sin() * self.theta.sin(), w * self.theta.cos()]
    }
}

pub fn radical_pair_label() -> SpaceLabel {
    SpaceLabel::new([(ELECTRON1, 2), (ELECTRON2, 2), (NUCLEUS, 2), (ANCILLA_S, 2), (ANCILLA_T, 2)]).unwrap()
}

/// Singlet and triplet vectors in the electron product basis
/// |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ (spin up = index 0), ordered
/// |s⟩, |t₀⟩, |t₋₁⟩, |t₊₁⟩. As a matrix, its columns form the change of basis
/// from singlet-triplet to product coordinates.
pub fn electron_pair_basis() -> [[C64; 4]; 4] {
    let s = FRAC_1_SQRT_2;
    [
        [ZERO, re(s), re(-s), ZERO],
        [ZERO, re(s), re(s), ZERO],
        [ZERO, ZERO, ZERO, ONE],
        [ONE, ZERO, ZERO, ZERO],
    ]
}

fn qubit(k: usize) -> [C64; 2] {
    if k == 0 {
        [ONE, ZERO]
    } else {
        [ZERO, ONE]
    }
}

/// I₈ ⊗ |S₀⟩⟨S₀| ⊗ |T₀⟩⟨T₀|: the not-yet-recombined sector.
pub fn undecayed_projector() -> ComplexMatrix {
    let p0 = ComplexMatrix::projector(&qubit(0));
    kron_all([&ComplexMatrix::identity(8), &p0, &p0])
}

/// (1/8)·𝟙 ⊗ |S₀⟩⟨S₀| ⊗ |T₀⟩⟨T₀|
pub fn radical_pair_initial_state() -> DensityMatrix {
    DensityMatrix::new(undecayed_projector().scale_real(1.0 / 8.0)).expect("valid by construction")
}

/// H = Σᵢ γB·σ⁽ⁱ⁾ + Σ_k A_k I_k σ_k⁽¹⁾ (Pauli operators throughout), with
/// the eight recombination jumps |χ, m, decayed⟩⟨χ, m, S₀, T₀| at rate κ and
/// σ_z dephasing of each electron at rate Γ.
pub fn build_radical_pair_liouvillian(p: &RadicalPairParams) -> Result<Liouvillian> {
    p.validate()?;
    let id2 = ComplexMatrix::identity(2);
    let paulis = [pauli::x(), pauli::y(), pauli::z()];
    let on = |ops: [&ComplexMatrix; 5]| kron_all(ops);

    let b = p.zeeman_vector();
    let a = [p.hyperfine.ax, p.hyperfine.ay, p.hyperfine.az];
    let mut h = ComplexMatrix::zeros(32, 32);
    for k in 0..3 {
        let s = &paulis[k];
        h += &on([s, &id2, &id2, &id2, &id2]).scale_real(b[k]);
        h += &on([&id2, s, &id2, &id2, &id2]).scale_real(b[k]);
        h += &on([s, &id2, s, &id2, &id2]).scale_real(a[k]);
    }

    let basis = electron_pair_basis();
    let mut collapse = Vec::with_capacity(10);
    for nuclear in 0..2 {
        for (chi, pair) in basis.iter().enumerate() {
            let undecayed = kron_vec(&kron_vec(pair, &qubit(nuclear)), &kron_vec(&qubit(0), &qubit(0)));
            let shelved = if chi == 0 { kron_vec(&qubit(1), &qubit(0)) } else { kron_vec(&qubit(0), &qubit(1)) };
            let decayed = kron_vec(&kron_vec(pair, &qubit(nuclear)), &shelved);
            collapse.push(CollapseTerm { operator: ComplexMatrix::outer(&decayed, &undecayed), rate: p.kappa });
        }
    }
    let z = pauli::z();
    collapse.push(CollapseTerm { operator: on([&z, &id2, &id2, &id2, &id2]), rate: p.gamma_dephasing });
    collapse.push(CollapseTerm { operator: on([&id2, &z, &id2, &id2, &id2]), rate: p.gamma_dephasing });

    Liouvillian::new(radical_pair_label(), h, collapse)
}
