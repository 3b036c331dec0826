//! Lindblad generators for the coupled-qubit and radical-pair models, and
//! time propagation of states under them.

mod integrate;
mod models;
mod reduce;

pub use integrate::{
    propagate, propagate_exponential, propagate_many, propagate_operator, IntegratorOptions, Method,
};
pub use models::{
    build_coupled_qubit_liouvillian, build_radical_pair_liouvillian, coupled_qubit_label, electron_pair_basis,
    radical_pair_initial_state, radical_pair_label, undecayed_projector, CoupledQubitParams, HyperfineTensor,
    RadicalPairParams, ANCILLA_S, ANCILLA_T, ELECTRON1, ELECTRON2, NUCLEUS, QUBIT1, QUBIT2,
};
pub use reduce::{reduce, ReductionMode, ReductionSpec};

use crate::error::{Error, Result};
use crate::qmat::{kron, ComplexMatrix, SpaceLabel, C64, I, ZERO};

/// One dissipator channel `rate · (L ρ L† − ½{L†L, ρ})`.
#[derive(Clone, Debug)]
pub struct CollapseTerm {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Time-independent Lindblad generator, ħ = 1.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    label: SpaceLabel,
    hamiltonian: ComplexMatrix,
    collapse: Vec<CollapseTerm>,
}

impl Liouvillian {
    pub fn new(label: SpaceLabel, hamiltonian: ComplexMatrix, collapse: Vec<CollapseTerm>) -> Result<Self> {
        let d = label.dim();
        if hamiltonian.rows() != d || hamiltonian.cols() != d {
            return Err(Error::dims(format!("Hamiltonian is {}x{}, space has dimension {d}", hamiltonian.rows(), hamiltonian.cols())));
        }
        let hamiltonian = ComplexMatrix::hermitian(hamiltonian)?;
        for (k, term) in collapse.iter().enumerate() {
            if !(term.rate >= 0.0) || !term.rate.is_finite() {
                return Err(Error::InvalidParameter(format!("collapse term {k} has rate {}", term.rate)));
            }
            if term.operator.rows() != d || term.operator.cols() != d {
                return Err(Error::dims(format!("collapse operator {k} does not act on dimension {d}")));
            }
        }
        Ok(Self { label, hamiltonian, collapse })
    }

    /// The zero generator on a space.
    pub fn identity_channel(label: SpaceLabel) -> Self {
        let d = label.dim();
        Self { label, hamiltonian: ComplexMatrix::zeros(d, d), collapse: Vec::new() }
    }

    pub fn label(&self) -> &SpaceLabel {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.label.dim()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn collapse_terms(&self) -> &[CollapseTerm] {
        &self.collapse
    }

    /// dρ/dt = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = &self.hamiltonian;
        let mut out = (&h.matmul(rho) - &rho.matmul(h)).scale(-I);
        for term in self.collapse.iter().filter(|t| t.rate > 0.0) {
            let l = &term.operator;
            let ldl = l.adjoint().matmul(l);
            let jump = l.sandwich(rho);
            let anti = &ldl.matmul(rho) + &rho.matmul(&ldl);
            out += &(&jump - &anti.scale_real(0.5)).scale_real(term.rate);
        }
        out
    }

    /// Matrix of the generator acting on column-stacked `vec(ρ)`, using
    /// vec(AXB) = (Bᵀ ⊗ A) vec(X).
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.dim();
        let id = ComplexMatrix::identity(d);
        let h = &self.hamiltonian;
        let mut sup = (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(-I);
        for term in self.collapse.iter().filter(|t| t.rate > 0.0) {
            let l = &term.operator;
            let ldl = l.adjoint().matmul(l);
            let mut part = kron(&l.conj(), l);
            part -= &kron(&id, &ldl).scale_real(0.5);
            part -= &kron(&ldl.transpose(), &id).scale_real(0.5);
            sup += &part.scale_real(term.rate);
        }
        sup
    }

    pub(crate) fn sparse_superoperator(&self) -> SparseOperator {
        SparseOperator::from_dense(&self.superoperator())
    }
}

/// Compressed-row sparse complex matrix; the superoperators here are mostly
/// zeros (the 1024 x 1024 radical-pair generator has a few thousand entries).
#[derive(Clone, Debug)]
pub(crate) struct SparseOperator {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub(crate) fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for i in 0..n {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self { n, row_start, cols, vals }
    }

    pub(crate) fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for i in 0..self.n {
            let mut acc = ZERO;
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[i] = acc;
        }
    }
}
