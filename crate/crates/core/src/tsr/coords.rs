//! Real coordinates of d x d Hermitian matrices in the orthonormal basis
//! e_pp, (e_pq + e_qp)/√2, i(e_pq − e_qp)/√2 (p < q), under ⟨A, B⟩ = Re tr(A B).

use crate::qmat::{c, ComplexMatrix, C64};

/// Basis elements as sparse (row, col, value) lists, in coordinate order.
#[derive(Clone, Debug)]
pub(crate) struct HermitianBasis {
    d: usize,
    elems: Vec<Vec<(usize, usize, C64)>>,
}

impl HermitianBasis {
    pub(crate) fn new(d: usize) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut elems = Vec::with_capacity(d * d);
        for p in 0..d {
            elems.push(vec![(p, p, c(1.0, 0.0))]);
        }
        for p in 0..d {
            for q in p + 1..d {
                elems.push(vec![(p, q, c(r, 0.0)), (q, p, c(r, 0.0))]);
                elems.push(vec![(p, q, c(0.0, r)), (q, p, c(0.0, -r))]);
            }
        }
        Self { d, elems }
    }

    pub(crate) fn len(&self) -> usize {
        self.elems.len()
    }

    pub(crate) fn coords_into(&self, m: &ComplexMatrix, out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.elems) {
            *o = e.iter().map(|&(p, q, v)| (v.conj() * m[(p, q)]).re).sum();
        }
    }

    pub(crate) fn coords(&self, m: &ComplexMatrix) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.coords_into(m, &mut out);
        out
    }

    pub(crate) fn from_coords(&self, y: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.d, self.d);
        for (&yk, e) in y.iter().zip(&self.elems) {
            for &(p, q, v) in e {
                m[(p, q)] += v * yk;
            }
        }
        m
    }

    /// K_kl = ⟨E_k, W E_l W⟩, column-major into `out` (len² entries).
    pub(crate) fn congruence_into(&self, w: &ComplexMatrix, out: &mut [f64]) {
        let n = self.len();
        for (l, el) in self.elems.iter().enumerate() {
            for (k, ek) in self.elems.iter().enumerate().skip(l) {
                let mut acc = C64::new(0.0, 0.0);
                for &(p, q, a) in ek {
                    for &(r, s, b) in el {
                        acc += a.conj() * w[(p, r)] * b * w[(s, q)];
                    }
                }
                out[k + n * l] = acc.re;
                out[l + n * k] = acc.re;
            }
        }
    }
}
