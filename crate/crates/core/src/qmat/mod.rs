//! Dense complex linear algebra for small Hilbert spaces.
//!
//! [`ComplexMatrix`] wraps a column-major `nalgebra` matrix. Products go
//! through `matrixmultiply`'s complex GEMM, which matters once the
//! superoperators reach 1024 x 1024; eigen-decompositions and LU come from
//! `nalgebra`.

mod density;
mod expm;
mod label;
mod lu;

pub use density::{clip_psd, DensityMatrix, STATE_TOL};
pub use label::SpaceLabel;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance used when a matrix is declared Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dims(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| re(rows[i][j]))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { re(entries[i]) } else { ZERO })
    }

    /// |u><v|
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// |v><v|
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// Symmetrizes to (M + M†)/2 after checking the deviation is within
    /// [`HERMITIAN_TOL`] of the largest entry scale.
    pub fn hermitian(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(format!("Hermitian matrix must be square, got {}x{}", m.rows(), m.cols())));
        }
        let dev = m.hermiticity_defect();
        let scale = m.max_abs().max(1.0);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(m.symmetrized())
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entries listed row by row.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Column-major view of the storage, i.e. `vec(M)` with columns stacked.
    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        self.0.as_mut_slice()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute column sum.
    pub fn one_norm(&self) -> f64 {
        self.0
            .column_iter()
            .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape());
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of the difference.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape());
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |M - M†|
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn symmetrized(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * re(0.5))
    }

    /// Re tr(A† B), the real Hilbert–Schmidt inner product.
    pub fn inner_real(&self, other: &ComplexMatrix) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows(), rhs.cols());
        gemm_into(ONE, self, rhs, ZERO, &mut out);
        out
    }

    /// A B A†
    pub fn sandwich(&self, inner: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(inner).matmul(&self.adjoint())
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        kron(self, other)
    }

    pub fn expm(&self) -> ComplexMatrix {
        expm::expm(self)
    }

    /// Matrix-vector product on a column-major vectorized operand.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols());
        let mut out = vec![ZERO; self.rows()];
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.0.column(j).iter()) {
                *o += a * vj;
            }
        }
        out
    }
}

/// `out = alpha * a * b + beta * out`
pub fn gemm_into(alpha: C64, a: &ComplexMatrix, b: &ComplexMatrix, beta: C64, out: &mut ComplexMatrix) {
    let (m, k) = (a.rows(), a.cols());
    let n = b.cols();
    assert_eq!(k, b.rows(), "inner dimensions differ");
    assert_eq!((out.rows(), out.cols()), (m, n), "output shape");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.0 *= beta;
        return;
    }
    // SAFETY: Complex64 is #[repr(C)] { re, im }, layout-identical to
    // [f64; 2]; strides describe the column-major storage of each operand
    // and `out` does not alias the inputs (guaranteed by &mut).
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.0.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.0.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [beta.re, beta.im],
            out.0.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 -= &rhs.0;
    }
}

/// Kronecker product: entry (i·p + k, j·q + l) is a_ij · b_kl.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let mut it = factors.into_iter();
    let first = it.next().cloned().unwrap_or_else(|| ComplexMatrix::identity(1));
    it.fold(first, |acc, f| kron(&acc, f))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Reduced matrix on the `keep` subsystems (in label order).
pub fn partial_trace(m: &ComplexMatrix, label: &SpaceLabel, keep: &[&str]) -> Result<ComplexMatrix> {
    label.check_matrix(m)?;
    let keep_mask = label.mask(keep)?;
    let (kept_offsets, traced_offsets) = label.split_offsets(&keep_mask);
    let n = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (cidx, &co) in kept_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m.0[(ro + t, co + t)];
            }
            out.0[(r, cidx)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the named tensor factor, leaving the others untouched.
pub fn partial_transpose(m: &ComplexMatrix, label: &SpaceLabel, transposed: &str) -> Result<ComplexMatrix> {
    label.check_matrix(m)?;
    let k = label.position(transposed)?;
    let stride = label.stride(k);
    let dk = label.dims()[k];
    let n = m.rows();
    let digit = |idx: usize| (idx / stride) % dk;
    let mut out = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let dj = digit(j);
        for i in 0..n {
            let di = digit(i);
            let ni = i - di * stride + dj * stride;
            let nj = j - dj * stride + di * stride;
            out.0[(ni, nj)] = m.0[(i, j)];
        }
    }
    Ok(out)
}

fn check_hermitian_input(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dims(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let dev = m.hermiticity_defect();
    if dev > 1e-9 * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Real spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian_input(m)?;
    let mut vals: Vec<f64> = SymmetricEigen::new(m.symmetrized().0).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as
/// columns.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian_input(m)?;
    Ok(eigh_unchecked(&m.symmetrized()))
}

pub(crate) fn eigh_unchecked(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(m.0.clone());
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// V diag(f(λ)) V† for a Hermitian matrix.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigh(m)?;
    Ok(spectral_compose(&vals, &vecs, f))
}

pub(crate) fn spectral_compose(vals: &[f64], vecs: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = f(v);
        for i in 0..n {
            scaled.0[(i, j)] *= s;
        }
    }
    scaled.matmul(&vecs.adjoint())
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.first().copied().unwrap_or(0.0))
}

/// Pauli and ladder matrices in the (|0>, |1>) basis with σ_z|0> = |0>.
pub mod pauli {
    use super::{c, re, ComplexMatrix, ZERO};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, &[ZERO, re(1.0), re(1.0), ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    /// |0><1|
    pub fn lower() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, &[ZERO, re(1.0), ZERO, ZERO]).unwrap()
    }

    /// |1><0|
    pub fn raise() -> ComplexMatrix {
        lower().adjoint()
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n, n).symmetrized()
    }

    pub fn random_state(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let g = random_matrix(rng, n, n);
        let rho = g.matmul(&g.adjoint());
        let t = rho.trace().re;
        rho.scale_real(1.0 / t)
    }

    pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        random_hermitian(rng, n).scale(c(0.0, 3.0)).expm()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    fn two_qubits() -> SpaceLabel {
        SpaceLabel::new([("a", 2), ("b", 2)]).unwrap()
    }

    #[test]
    fn kron_identity_and_pauli() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        let zi = kron(&pauli::z(), &ComplexMatrix::identity(2));
        assert_eq!(zi, ComplexMatrix::diag_real(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_matches_definition_elementwise() {
        let mut r = rng(7);
        let a = random_matrix(&mut r, 2, 3);
        let b = random_matrix(&mut r, 3, 2);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_is_associative() {
        let mut r = rng(8);
        let (a, b, cm) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 3, 3), random_matrix(&mut r, 2, 2));
        let left = kron(&kron(&a, &b), &cm);
        let right = kron(&a, &kron(&b, &cm));
        // entries are the same triple products, possibly rounded in a different order
        assert!(left.max_abs_diff(&right) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut r = rng(1);
        let ra = random_state(&mut r, 2);
        let rb = random_state(&mut r, 3);
        let label = SpaceLabel::new([("a", 2), ("b", 3)]).unwrap();
        let prod = kron(&ra, &rb);
        let got_a = partial_trace(&prod, &label, &["a"]).unwrap();
        let got_b = partial_trace(&prod, &label, &["b"]).unwrap();
        assert!(got_a.max_abs_diff(&ra) < 1e-14);
        assert!(got_b.max_abs_diff(&rb) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [re(s), ZERO, ZERO, re(s)];
        let rho = ComplexMatrix::projector(&phi);
        let red = partial_trace(&rho, &two_qubits(), &["a"]).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_middle_factor_and_errors() {
        let mut r = rng(2);
        let (x, y, z) = (random_state(&mut r, 2), random_state(&mut r, 3), random_state(&mut r, 2));
        let label = SpaceLabel::new([("x", 2), ("y", 3), ("z", 2)]).unwrap();
        let full = kron_all([&x, &y, &z]);
        let xz = partial_trace(&full, &label, &["z", "x"]).unwrap();
        assert!(xz.max_abs_diff(&kron(&x, &z)) < 1e-14);
        let none = partial_trace(&full, &label, &[]).unwrap();
        assert!((none[(0, 0)] - ONE).norm() < 1e-14);

        assert!(matches!(partial_trace(&full, &label, &["w"]), Err(Error::UnknownSubsystem(_))));
        let wrong = ComplexMatrix::identity(5);
        assert!(matches!(partial_trace(&wrong, &label, &["x"]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn partial_transpose_cases() {
        let label = two_qubits();
        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert_eq!(partial_transpose(&mixed, &label, "b").unwrap(), mixed);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = ComplexMatrix::projector(&[re(s), ZERO, ZERO, re(s)]);
        let pt = partial_transpose(&phi, &label, "b").unwrap();
        let ev = hermitian_eigenvalues(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{ev:?}");
        }

        let mut r = rng(3);
        let m = random_matrix(&mut r, 4, 4);
        let twice = partial_transpose(&partial_transpose(&m, &label, "a").unwrap(), &label, "a").unwrap();
        assert_eq!(twice, m);
        assert!(matches!(partial_transpose(&m, &label, "q"), Err(Error::UnknownSubsystem(_))));
    }

    #[test]
    fn partial_transpose_of_both_factors_is_full_transpose() {
        let mut r = rng(4);
        let m = random_matrix(&mut r, 6, 6);
        let label = SpaceLabel::new([("a", 2), ("b", 3)]).unwrap();
        let both = partial_transpose(&partial_transpose(&m, &label, "a").unwrap(), &label, "b").unwrap();
        assert_eq!(both, m.transpose());
    }

    #[test]
    fn eigenvalues_simple() {
        let ev = hermitian_eigenvalues(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let ev = hermitian_eigenvalues(&pauli::x()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_trace_identity_and_reconstruction() {
        let mut r = rng(5);
        let h = random_hermitian(&mut r, 8);
        let (vals, vecs) = hermitian_eigh(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = vals.iter().sum();
        assert!((sum - h.trace().re).abs() < 1e-10);
        let rebuilt = spectral_compose(&vals, &vecs, |x| x);
        assert!(rebuilt.distance(&h) < 1e-10 * h.frobenius_norm());
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        assert!(matches!(hermitian_eigenvalues(&pauli::lower()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn hermitian_constructor_symmetrizes() {
        let mut m = pauli::y();
        m[(0, 1)] += c(1e-14, 0.0);
        let h = ComplexMatrix::hermitian(m).unwrap();
        assert!(h.hermiticity_defect() < 1e-15);
        assert!(ComplexMatrix::hermitian(pauli::raise()).is_err());
    }

    #[test]
    fn gemm_matches_naive_product() {
        let mut r = rng(6);
        let a = random_matrix(&mut r, 5, 7);
        let b = random_matrix(&mut r, 7, 3);
        let fast = a.matmul(&b);
        let slow = ComplexMatrix::from_fn(5, 3, |i, j| (0..7).map(|k| a[(i, k)] * b[(k, j)]).sum());
        assert!(fast.max_abs_diff(&slow) < 1e-14);
    }
}
