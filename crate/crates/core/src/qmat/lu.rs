//! Blocked LU with partial pivoting for dense complex systems A X = B. The
//! trailing updates go through zgemm, which matters for the 1024 x 1024
//! Padé denominators of the radical-pair superoperator.

use super::{ComplexMatrix, C64, ONE, ZERO};

const NB: usize = 64;

/// `C -= A * B` on column-major sub-blocks of one buffer (leading dimension
/// `ld`), given as element offsets. The three blocks must not overlap.
fn gemm_sub(buf: *mut C64, ld: usize, (m, k, n): (usize, usize, usize), a: usize, b: usize, c: usize) {
    gemm_sub2(buf as *const C64, ld, buf, ld, (m, k, n), a, b, c);
}

/// As [`gemm_sub`], with A in `abuf` and B, C in `cbuf`.
fn gemm_sub2(abuf: *const C64, lda: usize, cbuf: *mut C64, ldc: usize, (m, k, n): (usize, usize, usize), a: usize, b: usize, c: usize) {
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    // SAFETY: callers pass offsets of disjoint, in-bounds blocks; C64 is
    // layout-identical to [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [-1.0, 0.0],
            abuf.add(a) as *const [f64; 2],
            1,
            lda as isize,
            cbuf.add(b) as *const [f64; 2],
            1,
            ldc as isize,
            [1.0, 0.0],
            cbuf.add(c) as *mut [f64; 2],
            1,
            ldc as isize,
        );
    }
}

/// Solves A X = B. Returns `None` when a pivot is exactly zero.
pub(crate) fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n, "lu_solve shape mismatch");
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let l = lu.as_mut_slice();
    let xs = x.as_mut_slice();

    for k0 in (0..n).step_by(NB) {
        let kend = (k0 + NB).min(n);
        for j in k0..kend {
            let col = &l[j * n..(j + 1) * n];
            let p = (j..n).max_by(|&r, &s| col[r].norm_sqr().total_cmp(&col[s].norm_sqr())).unwrap();
            if col[p] == ZERO {
                return None;
            }
            if p != j {
                for c in 0..n {
                    l.swap(j + c * n, p + c * n);
                }
                for c in 0..m {
                    xs.swap(j + c * n, p + c * n);
                }
            }
            let inv = ONE / l[j + j * n];
            for i in j + 1..n {
                l[i + j * n] *= inv;
            }
            for c in j + 1..kend {
                let f = l[j + c * n];
                if f != ZERO {
                    for i in j + 1..n {
                        let lij = l[i + j * n];
                        l[i + c * n] -= lij * f;
                    }
                }
            }
        }
        if kend < n {
            for c in kend..n {
                for j in k0..kend {
                    let f = l[j + c * n];
                    for i in j + 1..kend {
                        let lij = l[i + j * n];
                        l[i + c * n] -= lij * f;
                    }
                }
            }
            let r = n - kend;
            gemm_sub(l.as_mut_ptr(), n, (r, kend - k0, r), kend + k0 * n, k0 + kend * n, kend + kend * n);
        }
    }

    // forward: L Y = P B
    for k0 in (0..n).step_by(NB) {
        let kend = (k0 + NB).min(n);
        for c in 0..m {
            for j in k0..kend {
                let f = xs[j + c * n];
                for i in j + 1..kend {
                    xs[i + c * n] -= l[i + j * n] * f;
                }
            }
        }
        gemm_sub2(l.as_ptr(), n, xs.as_mut_ptr(), n, (n - kend, kend - k0, m), kend + k0 * n, k0, kend);
    }
    // backward: U X = Y
    let starts: Vec<usize> = (0..n).step_by(NB).collect();
    for &k0 in starts.iter().rev() {
        let kend = (k0 + NB).min(n);
        for c in 0..m {
            for j in (k0..kend).rev() {
                xs[j + c * n] /= l[j + j * n];
                let f = xs[j + c * n];
                for i in k0..j {
                    xs[i + c * n] -= l[i + j * n] * f;
                }
            }
        }
        gemm_sub2(l.as_ptr(), n, xs.as_mut_ptr(), n, (k0, kend - k0, m), k0 * n, k0, 0);
    }
    Some(x)
}
