//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (orders 3, 5, 7, 9, 13), selected on the 1-norm.

use super::lu::lu_solve;
use super::ComplexMatrix;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub(super) fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return a.clone();
    }
    let norm = a.one_norm();
    if norm == 0.0 {
        return ComplexMatrix::identity(n);
    }

    for (order, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match order {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = low_order_terms(a, coeffs);
            return pade_solve(&u, &v);
        }
    }

    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a.scale_real(0.5_f64.powi(s));
    let (u, v) = order13_terms(&scaled);
    let mut r = pade_solve(&u, &v);
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

fn lincomb(terms: &[(f64, &ComplexMatrix)], identity_coeff: f64) -> ComplexMatrix {
    let n = terms[0].1.rows();
    let mut out = ComplexMatrix::identity(n).scale_real(identity_coeff);
    for (coef, m) in terms {
        out.0.zip_apply(&m.0, |o, x| *o += x * *coef);
    }
    out
}

fn low_order_terms(a: &ComplexMatrix, b: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    // powers A^2, A^4, ... up to the order
    let m = b.len() - 1;
    let a2 = a.matmul(a);
    let mut even = vec![a2.clone()];
    while 2 * (even.len() + 1) <= m {
        let next = even.last().unwrap().matmul(&a2);
        even.push(next);
    }
    let odd_terms: Vec<(f64, &ComplexMatrix)> = even.iter().enumerate().map(|(k, p)| (b[2 * k + 3], p)).collect();
    let even_terms: Vec<(f64, &ComplexMatrix)> = even.iter().enumerate().map(|(k, p)| (b[2 * k + 2], p)).collect();
    let u = a.matmul(&lincomb(&odd_terms, b[1]));
    let v = lincomb(&even_terms, b[0]);
    (u, v)
}

fn order13_terms(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &B13;
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let inner_u = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
    let mut u = a6.matmul(&inner_u);
    u += &lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1]);
    let u = a.matmul(&u);

    let inner_v = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
    let mut v = a6.matmul(&inner_v);
    v += &lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0]);
    (u, v)
}

/// Solves (V - U) R = V + U.
fn pade_solve(u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    let p = v + u;
    let q = v - u;
    lu_solve(&q, &p).expect("Padé denominator is singular")
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::super::{c, pauli, ComplexMatrix, I};

    fn taylor(a: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let n = a.rows();
        let mut sum = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        for k in 1..terms {
            term = term.matmul(a).scale_real(1.0 / k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(ComplexMatrix::zeros(3, 3).expm(), ComplexMatrix::identity(3));
    }

    #[test]
    fn pauli_rotation() {
        let arg = pauli::x().scale(I * std::f64::consts::FRAC_PI_2);
        let got = arg.expm();
        let want = pauli::x().scale(I);
        assert!(got.max_abs_diff(&want) < 1e-14, "{got:?}");
    }

    #[test]
    fn matches_taylor_series_at_every_pade_order() {
        let mut r = rng(11);
        let base = random_matrix(&mut r, 6, 6);
        // norms chosen to land in each approximant's range
        for target in [0.01, 0.2, 0.8, 1.8, 4.0, 9.0] {
            let a = base.scale_real(target / base.one_norm());
            // at norm 9 the Taylor terms peak around 9^9/9! ~ 1e3; 80 terms
            // drive the remainder far below double precision
            let want = taylor(&a, 80);
            let got = a.expm();
            let rel = got.distance(&want) / want.frobenius_norm();
            assert!(rel < 1e-13, "norm {target}: rel err {rel:e}");
        }
    }

    #[test]
    fn skew_hermitian_gives_unitary() {
        let mut r = rng(12);
        let h = random_hermitian(&mut r, 8).scale_real(5.0);
        let u = h.scale(c(0.0, -1.0)).expm();
        let uu = u.matmul(&u.adjoint());
        assert!(uu.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-10);
    }

    #[test]
    fn inverse_pair_for_large_norms() {
        let mut r = rng(13);
        let a = random_matrix(&mut r, 10, 10);
        let a = a.scale_real(10.0 / a.one_norm());
        let prod = a.expm().matmul(&a.scale_real(-1.0).expm());
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(10)) < 1e-9);
    }
}
