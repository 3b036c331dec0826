//! Infeasible-start primal-dual interior-point method with Nesterov–Todd
//! scaling and Mehrotra predictor-corrector steps, specialised to
//!
//!   min Σ_λ tr X_λ  s.t.  Σ_{λ: λ(x)=a} X_λ − S_ax = σ_ax,  X_λ, S_ax ⪰ 0
//!   max Σ ⟨F_ax, σ_ax⟩  s.t.  I − Σ_x F_{λ(x)|x} ⪰ 0,  F_ax ⪰ 0.
//!
//! The dual variable y holds the real coordinates of every F_ax. Each
//! strategy block touches only n_x groups, so the Schur complement has
//! dimension n_x·n_a·d² regardless of the number of strategies.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

const REFINE_STEPS: usize = 3;
/// iterations without improving on the best acceptable iterate before stopping
const STALL_ITERATIONS: usize = 5;

struct Best {
    merit: f64,
    iteration: usize,
    x: Vec<ComplexMatrix>,
    y: Vec<f64>,
    z: Vec<ComplexMatrix>,
}

use super::coords::HermitianBasis;
use super::{SdpOptions, SdpProblem, SdpSolution, SolveStatus};
use crate::qmat::{eigh_unchecked, ComplexMatrix};

struct Scaling {
    g: ComplexMatrix,
    ginv: ComplexMatrix,
    w: ComplexMatrix,
    lambda: Vec<f64>,
}

/// G with G†ZG = G⁻¹XG⁻† = Λ, from X = LxLx†, Z = LzLz† and the SVD
/// Lz†Lx = U S V†: G = Lx V S^{-1/2}, G⁻¹ = S^{-1/2} U† Lz†.
fn nt_scaling(x: &ComplexMatrix, z: &ComplexMatrix) -> Option<Scaling> {
    let lx = x.symmetrized().into_dmatrix().cholesky()?.unpack();
    let lz = z.symmetrized().into_dmatrix().cholesky()?.unpack();
    let svd = (lz.adjoint() * &lx).svd(true, true);
    let (u, v_t) = (svd.u?, svd.v_t?);
    let s = svd.singular_values;
    if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let mut g = lx * v_t.adjoint();
    let mut ginv = u.adjoint() * lz.adjoint();
    for (j, &sj) in s.iter().enumerate() {
        let f = 1.0 / sj.sqrt();
        g.column_mut(j).scale_mut(f);
        ginv.row_mut(j).scale_mut(f);
    }
    let g = ComplexMatrix::from_dmatrix(g);
    let w = g.matmul(&g.adjoint()).symmetrized();
    Some(Scaling { ginv: ComplexMatrix::from_dmatrix(ginv), g, w, lambda: s.iter().copied().collect() })
}

/// Largest α with Λ + αD ⪰ 0 (∞ if D ⪰ 0).
fn max_step(lambda: &[f64], d: &ComplexMatrix) -> f64 {
    let n = lambda.len();
    let inv_sqrt: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let m = ComplexMatrix::from_fn(n, n, |i, j| d[(i, j)] * (inv_sqrt[i] * inv_sqrt[j])).symmetrized();
    let (vals, _) = eigh_unchecked(&m);
    let min = vals[0];
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

struct Structure<'a> {
    prob: &'a SdpProblem,
    basis: HermitianBasis,
    /// per strategy: the group index of (λ(x), x) for every x
    groups_of: Vec<Vec<usize>>,
    n_strat: usize,
    n_groups: usize,
    nk: usize,
}

impl<'a> Structure<'a> {
    fn new(prob: &'a SdpProblem) -> Self {
        let strategies = prob.strategies();
        let groups_of = (0..strategies.len())
            .map(|l| strategies.assignment(l).iter().enumerate().map(|(x, &a)| prob.group(x, a)).collect())
            .collect();
        let basis = HermitianBasis::new(prob.dim());
        Self {
            prob,
            nk: basis.len(),
            basis,
            groups_of,
            n_strat: strategies.len(),
            n_groups: prob.n_constraints(),
        }
    }

    fn n_blocks(&self) -> usize {
        self.n_strat + self.n_groups
    }

    fn m(&self) -> usize {
        self.n_groups * self.nk
    }

    fn a_op(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        let d = self.prob.dim();
        let mut sums: Vec<ComplexMatrix> = (0..self.n_groups).map(|_| ComplexMatrix::zeros(d, d)).collect();
        for (l, groups) in self.groups_of.iter().enumerate() {
            for &g in groups {
                sums[g] += &x[l];
            }
        }
        let mut out = vec![0.0; self.m()];
        for (g, s) in sums.iter_mut().enumerate() {
            *s -= &x[self.n_strat + g];
            self.basis.coords_into(s, &mut out[g * self.nk..(g + 1) * self.nk]);
        }
        out
    }

    fn multipliers(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        y.chunks(self.nk).map(|c| self.basis.from_coords(c)).collect()
    }

    fn at_op(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let f = self.multipliers(y);
        let d = self.prob.dim();
        let mut out = Vec::with_capacity(self.n_blocks());
        for groups in &self.groups_of {
            let mut s = ComplexMatrix::zeros(d, d);
            for &g in groups {
                s += &f[g];
            }
            out.push(s);
        }
        out.extend(f.iter().map(|m| -m));
        out
    }

    fn c_block(&self, j: usize) -> ComplexMatrix {
        let d = self.prob.dim();
        if j < self.n_strat {
            ComplexMatrix::identity(d)
        } else {
            ComplexMatrix::zeros(d, d)
        }
    }

    fn schur(&self, scalings: &[Scaling]) -> DMatrix<f64> {
        let (m, nk) = (self.m(), self.nk);
        let mut schur = DMatrix::<f64>::zeros(m, m);
        let mut k = vec![0.0; nk * nk];
        let add = |schur: &mut DMatrix<f64>, k: &[f64], g1: usize, g2: usize| {
            for c in 0..nk {
                let mut col = schur.column_mut(g2 * nk + c);
                for r in 0..nk {
                    col[g1 * nk + r] += k[r + nk * c];
                }
            }
        };
        for (l, groups) in self.groups_of.iter().enumerate() {
            self.basis.congruence_into(&scalings[l].w, &mut k);
            for &g1 in groups {
                for &g2 in groups {
                    add(&mut schur, &k, g1, g2);
                }
            }
        }
        for g in 0..self.n_groups {
            self.basis.congruence_into(&scalings[self.n_strat + g].w, &mut k);
            add(&mut schur, &k, g, g);
        }
        schur
    }
}

struct Direction {
    dx: Vec<ComplexMatrix>,
    dy: Vec<f64>,
    dz: Vec<ComplexMatrix>,
}

/// Cholesky of the Schur complement. Near the optimum it can lose
/// definiteness to round-off; then a growing diagonal shift is tried, which
/// only perturbs the search direction since residuals are recomputed.
fn factor_schur(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Some(c);
    }
    let scale = m.diagonal().iter().copied().fold(0.0, f64::max);
    for shift in [1e-14, 1e-12, 1e-10] {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += shift * scale;
        }
        if let Some(c) = r.cholesky() {
            return Some(c);
        }
    }
    None
}

/// y ↦ A(W (Aᵀy) W), the Schur operator applied without forming it.
fn apply_schur(st: &Structure, sc: &[Scaling], y: &[f64]) -> Vec<f64> {
    let aty = st.at_op(y);
    let wv: Vec<ComplexMatrix> = sc.iter().zip(&aty).map(|(s, v)| s.w.matmul(v).matmul(&s.w)).collect();
    st.a_op(&wv)
}

/// Cholesky solve followed by refinement against the operator form, so the
/// step keeps the primal residual under control even when the factor is
/// shifted or inaccurate.
fn refined_solve(st: &Structure, sc: &[Scaling], chol: &Cholesky<f64, Dyn>, rhs: &DVector<f64>) -> Vec<f64> {
    let residual = |y: &DVector<f64>| {
        let my = apply_schur(st, sc, y.as_slice());
        DVector::from_iterator(rhs.len(), rhs.iter().zip(&my).map(|(b, m)| b - m))
    };
    let mut y = chol.solve(rhs);
    let mut r = residual(&y);
    for _ in 0..REFINE_STEPS {
        if r.norm() <= 1e-15 * rhs.norm() {
            break;
        }
        let next = &y + chol.solve(&r);
        let rn = residual(&next);
        if rn.norm() >= r.norm() {
            break;
        }
        (y, r) = (next, rn);
    }
    y.iter().copied().collect()
}

fn direction(
    st: &Structure,
    sc: &[Scaling],
    chol: &Cholesky<f64, Dyn>,
    rp: &[f64],
    rd: &[ComplexMatrix],
    rc_scaled: &[ComplexMatrix],
) -> Direction {
    let rc: Vec<ComplexMatrix> = sc.iter().zip(rc_scaled).map(|(s, r)| s.g.matmul(r).matmul(&s.g.adjoint())).collect();
    let t: Vec<ComplexMatrix> = rc.iter().zip(sc).zip(rd).map(|((r, s), d)| r - &s.w.matmul(d).matmul(&s.w)).collect();
    let at = st.a_op(&t);
    let rhs = DVector::from_iterator(rp.len(), rp.iter().zip(&at).map(|(p, a)| p - a));
    let dy = refined_solve(st, sc, chol, &rhs);
    let aty = st.at_op(&dy);
    let dz: Vec<ComplexMatrix> = rd.iter().zip(&aty).map(|(r, a)| (r - a).symmetrized()).collect();
    let mut dx: Vec<ComplexMatrix> =
        rc.iter().zip(sc).zip(&dz).map(|((r, s), z)| (r - &s.w.matmul(z).matmul(&s.w)).symmetrized()).collect();
    // Slacks enter A with coefficient −1, so whatever the Schur solve left in
    // A·dx − rp can be absorbed exactly by the slack directions. Without this
    // an inaccurate late solve leaves a primal residual that never recovers.
    let miss = st.a_op(&dx);
    for (g, chunk) in rp.iter().zip(&miss).map(|(p, a)| p - a).collect::<Vec<_>>().chunks(st.nk).enumerate() {
        let j = st.n_strat + g;
        dx[j] = (&dx[j] - &st.basis.from_coords(chunk)).symmetrized();
    }
    Direction { dx, dy, dz }
}

fn scaled(sc: &[Scaling], dir: &Direction) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let dxs = sc.iter().zip(&dir.dx).map(|(s, d)| s.ginv.matmul(d).matmul(&s.ginv.adjoint())).collect();
    let dzs = sc.iter().zip(&dir.dz).map(|(s, d)| s.g.adjoint().matmul(d).matmul(&s.g)).collect();
    (dxs, dzs)
}

fn step_lengths(sc: &[Scaling], dxs: &[ComplexMatrix], dzs: &[ComplexMatrix]) -> (f64, f64) {
    let ap = sc.iter().zip(dxs).map(|(s, d)| max_step(&s.lambda, d)).fold(f64::INFINITY, f64::min);
    let ad = sc.iter().zip(dzs).map(|(s, d)| max_step(&s.lambda, d)).fold(f64::INFINITY, f64::min);
    (ap, ad)
}

fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner_real(y)).sum()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(x: &mut [ComplexMatrix], alpha: f64, d: &[ComplexMatrix]) {
    for (xi, di) in x.iter_mut().zip(d) {
        *xi = (&*xi + &di.scale_real(alpha)).symmetrized();
    }
}

pub(super) fn solve(prob: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let start = Instant::now();
    let st = Structure::new(prob);
    let d = prob.dim();
    let (n_strat, n_groups) = (st.n_strat, st.n_groups);
    let total_dim = (st.n_blocks() * d) as f64;

    let b: Vec<f64> = (0..n_groups).flat_map(|g| st.basis.coords(prob.datum(g))).collect();
    let b_norm = norm2(&b);
    let c_norm = (n_strat as f64 * d as f64).sqrt();

    // Interior start: σ_λ = c·I with every slack ⪰ δ·λ_max(σ_ax)·I, and
    // F_ax = I/(2 n_x) so that Z_λ = I/2.
    let lmax = (0..n_groups)
        .map(|g| eigh_unchecked(&prob.datum(g).symmetrized()).0.last().copied().unwrap_or(0.0))
        .fold(0.0, f64::max)
        .max(1e-3);
    let per_group = (n_strat / prob.n_outcomes()) as f64;
    let c0 = 2.0 * lmax / per_group;
    let mut x: Vec<ComplexMatrix> = (0..n_strat).map(|_| ComplexMatrix::identity(d).scale_real(c0)).collect();
    for g in 0..n_groups {
        x.push((&ComplexMatrix::identity(d).scale_real(c0 * per_group) - prob.datum(g)).symmetrized());
    }
    let eps = 1.0 / (2.0 * prob.n_settings() as f64);
    let mut y: Vec<f64> = Vec::with_capacity(st.m());
    for _ in 0..n_groups {
        y.extend((0..st.nk).map(|k| if k < d { eps } else { 0.0 }));
    }
    let mut z: Vec<ComplexMatrix> = st.at_op(&y).iter().enumerate().map(|(j, a)| &st.c_block(j) - a).collect();

    let mut iterations = 0;
    let mut best: Option<Best> = None;
    let status = loop {
        let ax = st.a_op(&x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let aty = st.at_op(&y);
        let rd: Vec<ComplexMatrix> = (0..st.n_blocks()).map(|j| &(&st.c_block(j) - &z[j]) - &aty[j]).collect();
        let pobj: f64 = x[..n_strat].iter().map(|m| m.trace().re).sum();
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = norm2(&rp) / (1.0 + b_norm);
        let dinf = rd.iter().map(|m| m.frobenius_norm().powi(2)).sum::<f64>().sqrt() / (1.0 + c_norm);
        if rel_gap < opts.gap_tol && pinf < opts.feasibility_tol && dinf < opts.feasibility_tol {
            best = None;
            break SolveStatus::Optimal;
        }
        let acceptable = rel_gap < opts.accept_gap_tol
            && pinf < opts.accept_feasibility_tol
            && dinf < opts.accept_feasibility_tol;
        if acceptable {
            let merit = (rel_gap / opts.gap_tol).max(pinf / opts.feasibility_tol).max(dinf / opts.feasibility_tol);
            if best.as_ref().is_none_or(|b| merit < b.merit) {
                best = Some(Best { merit, iteration: iterations, x: x.clone(), y: y.clone(), z: z.clone() });
            }
        }
        if best.as_ref().is_some_and(|b| iterations - b.iteration >= STALL_ITERATIONS) {
            break SolveStatus::Optimal;
        }
        if iterations >= opts.max_iterations {
            break SolveStatus::IterationLimit;
        }
        iterations += 1;

        let Some(sc) = x.iter().zip(&z).map(|(xi, zi)| nt_scaling(xi, zi)).collect::<Option<Vec<_>>>() else {
            break SolveStatus::InfeasibleNumerics;
        };
        let mu = inner(&x, &z) / total_dim;
        let Some(chol) = factor_schur(st.schur(&sc)) else {
            break SolveStatus::InfeasibleNumerics;
        };

        let affine: Vec<ComplexMatrix> = sc.iter().map(|s| ComplexMatrix::diag_real(&s.lambda).scale_real(-1.0)).collect();
        let pred = direction(&st, &sc, &chol, &rp, &rd, &affine);
        let (dxs, dzs) = scaled(&sc, &pred);
        let (ap, ad) = step_lengths(&sc, &dxs, &dzs);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut x_aff = x.clone();
        axpy(&mut x_aff, ap, &pred.dx);
        let mut z_aff = z.clone();
        axpy(&mut z_aff, ad, &pred.dz);
        let mu_aff = inner(&x_aff, &z_aff) / total_dim;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        let target: Vec<ComplexMatrix> = sc
            .iter()
            .zip(dxs.iter().zip(&dzs))
            .map(|(s, (dx, dz))| {
                let corr = &dx.matmul(dz) + &dz.matmul(dx);
                let n = s.lambda.len();
                ComplexMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { 2.0 * (sigma * mu - s.lambda[i] * s.lambda[i]) } else { 0.0 };
                    (crate::qmat::re(diag) - corr[(i, j)]) / (s.lambda[i] + s.lambda[j])
                })
            })
            .collect();
        let dir = direction(&st, &sc, &chol, &rp, &rd, &target);
        let (dxs, dzs) = scaled(&sc, &dir);
        let (ap, ad) = step_lengths(&sc, &dxs, &dzs);
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        axpy(&mut x, ap, &dir.dx);
        axpy(&mut z, ad, &dir.dz);
        for (yi, di) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * di;
        }
    };

    // a stalled or failed run falls back to its best acceptable iterate
    let status = match best {
        Some(b) => {
            (x, y, z) = (b.x, b.y, b.z);
            SolveStatus::Optimal
        }
        _ => status,
    };
    let ax = st.a_op(&x);
    let primal_residual = norm2(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>());
    let aty = st.at_op(&y);
    let dual_residual = (0..st.n_blocks())
        .map(|j| (&(&st.c_block(j) - &z[j]) - &aty[j]).frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt();
    let pobj: f64 = x[..n_strat].iter().map(|m| m.trace().re).sum();
    let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
    SdpSolution {
        primal_value: pobj - 1.0,
        dual_value: dobj - 1.0,
        gap: (pobj - dobj).abs(),
        status,
        iterations,
        primal_residual,
        dual_residual,
        complementarity: inner(&x, &z),
        multipliers: st.multipliers(&y),
        slacks: x.split_off(n_strat),
        primal_blocks: x,
        wall_time: start.elapsed(),
    }
}
