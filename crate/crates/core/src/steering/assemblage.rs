use crate::dynamics::{propagate_many, Liouvillian, Method, ReductionMode, ReductionSpec};
use crate::error::{Error, Result};
use crate::qmat::{hermitian_eigenvalues, ComplexMatrix, DensityMatrix, SpaceLabel};

use super::MeasurementSet;

/// Slack on positivity, trace and no-signalling checks.
pub const ASSEMBLAGE_TOL: f64 = 1e-8;

/// Subnormalized conditional states σ_{a|x}, stored setting-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    dim: usize,
    n_settings: usize,
    n_outcomes: usize,
    members: Vec<ComplexMatrix>,
}

impl Assemblage {
    /// Validates Hermiticity, positivity (down to −1e-8), that every setting
    /// sums to the same operator and that this operator has unit trace.
    pub fn new(n_settings: usize, n_outcomes: usize, members: Vec<ComplexMatrix>) -> Result<Self> {
        let asm = Self::from_parts(n_settings, n_outcomes, members)?;
        asm.check()?;
        Ok(asm)
    }

    fn from_parts(n_settings: usize, n_outcomes: usize, members: Vec<ComplexMatrix>) -> Result<Self> {
        if n_settings == 0 || n_outcomes == 0 {
            return Err(Error::Assemblage("need at least one setting and one outcome".into()));
        }
        if members.len() != n_settings * n_outcomes {
            return Err(Error::Assemblage(format!(
                "{} members for {n_settings} settings x {n_outcomes} outcomes",
                members.len()
            )));
        }
        let dim = members[0].rows();
        if members.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::Assemblage(format!("members must all be {dim}x{dim}")));
        }
        Ok(Self { dim, n_settings, n_outcomes, members })
    }

    fn check(&self) -> Result<()> {
        for x in 0..self.n_settings {
            for a in 0..self.n_outcomes {
                let m = self.member(x, a);
                let defect = m.hermiticity_defect();
                if defect > ASSEMBLAGE_TOL {
                    return Err(Error::Assemblage(format!("sigma({a}|{x}) is not Hermitian ({defect:.2e})")));
                }
                let min = hermitian_eigenvalues(&m.symmetrized())?[0];
                if min < -ASSEMBLAGE_TOL {
                    return Err(Error::Assemblage(format!("sigma({a}|{x}) has eigenvalue {min:.3e}")));
                }
            }
        }
        let drift = self.max_signaling();
        if drift > ASSEMBLAGE_TOL {
            return Err(Error::Assemblage(format!("marginals differ across settings by {drift:.2e}")));
        }
        let total = self.marginal(0).trace().re;
        if (total - 1.0).abs() > ASSEMBLAGE_TOL {
            return Err(Error::Assemblage(format!("total trace is {total}, expected 1")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn member(&self, x: usize, a: usize) -> &ComplexMatrix {
        &self.members[x * self.n_outcomes + a]
    }

    /// Members in setting-major order.
    pub fn members(&self) -> &[ComplexMatrix] {
        &self.members
    }

    pub fn probability(&self, x: usize, a: usize) -> f64 {
        self.member(x, a).trace().re
    }

    /// Σ_a σ_{a|x}.
    pub fn marginal(&self, x: usize) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for a in 0..self.n_outcomes {
            sum += self.member(x, a);
        }
        sum
    }

    /// Largest Frobenius distance between any two settings' marginals.
    pub fn max_signaling(&self) -> f64 {
        let marginals: Vec<_> = (0..self.n_settings).map(|x| self.marginal(x)).collect();
        let mut worst = 0.0_f64;
        for (i, m) in marginals.iter().enumerate() {
            for n in &marginals[i + 1..] {
                worst = worst.max(m.distance(n));
            }
        }
        worst
    }

    /// Keeps the listed settings (0-based), in order.
    pub fn select_settings(&self, settings: &[usize]) -> Result<Self> {
        let mut members = Vec::with_capacity(settings.len() * self.n_outcomes);
        for &x in settings {
            if x >= self.n_settings {
                return Err(Error::InvalidParameter(format!("setting {x} out of range 0..{}", self.n_settings)));
            }
            for a in 0..self.n_outcomes {
                members.push(self.member(x, a).clone());
            }
        }
        Self::from_parts(settings.len(), self.n_outcomes, members)
    }

    /// Applies a linear map to every member without revalidating.
    pub fn map_members(&self, f: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>) -> Result<Self> {
        let members = self.members.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_parts(self.n_settings, self.n_outcomes, members)
    }

    /// Re-runs the constructor checks.
    pub fn validate(&self) -> Result<()> {
        self.check()
    }
}

/// Embeds an operator on the `targets` subsystems into the full space as
/// op ⊗ I_rest, respecting the label's factor order.
pub fn embed(op: &ComplexMatrix, label: &SpaceLabel, targets: &[&str]) -> Result<ComplexMatrix> {
    let mask = label.mask(targets)?;
    let sub = label.dim_of(targets)?;
    if op.rows() != sub || op.cols() != sub {
        return Err(Error::dims(format!("operator is {}x{}, targets have dimension {sub}", op.rows(), op.cols())));
    }
    // targets listed out of label order would silently permute the operator
    let order: Vec<usize> = targets.iter().map(|t| label.position(t)).collect::<Result<_>>()?;
    if order.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("targets must be listed in label order".into()));
    }
    let (kept, rest) = label.split_offsets(&mask);
    let d = label.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for &r in &rest {
        for (p, &kp) in kept.iter().enumerate() {
            for (q, &kq) in kept.iter().enumerate() {
                out[(kp + r, kq + r)] = op[(p, q)];
            }
        }
    }
    Ok(out)
}

/// σ_{a|x}(0) = M_{a|x} ρ₀ M_{a|x}, with M acting on `measured` (which must
/// have the measurement's dimension) and the identity elsewhere.
pub fn initial_assemblage(
    rho0: &DensityMatrix,
    meas: &MeasurementSet,
    label: &SpaceLabel,
    measured: &[&str],
) -> Result<Assemblage> {
    label.check_matrix(rho0.matrix())?;
    let mut members = Vec::with_capacity(meas.n_settings() * meas.n_outcomes());
    for x in 0..meas.n_settings() {
        for a in 0..meas.n_outcomes() {
            let m = embed(&meas.projector(x, a), label, measured)?;
            members.push(m.matmul(rho0.matrix()).matmul(&m).symmetrized());
        }
    }
    Assemblage::new(meas.n_settings(), meas.n_outcomes(), members)
}

/// Propagates every member under `l` and reduces it with `spec` (or keeps
/// the full space when `spec` is `None`). In project-and-renormalize mode all
/// members at a time share one normalization, tr Σ_a σ_{a|0}, so no-signalling
/// is preserved.
pub fn evolve_assemblage(
    asm0: &Assemblage,
    l: &Liouvillian,
    times: &[f64],
    spec: Option<&ReductionSpec>,
    method: Method,
) -> Result<Vec<Assemblage>> {
    let series = propagate_many(l, asm0.members(), times, method)?;
    let (nx, na) = (asm0.n_settings(), asm0.n_outcomes());
    let mut out = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let mut members = Vec::with_capacity(series.len());
        for member in &series {
            let m = if t == 0.0 { asm0.members()[members.len()].clone() } else { member[k].symmetrized() };
            members.push(match spec {
                Some(s) => s.apply_linear(&m)?,
                None => m,
            });
        }
        if spec.is_some_and(|s| s.mode() == ReductionMode::ProjectAndRenormalize) {
            let w: f64 = members[..na].iter().map(|m| m.trace().re).sum();
            if w < 1e-12 {
                return Err(Error::FullyDecayed(w));
            }
            members.iter_mut().for_each(|m| *m = m.scale_real(1.0 / w));
        }
        out.push(Assemblage::new(nx, na, members)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::*;
    use crate::qmat::testing::*;
    use crate::qmat::{kron, partial_trace};
    use crate::steering::build_mubs_d4;

    #[test]
    fn embed_matches_kron_in_any_position() {
        let mut r = rng(51);
        let label = SpaceLabel::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let op = random_matrix(&mut r, 3, 3);
        let want = kron(&kron(&ComplexMatrix::identity(2), &op), &ComplexMatrix::identity(2));
        assert!(embed(&op, &label, &["b"]).unwrap().max_abs_diff(&want) < 1e-15);
        let op2 = random_matrix(&mut r, 4, 4);
        assert!(embed(&op2, &label, &["c", "a"]).is_err());
        assert!(embed(&op2, &label, &["b"]).is_err());
    }

    #[test]
    fn embed_of_product_is_product_of_embeds() {
        let mut r = rng(52);
        let label = SpaceLabel::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let (pa, pc) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2));
        let joint = embed(&kron(&pa, &pc), &label, &["a", "c"]).unwrap();
        let sep = embed(&pa, &label, &["a"]).unwrap().matmul(&embed(&pc, &label, &["c"]).unwrap());
        assert!(joint.max_abs_diff(&sep) < 1e-14);
    }

    #[test]
    fn initial_assemblage_of_maximally_mixed_state() {
        let label = coupled_qubit_label();
        let rho = DensityMatrix::maximally_mixed(4);
        let asm = initial_assemblage(&rho, &build_mubs_d4(), &label, &[QUBIT1, QUBIT2]).unwrap();
        assert_eq!((asm.n_settings(), asm.n_outcomes(), asm.dim()), (5, 4, 4));
        for x in 0..5 {
            for a in 0..4 {
                assert!((asm.probability(x, a) - 0.25).abs() < 1e-15);
            }
        }
        assert!(asm.max_signaling() < 1e-15);
    }

    #[test]
    fn rejects_signalling_and_negative_members() {
        let p0 = ComplexMatrix::diag_real(&[0.5, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 0.5]);
        let q = ComplexMatrix::diag_real(&[0.25, 0.25]);
        assert!(Assemblage::new(2, 2, vec![p0.clone(), p1.clone(), q.clone(), q.clone()]).is_ok());
        assert!(Assemblage::new(2, 2, vec![p0.clone(), p1.clone(), p0.clone(), p0.clone()]).is_err());
        let neg = ComplexMatrix::diag_real(&[0.75, -0.25]);
        assert!(Assemblage::new(1, 2, vec![neg, ComplexMatrix::diag_real(&[-0.25, 0.75])]).is_err());
        assert!(Assemblage::new(1, 2, vec![p0.scale_real(3.0), p1.scale_real(3.0)]).is_err());
        assert!(Assemblage::new(1, 2, vec![p0.scale_real(0.5), p1.scale_real(0.5)]).is_err());
        assert!(Assemblage::new(2, 2, vec![p0]).is_err());
    }

    #[test]
    fn evolution_is_linear_and_consistent() {
        let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma: 1.0 }).unwrap();
        let rho = DensityMatrix::maximally_mixed(4);
        let asm0 = initial_assemblage(&rho, &build_mubs_d4(), &coupled_qubit_label(), &[QUBIT1, QUBIT2]).unwrap();
        let times = [0.0, 0.3, 1.1];
        let series = evolve_assemblage(&asm0, &l, &times, None, Method::default()).unwrap();
        assert_eq!(series[0], asm0);
        let states = propagate(&l, &rho, &times).unwrap();
        for (asm, st) in series.iter().zip(&states) {
            for x in 0..5 {
                assert!(asm.marginal(x).max_abs_diff(st.matrix()) < 1e-9);
                for a in 0..4 {
                    assert!((asm.probability(x, a) - 0.25).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn eigenstate_and_signalling_initial_states() {
        let label = coupled_qubit_label();
        let meas = build_mubs_d4().first(1).unwrap();
        let basis2 = build_mubs_d4().select(&[1]).unwrap();
        let rho = DensityMatrix::pure(basis2.vector(0, 0)).unwrap();
        let asm = initial_assemblage(&rho, &basis2, &label, &[QUBIT1, QUBIT2]).unwrap();
        assert!(asm.member(0, 0).max_abs_diff(rho.matrix()) < 1e-15);
        for a in 1..4 {
            assert!(asm.member(0, a).max_abs() < 1e-15);
        }
        // a pure state measured in two unbiased bases is disturbed differently
        let two = build_mubs_d4().first(2).unwrap();
        assert!(matches!(initial_assemblage(&rho, &two, &label, &[QUBIT1, QUBIT2]), Err(Error::Assemblage(_))));
        assert!(initial_assemblage(&rho, &meas, &label, &[QUBIT1]).is_err());
    }

    #[test]
    fn identity_channel_leaves_assemblage_unchanged() {
        let label = coupled_qubit_label();
        let asm0 = initial_assemblage(&DensityMatrix::maximally_mixed(4), &build_mubs_d4(), &label, &[QUBIT1, QUBIT2]).unwrap();
        let l = Liouvillian::identity_channel(label);
        for asm in evolve_assemblage(&asm0, &l, &[0.0, 1.0, 5.0], None, Method::default()).unwrap() {
            for (m, m0) in asm.members().iter().zip(asm0.members()) {
                assert!(m.max_abs_diff(m0) < 1e-15);
            }
        }
    }

    #[test]
    fn reduced_evolution_traces_out_ancillas() {
        let p = RadicalPairParams::default();
        let l = build_radical_pair_liouvillian(&p).unwrap();
        let label = radical_pair_label();
        let keep = [ELECTRON1, ELECTRON2];
        let meas = build_mubs_d4().first(2).unwrap().in_frame(&electron_pair_basis()).unwrap();
        let rho = radical_pair_initial_state();
        let asm0 = initial_assemblage(&rho, &meas, &label, &keep).unwrap();
        let spec = ReductionSpec::trace_out(label.clone(), &keep).unwrap();
        let times = [0.0, 3e-6];
        let series = evolve_assemblage(&asm0, &l, &times, Some(&spec), Method::Exponential).unwrap();
        let states = propagate_exponential(&l, &rho, &times).unwrap();
        for (asm, st) in series.iter().zip(&states) {
            assert_eq!(asm.dim(), 4);
            let reduced = partial_trace(st.matrix(), &label, &keep).unwrap();
            assert!(asm.marginal(1).max_abs_diff(&reduced) < 1e-9);
        }

        let pspec = ReductionSpec::project(label, &keep, undecayed_projector()).unwrap();
        let series = evolve_assemblage(&asm0, &l, &times, Some(&pspec), Method::Exponential).unwrap();
        for asm in &series {
            assert!((asm.marginal(0).trace().re - 1.0).abs() < 1e-12);
            assert!(asm.max_signaling() < 1e-12);
        }
    }
}
