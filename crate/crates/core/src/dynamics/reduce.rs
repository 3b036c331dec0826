use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{partial_trace, ComplexMatrix, DensityMatrix, SpaceLabel};

/// Below this projected weight a state counts as fully decayed.
const DECAYED_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionMode {
    TraceOut,
    ProjectAndRenormalize,
}

/// How a full-space state is turned into the state of the kept subsystems.
#[derive(Clone, Debug)]
pub struct ReductionSpec {
    label: SpaceLabel,
    keep: Vec<String>,
    projector: Option<ComplexMatrix>,
}

impl ReductionSpec {
    pub fn trace_out(label: SpaceLabel, keep: &[&str]) -> Result<Self> {
        label.mask(keep)?;
        Ok(Self { label, keep: keep.iter().map(|s| s.to_string()).collect(), projector: None })
    }

    /// P ρ P / tr(P ρ P), then the partial trace onto `keep`.
    pub fn project(label: SpaceLabel, keep: &[&str], projector: ComplexMatrix) -> Result<Self> {
        label.mask(keep)?;
        let d = label.dim();
        if projector.rows() != d || projector.cols() != d {
            return Err(Error::dims(format!("projector must be {d}x{d}")));
        }
        let defect = projector.matmul(&projector).max_abs_diff(&projector);
        if defect > 1e-10 || projector.hermiticity_defect() > 1e-10 {
            return Err(Error::InvalidParameter(format!("projector is not an orthogonal projector (defect {defect:e})")));
        }
        Ok(Self { label, keep: keep.iter().map(|s| s.to_string()).collect(), projector: Some(projector) })
    }

    pub fn mode(&self) -> ReductionMode {
        if self.projector.is_some() {
            ReductionMode::ProjectAndRenormalize
        } else {
            ReductionMode::TraceOut
        }
    }

    pub fn label(&self) -> &SpaceLabel {
        &self.label
    }

    pub fn kept_label(&self) -> SpaceLabel {
        self.label.restrict(&self.keep_refs()).expect("validated on construction")
    }

    pub fn output_dim(&self) -> usize {
        self.kept_label().dim()
    }

    fn keep_refs(&self) -> Vec<&str> {
        self.keep.iter().map(String::as_str).collect()
    }

    /// The linear part of the reduction: Tr_rest(P m P), without
    /// renormalization. Applied member-wise to assemblages so that a common
    /// normalization keeps them consistent.
    pub fn apply_linear(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let projected = match &self.projector {
            Some(p) => p.matmul(m).matmul(p),
            None => m.clone(),
        };
        partial_trace(&projected, &self.label, &self.keep_refs())
    }
}

pub fn reduce(rho: &DensityMatrix, spec: &ReductionSpec) -> Result<DensityMatrix> {
    let out = spec.apply_linear(rho.matrix())?;
    match spec.mode() {
        ReductionMode::TraceOut => Ok(DensityMatrix::from_matrix_unchecked(out)),
        ReductionMode::ProjectAndRenormalize => {
            let w = out.trace().re;
            if w < DECAYED_TOL {
                return Err(Error::FullyDecayed(w));
            }
            DensityMatrix::new(out.scale_real(1.0 / w))
        }
    }
}
