//! JSON file format for assemblages.
//!
//! ```json
//! {
//!   "format": "temporal-steering-assemblage",
//!   "version": 1,
//!   "dimension": 2,
//!   "n_x": 1,
//!   "n_a": 2,
//!   "members": [
//!     { "x": 0, "a": 0, "entries": [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]] },
//!     { "x": 0, "a": 1, "entries": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]] }
//!   ]
//! }
//! ```
//!
//! Settings `x` and outcomes `a` are 0-based. `entries` is the matrix in
//! row-major order as `[re, im]` pairs. Numbers are written with shortest
//! round-trip formatting, so reading a written file gives back the same bits.
//! Members may appear in any order but every `(x, a)` must appear once.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Assemblage;
use crate::error::{Error, Result};
use crate::qmat::{c, ComplexMatrix};

pub const FORMAT_TAG: &str = "temporal-steering-assemblage";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FileMember {
    x: usize,
    a: usize,
    entries: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAssemblage {
    format: String,
    version: u32,
    dimension: usize,
    n_x: usize,
    n_a: usize,
    members: Vec<FileMember>,
}

pub fn assemblage_to_json(asm: &Assemblage) -> String {
    let mut members = Vec::with_capacity(asm.members().len());
    for x in 0..asm.n_settings() {
        for a in 0..asm.n_outcomes() {
            let entries = asm.member(x, a).to_row_major().iter().map(|z| [z.re, z.im]).collect();
            members.push(FileMember { x, a, entries });
        }
    }
    let file = FileAssemblage {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        dimension: asm.dim(),
        n_x: asm.n_settings(),
        n_a: asm.n_outcomes(),
        members,
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

/// Parses and validates (see [`Assemblage::new`]).
pub fn assemblage_from_json(text: &str) -> Result<Assemblage> {
    let file: FileAssemblage = serde_json::from_str(text)?;
    if file.format != FORMAT_TAG {
        return Err(Error::Assemblage(format!("format tag is `{}`, expected `{FORMAT_TAG}`", file.format)));
    }
    if file.version != FORMAT_VERSION {
        return Err(Error::Assemblage(format!("unsupported format version {}", file.version)));
    }
    let (d, nx, na) = (file.dimension, file.n_x, file.n_a);
    if d == 0 {
        return Err(Error::Assemblage("dimension must be positive".into()));
    }
    let mut slots: Vec<Option<ComplexMatrix>> = vec![None; nx * na];
    for m in file.members {
        if m.x >= nx || m.a >= na {
            return Err(Error::Assemblage(format!("member ({}, {}) outside {nx} settings x {na} outcomes", m.x, m.a)));
        }
        if m.entries.len() != d * d {
            return Err(Error::Assemblage(format!("member ({}, {}) has {} entries, expected {}", m.x, m.a, m.entries.len(), d * d)));
        }
        let values: Vec<_> = m.entries.iter().map(|&[re, im]| c(re, im)).collect();
        let slot = &mut slots[m.x * na + m.a];
        if slot.is_some() {
            return Err(Error::Assemblage(format!("member ({}, {}) given twice", m.x, m.a)));
        }
        *slot = Some(ComplexMatrix::from_row_major(d, d, &values)?);
    }
    let members = slots
        .into_iter()
        .enumerate()
        .map(|(k, s)| s.ok_or_else(|| Error::Assemblage(format!("member ({}, {}) missing", k / na, k % na))))
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(nx, na, members)
}

pub fn write_assemblage(path: impl AsRef<Path>, asm: &Assemblage) -> Result<()> {
    std::fs::write(path, assemblage_to_json(asm))?;
    Ok(())
}

pub fn read_assemblage(path: impl AsRef<Path>) -> Result<Assemblage> {
    assemblage_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{coupled_qubit_label, QUBIT1, QUBIT2};
    use crate::qmat::DensityMatrix;
    use crate::steering::{build_mubs_d4, initial_assemblage};

    fn sample() -> Assemblage {
        let rho = DensityMatrix::maximally_mixed(4);
        initial_assemblage(&rho, &build_mubs_d4().first(3).unwrap(), &coupled_qubit_label(), &[QUBIT1, QUBIT2]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let asm = sample();
        let back = assemblage_from_json(&assemblage_to_json(&asm)).unwrap();
        assert_eq!(back, asm);
    }

    #[test]
    fn doc_example_parses() {
        let text = r#"{"format": "temporal-steering-assemblage", "version": 1, "dimension": 2, "n_x": 1, "n_a": 2,
            "members": [{"x": 0, "a": 1, "entries": [[0,0],[0,0],[0,0],[0.5,0]]},
                        {"x": 0, "a": 0, "entries": [[0.5,0],[0,0],[0,0],[0,0]]}]}"#;
        let asm = assemblage_from_json(text).unwrap();
        assert_eq!(asm.probability(0, 1), 0.5);
    }

    #[test]
    fn rejects_malformed_files() {
        let good = assemblage_to_json(&sample());
        assert!(assemblage_from_json(&good.replace("\"version\": 1", "\"version\": 2")).is_err());
        assert!(assemblage_from_json(&good.replace("\"n_x\": 3", "\"n_x\": 4")).is_err());
        assert!(assemblage_from_json("{").is_err());
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["members"][0]["entries"][0][0] = serde_json::json!(0.3);
        assert!(matches!(assemblage_from_json(&v.to_string()), Err(Error::Assemblage(_))));
    }
}
