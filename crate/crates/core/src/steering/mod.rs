//! Measurements, temporal assemblages and deterministic strategies.

mod assemblage;
mod io;
mod mubs;
mod strategies;

pub use assemblage::{embed, evolve_assemblage, initial_assemblage, Assemblage, ASSEMBLAGE_TOL};
pub use io::{assemblage_from_json, assemblage_to_json, read_assemblage, write_assemblage, FORMAT_TAG, FORMAT_VERSION};
pub use mubs::{build_mubs_d4, mub_d4_vectors, verify_mub, MeasurementSet, MubReport, MubTable, MUB_TOL};
pub use strategies::{enumerate_strategies, DeterministicStrategySet, MAX_STRATEGIES};
