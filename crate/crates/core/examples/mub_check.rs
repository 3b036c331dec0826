//! Checks the five d=4 mutually unbiased bases, then the table with the
//! misprinted fourth vector of the third basis.

use temporal_steering::steering::{build_mubs_d4, mub_d4_vectors, verify_mub, MeasurementSet, MubTable};

fn main() {
    let good = verify_mub(&build_mubs_d4());
    println!("corrected: {good}");

    let printed = MeasurementSet::from_bases(mub_d4_vectors(MubTable::AsPrinted)).unwrap();
    let report = verify_mub(&printed);
    println!("as printed: {report}");
    assert!(good.pass && !report.pass);
}
