//! Acceptance suite: one PASS/FAIL line per criterion. Pass criterion
//! numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 1 3 8`.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use common::*;
use rand::Rng;
use rayon::prelude::*;
use temporal_steering::cli::{run_experiment, ExperimentConfig, ModelKind, TimeGrid, TimeUnit};
use temporal_steering::dynamics::*;
use temporal_steering::measures::*;
use temporal_steering::qmat::{partial_trace, DensityMatrix, SpaceLabel};
use temporal_steering::steering::*;
use temporal_steering::tsr::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mub_start(n: usize) -> Assemblage {
    let meas = build_mubs_d4().first(n).unwrap();
    initial_assemblage(&DensityMatrix::maximally_mixed(4), &meas, &coupled_qubit_label(), &[QUBIT1, QUBIT2]).unwrap()
}

fn coupled_series(gamma: f64, n: usize, times: &[f64]) -> Vec<Assemblage> {
    let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma }).unwrap();
    evolve_assemblage(&mub_start(n), &l, times, None, Method::default()).unwrap()
}

/// Solves every assemblage; a point that is not optimal is an error.
fn tsr_curve(series: &[Assemblage]) -> Result<Vec<f64>, String> {
    series
        .par_iter()
        .enumerate()
        .map(|(k, asm)| tsr(asm).map_err(|e| format!("point {k}: {e}")))
        .collect()
}

fn grid(stop: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| stop * k as f64 / (points - 1) as f64).collect()
}

fn max_rise(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn mub_validity() -> Outcome {
    let start = Instant::now();
    let good = verify_mub(&build_mubs_d4());
    let printed = verify_mub(&MeasurementSet::from_bases(mub_d4_vectors(MubTable::AsPrinted)).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let worst = good.orthonormality.max(good.completeness).max(good.unbiasedness);
    ensure(
        good.pass && worst < 1e-10 && !printed.pass && elapsed < 1.0,
        format!(
            "corrected table max deviation {worst:.1e} ({}); printed table {} (orthonormality {:.2}); {elapsed:.3} s",
            if good.pass { "pass" } else { "fail" },
            if printed.pass { "passes" } else { "rejected" },
            printed.orthonormality
        ),
    )
}

#[derive(serde::Deserialize)]
struct Reference {
    value: f64,
}

#[derive(serde::Deserialize)]
struct ReferenceFile {
    instances: BTreeMap<String, Reference>,
}

fn oracle_equivalence() -> Outcome {
    let dir = data_dir().join("sdp");
    let text = std::fs::read_to_string(dir.join("reference.json")).map_err(|e| e.to_string())?;
    let refs: ReferenceFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    for required in ["pauli_xz_d2", "mub1_d4", "mub2_d4", "mub3_d4"] {
        if !refs.instances.contains_key(required) {
            return Err(format!("reference set lacks {required}"));
        }
    }
    let mut worst_diff: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, reference) in &refs.instances {
        let asm = read_assemblage(dir.join("instances").join(format!("{name}.json"))).map_err(|e| e.to_string())?;
        if ![2, 4].contains(&asm.dim()) || !(1..=3).contains(&asm.n_settings()) {
            bad.push(format!("{name}: outside d in {{2,4}}, n_x in {{1,2,3}}"));
            continue;
        }
        let problem = assemble_problem(&asm, enumerate_strategies(asm.n_settings(), asm.n_outcomes()).unwrap()).unwrap();
        let sol = solve(&problem, &SdpOptions::default());
        let value = clamp_value(sol.primal_value);
        match (sol.status, value) {
            (SolveStatus::Optimal, Some(v)) => {
                let diff = (v - reference.value).abs();
                worst_diff = worst_diff.max(diff);
                worst_gap = worst_gap.max(sol.gap);
                if diff >= 1e-6 || sol.gap >= 1e-7 {
                    bad.push(format!("{name}: {v} vs {} (gap {:.1e})", reference.value, sol.gap));
                }
            }
            _ => bad.push(format!("{name}: status {}", sol.status)),
        }
    }
    let detail = format!(
        "{} instances, max |ours - reference| {worst_diff:.1e}, max gap {worst_gap:.1e}",
        refs.instances.len()
    );
    ensure(bad.is_empty() && refs.instances.len() >= 10, if bad.is_empty() { detail } else { format!("{detail}; {}", bad.join("; ")) })
}

fn fully_depolarized(asm: &Assemblage) -> Assemblage {
    depolarize(asm, 1.0)
}

fn unsteerability_floor() -> Outcome {
    let mut r = rng(301);
    let mut cases: Vec<(String, Assemblage)> = Vec::new();
    cases.push(("one MUB on I/4".into(), mub_start(1)));
    for k in 0..4 {
        let d = if k % 2 == 0 { 2 } else { 4 };
        let rho = random_state(&mut r, d, 1 + k % d);
        let label = SpaceLabel::new([("s", d)]).unwrap();
        let asm = initial_assemblage(&rho, &random_measurements(&mut r, d, 1), &label, &["s"]).unwrap();
        cases.push((format!("random single setting d={d}"), asm));
    }
    for n in 2..=4 {
        cases.push((format!("{n} MUBs fully depolarized"), fully_depolarized(&mub_start(n))));
    }
    let l = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma: 1.0 }).unwrap();
    let evolved = evolve_assemblage(&mub_start(3), &l, &[0.8], None, Method::default()).unwrap().pop().unwrap();
    cases.push(("evolved coupled qubits, fully depolarized".into(), fully_depolarized(&evolved)));
    let mut worst: f64 = 0.0;
    for (name, asm) in &cases {
        let (value, sol) = tsr_with(asm, &SdpOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        if value >= 1e-7 {
            return Err(format!("{name}: TSR {value:e}"));
        }
        worst = worst.max(sol.primal_value.abs());
    }
    Ok(format!("{} unsteerable inputs, all 0 (largest raw |value| {worst:.1e})", cases.len()))
}

fn setting_monotonicity() -> Outcome {
    let times = grid(5.0, 50);
    let full = coupled_series(1.0, 5, &times);
    let mut curves: Vec<Vec<f64>> = Vec::new();
    for n in 2..=4 {
        let subset: Vec<usize> = (0..n).collect();
        let series: Vec<Assemblage> = full.iter().map(|a| a.select_settings(&subset).unwrap()).collect();
        curves.push(tsr_curve(&series).map_err(|e| format!("n={n}, {e}"))?);
    }
    let sparse: Vec<usize> = (0..times.len()).step_by(5).collect();
    let five = tsr_curve(&sparse.iter().map(|&k| full[k].clone()).collect::<Vec<_>>()).map_err(|e| format!("n=5, {e}"))?;

    let mut worst = f64::NEG_INFINITY;
    for pair in curves.windows(2) {
        for (lo, hi) in pair[0].iter().zip(&pair[1]) {
            worst = worst.max(lo - hi);
        }
    }
    for (j, &k) in sparse.iter().enumerate() {
        worst = worst.max(curves[2][k] - five[j]);
    }
    let at0: Vec<String> = curves.iter().map(|c| format!("{:.4}", c[0])).chain([format!("{:.4}", five[0])]).collect();
    ensure(
        worst <= 1e-6,
        format!(
            "50 points over gt in [0, 5], n=2..4 plus n=5 on {} points; max TSR(n) - TSR(n+1) = {worst:.1e}; TSR(0) for n=2..5: {}",
            sparse.len(),
            at0.join(", ")
        ),
    )
}

/// σ_{a|x} = Tr_A[(M_{a|x} ⊗ I) ρ_AB] for a random ρ_AB.
fn random_assemblage(r: &mut impl Rng, d: usize, n: usize) -> Assemblage {
    let label = SpaceLabel::new([("A", d), ("B", d)]).unwrap();
    let rank = r.random_range(1..=2);
    let rho = random_state(r, d * d, rank);
    let meas = random_measurements(r, d, n);
    let mut members = Vec::new();
    for x in 0..n {
        for a in 0..d {
            let m = embed(&meas.projector(x, a), &label, &["A"]).unwrap();
            members.push(partial_trace(&m.matmul(rho.matrix()), &label, &["B"]).unwrap().symmetrized());
        }
    }
    Assemblage::new(n, d, members).unwrap()
}

fn cptp_monotonicity() -> Outcome {
    let mut r = rng(505);
    let pairs: Vec<(Assemblage, f64)> = (0..20)
        .map(|k| {
            let d = if k % 2 == 0 { 2 } else { 4 };
            let n = 2 + k % 2;
            (random_assemblage(&mut r, d, n), r.random_range(0.05..0.95))
        })
        .collect();
    let results: Vec<Result<(f64, f64), String>> = pairs
        .par_iter()
        .map(|(asm, p)| {
            let before = tsr(asm).map_err(|e| e.to_string())?;
            let after = tsr(&depolarize(asm, *p)).map_err(|e| e.to_string())?;
            Ok((before, after))
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut steerable = 0;
    for res in results {
        let (before, after) = res?;
        worst = worst.max(after - before);
        steerable += usize::from(before > 1e-3);
    }
    ensure(
        worst <= 1e-6,
        format!("20 random pairs ({steerable} clearly steerable); max TSR(after) - TSR(before) = {worst:.1e}"),
    )
}

fn markovian_decay() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for gamma in [1.0, 4.0, 9.0] {
        let times = grid(20.0 / gamma, 101);
        let values = tsr_curve(&coupled_series(gamma, 2, &times)).map_err(|e| format!("gamma={gamma}g, {e}"))?;
        let series = TimeSeries::new(times, values.clone()).unwrap();
        let nm = nonmonotonicity(&series).unwrap();
        let last = *values.last().unwrap();
        ok &= nm < 2e-6 && last < 1e-4;
        parts.push(format!("gamma={gamma}g: nonmonotonicity {nm:.1e}, TSR(20/gamma) {last:.1e}"));
    }
    ensure(ok, parts.join("; "))
}

fn radical_pair_non_markovianity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::preset(ModelKind::RadicalPair);
    cfg.output.dir = dir.path().to_path_buf();
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    if report.failures() > 0 {
        return Err(format!("{} failed points or curves", report.failures()));
    }
    let mut parts = Vec::new();
    let mut wavy = 0;
    let mut curves = Vec::new();
    for curve in &report.curves {
        let series = curve.tsr_series().ok_or("empty curve")?;
        let rise = max_rise(series.values());
        wavy += usize::from(rise > 1e-4);
        let theta = curve.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",");
        let vanish = match &curve.vanish {
            Some(v) => format!("vanishes for good at {} {} (after {})", v.time, report.time_unit.name(), v.bracket.0),
            None => format!(
                "stays above {:e} through {} {} (last {:.4})",
                cfg.output.vanish_threshold,
                cfg.time.stop,
                report.time_unit.name(),
                series.values().last().unwrap()
            ),
        };
        parts.push(format!("{theta}: max rise {rise:.2e}, nonmonotonicity {:.2e}, {vanish}", curve.nonmonotonicity.unwrap_or(0.0)));
        curves.push(series);
    }
    let (first, last) = (&curves[0], &curves[curves.len() - 1]);
    let diff = first.values().iter().zip(last.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    parts.push(format!(
        "{wavy} of {} series rise by > 1e-4; max |TSR(theta=0) - TSR(theta=pi/2)| {diff:.2e}; A_z = {:e} rad/s, times in {}",
        curves.len(),
        cfg.radical_pair.a_z,
        report.time_unit.name()
    ));
    ensure(wavy > 0 && diff > 1e-3, parts.join("; "))
}

fn simplified_entanglement() -> Outcome {
    let label = simplified_rp_label();
    let pair = SpaceLabel::new([("electron1", 2), ("electron2", 2)]).unwrap();
    let e1n = SpaceLabel::new([("electron1", 2), ("nucleus", 2)]).unwrap();
    let a_z = 1e5;
    let times = grid(10.0 * PI / a_z, 401);
    let mut amplitudes = Vec::new();
    let mut cross: f64 = 0.0;
    let mut constant = Vec::new();
    for a in [0.0, 0.25, 0.4, 0.5, 1.0] {
        let p = SimplifiedRpParams { a, a_z };
        let mut values = Vec::with_capacity(times.len());
        for &t in &times {
            let rho = simplified_rp_state(&p, t).map_err(|e| e.to_string())?;
            let electrons = DensityMatrix::new(partial_trace(rho.matrix(), &label, &["electron1", "electron2"]).unwrap()).unwrap();
            values.push(negativity(&electrons, &pair, "electron2").unwrap());
            let mixed = DensityMatrix::new(partial_trace(rho.matrix(), &label, &["electron1", "nucleus"]).unwrap()).unwrap();
            cross = cross.max(negativity(&mixed, &e1n, "nucleus").unwrap());
        }
        let series = TimeSeries::new(times.clone(), values.clone()).unwrap();
        let amp = oscillation_amplitude(&series);
        if a == 0.0 || a == 1.0 {
            constant.push((a, amp, values[0]));
        } else {
            amplitudes.push((a, amp));
        }
    }
    let flat_ok = constant.iter().all(|&(_, amp, v)| amp < 1e-10 && (v - 0.5).abs() < 1e-10);
    let ordered = amplitudes.windows(2).all(|w| w[0].1 < w[1].1);
    ensure(
        flat_ok && ordered && cross < 1e-10,
        format!(
            "a in {{0, 1}}: variation {:.1e}, {:.1e} at N = 0.5; amplitudes {}; nucleus-electron negativity max {cross:.1e}",
            constant[0].1,
            constant[1].1,
            amplitudes.iter().map(|(a, amp)| format!("a={a}: {amp:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn dynamics_oracle() -> Outcome {
    let mut r = rng(909);
    let coupled = build_coupled_qubit_liouvillian(&CoupledQubitParams { g: 1.0, gamma: 2.0 }).unwrap();
    let rho_c = random_state(&mut r, 4, 4);
    let mut tc: Vec<f64> = (0..10).map(|_| r.random_range(0.0..10.0)).collect();
    tc.sort_by(f64::total_cmp);
    let rp = build_radical_pair_liouvillian(&RadicalPairParams { theta: r.random_range(0.0..FRAC_PI_2), ..RadicalPairParams::default() })
        .unwrap();
    let mut trp: Vec<f64> = (0..10).map(|_| r.random_range(0.0..3e-6)).collect();
    trp.sort_by(f64::total_cmp);
    let compare = |l: &Liouvillian, rho: &DensityMatrix, times: &[f64]| -> Result<f64, String> {
        let rk = propagate(l, rho, times).map_err(|e| e.to_string())?;
        let ex = propagate_exponential(l, rho, times).map_err(|e| e.to_string())?;
        Ok(rk.iter().zip(&ex).map(|(a, b)| (a.matrix() - b.matrix()).frobenius_norm()).fold(0.0, f64::max))
    };
    let dc = compare(&coupled, &rho_c, &tc)?;
    let drp = compare(&rp, &radical_pair_initial_state(), &trp)?;
    ensure(
        dc < 1e-7 && drp < 1e-7,
        format!("max Frobenius distance: coupled qubits {dc:.1e} (t up to {:.2}/g), radical pair {drp:.1e} (t up to {:.2} us)", tc[9], trp[9] * 1e6),
    )
}

fn csv_bytes(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let mut coupled = ExperimentConfig::preset(ModelKind::CoupledQubits);
    coupled.time = TimeGrid { start: 0.0, stop: 3.0, points: 13, unit: TimeUnit::InverseGamma };
    coupled.settings = vec![1, 2, 3];
    let mut simplified = ExperimentConfig::preset(ModelKind::SimplifiedRp);
    simplified.time.points = 21;
    let mut compared = 0;
    for cfg in [coupled, simplified] {
        let mut runs = Vec::new();
        for workers in [1, 4] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let mut cfg = cfg.clone();
            cfg.workers = workers;
            cfg.output.dir = dir.path().to_path_buf();
            run_experiment(&cfg).map_err(|e| e.to_string())?;
            runs.push(csv_bytes(dir.path()));
        }
        if runs[0].is_empty() || runs[0] != runs[1] {
            return Err(format!("{} run differs between repetitions", cfg.model.name()));
        }
        compared += runs[0].len();
    }
    Ok(format!("{compared} CSV files byte-identical across repeated runs with 1 and 4 workers"))
}

const CRITERIA: [(&str, fn() -> Outcome); 10] = [
    ("mub-validity", mub_validity),
    ("sdp-oracle-equivalence", oracle_equivalence),
    ("unsteerability-floor", unsteerability_floor),
    ("setting-monotonicity", setting_monotonicity),
    ("cptp-monotonicity", cptp_monotonicity),
    ("markovian-decay", markovian_decay),
    ("radical-pair-non-markovianity", radical_pair_non_markovianity),
    ("simplified-model-entanglement", simplified_entanglement),
    ("dynamics-oracle-equivalence", dynamics_oracle),
    ("determinism", determinism),
];

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, check)) in CRITERIA.iter().enumerate() {
        let number = k + 1;
        if !wanted.is_empty() && !wanted.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {number:>2} {name} [{secs:.1} s]: {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
