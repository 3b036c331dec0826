use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Liouvillian, SparseOperator};
use crate::error::{Error, Result};
use crate::qmat::{clip_psd, ComplexMatrix, DensityMatrix, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_steps: 50_000_000 }
    }
}

/// How states are carried forward in time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Method {
    /// Adaptive Dormand–Prince 5(4) on the vectorized state.
    RungeKutta(IntegratorOptions),
    /// exp(L Δt) applied to the vectorized state; one exponential per
    /// distinct time gap.
    Exponential,
}

impl Default for Method {
    fn default() -> Self {
        Method::RungeKutta(IntegratorOptions::default())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("times must start at or after 0, got {t0}")));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("times must be strictly ascending".into()));
    }
    Ok(())
}

/// ρ(t_k) for each requested time, with the default adaptive integrator.
/// Outputs are re-symmetrized and stripped of round-off negativity.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    propagate_states(l, rho0, times, Method::default())
}

/// Same contract as [`propagate`], through the matrix-exponential path.
pub fn propagate_exponential(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    propagate_states(l, rho0, times, Method::Exponential)
}

fn propagate_states(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64], method: Method) -> Result<Vec<DensityMatrix>> {
    if rho0.dim() != l.dim() {
        return Err(Error::dims(format!("state has dimension {}, generator {}", rho0.dim(), l.dim())));
    }
    let raw = propagate_operator(l, rho0.matrix(), times, method)?;
    raw.into_iter()
        .zip(times)
        .map(|(m, &t)| if t == 0.0 { Ok(rho0.clone()) } else { DensityMatrix::new(clip_psd(&m)) })
        .collect()
}

/// Propagates an arbitrary operator (the dynamics are linear, so
/// subnormalized assemblage members go through unchanged). No clipping.
pub fn propagate_operator(l: &Liouvillian, m0: &ComplexMatrix, times: &[f64], method: Method) -> Result<Vec<ComplexMatrix>> {
    Ok(propagate_many(l, std::slice::from_ref(m0), times, method)?.pop().unwrap())
}

/// Propagates several initial operators over the same grid; result is
/// indexed `[member][time]`. Members run in parallel.
pub fn propagate_many(
    l: &Liouvillian,
    inits: &[ComplexMatrix],
    times: &[f64],
    method: Method,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    check_times(times)?;
    let d = l.dim();
    if let Some(bad) = inits.iter().find(|m| m.rows() != d || m.cols() != d) {
        return Err(Error::dims(format!("operator is {}x{}, generator acts on dimension {d}", bad.rows(), bad.cols())));
    }
    match method {
        Method::RungeKutta(opts) => {
            let gen = l.sparse_superoperator();
            inits
                .par_iter()
                .map(|m0| {
                    let series = integrate_dopri(&gen, m0.as_slice(), times, &opts)?;
                    Ok(series.into_iter().map(|v| unvec(&v, d)).collect())
                })
                .collect()
        }
        Method::Exponential => exponential_many(l, inits, times),
    }
}

fn unvec(v: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| v[i + d * j])
}

fn exponential_many(l: &Liouvillian, inits: &[ComplexMatrix], times: &[f64]) -> Result<Vec<Vec<ComplexMatrix>>> {
    let d = l.dim();
    let sup = l.superoperator();
    let k = inits.len();
    let mut out: Vec<Vec<ComplexMatrix>> = (0..k).map(|_| Vec::with_capacity(times.len())).collect();
    let mut current = ComplexMatrix::from_fn(d * d, k, |r, c| inits[c].as_slice()[r]);
    let mut cached: Option<(f64, ComplexMatrix)> = None;
    let mut t = 0.0;
    for &target in times {
        let gap = target - t;
        if gap > 0.0 {
            let reuse = matches!(&cached, Some((g, _)) if (g - gap).abs() <= 1e-12 * gap.abs());
            if !reuse {
                cached = Some((gap, sup.scale_real(gap).expm()));
            }
            current = cached.as_ref().unwrap().1.matmul(&current);
        }
        t = target;
        for (c, series) in out.iter_mut().enumerate() {
            series.push(ComplexMatrix::from_fn(d, d, |i, j| current[(i + d * j, c)]));
        }
    }
    Ok(out)
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes
// are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn integrate_dopri(gen: &SparseOperator, y0: &[C64], times: &[f64], opts: &IntegratorOptions) -> Result<Vec<Vec<C64>>> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = vec![vec![ZERO; n]; 7];
    let mut stage = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    gen.apply_into(&y, &mut k[0]);

    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0_f64;
    let mut h = initial_step(&y, &k[0], opts);
    let mut steps = 0usize;

    for &target in times {
        while t < target {
            let remaining = target - t;
            let truncated = h >= remaining;
            let mut h_try = h.min(remaining);
            loop {
                steps += 1;
                if steps > opts.max_steps || h_try <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
                    return Err(Error::StepSizeUnderflow { time: t, step: h_try });
                }
                for s in 1..7 {
                    let (prev, rest) = k.split_at_mut(s);
                    for i in 0..n {
                        let mut acc = y[i];
                        for (j, kj) in prev.iter().enumerate() {
                            let a = A[s][j];
                            if a != 0.0 {
                                acc += kj[i] * (h_try * a);
                            }
                        }
                        stage[i] = acc;
                    }
                    gen.apply_into(&stage, &mut rest[0]);
                }
                // the last stage point is the fifth-order solution
                y_new.copy_from_slice(&stage);
                let mut err_sq = 0.0;
                for i in 0..n {
                    let mut e = ZERO;
                    for (j, kj) in k.iter().enumerate() {
                        if E[j] != 0.0 {
                            e += kj[i] * E[j];
                        }
                    }
                    let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                    err_sq += (e.norm() * h_try / sc).powi(2);
                }
                let err = (err_sq / n as f64).sqrt();
                if err <= 1.0 {
                    t = if h_try >= remaining { target } else { t + h_try };
                    std::mem::swap(&mut y, &mut y_new);
                    // FSAL: k7 = f(y_new) becomes k1 of the next step
                    k.rotate_right(1);
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = if truncated && h_try == remaining { h.max(h_try * fac) } else { h_try * fac };
                    break;
                }
                h_try *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h = h_try;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[C64], f: &[C64], opts: &IntegratorOptions) -> f64 {
    let n = y.len() as f64;
    let scaled = |v: &[C64]| -> f64 {
        (v.iter().zip(y).map(|(a, b)| (a.norm() / (opts.atol + opts.rtol * b.norm())).powi(2)).sum::<f64>() / n).sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(f);
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}
