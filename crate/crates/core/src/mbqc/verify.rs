use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{execute_pattern, MbqcError, MeasurementPattern, PatternInput, StepOutcome};
use crate::pauli::Gate;
use crate::donor::Backend;
use crate::graph::GraphState;
use crate::rng::SeedStream;
use crate::statevector::{mat_h, mat_rx, mat_rz, Mat2, StateVector};

pub type Unitary = DMatrix<Complex64>;

fn from_mat2(m: &Mat2) -> Unitary {
    DMatrix::from_fn(2, 2, |i, j| m[i][j])
}

pub fn unitary_identity(logical: usize) -> Unitary {
    DMatrix::identity(1 << logical, 1 << logical)
}

pub fn unitary_h() -> Unitary {
    from_mat2(&mat_h())
}

pub fn unitary_rz(theta: f64) -> Unitary {
    from_mat2(&mat_rz(theta))
}

pub fn unitary_rx(theta: f64) -> Unitary {
    from_mat2(&mat_rx(theta))
}

/// `Rz(γ) Rx(β) Rz(α)`.
pub fn rotation_zxz(alpha: f64, beta: f64, gamma: f64) -> Unitary {
    unitary_rz(gamma) * unitary_rx(beta) * unitary_rz(alpha)
}

/// `H Rz(φ_{m−1}) ⋯ H Rz(φ_0)`, the map of a measured line.
pub fn line_unitary(phis: &[f64]) -> Unitary {
    phis.iter().fold(unitary_identity(1), |u, &p| unitary_h() * unitary_rz(p) * u)
}

pub fn unitary_cz() -> Unitary {
    let mut u = unitary_identity(2);
    u[(3, 3)] = Complex64::new(-1.0, 0.0);
    u
}

/// Parses `identity`, `h`, `cz`, `rz:θ`, `rx:θ` or `zxz:α,β,γ` (radians).
pub fn parse_target(spec: &str, logical: usize) -> Result<Unitary, MbqcError> {
    let bad = || MbqcError::BadTarget(spec.to_string());
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',').map(|a| a.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    let u = match (name.to_ascii_lowercase().as_str(), nums.as_slice()) {
        ("identity" | "i", []) => unitary_identity(logical),
        ("h", []) => unitary_h(),
        ("cz", []) => unitary_cz(),
        ("rz", [t]) => unitary_rz(*t),
        ("rx", [t]) => unitary_rx(*t),
        ("zxz", [a, b, c]) => rotation_zxz(*a, *b, *c),
        _ => return Err(bad()),
    };
    Ok(u)
}

#[derive(Clone, Debug, Serialize)]
pub struct LogicalChannelReport {
    pub logical_qubits: usize,
    pub shots: usize,
    /// Row-major `[re, im]` entries.
    pub target: Vec<Vec<[f64; 2]>>,
    /// Frame-corrected map of the worst shot, phase-aligned to the target
    /// (empty for the stabilizer check, which only sees output states).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub achieved: Vec<Vec<[f64; 2]>>,
    /// Max over shots and basis inputs of the output trace distance.
    pub distance: f64,
    pub shot_distances: Vec<f64>,
    pub transcript: Vec<Vec<StepOutcome>>,
}

fn to_rows(u: &Unitary) -> Vec<Vec<[f64; 2]>> {
    (0..u.nrows()).map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect()).collect()
}

/// Trace distance of the pure states `a` and `b` (normalized here), computed
/// without the cancellation in `sqrt(1 − |⟨a|b⟩|²)`.
pub fn pure_trace_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na < 1e-12 || nb < 1e-12 {
        return 1.0;
    }
    let ov: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() / (na * nb);
    let c = ov.norm();
    let phase = if c > 0.0 { ov.conj() / c } else { Complex64::new(1.0, 0.0) };
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x / na - y * phase / nb).norm_sqr()).sum();
    (diff * (1.0 + c) / 2.0).sqrt().min(1.0)
}

/// `|0⟩, |1⟩, |+⟩, |+i⟩` and their tensor products: a spanning set of inputs.
fn basis_inputs(logical: usize) -> Vec<Vec<Complex64>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let one: Vec<Vec<Complex64>> = vec![
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)],
        vec![Complex64::new(r, 0.0), Complex64::new(0.0, r)],
    ];
    let mut out = vec![vec![Complex64::new(1.0, 0.0)]];
    for _ in 0..logical {
        out = out
            .iter()
            .flat_map(|low| {
                one.iter().map(move |hi| {
                    let mut v = vec![Complex64::new(0.0, 0.0); low.len() * 2];
                    for (j, h) in hi.iter().enumerate() {
                        for (i, l) in low.iter().enumerate() {
                            v[(j * low.len()) | i] = l * h;
                        }
                    }
                    v
                })
            })
            .collect();
    }
    out
}

fn channel_distance(target: &Unitary, achieved: &Unitary, inputs: &[Vec<Complex64>]) -> f64 {
    inputs
        .iter()
        .map(|psi| {
            let v = DMatrix::from_column_slice(psi.len(), 1, psi);
            let (t, a) = (target * &v, achieved * &v);
            pure_trace_distance(t.as_slice(), a.as_slice())
        })
        .fold(0.0, f64::max)
}

/// Runs `pattern` on `cluster` with the dense backend through a Choi
/// construction (inputs maximally entangled with reference qubits), undoes
/// the declared byproducts and compares the implemented map with `target`.
pub fn verify_logical(
    cluster: &GraphState,
    pattern: &MeasurementPattern,
    target: &Unitary,
    seeds: SeedStream,
    shots: usize,
) -> Result<LogicalChannelReport, MbqcError> {
    let k = pattern.inputs.len();
    if k > 2 {
        return Err(MbqcError::TooManyLogical(k));
    }
    if pattern.outputs.len() != k {
        return Err(MbqcError::InvalidPattern(format!(
            "{} inputs but {} outputs; logical verification needs a square map",
            k,
            pattern.outputs.len()
        )));
    }
    let d = 1usize << k;
    if target.nrows() != d || target.ncols() != d {
        return Err(MbqcError::TargetShape { expected: d, found: target.nrows() });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i | (i << k)] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    let choi = if k == 0 { None } else { Some(StateVector::from_amplitudes(amps)?) };
    let inputs = basis_inputs(k);

    let mut shot_distances = Vec::with_capacity(shots);
    let mut transcript = Vec::with_capacity(shots);
    let mut worst: Option<(f64, Unitary)> = None;
    for shot in 0..shots {
        let mut rng = seeds.rng_indexed("verify-shot", shot as u64);
        let input = choi.clone().map_or(PatternInput::Plus, PatternInput::State);
        let run = execute_pattern(cluster, pattern, &input, Backend::Statevector, &mut rng)?;
        let achieved = match run.corrected_dense() {
            Some(c) => {
                let scale = (d as f64).sqrt();
                DMatrix::from_fn(d, d, |j, i| c.amplitudes()[j | (i << k)] * scale)
            }
            None => unitary_identity(0),
        };
        let dist = channel_distance(target, &achieved, &inputs);
        shot_distances.push(dist);
        transcript.push(run.outcomes);
        if worst.as_ref().is_none_or(|w| dist > w.0) {
            worst = Some((dist, achieved));
        }
    }
    let (distance, achieved) = worst.unwrap_or((0.0, target.clone()));
    let tr: Complex64 = (target.adjoint() * &achieved).trace();
    let aligned = if tr.norm() > 1e-12 { achieved * (tr.conj() / tr.norm()) } else { achieved };
    Ok(LogicalChannelReport {
        logical_qubits: k,
        shots,
        target: to_rows(target),
        achieved: to_rows(&aligned),
        distance,
        shot_distances,
        transcript,
    })
}

/// Gate lists preparing [`basis_inputs`] from `|+…+⟩`, in the same order.
fn basis_input_gates(logical: usize) -> Vec<Vec<Gate>> {
    let mut out: Vec<Vec<Gate>> = vec![Vec::new()];
    for q in 0..logical {
        let one = [vec![Gate::H(q)], vec![Gate::H(q), Gate::X(q)], vec![], vec![Gate::S(q)]];
        out = out
            .iter()
            .flat_map(|low| {
                one.iter().map(move |hi| {
                    let mut g = low.clone();
                    g.extend(hi.iter().copied());
                    g
                })
            })
            .collect();
    }
    out
}

/// Stabilizer-backend counterpart of [`verify_logical`] for Clifford
/// patterns: each shot runs the pattern once per basis input, undoes the
/// declared byproducts, and compares the output graph state with the
/// target applied to that input. Works on clusters far beyond the dense cap.
pub fn verify_clifford(
    cluster: &GraphState,
    pattern: &MeasurementPattern,
    target: &Unitary,
    seeds: SeedStream,
    shots: usize,
) -> Result<LogicalChannelReport, MbqcError> {
    let k = pattern.inputs.len();
    if k > 2 {
        return Err(MbqcError::TooManyLogical(k));
    }
    if pattern.outputs.len() != k {
        return Err(MbqcError::InvalidPattern(format!(
            "{} inputs but {} outputs; logical verification needs a square map",
            k,
            pattern.outputs.len()
        )));
    }
    let d = 1usize << k;
    if target.nrows() != d || target.ncols() != d {
        return Err(MbqcError::TargetShape { expected: d, found: target.nrows() });
    }
    let expected: Vec<Unitary> = basis_inputs(k)
        .iter()
        .map(|psi| target * DMatrix::from_column_slice(psi.len(), 1, psi))
        .collect();
    let gates = basis_input_gates(k);

    let mut shot_distances = Vec::with_capacity(shots);
    let mut transcript = Vec::with_capacity(shots);
    for shot in 0..shots {
        let mut worst = 0.0f64;
        let mut outcomes = Vec::new();
        for (input, (g, want)) in gates.iter().zip(&expected).enumerate() {
            let mut rng = seeds.rng_indexed("verify-clifford", (shot * gates.len() + input) as u64);
            let run = execute_pattern(cluster, pattern, &PatternInput::Gates(g.clone()), Backend::Stabilizer, &mut rng)?;
            let got = match run.corrected_graph(&run.byproduct) {
                Some(out) => {
                    let dense = StateVector::from_graph_state(&out)?;
                    let pos: Vec<usize> =
                        pattern.outputs.iter().map(|&v| out.index_of(v)).collect::<Result<_, _>>()?;
                    (0..d)
                        .map(|b| {
                            let idx = (0..k).filter(|&p| b >> p & 1 == 1).map(|p| 1 << pos[p]).sum::<usize>();
                            dense.amplitudes()[idx]
                        })
                        .collect()
                }
                None => vec![Complex64::new(1.0, 0.0)],
            };
            worst = worst.max(pure_trace_distance(want.as_slice(), &got));
            if input == 0 {
                outcomes = run.outcomes;
            }
        }
        shot_distances.push(worst);
        transcript.push(outcomes);
    }
    Ok(LogicalChannelReport {
        logical_qubits: k,
        shots,
        target: to_rows(target),
        achieved: Vec::new(),
        distance: shot_distances.iter().copied().fold(0.0, f64::max),
        shot_distances,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_distance() {
        let a = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let b: Vec<Complex64> = a.iter().map(|x| x * Complex64::from_polar(1.0, 0.7)).collect();
        assert!(pure_trace_distance(&a, &b) < 1e-15);
        let c = [Complex64::new(0.0, 0.8), Complex64::new(0.6, 0.0)];
        assert!((pure_trace_distance(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_inputs_span() {
        assert_eq!(basis_inputs(1).len(), 4);
        assert_eq!(basis_inputs(2).len(), 16);
        assert!(channel_distance(&unitary_identity(1), &unitary_rz(0.2), &basis_inputs(1)) > 0.05);
        let phased = unitary_h() * Complex64::from_polar(1.0, 1.1);
        assert!(channel_distance(&unitary_h(), &phased, &basis_inputs(1)) < 1e-15);
    }

    #[test]
    fn input_gates_prepare_basis_inputs() {
        for (g, want) in basis_input_gates(2).iter().zip(basis_inputs(2)) {
            let mut s = StateVector::plus(2).unwrap();
            for &gate in g {
                s.apply_gate(gate).unwrap();
            }
            assert!(pure_trace_distance(s.amplitudes(), &want) < 1e-14, "{g:?}");
        }
    }

    #[test]
    fn targets_parse() {
        assert_eq!(parse_target("identity", 2).unwrap().nrows(), 4);
        assert!(parse_target("zxz:0.1,0.2", 1).is_err());
        let u = parse_target("zxz:0.1,0.2,0.3", 1).unwrap();
        assert!((u - rotation_zxz(0.1, 0.2, 0.3)).norm() < 1e-15);
    }
}
