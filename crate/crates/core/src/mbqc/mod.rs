//! Measurement patterns on graph-state clusters.
//!
//! A pattern lists single-qubit measurements in execution order. Each step
//! measures Pauli `X`, `Y`, `Z` or an xy-plane angle `α` (basis
//! `|±_α⟩ = (|0⟩ ± e^{iα}|1⟩)/√2`), adapted to earlier outcomes as
//! `(−1)^{s(S)}·α + π·s(T)`, where `s(A)` is the parity of the outcomes
//! recorded on the vertices of `A`. Pauli steps adapt the same way (`X` is
//! `α = 0`, `Y` is `α = π/2`); for `Z`, the `S` parity flips the outcome.
//! Outcomes are always recorded relative to the adapted basis.
//!
//! Pauli-only patterns run on either backend; arbitrary angles need the
//! dense one. Vertex operators carried by the cluster are applied physically,
//! so a pattern written for a bare graph must run on a cluster whose vertex
//! operators were undone first (see [`GraphState::clear_vops`]).

mod carve;
mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use carve::{carve_wire, CarvedWire};
pub use verify::{
    line_unitary, parse_target, pure_trace_distance, rotation_zxz, unitary_cz, unitary_h, unitary_identity, unitary_rx,
    unitary_rz, verify_clifford, verify_logical, LogicalChannelReport, Unitary,
};

use crate::donor::{Backend, PauliFrame};
use crate::graph::{GraphError, GraphState};
use crate::pauli::{Basis, Gate, Outcome, Pauli, StabilizerError, StabilizerTableau};
use crate::statevector::{mat_pauli, DenseError, Mat2, StateVector};

/// Angles within this of a multiple of π/2 count as Pauli bases.
pub const PAULI_ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MbqcError {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("vertex {0} is not in the cluster")]
    UnknownVertex(usize),
    #[error("vertex {0} is measured more than once")]
    DuplicateMeasurement(usize),
    #[error("vertex {0} is listed twice")]
    DuplicateVertex(usize),
    #[error("output vertex {0} is measured")]
    MeasuredOutput(usize),
    #[error("step on vertex {v} adapts to vertex {refers}, which is not measured before it")]
    AdaptationOrder { v: usize, refers: usize },
    #[error("correction on vertex {0}, which is not an output")]
    CorrectionTarget(usize),
    #[error("correction on vertex {v} depends on vertex {refers}, which is never measured")]
    CorrectionSource { v: usize, refers: usize },
    #[error("angle {angle} on vertex {v} is not a Pauli basis; use the statevector backend")]
    NonPauliAngle { v: usize, angle: f64 },
    #[error("input state has {found} qubits but the pattern has {expected} inputs")]
    InputMismatch { expected: usize, found: usize },
    #[error("dense input states need the statevector backend")]
    DenseInputOnStabilizer,
    #[error("output vertex {0} is still entangled with unmeasured vertices")]
    OutputEntangled(usize),
    #[error("no path from {start} to {end} avoiding the forbidden vertices")]
    NoPath { start: usize, end: usize },
    #[error("endpoint {0} is forbidden")]
    EndpointForbidden(usize),
    #[error("{0} logical qubits; at most 2 are supported")]
    TooManyLogical(usize),
    #[error("target is {found}x{found}, expected {expected}x{expected}")]
    TargetShape { expected: usize, found: usize },
    #[error("bad target {0:?}")]
    BadTarget(String),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Measured observable of one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepBasis {
    Pauli(Basis),
    /// xy-plane angle in radians.
    Angle(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepDoc", into = "StepDoc")]
pub struct PatternStep {
    pub v: usize,
    pub basis: StepBasis,
    /// Vertices whose outcome parity negates the angle.
    pub s: Vec<usize>,
    /// Vertices whose outcome parity adds π.
    pub t: Vec<usize>,
}

impl PatternStep {
    pub fn pauli(v: usize, basis: Basis) -> Self {
        Self { v, basis: StepBasis::Pauli(basis), s: Vec::new(), t: Vec::new() }
    }

    pub fn angle(v: usize, angle: f64) -> Self {
        Self { v, basis: StepBasis::Angle(angle), s: Vec::new(), t: Vec::new() }
    }

    pub fn with_s(mut self, s: Vec<usize>) -> Self {
        self.s = s;
        self
    }

    pub fn with_t(mut self, t: Vec<usize>) -> Self {
        self.t = t;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    s: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    t: Vec<usize>,
}

impl TryFrom<StepDoc> for PatternStep {
    type Error = String;

    fn try_from(d: StepDoc) -> Result<Self, Self::Error> {
        let basis = match (d.basis, d.angle) {
            (Some(b), None) => StepBasis::Pauli(b),
            (None, Some(a)) if a.is_finite() => StepBasis::Angle(a),
            (None, Some(a)) => return Err(format!("step on vertex {}: angle {a} is not finite", d.v)),
            _ => return Err(format!("step on vertex {}: give exactly one of basis or angle", d.v)),
        };
        Ok(PatternStep { v: d.v, basis, s: d.s, t: d.t })
    }
}

impl From<PatternStep> for StepDoc {
    fn from(p: PatternStep) -> Self {
        let (basis, angle) = match p.basis {
            StepBasis::Pauli(b) => (Some(b), None),
            StepBasis::Angle(a) => (None, Some(a)),
        };
        StepDoc { v: p.v, basis, angle, s: p.s, t: p.t }
    }
}

/// Byproduct `X^{s(x)} Z^{s(z)}` left on an output vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCorrection {
    pub v: usize,
    #[serde(default)]
    pub x: Vec<usize>,
    #[serde(default)]
    pub z: Vec<usize>,
}

/// `{"inputs":[..],"outputs":[..],"steps":[..],"corrections":[..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementPattern {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub steps: Vec<PatternStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<OutputCorrection>,
}

impl MeasurementPattern {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pattern serializes")
    }

    /// Whether every step measures a Pauli basis (after adaptation).
    pub fn is_clifford(&self) -> bool {
        self.steps.iter().all(|s| quarter_turns(s.basis).is_some())
    }

    /// Structural checks that need no cluster.
    pub fn validate(&self) -> Result<(), MbqcError> {
        check_distinct(&self.inputs)?;
        check_distinct(&self.outputs)?;
        let outputs: BTreeSet<usize> = self.outputs.iter().copied().collect();
        let mut measured = BTreeSet::new();
        for step in &self.steps {
            if outputs.contains(&step.v) {
                return Err(MbqcError::MeasuredOutput(step.v));
            }
            for &r in step.s.iter().chain(&step.t) {
                if !measured.contains(&r) {
                    return Err(MbqcError::AdaptationOrder { v: step.v, refers: r });
                }
            }
            if !measured.insert(step.v) {
                return Err(MbqcError::DuplicateMeasurement(step.v));
            }
        }
        let mut corrected = BTreeSet::new();
        for c in &self.corrections {
            if !outputs.contains(&c.v) || !corrected.insert(c.v) {
                return Err(MbqcError::CorrectionTarget(c.v));
            }
            for &r in c.x.iter().chain(&c.z) {
                if !measured.contains(&r) {
                    return Err(MbqcError::CorrectionSource { v: c.v, refers: r });
                }
            }
        }
        Ok(())
    }

    fn validate_on(&self, cluster: &GraphState) -> Result<(), MbqcError> {
        self.validate()?;
        let all = self.inputs.iter().chain(&self.outputs).copied().chain(self.steps.iter().map(|s| s.v));
        for v in all {
            if !cluster.contains(v) {
                return Err(MbqcError::UnknownVertex(v));
            }
        }
        Ok(())
    }
}

fn check_distinct(vs: &[usize]) -> Result<(), MbqcError> {
    let mut seen = BTreeSet::new();
    for &v in vs {
        if !seen.insert(v) {
            return Err(MbqcError::DuplicateVertex(v));
        }
    }
    Ok(())
}

/// Pattern along `path` implementing `H Rz(φ_{m−1}) ⋯ H Rz(φ_0)` on the
/// qubit entering at `path[0]`, where `m = phis.len() = path.len() − 1`.
/// Vertex `path[j]` is measured at `−φ_j`; zero angles become `X` steps.
pub fn line_pattern(path: &[usize], phis: &[f64]) -> Result<MeasurementPattern, MbqcError> {
    if path.is_empty() || phis.len() + 1 != path.len() {
        return Err(MbqcError::InvalidPattern(format!(
            "a line of {} vertices needs {} angles, got {}",
            path.len(),
            path.len().saturating_sub(1),
            phis.len()
        )));
    }
    // Byproduct X^x Z^z on the current qubit, as parity sets.
    let (mut x, mut z) = (BTreeSet::new(), BTreeSet::new());
    let mut steps = Vec::with_capacity(phis.len());
    for (j, &phi) in phis.iter().enumerate() {
        let v = path[j];
        steps.push(if phi == 0.0 {
            PatternStep::pauli(v, Basis::X)
        } else {
            PatternStep::angle(v, -phi).with_s(x.iter().copied().collect())
        });
        // H Rz(φ) X^x Z^z = (X^z Z^x) H Rz(φ) once the angle sign absorbed X^x.
        let mut nx = std::mem::replace(&mut z, BTreeSet::new());
        if !nx.remove(&v) {
            nx.insert(v);
        }
        z = std::mem::replace(&mut x, nx);
    }
    let out = *path.last().expect("non-empty");
    Ok(MeasurementPattern {
        inputs: vec![path[0]],
        outputs: vec![out],
        steps,
        corrections: vec![OutputCorrection { v: out, x: x.into_iter().collect(), z: z.into_iter().collect() }],
    })
}

/// Teleportation along an odd-length `path` (identity channel).
pub fn wire_pattern(path: &[usize]) -> Result<MeasurementPattern, MbqcError> {
    if path.len() % 2 == 0 {
        return Err(MbqcError::InvalidPattern(format!(
            "a wire of {} vertices implements H, not the identity",
            path.len()
        )));
    }
    line_pattern(path, &vec![0.0; path.len().saturating_sub(1)])
}

/// Five-vertex line `0..5` implementing `Rz(γ) Rx(β) Rz(α)`.
pub fn rotation_pattern(alpha: f64, beta: f64, gamma: f64) -> MeasurementPattern {
    line_pattern(&[0, 1, 2, 3, 4], &[alpha, beta, gamma, 0.0]).expect("five vertices, four angles")
}

/// Two-vertex graph-native controlled-Z: both vertices are inputs and outputs.
pub fn cz_pattern() -> MeasurementPattern {
    MeasurementPattern { inputs: vec![0, 1], outputs: vec![0, 1], steps: Vec::new(), corrections: Vec::new() }
}

/// Initial state of the pattern inputs.
#[derive(Clone, Debug)]
pub enum PatternInput {
    /// Inputs in `|+⟩` like every other vertex.
    Plus,
    /// Clifford gates on the input register (qubit `k` is `inputs[k]`),
    /// applied to `|+…+⟩` before entangling.
    Gates(Vec<Gate>),
    /// Dense state on the inputs followed by reference qubits, which are
    /// carried to the end of the output register untouched. Dense backend only.
    State(StateVector),
}

/// One executed step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepOutcome {
    pub v: usize,
    /// Physical Pauli measured, for Pauli-equivalent steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    /// Adapted xy-plane angle, for the others.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    /// Relative to the adapted basis.
    pub outcome: Outcome,
    pub deterministic: bool,
}

#[derive(Clone, Debug)]
pub enum PatternOutput {
    /// Output qubits in pattern order, then any reference qubits.
    Dense(StateVector),
    /// Graph form on the output vertex ids.
    Graph(GraphState),
    /// Nothing left unmeasured.
    Empty,
}

#[derive(Clone, Debug)]
pub struct PatternRun {
    pub backend: Backend,
    pub outcomes: Vec<StepOutcome>,
    /// Declared byproducts evaluated on the outcomes, in output order.
    pub byproduct: Vec<(usize, Pauli)>,
    /// Stabilizer backend: Pauli relating the output to the run in which
    /// every random measurement gave `+1`, in output order.
    pub tracked_frame: Option<Vec<(usize, Pauli)>>,
    pub output: PatternOutput,
}

impl PatternRun {
    pub fn outcome_of(&self, v: usize) -> Option<Outcome> {
        self.outcomes.iter().find(|o| o.v == v).map(|o| o.outcome)
    }

    /// Dense output with the declared byproducts undone.
    pub fn corrected_dense(&self) -> Option<StateVector> {
        let PatternOutput::Dense(s) = &self.output else { return None };
        let mut s = s.clone();
        for (k, &(_, p)) in self.byproduct.iter().enumerate() {
            apply_pauli_1q(&mut s, k, p);
        }
        Some(s)
    }

    /// Output graph with a per-output Pauli list undone (vertex operator `P·C`).
    pub fn corrected_graph(&self, frame: &[(usize, Pauli)]) -> Option<GraphState> {
        let PatternOutput::Graph(g) = &self.output else { return None };
        let mut g = g.clone();
        let mut f = PauliFrame::identity(g.len());
        for &(v, p) in frame {
            f.toggle(g.index_of(v).ok()?, p);
        }
        f.apply_to_graph(&mut g);
        Some(g)
    }
}

fn apply_pauli_1q(s: &mut StateVector, q: usize, p: Pauli) {
    if p != Pauli::I {
        s.apply_1q(q, &mat_pauli(p)).expect("output qubit in range");
    }
}

/// Adaptation-invariant description of a step: `Some(k)` for an angle of
/// `k·π/2` (Pauli), `None` otherwise. `Z` is reported as `None` too and
/// handled separately.
fn quarter_turns(b: StepBasis) -> Option<u8> {
    match b {
        StepBasis::Pauli(Basis::X) => Some(0),
        StepBasis::Pauli(Basis::Y) => Some(1),
        StepBasis::Pauli(Basis::Z) => Some(0),
        StepBasis::Angle(a) => {
            let k = (a / FRAC_PI_2).round();
            ((a - k * FRAC_PI_2).abs() <= PAULI_ANGLE_TOL).then(|| k.rem_euclid(4.0) as u8)
        }
    }
}

/// What a step measures once adapted.
enum Adapted {
    /// Physical Pauli and whether the recorded outcome is its negation.
    Pauli(Basis, bool),
    Angle(f64),
}

fn adapt(step: &PatternStep, s: bool, t: bool) -> Adapted {
    if step.basis == StepBasis::Pauli(Basis::Z) {
        return Adapted::Pauli(Basis::Z, s);
    }
    if let Some(k) = quarter_turns(step.basis) {
        let k = (if s { 4 - k } else { k } + if t { 2 } else { 0 }) % 4;
        return Adapted::Pauli(if k % 2 == 0 { Basis::X } else { Basis::Y }, k >= 2);
    }
    let StepBasis::Angle(a) = step.basis else { unreachable!("Pauli bases have quarter turns") };
    Adapted::Angle(if s { -a } else { a } + if t { PI } else { 0.0 })
}

enum Register {
    Tableau { t: StabilizerTableau, frame: PauliFrame },
    Dense(StateVector),
}

/// Runs `pattern` on `cluster`: input vertices start in the input state,
/// every other vertex in `|+⟩`; the cluster edges are entangled with CZ and
/// its vertex operators applied, then the steps execute in order.
pub fn execute_pattern<R: Rng + ?Sized>(
    cluster: &GraphState,
    pattern: &MeasurementPattern,
    input: &PatternInput,
    backend: Backend,
    rng: &mut R,
) -> Result<PatternRun, MbqcError> {
    pattern.validate_on(cluster)?;
    let idx = |v: usize| cluster.index_of(v).expect("validated");
    let n = cluster.len();
    let edges: Vec<(usize, usize)> = cluster.edges().into_iter().map(|(u, v)| (idx(u), idx(v))).collect();
    let input_gate = |g: Gate| -> Result<Gate, MbqcError> {
        let map = |q: usize| {
            pattern.inputs.get(q).map(|&v| idx(v)).ok_or(MbqcError::InputMismatch {
                expected: pattern.inputs.len(),
                found: q + 1,
            })
        };
        Ok(match g {
            Gate::H(q) => Gate::H(map(q)?),
            Gate::S(q) => Gate::S(map(q)?),
            Gate::Sdg(q) => Gate::Sdg(map(q)?),
            Gate::X(q) => Gate::X(map(q)?),
            Gate::Y(q) => Gate::Y(map(q)?),
            Gate::Z(q) => Gate::Z(map(q)?),
            Gate::Cz(a, b) => Gate::Cz(map(a)?, map(b)?),
            Gate::Cx(a, b) => Gate::Cx(map(a)?, map(b)?),
        })
    };

    let mut refs = 0;
    let mut reg = match backend {
        Backend::Stabilizer => {
            let mut t = StabilizerTableau::new_plus_state(n)?;
            match input {
                PatternInput::Plus => {}
                PatternInput::Gates(gs) => {
                    for &g in gs {
                        t.apply(input_gate(g)?)?;
                    }
                }
                PatternInput::State(_) => return Err(MbqcError::DenseInputOnStabilizer),
            }
            t.apply_cz_layer(&edges)?;
            for (i, (_, c)) in cluster.vops().enumerate() {
                t.apply_all(c.gates(i))?;
            }
            Register::Tableau { t, frame: PauliFrame::identity(n) }
        }
        Backend::Statevector => {
            let mut s = match input {
                PatternInput::Plus => StateVector::plus(n)?,
                PatternInput::Gates(gs) => {
                    let mut s = StateVector::plus(n)?;
                    for &g in gs {
                        s.apply_gate(input_gate(g)?)?;
                    }
                    s
                }
                PatternInput::State(psi) => {
                    let k = pattern.inputs.len();
                    if psi.num_qubits() < k {
                        return Err(MbqcError::InputMismatch { expected: k, found: psi.num_qubits() });
                    }
                    refs = psi.num_qubits() - k;
                    let inputs: Vec<usize> = pattern.inputs.iter().map(|&v| idx(v)).collect();
                    embed_input(n, &inputs, psi)?
                }
            };
            for &(a, b) in &edges {
                s.cz(a, b)?;
            }
            for (i, (_, c)) in cluster.vops().enumerate() {
                s.apply_local_clifford(i, c)?;
            }
            Register::Dense(s)
        }
    };

    let mut recorded: BTreeMap<usize, bool> = BTreeMap::new();
    let parity = |set: &[usize], rec: &BTreeMap<usize, bool>| set.iter().fold(false, |acc, v| acc ^ rec[v]);
    let mut outcomes = Vec::with_capacity(pattern.steps.len());
    for step in &pattern.steps {
        let q = idx(step.v);
        let adapted = adapt(step, parity(&step.s, &recorded), parity(&step.t, &recorded));
        let done = match (&mut reg, adapted) {
            (Register::Tableau { t, frame }, Adapted::Pauli(b, neg)) => {
                let d = t.measure(q, b, rng)?;
                t.isolate_qubit(q, b)?;
                if let Some(flip) = &d.flip {
                    let expected = Outcome::Plus.times(frame.anticommutes_with(q, b.pauli()));
                    if d.outcome != expected {
                        frame.compose_string(flip);
                    }
                }
                StepOutcome { v: step.v, basis: Some(b), angle: None, outcome: d.outcome.times(neg), deterministic: d.deterministic }
            }
            (Register::Tableau { .. }, Adapted::Angle(a)) => {
                return Err(MbqcError::NonPauliAngle { v: step.v, angle: a });
            }
            (Register::Dense(s), Adapted::Pauli(b, neg)) => {
                let d = s.measure(q, b, rng)?;
                StepOutcome { v: step.v, basis: Some(b), angle: None, outcome: d.outcome.times(neg), deterministic: d.deterministic }
            }
            (Register::Dense(s), Adapted::Angle(a)) => {
                let d = s.measure_angle(q, a, rng)?;
                StepOutcome { v: step.v, basis: None, angle: Some(a), outcome: d.outcome, deterministic: d.deterministic }
            }
        };
        recorded.insert(step.v, done.outcome.bit());
        outcomes.push(done);
    }

    let byproduct = pattern
        .outputs
        .iter()
        .map(|&v| {
            let c = pattern.corrections.iter().find(|c| c.v == v);
            let (x, z) = c.map_or((false, false), |c| (parity(&c.x, &recorded), parity(&c.z, &recorded)));
            (v, Pauli::from_bits(x, z))
        })
        .collect();

    let out_q: Vec<usize> = pattern.outputs.iter().map(|&v| idx(v)).collect();
    let (output, tracked_frame) = match reg {
        Register::Tableau { t, frame } => {
            let tracked = pattern.outputs.iter().zip(&out_q).map(|(&v, &q)| (v, frame.get(q))).collect();
            if out_q.is_empty() {
                (PatternOutput::Empty, Some(tracked))
            } else {
                let g = t.reduced_graph_state(&out_q).map_err(|e| match e {
                    StabilizerError::Entangled(q) => MbqcError::OutputEntangled(cluster.ids()[q]),
                    e => e.into(),
                })?;
                let ids = cluster.ids().to_vec();
                (PatternOutput::Graph(g.relabeled(|q| ids[q])?), Some(tracked))
            }
        }
        Register::Dense(s) => {
            let mut keep: Vec<usize> = out_q.clone();
            keep.extend(n..n + refs);
            if keep.is_empty() {
                (PatternOutput::Empty, None)
            } else {
                let r = s.restrict(&keep).map_err(|e| match e {
                    DenseError::NotStabilizer => MbqcError::OutputEntangled(pattern.outputs.first().copied().unwrap_or(0)),
                    e => e.into(),
                })?;
                // `restrict` keeps ascending order; put outputs in pattern order.
                let mut sorted = keep.clone();
                sorted.sort_unstable();
                let perm: Vec<usize> = keep.iter().map(|q| sorted.binary_search(q).expect("kept")).collect();
                (PatternOutput::Dense(permute_qubits(&r, &perm)?), None)
            }
        }
    };

    Ok(PatternRun { backend, outcomes, byproduct, tracked_frame, output })
}

/// `|ψ⟩` on `inputs` plus the reference qubits `n..`, `|+⟩` elsewhere.
fn embed_input(n: usize, inputs: &[usize], psi: &StateVector) -> Result<StateVector, MbqcError> {
    let k = inputs.len();
    let refs = psi.num_qubits() - k;
    let total = n + refs;
    StateVector::check_size(total)?;
    let rest: Vec<usize> = (0..n).filter(|q| !inputs.contains(q)).collect();
    let scale = (0.5f64).powf(rest.len() as f64 / 2.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total];
    for (j, a) in psi.amplitudes().iter().enumerate() {
        let mut base = 0usize;
        for (b, &q) in inputs.iter().enumerate() {
            if j >> b & 1 == 1 {
                base |= 1 << q;
            }
        }
        for r in 0..refs {
            if j >> (k + r) & 1 == 1 {
                base |= 1 << (n + r);
            }
        }
        for c in 0..1usize << rest.len() {
            let mut idx = base;
            for (b, &q) in rest.iter().enumerate() {
                if c >> b & 1 == 1 {
                    idx |= 1 << q;
                }
            }
            amps[idx] = a * scale;
        }
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

/// New qubit `j` is old qubit `perm[j]`.
fn permute_qubits(s: &StateVector, perm: &[usize]) -> Result<StateVector, MbqcError> {
    if perm.iter().enumerate().all(|(j, &p)| j == p) {
        return Ok(s.clone());
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); s.amplitudes().len()];
    for (i, a) in s.amplitudes().iter().enumerate() {
        let mut k = 0;
        for (j, &p) in perm.iter().enumerate() {
            if i >> p & 1 == 1 {
                k |= 1 << j;
            }
        }
        amps[k] = *a;
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

/// Operation for [`sv_run`].
#[derive(Clone, Debug)]
pub enum SvOp {
    Gate(Gate),
    Unitary(usize, Mat2),
    Measure(usize, Basis),
    MeasureAngle(usize, f64),
    /// Post-selection; a zero-probability branch is an error.
    Force(usize, Basis, Outcome),
}

/// Exact dense simulation of `ops` starting from `state`.
pub fn sv_run<R: Rng + ?Sized>(
    mut state: StateVector,
    ops: &[SvOp],
    rng: &mut R,
) -> Result<(StateVector, Vec<(usize, Outcome)>), MbqcError> {
    let mut outcomes = Vec::new();
    for op in ops {
        match op {
            SvOp::Gate(g) => state.apply_gate(*g)?,
            SvOp::Unitary(q, m) => state.apply_1q(*q, m)?,
            SvOp::Measure(q, b) => outcomes.push((*q, state.measure(*q, *b, rng)?.outcome)),
            SvOp::MeasureAngle(q, a) => outcomes.push((*q, state.measure_angle(*q, *a, rng)?.outcome)),
            SvOp::Force(q, b, o) => outcomes.push((*q, state.measure_forced(*q, *b, *o)?.outcome)),
        }
    }
    Ok((state, outcomes))
}

/// [`sv_run`] from the dense form of a graph state (qubit `i` = `i`-th smallest id).
pub fn sv_run_graph<R: Rng + ?Sized>(
    g: &GraphState,
    ops: &[SvOp],
    rng: &mut R,
) -> Result<(StateVector, Vec<(usize, Outcome)>), MbqcError> {
    sv_run(StateVector::from_graph_state(g)?, ops, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use crate::rng::SeedStream;

    #[test]
    fn line_pattern_sets() {
        let p = line_pattern(&[0, 1, 2], &[0.0, 0.0]).unwrap();
        assert_eq!(p.corrections, vec![OutputCorrection { v: 2, x: vec![1], z: vec![0] }]);
        let r = rotation_pattern(0.1, 0.2, 0.3);
        assert_eq!(r.steps[1].s, vec![0]);
        assert_eq!(r.steps[2].s, vec![1]);
        assert_eq!(r.corrections, vec![OutputCorrection { v: 4, x: vec![1, 3], z: vec![0, 2] }]);
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let p = rotation_pattern(0.1, 0.2, 0.3);
        assert_eq!(MeasurementPattern::from_json(&p.to_json()).unwrap(), p);
        let text = r#"{"inputs":[0],"outputs":[2],"steps":[{"v":0,"basis":"X"},{"v":1,"angle":0.5,"s":[0]}]}"#;
        let p = MeasurementPattern::from_json(text).unwrap();
        assert_eq!(p.steps[1].basis, StepBasis::Angle(0.5));
        assert!(MeasurementPattern::from_json(r#"{"inputs":[],"outputs":[],"steps":[{"v":0,"basis":"X","angle":1.0}]}"#).is_err());
        assert!(MeasurementPattern::from_json(r#"{"inputs":[],"outputs":[],"steps":[],"extra":1}"#).is_err());
    }

    #[test]
    fn adaptation_must_look_backwards() {
        let p = MeasurementPattern {
            inputs: vec![0],
            outputs: vec![2],
            steps: vec![PatternStep::angle(0, 0.3).with_s(vec![1]), PatternStep::pauli(1, Basis::X)],
            corrections: vec![],
        };
        assert!(matches!(p.validate(), Err(MbqcError::AdaptationOrder { v: 0, refers: 1 })));
    }

    #[test]
    fn stabilizer_rejects_generic_angles() {
        let g = GraphState::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = rotation_pattern(0.3, 0.0, 0.0);
        let mut rng = SeedStream::new(1).rng("t");
        let g5 = GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(matches!(
            execute_pattern(&g5, &p, &PatternInput::Plus, Backend::Stabilizer, &mut rng),
            Err(MbqcError::NonPauliAngle { v: 0, .. })
        ));
        // π/2 multiples are Pauli.
        let q = line_pattern(&[0, 1, 2], &[FRAC_PI_2, PI]).unwrap();
        execute_pattern(&g, &q, &PatternInput::Plus, Backend::Stabilizer, &mut rng).unwrap();
    }

    #[test]
    fn measuring_everything_leaves_nothing() {
        let g = GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let p = MeasurementPattern {
            inputs: vec![],
            outputs: vec![],
            steps: (0..4).map(|v| PatternStep::pauli(v, Basis::Z)).collect(),
            corrections: vec![],
        };
        for backend in [Backend::Stabilizer, Backend::Statevector] {
            let mut rng = SeedStream::new(3).rng("t");
            let r = execute_pattern(&g, &p, &PatternInput::Plus, backend, &mut rng).unwrap();
            assert!(matches!(r.output, PatternOutput::Empty));
            assert_eq!(r.outcomes.len(), 4);
        }
    }

    #[test]
    fn sv_run_parity_of_triangle() {
        let g = GraphState::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut rng = SeedStream::new(5).rng("t");
        let (s, _) = sv_run_graph(&g, &[], &mut rng).unwrap();
        let p = PauliString::from_sparse(3, [(0, Pauli::X), (1, Pauli::Z), (2, Pauli::Z)]);
        assert!((s.expectation(&p).unwrap() - 1.0).abs() < 1e-12);
        let err = sv_run(StateVector::zero(1).unwrap(), &[SvOp::Force(0, Basis::Z, Outcome::Minus)], &mut rng);
        assert!(matches!(err, Err(MbqcError::Dense(DenseError::ImpossibleOutcome))));
    }
}
