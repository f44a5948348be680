use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{DonorError, DonorLattice, PauliFrame, ProtocolStep, Species};
use crate::graph::{GraphState, MeasurementOutcomeRecord};
use crate::pauli::{Basis, Gate, Outcome, PauliString, StabilizerError, StabilizerTableau};
use crate::statevector::{decide, gate_matrix, mat_basis_to_z, DenseError, Mat2, StateVector, MAX_DENSE_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Stabilizer,
    Statevector,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stabilizer" => Ok(Backend::Stabilizer),
            "statevector" => Ok(Backend::Statevector),
            _ => Err(format!("unknown backend {s:?} (expected stabilizer or statevector)")),
        }
    }
}

/// Error sources consulted while a protocol runs. Every method defaults to
/// "no error", and implementations keep their own randomness so that the
/// measurement draws are the same with and without noise.
pub trait NoiseHook {
    /// Spin at `site` starts in `|1⟩` instead of `|0⟩` before its π/2 pulse.
    fn initialization_flip(&mut self, _species: Species, _site: usize) -> bool {
        false
    }

    /// Z error on the electron from `origin` during one hop.
    fn shuttle_dephasing(&mut self, _origin: usize) -> bool {
        false
    }

    /// Reported outcome of the electron from `origin` is inverted.
    fn report_flip(&mut self, _origin: usize) -> bool {
        false
    }

    /// Z error on the nucleus at `site` accumulated over the protocol.
    fn nuclear_dephasing(&mut self, _site: usize) -> bool {
        false
    }
}

pub struct Noiseless;

impl NoiseHook for Noiseless {}

/// One recorded electron measurement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElectronMeasurement {
    /// Site id where the electron started.
    pub origin: usize,
    /// Site id where it was measured (before the hop, for discards).
    pub site: usize,
    pub basis: Basis,
    /// Reported outcome.
    pub outcome: Outcome,
    pub deterministic: bool,
    /// Measured out because its next hop left the lattice or hit a dead site.
    pub discarded: bool,
    pub report_flipped: bool,
    /// Vertex id under which the outcome is stored in the record.
    pub record_id: usize,
}

/// Output of a protocol run.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub backend: Backend,
    /// Post-measurement state of the nuclei; one vertex per site, dead sites isolated.
    pub graph: GraphState,
    /// Outcomes keyed by `(1 + g) * num_sites + origin`, `g` counting the
    /// electron's earlier measurements.
    pub record: MeasurementOutcomeRecord,
    pub measurements: Vec<ElectronMeasurement>,
    /// Corrections implied by the reported outcomes, indexed by site id:
    /// `graph` equals `frame · |reference⟩`, the reference being the run in
    /// which every random outcome came out `+1`.
    pub frame: PauliFrame,
    pub warnings: Vec<String>,
}

impl ProtocolRun {
    /// `graph` with the frame undone; independent of the seed for noiseless runs.
    pub fn corrected_graph(&self) -> GraphState {
        let mut g = self.graph.clone();
        self.frame.apply_to_graph(&mut g);
        g
    }
}

/// Runs `steps` on `lattice` with random outcomes drawn from `rng`.
pub fn run_protocol<R: RngCore>(
    lattice: &DonorLattice,
    steps: &[ProtocolStep],
    backend: Backend,
    rng: &mut R,
) -> Result<ProtocolRun, DonorError> {
    run_protocol_with(lattice, steps, backend, rng, &mut Noiseless)
}

/// `run_protocol` with error injection. On the statevector backend the frame
/// is recovered exactly from a noiseless reference pass, so report flips do
/// not corrupt it there.
pub fn run_protocol_with<R: RngCore>(
    lattice: &DonorLattice,
    steps: &[ProtocolStep],
    backend: Backend,
    rng: &mut R,
    noise: &mut dyn NoiseHook,
) -> Result<ProtocolRun, DonorError> {
    let n = lattice.total_qubits();
    let n_live = lattice.live_count();
    if n == 0 {
        let graph = GraphState::with_ids((0..lattice.num_sites()).collect())?;
        return Ok(ProtocolRun {
            backend,
            graph,
            record: MeasurementOutcomeRecord::new(),
            measurements: Vec::new(),
            frame: PauliFrame::identity(lattice.num_sites()),
            warnings: Vec::new(),
        });
    }
    let nuclei: Vec<usize> = (0..n_live).collect();
    let (nuclear_graph, frame, transcript) = match backend {
        Backend::Stabilizer => {
            let engine = TableauEngine(StabilizerTableau::new_zero_state(n)?);
            let mut r = Runner::new(lattice, engine, Draw::Random(rng), Some(noise), true);
            r.run(steps)?;
            let g = r.engine.graph(&nuclei)?;
            let f = r.frame.as_ref().expect("tracked").restrict(&nuclei).canonical_on(&g);
            (g, f, r.transcript)
        }
        Backend::Statevector => {
            if n > MAX_DENSE_QUBITS {
                return Err(DonorError::BackendCap { needed: n, max: MAX_DENSE_QUBITS });
            }
            let mut reference = Runner::new(lattice, DenseEngine::new(n)?, Draw::ForcePlus, None, false);
            reference.run(steps)?;
            let ref_graph = reference.engine.graph(&nuclei)?;
            let mut r = Runner::new(lattice, DenseEngine::new(n)?, Draw::Random(rng), Some(noise), false);
            r.run(steps)?;
            let g = r.engine.graph(&nuclei)?;
            let f = PauliFrame::between(&ref_graph, &g).expect("runs differ by Pauli operators only");
            (g, f, r.transcript)
        }
    };

    let live = lattice.live_sites();
    let mut graph = GraphState::with_ids((0..lattice.num_sites()).collect())?;
    for (u, v) in nuclear_graph.edges() {
        graph.toggle_edge_unchecked(live[u], live[v]);
    }
    let mut site_frame = PauliFrame::identity(lattice.num_sites());
    for (k, c) in nuclear_graph.vops() {
        graph.push_vop(live[k], c);
        site_frame.set(live[k], frame.get(k));
    }
    Ok(ProtocolRun {
        backend,
        graph,
        record: transcript.record,
        measurements: transcript.measurements,
        frame: site_frame,
        warnings: transcript.warnings,
    })
}

enum Draw<'a> {
    Random(&'a mut dyn RngCore),
    ForcePlus,
}

impl Draw<'_> {
    fn outcome(&mut self, p_plus: f64) -> Outcome {
        match self {
            Draw::Random(rng) => Outcome::from_draw(rng.random::<f64>(), p_plus),
            Draw::ForcePlus => Outcome::Plus,
        }
    }
}

struct Measured {
    outcome: Outcome,
    deterministic: bool,
    flip: Option<PauliString>,
}

trait Engine {
    fn gate(&mut self, g: Gate) -> Result<(), DonorError>;
    fn cz_layer(&mut self, pairs: &[(usize, usize)]) -> Result<(), DonorError>;
    fn measure(&mut self, q: usize, basis: Basis, draw: &mut Draw) -> Result<Measured, DonorError>;
    /// Leaves `q` carried by a single stabilizer after a `basis` measurement.
    fn isolate(&mut self, q: usize, basis: Basis) -> Result<(), DonorError>;
    /// Graph form of the state on `keep`, vertex `i` being `keep[i]`.
    fn graph(&mut self, keep: &[usize]) -> Result<GraphState, DonorError>;
}

struct TableauEngine(StabilizerTableau);

impl Engine for TableauEngine {
    fn gate(&mut self, g: Gate) -> Result<(), DonorError> {
        Ok(self.0.apply(g)?)
    }

    fn cz_layer(&mut self, pairs: &[(usize, usize)]) -> Result<(), DonorError> {
        Ok(self.0.apply_cz_layer(pairs)?)
    }

    fn measure(&mut self, q: usize, basis: Basis, draw: &mut Draw) -> Result<Measured, DonorError> {
        let d = self.0.measure_with(q, basis, || draw.outcome(0.5))?;
        Ok(Measured { outcome: d.outcome, deterministic: d.deterministic, flip: d.flip })
    }

    fn isolate(&mut self, q: usize, basis: Basis) -> Result<(), DonorError> {
        self.0.isolate_qubit(q, basis)?;
        Ok(())
    }

    fn graph(&mut self, keep: &[usize]) -> Result<GraphState, DonorError> {
        match self.0.reduced_graph_state(keep) {
            Ok(g) => Ok(g.relabeled(|q| keep.binary_search(&q).expect("kept qubit"))?),
            Err(StabilizerError::Entangled(_)) => Err(DonorError::ElectronsEntangled),
            Err(e) => Err(e.into()),
        }
    }
}

/// Exact state-vector engine that keeps every qubit outside any
/// entanglement as a separate single-qubit factor. `active` lists, in
/// ascending order, the qubits carried by `state`; qubit `active[k]` is its
/// bit `k`.
struct DenseEngine {
    state: Option<StateVector>,
    active: Vec<usize>,
    factors: Vec<Option<[Complex64; 2]>>,
}

impl DenseEngine {
    fn new(n: usize) -> Result<Self, DonorError> {
        StateVector::check_size(n)?;
        let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        Ok(Self { state: None, active: Vec::new(), factors: vec![Some(zero); n] })
    }

    fn check(&self, q: usize) -> Result<(), DonorError> {
        if q >= self.factors.len() {
            return Err(DenseError::QubitOutOfRange { qubit: q, n: self.factors.len() }.into());
        }
        Ok(())
    }

    fn position(&self, q: usize) -> Option<usize> {
        self.active.binary_search(&q).ok()
    }

    /// Moves `q` into the entangled register and returns its bit.
    fn activate(&mut self, q: usize) -> Result<usize, DonorError> {
        self.check(q)?;
        if let Some(pos) = self.position(q) {
            return Ok(pos);
        }
        let v = self.factors[q].take().expect("inactive qubit has a factor");
        let pos = self.active.partition_point(|&a| a < q);
        self.state = Some(match &self.state {
            None => StateVector::single(v[0], v[1])?,
            Some(s) => s.insert_qubit(pos, v)?,
        });
        self.active.insert(pos, q);
        Ok(pos)
    }
}

fn mat_vec(m: &Mat2, v: &[Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn adjoint(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

impl Engine for DenseEngine {
    fn gate(&mut self, g: Gate) -> Result<(), DonorError> {
        if let Some((q, m)) = gate_matrix(g) {
            self.check(q)?;
            match self.position(q) {
                Some(pos) => self.state.as_mut().expect("active register").apply_1q(pos, &m)?,
                None => {
                    let v = self.factors[q].as_mut().expect("inactive qubit has a factor");
                    *v = mat_vec(&m, v);
                }
            }
            return Ok(());
        }
        let (Gate::Cz(a, b) | Gate::Cx(a, b)) = g else { unreachable!("two-qubit gate") };
        self.activate(a)?;
        let pb = self.activate(b)?;
        let pa = self.position(a).expect("activated");
        let mapped = if matches!(g, Gate::Cz(..)) { Gate::Cz(pa, pb) } else { Gate::Cx(pa, pb) };
        Ok(self.state.as_mut().expect("active register").apply_gate(mapped)?)
    }

    fn cz_layer(&mut self, pairs: &[(usize, usize)]) -> Result<(), DonorError> {
        for &(a, b) in pairs {
            self.gate(Gate::Cz(a, b))?;
        }
        Ok(())
    }

    fn measure(&mut self, q: usize, basis: Basis, draw: &mut Draw) -> Result<Measured, DonorError> {
        self.check(q)?;
        let to_z = mat_basis_to_z(basis);
        let (p_plus, pos) = match self.position(q) {
            None => {
                let w = mat_vec(&to_z, self.factors[q].as_ref().expect("inactive qubit has a factor"));
                (w[0].norm_sqr(), None)
            }
            Some(pos) => {
                let s = self.state.as_mut().expect("active register");
                s.apply_1q(pos, &to_z)?;
                (s.p_zero(pos), Some(pos))
            }
        };
        let (outcome, deterministic) = decide(p_plus, |p| Ok::<_, DonorError>(draw.outcome(p)))?;
        if let Some(pos) = pos {
            let s = self.state.take().expect("active register");
            if s.num_qubits() > 1 {
                let p = if outcome == Outcome::Plus { p_plus } else { 1.0 - p_plus };
                self.state = Some(s.remove_projected(pos, outcome, p)?);
            }
            self.active.remove(pos);
        }
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let e = if outcome == Outcome::Plus { [one, zero] } else { [zero, one] };
        self.factors[q] = Some(mat_vec(&adjoint(&to_z), &e));
        Ok(Measured { outcome, deterministic, flip: None })
    }

    fn isolate(&mut self, _q: usize, _basis: Basis) -> Result<(), DonorError> {
        Ok(())
    }

    fn graph(&mut self, keep: &[usize]) -> Result<GraphState, DonorError> {
        for &q in keep {
            self.activate(q)?;
        }
        let positions: Vec<usize> = keep.iter().map(|&q| self.position(q).expect("activated")).collect();
        let Some(state) = &self.state else { return Err(DenseError::InvalidSize.into()) };
        let reduced = match state.restrict(&positions) {
            Ok(s) => s,
            Err(DenseError::NotStabilizer) => return Err(DonorError::ElectronsEntangled),
            Err(e) => return Err(e.into()),
        };
        Ok(reduced.to_tableau()?.to_graph_state())
    }
}

struct Electron {
    qubit: usize,
    origin: usize,
    pos: (usize, usize),
    measurements: usize,
    /// Basis of the last measurement, until the electron is re-prepared.
    measured_in: Option<Basis>,
}

#[derive(Default)]
struct Transcript {
    record: MeasurementOutcomeRecord,
    measurements: Vec<ElectronMeasurement>,
    warnings: Vec<String>,
}

struct Runner<'a, E: Engine> {
    lattice: &'a DonorLattice,
    engine: E,
    draw: Draw<'a>,
    noise: Option<&'a mut dyn NoiseHook>,
    /// Tracked only when the engine reports flip operators.
    frame: Option<PauliFrame>,
    nuclear_qubit: Vec<Option<usize>>,
    touched: Vec<bool>,
    electrons: Vec<Electron>,
    entangled: bool,
    transcript: Transcript,
}

impl<'a, E: Engine> Runner<'a, E> {
    fn new(
        lattice: &'a DonorLattice,
        engine: E,
        draw: Draw<'a>,
        noise: Option<&'a mut dyn NoiseHook>,
        track_frame: bool,
    ) -> Self {
        let sites = lattice.sites();
        let n = lattice.total_qubits();
        let electrons = sites
            .iter()
            .enumerate()
            .filter_map(|(s, site)| {
                site.electron.map(|q| Electron { qubit: q, origin: s, pos: site.coords, measurements: 0, measured_in: None })
            })
            .collect();
        Self {
            lattice,
            engine,
            draw,
            noise,
            frame: track_frame.then(|| PauliFrame::identity(n)),
            nuclear_qubit: sites.iter().map(|s| s.nuclear_qubit).collect(),
            touched: vec![false; n],
            electrons,
            entangled: false,
            transcript: Transcript::default(),
        }
    }

    fn run(&mut self, steps: &[ProtocolStep]) -> Result<(), DonorError> {
        for &step in steps {
            match step {
                ProtocolStep::PrepareAllPlus(species) => self.prepare(species)?,
                ProtocolStep::GlobalCPhase => self.cphase()?,
                ProtocolStep::Shuttle(d) => self.shuttle(d.delta())?,
                ProtocolStep::MeasureElectrons(b) => self.measure_electrons(b)?,
                ProtocolStep::ReprepareElectronsPlus => self.reprepare()?,
            }
        }
        let noise = self.noise.as_deref_mut();
        if let Some(noise) = noise {
            for (s, q) in self.nuclear_qubit.iter().enumerate() {
                if let Some(q) = *q {
                    if noise.nuclear_dephasing(s) {
                        self.engine.gate(Gate::Z(q))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn apply(&mut self, g: Gate) -> Result<(), DonorError> {
        self.engine.gate(g)?;
        if let Some(f) = self.frame.as_mut() {
            f.propagate(g);
        }
        Ok(())
    }

    /// Measures `q`; `reported` is the outcome after the report-noise hook
    /// (consulted only when `report_origin` is set), and drives the frame.
    fn measure(&mut self, q: usize, basis: Basis, report_origin: Option<usize>) -> Result<(Measured, Outcome, bool), DonorError> {
        let m = self.engine.measure(q, basis, &mut self.draw)?;
        let flipped = match (report_origin, self.noise.as_deref_mut()) {
            (Some(o), Some(noise)) => noise.report_flip(o),
            _ => false,
        };
        let reported = m.outcome.times(flipped);
        if let (Some(f), Some(flip)) = (self.frame.as_mut(), m.flip.as_ref()) {
            let expected = Outcome::Plus.times(f.anticommutes_with(q, basis.pauli()));
            if reported != expected {
                f.compose_string(flip);
            }
        }
        Ok((m, reported, flipped))
    }

    /// Returns `q` to `|0⟩`, discarding whatever it held.
    fn reset(&mut self, q: usize) -> Result<(), DonorError> {
        let (m, _, _) = self.measure(q, Basis::Z, None)?;
        self.engine.isolate(q, Basis::Z)?;
        if m.outcome == Outcome::Minus {
            self.engine.gate(Gate::X(q))?;
        }
        if let Some(f) = self.frame.as_mut() {
            f.clear(q);
        }
        Ok(())
    }

    fn prepare_qubit(&mut self, q: usize, species: Species, site: usize) -> Result<(), DonorError> {
        if self.touched[q] {
            self.reset(q)?;
        }
        if let Some(noise) = self.noise.as_deref_mut() {
            if noise.initialization_flip(species, site) {
                self.engine.gate(Gate::X(q))?;
            }
        }
        self.apply(Gate::H(q))?;
        self.touched[q] = true;
        Ok(())
    }

    fn prepare(&mut self, species: Species) -> Result<(), DonorError> {
        if species.includes_nuclei() {
            for s in 0..self.nuclear_qubit.len() {
                if let Some(q) = self.nuclear_qubit[s] {
                    self.prepare_qubit(q, Species::Nuclear, s)?;
                }
            }
        }
        if species.includes_electrons() {
            for k in 0..self.electrons.len() {
                let (q, site) = (self.electrons[k].qubit, self.site_of(k));
                self.prepare_qubit(q, Species::Electron, site)?;
                self.electrons[k].measured_in = None;
            }
        }
        Ok(())
    }

    fn site_of(&self, k: usize) -> usize {
        let (i, j) = self.electrons[k].pos;
        self.lattice.site_id(i, j)
    }

    fn cphase(&mut self) -> Result<(), DonorError> {
        let mut pairs = Vec::with_capacity(self.electrons.len());
        for k in 0..self.electrons.len() {
            if let Some(nq) = self.nuclear_qubit[self.site_of(k)] {
                pairs.push((self.electrons[k].qubit, nq));
            }
        }
        self.engine.cz_layer(&pairs)?;
        if let Some(f) = self.frame.as_mut() {
            for &(a, b) in &pairs {
                f.propagate(Gate::Cz(a, b));
            }
        }
        self.entangled |= !pairs.is_empty();
        Ok(())
    }

    fn record(&mut self, k: usize, basis: Basis, m: &Measured, reported: Outcome, flipped: bool, discarded: bool) {
        let n_sites = self.lattice.num_sites();
        let e = &mut self.electrons[k];
        let record_id = (1 + e.measurements) * n_sites + e.origin;
        e.measurements += 1;
        let origin = e.origin;
        self.transcript
            .record
            .push(record_id, basis, reported)
            .expect("record ids are unique per electron and generation");
        let site = self.site_of(k);
        self.transcript.measurements.push(ElectronMeasurement {
            origin,
            site,
            basis,
            outcome: reported,
            deterministic: m.deterministic,
            discarded,
            report_flipped: flipped,
            record_id,
        });
    }

    fn measure_electron(&mut self, k: usize, basis: Basis, discarded: bool) -> Result<(), DonorError> {
        let (q, origin) = (self.electrons[k].qubit, self.electrons[k].origin);
        let (m, reported, flipped) = self.measure(q, basis, Some(origin))?;
        self.engine.isolate(q, basis)?;
        self.record(k, basis, &m, reported, flipped, discarded);
        self.electrons[k].measured_in = Some(basis);
        Ok(())
    }

    fn shuttle(&mut self, (dx, dy): (isize, isize)) -> Result<(), DonorError> {
        let mut k = 0;
        while k < self.electrons.len() {
            let (i, j) = self.electrons[k].pos;
            let (ni, nj) = (i as isize + dx, j as isize + dy);
            if self.lattice.is_live(ni, nj) {
                k += 1;
                continue;
            }
            if self.electrons[k].measured_in != Some(Basis::Z) {
                self.measure_electron(k, Basis::Z, true)?;
            }
            self.electrons.remove(k);
        }
        let mut occupied = std::collections::HashSet::with_capacity(self.electrons.len());
        for k in 0..self.electrons.len() {
            let (i, j) = self.electrons[k].pos;
            let pos = ((i as isize + dx) as usize, (j as isize + dy) as usize);
            if !occupied.insert(pos) {
                return Err(DonorError::ShuttleCollision(pos.0, pos.1));
            }
            self.electrons[k].pos = pos;
            let (q, origin) = (self.electrons[k].qubit, self.electrons[k].origin);
            if let Some(noise) = self.noise.as_deref_mut() {
                if noise.shuttle_dephasing(origin) {
                    self.engine.gate(Gate::Z(q))?;
                }
            }
        }
        let lattice = self.lattice;
        self.electrons.sort_by_key(|e| lattice.site_id(e.pos.0, e.pos.1));
        Ok(())
    }

    fn measure_electrons(&mut self, basis: Basis) -> Result<(), DonorError> {
        if !self.entangled {
            let msg = format!("measure_electrons({basis}) before any global_c_phase ignored");
            log::warn!("{msg}");
            self.transcript.warnings.push(msg);
            return Ok(());
        }
        for k in 0..self.electrons.len() {
            self.measure_electron(k, basis, false)?;
        }
        Ok(())
    }

    fn reprepare(&mut self) -> Result<(), DonorError> {
        for k in 0..self.electrons.len() {
            let q = self.electrons[k].qubit;
            match self.electrons[k].measured_in.take() {
                Some(Basis::X) => {}
                Some(Basis::Y) => self.apply(Gate::Sdg(q))?,
                Some(Basis::Z) => self.apply(Gate::H(q))?,
                None => {
                    self.reset(q)?;
                    self.apply(Gate::H(q))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::donor::{predicted_edge_set, square_lattice_protocol, standard_protocol, ProtocolKind};
    use crate::rng::SeedStream;

    fn adjacency(run: &ProtocolRun) -> Vec<(usize, usize)> {
        run.graph.edges()
    }

    #[test]
    fn two_by_two_standard_is_one_triangle() {
        let l = DonorLattice::new(2, 2).unwrap();
        for backend in [Backend::Stabilizer, Backend::Statevector] {
            let mut rng = SeedStream::new(7).rng("measure");
            let run = run_protocol(&l, &standard_protocol(), backend, &mut rng).unwrap();
            assert_eq!(adjacency(&run), vec![(0, 1), (0, 3), (1, 3)], "{backend:?}");
            assert_eq!(adjacency(&run), predicted_edge_set(&l, ProtocolKind::Standard));
        }
    }

    #[test]
    fn backends_agree_per_seed() {
        let l = DonorLattice::new(2, 3).unwrap();
        for seed in 0..5 {
            for steps in [standard_protocol(), square_lattice_protocol()] {
                let a = run_protocol(&l, &steps, Backend::Stabilizer, &mut SeedStream::new(seed).rng("measure")).unwrap();
                let b = run_protocol(&l, &steps, Backend::Statevector, &mut SeedStream::new(seed).rng("measure")).unwrap();
                assert_eq!(a.graph, b.graph);
                assert_eq!(a.corrected_graph().edges(), a.graph.edges());
                assert_eq!(a.frame, b.frame);
                assert_eq!(a.record, b.record);
            }
        }
    }

    #[test]
    fn corrected_graph_is_seed_independent() {
        let l = DonorLattice::new(3, 2).unwrap();
        let first = run_protocol(&l, &standard_protocol(), Backend::Stabilizer, &mut SeedStream::new(0).rng("m")).unwrap();
        for seed in 1..10 {
            let r = run_protocol(&l, &standard_protocol(), Backend::Stabilizer, &mut SeedStream::new(seed).rng("m")).unwrap();
            assert_eq!(r.corrected_graph(), first.corrected_graph());
        }
    }

    #[test]
    fn no_electrons_gives_empty_plus_state() {
        let l = DonorLattice::new(2, 2).unwrap().with_electrons(false);
        let run = run_protocol(&l, &standard_protocol(), Backend::Stabilizer, &mut SeedStream::new(1).rng("m")).unwrap();
        assert_eq!(run.graph.edge_count(), 0);
        assert!(run.graph.vops().all(|(_, c)| c.is_identity()));
        assert_eq!(run.warnings.len(), 1);
    }

    #[test]
    fn dead_sites_stay_isolated() {
        let l = DonorLattice::with_dead(3, 3, [(1, 1)]).unwrap();
        let run = run_protocol(&l, &standard_protocol(), Backend::Stabilizer, &mut SeedStream::new(3).rng("m")).unwrap();
        assert_eq!(run.graph.degree(4).unwrap(), 0);
        assert_eq!(adjacency(&run), predicted_edge_set(&l, ProtocolKind::Standard));
    }

    #[test]
    fn statevector_cap() {
        let l = DonorLattice::new(4, 3).unwrap();
        let e = run_protocol(&l, &standard_protocol(), Backend::Statevector, &mut SeedStream::new(0).rng("m"));
        assert!(matches!(e, Err(DonorError::BackendCap { needed: 24, .. })));
    }
}
