//! Dense state-vector oracle for small registers.
//!
//! Qubit `q` is bit `q` of the amplitude index. Everything that the
//! stabilizer backend can do is mirrored here with the same measurement
//! conventions, so the two can be compared shot by shot.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::clifford::LocalClifford;
use crate::graph::GraphState;
use crate::pauli::{Basis, Gate, Outcome, Pauli, PauliString, StabilizerError, StabilizerTableau};

/// Largest dense register (2^22 amplitudes, 64 MiB).
pub const MAX_DENSE_QUBITS: usize = 22;
/// Probabilities closer than this to 0 or 1 count as deterministic.
pub const PROB_TOL: f64 = 1e-9;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenseError {
    #[error("dense backend supports at most {max} qubits, requested {n}")]
    TooManyQubits { n: usize, max: usize },
    #[error("qubit count must be at least 1")]
    InvalidSize,
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("two-qubit gate targets must differ (both {0})")]
    DuplicateTargets(usize),
    #[error("requested outcome has zero probability")]
    ImpossibleOutcome,
    #[error("state is not a stabilizer state")]
    NotStabilizer,
    #[error("size mismatch: {expected} vs {found} qubits")]
    SizeMismatch { expected: usize, found: usize },
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn mat_h() -> Mat2 {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[r, r], [r, -r]]
}

/// `diag(1, e^{iφ})`.
pub fn mat_phase(phi: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, phi)]]
}

pub fn mat_pauli(p: Pauli) -> Mat2 {
    match p {
        Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
        Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
        Pauli::Y => [[ZERO, -I], [I, ZERO]],
        Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// `e^{-iθ X/2}`.
pub fn mat_rx(theta: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [[Complex64::new(c, 0.0), Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), Complex64::new(c, 0.0)]]
}

/// `e^{-iθ Z/2}`.
pub fn mat_rz(theta: f64) -> Mat2 {
    [[Complex64::from_polar(1.0, -theta / 2.0), ZERO], [ZERO, Complex64::from_polar(1.0, theta / 2.0)]]
}

pub(crate) fn gate_matrix(g: Gate) -> Option<(usize, Mat2)> {
    Some(match g {
        Gate::H(q) => (q, mat_h()),
        Gate::S(q) => (q, mat_phase(std::f64::consts::FRAC_PI_2)),
        Gate::Sdg(q) => (q, mat_phase(-std::f64::consts::FRAC_PI_2)),
        Gate::X(q) => (q, mat_pauli(Pauli::X)),
        Gate::Y(q) => (q, mat_pauli(Pauli::Y)),
        Gate::Z(q) => (q, mat_pauli(Pauli::Z)),
        Gate::Cz(..) | Gate::Cx(..) => return None,
    })
}

fn butterfly(amps: &mut [Complex64], q: usize, m: &Mat2) {
    let bit = 1usize << q;
    let [[a, b], [c, d]] = *m;
    for chunk in amps.chunks_exact_mut(2 * bit) {
        let (lo, hi) = chunk.split_at_mut(bit);
        if b == ZERO && c == ZERO {
            if a != ONE {
                lo.iter_mut().for_each(|x| *x *= a);
            }
            if d != ONE {
                hi.iter_mut().for_each(|x| *x *= d);
            }
        } else if a == ZERO && d == ZERO {
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                (*x, *y) = (b * *y, c * *x);
            }
        } else {
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                (*x, *y) = (a * *x + b * *y, c * *x + d * *y);
            }
        }
    }
}

/// Outcome for `+1` probability `p_plus` and whether it was forced.
pub(crate) fn decide<E>(p_plus: f64, choose: impl FnOnce(f64) -> Result<Outcome, E>) -> Result<(Outcome, bool), E> {
    Ok(if p_plus > 1.0 - PROB_TOL {
        (Outcome::Plus, true)
    } else if p_plus < PROB_TOL {
        (Outcome::Minus, true)
    } else {
        (choose(p_plus)?, false)
    })
}

/// Matrix product `a·b`.
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Unitary taking the `basis` eigenvectors to `|0⟩`/`|1⟩`.
pub fn mat_basis_to_z(basis: Basis) -> Mat2 {
    match basis {
        Basis::X => mat_h(),
        Basis::Y => mat_mul(&mat_h(), &mat_phase(-std::f64::consts::FRAC_PI_2)),
        Basis::Z => mat_pauli(Pauli::I),
    }
}


#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Result of a dense measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseMeasurement {
    pub outcome: Outcome,
    pub deterministic: bool,
    /// Probability of the +1 outcome before measuring.
    pub p_plus: f64,
}

impl StateVector {
    pub fn check_size(n: usize) -> Result<(), DenseError> {
        if n == 0 {
            return Err(DenseError::InvalidSize);
        }
        if n > MAX_DENSE_QUBITS {
            return Err(DenseError::TooManyQubits { n, max: MAX_DENSE_QUBITS });
        }
        Ok(())
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self, DenseError> {
        Self::check_size(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// `|+…+⟩`.
    pub fn plus(n: usize) -> Result<Self, DenseError> {
        Self::check_size(n)?;
        let a = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(Self { n, amps: vec![a; 1 << n] })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, DenseError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(DenseError::BadLength(len));
        }
        let n = len.trailing_zeros() as usize;
        Self::check_size(n)?;
        let mut s = Self { n, amps };
        s.normalize();
        Ok(s)
    }

    /// Single-qubit state `α|0⟩ + β|1⟩` (normalized).
    pub fn single(alpha: Complex64, beta: Complex64) -> Result<Self, DenseError> {
        Self::from_amplitudes(vec![alpha, beta])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= norm);
        }
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<(), DenseError> {
        if q >= self.n {
            return Err(DenseError::QubitOutOfRange { qubit: q, n: self.n });
        }
        Ok(())
    }

    /// Tensor product `self ⊗ other`, `other` taking the higher qubit indices.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, DenseError> {
        let n = self.n + other.n;
        Self::check_size(n)?;
        let mut amps = vec![ZERO; 1 << n];
        for (j, b) in other.amps.iter().enumerate() {
            for (i, a) in self.amps.iter().enumerate() {
                amps[(j << self.n) | i] = a * b;
            }
        }
        Ok(StateVector { n, amps })
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) -> Result<(), DenseError> {
        self.check_qubit(q)?;
        butterfly(&mut self.amps, q, m);
        Ok(())
    }

    /// Tensors a single-qubit state `v` in as qubit `pos`, shifting higher
    /// qubits up by one.
    pub fn insert_qubit(&self, pos: usize, v: [Complex64; 2]) -> Result<StateVector, DenseError> {
        if pos > self.n {
            return Err(DenseError::QubitOutOfRange { qubit: pos, n: self.n + 1 });
        }
        Self::check_size(self.n + 1)?;
        let mut amps = Vec::with_capacity(2 * self.amps.len());
        for chunk in self.amps.chunks_exact(1 << pos) {
            amps.extend(chunk.iter().map(|a| a * v[0]));
            amps.extend(chunk.iter().map(|a| a * v[1]));
        }
        Ok(StateVector { n: self.n + 1, amps })
    }

    /// Projects qubit `pos` onto `|0⟩` (`Plus`) or `|1⟩` (`Minus`), which has
    /// probability `p`, and drops it from the register.
    pub fn remove_projected(&self, pos: usize, outcome: Outcome, p: f64) -> Result<StateVector, DenseError> {
        self.check_qubit(pos)?;
        if self.n == 1 {
            return Err(DenseError::InvalidSize);
        }
        let bit = 1usize << pos;
        let scale = 1.0 / p.sqrt();
        let skip = if outcome == Outcome::Plus { 0 } else { bit };
        let amps = self.amps.chunks_exact(2 * bit).flat_map(|c| c[skip..skip + bit].iter().map(|a| a * scale)).collect();
        Ok(StateVector { n: self.n - 1, amps })
    }

    /// Amplitudes whose bits `a` and `b` are both set.
    fn both_set(&mut self, a: usize, b: usize) -> impl Iterator<Item = &mut Complex64> {
        let (lo, hi) = (1usize << a.min(b), 1usize << a.max(b));
        self.amps
            .chunks_exact_mut(2 * hi)
            .flat_map(move |c| c[hi..].chunks_exact_mut(2 * lo).flat_map(move |s| s[lo..].iter_mut()))
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), DenseError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(DenseError::DuplicateTargets(a));
        }
        Ok(())
    }

    /// Controlled phase `e^{iθ}` on `|11⟩`.
    pub fn cphase(&mut self, a: usize, b: usize, theta: f64) -> Result<(), DenseError> {
        self.check_pair(a, b)?;
        let ph = Complex64::from_polar(1.0, theta);
        self.both_set(a, b).for_each(|x| *x *= ph);
        Ok(())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<(), DenseError> {
        self.check_pair(a, b)?;
        self.both_set(a, b).for_each(|x| *x = -*x);
        Ok(())
    }

    pub fn cx(&mut self, c: usize, t: usize) -> Result<(), DenseError> {
        self.check_pair(c, t)?;
        let (cb, tb) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<(), DenseError> {
        match g {
            Gate::Cz(a, b) => self.cz(a, b),
            Gate::Cx(c, t) => self.cx(c, t),
            _ => {
                let (q, m) = gate_matrix(g).expect("single-qubit gate");
                self.apply_1q(q, &m)
            }
        }
    }

    pub fn apply_local_clifford(&mut self, q: usize, c: LocalClifford) -> Result<(), DenseError> {
        self.apply_1q(q, &c.unitary())
    }

    /// Applies a Pauli string (its phase included).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), DenseError> {
        if p.num_qubits() != self.n {
            return Err(DenseError::SizeMismatch { expected: self.n, found: p.num_qubits() });
        }
        for (q, l) in p.support() {
            self.apply_1q(q, &mat_pauli(l))?;
        }
        let phase = I.powu(u32::from(p.phase()));
        self.amps.iter_mut().for_each(|a| *a *= phase);
        Ok(())
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        if self.n != other.n {
            return 0.0;
        }
        self.inner(other).norm_sqr()
    }

    /// `⟨ψ|P|ψ⟩` for a Hermitian Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<f64, DenseError> {
        let mut t = self.clone();
        t.apply_pauli(p)?;
        Ok(self.inner(&t).re)
    }

    pub(crate) fn p_zero(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.chunks_exact(2 * bit).flat_map(|c| c[..bit].iter()).map(|a| a.norm_sqr()).sum()
    }

    fn rotate_to_z(&mut self, q: usize, basis: Basis) -> Result<(), DenseError> {
        match basis {
            Basis::X => self.apply_gate(Gate::H(q)),
            Basis::Y => {
                self.apply_gate(Gate::Sdg(q))?;
                self.apply_gate(Gate::H(q))
            }
            Basis::Z => Ok(()),
        }
    }

    fn rotate_from_z(&mut self, q: usize, basis: Basis) -> Result<(), DenseError> {
        match basis {
            Basis::X => self.apply_gate(Gate::H(q)),
            Basis::Y => {
                self.apply_gate(Gate::H(q))?;
                self.apply_gate(Gate::S(q))
            }
            Basis::Z => Ok(()),
        }
    }

    /// Projects onto the `outcome` eigenspace of `Z_q`, which has probability `p`.
    fn project_z(&mut self, q: usize, outcome: Outcome, p: f64) {
        let bit = 1usize << q;
        let scale = 1.0 / p.sqrt();
        for chunk in self.amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = chunk.split_at_mut(bit);
            let (kept, dropped) = if outcome == Outcome::Plus { (lo, hi) } else { (hi, lo) };
            kept.iter_mut().for_each(|a| *a *= scale);
            dropped.fill(ZERO);
        }
    }

    fn measure_rotated(
        &mut self,
        q: usize,
        choose: impl FnOnce(f64) -> Result<Outcome, DenseError>,
    ) -> Result<DenseMeasurement, DenseError> {
        let p_plus = self.p_zero(q);
        let (outcome, deterministic) = decide(p_plus, choose)?;
        self.project_z(q, outcome, if outcome == Outcome::Plus { p_plus } else { 1.0 - p_plus });
        Ok(DenseMeasurement { outcome, deterministic, p_plus })
    }

    pub(crate) fn measure_in(
        &mut self,
        q: usize,
        basis: Basis,
        choose: impl FnOnce(f64) -> Result<Outcome, DenseError>,
    ) -> Result<DenseMeasurement, DenseError> {
        self.check_qubit(q)?;
        self.rotate_to_z(q, basis)?;
        let r = self.measure_rotated(q, choose);
        self.rotate_from_z(q, basis)?;
        r
    }

    /// Born-rule measurement; a uniform draw is consumed only for random outcomes.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Result<DenseMeasurement, DenseError> {
        self.measure_in(q, basis, |p| Ok(Outcome::from_draw(rng.random::<f64>(), p)))
    }

    pub fn measure_forced(&mut self, q: usize, basis: Basis, outcome: Outcome) -> Result<DenseMeasurement, DenseError> {
        let before = self.clone();
        let r = self.measure_in(q, basis, |_| Ok(outcome))?;
        if r.outcome != outcome {
            *self = before;
            return Err(DenseError::ImpossibleOutcome);
        }
        Ok(r)
    }

    /// Rotation taking `|±_φ⟩ = (|0⟩ ± e^{iφ}|1⟩)/√2` to `|0⟩`/`|1⟩`.
    fn angle_to_z(q: usize, phi: f64, s: &mut StateVector) -> Result<(), DenseError> {
        s.apply_1q(q, &mat_phase(-phi))?;
        s.apply_1q(q, &mat_h())
    }

    fn angle_from_z(q: usize, phi: f64, s: &mut StateVector) -> Result<(), DenseError> {
        s.apply_1q(q, &mat_h())?;
        s.apply_1q(q, &mat_phase(phi))
    }

    /// Measurement in the xy-plane basis `|±_φ⟩`; `+1` is `|+_φ⟩`.
    pub fn measure_angle<R: Rng + ?Sized>(&mut self, q: usize, phi: f64, rng: &mut R) -> Result<DenseMeasurement, DenseError> {
        self.check_qubit(q)?;
        Self::angle_to_z(q, phi, self)?;
        let r = self.measure_rotated(q, |p| Ok(Outcome::from_draw(rng.random::<f64>(), p)));
        Self::angle_from_z(q, phi, self)?;
        r
    }

    pub fn measure_angle_forced(&mut self, q: usize, phi: f64, outcome: Outcome) -> Result<DenseMeasurement, DenseError> {
        self.check_qubit(q)?;
        let before = self.clone();
        Self::angle_to_z(q, phi, self)?;
        let r = self.measure_rotated(q, |_| Ok(outcome));
        Self::angle_from_z(q, phi, self)?;
        let r = r?;
        if r.outcome != outcome {
            *self = before;
            return Err(DenseError::ImpossibleOutcome);
        }
        Ok(r)
    }

    /// Reduced state on `keep` (ascending), assuming the other qubits are in
    /// a product state with it; errors if that fails by more than the tolerance.
    pub fn restrict(&self, keep: &[usize]) -> Result<StateVector, DenseError> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &q in &keep {
            self.check_qubit(q)?;
        }
        let rest: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        if rest.is_empty() {
            return Ok(self.clone());
        }
        // Largest-amplitude basis index fixes the complement's configuration.
        let (best, _) = self
            .amps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("non-empty");
        let rest_mask: usize = rest.iter().map(|&q| 1usize << q).sum();
        let base = best & rest_mask;
        let scatter = |qs: &[usize]| -> Vec<usize> {
            (0..1usize << qs.len())
                .map(|k| qs.iter().enumerate().filter(|&(j, _)| k >> j & 1 == 1).map(|(_, &q)| 1usize << q).sum())
                .collect()
        };
        let (keep_idx, rest_idx) = (scatter(&keep), scatter(&rest));
        let amps: Vec<Complex64> = keep_idx.iter().map(|&k| self.amps[base | k]).collect();
        let out = StateVector::from_amplitudes(amps)?;
        // ψ = out ⊗ χ exactly when the partial overlap χ(r) = Σ_k conj(out_k) ψ(k, r) has unit norm.
        let chi = rest_idx.iter().map(|&r| {
            keep_idx.iter().zip(&out.amps).map(|(&k, o)| o.conj() * self.amps[r | k]).sum::<Complex64>()
        });
        let weight: f64 = chi.map(|c| c.norm_sqr()).sum();
        if (weight - 1.0).abs() > 1e-9 {
            return Err(DenseError::NotStabilizer);
        }
        Ok(out)
    }

    /// Dense `⊗_v C_v |G⟩`, qubit `i` being the `i`-th smallest vertex id.
    pub fn from_graph_state(g: &GraphState) -> Result<StateVector, DenseError> {
        let mut s = StateVector::plus(g.len())?;
        for (u, v) in g.edges() {
            s.cz(g.index_of(u).expect("vertex"), g.index_of(v).expect("vertex"))?;
        }
        for (i, (_, c)) in g.vops().enumerate() {
            s.apply_local_clifford(i, c)?;
        }
        Ok(s)
    }

    pub fn from_tableau(t: &StabilizerTableau) -> Result<StateVector, DenseError> {
        StateVector::from_graph_state(&t.to_graph_state())
    }

    /// Stabilizer tableau of this state, found by reducing it to `|0…0⟩`
    /// with Clifford gates.
    pub fn to_tableau(&self) -> Result<StabilizerTableau, DenseError> {
        let gates = self.reduction_to_zero()?;
        let mut t = StabilizerTableau::new_zero_state(self.n)?;
        for g in gates.into_iter().rev() {
            t.apply(g.inverse())?;
        }
        Ok(t)
    }

    fn reduction_to_zero(&self) -> Result<Vec<Gate>, DenseError> {
        let tol = 1e-6;
        let mut s = self.clone();
        let mut gates = Vec::new();
        let big = |a: &Complex64| a.norm_sqr() > tol;

        let x0 = s.amps.iter().position(big).ok_or(DenseError::NotStabilizer)?;
        for q in 0..s.n {
            if x0 >> q & 1 == 1 {
                gates.push(Gate::X(q));
                s.apply_gate(Gate::X(q))?;
            }
        }
        // GF(2) basis of the support, in reduced echelon form keyed by leading bit.
        let mut basis: Vec<usize> = Vec::new();
        for (i, a) in s.amps.iter().enumerate() {
            if !big(a) {
                continue;
            }
            let mut v = i;
            for &b in &basis {
                let lead = usize::BITS - 1 - b.leading_zeros();
                if v >> lead & 1 == 1 {
                    v ^= b;
                }
            }
            if v != 0 {
                let lead = usize::BITS - 1 - v.leading_zeros();
                for b in basis.iter_mut() {
                    if *b >> lead & 1 == 1 {
                        *b ^= v;
                    }
                }
                basis.push(v);
            }
        }
        let support = s.amps.iter().filter(|a| big(a)).count();
        if support != 1usize << basis.len() {
            return Err(DenseError::NotStabilizer);
        }
        let pivots: Vec<usize> = basis.iter().map(|b| (usize::BITS - 1 - b.leading_zeros()) as usize).collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            for t in 0..s.n {
                if t != p && b >> t & 1 == 1 {
                    gates.push(Gate::Cx(p, t));
                    s.apply_gate(Gate::Cx(p, t))?;
                }
            }
        }
        let a0 = s.amps[0];
        if !big(&a0) {
            return Err(DenseError::NotStabilizer);
        }
        let ratio = |s: &StateVector, idx: usize| s.amps[idx] / a0;
        let quarter = |r: Complex64| -> Result<u32, DenseError> {
            let k = (r.arg() / std::f64::consts::FRAC_PI_2).round().rem_euclid(4.0) as u32;
            if (r - I.powu(k)).norm() > 1e-6 {
                return Err(DenseError::NotStabilizer);
            }
            Ok(k)
        };
        let mut diag = Vec::new();
        for i in 0..pivots.len() {
            for j in i + 1..pivots.len() {
                let (pi, pj) = (1usize << pivots[i], 1usize << pivots[j]);
                let r = ratio(&s, pi | pj) / (ratio(&s, pi) * ratio(&s, pj));
                match quarter(r)? {
                    0 => {}
                    2 => diag.push(Gate::Cz(pivots[i], pivots[j])),
                    _ => return Err(DenseError::NotStabilizer),
                }
            }
            // i^k relative phase on |1⟩ is removed by (S†)^k.
            let k = quarter(ratio(&s, 1usize << pivots[i]))?;
            for _ in 0..k {
                diag.push(Gate::Sdg(pivots[i]));
            }
        }
        for g in diag {
            gates.push(g);
            s.apply_gate(g)?;
        }
        for &p in &pivots {
            gates.push(Gate::H(p));
            s.apply_gate(Gate::H(p))?;
        }
        if s.amps[0].norm_sqr() < 1.0 - 1e-6 {
            return Err(DenseError::NotStabilizer);
        }
        Ok(gates)
    }
}
