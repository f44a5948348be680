use rand::Rng;

use super::packed::{PackedRows, RowMask};
use super::{Basis, Gate, Outcome, Pauli, PauliString, StabilizerError};

/// Largest register for which debug builds re-check the symplectic
/// invariants after every mutation.
const DEBUG_CHECK_LIMIT: usize = 16;

/// Stabilizer state on `n` qubits: rows `0..n` are destabilizers, rows
/// `n..2n` stabilizers. Rows carry a ±1 sign only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    rows: PackedRows,
}

/// What a single-qubit measurement did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementDetail {
    pub outcome: Outcome,
    pub deterministic: bool,
    /// For random outcomes: a pre-measurement stabilizer anticommuting with
    /// the measured Pauli. Conjugating the post-measurement state by it swaps
    /// the two outcome branches.
    pub flip: Option<PauliString>,
    /// For random outcomes: stabilizer index now holding `±P_q`.
    pub row: Option<usize>,
}

fn to_z(basis: Basis) -> &'static [fn(usize) -> Gate] {
    match basis {
        Basis::X => &[Gate::H],
        Basis::Y => &[Gate::Sdg, Gate::H],
        Basis::Z => &[],
    }
}

fn from_z(basis: Basis) -> &'static [fn(usize) -> Gate] {
    match basis {
        Basis::X => &[Gate::H],
        Basis::Y => &[Gate::H, Gate::S],
        Basis::Z => &[],
    }
}

impl StabilizerTableau {
    /// `|+⟩^⊗n`: stabilizers `X_i`, destabilizers `Z_i`.
    pub fn new_plus_state(n: usize) -> Result<Self, StabilizerError> {
        let mut t = Self::new_zero_state(n)?;
        for q in 0..n {
            t.rows.apply(Gate::H(q));
        }
        Ok(t)
    }

    /// `|0⟩^⊗n`: stabilizers `Z_i`, destabilizers `X_i`.
    pub fn new_zero_state(n: usize) -> Result<Self, StabilizerError> {
        if n == 0 {
            return Err(StabilizerError::InvalidSize);
        }
        let mut rows = PackedRows::zeros(2 * n, n);
        for q in 0..n {
            rows.set(q, q, true, false);
            rows.set(n + q, q, false, true);
        }
        Ok(Self { n, rows })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        self.rows.row_string(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        self.rows.row_string(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|i| self.destabilizer(i)).collect()
    }

    pub(crate) fn packed(&self) -> &PackedRows {
        &self.rows
    }

    fn check_qubit(&self, q: usize) -> Result<(), StabilizerError> {
        if q >= self.n {
            return Err(StabilizerError::QubitOutOfRange { qubit: q, n: self.n });
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: Gate) -> Result<(), StabilizerError> {
        gate.check(self.n)?;
        self.rows.apply(gate);
        self.debug_check();
        Ok(())
    }

    pub fn apply_all(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<(), StabilizerError> {
        for g in gates {
            gate_check_apply(self, g)?;
        }
        self.debug_check();
        Ok(())
    }

    /// CZ on every listed pair, in one pass over the rows.
    pub fn apply_cz_layer(&mut self, pairs: &[(usize, usize)]) -> Result<(), StabilizerError> {
        for &(a, b) in pairs {
            Gate::Cz(a, b).check(self.n)?;
        }
        self.rows.apply_cz_layer(pairs);
        self.debug_check();
        Ok(())
    }

    fn stabilizer_mask(&self) -> RowMask {
        self.rows.range_mask(self.n, 2 * self.n)
    }

    /// Stabilizers `i + n` for the destabilizers `i` set in `mask`.
    fn partner_stabilizers(&self, mask: &RowMask) -> RowMask {
        let mut out = self.rows.empty_mask();
        for i in iter_bits(mask).take_while(|&r| r < self.n) {
            let r = i + self.n;
            out[r / 64] |= 1 << (r % 64);
        }
        out
    }

    fn first_stabilizer_in(&self, mask: &RowMask) -> Option<usize> {
        let stab = self.stabilizer_mask();
        let both: RowMask = mask.iter().zip(&stab).map(|(a, b)| a & b).collect();
        let first = iter_bits(&both).next();
        first
    }

    /// Measures `basis` on qubit `q`; random outcomes are fair coins drawn from `rng`.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementDetail, StabilizerError> {
        self.measure_with(q, basis, || Outcome::from_draw(rng.random::<f64>(), 0.5))
    }

    /// Measurement post-selected on `outcome`; a deterministic mismatch is an error.
    pub fn measure_forced(&mut self, q: usize, basis: Basis, outcome: Outcome) -> Result<MeasurementDetail, StabilizerError> {
        // A deterministic measurement leaves the tableau untouched.
        let r = self.measure_with(q, basis, || outcome)?;
        if r.outcome != outcome {
            return Err(StabilizerError::ImpossibleOutcome);
        }
        Ok(r)
    }

    /// Outcome that measuring `basis` on `q` would give, if forced.
    pub fn peek_deterministic(&self, q: usize, basis: Basis) -> Result<Option<Outcome>, StabilizerError> {
        self.check_qubit(q)?;
        let p = PauliString::single(self.n, q, basis.pauli());
        Ok(match self.expectation(&p)? {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        })
    }

    /// Core measurement; `choose` supplies the outcome of a random measurement.
    pub fn measure_with(
        &mut self,
        q: usize,
        basis: Basis,
        choose: impl FnOnce() -> Outcome,
    ) -> Result<MeasurementDetail, StabilizerError> {
        self.check_qubit(q)?;
        for g in to_z(basis) {
            self.rows.apply(g(q));
        }
        let result = self.measure_z(q, choose);
        for g in from_z(basis) {
            self.rows.apply(g(q));
        }
        let mut detail = result?;
        if let Some(flip) = detail.flip.as_mut() {
            for g in from_z(basis) {
                flip.conjugate(g(q));
            }
        }
        self.debug_check();
        Ok(detail)
    }

    fn measure_z(
        &mut self,
        q: usize,
        choose: impl FnOnce() -> Outcome,
    ) -> Result<MeasurementDetail, StabilizerError> {
        let n = self.n;
        let xmask = self.rows.column_mask(q, true, false);
        match self.first_stabilizer_in(&xmask) {
            Some(p) => {
                let outcome = choose();
                let flip = self.rows.row_string(p);
                self.rows.multiply_into(&xmask, p);
                self.rows.copy_row(p, p - n);
                let mut zq = PauliString::single(n, q, Pauli::Z);
                if outcome == Outcome::Minus {
                    zq.negate();
                }
                self.rows.set_row(p, &zq);
                Ok(MeasurementDetail {
                    outcome,
                    deterministic: false,
                    flip: Some(flip),
                    row: Some(p - n),
                })
            }
            None => {
                let prod = self.rows.product_of(&self.partner_stabilizers(&xmask));
                debug_assert_eq!(prod.weight(), 1);
                Ok(MeasurementDetail {
                    outcome: Outcome::from_bit(prod.is_negative()),
                    deterministic: true,
                    flip: None,
                    row: None,
                })
            }
        }
    }

    /// `+1`/`-1` if `±p` is a stabilizer, `0` if `p` anticommutes with one.
    pub fn expectation(&self, p: &PauliString) -> Result<i8, StabilizerError> {
        if p.num_qubits() != self.n {
            return Err(StabilizerError::SizeMismatch { expected: self.n, found: p.num_qubits() });
        }
        if !p.is_hermitian() {
            return Err(StabilizerError::NonHermitian);
        }
        let anti = self.rows.anticommuting_with(p);
        if self.first_stabilizer_in(&anti).is_some() {
            return Ok(0);
        }
        let prod = self.rows.product_of(&self.partner_stabilizers(&anti));
        debug_assert_eq!(prod.x_words(), p.x_words());
        debug_assert_eq!(prod.z_words(), p.z_words());
        Ok(if prod.phase() == p.phase() { 1 } else { -1 })
    }

    /// Rewrites the tableau so that qubit `q` is carried by a single
    /// stabilizer `±P_q` (with destabilizer the conjugate letter) and no other
    /// row acts on it. Fails if `P_q` is not, up to sign, a stabilizer.
    pub fn isolate_qubit(&mut self, q: usize, basis: Basis) -> Result<Outcome, StabilizerError> {
        self.check_qubit(q)?;
        for g in to_z(basis) {
            self.rows.apply(g(q));
        }
        let r = self.isolate_z(q);
        for g in from_z(basis) {
            self.rows.apply(g(q));
        }
        self.debug_check();
        r
    }

    fn isolate_z(&mut self, q: usize) -> Result<Outcome, StabilizerError> {
        let n = self.n;
        let xmask = self.rows.column_mask(q, true, false);
        if self.first_stabilizer_in(&xmask).is_some() {
            return Err(StabilizerError::Entangled(q));
        }
        let destabs: Vec<usize> = iter_bits(&xmask).take_while(|&r| r < n).collect();
        let k = destabs[0];
        let zq = self.rows.product_of(&self.partner_stabilizers(&xmask));
        debug_assert_eq!(zq.weight(), 1);
        self.rows.set_row(n + k, &zq);
        if destabs.len() > 1 {
            let mut others = self.rows.empty_mask();
            for &j in &destabs[1..] {
                others[j / 64] |= 1 << (j % 64);
            }
            self.rows.multiply_into(&others, k);
        }
        let mut zmask = self.rows.column_mask(q, false, true);
        zmask[k / 64] &= !(1 << (k % 64));
        self.rows.multiply_into(&zmask, n + k);
        self.rows.set_row(k, &PauliString::single(n, q, Pauli::X));
        Ok(Outcome::from_bit(zq.is_negative()))
    }

    /// Equality as stabilizer groups, signs included.
    pub fn same_state(&self, other: &StabilizerTableau) -> bool {
        self.n == other.n
            && (0..self.n).all(|i| matches!(self.expectation(&other.stabilizer(i)), Ok(1)))
    }

    /// One stabilizer per line, e.g. `+XZI`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            s.push_str(&self.stabilizer(i).to_string());
            s.push('\n');
        }
        s
    }

    /// Stabilizers commute pairwise and destabilizer `i` anticommutes exactly
    /// with stabilizer `i`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let stabs = self.stabilizers();
        let destabs = self.destabilizers();
        for (i, a) in stabs.iter().enumerate() {
            if a.is_identity() {
                return Err(format!("stabilizer {i} is the identity"));
            }
            for (j, b) in stabs.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(format!("stabilizers {i} and {j} anticommute"));
                }
            }
            for (j, d) in destabs.iter().enumerate() {
                if d.commutes_with(a) == (i == j) {
                    return Err(format!("destabilizer {j} vs stabilizer {i} has the wrong commutation"));
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn debug_check(&self) {
        if cfg!(debug_assertions) && self.n <= DEBUG_CHECK_LIMIT {
            if let Err(e) = self.check_invariants() {
                panic!("tableau invariant broken: {e}\n{}", self.dump());
            }
        }
    }
}

fn gate_check_apply(t: &mut StabilizerTableau, g: Gate) -> Result<(), StabilizerError> {
    g.check(t.n)?;
    t.rows.apply(g);
    Ok(())
}

pub(crate) fn iter_bits(mask: &[u64]) -> impl Iterator<Item = usize> + '_ {
    mask.iter().enumerate().flat_map(|(w, &word)| {
        let mut m = word;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(w * 64 + b)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn plus_state_rows() {
        let t = StabilizerTableau::new_plus_state(3).unwrap();
        assert_eq!(t.dump(), "+XII\n+IXI\n+IIX\n");
        assert_eq!(t.destabilizer(1), ps("IZI"));
        assert_eq!(StabilizerTableau::new_plus_state(0), Err(StabilizerError::InvalidSize));
    }

    #[test]
    fn cz_pair_is_graph_state() {
        let mut t = StabilizerTableau::new_plus_state(2).unwrap();
        t.apply(Gate::Cz(0, 1)).unwrap();
        assert_eq!(t.dump(), "+XZ\n+ZX\n");
        assert_eq!(t.expectation(&ps("XZ")).unwrap(), 1);
        assert_eq!(t.expectation(&ps("YY")).unwrap(), 1);
        assert_eq!(t.apply(Gate::Cz(1, 1)), Err(StabilizerError::DuplicateTargets(1)));
        assert_eq!(t.apply(Gate::H(2)), Err(StabilizerError::QubitOutOfRange { qubit: 2, n: 2 }));
    }

    #[test]
    fn expectation_cases() {
        let t = StabilizerTableau::new_plus_state(2).unwrap();
        assert_eq!(t.expectation(&ps("ZI")).unwrap(), 0);
        assert_eq!(t.expectation(&ps("-XX")).unwrap(), -1);
        assert_eq!(t.expectation(&ps("+iXX")), Err(StabilizerError::NonHermitian));
        assert!(matches!(t.expectation(&ps("X")), Err(StabilizerError::SizeMismatch { .. })));
    }

    #[test]
    fn x_on_plus_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = StabilizerTableau::new_plus_state(1).unwrap();
        let r = t.measure(0, Basis::X, &mut rng).unwrap();
        assert!(r.deterministic);
        assert_eq!(r.outcome, Outcome::Plus);
    }

    #[test]
    fn z_on_plus_post_state() {
        let mut t = StabilizerTableau::new_plus_state(2).unwrap();
        let r = t.measure_forced(0, Basis::Z, Outcome::Minus).unwrap();
        assert!(!r.deterministic);
        assert_eq!(r.flip, Some(ps("XI")));
        assert_eq!(t.expectation(&ps("ZI")).unwrap(), -1);
        assert_eq!(t.measure_forced(0, Basis::Z, Outcome::Plus), Err(StabilizerError::ImpossibleOutcome));
        assert_eq!(t.expectation(&ps("ZI")).unwrap(), -1);
    }

    #[test]
    fn y_measurement_sign() {
        let mut t = StabilizerTableau::new_plus_state(1).unwrap();
        t.apply(Gate::S(0)).unwrap();
        // S|+⟩ = |+i⟩, the +1 eigenstate of Y.
        let r = t.measure_forced(0, Basis::Y, Outcome::Plus).unwrap();
        assert!(r.deterministic);
        assert_eq!(t.dump(), "+Y\n");
    }

    #[test]
    fn isolation_after_measurement() {
        let mut t = StabilizerTableau::new_plus_state(4).unwrap();
        for (a, b) in [(0, 1), (0, 2), (0, 3)] {
            t.apply(Gate::Cz(a, b)).unwrap();
        }
        t.measure_forced(0, Basis::Y, Outcome::Minus).unwrap();
        assert_eq!(t.isolate_qubit(0, Basis::Y).unwrap(), Outcome::Minus);
        for i in 0..4 {
            let s = t.stabilizer(i);
            let on0 = s.get(0) != Pauli::I;
            assert!(!on0 || s.weight() == 1, "row {s} straddles qubit 0");
        }
        assert_eq!(t.isolate_qubit(1, Basis::Z), Err(StabilizerError::Entangled(1)));
    }

    #[test]
    fn gate_involutions() {
        let mut t = StabilizerTableau::new_plus_state(3).unwrap();
        t.apply_all([Gate::Cz(0, 1), Gate::Cx(1, 2), Gate::S(2)]).unwrap();
        let orig = t.clone();
        t.apply_all([Gate::H(1), Gate::H(1)]).unwrap();
        assert_eq!(t, orig);
        t.apply_all([Gate::S(0); 4]).unwrap();
        assert_eq!(t, orig);
    }
}
