use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clifford::LocalClifford;
use crate::graph::GraphState;
use crate::pauli::{Gate, Pauli, PauliString};

/// Pending Pauli corrections, one per qubit: the physical state equals
/// `F · |reference⟩`, where the reference run saw `+1` on every random
/// measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl PauliFrame {
    pub fn identity(n: usize) -> Self {
        Self { x: vec![false; n], z: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x[q], self.z[q])
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x[q] = x;
        self.z[q] = z;
    }

    pub fn clear(&mut self, q: usize) {
        self.set(q, Pauli::I);
    }

    /// XOR composition with a single-qubit Pauli.
    pub fn toggle(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x[q] ^= x;
        self.z[q] ^= z;
    }

    /// XOR composition (phases are irrelevant for a frame).
    pub fn compose(&mut self, other: &PauliFrame) {
        assert_eq!(self.len(), other.len(), "frames of different size");
        for q in 0..self.len() {
            self.x[q] ^= other.x[q];
            self.z[q] ^= other.z[q];
        }
    }

    pub fn compose_string(&mut self, p: &PauliString) {
        for (q, l) in p.support() {
            self.toggle(q, l);
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|b| !b)
    }

    /// `F ← G F G†`.
    pub fn propagate(&mut self, g: Gate) {
        match g {
            Gate::H(q) => std::mem::swap(&mut self.x[q], &mut self.z[q]),
            Gate::S(q) | Gate::Sdg(q) => self.z[q] ^= self.x[q],
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) => {}
            Gate::Cz(a, b) => {
                let (xa, xb) = (self.x[a], self.x[b]);
                self.z[a] ^= xb;
                self.z[b] ^= xa;
            }
            Gate::Cx(c, t) => {
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
        }
    }

    /// Whether the frame anticommutes with `p` on qubit `q`.
    pub fn anticommutes_with(&self, q: usize, p: Pauli) -> bool {
        !self.get(q).commutes_with(p)
    }

    pub fn restrict(&self, qubits: &[usize]) -> PauliFrame {
        PauliFrame {
            x: qubits.iter().map(|&q| self.x[q]).collect(),
            z: qubits.iter().map(|&q| self.z[q]).collect(),
        }
    }

    pub fn to_pauli_string(&self) -> PauliString {
        PauliString::from_sparse(self.len(), self.support())
    }

    pub fn from_pauli_string(p: &PauliString) -> Self {
        let mut f = Self::identity(p.num_qubits());
        f.compose_string(p);
        f
    }

    /// Non-identity entries, ascending.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        (0..self.len()).map(|q| (q, self.get(q))).filter(|e| e.1 != Pauli::I).collect()
    }

    /// Applies the frame to a graph state whose vertex `i` is frame entry `i`
    /// (vertex operators become `P · C_v`).
    pub fn apply_to_graph(&self, g: &mut GraphState) {
        assert_eq!(self.len(), g.len(), "frame size must match the graph");
        let ids: Vec<usize> = g.ids().to_vec();
        for (i, p) in self.support() {
            let c = g.vop(ids[i]).expect("vertex exists");
            g.set_vop(ids[i], LocalClifford::pauli(p) * c).expect("vertex exists");
        }
    }

    /// Equivalent frame acting on the graph state `g` (entry `i` on vertex
    /// `i`) whose graph-side part `⊗ C_v† F_v C_v` is Z-only. Frames are
    /// defined up to stabilizers of the state; this representative keeps the
    /// vertex operators of `g` in graph-form shape when applied.
    pub fn canonical_on(&self, g: &GraphState) -> PauliFrame {
        assert_eq!(self.len(), g.len(), "frame size must match the graph");
        let ids = g.ids().to_vec();
        let vops: Vec<LocalClifford> = g.vops().map(|(_, c)| c).collect();
        let mut side = PauliFrame::identity(self.len());
        for (i, p) in self.support() {
            side.set(i, vops[i].conjugate_inverse(p).pauli);
        }
        // X_v Z_{N(v)} stabilizes |G⟩, so an X on v trades for Z on its neighbors.
        for i in 0..side.len() {
            if side.x[i] {
                side.x[i] = false;
                for u in g.neighbors(ids[i]).expect("vertex exists") {
                    let j = g.index_of(u).expect("neighbor exists");
                    side.z[j] ^= true;
                }
            }
        }
        let mut out = PauliFrame::identity(self.len());
        for (i, p) in side.support() {
            out.set(i, vops[i].conjugate(p).pauli);
        }
        out
    }

    /// Frame relating two graph forms of Pauli-equivalent states: same
    /// adjacency, vertex operators differing by a Pauli on the graph side.
    /// Returns `F` with `actual = F · reference`, or `None` if the two are not
    /// related that way.
    pub fn between(reference: &GraphState, actual: &GraphState) -> Option<PauliFrame> {
        if !reference.same_adjacency(actual) {
            return None;
        }
        let mut f = PauliFrame::identity(reference.len());
        for (i, ((_, cr), (_, ca))) in reference.vops().zip(actual.vops()).enumerate() {
            let d = cr.inverse() * ca;
            let p = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
                .into_iter()
                .find(|&p| LocalClifford::pauli(p) == d)?;
            // C_a = C_r · P  ⇒  C_a = (C_r P C_r†) · C_r.
            let img = cr.conjugate(p);
            f.set(i, img.pauli);
        }
        Some(f)
    }
}

impl Serialize for PauliFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<usize, String> = self
            .support()
            .into_iter()
            .map(|(q, p)| (q, p.letter().to_string()))
            .collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let m: BTreeMap<usize, String> = BTreeMap::deserialize(d)?;
        let mut entries = Vec::new();
        for (q, v) in m {
            let p = match v.as_str() {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                "I" => Pauli::I,
                _ => return Err(D::Error::custom(format!("bad Pauli letter {v:?}"))),
            };
            entries.push((q, p));
        }
        let n = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let mut f = PauliFrame::identity(n);
        for (q, p) in entries {
            f.set(q, p);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagation_matches_string_conjugation() {
        let gates = [Gate::H(0), Gate::S(1), Gate::Cz(0, 2), Gate::Cx(2, 1), Gate::Sdg(0)];
        for start in ["XII", "IZI", "YXZ", "ZZX"] {
            let mut p: PauliString = start.parse().unwrap();
            let mut f = PauliFrame::from_pauli_string(&p);
            for g in gates {
                p.conjugate(g);
                f.propagate(g);
            }
            assert_eq!(f, PauliFrame::from_pauli_string(&p));
        }
    }

    #[test]
    fn composition_is_xor() {
        let mut a = PauliFrame::identity(2);
        a.toggle(0, Pauli::X);
        let mut b = PauliFrame::identity(2);
        b.toggle(0, Pauli::Z);
        b.toggle(1, Pauli::Y);
        a.compose(&b);
        assert_eq!(a.support(), vec![(0, Pauli::Y), (1, Pauli::Y)]);
        a.compose(&b);
        assert_eq!(a.support(), vec![(0, Pauli::X)]);
    }

    #[test]
    fn frame_between_graph_forms() {
        let mut r = GraphState::from_edges(2, &[(0, 1)]).unwrap();
        r.set_vop(0, LocalClifford::h()).unwrap();
        let mut a = r.clone();
        a.set_vop(0, LocalClifford::h() * LocalClifford::pauli(Pauli::Z)).unwrap();
        let f = PauliFrame::between(&r, &a).unwrap();
        assert_eq!(f.support(), vec![(0, Pauli::X)]);
        let mut c = r.clone();
        f.apply_to_graph(&mut c);
        assert_eq!(c, a);
    }

    #[test]
    fn json_is_sparse() {
        let mut f = PauliFrame::identity(5);
        f.set(3, Pauli::Z);
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"3":"Z"}"#);
    }
}
