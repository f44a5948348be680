//! Conversion between stabilizer tableaux and graph states with vertex operators.
//!
//! Any stabilizer state equals `⊗_v C_v |G⟩` for some graph `G`. The
//! reduction Gauss-Jordan eliminates the X block, applies `H` to the columns
//! without an X pivot (which makes the X block invertible), eliminates
//! again, then clears `Y` diagonal entries with `S†` and negative signs with
//! `Z`. The stabilizer rows are then `X_v Z_{N(v)}`.

use super::packed::{PackedRows, RowMask};
use super::tableau::iter_bits;
use super::{Gate, StabilizerError, StabilizerTableau};
use crate::clifford::LocalClifford;
use crate::graph::GraphState;

/// Gauss-Jordan on the X block; returns the pivot row of each column.
fn eliminate_x(w: &mut PackedRows) -> Vec<Option<usize>> {
    let m = w.qubits();
    let mut used = w.empty_mask();
    let mut pivot = vec![None; m];
    for (c, slot) in pivot.iter_mut().enumerate() {
        let col = w.column_mask(c, true, false);
        let free: RowMask = col.iter().zip(&used).map(|(a, u)| a & !u).collect();
        let Some(r) = iter_bits(&free).next() else { continue };
        used[r / 64] |= 1 << (r % 64);
        *slot = Some(r);
        let mut others = col;
        others[r / 64] &= !(1 << (r % 64));
        if others.iter().any(|&x| x != 0) {
            w.multiply_into(&others, r);
        }
    }
    pivot
}

/// Graph form of `m` commuting, independent stabilizer rows on `m` qubits.
fn graph_form(mut w: PackedRows, ids: Vec<usize>) -> GraphState {
    let m = w.qubits();
    debug_assert_eq!(w.rows(), m);
    let mut hadamard = vec![false; m];
    let mut sdg = vec![false; m];
    let mut zflip = vec![false; m];

    let pivot = eliminate_x(&mut w);
    if pivot.iter().any(Option::is_none) {
        for (c, p) in pivot.iter().enumerate() {
            if p.is_none() {
                w.apply(Gate::H(c));
                hadamard[c] = true;
            }
        }
    }
    let pivot: Vec<usize> = eliminate_x(&mut w)
        .into_iter()
        .map(|p| p.expect("X block has full rank after the Hadamard layer"))
        .collect();

    for (c, &r) in pivot.iter().enumerate() {
        if w.get(r, c).1 {
            w.apply(Gate::Sdg(c));
            sdg[c] = true;
        }
        if w.sign(r) {
            w.apply(Gate::Z(c));
            zflip[c] = true;
        }
    }

    let mut col_of_row = vec![usize::MAX; m];
    for (c, &r) in pivot.iter().enumerate() {
        col_of_row[r] = c;
    }
    let mut directed = Vec::new();
    for u in 0..m {
        for r in iter_bits(&w.column_mask(u, false, true)) {
            let c = col_of_row[r];
            debug_assert_ne!(c, u);
            directed.push((c.min(u), c.max(u), c < u));
        }
    }
    directed.sort_unstable();
    let mut g = GraphState::with_ids(ids).expect("distinct qubit ids");
    for pair in directed.chunks(2) {
        assert!(
            pair.len() == 2 && pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 && pair[0].2 != pair[1].2,
            "graph form produced an asymmetric adjacency"
        );
        g.toggle_edge_unchecked(pair[0].0, pair[0].1);
    }
    let h = LocalClifford::h();
    let s = LocalClifford::s();
    let z = LocalClifford::pauli(super::Pauli::Z);
    let id = LocalClifford::IDENTITY;
    for c in 0..m {
        let vop = (if hadamard[c] { h } else { id }) * (if sdg[c] { s } else { id }) * (if zflip[c] { z } else { id });
        g.push_vop(c, vop);
    }
    g
}

impl StabilizerTableau {
    /// Graph state with vertex operators equal to this state; vertex `v` is qubit `v`.
    pub fn to_graph_state(&self) -> GraphState {
        let all: Vec<usize> = (0..self.num_qubits()).collect();
        self.reduced_graph_state(&all).expect("whole register is always separable from nothing")
    }

    /// Graph form of the state on `keep` (vertex ids = qubit indices), which
    /// must be unentangled from the remaining qubits.
    pub fn reduced_graph_state(&self, keep: &[usize]) -> Result<GraphState, StabilizerError> {
        let n = self.num_qubits();
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&q) = keep.iter().find(|&&q| q >= n) {
            return Err(StabilizerError::QubitOutOfRange { qubit: q, n });
        }
        let rows = self.packed();
        let m = keep.len();
        let mut in_keep = vec![false; n];
        for &q in &keep {
            in_keep[q] = true;
        }

        let stab = rows.range_mask(n, 2 * n);
        let mut kept = rows.empty_mask();
        for b in 0..rows.slabs() {
            if stab[b] == 0 {
                continue;
            }
            let (mut tk, mut tc) = (0u64, 0u64);
            for q in 0..n {
                let w = rows.x_word(b, q) | rows.z_word(b, q);
                if in_keep[q] {
                    tk |= w;
                } else {
                    tc |= w;
                }
            }
            let straddle = tk & tc & stab[b];
            if straddle != 0 {
                let r = b * 64 + straddle.trailing_zeros() as usize;
                let q = rows
                    .row_support(r)
                    .into_iter()
                    .map(|e| e.0)
                    .find(|&q| !in_keep[q])
                    .expect("straddling row touches the complement");
                return Err(StabilizerError::Entangled(q));
            }
            kept[b] = tk & stab[b];
        }
        let kept_rows: Vec<usize> = iter_bits(&kept).collect();
        if kept_rows.len() != m {
            let q = (0..n).find(|&q| !in_keep[q]).unwrap_or(0);
            return Err(StabilizerError::Entangled(q));
        }
        if m == 0 {
            return Ok(GraphState::new(0));
        }

        let mut dest = vec![usize::MAX; 2 * n];
        for (d, &r) in kept_rows.iter().enumerate() {
            dest[r] = d;
        }
        let mut w = PackedRows::zeros(m, m);
        for (j, &q) in keep.iter().enumerate() {
            for b in 0..rows.slabs() {
                if kept[b] == 0 {
                    continue;
                }
                let xw = rows.x_word(b, q) & kept[b];
                let zw = rows.z_word(b, q) & kept[b];
                for r in iter_bits(&[xw | zw]) {
                    let src = b * 64 + r;
                    let d = dest[src];
                    let bit = 1u64 << (d % 64);
                    let x = if (xw >> r) & 1 == 1 { bit } else { 0 };
                    let z = if (zw >> r) & 1 == 1 { bit } else { 0 };
                    w.or_words(d / 64, j, x, z);
                }
            }
        }
        for (d, &r) in kept_rows.iter().enumerate() {
            w.set_sign(d, rows.sign(r));
        }
        Ok(graph_form(w, keep))
    }

    /// Tableau of `⊗_v C_v |G⟩`, qubit `i` being the `i`-th smallest vertex id.
    pub fn from_graph_state(g: &GraphState) -> Result<StabilizerTableau, StabilizerError> {
        let mut t = StabilizerTableau::new_plus_state(g.len())?;
        let pairs: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .map(|(u, v)| (g.index_of(u).expect("edge endpoint"), g.index_of(v).expect("edge endpoint")))
            .collect();
        t.apply_cz_layer(&pairs)?;
        for (i, (_, c)) in g.vops().enumerate() {
            t.apply_all(c.gates(i))?;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Basis, Outcome};

    #[test]
    fn pair_and_zero_state() {
        let mut t = StabilizerTableau::new_plus_state(2).unwrap();
        t.apply(Gate::Cz(0, 1)).unwrap();
        let g = t.to_graph_state();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert!(g.vops().all(|(_, c)| c.is_identity()));

        let z = StabilizerTableau::new_zero_state(1).unwrap();
        let g = z.to_graph_state();
        assert!(g.edges().is_empty());
        assert_eq!(g.vop(0).unwrap(), LocalClifford::h());
    }

    #[test]
    fn round_trip_small_circuit() {
        let mut t = StabilizerTableau::new_zero_state(4).unwrap();
        t.apply_all([
            Gate::H(0),
            Gate::Cx(0, 1),
            Gate::S(1),
            Gate::H(2),
            Gate::Cz(2, 3),
            Gate::Cx(1, 3),
            Gate::Y(0),
            Gate::Sdg(3),
        ])
        .unwrap();
        let back = StabilizerTableau::from_graph_state(&t.to_graph_state()).unwrap();
        assert!(back.same_state(&t));
    }

    #[test]
    fn reduced_after_isolation() {
        let mut t = StabilizerTableau::new_plus_state(4).unwrap();
        t.apply_cz_layer(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(matches!(t.reduced_graph_state(&[1, 2, 3]), Err(StabilizerError::Entangled(0))));
        t.measure_forced(0, Basis::Y, Outcome::Plus).unwrap();
        t.isolate_qubit(0, Basis::Y).unwrap();
        let g = t.reduced_graph_state(&[1, 2, 3]).unwrap();
        assert_eq!(g.ids(), &[1, 2, 3]);
        assert_eq!(g.edges(), vec![(1, 2), (1, 3), (2, 3)]);
    }
}
