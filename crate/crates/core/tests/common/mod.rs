//! Random cases and dense-oracle checks shared by the property suites and
//! the acceptance target.
#![allow(dead_code)]

use proptest::prelude::*;
use sicluster::clifford::LocalClifford;
use sicluster::graph::{GraphError, GraphState};
use sicluster::pauli::{Basis, Gate, Outcome, StabilizerTableau};
use sicluster::statevector::{DenseError, StateVector};

pub const EXACT: f64 = 1e-12;

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    (0u8..8, 0..n, 0..n).prop_filter_map("distinct two-qubit targets", move |(k, a, b)| {
        Some(match k {
            0 => Gate::H(a),
            1 => Gate::S(a),
            2 => Gate::Sdg(a),
            3 => Gate::X(a),
            4 => Gate::Y(a),
            5 => Gate::Z(a),
            6 if a != b => Gate::Cz(a, b),
            7 if a != b => Gate::Cx(a, b),
            _ => return None,
        })
    })
}

/// Up to 10 qubits, up to 60 gates.
pub fn circuit_strategy() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (2usize..=10).prop_flat_map(|n| (Just(n), proptest::collection::vec(gate_strategy(n), 0..60)))
}

/// Random graph on `4..=max` vertices with random vertex operators.
pub fn graph_strategy(max: usize) -> impl Strategy<Value = GraphState> {
    (4usize..=max)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
                proptest::collection::vec(0u8..24, n),
            )
        })
        .prop_map(|(n, bits, vops)| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            let mut g = GraphState::from_edges(n, &edges).unwrap();
            for (v, c) in vops.into_iter().enumerate() {
                g.set_vop(v, LocalClifford::from_index(c).unwrap()).unwrap();
            }
            g
        })
}

fn same_up_to_phase(a: &StateVector, b: &StateVector) -> bool {
    (1.0 - a.fidelity(b)).abs() < EXACT
}

/// Tableau and dense simulation of `gates` on `|0…0⟩` give the same state,
/// and every tableau stabilizer has dense expectation exactly `+1`.
pub fn check_circuit(n: usize, gates: &[Gate]) -> Result<(), String> {
    let mut t = StabilizerTableau::new_zero_state(n).map_err(|e| e.to_string())?;
    let mut s = StateVector::zero(n).map_err(|e| e.to_string())?;
    for &g in gates {
        t.apply(g).map_err(|e| e.to_string())?;
        s.apply_gate(g).map_err(|e| e.to_string())?;
    }
    t.check_invariants()?;
    for p in t.stabilizers() {
        let e = s.expectation(&p).map_err(|e| e.to_string())?;
        if (e - 1.0).abs() > EXACT {
            return Err(format!("stabilizer {p:?} has dense expectation {e}"));
        }
    }
    let from_t = StateVector::from_tableau(&t).map_err(|e| e.to_string())?;
    if !same_up_to_phase(&from_t, &s) {
        return Err(format!("tableau state differs from dense state (fidelity {})", from_t.fidelity(&s)));
    }
    Ok(())
}

/// A sequence of local complementations leaves the represented state unchanged.
pub fn check_lc(g: &GraphState, sequence: &[usize]) -> Result<(), String> {
    let before = StateVector::from_graph_state(g).map_err(|e| e.to_string())?;
    let mut h = g.clone();
    for &k in sequence {
        let v = g.ids()[k % g.len()];
        h.local_complement(v).map_err(|e| e.to_string())?;
        let after = StateVector::from_graph_state(&h).map_err(|e| e.to_string())?;
        if !same_up_to_phase(&before, &after) {
            return Err(format!("state changed after LC at {v}"));
        }
    }
    Ok(())
}

/// Graph-level Pauli measurement of `v` agrees with projecting the dense
/// state, for both outcomes (impossible outcomes must be rejected by both).
pub fn check_measurement(g: &GraphState, v: usize, basis: Basis) -> Result<(), String> {
    let dense = StateVector::from_graph_state(g).map_err(|e| e.to_string())?;
    let i = g.index_of(v).map_err(|e| e.to_string())?;
    let keep: Vec<usize> = (0..g.len()).filter(|&q| q != i).collect();
    for outcome in [Outcome::Plus, Outcome::Minus] {
        let mut h = g.clone();
        let graph_side = h.measure_pauli(v, basis, outcome);
        let mut s = dense.clone();
        let dense_side = s.measure_forced(i, basis, outcome);
        match (graph_side, dense_side) {
            (Ok(m), Ok(d)) => {
                if m.deterministic != d.deterministic {
                    return Err(format!("determinism differs for {basis:?} on {v}"));
                }
                let want = s.restrict(&keep).map_err(|e| e.to_string())?;
                let got = StateVector::from_graph_state(&h).map_err(|e| e.to_string())?;
                if !same_up_to_phase(&want, &got) {
                    return Err(format!("post-measurement state differs for {basis:?}={outcome:?} on {v}"));
                }
            }
            (Err(GraphError::ImpossibleOutcome), Err(DenseError::ImpossibleOutcome)) => {}
            (a, b) => return Err(format!("{basis:?}={outcome:?} on {v}: graph {:?}, dense {:?}", a.err(), b.err())),
        }
    }
    Ok(())
}
