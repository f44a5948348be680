use serde::{Deserialize, Serialize};

use super::{GraphError, GraphState};
use crate::clifford::LocalClifford;
use crate::pauli::{Basis, Outcome, Pauli};

/// Ordered transcript of single-qubit measurement results.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcomeRecord {
    entries: Vec<(usize, Basis, Outcome)>,
}

impl MeasurementOutcomeRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry; a vertex may appear only once.
    pub fn push(&mut self, vertex: usize, basis: Basis, outcome: Outcome) -> Result<(), GraphError> {
        if self.get(vertex).is_some() {
            return Err(GraphError::AlreadyMeasured(vertex));
        }
        self.entries.push((vertex, basis, outcome));
        Ok(())
    }

    pub fn get(&self, vertex: usize) -> Option<(Basis, Outcome)> {
        self.entries.iter().find(|e| e.0 == vertex).map(|e| (e.1, e.2))
    }

    pub fn entries(&self) -> &[(usize, Basis, Outcome)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Result of a graph-level Pauli measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliMeasurement {
    pub vertex: usize,
    pub basis: Basis,
    pub outcome: Outcome,
    pub deterministic: bool,
    /// Local Cliffords `c` folded into surviving vertex operators (`C_u ← C_u · c`).
    pub corrections: Vec<(usize, LocalClifford)>,
}

impl GraphState {
    /// `Some(outcome)` if measuring `basis` on `v` has a forced result.
    pub fn deterministic_outcome(&self, v: usize, basis: Basis) -> Result<Option<Outcome>, GraphError> {
        let i = self.index_of(v)?;
        let q = self.vops[i].conjugate_inverse(basis.pauli());
        let isolated = self.adj[i].iter().all(|&w| w == 0);
        Ok((isolated && q.pauli == Pauli::X).then(|| Outcome::Plus.times(q.negative)))
    }

    /// Projects vertex `v` onto the `outcome` eigenspace of the physical
    /// Pauli `basis`, deleting `v`. The remaining graph and vertex operators
    /// represent the exact post-measurement state.
    pub fn measure_pauli(&mut self, v: usize, basis: Basis, outcome: Outcome) -> Result<PauliMeasurement, GraphError> {
        let before: Vec<(usize, LocalClifford)> = self.vops().collect();
        let deterministic = self.deterministic_outcome(v, basis)?;
        if let Some(forced) = deterministic {
            if forced != outcome {
                return Err(GraphError::ImpossibleOutcome);
            }
            self.remove_vertex(v)?;
            return Ok(PauliMeasurement {
                vertex: v,
                basis,
                outcome,
                deterministic: true,
                corrections: Vec::new(),
            });
        }

        let mut special = None;
        let negative = loop {
            let i = self.index_of(v)?;
            let q = self.vops[i].conjugate_inverse(basis.pauli());
            match q.pauli {
                Pauli::Z => break q.negative,
                Pauli::Y => self.local_complement_index(i),
                Pauli::X => {
                    // Non-isolated here; LC at the special neighbor maps X_v to ±Y_v.
                    debug_assert!(special.is_none());
                    let b0 = self.neighbor_indices(i)[0];
                    special = Some(self.ids[b0]);
                    self.local_complement_index(b0);
                }
                Pauli::I => unreachable!("Clifford image of a Pauli is never identity"),
            }
        };

        let i = self.index_of(v)?;
        if outcome.times(negative) == Outcome::Minus {
            for j in self.neighbor_indices(i) {
                self.push_vop(j, LocalClifford::pauli(Pauli::Z));
            }
        }
        self.remove_index(i);
        if let Some(b0) = special {
            self.local_complement(b0)?;
        }

        let corrections = before
            .into_iter()
            .filter(|&(id, _)| id != v)
            .filter_map(|(id, old)| {
                let c = old.inverse() * self.vop(id).ok()?;
                (!c.is_identity()).then_some((id, c))
            })
            .collect();
        Ok(PauliMeasurement {
            vertex: v,
            basis,
            outcome,
            deterministic: false,
            corrections,
        })
    }

    /// Measures several vertices in order, appending to `record`.
    pub fn measure_many(
        &mut self,
        steps: &[(usize, Basis, Outcome)],
        record: &mut MeasurementOutcomeRecord,
    ) -> Result<Vec<PauliMeasurement>, GraphError> {
        steps
            .iter()
            .map(|&(v, b, m)| {
                let r = self.measure_pauli(v, b, m)?;
                record.push(v, b, m)?;
                Ok(r)
            })
            .collect()
    }
}
