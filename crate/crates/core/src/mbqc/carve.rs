use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{line_pattern, unitary_h, unitary_identity, MbqcError, MeasurementPattern, PatternStep, Unitary};
use crate::graph::GraphState;
use crate::pauli::Basis;

/// Shortest live path through a cluster and the `Z` measurements that cut it
/// out of its surroundings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CarvedWire {
    pub path: Vec<usize>,
    /// Off-path neighbors of path vertices, ascending.
    pub z_prefix: Vec<usize>,
}

impl CarvedWire {
    /// `Z` on the prefix, then teleportation along the path of `g` (the
    /// graph it was carved from). A `−1` on a prefix vertex leaves `Z` on its
    /// path neighbors, absorbed by the `t` sets and the output correction.
    /// Odd-length paths give the identity channel, even-length ones `H`
    /// (see [`CarvedWire::target`]).
    pub fn pattern(&self, g: &GraphState) -> Result<MeasurementPattern, MbqcError> {
        let mut p = line_pattern(&self.path, &vec![0.0; self.path.len().saturating_sub(1)])?;
        let prefix: BTreeSet<usize> = self.z_prefix.iter().copied().collect();
        let cut = |v: usize| -> Result<Vec<usize>, MbqcError> {
            Ok(g.neighbors(v)?.into_iter().filter(|u| prefix.contains(u)).collect())
        };
        for step in &mut p.steps {
            step.t = cut(step.v)?;
        }
        for c in &mut p.corrections {
            let mut z: BTreeSet<usize> = c.z.iter().copied().collect();
            for u in cut(c.v)? {
                if !z.remove(&u) {
                    z.insert(u);
                }
            }
            c.z = z.into_iter().collect();
        }
        let mut steps: Vec<PatternStep> = self.z_prefix.iter().map(|&v| PatternStep::pauli(v, Basis::Z)).collect();
        steps.append(&mut p.steps);
        p.steps = steps;
        Ok(p)
    }

    /// Logical map of [`CarvedWire::pattern`].
    pub fn target(&self) -> Unitary {
        if self.path.len() % 2 == 1 {
            unitary_identity(1)
        } else {
            unitary_h()
        }
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }
}

/// Breadth-first shortest path from `start` to `end` avoiding `forbidden`,
/// neighbors explored in ascending id order so ties go to the lowest ids.
pub fn carve_wire(
    g: &GraphState,
    start: usize,
    end: usize,
    forbidden: &BTreeSet<usize>,
) -> Result<CarvedWire, MbqcError> {
    let (si, ei) = (g.index_of(start)?, g.index_of(end)?);
    for v in [start, end] {
        if forbidden.contains(&v) {
            return Err(MbqcError::EndpointForbidden(v));
        }
    }
    let ids = g.ids();
    let mut parent = vec![usize::MAX; g.len()];
    parent[si] = si;
    let mut queue = VecDeque::from([si]);
    while let Some(i) = queue.pop_front() {
        if i == ei {
            break;
        }
        for u in g.neighbors(ids[i])? {
            let j = g.index_of(u)?;
            if parent[j] == usize::MAX && !forbidden.contains(&u) {
                parent[j] = i;
                queue.push_back(j);
            }
        }
    }
    if parent[ei] == usize::MAX {
        return Err(MbqcError::NoPath { start, end });
    }
    let mut path = vec![ei];
    while *path.last().expect("non-empty") != si {
        path.push(parent[*path.last().expect("non-empty")]);
    }
    path.reverse();
    let path: Vec<usize> = path.into_iter().map(|i| ids[i]).collect();
    let on_path: BTreeSet<usize> = path.iter().copied().collect();
    let mut prefix = BTreeSet::new();
    for &v in &path {
        for u in g.neighbors(v)? {
            if !on_path.contains(&u) {
                prefix.insert(u);
            }
        }
    }
    Ok(CarvedWire { path, z_prefix: prefix.into_iter().collect() })
}
