//! Graph states with local-Clifford vertex operators.
//!
//! A [`GraphState`] stands for `⊗_v C_v · ∏_{(u,v)∈E} CZ_{uv} |+⟩^⊗n`, where the
//! `C_v` are single-qubit Cliffords. Local complementation and the three
//! Pauli-measurement rules rewrite the graph while keeping that represented
//! state exact, so protocol outputs can be read as topologies.

mod export;
mod lc;
mod measure;

pub use export::{ExportFormat, GraphDocument, GraphVertexDoc};
pub use lc::{equal_up_to_local_cliffords, LcEquivalence, LC_SEARCH_BUDGET, LC_VERTEX_LIMIT};
pub use measure::{MeasurementOutcomeRecord, PauliMeasurement};

use std::collections::VecDeque;

use thiserror::Error;

use crate::clifford::LocalClifford;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("self-loop requested on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} carries a non-identity vertex operator; CZ does not commute past it")]
    NonIdentityVop(usize),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(usize),
    #[error("requested outcome has zero probability")]
    ImpossibleOutcome,
    #[error("vertex {0} was already measured")]
    AlreadyMeasured(usize),
    #[error("graphs have different vertex sets")]
    VertexSetMismatch,
    #[error("local-Clifford search supports at most {max} vertices, got {n}")]
    TooManyVertices { n: usize, max: usize },
    #[error("local-Clifford orbit search exceeded {0} graphs without a decision")]
    SearchBudgetExceeded(usize),
    #[error("unknown export format {0:?}")]
    UnknownFormat(String),
    #[error("invalid graph document: {0}")]
    InvalidDocument(String),
}

/// Graph plus per-vertex local Clifford.
///
/// Vertices carry stable ids, kept sorted; dense adjacency rows are indexed
/// by position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphState {
    ids: Vec<usize>,
    adj: Vec<Vec<u64>>,
    vops: Vec<LocalClifford>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl GraphState {
    /// Edgeless graph on vertices `0..n`.
    pub fn new(n: usize) -> Self {
        Self::with_ids((0..n).collect()).expect("distinct ids")
    }

    /// Edgeless graph on the given ids (sorted internally).
    pub fn with_ids(mut ids: Vec<usize>) -> Result<Self, GraphError> {
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(w[0]));
        }
        let n = ids.len();
        Ok(Self {
            adj: vec![vec![0; words(n)]; n],
            vops: vec![LocalClifford::IDENTITY; n],
            ids,
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.toggle_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn index_of(&self, id: usize) -> Result<usize, GraphError> {
        self.ids.binary_search(&id).map_err(|_| GraphError::UnknownVertex(id))
    }

    #[inline]
    fn bit(&self, i: usize, j: usize) -> bool {
        (self.adj[i][j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    fn flip(&mut self, i: usize, j: usize) {
        self.adj[i][j / 64] ^= 1 << (j % 64);
        self.adj[j][i / 64] ^= 1 << (i % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> Result<bool, GraphError> {
        Ok(self.bit(self.index_of(u)?, self.index_of(v)?))
    }

    fn neighbor_indices(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.adj[i].iter().enumerate() {
            let mut m = word;
            while m != 0 {
                out.push(w * 64 + m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        out
    }

    /// Neighbor ids, ascending.
    pub fn neighbors(&self, v: usize) -> Result<Vec<usize>, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.neighbor_indices(i).into_iter().map(|j| self.ids[j]).collect())
    }

    pub fn degree(&self, v: usize) -> Result<usize, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.adj[i].iter().map(|w| w.count_ones() as usize).sum())
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in self.neighbor_indices(i) {
                if j > i {
                    out.push((self.ids[i], self.ids[j]));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().flatten().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn vop(&self, v: usize) -> Result<LocalClifford, GraphError> {
        Ok(self.vops[self.index_of(v)?])
    }

    pub fn set_vop(&mut self, v: usize, c: LocalClifford) -> Result<(), GraphError> {
        let i = self.index_of(v)?;
        self.vops[i] = c;
        Ok(())
    }

    pub fn vops(&self) -> impl Iterator<Item = (usize, LocalClifford)> + '_ {
        self.ids.iter().copied().zip(self.vops.iter().copied())
    }

    /// Right-multiplies a vertex operator: `C_v ← C_v · c` (`c` acts on the graph side).
    pub(crate) fn push_vop(&mut self, i: usize, c: LocalClifford) {
        self.vops[i] = self.vops[i] * c;
    }

    pub fn clear_vops(&mut self) {
        self.vops.iter_mut().for_each(|c| *c = LocalClifford::IDENTITY);
    }

    /// Same vertex ids and edge set; vertex operators ignored.
    pub fn same_adjacency(&self, other: &GraphState) -> bool {
        self.ids == other.ids && self.adj == other.adj
    }

    /// Flips edge `(u, v)`: the action of `CZ_{uv}` on the represented state.
    pub fn toggle_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let (i, j) = (self.index_of(u)?, self.index_of(v)?);
        for (k, id) in [(i, u), (j, v)] {
            if !self.vops[k].is_identity() {
                return Err(GraphError::NonIdentityVop(id));
            }
        }
        self.flip(i, j);
        Ok(())
    }

    /// Flips an edge without the vertex-operator precondition (pure graph edit).
    pub(crate) fn toggle_edge_unchecked(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.flip(i, j);
    }

    /// Complements the neighborhood of `v` and compensates on the vertex
    /// operators so the represented state is unchanged.
    pub fn local_complement(&mut self, v: usize) -> Result<(), GraphError> {
        let i = self.index_of(v)?;
        self.local_complement_index(i);
        Ok(())
    }

    pub(crate) fn local_complement_index(&mut self, i: usize) {
        self.complement_neighborhood(i);
        // |G⟩ = e^{iπ/4 X_v} ∏_{u∈N(v)} e^{-iπ/4 Z_u} |τ_v(G)⟩.
        self.push_vop(i, LocalClifford::sqrt_x_dagger());
        for j in self.neighbor_indices(i) {
            self.push_vop(j, LocalClifford::s());
        }
    }

    /// Adjacency-only local complementation.
    pub(crate) fn complement_neighborhood(&mut self, i: usize) {
        let nbrs = self.neighbor_indices(i);
        let mask = self.adj[i].clone();
        for &u in &nbrs {
            for (w, m) in self.adj[u].iter_mut().zip(&mask) {
                *w ^= m;
            }
            self.adj[u][u / 64] ^= 1 << (u % 64);
        }
    }

    /// Deletes a vertex together with its incident edges.
    pub fn remove_vertex(&mut self, v: usize) -> Result<(), GraphError> {
        let i = self.index_of(v)?;
        self.remove_index(i);
        Ok(())
    }

    fn remove_index(&mut self, i: usize) {
        let n = self.len();
        self.ids.remove(i);
        self.vops.remove(i);
        self.adj.remove(i);
        let nw = words(n - 1);
        for row in &mut self.adj {
            // Drop bit i, shifting higher bits down by one.
            let mut out = vec![0u64; nw];
            for j in 0..n {
                if j == i {
                    continue;
                }
                if (row[j / 64] >> (j % 64)) & 1 == 1 {
                    let k = if j > i { j - 1 } else { j };
                    out[k / 64] |= 1 << (k % 64);
                }
            }
            *row = out;
        }
    }

    /// Induced subgraph on `keep` (ids), vertex operators carried along.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<GraphState, GraphError> {
        let mut g = GraphState::with_ids(keep.to_vec())?;
        let idx: Vec<usize> = g.ids.iter().map(|&id| self.index_of(id)).collect::<Result<_, _>>()?;
        for (a, &ia) in idx.iter().enumerate() {
            g.vops[a] = self.vops[ia];
            for (b, &ib) in idx.iter().enumerate().skip(a + 1) {
                if self.bit(ia, ib) {
                    g.flip(a, b);
                }
            }
        }
        Ok(g)
    }

    /// Same state with every vertex id mapped through `f` (must stay injective).
    pub fn relabeled(&self, f: impl Fn(usize) -> usize) -> Result<GraphState, GraphError> {
        let mut g = GraphState::with_ids(self.ids.iter().map(|&v| f(v)).collect())?;
        for (u, v) in self.edges() {
            let (i, j) = (g.index_of(f(u))?, g.index_of(f(v))?);
            g.flip(i, j);
        }
        for (v, c) in self.vops() {
            g.set_vop(f(v), c)?;
        }
        Ok(g)
    }

    /// Adds an isolated vertex with identity operator.
    pub fn add_vertex(&mut self, id: usize) -> Result<(), GraphError> {
        if self.contains(id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        let mut ids = self.ids.clone();
        ids.push(id);
        let mut g = GraphState::with_ids(ids)?;
        for (a, b) in self.edges() {
            let (i, j) = (g.index_of(a)?, g.index_of(b)?);
            g.flip(i, j);
        }
        for (v, c) in self.vops() {
            g.set_vop(v, c)?;
        }
        *self = g;
        Ok(())
    }

    /// Connected components as sorted id lists, ordered by smallest id.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![self.ids[s]];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for w in self.neighbor_indices(u) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(self.ids[w]);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub(crate) fn adjacency_rows(&self) -> &[Vec<u64>] {
        &self.adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toggle_edge_basics() {
        let mut g = GraphState::new(2);
        g.toggle_edge(0, 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        g.toggle_edge(0, 1).unwrap();
        assert_eq!(g, GraphState::new(2));
        assert_eq!(g.toggle_edge(0, 0), Err(GraphError::SelfLoop(0)));
        assert_eq!(g.toggle_edge(0, 5), Err(GraphError::UnknownVertex(5)));
        g.set_vop(1, LocalClifford::h()).unwrap();
        assert_eq!(g.toggle_edge(0, 1), Err(GraphError::NonIdentityVop(1)));
    }

    #[test]
    fn star_complements_to_triangle_plus_center() {
        let mut g = GraphState::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        g.local_complement(0).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let before = GraphState::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        g.local_complement(0).unwrap();
        assert!(g.same_adjacency(&before));
        assert_eq!(g.local_complement(9), Err(GraphError::UnknownVertex(9)));
    }

    #[test]
    fn vertex_removal_keeps_other_edges() {
        let mut g = GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        g.remove_vertex(2).unwrap();
        assert_eq!(g.ids(), &[0, 1, 3, 4]);
        assert_eq!(g.edges(), vec![(0, 1), (0, 4), (3, 4)]);
        assert_eq!(g.neighbors(4).unwrap(), vec![0, 3]);
    }

    #[test]
    fn components() {
        let g = GraphState::from_edges(5, &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![0, 1], vec![2], vec![3, 4]]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert_eq!(GraphState::with_ids(vec![1, 1]), Err(GraphError::DuplicateVertex(1)));
    }
}
