//! Local-complementation orbit search.

use std::collections::{HashMap, VecDeque};

use super::{GraphError, GraphState};

/// Largest graph the orbit search accepts.
pub const LC_VERTEX_LIMIT: usize = 16;
/// Graphs visited (both directions combined) before giving up.
pub const LC_SEARCH_BUDGET: usize = 500_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcEquivalence {
    pub equivalent: bool,
    /// Vertex ids: applying `local_complement` to the first graph in this
    /// order yields the adjacency of the second.
    pub witness: Vec<usize>,
}

type Adj = [u16; LC_VERTEX_LIMIT];

fn encode(g: &GraphState) -> Adj {
    let mut a = [0u16; LC_VERTEX_LIMIT];
    for (i, row) in g.adjacency_rows().iter().enumerate() {
        a[i] = row[0] as u16;
    }
    a
}

fn complement(a: &Adj, v: usize) -> Adj {
    let mut out = *a;
    let nv = a[v];
    let mut m = nv;
    while m != 0 {
        let u = m.trailing_zeros() as usize;
        m &= m - 1;
        out[u] ^= nv & !(1 << u);
    }
    out
}

/// Decides whether `g2`'s adjacency is reachable from `g1`'s by local
/// complementations (vertex operators are ignored).
pub fn equal_up_to_local_cliffords(g1: &GraphState, g2: &GraphState) -> Result<LcEquivalence, GraphError> {
    if g1.ids() != g2.ids() {
        return Err(GraphError::VertexSetMismatch);
    }
    let n = g1.len();
    if n > LC_VERTEX_LIMIT {
        return Err(GraphError::TooManyVertices { n, max: LC_VERTEX_LIMIT });
    }
    let (start, goal) = (encode(g1), encode(g2));
    if start == goal {
        return Ok(LcEquivalence { equivalent: true, witness: Vec::new() });
    }

    // parent maps: state -> (predecessor, vertex index used)
    let mut fwd: HashMap<Adj, Option<(Adj, usize)>> = HashMap::from([(start, None)]);
    let mut bwd: HashMap<Adj, Option<(Adj, usize)>> = HashMap::from([(goal, None)]);
    let mut fq = VecDeque::from([start]);
    let mut bq = VecDeque::from([goal]);

    let path = |map: &HashMap<Adj, Option<(Adj, usize)>>, mut s: Adj| {
        let mut out = Vec::new();
        while let Some(Some((prev, v))) = map.get(&s) {
            out.push(*v);
            s = *prev;
        }
        out
    };

    while !fq.is_empty() || !bq.is_empty() {
        if fwd.len() + bwd.len() > LC_SEARCH_BUDGET {
            return Err(GraphError::SearchBudgetExceeded(LC_SEARCH_BUDGET));
        }
        // Expand the smaller frontier by one full level.
        let forward = !fq.is_empty() && (bq.is_empty() || fq.len() <= bq.len());
        let (queue, mine, other) = if forward {
            (&mut fq, &mut fwd, &bwd)
        } else {
            (&mut bq, &mut bwd, &fwd)
        };
        for _ in 0..queue.len() {
            let s = queue.pop_front().expect("non-empty level");
            for v in 0..n {
                if s[v] == 0 {
                    continue;
                }
                let t = complement(&s, v);
                if mine.contains_key(&t) {
                    continue;
                }
                mine.insert(t, Some((s, v)));
                if other.contains_key(&t) {
                    let (f, b) = if forward { (&*mine, other) } else { (other, &*mine) };
                    let mut w = path(f, t);
                    w.reverse();
                    // LC is an involution on adjacency, so the backward half replays as-is.
                    w.extend(path(b, t));
                    let ids = g1.ids();
                    return Ok(LcEquivalence {
                        equivalent: true,
                        witness: w.into_iter().map(|i| ids[i]).collect(),
                    });
                }
                queue.push_back(t);
            }
        }
        // Either orbit exhausted without meeting: the orbits are disjoint.
        if fq.is_empty() || bq.is_empty() {
            break;
        }
    }
    Ok(LcEquivalence { equivalent: false, witness: Vec::new() })
}
