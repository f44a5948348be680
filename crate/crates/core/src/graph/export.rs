use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GraphError, GraphState};
use crate::clifford::LocalClifford;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            _ => Err(GraphError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphVertexDoc {
    pub id: usize,
    /// Vertex operator as an operator-order H/S word, `I` for identity.
    pub op: String,
}

/// JSON form of a graph state: `{"vertices":[{"id","op"}],"edges":[[u,v]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<GraphVertexDoc>,
    pub edges: Vec<[usize; 2]>,
}

impl GraphState {
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self
                .vops()
                .map(|(id, c)| GraphVertexDoc { id, op: c.to_string() })
                .collect(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<GraphState, GraphError> {
        let mut g = GraphState::with_ids(doc.vertices.iter().map(|v| v.id).collect())?;
        for &[u, v] in &doc.edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (i, j) = (g.index_of(u)?, g.index_of(v)?);
            if g.bit(i, j) {
                return Err(GraphError::InvalidDocument(format!("edge {u}-{v} listed twice")));
            }
            g.toggle_edge_unchecked(i, j);
        }
        for v in &doc.vertices {
            let c = LocalClifford::from_str(&v.op).map_err(GraphError::InvalidDocument)?;
            g.set_vop(v.id, c)?;
        }
        Ok(g)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph cluster {\n");
        for (id, c) in self.vops() {
            if c.is_identity() {
                let _ = writeln!(s, "  {id};");
            } else {
                let _ = writeln!(s, "  {id} [label=\"{id}:{c}\"];");
            }
        }
        for (u, v) in self.edges() {
            let _ = writeln!(s, "  {u} -- {v};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph document serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<GraphState, GraphError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::InvalidDocument(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn export(&self, format: ExportFormat) -> Vec<u8> {
        match format {
            ExportFormat::Dot => self.to_dot().into_bytes(),
            ExportFormat::Json => self.to_json().into_bytes(),
        }
    }

    /// `export` with the format given by name (`dot` or `json`).
    pub fn export_named(&self, format: &str) -> Result<Vec<u8>, GraphError> {
        Ok(self.export(format.parse()?))
    }
}
