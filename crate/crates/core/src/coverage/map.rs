use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FALCON_27: &str = include_str!("../../fixtures/falcon-27.json");
const HUMMINGBIRD_65: &str = include_str!("../../fixtures/hummingbird-65.json");
const EAGLE_127: &str = include_str!("../../fixtures/eagle-127.json");

pub const DEVICE_FIXTURES: [&str; 3] = ["falcon-27", "hummingbird-65", "eagle-127"];

/// Undirected device graph. Edges are stored as `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    pub name: String,
    pub num_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDocument {
    name: String,
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
}

impl CouplingMap {
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let name = name.into();
        let mut set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); num_qubits];
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid(
                    "coupling map",
                    format!("self-loop on qubit {a}"),
                ));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::invalid(
                    "coupling map",
                    format!("edge ({a},{b}) references a qubit outside 0..{num_qubits}"),
                ));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(
                    "coupling map",
                    format!("duplicate edge ({a},{b})"),
                ));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(CouplingMap {
            name,
            num_qubits,
            edges: set,
            adjacency,
        })
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.num_qubits];
        let mut out = Vec::new();
        for start in 0..self.num_qubits {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut i = 0;
            while i < members.len() {
                for &w in &self.adjacency[members[i]] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        members.push(w);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn to_json(&self) -> String {
        let doc = MapDocument {
            name: self.name.clone(),
            num_qubits: self.num_qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("coupling map serializes")
    }
}

/// Parses a coupling-map document `{name, num_qubits, edges: [[a,b],...]}`.
pub fn load_coupling_map(text: &str) -> Result<CouplingMap> {
    let doc: MapDocument = serde_json::from_str(text)?;
    CouplingMap::new(
        doc.name,
        doc.num_qubits,
        doc.edges.into_iter().map(|[a, b]| (a, b)),
    )
}

/// `line-N`, `ring-N` or one of the bundled device fixtures.
pub fn builtin_topology(name: &str) -> Result<CouplingMap> {
    let fixture = match name {
        "falcon-27" => Some(FALCON_27),
        "hummingbird-65" => Some(HUMMINGBIRD_65),
        "eagle-127" => Some(EAGLE_127),
        _ => None,
    };
    if let Some(text) = fixture {
        return load_coupling_map(text);
    }
    let unknown = || Error::invalid("topology", format!("unknown topology `{name}`"));
    let (kind, size) = name.split_once('-').ok_or_else(unknown)?;
    let n: usize = size.parse().map_err(|_| unknown())?;
    match kind {
        "line" if n >= 1 => CouplingMap::new(name, n, (1..n).map(|i| (i - 1, i))),
        "ring" if n >= 3 => CouplingMap::new(name, n, (0..n).map(|i| (i, (i + 1) % n))),
        "line" | "ring" => Err(Error::invalid("topology", format!("`{name}` is too small"))),
        _ => Err(unknown()),
    }
}
