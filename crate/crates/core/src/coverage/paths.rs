use serde::{Deserialize, Serialize};

use super::map::CouplingMap;
use crate::error::{Error, Result};

/// A chain embedded along a simple path; position `i` hosts chain qubit `i`.
///
/// A path and its reverse are the same layout; the stored orientation has
/// the smaller endpoint first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout(Vec<usize>);

impl Layout {
    pub fn new(mut path: Vec<usize>) -> Self {
        if path.last() < path.first() {
            path.reverse();
        }
        Layout(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Consecutive pairs as `(min, max)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    /// Checks that the path is simple and follows edges of `map`.
    pub fn validate(&self, map: &CouplingMap) -> Result<()> {
        let mut seen = vec![false; map.num_qubits];
        for &v in &self.0 {
            if v >= map.num_qubits {
                return Err(Error::invalid(
                    "layout",
                    format!("qubit {v} is not on `{}`", map.name),
                ));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::invalid(
                    "layout",
                    format!("qubit {v} repeats in {:?}", self.0),
                ));
            }
        }
        if let Some((a, b)) = self.edges().find(|&(a, b)| !map.has_edge(a, b)) {
            return Err(Error::invalid(
                "layout",
                format!("({a},{b}) is not an edge of `{}`", map.name),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEnumeration {
    /// Canonical layouts in lexicographic order. On overflow these are the
    /// lexicographically first `cap` layouts.
    pub layouts: Vec<Layout>,
    pub overflow: bool,
}

/// Depth-first enumeration of simple paths with exactly `q` vertices.
pub fn enumerate_paths(map: &CouplingMap, q: usize, cap: usize) -> Result<PathEnumeration> {
    if q == 0 {
        return Err(Error::invalid("chain length", "must be at least 1"));
    }
    if cap == 0 {
        return Err(Error::invalid("path cap", "must be at least 1"));
    }
    let mut walk = Walk {
        map,
        q,
        cap,
        path: Vec::with_capacity(q),
        on_path: vec![false; map.num_qubits],
        found: Vec::new(),
        overflow: false,
    };
    for start in 0..map.num_qubits {
        walk.visit(start);
        if walk.overflow {
            break;
        }
    }
    // Starts and neighbors are visited in ascending order, so paths already
    // arrive in lexicographic order.
    Ok(PathEnumeration {
        layouts: walk.found,
        overflow: walk.overflow,
    })
}

struct Walk<'m> {
    map: &'m CouplingMap,
    q: usize,
    cap: usize,
    path: Vec<usize>,
    on_path: Vec<bool>,
    found: Vec<Layout>,
    overflow: bool,
}

impl Walk<'_> {
    fn visit(&mut self, v: usize) {
        self.path.push(v);
        self.on_path[v] = true;
        if self.path.len() == self.q {
            if self.path[0] <= v {
                if self.found.len() == self.cap {
                    self.overflow = true;
                } else {
                    self.found.push(Layout(self.path.clone()));
                }
            }
        } else {
            for &w in self.map.neighbors(v) {
                if !self.on_path[w] {
                    self.visit(w);
                    if self.overflow {
                        break;
                    }
                }
            }
        }
        self.on_path[v] = false;
        self.path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::map::builtin_topology;

    fn paths(name: &str, q: usize) -> Vec<Vec<usize>> {
        let map = builtin_topology(name).unwrap();
        let e = enumerate_paths(&map, q, 1000).unwrap();
        assert!(!e.overflow);
        e.layouts.into_iter().map(|l| l.0).collect()
    }

    #[test]
    fn lines_and_rings() {
        assert_eq!(paths("line-5", 5), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(
            paths("line-6", 5),
            vec![vec![0, 1, 2, 3, 4], vec![1, 2, 3, 4, 5]]
        );
        assert_eq!(paths("ring-6", 3).len(), 6);
        assert_eq!(paths("line-3", 1).len(), 3);
        assert!(paths("line-3", 4).is_empty());
    }

    #[test]
    fn overflow_keeps_lexicographic_prefix() {
        let map = builtin_topology("falcon-27").unwrap();
        let all = enumerate_paths(&map, 5, 100_000).unwrap();
        let some = enumerate_paths(&map, 5, 7).unwrap();
        assert!(some.overflow);
        assert_eq!(some.layouts, all.layouts[..7]);
        assert!(all.layouts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn canonical_orientation() {
        assert_eq!(Layout::new(vec![4, 3, 2]).path(), &[2, 3, 4]);
        let map = builtin_topology("line-5").unwrap();
        assert!(Layout::new(vec![0, 1, 2]).validate(&map).is_ok());
        assert!(Layout::new(vec![0, 2, 3]).validate(&map).is_err());
        assert!(Layout::new(vec![1, 2, 1]).validate(&map).is_err());
    }
}
