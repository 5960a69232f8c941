use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::map::CouplingMap;
use super::paths::{enumerate_paths, Layout};
use crate::error::{Error, Result};
use crate::par::{map_range, map_slice, Schedule};
use crate::rng::{derive_seed, SplitMix64};

pub const DEFAULT_PATH_CAP: usize = 20_000;
pub const DEFAULT_RESTARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverOptions {
    /// Enumeration cap; beyond it candidates come from the randomized builder.
    pub cap: usize,
    pub seed: u64,
    /// Randomized candidates generated per greedy round.
    pub restarts: usize,
    pub schedule: Schedule,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            cap: DEFAULT_PATH_CAP,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            schedule: Schedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringSet {
    pub map_name: String,
    pub chain_length: usize,
    pub layouts: Vec<Layout>,
    pub covered: BTreeSet<(usize, usize)>,
    pub uncovered: BTreeSet<(usize, usize)>,
    /// Whether candidates came from the randomized builder.
    pub randomized: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverDocument {
    map_name: String,
    chain_length: usize,
    layouts: Vec<Layout>,
    uncovered: Vec<[usize; 2]>,
}

impl CoveringSet {
    pub fn success(&self) -> bool {
        self.uncovered.is_empty()
    }

    /// `Err(Uncoverable)` listing the uncovered edges unless the cover is complete.
    pub fn require_complete(&self) -> Result<()> {
        if self.success() {
            Ok(())
        } else {
            Err(Error::Uncoverable {
                map: self.map_name.clone(),
                chain: self.chain_length,
                edges: self.uncovered.iter().copied().collect(),
            })
        }
    }

    pub fn to_json(&self) -> String {
        let doc = CoverDocument {
            map_name: self.map_name.clone(),
            chain_length: self.chain_length,
            layouts: self.layouts.clone(),
            uncovered: self.uncovered.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("covering set serializes")
    }

    /// Reads a covering-set document, recomputing coverage against `map`.
    pub fn from_json(text: &str, map: &CouplingMap) -> Result<Self> {
        let doc: CoverDocument = serde_json::from_str(text)?;
        if doc.map_name != map.name {
            return Err(Error::invalid(
                "covering set",
                format!("built for `{}`, not `{}`", doc.map_name, map.name),
            ));
        }
        let layouts: Vec<Layout> = doc
            .layouts
            .into_iter()
            .map(|l| Layout::new(l.path().to_vec()))
            .collect();
        for layout in &layouts {
            layout.validate(map)?;
            if layout.len() != doc.chain_length {
                return Err(Error::invalid(
                    "covering set",
                    format!(
                        "layout {:?} does not have {} qubits",
                        layout.path(),
                        doc.chain_length
                    ),
                ));
            }
        }
        Ok(assemble(map, doc.chain_length, layouts, false))
    }
}

fn assemble(map: &CouplingMap, q: usize, layouts: Vec<Layout>, randomized: bool) -> CoveringSet {
    let covered: BTreeSet<_> = layouts.iter().flat_map(Layout::edges).collect();
    let uncovered = map.edges().difference(&covered).copied().collect();
    CoveringSet {
        map_name: map.name.clone(),
        chain_length: q,
        layouts,
        covered,
        uncovered,
        randomized,
    }
}

fn gain(layout: &Layout, uncovered: &BTreeSet<(usize, usize)>) -> usize {
    layout.edges().filter(|e| uncovered.contains(e)).count()
}

/// Greedy covering set: start from the lexicographically first layout, then
/// repeatedly add the layout covering the most uncovered edges, breaking ties
/// lexicographically.
///
/// Edges that no `q`-vertex path can reach are left in `uncovered`.
pub fn greedy_cover(map: &CouplingMap, q: usize, opts: &CoverOptions) -> Result<CoveringSet> {
    if q < 2 {
        return Err(Error::invalid(
            "chain length",
            "covering needs at least 2 qubits",
        ));
    }
    if opts.restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }
    let enumeration = enumerate_paths(map, q, opts.cap)?;
    if enumeration.overflow {
        return Ok(randomized_cover(
            map,
            q,
            enumeration.layouts[0].clone(),
            opts,
        ));
    }
    let candidates = enumeration.layouts;
    let mut uncovered = map.edges().clone();
    let mut chosen = Vec::new();
    if let Some(first) = candidates.first() {
        for e in first.edges() {
            uncovered.remove(&e);
        }
        chosen.push(first.clone());
    }
    while !uncovered.is_empty() {
        let gains = map_slice(opts.schedule, &candidates, |c| gain(c, &uncovered));
        let Some((best, &g)) = gains
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        else {
            break;
        };
        if g == 0 {
            break;
        }
        for e in candidates[best].edges() {
            uncovered.remove(&e);
        }
        chosen.push(candidates[best].clone());
    }
    Ok(assemble(map, q, chosen, false))
}

fn randomized_cover(
    map: &CouplingMap,
    q: usize,
    first: Layout,
    opts: &CoverOptions,
) -> CoveringSet {
    // Edges in components too small to hold a chain are never targeted.
    let mut reachable = vec![false; map.num_qubits];
    for comp in map.components() {
        if comp.len() >= q {
            for v in comp {
                reachable[v] = true;
            }
        }
    }
    let mut uncovered: BTreeSet<_> = map
        .edges()
        .iter()
        .copied()
        .filter(|&(a, _)| reachable[a])
        .collect();
    for e in first.edges() {
        uncovered.remove(&e);
    }
    let mut chosen = vec![first];
    let mut round = 0u64;
    while !uncovered.is_empty() {
        round += 1;
        let builder = Builder::new(map, q, &uncovered);
        let found = map_range(opts.schedule, opts.restarts, |r| {
            let mut rng = SplitMix64::new(derive_seed(opts.seed, &[round, r as u64]));
            builder.build(&mut rng).map(|l| (gain(&l, &uncovered), l))
        });
        let best = found
            .into_iter()
            .flatten()
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
        match best {
            Some((g, layout)) if g > 0 => {
                for e in layout.edges() {
                    uncovered.remove(&e);
                }
                chosen.push(layout);
            }
            _ => break,
        }
    }
    assemble(map, q, chosen, true)
}

/// Seeded path grower: starts on an uncovered edge and extends either end,
/// preferring uncovered edges, then vertices close to uncovered edges, with
/// random tie-breaks. Backtracks within a node budget.
struct Builder<'m> {
    map: &'m CouplingMap,
    q: usize,
    uncovered: &'m BTreeSet<(usize, usize)>,
    seeds: Vec<(usize, usize)>,
    /// BFS distance from each vertex to the nearest endpoint of an uncovered edge.
    distance: Vec<usize>,
}

struct Growth<'r> {
    path: VecDeque<usize>,
    on_path: Vec<bool>,
    budget: usize,
    rng: &'r mut SplitMix64,
}

impl<'m> Builder<'m> {
    fn new(map: &'m CouplingMap, q: usize, uncovered: &'m BTreeSet<(usize, usize)>) -> Self {
        let mut distance = vec![usize::MAX; map.num_qubits];
        let mut queue = VecDeque::new();
        for &(a, b) in uncovered {
            for v in [a, b] {
                if distance[v] != 0 {
                    distance[v] = 0;
                    queue.push_back(v);
                }
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in map.neighbors(v) {
                if distance[w] == usize::MAX {
                    distance[w] = distance[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Builder {
            map,
            q,
            uncovered,
            seeds: uncovered.iter().copied().collect(),
            distance,
        }
    }

    fn build(&self, rng: &mut SplitMix64) -> Option<Layout> {
        let (a, b) = self.seeds[rng.below(self.seeds.len() as u64) as usize];
        let (a, b) = if rng.next_u64() & 1 == 0 {
            (a, b)
        } else {
            (b, a)
        };
        let mut on_path = vec![false; self.map.num_qubits];
        on_path[a] = true;
        on_path[b] = true;
        let mut g = Growth {
            path: VecDeque::from([a, b]),
            on_path,
            budget: 50 * self.q,
            rng,
        };
        self.grow(&mut g)
            .then(|| Layout::new(g.path.iter().copied().collect()))
    }

    fn grow(&self, g: &mut Growth) -> bool {
        if g.path.len() == self.q {
            return true;
        }
        let front = g.path[0];
        let back = g.path[g.path.len() - 1];
        let mut moves: Vec<((bool, usize, u64), bool, usize)> = Vec::new();
        for (at_front, end) in [(true, front), (false, back)] {
            for &w in self.map.neighbors(end) {
                if !g.on_path[w] {
                    let fresh = self.uncovered.contains(&(end.min(w), end.max(w)));
                    let key = (!fresh, self.distance[w], g.rng.next_u64());
                    moves.push((key, at_front, w));
                }
            }
        }
        moves.sort_unstable_by_key(|m| m.0);
        for (_, at_front, w) in moves {
            if g.budget == 0 {
                return false;
            }
            g.budget -= 1;
            g.on_path[w] = true;
            if at_front {
                g.path.push_front(w);
            } else {
                g.path.push_back(w);
            }
            if self.grow(g) {
                return true;
            }
            if at_front {
                g.path.pop_front();
            } else {
                g.path.pop_back();
            }
            g.on_path[w] = false;
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub layout_count: usize,
    pub covered: usize,
    pub uncovered: Vec<(usize, usize)>,
    /// `⌈|E| / (q − 1)⌉`: no set of `q`-vertex chains can use fewer layouts.
    pub lower_bound: usize,
    /// Edges each layout adds beyond those of earlier layouts.
    pub new_edges: Vec<usize>,
    /// Indices of layouts that are not simple `q`-vertex paths on the map.
    pub invalid_layouts: Vec<usize>,
}

/// Recomputes coverage of `layouts` from scratch.
pub fn validate_cover(map: &CouplingMap, q: usize, layouts: &[Layout]) -> CoverReport {
    let mut seen = BTreeSet::new();
    let mut new_edges = Vec::with_capacity(layouts.len());
    let mut invalid_layouts = Vec::new();
    for (i, layout) in layouts.iter().enumerate() {
        if layout.len() != q || layout.validate(map).is_err() {
            invalid_layouts.push(i);
            new_edges.push(0);
            continue;
        }
        new_edges.push(layout.edges().filter(|&e| seen.insert(e)).count());
    }
    let uncovered: Vec<_> = map.edges().difference(&seen).copied().collect();
    CoverReport {
        layout_count: layouts.len(),
        covered: map.num_edges() - uncovered.len(),
        uncovered,
        lower_bound: if q < 2 {
            0
        } else {
            map.num_edges().div_ceil(q - 1)
        },
        new_edges,
        invalid_layouts,
    }
}
