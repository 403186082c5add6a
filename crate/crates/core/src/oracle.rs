//! Brute-force reference solvers.
//!
//! [`exhaustive_dfs`] enumerates every simple path from the source and is
//! both the comparison baseline and the correctness oracle for the LPDP
//! solver. [`brute_force_block_table`] enumerates every path system of a
//! small leaf view without any of the segment search's ordering rules.

use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::graph::{Instance, Vertex, Weight};
use crate::solver::table::{BlockTable, Matching, TableBuilder, Witness};
use crate::solver::view::LeafView;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Solved,
    NoPath,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Solved => "Solved",
            Status::NoPath => "NoPath",
            Status::Timeout => "Timeout",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    /// Search nodes expanded over all phases.
    pub expanded: u64,
    pub partition_time: Duration,
    pub preprocess_time: Duration,
    /// Stored block-table entries summed over all blocks.
    pub table_entries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub weight: Weight,
    pub path: Vec<Vertex>,
    pub elapsed: Duration,
    pub stats: SolveStats,
}

impl Solution {
    pub fn unsolved(status: Status, elapsed: Duration, stats: SolveStats) -> Solution {
        Solution {
            status,
            weight: 0,
            path: Vec::new(),
            elapsed,
            stats,
        }
    }
}

/// Cooperative deadline: the clock is consulted every 2^16 expansions.
#[derive(Debug)]
pub struct Budget {
    deadline: Option<Instant>,
    pub expanded: u64,
    expired: bool,
}

const CHECK_MASK: u64 = (1 << 16) - 1;

impl Budget {
    pub fn new(deadline: Option<Instant>) -> Budget {
        Budget {
            deadline,
            expanded: 0,
            expired: false,
        }
    }

    pub fn unlimited() -> Budget {
        Budget::new(None)
    }

    /// Counts one expansion; returns `false` once the deadline has passed.
    #[inline]
    pub fn tick(&mut self) -> bool {
        self.expanded += 1;
        if self.expanded & CHECK_MASK == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.expired = true;
                }
            }
        }
        !self.expired
    }

    pub fn expired(&self) -> bool {
        self.expired
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }
}

/// Longest simple `source`–`target` path by enumerating all simple paths.
pub fn exhaustive_dfs(inst: &Instance, time_limit: Option<Duration>) -> Solution {
    let start = Instant::now();
    let mut budget = Budget::new(time_limit.map(|d| start + d));
    let g = &inst.graph;
    let n = g.vertex_count();

    let mut on_path = vec![false; n];
    // Explicit stack of (vertex, index of next neighbor to try).
    let mut stack: Vec<(Vertex, usize)> = vec![(inst.source, 0)];
    let mut weight: Weight = 0;
    on_path[inst.source] = true;
    let mut best: Option<(Weight, Vec<Vertex>)> = None;

    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if *next == 0 && !budget.tick() {
            break;
        }
        if v == inst.target {
            if best.as_ref().map_or(true, |(w, _)| weight > *w) {
                best = Some((weight, stack.iter().map(|&(u, _)| u).collect()));
            }
        } else if let Some(&(u, w)) = g.neighbors(v).get(*next) {
            *next += 1;
            if !on_path[u] {
                on_path[u] = true;
                weight += w;
                stack.push((u, 0));
            }
            continue;
        }
        stack.pop();
        on_path[v] = false;
        if let Some(&(parent, _)) = stack.last() {
            weight -= g.edge_weight(parent, v).expect("stack holds a path");
        }
    }

    let stats = SolveStats {
        expanded: budget.expanded,
        ..SolveStats::default()
    };
    let elapsed = start.elapsed();
    if budget.expired() {
        return Solution::unsolved(Status::Timeout, elapsed, stats);
    }
    match best {
        Some((weight, path)) => Solution {
            status: Status::Solved,
            weight,
            path,
            elapsed,
            stats,
        },
        None => Solution::unsolved(Status::NoPath, elapsed, stats),
    }
}

pub const BRUTE_FORCE_MAX_BOUNDARY: usize = 8;
pub const BRUTE_FORCE_MAX_NODES: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("view has {nodes} nodes and {boundary} boundary vertices; brute force supports at most {BRUTE_FORCE_MAX_NODES} and {BRUTE_FORCE_MAX_BOUNDARY}")]
pub struct TooLarge {
    pub nodes: usize,
    pub boundary: usize,
}

/// Exact block table by naive enumeration of every vertex-disjoint path
/// system of every boundary matching.
pub fn brute_force_block_table(view: &LeafView) -> Result<BlockTable, TooLarge> {
    let b = view.boundary.len();
    if b > BRUTE_FORCE_MAX_BOUNDARY || view.node_count() > BRUTE_FORCE_MAX_NODES {
        return Err(TooLarge {
            nodes: view.node_count(),
            boundary: b,
        });
    }
    let mut best: FxHashMap<(Matching, u32), (Weight, Vec<Vec<Vertex>>)> = FxHashMap::default();
    for pairs in all_matchings(b) {
        let mut used = vec![false; view.inner_count()];
        let mut paths = Vec::new();
        realize(view, &pairs, 0, &mut used, &mut paths, 0, &mut |weight, used, paths| {
            let touched = touched_mask(view, used);
            let key = (Matching::from_pairs(&pairs), touched);
            let slot = best.entry(key).or_insert((weight, Vec::new()));
            if weight >= slot.0 {
                *slot = (weight, paths.to_vec());
            }
        });
    }
    let mut builder = TableBuilder::new(view.boundary.clone());
    for ((matching, touched), (weight, paths)) in best {
        builder.offer(matching, touched, weight, || {
            Witness::Paths(
                paths
                    .into_iter()
                    .map(|p| p.into_iter().map(|v| view.original[v]).collect())
                    .collect(),
            )
        });
    }
    Ok(builder.finish())
}

fn touched_mask(view: &LeafView, used: &[bool]) -> u32 {
    view.boundary
        .iter()
        .enumerate()
        .filter(|(i, _)| used[view.attached[*i]])
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// Every partial matching on `0..b`, pairs sorted by their first element.
pub(crate) fn all_matchings(b: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(
        free: &mut Vec<usize>,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some(first) = free.first().copied() else {
            out.push(acc.clone());
            return;
        };
        free.remove(0);
        // `first` stays unmatched
        go(free, acc, out);
        for i in 0..free.len() {
            let partner = free.remove(i);
            acc.push((first, partner));
            go(free, acc, out);
            acc.pop();
            free.insert(i, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    go(&mut (0..b).collect(), &mut Vec::new(), &mut out);
    out
}

type Sink<'a> = dyn FnMut(Weight, &[bool], &[Vec<Vertex>]) + 'a;

/// Realizes `pairs[i..]` one after another with every simple path between
/// the attachment vertices that avoids `used`.
fn realize(
    view: &LeafView,
    pairs: &[(usize, usize)],
    i: usize,
    used: &mut Vec<bool>,
    paths: &mut Vec<Vec<Vertex>>,
    weight: Weight,
    sink: &mut Sink<'_>,
) {
    let Some(&(a, b)) = pairs.get(i) else {
        sink(weight, used, paths);
        return;
    };
    let from = view.attached[a];
    let to = view.attached[b];
    if used[from] {
        return;
    }
    used[from] = true;
    let mut current = vec![from];
    all_simple_paths(view, to, &mut current, used, weight, &mut |w, used, path| {
        paths.push(path.to_vec());
        realize(view, pairs, i + 1, used, paths, w, sink);
        paths.pop();
    });
    used[from] = false;
}

fn all_simple_paths(
    view: &LeafView,
    to: Vertex,
    current: &mut Vec<Vertex>,
    used: &mut Vec<bool>,
    weight: Weight,
    visit: &mut dyn FnMut(Weight, &mut Vec<bool>, &[Vertex]),
) {
    let v = *current.last().unwrap();
    if v == to {
        let snapshot = current.clone();
        visit(weight, used, &snapshot);
        return;
    }
    for &(u, w) in &view.adj[v] {
        if !used[u] {
            used[u] = true;
            current.push(u);
            all_simple_paths(view, to, current, used, weight + w, visit);
            current.pop();
            used[u] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn inst(n: usize, edges: &[(usize, usize, u64)], s: usize, t: usize) -> Instance {
        Instance::new(Graph::from_edges(n, edges.iter().copied()).unwrap(), s, t).unwrap()
    }

    #[test]
    fn unique_path() {
        let sol = exhaustive_dfs(&inst(3, &[(0, 1, 2), (1, 2, 3)], 0, 2), None);
        assert_eq!(sol.status, Status::Solved);
        assert_eq!(sol.weight, 5);
        assert_eq!(sol.path, vec![0, 1, 2]);
    }

    #[test]
    fn four_cycle_prefers_long_way_round() {
        let sol = exhaustive_dfs(
            &inst(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], 0, 1),
            None,
        );
        assert_eq!(sol.weight, 3);
        assert_eq!(sol.path, vec![0, 3, 2, 1]);
    }

    #[test]
    fn disconnected_endpoints() {
        let sol = exhaustive_dfs(&inst(4, &[(0, 1, 1), (2, 3, 1)], 0, 3), None);
        assert_eq!(sol.status, Status::NoPath);
    }

    #[test]
    fn zero_time_limit_times_out_on_large_grid() {
        let mut edges = Vec::new();
        let side = 12;
        for r in 0..side {
            for c in 0..side {
                let v = r * side + c;
                if c + 1 < side {
                    edges.push((v, v + 1, 1));
                }
                if r + 1 < side {
                    edges.push((v, v + side, 1));
                }
            }
        }
        let sol = exhaustive_dfs(
            &inst(side * side, &edges, 0, side * side - 1),
            Some(Duration::from_millis(1)),
        );
        assert_eq!(sol.status, Status::Timeout);
    }

    #[test]
    fn matching_enumeration_counts() {
        // Telephone numbers: partial matchings of a b-element set.
        let counts: Vec<usize> = (0..8).map(|b| all_matchings(b).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 10, 26, 76, 232]);
    }
}
