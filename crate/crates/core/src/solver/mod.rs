//! The LPDP solver.
//!
//! Blocks are processed bottom-up through the hierarchy: each leaf block is
//! tabulated by segment search, each coarse block by a combination search
//! over its children's tables, and the root's table answers the query for
//! the pair (source terminal, target terminal). Blocks of one level are
//! independent and run in parallel.

pub mod coarse;
pub mod leaf;
pub mod table;
pub mod view;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{validate_path, Instance, Vertex};
use crate::oracle::{Budget, Solution, SolveStats, Status};
use crate::partition::{self, Hierarchy, Partition, PartitionError};
use table::{BlockTable, BoundaryKey, Matching, Witness};
use view::{BlockView, BoundaryTooLarge, CoarseView, LeafView};

pub use coarse::preprocess_coarse;
pub use leaf::preprocess_leaf;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Apply the two id-ordering rules (segments end above their root, roots ascend).
    pub symmetry_pruning: bool,
    /// Abort a block once its table holds more entries than this.
    pub max_entries: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            symmetry_pruning: true,
            max_entries: 20_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PreprocessError {
    #[error("deadline reached")]
    Timeout,
    #[error("block table exceeded {entries} entries")]
    TableBlowup { entries: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    BoundaryTooLarge(#[from] BoundaryTooLarge),
    #[error("block table exceeded {entries} entries")]
    TableBlowup { entries: usize },
    #[error("internal error: missing witness for block {block}")]
    WitnessMissing { block: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpdpConfig {
    /// Leaf block count (power of two); `None` picks about 64 vertices per leaf.
    pub k: Option<usize>,
    pub imbalance: f64,
    pub boundary_cap: usize,
    pub seed: u64,
    /// Put every leaf directly under the root instead of a binary hierarchy.
    pub flat: bool,
    pub search: SearchOptions,
}

impl Default for LpdpConfig {
    fn default() -> Self {
        LpdpConfig {
            k: None,
            imbalance: partition::DEFAULT_IMBALANCE,
            boundary_cap: 12,
            seed: 0,
            flat: false,
            search: SearchOptions::default(),
        }
    }
}

/// Tables of every hierarchy node (`None` for blocks with an empty boundary).
pub struct Tables {
    pub views: Vec<Option<BlockView>>,
    pub tables: Vec<Option<BlockTable>>,
}

/// Partitions with the built-in partitioner (or `partition` if given) and solves.
pub fn solve(
    inst: &Instance,
    cfg: &LpdpConfig,
    partition: Option<&Partition>,
    time_limit: Option<Duration>,
) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let n = inst.graph.vertex_count();
    let mut hierarchy = match partition {
        Some(p) => Hierarchy::pair_by_cut(&inst.graph, p),
        None => {
            let k = cfg.k.unwrap_or_else(|| partition::default_k(n));
            partition::partition_hier(&inst.graph, k, cfg.imbalance, cfg.seed)?.1
        }
    };
    if cfg.flat {
        hierarchy = hierarchy.flattened();
    }
    enforce_boundary_cap(inst, &mut hierarchy, cfg)?;
    let partition_time = start.elapsed();
    let mut sol = solve_with_hierarchy(inst, &hierarchy, cfg, time_limit.map(|d| start + d))?;
    sol.elapsed = start.elapsed();
    sol.stats.partition_time = partition_time;
    Ok(sol)
}

/// Splits each leaf whose boundary is over the cap once; fails if any block
/// is still over it afterwards.
fn enforce_boundary_cap(
    inst: &Instance,
    h: &mut Hierarchy,
    cfg: &LpdpConfig,
) -> Result<(), BoundaryTooLarge> {
    let bounds = view::boundaries(inst, h);
    let over: Vec<usize> = h
        .leaves()
        .filter(|&l| bounds[l].len() > cfg.boundary_cap && h.nodes[l].vertices.len() >= 2)
        .collect();
    for leaf in over {
        let halves = partition::bisect_block(&inst.graph, &h.nodes[leaf].vertices, cfg.seed ^ leaf as u64);
        h.split_leaf(leaf, halves);
    }
    view::check_boundary_cap(&view::boundaries(inst, h), cfg.boundary_cap)
}

/// Runs the dynamic program over a given hierarchy.
pub fn solve_with_hierarchy(
    inst: &Instance,
    h: &Hierarchy,
    cfg: &LpdpConfig,
    deadline: Option<Instant>,
) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let bounds = view::boundaries(inst, h);
    view::check_boundary_cap(&bounds, cfg.boundary_cap)?;

    let (tables, expanded) = match build_tables(inst, h, &bounds, &cfg.search, deadline) {
        Ok(t) => t,
        Err((PreprocessError::Timeout, expanded)) => {
            let stats = SolveStats {
                expanded,
                ..SolveStats::default()
            };
            return Ok(Solution::unsolved(Status::Timeout, start.elapsed(), stats));
        }
        Err((PreprocessError::TableBlowup { entries }, _)) => {
            return Err(SolveError::TableBlowup { entries })
        }
    };
    let preprocess_time = start.elapsed();
    let stats = SolveStats {
        expanded,
        partition_time: Duration::ZERO,
        preprocess_time,
        table_entries: tables.tables.iter().flatten().map(BlockTable::len).sum(),
    };

    let root_table = tables.tables[h.root].as_ref().expect("root holds both terminals");
    debug_assert_eq!(root_table.boundary()[0].key, BoundaryKey::Source);
    debug_assert_eq!(root_table.boundary()[1].key, BoundaryKey::Target);
    let query = Matching::from_pairs(&[(0, 1)]);
    let Some(best) = root_table.query(query, 0) else {
        return Ok(Solution::unsolved(Status::NoPath, start.elapsed(), stats));
    };
    let weight = best.weight;
    let mut paths = reconstruct(&tables, h.root, query, best.touched)?;
    let path = paths.pop().expect("one pair at the root");
    debug_assert!({
        let v = validate_path(&inst.graph, &path, inst.source, inst.target);
        v.valid && v.weight == weight
    });
    Ok(Solution {
        status: Status::Solved,
        weight,
        path,
        elapsed: start.elapsed(),
        stats,
    })
}

/// Tabulates every block bottom-up, level by level.
pub fn build_tables(
    inst: &Instance,
    h: &Hierarchy,
    bounds: &[Vec<table::BoundaryVertex>],
    opts: &SearchOptions,
    deadline: Option<Instant>,
) -> Result<(Tables, u64), (PreprocessError, u64)> {
    let count = h.nodes.len();
    let mut views: Vec<Option<BlockView>> = vec![None; count];
    let mut tables: Vec<Option<BlockTable>> = (0..count).map(|_| None).collect();
    let mut expanded = 0u64;
    for level in h.levels() {
        let work: Vec<(usize, BlockView)> = level
            .into_iter()
            .filter(|&b| !bounds[b].is_empty())
            .map(|b| {
                let v = if h.nodes[b].children.is_empty() {
                    BlockView::Leaf(view::build_leaf_view(&inst.graph, h, b, &bounds[b]))
                } else {
                    BlockView::Coarse(view::build_coarse_view(&inst.graph, h, b, bounds))
                };
                (b, v)
            })
            .collect();
        let done: Vec<(usize, Result<BlockTable, PreprocessError>, u64)> = work
            .par_iter()
            .map(|(b, v)| {
                let mut budget = Budget::new(deadline);
                let r = preprocess_block(v, &tables, opts, &mut budget);
                (*b, r, budget.expanded)
            })
            .collect();
        let mut failure = None;
        for (b, r, e) in done {
            expanded += e;
            match r {
                Ok(t) => tables[b] = Some(t),
                Err(err) => failure = failure.or(Some(err)),
            }
        }
        if let Some(err) = failure {
            return Err((err, expanded));
        }
        for (b, v) in work {
            views[b] = Some(v);
        }
    }
    Ok((Tables { views, tables }, expanded))
}

/// Tabulates one block; coarse blocks read their children's finished tables.
pub fn preprocess_block(
    view: &BlockView,
    tables: &[Option<BlockTable>],
    opts: &SearchOptions,
    budget: &mut Budget,
) -> Result<BlockTable, PreprocessError> {
    match view {
        BlockView::Leaf(v) => preprocess_leaf(v, opts, budget),
        BlockView::Coarse(v) => {
            let children: Vec<&BlockTable> = v
                .children
                .iter()
                .map(|&c| tables[c].as_ref().expect("children are tabulated first"))
                .collect();
            preprocess_coarse(v, &children, opts, budget)
        }
    }
}

/// Original-vertex paths realizing the stored entry `(m, touched)` of
/// `block`, one per pair in [`Matching::pairs`] order, oriented low to high.
pub fn reconstruct(
    tables: &Tables,
    block: usize,
    m: Matching,
    touched: u32,
) -> Result<Vec<Vec<Vertex>>, SolveError> {
    let missing = || SolveError::WitnessMissing { block };
    let table = tables.tables[block].as_ref().ok_or_else(missing)?;
    let entry = table.entry(m, touched).ok_or_else(missing)?;
    match (&entry.witness, tables.views[block].as_ref()) {
        (Witness::Paths(paths), Some(BlockView::Leaf(_))) => Ok(paths.clone()),
        (Witness::Combined(w), Some(BlockView::Coarse(view))) => {
            let mut child_paths = Vec::with_capacity(w.choices.len());
            for &(child, cm, ct) in &w.choices {
                let paths = reconstruct(tables, view.children[child], cm, ct)?;
                child_paths.push((child, cm, paths));
            }
            w.segments
                .iter()
                .map(|seg| expand_segment(view, seg, &child_paths).ok_or_else(missing))
                .collect()
        }
        _ => Err(missing()),
    }
}

fn expand_segment(
    view: &CoarseView,
    seg: &table::AuxSegment,
    child_paths: &[(usize, Matching, Vec<Vec<Vertex>>)],
) -> Option<Vec<Vertex>> {
    let mut out = vec![view.nodes[seg.nodes[0]].vertex];
    for i in 1..seg.nodes.len() {
        let to = view.nodes[seg.nodes[i]];
        if seg.via_cut[i] {
            out.push(to.vertex);
            continue;
        }
        let from = view.nodes[seg.nodes[i - 1]];
        let (_, cm, paths) = child_paths.iter().find(|(c, _, _)| *c == from.child)?;
        let (lo, hi) = (from.local.min(to.local), from.local.max(to.local));
        let idx = cm.pairs().position(|p| p == (lo, hi))?;
        let mut piece = paths[idx].clone();
        if from.local > to.local {
            piece.reverse();
        }
        if piece.first() != out.last() {
            return None;
        }
        out.extend_from_slice(&piece[1..]);
    }
    Some(out)
}

/// Leaf-only convenience used by tests and tools.
pub fn preprocess_leaf_unbounded(view: &LeafView, opts: &SearchOptions) -> BlockTable {
    preprocess_leaf(view, opts, &mut Budget::unlimited()).expect("no deadline")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracle::exhaustive_dfs;

    fn path4() -> Instance {
        let g = Graph::from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        Instance::new(g, 0, 3).unwrap()
    }

    #[test]
    fn two_block_path() {
        let inst = path4();
        let h = Hierarchy::flat(&[vec![0, 1], vec![2, 3]]);
        let sol = solve_with_hierarchy(&inst, &h, &LpdpConfig::default(), None).unwrap();
        assert_eq!(sol.status, Status::Solved);
        assert_eq!(sol.weight, 3);
        assert_eq!(sol.path, vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_block_matches_dfs() {
        let inst = path4();
        let sol = solve_with_hierarchy(&inst, &Hierarchy::trivial(4), &LpdpConfig::default(), None).unwrap();
        assert_eq!(sol.path, vec![0, 1, 2, 3]);
        assert_eq!(sol.weight, exhaustive_dfs(&inst, None).weight);
    }

    #[test]
    fn no_path_between_components() {
        let g = Graph::from_edges(4, [(0, 1, 1), (2, 3, 1)]).unwrap();
        let inst = Instance::new(g, 0, 3).unwrap();
        for h in [Hierarchy::trivial(4), Hierarchy::flat(&[vec![0, 1], vec![2, 3]]), Hierarchy::flat(&[vec![0, 2], vec![1, 3]])] {
            let sol = solve_with_hierarchy(&inst, &h, &LpdpConfig::default(), None).unwrap();
            assert_eq!(sol.status, Status::NoPath);
        }
    }

    #[test]
    fn cycle_split_across_blocks() {
        // 6-cycle, s and t adjacent: the long way round has weight 5
        let g = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6, 1))).unwrap();
        let inst = Instance::new(g, 0, 1).unwrap();
        let h = Hierarchy::flat(&[vec![0, 5], vec![1, 2], vec![3, 4]]);
        let sol = solve_with_hierarchy(&inst, &h, &LpdpConfig::default(), None).unwrap();
        assert_eq!(sol.weight, 5);
        assert_eq!(sol.path, vec![0, 5, 4, 3, 2, 1]);
    }

    #[test]
    fn pass_through_vertex_excluded_from_its_block() {
        // Star-ish graph where the best path enters and leaves vertex 2 via
        // cut edges only, so block {2, 3} must not also use 2 internally.
        let g = Graph::from_edges(
            5,
            [(0, 2, 1), (2, 1, 1), (2, 3, 10), (3, 4, 10), (4, 1, 1), (0, 4, 1)],
        )
        .unwrap();
        let inst = Instance::new(g, 0, 1).unwrap();
        let expect = exhaustive_dfs(&inst, None).weight;
        let h = Hierarchy::flat(&[vec![0, 1], vec![2, 3], vec![4]]);
        let sol = solve_with_hierarchy(&inst, &h, &LpdpConfig::default(), None).unwrap();
        assert_eq!(sol.weight, expect);
        assert!(validate_path(&inst.graph, &sol.path, 0, 1).valid);
    }

    fn random_instance(rng: &mut crate::rng::SplitMix64, n: usize, p: f64) -> Instance {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.unit() < p {
                    edges.push((u, v, 1 + rng.below(9)));
                }
            }
        }
        let g = Graph::from_edges(n, edges).unwrap();
        let s = rng.index(n);
        let t = (s + 1 + rng.index(n - 1)) % n;
        Instance::new(g, s, t).unwrap()
    }

    #[test]
    fn random_instances_match_exhaustive_search() {
        let mut rng = crate::rng::SplitMix64::new(11);
        for round in 0..120 {
            let n = 4 + rng.index(11);
            let p = 0.2 + 0.3 * rng.unit();
            let inst = random_instance(&mut rng, n, p);
            let expect = exhaustive_dfs(&inst, None);
            for k in [1, 2, 4] {
                for flat in [false, true] {
                    let cfg = LpdpConfig {
                        k: Some(k),
                        seed: round,
                        flat,
                        boundary_cap: 16,
                        ..LpdpConfig::default()
                    };
                    let sol = solve(&inst, &cfg, None, None).unwrap();
                    assert_eq!(sol.status, expect.status, "round {round} k {k}");
                    assert_eq!(sol.weight, expect.weight, "round {round} k {k}");
                    if sol.status == Status::Solved {
                        let v = validate_path(&inst.graph, &sol.path, inst.source, inst.target);
                        assert!(v.valid && v.weight == sol.weight, "round {round} k {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn leaf_tables_match_brute_force() {
        use crate::oracle::brute_force_block_table;
        let mut rng = crate::rng::SplitMix64::new(5);
        let mut checked = 0;
        while checked < 150 {
            let inst = random_instance(&mut rng, 12, 0.35);
            let (_, h) = partition::partition_hier(&inst.graph, 2, 0.1, checked).unwrap();
            let bounds = view::boundaries(&inst, &h);
            for leaf in h.leaves().collect::<Vec<_>>() {
                let lv = view::build_leaf_view(&inst.graph, &h, leaf, &bounds[leaf]);
                let Ok(oracle) = brute_force_block_table(&lv) else { continue };
                for pruning in [true, false] {
                    let opts = SearchOptions { symmetry_pruning: pruning, ..SearchOptions::default() };
                    let t = preprocess_leaf_unbounded(&lv, &opts);
                    assert_tables_agree(&t, &oracle, lv.boundary.len());
                }
                checked += 1;
            }
        }
    }

    #[test]
    fn coarse_tables_agree_with_and_without_pruning() {
        let mut rng = crate::rng::SplitMix64::new(9);
        for round in 0..40 {
            let inst = random_instance(&mut rng, 14, 0.3);
            let (_, h) = partition::partition_hier(&inst.graph, 4, 0.1, round).unwrap();
            let bounds = view::boundaries(&inst, &h);
            if view::check_boundary_cap(&bounds, 12).is_err() {
                continue;
            }
            let on = build_tables(&inst, &h, &bounds, &SearchOptions::default(), None).unwrap().0;
            let off_opts = SearchOptions { symmetry_pruning: false, ..SearchOptions::default() };
            let off = build_tables(&inst, &h, &bounds, &off_opts, None).unwrap().0;
            for (a, b) in on.tables.iter().zip(&off.tables) {
                if let (Some(a), Some(b)) = (a, b) {
                    assert_tables_agree(a, b, a.boundary().len());
                }
            }
        }
    }

    /// Same answer to every query `(m, excluded)` with `excluded` a subset of
    /// the unmatched-or-matched boundary indices.
    fn assert_tables_agree(a: &BlockTable, b: &BlockTable, size: usize) {
        let mut ms: Vec<Matching> = a.matchings().chain(b.matchings()).collect();
        ms.sort_by_key(|m| format!("{m:?}"));
        ms.dedup();
        for m in ms {
            for excluded in 0..1u32 << size {
                assert_eq!(a.query_weight(m, excluded), b.query_weight(m, excluded), "{m:?} {excluded:b}");
            }
        }
    }
}
