//! Segment search over a leaf block.
//!
//! An exhaustive DFS whose search path is cut into segments, each running
//! from one boundary vertex to another. Every time a segment completes, the
//! completed segments form a vertex-disjoint path system and are offered to
//! the table under `(matching, touched)`. With symmetry pruning a segment
//! may only end at a boundary vertex above its root, and a new segment may
//! only start above every earlier root, so each system is found once.

use crate::graph::Weight;
use crate::oracle::Budget;
use crate::solver::table::{BlockTable, Matching, TableBuilder, Witness};
use crate::solver::view::LeafView;
use crate::solver::{PreprocessError, SearchOptions};

pub fn preprocess_leaf(
    view: &LeafView,
    opts: &SearchOptions,
    budget: &mut Budget,
) -> Result<BlockTable, PreprocessError> {
    let n = view.inner_count();
    let mut ends_at = vec![Vec::new(); n];
    let mut attach_mask = vec![0u32; n];
    for (i, &a) in view.attached.iter().enumerate() {
        ends_at[a].push(i);
        attach_mask[a] |= 1 << i;
    }
    let mut search = LeafSearch {
        view,
        opts,
        budget,
        ends_at,
        attach_mask,
        used: vec![false; n],
        stamp: vec![0; n],
        epoch: 0,
        frontier: Vec::with_capacity(n),
        endpoints: 0,
        touched: 0,
        matching: Matching::EMPTY,
        segments: Vec::new(),
        path: Vec::new(),
        weight: 0,
        builder: TableBuilder::new(view.boundary.clone()),
        failure: None,
    };
    search
        .builder
        .offer(Matching::EMPTY, 0, 0, || Witness::Paths(Vec::new()));
    search.start_segments(0);
    if let Some(err) = search.failure {
        return Err(err);
    }
    Ok(search.builder.finish())
}

struct LeafSearch<'a> {
    view: &'a LeafView,
    opts: &'a SearchOptions,
    budget: &'a mut Budget,
    /// Boundary indices hanging off each inner vertex.
    ends_at: Vec<Vec<usize>>,
    attach_mask: Vec<u32>,
    used: Vec<bool>,
    /// Reachability scratch: a vertex is seen in the current probe iff its stamp equals `epoch`.
    stamp: Vec<u32>,
    epoch: u32,
    frontier: Vec<usize>,
    endpoints: u32,
    touched: u32,
    matching: Matching,
    /// `(root, end, start offset in path)` per segment, the last one possibly open.
    segments: Vec<(usize, usize, usize)>,
    path: Vec<usize>,
    weight: Weight,
    builder: TableBuilder,
    failure: Option<PreprocessError>,
}

impl LeafSearch<'_> {
    fn start_segments(&mut self, min_root: usize) {
        let b = self.view.boundary.len();
        let first = if self.opts.symmetry_pruning { min_root } else { 0 };
        for root in first..b {
            if self.failure.is_some() {
                return;
            }
            let a = self.view.attached[root];
            if self.endpoints & (1 << root) != 0 || self.used[a] {
                continue;
            }
            self.endpoints |= 1 << root;
            self.enter(a);
            self.segments.push((root, usize::MAX, self.path.len() - 1));
            self.extend(a, root);
            self.segments.pop();
            self.leave(a);
            self.endpoints &= !(1 << root);
        }
    }

    #[inline]
    fn enter(&mut self, v: usize) {
        self.used[v] = true;
        self.touched |= self.attach_mask[v];
        self.path.push(v);
    }

    #[inline]
    fn leave(&mut self, v: usize) {
        self.used[v] = false;
        self.touched &= !self.attach_mask[v];
        self.path.pop();
    }

    fn extend(&mut self, v: usize, root: usize) {
        if !self.budget.tick() {
            self.failure = Some(PreprocessError::Timeout);
            return;
        }
        for i in 0..self.ends_at[v].len() {
            let end = self.ends_at[v][i];
            if end == root
                || self.endpoints & (1 << end) != 0
                || (self.opts.symmetry_pruning && end < root)
            {
                continue;
            }
            self.close_segment(root, end);
            if self.failure.is_some() {
                return;
            }
        }
        if !self.can_still_close(v, root) {
            return;
        }
        let view = self.view;
        for &(u, w) in &view.adj[v] {
            if self.used[u] {
                continue;
            }
            self.enter(u);
            self.weight += w;
            self.extend(u, root);
            self.weight -= w;
            self.leave(u);
            if self.failure.is_some() {
                return;
            }
        }
    }

    /// Whether some boundary vertex the open segment may still end at is
    /// reachable from `v` through unused vertices.
    fn can_still_close(&mut self, v: usize, root: usize) -> bool {
        let b = self.view.boundary.len() as u32;
        let all = if b == 32 { u32::MAX } else { (1u32 << b) - 1 };
        let mut eligible = all & !self.endpoints & !(1 << root);
        if self.opts.symmetry_pruning {
            eligible &= !((2u32 << root) - 1);
        }
        if eligible == 0 {
            return false;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.frontier.clear();
        self.frontier.push(v);
        self.stamp[v] = epoch;
        while let Some(x) = self.frontier.pop() {
            for &(u, _) in &self.view.adj[x] {
                if self.used[u] || self.stamp[u] == epoch {
                    continue;
                }
                if self.attach_mask[u] & eligible != 0 {
                    return true;
                }
                self.stamp[u] = epoch;
                self.frontier.push(u);
            }
        }
        false
    }

    fn close_segment(&mut self, root: usize, end: usize) {
        let saved = self.matching;
        self.matching = saved.with_pair(root, end);
        self.endpoints |= 1 << end;
        self.segments.last_mut().unwrap().1 = end;

        let (segments, path, view) = (&self.segments, &self.path, self.view);
        self.builder
            .offer(self.matching, self.touched, self.weight, || {
                witness(view, segments, path)
            });
        if self.builder.len() > self.opts.max_entries {
            self.failure = Some(PreprocessError::TableBlowup {
                entries: self.builder.len(),
            });
        } else {
            self.start_segments(root + 1);
        }

        self.segments.last_mut().unwrap().1 = usize::MAX;
        self.endpoints &= !(1 << end);
        self.matching = saved;
    }
}

/// Paths per pair in ascending order of the pair's low index, oriented low to high.
fn witness(view: &LeafView, segments: &[(usize, usize, usize)], path: &[usize]) -> Witness {
    let mut paths: Vec<(usize, Vec<usize>)> = segments
        .iter()
        .enumerate()
        .map(|(i, &(root, end, start))| {
            let stop = segments.get(i + 1).map_or(path.len(), |s| s.2);
            let mut p: Vec<usize> = path[start..stop].iter().map(|&v| view.original[v]).collect();
            if root > end {
                p.reverse();
            }
            (root.min(end), p)
        })
        .collect();
    paths.sort_by_key(|(low, _)| *low);
    Witness::Paths(paths.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::table::BoundaryKey;

    fn opts(pruning: bool) -> SearchOptions {
        SearchOptions {
            symmetry_pruning: pruning,
            ..SearchOptions::default()
        }
    }

    fn run(view: &LeafView, pruning: bool) -> BlockTable {
        preprocess_leaf(view, &opts(pruning), &mut Budget::unlimited()).unwrap()
    }

    #[test]
    fn isolated_vertex() {
        let view = LeafView::new(0, vec![7], &[], vec![(BoundaryKey::Cut(7), 0)]);
        let t = run(&view, true);
        assert_eq!(t.len(), 1);
        assert_eq!(t.query_weight(Matching::EMPTY, 0), Some(0));
        assert_eq!(t.query_weight(Matching::EMPTY, 1), Some(0));
    }

    #[test]
    fn single_edge() {
        let view = LeafView::new(
            0,
            vec![3, 4],
            &[(0, 1, 5)],
            vec![(BoundaryKey::Cut(3), 0), (BoundaryKey::Cut(4), 1)],
        );
        let t = run(&view, true);
        let m = Matching::from_pairs(&[(0, 1)]);
        let e = t.entry(m, 0b11).unwrap();
        assert_eq!(e.weight, 5);
        assert_eq!(e.witness, Witness::Paths(vec![vec![3, 4]]));
        assert_eq!(t.query_weight(Matching::EMPTY, 0b11), Some(0));
        assert_eq!(t.query_weight(m, 0b01), None);
    }

    #[test]
    fn triangle_takes_the_long_way() {
        // a=0, b=1, c=2 with ab=1, bc=2, ca=4; boundary on a and b
        let view = LeafView::new(
            0,
            vec![0, 1, 2],
            &[(0, 1, 1), (1, 2, 2), (0, 2, 4)],
            vec![(BoundaryKey::Cut(0), 0), (BoundaryKey::Cut(1), 1)],
        );
        let t = run(&view, true);
        let m = Matching::from_pairs(&[(0, 1)]);
        assert_eq!(t.query_weight(m, 0), Some(6));
        let best = t.query(m, 0).unwrap();
        assert_eq!(best.witness, Witness::Paths(vec![vec![0, 2, 1]]));
    }

    #[test]
    fn terminal_and_cut_vertex_share_an_attachment() {
        // s = 0 is also a cut vertex; the pair (Source, Cut(0)) is the path [0]
        let view = LeafView::new(
            0,
            vec![0, 1],
            &[(0, 1, 3)],
            vec![
                (BoundaryKey::Source, 0),
                (BoundaryKey::Cut(0), 0),
                (BoundaryKey::Cut(1), 1),
            ],
        );
        let t = run(&view, true);
        assert_eq!(t.query_weight(Matching::from_pairs(&[(0, 1)]), 0), Some(0));
        assert_eq!(t.query_weight(Matching::from_pairs(&[(0, 2)]), 0), Some(3));
        // source and b_0 both need vertex 0
        assert_eq!(t.query_weight(Matching::from_pairs(&[(0, 2)]), 0b010), None);
        assert_eq!(t.query_weight(Matching::from_pairs(&[(1, 2)]), 0), Some(3));
    }

    #[test]
    fn timeout_is_reported() {
        let n = 30;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, 1));
            }
        }
        let view = LeafView::new(
            0,
            (0..n).collect(),
            &edges,
            vec![(BoundaryKey::Cut(0), 0), (BoundaryKey::Cut(1), 1)],
        );
        let mut budget = Budget::new(Some(std::time::Instant::now()));
        let err = preprocess_leaf(&view, &opts(true), &mut budget).unwrap_err();
        assert_eq!(err, PreprocessError::Timeout);
    }

    #[test]
    fn entry_cap_is_enforced() {
        let view = LeafView::new(
            0,
            vec![0, 1, 2],
            &[(0, 1, 1), (1, 2, 1), (0, 2, 1)],
            vec![
                (BoundaryKey::Cut(0), 0),
                (BoundaryKey::Cut(1), 1),
                (BoundaryKey::Cut(2), 2),
            ],
        );
        let o = SearchOptions {
            max_entries: 2,
            ..SearchOptions::default()
        };
        let err = preprocess_leaf(&view, &o, &mut Budget::unlimited()).unwrap_err();
        assert!(matches!(err, PreprocessError::TableBlowup { .. }));
    }
}
