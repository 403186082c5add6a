//! Combination search over a coarse block's auxiliary graph.
//!
//! Nodes are the children's boundary vertices. A step either follows a child
//! clique edge, which adds a pair to that child's matching, or an original
//! edge between two children. Two clique steps never meet at a node (their
//! child paths would share that vertex); a node entered and left without a
//! clique step is used by the path itself, so its child must avoid it and it
//! joins the child's excluded set. Every partial choice is checked against
//! the child tables before the search goes deeper.
//!
//! A block's touched set depends on which child entries are used, so at each
//! completed segment the search combines, per touched child, the entries
//! compatible with its current `(matching, excluded)` state, grouped by the
//! outer boundary vertices they use.

use std::rc::Rc;

use rustc_hash::FxHashMap;

use crate::graph::Weight;
use crate::oracle::Budget;
use crate::solver::table::{
    AuxSegment, BlockTable, CombinedWitness, Matching, TableBuilder, Witness,
};
use crate::solver::view::CoarseView;
use crate::solver::{PreprocessError, SearchOptions};

/// Child entries compatible with a query, best per lifted touched set:
/// `(outer touched mask, weight, child touched mask)`.
type Front = Rc<Vec<(u32, Weight, u32)>>;

pub fn preprocess_coarse(
    view: &CoarseView,
    child_tables: &[&BlockTable],
    opts: &SearchOptions,
    budget: &mut Budget,
) -> Result<BlockTable, PreprocessError> {
    assert_eq!(child_tables.len(), view.children.len());
    // outer boundary indices sharing an attached vertex with each node
    let lift: Vec<u32> = view
        .nodes
        .iter()
        .map(|n| {
            view.boundary
                .iter()
                .enumerate()
                .filter(|(_, b)| b.vertex == n.vertex)
                .fold(0, |m, (i, _)| m | 1 << i)
        })
        .collect();
    let mut search = CoarseSearch {
        view,
        tables: child_tables,
        opts,
        budget,
        lift,
        visited: vec![false; view.nodes.len()],
        child_matching: vec![Matching::EMPTY; view.children.len()],
        child_excluded: vec![0; view.children.len()],
        matching: Matching::EMPTY,
        trail: Vec::new(),
        segments: Vec::new(),
        cut_weight: 0,
        fronts: FxHashMap::default(),
        builder: TableBuilder::new(view.boundary.clone()),
        failure: None,
    };
    search.builder.offer(Matching::EMPTY, 0, 0, || {
        Witness::Combined(CombinedWitness {
            segments: Vec::new(),
            choices: Vec::new(),
        })
    });
    search.start_segments(0);
    if let Some(err) = search.failure {
        return Err(err);
    }
    Ok(search.builder.finish())
}

struct CoarseSearch<'a> {
    view: &'a CoarseView,
    tables: &'a [&'a BlockTable],
    opts: &'a SearchOptions,
    budget: &'a mut Budget,
    lift: Vec<u32>,
    visited: Vec<bool>,
    child_matching: Vec<Matching>,
    child_excluded: Vec<u32>,
    matching: Matching,
    /// `(node, entered via cut edge)` along the search path.
    trail: Vec<(usize, bool)>,
    /// `(root, end, start offset in trail)` per segment.
    segments: Vec<(usize, usize, usize)>,
    cut_weight: Weight,
    fronts: FxHashMap<(usize, Matching, u32), Front>,
    builder: TableBuilder,
    failure: Option<PreprocessError>,
}

impl CoarseSearch<'_> {
    fn front(&mut self, child: usize, m: Matching, excluded: u32) -> Front {
        if let Some(f) = self.fronts.get(&(child, m, excluded)) {
            return f.clone();
        }
        let nodes = &self.view.child_nodes[child];
        let lift = &self.lift;
        let lifted = |touched: u32| {
            (0..nodes.len())
                .filter(|&i| touched & (1 << i) != 0)
                .fold(0, |acc, i| acc | lift[nodes[i]])
        };
        let mut best: FxHashMap<u32, (Weight, u32)> = FxHashMap::default();
        for e in self.tables[child].entries(m) {
            if e.touched & excluded != 0 {
                continue;
            }
            let key = lifted(e.touched);
            let slot = best.entry(key).or_insert((e.weight, e.touched));
            if e.weight > slot.0 || (e.weight == slot.0 && e.touched < slot.1) {
                *slot = (e.weight, e.touched);
            }
        }
        let mut all: Vec<(u32, Weight, u32)> = best.into_iter().map(|(k, (w, t))| (k, w, t)).collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.count_ones().cmp(&b.0.count_ones())).then(a.0.cmp(&b.0)));
        let mut kept: Vec<(u32, Weight, u32)> = Vec::with_capacity(all.len());
        for e in all {
            if !kept.iter().any(|k| k.0 & !e.0 == 0) {
                kept.push(e);
            }
        }
        kept.sort();
        let f = Rc::new(kept);
        self.fronts.insert((child, m, excluded), f.clone());
        f
    }

    fn feasible(&mut self, child: usize, m: Matching, excluded: u32) -> bool {
        !self.front(child, m, excluded).is_empty()
    }

    fn start_segments(&mut self, min_root: usize) {
        let first = if self.opts.symmetry_pruning { min_root } else { 0 };
        for root in first..self.view.boundary.len() {
            if self.failure.is_some() {
                return;
            }
            let node = self.view.boundary_node[root];
            if self.visited[node] {
                continue;
            }
            self.visited[node] = true;
            self.segments.push((root, usize::MAX, self.trail.len()));
            self.trail.push((node, false));
            self.extend(node, false, root);
            self.trail.pop();
            self.segments.pop();
            self.visited[node] = false;
        }
    }

    /// `via_clique`: whether `v` was entered by a child clique step.
    fn extend(&mut self, v: usize, via_clique: bool, root: usize) {
        if !self.budget.tick() {
            self.failure = Some(PreprocessError::Timeout);
            return;
        }
        let view = self.view;
        let node = view.nodes[v];
        let child = node.child;
        let bit = 1u32 << node.local;
        let excluded = self.child_excluded[child];
        let m = self.child_matching[child];
        // Leaving `v` without a clique step makes it a pass-through vertex.
        let through_ok = via_clique || self.feasible(child, m, excluded | bit);

        if let Some(outer) = node.outer {
            if outer != root && (!self.opts.symmetry_pruning || outer > root) && through_ok {
                if !via_clique {
                    self.child_excluded[child] |= bit;
                }
                self.close_segment(root, outer);
                self.child_excluded[child] = excluded;
                if self.failure.is_some() {
                    return;
                }
            }
        }

        if !via_clique {
            for local in 0..view.child_nodes[child].len() {
                let w = view.child_nodes[child][local];
                if self.visited[w] {
                    continue;
                }
                let next = m.with_pair(node.local, local);
                if !self.feasible(child, next, excluded) {
                    continue;
                }
                self.child_matching[child] = next;
                self.visited[w] = true;
                self.trail.push((w, false));
                self.extend(w, true, root);
                self.trail.pop();
                self.visited[w] = false;
                self.child_matching[child] = m;
                if self.failure.is_some() {
                    return;
                }
            }
        }

        if !through_ok {
            return;
        }
        if !via_clique {
            self.child_excluded[child] |= bit;
        }
        for &(w, weight) in &view.cut_adj[v] {
            if self.visited[w] {
                continue;
            }
            self.visited[w] = true;
            self.trail.push((w, true));
            self.cut_weight += weight;
            self.extend(w, false, root);
            self.cut_weight -= weight;
            self.trail.pop();
            self.visited[w] = false;
            if self.failure.is_some() {
                break;
            }
        }
        self.child_excluded[child] = excluded;
    }

    fn close_segment(&mut self, root: usize, end: usize) {
        let saved = self.matching;
        self.matching = saved.with_pair(root, end);
        self.segments.last_mut().unwrap().1 = end;
        self.record();
        if self.builder.len() > self.opts.max_entries {
            self.failure = Some(PreprocessError::TableBlowup {
                entries: self.builder.len(),
            });
        } else if self.failure.is_none() {
            self.start_segments(root + 1);
        }
        self.segments.last_mut().unwrap().1 = usize::MAX;
        self.matching = saved;
    }

    fn record(&mut self) {
        let visited_lift = self
            .trail
            .iter()
            .fold(0u32, |acc, &(v, _)| acc | self.lift[v]);
        let mut parts: Vec<(usize, Matching, Front)> = Vec::new();
        for child in 0..self.view.children.len() {
            let (m, c) = (self.child_matching[child], self.child_excluded[child]);
            if m.is_empty() {
                // an empty matching touches nothing and weighs nothing
                continue;
            }
            let f = self.front(child, m, c);
            debug_assert!(!f.is_empty());
            parts.push((child, m, f));
        }
        // odometer over one front entry per touched child
        let mut pick = vec![0usize; parts.len()];
        loop {
            let mut touched = visited_lift;
            let mut weight = self.cut_weight;
            for (i, (_, _, f)) in parts.iter().enumerate() {
                let (mask, w, _) = f[pick[i]];
                touched |= mask;
                weight += w;
            }
            let (segments, trail, view) = (&self.segments, &self.trail, self.view);
            self.builder.offer(self.matching, touched, weight, || {
                let choices = parts
                    .iter()
                    .zip(&pick)
                    .map(|((child, m, f), &p)| (*child, *m, f[p].2))
                    .collect();
                Witness::Combined(CombinedWitness {
                    segments: aux_segments(view, segments, trail),
                    choices,
                })
            });
            let mut i = 0;
            loop {
                if i == parts.len() {
                    return;
                }
                pick[i] += 1;
                if pick[i] < parts[i].2.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }
}

fn aux_segments(
    view: &CoarseView,
    segments: &[(usize, usize, usize)],
    trail: &[(usize, bool)],
) -> Vec<AuxSegment> {
    let mut out: Vec<(usize, AuxSegment)> = segments
        .iter()
        .enumerate()
        .map(|(i, &(root, end, start))| {
            let stop = segments.get(i + 1).map_or(trail.len(), |s| s.2);
            let steps = &trail[start..stop];
            let mut nodes: Vec<usize> = steps.iter().map(|&(v, _)| v).collect();
            // via_cut[i] describes the step into nodes[i]
            let mut via_cut: Vec<bool> = steps.iter().map(|&(_, c)| c).collect();
            if root > end {
                nodes.reverse();
                via_cut.remove(0);
                via_cut.reverse();
                via_cut.insert(0, false);
            }
            debug_assert_eq!(view.nodes[nodes[0]].outer, Some(root.min(end)));
            (root.min(end), AuxSegment { nodes, via_cut })
        })
        .collect();
    out.sort_by_key(|(low, _)| *low);
    out.into_iter().map(|(_, s)| s).collect()
}
