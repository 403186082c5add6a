//! Boundary matchings and per-block tables of best path systems.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::graph::{Vertex, Weight};

/// Largest boundary a table can index (four bits per partner slot).
pub const MAX_BOUNDARY: usize = 16;

/// What a boundary vertex stands for. Ordering fixes the local boundary
/// indices: the two terminal attachments first, then cut vertices by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryKey {
    Source,
    Target,
    Cut(Vertex),
}

/// A boundary vertex and the original vertex it is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryVertex {
    pub key: BoundaryKey,
    pub vertex: Vertex,
}

/// Partial matching on at most 16 boundary indices, stored as a partner
/// nibble per index (an index that is its own partner is unmatched).
/// The encoding is canonical, so equal matchings hash equally.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching(u64);

impl Matching {
    pub const EMPTY: Matching = Matching(0xFEDC_BA98_7654_3210);

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Matching {
        pairs
            .iter()
            .fold(Matching::EMPTY, |m, &(a, b)| m.with_pair(a, b))
    }

    #[inline]
    pub fn partner(self, i: usize) -> Option<usize> {
        let p = ((self.0 >> (4 * i)) & 0xF) as usize;
        (p != i).then_some(p)
    }

    #[inline]
    pub fn is_matched(self, i: usize) -> bool {
        self.partner(i).is_some()
    }

    /// Adds the pair `{a, b}`; both must currently be unmatched.
    #[inline]
    pub fn with_pair(self, a: usize, b: usize) -> Matching {
        debug_assert!(a != b && a < MAX_BOUNDARY && b < MAX_BOUNDARY);
        debug_assert!(!self.is_matched(a) && !self.is_matched(b));
        let clear = !((0xF << (4 * a)) | (0xF << (4 * b)));
        Matching((self.0 & clear) | ((b as u64) << (4 * a)) | ((a as u64) << (4 * b)))
    }

    pub fn is_empty(self) -> bool {
        self == Matching::EMPTY
    }

    /// Pairs `(low, high)` in ascending order of `low`.
    pub fn pairs(self) -> impl Iterator<Item = (usize, usize)> {
        (0..MAX_BOUNDARY).filter_map(move |i| match self.partner(i) {
            Some(p) if p > i => Some((i, p)),
            _ => None,
        })
    }

    pub fn len(self) -> usize {
        self.pairs().count()
    }

    /// Bitmask of matched indices.
    pub fn vertex_mask(self) -> u32 {
        (0..MAX_BOUNDARY)
            .filter(|&i| self.is_matched(i))
            .fold(0, |m, i| m | 1 << i)
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// One realized path system of a block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    /// Boundary vertices whose attached vertex the system uses.
    pub touched: u32,
    pub weight: Weight,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Original-vertex sequences, one per pair in [`Matching::pairs`] order,
    /// each running from the low index's attachment to the high one's.
    Paths(Vec<Vec<Vertex>>),
    /// Combination of child entries along auxiliary-graph segments.
    Combined(CombinedWitness),
}

/// A path through a coarse view's auxiliary graph: `nodes[0]` is a
/// boundary vertex of the block, and `via_cut[i]` says whether the step
/// into `nodes[i]` (for `i >= 1`) used an inter-child edge or a child clique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxSegment {
    pub nodes: Vec<usize>,
    pub via_cut: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinedWitness {
    /// One segment per pair in [`Matching::pairs`] order, oriented low to high.
    pub segments: Vec<AuxSegment>,
    /// `(child position, child matching, child entry's touched set)`.
    pub choices: Vec<(usize, Matching, u32)>,
}

/// Best path systems of one block keyed by `(matching, touched set)`.
#[derive(Clone, Debug, Default)]
pub struct BlockTable {
    boundary: Vec<BoundaryVertex>,
    entries: FxHashMap<Matching, Vec<Entry>>,
    len: usize,
}

impl BlockTable {
    pub fn boundary(&self) -> &[BoundaryVertex] {
        &self.boundary
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entries(&self, m: Matching) -> &[Entry] {
        self.entries.get(&m).map_or(&[], Vec::as_slice)
    }

    pub fn matchings(&self) -> impl Iterator<Item = Matching> + '_ {
        self.entries.keys().copied()
    }

    /// Stored entry with exactly this touched set, if any.
    pub fn entry(&self, m: Matching, touched: u32) -> Option<&Entry> {
        self.entries(m).iter().find(|e| e.touched == touched)
    }

    /// Best entry realizing `m` without touching any vertex of `excluded`.
    pub fn query(&self, m: Matching, excluded: u32) -> Option<&Entry> {
        let mut best: Option<&Entry> = None;
        for e in self.entries(m) {
            if e.touched & excluded == 0 && best.map_or(true, |b| e.weight > b.weight) {
                best = Some(e);
            }
        }
        best
    }

    pub fn query_weight(&self, m: Matching, excluded: u32) -> Option<Weight> {
        self.query(m, excluded).map(|e| e.weight)
    }
}

/// Accumulates the best entry per `(matching, touched)` during a search.
#[derive(Debug)]
pub struct TableBuilder {
    boundary: Vec<BoundaryVertex>,
    best: FxHashMap<(Matching, u32), (Weight, Witness)>,
}

impl TableBuilder {
    pub fn new(boundary: Vec<BoundaryVertex>) -> TableBuilder {
        assert!(boundary.len() <= MAX_BOUNDARY);
        TableBuilder {
            boundary,
            best: FxHashMap::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }

    /// Keeps `weight` if it beats the stored value; the witness is only
    /// built when it does.
    #[inline]
    pub fn offer(
        &mut self,
        m: Matching,
        touched: u32,
        weight: Weight,
        witness: impl FnOnce() -> Witness,
    ) {
        match self.best.entry((m, touched)) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                if weight > o.get().0 {
                    o.insert((weight, witness()));
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert((weight, witness()));
            }
        }
    }

    /// Groups entries by matching and drops entries dominated by one with a
    /// subset touched set and at least the same weight; queries are unaffected.
    pub fn finish(self) -> BlockTable {
        let mut grouped: FxHashMap<Matching, Vec<Entry>> = FxHashMap::default();
        for ((m, touched), (weight, witness)) in self.best {
            grouped.entry(m).or_default().push(Entry {
                touched,
                weight,
                witness,
            });
        }
        let mut len = 0;
        for list in grouped.values_mut() {
            list.sort_by(|a, b| {
                b.weight
                    .cmp(&a.weight)
                    .then(a.touched.count_ones().cmp(&b.touched.count_ones()))
                    .then(a.touched.cmp(&b.touched))
            });
            let mut kept: Vec<Entry> = Vec::with_capacity(list.len());
            for e in list.drain(..) {
                if !kept.iter().any(|k| k.touched & !e.touched == 0) {
                    kept.push(e);
                }
            }
            kept.sort_by_key(|e| e.touched);
            len += kept.len();
            *list = kept;
        }
        BlockTable {
            boundary: self.boundary,
            entries: grouped,
            len,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_matching_has_no_pairs() {
        assert!(Matching::EMPTY.is_empty());
        assert_eq!(Matching::EMPTY.pairs().count(), 0);
        assert_eq!(Matching::EMPTY.vertex_mask(), 0);
    }

    #[test]
    fn pair_order_is_canonical() {
        let a = Matching::from_pairs(&[(3, 1), (0, 5)]);
        let b = Matching::from_pairs(&[(5, 0), (1, 3)]);
        assert_eq!(a, b);
        assert_eq!(a.pairs().collect::<Vec<_>>(), vec![(0, 5), (1, 3)]);
        assert_eq!(a.vertex_mask(), 0b101011);
        assert_eq!(a.partner(5), Some(0));
        assert_eq!(a.partner(2), None);
    }

    #[test]
    fn highest_index_round_trips() {
        let m = Matching::from_pairs(&[(14, 15)]);
        assert_eq!(m.pairs().collect::<Vec<_>>(), vec![(14, 15)]);
    }

    fn bv(i: usize) -> BoundaryVertex {
        BoundaryVertex {
            key: BoundaryKey::Cut(i),
            vertex: i,
        }
    }

    #[test]
    fn query_respects_exclusions_and_drops_dominated() {
        let m = Matching::from_pairs(&[(0, 1)]);
        let mut b = TableBuilder::new((0..3).map(bv).collect());
        let w = || Witness::Paths(vec![]);
        b.offer(m, 0b011, 4, w);
        b.offer(m, 0b111, 9, w);
        b.offer(m, 0b111, 7, w);
        // dominated by 0b011 -> 4
        b.offer(m, 0b111 & 0b011, 3, w);
        let t = b.finish();
        assert_eq!(t.len(), 2);
        assert_eq!(t.query_weight(m, 0), Some(9));
        assert_eq!(t.query_weight(m, 0b100), Some(4));
        assert_eq!(t.query_weight(m, 0b001), None);
        assert_eq!(t.query_weight(Matching::EMPTY, 0), None);
    }

    proptest! {
        #[test]
        fn from_pairs_matches_pairs(perm in Just((0..16usize).collect::<Vec<_>>()).prop_shuffle(), k in 0usize..=8) {
            let pairs: Vec<(usize, usize)> = (0..k).map(|i| (perm[2 * i], perm[2 * i + 1])).collect();
            let m = Matching::from_pairs(&pairs);
            let mut expect: Vec<_> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            expect.sort();
            prop_assert_eq!(m.pairs().collect::<Vec<_>>(), expect);
            prop_assert_eq!(m.len(), k);
        }
    }
}
