//! Points, directed arcs and occupied/free configurations on the circle
//! `R/Z`.
//!
//! Occupied components are *closed* arcs: a zero-length arc is a legitimate
//! point component, and an arc touching another arc at a single point merges
//! with it.  Wrapping arcs are stored as `(start, length)` so they never need
//! a split representation.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::coord::Coord;
use crate::{Error, Result};

/// A point on `R/Z`, kept in canonical form `0 <= position < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CirclePoint<C: Coord>(C);

impl<C: Coord> CirclePoint<C> {
    pub fn new(position: C) -> Self {
        CirclePoint(position.wrap_unit())
    }

    pub fn position(self) -> C {
        self.0
    }

    /// Rotation by `alpha`.
    pub fn rotate(self, alpha: C) -> Self {
        CirclePoint::new(self.0 + alpha)
    }
}

/// Distance from `a` to `b` in the canonical positive direction; in `[0, 1)`.
pub fn dist_pos<C: Coord>(a: CirclePoint<C>, b: CirclePoint<C>) -> C {
    (b.position() - a.position()).wrap_unit()
}

/// A closed directed arc `[start, start + length]` on the circle.
///
/// `length == 0` encodes a point component; `length == 1` covers everything.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedArc<C: Coord> {
    pub start: CirclePoint<C>,
    pub length: C,
}

impl<C: Coord> DirectedArc<C> {
    pub fn new(start: C, length: C) -> Result<Self> {
        if length < C::zero() || length > C::one() {
            return Err(Error::BadArc(length.to_f64()));
        }
        Ok(DirectedArc {
            start: CirclePoint::new(start),
            length,
        })
    }

    /// End point `start + length` (canonical representative).
    pub fn end(&self) -> CirclePoint<C> {
        self.start.rotate(self.length)
    }

    /// Closed-set membership: boundary points count as inside.
    pub fn contains(&self, p: CirclePoint<C>) -> bool {
        dist_pos(self.start, p) <= self.length
    }

    pub fn rotate(&self, alpha: C) -> Self {
        DirectedArc {
            start: self.start.rotate(alpha),
            length: self.length,
        }
    }
}

/// The occupied set after `step_index` dispersions: pairwise disjoint closed
/// arcs, cyclically sorted by start.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupiedConfig<C: Coord> {
    components: Vec<DirectedArc<C>>,
    step_index: u32,
}

/// Anchored block labeling `O_0, F_0, ..., O_{N-1}, F_{N-1}` with
/// `0 in O_0 ∪ F_0`.
#[derive(Debug, Clone)]
pub struct BlockLabeling<C: Coord> {
    pub occupied_starts: Vec<CirclePoint<C>>,
    pub occupied_lengths: Vec<C>,
    pub free_lengths: Vec<C>,
    /// `-min O_0 mod 1`.
    pub shift: C,
}

impl<C: Coord> Default for OccupiedConfig<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Coord> OccupiedConfig<C> {
    pub fn new() -> Self {
        OccupiedConfig {
            components: Vec::new(),
            step_index: 0,
        }
    }

    pub fn components(&self) -> &[DirectedArc<C>] {
        &self.components
    }

    pub fn step_index(&self) -> u32 {
        self.step_index
    }

    pub fn set_step_index(&mut self, k: u32) {
        self.step_index = k;
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_measure(&self) -> C {
        self.components
            .iter()
            .fold(C::zero(), |acc, a| acc + a.length)
    }

    /// Index of the component containing `p`, if any (closed-set test).
    pub fn component_containing(&self, p: CirclePoint<C>) -> Option<usize> {
        self.components.iter().position(|a| a.contains(p))
    }

    /// Index of the first component whose start lies strictly ahead of `p`
    /// (cyclically), together with the positive distance to it.  `None` when
    /// the configuration is empty.
    pub fn next_start_after(&self, p: CirclePoint<C>) -> Option<(usize, C)> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut d = dist_pos(p, a.start);
                // a component starting exactly at p is a full turn ahead
                if d == C::zero() {
                    d = C::one();
                }
                (i, d)
            })
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
    }

    /// Index of the first component whose *end* lies strictly behind `p`
    /// (cyclically), with the positive distance back to it.
    pub fn prev_end_before(&self, p: CirclePoint<C>) -> Option<(usize, C)> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut d = dist_pos(a.end(), p);
                if d == C::zero() {
                    d = C::one();
                }
                (i, d)
            })
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
    }

    fn sort_components(&mut self) {
        self.components
            .sort_by(|a, b| a.start.position().partial_cmp(&b.start.position()).unwrap());
    }

    /// Replace components by an explicit list (sorted, invariants asserted in
    /// debug builds).  Used by the relaxation engine, which knows exactly
    /// which components merged.  Components in exact contact are coalesced:
    /// closed arcs sharing an endpoint are one component (float rounding can
    /// collapse a sliver gap onto equality; rationals never hit this unless
    /// the caller really produced touching arcs).
    pub fn rebuild(&mut self, comps: Vec<DirectedArc<C>>) {
        self.components = comps;
        self.sort_components();
        self.coalesce_touching();
        self.debug_assert_disjoint();
    }

    fn coalesce_touching(&mut self) {
        loop {
            let n = self.components.len();
            if n <= 1 {
                return;
            }
            let mut touch = None;
            for i in 0..n {
                let a = self.components[i];
                let b = self.components[(i + 1) % n];
                if a.length < C::one() && dist_pos(a.end(), b.start) == C::zero() {
                    touch = Some(i);
                    break;
                }
            }
            match touch {
                Some(i) => {
                    let b = self.components[(i + 1) % n];
                    let merged_len = self.components[i].length + b.length;
                    self.components[i].length = if merged_len > C::one() {
                        C::one()
                    } else {
                        merged_len
                    };
                    self.components.remove((i + 1) % n);
                    self.sort_components();
                }
                None => return,
            }
        }
    }

    pub fn debug_assert_disjoint(&self) {
        #[cfg(debug_assertions)]
        {
            let n = self.components.len();
            if n <= 1 {
                return;
            }
            for i in 0..n {
                let a = &self.components[i];
                let b = &self.components[(i + 1) % n];
                let gap = dist_pos(a.end(), b.start);
                assert!(
                    gap > C::zero(),
                    "components must be pairwise disjoint closed sets: {:?} then {:?}",
                    a,
                    b
                );
            }
        }
    }

    /// Insert a covered arc, merging any components it touches.  Returns the
    /// merged (absorbed) prior components in cyclic order starting from the
    /// arc start.
    pub fn insert_covered_arc(&mut self, arc: DirectedArc<C>) -> Result<Vec<DirectedArc<C>>> {
        if arc.length > C::one() {
            return Err(Error::BadArc(arc.length.to_f64()));
        }
        let s = arc.start;
        let len = arc.length;

        // Work in the frame anchored at the arc start.  `reach` of a touching
        // component is its extent in that frame; components overlapping from
        // behind get a negative left reach.
        let mut touched: Vec<(usize, C, C)> = Vec::new(); // (idx, left, right)
        for (i, c) in self.components.iter().enumerate() {
            let fwd = dist_pos(s, c.start); // where the component starts, ahead of s
            let back = dist_pos(c.start, s); // how far s is inside/past it
            if back <= c.length {
                // component covers s (or touches it from behind)
                touched.push((i, C::zero() - back, c.length - back));
            } else if fwd <= len {
                touched.push((i, fwd, fwd + c.length));
            }
        }
        touched.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

        let mut left = C::zero();
        let mut right = len;
        for &(_, l, r) in &touched {
            if l < left {
                left = l;
            }
            if r > right {
                right = r;
            }
        }
        let mut new_len = right - left;
        if new_len > C::one() {
            new_len = C::one();
        }
        let new_start = CirclePoint::new(s.position() + left);

        // Cyclic order of merged components from the arc start: a component
        // overlapping s from behind comes first (touched is sorted by left
        // reach already).
        let merged: Vec<DirectedArc<C>> = touched
            .iter()
            .map(|&(i, _, _)| self.components[i])
            .collect();

        let drop: Vec<usize> = touched.iter().map(|t| t.0).collect();
        let mut kept: Vec<DirectedArc<C>> = self
            .components
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, c)| *c)
            .collect();
        kept.push(DirectedArc {
            start: new_start,
            length: new_len,
        });
        self.rebuild(kept);
        Ok(merged)
    }

    /// Complementary open arcs in cyclic order; lengths sum to
    /// `1 - total_measure`.  A fully empty configuration yields one free arc
    /// of length 1 starting at 0.
    pub fn free_components(&self) -> Vec<(CirclePoint<C>, C)> {
        if self.components.is_empty() {
            return vec![(CirclePoint::new(C::zero()), C::one())];
        }
        let n = self.components.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = &self.components[i];
            let b = &self.components[(i + 1) % n];
            let gap = if n == 1 {
                C::one() - a.length
            } else {
                dist_pos(a.end(), b.start)
            };
            out.push((a.end(), gap));
        }
        out
    }

    /// Anchored labeling: `O_0` is the component such that the origin lies in
    /// `O_0` or in the free arc following it.
    pub fn label_blocks(&self) -> Result<BlockLabeling<C>> {
        if self.components.is_empty() {
            return Err(Error::EmptyConfig);
        }
        let n = self.components.len();
        let origin = CirclePoint::new(C::zero());
        // 0 in [start_j, start_{j+1}) cyclically
        let mut j0 = 0;
        for i in 0..n {
            let a = &self.components[i];
            let b = &self.components[(i + 1) % n];
            let span = if n == 1 {
                C::one()
            } else {
                dist_pos(a.start, b.start)
            };
            if dist_pos(a.start, origin) < span {
                j0 = i;
                break;
            }
        }

        let mut occupied_starts = Vec::with_capacity(n);
        let mut occupied_lengths = Vec::with_capacity(n);
        let mut free_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let a = &self.components[(j0 + i) % n];
            let b = &self.components[(j0 + i + 1) % n];
            occupied_starts.push(a.start);
            occupied_lengths.push(a.length);
            let gap = if n == 1 {
                C::one() - a.length
            } else {
                dist_pos(a.end(), b.start)
            };
            free_lengths.push(gap);
        }
        let shift = (C::zero() - occupied_starts[0].position()).wrap_unit();
        Ok(BlockLabeling {
            occupied_starts,
            occupied_lengths,
            free_lengths,
            shift,
        })
    }

    /// Rotate the whole configuration by `alpha`.
    pub fn rotate(&self, alpha: C) -> Self {
        let mut comps: Vec<_> = self.components.iter().map(|c| c.rotate(alpha)).collect();
        comps.sort_by(|a, b| a.start.position().partial_cmp(&b.start.position()).unwrap());
        OccupiedConfig {
            components: comps,
            step_index: self.step_index,
        }
    }

    /// Multiset of occupied lengths, sorted ascending.
    pub fn sorted_lengths(&self) -> Vec<C> {
        let mut v: Vec<C> = self.components.iter().map(|c| c.length).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Measure of `arc \ self`: the part of the arc not already covered.
    pub fn new_measure_of(&self, arc: &DirectedArc<C>) -> C {
        let mut covered = C::zero();
        for c in &self.components {
            covered = covered + overlap_measure(arc, c);
        }
        arc.length - covered
    }
}

/// Measure of the intersection of two closed arcs on the circle.
pub fn overlap_measure<C: Coord>(a: &DirectedArc<C>, b: &DirectedArc<C>) -> C {
    // Work in the frame anchored at the start of `a`; `b` may intersect the
    // window [0, len_a] as [fwd, fwd+len_b] or, wrapping, as [fwd-1, ...].
    let fwd = dist_pos(a.start, b.start);
    let mut total = C::zero();
    for off in [fwd, fwd - C::one()] {
        let lo = if off > C::zero() { off } else { C::zero() };
        let hi_b = off + b.length;
        let hi = if hi_b < a.length { hi_b } else { a.length };
        if hi > lo {
            total = total + (hi - lo);
        }
    }
    total
}

impl Serialize for OccupiedConfig<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Comp {
            start: f64,
            length: f64,
        }
        let comps: Vec<Comp> = self
            .components
            .iter()
            .map(|c| Comp {
                start: c.start.position(),
                length: c.length,
            })
            .collect();
        let mut st = serializer.serialize_struct("OccupiedConfig", 2)?;
        st.serialize_field("components", &comps)?;
        st.serialize_field("step", &self.step_index)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn pt(x: f64) -> CirclePoint<f64> {
        CirclePoint::new(x)
    }

    fn arc(s: f64, l: f64) -> DirectedArc<f64> {
        DirectedArc::new(s, l).unwrap()
    }

    #[test]
    fn dist_pos_examples() {
        assert!((dist_pos(pt(0.2), pt(0.7)) - 0.5).abs() < 1e-15);
        assert!((dist_pos(pt(0.7), pt(0.2)) - 0.5).abs() < 1e-15);
        assert_eq!(dist_pos(pt(0.4), pt(0.4)), 0.0);
    }

    #[test]
    fn insert_disjoint() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.1, 0.3)).unwrap();
        let merged = cfg.insert_covered_arc(arc(0.6, 0.2)).unwrap();
        assert!(merged.is_empty());
        assert_eq!(cfg.num_components(), 2);
        assert!((cfg.total_measure() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn insert_overlap_merges() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.1, 0.3)).unwrap(); // [0.1,0.4]
        let merged = cfg.insert_covered_arc(arc(0.35, 0.25)).unwrap(); // [0.35,0.6]
        assert_eq!(merged.len(), 1);
        assert_eq!(cfg.num_components(), 1);
        let c = cfg.components()[0];
        assert!((c.start.position() - 0.1).abs() < 1e-15);
        assert!((c.length - 0.5).abs() < 1e-15);
    }

    #[test]
    fn insert_absorbed_inside_wrapping() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.9, 0.2)).unwrap(); // wraps to [0.9, 0.1]
        let merged = cfg.insert_covered_arc(arc(0.05, 0.02)).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(cfg.num_components(), 1);
        let c = cfg.components()[0];
        assert!((c.start.position() - 0.9).abs() < 1e-15);
        assert!((c.length - 0.2).abs() < 1e-15);
    }

    #[test]
    fn insert_touching_merges() {
        // closed arcs sharing an endpoint form a single component
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.1, 0.2)).unwrap();
        let merged = cfg.insert_covered_arc(arc(0.3, 0.1)).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(cfg.num_components(), 1);
        assert!((cfg.components()[0].length - 0.3).abs() < 1e-15);
    }

    #[test]
    fn insert_bridges_two_components_across_zero() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.8, 0.1)).unwrap(); // [0.8,0.9]
        cfg.insert_covered_arc(arc(0.05, 0.1)).unwrap(); // [0.05,0.15]
        let merged = cfg.insert_covered_arc(arc(0.85, 0.25)).unwrap(); // bridges both
        assert_eq!(merged.len(), 2);
        // cyclic order from the arc start: [0.8,..] first, then [0.05,..]
        assert!((merged[0].start.position() - 0.8).abs() < 1e-15);
        assert!((merged[1].start.position() - 0.05).abs() < 1e-15);
        assert_eq!(cfg.num_components(), 1);
        let c = cfg.components()[0];
        assert!((c.start.position() - 0.8).abs() < 1e-15);
        assert!((c.length - 0.35).abs() < 1e-15);
    }

    #[test]
    fn zero_length_arcs_are_components() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.5, 0.0)).unwrap();
        assert_eq!(cfg.num_components(), 1);
        assert_eq!(cfg.total_measure(), 0.0);
        // absorbed by a later overlapping arc
        let merged = cfg.insert_covered_arc(arc(0.4, 0.2)).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(cfg.num_components(), 1);
        assert!((cfg.total_measure() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn free_components_empty_and_sums() {
        let cfg: OccupiedConfig<f64> = OccupiedConfig::new();
        let free = cfg.free_components();
        assert_eq!(free.len(), 1);
        assert_eq!(free[0].1, 1.0);

        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.1, 0.3)).unwrap();
        cfg.insert_covered_arc(arc(0.6, 0.2)).unwrap();
        let free = cfg.free_components();
        let s: f64 = free.iter().map(|f| f.1).sum();
        assert!((s + cfg.total_measure() - 1.0).abs() < 1e-12);
        assert_eq!(free.len(), 2);
    }

    #[test]
    fn label_blocks_wrapping() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.95, 0.15)).unwrap(); // [0.95, 0.1], contains 0
        let lab = cfg.label_blocks().unwrap();
        assert!((lab.occupied_starts[0].position() - 0.95).abs() < 1e-15);
        assert!((lab.shift - 0.05).abs() < 1e-15);
        assert!((lab.free_lengths[0] - 0.85).abs() < 1e-12);
    }

    #[test]
    fn label_blocks_single_and_two() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.3, 0.2)).unwrap(); // [0.3,0.5], 0 in following free arc
        let lab = cfg.label_blocks().unwrap();
        assert!((lab.occupied_starts[0].position() - 0.3).abs() < 1e-15);
        assert!((lab.shift - 0.7).abs() < 1e-15);

        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.2, 0.1)).unwrap();
        cfg.insert_covered_arc(arc(0.6, 0.1)).unwrap();
        let lab = cfg.label_blocks().unwrap();
        // 0 lies in (0.7, 0.2), the free arc after [0.6,0.7]
        assert!((lab.occupied_starts[0].position() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn label_blocks_anchor_on_endpoint() {
        // origin exactly at an arc endpoint: the closed arc owns it
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.0, 0.2)).unwrap();
        cfg.insert_covered_arc(arc(0.5, 0.2)).unwrap();
        let lab = cfg.label_blocks().unwrap();
        assert_eq!(lab.occupied_starts[0].position(), 0.0);
    }

    #[test]
    fn rotation_preserves_length_multiset() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.1, 0.25)).unwrap();
        cfg.insert_covered_arc(arc(0.5, 0.125)).unwrap();
        let rot = cfg.rotate(0.375);
        assert_eq!(cfg.sorted_lengths(), rot.sorted_lengths());
    }

    #[test]
    fn rational_backend_exact() {
        type Q = Rational64;
        let mut cfg: OccupiedConfig<Q> = OccupiedConfig::new();
        let a = DirectedArc::new(Q::new(1, 10), Q::new(3, 10)).unwrap();
        let b = DirectedArc::new(Q::new(7, 20), Q::new(1, 4)).unwrap();
        cfg.insert_covered_arc(a).unwrap();
        cfg.insert_covered_arc(b).unwrap();
        assert_eq!(cfg.num_components(), 1);
        assert_eq!(cfg.total_measure(), Q::new(1, 2));
        assert_eq!(cfg.components()[0].start.position(), Q::new(1, 10));
    }

    #[test]
    fn overlap_measure_cases() {
        let a = arc(0.9, 0.2); // [0.9, 0.1]
        let b = arc(0.0, 0.3); // [0.0, 0.3]
        assert!((overlap_measure(&a, &b) - 0.1).abs() < 1e-15);
        assert!((overlap_measure(&b, &a) - 0.1).abs() < 1e-15);
        let c = arc(0.4, 0.2);
        assert_eq!(overlap_measure(&a, &c), 0.0);
    }

    #[test]
    fn new_measure_accounting() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.1, 0.3)).unwrap();
        let a = arc(0.35, 0.25);
        let before = cfg.total_measure();
        let novel = cfg.new_measure_of(&a);
        cfg.insert_covered_arc(a).unwrap();
        assert!((cfg.total_measure() - before - novel).abs() < 1e-12);
    }

    #[test]
    fn rejects_overlong_arc() {
        let mut cfg = OccupiedConfig::new();
        assert!(cfg
            .insert_covered_arc(DirectedArc {
                start: pt(0.0),
                length: 1.5
            })
            .is_err());
    }

    #[test]
    fn serialize_json_shape() {
        let mut cfg = OccupiedConfig::new();
        cfg.insert_covered_arc(arc(0.25, 0.5)).unwrap();
        cfg.set_step_index(3);
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(
            s,
            r#"{"components":[{"start":0.25,"length":0.5}],"step":3}"#
        );
    }
}
