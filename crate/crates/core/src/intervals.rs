//! Partitions, interval families with disjoint interiors, mesh ladders and
//! the empirical determination check.
//!
//! A partition is a strictly increasing point set in `[0,1]` (the empty
//! partition is a first-class value with `v2(f, {}) = 0`). Interval families
//! carry explicit endpoint inclusivity because the stricter class of pairwise
//! disjoint closed intervals, and grid-restricted families, depend on whether
//! endpoints may touch.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::funcmodel::FunctionModel;
use crate::util::sorted_dedup;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Strictly increasing points in `[0,1]`; empty or at least two points.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() == 1 {
            return Err(Error::InvalidPartition(format!(
                "a partition needs at least two points, got one ({})",
                points[0]
            )));
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidPartition(format!(
                    "points not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let (Some(&first), Some(&last)) = (points.first(), points.last()) {
            if !(0.0..=1.0).contains(&first) || !(0.0..=1.0).contains(&last) {
                return Err(Error::InvalidPartition(format!(
                    "points outside [0,1]: first {first}, last {last}"
                )));
            }
        }
        Ok(Partition { points })
    }

    pub fn empty() -> Self {
        Partition { points: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// `max` consecutive gap; 0 for the empty partition.
    pub fn mesh(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// `min` consecutive gap; 0 for the empty partition.
    pub fn min_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            .min(f64::INFINITY)
            .pipe_finite()
    }

    /// The family of open intervals between consecutive points.
    pub fn induced_family(&self) -> IntervalFamily {
        let intervals = self
            .points
            .windows(2)
            .map(|w| Interval::open(w[0], w[1]).expect("valid by construction"))
            .collect();
        IntervalFamily { intervals }
    }
}

trait PipeFinite {
    fn pipe_finite(self) -> f64;
}

impl PipeFinite for f64 {
    fn pipe_finite(self) -> f64 {
        if self.is_finite() {
            self
        } else {
            0.0
        }
    }
}

/// A subinterval of `[0,1]` with explicit endpoint inclusivity.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::InvalidInterval(format!(
                "need 0 <= lo <= hi <= 1, got [{lo}, {hi}]"
            )));
        }
        if lo == hi && !(lo_closed && hi_closed) {
            return Err(Error::InvalidInterval(format!(
                "degenerate interval at {lo} must be closed on both ends"
            )));
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Interval::new(lo, hi, false, false)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Set containment honouring endpoint inclusivity.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        let lo_ok = self.lo < other.lo
            || (self.lo == other.lo && (self.lo_closed || !other.lo_closed));
        let hi_ok = other.hi < self.hi
            || (other.hi == self.hi && (self.hi_closed || !other.hi_closed));
        lo_ok && hi_ok
    }

    pub fn contains_point(&self, t: f64) -> bool {
        (self.lo < t || (self.lo == t && self.lo_closed))
            && (t < self.hi || (t == self.hi && self.hi_closed))
    }

    /// Open interiors intersect.
    pub fn interiors_overlap(&self, other: &Interval) -> bool {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        lo < hi
    }

    /// Closed hulls intersect (shared endpoints count).
    pub fn closed_sets_intersect(&self, other: &Interval) -> bool {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        lo <= hi
    }
}

/// Finite family of intervals with pairwise disjoint interiors.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct IntervalFamily {
    intervals: Vec<Interval>,
}

impl IntervalFamily {
    /// Build a family, sorting by left endpoint and checking interiors.
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        intervals.sort_by(|a, b| {
            (a.lo, a.hi)
                .partial_cmp(&(b.lo, b.hi))
                .expect("NaN in interval")
        });
        for w in intervals.windows(2) {
            if w[0].interiors_overlap(&w[1]) {
                return Err(Error::InvalidFamily(format!(
                    "interiors overlap: [{}, {}] and [{}, {}]",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(IntervalFamily { intervals })
    }

    pub fn empty() -> Self {
        IntervalFamily { intervals: Vec::new() }
    }

    /// Family of closed intervals between consecutive grid points, i.e. the
    /// elementary cells of a grid.
    pub fn grid_cells(points: &[f64]) -> Result<Self> {
        let intervals = points
            .windows(2)
            .map(|w| Interval::closed(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        IntervalFamily::new(intervals)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Pairwise disjoint as closed sets: the stricter family class.
    pub fn is_closed_disjoint(&self) -> bool {
        self.intervals
            .windows(2)
            .all(|w| !w[0].closed_sets_intersect(&w[1]))
    }

    /// All endpoints belong to `grid` and no interval is degenerate.
    /// Degenerate intervals are excluded from grid families by convention.
    pub fn is_grid_family(&self, grid: &[f64]) -> bool {
        self.is_closed_disjoint()
            && self.intervals.iter().all(|iv| {
                !iv.is_degenerate()
                    && grid.binary_search_by(|p| p.partial_cmp(&iv.lo).unwrap()).is_ok()
                    && grid.binary_search_by(|p| p.partial_cmp(&iv.hi).unwrap()).is_ok()
            })
    }

    /// `max` length over members; 0 on the empty family.
    pub fn norm_max(&self) -> f64 {
        self.intervals.iter().map(Interval::length).fold(0.0, f64::max)
    }

    /// `min` length over members; 0 on the empty family.
    pub fn norm_min(&self) -> f64 {
        self.intervals
            .iter()
            .map(Interval::length)
            .fold(f64::INFINITY, f64::min)
            .pipe_finite()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn push_checked(&mut self, interval: Interval) -> Result<()> {
        let mut next = self.intervals.clone();
        next.push(interval);
        *self = IntervalFamily::new(next)?;
        Ok(())
    }

    /// Union of two families, re-validated.
    pub fn union(&self, other: &IntervalFamily) -> Result<IntervalFamily> {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalFamily::new(all)
    }

    /// The two families have pairwise disjoint interiors.
    pub fn disjoint_from(&self, other: &IntervalFamily) -> bool {
        self.intervals
            .iter()
            .all(|a| other.intervals.iter().all(|b| !a.interiors_overlap(b)))
    }
}

/// `1 = d0 > d1 > ... > d_{k-1} > 0`, conceptually extended by `d_k = 0`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeshLadder {
    deltas: Vec<f64>,
}

impl MeshLadder {
    /// Accepts a strictly decreasing positive sequence; a leading `1` is
    /// prepended when missing.
    pub fn new(mut deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::InvalidLadder("empty ladder".into()));
        }
        if deltas[0] != 1.0 {
            if deltas[0] > 1.0 {
                return Err(Error::InvalidLadder(format!(
                    "leading delta {} exceeds 1",
                    deltas[0]
                )));
            }
            deltas.insert(0, 1.0);
        }
        for w in deltas.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidLadder(format!(
                    "not strictly decreasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if *deltas.last().unwrap() <= 0.0 {
            return Err(Error::InvalidLadder("last delta must be positive".into()));
        }
        Ok(MeshLadder { deltas })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Number of mesh classes (the conceptual `d_k = 0` closes the last one).
    pub fn classes(&self) -> usize {
        self.deltas.len()
    }

    /// Class index (1-based) of a length: class `j` collects lengths in
    /// `(d_j, d_{j-1}]`; the last class also absorbs zero lengths so that
    /// the classes partition any family.
    pub fn class_of(&self, length: f64) -> usize {
        let k = self.classes();
        for j in 1..k {
            if length > self.deltas[j] && length <= self.deltas[j - 1] {
                return j;
            }
        }
        k
    }
}

/// Split a family into mesh classes by interval length. Class `j` (1-based)
/// holds intervals with length in `(d_j, d_{j-1}]`, the last class closes at
/// zero. The output classes partition the input family.
pub fn mesh_class_partition(fam: &IntervalFamily, ladder: &MeshLadder) -> Vec<IntervalFamily> {
    let k = ladder.classes();
    let mut classes = vec![Vec::new(); k];
    for iv in fam.intervals() {
        classes[ladder.class_of(iv.length()) - 1].push(*iv);
    }
    classes
        .into_iter()
        .map(|ivs| IntervalFamily::new(ivs).expect("subfamily of a valid family"))
        .collect()
}

/// `fine` refines `coarse`: every interval of `fine` is contained in some
/// interval of `coarse`.
pub fn refines(fine: &IntervalFamily, coarse: &IntervalFamily) -> bool {
    fine.intervals()
        .iter()
        .all(|f| coarse.intervals().iter().any(|c| c.contains_interval(f)))
}

/// Configuration for the empirical determination check.
#[derive(Clone, Debug)]
pub struct DeterminationConfig {
    /// Cap on grid points inside one interval before the exact per-interval
    /// enumeration falls back to snap candidates.
    pub enum_point_cap: usize,
    /// Cap on accumulated candidate sums across intervals.
    pub sum_cap: usize,
}

impl Default for DeterminationConfig {
    fn default() -> Self {
        DeterminationConfig { enum_point_cap: 12, sum_cap: 1 << 16 }
    }
}

/// Empirical determination defect of a grid for the span of `models`.
///
/// For each trial family and each coefficient vector, searches for the grid
/// family refining the trial family whose squared variation is closest to
/// the trial value, and reports the worst normalized gap. A family none of
/// whose intervals contains two grid points admits no nonempty refinement
/// and yields an infinite defect.
///
/// The search is exact (full per-interval enumeration) while the instance is
/// small, and falls back to snap candidates (empty, endpoint snap, maximal
/// variation subfamily) on larger instances. Ties between equally-close
/// candidate sums are broken toward larger total length.
pub fn determination_defect(
    models: &[FunctionModel],
    grid: &[f64],
    trial_families: &[IntervalFamily],
    coeff_samples: &[Vec<f64>],
    config: &DeterminationConfig,
) -> Result<f64> {
    for sample in coeff_samples {
        if sample.len() != models.len() {
            return Err(Error::LengthMismatch { left: sample.len(), right: models.len() });
        }
    }
    let grid = sorted_dedup(grid.to_vec());
    let mut worst: f64 = 0.0;

    for fam in trial_families {
        // Grid points inside each interval (inclusivity honoured).
        let per_interval_points: Vec<Vec<f64>> = fam
            .intervals()
            .iter()
            .map(|iv| {
                grid.iter()
                    .copied()
                    .filter(|&p| iv.contains_point(p))
                    .collect::<Vec<_>>()
            })
            .collect();

        if !fam.is_empty() && per_interval_points.iter().all(|pts| pts.len() < 2) {
            return Ok(f64::INFINITY);
        }

        for sample in coeff_samples {
            let norm_sq: f64 = sample.iter().map(|l| l * l).sum();
            if norm_sq == 0.0 {
                continue;
            }
            let combo = FunctionModel::combo(
                sample
                    .iter()
                    .zip(models.iter())
                    .map(|(&c, m)| (c, m.clone()))
                    .collect(),
            )?;
            let target = crate::varnorm::v2_sq_family(&combo, fam)?;
            let best = best_refinement_gap(&combo, target, &per_interval_points, config)?;
            worst = worst.max(best / norm_sq);
            if worst.is_infinite() {
                return Ok(worst);
            }
        }
    }
    Ok(worst)
}

/// Minimal `|target - v2^2(f, If)|` over grid families refining the trial
/// family, where each interval contributes a subfamily over its own points.
fn best_refinement_gap(
    f: &FunctionModel,
    target: f64,
    per_interval_points: &[Vec<f64>],
    config: &DeterminationConfig,
) -> Result<f64> {
    // Candidate achievable sums per interval (always contains 0: skipping an
    // interval is a legal refinement).
    let mut per_interval: Vec<Vec<(f64, f64)>> = Vec::with_capacity(per_interval_points.len());
    for pts in per_interval_points {
        per_interval.push(interval_candidates(f, pts, config)?);
    }

    // Accumulate candidate sums across intervals with a cap; each entry is
    // (v2^2 sum, total length) and ties favour larger total length.
    let mut sums: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for cands in &per_interval {
        let mut next = Vec::with_capacity(sums.len() * cands.len());
        for &(s, len) in &sums {
            for &(c, clen) in cands {
                next.push((s + c, len + clen));
            }
        }
        next.sort_by(|a, b| a.partial_cmp(b).unwrap());
        next.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15 && (a.1 - b.1).abs() <= 1e-15);
        if next.len() > config.sum_cap {
            // Keep the spread: thin uniformly.
            let stride = next.len() / config.sum_cap + 1;
            next = next.into_iter().step_by(stride).collect();
        }
        sums = next;
    }

    let mut best_gap = f64::INFINITY;
    let mut best_len = -1.0f64;
    for &(s, len) in &sums {
        let gap = (target - s).abs();
        if gap < best_gap - 1e-15 || ((gap - best_gap).abs() <= 1e-15 && len > best_len) {
            best_gap = gap;
            best_len = len;
        }
    }
    Ok(best_gap)
}

/// Achievable `(v2^2, total length)` values of subfamilies over the grid
/// points of one interval.
fn interval_candidates(
    f: &FunctionModel,
    pts: &[f64],
    config: &DeterminationConfig,
) -> Result<Vec<(f64, f64)>> {
    let m = pts.len();
    let mut out = vec![(0.0, 0.0)];
    if m < 2 {
        return Ok(out);
    }
    let vals: Vec<f64> = pts.iter().map(|&t| f.eval(t)).collect::<Result<_>>()?;

    if m <= config.enum_point_cap {
        // Exact: all families of disjoint closed subintervals.
        // states: (next free index, sum, len)
        fn rec(
            pts: &[f64],
            vals: &[f64],
            start: usize,
            sum: f64,
            len: f64,
            out: &mut Vec<(f64, f64)>,
        ) {
            for a in start..pts.len() {
                for b in (a + 1)..pts.len() {
                    let d = vals[b] - vals[a];
                    let s = sum + d * d;
                    let l = len + (pts[b] - pts[a]);
                    out.push((s, l));
                    // Next interval must start strictly after b (closed
                    // intervals in a grid family are pairwise disjoint).
                    rec(pts, vals, b + 1, s, l, out);
                }
            }
        }
        rec(pts, &vals, 0, 0.0, 0.0, &mut out);
    } else {
        // Snap candidates: outer snap and the maximal-variation subfamily.
        let d = vals[m - 1] - vals[0];
        out.push((d * d, pts[m - 1] - pts[0]));
        if m <= 512 {
            // max-weight disjoint-subinterval DP (strictly separated).
            let mut dp = vec![(0.0f64, 0.0f64); m];
            for j in 1..m {
                dp[j] = dp[j - 1];
                for i in 0..j {
                    let before = if i == 0 { (0.0, 0.0) } else { dp[i - 1] };
                    let w = vals[j] - vals[i];
                    let cand = (before.0 + w * w, before.1 + (pts[j] - pts[i]));
                    if cand.0 > dp[j].0 {
                        dp[j] = cand;
                    }
                }
            }
            out.push(dp[m - 1]);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15 && (a.1 - b.1).abs() <= 1e-15);
    Ok(out)
}

/// Default trial families: all nonempty subfamilies of the level-`level`
/// dyadic partition of `[0,1]`.
pub fn dyadic_subfamilies(level: u32) -> Vec<IntervalFamily> {
    let n = 1usize << level;
    let cells: Vec<Interval> = (0..n)
        .map(|i| {
            Interval::closed(i as f64 / n as f64, (i + 1) as f64 / n as f64)
                .expect("dyadic cell")
        })
        .collect();
    let mut out = Vec::with_capacity((1 << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let ivs: Vec<Interval> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| cells[i]).collect();
        out.push(IntervalFamily::new(ivs).expect("disjoint dyadic cells"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::FunctionModel;

    #[test]
    fn partition_rejects_single_point_and_disorder() {
        assert!(Partition::new(vec![0.5]).is_err());
        assert!(Partition::new(vec![0.5, 0.5]).is_err());
        assert!(Partition::new(vec![0.5, 0.2]).is_err());
        assert!(Partition::new(vec![-0.1, 0.5]).is_err());
        assert!(Partition::new(vec![]).is_ok());
        assert!(Partition::new(vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn degenerate_interval_needs_closed_ends() {
        assert!(Interval::new(0.3, 0.3, true, true).is_ok());
        assert!(Interval::new(0.3, 0.3, false, true).is_err());
    }

    #[test]
    fn family_rejects_overlapping_interiors() {
        let a = Interval::closed(0.0, 0.5).unwrap();
        let b = Interval::closed(0.4, 0.8).unwrap();
        assert!(IntervalFamily::new(vec![a, b]).is_err());
        let c = Interval::closed(0.5, 0.8).unwrap();
        // Shared endpoint is fine: interiors disjoint.
        let fam = IntervalFamily::new(vec![a, c]).unwrap();
        assert!(!fam.is_closed_disjoint());
    }

    #[test]
    fn mesh_classes_match_direct_length_comparison() {
        let fam = IntervalFamily::new(vec![
            Interval::closed(0.0, 0.6).unwrap(),
            Interval::closed(0.7, 0.8).unwrap(),
            Interval::closed(0.9, 0.95).unwrap(),
        ])
        .unwrap();
        let ladder = MeshLadder::new(vec![1.0, 0.5, 0.09]).unwrap();
        let classes = mesh_class_partition(&fam, &ladder);
        assert_eq!(classes.len(), 3);
        assert_eq!(classes[0].len(), 1);
        assert_eq!(classes[0].intervals()[0].hi, 0.6);
        assert_eq!(classes[1].len(), 1);
        assert_eq!(classes[1].intervals()[0].hi, 0.8);
        assert_eq!(classes[2].len(), 1);
        assert_eq!(classes[2].intervals()[0].hi, 0.95);
    }

    #[test]
    fn mesh_classes_empty_family() {
        let ladder = MeshLadder::new(vec![0.5]).unwrap();
        let classes = mesh_class_partition(&IntervalFamily::empty(), &ladder);
        assert!(classes.iter().all(IntervalFamily::is_empty));
    }

    #[test]
    fn ladder_prepends_unit_and_validates() {
        let ladder = MeshLadder::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(ladder.deltas(), &[1.0, 0.5, 0.25]);
        assert!(MeshLadder::new(vec![0.5, 0.5]).is_err());
        assert!(MeshLadder::new(vec![]).is_err());
    }

    #[test]
    fn refines_examples() {
        let fine = IntervalFamily::new(vec![Interval::closed(0.1, 0.2).unwrap()]).unwrap();
        let coarse = IntervalFamily::new(vec![Interval::closed(0.0, 0.5).unwrap()]).unwrap();
        assert!(refines(&fine, &coarse));
        assert!(refines(&coarse, &coarse));
        let straddle = IntervalFamily::new(vec![Interval::closed(0.1, 0.6).unwrap()]).unwrap();
        assert!(!refines(&straddle, &coarse));
    }

    #[test]
    fn determination_zero_when_endpoints_on_grid() {
        let id = FunctionModel::identity();
        let fam = IntervalFamily::new(vec![Interval::closed(0.0, 1.0).unwrap()]).unwrap();
        let defect = determination_defect(
            &[id],
            &[0.0, 0.5, 1.0],
            &[fam],
            &[vec![1.0]],
            &DeterminationConfig::default(),
        )
        .unwrap();
        assert!(defect <= 1e-15, "defect {defect}");
    }

    #[test]
    fn determination_infinite_when_grid_too_sparse() {
        let id = FunctionModel::identity();
        let fam =
            IntervalFamily::new(vec![Interval::closed(0.4, 0.45).unwrap()]).unwrap();
        let defect = determination_defect(
            &[id],
            &[0.0, 1.0],
            &[fam],
            &[vec![1.0]],
            &DeterminationConfig::default(),
        )
        .unwrap();
        assert!(defect.is_infinite());
    }
}
