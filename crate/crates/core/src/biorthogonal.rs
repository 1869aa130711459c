//! Biorthogonality checkers and greedy subsequence selection.
//!
//! A family is biorthogonal when every interval family admits a partition
//! into per-index classes such that the foreign variation inside each class
//! stays below that index's budget. The canonical witness partition splits
//! intervals by length along a mesh ladder; for families with pairwise
//! disjoint supports the location-based partition is the natural witness
//! and is also supported here.
//!
//! Selection follows the inductive scheme: a new function is admissible
//! when its sup norm is below the stage threshold
//! `sqrt(delta_k) * 2^-(k+3) * min eps_i`, and after each choice the next
//! ladder value is found by halving until the tail bound
//! `sum_i v2(H_i, I) <= eps_{k+2}/2` holds for all families with interval
//! lengths at most the candidate delta. Certificates record every verified
//! inequality and re-verify independently.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dyadictree::Node;
use crate::funcmodel::FunctionModel;
use crate::intervals::{mesh_class_partition, IntervalFamily, MeshLadder};
use crate::math;
use crate::util::sorted_dedup;
use crate::varmeasure::GridPolicy;
use crate::varnorm::{self, family_sup_var};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Stage-`k` budget `eps_i^k = (1 - 2^-(k-i+1)) eps_i`.
pub fn eps_partial(eps_i: f64, i: usize, k: usize) -> f64 {
    debug_assert!(i >= 1 && k >= i);
    (1.0 - math::exp2(-((k - i + 1) as f64))) * eps_i
}

/// Admissibility threshold for the next function after stage `k`:
/// `sqrt(delta_k) * 2^-(k+3) * min eps_i`.
pub fn scan_threshold(delta_k: f64, k: usize, epsilons: &[f64]) -> f64 {
    let min_eps = epsilons
        .iter()
        .take(k)
        .fold(f64::INFINITY, |a, &b| a.min(b));
    math::sqrt(delta_k) * math::exp2(-((k + 3) as f64)) * min_eps
}

/// How to assign intervals of a trial family to indices.
#[derive(Clone, Debug)]
pub enum WitnessStrategy {
    /// Length classes along a ladder; index `j` owns lengths in
    /// `(delta_j, delta_{j-1}]`.
    MeshClass(MeshLadder),
    /// Location classes: an interval belongs to the first index whose
    /// support hull it meets.
    DisjointSupport(Vec<(f64, f64)>),
}

impl WitnessStrategy {
    /// Partition a family into per-index classes (1-based index order).
    pub fn classes(&self, fam: &IntervalFamily, count: usize) -> Result<Vec<IntervalFamily>> {
        match self {
            WitnessStrategy::MeshClass(ladder) => {
                if ladder.classes() != count {
                    return Err(Error::LengthMismatch {
                        left: ladder.classes(),
                        right: count,
                    });
                }
                Ok(mesh_class_partition(fam, ladder))
            }
            WitnessStrategy::DisjointSupport(hulls) => {
                if hulls.len() != count {
                    return Err(Error::LengthMismatch { left: hulls.len(), right: count });
                }
                let mut classes = vec![Vec::new(); count];
                for iv in fam.intervals() {
                    let mut target = 0usize;
                    for (i, &(lo, hi)) in hulls.iter().enumerate() {
                        if iv.hi >= lo && iv.lo <= hi {
                            target = i;
                            break;
                        }
                    }
                    classes[target].push(*iv);
                }
                Ok(classes
                    .into_iter()
                    .map(|ivs| IntervalFamily::new(ivs).expect("subfamily of valid family"))
                    .collect())
            }
        }
    }
}

/// Defect of one (trial family, class) pair.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DefectEntry {
    pub trial: usize,
    /// 1-based class index `j`.
    pub class_index: usize,
    /// `sum_{i != j} v2(H_i, class_j)`.
    pub defect: f64,
    pub budget: f64,
    pub pass: bool,
}

/// Result of a biorthogonality check over a trial set.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BiorthoWitness {
    pub epsilons: Vec<f64>,
    pub entries: Vec<DefectEntry>,
    /// Worst defect per class over all trials.
    pub worst_per_class: Vec<f64>,
    pub pass: bool,
}

/// Adversarial trial generation settings.
#[derive(Clone, Debug)]
pub struct AdversaryConfig {
    /// Candidate endpoints for generated families.
    pub grid: Vec<f64>,
    /// Cap on grid size after thinning.
    pub max_grid: usize,
}

impl AdversaryConfig {
    /// Grid from the models' own breakpoints plus a dyadic base, thinned
    /// with an odd stride so alternating extrema survive.
    pub fn from_models(models: &[FunctionModel], dyadic_level: u32, max_grid: usize) -> Self {
        let mut grid = varnorm::dyadic_grid(dyadic_level);
        for m in models {
            grid.extend(m.breakpoints());
        }
        let mut grid = sorted_dedup(grid);
        while grid.len() > max_grid {
            grid = grid
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 7 != 3)
                .map(|(_, &t)| t)
                .collect();
        }
        AdversaryConfig { grid, max_grid }
    }
}

/// Check biorthogonality of `family` with budgets `epsilons` against the
/// supplied trial families plus, when configured, adversarially generated
/// families maximizing each class defect. The witness records every
/// (trial, class) defect; a pass is evidence at the configured grid
/// resolution, not a proof over all families.
pub fn check_biortho(
    family: &[FunctionModel],
    epsilons: &[f64],
    strategy: &WitnessStrategy,
    trials: &[IntervalFamily],
    adversary: Option<&AdversaryConfig>,
) -> Result<BiorthoWitness> {
    if family.len() != epsilons.len() {
        return Err(Error::LengthMismatch { left: family.len(), right: epsilons.len() });
    }
    let k = family.len();
    let mut all_trials: Vec<IntervalFamily> = trials.to_vec();
    if let Some(cfg) = adversary {
        for j in 1..=k {
            if let Some(fam) = adversarial_family(family, j, strategy, cfg)? {
                all_trials.push(fam);
            }
        }
    }

    let mut entries = Vec::new();
    let mut worst = vec![0.0f64; k];
    let mut pass = true;
    for (trial_idx, fam) in all_trials.iter().enumerate() {
        let classes = strategy.classes(fam, k)?;
        for j in 1..=k {
            let mut defect = 0.0;
            for (i, h) in family.iter().enumerate() {
                if i + 1 != j {
                    defect += varnorm::v2_family(h, &classes[j - 1])?;
                }
            }
            let budget = epsilons[j - 1];
            let ok = defect <= budget;
            pass &= ok;
            worst[j - 1] = worst[j - 1].max(defect);
            entries.push(DefectEntry {
                trial: trial_idx,
                class_index: j,
                defect,
                budget,
                pass: ok,
            });
        }
    }
    Ok(BiorthoWitness { epsilons: epsilons.to_vec(), entries, worst_per_class: worst, pass })
}

/// Build a family aimed at maximizing the class-`j` defect.
///
/// Mesh-class strategy: a max-weight DP over grid intervals with lengths in
/// the class window, weight `sum_{i != j} (increment of H_i)^2` (additive
/// surrogate of the checked defect). Disjoint-support strategy: straddlers
/// from foreign extrema into the class support.
fn adversarial_family(
    family: &[FunctionModel],
    j: usize,
    strategy: &WitnessStrategy,
    cfg: &AdversaryConfig,
) -> Result<Option<IntervalFamily>> {
    let k = family.len();
    match strategy {
        WitnessStrategy::MeshClass(ladder) => {
            let deltas = ladder.deltas();
            let hi_len = deltas[j - 1];
            let lo_len = if j < ladder.classes() { deltas[j] } else { 0.0 };
            let pts = &cfg.grid;
            let n = pts.len();
            if n < 2 {
                return Ok(None);
            }
            let mut vals = Vec::with_capacity(k);
            for h in family {
                vals.push(
                    pts.iter().map(|&t| h.eval(t)).collect::<Result<Vec<f64>>>()?,
                );
            }
            let mut dp = vec![0.0f64; n];
            let mut take = vec![usize::MAX; n];
            let mut lo_ptr = 0usize;
            for jj in 1..n {
                while pts[jj] - pts[lo_ptr] > hi_len + crate::MESH_GUARD {
                    lo_ptr += 1;
                }
                let mut best = dp[jj - 1];
                let mut t = usize::MAX;
                for i in lo_ptr..jj {
                    let len = pts[jj] - pts[i];
                    if len <= lo_len {
                        break;
                    }
                    let mut w = 0.0;
                    for (m, v) in vals.iter().enumerate() {
                        if m + 1 != j {
                            let d = v[jj] - v[i];
                            w += d * d;
                        }
                    }
                    if dp[i] + w > best {
                        best = dp[i] + w;
                        t = i;
                    }
                }
                dp[jj] = best;
                take[jj] = t;
            }
            let mut intervals = Vec::new();
            let mut idx = n - 1;
            while idx > 0 {
                if take[idx] == usize::MAX {
                    idx -= 1;
                } else {
                    let i = take[idx];
                    intervals.push(crate::intervals::Interval::closed(pts[i], pts[idx])?);
                    idx = i;
                }
            }
            if intervals.is_empty() {
                return Ok(None);
            }
            intervals.reverse();
            Ok(Some(IntervalFamily::new(intervals)?))
        }
        WitnessStrategy::DisjointSupport(hulls) => {
            // straddlers from a foreign extremum into an extremum of the
            // class support: both endpoints carry full amplitude
            let (jlo, jhi) = hulls[j - 1];
            let peak_in = |h: &FunctionModel, lo: f64, hi: f64| -> Result<Option<f64>> {
                let mut best: Option<(f64, f64)> = None;
                for &t in cfg.grid.iter().filter(|&&t| t >= lo && t <= hi) {
                    let v = math::abs(h.eval(t)?);
                    if best.map_or(true, |(_, bv)| v > bv) {
                        best = Some((t, v));
                    }
                }
                Ok(best.map(|(t, _)| t))
            };
            let Some(y) = peak_in(&family[j - 1], jlo, jhi)? else {
                return Ok(None);
            };
            let mut intervals = Vec::new();
            let mut occupied: Vec<(f64, f64)> = Vec::new();
            for (i, h) in family.iter().enumerate() {
                if i + 1 == j {
                    continue;
                }
                let (ilo, ihi) = hulls[i];
                let Some(x) = peak_in(h, ilo, ihi)? else { continue };
                let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                if lo == hi {
                    continue;
                }
                if occupied.iter().all(|&(a, b)| hi <= a || lo >= b) {
                    intervals.push(crate::intervals::Interval::closed(lo, hi)?);
                    occupied.push((lo, hi));
                }
            }
            if intervals.is_empty() {
                Ok(None)
            } else {
                Ok(Some(IntervalFamily::new(intervals)?))
            }
        }
    }
}

/// One accepted candidate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SelectionChoice {
    /// Position of the chosen candidate in the pool.
    pub index: usize,
    pub sup_norm: f64,
    /// Admissibility bound used for the scan (infinite for the first step).
    pub scan_threshold: f64,
}

/// One verified ladder extension: `delta_k` together with the tail value
/// that certifies it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LadderExtension {
    pub delta: f64,
    /// `sum_i sup v2(H_i, families of length <= delta)`.
    pub tail_value: f64,
    /// Budget `eps_{k+1}/2` the tail was checked against.
    pub tail_budget: f64,
}

/// Reason a selection stopped early.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SelectionFailure {
    pub step: usize,
    pub threshold: f64,
    pub reason: String,
}

/// Record of a greedy biorthogonal selection. A length-`L` certificate
/// carries `L - 1` ladder extensions; the extension after the last choice
/// is only needed to grow further and is not part of the record.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SelectionCertificate {
    pub epsilons: Vec<f64>,
    pub choices: Vec<SelectionChoice>,
    pub extensions: Vec<LadderExtension>,
    pub failure: Option<SelectionFailure>,
}

impl SelectionCertificate {
    pub fn chosen_indices(&self) -> Vec<usize> {
        self.choices.iter().map(|s| s.index).collect()
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Ladder `(1, delta_1, ..., delta_{L-1})` for re-verification of the
    /// length-`L` family.
    pub fn ladder(&self) -> Result<MeshLadder> {
        let mut deltas = vec![1.0];
        for ext in &self.extensions {
            deltas.push(ext.delta);
        }
        MeshLadder::new(deltas)
    }

    /// Stage budgets `eps_i^L` the construction guarantees.
    pub fn stage_budgets(&self) -> Vec<f64> {
        let l = self.choices.len();
        self.epsilons
            .iter()
            .take(l)
            .enumerate()
            .map(|(i0, &e)| eps_partial(e, i0 + 1, l))
            .collect()
    }
}

/// A selection candidate; scale bounds encode partition-mesh sandwiches
/// when the caller has them (tent levels), otherwise they default to the
/// model's own breakpoint gaps.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub model: FunctionModel,
    /// Smallest natural scale: the next ladder value must go below it.
    pub scale_min: Option<f64>,
    /// Largest natural scale: must fit under the previous ladder value.
    pub scale_max: Option<f64>,
}

impl Candidate {
    pub fn plain(model: FunctionModel) -> Self {
        Candidate { model, scale_min: None, scale_max: None }
    }
}

/// Tuning for the tail-bound search.
#[derive(Clone, Debug)]
pub struct SelectionConfig {
    pub grid_policy: GridPolicy,
    pub max_halvings: u32,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { grid_policy: GridPolicy::default(), max_halvings: 60 }
    }
}

/// Greedy first-admissible subsequence selection.
///
/// Step 1 accepts the first candidate. Before scanning step `k+1` the
/// ladder is extended: `delta_k` is halved down from the newest choice's
/// natural scale until the verified tail bound `<= eps_{k+1}/2` holds. The
/// scan then accepts the first candidate after the previous index whose sup
/// norm is below `min(scan_threshold(delta_k, k), eps_{k+1})` and whose
/// scale fits under `delta_k`. Failures report the blocking threshold
/// instead of guessing.
pub fn select_subsequence(
    candidates: &[Candidate],
    epsilons: &[f64],
    target_len: usize,
    config: &SelectionConfig,
) -> Result<SelectionCertificate> {
    if target_len == 0 || epsilons.len() < target_len {
        return Err(Error::SelectionFailed {
            step: 0,
            detail: format!(
                "need eps_1..eps_{target_len} for a length-{target_len} selection"
            ),
        });
    }
    let mut choices: Vec<SelectionChoice> = Vec::new();
    let mut extensions: Vec<LadderExtension> = Vec::new();
    let mut chosen: Vec<&Candidate> = Vec::new();
    let mut failure = None;

    while choices.len() < target_len && failure.is_none() {
        let k = choices.len();
        if k >= 1 && extensions.len() < k {
            // extend the ladder: delta_k guards the stage-(k+1) budget
            let prev_delta = if k == 1 { 1.0 } else { extensions[k - 2].delta };
            let newest = chosen[k - 1];
            let natural = newest
                .scale_min
                .unwrap_or_else(|| breakpoint_min_gap(&newest.model))
                .min(prev_delta);
            let budget = epsilons[k] / 2.0;
            match tail_search(&chosen, natural, budget, config) {
                Ok((delta, tail)) => {
                    extensions.push(LadderExtension {
                        delta,
                        tail_value: tail,
                        tail_budget: budget,
                    });
                }
                Err(e) => {
                    failure = Some(SelectionFailure {
                        step: k + 1,
                        threshold: f64::NAN,
                        reason: format!("ladder extension failed: {e}"),
                    });
                }
            }
            continue;
        }
        let delta_k = if k == 0 { 1.0 } else { extensions[k - 1].delta };
        let threshold = if k == 0 {
            f64::INFINITY
        } else {
            scan_threshold(delta_k, k, epsilons).min(epsilons[k])
        };
        let start = choices.last().map_or(0, |s| s.index + 1);
        let mut pick = None;
        for (offset, cand) in candidates.iter().enumerate().skip(start) {
            let sup = cand.model.sup_norm();
            let scale_ok = cand.scale_max.map_or(true, |smax| smax <= delta_k);
            if sup < threshold && scale_ok {
                pick = Some((offset, cand, sup));
                break;
            }
        }
        match pick {
            Some((index, cand, sup)) => {
                chosen.push(cand);
                choices.push(SelectionChoice { index, sup_norm: sup, scan_threshold: threshold });
            }
            None => {
                failure = Some(SelectionFailure {
                    step: k + 1,
                    threshold,
                    reason: format!(
                        "no candidate after index {start} with sup norm below {threshold:.3e}"
                    ),
                });
            }
        }
    }
    Ok(SelectionCertificate { epsilons: epsilons.to_vec(), choices, extensions, failure })
}

fn breakpoint_min_gap(f: &FunctionModel) -> f64 {
    let pts = f.breakpoints();
    pts.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// Halve `delta` until `sum_i sup v2(H_i, length <= delta) <= budget`.
fn tail_search(
    chosen: &[&Candidate],
    start: f64,
    budget: f64,
    config: &SelectionConfig,
) -> Result<(f64, f64)> {
    let mut delta = start.min(0.5);
    for _ in 0..config.max_halvings {
        let mut tail = 0.0;
        let mut overflow = None;
        for cand in chosen {
            let grid = match config.grid_policy.build(&cand.model, 0.0, 1.0, delta) {
                Ok(g) => g,
                Err(e) => {
                    overflow = Some(e);
                    break;
                }
            };
            tail += math::sqrt(family_sup_var(&cand.model, delta, &grid)?);
            if tail > budget {
                break;
            }
        }
        if let Some(e) = overflow {
            return Err(e);
        }
        if tail <= budget {
            return Ok((delta, tail));
        }
        delta *= 0.5;
    }
    Err(Error::SelectionFailed {
        step: chosen.len(),
        detail: format!("tail bound {budget:.3e} unreachable within halving cap"),
    })
}

/// One node of a tree selection certificate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TreeSelectionStep {
    /// Position in the image tree.
    pub position: Node,
    /// Selected candidate node.
    pub chosen: Node,
    pub sup_norm: f64,
    pub scan_threshold: f64,
}

/// Certificate of a dyadic-subtree selection.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TreeSelectionCertificate {
    pub steps: Vec<TreeSelectionStep>,
    pub deltas: Vec<f64>,
    pub depth: usize,
    pub failure: Option<SelectionFailure>,
}

impl TreeSelectionCertificate {
    pub fn mapping(&self) -> BTreeMap<Node, Node> {
        self.steps.iter().map(|s| (s.position, s.chosen)).collect()
    }
}

/// Level-by-level greedy selection of a dyadic subtree whose node family is
/// biorthogonal. Mirrors `select_subsequence`: nodes are processed in
/// breadth-first order; a child position scans the candidate descendants of
/// its parent's image in breadth-first order.
pub fn select_tree_subtree(
    candidates: &BTreeMap<Node, FunctionModel>,
    epsilons_per_step: &[f64],
    depth: usize,
    config: &SelectionConfig,
) -> Result<TreeSelectionCertificate> {
    let positions: Vec<Node> = Node::all_up_to_depth(depth);
    if epsilons_per_step.len() < positions.len() {
        return Err(Error::SelectionFailed {
            step: 0,
            detail: format!("need {} epsilons for depth {depth}", positions.len()),
        });
    }
    let max_candidate_depth = candidates.keys().map(Node::len).max().unwrap_or(0);

    let mut steps: Vec<TreeSelectionStep> = Vec::new();
    let mut chosen_models: Vec<Candidate> = Vec::new();
    let mut mapping: BTreeMap<Node, Node> = BTreeMap::new();
    let mut deltas = vec![1.0f64];
    let mut failure = None;

    'outer: for position in positions {
        let k = steps.len();
        if k >= 1 && deltas.len() < k + 1 {
            // lazily extend the ladder before scanning the next position
            let refs: Vec<&Candidate> = chosen_models.iter().collect();
            let natural =
                breakpoint_min_gap(&chosen_models.last().unwrap().model).min(deltas[k - 1]);
            let budget = epsilons_per_step[k] / 2.0;
            match tail_search(&refs, natural, budget, config) {
                Ok((delta, _)) => deltas.push(delta),
                Err(e) => {
                    failure = Some(SelectionFailure {
                        step: k + 1,
                        threshold: f64::NAN,
                        reason: format!("ladder extension failed: {e}"),
                    });
                    break 'outer;
                }
            }
        }
        let delta_k = *deltas.last().unwrap();
        let threshold = if k == 0 {
            f64::INFINITY
        } else {
            scan_threshold(delta_k, k, epsilons_per_step).min(epsilons_per_step[k])
        };
        // candidate scan set: descendants of parent image extended by the
        // position's last bit; the root scans everything.
        let scan_root = match position.parent() {
            None => None,
            Some(parent) => {
                let base = mapping[&parent];
                Some(base.child(position.bit(position.len()).unwrap_or(0)))
            }
        };
        let mut pick = None;
        for cand_len in 0..=max_candidate_depth {
            for (node, model) in candidates.iter().filter(|(n, _)| n.len() == cand_len) {
                let in_range = match &scan_root {
                    None => true,
                    Some(root) => root.is_prefix_of(node),
                };
                let fresh = !mapping.values().any(|v| v == node);
                if in_range && fresh && model.sup_norm() < threshold {
                    pick = Some((*node, model.clone()));
                    break;
                }
            }
            if pick.is_some() {
                break;
            }
        }
        let Some((node, model)) = pick else {
            failure = Some(SelectionFailure {
                step: k + 1,
                threshold,
                reason: format!(
                    "no admissible candidate for position {position} (level {})",
                    position.len()
                ),
            });
            break 'outer;
        };
        let sup = model.sup_norm();
        chosen_models.push(Candidate::plain(model));
        mapping.insert(position, node);
        steps.push(TreeSelectionStep {
            position,
            chosen: node,
            sup_norm: sup,
            scan_threshold: threshold,
        });
    }
    Ok(TreeSelectionCertificate { steps, deltas, depth, failure })
}

/// One evaluated inequality.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Report of the estimate-lemma inequalities.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BoundsReport {
    pub checks: Vec<InequalityCheck>,
    pub skipped: Vec<String>,
}

impl BoundsReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

/// Evaluate the two-sided estimate inequalities for a biorthogonal family
/// on one interval family: the four single-function bounds, the three
/// square-sum bounds for coefficient subsets `F` of `G`, and (when
/// `check_ratio` is set) the unconditionality ratio. All are theorems for
/// genuinely biorthogonal families; a violation indicates an implementation
/// bug. Variation norms of the family members may be passed in to avoid
/// recomputation across many draws.
#[allow(clippy::too_many_arguments)]
pub fn estimate_bounds_check(
    family: &[FunctionModel],
    epsilons: &[f64],
    strategy: &WitnessStrategy,
    fam: &IntervalFamily,
    lambda: &[f64],
    subset_f: &[usize],
    subset_g: &[usize],
    slack: f64,
    member_norms: Option<&[f64]>,
    check_ratio: bool,
) -> Result<BoundsReport> {
    let k = family.len();
    if epsilons.len() != k || lambda.len() != k {
        return Err(Error::LengthMismatch { left: epsilons.len(), right: k });
    }
    let eps: f64 = epsilons.iter().sum();
    let classes = strategy.classes(fam, k)?;
    let mut report = BoundsReport::default();

    let norms: Vec<f64> = match member_norms {
        Some(n) => {
            if n.len() != k {
                return Err(Error::LengthMismatch { left: n.len(), right: k });
            }
            n.to_vec()
        }
        None => family
            .iter()
            .map(|h| varnorm::v2_norm(h).map(|r| r.norm()))
            .collect::<Result<_>>()?,
    };
    let m_const = norms.iter().fold(0.0f64, |a, &b| a.max(b));

    let combo = |idx: &[usize]| -> Result<FunctionModel> {
        FunctionModel::combo(
            idx.iter().map(|&i| (lambda[i], family[i].clone())).collect(),
        )
    };
    let max_abs = |idx: &[usize]| -> f64 {
        idx.iter().map(|&i| math::abs(lambda[i])).fold(0.0, f64::max)
    };

    let f_model = combo(subset_f)?;
    let g_model = combo(subset_g)?;
    let max_f = max_abs(subset_f);
    let max_g = max_abs(subset_g);

    // single-function bound outside own class
    for (i, h) in family.iter().enumerate() {
        let mut rest = IntervalFamily::empty();
        for (j, class) in classes.iter().enumerate() {
            if j != i {
                rest = rest.union(class)?;
            }
        }
        let lhs = varnorm::v2_family(h, &rest)?;
        report.checks.push(InequalityCheck {
            name: format!("own_class_complement[{i}]"),
            lhs,
            rhs: eps,
            pass: lhs <= eps + slack,
        });
    }

    // per-class combination bounds
    for j in 0..k {
        let class = &classes[j];
        let vj = varnorm::v2_family(&family[j], class)?;
        let in_f = subset_f.contains(&j);
        let lhs = varnorm::v2_family(&f_model, class)?;
        if !in_f {
            let rhs = max_f * epsilons[j];
            report.checks.push(InequalityCheck {
                name: format!("foreign_class_upper[{j}]"),
                lhs,
                rhs,
                pass: lhs <= rhs + slack,
            });
        } else {
            let rhs = math::abs(lambda[j]) * vj + max_f * epsilons[j];
            report.checks.push(InequalityCheck {
                name: format!("own_class_upper[{j}]"),
                lhs,
                rhs,
                pass: lhs <= rhs + slack,
            });
            // one-sided lower bound (trivial when the budget dominates);
            // the two-sided form is not provable from the reverse triangle
            // inequality alone
            let rhs_low = math::abs(lambda[j]) * vj - max_f * epsilons[j];
            report.checks.push(InequalityCheck {
                name: format!("own_class_lower[{j}]"),
                lhs,
                rhs: rhs_low,
                pass: lhs >= rhs_low - slack,
            });
        }
    }

    // square-sum bounds
    let own_sum: f64 = subset_f
        .iter()
        .map(|&i| {
            varnorm::v2_sq_family(&family[i], &classes[i])
                .map(|v| lambda[i] * lambda[i] * v)
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();
    let v2f = varnorm::v2_sq_family(&f_model, fam)?;
    let v2g = varnorm::v2_sq_family(&g_model, fam)?;
    report.checks.push(InequalityCheck {
        name: "square_sum_upper".into(),
        lhs: v2f,
        rhs: own_sum + max_f * max_f * (2.0 * m_const + eps) * eps,
        pass: v2f <= own_sum + max_f * max_f * (2.0 * m_const + eps) * eps + slack,
    });
    report.checks.push(InequalityCheck {
        name: "square_sum_lower".into(),
        lhs: v2g,
        rhs: own_sum - max_g * max_g * 2.0 * m_const * eps,
        pass: v2g > own_sum - max_g * max_g * 2.0 * m_const * eps - slack,
    });
    report.checks.push(InequalityCheck {
        name: "subset_monotonicity".into(),
        lhs: v2f,
        rhs: v2g + max_g * max_g * (4.0 * m_const + eps) * eps,
        pass: v2f <= v2g + max_g * max_g * (4.0 * m_const + eps) * eps + slack,
    });

    // unconditionality ratio over the full norms
    let theta = norms.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !check_ratio {
        report.skipped.push("unconditionality ratio not requested".into());
    } else if theta <= 2.0 * eps {
        report
            .skipped
            .push(format!("unconditionality ratio skipped: theta {theta} <= 2 eps {eps}"));
    } else {
        let norm_f = varnorm::v2_norm(&f_model)?.norm();
        let norm_g = varnorm::v2_norm(&g_model)?.norm();
        let ratio_bound = math::sqrt(
            1.0 + (4.0 * m_const + eps) * eps / ((theta - 2.0 * eps) * (theta - 2.0 * eps)),
        );
        report.checks.push(InequalityCheck {
            name: "unconditionality_ratio".into(),
            lhs: norm_f,
            rhs: ratio_bound * norm_g,
            pass: norm_f <= ratio_bound * norm_g + slack,
        });
    }
    Ok(report)
}
