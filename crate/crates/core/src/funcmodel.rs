//! Exact, evaluable function models on `[0,1]` with one-sided limits.
//!
//! Every model satisfies `f(0) = 0`. One-sided limits follow the conventions
//! `f(0-) = f(0)` and `f(1+) = f(1)`. Models are immutable and evaluation is
//! pure.
//!
//! Between consecutive breakpoints every model is constant, affine, or the
//! square root of an affine function (tent blocks); in particular it is
//! monotone there, which is what the variation engines rely on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::util::sorted_dedup;
use crate::varmeasure::PiecewiseLinear;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Interpolation rule for sampled data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Interpolation {
    /// Piecewise linear through the samples (continuous).
    Linear,
    /// Constant on `[t_i, t_{i+1})`, right-continuous steps.
    LeftConstant,
}

/// One step discontinuity: left limit, value at the point, right limit.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Jump {
    pub t: f64,
    pub left: f64,
    pub at: f64,
    pub right: f64,
}

/// A single square-root tent over an interval: rises as `sqrt` of the
/// relative mass from the left endpoint to the peak, falls symmetrically in
/// mass to the right endpoint, zero outside.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TentBlock {
    pub lo: f64,
    pub hi: f64,
    /// Median-mass point: relative CDF at the peak equals `total / 2`.
    pub peak: f64,
    /// Relative CDF on `[lo, hi]` with value 0 at `lo`.
    pub cdf: PiecewiseLinear,
    /// Mass of the interval (`cdf` value at `hi`).
    pub total: f64,
}

impl TentBlock {
    pub fn new(lo: f64, hi: f64, peak: f64, cdf: PiecewiseLinear) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) || !(lo < peak && peak < hi) {
            return Err(Error::InvalidModel(format!(
                "tent needs lo < peak < hi inside [0,1]; got {lo}, {peak}, {hi}"
            )));
        }
        let total = cdf.eval(hi);
        if cdf.eval(lo) != 0.0 {
            return Err(Error::InvalidModel("tent cdf must vanish at lo".into()));
        }
        let half = cdf.eval(peak);
        if (half - total / 2.0).abs() > 1e-9 * total.max(1e-300) {
            return Err(Error::InvalidModel(format!(
                "tent peak must sit at half mass: cdf(peak) = {half}, total = {total}"
            )));
        }
        Ok(TentBlock { lo, hi, peak, cdf, total })
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        if t <= self.peak {
            math::sqrt(self.cdf.eval(t).max(0.0))
        } else {
            math::sqrt((self.total - self.cdf.eval(t)).max(0.0))
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.lo, self.peak, self.hi];
        for &x in self.cdf.xs() {
            if x > self.lo && x < self.hi {
                pts.push(x);
            }
        }
        pts
    }
}

/// Exact representation of a function on `[0,1]`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum FunctionModel {
    /// Sampled values with an interpolation rule.
    GridSample {
        ts: Vec<f64>,
        vals: Vec<f64>,
        interpolation: Interpolation,
    },
    /// Piecewise constant function given by its jump list; value 0 before
    /// the first jump.
    Step { jumps: Vec<Jump> },
    /// `scale * 2^(n/2) * integral of the n-th Rademacher function`.
    Rademacher { level: u32, scale: f64 },
    /// One square-root tent block.
    TentBlock(TentBlock),
    /// Finite linear combination of models.
    Combo { terms: Vec<ComboTerm> },
}

/// One weighted term of a linear combination.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ComboTerm {
    pub coeff: f64,
    pub model: FunctionModel,
}

/// One discontinuity: `(t, f(t-), f(t), f(t+))`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct JumpPoint {
    pub t: f64,
    pub left: f64,
    pub at: f64,
    pub right: f64,
}

/// Jump set of a model; `heuristic` marks sampled-data inference.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Jumps {
    pub points: Vec<JumpPoint>,
    pub heuristic: bool,
}

impl FunctionModel {
    /// The zero model.
    pub fn zero() -> Self {
        FunctionModel::Step { jumps: Vec::new() }
    }

    /// The identity `t -> t` (Rademacher primitive of level 0).
    pub fn identity() -> Self {
        FunctionModel::Rademacher { level: 0, scale: 1.0 }
    }

    /// `scale * chi_[t,1]`, a right step at `t` in `(0,1]`.
    pub fn right_step(t: f64, scale: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "right step needs t in (0,1], got {t}"
            )));
        }
        Ok(FunctionModel::Step {
            jumps: vec![Jump { t, left: 0.0, at: scale, right: scale }],
        })
    }

    pub fn rademacher(level: u32) -> Self {
        FunctionModel::Rademacher { level, scale: 1.0 }
    }

    pub fn grid_sample(ts: Vec<f64>, vals: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if ts.len() != vals.len() {
            return Err(Error::LengthMismatch { left: ts.len(), right: vals.len() });
        }
        if ts.len() < 2 || ts[0] != 0.0 || *ts.last().unwrap() != 1.0 {
            return Err(Error::InvalidModel(
                "grid sample must start at 0 and end at 1".into(),
            ));
        }
        for w in ts.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidModel("sample points must increase".into()));
            }
        }
        if vals[0] != 0.0 {
            return Err(Error::InvalidModel("models satisfy f(0) = 0".into()));
        }
        Ok(FunctionModel::GridSample { ts, vals, interpolation })
    }

    /// Validated step function from a jump list. Levels must chain: the
    /// right value of each jump is the left value of the next one, the
    /// first left value is 0, and a jump at 0 keeps `f(0) = 0`.
    pub fn step(jumps: Vec<Jump>) -> Result<Self> {
        let mut level = 0.0;
        for (i, j) in jumps.iter().enumerate() {
            if !(0.0..=1.0).contains(&j.t) {
                return Err(Error::InvalidModel(format!("jump at {} outside [0,1]", j.t)));
            }
            if i > 0 && !(jumps[i - 1].t < j.t) {
                return Err(Error::InvalidModel("jump points must increase".into()));
            }
            if j.left != level {
                return Err(Error::InvalidModel(format!(
                    "jump at {} has left value {} but incoming level {}",
                    j.t, j.left, level
                )));
            }
            if j.t == 0.0 && j.at != 0.0 {
                return Err(Error::InvalidModel("models satisfy f(0) = 0".into()));
            }
            level = j.right;
        }
        Ok(FunctionModel::Step { jumps })
    }

    pub fn combo(terms: Vec<(f64, FunctionModel)>) -> Result<Self> {
        Ok(FunctionModel::Combo {
            terms: terms
                .into_iter()
                .map(|(coeff, model)| ComboTerm { coeff, model })
                .collect(),
        })
    }

    pub fn scaled(self, coeff: f64) -> Self {
        match self {
            FunctionModel::Rademacher { level, scale } => {
                FunctionModel::Rademacher { level, scale: scale * coeff }
            }
            other => FunctionModel::Combo {
                terms: vec![ComboTerm { coeff, model: other }],
            },
        }
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Left limit `f(t-)`, with `f(0-) = f(0)`.
    pub fn eval_left(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        Ok(self.eval_left_unchecked(t))
    }

    /// Right limit `f(t+)`, with `f(1+) = f(1)`.
    pub fn eval_right(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        Ok(self.eval_right_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            FunctionModel::GridSample { ts, vals, interpolation } => {
                grid_eval(ts, vals, *interpolation, t)
            }
            FunctionModel::Step { jumps } => step_eval(jumps, t),
            FunctionModel::Rademacher { level, scale } => scale * rademacher_primitive(*level, t),
            FunctionModel::TentBlock(tb) => tb.eval(t),
            FunctionModel::Combo { terms } => terms
                .iter()
                .map(|term| term.coeff * term.model.eval_unchecked(t))
                .sum(),
        }
    }

    pub(crate) fn eval_left_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.eval_unchecked(0.0);
        }
        match self {
            FunctionModel::GridSample { ts, vals, interpolation } => match interpolation {
                Interpolation::Linear => grid_eval(ts, vals, *interpolation, t),
                Interpolation::LeftConstant => {
                    // constant on [t_i, t_{i+1}); approaching t from the left
                    // lands on the previous plateau when t is a sample point.
                    match ts.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
                        Ok(i) => {
                            if i == 0 {
                                vals[0]
                            } else {
                                vals[i - 1]
                            }
                        }
                        Err(_) => grid_eval(ts, vals, *interpolation, t),
                    }
                }
            },
            FunctionModel::Step { jumps } => {
                for j in jumps {
                    if j.t == t {
                        return j.left;
                    }
                }
                step_eval(jumps, t)
            }
            FunctionModel::Rademacher { .. } | FunctionModel::TentBlock(_) => {
                self.eval_unchecked(t)
            }
            FunctionModel::Combo { terms } => terms
                .iter()
                .map(|term| term.coeff * term.model.eval_left_unchecked(t))
                .sum(),
        }
    }

    pub(crate) fn eval_right_unchecked(&self, t: f64) -> f64 {
        if t == 1.0 {
            return self.eval_unchecked(1.0);
        }
        match self {
            FunctionModel::GridSample { ts, vals, interpolation } => match interpolation {
                Interpolation::Linear => grid_eval(ts, vals, *interpolation, t),
                // right-continuous
                Interpolation::LeftConstant => grid_eval(ts, vals, *interpolation, t),
            },
            FunctionModel::Step { jumps } => {
                for j in jumps {
                    if j.t == t {
                        return j.right;
                    }
                }
                step_eval(jumps, t)
            }
            FunctionModel::Rademacher { .. } | FunctionModel::TentBlock(_) => {
                self.eval_unchecked(t)
            }
            FunctionModel::Combo { terms } => terms
                .iter()
                .map(|term| term.coeff * term.model.eval_right_unchecked(t))
                .sum(),
        }
    }

    /// Minimal point set outside of which the model is monotone on every
    /// open gap; contains 0 and 1, sorted, exact-deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, 1.0];
        self.collect_breakpoints(&mut pts);
        sorted_dedup(pts)
    }

    fn collect_breakpoints(&self, pts: &mut Vec<f64>) {
        match self {
            FunctionModel::GridSample { ts, .. } => pts.extend_from_slice(ts),
            FunctionModel::Step { jumps } => pts.extend(jumps.iter().map(|j| j.t)),
            FunctionModel::Rademacher { level, scale } => {
                if *scale != 0.0 {
                    let n = 1u64 << level;
                    pts.reserve(n as usize + 1);
                    for k in 0..=n {
                        pts.push(k as f64 / n as f64);
                    }
                }
            }
            FunctionModel::TentBlock(tb) => pts.extend(tb.breakpoints()),
            FunctionModel::Combo { terms } => {
                for term in terms {
                    if term.coeff != 0.0 {
                        term.model.collect_breakpoints(pts);
                    }
                }
            }
        }
    }

    /// True when some gap between breakpoints may hold values not attained
    /// at any breakpoint (plateaus of step-like parts). The variation-norm
    /// candidate builder inserts gap midpoints for such models.
    pub(crate) fn has_plateaus(&self) -> bool {
        match self {
            FunctionModel::Step { .. } => true,
            FunctionModel::GridSample { interpolation, .. } => {
                *interpolation == Interpolation::LeftConstant
            }
            FunctionModel::Combo { terms } => terms.iter().any(|t| t.model.has_plateaus()),
            _ => false,
        }
    }

    /// True when some segment between breakpoints is curved (tent blocks);
    /// the sup-norm then needs per-gap refinement.
    fn has_curved_segments(&self) -> bool {
        match self {
            FunctionModel::TentBlock(_) => true,
            FunctionModel::Combo { terms } => {
                terms.iter().any(|t| t.coeff != 0.0 && t.model.has_curved_segments())
            }
            _ => false,
        }
    }

    /// True when any part is sampled data (jump inference is heuristic).
    pub fn is_sampled(&self) -> bool {
        match self {
            FunctionModel::GridSample { .. } => true,
            FunctionModel::Combo { terms } => terms.iter().any(|t| t.model.is_sampled()),
            _ => false,
        }
    }

    /// Hull of the set where the model can be nonzero, when it is smaller
    /// than `[0,1]`. Conservative: based on structure, not cancellation.
    pub fn support_hull(&self) -> (f64, f64) {
        match self {
            FunctionModel::TentBlock(tb) => (tb.lo, tb.hi),
            FunctionModel::Step { jumps } => {
                if jumps.is_empty() {
                    (0.0, 0.0)
                } else {
                    (jumps[0].t, 1.0)
                }
            }
            FunctionModel::Rademacher { scale, .. } => {
                if *scale == 0.0 {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
            FunctionModel::GridSample { ts, vals, .. } => {
                let mut lo = 1.0f64;
                let mut hi = 0.0f64;
                for (i, &v) in vals.iter().enumerate() {
                    if v != 0.0 {
                        let a = if i == 0 { ts[0] } else { ts[i - 1] };
                        let b = if i + 1 < ts.len() { ts[i + 1] } else { ts[i] };
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
                if lo > hi {
                    (0.0, 0.0)
                } else {
                    (lo, hi)
                }
            }
            FunctionModel::Combo { terms } => {
                let mut lo = 1.0f64;
                let mut hi = 0.0f64;
                let mut any = false;
                for term in terms {
                    if term.coeff == 0.0 {
                        continue;
                    }
                    let (a, b) = term.model.support_hull();
                    if b > a || (a, b) != (0.0, 0.0) {
                        lo = lo.min(a);
                        hi = hi.max(b);
                        any = true;
                    }
                }
                if any {
                    (lo, hi)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// Exact supremum of `|f|` over `[0,1]`.
    ///
    /// On affine segments the extremes sit at breakpoints and one-sided
    /// limits; curved (tent) segments get a sign-change bisection of the
    /// derivative per gap, which resolves the maximum to full precision.
    pub fn sup_norm(&self) -> f64 {
        match self {
            FunctionModel::Rademacher { level, scale } => {
                math::abs(*scale) * math::exp2(-(*level as f64) / 2.0)
            }
            FunctionModel::TentBlock(tb) => math::sqrt(tb.total / 2.0),
            _ => {
                let pts = self.breakpoints();
                let mut best = 0.0f64;
                for &t in &pts {
                    best = best
                        .max(math::abs(self.eval_unchecked(t)))
                        .max(math::abs(self.eval_left_unchecked(t)))
                        .max(math::abs(self.eval_right_unchecked(t)));
                }
                if self.has_curved_segments() {
                    for w in pts.windows(2) {
                        best = best.max(self.refine_gap_extremum(w[0], w[1]));
                    }
                }
                best
            }
        }
    }

    /// Maximum of `|f|` inside one breakpoint gap, by sampling plus
    /// bisection of sign changes of the finite-difference slope.
    fn refine_gap_extremum(&self, a: f64, b: f64) -> f64 {
        const SAMPLES: usize = 16;
        let h = (b - a) / (SAMPLES as f64 + 1.0);
        if h <= 0.0 {
            return 0.0;
        }
        let mut best = 0.0f64;
        let mut xs = [0.0f64; SAMPLES + 2];
        for (i, x) in xs.iter_mut().enumerate() {
            *x = a + h * i as f64;
        }
        xs[SAMPLES + 1] = b;
        for sign in [1.0f64, -1.0] {
            let g = |x: f64| sign * self.eval_unchecked(x);
            for w in xs.windows(3) {
                // local max pattern
                if g(w[1]) >= g(w[0]) && g(w[1]) >= g(w[2]) {
                    let (mut lo, mut hi) = (w[0], w[2]);
                    for _ in 0..60 {
                        let m1 = lo + (hi - lo) / 3.0;
                        let m2 = hi - (hi - lo) / 3.0;
                        if g(m1) < g(m2) {
                            lo = m1;
                        } else {
                            hi = m2;
                        }
                    }
                    best = best.max(math::abs(self.eval_unchecked(0.5 * (lo + hi))));
                }
            }
        }
        best
    }

    /// Standard pointwise oscillation: `max(|f(t+)-f(t)|, |f(t-)-f(t)|)`.
    /// Zero exactly at continuity points.
    pub fn pointwise_osc(&self, t: f64) -> Result<f64> {
        let at = self.eval(t)?;
        let left = self.eval_left_unchecked(t);
        let right = self.eval_right_unchecked(t);
        Ok(math::abs(right - at).max(math::abs(left - at)))
    }

    /// Discontinuities `(t, f(t-), f(t), f(t+))`.
    ///
    /// Exact for symbolic models. For sampled data, jump locations are
    /// inferred from increments exceeding five times the median absolute
    /// increment and the result is flagged heuristic.
    pub fn jump_points(&self) -> Jumps {
        if self.is_sampled() {
            return self.sampled_jumps();
        }
        let mut candidates = Vec::new();
        self.collect_jump_candidates(&mut candidates);
        let candidates = sorted_dedup(candidates);
        let mut points = Vec::new();
        for t in candidates {
            let at = self.eval_unchecked(t);
            let left = self.eval_left_unchecked(t);
            let right = self.eval_right_unchecked(t);
            if left != at || right != at {
                points.push(JumpPoint { t, left, at, right });
            }
        }
        Jumps { points, heuristic: false }
    }

    fn collect_jump_candidates(&self, out: &mut Vec<f64>) {
        match self {
            FunctionModel::Step { jumps } => out.extend(jumps.iter().map(|j| j.t)),
            FunctionModel::Combo { terms } => {
                for term in terms {
                    if term.coeff != 0.0 {
                        term.model.collect_jump_candidates(out);
                    }
                }
            }
            _ => {}
        }
    }

    fn sampled_jumps(&self) -> Jumps {
        // Threshold: 5 x median absolute increment of the model's own
        // breakpoint values.
        let pts = self.breakpoints();
        let vals: Vec<f64> = pts.iter().map(|&t| self.eval_unchecked(t)).collect();
        let mut incs: Vec<f64> = vals.windows(2).map(|w| math::abs(w[1] - w[0])).collect();
        incs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if incs.is_empty() { 0.0 } else { incs[incs.len() / 2] };
        let threshold = 5.0 * median;
        let mut points = Vec::new();
        // Structural jumps of step-like parts always count.
        let mut structural = Vec::new();
        self.collect_jump_candidates(&mut structural);
        for (i, w) in pts.windows(2).enumerate() {
            let gap = math::abs(vals[i + 1] - vals[i]);
            let t = w[1];
            let at = vals[i + 1];
            let left = self.eval_left_unchecked(t);
            let right = self.eval_right_unchecked(t);
            if left != at || right != at || (threshold > 0.0 && gap > threshold) {
                points.push(JumpPoint { t, left, at, right });
            }
        }
        for t in structural {
            if !points.iter().any(|p| p.t == t) {
                let at = self.eval_unchecked(t);
                points.push(JumpPoint {
                    t,
                    left: self.eval_left_unchecked(t),
                    at,
                    right: self.eval_right_unchecked(t),
                });
            }
        }
        points.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        points.dedup_by(|a, b| a.t == b.t);
        Jumps { points, heuristic: true }
    }
}

fn grid_eval(ts: &[f64], vals: &[f64], interp: Interpolation, t: f64) -> f64 {
    match ts.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
        Ok(i) => vals[i],
        Err(i) => {
            // ts[0] = 0 <= t <= 1 = ts[last], so 0 < i < len here.
            let (t0, t1) = (ts[i - 1], ts[i]);
            match interp {
                Interpolation::Linear => {
                    let w = (t - t0) / (t1 - t0);
                    vals[i - 1] + w * (vals[i] - vals[i - 1])
                }
                Interpolation::LeftConstant => vals[i - 1],
            }
        }
    }
}

fn step_eval(jumps: &[Jump], t: f64) -> f64 {
    // level after the last jump at or before t; exact value at jump points.
    let mut level = 0.0;
    for j in jumps {
        if j.t < t {
            level = j.right;
        } else if j.t == t {
            return j.at;
        } else {
            break;
        }
    }
    level
}

/// `R_n(t) = 2^(n/2) * integral_0^t r_n`, where `r_n` has sign `(-1)^k` on
/// the k-th dyadic cell of width `2^-n`. Exact for dyadic `t`.
fn rademacher_primitive(level: u32, t: f64) -> f64 {
    let n = level;
    let cells = math::exp2(n as f64);
    let u = t * cells;
    let k = math::floor(u);
    let frac = u - k;
    let k_int = k as u64;
    let parity = if k_int % 2 == 1 { 1.0 } else { 0.0 };
    let signed_frac = if k_int % 2 == 0 { frac } else { -frac };
    math::exp2(-(n as f64) / 2.0) * (parity + signed_frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_steps() -> FunctionModel {
        // chi_[0.25,0.5] + 2 chi_(0.5,1]
        FunctionModel::step(vec![
            Jump { t: 0.25, left: 0.0, at: 1.0, right: 1.0 },
            Jump { t: 0.5, left: 1.0, at: 1.0, right: 2.0 },
        ])
        .unwrap()
    }

    #[test]
    fn step_one_sided_limits() {
        let f = FunctionModel::right_step(0.5, 1.0).unwrap();
        assert_eq!(f.eval(0.5).unwrap(), 1.0);
        assert_eq!(f.eval_left(0.5).unwrap(), 0.0);
        assert_eq!(f.eval_right(0.5).unwrap(), 1.0);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn rademacher_values() {
        let r1 = FunctionModel::rademacher(1);
        let v = r1.eval(0.5).unwrap();
        assert!((v - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r1.eval(0.0).unwrap(), 0.0);
        assert_eq!(r1.eval(1.0).unwrap(), 0.0);
        // R_0 is the identity
        let id = FunctionModel::identity();
        assert_eq!(id.eval(0.375).unwrap(), 0.375);
    }

    #[test]
    fn combo_linearity() {
        let f = FunctionModel::combo(vec![
            (2.0, FunctionModel::identity()),
            (-1.0, FunctionModel::identity()),
        ])
        .unwrap();
        for t in [0.0, 0.3, 0.7, 1.0] {
            assert!((f.eval(t).unwrap() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn sup_norms() {
        for n in 0..=12u32 {
            let r = FunctionModel::rademacher(n);
            let expect = math::exp2(-(n as f64) / 2.0);
            assert!((r.sup_norm() - expect).abs() < 1e-15);
        }
        assert_eq!(two_steps().sup_norm(), 2.0);
        assert_eq!(FunctionModel::zero().sup_norm(), 0.0);
    }

    #[test]
    fn oscillation_values() {
        let r = FunctionModel::rademacher(3);
        for t in [0.0, 0.1, 0.5, 1.0] {
            assert_eq!(r.pointwise_osc(t).unwrap(), 0.0);
        }
        let f = FunctionModel::right_step(0.5, 1.0).unwrap();
        assert_eq!(f.pointwise_osc(0.5).unwrap(), 1.0);
        assert_eq!(two_steps().pointwise_osc(0.5).unwrap(), 1.0);
    }

    #[test]
    fn jump_points_of_steps() {
        let jumps = two_steps().jump_points();
        assert!(!jumps.heuristic);
        assert_eq!(jumps.points.len(), 2);
        let p = jumps.points[0];
        assert_eq!((p.t, p.left, p.at, p.right), (0.25, 0.0, 1.0, 1.0));
        let q = jumps.points[1];
        assert_eq!((q.t, q.left, q.at, q.right), (0.5, 1.0, 1.0, 2.0));
        assert!(FunctionModel::rademacher(4).jump_points().points.is_empty());
    }

    #[test]
    fn shared_jump_points_merge_in_combos() {
        let f = FunctionModel::combo(vec![
            (1.0, FunctionModel::right_step(0.5, 1.0).unwrap()),
            (1.0, FunctionModel::right_step(0.5, 2.0).unwrap()),
        ])
        .unwrap();
        let jumps = f.jump_points();
        assert_eq!(jumps.points.len(), 1);
        let p = jumps.points[0];
        assert_eq!((p.t, p.left, p.at, p.right), (0.5, 0.0, 3.0, 3.0));
    }

    #[test]
    fn step_chain_validation() {
        assert!(FunctionModel::step(vec![Jump { t: 0.3, left: 0.5, at: 1.0, right: 1.0 }])
            .is_err());
        assert!(FunctionModel::step(vec![Jump { t: 0.0, left: 0.0, at: 1.0, right: 1.0 }])
            .is_err());
    }

    #[test]
    fn one_sided_limits_match_numeric_limits() {
        let f = FunctionModel::combo(vec![
            (1.5, FunctionModel::rademacher(2)),
            (1.0, two_steps()),
        ])
        .unwrap();
        for &t in &[0.25, 0.5, 0.375] {
            let eps = 1e-12;
            let left = f.eval(t - eps).unwrap();
            let right = f.eval(t + eps).unwrap();
            assert!((f.eval_left(t).unwrap() - left).abs() < 1e-8);
            assert!((f.eval_right(t).unwrap() - right).abs() < 1e-8);
        }
    }
}
