//! Estimation of the variation measure of a function: atoms, distribution
//! function, discrete/continuous split, norm and distance bounds.
//!
//! The measure of a function is represented operationally: exact atoms
//! computed from one-sided limits, and a ladder of mesh-constrained
//! distribution functions whose last entry is the extrapolated value. The
//! mesh-constrained value is monotone in the mesh bound, so the last ladder
//! entry is a certified upper bound of the limit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::funcmodel::FunctionModel;
use crate::intervals::Interval;
use crate::math;
use crate::util::{dyadic_step_at_most, sorted_dedup};
use crate::varnorm;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Monotone piecewise-linear function on `[0,1]`, used for continuous CDFs
/// and tent-block mass profiles. `xs` strictly increasing spanning `[0,1]`
/// is not required: evaluation clamps to the covered range.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
        }
        if xs.len() < 2 {
            return Err(Error::InvalidMeasure("cdf needs at least two knots".into()));
        }
        for w in xs.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidMeasure("cdf knots must increase".into()));
            }
        }
        for w in ys.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidMeasure("cdf values must be nondecreasing".into()));
            }
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    /// Constant-zero profile.
    pub fn zero() -> Self {
        PiecewiseLinear { xs: vec![0.0, 1.0], ys: vec![0.0, 0.0] }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => self.ys[i],
            Err(i) => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.ys[i - 1], self.ys[i]);
                y0 + (x - x0) / (x1 - x0) * (y1 - y0)
            }
        }
    }

    /// Leftmost point where the profile reaches `q` (clamped to range).
    pub fn inverse_leftmost(&self, q: f64) -> f64 {
        let last = *self.ys.last().unwrap();
        if q <= self.ys[0] {
            return self.xs[0];
        }
        if q > last {
            return *self.xs.last().unwrap();
        }
        // first knot index with ys[i] >= q
        let mut lo = 0usize;
        let mut hi = self.ys.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.ys[mid] >= q {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let i = lo;
        if self.ys[i] == q {
            // walk back over a plateau to the leftmost attaining point
            let mut j = i;
            while j > 0 && self.ys[j - 1] == q {
                j -= 1;
            }
            return self.xs[j];
        }
        // strictly inside segment (i-1, i)
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        x0 + (q - y0) / (y1 - y0) * (x1 - x0)
    }

    /// Relative profile on `[lo, hi]`: value 0 at `lo`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<PiecewiseLinear> {
        let base = self.eval(lo);
        let mut xs = vec![lo];
        let mut ys = vec![0.0];
        for (&x, &y) in self.xs.iter().zip(self.ys.iter()) {
            if x > lo && x < hi {
                xs.push(x);
                ys.push(y - base);
            }
        }
        xs.push(hi);
        ys.push(self.eval(hi) - base);
        PiecewiseLinear::new(xs, ys)
    }
}

/// A finite positive Borel measure on `[0,1]`: atoms plus a continuous CDF.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeasureSpec {
    /// `(t, mass)` with `t` strictly increasing in `(0, 1]`, masses positive.
    atoms: Vec<(f64, f64)>,
    /// Continuous part CDF, value 0 at 0.
    continuous_cdf: PiecewiseLinear,
}

impl MeasureSpec {
    pub fn new(mut atoms: Vec<(f64, f64)>, continuous_cdf: PiecewiseLinear) -> Result<Self> {
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidMeasure(format!("duplicate atom at {}", w[0].0)));
            }
        }
        for &(t, mass) in &atoms {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {t} outside (0,1]"
                )));
            }
            if mass <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {t} has nonpositive mass {mass}"
                )));
            }
        }
        if continuous_cdf.eval(0.0) != 0.0 {
            return Err(Error::InvalidMeasure("continuous cdf must vanish at 0".into()));
        }
        Ok(MeasureSpec { atoms, continuous_cdf })
    }

    /// Lebesgue measure on `[0,1]`.
    pub fn lebesgue() -> Self {
        MeasureSpec {
            atoms: Vec::new(),
            continuous_cdf: PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(),
        }
    }

    /// Purely atomic measure.
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        MeasureSpec::new(atoms, PiecewiseLinear::zero())
    }

    /// Purely continuous measure from a CDF.
    pub fn from_cdf(cdf: PiecewiseLinear) -> Result<Self> {
        MeasureSpec::new(Vec::new(), cdf)
    }

    pub fn zero() -> Self {
        MeasureSpec { atoms: Vec::new(), continuous_cdf: PiecewiseLinear::zero() }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn continuous_cdf(&self) -> &PiecewiseLinear {
        &self.continuous_cdf
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass.
    pub fn norm(&self) -> f64 {
        self.atom_mass() + self.continuous_cdf.eval(1.0)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    pub fn continuous_mass(&self) -> f64 {
        self.continuous_cdf.eval(1.0)
    }

    /// `mu((0, t])`: the full CDF including atoms at or below `t`.
    pub fn mass_up_to(&self, t: f64) -> f64 {
        let atom_part: f64 =
            self.atoms.iter().take_while(|&&(a, _)| a <= t).map(|&(_, m)| m).sum();
        atom_part + self.continuous_cdf.eval(t)
    }

    /// `mu((a, b])`.
    pub fn mass_half_open(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.mass_up_to(b) - self.mass_up_to(a)
    }

    /// `mu([a, b])` (includes an atom at `a`).
    pub fn mass_closed(&self, a: f64, b: f64) -> f64 {
        let atom_at_a: f64 = self
            .atoms
            .iter()
            .filter(|&&(t, _)| t == a)
            .map(|&(_, m)| m)
            .sum();
        self.mass_half_open(a, b) + atom_at_a
    }

    /// Leftmost point where the full CDF reaches `q`. Intended for atomless
    /// measures (quantile construction).
    pub fn quantile_leftmost(&self, q: f64) -> f64 {
        self.continuous_cdf.inverse_leftmost(q)
    }

    /// Scale all masses by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<MeasureSpec> {
        if factor < 0.0 {
            return Err(Error::InvalidMeasure("scale factor must be nonnegative".into()));
        }
        if factor == 0.0 {
            return Ok(MeasureSpec::zero());
        }
        let atoms = self.atoms.iter().map(|&(t, m)| (t, m * factor)).collect();
        let ys = self.continuous_cdf.ys.iter().map(|&y| y * factor).collect();
        MeasureSpec::new(atoms, PiecewiseLinear::new(self.continuous_cdf.xs.clone(), ys)?)
    }

    /// Pointwise sum of measures (atoms merged, CDFs added on merged knots).
    pub fn sum(&self, other: &MeasureSpec) -> Result<MeasureSpec> {
        let mut atoms = self.atoms.clone();
        for &(t, m) in &other.atoms {
            match atoms.iter_mut().find(|(s, _)| *s == t) {
                Some(entry) => entry.1 += m,
                None => atoms.push((t, m)),
            }
        }
        let xs = sorted_dedup(
            self.continuous_cdf
                .xs
                .iter()
                .chain(other.continuous_cdf.xs.iter())
                .copied()
                .collect(),
        );
        let ys = xs
            .iter()
            .map(|&x| self.continuous_cdf.eval(x) + other.continuous_cdf.eval(x))
            .collect();
        MeasureSpec::new(atoms, PiecewiseLinear::new(xs, ys)?)
    }
}

/// The atom `mu_f({x0})` computed from one-sided limits:
/// `max(|f(x0+)-f(x0-)|^2, |f(x0+)-f(x0)|^2 + |f(x0-)-f(x0)|^2)`.
pub fn tau(f: &FunctionModel, x0: f64) -> Result<f64> {
    let left = f.eval_left(x0)?;
    let at = f.eval(x0)?;
    let right = f.eval_right(x0)?;
    let across = (right - left) * (right - left);
    let split = (right - at) * (right - at) + (left - at) * (left - at);
    Ok(across.max(split))
}

/// Atomic part of the measure: `(t, tau(t))` over the jump set.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AtomicPart {
    pub atoms: Vec<(f64, f64)>,
    /// Propagated from sampled-data jump inference.
    pub heuristic: bool,
}

impl AtomicPart {
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }
}

/// All atoms of the variation measure of `f`.
pub fn atomic_part(f: &FunctionModel) -> Result<AtomicPart> {
    let jumps = f.jump_points();
    let mut atoms = Vec::new();
    for p in &jumps.points {
        let t = tau(f, p.t)?;
        if t > 0.0 {
            atoms.push((p.t, t));
        }
    }
    Ok(AtomicPart { atoms, heuristic: jumps.heuristic })
}

fn contains_tent(f: &FunctionModel) -> bool {
    match f {
        FunctionModel::TentBlock(_) => true,
        FunctionModel::Combo { terms } => {
            terms.iter().any(|t| t.coeff != 0.0 && contains_tent(&t.model))
        }
        _ => false,
    }
}

/// Exact variation measure for models without tent parts: steps contribute
/// their atoms, piecewise-affine continuous parts contribute nothing (they
/// have vanishing mesh-constrained variation in the limit).
pub fn exact_measure(f: &FunctionModel) -> Option<MeasureSpec> {
    if contains_tent(f) {
        return None;
    }
    let part = atomic_part(f).ok()?;
    MeasureSpec::from_atoms(part.atoms).ok()
}

/// Grid construction policy for the mesh-constrained DP.
#[derive(Clone, Debug)]
pub struct GridPolicy {
    /// Grid spacing target is `delta / divisor` (dyadic step).
    pub divisor: f64,
    /// Hard cap on grid points per pass.
    pub max_points: usize,
    /// Merge model breakpoints into the grid.
    pub include_breakpoints: bool,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy { divisor: 4.0, max_points: 1 << 22, include_breakpoints: true }
    }
}

impl GridPolicy {
    /// Build the evaluation grid for one mesh bound over `[lo, hi]`.
    pub fn build(&self, f: &FunctionModel, lo: f64, hi: f64, delta: f64) -> Result<Vec<f64>> {
        let step = dyadic_step_at_most(delta / self.divisor);
        let needed = ((hi - lo) / step) as usize + 2;
        if needed > self.max_points {
            return Err(Error::GridOverflow { needed, cap: self.max_points });
        }
        let mut pts = Vec::with_capacity(needed);
        let mut k = crate::math::floor(lo / step) as i64;
        loop {
            let t = k as f64 * step;
            if t > hi {
                break;
            }
            if t >= lo {
                pts.push(t);
            }
            k += 1;
        }
        pts.push(lo);
        pts.push(hi);
        if self.include_breakpoints {
            pts.extend(f.breakpoints().into_iter().filter(|&t| t >= lo && t <= hi));
        }
        Ok(sorted_dedup(pts))
    }
}

/// Ladder of mesh-constrained CDF samples with extrapolation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeasureEstimate {
    pub xs: Vec<f64>,
    /// Strictly decreasing mesh bounds.
    pub delta_ladder: Vec<f64>,
    /// `samples[k][i]` is the mesh-constrained value at `xs[i]` for ladder
    /// entry `k`; nonincreasing in `k` for fixed `i`.
    pub samples: Vec<Vec<f64>>,
    /// Last-ladder values (certified upper bounds of the limit).
    pub extrapolated: Vec<f64>,
    /// Per-point flag: the last two ladder entries agree within `rel_tol`.
    pub converged: Vec<bool>,
    /// Atoms from the exact jump analysis.
    pub atoms: Vec<(f64, f64)>,
    /// Sampled-data jump inference was involved.
    pub heuristic: bool,
    pub rel_tol: f64,
}

impl MeasureEstimate {
    /// Estimated total mass: extrapolated value at the last sample point
    /// (the builder guarantees the last point is 1).
    pub fn norm_estimate(&self) -> f64 {
        *self.extrapolated.last().unwrap_or(&0.0)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Extrapolated CDF value at a sample point (exact match required).
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.xs
            .iter()
            .position(|&t| t == x)
            .map(|i| self.extrapolated[i])
    }
}

/// Default ladder `2^-2, ..., 2^-10`.
pub fn default_ladder() -> Vec<f64> {
    (2..=10).map(|k| math::exp2(-(k as f64))).collect()
}

/// Default sample points: dyadic level 8 plus model breakpoints.
pub fn default_xs(f: &FunctionModel) -> Vec<f64> {
    let mut xs = varnorm::dyadic_grid(8);
    xs.extend(f.breakpoints());
    sorted_dedup(xs)
}

/// Mesh-constrained distribution function along a ladder of mesh bounds.
///
/// For each ladder entry the windowed DP runs once over `[0,1]` and prefix
/// maxima give the value at every sample point. Extrapolation is the last
/// ladder value; a point is flagged converged when the last two entries
/// differ by less than `rel_tol` relatively.
pub fn estimate_cdf(
    f: &FunctionModel,
    xs: &[f64],
    ladder: &[f64],
    policy: &GridPolicy,
) -> Result<MeasureEstimate> {
    estimate_cdf_with_tol(f, xs, ladder, policy, 1e-3)
}

pub fn estimate_cdf_with_tol(
    f: &FunctionModel,
    xs: &[f64],
    ladder: &[f64],
    policy: &GridPolicy,
    rel_tol: f64,
) -> Result<MeasureEstimate> {
    if ladder.is_empty() {
        return Err(Error::InvalidLadder("empty ladder".into()));
    }
    for w in ladder.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidLadder(format!(
                "ladder not strictly decreasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    if *ladder.last().unwrap() <= 0.0 {
        return Err(Error::InvalidLadder("ladder entries must be positive".into()));
    }
    let mut xs = sorted_dedup(xs.to_vec());
    if xs.last() != Some(&1.0) {
        xs.push(1.0);
    }
    if xs.first() != Some(&0.0) {
        xs.insert(0, 0.0);
    }

    // One shared grid at the finest ladder resolution: coarser entries then
    // optimize over supersets of the same transitions, which makes the
    // ladder monotone in the mesh bound by construction.
    let grid = policy.build(f, 0.0, 1.0, *ladder.last().unwrap())?;
    let mut samples = Vec::with_capacity(ladder.len());
    for &delta in ladder {
        samples.push(prefix_mesh_var(f, &grid, delta, &xs)?);
    }

    let extrapolated = samples.last().unwrap().clone();
    let converged: Vec<bool> = if samples.len() >= 2 {
        let prev = &samples[samples.len() - 2];
        extrapolated
            .iter()
            .zip(prev.iter())
            .map(|(&a, &b)| (a - b).abs() <= rel_tol * a.abs().max(1e-12))
            .collect()
    } else {
        vec![false; extrapolated.len()]
    };

    let part = atomic_part(f)?;
    Ok(MeasureEstimate {
        xs,
        delta_ladder: ladder.to_vec(),
        samples,
        extrapolated,
        converged,
        atoms: part.atoms,
        heuristic: part.heuristic,
        rel_tol,
    })
}

/// One windowed DP pass over a prepared grid: the mesh-constrained prefix
/// supremum at each requested point. Rows for several mesh bounds over the
/// same grid are independent and may run in parallel.
pub fn mesh_profile(f: &FunctionModel, grid: &[f64], delta: f64, xs: &[f64]) -> Result<Vec<f64>> {
    prefix_mesh_var(f, grid, delta, xs)
}

/// One windowed DP pass; returns prefix suprema at the requested points.
fn prefix_mesh_var(f: &FunctionModel, grid: &[f64], delta: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let vals: Vec<f64> = grid.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    let mut dp = vec![0.0f64; n];
    let mut best_prefix = vec![0.0f64; n];
    let mut lo = 0usize;
    for j in 0..n {
        if j > 0 {
            while grid[j] - grid[lo] >= delta - crate::MESH_GUARD {
                lo += 1;
            }
            let mut bj = 0.0f64;
            for i in lo..j {
                let d = vals[j] - vals[i];
                let cand = dp[i] + d * d;
                if cand > bj {
                    bj = cand;
                }
            }
            dp[j] = bj;
            best_prefix[j] = best_prefix[j - 1].max(bj);
        }
    }
    // value at x: best over grid points <= x
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let idx = match grid.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        };
        out.push(idx.map_or(0.0, |i| best_prefix[i]));
    }
    Ok(out)
}

/// Lower and upper bounds for the distance to the small-variation subspace:
/// `sqrt(norm(mu_f))` and `sqrt(norm(mu_f)) + 2 sqrt(norm(mu_f^d))`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DistBounds {
    pub lower: f64,
    pub upper: f64,
    /// True when derived from an unconverged estimate.
    pub approximate: bool,
}

/// Distance bounds from an exact measure when available, otherwise from a
/// default-ladder estimate.
pub fn dist_bounds(f: &FunctionModel) -> Result<DistBounds> {
    if let Some(spec) = exact_measure(f) {
        let total = spec.norm();
        let discrete = spec.atom_mass();
        return Ok(DistBounds {
            lower: math::sqrt(total),
            upper: math::sqrt(total) + 2.0 * math::sqrt(discrete),
            approximate: f.is_sampled(),
        });
    }
    let est = estimate_cdf(f, &default_xs(f), &default_ladder(), &GridPolicy::default())?;
    Ok(dist_bounds_from_estimate(&est))
}

pub fn dist_bounds_from_estimate(est: &MeasureEstimate) -> DistBounds {
    let total = est.norm_estimate();
    let discrete = est.atom_mass();
    DistBounds {
        lower: math::sqrt(total),
        upper: math::sqrt(total) + 2.0 * math::sqrt(discrete),
        approximate: !est.all_converged() || est.heuristic,
    }
}

/// One named inequality evaluation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AlgebraCheck {
    pub name: alloc::string::String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; nonpositive means the inequality holds.
    pub slack: f64,
    pub pass: bool,
}

/// Report of the measure-algebra inequalities for a pair of models.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeasureAlgebraReport {
    pub checks: Vec<AlgebraCheck>,
    pub worst_slack: f64,
}

impl MeasureAlgebraReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Evaluate the measure-algebra relations on estimated CDFs over a shared
/// grid and ladder: subadditivity `mu_{f+g} <= 2 mu_f + 2 mu_g` per cell,
/// the scaling identity at the DP level, and the Lipschitz bound for the
/// measure map. Violations beyond tolerance indicate an implementation bug.
pub fn measure_algebra_check(
    f1: &FunctionModel,
    f2: &FunctionModel,
    lambda: f64,
    xs: &[f64],
    ladder: &[f64],
    policy: &GridPolicy,
) -> Result<MeasureAlgebraReport> {
    let sum_model = FunctionModel::combo(vec![(1.0, f1.clone()), (1.0, f2.clone())])?;
    let est1 = estimate_cdf(f1, xs, ladder, policy)?;
    let est2 = estimate_cdf(f2, xs, ladder, policy)?;
    let est_sum = estimate_cdf(&sum_model, xs, ladder, policy)?;

    let mut checks = Vec::new();
    let tol = 1e-9;

    // (i) subadditivity per cell of the shared x-grid
    let mut worst_lhs = 0.0f64;
    let mut worst_rhs = 0.0f64;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..est1.xs.len() {
        let cell = |est: &MeasureEstimate| est.extrapolated[i] - est.extrapolated[i - 1];
        let lhs = cell(&est_sum);
        let rhs = 2.0 * cell(&est1) + 2.0 * cell(&est2);
        if lhs - rhs > worst {
            worst = lhs - rhs;
            worst_lhs = lhs;
            worst_rhs = rhs;
        }
    }
    checks.push(AlgebraCheck {
        name: "subadditivity_cellwise".into(),
        lhs: worst_lhs,
        rhs: worst_rhs,
        slack: worst,
        pass: worst <= tol,
    });

    // (ii) scaling law, exact at the DP level
    let scaled = FunctionModel::combo(vec![(lambda, f1.clone())])?;
    let whole = Interval::closed(0.0, 1.0)?;
    let mut worst_scale = 0.0f64;
    for &delta in ladder.iter().take(3) {
        let grid = policy.build(&scaled, 0.0, 1.0, delta)?;
        let a = varnorm::mesh_constrained_var(&scaled, &whole, delta, &grid)?.value;
        let b = varnorm::mesh_constrained_var(f1, &whole, delta, &grid)?.value;
        let expect = lambda * lambda * b;
        let denom = expect.abs().max(1.0);
        worst_scale = worst_scale.max((a - expect).abs() / denom);
    }
    checks.push(AlgebraCheck {
        name: "scaling_dp_exact".into(),
        lhs: worst_scale,
        rhs: 1e-12,
        slack: worst_scale - 1e-12,
        pass: worst_scale <= 1e-12,
    });

    // (iii) Lipschitz bound for the measure map (empirical total variation
    // against the norm product; a lower estimate of the true TV distance)
    let mut tv = 0.0f64;
    for i in 1..est1.xs.len() {
        let d1 = est1.extrapolated[i] - est1.extrapolated[i - 1];
        let d2 = est2.extrapolated[i] - est2.extrapolated[i - 1];
        tv += (d1 - d2).abs();
    }
    let diff_model = FunctionModel::combo(vec![(1.0, f1.clone()), (-1.0, f2.clone())])?;
    let n1 = varnorm::v2_norm(f1)?.norm();
    let n2 = varnorm::v2_norm(f2)?.norm();
    let nd = varnorm::v2_norm(&diff_model)?.norm();
    let rhs = (n1 + n2) * nd;
    checks.push(AlgebraCheck {
        name: "lipschitz_measure_map".into(),
        lhs: tv,
        rhs,
        slack: tv - rhs,
        pass: tv <= rhs + tol,
    });

    let worst_slack = checks.iter().map(|c| c.slack).fold(f64::NEG_INFINITY, f64::max);
    Ok(MeasureAlgebraReport { checks, worst_slack })
}
