//! Constructive realization of a prescribed measure by a function: step
//! part for the atoms, square-root tent levels over mass quantiles for the
//! continuous part, and Rademacher primitives as the uniform special case.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::biorthogonal::{
    select_subsequence, Candidate, SelectionCertificate, SelectionConfig,
};
use crate::funcmodel::{FunctionModel, TentBlock};
use crate::math;
use crate::util::sorted_dedup;
use crate::varmeasure::{estimate_cdf, GridPolicy, MeasureSpec};
use crate::varnorm;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Step function realizing a purely atomic measure: jumps of height
/// `sqrt(mass)` at each atom. An atom at 0 is unrealizable because models
/// fix `f(0) = 0` and the left limit convention there.
pub fn synthesize_discrete(atoms: &[(f64, f64)]) -> Result<FunctionModel> {
    let mut sorted = atoms.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut jumps = Vec::with_capacity(sorted.len());
    let mut level = 0.0f64;
    for &(t, mass) in &sorted {
        if t == 0.0 {
            return Err(Error::InvalidMeasure(
                "atom at 0 cannot be realized with f(0) = 0".into(),
            ));
        }
        if !(t > 0.0 && t <= 1.0) || mass <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "atom ({t}, {mass}) outside (0,1] x (0,inf)"
            )));
        }
        let next = level + math::sqrt(mass);
        jumps.push(crate::funcmodel::Jump { t, left: level, at: next, right: next });
        level = next;
    }
    FunctionModel::step(jumps)
}

/// One tent level: mass quantiles, median-mass peaks, the level function
/// and its natural partition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TentLevel {
    pub level: u32,
    /// `2^n + 1` quantile points (equal masses between consecutive ones).
    pub quantiles: Vec<f64>,
    /// Median-mass point of each quantile interval.
    pub peaks: Vec<f64>,
    /// Quantiles and peaks merged: the level's natural partition.
    pub points: Vec<f64>,
    /// Sum of the square-root tents, one per quantile interval.
    pub model: FunctionModel,
    /// Mass per quantile interval.
    pub interval_mass: f64,
}

impl TentLevel {
    /// Max over partition prefixes of the telescoping error
    /// `|v2^2(H_n, P_n up to t) - mu[0, t]|`.
    pub fn telescoping_deviation(&self, mu: &MeasureSpec) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut prefix = Vec::new();
        let mut prev: Option<f64> = None;
        let mut sum = 0.0;
        for &t in &self.points {
            let v = self.model.eval(t)?;
            if let Some(p) = prev {
                let d = v - p;
                sum += d * d;
            }
            prev = Some(v);
            prefix.push(t);
            let expect = mu.mass_up_to(t);
            worst = worst.max(math::abs(sum - expect));
        }
        Ok(worst)
    }

    pub fn sup_norm(&self) -> f64 {
        math::sqrt(self.interval_mass / 2.0)
    }

    pub fn min_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_gap(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Build the level-`n` tent sum for an atomless target: split the mass into
/// `2^n` equal quantile intervals, put one square-root tent on each. Ties in
/// the CDF inversion resolve to the leftmost point.
pub fn build_tent_level(mu: &MeasureSpec, level: u32) -> Result<TentLevel> {
    if !mu.is_atomless() {
        return Err(Error::InvalidMeasure(
            "tent levels need an atomless target".into(),
        ));
    }
    if level > 26 {
        return Err(Error::InvalidMeasure(format!("level {level} too deep")));
    }
    let total = mu.norm();
    if total <= 0.0 {
        return Err(Error::InvalidMeasure("tent levels need positive mass".into()));
    }
    let count = 1usize << level;
    let m = total / count as f64;

    let mut quantiles = Vec::with_capacity(count + 1);
    for i in 0..=count {
        quantiles.push(mu.quantile_leftmost(i as f64 * m));
    }
    let mut peaks = Vec::with_capacity(count);
    for i in 0..count {
        peaks.push(mu.quantile_leftmost((i as f64 + 0.5) * m));
    }

    let cdf = mu.continuous_cdf();
    let mut terms = Vec::with_capacity(count);
    for i in 0..count {
        let (lo, hi, peak) = (quantiles[i], quantiles[i + 1], peaks[i]);
        let tent = TentBlock::new(lo, hi, peak, cdf.restrict(lo, hi)?)?;
        terms.push((1.0, FunctionModel::TentBlock(tent)));
    }
    let model = FunctionModel::combo(terms)?;

    let mut points = quantiles.clone();
    points.extend_from_slice(&peaks);
    let points = sorted_dedup(points);

    Ok(TentLevel { level, quantiles, peaks, points, model, interval_mass: m })
}

/// Tuning of the synthesis pipeline.
#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    /// Deepest tent level the candidate scan may use.
    pub max_level: u32,
    pub selection: SelectionConfig,
    /// Dyadic level of the deviation-table sample points.
    pub deviation_level: u32,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_level: 12,
            selection: SelectionConfig::default(),
            deviation_level: 6,
        }
    }
}

/// One row of the truncation-deviation table.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DeviationRow {
    /// Number of tent levels included.
    pub levels: usize,
    /// Mesh bound matched to the last included level.
    pub delta: f64,
    /// Max |estimated CDF - target CDF| over the sample points.
    pub max_deviation: f64,
}

/// Output of the synthesis pipeline.
#[derive(Clone, Debug)]
pub struct SynthesisOutput {
    /// Step part plus the selected tent levels.
    pub model: FunctionModel,
    /// Selected tent levels (empty for purely atomic targets).
    pub chosen_levels: Vec<u32>,
    pub certificate: SelectionCertificate,
    /// Per-prefix deviation table, computed with the ladder-matched mesh.
    pub deviations: Vec<DeviationRow>,
}

/// Synthesize a function whose variation measure approximates the target:
/// atoms through the step part, the continuous part through a greedy
/// biorthogonal selection of tent levels under the scan thresholds, the
/// partition-scale sandwich and the verified tail bounds. When the scan
/// runs out of admissible levels the output is partial and carries the
/// failure report.
pub fn synthesize(
    target: &MeasureSpec,
    levels: usize,
    config: &SynthesisConfig,
) -> Result<SynthesisOutput> {
    if levels == 0 {
        return Err(Error::InvalidMeasure("need at least one level".into()));
    }
    let discrete = synthesize_discrete(target.atoms())?;
    let continuous = MeasureSpec::from_cdf(target.continuous_cdf().clone())?;

    if continuous.norm() <= 0.0 {
        // purely atomic target: the step part is the whole answer
        let deviations = deviation_table(&discrete, target, &[], &[], config)?;
        return Ok(SynthesisOutput {
            model: discrete,
            chosen_levels: Vec::new(),
            certificate: SelectionCertificate {
                epsilons: Vec::new(),
                choices: Vec::new(),
                extensions: Vec::new(),
                failure: None,
            },
            deviations,
        });
    }

    let epsilons: Vec<f64> = (1..=(levels + 1))
        .map(|i| math::exp2(-(i as f64)))
        .collect();
    // candidate pool: every level whose sup norm already satisfies the
    // first-stage cap (later stages tighten the cap through the scan)
    let mut tent_levels = Vec::new();
    for n in 0..=config.max_level {
        let tl = build_tent_level(&continuous, n)?;
        if tl.sup_norm() < epsilons[0] {
            tent_levels.push(tl);
        }
    }
    if tent_levels.is_empty() {
        return Err(Error::SelectionFailed {
            step: 1,
            detail: format!(
                "no tent level up to {} has sup norm below {}",
                config.max_level, epsilons[0]
            ),
        });
    }
    let candidates: Vec<Candidate> = tent_levels
        .iter()
        .map(|tl| Candidate {
            model: tl.model.clone(),
            scale_min: Some(tl.min_gap()),
            scale_max: Some(tl.max_gap()),
        })
        .collect();
    let certificate =
        select_subsequence(&candidates, &epsilons, levels, &config.selection)?;
    let chosen_levels: Vec<u32> = certificate
        .chosen_indices()
        .iter()
        .map(|&i| tent_levels[i].level)
        .collect();

    let mut terms = vec![(1.0, discrete.clone())];
    for &i in &certificate.chosen_indices() {
        terms.push((1.0, tent_levels[i].model.clone()));
    }
    let model = FunctionModel::combo(terms)?;

    let chosen_models: Vec<FunctionModel> = certificate
        .chosen_indices()
        .iter()
        .map(|&i| tent_levels[i].model.clone())
        .collect();
    // measurement mesh matched to each prefix: just above the finest
    // included level's partition spacing, so that level's own partition is
    // admissible while finer oscillation stays invisible
    let deltas: Vec<f64> = certificate
        .chosen_indices()
        .iter()
        .map(|&i| 1.5 * tent_levels[i].max_gap())
        .collect();
    let deviations = deviation_table(&discrete, target, &chosen_models, &deltas, config)?;

    Ok(SynthesisOutput { model, chosen_levels, certificate, deviations })
}

/// Deviation of each truncation prefix against the target CDF at the
/// matched mesh bound.
fn deviation_table(
    discrete: &FunctionModel,
    target: &MeasureSpec,
    chosen: &[FunctionModel],
    deltas: &[f64],
    config: &SynthesisConfig,
) -> Result<Vec<DeviationRow>> {
    let mut xs = varnorm::dyadic_grid(config.deviation_level);
    if let Some(first) = chosen.first() {
        xs.extend(first.breakpoints());
    }
    let xs = sorted_dedup(xs);
    let mut rows = Vec::new();

    if chosen.is_empty() {
        let delta = math::exp2(-8.0);
        let row = deviation_row(discrete, target, &xs, delta, 0)?;
        rows.push(row);
        return Ok(rows);
    }
    for k in 1..=chosen.len() {
        let mut terms = vec![(1.0, discrete.clone())];
        for model in chosen.iter().take(k) {
            terms.push((1.0, model.clone()));
        }
        let prefix = FunctionModel::combo(terms)?;
        let delta = deltas[k - 1];
        rows.push(deviation_row(&prefix, target, &xs, delta, k)?);
    }
    Ok(rows)
}

fn deviation_row(
    model: &FunctionModel,
    target: &MeasureSpec,
    xs: &[f64],
    delta: f64,
    levels: usize,
) -> Result<DeviationRow> {
    let est = estimate_cdf(model, xs, &[delta], &GridPolicy::default())?;
    let mut worst = 0.0f64;
    for (i, &x) in est.xs.iter().enumerate() {
        let expect = target.mass_up_to(x);
        worst = worst.max(math::abs(est.extrapolated[i] - expect));
    }
    Ok(DeviationRow { levels, delta, max_deviation: worst })
}

/// Exact piecewise-linear sum of Rademacher primitives at the given
/// strictly increasing levels.
pub fn rademacher_sum(indices: &[u32]) -> Result<FunctionModel> {
    for w in indices.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidModel(
                "rademacher levels must strictly increase".into(),
            ));
        }
    }
    if indices.is_empty() {
        return Ok(FunctionModel::zero());
    }
    FunctionModel::combo(
        indices
            .iter()
            .map(|&n| (1.0, FunctionModel::rademacher(n)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varmeasure::{atomic_part, PiecewiseLinear};

    #[test]
    fn discrete_synthesis_examples() {
        let f = synthesize_discrete(&[(0.5, 1.0)]).unwrap();
        assert_eq!(f.eval(0.5).unwrap(), 1.0);
        assert_eq!(f.eval(0.4).unwrap(), 0.0);
        let part = atomic_part(&f).unwrap();
        assert_eq!(part.atoms, vec![(0.5, 1.0)]);

        assert_eq!(synthesize_discrete(&[]).unwrap(), FunctionModel::zero());

        let f = synthesize_discrete(&[(0.3, 4.0), (0.6, 9.0)]).unwrap();
        let part = atomic_part(&f).unwrap();
        assert_eq!(part.atoms, vec![(0.3, 4.0), (0.6, 9.0)]);
        assert_eq!(f.eval(0.45).unwrap(), 2.0);
        assert_eq!(f.eval(0.8).unwrap(), 5.0);

        assert!(synthesize_discrete(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn tent_level_uniform() {
        let leb = MeasureSpec::lebesgue();
        let tl = build_tent_level(&leb, 1).unwrap();
        assert_eq!(tl.quantiles, vec![0.0, 0.5, 1.0]);
        assert_eq!(tl.peaks, vec![0.25, 0.75]);
        assert!((tl.model.sup_norm() - 0.5).abs() < 1e-12);
        assert!((tl.sup_norm() - 0.5).abs() < 1e-12);

        let tl0 = build_tent_level(&leb, 0).unwrap();
        assert!((tl0.sup_norm() - math::sqrt(0.5)).abs() < 1e-12);
        assert_eq!(tl0.quantiles, vec![0.0, 1.0]);
    }

    #[test]
    fn tent_level_square_cdf() {
        // cdf x^2: quantile at sqrt(1/2), peaks at 1/2 and sqrt(3)/2
        let cdf = PiecewiseLinear::new(
            (0..=64).map(|i| i as f64 / 64.0).collect(),
            (0..=64).map(|i| (i as f64 / 64.0) * (i as f64 / 64.0)).collect(),
        )
        .unwrap();
        let mu = MeasureSpec::from_cdf(cdf).unwrap();
        let tl = build_tent_level(&mu, 1).unwrap();
        // knot-resolution of the piecewise-linear approximation to x^2
        assert!((tl.quantiles[1] - math::sqrt(0.5)).abs() < 1e-2);
        assert!((tl.peaks[0] - 0.5).abs() < 1e-2);
        assert!((tl.peaks[1] - math::sqrt(0.75)).abs() < 1e-2);
    }

    #[test]
    fn telescoping_is_exact_at_level_points() {
        let leb = MeasureSpec::lebesgue();
        for n in 0..=6u32 {
            let tl = build_tent_level(&leb, n).unwrap();
            let dev = tl.telescoping_deviation(&leb).unwrap();
            assert!(dev <= 1e-12, "level {n}: deviation {dev}");
        }
    }

    #[test]
    fn tent_level_claim_one_increment_bound() {
        let leb = MeasureSpec::lebesgue();
        let tl = build_tent_level(&leb, 2).unwrap();
        // pairwise increments across the whole level never exceed the mass
        let pts: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        for (i, &x) in pts.iter().enumerate() {
            for &y in pts.iter().skip(i + 1) {
                let d = tl.model.eval(y).unwrap() - tl.model.eval(x).unwrap();
                let mass = leb.mass_half_open(x, y);
                assert!(d * d <= mass + 1e-12, "x {x} y {y}");
            }
        }
    }

    #[test]
    fn purely_atomic_target_short_circuits() {
        let target = MeasureSpec::from_atoms(vec![(0.5, 1.0)]).unwrap();
        let out = synthesize(&target, 3, &SynthesisConfig::default()).unwrap();
        assert!(out.chosen_levels.is_empty());
        assert_eq!(out.model.eval(0.75).unwrap(), 1.0);
        assert!(out.deviations[0].max_deviation < 1e-9);
    }

    #[test]
    fn rademacher_sum_validation() {
        assert!(rademacher_sum(&[2, 2]).is_err());
        assert_eq!(rademacher_sum(&[]).unwrap(), FunctionModel::zero());
        let f = rademacher_sum(&[3]).unwrap();
        let r = varnorm::v2_norm(&f).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((f.sup_norm() - math::exp2(-1.5)).abs() < 1e-12);
    }
}
