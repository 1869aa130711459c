//! Ready-made structures for experiments and self-checks: a generating
//! system bundle built from scaled, shifted Rademacher profiles on disjoint
//! dyadic cells.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dyadictree::{Node, SystemBundle, SystemConstants, SystemNode};
use crate::funcmodel::{FunctionModel, Interpolation};
use crate::intervals::{Interval, IntervalFamily};
use crate::math;
use crate::util::sorted_dedup;
use crate::varmeasure::{MeasureSpec, PiecewiseLinear};
use crate::varnorm;
use crate::Result;

/// Bundle of compressed Rademacher profiles, one per node, each living on
/// its own dyadic cell.
///
/// Node number `r` (breadth-first) occupies the cell
/// `[r / 2^(depth+1), (r+1) / 2^(depth+1)]` and carries the level-`rad_level`
/// Rademacher profile compressed into that cell: unit variation norm, sup
/// norm `2^(-rad_level/2)`. Every node's measure is the common multiple of
/// Lebesgue measure with density `2^(depth+1)`, which dominates every node
/// exactly and makes all coherence conditions identities. Constants:
/// norms capped at 1, masses at `2^(depth+1)`, own-family variation `0.9`.
pub fn rademacher_cell_bundle(depth: usize, rad_level: u32) -> Result<SystemBundle> {
    let nodes_bfs = Node::all_up_to_depth(depth);
    let cells = 1usize << (depth + 1);
    let width = 1.0 / cells as f64;
    let h = math::exp2(-(rad_level as f64) / 2.0);
    let steps = 1usize << rad_level;

    let density = cells as f64;
    let common_measure = MeasureSpec::from_cdf(PiecewiseLinear::new(
        alloc::vec![0.0, 1.0],
        alloc::vec![0.0, density],
    )?)?;

    let mut nodes = BTreeMap::new();
    let mut per_level_breakpoints: Vec<Vec<f64>> = alloc::vec![Vec::new(); depth + 1];

    for (r, node) in nodes_bfs.iter().enumerate() {
        let lo = r as f64 * width;
        let hi = (r + 1) as f64 * width;
        let mut ts = Vec::with_capacity(steps + 3);
        let mut vals = Vec::with_capacity(steps + 3);
        if lo > 0.0 {
            ts.push(0.0);
            vals.push(0.0);
        }
        for j in 0..=steps {
            ts.push(lo + j as f64 * width / steps as f64);
            vals.push(if j % 2 == 1 { h } else { 0.0 });
        }
        if hi < 1.0 {
            ts.push(1.0);
            vals.push(0.0);
        }
        per_level_breakpoints[node.len()].extend_from_slice(&ts);
        let func = FunctionModel::grid_sample(ts, vals, Interpolation::Linear)?;

        let intervals: Vec<Interval> = (0..steps)
            .map(|j| {
                Interval::closed(
                    lo + j as f64 * width / steps as f64,
                    lo + (j + 1) as f64 * width / steps as f64,
                )
            })
            .collect::<Result<_>>()?;
        let family = IntervalFamily::new(intervals)?;

        nodes.insert(
            *node,
            SystemNode { func, measure: common_measure.clone(), family },
        );
    }

    // cumulative level point sets
    let mut level_points = Vec::with_capacity(depth + 1);
    let mut acc = varnorm::dyadic_grid(6);
    for bps in per_level_breakpoints.iter().take(depth + 1) {
        acc.extend_from_slice(bps);
        acc = sorted_dedup(acc);
        level_points.push(acc.clone());
    }

    let tol = (2.0 * h).max(0.02);
    let tolerances = alloc::vec![tol; depth + 1];

    // per-level biorthogonality budgets summing to 0.15 on every level
    let eps_total = 0.15;
    let mut bio_eps = BTreeMap::new();
    for node in &nodes_bfs {
        let level_count = 1usize << node.len();
        bio_eps.insert(*node, eps_total / level_count as f64);
    }

    Ok(SystemBundle {
        depth,
        nodes,
        level_points,
        tolerances,
        constants: SystemConstants { norm_cap: 1.0, mass_cap: density, theta: 0.9 },
        bio_eps,
    })
}
