//! Dyadic-tree combinatorics: nodes, finitely supported tree vectors,
//! `S^p` norms with optimal antichains, the branch/antichain decomposition
//! inequality, even-position level sets and their almost disjoint subtrees,
//! finite-depth system bundles with validators, and the level-averaging
//! transform.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::biorthogonal::{check_biortho, AdversaryConfig, WitnessStrategy};
use crate::funcmodel::FunctionModel;
use crate::intervals::{
    determination_defect, DeterminationConfig, IntervalFamily, MeshLadder,
};
use crate::math;
use crate::util::sorted_dedup;
use crate::varmeasure::MeasureSpec;
use crate::varnorm;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// A node of the dyadic tree: a finite 0/1 sequence, root included.
/// Positions are 1-based as in `t(1), ..., t(n)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    bits: u64,
    len: u8,
}

impl Node {
    pub const MAX_DEPTH: usize = 60;

    pub fn root() -> Self {
        Node { bits: 0, len: 0 }
    }

    /// Build from 1-based bit accessor: `bit_at(i)` for `i = 1..=len`.
    pub fn from_fn(len: usize, bit_at: impl Fn(usize) -> u8) -> Self {
        debug_assert!(len <= Self::MAX_DEPTH);
        let mut bits = 0u64;
        for i in 1..=len {
            bits |= u64::from(bit_at(i) & 1) << (i - 1);
        }
        Node { bits, len: len as u8 }
    }

    /// Parse a bit string such as `""`, `"0"` or `"011"`.
    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > Self::MAX_DEPTH {
            return Err(Error::InvalidModel(format!("node string too long: {s}")));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1u64 << i,
                _ => {
                    return Err(Error::InvalidModel(format!(
                        "invalid node character {c} in {s:?}"
                    )))
                }
            }
        }
        Ok(Node { bits, len: s.len() as u8 })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    /// 1-based bit access; `None` outside `1..=len`.
    pub fn bit(&self, i: usize) -> Option<u8> {
        if i == 0 || i > self.len() {
            None
        } else {
            Some(((self.bits >> (i - 1)) & 1) as u8)
        }
    }

    pub fn child(&self, b: u8) -> Node {
        debug_assert!(self.len() < Self::MAX_DEPTH);
        Node {
            bits: self.bits | (u64::from(b & 1) << self.len),
            len: self.len + 1,
        }
    }

    pub fn parent(&self) -> Option<Node> {
        if self.len == 0 {
            None
        } else {
            let len = self.len - 1;
            Some(Node { bits: self.bits & !(!0u64 << len), len })
        }
    }

    /// Initial-segment order.
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        self.len <= other.len && (other.bits & mask(self.len())) == self.bits
    }

    /// Incomparability in the initial-segment order.
    pub fn incomparable(&self, other: &Node) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    /// Concatenation `self ^ other`.
    pub fn concat(&self, other: &Node) -> Node {
        debug_assert!(self.len() + other.len() <= Self::MAX_DEPTH);
        Node {
            bits: self.bits | (other.bits << self.len),
            len: self.len + other.len,
        }
    }

    pub fn truncate(&self, len: usize) -> Node {
        debug_assert!(len <= self.len());
        Node { bits: self.bits & mask(len), len: len as u8 }
    }

    /// All nodes of length at most `depth`, in breadth-first order with
    /// lexicographic order inside each level.
    pub fn all_up_to_depth(depth: usize) -> Vec<Node> {
        let mut out = Vec::new();
        for len in 0..=depth {
            for val in 0..(1u64 << len) {
                out.push(Node::from_fn(len, |i| ((val >> (len - i)) & 1) as u8));
            }
        }
        out
    }

    pub fn level(len: usize) -> Vec<Node> {
        (0..(1u64 << len))
            .map(|val| Node::from_fn(len, |i| ((val >> (len - i)) & 1) as u8))
            .collect()
    }

    /// Bit-string form (`""` for the root), the JSON key format.
    pub fn to_bit_string(&self) -> String {
        (1..=self.len()).map(|i| if self.bit(i) == Some(1) { '1' } else { '0' }).collect()
    }

    /// Lexicographic sort key within the tree: length first, then bits from
    /// position 1.
    fn order_key(&self) -> (u8, u64) {
        let mut v = 0u64;
        for i in 1..=self.len() {
            v = (v << 1) | u64::from(self.bit(i).unwrap());
        }
        (self.len, v)
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        !0
    } else {
        (1u64 << len) - 1
    }
}

impl core::fmt::Debug for Node {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Node({})", self)
    }
}

impl core::fmt::Display for Node {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_root() {
            write!(f, "e")
        } else {
            write!(f, "{}", self.to_bit_string())
        }
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

#[cfg(feature = "serde")]
impl Serialize for Node {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bit_string())
    }
}

#[cfg(feature = "serde")]
impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Node::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Finitely supported real values on the dyadic tree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TreeVector {
    values: BTreeMap<Node, f64>,
}

impl TreeVector {
    pub fn new() -> Self {
        TreeVector { values: BTreeMap::new() }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Node, f64)>) -> Self {
        let mut values = BTreeMap::new();
        for (n, v) in entries {
            if v != 0.0 {
                values.insert(n, v);
            }
        }
        TreeVector { values }
    }

    pub fn insert(&mut self, node: Node, value: f64) {
        if value == 0.0 {
            self.values.remove(&node);
        } else {
            self.values.insert(node, value);
        }
    }

    pub fn get(&self, node: &Node) -> f64 {
        self.values.get(node).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Node, &f64)> {
        self.values.iter()
    }

    pub fn depth(&self) -> usize {
        self.values.keys().map(Node::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(feature = "serde")]
impl Serialize for TreeVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (node, value) in &self.values {
            map.serialize_entry(&node.to_bit_string(), value)?;
        }
        map.end()
    }
}

#[cfg(feature = "serde")]
impl<'de> Deserialize<'de> for TreeVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let raw: BTreeMap<String, f64> = BTreeMap::deserialize(deserializer)?;
        let mut out = TreeVector::new();
        for (key, value) in raw {
            let node = Node::parse(&key).map_err(serde::de::Error::custom)?;
            out.insert(node, value);
        }
        Ok(out)
    }
}

/// `S^p` norm value with an optimal antichain.
#[derive(Clone, Debug, PartialEq)]
pub struct SpNormResult {
    /// The norm `(sup over antichains of sum |x(s)|^p)^(1/p)`.
    pub value: f64,
    /// Antichain realizing the supremum (empty for the zero vector).
    pub witness: Vec<Node>,
}

/// `S^p` norm by bottom-up dynamic programming over the support closure:
/// `best(s) = max(|x(s)|^p, best(s0) + best(s1))`, ties broken toward the
/// shallower node.
pub fn sp_norm(x: &TreeVector, p: f64) -> Result<SpNormResult> {
    if p < 1.0 {
        return Err(Error::InvalidModel("S^p norm needs p >= 1".into()));
    }
    let mut closure: BTreeSet<Node> = BTreeSet::new();
    for (node, _) in x.support() {
        let mut n = *node;
        loop {
            closure.insert(n);
            match n.parent() {
                Some(par) => n = par,
                None => break,
            }
        }
    }
    if closure.is_empty() {
        return Ok(SpNormResult { value: 0.0, witness: Vec::new() });
    }

    fn best(
        node: Node,
        x: &TreeVector,
        closure: &BTreeSet<Node>,
        p: f64,
    ) -> (f64, Vec<Node>) {
        if !closure.contains(&node) {
            return (0.0, Vec::new());
        }
        let own = math::powf(math::abs(x.get(&node)), p);
        let (v0, w0) = best(node.child(0), x, closure, p);
        let (v1, w1) = best(node.child(1), x, closure, p);
        let child_sum = v0 + v1;
        if own >= child_sum {
            if own > 0.0 {
                (own, vec![node])
            } else {
                (0.0, Vec::new())
            }
        } else {
            let mut w = w0;
            w.extend(w1);
            (child_sum, w)
        }
    }

    let (value_pow, witness) = best(Node::root(), x, &closure, p);
    Ok(SpNormResult { value: math::powf(value_pow, 1.0 / p), witness })
}

/// Result of the branch/antichain decomposition of a weighted tree sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Lus2Decomposition {
    /// Maximal antichain of the depth-`n` tree.
    pub antichain: Vec<Node>,
    /// One branch per antichain element, containing it.
    pub branches: Vec<Vec<Node>>,
    /// `sum over all nodes of lambda * alpha`.
    pub lhs: f64,
    /// `sum over antichain of lambda_t * (branch alpha sum)`.
    pub rhs: f64,
}

impl Lus2Decomposition {
    /// Every root-to-leaf branch of the depth-`n` tree meets the antichain
    /// exactly once.
    pub fn antichain_is_maximal(&self, depth: usize) -> bool {
        for leaf in Node::level(depth) {
            let hits = self
                .antichain
                .iter()
                .filter(|a| a.is_prefix_of(&leaf) || leaf.is_prefix_of(a))
                .count();
            if hits != 1 {
                return false;
            }
        }
        true
    }
}

/// Decompose `sum lambda_s alpha_s` over the full depth-`n` tree into a
/// maximal antichain and branches through it, following the recursive
/// two-case split: the antichain stays below when the root weight is
/// dominated, otherwise the root swallows the best branch.
pub fn lus2_decompose(alpha: &TreeVector, lambda: &TreeVector, depth: usize) -> Result<Lus2Decomposition> {
    for (node, &v) in alpha.support().chain(lambda.support()) {
        if v < 0.0 {
            return Err(Error::InvalidModel(format!(
                "negative weight {v} at node {node}"
            )));
        }
    }

    fn rec(
        node: Node,
        depth_left: usize,
        alpha: &TreeVector,
        lambda: &TreeVector,
    ) -> (Vec<Node>, Vec<Vec<Node>>) {
        if depth_left == 0 {
            return (vec![node], vec![vec![node]]);
        }
        let (a0, b0) = rec(node.child(0), depth_left - 1, alpha, lambda);
        let (a1, b1) = rec(node.child(1), depth_left - 1, alpha, lambda);
        let child_lambda: f64 = a0.iter().chain(a1.iter()).map(|t| lambda.get(t)).sum();
        if lambda.get(&node) <= child_lambda {
            // Case 1: keep both child antichains, thread the root into
            // every branch.
            let mut antichain = a0;
            antichain.extend(a1);
            let mut branches = b0;
            branches.extend(b1);
            for b in &mut branches {
                b.push(node);
            }
            (antichain, branches)
        } else {
            // Case 2: the root becomes the antichain; keep the branch with
            // the largest alpha sum.
            let best = b0
                .into_iter()
                .chain(b1)
                .max_by(|x, y| {
                    let sx: f64 = x.iter().map(|t| alpha.get(t)).sum::<f64>();
                    let sy: f64 = y.iter().map(|t| alpha.get(t)).sum::<f64>();
                    sx.partial_cmp(&sy).unwrap()
                })
                .unwrap_or_default();
            let mut branch = best;
            branch.push(node);
            (vec![node], vec![branch])
        }
    }

    let (antichain, branches) = rec(Node::root(), depth, alpha, lambda);
    let mut lhs = 0.0;
    for node in Node::all_up_to_depth(depth) {
        lhs += lambda.get(&node) * alpha.get(&node);
    }
    let mut rhs = 0.0;
    for (t, branch) in antichain.iter().zip(branches.iter()) {
        let alpha_sum: f64 = branch.iter().map(|s| alpha.get(s)).sum();
        rhs += lambda.get(t) * alpha_sum;
    }
    Ok(Lus2Decomposition { antichain, branches, lhs, rhs })
}

/// Even-position level set: for `s` of length `n`, all nodes of length
/// `2n` whose even positions agree with `s`; odd positions run free in
/// ascending order.
pub fn level_set(s: &Node) -> Vec<Node> {
    let n = s.len();
    if n == 0 {
        return vec![Node::root()];
    }
    (0..(1u64 << n))
        .map(|free| {
            Node::from_fn(2 * n, |pos| {
                if pos % 2 == 0 {
                    s.bit(pos / 2).unwrap()
                } else {
                    ((free >> ((pos - 1) / 2)) & 1) as u8
                }
            })
        })
        .collect()
}

/// Dyadic subtree spanned by the level sets along a branch prefix:
/// position `s` maps to the interleaving of `s` (odd positions) with the
/// branch prefix (even positions).
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSubtree {
    pub map: BTreeMap<Node, Node>,
    pub nodes: BTreeSet<Node>,
}

pub fn subtree_along(sigma_prefix: &Node, depth: usize) -> Result<DyadicSubtree> {
    if sigma_prefix.len() < depth {
        return Err(Error::InvalidModel(format!(
            "branch prefix of length {} too short for depth {depth}",
            sigma_prefix.len()
        )));
    }
    let mut map = BTreeMap::new();
    let mut nodes = BTreeSet::new();
    for s in Node::all_up_to_depth(depth) {
        let n = s.len();
        let image = Node::from_fn(2 * n, |pos| {
            if pos % 2 == 0 {
                sigma_prefix.bit(pos / 2).unwrap()
            } else {
                s.bit((pos + 1) / 2).unwrap()
            }
        });
        map.insert(s, image);
        nodes.insert(image);
    }
    Ok(DyadicSubtree { map, nodes })
}

/// Norm, mass and separation constants of a system bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SystemConstants {
    /// Cap on variation norms.
    pub norm_cap: f64,
    /// Cap on measure masses.
    pub mass_cap: f64,
    /// Strict lower bound for each node's own-family variation.
    pub theta: f64,
}

/// Per-node data of a system bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemNode {
    pub func: FunctionModel,
    pub measure: MeasureSpec,
    pub family: IntervalFamily,
}

/// Finite-depth system bundle: per-node function, measure and interval
/// family; per-level determination point sets and tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemBundle {
    pub depth: usize,
    pub nodes: BTreeMap<Node, SystemNode>,
    /// `level_points[n]` determines the level-`n` span.
    pub level_points: Vec<Vec<f64>>,
    /// Per-level tolerance.
    pub tolerances: Vec<f64>,
    pub constants: SystemConstants,
    /// Per-node biorthogonality budgets (generating bundles).
    pub bio_eps: BTreeMap<Node, f64>,
}

impl SystemBundle {
    pub fn node(&self, n: &Node) -> Result<&SystemNode> {
        self.nodes
            .get(n)
            .ok_or_else(|| Error::IncompleteBundle(format!("missing node {n}")))
    }

    pub fn check_complete(&self) -> Result<()> {
        for node in Node::all_up_to_depth(self.depth) {
            self.node(&node)?;
        }
        if self.level_points.len() < self.depth + 1 {
            return Err(Error::IncompleteBundle(format!(
                "need {} level point sets, found {}",
                self.depth + 1,
                self.level_points.len()
            )));
        }
        if self.tolerances.len() < self.depth + 1 {
            return Err(Error::IncompleteBundle(format!(
                "need {} tolerances, found {}",
                self.depth + 1,
                self.tolerances.len()
            )));
        }
        Ok(())
    }

    /// Per-level biorthogonality budget sum.
    pub fn bio_eps_sum(&self) -> f64 {
        (1..=self.depth)
            .map(|n| {
                Node::level(n)
                    .iter()
                    .map(|s| self.bio_eps.get(s).copied().unwrap_or(0.0))
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max)
    }
}

/// Which validation profile to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SystemKind {
    Plain,
    S2,
    Generating,
}

/// One failed condition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ConditionFailure {
    pub condition: String,
    pub node: Option<String>,
    pub detail: String,
}

/// Validation report: every failed (condition, node, detail) triple.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SystemReport {
    pub failures: Vec<ConditionFailure>,
    pub checked: usize,
}

impl SystemReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, condition: &str, node: Option<Node>, detail: String) {
        self.failures.push(ConditionFailure {
            condition: condition.into(),
            node: node.map(|n| n.to_bit_string()),
            detail,
        });
    }
}

/// Validator tuning.
#[derive(Clone, Debug)]
pub struct ValidationConfig {
    /// Numerical slack added to every inequality.
    pub slack: f64,
    /// Dyadic level for default determination trial families.
    pub trial_level: u32,
    pub determination: DeterminationConfig,
    /// Dyadic base level for adversarial biorthogonality families.
    pub adversary_level: u32,
    /// Optional per-level ladders when supports are not disjoint.
    pub level_ladders: Option<Vec<MeshLadder>>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            slack: 1e-9,
            trial_level: 3,
            determination: DeterminationConfig::default(),
            adversary_level: 10,
            level_ladders: None,
        }
    }
}

/// Validate the six structural conditions plus kind-specific coherence.
///
/// 1. norm and mass caps, 2. per-level sup-norm caps, 3. determination of
/// each level span by its point set, 4. per-node domination over grid
/// families, 5. disjointness of families at incomparable nodes, 6. each
/// node's own-family variation exceeds `theta`. S2 bundles additionally get
/// the chain measure-coherence, generating bundles the child-pair averaging
/// bound and per-level biorthogonality.
pub fn validate_system(
    bundle: &SystemBundle,
    kind: SystemKind,
    cfg: &ValidationConfig,
) -> Result<SystemReport> {
    bundle.check_complete()?;
    let mut report = SystemReport::default();
    let slack = cfg.slack;
    let all_nodes = Node::all_up_to_depth(bundle.depth);

    // (1) caps
    for node in &all_nodes {
        let data = bundle.node(node)?;
        let norm = varnorm::v2_norm(&data.func)?.norm();
        if norm > bundle.constants.norm_cap + slack {
            report.fail(
                "norm_cap",
                Some(*node),
                format!("variation norm {norm} exceeds {}", bundle.constants.norm_cap),
            );
        }
        let mass = data.measure.norm();
        if mass > bundle.constants.mass_cap + slack {
            report.fail(
                "mass_cap",
                Some(*node),
                format!("mass {mass} exceeds {}", bundle.constants.mass_cap),
            );
        }
        report.checked += 2;
    }

    // (2) sup-norm caps per level
    for node in &all_nodes {
        let eps_n = bundle.tolerances[node.len()];
        let sup = bundle.node(node)?.func.sup_norm();
        if sup > eps_n + slack {
            report.fail(
                "sup_norm_cap",
                Some(*node),
                format!("sup norm {sup} exceeds level tolerance {eps_n}"),
            );
        }
        report.checked += 1;
    }

    // (3) determination of level spans
    for n in 0..=bundle.depth {
        let level = Node::level(n);
        let models: Vec<FunctionModel> = level
            .iter()
            .map(|s| bundle.node(s).map(|d| d.func.clone()))
            .collect::<Result<_>>()?;
        let trials = crate::intervals::dyadic_subfamilies(cfg.trial_level);
        let samples = coefficient_samples(models.len());
        let defect = determination_defect(
            &models,
            &bundle.level_points[n],
            &trials,
            &samples,
            &cfg.determination,
        )?;
        if !(defect <= bundle.tolerances[n] + slack) {
            report.fail(
                "determination",
                None,
                format!("level {n} defect {defect} exceeds {}", bundle.tolerances[n]),
            );
        }
        report.checked += 1;
    }

    // (4) domination over grid families, restricted to each support hull
    for node in &all_nodes {
        let data = bundle.node(node)?;
        let eps_n = bundle.tolerances[node.len()];
        let (lo, hi) = data.func.support_hull();
        let grid: Vec<f64> = if hi > lo {
            let mut g: Vec<f64> = bundle.level_points[node.len()]
                .iter()
                .copied()
                .filter(|&t| t >= lo && t <= hi)
                .collect();
            g.push(lo);
            g.push(hi);
            sorted_dedup(g)
        } else {
            bundle.level_points[node.len()].clone()
        };
        let margin = varnorm::domination_margin(&data.func, &data.measure, 1.0, &grid)?;
        if margin.margin > eps_n + slack {
            report.fail(
                "domination",
                Some(*node),
                format!("margin {} exceeds {eps_n}", margin.margin),
            );
        }
        report.checked += 1;
    }

    // (5) disjointness at incomparable nodes
    for (i, a) in all_nodes.iter().enumerate() {
        for b in all_nodes.iter().skip(i + 1) {
            if a.incomparable(b) {
                let fa = &bundle.node(a)?.family;
                let fb = &bundle.node(b)?.family;
                if !fa.disjoint_from(fb) {
                    report.fail(
                        "family_disjointness",
                        Some(*a),
                        format!("families at {a} and {b} overlap"),
                    );
                }
                report.checked += 1;
            }
        }
    }

    // (6) own-family variation exceeds theta
    for node in &all_nodes {
        let data = bundle.node(node)?;
        let v = varnorm::v2_sq_family(&data.func, &data.family)?;
        if !(v > bundle.constants.theta - slack) {
            report.fail(
                "own_family_variation",
                Some(*node),
                format!("v2^2 {v} not above theta {}", bundle.constants.theta),
            );
        }
        report.checked += 1;
    }

    match kind {
        SystemKind::Plain => {}
        SystemKind::S2 => {
            validate_chain_coherence(bundle, cfg, &mut report)?;
        }
        SystemKind::Generating => {
            validate_pair_averaging(bundle, cfg, &mut report)?;
            validate_level_biortho(bundle, cfg, &mut report)?;
        }
    }
    Ok(report)
}

/// Deterministic coefficient samples: unit vectors and alternating signs.
fn coefficient_samples(len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..len {
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        out.push(v);
    }
    out.push(vec![1.0; len]);
    out.push((0..len).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
    out
}

/// Worst `|mu_a - mu_b|` over unions of half-open grid cells.
fn signed_sup_over_cells(mu_a: &MeasureSpec, mu_b: &MeasureSpec, grid: &[f64]) -> f64 {
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for w in grid.windows(2) {
        let d = mu_a.mass_half_open(w[0], w[1]) - mu_b.mass_half_open(w[0], w[1]);
        if d > 0.0 {
            plus += d;
        } else {
            minus -= d;
        }
    }
    plus.max(minus)
}

fn validate_chain_coherence(
    bundle: &SystemBundle,
    cfg: &ValidationConfig,
    report: &mut SystemReport,
) -> Result<()> {
    for n in 0..=bundle.depth {
        let grid = sorted_dedup(bundle.level_points[n].clone());
        for s in Node::level(n) {
            let mu_s = &bundle.node(&s)?.measure;
            for m in (n + 1)..=bundle.depth {
                for t in Node::level(m) {
                    if !s.is_prefix_of(&t) {
                        continue;
                    }
                    let mu_t = &bundle.node(&t)?.measure;
                    let sup = signed_sup_over_cells(mu_t, mu_s, &grid);
                    if !(sup < bundle.tolerances[n] + cfg.slack) {
                        report.fail(
                            "chain_coherence",
                            Some(s),
                            format!(
                                "sup |mu_{t} - mu_{s}| = {sup} not below {}",
                                bundle.tolerances[n]
                            ),
                        );
                    }
                    report.checked += 1;
                }
            }
        }
    }
    Ok(())
}

fn validate_pair_averaging(
    bundle: &SystemBundle,
    cfg: &ValidationConfig,
    report: &mut SystemReport,
) -> Result<()> {
    for n in 0..bundle.depth {
        let grid = sorted_dedup(bundle.level_points[n].clone());
        for s in Node::level(n) {
            let mu_s = &bundle.node(&s)?.measure;
            for m in (n + 1)..=bundle.depth {
                let c0 = s.child(0);
                let c1 = s.child(1);
                for s0 in Node::level(m).iter().filter(|t| c0.is_prefix_of(t)) {
                    for s1 in Node::level(m).iter().filter(|t| c1.is_prefix_of(t)) {
                        let mu0 = &bundle.node(s0)?.measure;
                        let mu1 = &bundle.node(s1)?.measure;
                        let avg = mu0.sum(mu1)?.scaled(0.5)?;
                        let sup = signed_sup_over_cells(&avg, mu_s, &grid);
                        if !(sup < bundle.tolerances[n] + cfg.slack) {
                            report.fail(
                                "pair_averaging",
                                Some(s),
                                format!(
                                    "sup |avg({s0},{s1}) - mu_{s}| = {sup} not below {}",
                                    bundle.tolerances[n]
                                ),
                            );
                        }
                        report.checked += 1;
                    }
                }
            }
        }
    }
    Ok(())
}

fn validate_level_biortho(
    bundle: &SystemBundle,
    cfg: &ValidationConfig,
    report: &mut SystemReport,
) -> Result<()> {
    for n in 1..=bundle.depth {
        let level = Node::level(n);
        let models: Vec<FunctionModel> = level
            .iter()
            .map(|s| bundle.node(s).map(|d| d.func.clone()))
            .collect::<Result<_>>()?;
        let eps: Vec<f64> = level
            .iter()
            .map(|s| bundle.bio_eps.get(s).copied().unwrap_or(0.0))
            .collect();
        if eps.iter().any(|&e| e <= 0.0) {
            report.fail(
                "level_biorthogonality",
                None,
                format!("level {n} has nodes without positive budgets"),
            );
            continue;
        }
        let hulls: Vec<(f64, f64)> = models.iter().map(|m| m.support_hull()).collect();
        let disjoint = hulls.iter().enumerate().all(|(i, &(lo_i, hi_i))| {
            hulls
                .iter()
                .skip(i + 1)
                .all(|&(lo_j, hi_j)| hi_i <= lo_j || hi_j <= lo_i)
        });
        let strategy = if disjoint {
            WitnessStrategy::DisjointSupport(hulls)
        } else {
            match cfg.level_ladders.as_ref().and_then(|l| l.get(n)) {
                Some(ladder) => WitnessStrategy::MeshClass(ladder.clone()),
                None => {
                    report.fail(
                        "level_biorthogonality",
                        None,
                        format!(
                            "level {n}: supports overlap and no ladder configured"
                        ),
                    );
                    continue;
                }
            }
        };
        let adversary = AdversaryConfig::from_models(&models, cfg.adversary_level, 1 << 14);
        let witness = check_biortho(&models, &eps, &strategy, &[], Some(&adversary))?;
        if !witness.pass {
            report.fail(
                "level_biorthogonality",
                None,
                format!(
                    "level {n} worst defects {:?} exceed budgets {:?}",
                    witness.worst_per_class, eps
                ),
            );
        }
        report.checked += 1;
    }
    Ok(())
}

/// Level-averaging transform: halve the depth, averaging each node's data
/// over its even-position level set. The output carries constants
/// `(M + eps, Lambda, theta - (2M + eps) eps)` and tolerances
/// `theta / 2^(k/2) + 2^(k/2) eps_{2k}`.
pub fn gen1_transform(bundle: &SystemBundle) -> Result<SystemBundle> {
    bundle.check_complete()?;
    if bundle.depth % 2 != 0 {
        return Err(Error::IncompleteBundle(format!(
            "transform needs even depth, got {}",
            bundle.depth
        )));
    }
    let out_depth = bundle.depth / 2;
    let m_const = bundle.constants.norm_cap;
    let eps = bundle.bio_eps_sum();
    let theta_out = bundle.constants.theta - (2.0 * m_const + eps) * eps;
    if theta_out <= 0.0 {
        return Err(Error::DegenerateConstants(format!(
            "theta' = {} with M = {m_const}, eps = {eps}",
            theta_out
        )));
    }

    let mut nodes = BTreeMap::new();
    for s in Node::all_up_to_depth(out_depth) {
        let n = s.len();
        let set = level_set(&s);
        let scale = math::exp2(-(n as f64) / 2.0);
        let mut terms = Vec::with_capacity(set.len());
        let mut measure = MeasureSpec::zero();
        let mut family = IntervalFamily::empty();
        for t in &set {
            let data = bundle.node(t)?;
            terms.push((scale, data.func.clone()));
            measure = measure.sum(&data.measure)?;
            family = family.union(&data.family)?;
        }
        let measure = measure.scaled(math::exp2(-(n as f64)))?;
        nodes.insert(
            s,
            SystemNode { func: FunctionModel::combo(terms)?, measure, family },
        );
    }

    let level_points: Vec<Vec<f64>> = (0..=out_depth)
        .map(|k| bundle.level_points[2 * k].clone())
        .collect();
    let tolerances: Vec<f64> = (0..=out_depth)
        .map(|k| {
            bundle.constants.theta / math::exp2(k as f64 / 2.0)
                + math::exp2(k as f64 / 2.0) * bundle.tolerances[2 * k]
        })
        .collect();

    Ok(SystemBundle {
        depth: out_depth,
        nodes,
        level_points,
        tolerances,
        constants: SystemConstants {
            norm_cap: m_const + eps,
            mass_cap: bundle.constants.mass_cap,
            theta: theta_out,
        },
        bio_eps: BTreeMap::new(),
    })
}

/// Closed-form equivalence constants for a validated system family with
/// biorthogonality budget `eps_bio`: lower `sqrt(theta - (eps + 2M) eps)`,
/// upper `sqrt(Lambda + 3 eps_hat + (2M + eps) eps)`.
pub fn s2_equivalence_constants(
    norm_cap: f64,
    mass_cap: f64,
    theta: f64,
    eps_tolerance_sum: f64,
    eps_bio: f64,
) -> (f64, f64) {
    let lower = (theta - (eps_bio + 2.0 * norm_cap) * eps_bio).max(0.0);
    let upper = mass_cap + 3.0 * eps_tolerance_sum + (2.0 * norm_cap + eps_bio) * eps_bio;
    (math::sqrt(lower), math::sqrt(upper))
}

/// Upper constant for domination-based flat-norm equivalence:
/// `sqrt(C mu + eps (2M + 1 + eps))`.
pub fn c0_upper_constant(c_dom: f64, mu_norm: f64, norm_cap: f64, eps_bio: f64) -> f64 {
    math::sqrt(c_dom * mu_norm + eps_bio * (2.0 * norm_cap + 1.0 + eps_bio))
}

/// Equivalence target norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EquivalenceTarget {
    C0,
    S2,
}

/// Empirical equivalence-constant estimates.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EquivalenceReport {
    pub c_hat: f64,
    pub big_c_hat: f64,
    pub samples_used: usize,
    pub skipped: usize,
    /// Closed-form `(c, C)` when supplied.
    pub predicted: Option<(f64, f64)>,
}

/// Sample-based equivalence constants of a node family against a target
/// norm: the extreme ratios `|sum lambda_s G_s|_V2 / |lambda|_target`.
pub fn equivalence_constants(
    family: &BTreeMap<Node, FunctionModel>,
    target: EquivalenceTarget,
    samples: &[TreeVector],
    predicted: Option<(f64, f64)>,
) -> Result<EquivalenceReport> {
    let mut c_hat = f64::INFINITY;
    let mut big_c = 0.0f64;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for lambda in samples {
        let denom = match target {
            EquivalenceTarget::C0 => lambda
                .support()
                .map(|(_, &v)| math::abs(v))
                .fold(0.0f64, f64::max),
            EquivalenceTarget::S2 => sp_norm(lambda, 2.0)?.value,
        };
        if denom == 0.0 {
            skipped += 1;
            continue;
        }
        let mut terms = Vec::new();
        for (node, &coeff) in lambda.support() {
            let model = family.get(node).ok_or_else(|| {
                Error::IncompleteBundle(format!("no family member at {node}"))
            })?;
            terms.push((coeff, model.clone()));
        }
        let combined = FunctionModel::combo(terms)?;
        let norm = varnorm::v2_norm(&combined)?.norm();
        let ratio = norm / denom;
        c_hat = c_hat.min(ratio);
        big_c = big_c.max(ratio);
        used += 1;
    }
    if used == 0 {
        return Err(Error::SelectionFailed {
            step: 0,
            detail: "no usable coefficient samples".into(),
        });
    }
    Ok(EquivalenceReport { c_hat, big_c_hat: big_c, samples_used: used, skipped, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_basics() {
        let root = Node::root();
        assert_eq!(root.len(), 0);
        let n01 = Node::parse("01").unwrap();
        assert_eq!(n01.bit(1), Some(0));
        assert_eq!(n01.bit(2), Some(1));
        assert_eq!(n01.to_bit_string(), "01");
        assert!(root.is_prefix_of(&n01));
        assert!(Node::parse("0").unwrap().is_prefix_of(&n01));
        assert!(Node::parse("1").unwrap().incomparable(&n01));
        assert_eq!(n01.parent(), Some(Node::parse("0").unwrap()));
        let cat = Node::parse("0").unwrap().concat(&Node::parse("11").unwrap());
        assert_eq!(cat, Node::parse("011").unwrap());
    }

    #[test]
    fn bfs_order() {
        let nodes = Node::all_up_to_depth(2);
        let strs: Vec<String> = nodes.iter().map(Node::to_bit_string).collect();
        assert_eq!(strs, vec!["", "0", "1", "00", "01", "10", "11"]);
    }

    #[test]
    fn sp_norm_chain_and_level() {
        // single branch: the norm is the max
        let mut x = TreeVector::new();
        x.insert(Node::root(), 1.0);
        x.insert(Node::parse("0").unwrap(), -3.0);
        x.insert(Node::parse("00").unwrap(), 2.0);
        let r = sp_norm(&x, 2.0).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
        assert_eq!(r.witness, vec![Node::parse("0").unwrap()]);

        // one level: l2 sum
        let y = TreeVector::from_entries(vec![
            (Node::parse("0").unwrap(), 3.0),
            (Node::parse("1").unwrap(), 4.0),
        ]);
        let r = sp_norm(&y, 2.0).unwrap();
        assert!((r.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn sp_norm_depth_two_example() {
        let x = TreeVector::from_entries(vec![
            (Node::root(), 2.0),
            (Node::parse("0").unwrap(), 1.0),
            (Node::parse("1").unwrap(), 3.0),
            (Node::parse("00").unwrap(), 1.0),
            (Node::parse("01").unwrap(), 1.0),
            (Node::parse("10").unwrap(), 2.0),
            (Node::parse("11").unwrap(), 2.0),
        ]);
        let r = sp_norm(&x, 2.0).unwrap();
        assert!((r.value - math::sqrt(11.0)).abs() < 1e-12);
        let mut w: Vec<String> = r.witness.iter().map(Node::to_bit_string).collect();
        w.sort();
        assert_eq!(w, vec!["0".to_string() + "0", "01".into(), "1".into()]);
    }

    #[test]
    fn sp_norm_zero_vector() {
        let r = sp_norm(&TreeVector::new(), 2.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.witness.is_empty());
        assert!(sp_norm(&TreeVector::new(), 0.5).is_err());
    }

    #[test]
    fn lus2_base_and_cases() {
        // depth 0: equality
        let a = TreeVector::from_entries(vec![(Node::root(), 2.0)]);
        let l = TreeVector::from_entries(vec![(Node::root(), 3.0)]);
        let d = lus2_decompose(&a, &l, 0).unwrap();
        assert_eq!(d.lhs, 6.0);
        assert_eq!(d.rhs, 6.0);
        assert!(d.antichain_is_maximal(0));

        // depth 1, case 1
        let a = TreeVector::from_entries(vec![
            (Node::root(), 1.0),
            (Node::parse("0").unwrap(), 1.0),
            (Node::parse("1").unwrap(), 2.0),
        ]);
        let ones = TreeVector::from_entries(vec![
            (Node::root(), 1.0),
            (Node::parse("0").unwrap(), 1.0),
            (Node::parse("1").unwrap(), 1.0),
        ]);
        let d = lus2_decompose(&a, &ones, 1).unwrap();
        assert_eq!(d.antichain.len(), 2);
        assert_eq!(d.lhs, 4.0);
        assert_eq!(d.rhs, 5.0);
        assert!(d.antichain_is_maximal(1));

        // depth 1, case 2 trigger
        let l2 = TreeVector::from_entries(vec![
            (Node::root(), 10.0),
            (Node::parse("0").unwrap(), 1.0),
            (Node::parse("1").unwrap(), 1.0),
        ]);
        let d = lus2_decompose(&a, &l2, 1).unwrap();
        assert_eq!(d.antichain, vec![Node::root()]);
        assert!(d.lhs <= d.rhs + 1e-12);
        // branch goes through the child maximizing the alpha sum
        assert!(d.branches[0].contains(&Node::parse("1").unwrap()));
    }

    #[test]
    fn level_sets_examples_and_properties() {
        let s = Node::parse("1").unwrap();
        let l = level_set(&s);
        let strs: Vec<String> = l.iter().map(Node::to_bit_string).collect();
        assert_eq!(strs, vec!["01", "11"]);

        let s = Node::parse("01").unwrap();
        let l = level_set(&s);
        assert_eq!(l.len(), 4);
        for t in &l {
            assert_eq!(t.len(), 4);
            assert_eq!(t.bit(2), Some(0));
            assert_eq!(t.bit(4), Some(1));
        }

        // (L4): level partition at n = 2
        let mut all: Vec<Node> = Vec::new();
        for s in Node::level(2) {
            all.extend(level_set(&s));
        }
        all.sort();
        let mut expect = Node::level(4);
        expect.sort();
        assert_eq!(all, expect);

        // (L3): incomparability across incomparable bases
        let l0 = level_set(&Node::parse("0").unwrap());
        let l1 = level_set(&Node::parse("1").unwrap());
        for a in &l0 {
            for b in &l1 {
                assert!(a.incomparable(b));
            }
        }

        // (L2): prefix coherence
        let s2 = Node::parse("01").unwrap();
        let l2 = level_set(&s2);
        let l1 = level_set(&Node::parse("0").unwrap());
        let truncated: BTreeSet<Node> = l2.iter().map(|t| t.truncate(2)).collect();
        assert_eq!(truncated, l1.into_iter().collect());
    }

    #[test]
    fn subtree_examples() {
        let sigma = Node::parse("00").unwrap();
        let t = subtree_along(&sigma, 1).unwrap();
        let nodes: Vec<String> = t.nodes.iter().map(Node::to_bit_string).collect();
        assert_eq!(nodes, vec!["", "00", "10"]);

        // depth 0
        let t = subtree_along(&sigma, 0).unwrap();
        assert_eq!(t.nodes.len(), 1);

        // two branch prefixes differing in the first bit intersect at the root
        let t1 = subtree_along(&Node::parse("00").unwrap(), 2).unwrap();
        let t2 = subtree_along(&Node::parse("10").unwrap(), 2).unwrap();
        let inter: Vec<Node> = t1.nodes.intersection(&t2.nodes).copied().collect();
        assert_eq!(inter, vec![Node::root()]);

        // order isomorphism
        for (s1, t1v) in &t1.map {
            for (s2, t2v) in &t1.map {
                assert_eq!(s1.is_prefix_of(s2), t1v.is_prefix_of(t2v));
            }
        }
    }

    #[test]
    fn equivalence_single_function() {
        let mut fam = BTreeMap::new();
        fam.insert(Node::root(), FunctionModel::rademacher(3));
        let samples = vec![
            TreeVector::from_entries(vec![(Node::root(), 2.0)]),
            TreeVector::from_entries(vec![(Node::root(), -0.5)]),
        ];
        let r = equivalence_constants(&fam, EquivalenceTarget::C0, &samples, None).unwrap();
        assert!((r.c_hat - 1.0).abs() < 1e-9);
        assert!((r.big_c_hat - 1.0).abs() < 1e-9);
    }
}
