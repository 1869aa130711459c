//! File formats: measure JSON, bundle JSON, sampled CSV, and the small
//! spec-string parsers for ladders, epsilon sequences and sample grids.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use quadvar_core::dyadictree::{Node, SystemBundle, SystemConstants, SystemNode};
use quadvar_core::funcmodel::{FunctionModel, Interpolation};
use quadvar_core::intervals::{Interval, IntervalFamily};
use quadvar_core::varmeasure::{MeasureSpec, PiecewiseLinear};

#[derive(Serialize, Deserialize)]
pub struct AtomJson {
    pub t: f64,
    pub mass: f64,
}

#[derive(Serialize, Deserialize)]
pub struct CdfJson {
    pub xs: Vec<f64>,
    #[serde(rename = "Fs")]
    pub fs: Vec<f64>,
}

/// Measure file: `{atoms: [{t, mass}], cdf: {xs: [...], Fs: [...]}}`.
#[derive(Serialize, Deserialize)]
pub struct MeasureJson {
    #[serde(default)]
    pub atoms: Vec<AtomJson>,
    pub cdf: CdfJson,
}

impl MeasureJson {
    pub fn to_spec(&self) -> Result<MeasureSpec> {
        let atoms = self.atoms.iter().map(|a| (a.t, a.mass)).collect();
        let cdf = PiecewiseLinear::new(self.cdf.xs.clone(), self.cdf.fs.clone())
            .context("invalid cdf")?;
        MeasureSpec::new(atoms, cdf).map_err(|e| anyhow::anyhow!("{e}"))
    }

    pub fn from_spec(spec: &MeasureSpec) -> Self {
        MeasureJson {
            atoms: spec
                .atoms()
                .iter()
                .map(|&(t, mass)| AtomJson { t, mass })
                .collect(),
            cdf: CdfJson {
                xs: spec.continuous_cdf().xs().to_vec(),
                fs: spec.continuous_cdf().ys().to_vec(),
            },
        }
    }
}

pub fn load_measure(path: &Path) -> Result<MeasureSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let json: MeasureJson = serde_json::from_str(&text)
        .with_context(|| format!("parsing measure JSON {}", path.display()))?;
    json.to_spec()
}

pub fn load_model(path: &Path) -> Result<FunctionModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing model JSON {}", path.display()))
}

pub fn save_model(path: &Path, model: &FunctionModel) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(model)?)
        .with_context(|| format!("writing {}", path.display()))
}

/// Sampled data: CSV with header `t,value`; linear or left-constant
/// interpolation.
pub fn load_samples_csv(path: &Path, interp: Interpolation) -> Result<FunctionModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "t,value" => {}
        other => bail!("expected header 't,value', found {other:?}"),
    }
    let mut ts = Vec::new();
    let mut vals = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .with_context(|| format!("line {}: expected 't,value'", i + 2))?;
        ts.push(a.trim().parse::<f64>()?);
        vals.push(b.trim().parse::<f64>()?);
    }
    FunctionModel::grid_sample(ts, vals, interp).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn load_family(path: &Path) -> Result<IntervalFamily> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let intervals: Vec<Interval> = serde_json::from_str(&text)
        .with_context(|| format!("parsing family JSON {}", path.display()))?;
    IntervalFamily::new(intervals).map_err(|e| anyhow::anyhow!("{e}"))
}

#[derive(Serialize, Deserialize)]
pub struct BundleNodeFile {
    pub model: FunctionModel,
    pub measure: MeasureJson,
    pub family: Vec<Interval>,
}

/// Bundle directory layout: one `bundle.json` holding everything.
#[derive(Serialize, Deserialize)]
pub struct BundleFile {
    pub depth: usize,
    pub constants: SystemConstants,
    pub tolerances: Vec<f64>,
    pub level_points: Vec<Vec<f64>>,
    #[serde(default)]
    pub bio_eps: BTreeMap<String, f64>,
    pub nodes: BTreeMap<String, BundleNodeFile>,
}

impl BundleFile {
    pub fn to_bundle(&self) -> Result<SystemBundle> {
        let mut nodes = BTreeMap::new();
        for (key, nf) in &self.nodes {
            let node = Node::parse(key).map_err(|e| anyhow::anyhow!("{e}"))?;
            let family = IntervalFamily::new(nf.family.clone())
                .map_err(|e| anyhow::anyhow!("node {key}: {e}"))?;
            nodes.insert(
                node,
                SystemNode { func: nf.model.clone(), measure: nf.measure.to_spec()?, family },
            );
        }
        let mut bio_eps = BTreeMap::new();
        for (key, &eps) in &self.bio_eps {
            bio_eps.insert(Node::parse(key).map_err(|e| anyhow::anyhow!("{e}"))?, eps);
        }
        Ok(SystemBundle {
            depth: self.depth,
            nodes,
            level_points: self.level_points.clone(),
            tolerances: self.tolerances.clone(),
            constants: self.constants,
            bio_eps,
        })
    }

    pub fn from_bundle(bundle: &SystemBundle) -> Self {
        BundleFile {
            depth: bundle.depth,
            constants: bundle.constants,
            tolerances: bundle.tolerances.clone(),
            level_points: bundle.level_points.clone(),
            bio_eps: bundle
                .bio_eps
                .iter()
                .map(|(n, &e)| (n.to_bit_string(), e))
                .collect(),
            nodes: bundle
                .nodes
                .iter()
                .map(|(n, d)| {
                    (
                        n.to_bit_string(),
                        BundleNodeFile {
                            model: d.func.clone(),
                            measure: MeasureJson::from_spec(&d.measure),
                            family: d.family.intervals().to_vec(),
                        },
                    )
                })
                .collect(),
        }
    }
}

pub fn load_bundle(dir: &Path) -> Result<SystemBundle> {
    let path = dir.join("bundle.json");
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let file: BundleFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing bundle {}", path.display()))?;
    file.to_bundle()
}

pub fn save_bundle(dir: &Path, bundle: &SystemBundle) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join("bundle.json");
    fs::write(&path, serde_json::to_string(&BundleFile::from_bundle(bundle))?)
        .with_context(|| format!("writing {}", path.display()))
}

/// `"2^-2..2^-10"` or a comma list of floats, strictly decreasing.
pub fn parse_ladder(spec: &str) -> Result<Vec<f64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo = parse_pow(a)?;
        let hi = parse_pow(b)?;
        if !(hi < lo) {
            bail!("ladder range must decrease: {spec}");
        }
        let mut out = Vec::new();
        let mut d = lo;
        while d >= hi * 0.999_999 {
            out.push(d);
            d /= 2.0;
        }
        Ok(out)
    } else {
        let out: Vec<f64> = spec
            .split(',')
            .map(|s| parse_pow(s.trim()))
            .collect::<Result<_>>()?;
        if out.windows(2).any(|w| w[1] >= w[0]) {
            bail!("ladder must strictly decrease: {spec}");
        }
        Ok(out)
    }
}

/// `"2^-3"`, `"0.125"`.
pub fn parse_pow(s: &str) -> Result<f64> {
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp.parse().with_context(|| format!("bad exponent in {s}"))?;
        Ok(2f64.powi(e))
    } else {
        s.parse::<f64>().with_context(|| format!("bad number {s}"))
    }
}

/// `"2^-i"` yields `eps_i = 2^-i`; otherwise a comma list.
pub fn parse_eps(spec: &str, count: usize) -> Result<Vec<f64>> {
    if spec == "2^-i" {
        Ok((1..=count as i32).map(|i| 2f64.powi(-i)).collect())
    } else {
        let out: Vec<f64> = spec
            .split(',')
            .map(|s| parse_pow(s.trim()))
            .collect::<Result<_>>()?;
        if out.len() < count {
            bail!("need at least {count} epsilons, got {}", out.len());
        }
        Ok(out)
    }
}

/// `"dyadic:8"` or a comma list.
pub fn parse_xs(spec: &str) -> Result<Vec<f64>> {
    if let Some(level) = spec.strip_prefix("dyadic:") {
        let l: u32 = level.parse().context("bad dyadic level")?;
        Ok(quadvar_core::varnorm::dyadic_grid(l))
    } else {
        spec.split(',').map(|s| parse_pow(s.trim())).collect()
    }
}
