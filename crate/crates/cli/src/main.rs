//! Command-line front end: variation norms, measure estimation, synthesis,
//! biorthogonal selection, tree norms and system bundles, with JSON reports
//! and CSV plot data.

mod formats;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadvar_core::biorthogonal::{
    check_biortho, select_subsequence, AdversaryConfig, Candidate, SelectionCertificate,
    SelectionConfig, WitnessStrategy,
};
use quadvar_core::dyadictree::{
    equivalence_constants, gen1_transform, lus2_decompose, sp_norm, validate_system,
    EquivalenceTarget, Node, SystemKind, TreeVector, ValidationConfig,
};
use quadvar_core::fixtures::rademacher_cell_bundle;
use quadvar_core::funcmodel::{FunctionModel, Interpolation};
use quadvar_core::intervals::Interval;
use quadvar_core::synthesis::{rademacher_sum, synthesize, SynthesisConfig};
use quadvar_core::varmeasure::{
    atomic_part, default_ladder, dist_bounds, mesh_profile, GridPolicy, MeasureSpec,
};
use quadvar_core::varnorm::{
    domination_margin, dyadic_grid, mesh_constrained_var, v2_norm, Witness,
};

use formats::*;
use report::RunReport;

#[derive(Parser)]
#[command(name = "quadvar", version, about = "quadratic variation toolkit")]
struct Cli {
    /// Seed for all randomized estimators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker cap for independent sub-evaluations.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Include wall-clock timings in reports (breaks byte-identity).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    Linear,
    LeftConstant,
}

impl From<InterpArg> for Interpolation {
    fn from(v: InterpArg) -> Self {
        match v {
            InterpArg::Linear => Interpolation::Linear,
            InterpArg::LeftConstant => Interpolation::LeftConstant,
        }
    }
}

#[derive(Args)]
struct ModelInput {
    /// Function model as tagged JSON.
    #[arg(long)]
    model_json: Option<PathBuf>,
    /// Sampled data as CSV with header `t,value`.
    #[arg(long)]
    samples_csv: Option<PathBuf>,
    /// Interpolation for sampled data.
    #[arg(long, value_enum, default_value = "linear")]
    interp: InterpArg,
}

impl ModelInput {
    fn load(&self, report: &mut RunReport) -> Result<FunctionModel> {
        match (&self.model_json, &self.samples_csv) {
            (Some(path), None) => {
                report.add_input(path)?;
                load_model(path)
            }
            (None, Some(path)) => {
                report.add_input(path)?;
                load_samples_csv(path, self.interp.into())
            }
            _ => bail!("provide exactly one of --model-json / --samples-csv"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Variation norm, or mesh-constrained variation when --delta is given,
    /// or the direct family variation when --family-json is given.
    Varnorm {
        #[command(flatten)]
        model: ModelInput,
        /// Mesh bound for the constrained variation.
        #[arg(long)]
        delta: Option<String>,
        /// Grid step override (dyadic value like 2^-10).
        #[arg(long)]
        grid_step: Option<String>,
        /// Evaluate over this interval family instead of taking a supremum.
        #[arg(long)]
        family_json: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Variation-measure distribution function along a mesh ladder.
    MeasureEst {
        #[command(flatten)]
        model: ModelInput,
        /// Ladder such as `2^-2..2^-10` or a comma list.
        #[arg(long, default_value = "2^-2..2^-10")]
        ladder: String,
        /// Sample points: `dyadic:8` or a comma list.
        #[arg(long, default_value = "dyadic:8")]
        xs: String,
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV rows `(x, delta, value)` for plotting.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Realize a prescribed measure as a function.
    Synthesize {
        #[arg(long)]
        measure_json: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exact sum of Rademacher primitives.
    Rademacher {
        /// Comma-separated strictly increasing levels, e.g. `2,6,10`.
        #[arg(long)]
        indices: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Biorthogonal selection and certificate re-verification.
    #[command(subcommand)]
    Biortho(BiorthoCommand),
    /// S^p norm of a tree vector with its optimal antichain.
    TreeNorm {
        #[arg(long)]
        vector_json: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Branch/antichain decomposition of a weighted tree sum.
    Lus2 {
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long)]
        lambda: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// System bundles: fixture generation, validation, transform.
    #[command(subcommand)]
    System(SystemCommand),
    /// Empirical equivalence constants of a bundle's node family.
    EquivConst {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum, default_value = "s2")]
        target: TargetArg,
        #[arg(long, default_value_t = 24)]
        samples: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bundled fixture checks.
    Selftest {
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BiorthoCommand {
    /// Greedy selection from a directory of model JSON files.
    Select {
        /// Directory of candidate models, pool ordered by filename.
        #[arg(long)]
        candidates: PathBuf,
        /// `2^-i` or a comma list.
        #[arg(long, default_value = "2^-i")]
        eps: String,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-verify a certificate against adversarial families.
    Check {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SystemCommand {
    /// Materialize the compressed-Rademacher generating bundle.
    Fixture {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 14)]
        rad_level: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a bundle against the structural conditions.
    Validate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum, default_value = "plain")]
        kind: KindArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Level-averaging transform; the output is written as a new bundle.
    Transform {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Plain,
    S2,
    Generating,
}

impl From<KindArg> for SystemKind {
    fn from(v: KindArg) -> Self {
        match v {
            KindArg::Plain => SystemKind::Plain,
            KindArg::S2 => SystemKind::S2,
            KindArg::Generating => SystemKind::Generating,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    C0,
    S2,
}

/// Certificate file: the record plus the chosen models, self-contained for
/// re-verification.
#[derive(serde::Serialize, serde::Deserialize)]
struct CertFile {
    certificate: SelectionCertificate,
    models: Vec<FunctionModel>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn max_depth() -> usize {
    std::env::var("VARLIB_MAX_DEPTH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(12)
}

fn run(cli: Cli) -> Result<bool> {
    let started = Instant::now();
    let seed = cli.seed;
    let jobs = cli.jobs.max(1);
    let mut rep;

    let pass = match cli.command {
        Command::Varnorm { model, delta, grid_step, family_json, report } => {
            rep = RunReport::new("varnorm", seed);
            let f = model.load(&mut rep)?;
            let result = match (&delta, &family_json) {
                (None, Some(path)) => {
                    rep.add_input(path)?;
                    let fam = load_family(path)?;
                    let value = quadvar_core::varnorm::v2_sq_family(&f, &fam)
                        .map_err(|e| anyhow!("{e}"))?;
                    quadvar_core::varnorm::VariationResult {
                        value,
                        witness: Witness::Family(fam),
                        method: quadvar_core::varnorm::Method::Direct,
                    }
                }
                (None, None) => v2_norm(&f).map_err(|e| anyhow!("{e}"))?,
                (Some(spec), _) => {
                    let d = parse_pow(spec)?;
                    let step = grid_step.as_deref().map(parse_pow).transpose()?;
                    let policy = GridPolicy {
                        divisor: step.map_or(4.0, |s| d / s),
                        ..GridPolicy::default()
                    };
                    let grid = policy.build(&f, 0.0, 1.0, d).map_err(|e| anyhow!("{e}"))?;
                    let whole = Interval::closed(0.0, 1.0).unwrap();
                    mesh_constrained_var(&f, &whole, d, &grid).map_err(|e| anyhow!("{e}"))?
                }
            };
            let reeval = result.reevaluate(&f).map_err(|e| anyhow!("{e}"))?;
            rep.check(
                "witness_consistency",
                (reeval - result.value).abs() <= 1e-12 * result.value.max(1.0),
                format!("value {} re-evaluates to {}", result.value, reeval),
            );
            println!("v2^2 = {}", result.value);
            println!("v2   = {}", result.norm());
            let witness_points = match &result.witness {
                Witness::Partition(p) => p.points().len(),
                Witness::Family(fam) => fam.len(),
            };
            println!("witness size = {witness_points}, method = {:?}", result.method);
            rep.data = serde_json::to_value(&result)?;
            finish(rep, report, cli.timings, started)?
        }

        Command::MeasureEst { model, ladder, xs, report, plot_data } => {
            rep = RunReport::new("measure-est", seed);
            let f = model.load(&mut rep)?;
            let ladder = parse_ladder(&ladder)?;
            let mut xs = parse_xs(&xs)?;
            xs.extend(f.breakpoints());
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            let est = estimate_parallel(&f, &xs, &ladder, jobs)?;

            let mut monotone_x = true;
            for row in &est.samples {
                if row.windows(2).any(|w| w[1] < w[0] - 1e-12) {
                    monotone_x = false;
                }
            }
            rep.check("monotone_in_x", monotone_x, "distribution rows nondecreasing".into());
            let mut monotone_delta = true;
            for i in 0..est.xs.len() {
                for k in 1..est.samples.len() {
                    if est.samples[k][i] > est.samples[k - 1][i] + 1e-9 {
                        monotone_delta = false;
                    }
                }
            }
            rep.check("monotone_in_delta", monotone_delta, "ladder nonincreasing".into());
            rep.check(
                "converged",
                est.all_converged(),
                format!("norm estimate {}", est.norm_estimate()),
            );
            let bounds = quadvar_core::varmeasure::dist_bounds_from_estimate(&est);
            println!("norm estimate  = {}", est.norm_estimate());
            println!("atomic mass    = {}", est.atom_mass());
            println!("distance range = [{}, {}]", bounds.lower, bounds.upper);

            if let Some(csv) = &plot_data {
                let mut text = String::from("x,delta,value\n");
                for (k, &d) in est.delta_ladder.iter().enumerate() {
                    for (i, &x) in est.xs.iter().enumerate() {
                        text.push_str(&format!("{x},{d},{}\n", est.samples[k][i]));
                    }
                }
                fs::write(csv, text).with_context(|| format!("writing {}", csv.display()))?;
                rep.add_output(csv);
            }
            rep.data = serde_json::json!({
                "norm_estimate": est.norm_estimate(),
                "atom_mass": est.atom_mass(),
                "atoms": est.atoms,
                "converged": est.all_converged(),
                "dist_lower": bounds.lower,
                "dist_upper": bounds.upper,
            });
            finish(rep, report, cli.timings, started)?
        }

        Command::Synthesize { measure_json, levels, out, report } => {
            rep = RunReport::new("synthesize", seed);
            rep.add_input(&measure_json)?;
            let target = load_measure(&measure_json)?;
            let config = SynthesisConfig {
                max_level: max_depth() as u32,
                ..SynthesisConfig::default()
            };
            let result = synthesize(&target, levels, &config).map_err(|e| anyhow!("{e}"))?;
            let complete = result.certificate.failure.is_none()
                && (result.chosen_levels.len() == levels || target.continuous_mass() == 0.0);
            rep.check(
                "selection_complete",
                complete,
                format!(
                    "achieved levels {:?}, failure {:?}",
                    result.chosen_levels, result.certificate.failure
                ),
            );
            for row in &result.deviations {
                rep.check(
                    &format!("deviation_prefix_{}", row.levels),
                    row.max_deviation < 0.15,
                    format!("delta {} deviation {}", row.delta, row.max_deviation),
                );
            }
            if let Some(path) = &out {
                save_model(path, &result.model)?;
                rep.add_output(path);
            }
            rep.data = serde_json::json!({
                "chosen_levels": result.chosen_levels,
                "certificate": result.certificate,
                "deviations": result.deviations,
            });
            finish(rep, report, cli.timings, started)?
        }

        Command::Rademacher { indices, out, report } => {
            rep = RunReport::new("rademacher", seed);
            let levels: Vec<u32> = indices
                .split(',')
                .map(|s| s.trim().parse::<u32>().context("bad level"))
                .collect::<Result<_>>()?;
            let f = rademacher_sum(&levels).map_err(|e| anyhow!("{e}"))?;
            println!("sup norm = {}", f.sup_norm());
            if let Some(path) = &out {
                save_model(path, &f)?;
                rep.add_output(path);
            }
            rep.data = serde_json::json!({ "levels": levels, "sup_norm": f.sup_norm() });
            finish(rep, report, cli.timings, started)?
        }

        Command::Biortho(BiorthoCommand::Select { candidates, eps, len, cert, report }) => {
            rep = RunReport::new("biortho select", seed);
            let mut files: Vec<PathBuf> = fs::read_dir(&candidates)
                .with_context(|| format!("listing {}", candidates.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            if files.is_empty() {
                bail!("no candidate .json files in {}", candidates.display());
            }
            let mut pool = Vec::new();
            for path in &files {
                rep.add_input(path)?;
                pool.push(Candidate::plain(load_model(path)?));
            }
            let epsilons = parse_eps(&eps, len.max(pool.len()))?;
            let certificate =
                select_subsequence(&pool, &epsilons, len, &SelectionConfig::default())
                    .map_err(|e| anyhow!("{e}"))?;
            rep.check(
                "selection_complete",
                certificate.failure.is_none() && certificate.len() == len,
                format!(
                    "achieved {} of {len}; indices {:?}; failure {:?}",
                    certificate.len(),
                    certificate.chosen_indices(),
                    certificate.failure
                ),
            );
            let models: Vec<FunctionModel> = certificate
                .chosen_indices()
                .iter()
                .map(|&i| pool[i].model.clone())
                .collect();
            fs::write(
                &cert,
                serde_json::to_string_pretty(&CertFile {
                    certificate: certificate.clone(),
                    models,
                })?,
            )?;
            rep.add_output(&cert);
            finish(rep, report, cli.timings, started)?
        }

        Command::Biortho(BiorthoCommand::Check { cert, report }) => {
            rep = RunReport::new("biortho check", seed);
            rep.add_input(&cert)?;
            let text = fs::read_to_string(&cert)?;
            let file: CertFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing certificate {}", cert.display()))?;
            let pass = if file.models.is_empty() {
                rep.check("certificate_nonempty", false, "no models in certificate".into());
                false
            } else {
                let ladder = file.certificate.ladder().map_err(|e| anyhow!("{e}"))?;
                let budgets = file.certificate.stage_budgets();
                let adversary = AdversaryConfig::from_models(&file.models, 10, 1 << 13);
                let witness = check_biortho(
                    &file.models,
                    &budgets,
                    &WitnessStrategy::MeshClass(ladder),
                    &[],
                    Some(&adversary),
                )
                .map_err(|e| anyhow!("{e}"))?;
                rep.check(
                    "reverification",
                    witness.pass,
                    format!(
                        "worst defects {:?} vs budgets {:?}",
                        witness.worst_per_class, budgets
                    ),
                );
                witness.pass
            };
            let _ = pass;
            finish(rep, report, cli.timings, started)?
        }

        Command::TreeNorm { vector_json, p, report } => {
            rep = RunReport::new("tree-norm", seed);
            rep.add_input(&vector_json)?;
            let text = fs::read_to_string(&vector_json)?;
            let x: TreeVector = serde_json::from_str(&text)
                .with_context(|| format!("parsing tree vector {}", vector_json.display()))?;
            if x.depth() > max_depth() {
                bail!("vector depth {} exceeds cap {}", x.depth(), max_depth());
            }
            let r = sp_norm(&x, p).map_err(|e| anyhow!("{e}"))?;
            println!("S^{p} norm = {}", r.value);
            println!(
                "antichain  = [{}]",
                r.witness
                    .iter()
                    .map(|n| format!("{:?}", n.to_bit_string()))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            rep.data = serde_json::json!({
                "value": r.value,
                "witness": r.witness.iter().map(Node::to_bit_string).collect::<Vec<_>>(),
            });
            finish(rep, report, cli.timings, started)?
        }

        Command::Lus2 { alpha, lambda, depth, report } => {
            rep = RunReport::new("lus2", seed);
            rep.add_input(&alpha)?;
            rep.add_input(&lambda)?;
            if depth > max_depth() {
                bail!("depth {depth} exceeds cap {}", max_depth());
            }
            let a: TreeVector = serde_json::from_str(&fs::read_to_string(&alpha)?)?;
            let l: TreeVector = serde_json::from_str(&fs::read_to_string(&lambda)?)?;
            let d = lus2_decompose(&a, &l, depth).map_err(|e| anyhow!("{e}"))?;
            rep.check(
                "inequality",
                d.lhs <= d.rhs + 1e-9,
                format!("lhs {} <= rhs {}", d.lhs, d.rhs),
            );
            rep.check(
                "antichain_maximal",
                d.antichain_is_maximal(depth),
                format!("antichain size {}", d.antichain.len()),
            );
            rep.data = serde_json::json!({
                "lhs": d.lhs,
                "rhs": d.rhs,
                "antichain": d.antichain.iter().map(Node::to_bit_string).collect::<Vec<_>>(),
            });
            finish(rep, report, cli.timings, started)?
        }

        Command::System(SystemCommand::Fixture { depth, rad_level, out }) => {
            rep = RunReport::new("system fixture", seed);
            let bundle = rademacher_cell_bundle(depth, rad_level).map_err(|e| anyhow!("{e}"))?;
            save_bundle(&out, &bundle)?;
            rep.add_output(&out.join("bundle.json"));
            println!("wrote depth-{depth} bundle with {} nodes", bundle.nodes.len());
            finish(rep, None, cli.timings, started)?
        }

        Command::System(SystemCommand::Validate { bundle, kind, report }) => {
            rep = RunReport::new("system validate", seed);
            rep.add_input(&bundle.join("bundle.json"))?;
            let b = load_bundle(&bundle)?;
            let r = validate_system(&b, kind.into(), &ValidationConfig::default())
                .map_err(|e| anyhow!("{e}"))?;
            rep.check(
                "validation",
                r.pass(),
                format!("{} checks, {} failures", r.checked, r.failures.len()),
            );
            for f in &r.failures {
                println!("  failure [{}] at {:?}: {}", f.condition, f.node, f.detail);
            }
            rep.data = serde_json::to_value(&r)?;
            finish(rep, report, cli.timings, started)?
        }

        Command::System(SystemCommand::Transform { bundle, out, report }) => {
            rep = RunReport::new("system transform", seed);
            rep.add_input(&bundle.join("bundle.json"))?;
            let b = load_bundle(&bundle)?;
            let t = gen1_transform(&b).map_err(|e| anyhow!("{e}"))?;
            let r = validate_system(&t, SystemKind::S2, &ValidationConfig::default())
                .map_err(|e| anyhow!("{e}"))?;
            rep.check(
                "transformed_validates_as_s2",
                r.pass(),
                format!("{} checks, {} failures", r.checked, r.failures.len()),
            );
            save_bundle(&out, &t)?;
            rep.add_output(&out.join("bundle.json"));
            rep.data = serde_json::json!({
                "constants": t.constants,
                "tolerances": t.tolerances,
            });
            finish(rep, report, cli.timings, started)?
        }

        Command::EquivConst { bundle, target, samples, report } => {
            rep = RunReport::new("equiv-const", seed);
            rep.add_input(&bundle.join("bundle.json"))?;
            let b = load_bundle(&bundle)?;
            let family: BTreeMap<Node, FunctionModel> =
                b.nodes.iter().map(|(n, d)| (*n, d.func.clone())).collect();
            let nodes: Vec<Node> = family.keys().copied().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sample_vecs = Vec::new();
            for _ in 0..samples {
                let mut v = TreeVector::new();
                for node in &nodes {
                    if rng.gen::<f64>() < 0.8 {
                        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        v.insert(*node, sign * rng.gen_range(0.25..1.0));
                    }
                }
                if !v.is_empty() {
                    sample_vecs.push(v);
                }
            }
            let target = match target {
                TargetArg::C0 => EquivalenceTarget::C0,
                TargetArg::S2 => EquivalenceTarget::S2,
            };
            let r = equivalence_constants(&family, target, &sample_vecs, None)
                .map_err(|e| anyhow!("{e}"))?;
            println!("c_hat = {}", r.c_hat);
            println!("C_hat = {}", r.big_c_hat);
            rep.data = serde_json::to_value(&r)?;
            finish(rep, report, cli.timings, started)?
        }

        Command::Selftest { report } => {
            rep = RunReport::new("selftest", seed);
            selftest(&mut rep)?;
            finish(rep, report, cli.timings, started)?
        }
    };
    Ok(pass)
}

fn finish(
    mut rep: RunReport,
    path: Option<PathBuf>,
    timings: bool,
    started: Instant,
) -> Result<bool> {
    if timings {
        rep.timings_ms = Some(started.elapsed().as_millis());
    }
    let pass = rep.all_pass();
    rep.write(path.as_ref())?;
    Ok(pass)
}

/// Ladder rows in parallel over a shared grid; deterministic merge.
fn estimate_parallel(
    f: &FunctionModel,
    xs: &[f64],
    ladder: &[f64],
    jobs: usize,
) -> Result<quadvar_core::varmeasure::MeasureEstimate> {
    if jobs <= 1 || ladder.len() <= 1 {
        return quadvar_core::varmeasure::estimate_cdf(f, xs, ladder, &GridPolicy::default())
            .map_err(|e| anyhow!("{e}"));
    }
    let policy = GridPolicy::default();
    let grid = policy
        .build(f, 0.0, 1.0, *ladder.last().unwrap())
        .map_err(|e| anyhow!("{e}"))?;
    let mut xs_full = xs.to_vec();
    if xs_full.last() != Some(&1.0) {
        xs_full.push(1.0);
    }
    if xs_full.first() != Some(&0.0) {
        xs_full.insert(0, 0.0);
    }
    let mut samples: Vec<Option<Vec<f64>>> = vec![None; ladder.len()];
    let chunk = ladder.len().div_ceil(jobs);
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (ci, deltas) in ladder.chunks(chunk).enumerate() {
            let grid = &grid;
            let xs_full = &xs_full;
            handles.push((
                ci,
                scope.spawn(move || -> Result<Vec<Vec<f64>>> {
                    deltas
                        .iter()
                        .map(|&d| mesh_profile(f, grid, d, xs_full).map_err(|e| anyhow!("{e}")))
                        .collect()
                }),
            ));
        }
        for (ci, handle) in handles {
            let rows = handle.join().map_err(|_| anyhow!("worker panicked"))??;
            for (off, row) in rows.into_iter().enumerate() {
                samples[ci * chunk + off] = Some(row);
            }
        }
        Ok(())
    })?;
    let samples: Vec<Vec<f64>> = samples.into_iter().map(Option::unwrap).collect();
    let extrapolated = samples.last().unwrap().clone();
    let converged: Vec<bool> = if samples.len() >= 2 {
        let prev = &samples[samples.len() - 2];
        extrapolated
            .iter()
            .zip(prev.iter())
            .map(|(&a, &b)| (a - b).abs() <= 1e-3 * a.abs().max(1e-12))
            .collect()
    } else {
        vec![false; extrapolated.len()]
    };
    let part = atomic_part(f).map_err(|e| anyhow!("{e}"))?;
    Ok(quadvar_core::varmeasure::MeasureEstimate {
        xs: xs_full,
        delta_ladder: ladder.to_vec(),
        samples,
        extrapolated,
        converged,
        atoms: part.atoms,
        heuristic: part.heuristic,
        rel_tol: 1e-3,
    })
}

/// Quick fixture suite over the exact identities.
fn selftest(rep: &mut RunReport) -> Result<()> {
    use quadvar_core::intervals::{mesh_class_partition, refines, IntervalFamily, MeshLadder};
    use quadvar_core::varmeasure::tau;
    use quadvar_core::varnorm::{v2, v2_sq};
    use quadvar_core::Partition;

    let id = FunctionModel::identity();
    let p = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
    rep.check(
        "v2_identity_halves",
        (v2(&id, &p).unwrap() - 0.5f64.sqrt()).abs() < 1e-15,
        "sqrt(1/2) over {0, 1/2, 1}".into(),
    );
    rep.check(
        "v2_empty_partition",
        v2_sq(&id, &Partition::empty()).unwrap() == 0.0,
        "zero by convention".into(),
    );

    let r1 = FunctionModel::rademacher(1);
    rep.check(
        "rademacher_midpoint",
        (r1.eval(0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-15,
        "R_1(1/2) = sqrt(1/2)".into(),
    );
    for n in [0u32, 3, 6] {
        let norm = v2_norm(&FunctionModel::rademacher(n)).unwrap().value;
        rep.check(
            &format!("rademacher_norm_{n}"),
            (norm - 1.0).abs() < 1e-12,
            format!("v2^2 = {norm}"),
        );
    }

    let step = FunctionModel::right_step(0.5, 1.0).unwrap();
    rep.check(
        "step_one_sided",
        step.eval_left(0.5).unwrap() == 0.0 && step.eval(0.5).unwrap() == 1.0,
        "left limit 0, value 1".into(),
    );
    rep.check(
        "tau_unit_jump",
        tau(&step, 0.5).unwrap() == 1.0,
        "atom mass 1".into(),
    );

    let bounds = dist_bounds(&step).unwrap();
    rep.check(
        "dist_bounds_step",
        bounds.lower == 1.0 && bounds.upper == 3.0,
        format!("[{}, {}]", bounds.lower, bounds.upper),
    );

    let dirac = MeasureSpec::from_atoms(vec![(0.5, 1.0)]).unwrap();
    let margin = domination_margin(&step, &dirac, 1.0, &dyadic_grid(5)).unwrap();
    rep.check(
        "domination_step_dirac",
        margin.margin.abs() <= 1e-12,
        format!("margin {}", margin.margin),
    );

    let fam = IntervalFamily::new(vec![
        Interval::closed(0.0, 0.6).unwrap(),
        Interval::closed(0.7, 0.8).unwrap(),
        Interval::closed(0.9, 0.95).unwrap(),
    ])
    .unwrap();
    let ladder = MeshLadder::new(vec![1.0, 0.5, 0.09]).unwrap();
    let classes = mesh_class_partition(&fam, &ladder);
    rep.check(
        "mesh_classes",
        classes.iter().map(|c| c.len()).collect::<Vec<_>>() == vec![1, 1, 1],
        "one interval per class".into(),
    );
    let fine = IntervalFamily::new(vec![Interval::closed(0.1, 0.2).unwrap()]).unwrap();
    let coarse = IntervalFamily::new(vec![Interval::closed(0.0, 0.5).unwrap()]).unwrap();
    rep.check("refines_containment", refines(&fine, &coarse), "[0.1,0.2] in [0,0.5]".into());

    let x = TreeVector::from_entries(vec![
        (Node::parse("0").unwrap(), 3.0),
        (Node::parse("1").unwrap(), 4.0),
    ]);
    let sp = sp_norm(&x, 2.0).unwrap();
    rep.check("sp_level_pair", (sp.value - 5.0).abs() < 1e-12, format!("norm {}", sp.value));

    let a = TreeVector::from_entries(vec![(Node::root(), 2.0)]);
    let l = TreeVector::from_entries(vec![(Node::root(), 3.0)]);
    let d = lus2_decompose(&a, &l, 0).unwrap();
    rep.check("lus2_base_case", d.lhs == d.rhs && d.lhs == 6.0, "equality at depth 0".into());

    let tl = quadvar_core::synthesis::build_tent_level(&MeasureSpec::lebesgue(), 1).unwrap();
    rep.check(
        "tent_level_uniform",
        (tl.sup_norm() - 0.5).abs() < 1e-12 && tl.quantiles == vec![0.0, 0.5, 1.0],
        "quantiles and peak height".into(),
    );

    let est = quadvar_core::varmeasure::estimate_cdf(
        &id,
        &dyadic_grid(4),
        &default_ladder(),
        &GridPolicy::default(),
    )
    .unwrap();
    rep.check(
        "identity_measure_vanishes",
        est.norm_estimate() <= 2f64.powi(-10) + 1e-12,
        format!("norm estimate {}", est.norm_estimate()),
    );
    Ok(())
}
