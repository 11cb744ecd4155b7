//! Argument grammar and command dispatch. Every randomized command takes a
//! mandatory `--seed`; trials derive their seeds as `seed + t`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use equivar_core::ci_builder::{build_ci, codimension, cone_dimension};
use equivar_core::claw_equations::claw_set;
use equivar_core::flattening::flattening_ranks;
use equivar_core::model_param::{evaluate_psi, random_parameters, SampleOptions};
use equivar_core::tree::{parse_newick, EdgeSplit, Tree};
use equivar_core::verify::{self, VerifyReport};
use equivar_core::{build_split_basis, Model, Provenance};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{self, ParamsJson, ReportJson, SystemJson, TensorJson};
use crate::{resolve_model, CliError};

#[derive(Debug, Parser)]
#[command(name = "equivar", version, about = "Local complete intersections for equivariant phylogenetic varieties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print JSON only.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Record wall-clock runtimes in verification reports (makes output
    /// non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// GMM, JC, K2, K3, SS (case-insensitive) or `custom`.
    #[arg(long)]
    pub model: String,
    /// Custom group JSON, used with `--model custom`.
    #[arg(long)]
    pub group: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Newick string, e.g. "((1,2),(3,4));".
    #[arg(long)]
    pub tree: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimension, ambient dimension and codimension of the variety.
    Dims(TreeArgs),
    /// Isotypic multiplicities m_k(s) of the s-fold tensor power.
    Multiplicities {
        #[command(flatten)]
        model: ModelArgs,
        /// Largest tensor power.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Split basis of the invariant space for one edge split.
    Basis {
        #[command(flatten)]
        args: TreeArgs,
        /// Leaf split such as "1,2|3,4" (default: the first interior edge,
        /// or x0|rest on a claw).
        #[arg(long)]
        split: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the complete-intersection equation system.
    Equations {
        #[command(flatten)]
        args: TreeArgs,
        /// Write the coordinate basis as JSON.
        #[arg(long)]
        dump_basis: Option<PathBuf>,
        /// Write the system JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample parameters and write the tensor Ψ(params).
    Simulate {
        #[command(flatten)]
        args: TreeArgs,
        #[arg(long)]
        seed: u64,
        /// Rescale to stochastic matrices and a probability vector.
        #[arg(long)]
        stochastic: bool,
        /// Distance from the identity, A = (1−ε)Id + εR.
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// Draw complex parameters.
        #[arg(long)]
        complex: bool,
        /// Write Fourier coordinates (κ = 4 only).
        #[arg(long)]
        fourier: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Evaluate the equation system at a tensor.
    Eval {
        #[command(flatten)]
        args: TreeArgs,
        /// Tensor JSON.
        #[arg(long)]
        input: PathBuf,
    },
    /// Thin-flattening ranks of a tensor for one split.
    Flatten {
        #[command(flatten)]
        model: ModelArgs,
        /// Resolves leaf labels; without it leaves are numbered 1..n.
        #[arg(long)]
        tree: Option<String>,
        #[arg(long)]
        split: String,
        #[arg(long)]
        input: PathBuf,
        /// Singular values below `tol·σ₁` count as zero.
        #[arg(long, default_value_t = verify::RANK_TOL)]
        tol: f64,
    },
    /// Numerical verification of dimensions, claw hypothesis, CI rank,
    /// vanishing and split discrimination.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Jacobian rank of Ψ against the dimension formula.
    Dims {
        #[command(flatten)]
        args: TreeArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = verify::DIMENSION_TOL)]
        tol: f64,
    },
    /// Reduced claw Jacobian rank at generic points of no evolution.
    Claw {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = verify::RANK_TOL)]
        tol: f64,
    },
    /// Equation count, Jacobian rank at no evolution and vanishing on Ψ.
    Ci {
        #[command(flatten)]
        args: TreeArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = verify::RANK_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        vanish_tol: f64,
    },
    /// Vanishing of the system on simulated tensors, or on `--input`.
    Vanish {
        #[command(flatten)]
        args: TreeArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Flattening verdicts on simulated tensors: true splits accepted, and on
    /// quartets the two other splits rejected.
    Flatten {
        #[command(flatten)]
        args: TreeArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = verify::RANK_TOL)]
        tol: f64,
    },
}

/// What a command produced: text for stdout and whether all checks passed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub pass: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, pass: true }
    }
}

fn model_of(m: &ModelArgs) -> Result<Model, CliError> {
    resolve_model(&m.model, m.group.as_deref())
}

fn load(args: &TreeArgs) -> Result<(Model, Tree), CliError> {
    Ok((model_of(&args.model)?, parse_newick(&args.tree)?))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Runs one parsed command, inside a rayon pool when `--threads` is given.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let json = cli.json;
    match &cli.command {
        Command::Dims(args) => dims(args, json),
        Command::Multiplicities { model, n } => multiplicities(model, *n, json),
        Command::Basis { args, split, out } => basis(args, split.as_deref(), out.as_ref(), json),
        Command::Equations { args, dump_basis, out } => equations(args, dump_basis.as_ref(), out.as_ref(), json),
        Command::Simulate { args, seed, stochastic, epsilon, complex, fourier, out, params_out } => {
            let options = SampleOptions { stochastic: *stochastic, near_identity: *epsilon, complex: *complex };
            simulate(args, *seed, options, *fourier, out.as_ref(), params_out.as_ref(), json)
        }
        Command::Eval { args, input } => eval(args, input, json),
        Command::Flatten { model, tree, split, input, tol } => {
            flatten(model, tree.as_deref(), split, input, *tol, json)
        }
        Command::Verify(v) => {
            let reports = run_verify(v)?;
            Ok(render_reports(&reports, cli.timing, json)?)
        }
    }
}

#[derive(Serialize)]
struct DimsJson {
    model: String,
    tree: String,
    n: usize,
    edges: usize,
    dim_v: usize,
    dim_cv: usize,
    ambient: usize,
    codim: usize,
}

fn dims(args: &TreeArgs, json: bool) -> Result<Outcome, CliError> {
    let (model, tree) = load(args)?;
    let cv = cone_dimension(&model, &tree);
    let ambient = model.m1(tree.n_leaves());
    let d = DimsJson {
        model: model.name().to_string(),
        tree: tree.to_string(),
        n: tree.n_leaves(),
        edges: tree.num_edges(),
        dim_v: cv.saturating_sub(1),
        dim_cv: cv,
        ambient,
        codim: codimension(&model, &tree),
    };
    if json {
        return Ok(Outcome::ok(to_json(&d)?));
    }
    Ok(Outcome::ok(format!("dim V={} dim CV={} ambient={} codim={}\n", d.dim_v, d.dim_cv, d.ambient, d.codim)))
}

#[derive(Serialize)]
struct MultiplicityRow {
    s: usize,
    m: Vec<usize>,
    irrep_dims: Vec<usize>,
}

fn multiplicities(args: &ModelArgs, n: usize, json: bool) -> Result<Outcome, CliError> {
    let model = model_of(args)?;
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let rows = (1..=n)
        .map(|s| {
            Ok(MultiplicityRow { s, m: model.multiplicities(s)?, irrep_dims: model.group().irrep_dims().to_vec() })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if json {
        return Ok(Outcome::ok(to_json(&rows)?));
    }
    let mut out = String::new();
    writeln!(out, "{} (|G| = {}), irrep dims {:?}", model.name(), model.group().order(), model.group().irrep_dims())
        .ok();
    for r in &rows {
        let cells: Vec<String> = r.m.iter().map(|m| m.to_string()).collect();
        writeln!(out, "s={:<2} m = [{}]  m_1 = {}", r.s, cells.join(", "), r.m[0]).ok();
    }
    Ok(Outcome::ok(out))
}

/// The split named on the command line, or a sensible default.
fn choose_split(tree: &Tree, split: Option<&str>) -> Result<EdgeSplit, CliError> {
    let n = tree.n_leaves();
    match split {
        Some(s) => Ok(tree.parse_split(s)?),
        None => match tree.splits().into_iter().find(|s| s.a.len() > 1 && s.b.len() > 1) {
            Some(s) => Ok(s),
            None => Ok(EdgeSplit::new(vec![0], (1..n).collect(), n)?),
        },
    }
}

fn basis(args: &TreeArgs, split: Option<&str>, out: Option<&PathBuf>, json: bool) -> Result<Outcome, CliError> {
    let (model, tree) = load(args)?;
    let split = choose_split(&tree, split)?;
    let basis = build_split_basis(&model, tree.n_leaves(), &split)?;
    let dump = io::basis_dump(&basis);
    if let Some(path) = out {
        io::write_json(path, &dump)?;
    }
    if json {
        return Ok(Outcome::ok(to_json(&dump)?));
    }
    let mut text = String::new();
    writeln!(text, "{} split {}: {} basis vectors", model.name(), split.render(tree.labels()), basis.len()).ok();
    writeln!(text, "{:>3} {:>6} {:>6} {:>4}", "k", "rows", "cols", "m_k").ok();
    for b in basis.blocks() {
        writeln!(text, "{:>3} {:>6} {:>6} {:>4}", b.k + 1, b.rows, b.cols, b.m).ok();
    }
    writeln!(text, "condition indicator {:.3e}", basis.condition_indicator()).ok();
    Ok(Outcome::ok(text))
}

fn equations(
    args: &TreeArgs,
    dump_basis: Option<&PathBuf>,
    out: Option<&PathBuf>,
    json: bool,
) -> Result<Outcome, CliError> {
    let (model, tree) = load(args)?;
    let system = build_ci(&model, &tree)?;
    let doc = SystemJson::new(&system, &tree);
    if let Some(path) = dump_basis {
        match system.split_basis() {
            Some(b) => io::write_json(path, &io::basis_dump(b))?,
            None => match &system.coordinates {
                equivar_core::ci_builder::Coordinates::Claw(c) => io::write_json(path, &io::claw_basis_dump(c))?,
                _ => unreachable!("split coordinates always carry a basis"),
            },
        }
    }
    if let Some(path) = out {
        io::write_json(path, &doc)?;
    }
    if json {
        return Ok(Outcome::ok(to_json(&doc)?));
    }
    let mut text = String::new();
    writeln!(text, "{} on {} ({} leaves)", model.name(), tree, tree.n_leaves()).ok();
    writeln!(text, "{:<8} {:>6}", "source", "count").ok();
    for p in [Provenance::Claw, Provenance::ClawA, Provenance::ClawB, Provenance::Edge] {
        let c = system.count(p);
        if c > 0 {
            writeln!(text, "{:<8} {:>6}", p.as_str(), c).ok();
        }
    }
    writeln!(text, "{:<8} {:>6}", "total", system.len()).ok();
    let verdict = if system.len() == system.codimension { "PASS" } else { "FAIL" };
    writeln!(text, "codim check: {} equations vs codim {}: {verdict}", system.len(), system.codimension).ok();
    Ok(Outcome { stdout: text, pass: verdict == "PASS" })
}

fn simulate(
    args: &TreeArgs,
    seed: u64,
    options: SampleOptions,
    fourier: bool,
    out: Option<&PathBuf>,
    params_out: Option<&PathBuf>,
    json: bool,
) -> Result<Outcome, CliError> {
    let (model, tree) = load(args)?;
    let params = random_parameters(&model, &tree, seed, options)?;
    let psi = evaluate_psi(&model, &tree, &params)?;
    let doc = if fourier { TensorJson::fourier(&psi)? } else { TensorJson::standard(&psi) };
    if let Some(path) = params_out {
        io::write_json(path, &ParamsJson::from(&params))?;
    }
    match out {
        Some(path) => {
            io::write_json(path, &doc)?;
            if json {
                return Ok(Outcome::ok(String::new()));
            }
            Ok(Outcome::ok(format!("wrote {} entries to {}\n", doc.data.len(), path.display())))
        }
        None => Ok(Outcome::ok(to_json(&doc)?)),
    }
}

#[derive(Serialize)]
struct ResidualJson {
    id: usize,
    name: String,
    provenance: String,
    value: io::Complex,
    residual: f64,
}

fn eval(args: &TreeArgs, input: &Path, json: bool) -> Result<Outcome, CliError> {
    let (model, tree) = load(args)?;
    let p = io::read_json::<TensorJson>(input)?.to_tensor()?;
    let system = build_ci(&model, &tree)?;
    let q = system.coords_of(&p)?;
    let values = system.evaluate(&q);
    let residuals = system.residuals(&q);
    let rows: Vec<ResidualJson> = system
        .equations
        .iter()
        .zip(values.iter().zip(&residuals))
        .enumerate()
        .map(|(id, (e, (v, r)))| ResidualJson {
            id,
            name: e.name.clone(),
            provenance: e.provenance.as_str().into(),
            value: io::pair(*v),
            residual: *r,
        })
        .collect();
    if json {
        return Ok(Outcome::ok(to_json(&rows)?));
    }
    let mut text = String::new();
    for r in &rows {
        writeln!(text, "{:>4} {:<7} {:<28} {:.3e}", r.id, r.provenance, r.name, r.residual).ok();
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    writeln!(text, "max normalized residual {worst:.3e}").ok();
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct BlockJson {
    k: usize,
    rank: usize,
    bound: usize,
    singular_values: Vec<f64>,
}

#[derive(Serialize)]
struct FlattenJson {
    split: String,
    accepted: bool,
    blocks: Vec<BlockJson>,
}

fn parse_numbered_split(text: &str, n: usize) -> Result<EdgeSplit, CliError> {
    let side = |s: &str| -> Result<Vec<usize>, CliError> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1 && v <= n)
                    .map(|v| v - 1)
                    .ok_or_else(|| CliError::Usage(format!("bad leaf {x:?} in split (leaves are 1..{n})")))
            })
            .collect()
    };
    let (a, b) = text.split_once('|').ok_or_else(|| CliError::Usage(format!("split {text:?} needs a '|'")))?;
    Ok(EdgeSplit::new(side(a)?, side(b)?, n)?)
}

fn flatten(
    args: &ModelArgs,
    tree: Option<&str>,
    split: &str,
    input: &Path,
    tol: f64,
    json: bool,
) -> Result<Outcome, CliError> {
    let model = model_of(args)?;
    let p = io::read_json::<TensorJson>(input)?.to_tensor()?;
    let n = p.order();
    let (split, label) = match tree {
        Some(t) => {
            let tree = parse_newick(t)?;
            if tree.n_leaves() != n {
                return Err(CliError::Usage(format!("tree has {} leaves, tensor has order {n}", tree.n_leaves())));
            }
            let mut s = tree.parse_split(split)?;
            s.edge = None;
            let label = s.render(tree.labels());
            (s, label)
        }
        None => (parse_numbered_split(split, n)?, split.to_string()),
    };
    let basis = build_split_basis(&model, n, &split)?;
    let (blocks, accepted) = flattening_ranks(&p, &basis, tol)?;
    let doc = FlattenJson {
        split: label,
        accepted,
        blocks: blocks
            .into_iter()
            .map(|b| BlockJson { k: b.k + 1, rank: b.rank, bound: b.bound, singular_values: b.singular_values })
            .collect(),
    };
    if json {
        return Ok(Outcome::ok(to_json(&doc)?));
    }
    let mut text = String::new();
    writeln!(text, "split {}", doc.split).ok();
    for b in &doc.blocks {
        writeln!(text, "k={} rank {} (bound {})", b.k, b.rank, b.bound).ok();
    }
    writeln!(text, "verdict: {}", if doc.accepted { "consistent with the split" } else { "rejected" }).ok();
    Ok(Outcome::ok(text))
}

fn timed<T>(f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, f64), CliError> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64() * 1e3))
}

fn with_runtime(mut r: VerifyReport, ms: f64) -> VerifyReport {
    r.runtime_ms = Some(ms);
    r
}

fn seeds(seed: u64, trials: usize) -> Vec<u64> {
    (seed..seed + trials as u64).collect()
}

fn range_text(values: &[usize]) -> String {
    let min = values.iter().copied().min().unwrap_or(0);
    let max = values.iter().copied().max().unwrap_or(0);
    if min == max {
        min.to_string()
    } else {
        format!("{min}..{max}")
    }
}

pub fn run_verify(cmd: &VerifyCommand) -> Result<Vec<VerifyReport>, CliError> {
    match cmd {
        VerifyCommand::Dims { args, seed, trials, tol } => {
            let (model, tree) = load(args)?;
            let (r, ms) = timed(|| {
                let ranks = seeds(*seed, *trials)
                    .into_par_iter()
                    .map(|s| {
                        let params = random_parameters(&model, &tree, s, SampleOptions::default())?;
                        Ok(verify::psi_rank(&model, &tree, &params, *tol)?)
                    })
                    .collect::<Result<Vec<usize>, CliError>>()?;
                let observed = ranks.iter().copied().max().unwrap_or(0);
                let expected = cone_dimension(&model, &tree);
                Ok(VerifyReport {
                    check: format!("dimension of CV({}, {})", model.name(), tree),
                    expected: expected.to_string(),
                    observed: observed.to_string(),
                    tol: *tol,
                    pass: observed == expected,
                    seeds: seeds(*seed, *trials),
                    runtime_ms: None,
                })
            })?;
            Ok(vec![with_runtime(r, ms)])
        }
        VerifyCommand::Claw { model, degree, seed, trials, tol } => {
            let model = model_of(model)?;
            let set = claw_set(&model, *degree)?;
            let (r, ms) = timed(|| {
                let ranks = seeds(*seed, *trials)
                    .into_par_iter()
                    .map(|s| {
                        let p = verify::generic_no_evolution(&model, *degree, s)?;
                        let j = verify::claw_reduced_jacobian(&model, *degree, &p)?;
                        let sv = equivar_core::linalg::singular_values(&j);
                        Ok(equivar_core::linalg::numeric_rank(&sv, *tol))
                    })
                    .collect::<Result<Vec<usize>, CliError>>()?;
                Ok(VerifyReport {
                    check: format!("claw hypothesis ({}, {degree})", model.name()),
                    expected: set.codimension.to_string(),
                    observed: range_text(&ranks),
                    tol: *tol,
                    pass: ranks.iter().all(|&r| r == set.codimension),
                    seeds: seeds(*seed, *trials),
                    runtime_ms: None,
                })
            })?;
            Ok(vec![with_runtime(r, ms)])
        }
        VerifyCommand::Ci { args, seed, trials, tol, vanish_tol } => {
            let (model, tree) = load(args)?;
            let ((system, build), build_ms) = timed(|| {
                let system = build_ci(&model, &tree)?;
                let r = VerifyReport {
                    check: format!("equation count ({}, {})", model.name(), tree),
                    expected: system.codimension.to_string(),
                    observed: system.len().to_string(),
                    tol: 0.0,
                    pass: system.len() == system.codimension,
                    seeds: Vec::new(),
                    runtime_ms: None,
                };
                Ok((system, r))
            })?;
            let (rank, rank_ms) = timed(|| {
                let ranks = seeds(*seed, *trials)
                    .into_par_iter()
                    .map(|s| {
                        let p = verify::generic_no_evolution(&model, tree.n_leaves(), s)?;
                        Ok(system.jacobian_rank(&system.coords_of(&p)?, *tol))
                    })
                    .collect::<Result<Vec<usize>, CliError>>()?;
                Ok(VerifyReport {
                    check: "Jacobian rank at generic no-evolution points".into(),
                    expected: system.codimension.to_string(),
                    observed: range_text(&ranks),
                    tol: *tol,
                    pass: ranks.iter().all(|&r| r == system.codimension),
                    seeds: seeds(*seed, *trials),
                    runtime_ms: None,
                })
            })?;
            let (vanish, vanish_ms) = timed(|| vanishing_report(&model, &tree, &system, *seed, *trials, *vanish_tol))?;
            Ok(vec![with_runtime(build, build_ms), with_runtime(rank, rank_ms), with_runtime(vanish, vanish_ms)])
        }
        VerifyCommand::Vanish { args, seed, trials, tol, input } => {
            let (model, tree) = load(args)?;
            let system = build_ci(&model, &tree)?;
            let (r, ms) = timed(|| match input {
                Some(path) => {
                    let p = io::read_json::<TensorJson>(path)?.to_tensor()?;
                    let mut r = verify::check_vanishing(&system, &p, *tol)?;
                    r.check = format!("vanishing at {}", path.display());
                    Ok(r)
                }
                None => vanishing_report(&model, &tree, &system, *seed, *trials, *tol),
            })?;
            Ok(vec![with_runtime(r, ms)])
        }
        VerifyCommand::Flatten { args, seed, trials, tol } => {
            let (model, tree) = load(args)?;
            flatten_reports(&model, &tree, *seed, *trials, *tol)
        }
    }
}

fn vanishing_report(
    model: &Model,
    tree: &Tree,
    system: &equivar_core::EquationSystem,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<VerifyReport, CliError> {
    let worst = seeds(seed, trials)
        .into_par_iter()
        .map(|s| {
            let params = random_parameters(model, tree, s, SampleOptions::default())?;
            let p = evaluate_psi(model, tree, &params)?;
            let q = system.coords_of(&p)?;
            Ok(system.residuals(&q).into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok(VerifyReport {
        check: format!("vanishing of {} equations on simulated tensors", system.len()),
        expected: format!("<= {tol:e}"),
        observed: format!("{max:.3e}"),
        tol,
        pass: max <= tol,
        seeds: seeds(seed, trials),
        runtime_ms: None,
    })
}

/// The three leaf bipartitions `{a,b}|{c,d}` of a quartet.
pub fn quartet_splits() -> Vec<EdgeSplit> {
    [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]]
        .iter()
        .map(|p| EdgeSplit::new(vec![p[0], p[1]], vec![p[2], p[3]], 4).expect("quartet split"))
        .collect()
}

fn flatten_reports(
    model: &Model,
    tree: &Tree,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<VerifyReport>, CliError> {
    let n = tree.n_leaves();
    let mut cases: Vec<(EdgeSplit, bool)> = tree
        .splits()
        .into_iter()
        .filter(|s| s.a.len() > 1 && s.b.len() > 1)
        .map(|mut s| {
            s.edge = None;
            (s, true)
        })
        .collect();
    if n == 4 {
        for s in quartet_splits() {
            if !cases.iter().any(|(t, _)| t.a == s.a) {
                cases.push((s, false));
            }
        }
    }
    let tensors = seeds(seed, trials)
        .into_par_iter()
        .map(|s| {
            let params = random_parameters(model, tree, s, SampleOptions::default())?;
            Ok(evaluate_psi(model, tree, &params)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let need = (trials * 99).div_ceil(100);
    let mut reports = Vec::with_capacity(cases.len());
    for (split, truth) in cases {
        let (r, ms) = timed(|| {
            let basis = build_split_basis(model, n, &split)?;
            let verdicts = tensors
                .par_iter()
                .map(|p| Ok(flattening_ranks(p, &basis, tol)?.1))
                .collect::<Result<Vec<bool>, CliError>>()?;
            let hits = verdicts.iter().filter(|&&v| v == truth).count();
            let label = split.render(tree.labels());
            Ok(VerifyReport {
                check: format!(
                    "{} split {label} {}",
                    if truth { "true" } else { "wrong" },
                    if truth { "accepted" } else { "rejected" }
                ),
                expected: format!(">= {need}/{trials}"),
                observed: format!("{hits}/{trials}"),
                tol,
                pass: hits >= need,
                seeds: seeds(seed, trials),
                runtime_ms: None,
            })
        })?;
        reports.push(with_runtime(r, ms));
    }
    Ok(reports)
}

fn render_reports(reports: &[VerifyReport], timing: bool, json: bool) -> Result<Outcome, CliError> {
    let pass = reports.iter().all(|r| r.pass);
    let docs: Vec<ReportJson> = reports
        .iter()
        .map(|r| {
            let mut j = ReportJson::from(r);
            if !timing {
                j.runtime_ms = None;
            }
            j
        })
        .collect();
    if json {
        return Ok(Outcome { stdout: to_json(&docs)?, pass });
    }
    let mut text = String::new();
    for r in &docs {
        let seeds = match (r.seeds.first(), r.seeds.last()) {
            (Some(a), Some(b)) if a != b => format!(", seeds {a}..={b}"),
            (Some(a), _) => format!(", seed {a}"),
            _ => String::new(),
        };
        let time = r.runtime_ms.map(|ms| format!(", {ms:.1} ms")).unwrap_or_default();
        writeln!(
            text,
            "{} {}: expected {}, observed {} (tol {:e}{seeds}{time})",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.expected,
            r.observed,
            r.tol
        )
        .ok();
    }
    Ok(Outcome { stdout: text, pass })
}
