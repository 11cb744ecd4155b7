//! Numeric checks: dimensions via the Jacobian of `Ψ`, vanishing of equation
//! systems, Jacobian ranks at points of no evolution, the claw hypothesis and
//! the integer identities between multiplicities and equation counts.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ci_builder::{codimension_for, cone_dimension, EquationSystem};
use crate::claw_equations::{claw_set, ClawCoords};
use crate::flattening::edge_invariant_count;
use crate::linalg::{self, Mat};
use crate::model_param::{psi_jacobian, random_parameters, Parameters, SampleOptions, Sampler};
use crate::perm_rep::{fourier_monomial, Model};
use crate::tensor::{no_evolution_tensor, Tensor};
use crate::tree::Tree;
use crate::{Error, Result, C64};

/// Default relative SVD tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-9;
/// Relative tolerance used for Jacobians of `Ψ`.
pub const DIMENSION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub check: String,
    pub expected: String,
    pub observed: String,
    pub tol: f64,
    pub pass: bool,
    pub seeds: Vec<u64>,
    /// Filled in by callers that time the check.
    pub runtime_ms: Option<f64>,
}

impl VerifyReport {
    fn new(check: String, expected: String, observed: String, tol: f64, pass: bool, seeds: Vec<u64>) -> Self {
        VerifyReport { check, expected, observed, tol, pass, seeds, runtime_ms: None }
    }
}

/// Orbit coefficients of a generic `π`, uniform on `[0.5, 1.5]`.
pub fn generic_pi(model: &Model, rng: &mut Sampler) -> Vec<C64> {
    model.orbit_basis().iter().map(|_| C64::new(rng.uniform(0.5, 1.5), 0.0)).collect()
}

/// State-indexed vector from orbit coefficients.
pub fn pi_from_orbits(model: &Model, coeffs: &[C64]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); model.kappa()];
    for (orbit, c) in model.orbit_basis().iter().zip(coeffs) {
        for (x, o) in orbit.iter().enumerate() {
            if o.re != 0.0 {
                v[x] = *c;
            }
        }
    }
    v
}

/// A generic point of no evolution of order `n` drawn from `seed`.
pub fn generic_no_evolution(model: &Model, n: usize, seed: u64) -> Result<Tensor> {
    let mut rng = Sampler::new(seed);
    let pi = pi_from_orbits(model, &generic_pi(model, &mut rng));
    no_evolution_tensor(model, &pi, n)
}

/// Numeric rank of `∂Ψ/∂params` at one parameter point.
pub fn psi_rank(model: &Model, tree: &Tree, params: &Parameters, tol: f64) -> Result<usize> {
    let j = psi_jacobian(model, tree, params)?;
    Ok(linalg::numeric_rank(&linalg::singular_values(&j), tol))
}

/// Largest Jacobian rank of `Ψ` over `trials` random parameter draws.
pub fn numeric_dimension(model: &Model, tree: &Tree, trials: usize, seed: u64, tol: f64) -> Result<usize> {
    let mut best = 0;
    for t in 0..trials as u64 {
        let params = random_parameters(model, tree, seed + t, SampleOptions::default())?;
        best = best.max(psi_rank(model, tree, &params, tol)?);
    }
    Ok(best)
}

pub fn dimension_report(model: &Model, tree: &Tree, trials: usize, seed: u64, tol: f64) -> Result<VerifyReport> {
    let observed = numeric_dimension(model, tree, trials, seed, tol)?;
    let expected = cone_dimension(model, tree);
    Ok(VerifyReport::new(
        format!("dimension {} {}", model.name(), tree),
        format!("{expected}"),
        format!("{observed}"),
        tol,
        observed == expected,
        (seed..seed + trials as u64).collect(),
    ))
}

/// Largest normalized residual of the system at `p`.
pub fn check_vanishing(system: &EquationSystem, p: &Tensor, tol: f64) -> Result<VerifyReport> {
    let q = system.coords_of(p)?;
    let worst = system.residuals(&q).into_iter().fold(0.0, f64::max);
    Ok(VerifyReport::new(
        format!("vanishing of {} equations", system.len()),
        format!("<= {tol:e}"),
        format!("{worst:e}"),
        tol,
        worst <= tol,
        Vec::new(),
    ))
}

pub fn jacobian_rank_at(system: &EquationSystem, coords: &[C64], tol: f64) -> usize {
    system.jacobian_rank(coords, tol)
}

/// Jacobian of the claw set of degree `d` at `p`, taken in the `q`-coordinates
/// of the split `x₀ | rest`, with the columns of the coordinates
/// `S(u^k_{x₀,i} ⊗ u^k_{rest,j})`, `i, j ≤ m_k`, removed.
pub fn claw_reduced_jacobian(model: &Model, d: usize, p: &Tensor) -> Result<Mat> {
    let set = claw_set(model, d)?;
    let split = crate::tree::EdgeSplit::new(vec![0], (1..d).collect(), d)?;
    let basis = crate::split_basis::build_split_basis(model, d, &split)?;
    let own = set.coords.of(p)?;
    let j_own = crate::flattening::jacobian(&set.equations, &own);
    // Column c of the change of coordinates: own coordinates of basis vector c.
    let change: Vec<Vec<C64>> = (0..basis.len()).map(|c| set.coords.solve(basis.vector_ab(c)).0).collect();
    let change = Mat::from_columns(set.coords.len(), &change);
    let j_q = j_own.mul(&change);
    let keep: Vec<usize> = basis
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, &(k, i, j))| {
            let m = basis.blocks()[k].m;
            !(i < m && j < m)
        })
        .map(|(c, _)| c)
        .collect();
    let rows: Vec<usize> = (0..j_q.rows()).collect();
    Ok(j_q.select(&rows, &keep))
}

/// Rank of the reduced claw Jacobian at `trials` generic points of no
/// evolution; passes when every rank equals the codimension.
pub fn claw_hypothesis_check(model: &Model, d: usize, trials: usize, seed: u64, tol: f64) -> Result<VerifyReport> {
    let set = claw_set(model, d)?;
    let mut ranks = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let p = generic_no_evolution(model, d, seed + t)?;
        let j = claw_reduced_jacobian(model, d, &p)?;
        ranks.push(linalg::numeric_rank(&linalg::singular_values(&j), tol));
    }
    let min = ranks.iter().copied().min().unwrap_or(0);
    let max = ranks.iter().copied().max().unwrap_or(0);
    Ok(VerifyReport::new(
        format!("claw hypothesis ({}, {d})", model.name()),
        format!("{}", set.codimension),
        if min == max { format!("{min}") } else { format!("{min}..{max}") },
        tol,
        ranks.iter().all(|&r| r == set.codimension),
        (seed..seed + trials as u64).collect(),
    ))
}

/// The 24×48 Jacobian of the Strassen minors at `p` in the mixed basis
/// `X̄ ⊗ Y ⊗ Z` (Fourier on the first leaf, standard on the others), with
/// the `Ā ⊗ Y ⊗ Z` columns removed.
pub fn gmm_mixed_jacobian(p: &Tensor) -> Result<Mat> {
    let set = crate::claw_equations::gmm_tripod_equations();
    let j = crate::flattening::jacobian(&set.equations, p.data());
    let mut columns = Vec::with_capacity(48);
    for x in 1..4 {
        let f = fourier_monomial(&[x]);
        for yz in 0..16 {
            let mut v = vec![C64::new(0.0, 0.0); 64];
            for (a, fa) in f.iter().enumerate() {
                v[a * 16 + yz] = *fa;
            }
            columns.push(v);
        }
    }
    Ok(j.mul(&Mat::from_columns(64, &columns)))
}

/// Rank of `∂Ψ` at `(π, Id)` on the claw tree of degree `d`.
pub fn smoothness_probe(model: &Model, d: usize, pi: &[C64], tol: f64) -> Result<VerifyReport> {
    let newick = format!("({});", (1..=d).map(|i| format!("{i}")).collect::<Vec<_>>().join(","));
    let tree = crate::tree::parse_newick(&newick)?;
    let params = Parameters::identity(model, &tree, pi.to_vec())?;
    let observed = psi_rank(model, &tree, &params, tol)?;
    let expected = cone_dimension(model, &tree);
    Ok(VerifyReport::new(
        format!("smoothness at no evolution ({}, claw {d})", model.name()),
        format!("{expected}"),
        format!("{observed}"),
        tol,
        observed == expected,
        Vec::new(),
    ))
}

/// `m_1(a+b) = Σ_k m_{k*}(a)·m_k(b)`.
pub fn multiplicity_identity(model: &Model, a: usize, b: usize) -> Result<bool> {
    let ma = model.multiplicities(a)?;
    let mb = model.multiplicities(b)?;
    let group = model.group();
    let sum: usize = (0..mb.len()).map(|k| ma[group.dual(k)] * mb[k]).sum();
    Ok(sum == model.m1(a + b))
}

/// The edge-invariant count against `m_1(n) − m_1(a+1) − m_1(b+1) + m_1(2)`.
pub fn edge_count_identity(model: &Model, a: usize, b: usize) -> Result<(usize, usize)> {
    let product = edge_invariant_count(model, a, b)?;
    let alt = (model.m1(a + b) + model.m1(2)) as i64 - model.m1(a + 1) as i64 - model.m1(b + 1) as i64;
    if alt < 0 {
        return Err(Error::Internal(format!("negative edge count for ({a},{b})")));
    }
    Ok((product, alt as usize))
}

/// Checks, for every step of the peel schedule, that
/// `codim(T_A) + codim(T_B) + N_{A|B} = codim(T)`, and for every interior
/// edge that both edge-count formulas agree.
pub fn count_identities(model: &Model, tree: &Tree) -> Result<bool> {
    for s in tree.splits() {
        let (p, q) = edge_count_identity(model, s.a.len(), s.b.len())?;
        if p != q {
            return Ok(false);
        }
    }
    let mut edges = tree.num_edges();
    for step in tree.peel_schedule().steps {
        let (a, b) = (step.a.len(), step.b.len());
        let n = a + b;
        let edges_a = edges - b;
        let total = codimension_for(model, a + 1, edges_a)
            + codimension_for(model, b + 1, b + 1)
            + edge_invariant_count(model, a, b)?;
        if total != codimension_for(model, n, edges) {
            return Ok(false);
        }
        edges = edges_a;
    }
    Ok(true)
}

/// Fourier coordinates of the claw set's own coordinates, for SS points of
/// no evolution (used in reports).
pub fn claw_coordinates(model: &Model, d: usize, p: &Tensor) -> Result<(Vec<C64>, &'static str)> {
    let set = claw_set(model, d)?;
    let kind = match set.coords {
        ClawCoords::Standard { .. } => "standard",
        ClawCoords::Fourier { .. } => "fourier",
        ClawCoords::Split(_) => "split",
    };
    Ok((set.coords.of(p)?, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm_rep::ModelName;
    use crate::tree::parse_newick;

    #[test]
    fn multiplicity_identity_small() {
        for name in ModelName::BUILTIN {
            let m = Model::builtin(name);
            assert!(multiplicity_identity(&m, 2, 2).unwrap());
        }
    }

    #[test]
    fn count_identities_on_a_caterpillar() {
        let t = parse_newick("((1,2),(3,(4,(5,6))));").unwrap();
        for name in ModelName::BUILTIN {
            assert!(count_identities(&Model::builtin(name), &t).unwrap());
        }
    }

    #[test]
    fn jc_dimension_of_quartet() {
        let m = Model::builtin(ModelName::Jc);
        let t = parse_newick("((1,2),(3,4));").unwrap();
        assert_eq!(numeric_dimension(&m, &t, 2, 0, DIMENSION_TOL).unwrap(), 6);
    }
}
