//! Equivariant Markov parameters on a tree and the map `Ψ_T` to joint
//! distribution tensors, evaluated by contracting leaf-to-root.
//!
//! Random draws use ChaCha8 seeded with `seed_from_u64`; a uniform `f64` is
//! `(next_u64 >> 11)·2⁻⁵³`, mapped affinely onto the requested interval.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::{self, Mat};
use crate::perm_rep::Model;
use crate::tensor::Tensor;
use crate::tree::Tree;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Portable uniform sampler over a seeded ChaCha8 stream.
#[derive(Clone, Debug)]
pub struct Sampler(ChaCha8Rng);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// Parameters on the orbit bases: `pi` on the orbits of `Σ`, each edge matrix
/// on the orbits of `Σ×Σ`. Edges are oriented away from `root`.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub root: usize,
    pub pi: Vec<C64>,
    pub edges: Vec<EdgeParam>,
    pub stochastic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeParam {
    pub parent: usize,
    pub child: usize,
    pub coeffs: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    pub stochastic: bool,
    /// `A = (1−ε)·Id + ε·R`.
    pub near_identity: f64,
    /// Draw imaginary parts too.
    pub complex: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { stochastic: false, near_identity: 0.2, complex: false }
    }
}

fn combine(basis: &[Mat], coeffs: &[C64], kappa: usize) -> Mat {
    let mut m = Mat::zeros(kappa, kappa);
    for (b, c) in basis.iter().zip(coeffs) {
        for r in 0..kappa {
            for col in 0..kappa {
                if b[(r, col)] != ZERO {
                    m[(r, col)] += b[(r, col)] * c;
                }
            }
        }
    }
    m
}

/// Coefficients of an equivariant matrix on the orbit indicators.
fn coeffs_of(basis: &[Mat], m: &Mat) -> Vec<C64> {
    basis
        .iter()
        .map(|b| {
            let kappa = b.rows();
            let cell = (0..kappa * kappa).find(|&x| b[(x / kappa, x % kappa)] != ZERO).expect("non-empty orbit");
            m[(cell / kappa, cell % kappa)]
        })
        .collect()
}

impl Parameters {
    /// Root distribution as a state-indexed vector.
    pub fn pi_vector(&self, model: &Model) -> Vec<C64> {
        let mut v = vec![ZERO; model.kappa()];
        for (orbit, c) in model.orbit_basis().iter().zip(&self.pi) {
            for (x, o) in orbit.iter().enumerate() {
                if *o != ZERO {
                    v[x] = *c;
                }
            }
        }
        v
    }

    /// Transition matrix of edge `e`, rows indexed by the parent state.
    pub fn matrix(&self, model: &Model, e: usize) -> Mat {
        combine(&model.equivariant_hom_basis(), &self.edges[e].coeffs, model.kappa())
    }

    /// Number of free coordinates (π, then each edge in order).
    pub fn num_coordinates(&self) -> usize {
        self.pi.len() + self.edges.iter().map(|e| e.coeffs.len()).sum::<usize>()
    }

    /// Identity matrices on every edge with the given `pi`.
    pub fn identity(model: &Model, tree: &Tree, pi: Vec<C64>) -> Result<Self> {
        let hom = model.equivariant_hom_basis();
        if pi.len() != model.orbit_basis().len() {
            return Err(Error::DimensionMismatch(format!("pi needs {} orbit coefficients", model.orbit_basis().len())));
        }
        let id = coeffs_of(&hom, &Mat::identity(model.kappa()));
        let root = tree.default_root();
        let edges = tree
            .rooted_edges(root)
            .into_iter()
            .map(|(parent, child)| EdgeParam { parent, child, coeffs: id.clone() })
            .collect();
        Ok(Parameters { root, pi, edges, stochastic: false })
    }

    /// The same parameters rooted at `root`: edges whose orientation flips
    /// get their matrix transposed and `pi` is kept. `Ψ` is unchanged when
    /// `pi` is the all-ones vector.
    pub fn rerooted(&self, model: &Model, tree: &Tree, root: usize) -> Result<Self> {
        let hom = model.equivariant_hom_basis();
        let edges = tree
            .rooted_edges(root)
            .into_iter()
            .map(|(parent, child)| {
                let (e, flipped) = self
                    .edges
                    .iter()
                    .enumerate()
                    .find_map(|(i, e)| {
                        if (e.parent, e.child) == (parent, child) {
                            Some((i, false))
                        } else if (e.parent, e.child) == (child, parent) {
                            Some((i, true))
                        } else {
                            None
                        }
                    })
                    .ok_or_else(|| Error::DimensionMismatch(format!("no parameters for edge ({parent},{child})")))?;
                let coeffs = if flipped {
                    coeffs_of(&hom, &self.matrix(model, e).transpose())
                } else {
                    self.edges[e].coeffs.clone()
                };
                Ok(EdgeParam { parent, child, coeffs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Parameters { root, pi: self.pi.clone(), edges, stochastic: self.stochastic })
    }
}

/// Random equivariant parameters, resampled until `π` has no zero entry and
/// every edge matrix is nonsingular with `det ≠ ±1` (matrix checks are
/// skipped for `ε = 0`, where every matrix is the identity).
pub fn random_parameters(model: &Model, tree: &Tree, seed: u64, options: SampleOptions) -> Result<Parameters> {
    let eps = options.near_identity;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::DimensionMismatch(format!("near_identity must lie in [0,1], got {eps}")));
    }
    let kappa = model.kappa();
    let hom = model.equivariant_hom_basis();
    let orbits = model.orbit_basis();
    let id = coeffs_of(&hom, &Mat::identity(kappa));
    let root = tree.default_root();
    let oriented = tree.rooted_edges(root);
    let mut rng = Sampler::new(seed);
    let draw = |rng: &mut Sampler| -> C64 {
        let re = rng.uniform(-1.0, 1.0);
        let im = if options.complex { rng.uniform(-1.0, 1.0) } else { 0.0 };
        C64::new(re, im)
    };
    const ATTEMPTS: usize = 100;
    for _ in 0..ATTEMPTS {
        let mut pi: Vec<C64> = orbits.iter().map(|_| draw(&mut rng)).collect();
        let mut edges = Vec::with_capacity(oriented.len());
        for &(parent, child) in &oriented {
            let r: Vec<C64> = hom.iter().map(|_| draw(&mut rng)).collect();
            let coeffs: Vec<C64> = id.iter().zip(&r).map(|(i, x)| i * (1.0 - eps) + x * eps).collect();
            edges.push(EdgeParam { parent, child, coeffs });
        }
        if options.stochastic {
            for e in edges.iter_mut() {
                let m = combine(&hom, &e.coeffs, kappa);
                let scaled = Mat::from_fn(kappa, kappa, |r, c| {
                    let s: C64 = m.row(r).iter().sum();
                    m[(r, c)] / s
                });
                e.coeffs = coeffs_of(&hom, &scaled);
            }
            let total: C64 = orbits.iter().zip(&pi).map(|(o, c)| c * o.iter().map(|x| x.re).sum::<f64>()).sum();
            for c in pi.iter_mut() {
                *c /= total;
            }
        }
        let params = Parameters { root, pi, edges, stochastic: options.stochastic };
        if is_generic(model, &params, eps > 0.0) {
            return Ok(params);
        }
    }
    Err(Error::SamplingFailed(ATTEMPTS))
}

fn is_generic(model: &Model, p: &Parameters, check_matrices: bool) -> bool {
    if p.pi_vector(model).iter().any(|x| !x.is_finite() || x.norm() < 1e-8) {
        return false;
    }
    if !check_matrices {
        return true;
    }
    (0..p.edges.len()).all(|e| {
        let m = p.matrix(model, e);
        if m.as_slice().iter().any(|x| !x.is_finite()) {
            return false;
        }
        let d = linalg::det(&m);
        d.norm() > 1e-8 && (d - ONE).norm() > 1e-8 && (d + ONE).norm() > 1e-8
    })
}

/// `Ψ_T(params)`: `p_{X₁…Xₙ} = Σ π_{X_r} ∏_e A^e_{X_pa(e), X_ch(e)}`.
pub fn evaluate_psi(model: &Model, tree: &Tree, params: &Parameters) -> Result<Tensor> {
    let mats: Vec<Mat> = (0..params.edges.len()).map(|e| params.matrix(model, e)).collect();
    evaluate_with(model.kappa(), tree, params.root, &params.pi_vector(model), &params.edges, &mats)
}

/// `Ψ_T` for explicit state-indexed `pi` and edge matrices (aligned with
/// `edges`). Linear in `pi` and in every matrix.
pub fn evaluate_with(
    kappa: usize,
    tree: &Tree,
    root: usize,
    pi: &[C64],
    edges: &[EdgeParam],
    mats: &[Mat],
) -> Result<Tensor> {
    let n = tree.n_leaves();
    if edges.len() != tree.num_edges() || mats.len() != edges.len() {
        return Err(Error::DimensionMismatch(format!("{} edge matrices for {} edges", mats.len(), tree.num_edges())));
    }
    if pi.len() != kappa {
        return Err(Error::DimensionMismatch("pi length".into()));
    }
    if tree.is_leaf(root) {
        return Err(Error::InvalidTree("the root must be an interior vertex".into()));
    }
    if kappa.checked_pow(n as u32).is_none_or(|len| len > crate::tensor::MAX_ENTRIES) {
        return Err(Error::TensorTooLarge);
    }
    let mut matrix_of = vec![None; tree.n_vertices()];
    for (e, ep) in edges.iter().enumerate() {
        matrix_of[ep.child] = Some((ep.parent, e));
    }
    // Partial tensor of vertex v: (state of v) × (states of the leaves below
    // v, in the recorded order).
    let (leaves, data) = below(tree, root, usize::MAX, kappa, &matrix_of, mats)?;
    let mut out = vec![ZERO; data.len() / kappa];
    let inner = out.len();
    for (x, p) in pi.iter().enumerate() {
        if *p == ZERO {
            continue;
        }
        for (o, d) in out.iter_mut().zip(&data[x * inner..(x + 1) * inner]) {
            *o += p * d;
        }
    }
    // Reorder leaf slots canonically: slot i of the result is leaf i.
    let t = Tensor::new(kappa, n, out)?;
    let mut order = vec![0; n];
    for (slot, &leaf) in leaves.iter().enumerate() {
        order[leaf] = slot;
    }
    t.permute_slots(&order)
}

type Partial = (Vec<usize>, Vec<C64>);

fn below(
    tree: &Tree,
    v: usize,
    parent: usize,
    kappa: usize,
    matrix_of: &[Option<(usize, usize)>],
    mats: &[Mat],
) -> Result<Partial> {
    if tree.is_leaf(v) && parent != usize::MAX {
        let mut data = vec![ZERO; kappa * kappa];
        for x in 0..kappa {
            data[x * kappa + x] = ONE;
        }
        return Ok((vec![v], data));
    }
    let mut leaves = Vec::new();
    let mut acc = vec![ONE; kappa];
    for &w in tree.neighbors(v) {
        if w == parent {
            continue;
        }
        let (child_leaves, child) = below(tree, w, v, kappa, matrix_of, mats)?;
        let e = match matrix_of[w] {
            Some((p, e)) if p == v => e,
            _ => return Err(Error::DimensionMismatch(format!("edge ({v},{w}) is not oriented away from the root"))),
        };
        // message[x_v, rest] = Σ_{x_w} A[x_v, x_w] child[x_w, rest]
        let inner = child.len() / kappa;
        let a = &mats[e];
        let mut msg = vec![ZERO; child.len()];
        for xv in 0..kappa {
            for xw in 0..kappa {
                let w_ = a[(xv, xw)];
                if w_ == ZERO {
                    continue;
                }
                let src = &child[xw * inner..(xw + 1) * inner];
                for (m, s) in msg[xv * inner..(xv + 1) * inner].iter_mut().zip(src) {
                    *m += w_ * s;
                }
            }
        }
        // acc[x_v, leaves, child_leaves] = acc[x_v, leaves] · msg[x_v, child_leaves]
        let acc_inner = acc.len() / kappa;
        let mut next = Vec::with_capacity(acc.len() * inner);
        for xv in 0..kappa {
            for a_ in &acc[xv * acc_inner..(xv + 1) * acc_inner] {
                for m in &msg[xv * inner..(xv + 1) * inner] {
                    next.push(a_ * m);
                }
            }
        }
        acc = next;
        leaves.extend(child_leaves);
    }
    Ok((leaves, acc))
}

/// `∂Ψ/∂(coordinate)` for every free coordinate, as columns over the
/// tensor entries. Exact, since `Ψ` is linear in `π` and in each matrix.
pub fn psi_jacobian(model: &Model, tree: &Tree, params: &Parameters) -> Result<Mat> {
    let kappa = model.kappa();
    let hom = model.equivariant_hom_basis();
    let orbits = model.orbit_basis();
    let pi = params.pi_vector(model);
    let mats: Vec<Mat> = (0..params.edges.len()).map(|e| params.matrix(model, e)).collect();
    let mut columns = Vec::with_capacity(params.num_coordinates());
    for o in &orbits {
        columns.push(evaluate_with(kappa, tree, params.root, o, &params.edges, &mats)?.into_data());
    }
    for e in 0..mats.len() {
        for h in &hom {
            let mut m = mats.clone();
            m[e] = h.clone();
            columns.push(evaluate_with(kappa, tree, params.root, &pi, &params.edges, &m)?.into_data());
        }
    }
    let len = columns.first().map_or(0, |c| c.len());
    Ok(Mat::from_columns(len, &columns))
}
