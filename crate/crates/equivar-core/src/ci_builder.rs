//! Recursive assembly of the local complete intersection of a tree: peel a
//! cherry `B`, take the claw equations of `T_B`, the system of the reduced
//! tree `T_A` and the edge invariants of `A|B`, and pull the subtree
//! equations back to the coordinates of the outer split.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::claw_equations::{claw_set, ClawCoords};
use crate::flattening::{self, edge_invariant_set, MinorEquation, Provenance};
use crate::linalg::{self, Mat};
use crate::perm_rep::{Model, ModelName};
use crate::split_basis::{build_split_basis, SplitBasis};
use crate::tensor::Tensor;
use crate::tree::{EdgeSplit, PeelStep, Tree};
use crate::{Error, Result, C64};

/// `m_1(n) − |E(T)|·(m_1(2) − m_1) − m_1`.
pub fn codimension(model: &Model, tree: &Tree) -> usize {
    codimension_for(model, tree.n_leaves(), tree.num_edges())
}

/// The codimension formula for a tree with `leaves` leaves and `edges` edges.
pub fn codimension_for(model: &Model, leaves: usize, edges: usize) -> usize {
    let m1 = model.m1(1);
    model.m1(leaves).saturating_sub(edges * (model.m1(2) - m1)).saturating_sub(m1)
}

/// `|E(T)|·(m_1(2) − m_1) + m_1`, the dimension of the cone `CV_G(T)`.
pub fn cone_dimension(model: &Model, tree: &Tree) -> usize {
    let m1 = model.m1(1);
    tree.num_edges() * (model.m1(2) - m1) + m1
}

/// Coordinates the equations of a system are written in.
#[derive(Clone, Debug)]
pub enum Coordinates {
    /// `q`-coordinates of the outermost split.
    Split(SplitBasis),
    /// The tripod's own coordinates, for claw trees.
    Claw(ClawCoords),
}

/// Equation counts at one level of the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelCounts {
    pub leaves: usize,
    pub claw_a: usize,
    pub claw_b: usize,
    pub edge: usize,
}

#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub model: ModelName,
    pub n: usize,
    pub equations: Vec<MinorEquation>,
    pub coordinates: Coordinates,
    /// Outermost level first.
    pub levels: Vec<LevelCounts>,
    pub codimension: usize,
}

impl EquationSystem {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn num_coords(&self) -> usize {
        match &self.coordinates {
            Coordinates::Split(b) => b.len(),
            Coordinates::Claw(c) => c.len(),
        }
    }

    pub fn split_basis(&self) -> Option<&SplitBasis> {
        match &self.coordinates {
            Coordinates::Split(b) => Some(b),
            Coordinates::Claw(ClawCoords::Split(b)) => Some(b),
            Coordinates::Claw(_) => None,
        }
    }

    /// Coordinates of an invariant tensor in the system's coordinate space.
    pub fn coords_of(&self, p: &Tensor) -> Result<Vec<C64>> {
        match &self.coordinates {
            Coordinates::Split(b) => b.to_q(p),
            Coordinates::Claw(c) => c.of(p),
        }
    }

    /// Tensor with coordinate vector `e_c`.
    pub fn coordinate_tensor(&self, c: usize) -> Tensor {
        match &self.coordinates {
            Coordinates::Split(b) => b.vector(c),
            Coordinates::Claw(cc) => {
                let data = cc.basis_tensor(c);
                let kappa = match cc {
                    ClawCoords::Standard { kappa, .. } => *kappa,
                    ClawCoords::Fourier { .. } => 4,
                    ClawCoords::Split(b) => b.kappa(),
                };
                Tensor::new(kappa, self.n, data).expect("coordinate tensor length")
            }
        }
    }

    /// Human-readable names of the coordinates.
    pub fn coordinate_names(&self) -> Vec<String> {
        const L: [&str; 4] = ["A", "C", "G", "T"];
        const F: [&str; 4] = ["Ā", "C̄", "Ḡ", "T̄"];
        let q = |b: &SplitBasis| -> Vec<String> {
            b.entries().iter().map(|&(k, i, j)| format!("q[{},{},{}]", k + 1, i + 1, j + 1)).collect()
        };
        match &self.coordinates {
            Coordinates::Split(b) | Coordinates::Claw(ClawCoords::Split(b)) => q(b),
            Coordinates::Claw(ClawCoords::Standard { kappa, n }) => (0..kappa.pow(*n as u32))
                .map(|x| {
                    let digits: String = (0..*n)
                        .map(|s| {
                            let d = (x / kappa.pow((*n - 1 - s) as u32)) % kappa;
                            if *kappa == 4 {
                                String::from(L[d])
                            } else {
                                format!("{d}.")
                            }
                        })
                        .collect();
                    format!("a[{digits}]")
                })
                .collect(),
            Coordinates::Claw(ClawCoords::Fourier { n, indices }) => indices
                .iter()
                .map(|&x| {
                    let digits: String = (0..*n).map(|s| F[(x / 4usize.pow((*n - 1 - s) as u32)) % 4]).collect();
                    format!("q[{digits}]")
                })
                .collect(),
        }
    }

    pub fn evaluate(&self, coords: &[C64]) -> Vec<C64> {
        flattening::evaluate_all(&self.equations, coords)
    }

    /// `|value|/scale` per equation.
    pub fn residuals(&self, coords: &[C64]) -> Vec<f64> {
        self.equations.iter().map(|e| e.normalized_residual(coords)).collect()
    }

    pub fn jacobian(&self, coords: &[C64]) -> Mat {
        flattening::jacobian(&self.equations, coords)
    }

    /// Numeric rank of the Jacobian (`σᵢ > tol·σ₁`).
    pub fn jacobian_rank(&self, coords: &[C64], tol: f64) -> usize {
        linalg::numeric_rank(&linalg::singular_values(&self.jacobian(coords)), tol)
    }

    /// Number of equations with the given provenance.
    pub fn count(&self, provenance: Provenance) -> usize {
        self.equations.iter().filter(|e| e.provenance == provenance).count()
    }
}

enum SubCoords {
    Split(SplitBasis),
    Claw { coords: ClawCoords, reversed: bool, n: usize, kappa: usize },
}

impl SubCoords {
    /// Coordinates of raw data in the level's slot order.
    fn solve(&self, data: &[C64]) -> Result<(Vec<C64>, f64)> {
        match self {
            SubCoords::Split(b) => {
                let t = Tensor::new(b.kappa(), b.order(), data.to_vec())?.permute_slots(b.slot_order())?;
                Ok(b.solve_ab(t.data()))
            }
            SubCoords::Claw { coords, reversed, n, kappa } => {
                if *reversed {
                    let order: Vec<usize> = (0..*n).rev().collect();
                    let t = Tensor::new(*kappa, *n, data.to_vec())?.permute_slots(&order)?;
                    Ok(coords.solve(t.data()))
                } else {
                    Ok(coords.solve(data))
                }
            }
        }
    }
}

struct Level {
    coords: SubCoords,
    equations: Vec<MinorEquation>,
    levels: Vec<LevelCounts>,
}

/// Builds the equation system of `tree`. Every interior degree needs a
/// registered claw set.
pub fn build_ci(model: &Model, tree: &Tree) -> Result<EquationSystem> {
    let mut degrees = tree.interior_degrees();
    degrees.dedup();
    let missing: Vec<usize> = degrees.iter().copied().filter(|&d| claw_set(model, d).is_err()).collect();
    match missing.len() {
        0 => {}
        1 => return Err(Error::ClawUnavailable { model: model.name().as_str().into(), degree: missing[0] }),
        _ => {
            let list: Vec<String> = missing.iter().map(|d| format!("({}, {d})", model.name())).collect();
            return Err(Error::Unsupported(format!("claw equations unavailable for {}", list.join(", "))));
        }
    }
    let n = tree.n_leaves();
    let schedule = tree.peel_schedule();
    let kappa = model.kappa();
    let (coordinates, equations, levels) = if schedule.steps.is_empty() {
        let set = claw_set(model, n)?;
        let equations = set.equations;
        (Coordinates::Claw(set.coords), equations, Vec::new())
    } else {
        let level = build_level(model, kappa, &schedule.steps, 0, n)?;
        let basis = match level.coords {
            SubCoords::Split(b) => b,
            SubCoords::Claw { .. } => return Err(Error::Internal("outer level is not a split".into())),
        };
        (Coordinates::Split(basis), level.equations, level.levels)
    };
    let codim = codimension(model, tree);
    if equations.len() != codim {
        return Err(Error::Internal(format!("{} equations for codimension {codim}", equations.len())));
    }
    Ok(EquationSystem { model: model.name(), n, equations, coordinates, levels, codimension: codim })
}

fn build_level(model: &Model, kappa: usize, steps: &[PeelStep], idx: usize, n: usize) -> Result<Level> {
    if idx == steps.len() {
        let set = claw_set(model, n)?;
        return Ok(Level {
            coords: SubCoords::Claw { coords: set.coords, reversed: true, n, kappa },
            equations: set.equations,
            levels: Vec::new(),
        });
    }
    let step = &steps[idx];
    let (a, b) = (step.a.len(), step.b.len());
    let split = EdgeSplit::new(step.a.clone(), step.b.clone(), n)?;
    let basis = build_split_basis(model, n, &split)?;

    let sub_a = build_level(model, kappa, steps, idx + 1, a + 1)?;
    let claw_b = claw_set(model, b + 1)?;
    let coords_b = SubCoords::Claw { coords: claw_b.coords, reversed: false, n: b + 1, kappa };

    // Child coordinates of every marginalized parent basis vector.
    let drop_a: Vec<usize> = (a + 1..n).collect();
    let drop_b: Vec<usize> = (0..a - 1).collect();
    let mut cols_a = Vec::with_capacity(basis.len());
    let mut cols_b = Vec::with_capacity(basis.len());
    for c in 0..basis.len() {
        let v = Tensor::new(kappa, n, basis.vector_ab(c).to_vec())?;
        let scale = v.norm();
        for (drop, sub, cols) in [(&drop_a, &sub_a.coords, &mut cols_a), (&drop_b, &coords_b, &mut cols_b)] {
            let t = v.marginalize_slots(drop)?;
            let (q, residual) = sub.solve(t.data())?;
            if residual > 1e-8 * scale.max(1.0) {
                return Err(Error::Internal(format!(
                    "marginal of basis vector {c} left the subtree space ({residual:e})"
                )));
            }
            cols.push(q);
        }
    }
    let eq_a = pull_back(&sub_a.equations, &cols_a, Provenance::ClawA, "A:");
    let eq_b = pull_back(&claw_b.equations, &cols_b, Provenance::ClawB, "B:");
    let edge = edge_invariant_set(&basis);

    let mut levels = vec![LevelCounts { leaves: n, claw_a: eq_a.len(), claw_b: eq_b.len(), edge: edge.len() }];
    levels.extend(sub_a.levels);
    let mut equations = eq_a;
    equations.extend(eq_b);
    equations.extend(edge);
    Ok(Level { coords: SubCoords::Split(basis), equations, levels })
}

/// Rewrites subtree equations through `child = L·parent`, where column `c`
/// of `L` is `cols[c]`.
fn pull_back(eqs: &[MinorEquation], cols: &[Vec<C64>], provenance: Provenance, prefix: &str) -> Vec<MinorEquation> {
    let n_child = cols.first().map_or(0, |c| c.len());
    let max = cols.iter().map(|c| linalg::max_abs(c)).fold(0.0, f64::max);
    let cut = 1e-10 * max;
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n_child];
    for (p, col) in cols.iter().enumerate() {
        for (x, v) in col.iter().enumerate() {
            if v.norm() > cut {
                rows[x].push((p, *v));
            }
        }
    }
    eqs.iter()
        .map(|e| {
            let coeff_max = e.cells.iter().flat_map(|c| c.terms.iter().map(|t| t.1.norm())).fold(0.0, f64::max);
            let mut out = e.substitute(&|c| rows[c].clone(), cut * coeff_max).normalized();
            out.provenance = provenance;
            out.name = format!("{prefix}{}", e.name);
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_newick;
    use alloc::string::ToString;

    #[test]
    fn codimensions() {
        let jc = Model::builtin(ModelName::Jc);
        let quartet = parse_newick("((1,2),(3,4));").unwrap();
        assert_eq!(codimension(&jc, &quartet), 9);
        assert_eq!(cone_dimension(&jc, &quartet), 6);
        let ss = Model::builtin(ModelName::Ss);
        assert_eq!(codimension(&ss, &parse_newick("(1,2,3);").unwrap()), 12);
    }

    #[test]
    fn jc_quartet_system_shape() {
        let jc = Model::builtin(ModelName::Jc);
        let sys = build_ci(&jc, &parse_newick("((1,2),(3,4));").unwrap()).unwrap();
        assert_eq!(sys.len(), 9);
        assert_eq!(
            (sys.count(Provenance::ClawA), sys.count(Provenance::ClawB), sys.count(Provenance::Edge)),
            (1, 1, 7)
        );
    }

    #[test]
    fn missing_claw_degree_is_reported() {
        let jc = Model::builtin(ModelName::Jc);
        let err = build_ci(&jc, &parse_newick("((1,2,3),(4,5,6));").unwrap()).unwrap_err();
        assert_eq!(err.to_string(), "claw equations unavailable for (JC, 4)");
    }
}
