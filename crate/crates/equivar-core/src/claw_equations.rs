//! Complete-intersection equation sets for tripods: Strassen minors for the
//! general Markov model, their even-Fourier restriction for the strand
//! symmetric model and the single Jukes–Cantor cubic.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for f64 math without std
use num_traits::Float;

use crate::flattening::{Cell, MatrixRef, MinorEquation, Provenance};
use crate::perm_rep::{Model, ModelName};
use crate::split_basis::{build_split_basis, SplitBasis};
use crate::tensor::{fourier_transform, Tensor};
use crate::tree::EdgeSplit;
use crate::{Error, Result, C64};

const ONE: C64 = C64::new(1.0, 0.0);

/// Layout of the Strassen matrix `f(τ)`: rows `X_s⊗(X_r∧X_t)` with `r<t`
/// (`s`-major, pairs in lexicographic order), columns `X_i*⊗X_j`
/// (`i`-major). The entry is `−a_{ist}` if `r = j`, `+a_{isr}` if `t = j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrassenLayout {
    pub kappa: usize,
    /// `(s, r, t)` per row.
    pub rows: Vec<(usize, usize, usize)>,
    /// `(i, j)` per column.
    pub cols: Vec<(usize, usize)>,
}

pub fn strassen_matrix_layout(kappa: usize) -> StrassenLayout {
    let mut pairs = Vec::new();
    for r in 0..kappa {
        for t in r + 1..kappa {
            pairs.push((r, t));
        }
    }
    let rows = (0..kappa).flat_map(|s| pairs.iter().map(move |&(r, t)| (s, r, t))).collect();
    let cols = (0..kappa).flat_map(|i| (0..kappa).map(move |j| (i, j))).collect();
    StrassenLayout { kappa, rows, cols }
}

impl StrassenLayout {
    /// `(i, s, t)` index triple and sign of a cell, if nonzero.
    pub fn entry(&self, row: usize, col: usize) -> Option<([usize; 3], f64)> {
        let (s, r, t) = self.rows[row];
        let (i, j) = self.cols[col];
        if r == j {
            Some(([i, s, t], -1.0))
        } else if t == j {
            Some(([i, s, r], 1.0))
        } else {
            None
        }
    }

    pub fn coord_index(&self, triple: [usize; 3]) -> usize {
        (triple[0] * self.kappa + triple[1]) * self.kappa + triple[2]
    }

    pub fn is_distinguished_row(&self, row: usize) -> bool {
        let (s, r, t) = self.rows[row];
        s == r || s == t
    }

    pub fn is_distinguished_col(&self, col: usize) -> bool {
        let (i, j) = self.cols[col];
        i != j
    }

    pub fn row_index(&self, s: usize, r: usize, t: usize) -> usize {
        let (r, t) = (r.min(t), r.max(t));
        self.rows.iter().position(|&x| x == (s, r, t)).expect("valid row")
    }

    pub fn col_index(&self, i: usize, j: usize) -> usize {
        i * self.kappa + j
    }

    /// The full matrix at a tensor with coordinates `a`.
    pub fn instantiate(&self, a: &[C64]) -> crate::linalg::Mat {
        crate::linalg::Mat::from_fn(self.rows.len(), self.cols.len(), |r, c| match self.entry(r, c) {
            Some((tr, sign)) => a[self.coord_index(tr)] * sign,
            None => C64::new(0.0, 0.0),
        })
    }

    /// The minor `eq_{r,s,t}`: all distinguished rows and columns, the row
    /// `X_s⊗(X_r∧X_t)` and the column `X_r*⊗X_r`. `coord` maps an index
    /// triple to a coordinate, or `None` where the coordinate is identically
    /// zero.
    pub fn minor(
        &self,
        (r, s, t): (usize, usize, usize),
        matrix: MatrixRef,
        name: String,
        coord: &dyn Fn([usize; 3]) -> Option<usize>,
    ) -> MinorEquation {
        let extra_row = self.row_index(s, r, t);
        let extra_col = self.col_index(r, r);
        let rows: Vec<usize> =
            (0..self.rows.len()).filter(|&x| self.is_distinguished_row(x) || x == extra_row).collect();
        let cols: Vec<usize> =
            (0..self.cols.len()).filter(|&x| self.is_distinguished_col(x) || x == extra_col).collect();
        let mut cells = Vec::new();
        for (lr, &row) in rows.iter().enumerate() {
            for (lc, &col) in cols.iter().enumerate() {
                if let Some((triple, sign)) = self.entry(row, col) {
                    if let Some(c) = coord(triple) {
                        cells.push(Cell { row: lr, col: lc, terms: vec![(c, C64::new(sign, 0.0))] });
                    }
                }
            }
        }
        MinorEquation { name, provenance: Provenance::Claw, matrix, rows, cols, cells }
    }
}

/// The coordinates a claw equation set is written in. Tensors are taken in
/// the claw's slot order with the centre-adjacent leaf `x₀` first.
#[derive(Clone, Debug)]
pub enum ClawCoords {
    /// All standard coordinates.
    Standard { kappa: usize, n: usize },
    /// The listed Fourier coordinates (κ = 4).
    Fourier { n: usize, indices: Vec<usize> },
    /// `q`-coordinates of the split `x₀ | x₁…x_{d−1}`.
    Split(SplitBasis),
}

impl ClawCoords {
    pub fn len(&self) -> usize {
        match self {
            ClawCoords::Standard { kappa, n } => kappa.pow(*n as u32),
            ClawCoords::Fourier { indices, .. } => indices.len(),
            ClawCoords::Split(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of raw tensor data, without an invariance check; the
    /// second value is the part of the data the coordinates do not capture.
    pub fn solve(&self, data: &[C64]) -> (Vec<C64>, f64) {
        match self {
            ClawCoords::Standard { .. } => (data.to_vec(), 0.0),
            ClawCoords::Fourier { n, indices } => {
                let f = fourier_transform(data, *n);
                let mut dropped = 0.0;
                let mut keep = vec![false; f.len()];
                for &i in indices {
                    keep[i] = true;
                }
                for (i, v) in f.iter().enumerate() {
                    if !keep[i] {
                        dropped += v.norm_sqr();
                    }
                }
                // Fourier vectors have norm 2 per slot.
                let residual = dropped.sqrt() * 2f64.powi(*n as i32);
                (indices.iter().map(|&i| f[i]).collect(), residual)
            }
            ClawCoords::Split(b) => b.solve_ab(data),
        }
    }

    /// Coordinates of an invariant tensor.
    pub fn of(&self, p: &Tensor) -> Result<Vec<C64>> {
        let (q, residual) = self.solve(p.data());
        if residual > 1e-8 * p.norm() {
            return Err(Error::NotInvariant { residual });
        }
        Ok(q)
    }

    /// Tensor (in claw slot order) of the coordinate functional's dual basis
    /// vector `c`, i.e. the tensor with coordinate vector `e_c`.
    pub fn basis_tensor(&self, c: usize) -> Vec<C64> {
        match self {
            ClawCoords::Standard { kappa, n } => {
                let mut v = vec![C64::new(0.0, 0.0); kappa.pow(*n as u32)];
                v[c] = ONE;
                v
            }
            ClawCoords::Fourier { n, indices } => {
                let mut q = vec![C64::new(0.0, 0.0); 4usize.pow(*n as u32)];
                q[indices[c]] = ONE;
                crate::tensor::inverse_fourier_transform(&q, *n)
            }
            ClawCoords::Split(b) => b.vector_ab(c).to_vec(),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ClawCoords::Standard { .. } => "standard",
            ClawCoords::Fourier { .. } => "fourier",
            ClawCoords::Split(_) => "split",
        }
    }
}

/// A tripod equation set with its coordinates.
#[derive(Clone, Debug)]
pub struct ClawEquationSet {
    pub model: ModelName,
    pub degree: usize,
    pub equations: Vec<MinorEquation>,
    pub coords: ClawCoords,
    pub codimension: usize,
}

/// `m_1(d) − d·(m_1(2) − m_1) − m_1`.
pub fn claw_codimension(model: &Model, d: usize) -> usize {
    let m1 = model.m1(1);
    model.m1(d).saturating_sub(d * (model.m1(2) - m1)).saturating_sub(m1)
}

const LETTERS: [&str; 4] = ["A", "C", "G", "T"];
const FOURIER_LETTERS: [&str; 4] = ["Ā", "C̄", "Ḡ", "T̄"];

fn ordered_triples(kappa: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..kappa).flat_map(move |r| {
        (0..kappa)
            .filter(move |&s| s != r)
            .flat_map(move |s| (0..kappa).filter(move |&t| t != r && t != s).map(move |t| (r, s, t)))
    })
}

/// The 24 Strassen minors `eq_{r,s,t}` in standard coordinates `a_{ijk}`.
pub fn gmm_tripod_equations() -> ClawEquationSet {
    let layout = strassen_matrix_layout(4);
    let equations = ordered_triples(4)
        .map(|(r, s, t)| {
            let name = format!("eq[{},{},{}]", LETTERS[r], LETTERS[s], LETTERS[t]);
            layout.minor((r, s, t), MatrixRef::Strassen, name, &|tr| Some(layout.coord_index(tr)))
        })
        .collect();
    ClawEquationSet {
        model: ModelName::Gmm,
        degree: 3,
        equations,
        coords: ClawCoords::Standard { kappa: 4, n: 3 },
        codimension: 24,
    }
}

fn even(triple: [usize; 3]) -> bool {
    triple.iter().filter(|&&y| y == 1 || y == 2).count() % 2 == 0
}

/// The even Fourier coordinates of `⊗³W`: those `Ȳ₁Ȳ₂Ȳ₃` with an even
/// number of `C̄`, `Ḡ` factors, in lexicographic order.
pub fn ss_even_fourier_indices() -> Vec<usize> {
    (0..64).filter(|&x| even([x / 16, (x / 4) % 4, x % 4])).collect()
}

/// Twelve minors of the Strassen layout in Fourier coordinates: for each
/// non-distinguished row whose index set has an even number of `C̄`, `Ḡ`,
/// one minor per nonzero non-distinguished column.
///
/// With the odd-parity cells zeroed every one of these 13×13 submatrices is
/// singular, so the minors vanish identically on `(⊗³W)^G` and carry no
/// information (at no evolution the distinguished 12×12 block already has
/// rank 9). The registry therefore uses [`ss_tripod_equations`].
pub fn ss_tripod_fourier_equations() -> ClawEquationSet {
    let layout = strassen_matrix_layout(4);
    let indices = ss_even_fourier_indices();
    let position = |tr: [usize; 3]| -> Option<usize> {
        if !even(tr) {
            return None;
        }
        indices.binary_search(&layout.coord_index(tr)).ok()
    };
    let equations = ordered_triples(4)
        .filter(|&(r, s, t)| even([r, s, t]))
        .map(|(r, s, t)| {
            let name = format!("eq[{},{},{}]", FOURIER_LETTERS[r], FOURIER_LETTERS[s], FOURIER_LETTERS[t]);
            layout.minor((r, s, t), MatrixRef::Ssm, name, &position)
        })
        .collect();
    ClawEquationSet {
        model: ModelName::Ss,
        degree: 3,
        equations,
        coords: ClawCoords::Fourier { n: 3, indices },
        codimension: 12,
    }
}

/// Strassen minors in standard coordinates, one per orbit of ordered triples
/// under `(A T)(C G)`: the lexicographically smallest representative. On
/// strand-symmetric tensors `a_{rst} = a_{g(r)g(s)g(t)}`, so the two minors of
/// an orbit share their differential at points of no evolution.
pub fn ss_tripod_equations() -> ClawEquationSet {
    let layout = strassen_matrix_layout(4);
    let g = |x: usize| 3 - x;
    let equations = ordered_triples(4)
        .filter(|&(r, s, t)| (r, s, t) < (g(r), g(s), g(t)))
        .map(|(r, s, t)| {
            let name = format!("eq[{},{},{}]", LETTERS[r], LETTERS[s], LETTERS[t]);
            layout.minor((r, s, t), MatrixRef::Strassen, name, &|tr| Some(layout.coord_index(tr)))
        })
        .collect();
    ClawEquationSet {
        model: ModelName::Ss,
        degree: 3,
        equations,
        coords: ClawCoords::Standard { kappa: 4, n: 3 },
        codimension: 12,
    }
}

/// The cubic `Q⁴₁₁Q⁴₁₂Q¹₁₂ − Q¹₁₁(Q⁴₁₃)²` in the split basis `x|yz`, written
/// as the determinant of `[[Q⁴₁₁, Q⁴₁₃, 0], [0, Q⁴₁₂, −Q⁴₁₃], [Q¹₁₁, 0, Q¹₁₂]]`.
pub fn jc_tripod_equation(model: &Model) -> Result<ClawEquationSet> {
    if model.name() != ModelName::Jc {
        return Err(Error::Unsupported("the tripod cubic belongs to the Jukes–Cantor model".into()));
    }
    let split = EdgeSplit::new(vec![0], vec![1, 2], 3)?;
    let basis = build_split_basis(model, 3, &split)?;
    let expected = [(0, 0, 0), (0, 0, 1), (3, 0, 0), (3, 0, 1), (3, 0, 2)];
    if basis.entries() != expected {
        return Err(Error::Internal(format!("unexpected tripod basis layout {:?}", basis.entries())));
    }
    let (w, z, x, y, u) = (0, 1, 2, 3, 4);
    let cell = |row, col, c, s: f64| Cell { row, col, terms: vec![(c, C64::new(s, 0.0))] };
    let eq = MinorEquation {
        name: "jc_cubic".into(),
        provenance: Provenance::Claw,
        matrix: MatrixRef::JcTripod,
        rows: vec![0, 1, 2],
        cols: vec![0, 1, 2],
        cells: vec![
            cell(0, 0, x, 1.0),
            cell(0, 1, u, 1.0),
            cell(1, 1, y, 1.0),
            cell(1, 2, u, -1.0),
            cell(2, 0, w, 1.0),
            cell(2, 2, z, 1.0),
        ],
    };
    Ok(ClawEquationSet {
        model: ModelName::Jc,
        degree: 3,
        equations: vec![eq],
        coords: ClawCoords::Split(basis),
        codimension: 1,
    })
}

/// The registered set for `(model, d)`.
pub fn claw_set(model: &Model, d: usize) -> Result<ClawEquationSet> {
    let set = match (model.name(), d) {
        (ModelName::Gmm, 3) => gmm_tripod_equations(),
        (ModelName::Ss, 3) => ss_tripod_equations(),
        (ModelName::Jc, 3) => jc_tripod_equation(model)?,
        (name, d) => return Err(Error::ClawUnavailable { model: String::from(name.as_str()), degree: d }),
    };
    let codim = claw_codimension(model, d);
    if set.equations.len() != codim {
        return Err(Error::Internal(format!("{} equations for codimension {codim}", set.equations.len())));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn strassen_layout_cells() {
        let l = strassen_matrix_layout(4);
        assert_eq!(l.rows.len(), 24);
        assert_eq!(l.cols.len(), 16);
        // Row A⊗(A∧C), column A*⊗C holds +a_AAA and is distinguished.
        let row = l.row_index(0, 0, 1);
        let col = l.col_index(0, 1);
        assert_eq!(l.entry(row, col), Some(([0, 0, 0], 1.0)));
        assert!(l.is_distinguished_row(row) && l.is_distinguished_col(col));
        assert_eq!(l.entry(l.row_index(0, 1, 2), l.col_index(0, 0)), None);
        assert_eq!((0..24).filter(|&r| l.is_distinguished_row(r)).count(), 12);
        assert_eq!((0..16).filter(|&c| l.is_distinguished_col(c)).count(), 12);
        for r in (0..24).filter(|&r| !l.is_distinguished_row(r)) {
            let n = (0..16).filter(|&c| !l.is_distinguished_col(c) && l.entry(r, c).is_some()).count();
            assert_eq!(n, 2);
        }
    }

    #[test]
    fn registry() {
        assert_eq!(claw_set(&Model::builtin(ModelName::Gmm), 3).unwrap().equations.len(), 24);
        assert_eq!(claw_set(&Model::builtin(ModelName::Ss), 3).unwrap().equations.len(), 12);
        assert_eq!(claw_set(&Model::builtin(ModelName::Jc), 3).unwrap().equations.len(), 1);
        let e = claw_set(&Model::builtin(ModelName::K3), 3).unwrap_err();
        assert_eq!(e.to_string(), "claw equations unavailable for (K3, 3)");
        assert!(claw_set(&Model::builtin(ModelName::Jc), 4).is_err());
    }

    #[test]
    fn minors_are_distinct() {
        let set = gmm_tripod_equations();
        for (i, a) in set.equations.iter().enumerate() {
            for b in &set.equations[i + 1..] {
                assert!(a.rows != b.rows || a.cols != b.cols);
            }
        }
    }
}
