//! Thin flattenings, the edge-invariant minors `E^k_{ij}` and the lazily
//! evaluated determinant equations shared by every equation set.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for f64 math without std
use num_traits::Float;

use crate::linalg::{self, Mat};
use crate::perm_rep::Model;
use crate::split_basis::SplitBasis;
use crate::tensor::Tensor;
use crate::{Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Where an equation came from in the recursive assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Edge,
    ClawA,
    ClawB,
    /// Equation of a claw tree taken as the whole system.
    Claw,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Edge => "edge",
            Provenance::ClawA => "clawA",
            Provenance::ClawB => "clawB",
            Provenance::Claw => "claw",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The structured matrix a minor is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixRef {
    /// Block `M_k` of a thin flattening (0-based `k`).
    ThinFlat(usize),
    /// The 24×16 Strassen matrix in standard coordinates.
    Strassen,
    /// The Strassen layout in even Fourier coordinates.
    Ssm,
    /// The 3×3 matrix whose determinant is the Jukes–Cantor tripod cubic.
    JcTripod,
}

impl fmt::Display for MatrixRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixRef::ThinFlat(k) => write!(f, "thinflat:{}", k + 1),
            MatrixRef::Strassen => f.write_str("strassen"),
            MatrixRef::Ssm => f.write_str("ssm"),
            MatrixRef::JcTripod => f.write_str("jc_tripod"),
        }
    }
}

/// One entry of the selected submatrix: `Σ coeff·coord`. `row`/`col` are
/// positions inside the minor.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<(usize, C64)>,
}

/// `det` of a square submatrix whose entries are linear forms in the
/// coordinates. `rows`/`cols` name the selected rows and columns of the
/// parent structured matrix; cells not listed are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorEquation {
    pub name: String,
    pub provenance: Provenance,
    pub matrix: MatrixRef,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub cells: Vec<Cell>,
}

impl MinorEquation {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// The instantiated submatrix.
    pub fn submatrix(&self, coords: &[C64]) -> Mat {
        let n = self.size();
        let mut m = Mat::zeros(n, n);
        for cell in &self.cells {
            let v: C64 = cell.terms.iter().map(|&(c, w)| coords[c] * w).sum();
            m[(cell.row, cell.col)] = v;
        }
        m
    }

    pub fn evaluate(&self, coords: &[C64]) -> C64 {
        linalg::det(&self.submatrix(coords))
    }

    /// `∂det/∂coord` for every coordinate, via the cofactors of the
    /// submatrix pulled back through the cell forms.
    pub fn gradient(&self, coords: &[C64]) -> Vec<C64> {
        let mut g = vec![ZERO; coords.len()];
        self.add_gradient(coords, &mut g);
        g
    }

    fn add_gradient(&self, coords: &[C64], out: &mut [C64]) {
        let cof = linalg::cofactors(&self.submatrix(coords));
        for cell in &self.cells {
            let c = cof[(cell.row, cell.col)];
            for &(i, w) in &cell.terms {
                out[i] += c * w;
            }
        }
    }

    /// `max(1, ‖submatrix‖_F^order)`, the normalization for vanishing tests.
    pub fn scale(&self, coords: &[C64]) -> f64 {
        let f = self.submatrix(coords).frobenius_norm();
        f.powi(self.size() as i32).max(1.0)
    }

    /// `|value| / scale`.
    pub fn normalized_residual(&self, coords: &[C64]) -> f64 {
        self.evaluate(coords).norm() / self.scale(coords)
    }

    /// Coordinates appearing in the equation, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.cells.iter().flat_map(|c| c.terms.iter().map(|t| t.0)).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Rewrites every coordinate through `map`: coordinate `c` becomes the
    /// linear form `map(c)`. Tiny coefficients are dropped.
    pub fn substitute(&self, map: &dyn Fn(usize) -> Vec<(usize, C64)>, drop_below: f64) -> MinorEquation {
        let cells = self
            .cells
            .iter()
            .map(|cell| {
                let mut acc: Vec<(usize, C64)> = Vec::new();
                for &(c, w) in &cell.terms {
                    for (p, v) in map(c) {
                        match acc.iter_mut().find(|t| t.0 == p) {
                            Some(t) => t.1 += v * w,
                            None => acc.push((p, v * w)),
                        }
                    }
                }
                acc.retain(|t| t.1.norm() > drop_below);
                acc.sort_by_key(|t| t.0);
                Cell { row: cell.row, col: cell.col, terms: acc }
            })
            .filter(|c| !c.terms.is_empty())
            .collect();
        MinorEquation { cells, ..self.clone() }
    }

    /// Divides every cell by the largest coefficient magnitude.
    pub fn normalized(mut self) -> MinorEquation {
        let max = self.cells.iter().flat_map(|c| c.terms.iter().map(|t| t.1.norm())).fold(0.0, f64::max);
        if max > 0.0 {
            for cell in self.cells.iter_mut() {
                for t in cell.terms.iter_mut() {
                    t.1 /= max;
                }
            }
        }
        self
    }
}

/// Values of all equations.
pub fn evaluate_all(eqs: &[MinorEquation], coords: &[C64]) -> Vec<C64> {
    eqs.iter().map(|e| e.evaluate(coords)).collect()
}

/// Stacked gradients, one row per equation.
pub fn jacobian(eqs: &[MinorEquation], coords: &[C64]) -> Mat {
    let mut j = Mat::zeros(eqs.len(), coords.len());
    for (r, e) in eqs.iter().enumerate() {
        let mut row = vec![ZERO; coords.len()];
        e.add_gradient(coords, &mut row);
        for (c, v) in row.into_iter().enumerate() {
            j[(r, c)] = v;
        }
    }
    j
}

/// The per-irrep blocks `M_k` of a tensor relative to a split basis.
#[derive(Clone, Debug)]
pub struct ThinFlattening {
    pub blocks: Vec<Mat>,
    /// Distinguished sizes `m_k(1)`.
    pub distinguished: Vec<usize>,
}

impl ThinFlattening {
    /// The distinguished top-left block `M_k⁰`.
    pub fn distinguished_block(&self, k: usize) -> Mat {
        let m = self.distinguished[k].min(self.blocks[k].rows()).min(self.blocks[k].cols());
        let idx: Vec<usize> = (0..m).collect();
        self.blocks[k].select(&idx, &idx)
    }
}

pub fn thin_flatten(p: &Tensor, basis: &SplitBasis) -> Result<ThinFlattening> {
    let q = basis.to_q(p)?;
    Ok(ThinFlattening { blocks: basis.blocks_of(&q), distinguished: basis.blocks().iter().map(|b| b.m).collect() })
}

/// The minors `E^k_{ij}` for `i ≥ m_{k*}`, `j ≥ m_k` (0-based), each bordering
/// the distinguished block; ordered by `k`, then `i`, then `j`.
pub fn edge_invariant_set(basis: &SplitBasis) -> Vec<MinorEquation> {
    let mut out = Vec::new();
    for b in basis.blocks() {
        let m = b.m;
        for i in m..b.rows {
            for j in m..b.cols {
                let rows: Vec<usize> = (0..m).chain(core::iter::once(i)).collect();
                let cols: Vec<usize> = (0..m).chain(core::iter::once(j)).collect();
                let mut cells = Vec::with_capacity((m + 1) * (m + 1));
                for (r, &ri) in rows.iter().enumerate() {
                    for (c, &cj) in cols.iter().enumerate() {
                        cells.push(Cell { row: r, col: c, terms: vec![(b.index(ri, cj), C64::new(1.0, 0.0))] });
                    }
                }
                out.push(MinorEquation {
                    name: format!("E[k={},i={},j={}]", b.k + 1, i + 1, j + 1),
                    provenance: Provenance::Edge,
                    matrix: MatrixRef::ThinFlat(b.k),
                    rows,
                    cols,
                    cells,
                });
            }
        }
    }
    out
}

/// `Σ_k (m_{k*}(a) − m_{k*})(m_k(b) − m_k)`.
pub fn edge_invariant_count(model: &Model, a: usize, b: usize) -> Result<usize> {
    let ma = model.multiplicities(a)?;
    let mb = model.multiplicities(b)?;
    let m1 = model.multiplicities(1)?;
    let group = model.group();
    Ok((0..mb.len())
        .map(|k| {
            let ks = group.dual(k);
            ma[ks].saturating_sub(m1[ks]) * mb[k].saturating_sub(m1[k])
        })
        .sum())
}

/// Numeric rank and singular values of one flattening block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRank {
    pub k: usize,
    pub rank: usize,
    pub bound: usize,
    pub singular_values: Vec<f64>,
}

/// Per-block numeric ranks (`σᵢ > tol·σ₁`) and the verdict
/// `rank_k ≤ m_k` for every `k`.
pub fn flattening_ranks(p: &Tensor, basis: &SplitBasis, tol: f64) -> Result<(Vec<BlockRank>, bool)> {
    let flat = thin_flatten(p, basis)?;
    let svs: Vec<Vec<f64>> = flat.blocks.iter().map(linalg::singular_values).collect();
    // The flattening is block diagonal, so its σ₁ is the largest over blocks.
    let s1 = svs.iter().filter_map(|sv| sv.first().copied()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(svs.len());
    for (k, sv) in svs.into_iter().enumerate() {
        let rank = if s1 == 0.0 { 0 } else { sv.iter().filter(|&&s| s > tol * s1).count() };
        out.push(BlockRank { k, rank, bound: flat.distinguished[k], singular_values: sv });
    }
    let ok = out.iter().all(|b| b.rank <= b.bound);
    Ok((out, ok))
}
