//! Bases of `(⊗ⁿW)^G` adapted to a leaf bipartition `A|B`, indexed by
//! `(k, i, j)`, with the coordinate maps `p ↦ q` and back.
//!
//! For each irrep `k` the `B` side uses the padded vectors `u^k_i ⊗ 1^{b−1}`
//! followed by a completion of the slice `F_k(⊗^b W)`; the `A` side uses the
//! slot-reversed vectors, so the padding sits on the leaves farthest from the
//! split edge. Basis entries are `S(u^{k*}_{A,i} ⊗ u^k_{B,j})`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Mat, Qr};
use crate::perm_rep::{echelon_in_ordering_coords, Model};
use crate::tensor::Tensor;
use crate::tree::EdgeSplit;
use crate::{Error, Result, C64};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Basis of `F_k(⊗^size W)` for one side of a split.
#[derive(Clone, Debug)]
pub struct FSliceBasis {
    pub k: usize,
    pub side: Side,
    pub size: usize,
    /// Number of leading padded vectors.
    pub embedded: usize,
    pub vectors: Vec<Vec<C64>>,
}

/// `v ⊗ w` on raw data.
pub fn outer(v: &[C64], w: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(v.len() * w.len());
    for a in v {
        for b in w {
            out.push(a * b);
        }
    }
    out
}

fn reverse_slots(kappa: usize, s: usize, v: &[C64]) -> Vec<C64> {
    let order: Vec<usize> = (0..s).rev().collect();
    Tensor::new(kappa, s, v.to_vec())
        .and_then(|t| t.permute_slots(&order))
        .expect("slice vector has κ^s entries")
        .into_data()
}

/// The slice basis for irrep `k` on the given side. The first `m_k(1)` vectors
/// are `u^k_i ⊗ 1^{s−1}` (`1^{s−1} ⊗ u^k_i` on side `A`); the rest are the
/// slice vectors projected orthogonally off those, in reduced echelon form in
/// Fourier coordinates (standard coordinates when κ ≠ 4).
pub fn f_slice_basis(model: &Model, side: Side, size: usize, k: usize) -> Result<FSliceBasis> {
    if size == 0 {
        return Err(Error::DimensionMismatch("slice of ⊗⁰W".into()));
    }
    let kappa = model.kappa();
    let fw = model.fw_basis(k)?;
    let ones = vec![ONE; kappa];
    let mut embedded: Vec<Vec<C64>> = fw.to_vec();
    for _ in 1..size {
        embedded = embedded.iter().map(|v| outer(v, &ones)).collect();
    }
    let expected = model.multiplicities(size)?[k];
    let mut vectors = embedded.clone();
    if size > 1 && expected > embedded.len() {
        let slice = model.slice_basis(k, size)?;
        let ortho = linalg::orthonormalize(&embedded, 1e-10);
        let projected: Vec<Vec<C64>> = slice
            .iter()
            .map(|v| {
                let mut w = v.clone();
                for q in &ortho {
                    let d = linalg::dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= d * qi;
                    }
                }
                w
            })
            .collect();
        vectors.extend(echelon_in_ordering_coords(kappa, size, &projected));
    }
    if vectors.len() != expected {
        return Err(Error::Internal(format!(
            "slice F_{}(⊗^{size}W) has {} vectors, multiplicity is {expected}",
            k + 1,
            vectors.len()
        )));
    }
    if side == Side::A {
        vectors = vectors.iter().map(|v| reverse_slots(kappa, size, v)).collect();
    }
    Ok(FSliceBasis { k, side, size, embedded: fw.len(), vectors })
}

/// `(n_k/|G|) Σ_g (g·uA) ⊗ (g·uB)`; plain `uA ⊗ uB` for one-dimensional `k`.
pub fn s_operator(model: &Model, k: usize, ua: &[C64], ub: &[C64]) -> Vec<C64> {
    let group = model.group();
    let nk = group.irrep_dims()[k];
    if nk == 1 {
        return outer(ua, ub);
    }
    let kappa = model.kappa();
    let sa = ilog(kappa, ua.len());
    let sb = ilog(kappa, ub.len());
    let mut out = vec![ZERO; ua.len() * ub.len()];
    for g in 0..group.order() {
        let ga = model.act(g, ua, sa);
        let gb = model.act(g, ub, sb);
        for (x, a) in ga.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (y, b) in gb.iter().enumerate() {
                out[x * ub.len() + y] += a * b;
            }
        }
    }
    let w = nk as f64 / group.order() as f64;
    for v in out.iter_mut() {
        *v *= w;
    }
    out
}

fn ilog(kappa: usize, len: usize) -> usize {
    let mut s = 0;
    let mut l = 1;
    while l < len {
        l *= kappa;
        s += 1;
    }
    s
}

/// One `m_{k*}(a) × m_k(b)` block; `m` is the distinguished size `m_k(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub k: usize,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
    pub m: usize,
}

impl Block {
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offset + i * self.cols + j
    }
}

/// The basis `B_{A|B}` of `(⊗ⁿW)^G`. Vectors are stored in the slot order
/// `A` then `B`; incoming tensors are permuted accordingly.
#[derive(Clone, Debug)]
pub struct SplitBasis {
    kappa: usize,
    n: usize,
    split: EdgeSplit,
    slot_order: Vec<usize>,
    blocks: Vec<Block>,
    entries: Vec<(usize, usize, usize)>,
    vectors: Vec<Vec<C64>>,
    qr: Qr,
}

/// Builds the basis for `split` of an `n`-leaf tensor.
pub fn build_split_basis(model: &Model, n: usize, split: &EdgeSplit) -> Result<SplitBasis> {
    let a = split.a.len();
    let b = split.b.len();
    if a + b != n {
        return Err(Error::InvalidSplit(format!("split covers {} leaves, tensor has {n}", a + b)));
    }
    let t = model.num_irreps()?;
    let m1 = model.multiplicities(1)?;
    let mut blocks = Vec::with_capacity(t);
    let mut entries = Vec::new();
    let mut vectors = Vec::new();
    for k in 0..t {
        let ks = model.group().dual(k);
        let side_a = f_slice_basis(model, Side::A, a, ks)?;
        let side_b = f_slice_basis(model, Side::B, b, k)?;
        blocks.push(Block {
            k,
            offset: vectors.len(),
            rows: side_a.vectors.len(),
            cols: side_b.vectors.len(),
            m: m1[k],
        });
        for (i, ua) in side_a.vectors.iter().enumerate() {
            for (j, ub) in side_b.vectors.iter().enumerate() {
                entries.push((k, i, j));
                vectors.push(s_operator(model, k, ua, ub));
            }
        }
    }
    let expected = model.m1(n);
    if vectors.len() != expected {
        return Err(Error::Internal(format!("split basis has {} entries, expected {expected}", vectors.len())));
    }
    let len = model.kappa().pow(n as u32);
    let qr = Qr::new(&Mat::from_columns(len, &vectors));
    if !qr.diagonal_ratio().is_finite() || qr.diagonal_ratio() > 1e12 {
        return Err(Error::Internal("split basis is rank deficient".into()));
    }
    Ok(SplitBasis {
        kappa: model.kappa(),
        n,
        split: split.clone(),
        slot_order: split.slot_order(),
        blocks,
        entries,
        vectors,
        qr,
    })
}

impl SplitBasis {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn split(&self) -> &EdgeSplit {
        &self.split
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `(k, i, j)` labels, 0-based, in coordinate order.
    pub fn entries(&self) -> &[(usize, usize, usize)] {
        &self.entries
    }

    /// Coordinate index of `q^k_{ij}` (0-based indices).
    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        self.blocks[k].index(i, j)
    }

    /// Basis vector in slot order `A` then `B`.
    pub fn vector_ab(&self, c: usize) -> &[C64] {
        &self.vectors[c]
    }

    /// Slot order `A` then `B` in terms of the tensor's leaves.
    pub fn slot_order(&self) -> &[usize] {
        &self.slot_order
    }

    /// Basis vector as a tensor in the original leaf order.
    pub fn vector(&self, c: usize) -> Tensor {
        let t = Tensor::new(self.kappa, self.n, self.vectors[c].clone()).expect("basis vector length");
        t.permute_slots(&inverse(&self.slot_order)).expect("slot order is a permutation")
    }

    /// Least-squares coordinates and residual for data already in slot order
    /// `A` then `B`.
    pub fn solve_ab(&self, data: &[C64]) -> (Vec<C64>, f64) {
        self.qr.solve(data)
    }

    /// `q`-coordinates of an invariant tensor.
    pub fn to_q(&self, p: &Tensor) -> Result<Vec<C64>> {
        if p.kappa() != self.kappa || p.order() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "tensor of order {} for a basis of order {}",
                p.order(),
                self.n
            )));
        }
        let permuted = p.permute_slots(&self.slot_order)?;
        let (q, residual) = self.qr.solve(permuted.data());
        if residual > 1e-8 * p.norm() {
            return Err(Error::NotInvariant { residual });
        }
        Ok(q)
    }

    pub fn from_q(&self, q: &[C64]) -> Result<Tensor> {
        if q.len() != self.vectors.len() {
            return Err(Error::DimensionMismatch(format!("{} coordinates for {} basis vectors", q.len(), self.len())));
        }
        let mut data = vec![ZERO; self.kappa.pow(self.n as u32)];
        for (c, v) in q.iter().zip(&self.vectors) {
            if *c == ZERO {
                continue;
            }
            for (d, x) in data.iter_mut().zip(v) {
                *d += c * x;
            }
        }
        Tensor::new(self.kappa, self.n, data)?.permute_slots(&inverse(&self.slot_order))
    }

    /// The `m_{k*}(a) × m_k(b)` matrices `M_k[i][j] = q^k_{ij}`.
    pub fn blocks_of(&self, q: &[C64]) -> Vec<Mat> {
        self.blocks.iter().map(|b| Mat::from_fn(b.rows, b.cols, |i, j| q[b.index(i, j)])).collect()
    }

    /// Gram matrix condition indicator from the QR factor.
    pub fn condition_indicator(&self) -> f64 {
        self.qr.diagonal_ratio()
    }
}

pub(crate) fn inverse(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (i, &o) in order.iter().enumerate() {
        inv[o] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm_rep::{fourier_monomial, ModelName};

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-10)
    }

    fn fm(ys: &[usize]) -> Vec<C64> {
        fourier_monomial(ys)
    }

    fn sum(vs: &[Vec<C64>]) -> Vec<C64> {
        let mut out = vs[0].clone();
        for v in &vs[1..] {
            for (o, x) in out.iter_mut().zip(v) {
                *o += x;
            }
        }
        out
    }

    #[test]
    fn jc_b_side_pair_slice() {
        let m = Model::builtin(ModelName::Jc);
        let b = f_slice_basis(&m, Side::B, 2, 3).unwrap();
        assert_eq!(b.vectors.len(), 3);
        assert!(close(&b.vectors[0], &fm(&[1, 0])));
        assert!(close(&b.vectors[1], &fm(&[0, 1])));
        assert!(close(&b.vectors[2], &sum(&[fm(&[2, 3]), fm(&[3, 2])])));
        let a = f_slice_basis(&m, Side::A, 2, 3).unwrap();
        assert!(close(&a.vectors[0], &fm(&[0, 1])));
    }

    #[test]
    fn ss_a_side_pair_slice_matches_listed_vectors() {
        let m = Model::builtin(ModelName::Ss);
        let a = f_slice_basis(&m, Side::A, 2, 0).unwrap();
        assert_eq!(a.vectors.len(), 8);
        assert!(close(&a.vectors[0], &fm(&[0, 0])));
        assert!(close(&a.vectors[1], &fm(&[0, 3])));
        for ys in [[3, 0], [3, 3], [1, 1], [1, 2], [2, 1], [2, 2]] {
            assert!(a.vectors[2..].iter().any(|v| close(v, &fm(&ys))), "missing {ys:?}");
        }
    }

    #[test]
    fn s_operator_on_jc_examples() {
        let m = Model::builtin(ModelName::Jc);
        let lhs = s_operator(&m, 3, &fm(&[0, 1]), &fm(&[1, 0]));
        let want = sum(&[fm(&[0, 1, 1, 0]), fm(&[0, 2, 2, 0]), fm(&[0, 3, 3, 0])]);
        assert!(close(&lhs, &want));
    }

    #[test]
    fn jc_quartet_blocks_and_roundtrip() {
        let m = Model::builtin(ModelName::Jc);
        let split = EdgeSplit::new(vec![0, 1], vec![2, 3], 4).unwrap();
        let basis = build_split_basis(&m, 4, &split).unwrap();
        assert_eq!(basis.len(), 15);
        let shapes: Vec<(usize, usize)> = basis.blocks().iter().map(|b| (b.rows, b.cols)).collect();
        assert_eq!(shapes, vec![(2, 2), (0, 0), (1, 1), (3, 3), (1, 1)]);
        for c in 0..basis.len() {
            let v = basis.vector(c);
            assert!(v.is_invariant(&m, 1e-10));
            let q = basis.to_q(&v).unwrap();
            for (d, x) in q.iter().enumerate() {
                let want = if d == c { 1.0 } else { 0.0 };
                assert!((x - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }
}
