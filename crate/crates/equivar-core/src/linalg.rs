//! Small dense complex linear algebra: determinants, cofactors, row reduction,
//! Householder QR least squares and singular values by one-sided Jacobi.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)] // needed for f64 math without std
use num_traits::Float;

use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Mat { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors (all of length `len`).
    pub fn from_columns(len: usize, columns: &[Vec<C64>]) -> Self {
        let mut m = Mat::zeros(len, columns.len());
        for (c, v) in columns.iter().enumerate() {
            assert_eq!(v.len(), len, "column length");
            for (r, x) in v.iter().enumerate() {
                m[(r, c)] = *x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "vector length");
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &Mat) -> C64 {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return ONE;
    }
    let mut a = m.data.clone();
    let mut det = ONE;
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm();
        for r in k + 1..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for r in k + 1..n {
            let f = a[r * n + k] / piv;
            if f == ZERO {
                continue;
            }
            for c in k + 1..n {
                let t = a[k * n + c];
                a[r * n + c] -= f * t;
            }
        }
    }
    det
}

/// Cofactor matrix: `C[r][c] = ∂det/∂M[r][c]`. Computed from explicit minors so
/// it stays exact-ish at singular points, where `det·M⁻ᵀ` is unusable.
pub fn cofactors(m: &Mat) -> Mat {
    assert_eq!(m.rows, m.cols, "cofactors of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    if n == 1 {
        return Mat::from_rows(1, 1, vec![ONE]);
    }
    let mut out = Mat::zeros(n, n);
    let idx: Vec<usize> = (0..n).collect();
    for r in 0..n {
        let rows: Vec<usize> = idx.iter().copied().filter(|&x| x != r).collect();
        for c in 0..n {
            let cols: Vec<usize> = idx.iter().copied().filter(|&x| x != c).collect();
            let d = det(&m.select(&rows, &cols));
            out[(r, c)] = if (r + c) % 2 == 0 { d } else { -d };
        }
    }
    out
}

/// Reduced row echelon form in place; returns pivot columns. Entries below
/// `tol` (absolute) are treated as zero.
pub fn rref(m: &mut Mat, tol: f64) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut p = r;
        let mut best = m[(r, c)].norm();
        for i in r + 1..rows {
            let v = m[(i, c)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= tol {
            for i in r..rows {
                m[(i, c)] = ZERO;
            }
            continue;
        }
        if p != r {
            for j in 0..cols {
                m.data.swap(r * cols + j, p * cols + j);
            }
        }
        let inv = ONE / m[(r, c)];
        for j in c..cols {
            m[(r, j)] *= inv;
        }
        m[(r, c)] = ONE;
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = m[(i, c)];
            if f == ZERO {
                continue;
            }
            for j in c..cols {
                let t = m[(r, j)];
                m[(i, j)] -= f * t;
            }
            m[(i, c)] = ZERO;
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the null space, one vector per free column in ascending order.
pub fn nullspace(m: &Mat, tol: f64) -> Vec<Vec<C64>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, tol);
    let cols = m.cols;
    let mut is_pivot = vec![None; cols];
    for (r, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(r);
    }
    let mut out = Vec::new();
    for free in 0..cols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = vec![ZERO; cols];
        v[free] = ONE;
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = -a[(r, free)];
        }
        out.push(v);
    }
    out
}

/// Row-space basis in reduced echelon form: the canonical basis of the span of
/// `vectors`, ordered by pivot coordinate, each with pivot entry 1.
pub fn echelon_basis(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let len = vectors[0].len();
    let mut data = Vec::with_capacity(vectors.len() * len);
    for v in vectors {
        data.extend_from_slice(v);
    }
    let mut m = Mat::from_rows(vectors.len(), len, data);
    let pivots = rref(&mut m, tol);
    (0..pivots.len()).map(|r| m.row(r).to_vec()).collect()
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Vectors whose
/// residual falls below `tol` relative to their own norm are dropped.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let d = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= d * qi;
                }
            }
        }
        let nw = norm(&w);
        if nw <= tol * n0 {
            continue;
        }
        for wi in w.iter_mut() {
            *wi /= nw;
        }
        out.push(w);
    }
    out
}

/// Householder QR of a tall matrix, kept in factored form for least squares.
#[derive(Clone, Debug)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Householder vectors, one per column, each of length `rows - k`.
    reflectors: Vec<Vec<C64>>,
    /// Upper-triangular factor, `cols × cols`.
    r: Mat,
}

impl Qr {
    pub fn new(a: &Mat) -> Self {
        let (rows, cols) = (a.rows, a.cols);
        assert!(rows >= cols, "QR needs rows >= cols");
        let mut w = a.clone();
        let mut reflectors = Vec::with_capacity(cols);
        for k in 0..cols {
            let mut v: Vec<C64> = (k..rows).map(|r| w[(r, k)]).collect();
            let xnorm = norm(&v);
            if xnorm == 0.0 {
                reflectors.push(vec![ZERO; rows - k]);
                continue;
            }
            let x0 = v[0];
            let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
            let alpha = -phase * xnorm;
            v[0] -= alpha;
            let vn = norm(&v);
            for vi in v.iter_mut() {
                *vi /= vn;
            }
            for c in k..cols {
                let mut d = ZERO;
                for (i, vi) in v.iter().enumerate() {
                    d += vi.conj() * w[(k + i, c)];
                }
                for (i, vi) in v.iter().enumerate() {
                    w[(k + i, c)] -= vi * d * 2.0;
                }
            }
            reflectors.push(v);
        }
        let r = Mat::from_fn(cols, cols, |i, j| if j >= i { w[(i, j)] } else { ZERO });
        Qr { rows, cols, reflectors, r }
    }

    pub fn r(&self) -> &Mat {
        &self.r
    }

    /// Applies `Qᴴ` to a vector of length `rows`.
    fn apply_qh(&self, b: &[C64]) -> Vec<C64> {
        let mut y = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            let mut d = ZERO;
            for (i, vi) in v.iter().enumerate() {
                d += vi.conj() * y[k + i];
            }
            for (i, vi) in v.iter().enumerate() {
                y[k + i] -= vi * d * 2.0;
            }
        }
        y
    }

    /// Least-squares solution of `A x ≈ b` and the residual norm `‖A x − b‖`.
    pub fn solve(&self, b: &[C64]) -> (Vec<C64>, f64) {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let y = self.apply_qh(b);
        let residual = norm(&y[self.cols..]);
        let n = self.cols;
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.r[(i, j)] * x[j];
            }
            x[i] = s / self.r[(i, i)];
        }
        (x, residual)
    }

    /// Ratio of largest to smallest |diagonal entry of R|; a cheap
    /// conditioning indicator (infinite when R is singular).
    pub fn diagonal_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.cols).map(|i| self.r[(i, i)].norm()).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Singular values in descending order. Tall inputs are first reduced to
/// their triangular QR factor; the square core goes through one-sided Jacobi.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let core = if a.rows >= a.cols {
        if a.rows > a.cols {
            Qr::new(a).r.clone()
        } else {
            a.clone()
        }
    } else {
        let t = a.adjoint();
        if t.rows > t.cols {
            Qr::new(&t).r.clone()
        } else {
            t
        }
    };
    jacobi_singular_values(&core)
}

fn jacobi_singular_values(a: &Mat) -> Vec<f64> {
    let (m, n) = (a.rows, a.cols);
    // Column-major copy for cache-friendly column rotations.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|c| a.column(c)).collect();
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for i in 0..m {
                    let x = cp[i];
                    let y = cq[i] * phase.conj();
                    cp[i] = x * c - y * s;
                    cq[i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Number of singular values above `rel_tol · σ₁`.
pub fn numeric_rank(singular: &[f64], rel_tol: f64) -> usize {
    match singular.first() {
        None | Some(0.0) => 0,
        Some(&s1) => singular.iter().filter(|&&s| s > rel_tol * s1).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn det_of_permutation_and_triangular() {
        let m = Mat::from_rows(3, 3, [0., 1., 0., 0., 0., 1., 1., 0., 0.].map(c).to_vec());
        assert!((det(&m) - c(1.0)).norm() < 1e-14);
        let t = Mat::from_rows(3, 3, [2., 5., 7., 0., 3., 1., 0., 0., -4.].map(c).to_vec());
        assert!((det(&t) - c(-24.0)).norm() < 1e-12);
    }

    #[test]
    fn cofactors_at_singular_matrix() {
        // Rank-1 matrix: det 0 but cofactors of a 2x2 are the swapped entries.
        let m = Mat::from_rows(2, 2, [1., 2., 2., 4.].map(c).to_vec());
        let cf = cofactors(&m);
        assert_eq!(cf[(0, 0)], c(4.0));
        assert_eq!(cf[(0, 1)], c(-2.0));
        assert_eq!(cf[(1, 1)], c(1.0));
    }

    #[test]
    fn nullspace_free_columns_ascending() {
        let m = Mat::from_rows(1, 3, [1., 1., 1.].map(c).to_vec());
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.len(), 2);
        assert_eq!(ns[0], vec![c(-1.0), c(1.0), c(0.0)]);
        assert_eq!(ns[1], vec![c(-1.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn qr_least_squares_recovers_exact_solution() {
        let a = Mat::from_fn(6, 3, |r, k| C64::new((r * 3 + k) as f64 % 5.0 + 1.0, (r + k) as f64 * 0.1));
        let x = vec![C64::new(1.0, -1.0), c(2.0), C64::new(0.0, 0.5)];
        let b = a.mul_vec(&x);
        let (sol, res) = Qr::new(&a).solve(&b);
        assert!(res < 1e-12);
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_values_of_diagonal_and_rank_deficient() {
        let d = Mat::from_rows(3, 3, [3., 0., 0., 0., -5., 0., 0., 0., 1.].map(c).to_vec());
        let sv = singular_values(&d);
        assert!((sv[0] - 5.0).abs() < 1e-13 && (sv[1] - 3.0).abs() < 1e-13 && (sv[2] - 1.0).abs() < 1e-13);
        let u = [C64::new(1.0, 1.0), c(2.0), c(-1.0), C64::new(0.0, 3.0)];
        let v = [c(1.0), C64::new(0.5, -0.5), c(2.0)];
        let r1 = Mat::from_fn(4, 3, |i, j| u[i] * v[j]);
        assert_eq!(numeric_rank(&singular_values(&r1), 1e-10), 1);
        assert_eq!(numeric_rank(&singular_values(&r1.adjoint()), 1e-10), 1);
    }
}
