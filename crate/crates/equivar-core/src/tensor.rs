//! Dense tensors in `⊗ⁿW`, points of no evolution, marginalization and
//! Fourier coordinates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for f64 math without std
use num_traits::Float;

use crate::perm_rep::Model;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest admissible `κⁿ`.
pub const MAX_ENTRIES: usize = 1 << 26;

/// A dense complex tensor; entry `(x₁,…,xₙ)` sits at `Σ xᵢ·κ^(n−i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    kappa: usize,
    n: usize,
    data: Vec<C64>,
}

fn checked_len(kappa: usize, n: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..n {
        len = len.checked_mul(kappa).ok_or(Error::TensorTooLarge)?;
        if len > MAX_ENTRIES {
            return Err(Error::TensorTooLarge);
        }
    }
    Ok(len)
}

impl Tensor {
    pub fn new(kappa: usize, n: usize, data: Vec<C64>) -> Result<Self> {
        let len = checked_len(kappa, n)?;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!("expected {len} entries, got {}", data.len())));
        }
        Ok(Tensor { kappa, n, data })
    }

    pub fn zeros(kappa: usize, n: usize) -> Result<Self> {
        let len = checked_len(kappa, n)?;
        Ok(Tensor { kappa, n, data: vec![ZERO; len] })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn index_of(&self, states: &[usize]) -> usize {
        states.iter().fold(0, |acc, &x| acc * self.kappa + x)
    }

    pub fn get(&self, states: &[usize]) -> C64 {
        self.data[self.index_of(states)]
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.data)
    }

    /// Contracts slot `leaf` (0-based) with the all-ones covector.
    pub fn marginalize(&self, leaf: usize) -> Result<Tensor> {
        if self.n < 2 {
            return Err(Error::DimensionMismatch("cannot marginalize a tensor of order < 2".into()));
        }
        if leaf >= self.n {
            return Err(Error::DimensionMismatch(format!("leaf {} out of range 1..={}", leaf + 1, self.n)));
        }
        let k = self.kappa;
        let inner = k.pow((self.n - 1 - leaf) as u32);
        let outer = self.data.len() / (inner * k);
        let mut out = vec![ZERO; outer * inner];
        for o in 0..outer {
            for x in 0..k {
                let src = &self.data[(o * k + x) * inner..(o * k + x + 1) * inner];
                let dst = &mut out[o * inner..(o + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        Ok(Tensor { kappa: k, n: self.n - 1, data: out })
    }

    /// Marginalizes several slots (0-based, any order).
    pub fn marginalize_slots(&self, slots: &[usize]) -> Result<Tensor> {
        let mut sorted = slots.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut t = self.clone();
        for &s in sorted.iter().rev() {
            t = t.marginalize(s)?;
        }
        Ok(t)
    }

    /// Reorders slots: slot `i` of the result is slot `order[i]` of `self`.
    pub fn permute_slots(&self, order: &[usize]) -> Result<Tensor> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch("slot permutation length".into()));
        }
        let mut seen = vec![false; self.n];
        for &o in order {
            if o >= self.n || seen[o] {
                return Err(Error::DimensionMismatch(format!("{order:?} is not a slot permutation")));
            }
            seen[o] = true;
        }
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return Ok(self.clone());
        }
        let k = self.kappa;
        let strides_old: Vec<usize> = (0..self.n).map(|i| k.pow((self.n - 1 - i) as u32)).collect();
        let stride_for_new: Vec<usize> = order.iter().map(|&o| strides_old[o]).collect();
        let mut out = vec![ZERO; self.data.len()];
        let mut digits = vec![0usize; self.n];
        for slot in out.iter_mut() {
            let src: usize = digits.iter().zip(&stride_for_new).map(|(d, s)| d * s).sum();
            *slot = self.data[src];
            for i in (0..self.n).rev() {
                digits[i] += 1;
                if digits[i] < k {
                    break;
                }
                digits[i] = 0;
            }
        }
        Ok(Tensor { kappa: k, n: self.n, data: out })
    }

    /// `self ⊗ other`, with the slots of `self` first.
    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        if self.kappa != other.kappa {
            return Err(Error::DimensionMismatch("kappa differs".into()));
        }
        checked_len(self.kappa, self.n + other.n)?;
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Ok(Tensor { kappa: self.kappa, n: self.n + other.n, data })
    }

    /// Coordinates in the Fourier basis: `p = Σ q_{Ȳ₁…Ȳₙ} Ȳ₁⊗…⊗Ȳₙ`.
    pub fn fourier_coords(&self) -> Result<Tensor> {
        self.require_kappa4()?;
        Ok(Tensor { kappa: 4, n: self.n, data: fourier_transform(&self.data, self.n) })
    }

    /// Inverse of [`Tensor::fourier_coords`]: `self` holds Fourier coordinates.
    pub fn from_fourier(&self) -> Result<Tensor> {
        self.require_kappa4()?;
        Ok(Tensor { kappa: 4, n: self.n, data: inverse_fourier_transform(&self.data, self.n) })
    }

    fn require_kappa4(&self) -> Result<()> {
        if self.kappa != 4 {
            return Err(Error::Unsupported(format!("Fourier coordinates need kappa = 4, got {}", self.kappa)));
        }
        Ok(())
    }

    /// `ρ(g)·p` for group element index `g`.
    pub fn act(&self, model: &Model, g: usize) -> Tensor {
        Tensor { kappa: self.kappa, n: self.n, data: model.act(g, &self.data, self.n) }
    }

    /// Group average `(1/|G|) Σ_g ρ(g)p`.
    pub fn average(&self, model: &Model) -> Tensor {
        let order = model.group().order();
        let mut out = vec![ZERO; self.data.len()];
        for g in 0..order {
            let perm = model.group().tensor_index_action(g, self.n);
            for (x, v) in self.data.iter().enumerate() {
                out[perm[x]] += v;
            }
        }
        let w = 1.0 / order as f64;
        for v in out.iter_mut() {
            *v *= w;
        }
        Tensor { kappa: self.kappa, n: self.n, data: out }
    }

    /// `max_g ‖ρ(g)p − p‖∞ ≤ tol` over the group generators.
    pub fn is_invariant(&self, model: &Model, tol: f64) -> bool {
        let group = model.group();
        group.generators().iter().all(|g| {
            let gi = group.index_of(g).expect("generator in group");
            let moved = model.act(gi, &self.data, self.n);
            moved.iter().zip(&self.data).all(|(a, b)| (a - b).norm() <= tol)
        })
    }
}

/// `(1/4ⁿ)·F^{⊗n} v` computed slot by slot (κ = 4).
pub fn fourier_transform(v: &[C64], n: usize) -> Vec<C64> {
    let mut out = hadamard(v, n);
    let w = 0.25f64.powi(n as i32);
    for x in out.iter_mut() {
        *x *= w;
    }
    out
}

/// `F^{⊗n} q`: standard coordinates from Fourier coordinates.
pub fn inverse_fourier_transform(q: &[C64], n: usize) -> Vec<C64> {
    hadamard(q, n)
}

fn hadamard(v: &[C64], n: usize) -> Vec<C64> {
    let mut out = v.to_vec();
    for slot in 0..n {
        let inner = 4usize.pow((n - 1 - slot) as u32);
        let outer = out.len() / (inner * 4);
        for o in 0..outer {
            for i in 0..inner {
                let base = o * 4 * inner + i;
                let a = out[base];
                let c = out[base + inner];
                let g = out[base + 2 * inner];
                let t = out[base + 3 * inner];
                out[base] = a + c + g + t;
                out[base + inner] = a + c - g - t;
                out[base + 2 * inner] = a - c + g - t;
                out[base + 3 * inner] = a - c - g + t;
            }
        }
    }
    out
}

/// `Σ_X π_X X⊗…⊗X`; `pi` is indexed by state and must be orbit-constant.
pub fn no_evolution_tensor(model: &Model, pi: &[C64], n: usize) -> Result<Tensor> {
    let kappa = model.kappa();
    if pi.len() != kappa {
        return Err(Error::DimensionMismatch(format!("pi has {} entries, kappa is {kappa}", pi.len())));
    }
    for g in model.group().generators() {
        for x in 0..kappa {
            if (pi[g.apply(x)] - pi[x]).norm() > 1e-12 {
                return Err(Error::InvarianceViolation(format!("pi is not constant on the orbit of state {x}")));
            }
        }
    }
    let mut t = Tensor::zeros(kappa, n)?;
    let stride: usize = (0..n).map(|i| kappa.pow(i as u32)).sum();
    for (x, p) in pi.iter().enumerate() {
        t.data[x * stride] = *p;
    }
    Ok(t)
}
