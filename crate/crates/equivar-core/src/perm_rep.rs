//! Permutation groups on the state set, their characters and irreducible
//! realizations, isotypic multiplicities and equivariant hom-spaces.
//!
//! States are indexed `0..κ`; for the nucleotide models `A,C,G,T = 0,1,2,3`.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // needed for f64 math without std
use num_traits::Float;

use crate::linalg::{self, Mat};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A bijection of `{0,…,κ−1}`, stored as its list of images.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || seen[i] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(kappa: usize) -> Self {
        Permutation { images: (0..kappa).collect() }
    }

    /// Builds a permutation from disjoint cycles, e.g. `[[0,1],[2,3]]`.
    pub fn from_cycles(kappa: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..kappa).collect();
        for cyc in cycles {
            for (i, &x) in cyc.iter().enumerate() {
                let y = cyc[(i + 1) % cyc.len()];
                if x >= kappa || y >= kappa {
                    return Err(Error::InvalidPermutation(format!("cycle entry out of range in {cyc:?}")));
                }
                images[x] = y;
            }
        }
        Permutation::new(images)
    }

    pub fn kappa(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &j)| *i == j).count()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation over indices, `()` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.images.len()];
        let mut any = false;
        for start in 0..self.images.len() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.images[x];
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

/// A finite permutation group with conjugacy classes and, when known, its
/// character table (rows = irreps, columns = classes, row 0 trivial).
#[derive(Clone, Debug)]
pub struct PermGroup {
    kappa: usize,
    generators: Vec<Permutation>,
    /// Sorted lexicographically by images; the identity comes first.
    elements: Vec<Permutation>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    char_table: Option<Vec<Vec<C64>>>,
    dual_index: Vec<usize>,
    irrep_dims: Vec<usize>,
}

impl PermGroup {
    /// Closure of the generators under composition, with conjugacy classes
    /// ordered by their smallest element. No character table is attached.
    pub fn enumerate(kappa: usize, generators: &[Permutation]) -> Result<Self> {
        for g in generators {
            if g.kappa() != kappa {
                return Err(Error::InvalidPermutation(format!(
                    "generator {g} acts on {} states, expected {kappa}",
                    g.kappa()
                )));
            }
        }
        let id = Permutation::identity(kappa);
        let mut found: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
        found.insert(id.images.clone(), ());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = g.compose(&x);
                if found.insert(y.images.clone(), ()).is_none() {
                    queue.push_back(y);
                }
            }
        }
        let elements: Vec<Permutation> = found.into_keys().map(|images| Permutation { images }).collect();
        let mut group = PermGroup {
            kappa,
            generators: generators.to_vec(),
            elements,
            classes: Vec::new(),
            class_of: Vec::new(),
            char_table: None,
            dual_index: Vec::new(),
            irrep_dims: Vec::new(),
        };
        group.compute_classes();
        Ok(group)
    }

    fn compute_classes(&mut self) {
        let n = self.elements.len();
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let mut members = Vec::new();
            for g in &self.elements {
                let y = g.compose(&self.elements[x]).compose(&g.inverse());
                let iy = self.index_of(&y).expect("closed under conjugation");
                if class_of[iy] == usize::MAX {
                    class_of[iy] = c;
                    members.push(iy);
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        self.classes = classes;
        self.class_of = class_of;
    }

    /// Attaches a character table whose columns follow the current class order.
    pub fn with_char_table(mut self, table: Vec<Vec<C64>>) -> Result<Self> {
        let t = self.classes.len();
        if table.len() != t || table.iter().any(|r| r.len() != t) {
            return Err(Error::InvalidCharacterTable(format!("expected a {t}×{t} table for {t} conjugacy classes")));
        }
        let order = self.order() as f64;
        let sizes: Vec<f64> = self.classes.iter().map(|c| c.len() as f64).collect();
        for (a, ra) in table.iter().enumerate() {
            for (b, rb) in table.iter().enumerate() {
                let ip: C64 = (0..t).map(|c| ra[c] * rb[c].conj() * sizes[c]).sum::<C64>() / order;
                let want = if a == b { ONE } else { ZERO };
                if (ip - want).norm() > 1e-10 {
                    return Err(Error::InvalidCharacterTable(format!(
                        "rows {} and {} are not orthonormal",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        if table[0].iter().any(|z| (z - ONE).norm() > 1e-12) {
            return Err(Error::InvalidCharacterTable("row 1 must be the trivial character".to_string()));
        }
        let id_class = self.class_of[0];
        let mut dims = Vec::with_capacity(t);
        for row in &table {
            let d = row[id_class];
            let r = d.re.round();
            if (d - C64::new(r, 0.0)).norm() > 1e-9 || r < 1.0 {
                return Err(Error::InvalidCharacterTable(format!("bad irrep degree {d}")));
            }
            dims.push(r as usize);
        }
        if dims.iter().map(|d| d * d).sum::<usize>() != self.order() {
            return Err(Error::InvalidCharacterTable("sum of squared degrees differs from |G|".to_string()));
        }
        let mut dual = Vec::with_capacity(t);
        for row in &table {
            let k = table
                .iter()
                .position(|other| other.iter().zip(row).all(|(x, y)| (x - y.conj()).norm() < 1e-9))
                .ok_or_else(|| Error::InvalidCharacterTable("table not closed under conjugation".to_string()))?;
            dual.push(k);
        }
        self.char_table = Some(table);
        self.irrep_dims = dims;
        self.dual_index = dual;
        Ok(self)
    }

    /// Reorders classes so that class `c` contains `reps[c]`, then attaches
    /// `table` (columns in the order of `reps`).
    fn with_table_by_representatives(mut self, reps: &[Permutation], table: Vec<Vec<C64>>) -> Result<Self> {
        let mut order = Vec::with_capacity(reps.len());
        for r in reps {
            let i = self
                .index_of(r)
                .ok_or_else(|| Error::InvalidCharacterTable(format!("representative {r} not in group")))?;
            order.push(self.class_of[i]);
        }
        let classes: Vec<Vec<usize>> = order.iter().map(|&c| self.classes[c].clone()).collect();
        if classes.len() != self.classes.len() {
            return Err(Error::InvalidCharacterTable("representatives do not cover all classes".to_string()));
        }
        let mut class_of = vec![0; self.elements.len()];
        for (c, members) in classes.iter().enumerate() {
            for &m in members {
                class_of[m] = c;
            }
        }
        self.classes = classes;
        self.class_of = class_of;
        self.with_char_table(table)
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, element: usize) -> usize {
        self.class_of[element]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.elements.binary_search(p).ok()
    }

    pub fn char_table(&self) -> Option<&[Vec<C64>]> {
        self.char_table.as_deref()
    }

    pub fn num_irreps(&self) -> Option<usize> {
        self.char_table.as_ref().map(|t| t.len())
    }

    pub fn irrep_dims(&self) -> &[usize] {
        &self.irrep_dims
    }

    /// `k ↦ k*` with `χ_{k*} = conj(χ_k)` (0-based).
    pub fn dual(&self, k: usize) -> usize {
        self.dual_index[k]
    }

    /// Character value `χ_k(g)` for element index `g`.
    pub fn character(&self, k: usize, g: usize) -> Result<C64> {
        let t = self.char_table.as_ref().ok_or(Error::CharactersUnavailable)?;
        Ok(t[k][self.class_of[g]])
    }

    /// `dim (⊗^s W)^G`, by averaging fixed-point counts; needs no characters.
    pub fn invariant_dimension(&self, s: usize) -> usize {
        let total: f64 = self.elements.iter().map(|g| (g.fixed_points() as f64).powi(s as i32)).sum();
        (total / self.order() as f64).round() as usize
    }

    /// Isotypic multiplicities `m_k(s)` of `⊗^s W`.
    pub fn multiplicities(&self, s: usize) -> Result<Vec<usize>> {
        let table = self.char_table.as_ref().ok_or(Error::CharactersUnavailable)?;
        let order = self.order() as f64;
        let fix: Vec<f64> =
            self.classes.iter().map(|c| (self.elements[c[0]].fixed_points() as f64).powi(s as i32)).collect();
        let mut out = Vec::with_capacity(table.len());
        for (k, row) in table.iter().enumerate() {
            let m: C64 = self
                .classes
                .iter()
                .enumerate()
                .map(|(c, members)| row[c].conj() * fix[c] * members.len() as f64)
                .sum::<C64>()
                / order;
            let r = m.re.round();
            if (m - C64::new(r, 0.0)).norm() > 1e-6 || r < 0.0 {
                return Err(Error::NonIntegerMultiplicity { k: k + 1, value: m.re });
            }
            out.push(r as usize);
        }
        Ok(out)
    }

    /// Index permutation of `⊗^s W` induced by element `g`: the standard basis
    /// tensor at index `x` is sent to index `perm[x]`.
    pub fn tensor_index_action(&self, g: usize, s: usize) -> Vec<usize> {
        let p = &self.elements[g];
        let kappa = self.kappa;
        let len = kappa.pow(s as u32);
        let mut out = vec![0; len];
        for (x, slot) in out.iter_mut().enumerate() {
            let mut rest = x;
            let mut y = 0;
            let mut place = 1;
            for _ in 0..s {
                let d = rest % kappa;
                rest /= kappa;
                y += p.apply(d) * place;
                place *= kappa;
            }
            *slot = y;
        }
        out
    }
}

/// The five built-in model names plus custom groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelName {
    Gmm,
    Jc,
    K2,
    K3,
    Ss,
    Custom,
}

impl ModelName {
    pub const BUILTIN: [ModelName; 5] = [ModelName::Jc, ModelName::K2, ModelName::K3, ModelName::Ss, ModelName::Gmm];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::Gmm => "GMM",
            ModelName::Jc => "JC",
            ModelName::K2 => "K2",
            ModelName::K3 => "K3",
            ModelName::Ss => "SS",
            ModelName::Custom => "custom",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GMM" => Ok(ModelName::Gmm),
            "JC" => Ok(ModelName::Jc),
            "K2" => Ok(ModelName::K2),
            "K3" => Ok(ModelName::K3),
            "SS" => Ok(ModelName::Ss),
            _ => Err(Error::Unsupported(format!("unknown model {s:?}"))),
        }
    }
}

/// Matrices `ρ_k(g)` of one irreducible representation, indexed like
/// [`PermGroup::elements`]. Built-in realizations are unitary.
#[derive(Clone, Debug)]
pub struct Irrep {
    pub dim: usize,
    pub matrices: Vec<Mat>,
}

/// An equivariant model: the group together with irrep realizations and the
/// fixed bases `u^k_1,…,u^k_{m_k}` of the slices `F_k(W)`.
#[derive(Clone, Debug)]
pub struct Model {
    name: ModelName,
    group: PermGroup,
    irreps: Option<Vec<Irrep>>,
    fw_bases: Vec<Vec<Vec<C64>>>,
}

/// Rows of the unnormalized Fourier matrix: `Ā, C̄, Ḡ, T̄` over `A, C, G, T`.
pub const FOURIER: [[f64; 4]; 4] =
    [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, 1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];

/// Tensor product of Fourier vectors `Ȳ₁⊗…⊗Ȳₛ`, given by indices `0..4`.
pub fn fourier_monomial(ys: &[usize]) -> Vec<C64> {
    let mut out = vec![ONE];
    for &y in ys {
        let mut next = Vec::with_capacity(out.len() * 4);
        for v in &out {
            for x in 0..4 {
                next.push(v * FOURIER[y][x]);
            }
        }
        out = next;
    }
    out
}

fn combo(terms: &[(f64, &[usize])]) -> Vec<C64> {
    let len = 4usize.pow(terms[0].1.len() as u32);
    let mut out = vec![ZERO; len];
    for (c, ys) in terms {
        for (o, v) in out.iter_mut().zip(fourier_monomial(ys)) {
            *o += v * *c;
        }
    }
    out
}

fn cyc(cycles: &[&[usize]]) -> Permutation {
    Permutation::from_cycles(4, cycles).expect("built-in permutation")
}

enum RealizationSeed {
    Linear,
    Subspace { power: usize, seeds: Vec<Vec<C64>> },
}

impl Model {
    pub fn builtin(name: ModelName) -> Self {
        const A: usize = 0;
        const C: usize = 1;
        const G: usize = 2;
        const T: usize = 3;
        let r = |x: f64| C64::new(x, 0.0);
        let rows =
            |t: &[&[f64]]| -> Vec<Vec<C64>> { t.iter().map(|row| row.iter().map(|&x| r(x)).collect()).collect() };
        let (generators, reps, table, seeds, fw): (
            Vec<Permutation>,
            Vec<Permutation>,
            Vec<Vec<C64>>,
            Vec<RealizationSeed>,
            Vec<Vec<Vec<C64>>>,
        ) = match name {
            ModelName::Gmm => (
                vec![],
                vec![cyc(&[])],
                rows(&[&[1.0]]),
                vec![RealizationSeed::Linear],
                vec![(0..4).map(|y| fourier_monomial(&[y])).collect()],
            ),
            ModelName::Jc => (
                vec![cyc(&[&[A, C]]), cyc(&[&[A, C, G, T]])],
                vec![cyc(&[]), cyc(&[&[A, C]]), cyc(&[&[A, C, G]]), cyc(&[&[A, C, G, T]]), cyc(&[&[A, C], &[G, T]])],
                rows(&[
                    &[1.0, 1.0, 1.0, 1.0, 1.0],
                    &[1.0, -1.0, 1.0, -1.0, 1.0],
                    &[2.0, 0.0, -1.0, 0.0, 2.0],
                    &[3.0, 1.0, 0.0, -1.0, -1.0],
                    &[3.0, -1.0, 0.0, 1.0, -1.0],
                ]),
                vec![
                    RealizationSeed::Linear,
                    RealizationSeed::Linear,
                    RealizationSeed::Subspace {
                        power: 2,
                        seeds: vec![
                            combo(&[(1.0, &[C, C]), (-1.0, &[G, G])]),
                            combo(&[(1.0, &[G, G]), (-1.0, &[T, T])]),
                        ],
                    },
                    RealizationSeed::Subspace {
                        power: 1,
                        seeds: vec![fourier_monomial(&[C]), fourier_monomial(&[G]), fourier_monomial(&[T])],
                    },
                    RealizationSeed::Subspace {
                        power: 2,
                        seeds: vec![
                            combo(&[(1.0, &[G, T]), (-1.0, &[T, G])]),
                            combo(&[(1.0, &[C, T]), (-1.0, &[T, C])]),
                            combo(&[(1.0, &[C, G]), (-1.0, &[G, C])]),
                        ],
                    },
                ],
                vec![vec![fourier_monomial(&[A])], vec![], vec![], vec![fourier_monomial(&[C])], vec![]],
            ),
            ModelName::K2 => (
                vec![cyc(&[&[A, C, G, T]]), cyc(&[&[A, G]])],
                vec![
                    cyc(&[]),
                    cyc(&[&[A, G], &[C, T]]),
                    cyc(&[&[A, C, G, T]]),
                    cyc(&[&[A, G]]),
                    cyc(&[&[A, C], &[G, T]]),
                ],
                rows(&[
                    &[1.0, 1.0, 1.0, 1.0, 1.0],
                    &[1.0, 1.0, -1.0, 1.0, -1.0],
                    &[2.0, -2.0, 0.0, 0.0, 0.0],
                    &[1.0, 1.0, 1.0, -1.0, -1.0],
                    &[1.0, 1.0, -1.0, -1.0, 1.0],
                ]),
                vec![
                    RealizationSeed::Linear,
                    RealizationSeed::Linear,
                    RealizationSeed::Subspace { power: 1, seeds: vec![fourier_monomial(&[C]), fourier_monomial(&[T])] },
                    RealizationSeed::Linear,
                    RealizationSeed::Linear,
                ],
                vec![
                    vec![fourier_monomial(&[A])],
                    vec![fourier_monomial(&[G])],
                    vec![fourier_monomial(&[C])],
                    vec![],
                    vec![],
                ],
            ),
            ModelName::K3 => (
                vec![cyc(&[&[A, C], &[G, T]]), cyc(&[&[A, G], &[C, T]])],
                vec![cyc(&[]), cyc(&[&[A, C], &[G, T]]), cyc(&[&[A, G], &[C, T]]), cyc(&[&[A, T], &[C, G]])],
                rows(&[
                    &[1.0, 1.0, 1.0, 1.0],
                    &[1.0, 1.0, -1.0, -1.0],
                    &[1.0, -1.0, 1.0, -1.0],
                    &[1.0, -1.0, -1.0, 1.0],
                ]),
                vec![
                    RealizationSeed::Linear,
                    RealizationSeed::Linear,
                    RealizationSeed::Linear,
                    RealizationSeed::Linear,
                ],
                (0..4).map(|y| vec![fourier_monomial(&[y])]).collect(),
            ),
            ModelName::Ss => (
                vec![cyc(&[&[A, T], &[C, G]])],
                vec![cyc(&[]), cyc(&[&[A, T], &[C, G]])],
                rows(&[&[1.0, 1.0], &[1.0, -1.0]]),
                vec![RealizationSeed::Linear, RealizationSeed::Linear],
                vec![
                    vec![fourier_monomial(&[A]), fourier_monomial(&[T])],
                    vec![fourier_monomial(&[C]), fourier_monomial(&[G])],
                ],
            ),
            ModelName::Custom => panic!("Model::builtin called with ModelName::Custom"),
        };
        let group = PermGroup::enumerate(4, &generators)
            .and_then(|g| g.with_table_by_representatives(&reps, table))
            .expect("built-in character table");
        let irreps = seeds
            .into_iter()
            .enumerate()
            .map(|(k, seed)| realize(&group, k, seed))
            .collect::<Result<Vec<_>>>()
            .expect("built-in realization");
        Model { name, group, irreps: Some(irreps), fw_bases: fw }
    }

    /// A model on an arbitrary permutation group. A group with exactly the
    /// elements of a built-in one is that built-in model. Otherwise, without a
    /// character table only dimension counting is available; without irrep matrices no
    /// equations can be constructed. `irrep_generator_matrices[k][i]` is
    /// `ρ_k` of generator `i`.
    pub fn custom(
        kappa: usize,
        generators: Vec<Permutation>,
        char_table: Option<Vec<Vec<C64>>>,
        irrep_generator_matrices: Option<Vec<Vec<Mat>>>,
    ) -> Result<Self> {
        let mut group = PermGroup::enumerate(kappa, &generators)?;
        if char_table.is_none() && irrep_generator_matrices.is_none() {
            // The same permutations as a built-in group (no relabeling): reuse
            // its tables and realizations.
            if let Some(b) = ModelName::BUILTIN
                .iter()
                .map(|&name| Model::builtin(name))
                .find(|b| b.group.kappa == kappa && b.group.elements == group.elements)
            {
                return Ok(b);
            }
        }
        if let Some(t) = char_table {
            group = group.with_char_table(t)?;
        }
        let irreps = match irrep_generator_matrices {
            None => None,
            Some(per_irrep) => {
                let t = group.num_irreps().ok_or(Error::CharactersUnavailable)?;
                if per_irrep.len() != t {
                    return Err(Error::DimensionMismatch(format!("expected {t} irrep realizations")));
                }
                let mut out = Vec::with_capacity(t);
                for (k, gens) in per_irrep.into_iter().enumerate() {
                    out.push(extend_to_group(&group, k, gens)?);
                }
                Some(out)
            }
        };
        let mut model = Model { name: ModelName::Custom, group, irreps, fw_bases: Vec::new() };
        if model.irreps.is_some() {
            let t = model.group.num_irreps().unwrap_or(0);
            let mut fw = Vec::with_capacity(t);
            for k in 0..t {
                fw.push(model.slice_basis(k, 1)?);
            }
            model.fw_bases = fw;
        }
        Ok(model)
    }

    pub fn name(&self) -> ModelName {
        self.name
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn kappa(&self) -> usize {
        self.group.kappa
    }

    pub fn num_irreps(&self) -> Result<usize> {
        self.group.num_irreps().ok_or(Error::CharactersUnavailable)
    }

    pub fn multiplicities(&self, s: usize) -> Result<Vec<usize>> {
        self.group.multiplicities(s)
    }

    /// `m_1(s) = dim (⊗^s W)^G`.
    pub fn m1(&self, s: usize) -> usize {
        self.group.invariant_dimension(s)
    }

    pub fn has_realizations(&self) -> bool {
        self.irreps.is_some()
    }

    pub fn irrep_realization(&self, k: usize) -> Result<&Irrep> {
        self.irreps.as_ref().and_then(|v| v.get(k)).ok_or(Error::RealizationUnavailable(k + 1))
    }

    /// The fixed basis `u^k_i` of `F_k(W)` (vectors in `W`, possibly empty).
    pub fn fw_basis(&self, k: usize) -> Result<&[Vec<C64>]> {
        if self.irreps.is_none() {
            return Err(Error::RealizationUnavailable(k + 1));
        }
        Ok(&self.fw_bases[k])
    }

    /// Indicator matrices of the orbits of `G` on `Σ×Σ`, ordered by their
    /// first cell in row-major order.
    pub fn equivariant_hom_basis(&self) -> Vec<Mat> {
        let kappa = self.kappa();
        let mut orbit_of = vec![usize::MAX; kappa * kappa];
        let mut out = Vec::new();
        for cell in 0..kappa * kappa {
            if orbit_of[cell] != usize::MAX {
                continue;
            }
            let (x, y) = (cell / kappa, cell % kappa);
            let mut m = Mat::zeros(kappa, kappa);
            for g in self.group.elements() {
                let c = g.apply(x) * kappa + g.apply(y);
                orbit_of[c] = out.len();
                m[(g.apply(x), g.apply(y))] = ONE;
            }
            out.push(m);
        }
        out
    }

    /// Indicator vectors of the orbits of `G` on `Σ` (a basis of `W^G`).
    pub fn orbit_basis(&self) -> Vec<Vec<C64>> {
        let kappa = self.kappa();
        let mut seen = vec![false; kappa];
        let mut out = Vec::new();
        for x in 0..kappa {
            if seen[x] {
                continue;
            }
            let mut v = vec![ZERO; kappa];
            for g in self.group.elements() {
                seen[g.apply(x)] = true;
                v[g.apply(x)] = ONE;
            }
            out.push(v);
        }
        out
    }

    /// Applies group element `g` to a tensor of order `s` given as raw data.
    pub fn act(&self, g: usize, data: &[C64], s: usize) -> Vec<C64> {
        let perm = self.group.tensor_index_action(g, s);
        let mut out = vec![ZERO; data.len()];
        for (x, v) in data.iter().enumerate() {
            out[perm[x]] = *v;
        }
        out
    }

    /// Dense isotypic projector `(n_k/|G|) Σ_g conj(χ_k(g)) ρ_{⊗^s}(g)`.
    pub fn isotypic_projector(&self, k: usize, s: usize) -> Result<Mat> {
        let len = self.kappa().pow(s as u32);
        let nk = self.group.irrep_dims()[k] as f64;
        let order = self.group.order() as f64;
        let mut p = Mat::zeros(len, len);
        for g in 0..self.group.order() {
            let coef = self.group.character(k, g)?.conj() * nk / order;
            let perm = self.group.tensor_index_action(g, s);
            for (x, &y) in perm.iter().enumerate() {
                p[(y, x)] += coef;
            }
        }
        Ok(p)
    }

    /// Averaging projector `(1/|G|) Σ_g ρ_{⊗^s}(g)` onto the invariants.
    pub fn averaging_projector(&self, s: usize) -> Mat {
        let len = self.kappa().pow(s as u32);
        let w = C64::new(1.0 / self.group.order() as f64, 0.0);
        let mut p = Mat::zeros(len, len);
        for g in 0..self.group.order() {
            for (x, &y) in self.group.tensor_index_action(g, s).iter().enumerate() {
                p[(y, x)] += w;
            }
        }
        p
    }

    /// Basis of `Hom_G(N_k, ⊗^s W)`: each map is a `κ^s × n_k` matrix. The
    /// null space of the equivariance constraints over the generators is
    /// taken in pivot order, then orthonormalized by Gram–Schmidt.
    pub fn hom_space(&self, k: usize, s: usize) -> Result<Vec<Mat>> {
        let irrep = self.irrep_realization(k)?;
        let nk = irrep.dim;
        let len = self.kappa().pow(s as u32);
        let unknowns = len * nk;
        let gens: Vec<usize> =
            self.group.generators().iter().map(|g| self.group.index_of(g).expect("generator in group")).collect();
        if gens.is_empty() {
            return Ok((0..unknowns)
                .map(|u| {
                    let mut m = Mat::zeros(len, nk);
                    m[(u / nk, u % nk)] = ONE;
                    m
                })
                .collect());
        }
        // Constraint rows: (ρ_s(g) f)[x][c] − (f ρ_k(g))[x][c] = 0, where
        // (ρ_s(g) f)[x] = f[g⁻¹·x].
        let mut cons = Mat::zeros(gens.len() * unknowns, unknowns);
        for (gi, &g) in gens.iter().enumerate() {
            let perm = self.group.tensor_index_action(g, s);
            let rho = &irrep.matrices[g];
            for (x_pre, &x) in perm.iter().enumerate() {
                for c in 0..nk {
                    let row = gi * unknowns + x * nk + c;
                    cons[(row, x_pre * nk + c)] += ONE;
                    for d in 0..nk {
                        cons[(row, x * nk + d)] -= rho[(d, c)];
                    }
                }
            }
        }
        let null = linalg::nullspace(&cons, 1e-10);
        let ortho = linalg::orthonormalize(&null, 1e-10);
        Ok(ortho.into_iter().map(|v| Mat::from_rows(len, nk, v)).collect())
    }

    /// Image of `⊗^s W` under `(n_k/|G|) Σ_g conj(ρ_k(g)₁₁) ρ_{⊗^s}(g)`,
    /// which is exactly the slice `F_k(⊗^s W)` of images of `v_k = e₁`.
    /// Returned as spanning columns (one per standard basis tensor).
    fn slice_spanning_set(&self, k: usize, s: usize) -> Result<Vec<Vec<C64>>> {
        let irrep = self.irrep_realization(k)?;
        let len = self.kappa().pow(s as u32);
        if self.group.order() == 1 {
            return Ok((0..len)
                .map(|x| {
                    let mut v = vec![ZERO; len];
                    v[x] = ONE;
                    v
                })
                .collect());
        }
        let nk = irrep.dim as f64;
        let order = self.group.order() as f64;
        let mut cols = vec![vec![ZERO; len]; len];
        for g in 0..self.group.order() {
            let coef = irrep.matrices[g][(0, 0)].conj() * nk / order;
            if coef == ZERO {
                continue;
            }
            let perm = self.group.tensor_index_action(g, s);
            for (x, &y) in perm.iter().enumerate() {
                cols[x][y] += coef;
            }
        }
        Ok(cols)
    }

    /// Canonical basis of `F_k(⊗^s W)`: reduced echelon form in ordering
    /// coordinates (Fourier for κ = 4, standard otherwise).
    pub fn slice_basis(&self, k: usize, s: usize) -> Result<Vec<Vec<C64>>> {
        let span = self.slice_spanning_set(k, s)?;
        Ok(echelon_in_ordering_coords(self.kappa(), s, &span))
    }
}

/// Forward change to the coordinates used for canonical ordering.
pub(crate) fn to_ordering_coords(kappa: usize, s: usize, v: &[C64]) -> Vec<C64> {
    if kappa == 4 {
        crate::tensor::fourier_transform(v, s)
    } else {
        v.to_vec()
    }
}

pub(crate) fn from_ordering_coords(kappa: usize, s: usize, v: &[C64]) -> Vec<C64> {
    if kappa == 4 {
        crate::tensor::inverse_fourier_transform(v, s)
    } else {
        v.to_vec()
    }
}

/// Reduced echelon basis of `span(vectors)` taken in ordering coordinates and
/// mapped back to standard coordinates.
pub(crate) fn echelon_in_ordering_coords(kappa: usize, s: usize, vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let transformed: Vec<Vec<C64>> = vectors.iter().map(|v| to_ordering_coords(kappa, s, v)).collect();
    let scale = transformed.iter().map(|v| linalg::max_abs(v)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    linalg::echelon_basis(&transformed, 1e-9 * scale).into_iter().map(|v| from_ordering_coords(kappa, s, &v)).collect()
}

fn realize(group: &PermGroup, k: usize, seed: RealizationSeed) -> Result<Irrep> {
    match seed {
        RealizationSeed::Linear => {
            let matrices = (0..group.order())
                .map(|g| Ok(Mat::from_rows(1, 1, vec![group.character(k, g)?])))
                .collect::<Result<Vec<_>>>()?;
            Ok(Irrep { dim: 1, matrices })
        }
        RealizationSeed::Subspace { power, seeds } => {
            let tmp = Model { name: ModelName::Custom, group: group.clone(), irreps: None, fw_bases: Vec::new() };
            let proj = tmp.isotypic_projector(k, power)?;
            let projected: Vec<Vec<C64>> = seeds.iter().map(|v| proj.mul_vec(v)).collect();
            let basis = linalg::orthonormalize(&projected, 1e-10);
            let dim = group.irrep_dims()[k];
            if basis.len() != dim {
                return Err(Error::Internal(format!("irrep {} realized with dimension {}", k + 1, basis.len())));
            }
            let len = group.kappa().pow(power as u32);
            let q = Mat::from_columns(len, &basis);
            let qh = q.adjoint();
            let mut matrices = Vec::with_capacity(group.order());
            for g in 0..group.order() {
                let moved: Vec<Vec<C64>> = basis.iter().map(|v| tmp.act(g, v, power)).collect();
                let rho = qh.mul(&Mat::from_columns(len, &moved));
                let trace: C64 = (0..dim).map(|i| rho[(i, i)]).sum();
                if (trace - group.character(k, g)?).norm() > 1e-9 {
                    return Err(Error::Internal(format!("realization of irrep {} has the wrong character", k + 1)));
                }
                matrices.push(rho);
            }
            Ok(Irrep { dim, matrices })
        }
    }
}

/// Extends generator images to a homomorphism on the whole group by walking
/// the Cayley graph; inconsistent relations are rejected.
fn extend_to_group(group: &PermGroup, k: usize, gens: Vec<Mat>) -> Result<Irrep> {
    let dim = group.irrep_dims()[k];
    if gens.len() != group.generators().len() || gens.iter().any(|m| m.rows() != dim || m.cols() != dim) {
        return Err(Error::DimensionMismatch(format!("irrep {} needs one {dim}×{dim} matrix per generator", k + 1)));
    }
    let mut mats: Vec<Option<Mat>> = vec![None; group.order()];
    mats[0] = Some(Mat::identity(dim));
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let mx = mats[x].clone().expect("visited");
        for (gi, g) in group.generators().iter().enumerate() {
            let y = group.index_of(&g.compose(&group.elements()[x])).expect("closed");
            let my = gens[gi].mul(&mx);
            match &mats[y] {
                Some(existing) => {
                    let diff =
                        existing.as_slice().iter().zip(my.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    if diff > 1e-9 {
                        return Err(Error::InvalidCharacterTable(format!(
                            "irrep {} matrices do not define a homomorphism",
                            k + 1
                        )));
                    }
                }
                None => {
                    mats[y] = Some(my);
                    queue.push_back(y);
                }
            }
        }
    }
    let matrices: Vec<Mat> = mats.into_iter().map(|m| m.expect("group generated")).collect();
    for (g, m) in matrices.iter().enumerate() {
        let trace: C64 = (0..dim).map(|i| m[(i, i)]).sum();
        if (trace - group.character(k, g)?).norm() > 1e-9 {
            return Err(Error::InvalidCharacterTable(format!("irrep {} matrices disagree with its character", k + 1)));
        }
    }
    Ok(Irrep { dim, matrices })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(Model::builtin(ModelName::Gmm).group().order(), 1);
        assert_eq!(Model::builtin(ModelName::Jc).group().order(), 24);
        assert_eq!(Model::builtin(ModelName::K2).group().order(), 8);
        assert_eq!(Model::builtin(ModelName::K3).group().order(), 4);
        assert_eq!(Model::builtin(ModelName::Ss).group().order(), 2);
    }

    #[test]
    fn permutation_display_and_algebra() {
        let p = Permutation::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap();
        assert_eq!(alloc::format!("{p}"), "(0 1 2 3)");
        assert!(p.compose(&p.inverse()).is_identity());
        assert_eq!(p.fixed_points(), 0);
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
    }
}
