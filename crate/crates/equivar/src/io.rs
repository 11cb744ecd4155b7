//! JSON file formats. Complex numbers are `[re, im]` pairs throughout.

use std::fs;
use std::path::Path;

use equivar_core::ci_builder::{Coordinates, EquationSystem};
use equivar_core::claw_equations::ClawCoords;
use equivar_core::linalg::Mat;
use equivar_core::model_param::EdgeParam;
use equivar_core::verify::VerifyReport;
use equivar_core::{Model, Parameters, Permutation, SplitBasis, Tensor, Tree, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type Complex = [f64; 2];

pub fn pair(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn complex(p: Complex) -> C64 {
    C64::new(p[0], p[1])
}

fn pairs(v: &[C64]) -> Vec<Complex> {
    v.iter().copied().map(pair).collect()
}

fn complexes(v: &[Complex]) -> Vec<C64> {
    v.iter().copied().map(complex).collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Standard,
    Fourier,
}

/// `{"kappa":4,"n":3,"basis":"standard","data":[[re,im],…]}`, leaf 1 the
/// most significant index digit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub kappa: usize,
    pub n: usize,
    pub basis: BasisKind,
    pub data: Vec<Complex>,
}

impl TensorJson {
    pub fn standard(t: &Tensor) -> Self {
        TensorJson { kappa: t.kappa(), n: t.order(), basis: BasisKind::Standard, data: pairs(t.data()) }
    }

    pub fn fourier(t: &Tensor) -> Result<Self, CliError> {
        let f = t.fourier_coords()?;
        Ok(TensorJson { kappa: 4, n: t.order(), basis: BasisKind::Fourier, data: pairs(f.data()) })
    }

    /// The tensor in standard coordinates.
    pub fn to_tensor(&self) -> Result<Tensor, CliError> {
        let t = Tensor::new(self.kappa, self.n, complexes(&self.data))?;
        Ok(match self.basis {
            BasisKind::Standard => t,
            BasisKind::Fourier => t.from_fourier()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    /// `[parent, child]` vertex ids.
    pub edge: [usize; 2],
    pub coeffs: Vec<Complex>,
}

/// Parameters on the orbit bases of `Σ` and `Σ×Σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub root: usize,
    pub pi: Vec<Complex>,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub stochastic: bool,
}

impl From<&Parameters> for ParamsJson {
    fn from(p: &Parameters) -> Self {
        ParamsJson {
            root: p.root,
            pi: pairs(&p.pi),
            edges: p.edges.iter().map(|e| EdgeJson { edge: [e.parent, e.child], coeffs: pairs(&e.coeffs) }).collect(),
            stochastic: p.stochastic,
        }
    }
}

impl From<&ParamsJson> for Parameters {
    fn from(p: &ParamsJson) -> Self {
        Parameters {
            root: p.root,
            pi: complexes(&p.pi),
            edges: p
                .edges
                .iter()
                .map(|e| EdgeParam { parent: e.edge[0], child: e.edge[1], coeffs: complexes(&e.coeffs) })
                .collect(),
            stochastic: p.stochastic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffJson {
    pub row: usize,
    pub col: usize,
    pub coord_index: usize,
    pub coeff: Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationJson {
    pub id: usize,
    pub name: String,
    pub provenance: String,
    pub matrix: String,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `row`/`col` are positions inside the minor.
    pub coeff_map: Vec<CoeffJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    pub leaves: usize,
    pub claw_a: usize,
    pub claw_b: usize,
    pub edge: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub model: String,
    pub tree: String,
    pub n: usize,
    pub codimension: usize,
    /// `split`, `standard`, `fourier`.
    pub coordinates: String,
    /// The split the `q`-coordinates refer to, when there is one.
    pub split: Option<String>,
    pub coordinate_names: Vec<String>,
    pub levels: Vec<LevelJson>,
    pub equations: Vec<EquationJson>,
}

impl SystemJson {
    pub fn new(system: &EquationSystem, tree: &Tree) -> Self {
        let coordinates = match &system.coordinates {
            Coordinates::Split(_) => "split",
            Coordinates::Claw(c) => c.describe(),
        };
        let equations = system
            .equations
            .iter()
            .enumerate()
            .map(|(id, e)| EquationJson {
                id,
                name: e.name.clone(),
                provenance: e.provenance.as_str().into(),
                matrix: e.matrix.to_string(),
                rows: e.rows.clone(),
                cols: e.cols.clone(),
                coeff_map: e
                    .cells
                    .iter()
                    .flat_map(|c| {
                        c.terms.iter().map(move |&(coord_index, coeff)| CoeffJson {
                            row: c.row,
                            col: c.col,
                            coord_index,
                            coeff: pair(coeff),
                        })
                    })
                    .collect(),
            })
            .collect();
        SystemJson {
            model: system.model.as_str().into(),
            tree: tree.to_string(),
            n: system.n,
            codimension: system.codimension,
            coordinates: coordinates.into(),
            split: system.split_basis().map(|b| b.split().render(tree.labels())),
            coordinate_names: system.coordinate_names(),
            levels: system
                .levels
                .iter()
                .map(|l| LevelJson { leaves: l.leaves, claw_a: l.claw_a, claw_b: l.claw_b, edge: l.edge })
                .collect(),
            equations,
        }
    }
}

/// One vector of a split basis; `k`, `i`, `j` are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEntryJson {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub tensor: Vec<Complex>,
}

pub fn basis_dump(basis: &SplitBasis) -> Vec<BasisEntryJson> {
    basis
        .entries()
        .iter()
        .enumerate()
        .map(|(c, &(k, i, j))| BasisEntryJson { k: k + 1, i: i + 1, j: j + 1, tensor: pairs(basis.vector(c).data()) })
        .collect()
}

/// Standard-coordinate tensors of a claw set's own coordinates.
pub fn claw_basis_dump(coords: &ClawCoords) -> Vec<Vec<Complex>> {
    (0..coords.len()).map(|c| pairs(&coords.basis_tensor(c))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub check: String,
    pub expected: String,
    pub observed: String,
    pub tol: f64,
    pub pass: bool,
    pub seeds: Vec<u64>,
    pub runtime_ms: Option<f64>,
}

impl From<&VerifyReport> for ReportJson {
    fn from(r: &VerifyReport) -> Self {
        ReportJson {
            check: r.check.clone(),
            expected: r.expected.clone(),
            observed: r.observed.clone(),
            tol: r.tol,
            pass: r.pass,
            seeds: r.seeds.clone(),
            runtime_ms: r.runtime_ms,
        }
    }
}

/// Custom group input: generators as image arrays, an optional character
/// table (rows per irrep, `[re,im]` per conjugacy class in the order the
/// group enumerates them) and optional irrep matrices per generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomGroupJson {
    pub kappa: usize,
    pub generators: Vec<Vec<usize>>,
    #[serde(default)]
    pub char_table: Option<Vec<Vec<Complex>>>,
    /// `irrep_matrices[k][g]` is `ρ_k(generator g)` as rows of `[re,im]`.
    #[serde(default)]
    pub irrep_matrices: Option<Vec<Vec<Vec<Vec<Complex>>>>>,
}

impl CustomGroupJson {
    pub fn to_model(&self) -> Result<Model, CliError> {
        let generators = self.generators.iter().map(|g| Permutation::new(g.clone())).collect::<Result<Vec<_>, _>>()?;
        let table = self.char_table.as_ref().map(|t| t.iter().map(|row| complexes(row)).collect());
        let matrices = self.irrep_matrices.as_ref().map(|per_irrep| {
            per_irrep
                .iter()
                .map(|gens| {
                    gens.iter()
                        .map(|rows| {
                            let r = rows.len();
                            let data: Vec<C64> = rows.iter().flat_map(|row| complexes(row)).collect();
                            Mat::from_rows(r, data.len().checked_div(r).unwrap_or(0), data)
                        })
                        .collect()
                })
                .collect()
        });
        if self.generators.iter().any(|g| g.len() != self.kappa) {
            return Err(CliError::Usage(format!("every generator needs {} images", self.kappa)));
        }
        Ok(Model::custom(self.kappa, generators, table, matrices)?)
    }
}
