use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorOptions, InvariantHamiltonian, Oscillator, Polynomial, ZeroHamiltonian};
use crate::tolerances::Tolerances;
use crate::tubewise::LoopSpec;

/// Row-major matrix as nested arrays.
pub type MatrixRows = Vec<Vec<f64>>;

pub(crate) fn to_dmatrix(rows: &MatrixRows) -> Result<DMatrix<f64>, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("matrix rows have unequal lengths".into());
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn columns_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    /// Optional explicit dimension, checked against the other fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_matrices: Option<Vec<MatrixRows>>,
    /// `structure_constants[i][j][k]` is the coefficient of `E_k` in `[E_i, E_j]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure_constants: Option<Vec<Vec<Vec<f64>>>>,
    /// Defaults to the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_product: Option<MatrixRows>,
}

/// A group element given either as `exp` of algebra coordinates or as a
/// matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupSpec {
    Exp(Vec<f64>),
    Matrix(MatrixRows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSampleConfig {
    pub group: GroupSpec,
    /// Tangent-lifted action on `T_m M`.
    pub tangent: MatrixRows,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub omega: MatrixRows,
    /// `2n x dim g`; column `i` is the generator of `E_i` at the anchor.
    pub generator_matrix: MatrixRows,
    #[serde(default)]
    pub isotropy_basis: Vec<Vec<f64>>,
    /// Linearized action on `T_m M` of each isotropy basis vector.
    #[serde(default)]
    pub isotropy_tangent_ops: Vec<MatrixRows>,
    #[serde(default)]
    pub h_samples: Vec<HSampleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tm_inner_product: Option<MatrixRows>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianConfig {
    #[default]
    Zero,
    Oscillator(Oscillator),
    Polynomial(Polynomial),
}

impl HamiltonianConfig {
    pub fn build(&self) -> Box<dyn InvariantHamiltonian> {
        match self {
            HamiltonianConfig::Zero => Box::new(ZeroHamiltonian),
            HamiltonianConfig::Oscillator(o) => Box::new(*o),
            HamiltonianConfig::Polynomial(p) => Box::new(p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialStateConfig {
    /// `g = exp(g_exp)`; identity when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_exp: Option<Vec<f64>>,
    /// Coordinates `<rho, m_a>`; zeros when empty.
    pub rho: Vec<f64>,
    /// Coordinates in `V`; zeros when empty.
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubewiseConfig {
    pub loops: Vec<LoopSpec>,
    pub h1_trivial: bool,
    pub loops_generate: bool,
}

/// Model facts a scenario asserts about itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub dim_k: usize,
    pub dim_h: usize,
    pub dim_m: usize,
    pub dim_q: usize,
    pub dim_v: usize,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub algebra: AlgebraConfig,
    pub anchor: AnchorConfig,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub tubewise: TubewiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectations>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn mu_vector(&self, dim: usize) -> DVector<f64> {
        match &self.mu {
            Some(m) => DVector::from_column_slice(m),
            None => DVector::zeros(dim),
        }
    }
}
