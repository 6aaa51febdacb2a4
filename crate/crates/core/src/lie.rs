//! Finite-dimensional Lie algebras embedded in matrix algebras.
//!
//! Algebra elements live in coordinates with respect to a fixed basis
//! `{E_i}`; the matrices themselves are only used for the exponential, the
//! logarithm and the adjoint action of group elements.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SliceError};
use crate::linalg;

macro_rules! coordinate_vector {
    ($name:ident) => {
        impl $name {
            pub fn new(coords: DVector<f64>) -> Self {
                Self(coords)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(DVector::zeros(dim))
            }

            pub fn from_slice(coords: &[f64]) -> Self {
                Self(DVector::from_column_slice(coords))
            }

            /// The `i`-th basis vector of a `dim`-dimensional space.
            pub fn basis(dim: usize, i: usize) -> Self {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                Self(v)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &DVector<f64> {
                &self.0
            }

            pub fn into_coords(self) -> DVector<f64> {
                self.0
            }

            pub fn norm(&self) -> f64 {
                self.0.norm()
            }

            pub fn to_vec(&self) -> Vec<f64> {
                self.0.iter().copied().collect()
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl<'a> Add<&'a $name> for &'a $name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name(&self.0 + &rhs.0)
            }
        }

        impl AddAssign<&$name> for $name {
            fn add_assign(&mut self, rhs: &$name) {
                self.0 += &rhs.0;
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        impl<'a> Sub<&'a $name> for &'a $name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name(&self.0 - &rhs.0)
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-self.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = $name;
            fn mul(self, rhs: f64) -> $name {
                $name(self.0 * rhs)
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, rhs: f64) -> $name {
                $name(&self.0 * rhs)
            }
        }
    };
}

/// Element of the Lie algebra, in coordinates of the basis `{E_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector(pub DVector<f64>);

/// Element of the dual of the Lie algebra, in the dual basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector(pub DVector<f64>);

coordinate_vector!(AlgebraVector);
coordinate_vector!(DualVector);

impl DualVector {
    /// The natural pairing `<mu, x>`.
    pub fn pair(&self, x: &AlgebraVector) -> f64 {
        self.0.dot(&x.0)
    }
}

/// An invertible matrix in the group generated by the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(pub DMatrix<f64>);

impl GroupElement {
    pub fn identity(size: usize) -> Self {
        Self(DMatrix::identity(size, size))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or_else(|| SliceError::InvalidArgument("group element is singular".into()))
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &other.0)
    }

    /// Frobenius distance between the matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.compose(rhs)
    }
}

/// Matrix of `Ad_g` in the algebra basis. The dual action `Ad*_g` is its
/// transpose acting on dual coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointOp(pub DMatrix<f64>);

impl AdjointOp {
    pub fn apply(&self, x: &AlgebraVector) -> AlgebraVector {
        AlgebraVector(&self.0 * &x.0)
    }

    /// `Ad*_g mu`, defined by `<Ad*_g mu, x> = <mu, Ad_g x>`.
    pub fn dual_apply(&self, mu: &DualVector) -> DualVector {
        DualVector(self.0.tr_mul(&mu.0))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Outcome of [`LieAlgebraContext::check_ad_invariance`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Basis matrices, structure constants and an inner product on `g`.
#[derive(Debug, Clone)]
pub struct LieAlgebraContext {
    basis: Vec<DMatrix<f64>>,
    /// `ad_basis[i]` is `ad(E_i)`: entry `(k, j)` is `c^k_{ij}`.
    ad_basis: Vec<DMatrix<f64>>,
    inner_product: DMatrix<f64>,
    flat_pinv: DMatrix<f64>,
    flat_basis: DMatrix<f64>,
    expansion_tol: f64,
}

impl LieAlgebraContext {
    /// Builds the context from basis matrices; structure constants are read
    /// off the commutators.
    pub fn from_basis_matrices(
        basis: Vec<DMatrix<f64>>,
        inner_product: DMatrix<f64>,
        tol: f64,
    ) -> Result<Self> {
        let (flat_basis, flat_pinv) = Self::flatten(&basis)?;
        let dim = basis.len();
        let mut ad_basis = vec![DMatrix::zeros(dim, dim); dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let flat = DVector::from_column_slice(comm.as_slice());
                let c = &flat_pinv * &flat;
                let resid = (&flat_basis * &c - &flat).norm();
                let scale = basis[i].norm() * basis[j].norm();
                if resid > tol * scale.max(1.0) {
                    return Err(SliceError::InvalidAlgebra(format!(
                        "span of the basis is not closed under commutators ([E{i}, E{j}] residual {resid:.3e})"
                    )));
                }
                for k in 0..dim {
                    let ck = snap(c[k]);
                    ad_basis[i][(k, j)] = ck;
                    ad_basis[j][(k, i)] = -ck;
                }
            }
        }
        Self::assemble(basis, ad_basis, inner_product, flat_basis, flat_pinv, tol)
    }

    /// Builds the context from structure constants `c[i][j][k] = c^k_{ij}`,
    /// using the adjoint representation as matrix embedding. Fails when the
    /// algebra has a center (the adjoint representation is then not faithful).
    pub fn from_structure_constants(
        c: &[Vec<Vec<f64>>],
        inner_product: DMatrix<f64>,
        tol: f64,
    ) -> Result<Self> {
        let ad_basis = Self::ad_from_constants(c)?;
        let dim = ad_basis.len();
        let flat = linalg::columns(
            dim * dim,
            &ad_basis
                .iter()
                .map(|m| DVector::from_column_slice(m.as_slice()))
                .collect::<Vec<_>>(),
        );
        if dim > 0 && linalg::rank(&flat, 1e-9, 1.0) < dim {
            return Err(SliceError::InvalidAlgebra(
                "adjoint representation is not faithful; supply basis matrices".into(),
            ));
        }
        Self::with_basis_and_constants(ad_basis.clone(), c, inner_product, tol)
    }

    /// Builds the context from both basis matrices and structure constants and
    /// checks that they agree.
    pub fn with_basis_and_constants(
        basis: Vec<DMatrix<f64>>,
        c: &[Vec<Vec<f64>>],
        inner_product: DMatrix<f64>,
        tol: f64,
    ) -> Result<Self> {
        let ad_basis = Self::ad_from_constants(c)?;
        if ad_basis.len() != basis.len() {
            return Err(SliceError::DimensionMismatch {
                context: "structure constants vs basis",
                expected: basis.len(),
                got: ad_basis.len(),
            });
        }
        let (flat_basis, flat_pinv) = Self::flatten(&basis)?;
        let dim = basis.len();
        for i in 0..dim {
            for j in 0..dim {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let mut expanded = DMatrix::zeros(comm.nrows(), comm.ncols());
                for k in 0..dim {
                    expanded += &basis[k] * ad_basis[i][(k, j)];
                }
                let resid = (comm - expanded).amax();
                if resid > tol {
                    return Err(SliceError::InvalidAlgebra(format!(
                        "structure constants disagree with commutators at ({i}, {j}): residual {resid:.3e}"
                    )));
                }
            }
        }
        Self::assemble(basis, ad_basis, inner_product, flat_basis, flat_pinv, tol)
    }

    fn ad_from_constants(c: &[Vec<Vec<f64>>]) -> Result<Vec<DMatrix<f64>>> {
        let dim = c.len();
        let mut ad = vec![DMatrix::zeros(dim, dim); dim];
        for i in 0..dim {
            if c[i].len() != dim {
                return Err(SliceError::DimensionMismatch {
                    context: "structure constants",
                    expected: dim,
                    got: c[i].len(),
                });
            }
            for j in 0..dim {
                if c[i][j].len() != dim {
                    return Err(SliceError::DimensionMismatch {
                        context: "structure constants",
                        expected: dim,
                        got: c[i][j].len(),
                    });
                }
                for k in 0..dim {
                    if c[i][j][k] != -c[j][i][k] {
                        return Err(SliceError::InvalidAlgebra(format!(
                            "structure constants are not antisymmetric at ({i}, {j}, {k})"
                        )));
                    }
                    ad[i][(k, j)] = c[i][j][k];
                }
            }
        }
        Ok(ad)
    }

    fn flatten(basis: &[DMatrix<f64>]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let Some(first) = basis.first() else {
            return Err(SliceError::InvalidAlgebra("empty basis".into()));
        };
        let size = first.nrows();
        for b in basis {
            if !b.is_square() || b.nrows() != size {
                return Err(SliceError::InvalidAlgebra(
                    "basis matrices must be square and of equal size".into(),
                ));
            }
        }
        let cols: Vec<DVector<f64>> = basis
            .iter()
            .map(|m| DVector::from_column_slice(m.as_slice()))
            .collect();
        let flat = linalg::columns(size * size, &cols);
        if linalg::rank(&flat, 1e-9, 1.0) < basis.len() {
            return Err(SliceError::InvalidAlgebra(
                "basis matrices are linearly dependent".into(),
            ));
        }
        let pinv = flat
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| SliceError::InvalidAlgebra(e.to_string()))?;
        Ok((flat, pinv))
    }

    fn assemble(
        basis: Vec<DMatrix<f64>>,
        ad_basis: Vec<DMatrix<f64>>,
        inner_product: DMatrix<f64>,
        flat_basis: DMatrix<f64>,
        flat_pinv: DMatrix<f64>,
        tol: f64,
    ) -> Result<Self> {
        let dim = basis.len();
        if inner_product.nrows() != dim || inner_product.ncols() != dim {
            return Err(SliceError::DimensionMismatch {
                context: "inner product",
                expected: dim,
                got: inner_product.nrows(),
            });
        }
        if !linalg::is_spd(&inner_product) {
            return Err(SliceError::InvalidAlgebra(
                "inner product is not symmetric positive definite".into(),
            ));
        }
        let ctx = Self {
            basis,
            ad_basis,
            inner_product,
            flat_pinv,
            flat_basis,
            expansion_tol: 1e-8,
        };
        let jacobi = ctx.jacobi_residual();
        let cmax = ctx.ad_basis.iter().map(|m| m.amax()).fold(0.0, f64::max);
        if jacobi > tol * cmax.powi(2).max(1.0) {
            return Err(SliceError::InvalidAlgebra(format!(
                "Jacobi identity fails (residual {jacobi:.3e})"
            )));
        }
        Ok(ctx)
    }

    /// Overrides the residual tolerated when expanding conjugated basis
    /// matrices in [`Self::adjoint`] and [`Self::log_map`].
    pub fn with_expansion_tolerance(mut self, tol: f64) -> Self {
        self.expansion_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Size of the basis matrices.
    pub fn matrix_size(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn basis_matrices(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn inner_product(&self) -> &DMatrix<f64> {
        &self.inner_product
    }

    /// `c^k_{ij}`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.ad_basis[i][(k, j)]
    }

    /// Structure constants as nested `c[i][j][k]`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| self.structure_constant(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.ad_basis.iter().all(|m| m.iter().all(|&c| c == 0.0))
    }

    fn check_dim(&self, got: usize, context: &'static str) -> Result<()> {
        if got != self.dim() {
            return Err(SliceError::DimensionMismatch {
                context,
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Matrix of `ad(x)` on algebra coordinates.
    pub fn ad_matrix(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, xi) in x.0.iter().enumerate() {
            if *xi != 0.0 {
                m += &self.ad_basis[i] * *xi;
            }
        }
        m
    }

    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_dim(x.dim(), "bracket")?;
        self.check_dim(y.dim(), "bracket")?;
        Ok(AlgebraVector(self.ad_matrix(x) * &y.0))
    }

    /// `ad*_x mu`, defined by `<ad*_x mu, y> = <mu, [x, y]>`.
    pub fn ad_star(&self, x: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
        self.check_dim(x.dim(), "ad_star")?;
        self.check_dim(mu.dim(), "ad_star")?;
        Ok(DualVector(self.ad_matrix(x).tr_mul(&mu.0)))
    }

    /// `sum_i x_i E_i`.
    pub fn to_matrix(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let n = self.matrix_size();
        let mut m = DMatrix::zeros(n, n);
        for (i, xi) in x.0.iter().enumerate() {
            m += &self.basis[i] * *xi;
        }
        m
    }

    /// Expands a matrix in the basis; returns coordinates and the relative
    /// residual of the expansion.
    pub fn expand(&self, m: &DMatrix<f64>) -> (AlgebraVector, f64) {
        let flat = DVector::from_column_slice(m.as_slice());
        let c = &self.flat_pinv * &flat;
        let resid = (&self.flat_basis * &c - &flat).norm() / flat.norm().max(1.0);
        (AlgebraVector(c), resid)
    }

    pub fn exp_map(&self, x: &AlgebraVector) -> GroupElement {
        GroupElement(self.to_matrix(x).exp())
    }

    /// Principal logarithm, expanded in the basis.
    pub fn log_map(&self, g: &GroupElement) -> Result<AlgebraVector> {
        let l = linalg::logm(g.matrix())
            .ok_or_else(|| SliceError::Logarithm("no principal logarithm".into()))?;
        let (x, resid) = self.expand(&l);
        if resid > self.expansion_tol {
            return Err(SliceError::Logarithm(format!(
                "logarithm leaves the algebra (residual {resid:.3e})"
            )));
        }
        Ok(x)
    }

    /// `Ad_g`: coordinates of `g E_i g^{-1}`.
    pub fn adjoint(&self, g: &GroupElement) -> Result<AdjointOp> {
        let g_inv = g.inverse()?;
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            let conj = g.matrix() * &self.basis[i] * g_inv.matrix();
            let (c, resid) = self.expand(&conj);
            if resid > self.expansion_tol {
                return Err(SliceError::Residual {
                    what: format!("expansion of g E_{i} g^-1 in the basis"),
                    residual: resid,
                    tolerance: self.expansion_tol,
                });
            }
            m.set_column(i, &c.0);
        }
        Ok(AdjointOp(m))
    }

    /// The left coadjoint action `Ad*_{g^{-1}} mu`.
    pub fn coadjoint(&self, g: &GroupElement, mu: &DualVector) -> Result<DualVector> {
        Ok(self.adjoint(&g.inverse()?)?.dual_apply(mu))
    }

    /// `Ad_{exp(x)} = exp(ad x)` computed on the algebra side.
    pub fn adjoint_of_exp(&self, x: &AlgebraVector) -> AdjointOp {
        AdjointOp(self.ad_matrix(x).exp())
    }

    /// Identifies an algebra vector with a covector through the inner product.
    pub fn flat(&self, x: &AlgebraVector) -> DualVector {
        DualVector(&self.inner_product * &x.0)
    }

    /// Inverse of [`Self::flat`].
    pub fn sharp(&self, mu: &DualVector) -> AlgebraVector {
        let chol = self
            .inner_product
            .clone()
            .cholesky()
            .expect("inner product validated as SPD");
        AlgebraVector(chol.solve(&mu.0))
    }

    /// Norm of a covector under the inner product dual to the one on `g`.
    pub fn dual_norm(&self, mu: &DualVector) -> f64 {
        mu.0.dot(&self.sharp(mu).0).max(0.0).sqrt()
    }

    /// Largest Jacobi-identity residual over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    // [[e_i, e_j], e_k] + [[e_j, e_k], e_i] + [[e_k, e_i], e_j]
                    let ij = self.ad_basis[i].column(j).into_owned();
                    let jk = self.ad_basis[j].column(k).into_owned();
                    let ki = self.ad_basis[k].column(i).into_owned();
                    let t1 = -(&self.ad_basis[k] * ij);
                    let t2 = -(&self.ad_basis[i] * jk);
                    let t3 = -(&self.ad_basis[j] * ki);
                    worst = worst.max((t1 + t2 + t3).amax());
                }
            }
        }
        worst
    }

    /// Max over samples of `|Ad_h^T P Ad_h - P|`.
    pub fn check_ad_invariance(
        &self,
        inner_product: &DMatrix<f64>,
        samples: &[GroupElement],
        tol: f64,
    ) -> Result<InvarianceReport> {
        let mut worst: f64 = 0.0;
        for h in samples {
            let ad = self.adjoint(h)?;
            let moved = ad.0.transpose() * inner_product * &ad.0;
            worst = worst.max((moved - inner_product).amax());
        }
        Ok(InvarianceReport {
            max_residual: worst,
            tolerance: tol,
            passed: worst <= tol,
        })
    }
}

/// Removes least-squares rounding noise from structure constants that are
/// integers up to a few ulps.
fn snap(c: f64) -> f64 {
    let r = c.round();
    if (c - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        c
    }
}

/// Standard `so(3)` basis: `E_i v = e_i x v`, so `[E_1, E_2] = E_3`.
pub fn so3_basis() -> Vec<DMatrix<f64>> {
    vec![
        DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., -1., 0., 1., 0.]),
        DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., -1., 0., 0.]),
        DMatrix::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]),
    ]
}
