//! Linear symplectic algebra on `T_m M` and the symplectic normal space.
//!
//! A form is stored as the matrix `Omega` with `omega(u, w) = u^T Omega w`.
//! Hamiltonian vector fields follow `i_X omega = dh`, so on `R^2` with
//! `Omega = [[0, 1], [-1, 0]]` and `h = (q^2 + p^2) / 2` one gets `q' = p`,
//! `p' = -q`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SliceError};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    omega: DMatrix<f64>,
}

impl SymplecticForm {
    /// Validates antisymmetry and nondegeneracy of `omega`.
    pub fn new(omega: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !omega.is_square() {
            return Err(SliceError::DimensionMismatch {
                context: "symplectic form",
                expected: omega.nrows(),
                got: omega.ncols(),
            });
        }
        let asym = (&omega + omega.transpose()).amax();
        if asym > tol * omega.amax().max(1.0) {
            return Err(SliceError::Residual {
                what: "antisymmetry of the symplectic form".into(),
                residual: asym,
                tolerance: tol,
            });
        }
        let smallest = linalg::smallest_singular_value(&omega);
        if omega.nrows() > 0 && smallest <= tol * omega.amax().max(1.0) {
            return Err(SliceError::DegenerateForm { smallest });
        }
        Ok(Self { omega })
    }

    /// The standard form `blockdiag([[0, 1], [-1, 0]], ...)` in coordinates
    /// `(q_1, p_1, q_2, p_2, ...)`.
    pub fn standard(pairs: usize) -> Self {
        Self {
            omega: standard_matrix(pairs),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn pairing(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        u.dot(&(&self.omega * w))
    }

    /// Covector `omega(u, .)`.
    pub fn flat(&self, u: &DVector<f64>) -> DVector<f64> {
        self.omega.tr_mul(u)
    }

    /// Vector `X` with `omega(X, .) = alpha`.
    pub fn sharp(&self, alpha: &DVector<f64>) -> DVector<f64> {
        self.omega
            .transpose()
            .lu()
            .solve(alpha)
            .expect("validated nondegenerate form")
    }

    /// Basis of `{u : omega(w, u) = 0 for all w in span(w_basis)}`.
    pub fn complement(&self, w_basis: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
        omega_complement(&self.omega, w_basis, rel)
    }

    /// Gram matrix `B^T Omega B` of the form restricted to `span(B)`.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        basis.transpose() * &self.omega * basis
    }

    /// `|L^T Omega L - Omega|_max`.
    pub fn symplectic_defect(&self, l: &DMatrix<f64>) -> f64 {
        (l.transpose() * &self.omega * l - &self.omega).amax()
    }

    /// `|X^T Omega + Omega X|_max`.
    pub fn infinitesimal_defect(&self, x: &DMatrix<f64>) -> f64 {
        (x.transpose() * &self.omega + &self.omega * x).amax()
    }
}

pub fn standard_matrix(pairs: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * pairs, 2 * pairs);
    for i in 0..pairs {
        m[(2 * i, 2 * i + 1)] = 1.0;
        m[(2 * i + 1, 2 * i)] = -1.0;
    }
    m
}

/// Symplectic orthogonal `{u : w^T Omega u = 0 for all w}` of a subspace.
pub fn omega_complement(omega: &DMatrix<f64>, w_basis: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = omega.nrows();
    if w_basis.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    let constraint = w_basis.transpose() * omega;
    linalg::null_space(&constraint, rel, omega.amax())
}

/// Checks that every operator is in the symplectic algebra of `omega`.
pub fn check_symplectic_algebra(omega: &DMatrix<f64>, reps: &[DMatrix<f64>], tol: f64) -> Result<()> {
    for (a, r) in reps.iter().enumerate() {
        if r.nrows() != omega.nrows() || r.ncols() != omega.ncols() {
            return Err(SliceError::DimensionMismatch {
                context: "isotropy representation",
                expected: omega.nrows(),
                got: r.nrows(),
            });
        }
        let defect = (r.transpose() * omega + omega * r).amax();
        if defect > tol {
            return Err(SliceError::Residual {
                what: format!("isotropy generator {a} is not infinitesimally symplectic"),
                residual: defect,
                tolerance: tol,
            });
        }
    }
    Ok(())
}

/// Components `<J(v), zeta_a> = omega(R_a v, v) / 2` of the quadratic momentum
/// map of a linear symplectic representation with generators `R_a`.
pub fn quadratic_momentum(omega: &DMatrix<f64>, reps: &[DMatrix<f64>], v: &DVector<f64>) -> DVector<f64> {
    let ov = omega * v;
    DVector::from_iterator(reps.len(), reps.iter().map(|r| 0.5 * (r * v).dot(&ov)))
}

/// Derivative of [`quadratic_momentum`]: `<DJ(v) vdot, zeta_a> = omega(R_a v, vdot)`.
pub fn momentum_linearization(
    omega: &DMatrix<f64>,
    reps: &[DMatrix<f64>],
    v: &DVector<f64>,
    vdot: &DVector<f64>,
) -> DVector<f64> {
    let ow = omega * vdot;
    DVector::from_iterator(reps.len(), reps.iter().map(|r| (r * v).dot(&ow)))
}

/// The symplectic normal space `V = ker(omega restricted to C) complement`,
/// with `C = (g . m)^omega` and `I = C ∩ g . m`.
#[derive(Debug, Clone)]
pub struct SymplecticNormal {
    /// Basis of `g . m` (tangent to the orbit).
    pub orbit: DMatrix<f64>,
    /// Basis of `C ∩ g . m`.
    pub isotropic: DMatrix<f64>,
    /// Euclidean-orthonormal columns spanning `V` inside `T_m M`.
    pub basis: DMatrix<f64>,
    /// `omega` restricted to `V`, in the coordinates of `basis`.
    pub omega_v: DMatrix<f64>,
}

impl SymplecticNormal {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Matrix of an isotropy-induced map `L` on `V`: writes `L v = V a + I b`
    /// for `v` in `V` and keeps `a`.
    pub fn induced_map(&self, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        let k = self.isotropic.ncols();
        let rows = self.basis.nrows();
        let mut frame = DMatrix::zeros(rows, n + k);
        frame.view_mut((0, 0), (rows, n)).copy_from(&self.basis);
        frame.view_mut((0, n), (rows, k)).copy_from(&self.isotropic);
        let image = l * &self.basis;
        let svd = frame.clone().svd(true, true);
        let coeffs = svd
            .solve(&image, 1e-12)
            .map_err(|e| SliceError::InvalidArgument(e.to_string()))?;
        let resid = (&frame * &coeffs - &image).amax();
        if resid > 1e-8 * l.amax().max(1.0) {
            return Err(SliceError::Residual {
                what: "isotropy action does not preserve the symplectic normal space".into(),
                residual: resid,
                tolerance: 1e-8,
            });
        }
        Ok(coeffs.rows(0, n).into_owned())
    }
}

/// Computes the symplectic normal space at the anchor.
///
/// `V` is chosen as the complement of `I` inside `C` orthogonal for
/// `tm_inner_product`, so it is invariant under any isotropy action that
/// preserves that inner product.
pub fn symplectic_normal(
    form: &SymplecticForm,
    orbit_tangent: &DMatrix<f64>,
    tm_inner_product: &DMatrix<f64>,
    rel: f64,
) -> Result<SymplecticNormal> {
    let n = form.dim();
    let orbit = linalg::range_basis(orbit_tangent, rel, orbit_tangent.amax());
    let c = form.complement(&orbit, rel);
    let isotropic = linalg::intersection(&c, &orbit, rel);
    let raw = linalg::metric_complement_within(&isotropic, &c, tm_inner_product, rel);
    let basis = linalg::canonical_basis(&raw, &DMatrix::identity(n, n), rel);
    let omega_v = form.restrict(&basis);
    if basis.ncols() > 0 {
        let smallest = linalg::smallest_singular_value(&omega_v);
        if smallest <= rel {
            return Err(SliceError::DegenerateForm { smallest });
        }
    }
    Ok(SymplecticNormal {
        orbit,
        isotropic,
        basis,
        omega_v,
    })
}
