use nalgebra::DMatrix;

use crate::error::{Result, SliceError};
use crate::lie::{AlgebraVector, GroupElement, LieAlgebraContext};
use crate::linalg;
use crate::symplectic::SymplecticForm;
use crate::tolerances::Tolerances;

/// An element of the isotropy group together with its tangent-lifted action on
/// `T_m M`.
#[derive(Debug, Clone)]
pub struct IsotropySample {
    pub element: GroupElement,
    pub tangent: DMatrix<f64>,
}

/// Pointwise data of a canonical action at the anchor point `m`.
#[derive(Debug, Clone)]
pub struct AnchorData {
    pub algebra: LieAlgebraContext,
    /// `omega(m)` on `T_m M`.
    pub omega: SymplecticForm,
    /// Column `i` is the infinitesimal generator `(E_i)_M(m)`.
    pub generator: DMatrix<f64>,
    /// Basis of the isotropy algebra.
    pub isotropy_basis: Vec<AlgebraVector>,
    /// Linearized action on `T_m M` of each isotropy basis vector.
    pub isotropy_generators: Vec<DMatrix<f64>>,
    pub h_samples: Vec<IsotropySample>,
    /// Inner product on `T_m M` used to pick the normal-space complement.
    pub tm_inner_product: DMatrix<f64>,
}

impl AnchorData {
    pub fn phase_dim(&self) -> usize {
        self.omega.dim()
    }

    /// Isotropy basis as the columns of a `dim g x dim h` matrix.
    pub fn isotropy_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<_> = self.isotropy_basis.iter().map(|z| z.0.clone()).collect();
        linalg::columns(self.algebra.dim(), &cols)
    }

    /// Checks every pointwise invariant of the anchor and names the first
    /// one that fails.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let d = self.algebra.dim();
        let n = self.phase_dim();
        if self.generator.nrows() != n || self.generator.ncols() != d {
            return Err(SliceError::DimensionMismatch {
                context: "generator matrix columns",
                expected: d,
                got: self.generator.ncols(),
            });
        }
        if self.tm_inner_product.nrows() != n || !linalg::is_spd(&self.tm_inner_product) {
            return Err(SliceError::InvalidArgument(
                "tm_inner_product must be symmetric positive definite on T_m M".into(),
            ));
        }
        if self.isotropy_generators.len() != self.isotropy_basis.len() {
            return Err(SliceError::DimensionMismatch {
                context: "isotropy generators",
                expected: self.isotropy_basis.len(),
                got: self.isotropy_generators.len(),
            });
        }
        let scale = self.generator.amax().max(1.0);
        for (a, z) in self.isotropy_basis.iter().enumerate() {
            if z.dim() != d {
                return Err(SliceError::DimensionMismatch {
                    context: "isotropy basis vector",
                    expected: d,
                    got: z.dim(),
                });
            }
            let kill = (&self.generator * &z.0).amax();
            if kill > tol.isotropy_kills * scale {
                return Err(SliceError::Residual {
                    what: format!("isotropy kills generators (isotropy vector {a})"),
                    residual: kill,
                    tolerance: tol.isotropy_kills,
                });
            }
        }
        let z = self.isotropy_matrix();
        let rank_z = linalg::rank(&z, tol.rank_cutoff, 1.0);
        if rank_z != z.ncols() {
            return Err(SliceError::InvalidArgument(
                "isotropy basis vectors are linearly dependent".into(),
            ));
        }
        let kernel_dim = d - linalg::rank(&self.generator, tol.rank_cutoff, scale);
        if kernel_dim != rank_z {
            return Err(SliceError::InvalidArgument(format!(
                "isotropy basis spans {rank_z} dimensions but the generator kernel has dimension {kernel_dim}"
            )));
        }

        for (a, x) in self.isotropy_generators.iter().enumerate() {
            if x.nrows() != n || x.ncols() != n {
                return Err(SliceError::DimensionMismatch {
                    context: "isotropy generator",
                    expected: n,
                    got: x.nrows(),
                });
            }
            let sympl = self.omega.infinitesimal_defect(x);
            if sympl > tol.sample_action {
                return Err(SliceError::Residual {
                    what: format!("isotropy generator {a} preserves omega"),
                    residual: sympl,
                    tolerance: tol.sample_action,
                });
            }
            let ad = self.algebra.ad_matrix(&self.isotropy_basis[a]);
            let equiv = (x * &self.generator - &self.generator * ad).amax();
            if equiv > tol.sample_action * scale {
                return Err(SliceError::Residual {
                    what: format!("isotropy generator {a} intertwines generators"),
                    residual: equiv,
                    tolerance: tol.sample_action,
                });
            }
            let metric = (x.transpose() * &self.tm_inner_product + &self.tm_inner_product * x).amax();
            if metric > tol.sample_action * self.tm_inner_product.amax() {
                return Err(SliceError::Residual {
                    what: format!("isotropy generator {a} preserves tm_inner_product"),
                    residual: metric,
                    tolerance: tol.sample_action,
                });
            }
        }

        for (s, sample) in self.h_samples.iter().enumerate() {
            let l = &sample.tangent;
            if l.nrows() != n || l.ncols() != n {
                return Err(SliceError::DimensionMismatch {
                    context: "H sample tangent map",
                    expected: n,
                    got: l.nrows(),
                });
            }
            if sample.element.size() != self.algebra.matrix_size() {
                return Err(SliceError::DimensionMismatch {
                    context: "H sample group element",
                    expected: self.algebra.matrix_size(),
                    got: sample.element.size(),
                });
            }
            let sympl = self.omega.symplectic_defect(l);
            if sympl > tol.sample_action {
                return Err(SliceError::Residual {
                    what: format!("H sample {s} preserves omega"),
                    residual: sympl,
                    tolerance: tol.sample_action,
                });
            }
            let ad = self.algebra.adjoint(&sample.element)?;
            let equiv = (l * &self.generator - &self.generator * &ad.0).amax();
            if equiv > tol.sample_action * scale {
                return Err(SliceError::Residual {
                    what: format!("H sample {s} satisfies L A = A Ad_h"),
                    residual: equiv,
                    tolerance: tol.sample_action,
                });
            }
            let metric = (l.transpose() * &self.tm_inner_product * l - &self.tm_inner_product).amax();
            if metric > tol.sample_action * self.tm_inner_product.amax() {
                return Err(SliceError::Residual {
                    what: format!("H sample {s} preserves tm_inner_product"),
                    residual: metric,
                    tolerance: tol.sample_action,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::so3_basis;

    fn sphere_anchor() -> AnchorData {
        let algebra =
            LieAlgebraContext::from_basis_matrices(so3_basis(), DMatrix::identity(3, 3), 1e-10).unwrap();
        let rot = |phi: f64| DMatrix::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()]);
        let h_samples = [0.3, 1.1]
            .iter()
            .map(|&phi| IsotropySample {
                element: algebra.exp_map(&AlgebraVector::from_slice(&[0., 0., phi])),
                tangent: rot(phi),
            })
            .collect();
        AnchorData {
            algebra,
            omega: SymplecticForm::standard(1),
            generator: DMatrix::from_row_slice(2, 3, &[0., 1., 0., -1., 0., 0.]),
            isotropy_basis: vec![AlgebraVector::basis(3, 2)],
            isotropy_generators: vec![DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.])],
            h_samples,
            tm_inner_product: DMatrix::identity(2, 2),
        }
    }

    #[test]
    fn sphere_anchor_is_valid() {
        sphere_anchor().validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn isotropy_vector_outside_kernel_is_named() {
        let mut anchor = sphere_anchor();
        anchor.isotropy_basis = vec![AlgebraVector::basis(3, 0)];
        let err = anchor.validate(&Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("isotropy kills generators"), "{err}");
    }

    #[test]
    fn non_equivariant_sample_is_rejected() {
        let mut anchor = sphere_anchor();
        anchor.h_samples[0].tangent = DMatrix::identity(2, 2);
        let err = anchor.validate(&Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("L A = A Ad_h"), "{err}");
    }
}
