use nalgebra::DVector;

use crate::lie::{AlgebraVector, GroupElement};

/// A point `[g, rho, v]` of the slice model, represented on the section
/// `G x m* x V`. `rho` holds coordinates against the orthonormal `m` basis
/// (equivalently the values `<rho, m_a>`), `v` holds coordinates in `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceState {
    pub g: GroupElement,
    pub rho: DVector<f64>,
    pub v: DVector<f64>,
}

impl SliceState {
    pub fn new(g: GroupElement, rho: DVector<f64>, v: DVector<f64>) -> Self {
        Self { g, rho, v }
    }

    /// `[e, 0, 0]`.
    pub fn origin(matrix_size: usize, dim_m: usize, dim_v: usize) -> Self {
        Self {
            g: GroupElement::identity(matrix_size),
            rho: DVector::zeros(dim_m),
            v: DVector::zeros(dim_v),
        }
    }

    /// `g' . [g, rho, v] = [g' g, rho, v]`.
    pub fn translate(&self, g_left: &GroupElement) -> Self {
        Self {
            g: g_left.compose(&self.g),
            rho: self.rho.clone(),
            v: self.v.clone(),
        }
    }
}

/// Tangent vector at a state: `g xi` along the group (left-trivialized),
/// and rates of the `m*` and `V` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub xi: AlgebraVector,
    pub rho_dot: DVector<f64>,
    pub v_dot: DVector<f64>,
}

impl TangentVector {
    pub fn zeros(dim_g: usize, dim_m: usize, dim_v: usize) -> Self {
        Self {
            xi: AlgebraVector::zeros(dim_g),
            rho_dot: DVector::zeros(dim_m),
            v_dot: DVector::zeros(dim_v),
        }
    }

    /// Unit vectors of `g + m* + V` in that order.
    pub fn coordinate_basis(dim_g: usize, dim_m: usize, dim_v: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(dim_g + dim_m + dim_v);
        for i in 0..dim_g {
            let mut t = Self::zeros(dim_g, dim_m, dim_v);
            t.xi.0[i] = 1.0;
            out.push(t);
        }
        for i in 0..dim_m {
            let mut t = Self::zeros(dim_g, dim_m, dim_v);
            t.rho_dot[i] = 1.0;
            out.push(t);
        }
        for i in 0..dim_v {
            let mut t = Self::zeros(dim_g, dim_m, dim_v);
            t.v_dot[i] = 1.0;
            out.push(t);
        }
        out
    }

    /// Flattened `(xi, rho_dot, v_dot)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.xi.dim() + self.rho_dot.len() + self.v_dot.len());
        out.extend(self.xi.0.iter());
        out.extend(self.rho_dot.iter());
        out.extend(self.v_dot.iter());
        DVector::from_vec(out)
    }

    pub fn from_vector(x: &DVector<f64>, dim_g: usize, dim_m: usize, dim_v: usize) -> Self {
        Self {
            xi: AlgebraVector(x.rows(0, dim_g).into_owned()),
            rho_dot: x.rows(dim_g, dim_m).into_owned(),
            v_dot: x.rows(dim_g + dim_m, dim_v).into_owned(),
        }
    }
}
