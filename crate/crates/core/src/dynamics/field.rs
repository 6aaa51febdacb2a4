use nalgebra::{DMatrix, DVector};

use crate::dynamics::hamiltonian::{self, InvariantHamiltonian};
use crate::error::{Result, SliceError};
use crate::lie::{AlgebraVector, DualVector};
use crate::linalg;
use crate::slice::{SliceModel, SliceState, TangentVector};

/// Solution of the `tau` equation.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSolution {
    pub tau: AlgebraVector,
    /// Condition number of the linear operator on `q`.
    pub cond: f64,
    /// Largest component of `F(xi, lambda, tau)` on the `q` basis.
    pub residual: f64,
}

/// The linear operator of the `tau` equation on `q` coordinates:
/// `M_ba = <lambda, [q_a, q_b]> + Sigma(q_a, q_b)`.
pub fn tau_operator(model: &SliceModel, lam: &DualVector) -> DMatrix<f64> {
    let q = model.q_basis();
    let dq = q.ncols();
    let g = model.algebra();
    let sq = q.transpose() * model.sigma() * q;
    let mut m = DMatrix::zeros(dq, dq);
    for a in 0..dq {
        let qa = AlgebraVector(q.column(a).into_owned());
        // Column a of ad(q_a) restricted to q, paired with lambda.
        let pulled = g.ad_matrix(&qa).tr_mul(&lam.0);
        for b in 0..dq {
            m[(b, a)] = pulled.dot(&q.column(b)) + sq[(a, b)];
        }
    }
    m
}

/// Solves `P_q*(ad*_{xi + tau} lambda) + Sigma(tau, .)|_q = 0` for `tau` in `q`.
pub fn solve_tau(model: &SliceModel, xi: &AlgebraVector, lam: &DualVector) -> Result<TauSolution> {
    let g = model.algebra();
    let d = g.dim();
    let q = model.q_basis();
    if q.ncols() == 0 {
        return Ok(TauSolution {
            tau: AlgebraVector::zeros(d),
            cond: 1.0,
            residual: 0.0,
        });
    }
    let m = tau_operator(model, lam);
    let ad_xi_lam = g.ad_star(xi, lam)?;
    let rhs = -q.tr_mul(&ad_xi_lam.0);
    let cond = linalg::condition_number(&m);
    if cond.is_nan() || cond > model.tolerances().tau_condition {
        return Err(SliceError::TauSingular { cond });
    }
    let coeffs = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(SliceError::TauSingular { cond })?;
    let residual = (&m * &coeffs - &rhs).amax();
    Ok(TauSolution {
        tau: AlgebraVector(q * coeffs),
        cond,
        residual,
    })
}

/// `D_{m*} h` as an element of `m`, and `D_V h` as a covector on `V`.
pub fn hamiltonian_differential(
    model: &SliceModel,
    ham: &dyn InvariantHamiltonian,
    state: &SliceState,
) -> (AlgebraVector, DVector<f64>) {
    let (gr, gv) = hamiltonian::gradient(ham, &state.rho, &state.v);
    (AlgebraVector(model.m_basis() * gr), gv)
}

/// `psi(rho, v) = tau(D_{m*} h, rho + J_V(v))`.
pub fn psi_map(model: &SliceModel, ham: &dyn InvariantHamiltonian, state: &SliceState) -> Result<TauSolution> {
    let (xi_m, _) = hamiltonian_differential(model, ham, state);
    solve_tau(model, &xi_m, &model.nu(state))
}

/// Components of the Hamiltonian vector field on `G x m* x V`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldComponents {
    pub xi_m: AlgebraVector,
    pub psi_q: AlgebraVector,
    /// Rate of the `m*` coordinates.
    pub rho_dot: DVector<f64>,
    pub v_dot: DVector<f64>,
    pub tau_cond: f64,
}

impl FieldComponents {
    /// Left-trivialized group velocity `xi_m + psi`; its `h` part is zero.
    pub fn group_velocity(&self) -> AlgebraVector {
        &self.xi_m + &self.psi_q
    }

    pub fn to_tangent(&self) -> TangentVector {
        TangentVector {
            xi: self.group_velocity(),
            rho_dot: self.rho_dot.clone(),
            v_dot: self.v_dot.clone(),
        }
    }
}

/// The reconstruction equations: group velocity `xi_m + psi`,
/// `rho_dot = P_m*(ad*_{xi_m} rho + ad*_{xi_m} J_V(v) + ad*_psi nu)` and
/// `v_dot = (D_V h)^sharp`.
pub fn vector_field(model: &SliceModel, ham: &dyn InvariantHamiltonian, state: &SliceState) -> Result<FieldComponents> {
    let g = model.algebra();
    let (xi_m, dv) = hamiltonian_differential(model, ham, state);
    let rho = model.embed_m_star(&state.rho);
    let j = model.embed_h_star(&model.j_v(&state.v));
    let nu = &rho + &j;
    let tau = solve_tau(model, &xi_m, &nu)?;
    let total = g.ad_star(&xi_m, &rho)? + g.ad_star(&xi_m, &j)? + g.ad_star(&tau.tau, &nu)?;
    let rho_dot = model.m_star_coords(&total);
    let v_dot = if model.dim_v() == 0 {
        DVector::zeros(0)
    } else {
        model
            .omega_v()
            .transpose()
            .lu()
            .solve(&dv)
            .ok_or(SliceError::DegenerateForm { smallest: 0.0 })?
    };
    Ok(FieldComponents {
        xi_m,
        psi_q: tau.tau,
        rho_dot,
        v_dot,
        tau_cond: tau.cond,
    })
}

/// Differential of `h` on a tangent vector (it never sees the group part).
pub fn dh_apply(ham: &dyn InvariantHamiltonian, state: &SliceState, w: &TangentVector) -> f64 {
    let (gr, gv) = hamiltonian::gradient(ham, &state.rho, &state.v);
    gr.dot(&w.rho_dot) + gv.dot(&w.v_dot)
}

/// `max_w |Omega(X_h, w) - dh(w)| / (1 + |dh|)` over the coordinate basis of
/// tangent vectors.
pub fn hamiltonian_consistency(
    model: &SliceModel,
    ham: &dyn InvariantHamiltonian,
    state: &SliceState,
    dh: &dyn Fn(&TangentVector) -> f64,
) -> Result<f64> {
    let x = vector_field(model, ham, state)?.to_tangent();
    let basis = TangentVector::coordinate_basis(model.dim_g(), model.dim_m(), model.dim_v());
    let mut worst: f64 = 0.0;
    let mut dh_norm: f64 = 0.0;
    let mut residuals = Vec::with_capacity(basis.len());
    for w in &basis {
        let target = dh(w);
        dh_norm += target * target;
        residuals.push(model.reduced_form(state, &x, w)? - target);
    }
    for r in residuals {
        worst = worst.max(r.abs());
    }
    Ok(worst / (1.0 + dh_norm.sqrt()))
}
