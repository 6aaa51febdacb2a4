use nalgebra::DMatrix;

use crate::error::{Result, SliceError};
use crate::lie::{AlgebraVector, DualVector, GroupElement};
use crate::slice::{SliceModel, SliceState, TangentVector};
use crate::tubewise::CocycleTheta;

/// Left-trivialized infinitesimal generator of `e_i` at `state`:
/// `(Ad_{g^-1} e_i, 0, 0)`.
pub fn g_generator(model: &SliceModel, state: &SliceState, i: usize) -> Result<TangentVector> {
    let d = model.dim_g();
    let ad_inv = model.algebra().adjoint(&state.g.inverse()?)?;
    Ok(TangentVector {
        xi: ad_inv.apply(&AlgebraVector::basis(d, i)),
        rho_dot: nalgebra::DVector::zeros(model.dim_m()),
        v_dot: nalgebra::DVector::zeros(model.dim_v()),
    })
}

/// The Chu map at `state`: the reduced form on pairs of infinitesimal
/// generators.
pub fn chu_monitor(model: &SliceModel, state: &SliceState) -> Result<DMatrix<f64>> {
    let d = model.dim_g();
    let gens: Vec<TangentVector> = (0..d).map(|i| g_generator(model, state, i)).collect::<Result<_>>()?;
    let mut psi = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let val = model.reduced_form(state, &gens[i], &gens[j])?;
            psi[(i, j)] = val;
            psi[(j, i)] = -val;
        }
    }
    Ok(psi)
}

/// Non-equivariance cocycle of [`momentum_yr`]:
/// `mu - Ad*_{g^-1} mu - theta(g)`.
pub fn momentum_cocycle(model: &SliceModel, theta: &CocycleTheta, mu: &DualVector, g: &GroupElement) -> Result<DualVector> {
    Ok(mu - &model.algebra().coadjoint(g, mu)? - theta.eval(g)?)
}

/// Momentum map of the G-action on the slice model normalized to take the
/// value `mu` at `[e, 0, 0]`:
/// `Ad*_{g^-1}(mu + rho + J_V(v)) + mu - Ad*_{g^-1} mu - theta(g)`.
pub fn momentum_yr(model: &SliceModel, theta: &CocycleTheta, mu: &DualVector, state: &SliceState) -> Result<DualVector> {
    let total = mu + &model.nu(state);
    Ok(model.algebra().coadjoint(&state.g, &total)? + momentum_cocycle(model, theta, mu, &state.g)?)
}

/// Group-valued momentum map of an abelian action:
/// `g0 g exp(rho^sharp) exp(J_V(v)^sharp)`, with covectors turned into
/// algebra vectors by the inner product.
pub fn gmap_abelian(model: &SliceModel, g0: &GroupElement, state: &SliceState) -> Result<GroupElement> {
    let g = model.algebra();
    if !g.is_abelian() {
        return Err(SliceError::NonAbelian);
    }
    let eta = g.sharp(&model.embed_m_star(&state.rho));
    let j = g.sharp(&model.embed_h_star(&model.j_v(&state.v)));
    Ok(g0.compose(&state.g).compose(&g.exp_map(&eta)).compose(&g.exp_map(&j)))
}
