use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SliceError};
use crate::lie::DualVector;
use crate::linalg;
use crate::slice::model::SliceModel;

const RADIUS_SEED: u64 = 0x51ce;

/// Radii of the certified tube.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Radii {
    /// Radius of the ball in `k*` on which `Omega(e, nu)` stays nondegenerate.
    pub r_k: f64,
    /// Radius allotted to `rho` in `m*`.
    pub r_mstar: f64,
    /// Radius allotted to `J_V(v)` in `h*`.
    pub r_hstar: f64,
    /// Radius of the ball in `V`.
    pub r_v: f64,
    /// Smallest singular value of `Omega(e, 0)`.
    pub eps0: f64,
    /// Constant `C` with `|J_V(v)| <= C |v|^2`.
    pub momentum_bound: f64,
    /// A covector just beyond the certified ball where the singular-value test
    /// failed, when the bisection had to shrink below `r_max`.
    pub witness: Option<Vec<f64>>,
}

/// Covectors `nu` of dual norm `r` probed by the certification: the `±` axis
/// directions of the `k*` basis and seeded pseudo-random directions.
fn shell_directions(dim_k: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    if dim_k == 0 {
        return Vec::new();
    }
    let mut dirs = Vec::with_capacity(samples.max(2 * dim_k));
    for a in 0..dim_k {
        for sign in [1.0, -1.0] {
            let mut e = DVector::zeros(dim_k);
            e[a] = sign;
            dirs.push(e);
        }
    }
    while dirs.len() < samples.max(2 * dim_k) {
        let x = DVector::from_fn(dim_k, |_, _| rng.random_range(-1.0..1.0));
        let n = x.norm();
        if n > 1e-3 {
            dirs.push(x / n);
        }
    }
    dirs
}

/// Certifies radii for the tube by bisection on the dual-norm ball in `k*`.
///
/// A radius `r` passes when the matrix of `Omega(e, nu)` keeps its smallest
/// singular value above `eps0 / 2` on the shells `r/4, r/2, 3r/4, r`.
pub fn estimate_radii(model: &SliceModel) -> Result<Radii> {
    let tol = model.tolerances();
    let kd = model.dim_k();
    let kappa = model.dual_basis(model.k_basis());
    let sv_at = |c: &DVector<f64>| {
        let nu = DualVector(&kappa * c);
        linalg::smallest_singular_value(&model.tube_matrix(&nu))
    };
    let eps0 = sv_at(&DVector::zeros(kd));
    if eps0 <= tol.nondegeneracy {
        return Err(SliceError::DegenerateTubeForm(eps0));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(RADIUS_SEED);
    let dirs = shell_directions(kd, tol.radius_samples, &mut rng);
    let first_failure = |r: f64| -> Option<DVector<f64>> {
        for frac in [0.25, 0.5, 0.75, 1.0] {
            for d in &dirs {
                let c = d * (r * frac);
                if sv_at(&c) < 0.5 * eps0 {
                    return Some(c);
                }
            }
        }
        None
    };

    let (r, witness) = if kd == 0 || first_failure(tol.r_max).is_none() {
        (tol.r_max, None)
    } else {
        let (mut lo, mut hi) = (0.0, tol.r_max);
        for _ in 0..tol.radius_bisections {
            let mid = 0.5 * (lo + hi);
            if first_failure(mid).is_none() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = first_failure(hi).map(|c| (&kappa * c).iter().copied().collect());
        (lo, w)
    };
    if r <= 0.0 {
        return Err(SliceError::DegenerateTubeForm(eps0));
    }

    let omega_v = model.omega_v();
    let momentum_bound = 0.5
        * model
            .v_generators()
            .iter()
            .map(|g| linalg::largest_singular_value(&(g.transpose() * omega_v)).powi(2))
            .fold(0.0, |acc, x| acc + x)
            .sqrt();
    let (r_mstar, r_hstar) = if model.dim_m() == 0 {
        (0.0, r)
    } else if model.dim_h() == 0 || momentum_bound == 0.0 {
        (r, 0.0)
    } else {
        (r / 2f64.sqrt(), r / 2f64.sqrt())
    };
    let r_v = if momentum_bound == 0.0 {
        tol.r_max
    } else {
        (r_hstar / momentum_bound).sqrt()
    };
    Ok(Radii {
        r_k: r,
        r_mstar,
        r_hstar,
        r_v,
        eps0,
        momentum_bound,
        witness,
    })
}
