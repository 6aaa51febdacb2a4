//! Numerical thresholds used across the crate.
//!
//! Every threshold lives in [`Tolerances`]; scenario configs may override any
//! field and omitted fields fall back to the defaults below.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular-value cutoff for every rank / null-space decision.
    pub rank_cutoff: f64,
    /// Jacobi identity and structure-constant agreement (relative).
    pub jacobi: f64,
    /// Residual when expanding `g E_i g^-1` back into the basis.
    pub adjoint_expansion: f64,
    /// Ad_H-invariance of the inner product and of the splittings.
    pub ad_invariance: f64,
    /// `A zeta = 0` for isotropy generators.
    pub isotropy_kills: f64,
    /// Symplecticity / equivariance of the sampled isotropy action.
    pub sample_action: f64,
    /// Components of nu outside k* tolerated by `omega_tube`.
    pub annihilator: f64,
    /// Smallest admissible singular value of a symplectic form.
    pub nondegeneracy: f64,
    /// Condition number above which the tau equation counts as singular.
    pub tau_condition: f64,
    /// H-invariance of Hamiltonians.
    pub hamiltonian_invariance: f64,
    /// Analytic gradient against central differences.
    pub gradient_check: f64,
    /// Loop periods below this norm count as vanishing.
    pub period: f64,
    /// Quadrature step (in loop parameter) for path integrals of gamma.
    pub quadrature_step: f64,
    /// Upper end of the radius bisection.
    pub r_max: f64,
    /// Directions sampled per sphere in the radius certification.
    pub radius_samples: usize,
    /// Bisection iterations in the radius certification.
    pub radius_bisections: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_cutoff: 1e-9,
            jacobi: 1e-10,
            adjoint_expansion: 1e-8,
            ad_invariance: 1e-8,
            isotropy_kills: 1e-10,
            sample_action: 1e-8,
            annihilator: 1e-10,
            nondegeneracy: 1e-10,
            tau_condition: 1e12,
            hamiltonian_invariance: 1e-8,
            gradient_check: 1e-6,
            period: 1e-6,
            quadrature_step: 1e-3,
            r_max: 10.0,
            radius_samples: 64,
            radius_bisections: 40,
        }
    }
}
