//! Reconstruction equations on `G x m* x V` and their integration.

mod field;
mod hamiltonian;
mod integrator;
mod monitors;

pub use field::{
    dh_apply, hamiltonian_consistency, hamiltonian_differential, psi_map, solve_tau, tau_operator,
    vector_field, FieldComponents, TauSolution,
};
pub use hamiltonian::{
    finite_difference_gradient, gradient, gradient_residual, invariance_residual, FnHamiltonian,
    InvariantHamiltonian, Monomial, Oscillator, Polynomial, ZeroHamiltonian,
};
pub use integrator::{
    integrate, rkmk4_step, IntegratorOptions, MomentumMonitor, Trajectory, TrajectorySample,
    TubeExitPolicy,
};
pub use monitors::{chu_monitor, g_generator, gmap_abelian, momentum_cocycle, momentum_yr};
