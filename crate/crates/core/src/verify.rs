//! Invariant checks run by `slicekit verify` over one or more scenarios.

use std::thread;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dh_apply, hamiltonian_consistency, IntegratorOptions};
use crate::error::Result;
use crate::lie::AlgebraVector;
use crate::linalg;
use crate::scenario::Scenario;
use crate::slice::{SliceModel, SliceState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn bound(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= tolerance,
            value: Some(value),
            tolerance: Some(tolerance),
            detail: String::new(),
        }
    }

    fn flag(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, value: None, tolerance: None, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Set when the suite could not run to completion.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub scenarios: Vec<ScenarioReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Number of random slice states probed per scenario.
    pub states: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { dt: 1e-3, t_end: 1.0, states: 20, seed: 7 }
    }
}

/// Seeded random states well inside the tube: `g = exp(x)` with `|x| <= 1`,
/// `|rho|` and `|v|` at most half their radii (and at most 0.5).
pub fn sample_states(model: &SliceModel, count: usize, seed: u64) -> Vec<SliceState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ball = |dim: usize, radius: f64| {
        let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = x.norm();
        let r = radius * rng.random_range(0.0..1.0);
        if n > 0.0 { x * (r / n) } else { x }
    };
    let r = model.radii();
    (0..count)
        .map(|_| {
            let x = ball(model.dim_g(), 1.0);
            let rho = ball(model.dim_m(), (0.5 * r.r_mstar).min(0.5));
            let v = ball(model.dim_v(), (0.5 * r.r_v).min(0.5));
            SliceState::new(model.algebra().exp_map(&AlgebraVector(x)), rho, v)
        })
        .collect()
}

/// Largest `|K(l(s))|` over the states.
pub fn k_after_l(model: &SliceModel, states: &[SliceState]) -> f64 {
    states
        .iter()
        .map(|s| {
            let (_, eta, v) = model.embed_l(s);
            model.k_map(&eta, &v).amax()
        })
        .fold(0.0, f64::max)
}

/// States at which the pulled-back form does not have the expected rank, and
/// the largest amount by which H-orbit directions fail to lie in its kernel.
pub fn reduced_form_defects(model: &SliceModel, states: &[SliceState]) -> Result<(Vec<usize>, f64)> {
    let tol = model.tolerances();
    let mut bad = Vec::new();
    let mut kernel_leak: f64 = 0.0;
    for (i, s) in states.iter().enumerate() {
        let w = model.reduced_form_matrix(s)?;
        if linalg::rank(&w, tol.rank_cutoff, 1.0) != model.reduced_rank() {
            bad.push(i);
        }
        for a in 0..model.dim_h() {
            let mut zeta = DVector::zeros(model.dim_h());
            zeta[a] = 1.0;
            let dir = model.h_orbit_direction(s, &zeta)?.to_vector();
            kernel_leak = kernel_leak.max((&w * dir).amax());
        }
    }
    Ok((bad, kernel_leak))
}

fn run_checks(sc: &Scenario, opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let model = sc.build_model()?;
    let tol = model.tolerances().clone();
    checks.push(Check::bound("sigma cocycle identity", model.sigma_cocycle_residual(), 1e-9));
    checks.push(Check::bound("k is a subalgebra", model.k_subalgebra_residual(), 1e-9));
    checks.push(Check::bound("h inside k", model.h_in_k_residual(), 1e-10));

    let r = model.radii();
    let radii_ok = r.r_k > 0.0 && (model.dim_m() == 0 || r.r_mstar > 0.0) && (model.dim_v() == 0 || r.r_v > 0.0);
    checks.push(Check::flag(
        "positive tube radii",
        radii_ok,
        format!("r_k = {:.4e}, r_mstar = {:.4e}, r_v = {:.4e}", r.r_k, r.r_mstar, r.r_v),
    ));

    let states = sample_states(&model, opts.states, opts.seed);
    checks.push(Check::bound("K vanishes on the image of l", k_after_l(&model, &states), 1e-10));
    let (bad_rank, leak) = reduced_form_defects(&model, &states)?;
    checks.push(Check::flag(
        "reduced form has the expected rank",
        bad_rank.is_empty(),
        format!("expected rank {}; failing states {bad_rank:?}", model.reduced_rank()),
    ));
    checks.push(Check::bound("H-orbit directions are null", leak, 1e-8));

    checks.push(match sc.check_hamiltonian(&model) {
        Ok(()) => Check::flag("Hamiltonian fits the model", true, String::new()),
        Err(e) => Check::flag("Hamiltonian fits the model", false, e.to_string()),
    });
    let ham = sc.hamiltonian();
    let mut consistency: f64 = 0.0;
    for s in &states {
        let dh = |w: &_| dh_apply(ham.as_ref(), s, w);
        consistency = consistency.max(hamiltonian_consistency(&model, ham.as_ref(), s, &dh)?);
    }
    checks.push(Check::bound("vector field is Hamiltonian", consistency, tol.hamiltonian_invariance));

    let verdict = sc.verdict(&model)?;
    let misses = sc.check_expectations(&model, &verdict);
    checks.push(Check::flag(
        "scenario expectations",
        misses.is_empty(),
        if misses.is_empty() { format!("verdict {}", verdict.label()) } else { misses.join("; ") },
    ));

    let theta = sc.theta(&model, &verdict)?;
    let iopts = IntegratorOptions { dt: opts.dt, t_end: opts.t_end, ..sc.config.integrator.clone() };
    let traj = sc.simulate(&model, &iopts, theta.as_ref())?;
    checks.push(Check::bound("energy drift", traj.energy_drift(), 1e-8));
    checks.push(Check::bound("Chu map drift", traj.chu_drift(), 1e-6));
    if let Some(drift) = traj.momentum_drift() {
        checks.push(Check::bound("momentum drift", drift, 1e-6));
    }
    checks.push(Check::flag(
        "trajectory stays in the tube",
        traj.tube_exit.is_none(),
        traj.tube_exit.map(|t| format!("left at t = {t}")).unwrap_or_default(),
    ));
    Ok(())
}

/// Runs every check on one scenario. Errors become a failed report.
pub fn verify_scenario(sc: &Scenario, opts: &VerifyOptions) -> ScenarioReport {
    let mut checks = Vec::new();
    let error = run_checks(sc, opts, &mut checks).err().map(|e| e.to_string());
    ScenarioReport {
        scenario: sc.name().to_string(),
        passed: error.is_none() && checks.iter().all(|c| c.passed),
        checks,
        error,
    }
}

/// Verifies the scenarios concurrently; reports keep the input order.
pub fn verify_all(scenarios: &[Scenario], opts: &VerifyOptions) -> VerifyReport {
    let reports: Vec<ScenarioReport> = thread::scope(|s| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|sc| s.spawn(move || verify_scenario(sc, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    VerifyReport { passed: reports.iter().all(|r| r.passed), scenarios: reports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, builtin_names};

    #[test]
    fn sampled_states_are_seeded_and_inside() {
        let sc = Scenario::from_config(builtin("torus2-oscillator").unwrap()).unwrap();
        let m = sc.build_model().unwrap();
        let a = sample_states(&m, 5, 3);
        assert_eq!(a, sample_states(&m, 5, 3));
        assert!(a.iter().all(|s| m.in_tube(s)));
    }

    #[test]
    fn builtins_verify() {
        let scenarios: Vec<Scenario> = builtin_names()
            .iter()
            .map(|n| Scenario::from_config(builtin(n).unwrap()).unwrap())
            .collect();
        let opts = VerifyOptions { t_end: 0.2, states: 5, ..Default::default() };
        let report = verify_all(&scenarios, &opts);
        for r in &report.scenarios {
            let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
            assert!(r.passed, "{}: {:?} {failed:?}", r.scenario, r.error);
        }
        assert_eq!(report.scenarios.len(), scenarios.len());
        assert_eq!(report.scenarios[0].scenario, "torus2");
    }
}
