use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::field::vector_field;
use crate::dynamics::hamiltonian::InvariantHamiltonian;
use crate::dynamics::monitors::{chu_monitor, momentum_yr};
use crate::error::{Result, SliceError};
use crate::lie::{AlgebraVector, DualVector, LieAlgebraContext};
use crate::slice::{SliceModel, SliceState};
use crate::tubewise::CocycleTheta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeExitPolicy {
    #[default]
    Warn,
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Monitors are evaluated and stored every this many steps.
    pub monitor_every: usize,
    pub on_tube_exit: TubeExitPolicy,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 10.0,
            monitor_every: 10,
            on_tube_exit: TubeExitPolicy::Warn,
        }
    }
}

/// A stored point of a trajectory with its monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: SliceState,
    pub energy: f64,
    pub momentum: Option<DualVector>,
    /// Frobenius distance of the Chu map from its initial value.
    pub chu_deviation: f64,
    pub tau_cond: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// First time the state was seen outside the certified radii.
    pub tube_exit: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        self.samples.iter().map(|s| (s.energy - first.energy).abs()).fold(0.0, f64::max)
    }

    pub fn momentum_drift(&self) -> Option<f64> {
        let first = self.samples.first()?.momentum.as_ref()?;
        Some(
            self.samples
                .iter()
                .filter_map(|s| s.momentum.as_ref())
                .map(|m| (m - first).norm())
                .fold(0.0, f64::max),
        )
    }

    pub fn chu_drift(&self) -> f64 {
        self.samples.iter().map(|s| s.chu_deviation).fold(0.0, f64::max)
    }

    pub fn max_tau_cond(&self) -> f64 {
        self.samples.iter().map(|s| s.tau_cond).fold(0.0, f64::max)
    }
}

/// Optional momentum monitor: `theta` and the normalization `mu`.
#[derive(Clone, Copy)]
pub struct MomentumMonitor<'a> {
    pub theta: &'a CocycleTheta,
    pub mu: &'a DualVector,
}

/// Inverse of the left-trivialized exponential differential, truncated
/// after the terms needed for fourth order.
fn dexpinv(g: &LieAlgebraContext, theta: &AlgebraVector, xi: &AlgebraVector) -> AlgebraVector {
    let ad = g.ad_matrix(theta);
    let once = &ad * &xi.0;
    let twice = &ad * &once;
    AlgebraVector(&xi.0 + once * 0.5 + twice * (1.0 / 12.0))
}

struct Rate {
    xi: AlgebraVector,
    rho: DVector<f64>,
    v: DVector<f64>,
    cond: f64,
}

fn rate(model: &SliceModel, ham: &dyn InvariantHamiltonian, state: &SliceState) -> Result<Rate> {
    let f = vector_field(model, ham, state)?;
    Ok(Rate {
        xi: f.group_velocity(),
        rho: f.rho_dot,
        v: f.v_dot,
        cond: f.tau_cond,
    })
}

/// One Runge-Kutta-Munthe-Kaas step of order four. Returns the new state and
/// the largest condition number met by the tau solves.
pub fn rkmk4_step(
    model: &SliceModel,
    ham: &dyn InvariantHamiltonian,
    state: &SliceState,
    dt: f64,
) -> Result<(SliceState, f64)> {
    let g = model.algebra();
    let stage = |theta: &AlgebraVector, rho: DVector<f64>, v: DVector<f64>| SliceState {
        g: state.g.compose(&g.exp_map(theta)),
        rho,
        v,
    };
    let r1 = rate(model, ham, state)?;
    let k1 = &r1.xi * dt;

    let th2 = &k1 * 0.5;
    let y2 = stage(&th2, &state.rho + &r1.rho * (0.5 * dt), &state.v + &r1.v * (0.5 * dt));
    let r2 = rate(model, ham, &y2)?;
    let k2 = dexpinv(g, &th2, &r2.xi) * dt;

    let th3 = &k2 * 0.5;
    let y3 = stage(&th3, &state.rho + &r2.rho * (0.5 * dt), &state.v + &r2.v * (0.5 * dt));
    let r3 = rate(model, ham, &y3)?;
    let k3 = dexpinv(g, &th3, &r3.xi) * dt;

    let y4 = stage(&k3, &state.rho + &r3.rho * dt, &state.v + &r3.v * dt);
    let r4 = rate(model, ham, &y4)?;
    let k4 = dexpinv(g, &k3, &r4.xi) * dt;

    let theta = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (1.0 / 6.0);
    let rho = &state.rho + (&r1.rho + &r2.rho * 2.0 + &r3.rho * 2.0 + &r4.rho) * (dt / 6.0);
    let v = &state.v + (&r1.v + &r2.v * 2.0 + &r3.v * 2.0 + &r4.v) * (dt / 6.0);
    let cond = r1.cond.max(r2.cond).max(r3.cond).max(r4.cond);
    Ok((
        SliceState {
            g: state.g.compose(&g.exp_map(&theta)),
            rho,
            v,
        },
        cond,
    ))
}

fn sample(
    model: &SliceModel,
    ham: &dyn InvariantHamiltonian,
    momentum: Option<MomentumMonitor<'_>>,
    chu0: &DMatrix<f64>,
    t: f64,
    state: &SliceState,
    tau_cond: f64,
) -> Result<TrajectorySample> {
    let chu = chu_monitor(model, state)?;
    let momentum = match momentum {
        Some(m) => Some(momentum_yr(model, m.theta, m.mu, state)?),
        None => None,
    };
    Ok(TrajectorySample {
        t,
        state: state.clone(),
        energy: ham.value(&state.rho, &state.v),
        momentum,
        chu_deviation: (chu - chu0).norm(),
        tau_cond,
    })
}

/// Integrates the reconstruction equations with a fixed step.
pub fn integrate(
    model: &SliceModel,
    ham: &dyn InvariantHamiltonian,
    state0: &SliceState,
    opts: &IntegratorOptions,
    momentum: Option<MomentumMonitor<'_>>,
) -> Result<Trajectory> {
    if opts.dt.is_nan() || opts.dt <= 0.0 || opts.t_end.is_nan() || opts.t_end < 0.0 {
        return Err(SliceError::InvalidArgument("dt must be positive and t_end nonnegative".into()));
    }
    let steps = (opts.t_end / opts.dt).round() as usize;
    let every = opts.monitor_every.max(1);
    let chu0 = chu_monitor(model, state0)?;
    let first_cond = vector_field(model, ham, state0)?.tau_cond;
    let mut traj = Trajectory::default();
    traj.samples.push(sample(model, ham, momentum, &chu0, 0.0, state0, first_cond)?);
    let mut state = state0.clone();
    let mut cond_window: f64 = first_cond;
    let radii = model.radii();
    for n in 1..=steps {
        let (next, cond) = rkmk4_step(model, ham, &state, opts.dt)?;
        state = next;
        cond_window = cond_window.max(cond);
        let t = n as f64 * opts.dt;
        if traj.tube_exit.is_none() && !model.in_tube(&state) {
            traj.tube_exit = Some(t);
            let (rho_norm, v_norm) = (model.rho_norm(&state), state.v.norm());
            match opts.on_tube_exit {
                TubeExitPolicy::Warn => warn!(
                    "state left the certified tube at t = {t}: |rho| = {rho_norm:.4e} (r = {:.4e}), |v| = {v_norm:.4e} (r = {:.4e})",
                    radii.r_mstar, radii.r_v
                ),
                TubeExitPolicy::Stop => {
                    return Err(SliceError::TubeExit {
                        t,
                        rho_norm,
                        r_mstar: radii.r_mstar,
                        v_norm,
                        r_v: radii.r_v,
                    })
                }
            }
        }
        if n % every == 0 || n == steps {
            traj.samples.push(sample(model, ham, momentum, &chu0, t, &state, cond_window)?);
            cond_window = 0.0;
        }
    }
    Ok(traj)
}
