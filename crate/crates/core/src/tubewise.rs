//! Tubewise-Hamiltonian diagnostics: the `g*`-valued one-form `gamma`, its
//! loop periods, the group one-cocycle `theta` with `T_e theta = Sigma_flat`,
//! and the momentum map `J_theta` on `G x k*`.
//!
//! Conventions: `gamma(g)(g eta) = Ad_{g^-1}^T Sigma_flat(eta)` with
//! `Sigma_flat(eta) = Sigma(eta, .)`, and
//! `theta(exp x) = int_0^1 exp(-t ad_x)^T Sigma_flat(x) dt`.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SliceError};
use crate::lie::{AlgebraVector, DualVector, GroupElement, LieAlgebraContext};
use crate::slice::SliceModel;

/// One piece `t -> c(t0) exp((t - t0) x)` of a piecewise exponential loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSegment {
    pub algebra_vector: Vec<f64>,
    pub t_range: [f64; 2],
}

pub type LoopSpec = Vec<LoopSegment>;

/// `Sigma(xi, .)`.
pub fn sigma_flat(model: &SliceModel, xi: &AlgebraVector) -> DualVector {
    model.sigma_flat(xi)
}

/// `gamma(g)` applied to the left-translated vector `g eta`.
pub fn gamma_eval(model: &SliceModel, g: &GroupElement, eta: &AlgebraVector) -> Result<DualVector> {
    let ad_inv = model.algebra().adjoint(&g.inverse()?)?;
    Ok(ad_inv.dual_apply(&model.sigma_flat(eta)))
}

/// `int_0^s exp(-t ad_x)^T dt * b` by composite Simpson with `n` (even)
/// panels, using repeated multiplication by the one-step propagator.
fn simpson_propagated(ad_x: &DMatrix<f64>, b: &DVector<f64>, s: f64, n: usize) -> DVector<f64> {
    let h = s / n as f64;
    let step = (-(ad_x * h)).exp().transpose();
    let mut y = b.clone();
    let mut acc = b.clone();
    for i in 1..=n {
        y = &step * &y;
        let w = if i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += &y * w;
    }
    acc * (h / 3.0)
}

/// Integral with a Richardson error estimate from halving the panel count.
fn integrate_segment(ad_x: &DMatrix<f64>, b: &DVector<f64>, s: f64, step: f64) -> (DVector<f64>, f64) {
    let mut n = ((s.abs() / step).ceil() as usize).max(4);
    if !n.is_multiple_of(4) {
        n += 4 - n % 4;
    }
    let fine = simpson_propagated(ad_x, b, s, n);
    let coarse = simpson_propagated(ad_x, b, s, n / 2);
    let err = (&fine - &coarse).amax() / 15.0;
    (fine, err)
}

/// Period of `gamma` around a piecewise exponential loop and the largest
/// Richardson error estimate of its pieces.
pub fn loop_period(model: &SliceModel, spec: &[LoopSegment], step: f64) -> Result<(DualVector, f64)> {
    period_with(model.algebra(), model.sigma(), spec, step)
}

fn period_with(
    g: &LieAlgebraContext,
    sigma: &DMatrix<f64>,
    spec: &[LoopSegment],
    step: f64,
) -> Result<(DualVector, f64)> {
    let d = g.dim();
    if spec.is_empty() {
        return Err(SliceError::InvalidLoop("loop has no segments".into()));
    }
    let mut c = GroupElement::identity(g.matrix_size());
    let mut total = DVector::zeros(d);
    let mut err: f64 = 0.0;
    for seg in spec {
        if seg.algebra_vector.len() != d {
            return Err(SliceError::DimensionMismatch {
                context: "loop segment",
                expected: d,
                got: seg.algebra_vector.len(),
            });
        }
        let x = AlgebraVector::from_slice(&seg.algebra_vector);
        let s = seg.t_range[1] - seg.t_range[0];
        if s.is_nan() || s <= 0.0 {
            return Err(SliceError::InvalidLoop("segment t_range must be increasing".into()));
        }
        let ad_x = g.ad_matrix(&x);
        let b = sigma.tr_mul(&x.0);
        let (piece, e) = integrate_segment(&ad_x, &b, s, step);
        let ad_c_inv = g.adjoint(&c.inverse()?)?;
        total += ad_c_inv.0.tr_mul(&piece);
        err = err.max(e);
        c = c.compose(&g.exp_map(&(&x * s)));
    }
    let closure = (c.matrix() - DMatrix::identity(c.size(), c.size())).amax();
    if closure > 1e-8 {
        return Err(SliceError::InvalidLoop(format!(
            "path does not return to the identity (residual {closure:.3e})"
        )));
    }
    Ok((DualVector(total), err))
}

/// Whether `theta` exists and, if not, which declared loop obstructs it.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaStatus {
    Exists,
    Obstructed { loop_index: usize, period: DualVector },
}

/// The group one-cocycle `theta` (or the obstruction to it).
#[derive(Debug)]
pub struct CocycleTheta {
    algebra: LieAlgebraContext,
    sigma: DMatrix<f64>,
    step: f64,
    status: ThetaStatus,
    periods: Vec<DualVector>,
    log: Vec<String>,
    cache: Mutex<HashMap<Vec<i64>, DualVector>>,
}

impl Clone for CocycleTheta {
    fn clone(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            sigma: self.sigma.clone(),
            step: self.step,
            status: self.status.clone(),
            periods: self.periods.clone(),
            log: self.log.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

fn cache_key(g: &GroupElement) -> Vec<i64> {
    g.matrix().iter().map(|x| (x * 1e12).round() as i64).collect()
}

impl CocycleTheta {
    pub fn status(&self) -> &ThetaStatus {
        &self.status
    }

    pub fn exists(&self) -> bool {
        self.status == ThetaStatus::Exists
    }

    /// Periods of the declared loops, in order.
    pub fn periods(&self) -> &[DualVector] {
        &self.periods
    }

    /// Construction notes: loops checked, quadrature errors.
    pub fn log(&self) -> &[String] {
        &self.log
    }

    pub fn is_identically_zero(&self) -> bool {
        self.sigma.iter().all(|&s| s == 0.0)
    }

    /// `theta(exp x)` by integrating `gamma` along `t -> exp(t x)`.
    pub fn eval_exp(&self, x: &AlgebraVector) -> DualVector {
        let b = self.sigma.tr_mul(&x.0);
        let (val, _) = integrate_segment(&self.algebra.ad_matrix(x), &b, 1.0, self.step);
        DualVector(val)
    }

    /// `theta(g)` along the canonical path `exp(t log g)`.
    pub fn eval(&self, g: &GroupElement) -> Result<DualVector> {
        if !self.exists() {
            return Err(SliceError::ThetaUnavailable("a declared loop has a nonzero period".into()));
        }
        let d = self.algebra.dim();
        if self.is_identically_zero() {
            return Ok(DualVector::zeros(d));
        }
        let key = cache_key(g);
        if let Some(hit) = self.cache.lock().expect("theta cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let x = self.algebra.log_map(g)?;
        let val = self.eval_exp(&x);
        self.cache
            .lock()
            .expect("theta cache poisoned")
            .insert(key, val.clone());
        Ok(val)
    }
}

/// Checks the declared loops and returns `theta` or the obstruction.
pub fn solve_theta(model: &SliceModel, loops: &[LoopSpec]) -> Result<CocycleTheta> {
    let tol = model.tolerances();
    let mut log = Vec::new();
    let mut periods = Vec::with_capacity(loops.len());
    let mut status = ThetaStatus::Exists;
    for (i, spec) in loops.iter().enumerate() {
        let (period, err) = loop_period(model, spec, tol.quadrature_step)?;
        log.push(format!(
            "loop {i}: |period| = {:.6e}, quadrature error estimate {err:.2e}",
            period.norm()
        ));
        if period.norm() > tol.period && status == ThetaStatus::Exists {
            status = ThetaStatus::Obstructed { loop_index: i, period: period.clone() };
        }
        periods.push(period);
    }
    if loops.is_empty() {
        log.push("no loops declared: group treated as simply connected".into());
    }
    Ok(CocycleTheta {
        algebra: model.algebra().clone(),
        sigma: model.sigma().clone(),
        step: tol.quadrature_step,
        status,
        periods,
        log,
        cache: Mutex::new(HashMap::new()),
    })
}

/// `J_theta(g, nu) = Ad*_{g^-1} nu - theta(g)`.
pub fn j_theta(model: &SliceModel, theta: &CocycleTheta, g: &GroupElement, nu: &DualVector) -> Result<DualVector> {
    Ok(model.algebra().coadjoint(g, nu)? - theta.eval(g)?)
}

/// Which shortcut established the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corollary {
    /// `H^1(G) = 0`.
    #[serde(rename = "i")]
    TrivialCohomology,
    /// The orbit is isotropic (`Sigma = 0`).
    #[serde(rename = "ii")]
    IsotropicOrbit,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Yes(Box<CocycleTheta>),
    YesByCorollary(Corollary),
    No { loop_index: usize, period: DualVector },
    Inconclusive(String),
}

impl Verdict {
    /// Short label: `yes`, `yes-by-corollary(i)`, `yes-by-corollary(ii)`,
    /// `no` or `inconclusive`.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::YesByCorollary(Corollary::TrivialCohomology) => "yes-by-corollary(i)",
            Verdict::YesByCorollary(Corollary::IsotropicOrbit) => "yes-by-corollary(ii)",
            Verdict::No { .. } => "no",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_) | Verdict::YesByCorollary(_))
    }
}

/// User declarations about the topology of `G`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubewiseFlags {
    pub h1_trivial: bool,
    /// The declared loops generate the fundamental group (an empty list then
    /// means `G` is simply connected).
    pub loops_generate: bool,
}

/// Decides whether the action is tubewise Hamiltonian at the anchor.
pub fn check_tubewise(model: &SliceModel, flags: &TubewiseFlags, loops: &[LoopSpec]) -> Result<Verdict> {
    let scale = model.anchor().generator.amax().powi(2) * model.anchor().omega.matrix().amax();
    if model.sigma().amax() <= 64.0 * f64::EPSILON * scale.max(1.0) {
        return Ok(Verdict::YesByCorollary(Corollary::IsotropicOrbit));
    }
    if flags.h1_trivial {
        return Ok(Verdict::YesByCorollary(Corollary::TrivialCohomology));
    }
    if !flags.loops_generate {
        return Ok(Verdict::Inconclusive(
            "declared loops are not known to generate the fundamental group".into(),
        ));
    }
    let theta = solve_theta(model, loops)?;
    Ok(match theta.status().clone() {
        ThetaStatus::Exists => Verdict::Yes(Box::new(theta)),
        ThetaStatus::Obstructed { loop_index, period } => Verdict::No { loop_index, period },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exponential() {
        // int_0^1 exp(-t a)^T b dt for a = [[0, -1], [1, 0]] (a rotation generator).
        let a = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let (val, err) = integrate_segment(&a, &b, 1.0, 1e-3);
        // exp(-t a)^T = exp(t a) rotates by +t: integral of (cos t, sin t).
        let exact = DVector::from_vec(vec![1f64.sin(), 1.0 - 1f64.cos()]);
        assert!((val - exact).amax() < 1e-13);
        assert!(err < 1e-12);
    }
}
