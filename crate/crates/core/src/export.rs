//! JSON summaries and CSV trajectories. Matrices are written as row-major
//! nested arrays; bases as lists of coordinate columns.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Result, SliceError};
use crate::lie::LieAlgebraContext;
use crate::scenario::{columns_of, from_dmatrix, MatrixRows};
use crate::slice::SliceModel;
use crate::tubewise::{solve_theta, CocycleTheta, Corollary, LoopSpec, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub g: usize,
    pub k: usize,
    pub h: usize,
    pub m: usize,
    pub q: usize,
    pub v: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiSummary {
    pub r_k: f64,
    pub r_mstar: f64,
    pub r_hstar: f64,
    pub r_v: f64,
    pub eps0: f64,
    pub momentum_bound: f64,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResiduals {
    pub sigma_cocycle: f64,
    pub k_subalgebra: f64,
    pub h_in_k: f64,
}

/// Everything `build-slice` reports about a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub scenario: String,
    pub dims: Dimensions,
    pub sigma: MatrixRows,
    pub k_basis: Vec<Vec<f64>>,
    pub h_basis: Vec<Vec<f64>>,
    pub m_basis: Vec<Vec<f64>>,
    pub q_basis: Vec<Vec<f64>>,
    pub omega_v: MatrixRows,
    pub radii: RadiiSummary,
    pub residuals: ModelResiduals,
    pub reduced_rank: usize,
}

impl ModelSummary {
    pub fn new(name: &str, model: &SliceModel) -> Self {
        let r = model.radii();
        ModelSummary {
            scenario: name.to_string(),
            dims: Dimensions {
                g: model.dim_g(),
                k: model.dim_k(),
                h: model.dim_h(),
                m: model.dim_m(),
                q: model.dim_q(),
                v: model.dim_v(),
            },
            sigma: from_dmatrix(model.sigma()),
            k_basis: columns_of(model.k_basis()),
            h_basis: columns_of(model.h_basis()),
            m_basis: columns_of(model.m_basis()),
            q_basis: columns_of(model.q_basis()),
            omega_v: from_dmatrix(model.omega_v()),
            radii: RadiiSummary {
                r_k: r.r_k,
                r_mstar: r.r_mstar,
                r_hstar: r.r_hstar,
                r_v: r.r_v,
                eps0: r.eps0,
                momentum_bound: r.momentum_bound,
                witness: r.witness.clone(),
            },
            residuals: ModelResiduals {
                sigma_cocycle: model.sigma_cocycle_residual(),
                k_subalgebra: model.k_subalgebra_residual(),
                h_in_k: model.h_in_k_residual(),
            },
            reduced_rank: model.reduced_rank(),
        }
    }
}

/// Drift and conditioning figures of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub scenario: String,
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub energy_initial: f64,
    pub energy_drift: f64,
    pub momentum_drift: Option<f64>,
    pub chu_drift: f64,
    pub max_tau_cond: f64,
    pub tube_exit: Option<f64>,
    /// `|g^T g - I|` at the final time, for groups of orthogonal matrices.
    pub orthogonality_defect: Option<f64>,
    pub final_g: MatrixRows,
    pub final_rho: Vec<f64>,
    pub final_v: Vec<f64>,
}

fn all_skew(g: &LieAlgebraContext) -> bool {
    g.basis_matrices()
        .iter()
        .all(|e| (e + e.transpose()).amax() <= 1e-14 * e.amax().max(1.0))
}

impl SimulationSummary {
    pub fn new(name: &str, model: &SliceModel, traj: &Trajectory, dt: f64, t_end: f64) -> Self {
        let first = traj.samples.first();
        let last = traj.last();
        let final_g = last.map(|s| s.state.g.matrix().clone());
        let orthogonality_defect = match &final_g {
            Some(g) if all_skew(model.algebra()) => {
                Some((g.transpose() * g - DMatrix::identity(g.nrows(), g.ncols())).norm())
            }
            _ => None,
        };
        SimulationSummary {
            scenario: name.to_string(),
            dt,
            t_end,
            samples: traj.samples.len(),
            energy_initial: first.map_or(0.0, |s| s.energy),
            energy_drift: traj.energy_drift(),
            momentum_drift: traj.momentum_drift(),
            chu_drift: traj.chu_drift(),
            max_tau_cond: traj.max_tau_cond(),
            tube_exit: traj.tube_exit,
            orthogonality_defect,
            final_g: final_g.as_ref().map(from_dmatrix).unwrap_or_default(),
            final_rho: last.map(|s| s.state.rho.iter().copied().collect()).unwrap_or_default(),
            final_v: last.map(|s| s.state.v.iter().copied().collect()).unwrap_or_default(),
        }
    }
}

/// The tubewise verdict with its witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub scenario: String,
    pub verdict: String,
    /// Index of the first loop with a nonzero period (verdict `no`).
    pub obstructing_loop: Option<usize>,
    pub obstruction_period: Option<Vec<f64>>,
    /// Period of every declared loop, when the loops were integrated.
    pub periods: Vec<Vec<f64>>,
    pub reason: Option<String>,
    pub log: Vec<String>,
}

impl VerdictReport {
    pub fn new(name: &str, model: &SliceModel, verdict: &Verdict, loops: &[LoopSpec]) -> Result<Self> {
        let mut report = VerdictReport {
            scenario: name.to_string(),
            verdict: verdict.label().to_string(),
            obstructing_loop: None,
            obstruction_period: None,
            periods: Vec::new(),
            reason: None,
            log: Vec::new(),
        };
        let theta = match verdict {
            Verdict::Yes(theta) => Some(CocycleTheta::clone(theta)),
            Verdict::No { loop_index, period } => {
                report.obstructing_loop = Some(*loop_index);
                report.obstruction_period = Some(period.to_vec());
                Some(solve_theta(model, loops)?)
            }
            Verdict::YesByCorollary(c) => {
                report.reason = Some(match c {
                    Corollary::TrivialCohomology => "first cohomology of G vanishes".into(),
                    Corollary::IsotropicOrbit => "the orbit is isotropic (Sigma = 0)".into(),
                });
                None
            }
            Verdict::Inconclusive(why) => {
                report.reason = Some(why.clone());
                None
            }
        };
        if let Some(theta) = theta {
            report.periods = theta.periods().iter().map(|p| p.to_vec()).collect();
            report.log = theta.log().to_vec();
        }
        Ok(report)
    }
}

/// CSV header for a trajectory: `t`, `g_ij` row-major, `rho_a`, `v_a`,
/// `energy`, `J_i` (when monitored), `chu_dev`, `tau_cond`.
pub fn trajectory_header(model: &SliceModel, with_momentum: bool) -> Vec<String> {
    let n = model.algebra().matrix_size();
    let mut h = vec!["t".to_string()];
    for i in 0..n {
        for j in 0..n {
            h.push(format!("g_{i}_{j}"));
        }
    }
    h.extend((0..model.dim_m()).map(|a| format!("rho_{a}")));
    h.extend((0..model.dim_v()).map(|a| format!("v_{a}")));
    h.push("energy".into());
    if with_momentum {
        h.extend((0..model.dim_g()).map(|i| format!("J_{i}")));
    }
    h.push("chu_dev".into());
    h.push("tau_cond".into());
    h
}

fn csv_err(e: csv::Error) -> SliceError {
    SliceError::InvalidArgument(format!("writing CSV: {e}"))
}

/// Writes the trajectory as CSV.
pub fn write_trajectory_csv<W: Write>(out: W, model: &SliceModel, traj: &Trajectory) -> Result<()> {
    let with_momentum = traj.samples.first().is_some_and(|s| s.momentum.is_some());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(model, with_momentum)).map_err(csv_err)?;
    for s in &traj.samples {
        let g = s.state.g.matrix();
        let mut row = vec![s.t];
        for i in 0..g.nrows() {
            row.extend(g.row(i).iter());
        }
        row.extend(s.state.rho.iter());
        row.extend(s.state.v.iter());
        row.push(s.energy);
        if let Some(m) = &s.momentum {
            row.extend(m.0.iter());
        }
        row.push(s.chu_deviation);
        row.push(s.tau_cond);
        w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| SliceError::InvalidArgument(format!("writing CSV: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    std::fs::write(path, to_json(value))
}
