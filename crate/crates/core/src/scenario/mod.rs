//! Scenario configuration, built-in example actions and loading.

mod builtins;
mod config;

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

pub use builtins::{builtin, builtin_names, builtins};
pub use config::{
    AlgebraConfig, AnchorConfig, Expectations, GroupSpec, HSampleConfig, HamiltonianConfig,
    InitialStateConfig, MatrixRows, OutputConfig, ScenarioConfig, TubewiseConfig,
};
pub(crate) use config::{columns_of, from_dmatrix};

use crate::dynamics::{
    gradient_residual, integrate, invariance_residual, IntegratorOptions, InvariantHamiltonian, MomentumMonitor,
    Trajectory,
};
use crate::error::SliceError;
use crate::lie::{AlgebraVector, DualVector, GroupElement, LieAlgebraContext};
use crate::slice::{AnchorData, IsotropySample, SliceModel, SliceState};
use crate::symplectic::SymplecticForm;
use crate::tubewise::{check_tubewise, solve_theta, CocycleTheta, TubewiseFlags, Verdict};

/// Failure to turn a config into a validated scenario.
#[derive(Debug)]
pub enum ConfigError {
    Io(String, std::io::Error),
    Parse(serde_json::Error),
    /// One message per violated schema rule.
    Schema(Vec<String>),
    /// An anchor invariant failed at load.
    Anchor(SliceError),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(path, e) => write!(f, "cannot read {path}: {e}"),
            ConfigError::Parse(e) => write!(f, "invalid config JSON: {e}"),
            ConfigError::Schema(errs) => {
                write!(f, "config schema errors:")?;
                for e in errs {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
            ConfigError::Anchor(e) => write!(f, "anchor data rejected: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validated scenario: parsed config plus the anchor data it describes.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub anchor: AnchorData,
}

/// Loads a scenario from a JSON file, or from a built-in name when no file
/// exists at `path_or_name`.
pub fn load_config(path_or_name: &str) -> Result<Scenario, ConfigError> {
    let path = Path::new(path_or_name);
    if !path.exists() {
        if let Some(cfg) = builtin(path_or_name) {
            return Scenario::from_config(cfg);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path_or_name.to_string(), e))?;
    parse_config(&text)
}

/// Parses and validates a JSON config.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(ConfigError::Parse)?;
    Scenario::from_config(cfg)
}

fn matrix(errs: &mut Vec<String>, what: &str, rows: &MatrixRows) -> DMatrix<f64> {
    match config::to_dmatrix(rows) {
        Ok(m) => m,
        Err(e) => {
            errs.push(format!("{what}: {e}"));
            DMatrix::zeros(0, 0)
        }
    }
}

fn build_algebra(cfg: &AlgebraConfig, jacobi: f64, errs: &mut Vec<String>) -> Option<LieAlgebraContext> {
    let basis: Option<Vec<DMatrix<f64>>> = cfg.basis_matrices.as_ref().map(|bs| {
        bs.iter()
            .enumerate()
            .map(|(i, b)| matrix(errs, &format!("algebra.basis_matrices[{i}]"), b))
            .collect()
    });
    let dim = match (&basis, &cfg.structure_constants) {
        (Some(b), _) => b.len(),
        (None, Some(c)) => c.len(),
        (None, None) => {
            errs.push("algebra: provide basis_matrices or structure_constants".into());
            return None;
        }
    };
    if let Some(d) = cfg.dim {
        if d != dim {
            errs.push(format!("algebra.dim is {d} but the basis has {dim} elements"));
        }
    }
    let ip = match &cfg.inner_product {
        Some(rows) => matrix(errs, "algebra.inner_product", rows),
        None => DMatrix::identity(dim, dim),
    };
    if ip.nrows() != dim || ip.ncols() != dim {
        errs.push(format!("algebra.inner_product must be {dim} x {dim}"));
    }
    if !errs.is_empty() {
        return None;
    }
    let built = match (basis, &cfg.structure_constants) {
        (Some(b), Some(c)) => LieAlgebraContext::with_basis_and_constants(b, c, ip, jacobi),
        (Some(b), None) => LieAlgebraContext::from_basis_matrices(b, ip, jacobi),
        (None, Some(c)) => LieAlgebraContext::from_structure_constants(c, ip, jacobi),
        (None, None) => unreachable!(),
    };
    match built {
        Ok(g) => Some(g),
        Err(e) => {
            errs.push(format!("algebra: {e}"));
            None
        }
    }
}

fn group_element(
    g: &LieAlgebraContext,
    spec: &GroupSpec,
    what: &str,
    errs: &mut Vec<String>,
) -> Option<GroupElement> {
    match spec {
        GroupSpec::Exp(x) => {
            if x.len() != g.dim() {
                errs.push(format!("{what}: exp coordinates need length {}", g.dim()));
                return None;
            }
            Some(g.exp_map(&AlgebraVector::from_slice(x)))
        }
        GroupSpec::Matrix(rows) => {
            let m = matrix(errs, what, rows);
            if m.nrows() != g.matrix_size() || m.ncols() != g.matrix_size() {
                errs.push(format!("{what}: matrix must be {0} x {0}", g.matrix_size()));
                return None;
            }
            Some(GroupElement(m))
        }
    }
}

impl Scenario {
    /// Checks the schema and dimensions, then every anchor invariant.
    pub fn from_config(config: ScenarioConfig) -> Result<Self, ConfigError> {
        let mut errs = Vec::new();
        let tol = &config.tolerances;
        let Some(algebra) = build_algebra(&config.algebra, tol.jacobi, &mut errs) else {
            return Err(ConfigError::Schema(errs));
        };
        let algebra = algebra.with_expansion_tolerance(tol.adjoint_expansion);
        let d = algebra.dim();
        let a = &config.anchor;
        let omega = matrix(&mut errs, "anchor.omega", &a.omega);
        let n = omega.nrows();
        if omega.ncols() != n || !n.is_multiple_of(2) || n == 0 {
            errs.push(format!("anchor.omega must be square of even positive size, got {} x {}", n, omega.ncols()));
        }
        let generator = matrix(&mut errs, "anchor.generator_matrix", &a.generator_matrix);
        if generator.nrows() != n || generator.ncols() != d {
            errs.push(format!(
                "anchor.generator_matrix must be {n} x {d}, got {} x {}",
                generator.nrows(),
                generator.ncols()
            ));
        }
        for (i, z) in a.isotropy_basis.iter().enumerate() {
            if z.len() != d {
                errs.push(format!("anchor.isotropy_basis[{i}] must have length {d}"));
            }
        }
        if a.isotropy_tangent_ops.len() != a.isotropy_basis.len() {
            errs.push(format!(
                "anchor.isotropy_tangent_ops needs one operator per isotropy vector ({} given, {} expected)",
                a.isotropy_tangent_ops.len(),
                a.isotropy_basis.len()
            ));
        }
        let tangent_ops: Vec<DMatrix<f64>> = a
            .isotropy_tangent_ops
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let m = matrix(&mut errs, &format!("anchor.isotropy_tangent_ops[{i}]"), rows);
                if m.nrows() != n || m.ncols() != n {
                    errs.push(format!("anchor.isotropy_tangent_ops[{i}] must be {n} x {n}"));
                }
                m
            })
            .collect();
        let mut h_samples = Vec::new();
        for (i, s) in a.h_samples.iter().enumerate() {
            let what = format!("anchor.h_samples[{i}]");
            let element = group_element(&algebra, &s.group, &format!("{what}.group"), &mut errs);
            let tangent = matrix(&mut errs, &format!("{what}.tangent"), &s.tangent);
            if tangent.nrows() != n || tangent.ncols() != n {
                errs.push(format!("{what}.tangent must be {n} x {n}"));
            }
            if let Some(element) = element {
                h_samples.push(IsotropySample { element, tangent });
            }
        }
        let tm_ip = match &a.tm_inner_product {
            Some(rows) => matrix(&mut errs, "anchor.tm_inner_product", rows),
            None => DMatrix::identity(n, n),
        };
        if tm_ip.nrows() != n || tm_ip.ncols() != n {
            errs.push(format!("anchor.tm_inner_product must be {n} x {n}"));
        }
        if let Some(g) = &config.initial_state.g_exp {
            if g.len() != d {
                errs.push(format!("initial_state.g_exp must have length {d}"));
            }
        }
        if let Some(mu) = &config.mu {
            if mu.len() != d {
                errs.push(format!("mu must have length {d}"));
            }
        }
        for (i, l) in config.tubewise.loops.iter().enumerate() {
            for (j, seg) in l.iter().enumerate() {
                if seg.algebra_vector.len() != d {
                    errs.push(format!("tubewise.loops[{i}][{j}].algebra_vector must have length {d}"));
                }
            }
        }
        let (dt, t_end) = (config.integrator.dt, config.integrator.t_end);
        if dt.is_nan() || dt <= 0.0 || t_end.is_nan() || t_end < 0.0 {
            errs.push("integrator: dt must be positive and t_end nonnegative".into());
        }
        if !errs.is_empty() {
            return Err(ConfigError::Schema(errs));
        }
        let omega = SymplecticForm::new(omega, tol.nondegeneracy).map_err(ConfigError::Anchor)?;
        let anchor = AnchorData {
            algebra,
            omega,
            generator,
            isotropy_basis: a.isotropy_basis.iter().map(|z| AlgebraVector::from_slice(z)).collect(),
            isotropy_generators: tangent_ops,
            h_samples,
            tm_inner_product: tm_ip,
        };
        anchor.validate(tol).map_err(ConfigError::Anchor)?;
        Ok(Scenario { config, anchor })
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    /// Builds the slice model and checks the Hamiltonian against it.
    pub fn build_model(&self) -> Result<SliceModel, SliceError> {
        SliceModel::build(self.anchor.clone(), self.config.tolerances.clone())
    }

    pub fn hamiltonian(&self) -> Box<dyn InvariantHamiltonian> {
        self.config.hamiltonian.build()
    }

    /// Checks that the Hamiltonian fits the model: exponent ranges, H-invariance
    /// and analytic gradients on a few probe points.
    pub fn check_hamiltonian(&self, model: &SliceModel) -> Result<(), SliceError> {
        let tol = model.tolerances();
        if let HamiltonianConfig::Polynomial(p) = &self.config.hamiltonian {
            p.check_dims(model.dim_m(), model.dim_v())?;
        }
        let ham = self.hamiltonian();
        let probes: Vec<(DVector<f64>, DVector<f64>)> = [0.3, -0.7, 1.1]
            .iter()
            .map(|&s| {
                (
                    DVector::from_fn(model.dim_m(), |i, _| s * (1.0 + i as f64) / 3.0),
                    DVector::from_fn(model.dim_v(), |i, _| s * (0.5 - 0.25 * i as f64)),
                )
            })
            .collect();
        let inv = invariance_residual(model, ham.as_ref(), &probes)?;
        if inv > tol.hamiltonian_invariance {
            return Err(SliceError::Residual {
                what: "H-invariance of the Hamiltonian".into(),
                residual: inv,
                tolerance: tol.hamiltonian_invariance,
            });
        }
        let grad = gradient_residual(ham.as_ref(), &probes);
        if grad > tol.gradient_check {
            return Err(SliceError::Residual {
                what: "analytic Hamiltonian gradient against central differences".into(),
                residual: grad,
                tolerance: tol.gradient_check,
            });
        }
        Ok(())
    }

    /// The configured initial state, with missing coordinates set to zero.
    pub fn initial_state(&self, model: &SliceModel) -> Result<SliceState, SliceError> {
        let s = &self.config.initial_state;
        let g = match &s.g_exp {
            Some(x) => model.algebra().exp_map(&AlgebraVector::from_slice(x)),
            None => GroupElement::identity(model.algebra().matrix_size()),
        };
        let coords = |given: &[f64], dim: usize, context: &'static str| {
            if given.is_empty() {
                Ok(DVector::zeros(dim))
            } else if given.len() == dim {
                Ok(DVector::from_column_slice(given))
            } else {
                Err(SliceError::DimensionMismatch { context, expected: dim, got: given.len() })
            }
        };
        Ok(SliceState {
            g,
            rho: coords(&s.rho, model.dim_m(), "initial rho")?,
            v: coords(&s.v, model.dim_v(), "initial v")?,
        })
    }

    pub fn mu(&self) -> DualVector {
        DualVector(self.config.mu_vector(self.anchor.algebra.dim()))
    }

    pub fn flags(&self) -> TubewiseFlags {
        TubewiseFlags {
            h1_trivial: self.config.tubewise.h1_trivial,
            loops_generate: self.config.tubewise.loops_generate,
        }
    }

    pub fn verdict(&self, model: &SliceModel) -> Result<Verdict, SliceError> {
        check_tubewise(model, &self.flags(), &self.config.tubewise.loops)
    }

    /// `theta` when the verdict guarantees it exists. Under either corollary
    /// it is integrated along exponential paths without loop checks.
    pub fn theta(&self, model: &SliceModel, verdict: &Verdict) -> Result<Option<CocycleTheta>, SliceError> {
        Ok(match verdict {
            Verdict::Yes(theta) => Some(CocycleTheta::clone(theta)),
            Verdict::YesByCorollary(_) => Some(solve_theta(model, &[])?),
            Verdict::No { .. } | Verdict::Inconclusive(_) => None,
        })
    }

    /// Integrates from the configured initial state, monitoring the momentum
    /// map when `theta` is given.
    pub fn simulate(
        &self,
        model: &SliceModel,
        opts: &IntegratorOptions,
        theta: Option<&CocycleTheta>,
    ) -> Result<Trajectory, SliceError> {
        let ham = self.hamiltonian();
        let state = self.initial_state(model)?;
        let mu = self.mu();
        let monitor = theta.map(|theta| MomentumMonitor { theta, mu: &mu });
        integrate(model, ham.as_ref(), &state, opts, monitor)
    }

    /// Compares the model and verdict with the scenario's own assertions.
    /// Returns one message per mismatch.
    pub fn check_expectations(&self, model: &SliceModel, verdict: &Verdict) -> Vec<String> {
        let Some(e) = &self.config.expect else { return Vec::new() };
        let mut out = Vec::new();
        for (what, expected, got) in [
            ("dim k", e.dim_k, model.dim_k()),
            ("dim h", e.dim_h, model.dim_h()),
            ("dim m", e.dim_m, model.dim_m()),
            ("dim q", e.dim_q, model.dim_q()),
            ("dim V", e.dim_v, model.dim_v()),
        ] {
            if expected != got {
                out.push(format!("{what}: expected {expected}, got {got}"));
            }
        }
        if e.verdict != verdict.label() {
            out.push(format!("verdict: expected {}, got {}", e.verdict, verdict.label()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_meet_their_expectations() {
        for cfg in builtins() {
            let name = cfg.name.clone();
            let sc = Scenario::from_config(cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
            let model = sc.build_model().unwrap_or_else(|e| panic!("{name}: {e}"));
            sc.check_hamiltonian(&model).unwrap_or_else(|e| panic!("{name}: {e}"));
            let verdict = sc.verdict(&model).unwrap_or_else(|e| panic!("{name}: {e}"));
            let miss = sc.check_expectations(&model, &verdict);
            assert!(miss.is_empty(), "{name}: {miss:?}");
        }
    }

    #[test]
    fn builtins_round_trip_through_json() {
        for cfg in builtins() {
            let text = serde_json::to_string(&cfg).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn oscillator_is_an_alias() {
        assert_eq!(builtin("oscillator"), builtin("so2-fixedpoint"));
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = serde_json::to_value(builtin("torus2").unwrap()).unwrap();
        v["hamiltonian"] = serde_json::json!({"kind": "oscillator", "v_weight": 1.0, "bogus": 2});
        assert!(matches!(parse_config(&v.to_string()), Err(ConfigError::Parse(_))));
        v["hamiltonian"] = serde_json::json!({"kind": "zero"});
        v["extra"] = serde_json::json!(1);
        assert!(matches!(parse_config(&v.to_string()), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn schema_errors_are_collected() {
        let mut cfg = builtin("so3-sphere").unwrap();
        cfg.anchor.generator_matrix = vec![vec![1.0]];
        cfg.mu = Some(vec![0.0]);
        match Scenario::from_config(cfg) {
            Err(ConfigError::Schema(errs)) => assert_eq!(errs.len(), 2, "{errs:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
