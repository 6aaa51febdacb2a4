use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dynamics::{IntegratorOptions, Oscillator};
use crate::lie::so3_basis;
use crate::scenario::config::{
    from_dmatrix, AlgebraConfig, AnchorConfig, Expectations, GroupSpec, HSampleConfig, HamiltonianConfig,
    InitialStateConfig, MatrixRows, OutputConfig, ScenarioConfig, TubewiseConfig,
};
use crate::symplectic::standard_matrix;
use crate::tolerances::Tolerances;
use crate::tubewise::LoopSegment;

const NAMES: [&str; 6] = [
    "torus2",
    "torus2-oscillator",
    "plane-translation",
    "so3-sphere",
    "so2-fixedpoint",
    "heisenberg-shift",
];

/// Names of the built-in scenarios.
pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Built-in scenario by name. `oscillator` is accepted as an alias of
/// `so2-fixedpoint`.
pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    Some(match name {
        "torus2" => torus2(),
        "torus2-oscillator" => torus2_oscillator(),
        "plane-translation" => plane_translation(),
        "so3-sphere" => so3_sphere(),
        "so2-fixedpoint" | "oscillator" => so2_fixedpoint(),
        "heisenberg-shift" => heisenberg_shift(),
        _ => return None,
    })
}

pub fn builtins() -> Vec<ScenarioConfig> {
    NAMES.iter().map(|n| builtin(n).expect("listed builtin")).collect()
}

fn rows(m: &DMatrix<f64>) -> MatrixRows {
    from_dmatrix(m)
}

fn rot2(phi: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()])
}

fn skew2() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.])
}

/// Block-diagonal embedding of `n` commuting plane rotations.
fn torus_basis(n: usize) -> Vec<MatrixRows> {
    (0..n)
        .map(|i| {
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            m.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&skew2());
            rows(&m)
        })
        .collect()
}

fn full_turn(dim: usize, i: usize) -> Vec<LoopSegment> {
    let mut x = vec![0.0; dim];
    x[i] = 2.0 * PI;
    vec![LoopSegment { algebra_vector: x, t_range: [0.0, 1.0] }]
}

fn expect(dim_k: usize, dim_h: usize, dim_m: usize, dim_q: usize, dim_v: usize, verdict: &str) -> Option<Expectations> {
    Some(Expectations { dim_k, dim_h, dim_m, dim_q, dim_v, verdict: verdict.into() })
}

fn base(name: &str, description: &str, algebra: AlgebraConfig, anchor: AnchorConfig) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        algebra,
        anchor,
        hamiltonian: HamiltonianConfig::Zero,
        initial_state: InitialStateConfig::default(),
        integrator: IntegratorOptions::default(),
        tubewise: TubewiseConfig::default(),
        mu: None,
        tolerances: Tolerances::default(),
        expect: None,
        output: OutputConfig::default(),
    }
}

fn identity_sample(matrix_size: usize, phase_dim: usize) -> HSampleConfig {
    HSampleConfig {
        group: GroupSpec::Matrix(rows(&DMatrix::identity(matrix_size, matrix_size))),
        tangent: rows(&DMatrix::identity(phase_dim, phase_dim)),
    }
}

fn torus2() -> ScenarioConfig {
    let mut cfg = base(
        "torus2",
        "The two-torus acting on itself by translations, omega = dtheta1 ^ dtheta2.",
        AlgebraConfig { basis_matrices: Some(torus_basis(2)), ..Default::default() },
        AnchorConfig {
            omega: rows(&standard_matrix(1)),
            generator_matrix: rows(&DMatrix::identity(2, 2)),
            h_samples: vec![identity_sample(4, 2)],
            ..Default::default()
        },
    );
    cfg.tubewise = TubewiseConfig {
        loops: vec![full_turn(2, 0), full_turn(2, 1)],
        h1_trivial: false,
        loops_generate: true,
    };
    cfg.expect = expect(0, 0, 0, 2, 0, "no");
    cfg
}

fn torus2_oscillator() -> ScenarioConfig {
    // T^3 = T^2 x S^1 on T^2 x C: the first two circles translate the torus,
    // the third rotates the plane.
    let mut generator = DMatrix::zeros(4, 3);
    generator[(0, 0)] = 1.0;
    generator[(1, 1)] = 1.0;
    let mut rotation = DMatrix::zeros(4, 4);
    rotation.view_mut((2, 2), (2, 2)).copy_from(&skew2());
    let h_samples = [0.4, 1.9, -2.6]
        .iter()
        .map(|&phi| {
            let mut tangent = DMatrix::identity(4, 4);
            tangent.view_mut((2, 2), (2, 2)).copy_from(&rot2(phi));
            HSampleConfig { group: GroupSpec::Exp(vec![0.0, 0.0, phi]), tangent: rows(&tangent) }
        })
        .collect();
    let mut cfg = base(
        "torus2-oscillator",
        "The two-torus acting on itself times a circle rotating a plane; nonzero symplectic normal space.",
        AlgebraConfig { basis_matrices: Some(torus_basis(3)), ..Default::default() },
        AnchorConfig {
            omega: rows(&standard_matrix(2)),
            generator_matrix: rows(&generator),
            isotropy_basis: vec![vec![0.0, 0.0, 1.0]],
            isotropy_tangent_ops: vec![rows(&rotation)],
            h_samples,
            tm_inner_product: None,
        },
    );
    cfg.hamiltonian = HamiltonianConfig::Oscillator(Oscillator { rho_weight: 0.0, v_weight: 1.0, quartic: 0.2 });
    cfg.initial_state.v = vec![0.5, -0.3];
    cfg.tubewise = TubewiseConfig {
        loops: vec![full_turn(3, 0), full_turn(3, 1), full_turn(3, 2)],
        h1_trivial: false,
        loops_generate: true,
    };
    cfg.expect = expect(1, 1, 0, 2, 2, "no");
    cfg
}

fn plane_translation() -> ScenarioConfig {
    let mut cfg = base(
        "plane-translation",
        "The real line translating q on (R^2, dq ^ dp); isotropic orbit.",
        AlgebraConfig {
            basis_matrices: Some(vec![vec![vec![0.0, 1.0], vec![0.0, 0.0]]]),
            ..Default::default()
        },
        AnchorConfig {
            omega: rows(&standard_matrix(1)),
            generator_matrix: vec![vec![1.0], vec![0.0]],
            h_samples: vec![identity_sample(2, 2)],
            ..Default::default()
        },
    );
    cfg.hamiltonian = HamiltonianConfig::Oscillator(Oscillator { rho_weight: 1.0, v_weight: 0.0, quartic: 0.0 });
    cfg.initial_state.rho = vec![0.3];
    cfg.tubewise = TubewiseConfig { loops: vec![], h1_trivial: false, loops_generate: true };
    cfg.expect = expect(1, 0, 1, 0, 0, "yes-by-corollary(ii)");
    cfg
}

fn so3_sphere() -> ScenarioConfig {
    let basis: Vec<MatrixRows> = so3_basis().iter().map(rows).collect();
    let h_samples = [0.3, 1.1, 2.5, -0.7]
        .iter()
        .map(|&phi| HSampleConfig { group: GroupSpec::Exp(vec![0.0, 0.0, phi]), tangent: rows(&rot2(phi)) })
        .collect();
    let mut cfg = base(
        "so3-sphere",
        "SO(3) on the unit coadjoint sphere at the north pole.",
        AlgebraConfig { basis_matrices: Some(basis), ..Default::default() },
        AnchorConfig {
            omega: rows(&standard_matrix(1)),
            generator_matrix: vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0]],
            isotropy_basis: vec![vec![0.0, 0.0, 1.0]],
            isotropy_tangent_ops: vec![rows(&skew2())],
            h_samples,
            tm_inner_product: None,
        },
    );
    cfg.tubewise = TubewiseConfig {
        loops: vec![full_turn(3, 2)],
        h1_trivial: false,
        loops_generate: true,
    };
    cfg.expect = expect(1, 1, 0, 2, 0, "yes");
    cfg
}

fn so2_fixedpoint() -> ScenarioConfig {
    // Rotation of (q1, q2) and (p1, p2) by the same angle: the cotangent lift
    // of the plane rotation, fixing the origin.
    let mut lift = DMatrix::zeros(4, 4);
    lift[(0, 2)] = -1.0;
    lift[(1, 3)] = -1.0;
    lift[(2, 0)] = 1.0;
    lift[(3, 1)] = 1.0;
    let h_samples = [0.5, 2.0, -1.3]
        .iter()
        .map(|&phi| HSampleConfig {
            group: GroupSpec::Exp(vec![phi]),
            tangent: rows(&(&lift * phi).exp()),
        })
        .collect();
    let mut cfg = base(
        "so2-fixedpoint",
        "Lifted SO(2) on (R^4, standard form) at the fixed origin; anharmonic oscillator.",
        AlgebraConfig { basis_matrices: Some(vec![rows(&skew2())]), ..Default::default() },
        AnchorConfig {
            omega: rows(&standard_matrix(2)),
            generator_matrix: vec![vec![0.0]; 4],
            isotropy_basis: vec![vec![1.0]],
            isotropy_tangent_ops: vec![rows(&lift)],
            h_samples,
            tm_inner_product: None,
        },
    );
    cfg.hamiltonian = HamiltonianConfig::Oscillator(Oscillator { rho_weight: 0.0, v_weight: 1.0, quartic: 0.2 });
    cfg.initial_state.v = vec![0.6, 0.1, -0.3, 0.4];
    cfg.tubewise = TubewiseConfig {
        loops: vec![full_turn(1, 0)],
        h1_trivial: false,
        loops_generate: true,
    };
    cfg.expect = expect(1, 1, 0, 0, 4, "yes-by-corollary(ii)");
    cfg
}

fn heisenberg_shift() -> ScenarioConfig {
    let unit = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(3, 3);
        m[(i, j)] = 1.0;
        rows(&m)
    };
    let mut generator = DMatrix::zeros(6, 3);
    generator[(0, 0)] = 1.0;
    generator[(1, 1)] = 1.0;
    generator[(1, 2)] = -1.0;
    generator[(2, 2)] = 1.0;
    let mut cfg = base(
        "heisenberg-shift",
        "Heisenberg group with a nonzero Chu cocycle and two-dimensional q, plus a spectator plane.",
        AlgebraConfig { basis_matrices: Some(vec![unit(0, 1), unit(1, 2), unit(0, 2)]), ..Default::default() },
        AnchorConfig {
            omega: rows(&standard_matrix(3)),
            generator_matrix: rows(&generator),
            h_samples: vec![identity_sample(3, 6)],
            ..Default::default()
        },
    );
    cfg.hamiltonian = HamiltonianConfig::Oscillator(Oscillator { rho_weight: 1.0, v_weight: 1.0, quartic: 0.1 });
    cfg.initial_state.rho = vec![0.4];
    cfg.initial_state.v = vec![0.3, -0.2];
    cfg.tubewise = TubewiseConfig { loops: vec![], h1_trivial: false, loops_generate: true };
    cfg.expect = expect(1, 0, 1, 2, 2, "yes");
    cfg
}
