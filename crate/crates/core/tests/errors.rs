use nalgebra::{DMatrix, DVector};

use slicekit::dynamics::{gmap_abelian, integrate, IntegratorOptions, TubeExitPolicy};
use slicekit::scenario::{builtin, Scenario};
use slicekit::tubewise::solve_theta;
use slicekit::{GroupElement, LieAlgebraContext, SliceError, SliceState};

fn scenario(name: &str) -> Scenario {
    Scenario::from_config(builtin(name).unwrap()).unwrap()
}

#[test]
fn leaving_the_tube_stops_when_asked() {
    let sc = scenario("so2-fixedpoint");
    let m = sc.build_model().unwrap();
    let far = SliceState::new(GroupElement::identity(2), DVector::zeros(0), DVector::from_vec(vec![4.0, 0.0, 0.0, 4.0]));
    let mut opts = IntegratorOptions { dt: 1e-3, t_end: 0.01, ..Default::default() };
    let warned = integrate(&m, sc.hamiltonian().as_ref(), &far, &opts, None).unwrap();
    assert!(warned.tube_exit.is_some());
    opts.on_tube_exit = TubeExitPolicy::Stop;
    let err = integrate(&m, sc.hamiltonian().as_ref(), &far, &opts, None).unwrap_err();
    assert!(matches!(err, SliceError::TubeExit { .. }));
}

#[test]
fn group_valued_map_needs_an_abelian_group() {
    let sc = scenario("so3-sphere");
    let m = sc.build_model().unwrap();
    let s = sc.initial_state(&m).unwrap();
    let err = gmap_abelian(&m, &GroupElement::identity(3), &s).unwrap_err();
    assert!(matches!(err, SliceError::NonAbelian));
}

#[test]
fn obstructed_theta_cannot_be_evaluated() {
    let sc = scenario("torus2");
    let m = sc.build_model().unwrap();
    let theta = solve_theta(&m, &sc.config.tubewise.loops).unwrap();
    assert!(!theta.exists());
    assert!(matches!(theta.eval(&GroupElement::identity(4)), Err(SliceError::ThetaUnavailable(_))));
}

#[test]
fn structure_constants_must_satisfy_jacobi() {
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    c[0][1][2] = 1.0;
    c[1][0][2] = -1.0;
    c[1][2][0] = 1.0;
    c[2][1][0] = -1.0;
    c[2][0][1] = 2.0;
    c[0][2][1] = -2.0;
    c[0][1][0] = 1.0;
    c[1][0][0] = -1.0;
    let err = LieAlgebraContext::from_structure_constants(&c, DMatrix::identity(3, 3), 1e-10).unwrap_err();
    assert!(matches!(err, SliceError::InvalidAlgebra(_)));
}

#[test]
fn polynomial_exponents_are_checked_against_the_model() {
    let mut cfg = builtin("so2-fixedpoint").unwrap();
    cfg.hamiltonian = serde_json::from_str(r#"{"kind": "polynomial", "terms": [{"coeff": 1.0, "rho_powers": [2]}]}"#).unwrap();
    let sc = Scenario::from_config(cfg).unwrap();
    let m = sc.build_model().unwrap();
    assert!(matches!(sc.check_hamiltonian(&m), Err(SliceError::DimensionMismatch { .. })));
}
