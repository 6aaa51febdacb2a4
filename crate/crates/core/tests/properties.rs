use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use slicekit::lie::{so3_basis, LieAlgebraContext};
use slicekit::scenario::{builtin, Scenario};
use slicekit::symplectic::{symplectic_normal, SymplecticForm};
use slicekit::tubewise::solve_theta;
use slicekit::{AlgebraVector, DualVector, SliceModel};

fn so3() -> LieAlgebraContext {
    LieAlgebraContext::from_basis_matrices(so3_basis(), DMatrix::identity(3, 3), 1e-10).unwrap()
}

fn heisenberg() -> LieAlgebraContext {
    let unit = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(3, 3);
        m[(i, j)] = 1.0;
        m
    };
    LieAlgebraContext::from_basis_matrices(vec![unit(0, 1), unit(1, 2), unit(0, 2)], DMatrix::identity(3, 3), 1e-10)
        .unwrap()
}

fn model(name: &str) -> SliceModel {
    Scenario::from_config(builtin(name).unwrap()).unwrap().build_model().unwrap()
}

fn vec3(r: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-r..r, 3).prop_map(DVector::from_vec)
}

fn vecn(n: usize, r: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-r..r, n).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coadjoint_action_is_dual_to_bracket(x in vec3(2.0), y in vec3(2.0), mu in vec3(2.0)) {
        for g in [so3(), heisenberg()] {
            let (x, y, mu) = (AlgebraVector(x.clone()), AlgebraVector(y.clone()), DualVector(mu.clone()));
            let lhs = g.ad_star(&x, &mu).unwrap().pair(&y);
            let rhs = mu.pair(&g.bracket(&x, &y).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_satisfies_jacobi(x in vec3(1.0), y in vec3(1.0), z in vec3(1.0)) {
        let g = so3();
        let (x, y, z) = (AlgebraVector(x), AlgebraVector(y), AlgebraVector(z));
        let b = |a: &AlgebraVector, c: &AlgebraVector| g.bracket(a, c).unwrap();
        let sum = b(&x, &b(&y, &z)) + b(&y, &b(&z, &x)) + b(&z, &b(&x, &y));
        prop_assert!(sum.norm() < 1e-12);
    }

    #[test]
    fn adjoint_of_exp_is_exp_of_ad(x in vec3(1.5)) {
        for g in [so3(), heisenberg()] {
            let x = AlgebraVector(x.clone());
            let ad = g.adjoint(&g.exp_map(&x)).unwrap();
            let expected = g.ad_matrix(&x).exp();
            prop_assert!((ad.matrix() - expected).amax() < 1e-10);
        }
    }

    #[test]
    fn coadjoint_is_a_left_action(x in vec3(1.0), y in vec3(1.0), mu in vec3(1.0)) {
        let g = so3();
        let (a, b) = (g.exp_map(&AlgebraVector(x)), g.exp_map(&AlgebraVector(y)));
        let mu = DualVector(mu);
        let lhs = g.coadjoint(&a.compose(&b), &mu).unwrap();
        let rhs = g.coadjoint(&a, &g.coadjoint(&b, &mu).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn transposed_adjoint_reverses_composition(x in vec3(1.0), y in vec3(1.0)) {
        let g = heisenberg();
        let (a, b) = (g.exp_map(&AlgebraVector(x)), g.exp_map(&AlgebraVector(y)));
        let star = |h: &slicekit::GroupElement| g.adjoint(h).unwrap().matrix().transpose();
        let ab = a.compose(&b);
        let lhs = star(&ab);
        prop_assert!((lhs - star(&b) * star(&a)).amax() < 1e-10);
    }

    #[test]
    fn log_inverts_exp_on_so3(x in vec3(3.0)) {
        prop_assume!(x.norm() < 3.0);
        let g = so3();
        let back = g.log_map(&g.exp_map(&AlgebraVector(x.clone()))).unwrap();
        prop_assert!((back.0 - x).norm() < 1e-8);
    }

    #[test]
    fn symplectic_complement_is_an_involution(cols in vecn(12, 1.0)) {
        let form = SymplecticForm::standard(3);
        let w = DMatrix::from_column_slice(6, 2, cols.as_slice());
        prop_assume!(w.clone().svd(false, false).singular_values.min() > 1e-3);
        let back = form.complement(&form.complement(&w, 1e-9), 1e-9);
        prop_assert_eq!(back.ncols(), 2);
        let proj = &back * (back.transpose() * &back).try_inverse().unwrap() * back.transpose();
        prop_assert!((&proj * &w - &w).amax() < 1e-9);
    }

    #[test]
    fn sharp_inverts_flat(u in vecn(6, 3.0)) {
        let form = SymplecticForm::standard(3);
        prop_assert!((form.sharp(&form.flat(&u)) - &u).amax() < 1e-12);
        let other = DVector::from_fn(6, |i, _| (i as f64).sin());
        prop_assert!((form.pairing(&u, &other) - form.flat(&u).dot(&other)).abs() < 1e-12);
    }

    #[test]
    fn normal_form_ignores_isotropic_shifts(a in vecn(2, 1.0), b in vecn(2, 1.0), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let m = model("heisenberg-shift");
        let normal = m.normal_space();
        let omega = m.anchor().omega.matrix();
        let iso = &normal.isotropic;
        prop_assume!(iso.ncols() > 0);
        let u = &normal.basis * &a;
        let w = &normal.basis * &b;
        let shift = iso.column(0) * s;
        let shift2 = iso.column(0) * t;
        let base = u.dot(&(omega * &w));
        let moved = (&u + &shift).dot(&(omega * (&w + &shift2)));
        prop_assert!((base - moved).abs() < 1e-12);
        prop_assert!((base - a.dot(&(m.omega_v() * &b))).abs() < 1e-12);
    }

    #[test]
    fn theta_is_a_cocycle_on_the_heisenberg_group(x in vec3(1.0), y in vec3(1.0)) {
        let m = model("heisenberg-shift");
        let theta = solve_theta(&m, &[]).unwrap();
        let g = m.algebra();
        let (a, b) = (g.exp_map(&AlgebraVector(x)), g.exp_map(&AlgebraVector(y)));
        let lhs = theta.eval(&a.compose(&b)).unwrap();
        let rhs = g.coadjoint(&a, &theta.eval(&b).unwrap()).unwrap() + theta.eval(&a).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn certified_ball_keeps_the_tube_form_nondegenerate(c in vecn(1, 1.0)) {
        let m = model("heisenberg-shift");
        let r = m.radii();
        let kappa = m.dual_basis(m.k_basis());
        let nu = DualVector(&kappa * (&c * r.r_k));
        let sv = m.tube_matrix(&nu).svd(false, false).singular_values.min();
        prop_assert!(sv >= 0.5 * r.eps0 - 1e-12);
    }
}

#[test]
fn normal_space_does_not_depend_on_the_metric() {
    let m = model("torus2-oscillator");
    let anchor = m.anchor();
    let metric = DMatrix::from_fn(4, 4, |i, j| if i == j { 2.0 + i as f64 } else { 0.3 });
    let other = symplectic_normal(&anchor.omega, &anchor.generator, &metric, 1e-9).unwrap();
    assert_eq!(other.dim(), m.dim_v());
    let det = |x: &DMatrix<f64>| x.determinant();
    assert!(det(&other.omega_v) > 0.0 && det(m.omega_v()) > 0.0);
}

#[test]
fn heisenberg_moves_g_but_not_rho() {
    let sc = Scenario::from_config(builtin("heisenberg-shift").unwrap()).unwrap();
    let m = sc.build_model().unwrap();
    let opts = slicekit::dynamics::IntegratorOptions { dt: 1e-2, t_end: 2.0, ..Default::default() };
    let traj = sc.simulate(&m, &opts, None).unwrap();
    let first = &traj.samples[0].state;
    let last = &traj.last().unwrap().state;
    assert!((&last.rho - &first.rho).amax() < 1e-12);
    assert!(last.g.distance(&first.g) > 1e-2);
    assert!(traj.energy_drift() < 1e-10);
}
