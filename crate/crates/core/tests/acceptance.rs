//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints a PASS or FAIL line; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slicekit::dynamics::{
    gmap_abelian, hamiltonian_consistency, integrate, rkmk4_step, IntegratorOptions, MomentumMonitor,
};
use slicekit::scenario::{builtin, builtin_names, Scenario};
use slicekit::tubewise::{j_theta, solve_theta, CocycleTheta, Verdict};
use slicekit::{AlgebraVector, DualVector, GroupElement, SliceModel, SliceState, TangentVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn load(name: &str) -> (Scenario, SliceModel) {
    let sc = Scenario::from_config(builtin(name).expect("builtin")).expect("valid builtin");
    let model = sc.build_model().expect("model builds");
    (sc, model)
}

fn all() -> Vec<(Scenario, SliceModel)> {
    builtin_names().iter().map(|n| load(n)).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
    let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    let n = x.norm();
    if n == 0.0 {
        return x;
    }
    x * (radius * rng.random_range(0.0..1.0) / n)
}

fn random_states(model: &SliceModel, rng: &mut ChaCha8Rng, count: usize) -> Vec<SliceState> {
    let r = model.radii();
    (0..count)
        .map(|_| {
            let x = ball(rng, model.dim_g(), 1.0);
            let rho = ball(rng, model.dim_m(), (0.5 * r.r_mstar).min(0.5));
            let v = ball(rng, model.dim_v(), (0.5 * r.r_v).min(0.5));
            SliceState::new(model.algebra().exp_map(&AlgebraVector(x)), rho, v)
        })
        .collect()
}

/// Coordinates of a matrix in the algebra basis by least squares on the
/// flattened basis matrices.
fn matrix_coords(model: &SliceModel, m: &DMatrix<f64>) -> DVector<f64> {
    let basis = model.algebra().basis_matrices();
    let n = m.len();
    let b = DMatrix::from_fn(n, basis.len(), |r, c| basis[c][r]);
    let rhs = DVector::from_column_slice(m.as_slice());
    b.svd(true, true).solve(&rhs, 1e-12).expect("svd solve")
}

fn bracket(model: &SliceModel, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let basis = model.algebra().basis_matrices();
    let mat = |c: &DVector<f64>| basis.iter().zip(c.iter()).fold(DMatrix::zeros(basis[0].nrows(), basis[0].ncols()), |acc, (e, a)| acc + e * *a);
    let (a, b) = (mat(x), mat(y));
    matrix_coords(model, &(&a * &b - &b * &a))
}

fn unit(d: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(d);
    e[i] = 1.0;
    e
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let cut = 1e-9 * sv.max().max(1.0);
    sv.iter().filter(|s| **s > cut).count()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn check(label: &str, worst: f64, tol: f64) -> Outcome {
    if worst <= tol {
        Ok(format!("{label} {worst:.2e} <= {tol:.0e}"))
    } else {
        Err(format!("{label} {worst:.2e} > {tol:.0e}"))
    }
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, m) in all() {
        let d = m.dim_g();
        let s = m.sigma();
        let sig = |x: &DVector<f64>, y: &DVector<f64>| x.dot(&(s * y));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (unit(d, i), unit(d, j), unit(d, k));
                    let r = sig(&bracket(&m, &x, &y), &z) + sig(&bracket(&m, &y, &z), &x) + sig(&bracket(&m, &z, &x), &y);
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    check("max cyclic sum", worst, 1e-9)
}

fn criterion_2() -> Outcome {
    let mut sub: f64 = 0.0;
    let mut inside: f64 = 0.0;
    for (sc, m) in all() {
        let (k, q) = (m.k_basis(), m.q_basis());
        let frame = DMatrix::from_fn(m.dim_g(), k.ncols() + q.ncols(), |r, c| {
            if c < k.ncols() { k[(r, c)] } else { q[(r, c - k.ncols())] }
        });
        let split = frame.clone().svd(true, true);
        for a in 0..k.ncols() {
            for b in 0..k.ncols() {
                let br = bracket(&m, &k.column(a).into_owned(), &k.column(b).into_owned());
                let c = split.solve(&br, 1e-12).expect("svd solve");
                let q_part = q * c.rows(k.ncols(), q.ncols());
                sub = sub.max(q_part.amax());
            }
        }
        if k.ncols() > 0 {
            let ks = k.clone().svd(true, true);
            for z in &sc.anchor.isotropy_basis {
                let c = ks.solve(&z.0, 1e-12).expect("svd solve");
                inside = inside.max((k * c - &z.0).amax());
            }
        } else if !sc.anchor.isotropy_basis.is_empty() {
            inside = f64::INFINITY;
        }
    }
    match (check("|P_q[k,k]|", sub, 1e-9), check("dist(h, k)", inside, 1e-10)) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for (sc, m) in all() {
        let w = m.tube_matrix(&DualVector::zeros(m.dim_g()));
        let full = numerical_rank(&w) == w.nrows();
        let needs_radius = m.sigma().amax() > 0.0 || m.dim_k() > 0;
        let r = m.radii().r_k;
        if !full || (needs_radius && r.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
            return Err(format!("{}: full rank {full}, r = {r}", sc.name()));
        }
        notes.push(format!("{} r={r:.3}", sc.name()));
    }
    Ok(format!("Omega(e,0) full rank everywhere; {}", notes.join(", ")))
}

fn criterion_4() -> Outcome {
    let mut k_worst: f64 = 0.0;
    let mut mismatches = Vec::new();
    let mut rng = rng(4);
    for (sc, m) in all() {
        let states = random_states(&m, &mut rng, 20);
        for s in &states {
            let nu = m.nu(s);
            for (a, r) in m.v_generators().iter().enumerate() {
                let jv = 0.5 * (r * &s.v).dot(&(m.omega_v() * &s.v));
                let restricted = nu.0.dot(&m.h_basis().column(a));
                k_worst = k_worst.max((jv - restricted).abs());
            }
            let rank = numerical_rank(&m.reduced_form_matrix(s).expect("reduced form"));
            let expected = m.dim_g() + m.dim_m() + m.dim_v() - m.dim_h();
            if rank != expected {
                mismatches.push(format!("{}: rank {rank} != {expected}", sc.name()));
            }
        }
    }
    if !mismatches.is_empty() {
        return Err(mismatches.join("; "));
    }
    check("rank as expected at 20 states per scenario; |K o l|", k_worst, 1e-12)
}

fn fd_dh(sc: &Scenario, s: &SliceState, w: &TangentVector) -> f64 {
    let h = sc.hamiltonian();
    let step = 1e-5;
    let up = h.value(&(&s.rho + &w.rho_dot * step), &(&s.v + &w.v_dot * step));
    let down = h.value(&(&s.rho - &w.rho_dot * step), &(&s.v - &w.v_dot * step));
    (up - down) / (2.0 * step)
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut rng = rng(5);
    for (sc, m) in all() {
        let ham = sc.hamiltonian();
        for s in random_states(&m, &mut rng, 100) {
            let dh = |w: &TangentVector| fd_dh(&sc, &s, w);
            worst = worst.max(hamiltonian_consistency(&m, ham.as_ref(), &s, &dh).expect("field"));
            count += 1;
        }
    }
    check(&format!("{count} states, normalized residual"), worst, 1e-8)
}

fn theta_for(sc: &Scenario, m: &SliceModel) -> Option<CocycleTheta> {
    let verdict = sc.verdict(m).expect("verdict");
    sc.theta(m, &verdict).expect("theta")
}

fn criterion_6() -> Outcome {
    let opts = IntegratorOptions { dt: 1e-3, t_end: 10.0, monitor_every: 10, ..Default::default() };
    let (mut e, mut j, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for (sc, m) in all() {
        let theta = theta_for(&sc, &m);
        let mu = sc.mu();
        let monitor = theta.as_ref().map(|theta| MomentumMonitor { theta, mu: &mu });
        let traj = integrate(&m, sc.hamiltonian().as_ref(), &sc.initial_state(&m).expect("state"), &opts, monitor)
            .expect("integration");
        e = e.max(traj.energy_drift());
        j = j.max(traj.momentum_drift().unwrap_or(0.0));
        c = c.max(traj.chu_drift());
    }
    let msg = format!("energy {e:.2e}, momentum {j:.2e}, Chu {c:.2e}");
    if e <= 1e-8 && j <= 1e-6 && c <= 1e-6 { Ok(msg) } else { Err(msg) }
}

fn endpoint(m: &SliceModel, sc: &Scenario, dt: f64, t_end: f64) -> SliceState {
    let ham = sc.hamiltonian();
    let mut s = sc.initial_state(m).expect("state");
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        s = rkmk4_step(m, ham.as_ref(), &s, dt).expect("step").0;
    }
    s
}

fn state_distance(a: &SliceState, b: &SliceState) -> f64 {
    ((a.g.matrix() - b.g.matrix()).norm_squared() + (&a.rho - &b.rho).norm_squared() + (&a.v - &b.v).norm_squared()).sqrt()
}

fn criterion_7() -> Outcome {
    let (sc, m) = load("so2-fixedpoint");
    let t_end = 2.0;
    let dt = 0.1;
    let reference = endpoint(&m, &sc, dt / 64.0, t_end);
    let coarse = state_distance(&endpoint(&m, &sc, dt, t_end), &reference);
    let fine = state_distance(&endpoint(&m, &sc, dt / 2.0, t_end), &reference);
    let ratio = coarse / fine;
    let msg = format!("error ratio {ratio:.3} (errors {coarse:.2e}, {fine:.2e})");
    if (12.0..=20.0).contains(&ratio) { Ok(msg) } else { Err(msg) }
}

fn criterion_8() -> Outcome {
    let (sc, m) = load("torus2");
    let expected = 2.0 * PI * m.sigma()[(0, 1)].abs();
    let period = match sc.verdict(&m).expect("verdict") {
        Verdict::No { period, .. } => period.norm(),
        other => return Err(format!("torus2 verdict {}", other.label())),
    };
    let rel = (period - expected).abs() / expected;
    if rel > 1e-4 {
        return Err(format!("torus2 period {period} vs {expected}"));
    }
    let (sc, m) = load("plane-translation");
    let label = sc.verdict(&m).expect("verdict").label();
    if label != "yes-by-corollary(ii)" {
        return Err(format!("plane-translation verdict {label}"));
    }
    let (sc, m) = load("so3-sphere");
    let theta = match sc.verdict(&m).expect("verdict") {
        Verdict::Yes(theta) => theta,
        other => return Err(format!("so3-sphere verdict {}", other.label())),
    };
    let g = m.algebra();
    let mut rng = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = g.exp_map(&AlgebraVector(ball(&mut rng, 3, 1.2)));
        let b = g.exp_map(&AlgebraVector(ball(&mut rng, 3, 1.2)));
        let lhs = theta.eval(&a.compose(&b)).expect("theta");
        let rhs = g.coadjoint(&a, &theta.eval(&b).expect("theta")).expect("coadjoint") + theta.eval(&a).expect("theta");
        worst = worst.max((lhs - rhs).norm());
    }
    check(&format!("torus2 no (period rel err {rel:.1e}), plane yes-by-corollary(ii), so3 yes; cocycle"), worst, 1e-8)
}

fn criterion_9() -> Outcome {
    let mut fd_worst: f64 = 0.0;
    let mut cocycle_worst: f64 = 0.0;
    let mut rng = rng(9);
    for name in ["so3-sphere", "heisenberg-shift"] {
        let (_, m) = load(name);
        let theta = solve_theta(&m, &[]).expect("theta");
        let g = m.algebra();
        let d = m.dim_g();
        let kappa = m.dual_basis(m.k_basis());
        for _ in 0..25 {
            let elem = g.exp_map(&AlgebraVector(ball(&mut rng, d, 1.0)));
            let nu = DualVector(&kappa * ball(&mut rng, m.dim_k(), 0.5));
            let xi = AlgebraVector(ball(&mut rng, d, 1.0));
            let eta = AlgebraVector(ball(&mut rng, d, 1.0));
            let sdot = DualVector(&kappa * ball(&mut rng, m.dim_k(), 1.0));
            let xi_m = g.adjoint(&elem.inverse().expect("inverse")).expect("adjoint").apply(&xi);
            let zero = DualVector::zeros(d);
            let lhs = m.omega_tube(&nu, (&xi_m, &zero), (&eta, &sdot)).expect("omega");
            let h = 1e-5;
            let pairing = |t: f64| {
                let gt = elem.compose(&g.exp_map(&(&eta * t)));
                let nt = &nu + &(&sdot * t);
                j_theta(&m, &theta, &gt, &nt).expect("j_theta").pair(&xi)
            };
            let rhs = (pairing(h) - pairing(-h)) / (2.0 * h);
            fd_worst = fd_worst.max((lhs - rhs).abs());

            let other = g.exp_map(&AlgebraVector(ball(&mut rng, d, 1.0)));
            let moved = j_theta(&m, &theta, &other.compose(&elem), &nu).expect("j_theta");
            let base = g.coadjoint(&other, &j_theta(&m, &theta, &elem, &nu).expect("j_theta")).expect("coadjoint");
            let sigma = moved - base;
            cocycle_worst = cocycle_worst.max((sigma + theta.eval(&other).expect("theta")).norm());
        }
    }
    match (check("momentum residual", fd_worst, 1e-6), check("|cocycle + theta|", cocycle_worst, 1e-8)) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn criterion_10() -> Outcome {
    let (sc, m) = load("torus2-oscillator");
    if m.dim_v() == 0 {
        return Err("torus2-oscillator has trivial V".into());
    }
    let opts = IntegratorOptions { dt: 1e-3, t_end: 10.0, monitor_every: 10, ..Default::default() };
    let s0 = sc.initial_state(&m).expect("state");
    let traj = integrate(&m, sc.hamiltonian().as_ref(), &s0, &opts, None).expect("integration");
    let g0 = GroupElement::identity(m.algebra().matrix_size());
    let k0 = gmap_abelian(&m, &g0, &s0).expect("gmap");
    let worst = max_of(traj.samples.iter().map(|s| gmap_abelian(&m, &g0, &s.state).expect("gmap").distance(&k0)));
    let moved = max_of(traj.samples.iter().map(|s| (&s.state.v - &s0.v).norm()));
    check(&format!("v travels up to {moved:.2}; group-valued map distance"), worst, 1e-6)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 sigma cocycle identity", criterion_1),
        ("2 k subalgebra, h in k", criterion_2),
        ("3 nondegeneracy and radii", criterion_3),
        ("4 reduction consistency", criterion_4),
        ("5 Hamiltonian consistency", criterion_5),
        ("6 conservation", criterion_6),
        ("7 integrator order", criterion_7),
        ("8 tubewise verdicts", criterion_8),
        ("9 j_theta momentum property", criterion_9),
        ("10 abelian group-valued map", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.2}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
