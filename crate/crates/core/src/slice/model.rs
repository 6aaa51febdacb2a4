use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SliceError};
use crate::lie::{AlgebraVector, DualVector, GroupElement, LieAlgebraContext};
use crate::linalg;
use crate::slice::anchor::AnchorData;
use crate::slice::radii::{self, Radii};
use crate::slice::state::{SliceState, TangentVector};
use crate::symplectic::{self, SymplecticNormal};
use crate::tolerances::Tolerances;

/// `Sigma_ij = omega(m)(A e_i, A e_j)`.
pub fn chu_sigma(anchor: &AnchorData) -> DMatrix<f64> {
    anchor.omega.restrict(&anchor.generator)
}

fn sigma_scale(anchor: &AnchorData) -> f64 {
    anchor.generator.amax().powi(2) * anchor.omega.matrix().amax()
}

/// Canonical inner-product-orthonormal basis of `k = ker Sigma`.
pub fn compute_k(anchor: &AnchorData, tol: &Tolerances) -> DMatrix<f64> {
    let sigma = chu_sigma(anchor);
    let kernel = linalg::null_space(&sigma, tol.rank_cutoff, sigma_scale(anchor));
    linalg::canonical_basis(&kernel, anchor.algebra.inner_product(), tol.rank_cutoff)
}

/// The Ad_H-invariant splitting `k = h + m`, `g = k + q`. Returns
/// `(h, m, q)` bases, orthonormal for the algebra inner product.
pub fn compute_splitting(
    anchor: &AnchorData,
    k_basis: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let g = &anchor.algebra;
    let p = g.inner_product();
    let d = g.dim();
    let samples: Vec<GroupElement> = anchor.h_samples.iter().map(|s| s.element.clone()).collect();
    let report = g.check_ad_invariance(p, &samples, tol.ad_invariance)?;
    if !report.passed {
        return Err(SliceError::Residual {
            what: "Ad_H-invariance of the algebra inner product".into(),
            residual: report.max_residual,
            tolerance: tol.ad_invariance,
        });
    }
    for (a, z) in anchor.isotropy_basis.iter().enumerate() {
        let ad = g.ad_matrix(z);
        let resid = (ad.transpose() * p + p * &ad).amax();
        if resid > tol.ad_invariance * p.amax() {
            return Err(SliceError::Residual {
                what: format!("ad-invariance of the inner product under isotropy vector {a}"),
                residual: resid,
                tolerance: tol.ad_invariance,
            });
        }
    }

    let h = linalg::canonical_basis(&anchor.isotropy_matrix(), p, tol.rank_cutoff);
    let m = linalg::canonical_basis(
        &linalg::metric_complement_within(&h, k_basis, p, tol.rank_cutoff),
        p,
        tol.rank_cutoff,
    );
    let q = linalg::canonical_basis(
        &linalg::metric_complement_within(k_basis, &DMatrix::identity(d, d), p, tol.rank_cutoff),
        p,
        tol.rank_cutoff,
    );

    let mut operators: Vec<DMatrix<f64>> = Vec::new();
    for s in &samples {
        operators.push(g.adjoint(s)?.0);
    }
    for z in &anchor.isotropy_basis {
        operators.push(g.ad_matrix(z));
    }
    for (name, basis) in [("m", &m), ("q", &q)] {
        let leak = DMatrix::identity(d, d) - linalg::metric_projector(basis, p);
        for op in &operators {
            let resid = (&leak * op * basis).amax();
            if resid > tol.ad_invariance {
                return Err(SliceError::Residual {
                    what: format!("Ad_H-invariance of {name}"),
                    residual: resid,
                    tolerance: tol.ad_invariance,
                });
            }
        }
    }
    Ok((h, m, q))
}

/// The slice model `G x_H (m*_r x V_r)` built from anchor data.
#[derive(Debug, Clone)]
pub struct SliceModel {
    anchor: AnchorData,
    tol: Tolerances,
    sigma: DMatrix<f64>,
    k: DMatrix<f64>,
    h: DMatrix<f64>,
    m: DMatrix<f64>,
    q: DMatrix<f64>,
    normal: SymplecticNormal,
    /// Induced generators on `V`, one per column of `h`.
    v_generators: Vec<DMatrix<f64>>,
    /// Induced action of each H sample on `V`.
    v_samples: Vec<DMatrix<f64>>,
    radii: Radii,
}

impl SliceModel {
    /// Validates the anchor and assembles the model.
    pub fn build(anchor: AnchorData, tol: Tolerances) -> Result<Self> {
        anchor.validate(&tol)?;
        let sigma = chu_sigma(&anchor);
        let k = compute_k(&anchor, &tol);
        let (h, m, q) = compute_splitting(&anchor, &k, &tol)?;

        if q.ncols() > 0 {
            let sq = q.transpose() * &sigma * &q;
            let smallest = linalg::smallest_singular_value(&sq);
            if smallest <= tol.nondegeneracy * sigma.amax().max(1.0) {
                let kernel = linalg::null_space(&sq, 1e-6, 1.0);
                let witness = &q * kernel.column(0);
                return Err(SliceError::DegenerateSigmaOnQ {
                    kernel: witness.iter().copied().collect(),
                });
            }
        }

        let normal = symplectic::symplectic_normal(
            &anchor.omega,
            &anchor.generator,
            &anchor.tm_inner_product,
            tol.rank_cutoff,
        )?;

        // Express the canonical h basis through the user isotropy basis.
        let z = anchor.isotropy_matrix();
        let coeffs = if z.ncols() == 0 {
            DMatrix::zeros(0, 0)
        } else {
            z.clone()
                .svd(true, true)
                .solve(&h, 1e-12)
                .map_err(|e| SliceError::InvalidArgument(e.to_string()))?
        };
        let n = anchor.phase_dim();
        let mut v_generators = Vec::with_capacity(h.ncols());
        for j in 0..h.ncols() {
            let mut x = DMatrix::zeros(n, n);
            for (i, xi) in anchor.isotropy_generators.iter().enumerate() {
                x += xi * coeffs[(i, j)];
            }
            v_generators.push(normal.induced_map(&x)?);
        }
        symplectic::check_symplectic_algebra(&normal.omega_v, &v_generators, tol.sample_action)?;
        let mut v_samples = Vec::with_capacity(anchor.h_samples.len());
        for (s, sample) in anchor.h_samples.iter().enumerate() {
            let lv = normal.induced_map(&sample.tangent)?;
            let defect = (lv.transpose() * &normal.omega_v * &lv - &normal.omega_v).amax();
            if defect > tol.sample_action {
                return Err(SliceError::Residual {
                    what: format!("induced action of H sample {s} preserves omega_V"),
                    residual: defect,
                    tolerance: tol.sample_action,
                });
            }
            v_samples.push(lv);
        }
        let mut model = SliceModel {
            anchor,
            tol,
            sigma,
            k,
            h,
            m,
            q,
            normal,
            v_generators,
            v_samples,
            radii: Radii::default(),
        };
        model.radii = radii::estimate_radii(&model)?;
        Ok(model)
    }

    pub fn algebra(&self) -> &LieAlgebraContext {
        &self.anchor.algebra
    }

    pub fn anchor(&self) -> &AnchorData {
        &self.anchor
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn k_basis(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn h_basis(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn m_basis(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn q_basis(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn normal_space(&self) -> &SymplecticNormal {
        &self.normal
    }

    pub fn omega_v(&self) -> &DMatrix<f64> {
        &self.normal.omega_v
    }

    /// Induced infinitesimal action on `V` of each `h` basis vector.
    pub fn v_generators(&self) -> &[DMatrix<f64>] {
        &self.v_generators
    }

    /// Induced action on `V` of each H sample, aligned with `anchor().h_samples`.
    pub fn v_samples(&self) -> &[DMatrix<f64>] {
        &self.v_samples
    }

    pub fn radii(&self) -> &Radii {
        &self.radii
    }

    pub fn dim_g(&self) -> usize {
        self.algebra().dim()
    }

    pub fn dim_k(&self) -> usize {
        self.k.ncols()
    }

    pub fn dim_h(&self) -> usize {
        self.h.ncols()
    }

    pub fn dim_m(&self) -> usize {
        self.m.ncols()
    }

    pub fn dim_q(&self) -> usize {
        self.q.ncols()
    }

    pub fn dim_v(&self) -> usize {
        self.normal.dim()
    }

    /// `Sigma(xi, .)`.
    pub fn sigma_flat(&self, xi: &AlgebraVector) -> DualVector {
        DualVector(self.sigma.tr_mul(&xi.0))
    }

    /// Inner-product orthogonal projector onto a subspace of `g`.
    pub fn projector(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        linalg::metric_projector(basis, self.algebra().inner_product())
    }

    /// Covectors dual to a basis of a subspace: `P b_a`. Embeds the dual of the
    /// subspace into `g*` as the annihilator of its complement.
    pub fn dual_basis(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        self.algebra().inner_product() * basis
    }

    /// `rho` with coordinates `r` in `m*`, as an element of `g*`.
    pub fn embed_m_star(&self, r: &DVector<f64>) -> DualVector {
        DualVector(self.dual_basis(&self.m) * r)
    }

    /// `h*` coordinates as an element of `g*`.
    pub fn embed_h_star(&self, j: &DVector<f64>) -> DualVector {
        DualVector(self.dual_basis(&self.h) * j)
    }

    /// Coordinates of the restriction of a covector to `m`.
    pub fn m_star_coords(&self, mu: &DualVector) -> DVector<f64> {
        self.m.tr_mul(&mu.0)
    }

    /// Coordinates of the restriction of a covector to `h`.
    pub fn h_star_coords(&self, mu: &DualVector) -> DVector<f64> {
        self.h.tr_mul(&mu.0)
    }

    /// Quadratic momentum map `J_V(v)` in `h*` coordinates.
    pub fn j_v(&self, v: &DVector<f64>) -> DVector<f64> {
        symplectic::quadratic_momentum(&self.normal.omega_v, &self.v_generators, v)
    }

    /// `DJ_V(v) vdot` in `h*` coordinates.
    pub fn dj_v(&self, v: &DVector<f64>, vdot: &DVector<f64>) -> DVector<f64> {
        symplectic::momentum_linearization(&self.normal.omega_v, &self.v_generators, v, vdot)
    }

    /// `nu = rho + J_V(v)` in `k* ⊂ g*`.
    pub fn nu(&self, state: &SliceState) -> DualVector {
        self.embed_m_star(&state.rho) + self.embed_h_star(&self.j_v(&state.v))
    }

    /// Largest pairing of `nu` with a unit vector of `q`.
    pub fn q_star_leak(&self, nu: &DualVector) -> f64 {
        if self.q.ncols() == 0 {
            return 0.0;
        }
        self.q.tr_mul(&nu.0).amax()
    }

    /// The presymplectic form `Omega = omega_1 + omega_2` on `G x k*` at
    /// `nu`, evaluated on left-trivialized tangent vectors `(xi, rho_dot)`.
    /// It never reads a group point.
    pub fn omega_tube(
        &self,
        nu: &DualVector,
        (xi, rho_dot): (&AlgebraVector, &DualVector),
        (eta, sigma_dot): (&AlgebraVector, &DualVector),
    ) -> Result<f64> {
        let tol = self.tol.annihilator;
        for (what, cov) in [("nu", nu), ("first covector rate", rho_dot), ("second covector rate", sigma_dot)] {
            let leak = self.q_star_leak(cov);
            if leak > tol * cov.norm().max(1.0) {
                return Err(SliceError::Residual {
                    what: format!("{what} lies in the annihilator of q"),
                    residual: leak,
                    tolerance: tol,
                });
            }
        }
        let bracket = self.algebra().bracket(xi, eta)?;
        Ok(sigma_dot.pair(xi) - rho_dot.pair(eta)
            + nu.pair(&bracket)
            + xi.0.dot(&(&self.sigma * &eta.0)))
    }

    /// Matrix of `Omega(e, nu)` on the basis `(E_i, 0)`, `(0, P k_a)` of
    /// `g + k*`.
    pub fn tube_matrix(&self, nu: &DualVector) -> DMatrix<f64> {
        let d = self.dim_g();
        let kd = self.dim_k();
        let mut out = DMatrix::zeros(d + kd, d + kd);
        let mut top = self.sigma.clone();
        for i in 0..d {
            let adi = &self.algebra().ad_matrix(&AlgebraVector::basis(d, i));
            // <nu, [e_i, e_j]> = (ad_i^T nu)_j
            let row = adi.tr_mul(&nu.0);
            for j in 0..d {
                top[(i, j)] += row[j];
            }
        }
        out.view_mut((0, 0), (d, d)).copy_from(&top);
        let kappa = self.dual_basis(&self.k);
        out.view_mut((0, d), (d, kd)).copy_from(&kappa);
        out.view_mut((d, 0), (kd, d)).copy_from(&(-kappa.transpose()));
        out
    }

    /// `l(g, rho, v) = (g, rho + J_V(v), v)`.
    pub fn embed_l(&self, state: &SliceState) -> (GroupElement, DualVector, DVector<f64>) {
        (state.g.clone(), self.nu(state), state.v.clone())
    }

    /// `K(g, eta, v) = J_V(v) - eta|_h`, the momentum map of the H-action on
    /// `G x k* x V`, in `h*` coordinates.
    pub fn k_map(&self, eta: &DualVector, v: &DVector<f64>) -> DVector<f64> {
        self.j_v(v) - self.h_star_coords(eta)
    }

    /// Covector rate `rho_dot + DJ_V(v) vdot` in `k* ⊂ g*`.
    fn lifted_rate(&self, state: &SliceState, t: &TangentVector) -> DualVector {
        self.embed_m_star(&t.rho_dot) + self.embed_h_star(&self.dj_v(&state.v, &t.v_dot))
    }

    /// Pullback through `l` of `Omega + omega_V` at `state`.
    pub fn reduced_form(&self, state: &SliceState, u: &TangentVector, w: &TangentVector) -> Result<f64> {
        let nu = self.nu(state);
        let a = self.lifted_rate(state, u);
        let b = self.lifted_rate(state, w);
        let tube = self.omega_tube(&nu, (&u.xi, &a), (&w.xi, &b))?;
        Ok(tube + u.v_dot.dot(&(&self.normal.omega_v * &w.v_dot)))
    }

    /// Matrix of [`Self::reduced_form`] on the coordinate basis of
    /// `g + m* + V`.
    pub fn reduced_form_matrix(&self, state: &SliceState) -> Result<DMatrix<f64>> {
        let basis = TangentVector::coordinate_basis(self.dim_g(), self.dim_m(), self.dim_v());
        let n = basis.len();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let val = self.reduced_form(state, &basis[i], &basis[j])?;
                out[(i, j)] = val;
                out[(j, i)] = -val;
            }
        }
        Ok(out)
    }

    /// Left-trivialized tangent of the H-orbit through `state` generated by
    /// `zeta` in `h`: `(-zeta, -ad*_zeta rho |_m, R_zeta v)`.
    pub fn h_orbit_direction(&self, state: &SliceState, zeta_coords: &DVector<f64>) -> Result<TangentVector> {
        let zeta = AlgebraVector(&self.h * zeta_coords);
        let rho = self.embed_m_star(&state.rho);
        let ad = self.algebra().ad_star(&zeta, &rho)?;
        let mut rv = DVector::zeros(self.dim_v());
        for (a, r) in self.v_generators.iter().enumerate() {
            rv += r * &state.v * zeta_coords[a];
        }
        Ok(TangentVector {
            xi: -zeta,
            rho_dot: -self.m_star_coords(&ad),
            v_dot: rv,
        })
    }

    /// `|rho|` in the dual inner product.
    pub fn rho_norm(&self, state: &SliceState) -> f64 {
        state.rho.norm()
    }

    /// Whether the state lies inside the certified radii.
    pub fn in_tube(&self, state: &SliceState) -> bool {
        self.rho_norm(state) <= self.radii.r_mstar && state.v.norm() <= self.radii.r_v
    }

    /// Expected rank of the pulled-back form.
    pub fn reduced_rank(&self) -> usize {
        self.dim_g() + self.dim_m() + self.dim_v() - self.dim_h()
    }

    /// `max |Sigma([x, y], z) + cyclic|` over basis triples.
    pub fn sigma_cocycle_residual(&self) -> f64 {
        let g = self.algebra();
        let d = g.dim();
        let e = |i| AlgebraVector::basis(d, i);
        let s = |x: &AlgebraVector, y: &AlgebraVector| x.0.dot(&(&self.sigma * &y.0));
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (e(i), e(j), e(k));
                    let xy = g.ad_matrix(&x) * &y.0;
                    let yz = g.ad_matrix(&y) * &z.0;
                    let zx = g.ad_matrix(&z) * &x.0;
                    let r = s(&AlgebraVector(xy), &z) + s(&AlgebraVector(yz), &x) + s(&AlgebraVector(zx), &y);
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// `max |P_q [x, y]|` over pairs of `k` basis vectors.
    pub fn k_subalgebra_residual(&self) -> f64 {
        let g = self.algebra();
        let pq = self.projector(&self.q);
        let mut worst: f64 = 0.0;
        for a in 0..self.dim_k() {
            for b in 0..self.dim_k() {
                let x = AlgebraVector(self.k.column(a).into_owned());
                let y = AlgebraVector(self.k.column(b).into_owned());
                let br = g.ad_matrix(&x) * &y.0;
                worst = worst.max((&pq * br).amax());
            }
        }
        worst
    }

    /// Distance of the isotropy vectors from `span(k)`.
    pub fn h_in_k_residual(&self) -> f64 {
        let pk = self.projector(&self.k);
        self.anchor
            .isotropy_basis
            .iter()
            .map(|z| (&z.0 - &pk * &z.0).amax())
            .fold(0.0, f64::max)
    }
}
