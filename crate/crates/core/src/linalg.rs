//! Dense helpers on `nalgebra` matrices: ranks, null spaces, metric
//! orthonormalization and subspace bookkeeping.
//!
//! Subspaces are carried as matrices whose columns span them. Every rank
//! decision uses a singular-value cutoff relative to the largest singular
//! value, floored by a small multiple of machine epsilon times a caller
//! supplied scale so that exact zeros polluted by rounding are still zero.

use nalgebra::{DMatrix, DVector};

/// Threshold below which a singular value is treated as zero.
pub fn cutoff(largest: f64, rel: f64, scale: f64) -> f64 {
    (rel * largest).max(64.0 * f64::EPSILON * scale.abs())
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Smallest singular value of a square (or tall) matrix; `+inf` when empty.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return f64::INFINITY;
    }
    let sv = singular_values(m);
    if m.nrows() < m.ncols() {
        // Wide matrices always have a nontrivial kernel.
        return 0.0;
    }
    sv.min()
}

pub fn largest_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).iter().cloned().fold(0.0, f64::max)
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = singular_values(m);
    let lo = sv.min();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / lo
    }
}

pub fn rank(m: &DMatrix<f64>, rel: f64, scale: f64) -> usize {
    let sv = singular_values(m);
    if sv.is_empty() {
        return 0;
    }
    let cut = cutoff(sv.max(), rel, scale);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Euclidean-orthonormal basis of `{x : m x = 0}` as columns.
pub fn null_space(m: &DMatrix<f64>, rel: f64, scale: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD returns a full right basis.
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let cut = cutoff(sv.max(), rel, scale);
    let cols: Vec<DVector<f64>> = (0..sv.len())
        .filter(|&i| sv[i] <= cut)
        .map(|i| v_t.row(i).transpose())
        .collect();
    columns(n, &cols)
}

/// Euclidean-orthonormal basis of the column space of `m`.
pub fn range_basis(m: &DMatrix<f64>, rel: f64, scale: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sv = &svd.singular_values;
    let cut = cutoff(sv.max(), rel, scale);
    let cols: Vec<DVector<f64>> = (0..sv.len())
        .filter(|&i| sv[i] > cut)
        .map(|i| u.column(i).into_owned())
        .collect();
    columns(n, &cols)
}

/// Stack vectors of length `n` as the columns of an `n x k` matrix.
pub fn columns(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Orthogonal projector (with respect to `metric`) onto the span of `basis`.
/// `basis` must have full column rank.
pub fn metric_projector(basis: &DMatrix<f64>, metric: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return DMatrix::zeros(n, n);
    }
    let gram = basis.transpose() * metric * basis;
    let inv = gram
        .try_inverse()
        .expect("metric projector needs a full-rank basis");
    basis * inv * basis.transpose() * metric
}

/// Deterministic `metric`-orthonormal basis of `span(basis)`.
///
/// The standard coordinate vectors are projected onto the subspace and
/// orthonormalized by pivoted Gram-Schmidt, so coordinate subspaces come back
/// with their coordinate basis in order.
pub fn canonical_basis(basis: &DMatrix<f64>, metric: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = basis.nrows();
    let span = range_basis(basis, rel, 1.0);
    let k = span.ncols();
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let proj = metric_projector(&span, metric);
    let mut cand: Vec<DVector<f64>> = (0..n).map(|i| proj.column(i).into_owned()).collect();
    let mnorm = |x: &DVector<f64>| (x.transpose() * metric * x)[(0, 0)].max(0.0).sqrt();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let norms: Vec<f64> = cand.iter().map(mnorm).collect();
        let best = norms.iter().cloned().fold(0.0, f64::max);
        let idx = norms
            .iter()
            .position(|&x| x >= best * (1.0 - 1e-8))
            .expect("nonempty candidates");
        let q = &cand[idx] / norms[idx];
        for c in cand.iter_mut() {
            let coef = (q.transpose() * metric * &*c)[(0, 0)];
            *c -= &q * coef;
        }
        picked.push(q);
    }
    columns(n, &picked)
}

/// Vectors of `span(ambient)` that are `metric`-orthogonal to `span(sub)`.
pub fn metric_complement_within(
    sub: &DMatrix<f64>,
    ambient: &DMatrix<f64>,
    metric: &DMatrix<f64>,
    rel: f64,
) -> DMatrix<f64> {
    let n = ambient.nrows();
    if ambient.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    if sub.ncols() == 0 {
        return ambient.clone();
    }
    let constraint = sub.transpose() * metric * ambient;
    let coeffs = null_space(&constraint, rel, 1.0);
    ambient * coeffs
}

/// Euclidean-orthonormal basis of `span(a) ∩ span(b)`.
pub fn intersection(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let qa = range_basis(a, rel, 1.0);
    let qb = range_basis(b, rel, 1.0);
    let resid = (DMatrix::identity(n, n) - &qb * qb.transpose()) * &qa;
    let coeffs = null_space(&resid, rel, 1.0);
    range_basis(&(&qa * coeffs), rel, 1.0)
}

/// Sine of the largest principal angle between two subspaces
/// (1 when their dimensions differ).
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64) -> f64 {
    let qa = range_basis(a, rel, 1.0);
    let qb = range_basis(b, rel, 1.0);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let diff = &qa * qa.transpose() - &qb * qb.transpose();
    largest_singular_value(&diff)
}

/// Checks that a square matrix is symmetric with a positive smallest eigenvalue.
pub fn is_spd(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
        return false;
    }
    m.nrows() == 0 || m.clone().symmetric_eigen().eigenvalues.min() > 0.0
}

/// Principal square root by the Denman-Beavers iteration.
pub fn sqrtm(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let y_inv = y.clone().try_inverse()?;
        let z_inv = z.clone().try_inverse()?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * y.norm().max(1.0) {
            return Some(y);
        }
    }
    if y.iter().all(|x| x.is_finite()) {
        Some(y)
    } else {
        None
    }
}

/// Principal matrix logarithm by inverse scaling and squaring.
pub fn logm(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut x = a.clone();
    let mut squarings = 0u32;
    while (&x - &eye).norm() > 0.25 {
        x = sqrtm(&x)?;
        squarings += 1;
        if squarings > 60 {
            return None;
        }
    }
    // log(I + y) = y - y^2/2 + y^3/3 - ...
    let y = &x - &eye;
    let mut term = y.clone();
    let mut sum = y.clone();
    for j in 2..200 {
        term = &term * &y;
        let contrib = &term * ((if j % 2 == 0 { -1.0 } else { 1.0 }) / j as f64);
        sum += &contrib;
        if contrib.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Some(sum * 2f64.powi(squarings as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, 1e-9, 1.0);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).amax() < 1e-14);
        assert!((ns.transpose() * &ns - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn null_space_of_zero_and_empty() {
        let z = DMatrix::zeros(2, 3);
        assert_eq!(null_space(&z, 1e-9, 1.0).ncols(), 3);
        let e = DMatrix::zeros(0, 4);
        assert_eq!(null_space(&e, 1e-9, 1.0), DMatrix::identity(4, 4));
    }

    #[test]
    fn rounding_noise_counts_as_zero() {
        let m = DMatrix::from_element(2, 2, 1e-18);
        assert_eq!(rank(&m, 1e-9, 1.0), 0);
    }

    #[test]
    fn canonical_basis_keeps_coordinate_order() {
        let mut b = DMatrix::zeros(4, 2);
        b[(3, 0)] = 2.0;
        b[(1, 1)] = -1.0;
        b[(3, 1)] = 1.0;
        let c = canonical_basis(&b, &DMatrix::identity(4, 4), 1e-9);
        let expected = DMatrix::from_row_slice(4, 2, &[0., 0., 1., 0., 0., 0., 0., 1.]);
        assert!((c - expected).amax() < 1e-14);
    }

    #[test]
    fn intersection_of_planes() {
        let a = DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., 0., 0.]);
        let b = DMatrix::from_row_slice(3, 2, &[0., 0., 1., 0., 0., 1.]);
        let i = intersection(&a, &b, 1e-9);
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_inverts_exp() {
        let x = DMatrix::from_row_slice(3, 3, &[0., -1.3, 0.4, 1.3, 0., -0.2, -0.4, 0.2, 0.]);
        let l = logm(&x.exp()).unwrap();
        assert!((l - x).amax() < 1e-12);
    }

    #[test]
    fn log_of_unipotent() {
        let x = DMatrix::from_row_slice(3, 3, &[0., 2.0, -1.5, 0., 0., 3.0, 0., 0., 0.]);
        let l = logm(&x.exp()).unwrap();
        assert!((l - x).amax() < 1e-12);
    }
}
