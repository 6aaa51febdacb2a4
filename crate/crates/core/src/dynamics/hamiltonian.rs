use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SliceError};
use crate::lie::DualVector;
use crate::slice::SliceModel;

/// A G-invariant Hamiltonian written in slice coordinates: `rho` as
/// coordinates `<rho, m_a>` and `v` as coordinates in `V`.
pub trait InvariantHamiltonian: Send + Sync {
    fn value(&self, rho: &DVector<f64>, v: &DVector<f64>) -> f64;

    /// Analytic `(d h / d rho, d h / d v)` if available.
    fn gradient(&self, _rho: &DVector<f64>, _v: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        None
    }
}

fn fd_partial<F: Fn(&DVector<f64>) -> f64>(f: F, x: &DVector<f64>) -> DVector<f64> {
    let mut grad = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let step = 1e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * step);
    }
    grad
}

/// Central-difference gradient.
pub fn finite_difference_gradient(
    ham: &dyn InvariantHamiltonian,
    rho: &DVector<f64>,
    v: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let gr = fd_partial(|r| ham.value(r, v), rho);
    let gv = fd_partial(|w| ham.value(rho, w), v);
    (gr, gv)
}

/// Analytic gradient when provided, central differences otherwise.
pub fn gradient(
    ham: &dyn InvariantHamiltonian,
    rho: &DVector<f64>,
    v: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    ham.gradient(rho, v)
        .unwrap_or_else(|| finite_difference_gradient(ham, rho, v))
}

/// `h = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHamiltonian;

impl InvariantHamiltonian for ZeroHamiltonian {
    fn value(&self, _rho: &DVector<f64>, _v: &DVector<f64>) -> f64 {
        0.0
    }

    fn gradient(&self, rho: &DVector<f64>, v: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        Some((DVector::zeros(rho.len()), DVector::zeros(v.len())))
    }
}

/// `h = a |rho|^2 / 2 + b |v|^2 / 2 + c |v|^4 / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillator {
    #[serde(default)]
    pub rho_weight: f64,
    #[serde(default)]
    pub v_weight: f64,
    #[serde(default)]
    pub quartic: f64,
}

impl InvariantHamiltonian for Oscillator {
    fn value(&self, rho: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let v2 = v.norm_squared();
        0.5 * self.rho_weight * rho.norm_squared() + 0.5 * self.v_weight * v2 + 0.25 * self.quartic * v2 * v2
    }

    fn gradient(&self, rho: &DVector<f64>, v: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let v2 = v.norm_squared();
        Some((rho * self.rho_weight, v * (self.v_weight + self.quartic * v2)))
    }
}

/// One monomial `coeff * prod rho_i^a_i * prod v_j^b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: f64,
    #[serde(default)]
    pub rho_powers: Vec<u32>,
    #[serde(default)]
    pub v_powers: Vec<u32>,
}

/// Polynomial in the slice coordinates. Missing exponents count as zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

fn power(x: f64, k: u32) -> f64 {
    x.powi(k as i32)
}

fn exponent(powers: &[u32], i: usize) -> u32 {
    powers.get(i).copied().unwrap_or(0)
}

impl Polynomial {
    fn monomial(&self, t: &Monomial, rho: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let r: f64 = rho.iter().enumerate().map(|(i, x)| power(*x, exponent(&t.rho_powers, i))).product();
        let w: f64 = v.iter().enumerate().map(|(i, x)| power(*x, exponent(&t.v_powers, i))).product();
        t.coeff * r * w
    }

    /// Rejects monomials referring to coordinates that do not exist.
    pub fn check_dims(&self, dim_m: usize, dim_v: usize) -> Result<()> {
        for t in &self.terms {
            if t.rho_powers.len() > dim_m || t.v_powers.len() > dim_v {
                return Err(SliceError::DimensionMismatch {
                    context: "polynomial Hamiltonian exponents",
                    expected: dim_m + dim_v,
                    got: t.rho_powers.len() + t.v_powers.len(),
                });
            }
        }
        Ok(())
    }
}

impl InvariantHamiltonian for Polynomial {
    fn value(&self, rho: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.terms.iter().map(|t| self.monomial(t, rho, v)).sum()
    }

    fn gradient(&self, rho: &DVector<f64>, v: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let mut gr = DVector::zeros(rho.len());
        let mut gv = DVector::zeros(v.len());
        for t in &self.terms {
            for i in 0..rho.len() {
                let k = exponent(&t.rho_powers, i);
                if k > 0 {
                    let mut powers = t.rho_powers.clone();
                    powers[i] -= 1;
                    let reduced = Monomial { coeff: t.coeff * k as f64, rho_powers: powers, v_powers: t.v_powers.clone() };
                    gr[i] += self.monomial(&reduced, rho, v);
                }
            }
            for j in 0..v.len() {
                let k = exponent(&t.v_powers, j);
                if k > 0 {
                    let mut powers = t.v_powers.clone();
                    powers[j] -= 1;
                    let reduced = Monomial { coeff: t.coeff * k as f64, rho_powers: t.rho_powers.clone(), v_powers: powers };
                    gv[j] += self.monomial(&reduced, rho, v);
                }
            }
        }
        Some((gr, gv))
    }
}

/// Wraps a closure; gradients come from central differences.
pub struct FnHamiltonian<F>(pub F);

impl<F> InvariantHamiltonian for FnHamiltonian<F>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync,
{
    fn value(&self, rho: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (self.0)(rho, v)
    }
}

/// Largest `|h(h . (rho, v)) - h(rho, v)|` over the H samples of the model and
/// the supplied probe points.
pub fn invariance_residual(
    model: &SliceModel,
    ham: &dyn InvariantHamiltonian,
    probes: &[(DVector<f64>, DVector<f64>)],
) -> Result<f64> {
    let g = model.algebra();
    let mut worst: f64 = 0.0;
    for (sample, lv) in model.anchor().h_samples.iter().zip(model.v_samples()) {
        for (rho, v) in probes {
            let moved: DualVector = g.coadjoint(&sample.element, &model.embed_m_star(rho))?;
            let rho_h = model.m_star_coords(&moved);
            let v_h = lv * v;
            worst = worst.max((ham.value(&rho_h, &v_h) - ham.value(rho, v)).abs());
        }
    }
    Ok(worst)
}

/// Largest difference between the analytic gradient and central differences
/// at the probe points; zero when no analytic gradient exists.
pub fn gradient_residual(ham: &dyn InvariantHamiltonian, probes: &[(DVector<f64>, DVector<f64>)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (rho, v) in probes {
        if let Some((gr, gv)) = ham.gradient(rho, v) {
            let (fr, fv) = finite_difference_gradient(ham, rho, v);
            worst = worst.max((gr - fr).amax()).max((gv - fv).amax());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_gradient_matches_differences() {
        let h = Oscillator { rho_weight: 1.5, v_weight: 0.7, quartic: 0.3 };
        let probes = vec![(DVector::from_vec(vec![0.2, -0.4]), DVector::from_vec(vec![0.5, 0.1, -0.3]))];
        assert!(gradient_residual(&h, &probes) < 1e-8);
    }

    #[test]
    fn polynomial_value_and_gradient() {
        let p = Polynomial {
            terms: vec![
                Monomial { coeff: 2.0, rho_powers: vec![2], v_powers: vec![] },
                Monomial { coeff: -1.0, rho_powers: vec![1], v_powers: vec![0, 3] },
            ],
        };
        let rho = DVector::from_vec(vec![0.5]);
        let v = DVector::from_vec(vec![9.0, 2.0]);
        assert!((p.value(&rho, &v) - (2.0 * 0.25 - 0.5 * 8.0)).abs() < 1e-14);
        let (gr, gv) = p.gradient(&rho, &v).unwrap();
        assert!((gr[0] - (4.0 * 0.5 - 8.0)).abs() < 1e-14);
        assert_eq!(gv[0], 0.0);
        assert!((gv[1] - (-0.5 * 3.0 * 4.0)).abs() < 1e-14);
        assert!(gradient_residual(&p, &[(rho, v)]) < 1e-6);
    }

    #[test]
    fn closure_hamiltonian_uses_differences() {
        let h = FnHamiltonian(|r: &DVector<f64>, v: &DVector<f64>| r[0].sin() + v[0] * v[1]);
        let (gr, gv) = gradient(&h, &DVector::from_vec(vec![0.3]), &DVector::from_vec(vec![2.0, -1.0]));
        assert!((gr[0] - 0.3f64.cos()).abs() < 1e-9);
        assert!((gv[0] + 1.0).abs() < 1e-9 && (gv[1] - 2.0).abs() < 1e-9);
    }
}
