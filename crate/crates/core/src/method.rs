//! Multistep method coefficients.
//!
//! A `k`-step method on a nonuniform grid uses one row of coefficients
//! `alpha_0..alpha_k`, `beta_0..beta_k` per step. For BDF the row depends on the
//! `k - 1` consecutive step ratios inside its stencil. Rows are generic over
//! [`Scalar`] so the same code produces exact rationals and doubles.
//!
//! Ratio convention: `ratios[i] = h_{n+i+1} / h_{n+i}`, ordered oldest to
//! newest within the stencil `t_n, ..., t_{n+k}`. The last entry is the ratio
//! of the newest step to the one before it. Perturbation stencils in
//! [`crate::stability`] number increments from the newest ratio instead
//! (`v_1` is `ratios[k-2] - 1`).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported step number; BDF is zero stable for `1 <= k <= 6`.
pub const MAX_STEPS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Bdf,
}

/// Scaling of a variable-step row. Any nonzero multiple of a row describes
/// the same method; the scaling does change the row operator `R` and hence
/// the perturbation stencils `T_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `beta_k = 1` on every grid.
    LeadingBeta,
    /// Denominator-free form, scaled to agree with the constant-step row at
    /// unit ratio. For BDF2 this is `(r^2, -(1+r)^2, 1+2r) / 2` with
    /// `beta_2 = (1+r)/2`. Only defined for `k <= 2`.
    Polynomial,
}

impl Normalization {
    /// Default scaling per step number: the denominator-free BDF2 row for
    /// `k <= 2`, `beta_k = 1` above.
    pub fn canonical(k: usize) -> Self {
        if k <= 2 {
            Normalization::Polynomial
        } else {
            Normalization::LeadingBeta
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Normalization::LeadingBeta => "leading-beta",
            Normalization::Polynomial => "polynomial",
        }
    }
}

/// A `k`-step method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MethodSpec {
    family: Family,
    k: usize,
    normalization: Normalization,
}

impl MethodSpec {
    /// BDF-`k` with the canonical normalization.
    pub fn bdf(k: usize) -> Result<Self> {
        if !(1..=MAX_STEPS).contains(&k) {
            return Err(Error::UnsupportedSteps(k));
        }
        Ok(Self {
            family: Family::Bdf,
            k,
            normalization: Normalization::canonical(k),
        })
    }

    pub fn with_normalization(self, normalization: Normalization) -> Result<Self> {
        if normalization == Normalization::Polynomial && self.k > 2 {
            return Err(Error::UnsupportedNormalization {
                name: normalization.name(),
                k: self.k,
            });
        }
        Ok(Self {
            normalization,
            ..self
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Step number `k`.
    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }
}

/// One row of method coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow<T = f64> {
    /// `alpha_0..alpha_k`, oldest node first.
    pub alpha: Vec<T>,
    /// `beta_0..beta_k`.
    pub beta: Vec<T>,
    /// The `k - 1` step ratios the row was built from (oldest to newest).
    pub ratios: Vec<T>,
}

impl<T: Scalar> CoefficientRow<T> {
    pub fn steps(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha_sum(&self) -> T {
        self.alpha.iter().fold(T::zero(), |acc, a| acc + a.clone())
    }

    pub fn to_f64(&self) -> CoefficientRow<f64> {
        let conv = |v: &[T]| v.iter().map(Scalar::to_f64_lossy).collect();
        CoefficientRow {
            alpha: conv(&self.alpha),
            beta: conv(&self.beta),
            ratios: conv(&self.ratios),
        }
    }

    fn scale(&mut self, factor: &T) {
        for a in self.alpha.iter_mut().chain(self.beta.iter_mut()) {
            *a = a.clone() * factor.clone();
        }
    }
}

/// Coefficients `gamma_0..gamma_{k-1}` of the extraneous factor, `alpha = gamma * (-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatedRow<T = f64> {
    pub gamma: Vec<T>,
}

impl<T: Scalar> DeflatedRow<T> {
    /// Convolution with the backward difference `(-1, 1)`.
    pub fn reconstruct(&self) -> Vec<T> {
        convolve_with_difference(&self.gamma)
    }

    pub fn to_f64(&self) -> DeflatedRow<f64> {
        DeflatedRow {
            gamma: self.gamma.iter().map(Scalar::to_f64_lossy).collect(),
        }
    }
}

/// Constant-step BDF-`k` row from `rho(z) = sum_{m=1}^{k} z^{k-m} (z-1)^m / m`.
///
/// This closed form does not go through the interpolation path used by
/// [`bdf_variable_row`], so the two can be compared.
pub fn bdf_constant_row<T: Scalar>(spec: &MethodSpec) -> Result<CoefficientRow<T>> {
    let k = spec.steps();
    if !(1..=MAX_STEPS).contains(&k) {
        return Err(Error::UnsupportedSteps(k));
    }
    let mut alpha = vec![T::zero(); k + 1];
    for m in 1..=k {
        // (z - 1)^m expanded with binomial coefficients, shifted by z^{k-m}.
        let mut binom: i64 = 1;
        for i in 0..=m {
            let sign = if (m - i) % 2 == 0 { 1 } else { -1 };
            alpha[k - m + i] = alpha[k - m + i].clone() + T::from_ratio(sign * binom, m as i64);
            binom = binom * (m - i) as i64 / (i as i64 + 1);
        }
    }
    let mut beta = vec![T::zero(); k + 1];
    beta[k] = T::one();
    Ok(CoefficientRow {
        alpha,
        beta,
        ratios: vec![T::one(); k - 1],
    })
}

/// Variable-step BDF-`k` row for the given consecutive step ratios.
///
/// The row is the derivative, at the newest node, of the Newton-form
/// interpolant through the `k + 1` stencil nodes, scaled by the newest step.
/// With [`Normalization::LeadingBeta`] the result has `beta_k = 1`.
pub fn bdf_variable_row<T: Scalar>(spec: &MethodSpec, ratios: &[T]) -> Result<CoefficientRow<T>> {
    let k = spec.steps();
    if !(1..=MAX_STEPS).contains(&k) {
        return Err(Error::UnsupportedSteps(k));
    }
    if ratios.len() != k - 1 {
        return Err(Error::RatioCount {
            expected: k - 1,
            got: ratios.len(),
        });
    }
    if let Some(index) = ratios.iter().position(|r| !r.is_positive_finite()) {
        return Err(Error::InvalidRatio { index });
    }

    let nodes = newest_first_nodes(ratios);
    let mut alpha = vec![T::zero(); k + 1];

    // p'(x_0) = sum_{s>=1} f[x_0..x_s] * prod_{i=1}^{s-1} (x_0 - x_i), and
    // f[x_0..x_s] = sum_{m<=s} y_m / prod_{i<=s, i!=m} (x_m - x_i).
    let mut weight = T::one();
    for s in 1..=k {
        if s > 1 {
            weight = weight * (nodes[0].clone() - nodes[s - 1].clone());
        }
        for m in 0..=s {
            let mut denom = T::one();
            for i in 0..=s {
                if i != m {
                    denom = denom * (nodes[m].clone() - nodes[i].clone());
                }
            }
            alpha[k - m] = alpha[k - m].clone() + weight.clone() / denom;
        }
    }

    let mut beta = vec![T::zero(); k + 1];
    beta[k] = T::one();
    let mut row = CoefficientRow {
        alpha,
        beta,
        ratios: ratios.to_vec(),
    };

    match spec.normalization() {
        Normalization::LeadingBeta => {}
        Normalization::Polynomial => {
            if k == 2 {
                let factor = (T::one() + ratios[0].clone()) / T::from_int(2);
                row.scale(&factor);
            } else if k > 2 {
                return Err(Error::UnsupportedNormalization {
                    name: Normalization::Polynomial.name(),
                    k,
                });
            }
        }
    }
    Ok(row)
}

/// Stencil nodes relative to the newest one, newest first, newest step = 1.
fn newest_first_nodes<T: Scalar>(ratios: &[T]) -> Vec<T> {
    let k = ratios.len() + 1;
    // steps[i] = h_{n+i}, with the newest h_{n+k-1} = 1.
    let mut steps = vec![T::one(); k];
    for i in (0..k - 1).rev() {
        steps[i] = steps[i + 1].clone() / ratios[i].clone();
    }
    let mut nodes = Vec::with_capacity(k + 1);
    nodes.push(T::zero());
    for m in 1..=k {
        let prev = nodes[m - 1].clone();
        nodes.push(prev - steps[k - m].clone());
    }
    nodes
}

/// Removes the principal root `z = 1` by synthetic division.
///
/// `gamma_{k-1} = alpha_k` and `gamma_{j-1} = gamma_j + alpha_j`; the remainder
/// `alpha_0 + gamma_0` must vanish (exactly for rationals, within
/// `1e-13 * max(1, |alpha|_inf)` for doubles).
pub fn deflate_row<T: Scalar>(row: &CoefficientRow<T>) -> Result<DeflatedRow<T>> {
    deflate_alpha(&row.alpha)
}

/// [`deflate_row`] on a bare `alpha` vector.
pub fn deflate_alpha<T: Scalar>(alpha: &[T]) -> Result<DeflatedRow<T>> {
    let k = alpha
        .len()
        .checked_sub(1)
        .ok_or(Error::InvalidArgument("empty coefficient row"))?;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "a row needs at least two coefficients",
        ));
    }
    let mut gamma = vec![T::zero(); k];
    gamma[k - 1] = alpha[k].clone();
    for j in (1..k).rev() {
        gamma[j - 1] = gamma[j].clone() + alpha[j].clone();
    }
    let remainder = alpha[0].clone() + gamma[0].clone();
    let scale = alpha
        .iter()
        .map(|a| a.abs())
        .fold(T::zero(), |m, a| if a > m { a } else { m });
    if !remainder.is_negligible(&scale) {
        return Err(Error::NotPreconsistent(remainder.to_f64_lossy()));
    }
    Ok(DeflatedRow { gamma })
}

/// `gamma * (-1, 1)`: `alpha_j = gamma_{j-1} - gamma_j`.
pub fn convolve_with_difference<T: Scalar>(gamma: &[T]) -> Vec<T> {
    let k = gamma.len();
    (0..=k)
        .map(|j| {
            let left = if j >= 1 {
                gamma[j - 1].clone()
            } else {
                T::zero()
            };
            let right = if j < k { gamma[j].clone() } else { T::zero() };
            left - right
        })
        .collect()
}

/// Residual of the row on `q(t) = t^degree` at the given nodes:
/// `|sum alpha_j q(t_j) - h sum beta_j q'(t_j)|` with `h = t_k - t_{k-1}`.
pub fn exactness_residual_degree<T: Scalar>(
    row: &CoefficientRow<T>,
    nodes: &[T],
    degree: u32,
) -> Result<T> {
    check_nodes(row, nodes)?;
    let k = row.steps();
    let h = nodes[k].clone() - nodes[k - 1].clone();
    let mut lhs = T::zero();
    let mut rhs = T::zero();
    for j in 0..=k {
        let t = &nodes[j];
        lhs = lhs + row.alpha[j].clone() * pow(t, degree);
        if degree > 0 {
            rhs = rhs + row.beta[j].clone() * T::from_int(i64::from(degree)) * pow(t, degree - 1);
        }
    }
    Ok((lhs - h * rhs).abs())
}

/// Maximum of [`exactness_residual_degree`] over degrees `0..=k`.
pub fn exactness_residual<T: Scalar>(row: &CoefficientRow<T>, nodes: &[T]) -> Result<T> {
    let k = row.steps();
    let mut worst = T::zero();
    for d in 0..=k as u32 {
        let r = exactness_residual_degree(row, nodes, d)?;
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

fn check_nodes<T: Scalar>(row: &CoefficientRow<T>, nodes: &[T]) -> Result<()> {
    let k = row.steps();
    if nodes.len() != k + 1 || row.beta.len() != k + 1 {
        return Err(Error::NodeMismatch("need k + 1 nodes and coefficients"));
    }
    if k == 0 {
        return Err(Error::NodeMismatch("row has no steps"));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NodeMismatch("nodes must be strictly increasing"));
    }
    if row.ratios.len() != k - 1 {
        return Err(Error::NodeMismatch("ratio count differs from k - 1"));
    }
    for (i, r) in row.ratios.iter().enumerate() {
        let h0 = nodes[i + 1].clone() - nodes[i].clone();
        let h1 = nodes[i + 2].clone() - nodes[i + 1].clone();
        let actual = h1 / h0;
        let diff = (actual.clone() - r.clone()).abs();
        let ok = if T::EXACT {
            diff.is_zero()
        } else {
            diff.to_f64_lossy() <= 1e-10 * r.to_f64_lossy().abs().max(1.0)
        };
        if !ok {
            return Err(Error::NodeMismatch(
                "node spacing disagrees with the row's ratios",
            ));
        }
    }
    Ok(())
}

fn pow<T: Scalar>(x: &T, e: u32) -> T {
    (0..e).fold(T::one(), |acc, _| acc * x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn euler_row() {
        let spec = MethodSpec::bdf(1).unwrap();
        let row: CoefficientRow<Rational> = bdf_constant_row(&spec).unwrap();
        assert_eq!(row.alpha, vec![q(-1, 1), q(1, 1)]);
        assert_eq!(row.beta, vec![q(0, 1), q(1, 1)]);
        let g = deflate_row(&row).unwrap();
        assert_eq!(g.gamma, vec![q(1, 1)]);
    }

    #[test]
    fn bdf2_constant_and_deflation() {
        let spec = MethodSpec::bdf(2).unwrap();
        let row: CoefficientRow<Rational> = bdf_constant_row(&spec).unwrap();
        assert_eq!(row.alpha, vec![q(1, 2), q(-2, 1), q(3, 2)]);
        let g = deflate_row(&row).unwrap();
        assert_eq!(g.gamma, vec![q(-1, 2), q(3, 2)]);
    }

    #[test]
    fn bdf2_variable_at_ratio_two() {
        let spec = MethodSpec::bdf(2).unwrap();
        let row: CoefficientRow<Rational> = bdf_variable_row(&spec, &[q(2, 1)]).unwrap();
        assert_eq!(row.alpha, vec![q(2, 1), q(-9, 2), q(5, 2)]);
        assert_eq!(row.beta[2], q(3, 2));
        // nodes t_n = 0, t_{n+1} = 1, t_{n+2} = 3 realize ratio 2
        let nodes = [q(0, 1), q(1, 1), q(3, 1)];
        assert_eq!(exactness_residual(&row, &nodes).unwrap(), q(0, 1));
    }

    #[test]
    fn leading_beta_bdf2() {
        let spec = MethodSpec::bdf(2)
            .unwrap()
            .with_normalization(Normalization::LeadingBeta)
            .unwrap();
        let row: CoefficientRow<Rational> = bdf_variable_row(&spec, &[q(2, 1)]).unwrap();
        // r^2/(1+r), -(1+r), (1+2r)/(1+r)
        assert_eq!(row.alpha, vec![q(4, 3), q(-3, 1), q(5, 3)]);
        assert_eq!(row.beta[2], q(1, 1));
    }

    #[test]
    fn bdf3_unit_ratios_deflate_to_table_row() {
        let spec = MethodSpec::bdf(3).unwrap();
        let row: CoefficientRow<Rational> = bdf_variable_row(&spec, &[q(1, 1), q(1, 1)]).unwrap();
        let g = deflate_row(&row).unwrap();
        assert_eq!(g.gamma, vec![q(1, 3), q(-7, 6), q(11, 6)]);
    }

    #[test]
    fn bdf4_deflation() {
        let alpha = vec![q(1, 4), q(-4, 3), q(3, 1), q(-4, 1), q(25, 12)];
        let g = deflate_alpha(&alpha).unwrap();
        assert_eq!(g.gamma, vec![q(-1, 4), q(13, 12), q(-23, 12), q(25, 12)]);
        assert_eq!(g.reconstruct(), alpha);
    }

    #[test]
    fn bdf6_constant_row() {
        let spec = MethodSpec::bdf(6).unwrap();
        let row: CoefficientRow<Rational> = bdf_constant_row(&spec).unwrap();
        let expected = vec![
            q(1, 6),
            q(-6, 5),
            q(15, 4),
            q(-20, 3),
            q(15, 2),
            q(-6, 1),
            q(147, 60),
        ];
        assert_eq!(row.alpha, expected);
    }

    #[test]
    fn non_preconsistent_row_is_rejected() {
        let err = deflate_alpha(&[1.0, -2.0, 1.5]).unwrap_err();
        assert!(matches!(err, Error::NotPreconsistent(_)));
        let err = deflate_alpha(&[q(1, 2), q(-2, 1), q(3, 2) + q(1, 1_000_000_000)]).unwrap_err();
        assert!(matches!(err, Error::NotPreconsistent(_)));
    }

    #[test]
    fn bad_ratios_are_rejected() {
        let spec = MethodSpec::bdf(3).unwrap();
        assert_eq!(
            bdf_variable_row(&spec, &[1.0, 0.0]).unwrap_err(),
            Error::InvalidRatio { index: 1 }
        );
        assert_eq!(
            bdf_variable_row(&spec, &[f64::NAN, 1.0]).unwrap_err(),
            Error::InvalidRatio { index: 0 }
        );
        assert_eq!(
            bdf_variable_row(&spec, &[-1.0, 1.0]).unwrap_err(),
            Error::InvalidRatio { index: 0 }
        );
        assert_eq!(
            bdf_variable_row(&spec, &[1.0]).unwrap_err(),
            Error::RatioCount {
                expected: 2,
                got: 1
            }
        );
        assert_eq!(MethodSpec::bdf(7).unwrap_err(), Error::UnsupportedSteps(7));
        assert_eq!(MethodSpec::bdf(0).unwrap_err(), Error::UnsupportedSteps(0));
        assert!(MethodSpec::bdf(3)
            .unwrap()
            .with_normalization(Normalization::Polynomial)
            .is_err());
    }

    #[test]
    fn exactness_examples() {
        let spec = MethodSpec::bdf(2).unwrap();
        let row: CoefficientRow<Rational> = bdf_constant_row(&spec).unwrap();
        let nodes = [q(0, 1), q(1, 2), q(1, 1)];
        assert_eq!(exactness_residual_degree(&row, &nodes, 0).unwrap(), q(0, 1));
        assert_eq!(exactness_residual(&row, &nodes).unwrap(), q(0, 1));
        assert!(exactness_residual_degree(&row, &nodes, 3).unwrap() > q(0, 1));
    }

    #[test]
    fn exactness_rejects_mismatched_nodes() {
        let spec = MethodSpec::bdf(2).unwrap();
        let row: CoefficientRow<f64> = bdf_variable_row(&spec, &[2.0]).unwrap();
        assert!(matches!(
            exactness_residual(&row, &[0.0, 1.0, 2.0]),
            Err(Error::NodeMismatch(_))
        ));
        assert!(matches!(
            exactness_residual(&row, &[0.0, 1.0]),
            Err(Error::NodeMismatch(_))
        ));
    }
}
