//! Instance-level transformations: common-divisor reduction, database padding, and the
//! closed-form iteration bounds.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{angles_of, ProblemInstance};
use crate::rule::{check_applicability, closed_form_bounds};
use crate::scalar::Real;

/// Divides `(M, K, N)` by their common divisor. Rotation angles are unchanged.
pub fn reduce_common_divisor(instance: &ProblemInstance) -> ProblemInstance {
    let g = instance.m().gcd(&instance.k()).gcd(&instance.n());
    ProblemInstance::new(instance.n() / g, instance.m() / g, instance.k() / g)
        .expect("dividing a valid triple by a common divisor keeps it valid")
}

/// A database enlarged by `rN` artificial elements of which `rM` are marked, so the two
/// hypotheses become `M' = (r+1)M` and `K' = K + rM` out of `N' = (r+1)N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddedInstance<T> {
    pub r: u64,
    pub m_prime: u64,
    pub k_prime: u64,
    pub n_prime: u64,
    pub original: ProblemInstance,
    pub padded: ProblemInstance,
    pub epsilon: T,
    /// `r + 1 > (a-1)√2/ε`
    pub padding_condition_ok: bool,
    /// `√(M/N) < (2ε/3)²`
    pub premise_ok: bool,
    /// `γ' - 1` of the padded instance.
    pub gamma_excess: T,
    /// `√((r+a)/(r+1)) - 1`, a lower bound on `γ' - 1`.
    pub gamma_excess_lower: T,
    pub gamma_lower_ok: bool,
    /// `γ' - 1 > ε(a-1)/(3√2)`; for `a = 2` this is the `ε/(3√2)` bound.
    pub gamma_floor_ok: bool,
    /// `√(K'/N') < 16(γ'-1)²`
    pub size_condition_ok: bool,
    /// `2√N'/(√K'-√M')`
    pub m_bound: T,
    /// `5(r+1)√(N/M)`
    pub m_bound_padding: T,
    pub m_bound_ok: bool,
}

/// Pads `(M, K = aM, N)` so that `K'/M'` is close enough to one for the constructive rule.
///
/// `r` is the least integer with `r + 1 > (a-1)√2/ε`, which for `a = 2` is the
/// `r + 1 > √2/ε` rule.
pub fn pad_instance<T: Real>(m: u64, k: u64, n: u64, epsilon: T) -> Result<PaddedInstance<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::BadEpsilon(epsilon.to_f64_lossy()));
    }
    if m == 0 || k <= m || 2 * k > n {
        return Err(Error::BadRatio);
    }
    let original = ProblemInstance::new(n, m, k)?;

    let premise_lhs = (T::from_count(m) / T::from_count(n)).sqrt();
    let premise_rhs = (T::lit(2.0) * epsilon / T::lit(3.0)).powi(2);
    if !(premise_lhs < premise_rhs) {
        return Err(Error::PremiseViolated {
            lhs: premise_lhs.to_f64_lossy(),
            rhs: premise_rhs.to_f64_lossy(),
        });
    }

    let a = T::from_count(k) / T::from_count(m);
    let excess_ratio = a - T::one();
    let target = excess_ratio * T::SQRT_2() / epsilon;
    let r = target.floor().to_u64().ok_or(Error::Overflow)?;
    let r_plus_one = r.checked_add(1).ok_or(Error::Overflow)?;

    let m_prime = r_plus_one.checked_mul(m).ok_or(Error::Overflow)?;
    let k_prime = r.checked_mul(m).and_then(|x| x.checked_add(k)).ok_or(Error::Overflow)?;
    let n_prime = r_plus_one.checked_mul(n).ok_or(Error::Overflow)?;
    let padded = ProblemInstance::new(n_prime, m_prime, k_prime)?;

    let angles = angles_of::<T>(&padded);
    let gamma_excess = angles.gamma_excess().expect("M' > 0");
    let rf = T::from_count(r);
    let gamma_excess_lower = ((rf + a) / (rf + T::one())).sqrt() - T::one();
    let gamma_floor = epsilon * excess_ratio / (T::lit(3.0) * T::SQRT_2());

    let size_condition_ok = check_applicability::<T>(&padded).size_condition_ok;
    let (m_bound, _) = closed_form_bounds::<T>(&padded);
    let m_bound_padding =
        T::lit(5.0) * T::from_count(r_plus_one) * (T::from_count(n) / T::from_count(m)).sqrt();

    Ok(PaddedInstance {
        r,
        m_prime,
        k_prime,
        n_prime,
        original,
        padded,
        epsilon,
        padding_condition_ok: T::from_count(r_plus_one) > target,
        premise_ok: true,
        gamma_excess,
        gamma_excess_lower,
        gamma_lower_ok: gamma_excess >= gamma_excess_lower,
        gamma_floor_ok: gamma_excess > gamma_floor,
        size_condition_ok,
        m_bound,
        m_bound_padding,
        m_bound_ok: m_bound < m_bound_padding,
    })
}

/// [`pad_instance`] for an integer ratio `K = aM`.
pub fn pad_for_ratio<T: Real>(m: u64, n: u64, a: u64, epsilon: T) -> Result<PaddedInstance<T>> {
    if a < 2 {
        return Err(Error::BadRatio);
    }
    let k = m.checked_mul(a).ok_or(Error::BadRatio)?;
    pad_instance(m, k, n, epsilon)
}

/// The `K = M + 1` special case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjacentSizes<T> {
    /// `4√((M+1)N)`
    pub m_bound: T,
    /// `√((M+1)/N) < (4/(3M))²`, which puts `M` roughly below `N^{1/5}`.
    pub premise_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationBound<T> {
    /// `2√N/(√K-√M)`
    pub m_bound: T,
    /// `4√N/(√K-√M)`
    pub l_bound: T,
    pub adjacent: Option<AdjacentSizes<T>>,
}

pub fn iteration_bound<T: Real>(instance: &ProblemInstance) -> IterationBound<T> {
    let (m_bound, l_bound) = closed_form_bounds::<T>(instance);
    let adjacent = (instance.k() == instance.m() + 1 && instance.m() > 0).then(|| {
        let k = T::from_count(instance.k());
        let n = T::from_count(instance.n());
        let mf = T::from_count(instance.m());
        AdjacentSizes {
            m_bound: T::lit(4.0) * (k * n).sqrt(),
            premise_ok: (k / n).sqrt() < (T::lit(4.0) / (T::lit(3.0) * mf)).powi(2),
        }
    });
    IterationBound {
        m_bound,
        l_bound,
        adjacent,
    }
}
