//! Constructive stopping rule for the two-hypothesis problem.
//!
//! For `M < K < N/2` with `γ = θ_K/θ_M` close to one, pick `p` as the nearest odd integer
//! to `1/(4(γ-1))` and `s` as the nearest odd integer to `4π/θ_M`. Then `l = p·s` is odd,
//! `l·θ_M/4π` lands within `γ-1` of the integer `p` and `l·θ_K/4π` lands within `2(γ-1)`
//! of `p + 1/4`. Running `m = (l-1)/2` iterations leaves the register near `|α⟩_M` under
//! the small hypothesis and near `|β⟩_K` under the large one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{angles_of, error_threshold, failure_probabilities, ProblemInstance};
use crate::scalar::Real;

/// Which applicability conditions hold for an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Applicability<T> {
    /// `M < K < N/2`.
    pub ordering_ok: bool,
    /// `√K < 16(γ-1)²√N`.
    pub size_condition_ok: bool,
    /// `γ - 1 ≤ 1/4`.
    pub gamma_small_ok: bool,
    /// Smallest `ε` for which `K < (1 + ε/(2√2))²M`, i.e. `2√2(√(K/M) - 1)`.
    /// Advisory only.
    pub epsilon_bound: Option<T>,
}

impl<T> Applicability<T> {
    pub fn all_ok(&self) -> bool {
        self.ordering_ok && self.size_condition_ok && self.gamma_small_ok
    }

    /// Names of the failed flags, in a fixed order.
    pub fn failures(&self) -> Vec<String> {
        [
            (self.ordering_ok, "ordering"),
            (self.size_condition_ok, "size_condition"),
            (self.gamma_small_ok, "gamma_small"),
        ]
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name.to_string())
        .collect()
    }
}

pub fn check_applicability<T: Real>(instance: &ProblemInstance) -> Applicability<T> {
    let angles = angles_of::<T>(instance);
    let ordering_ok = instance.in_constructive_regime();
    let (size_condition_ok, gamma_small_ok) = match angles.gamma_excess() {
        Some(excess) => {
            let k = T::from_count(instance.k()).sqrt();
            let n = T::from_count(instance.n()).sqrt();
            (
                k < T::lit(16.0) * excess * excess * n,
                excess <= T::lit(0.25),
            )
        }
        None => (false, false),
    };
    let epsilon_bound = (!instance.is_degenerate()).then(|| {
        let ratio = T::from_count(instance.k()) / T::from_count(instance.m());
        T::lit(2.0) * T::SQRT_2() * (ratio.sqrt() - T::one())
    });
    Applicability {
        ordering_ok,
        size_condition_ok,
        gamma_small_ok,
        epsilon_bound,
    }
}

/// `√2(√(K/M) - 1)`, a strict upper bound on `γ - 1` when `M < K < N/2`.
pub fn gamma_upper_bound<T: Real>(instance: &ProblemInstance) -> Result<T> {
    if instance.is_degenerate() {
        return Err(Error::DegenerateM);
    }
    let ratio = T::from_count(instance.k()) / T::from_count(instance.m());
    Ok(T::SQRT_2() * (ratio.sqrt() - T::one()))
}

/// Smallest positive odd integer nearest to `x ≥ 0`. Ties go to the smaller candidate.
pub fn nearest_odd<T: Real>(x: T) -> u64 {
    let two = T::lit(2.0);
    let y = (x - T::one()) / two;
    let mut j = y.floor();
    if y - j > T::lit(0.5) {
        j = j + T::one();
    }
    let odd = two * j + T::one();
    if odd < T::one() {
        1
    } else {
        odd.to_u64().unwrap_or(u64::MAX | 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleMode {
    /// Refuse unless every applicability flag holds.
    #[default]
    Strict,
    /// Build `p`, `s`, `l` whenever `γ` is defined and leave judgement to [`certify`].
    BestEffort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule<T> {
    pub p: u64,
    pub s: u64,
    /// `p·s`; odd because both factors are.
    pub l: u64,
    /// Grover iterations, `(l-1)/2`.
    pub m: u64,
    /// `|l·θ_K/4π - p - 1/4|`
    pub residual_k: T,
    /// `|l·θ_M/4π - p|`
    pub residual_m: T,
    /// `4√N/(√K - √M)`
    pub l_bound: T,
    /// `2√N/(√K - √M)`
    pub m_bound: T,
}

/// Bounds `2√N/(√K-√M)` on iterations and `4√N/(√K-√M)` on `l`.
pub(crate) fn closed_form_bounds<T: Real>(instance: &ProblemInstance) -> (T, T) {
    let n = T::from_count(instance.n()).sqrt();
    let gap = T::from_count(instance.k()).sqrt() - T::from_count(instance.m()).sqrt();
    let m_bound = T::lit(2.0) * n / gap;
    (m_bound, T::lit(2.0) * m_bound)
}

pub fn construct_rule<T: Real>(instance: &ProblemInstance, mode: RuleMode) -> Result<StoppingRule<T>> {
    if instance.is_degenerate() {
        return Err(Error::DegenerateM);
    }
    let angles = angles_of::<T>(instance);
    let excess = angles.gamma_excess().expect("gamma defined for M > 0");
    if mode == RuleMode::Strict {
        let app = check_applicability::<T>(instance);
        if !app.ordering_ok || !app.size_condition_ok {
            return Err(Error::NotApplicable {
                reasons: app.failures(),
            });
        }
        if !app.gamma_small_ok {
            return Err(Error::GammaTooLarge(excess.to_f64_lossy()));
        }
    }
    if !(excess > T::zero()) {
        return Err(Error::NotApplicable {
            reasons: vec!["gamma".into()],
        });
    }

    let four_pi = T::lit(4.0) * T::PI();
    let p = nearest_odd(T::one() / (T::lit(4.0) * excess));
    let s = nearest_odd(four_pi / angles.theta_m);
    let l = p.checked_mul(s).ok_or(Error::Overflow)?;
    let (pf, lf) = (T::from_count(p), T::from_count(l));
    let residual_k = (lf * angles.theta_k / four_pi - pf - T::lit(0.25)).abs();
    let residual_m = (lf * angles.theta_m / four_pi - pf).abs();
    let (m_bound, l_bound) = closed_form_bounds::<T>(instance);
    Ok(StoppingRule {
        p,
        s,
        l,
        m: (l - 1) / 2,
        residual_k,
        residual_m,
        l_bound,
        m_bound,
    })
}

/// One numerically evaluated inequality `value < bound` (or `≤`, per `name`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check<T> {
    pub name: String,
    pub passed: bool,
    pub value: Option<T>,
    pub bound: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport<T> {
    pub epsilon: T,
    /// `sin²(2πε)`
    pub error_threshold: T,
    pub fail_k: T,
    pub fail_m: T,
    pub checks: Vec<Check<T>>,
    pub all_passed: bool,
}

impl<T> CertificateReport<T> {
    pub fn check(&self, name: &str) -> Option<&Check<T>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates every inequality the rule is supposed to satisfy, with no slack added.
pub fn certify<T: Real>(rule: &StoppingRule<T>, instance: &ProblemInstance, epsilon: T) -> CertificateReport<T> {
    let angles = angles_of::<T>(instance);
    let excess = angles.gamma_excess();
    let threshold = error_threshold(epsilon);
    let failures = failure_probabilities(rule.l, &angles);
    let two = T::lit(2.0);

    let strict = |name: &str, value: T, bound: Option<T>| Check {
        name: name.to_string(),
        passed: bound.is_some_and(|b| value < b),
        value: Some(value),
        bound,
    };
    let structural = |name: &str, passed: bool| Check {
        name: name.to_string(),
        passed,
        value: None,
        bound: None,
    };

    let checks = vec![
        structural("l_odd", rule.l % 2 == 1),
        structural(
            "l_factorization",
            rule.p.checked_mul(rule.s) == Some(rule.l) && rule.l.saturating_sub(1) / 2 == rule.m,
        ),
        strict("residual_k", rule.residual_k, excess.map(|e| two * e)),
        strict("residual_m", rule.residual_m, excess),
        Check {
            name: "epsilon".to_string(),
            passed: excess.is_some_and(|e| two * e <= epsilon),
            value: excess.map(|e| two * e),
            bound: Some(epsilon),
        },
        strict("fail_k", failures.fail_k, Some(threshold)),
        strict("fail_m", failures.fail_m, Some(threshold)),
        Check {
            name: "l_bound".to_string(),
            passed: T::from_count(rule.l) <= rule.l_bound,
            value: Some(T::from_count(rule.l)),
            bound: Some(rule.l_bound),
        },
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    CertificateReport {
        epsilon,
        error_threshold: threshold,
        fail_k: failures.fail_k,
        fail_m: failures.fail_m,
        checks,
        all_passed,
    }
}
