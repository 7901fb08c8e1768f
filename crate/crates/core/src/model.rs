//! Two-dimensional model of Grover's rotation.
//!
//! With `|S| = X` marked elements out of `N`, the register only ever moves in the plane
//! spanned by `|α⟩` (uniform over unmarked) and `|β⟩` (uniform over marked). One Grover
//! iteration rotates that plane by `θ_X = 2·arcsin√(X/N)` and the uniform start state sits
//! at angle `θ_X/2`, so after `m` iterations the state is at `(m + ½)·θ_X`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The triple `(N, M, K)`: database size and the two candidate marked-set sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct ProblemInstance {
    n: u64,
    m: u64,
    k: u64,
}

#[derive(Deserialize)]
struct RawInstance {
    n: u64,
    m: u64,
    k: u64,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        ProblemInstance::new(raw.n, raw.m, raw.k)
    }
}

impl ProblemInstance {
    /// Validates `0 ≤ M < K ≤ N` with `N > 0`.
    pub fn new(n: u64, m: u64, k: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDatabase);
        }
        if m >= k {
            return Err(Error::Ordering { m, k });
        }
        if k > n {
            return Err(Error::CountExceedsDatabase { count: k, n });
        }
        Ok(Self { n, m, k })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `M < K < N/2`, the regime in which the constructive rule is stated.
    pub fn in_constructive_regime(&self) -> bool {
        self.m < self.k && 2 * self.k < self.n
    }

    /// `M = 0`: the problem collapses to ordinary Grover search for `K` elements.
    pub fn is_degenerate(&self) -> bool {
        self.m == 0
    }
}

/// `arcsin √(count/N)`, the angle between the uniform state and `|α⟩`.
pub fn half_angle<T: Real>(count: u64, n: u64) -> Result<T> {
    if n == 0 {
        return Err(Error::EmptyDatabase);
    }
    if count > n {
        return Err(Error::CountExceedsDatabase { count, n });
    }
    let ratio = T::from_count(count) / T::from_count(n);
    Ok(ratio.sqrt().asin())
}

/// Rotation angles for both hypotheses and their ratio `γ = θ_K / θ_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroverAngles<T> {
    pub theta_m: T,
    pub theta_k: T,
    /// `None` when `M = 0`.
    pub gamma: Option<T>,
}

impl<T: Real> GroverAngles<T> {
    pub fn of(instance: &ProblemInstance) -> Self {
        angles_of(instance)
    }

    /// `γ - 1`, absent for `M = 0`.
    pub fn gamma_excess(&self) -> Option<T> {
        self.gamma.map(|g| g - T::one())
    }
}

pub fn angles_of<T: Real>(instance: &ProblemInstance) -> GroverAngles<T> {
    let two = T::lit(2.0);
    // counts are validated against N at construction
    let theta_m = two * half_angle::<T>(instance.m, instance.n).unwrap();
    let theta_k = two * half_angle::<T>(instance.k, instance.n).unwrap();
    let gamma = if instance.m == 0 {
        None
    } else {
        Some(theta_k / theta_m)
    };
    GroverAngles {
        theta_m,
        theta_k,
        gamma,
    }
}

/// Coordinates of the register on `|α⟩` and `|β⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceState<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> SubspaceState<T> {
    pub fn norm_sqr(&self) -> T {
        self.alpha * self.alpha + self.beta * self.beta
    }
}

/// State after `m` Grover iterations for rotation angle `theta`.
pub fn state_after<T: Real>(m: u64, theta: T) -> SubspaceState<T> {
    let angle = T::from_count(2 * m + 1) * theta / T::lit(2.0);
    let (beta, alpha) = angle.sin_cos();
    SubspaceState { alpha, beta }
}

/// Probabilities of the two wrong answers after `m = (l-1)/2` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailurePair<T> {
    /// Measuring an unmarked element although `|S| = K`.
    pub fail_k: T,
    /// Measuring a marked element although `|S| = M`.
    pub fail_m: T,
    /// `l` was odd; for even `l` the values are still evaluated but do not
    /// correspond to a whole number of iterations.
    pub l_odd: bool,
}

impl<T: Real> FailurePair<T> {
    pub fn worst(&self) -> T {
        self.fail_k.max(self.fail_m)
    }
}

pub fn failure_probabilities<T: Real>(l: u64, angles: &GroverAngles<T>) -> FailurePair<T> {
    let half = T::from_count(l) / T::lit(2.0);
    let c = (half * angles.theta_k).cos();
    let s = (half * angles.theta_m).sin();
    FailurePair {
        fail_k: c * c,
        fail_m: s * s,
        l_odd: l % 2 == 1,
    }
}

/// Error threshold `sin²(2πε)` attached to a tolerance `ε`.
pub fn error_threshold<T: Real>(epsilon: T) -> T {
    let s = (T::lit(2.0) * T::PI() * epsilon).sin();
    s * s
}

/// Chebyshev polynomial of the first kind, `T_l(x) = cos(l·arccos x)` on `[-1, 1]`.
///
/// The trigonometric form keeps full accuracy for degrees in the thousands where the
/// three-term recurrence drifts.
pub fn chebyshev_t<T: Real>(l: u64, x: T) -> Result<T> {
    if !(x.abs() <= T::one()) {
        return Err(Error::ChebyshevDomain(x.to_f64_lossy()));
    }
    Ok((T::from_count(l) * x.acos()).cos())
}

/// `|T_l((N-2M)/N) - cos(l θ_M)|` and `|T_l((N-2K)/N) - cos(l θ_K)|`.
///
/// `(N - 2X)/N = cos θ_X`, so both residuals vanish up to rounding; this ties the
/// square-root-free polynomial criterion to the angle model.
pub fn chebyshev_residuals<T: Real>(l: u64, instance: &ProblemInstance) -> (T, T) {
    let angles = angles_of::<T>(instance);
    let n = T::from_count(instance.n);
    let lf = T::from_count(l);
    let arg = |x: u64| (n - T::lit(2.0) * T::from_count(x)) / n;
    let poly_m = chebyshev_t(l, arg(instance.m)).unwrap();
    let poly_k = chebyshev_t(l, arg(instance.k)).unwrap();
    (
        (poly_m - (lf * angles.theta_m).cos()).abs(),
        (poly_k - (lf * angles.theta_k).cos()).abs(),
    )
}
