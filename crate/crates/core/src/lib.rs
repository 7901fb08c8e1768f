//! Grover-iteration stopping rules for telling apart two candidate sizes of a marked set.
//!
//! Given an oracle for a set `S` of `N` elements and the promise `|S| ∈ {M, K}`, iterate the
//! ordinary Grover operator `m` times and measure: a marked outcome means `K`, an unmarked
//! one means `M`. This crate computes and certifies the `m` to use.
//!
//! * [`model`]: angles, the rotated state, failure probabilities, Chebyshev form.
//! * [`rule`]: the constructive rule `l = p·s` and its certificate.
//! * [`search`]: exhaustive minimal-`l` scans, torus orbits, multi-hypothesis schedules.
//! * [`transforms`]: divisor reduction, padding, closed-form bounds.
//! * [`lab`]: full-register simulation and Monte Carlo discrimination.
//! * [`report`]: tables, traces and diagnostics for the CLI.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

pub mod error;
pub mod lab;
pub mod model;
pub mod report;
pub mod rule;
pub mod scalar;
pub mod search;
pub mod transforms;

pub use error::{Error, Result};
pub use lab::{
    measure, run_discrimination, simulate, DiscriminationOutcome, Hypothesis, MarkedSet, StateVector,
};
pub use model::{
    angles_of, chebyshev_residuals, chebyshev_t, error_threshold, failure_probabilities, half_angle, state_after,
    FailurePair, GroverAngles, ProblemInstance, SubspaceState,
};
pub use rule::{
    certify, check_applicability, construct_rule, gamma_upper_bound, nearest_odd, Applicability, CertificateReport,
    RuleMode, StoppingRule,
};
pub use scalar::Real;
pub use search::{
    default_horizon, kronecker_search, minimal_odd_l, multi_hypothesis_schedule, relaxed_score, strict_distance,
    torus_point, KroneckerTarget, Parity, SearchMode, SearchReport, TorusPoint,
};
pub use transforms::{iteration_bound, pad_for_ratio, pad_instance, reduce_common_divisor, PaddedInstance};

pub type Angles = GroverAngles<f64>;
pub type Angles32 = GroverAngles<f32>;
pub type Subspace = SubspaceState<f64>;
pub type Failures = FailurePair<f64>;
pub type Rule = StoppingRule<f64>;
pub type Rule32 = StoppingRule<f32>;
pub type Certificate = CertificateReport<f64>;
pub type Search = SearchReport<f64>;
pub type Point = TorusPoint<f64>;
pub type Padded = PaddedInstance<f64>;
pub type Register = StateVector<f64>;
pub type Register32 = StateVector<f32>;
