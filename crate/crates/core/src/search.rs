//! Exhaustive search for the smallest useful odd `l`, torus-orbit tooling, and the
//! multi-hypothesis bisection scheduler.
//!
//! Over odd `l` the pair `(l·θ_K/4π, l·θ_M/4π) mod 1` walks on the 2-torus; the two
//! hypotheses are separated when it comes close to `(1/4, 0)`. All scans here are plain
//! linear sweeps over `l = 1, 3, 5, …` and therefore exact up to the horizon.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{failure_probabilities, FailurePair, GroverAngles, ProblemInstance};
use crate::rule::closed_form_bounds;
use crate::scalar::{circle_distance, frac, Real};

/// Odd-`l` scans longer than this are split across the rayon pool.
const PARALLEL_SCAN_MIN: u64 = 1 << 16;

/// Largest default horizon.
pub const HORIZON_CAP: u64 = 99_999_999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint<T> {
    pub l: u64,
    /// `frac(l·θ_K/4π)`
    pub x_k: T,
    /// `frac(l·θ_M/4π)`
    pub x_m: T,
}

pub fn torus_point<T: Real>(l: u64, angles: &GroverAngles<T>) -> Result<TorusPoint<T>> {
    if l.is_multiple_of(2) {
        return Err(Error::EvenL(l));
    }
    let scale = T::from_count(l) / (T::lit(4.0) * T::PI());
    Ok(TorusPoint {
        l,
        x_k: frac(scale * angles.theta_k),
        x_m: frac(scale * angles.theta_m),
    })
}

/// L∞ circle distance from the point to the target `(1/4, 0)`.
pub fn strict_distance<T: Real>(pt: &TorusPoint<T>) -> T {
    circle_distance(pt.x_k, T::lit(0.25)).max(circle_distance(pt.x_m, T::zero()))
}

/// Worst of the two failure probabilities at `l`.
///
/// Only squared trig values enter, so hits near `(1/4 mod 1/2, 0 mod 1/2)` also score
/// well; this is weaker than [`strict_distance`].
pub fn relaxed_score<T: Real>(l: u64, angles: &GroverAngles<T>) -> T {
    failure_probabilities(l, angles).worst()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// `strict_distance ≤ threshold`
    Strict,
    /// `relaxed_score ≤ threshold`
    #[default]
    Relaxed,
}

impl SearchMode {
    fn score<T: Real>(self, l: u64, angles: &GroverAngles<T>) -> T {
        match self {
            SearchMode::Relaxed => relaxed_score(l, angles),
            SearchMode::Strict => {
                strict_distance(&torus_point(l, angles).expect("scan visits odd l only"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport<T> {
    pub found: bool,
    pub l: Option<u64>,
    /// Value of the mode's score at `l`.
    pub score: Option<T>,
    /// Failure probabilities at `l`.
    pub scores: Option<FailurePair<T>>,
    pub threshold: T,
    /// Largest odd `l` the scan was allowed to visit.
    pub horizon: u64,
    /// Number of odd values examined.
    pub scanned: u64,
    pub mode: SearchMode,
}

/// Largest odd number not above `horizon` (0 when `horizon` is 0).
fn odd_ceiling(horizon: u64) -> u64 {
    if horizon == 0 {
        0
    } else if horizon % 2 == 1 {
        horizon
    } else {
        horizon - 1
    }
}

/// First odd `l` in `[lo, hi]` (both odd) meeting the threshold.
///
/// Disjoint ranges may be scanned independently; combine with [`merge_scans`].
pub fn scan_odd_range<T: Real>(
    angles: &GroverAngles<T>,
    threshold: T,
    mode: SearchMode,
    lo: u64,
    hi: u64,
) -> Option<u64> {
    let lo = lo | 1;
    if lo > hi {
        return None;
    }
    let count = (hi - lo) / 2 + 1;
    let hit = |i: u64| mode.score(lo + 2 * i, angles) <= threshold;
    let idx = if count >= PARALLEL_SCAN_MIN {
        (0..count).into_par_iter().find_first(|&i| hit(i))
    } else {
        (0..count).find(|&i| hit(i))
    };
    idx.map(|i| lo + 2 * i)
}

/// Merge rule for partitioned scans: the smallest hit wins.
pub fn merge_scans(parts: impl IntoIterator<Item = Option<u64>>) -> Option<u64> {
    parts.into_iter().flatten().min()
}

/// Smallest odd `l ≤ horizon` whose score is at most `threshold`.
pub fn minimal_odd_l<T: Real>(
    angles: &GroverAngles<T>,
    threshold: T,
    horizon: u64,
    mode: SearchMode,
) -> SearchReport<T> {
    let top = odd_ceiling(horizon);
    let hit = if top == 0 {
        None
    } else {
        scan_odd_range(angles, threshold, mode, 1, top)
    };
    let scanned = match hit {
        Some(l) => l.div_ceil(2),
        None => top.div_ceil(2),
    };
    SearchReport {
        found: hit.is_some(),
        l: hit,
        score: hit.map(|l| mode.score(l, angles)),
        scores: hit.map(|l| failure_probabilities(l, angles)),
        threshold,
        horizon,
        scanned,
        mode,
    }
}

/// Ten times the closed-form bound `4√N/(√K-√M)`, rounded up to odd and capped.
pub fn default_horizon(instance: &ProblemInstance) -> u64 {
    let (_, l_bound) = closed_form_bounds::<f64>(instance);
    let h = (10.0 * l_bound).ceil();
    if !(h < HORIZON_CAP as f64) {
        return HORIZON_CAP;
    }
    (h as u64).max(1) | 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    #[default]
    Odd,
    Even,
    Any,
}

impl Parity {
    fn first(self) -> u64 {
        match self {
            Parity::Even => 2,
            _ => 1,
        }
    }

    fn step(self) -> u64 {
        match self {
            Parity::Any => 1,
            _ => 2,
        }
    }
}

/// Simultaneous approximation target: find `l` with `|l·ξ_j - η_j - p_j| < ε` for every `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerTarget<T> {
    pub xis: Vec<T>,
    pub etas: Vec<T>,
    pub epsilon: T,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerHit<T> {
    pub l: u64,
    /// Nearest integers `p_j`.
    pub p: Vec<i64>,
    /// Signed residuals `l·ξ_j - η_j - p_j`.
    pub residuals: Vec<T>,
}

fn kronecker_residuals<T: Real>(target: &KroneckerTarget<T>, l: u64) -> (Vec<i64>, Vec<T>) {
    let lf = T::from_count(l);
    target
        .xis
        .iter()
        .zip(&target.etas)
        .map(|(&xi, &eta)| {
            let v = lf * xi - eta;
            let p = v.round();
            (p.to_i64().unwrap_or(i64::MAX), v - p)
        })
        .unzip()
}

/// Smallest `l ≤ horizon` of the requested parity meeting every coordinate tolerance.
pub fn kronecker_search<T: Real>(target: &KroneckerTarget<T>, horizon: u64) -> Result<Option<KroneckerHit<T>>> {
    if target.xis.is_empty() || target.xis.len() != target.etas.len() || !(target.epsilon > T::zero()) {
        return Err(Error::BadKroneckerTarget);
    }
    let step = target.parity.step();
    let first = target.parity.first();
    if first > horizon {
        return Ok(None);
    }
    let count = (horizon - first) / step + 1;
    let within = |l: u64| {
        let lf = T::from_count(l);
        target
            .xis
            .iter()
            .zip(&target.etas)
            .all(|(&xi, &eta)| {
                let v = lf * xi - eta;
                (v - v.round()).abs() < target.epsilon
            })
    };
    let idx = if count >= PARALLEL_SCAN_MIN {
        (0..count).into_par_iter().find_first(|&i| within(first + i * step))
    } else {
        (0..count).find(|&i| within(first + i * step))
    };
    Ok(idx.map(|i| {
        let l = first + i * step;
        let (p, residuals) = kronecker_residuals(target, l);
        KroneckerHit { l, p, residuals }
    }))
}

/// One node of the bisection schedule. Leaves carry a single size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleNode<T> {
    pub sizes: Vec<u64>,
    /// Sizes driven towards `|α⟩` (measure unmarked).
    pub low: Vec<u64>,
    /// Sizes driven towards `|β⟩` (measure marked).
    pub high: Vec<u64>,
    pub hit: Option<KroneckerHit<T>>,
    pub children: Vec<ScheduleNode<T>>,
}

impl<T> ScheduleNode<T> {
    pub fn is_leaf(&self) -> bool {
        self.sizes.len() == 1
    }

    /// Leaves have depth 0.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Internal nodes whose search exhausted the horizon.
    pub fn unresolved(&self) -> Vec<&ScheduleNode<T>> {
        let mut out = Vec::new();
        self.collect_unresolved(&mut out);
        out
    }

    fn collect_unresolved<'a>(&'a self, out: &mut Vec<&'a ScheduleNode<T>>) {
        if !self.is_leaf() && self.hit.is_none() {
            out.push(self);
        }
        for c in &self.children {
            c.collect_unresolved(out);
        }
    }
}

/// Builds the bisection tree for hypotheses `|S| ∈ sizes`.
///
/// Each internal node looks for an odd `l` that sends the lower `⌈r/2⌉` sizes near
/// `l·θ/4π ≡ 0` and the rest near `l·θ/4π ≡ 1/4`, so a marked measurement points to
/// the upper group. With two sizes this is the base `M`-versus-`K` problem.
pub fn multi_hypothesis_schedule<T: Real>(
    sizes: &[u64],
    n: u64,
    epsilon: T,
    horizon: u64,
) -> Result<ScheduleNode<T>> {
    if sizes.len() < 2 {
        return Err(Error::TooFewHypotheses(2));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingSizes);
    }
    if let Some(&size) = sizes.iter().find(|&&s| 2 * s > n) {
        return Err(Error::SizeAboveHalf { size, n });
    }
    if !(epsilon > T::zero()) {
        return Err(Error::BadKroneckerTarget);
    }
    Ok(build_node(sizes, n, epsilon, horizon))
}

fn build_node<T: Real>(sizes: &[u64], n: u64, epsilon: T, horizon: u64) -> ScheduleNode<T> {
    if sizes.len() == 1 {
        return ScheduleNode {
            sizes: sizes.to_vec(),
            low: Vec::new(),
            high: Vec::new(),
            hit: None,
            children: Vec::new(),
        };
    }
    let split = sizes.len().div_ceil(2);
    let (low, high) = sizes.split_at(split);
    let four_pi = T::lit(4.0) * T::PI();
    let two = T::lit(2.0);
    let target = KroneckerTarget {
        xis: sizes
            .iter()
            .map(|&s| two * crate::model::half_angle::<T>(s, n).unwrap() / four_pi)
            .collect(),
        etas: low
            .iter()
            .map(|_| T::zero())
            .chain(high.iter().map(|_| T::lit(0.25)))
            .collect(),
        epsilon,
        parity: Parity::Odd,
    };
    let hit = kronecker_search(&target, horizon).expect("target validated by caller");
    ScheduleNode {
        sizes: sizes.to_vec(),
        low: low.to_vec(),
        high: high.to_vec(),
        hit,
        children: vec![
            build_node(low, n, epsilon, horizon),
            build_node(high, n, epsilon, horizon),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::angles_of;
    use std::f64::consts::PI;

    fn angles(n: u64, m: u64, k: u64) -> GroverAngles<f64> {
        angles_of(&ProblemInstance::new(n, m, k).unwrap())
    }

    #[test]
    fn torus_point_examples() {
        let pt = torus_point(1, &angles(4, 1, 2)).unwrap();
        assert!((pt.x_k - 0.125).abs() < 1e-15);
        assert!((pt.x_m - 1.0 / 12.0).abs() < 1e-15);

        let pt = torus_point(3, &angles(4, 0, 1)).unwrap();
        assert!((pt.x_k - 0.25).abs() < 1e-15);
        assert_eq!(pt.x_m, 0.0);

        let a = GroverAngles {
            theta_m: 0.0,
            theta_k: PI,
            gamma: None,
        };
        let pt = torus_point(5, &a).unwrap();
        assert!((pt.x_k - 0.25).abs() < 1e-15);

        assert_eq!(torus_point(4, &a), Err(Error::EvenL(4)));
    }

    #[test]
    fn strict_distance_examples() {
        let d = |x_k: f64, x_m: f64| strict_distance(&TorusPoint { l: 1, x_k, x_m });
        assert_eq!(d(0.25, 0.0), 0.0);
        assert!((d(0.99, 0.5) - 0.5).abs() < 1e-15);
        let delta = 1e-3;
        assert!((d(0.25 + delta, 1.0 - delta) - delta).abs() < 1e-12);
    }

    #[test]
    fn relaxed_score_examples() {
        assert!(relaxed_score(3, &angles(4, 0, 1)) < 1e-30);
        assert!((relaxed_score(1, &angles(4, 1, 2)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn minimal_l_plain_grover() {
        let rep = minimal_odd_l(&angles(4, 0, 1), 0.01, 101, SearchMode::Relaxed);
        assert_eq!(rep.l, Some(3));
        assert_eq!(rep.scanned, 2);
        let rep = minimal_odd_l(&angles(4, 0, 1), 1e-9, 101, SearchMode::Strict);
        assert_eq!(rep.l, Some(3));
    }

    #[test]
    fn minimal_l_exhausts_short_horizon() {
        let rep = minimal_odd_l(&angles(4, 0, 1), 0.01, 1, SearchMode::Relaxed);
        assert!(!rep.found);
        assert_eq!(rep.horizon, 1);
        assert_eq!(rep.scanned, 1);

        let rep = minimal_odd_l(&angles(4, 0, 1), 0.01, 0, SearchMode::Relaxed);
        assert!(!rep.found);
        assert_eq!(rep.scanned, 0);
    }

    #[test]
    fn partitioned_scan_agrees_with_single_scan() {
        let a = angles(1 << 14, 5, 6);
        let whole = scan_odd_range(&a, 0.05, SearchMode::Relaxed, 1, 9999);
        let parts = (0..10).map(|i| scan_odd_range(&a, 0.05, SearchMode::Relaxed, 1000 * i + 1, 1000 * i + 999));
        assert_eq!(merge_scans(parts), whole);
        assert!(whole.is_some());
    }

    #[test]
    fn default_horizon_is_odd_and_capped() {
        let h = default_horizon(&ProblemInstance::new(4, 0, 1).unwrap());
        assert_eq!(h, 81);
        let big = ProblemInstance::new(1 << 48, (1 << 40) - 1, 1 << 40).unwrap();
        assert_eq!(default_horizon(&big), HORIZON_CAP);
    }

    #[test]
    fn kronecker_examples() {
        let t = KroneckerTarget {
            xis: vec![0.25],
            etas: vec![0.25],
            epsilon: 0.01,
            parity: Parity::Odd,
        };
        let hit = kronecker_search(&t, 100).unwrap().unwrap();
        assert_eq!((hit.l, hit.p.clone()), (1, vec![0]));

        let a = angles(4, 0, 1);
        let t = KroneckerTarget {
            xis: vec![a.theta_k / (4.0 * PI), a.theta_m / (4.0 * PI)],
            etas: vec![0.25, 0.0],
            epsilon: 1e-9,
            parity: Parity::Odd,
        };
        assert_eq!(kronecker_search(&t, 100).unwrap().unwrap().l, 3);

        let t = KroneckerTarget {
            xis: vec![0.1],
            etas: vec![0.0],
            epsilon: 1e-6,
            parity: Parity::Even,
        };
        assert_eq!(kronecker_search(&t, 100).unwrap().unwrap().l, 10);
        let t = KroneckerTarget { parity: Parity::Odd, ..t };
        assert_eq!(kronecker_search(&t, 100).unwrap(), None);
    }

    #[test]
    fn kronecker_rejects_bad_targets() {
        let t = KroneckerTarget::<f64> {
            xis: vec![0.1, 0.2],
            etas: vec![0.0],
            epsilon: 0.1,
            parity: Parity::Odd,
        };
        assert_eq!(kronecker_search(&t, 10), Err(Error::BadKroneckerTarget));
    }

    #[test]
    fn two_size_schedule_is_the_base_problem() {
        let n = 1 << 20;
        let tree = multi_hypothesis_schedule(&[40, 42], n, 1.0 / 12.0, 1_000_001).unwrap();
        assert_eq!(tree.depth(), 1);
        assert_eq!((tree.low.as_slice(), tree.high.as_slice()), (&[40u64][..], &[42u64][..]));
        let hit = tree.hit.as_ref().unwrap();
        assert_eq!(hit.l % 2, 1);
        assert!(tree.unresolved().is_empty());
    }

    #[test]
    fn schedule_input_errors() {
        assert_eq!(
            multi_hypothesis_schedule::<f64>(&[3], 100, 0.1, 11),
            Err(Error::TooFewHypotheses(2))
        );
        assert_eq!(
            multi_hypothesis_schedule::<f64>(&[3, 3], 100, 0.1, 11),
            Err(Error::NonIncreasingSizes)
        );
        assert!(matches!(
            multi_hypothesis_schedule::<f64>(&[3, 60], 100, 0.1, 11),
            Err(Error::SizeAboveHalf { .. })
        ));
    }
}
