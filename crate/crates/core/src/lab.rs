//! Brute-force register simulation.
//!
//! Every amplitude of the `N`-element register is stored and updated, with no use of the
//! two-dimensional reduction, so results here can be checked against [`crate::model`].
//! All amplitudes stay real: the oracle is a sign flip, the diffusion operator
//! `2|ψ⟩⟨ψ| - I` is a real matrix and the start state is real.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{angles_of, error_threshold, failure_probabilities, ProblemInstance};
use crate::scalar::{compensated_sum, Real};

/// Largest register the full simulation accepts.
pub const SIMULATION_CAP: u64 = 1 << 22;

/// Identifier of the per-trial generator written into experiment outputs.
///
/// Trial `t` of an experiment seeded with `s` draws from `ChaCha8Rng::seed_from_u64(s)`
/// with its stream set to `t`.
pub const RNG_ALGORITHM: &str = "rand_chacha-0.3/ChaCha8Rng/seed_from_u64+set_stream(trial)";

/// Tolerance on the squared norm accepted by [`measure`].
pub const MEASURE_NORM_TOL: f64 = 1e-9;

/// The oracle's marked indices, kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MarkedSet {
    members: Vec<usize>,
}

impl MarkedSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `size` distinct indices drawn uniformly from `[0, n)`.
    pub fn random<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Self {
        Self::new(index::sample(rng, n, size))
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    fn check_range(&self, n: usize) -> Result<()> {
        match self.members.last() {
            Some(&index) if index >= n => Err(Error::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector<T> {
    amplitudes: Vec<T>,
}

impl<T: Real> StateVector<T> {
    /// `|ψ⟩ = N^{-1/2} Σ|i⟩`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDatabase);
        }
        let a = T::one() / T::from_count(n as u64).sqrt();
        Ok(Self {
            amplitudes: vec![a; n],
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<T>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> T {
        compensated_sum(self.amplitudes.iter().map(|&a| a * a))
    }

    /// Phase flip on every marked index.
    pub fn apply_oracle(&mut self, marked: &MarkedSet) -> Result<()> {
        marked.check_range(self.len())?;
        for &i in marked.members() {
            self.amplitudes[i] = -self.amplitudes[i];
        }
        Ok(())
    }

    /// Reflection about the uniform state: `a_i ↦ 2·mean(a) - a_i`.
    pub fn diffuse(&mut self) {
        let n = T::from_count(self.len() as u64);
        let twice_mean = T::lit(2.0) * compensated_sum(self.amplitudes.iter().copied()) / n;
        for a in &mut self.amplitudes {
            *a = twice_mean - *a;
        }
    }

    /// One Grover iteration: oracle, then diffusion.
    pub fn grover_step(&mut self, marked: &MarkedSet) -> Result<()> {
        self.apply_oracle(marked)?;
        self.diffuse();
        Ok(())
    }

    /// Coordinates on `|α⟩`, `|β⟩` and the largest amplitude left outside that plane.
    pub fn subspace_projection(&self, marked: &MarkedSet) -> Result<SubspaceProjection<T>> {
        marked.check_range(self.len())?;
        let n = self.len();
        let k = marked.len();
        let (in_sum, out_sum) = self.partition_sums(marked);
        let alpha = if k < n {
            out_sum / T::from_count((n - k) as u64).sqrt()
        } else {
            T::zero()
        };
        let beta = if k > 0 {
            in_sum / T::from_count(k as u64).sqrt()
        } else {
            T::zero()
        };
        let marked_amp = if k > 0 { in_sum / T::from_count(k as u64) } else { T::zero() };
        let unmarked_amp = if k < n {
            out_sum / T::from_count((n - k) as u64)
        } else {
            T::zero()
        };
        let off_plane = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mean = if marked.contains(i) { marked_amp } else { unmarked_amp };
                (a - mean).abs()
            })
            .fold(T::zero(), T::max);
        Ok(SubspaceProjection {
            alpha,
            beta,
            off_plane,
        })
    }

    fn partition_sums(&self, marked: &MarkedSet) -> (T, T) {
        let inside = compensated_sum(marked.members().iter().map(|&i| self.amplitudes[i]));
        let outside = compensated_sum(
            self.amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| !marked.contains(*i))
                .map(|(_, &a)| a),
        );
        (inside, outside)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceProjection<T> {
    pub alpha: T,
    pub beta: T,
    /// Max deviation of any amplitude from its class mean (zero inside the plane).
    pub off_plane: T,
}

/// `m` Grover iterations applied to the uniform state.
pub fn simulate<T: Real>(n: usize, marked: &MarkedSet, m: u64) -> Result<StateVector<T>> {
    if n as u64 > SIMULATION_CAP {
        return Err(Error::SimulationTooLarge {
            n: n as u64,
            cap: SIMULATION_CAP,
        });
    }
    marked.check_range(n)?;
    let mut state = StateVector::uniform(n)?;
    for _ in 0..m {
        state.grover_step(marked)?;
    }
    Ok(state)
}

/// Samples an index with probability `amplitude²`.
pub fn measure<T: Real, R: Rng + ?Sized>(state: &StateVector<T>, rng: &mut R) -> Result<usize> {
    let norm = state.norm_sqr().to_f64_lossy();
    if !((norm - 1.0).abs() <= MEASURE_NORM_TOL) {
        return Err(Error::Unnormalized(norm));
    }
    let u: f64 = rng.gen::<f64>() * norm;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &a) in state.amplitudes().iter().enumerate() {
        let p = (a * a).to_f64_lossy();
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last_nonzero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `|S| = M`
    #[serde(rename = "M")]
    Small,
    /// `|S| = K`
    #[serde(rename = "K")]
    Large,
}

impl Hypothesis {
    pub fn size(self, instance: &ProblemInstance) -> u64 {
        match self {
            Hypothesis::Small => instance.m(),
            Hypothesis::Large => instance.k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationOutcome {
    pub truth: Hypothesis,
    pub instance: ProblemInstance,
    pub l: u64,
    pub trials: u64,
    pub errors: u64,
    pub empirical_error: f64,
    /// Closed-form probability of a wrong decision at this `l`.
    pub expected_error: f64,
    pub epsilon: f64,
    /// `sin²(2πε)`
    pub bound: f64,
    pub seed: u64,
    pub rng: String,
}

impl DiscriminationOutcome {
    /// Binomial standard deviation of the error rate under the closed-form probability.
    pub fn sigma(&self) -> f64 {
        (self.expected_error * (1.0 - self.expected_error) / self.trials as f64).sqrt()
    }
}

/// Generator for trial `trial` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Repeats the decision procedure `trials` times under a fixed truth.
///
/// Each trial draws a fresh marked set of the true size, runs `(l-1)/2` iterations on the
/// full register, measures, and answers `K` exactly when the outcome is marked.
pub fn run_discrimination<T: Real>(
    instance: &ProblemInstance,
    truth: Hypothesis,
    l: u64,
    trials: u64,
    seed: u64,
    epsilon: f64,
) -> Result<DiscriminationOutcome> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if l.is_multiple_of(2) {
        return Err(Error::EvenL(l));
    }
    if instance.n() > SIMULATION_CAP {
        return Err(Error::SimulationTooLarge {
            n: instance.n(),
            cap: SIMULATION_CAP,
        });
    }
    let n = instance.n() as usize;
    let size = truth.size(instance) as usize;
    let m = (l - 1) / 2;

    let errors = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let mut rng = trial_rng(seed, trial);
            let marked = MarkedSet::random(n, size, &mut rng);
            let state = simulate::<T>(n, &marked, m)?;
            let outcome = measure(&state, &mut rng)?;
            let says_large = marked.contains(outcome);
            Ok(u64::from(says_large != (truth == Hypothesis::Large)))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let failures = failure_probabilities(l, &angles_of::<f64>(instance));
    let expected_error = match truth {
        Hypothesis::Small => failures.fail_m,
        Hypothesis::Large => failures.fail_k,
    };
    Ok(DiscriminationOutcome {
        truth,
        instance: *instance,
        l,
        trials,
        errors,
        empirical_error: errors as f64 / trials as f64,
        expected_error,
        epsilon,
        bound: error_threshold(epsilon),
        seed,
        rng: RNG_ALGORITHM.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let s = StateVector::<f64>::uniform(4).unwrap();
        assert_eq!(s.amplitudes(), &[0.5; 4]);
        assert_eq!(StateVector::<f64>::uniform(1).unwrap().amplitudes(), &[1.0]);
        assert_eq!(StateVector::<f64>::uniform(0), Err(Error::EmptyDatabase));
    }

    #[test]
    fn oracle_examples() {
        let mut s = StateVector::from_amplitudes(vec![1.0f64, 0.0, 0.0, 0.0]);
        s.apply_oracle(&MarkedSet::new([0])).unwrap();
        assert_eq!(s.amplitudes(), &[-1.0, 0.0, 0.0, 0.0]);

        let before = StateVector::<f64>::uniform(8).unwrap();
        let mut s = before.clone();
        s.apply_oracle(&MarkedSet::empty()).unwrap();
        assert_eq!(s, before);

        assert_eq!(
            s.apply_oracle(&MarkedSet::new([8])),
            Err(Error::IndexOutOfRange { index: 8, n: 8 })
        );
    }

    #[test]
    fn single_iteration_on_four_elements() {
        let mut s = StateVector::<f64>::uniform(4).unwrap();
        s.grover_step(&MarkedSet::new([3])).unwrap();
        for (i, &a) in s.amplitudes().iter().enumerate() {
            let want = if i == 3 { 1.0 } else { 0.0 };
            assert!((a - want).abs() < 1e-12);
        }
        let s = simulate::<f64>(4, &MarkedSet::new([2]), 1).unwrap();
        assert!((s.amplitudes()[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_oracle_fixes_uniform_state() {
        let mut s = StateVector::<f64>::uniform(16).unwrap();
        s.grover_step(&MarkedSet::empty()).unwrap();
        for &a in s.amplitudes() {
            assert!((a - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn simulate_zero_steps_is_uniform() {
        let s = simulate::<f64>(32, &MarkedSet::new([1, 5]), 0).unwrap();
        assert_eq!(s, StateVector::uniform(32).unwrap());
    }

    #[test]
    fn simulate_rejects_oversized_register() {
        assert!(matches!(
            simulate::<f64>((SIMULATION_CAP + 1) as usize, &MarkedSet::empty(), 0),
            Err(Error::SimulationTooLarge { .. })
        ));
    }

    #[test]
    fn measure_basis_state() {
        let mut rng = trial_rng(7, 0);
        let s = StateVector::from_amplitudes(vec![0.0f64, 0.0, 1.0, 0.0]);
        for _ in 0..100 {
            assert_eq!(measure(&s, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn measure_rejects_unnormalized() {
        let mut rng = trial_rng(7, 0);
        let s = StateVector::from_amplitudes(vec![0.5f64, 0.5]);
        assert!(matches!(measure(&s, &mut rng), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn measure_fixture_is_reproducible() {
        let s = StateVector::<f64>::uniform(4).unwrap();
        let mut rng = trial_rng(2024, 0);
        let draws: Vec<usize> = (0..16).map(|_| measure(&s, &mut rng).unwrap()).collect();
        assert_eq!(draws, MEASURE_FIXTURE);
    }

    // Recorded from `trial_rng(2024, 0)` on the uniform four-element register.
    const MEASURE_FIXTURE: [usize; 16] = [0, 3, 2, 3, 2, 1, 0, 1, 1, 3, 3, 2, 3, 1, 2, 1];

    #[test]
    fn subspace_projection_of_uniform_state() {
        let s = StateVector::<f64>::uniform(16).unwrap();
        let p = s.subspace_projection(&MarkedSet::new([0, 1, 2, 3])).unwrap();
        assert!((p.alpha - (12.0f64 / 16.0).sqrt()).abs() < 1e-15);
        assert!((p.beta - 0.5).abs() < 1e-15);
        assert!(p.off_plane < 1e-15);
    }

    #[test]
    fn discrimination_input_errors() {
        let inst = ProblemInstance::new(4, 0, 1).unwrap();
        assert_eq!(
            run_discrimination::<f64>(&inst, Hypothesis::Large, 3, 0, 1, 1.0 / 12.0),
            Err(Error::ZeroTrials)
        );
        assert_eq!(
            run_discrimination::<f64>(&inst, Hypothesis::Large, 2, 10, 1, 1.0 / 12.0),
            Err(Error::EvenL(2))
        );
    }

    #[test]
    fn plain_grover_discrimination_is_exact() {
        let inst = ProblemInstance::new(4, 0, 1).unwrap();
        for truth in [Hypothesis::Small, Hypothesis::Large] {
            let out = run_discrimination::<f64>(&inst, truth, 3, 500, 11, 1.0 / 12.0).unwrap();
            assert_eq!(out.errors, 0);
            assert_eq!(out.empirical_error, 0.0);
        }
    }

    #[test]
    fn discrimination_is_deterministic() {
        let inst = ProblemInstance::new(64, 2, 3).unwrap();
        let a = run_discrimination::<f64>(&inst, Hypothesis::Large, 5, 300, 99, 1.0 / 12.0).unwrap();
        let b = run_discrimination::<f64>(&inst, Hypothesis::Large, 5, 300, 99, 1.0 / 12.0).unwrap();
        assert_eq!(a, b);
    }
}
