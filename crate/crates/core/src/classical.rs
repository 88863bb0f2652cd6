//! Classical one-way strategies for HM/SM: the closed-form lower bound, the
//! birthday-paradox protocol where Alice reveals `c` random positions of her
//! input, and its Monte Carlo estimator.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::matchings::{Edge, Matching, MatchingSet};
use crate::seed::run_rng;
pub use crate::stats::ErrorEstimate;

/// Bob's answer `⟨(k,l) ∈ σ_i, b⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub edge: Edge,
    pub matching_index: usize,
    pub parity: bool,
    /// The answer is a coin flip rather than an inference.
    pub guessed: bool,
}

impl ProtocolOutcome {
    pub fn is_correct(&self, x: &BitString) -> bool {
        self.parity == x.parity(self.edge.k(), self.edge.l())
    }
}

/// Alice's message: `c` distinct positions of `x` and the bits found there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalMessage {
    pub indices: Vec<usize>,
    pub values: Vec<bool>,
}

impl ClassicalMessage {
    /// Samples `c` distinct positions uniformly without replacement.
    pub fn sample<R: Rng + ?Sized>(x: &BitString, c: usize, rng: &mut R) -> Result<Self> {
        let n = x.len();
        if c > n {
            return Err(Error::invalid(format!(
                "cannot reveal {c} bits of an {n}-bit input"
            )));
        }
        let mut indices: Vec<usize> = index::sample(rng, n, c)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        indices.sort_unstable();
        let values = indices.iter().map(|&k| x.bit(k)).collect();
        Ok(ClassicalMessage { indices, values })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn value_at(&self, k: usize) -> Option<bool> {
        self.indices.binary_search(&k).ok().map(|i| self.values[i])
    }
}

/// Message size `c = sqrt(2 n ln(1/p))` of the birthday-paradox protocol,
/// from inverting `p ≈ exp(−c²/2n)`. Approximate for small `n`.
pub fn best_known_message_size(n: u64, p_target: f64) -> Result<f64> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(Error::invalid(format!(
            "p_target must lie in (0,1), got {p_target}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok((2.0 * n as f64 * (1.0 / p_target).ln()).sqrt())
}

/// Whole-bit variant of [`best_known_message_size`].
pub fn best_known_message_bits(n: u64, p_target: f64) -> Result<u64> {
    Ok(best_known_message_size(n, p_target)?.ceil() as u64)
}

/// Randomized one-way lower bound `(log₂e / e)(½ − p)·sqrt(n − 1)` in bits.
pub fn lower_bound_bits(n: u64, p_target: f64) -> Result<f64> {
    if !(p_target > 0.0 && p_target < 0.5) {
        return Err(Error::invalid(format!(
            "lower bound needs p_target in (0, 1/2), got {p_target}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid(format!("n must be >= 2, got {n}")));
    }
    let k = std::f64::consts::LOG2_E / std::f64::consts::E;
    Ok(k * (0.5 - p_target) * ((n - 1) as f64).sqrt())
}

/// Birthday-paradox miss probability `(1 − 1/(n−1))^{c(c−1)/2}`: the chance
/// that none of the `c(c−1)/2` revealed tuples lies in Bob's matching,
/// treating tuples as independent.
pub fn exact_miss_probability(n: u64, c: u64) -> f64 {
    let tuples = (c * c.saturating_sub(1) / 2) as f64;
    if tuples == 0.0 {
        return 1.0;
    }
    if n <= 2 {
        return 0.0;
    }
    (tuples * (-1.0 / (n - 1) as f64).ln_1p()).exp()
}

/// Probability that `c` distinct uniformly chosen positions contain no edge
/// of a fixed perfect matching on `n` nodes: `∏_{i<c} (n − 2i)/(n − i)`.
/// This is the miss probability the simulated protocol actually has.
pub fn sampled_miss_probability(n: u64, c: u64) -> f64 {
    if 2 * c > n {
        return 0.0;
    }
    (0..c)
        .map(|i| ((n - 2 * i) as f64 / (n - i) as f64).ln())
        .sum::<f64>()
        .exp()
}

fn play<R: Rng + ?Sized>(
    x: &BitString,
    c: usize,
    partner: impl Fn(usize) -> usize,
    rng: &mut R,
) -> Result<(Edge, bool, bool)> {
    let msg = ClassicalMessage::sample(x, c, rng)?;
    // first covered edge in (k, l) order
    for (&k, &xk) in msg.indices.iter().zip(&msg.values) {
        let l = partner(k);
        if l > k {
            if let Some(xl) = msg.value_at(l) {
                return Ok((Edge::new(k, l)?, xk ^ xl, false));
            }
        }
    }
    let k = rng.random_range(1..=x.len());
    let edge = Edge::new(k, partner(k))?;
    Ok((edge, rng.random(), true))
}

/// One run of the birthday-paradox protocol for Bob's matching `m`.
///
/// Alice reveals `c` random positions. If both endpoints of some edge of `m`
/// were revealed Bob outputs that edge with its true parity, otherwise a
/// uniformly random edge of `m` with a fair-coin parity.
pub fn run_classical_protocol<R: Rng + ?Sized>(
    x: &BitString,
    m: &Matching,
    c: usize,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    let n = x.len();
    if c > n {
        return Err(Error::invalid(format!("c = {c} exceeds n = {n}")));
    }
    if m.node_count() != n {
        return Err(Error::invalid(format!(
            "matching covers {} nodes but input has {n} bits",
            m.node_count()
        )));
    }
    let partners = m.partners();
    let (edge, parity, guessed) = play(x, c, |k| partners[k - 1], rng)?;
    Ok(ProtocolOutcome {
        edge,
        matching_index: m.index,
        parity,
        guessed,
    })
}

/// Error frequency of the birthday-paradox protocol over `trials` runs with
/// fresh uniform inputs and uniformly random matchings from `M_n`.
///
/// Trial `t` draws from stream `t` of `seed` (see [`crate::seed`]), so the
/// result does not depend on the worker pool.
pub fn estimate_classical_error(
    n: usize,
    c: usize,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if c > n {
        return Err(Error::invalid(format!("c = {c} exceeds n = {n}")));
    }
    let ms = MatchingSet::build(n)?;
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut rng = run_rng(seed, t);
            let x = BitString::random(n, &mut rng)?;
            let i = rng.random_range(1..n);
            let (edge, parity, _) = play(&x, c, |k| ms.partner(i, k).unwrap_or(0), &mut rng)?;
            Ok(u64::from(parity != x.parity(edge.k(), edge.l())))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(ErrorEstimate::from_counts(errors, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchings::build_matching_set;
    use crate::seed::run_rng;
    use approx::assert_relative_eq;

    #[test]
    fn best_known_values() {
        assert_relative_eq!(
            best_known_message_size(100, 0.1).unwrap(),
            21.459_660_262_893_474,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            best_known_message_size(1, (-0.5f64).exp()).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            best_known_message_size(2926, 0.1).unwrap(),
            116.0808,
            max_relative = 1e-5
        );
        assert_eq!(best_known_message_bits(100, 0.1).unwrap(), 22);
        assert!(best_known_message_size(10, 1.0).is_err());
        assert!(best_known_message_size(10, 0.0).is_err());
    }

    #[test]
    fn lower_bound_values() {
        assert_relative_eq!(
            lower_bound_bits(101, 0.1).unwrap(),
            2.122_951,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            lower_bound_bits(10189, 0.1).unwrap(),
            21.4296,
            max_relative = 1e-4
        );
        assert!(lower_bound_bits(2, 0.5 - 1e-12).unwrap() < 1e-11);
        assert!(lower_bound_bits(2, 0.5).is_err());
    }

    #[test]
    fn miss_probability_values() {
        assert_eq!(exact_miss_probability(4, 1), 1.0);
        assert_eq!(exact_miss_probability(4, 0), 1.0);
        assert_relative_eq!(
            exact_miss_probability(4, 4),
            (2.0f64 / 3.0).powi(6),
            max_relative = 1e-12
        );
        let approx = (-(68.0 * 67.0) / (2.0 * 999.0f64)).exp();
        let exact = exact_miss_probability(1000, 68);
        assert!((exact / approx - 1.0).abs() < 0.01, "{exact} vs {approx}");
    }

    #[test]
    fn sampled_miss_probability_small_cases() {
        // n = 4, c = 2: 6 pairs, 2 of them in the matching
        assert_relative_eq!(
            sampled_miss_probability(4, 2),
            4.0 / 6.0,
            max_relative = 1e-12
        );
        assert_eq!(sampled_miss_probability(4, 3), 0.0);
        assert_eq!(sampled_miss_probability(4, 4), 0.0);
        assert_eq!(sampled_miss_probability(10, 0), 1.0);
    }

    #[test]
    fn full_information_never_guesses() {
        let ms = build_matching_set(8).unwrap();
        let mut rng = run_rng(1, 0);
        for _ in 0..200 {
            let x = BitString::random(8, &mut rng).unwrap();
            for m in ms.matchings() {
                let out = run_classical_protocol(&x, &m, 8, &mut rng).unwrap();
                assert!(!out.guessed);
                assert!(out.is_correct(&x));
                assert!(m.contains(&out.edge));
            }
        }
    }

    #[test]
    fn no_tuples_always_guesses() {
        let ms = build_matching_set(10).unwrap();
        let m = ms.matching(3).unwrap();
        let mut rng = run_rng(2, 0);
        let x = BitString::random(10, &mut rng).unwrap();
        for c in [0, 1] {
            let out = run_classical_protocol(&x, &m, c, &mut rng).unwrap();
            assert!(out.guessed);
            assert_eq!(out.matching_index, 3);
            assert!(m.contains(&out.edge));
        }
        let est = estimate_classical_error(10, 0, 20_000, 5).unwrap();
        assert!(est.within(0.5, 4.0), "{est:?}");
    }

    #[test]
    fn rejects_oversized_message() {
        let ms = build_matching_set(4).unwrap();
        let x = BitString::zeros(4).unwrap();
        let mut rng = run_rng(0, 0);
        assert!(run_classical_protocol(&x, &ms.matching(1).unwrap(), 5, &mut rng).is_err());
        assert!(estimate_classical_error(4, 1, 0, 0).is_err());
    }

    #[test]
    fn full_sample_has_zero_error() {
        let est = estimate_classical_error(4, 4, 10_000, 11).unwrap();
        assert_eq!(est.errors, 0);
    }
}
