use matchsim::classical::{
    best_known_message_size, estimate_classical_error, exact_miss_probability, lower_bound_bits,
    sampled_miss_probability,
};
use proptest::prelude::*;

/// Direct product form of the without-replacement miss probability.
fn miss_oracle(n: u64, c: u64) -> f64 {
    (0..c)
        .map(|i| (n as f64 - 2.0 * i as f64).max(0.0) / (n - i) as f64)
        .product()
}

#[test]
fn monte_carlo_matches_combinatorial_miss() {
    for (n, c, seed) in [
        (100, 10, 1),
        (100, 22, 2),
        (1000, 22, 3),
        (1000, 68, 4),
        (4000, 10, 5),
    ] {
        let want = 0.5 * miss_oracle(n, c);
        let est = estimate_classical_error(n as usize, c as usize, 40_000, seed).unwrap();
        assert!(est.within(want, 4.0), "n={n} c={c}: {} vs {want}", est.rate);
    }
}

#[test]
fn closed_form_close_to_exact_when_sparse() {
    // c² ≪ n: the independent-pairs approximation is accurate
    for (n, c) in [(4000, 10), (100_000, 68)] {
        let a = exact_miss_probability(n, c);
        let b = miss_oracle(n, c);
        assert!((a - b).abs() < 2e-3, "n={n} c={c}: {a} vs {b}");
    }
}

#[test]
fn sampled_matches_product_form() {
    for (n, c) in [(4, 4), (10, 3), (100, 22), (1000, 68)] {
        assert!((sampled_miss_probability(n, c) - miss_oracle(n, c)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn miss_probability_monotone(n in 4u64..5000, c in 1u64..200) {
        prop_assume!(c < n && exact_miss_probability(n, c + 1) > 1e-300);
        prop_assert!(exact_miss_probability(n, c + 1) < exact_miss_probability(n, c));
        prop_assert!(exact_miss_probability(n + 1, c) >= exact_miss_probability(n, c));
    }

    #[test]
    fn best_known_scales_as_sqrt_n(n in 2u64..10_000_000) {
        let r = best_known_message_size(n, 0.1).unwrap() / (n as f64).sqrt();
        prop_assert!((r - (2.0 * 10f64.ln()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_below_best_known(n in 2u64..10_000_000) {
        prop_assert!(lower_bound_bits(n, 0.1).unwrap() < best_known_message_size(n, 0.1).unwrap());
    }
}
