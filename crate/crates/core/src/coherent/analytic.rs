use serde::{Deserialize, Serialize};

use super::{ImperfectionModel, Protocol};

/// Per-slot click probabilities of the correct and the wrong detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilities {
    pub correct: f64,
    pub wrong: f64,
}

impl ClickProbabilities {
    /// Probability that exactly one detector clicks in a slot.
    pub fn single(&self) -> f64 {
        self.correct * (1.0 - self.wrong) + self.wrong * (1.0 - self.correct)
    }
}

/// `p_c = 1 − exp(−2ηνμ/n)`, `p_w = 1 − exp(−2η(1−ν)μ/n)`. Dark counts are
/// not included.
pub fn click_probabilities(mu: f64, n: usize, model: &ImperfectionModel) -> ClickProbabilities {
    let i = beam_splitter_outputs(false, mu, n, model);
    ClickProbabilities {
        correct: -(-i.d0).exp_m1(),
        wrong: -(-i.d1).exp_m1(),
    }
}

/// Mean photon numbers arriving at `D0` and `D1` in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorIntensities {
    pub d0: f64,
    pub d1: f64,
}

/// Beam-splitter output intensities for a slot whose parity (HM) or
/// `x_k ⊕ φ` (SM) is `bit`.
///
/// Two interfering pulses of intensity `ημ/n` each give `2ημ/n` in total;
/// a fraction `ν` reaches the detector labelled by `bit`.
pub fn beam_splitter_outputs(
    bit: bool,
    mu: f64,
    n: usize,
    model: &ImperfectionModel,
) -> DetectorIntensities {
    let total = 2.0 * model.eta() * mu / n as f64;
    let right = total * model.visibility;
    let leak = total * (1.0 - model.visibility);
    if bit {
        DetectorIntensities {
            d0: leak,
            d1: right,
        }
    } else {
        DetectorIntensities {
            d0: right,
            d1: leak,
        }
    }
}

/// Decomposition of Bob's error: with probability `p_abstain` he lacks the
/// clicks needed to infer a parity and guesses (error ½); otherwise his
/// inferred parity is wrong with probability `p_wrong_given_output`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerms {
    pub p_abstain: f64,
    pub p_wrong_given_output: f64,
}

impl ErrorTerms {
    pub fn total(&self) -> f64 {
        0.5 * self.p_abstain + (1.0 - self.p_abstain) * self.p_wrong_given_output
    }

    /// Error rate when abstaining runs are discarded.
    pub fn post_selected(&self) -> f64 {
        self.p_wrong_given_output
    }
}

/// HM: abstain when none of the `n/2` slots has a single click; a single
/// click in the wrong detector gives the wrong parity.
pub fn hm_error_terms(n: usize, mu: f64, model: &ImperfectionModel) -> ErrorTerms {
    let p = click_probabilities(mu, n, model);
    let p1 = p.single();
    let wrong_single = p.wrong * (1.0 - p.correct);
    ErrorTerms {
        p_abstain: pow_complement(p1, n as f64 / 2.0),
        p_wrong_given_output: if p1 > 0.0 { wrong_single / p1 } else { 0.0 },
    }
}

/// SM: abstain with fewer than two single-click slots among `n`; the parity
/// of two single clicks is wrong when exactly one of them is a wrong click.
pub fn sm_error_terms(n: usize, mu: f64, model: &ImperfectionModel) -> ErrorTerms {
    let p = click_probabilities(mu, n, model);
    let p1 = p.single();
    let nf = n as f64;
    let p_abstain = pow_complement(p1, nf) + nf * p1 * pow_complement(p1, nf - 1.0);
    let p_wrong = if p1 > 0.0 {
        2.0 * p.correct * (1.0 - p.wrong) * p.wrong * (1.0 - p.correct) / (p1 * p1)
    } else {
        0.0
    };
    ErrorTerms {
        p_abstain,
        p_wrong_given_output: p_wrong,
    }
}

pub fn error_terms(protocol: Protocol, n: usize, mu: f64, model: &ImperfectionModel) -> ErrorTerms {
    match protocol {
        Protocol::Hm => hm_error_terms(n, mu, model),
        Protocol::Sm => sm_error_terms(n, mu, model),
    }
}

pub fn analytic_error(protocol: Protocol, n: usize, mu: f64, model: &ImperfectionModel) -> f64 {
    error_terms(protocol, n, mu, model).total()
}

/// `½ p_¬1 + (1 − p_¬1) p_1w`; reduces to `½ e^{−μ}` for the ideal model.
pub fn hm_error_analytic(n: usize, mu: f64, model: &ImperfectionModel) -> f64 {
    hm_error_terms(n, mu, model).total()
}

/// Ideal SM error `½[e^{−2μ} + n p_c (1 − p_c)^{n−1}]`, `p_c = 1 − e^{−2μ/n}`.
pub fn sm_error_ideal(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    let pc = -(-2.0 * mu / nf).exp_m1();
    0.5 * ((-2.0 * mu).exp() + nf * pc * pow_complement(pc, nf - 1.0))
}

/// `½ p_¬11 + (1 − p_¬11) p_11w`.
pub fn sm_error_analytic(n: usize, mu: f64, model: &ImperfectionModel) -> f64 {
    sm_error_terms(n, mu, model).total()
}

/// `(1 − p)^e` without cancellation for small `p`.
fn pow_complement(p: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        (e * (-p).ln_1p()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DarkCountMargin {
    /// `p_c / p_dark`.
    Finite(f64),
    /// `p_dark = 0`.
    Infinite,
}

impl DarkCountMargin {
    pub fn ratio(&self) -> f64 {
        match self {
            DarkCountMargin::Finite(r) => *r,
            DarkCountMargin::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, DarkCountMargin::Infinite)
    }
}

/// Ratio of the per-slot signal click probability to the dark-click
/// probability.
pub fn dark_count_margin(n: usize, mu: f64, model: &ImperfectionModel) -> DarkCountMargin {
    if model.p_dark == 0.0 {
        return DarkCountMargin::Infinite;
    }
    DarkCountMargin::Finite(click_probabilities(mu, n, model).correct / model.p_dark)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn practical() -> ImperfectionModel {
        ImperfectionModel::new(1.0, 0.25, 0.988, 0.0).unwrap()
    }

    #[test]
    fn click_probabilities_limits() {
        let p = click_probabilities(0.0, 10, &practical());
        assert_eq!((p.correct, p.wrong), (0.0, 0.0));
        let p = click_probabilities(5.0, 10, &ImperfectionModel::ideal());
        assert_relative_eq!(p.correct, 1.0 - (-1.0f64).exp(), max_relative = 1e-12);
        assert_eq!(p.wrong, 0.0);
    }

    #[test]
    fn click_probabilities_practical() {
        let p = click_probabilities(7.08, 1000, &practical());
        // independent evaluation of 1 − exp(−2·0.25·ν·7.08/1000)
        let pc = 1.0 - (-2.0 * 0.25 * 0.988 * 7.08 / 1000.0f64).exp();
        let pw = 1.0 - (-2.0 * 0.25 * 0.012 * 7.08 / 1000.0f64).exp();
        assert_relative_eq!(p.correct, pc, max_relative = 1e-12);
        assert_relative_eq!(p.wrong, pw, max_relative = 1e-9);
        assert_relative_eq!(p.correct, 3.4915e-3, max_relative = 1e-4);
        assert_relative_eq!(p.wrong, 4.248e-5, max_relative = 1e-3);
    }

    #[test]
    fn beam_splitter_routes_by_bit() {
        let ideal = ImperfectionModel::ideal();
        let i0 = beam_splitter_outputs(false, 3.0, 6, &ideal);
        assert_eq!((i0.d0, i0.d1), (1.0, 0.0));
        let i1 = beam_splitter_outputs(true, 3.0, 6, &ideal);
        assert_eq!((i1.d0, i1.d1), (0.0, 1.0));

        let i = beam_splitter_outputs(false, 7.08, 1000, &practical());
        assert_relative_eq!(i.d0, 3.4976e-3, max_relative = 1e-4);
        assert_relative_eq!(i.d1, 4.2480e-5, max_relative = 1e-4);
        let p = click_probabilities(7.08, 1000, &practical());
        assert_relative_eq!(1.0 - (-i.d0).exp(), p.correct, max_relative = 1e-12);
        assert_relative_eq!(1.0 - (-i.d1).exp(), p.wrong, max_relative = 1e-9);
    }

    #[test]
    fn hm_ideal_reduces_to_half_exp() {
        for n in [2, 10, 1000, 100_000] {
            for mu in [0.0, 0.3, 5f64.ln(), 4.0] {
                assert_relative_eq!(
                    hm_error_analytic(n, mu, &ImperfectionModel::ideal()),
                    0.5 * (-mu).exp(),
                    max_relative = 1e-12
                );
            }
        }
        assert_relative_eq!(
            hm_error_analytic(64, 5f64.ln(), &ImperfectionModel::ideal()),
            0.1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_mu_is_a_coin_flip() {
        for model in [ImperfectionModel::ideal(), practical()] {
            assert_eq!(hm_error_analytic(100, 0.0, &model), 0.5);
            assert_eq!(sm_error_analytic(100, 0.0, &model), 0.5);
        }
        assert_eq!(sm_error_ideal(100, 0.0), 0.5);
    }

    #[test]
    fn hm_practical_near_target() {
        let e = hm_error_analytic(1000, 6.85, &practical());
        assert!((0.09..=0.11).contains(&e), "{e}");
    }

    #[test]
    fn sm_ideal_small_case() {
        let want = 0.5 * ((-2.0f64).exp() + 2.0 * (1.0 - (-1.0f64).exp()) * (-1.0f64).exp());
        assert_relative_eq!(sm_error_ideal(2, 1.0), want, max_relative = 1e-12);
        assert_abs_diff_eq!(sm_error_ideal(2, 1.0), 0.30021, epsilon = 1e-5);
    }

    #[test]
    fn sm_analytic_reduces_to_ideal() {
        for n in [2, 4, 10, 100, 1000, 4000] {
            for mu in [0.01, 0.5, 1.0, 3.0, 8.0, 20.0] {
                let a = sm_error_analytic(n, mu, &ImperfectionModel::ideal());
                let b = sm_error_ideal(n, mu);
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1e-300),
                    "{n} {mu}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn sm_practical_reference_value() {
        let e = sm_error_analytic(1000, 7.08, &practical());
        assert_abs_diff_eq!(e, 0.0865, epsilon = 5e-4);
    }

    #[test]
    fn wrong_pair_probability_identity() {
        for (mu, n) in [(1.0, 10), (7.08, 1000), (50.0, 100)] {
            for nu in [0.5, 0.9, 0.988] {
                let model = ImperfectionModel::new(1.0, 0.25, nu, 0.0).unwrap();
                let p = click_probabilities(mu, n, &model);
                let r = p.wrong * (1.0 - p.correct) / p.single();
                assert_abs_diff_eq!(
                    sm_error_terms(n, mu, &model).p_wrong_given_output,
                    2.0 * r * (1.0 - r),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn dark_margin() {
        let m = ImperfectionModel::table1_detector_only();
        let r = dark_count_margin(1000, 7.08, &m).ratio();
        assert_relative_eq!(r, 3.4915e-3 / 2.3e-6, max_relative = 1e-4);
        assert!(r >= 1e3);
        assert!(dark_count_margin(4000, 7.08, &m).ratio() >= 300.0);
        assert!(dark_count_margin(1000, 7.08, &practical()).is_infinite());
    }
}
