use serde::{Deserialize, Serialize};

use super::{Protocol, RunRecord};
use crate::error::{Error, Result};
use crate::stats::ErrorEstimate;

/// Aggregate of a homogeneous batch of runs, shaped like the experiment's
/// run table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub protocol: Protocol,
    pub n: usize,
    /// Per-pulse mean photon number `μ_p`.
    pub mu_per_pulse: f64,
    pub runs: u64,
    /// Runs without enough single clicks (HM: none, SM: fewer than two).
    pub runs_no_click: u64,
    /// Wrong parities among the click-bearing runs.
    pub runs_wrong: u64,
    /// Wrong coin-flip answers on abstaining runs that carry a guess.
    pub guesses_wrong: u64,
    /// Abstaining runs with no output; each counts as error ½.
    pub abstains_suppressed: u64,
    /// Error over all runs, abstains answered by guessing.
    pub p_error: f64,
    /// `runs_wrong / (runs − runs_no_click)`; `None` when no run produced a parity.
    pub p_error_post: Option<f64>,
    /// Effective post-selected per-pulse photon number
    /// `μ_p · (runs − runs_no_click) / runs`.
    pub mu_post: f64,
    pub post_selected: bool,
}

impl RunStats {
    /// Builds statistics from run-table counts alone; abstaining runs are
    /// treated as unanswered.
    pub fn from_counts(
        protocol: Protocol,
        n: usize,
        mu_per_pulse: f64,
        runs: u64,
        runs_no_click: u64,
        runs_wrong: u64,
    ) -> Result<Self> {
        Self::assemble(
            protocol,
            n,
            mu_per_pulse,
            runs,
            runs_no_click,
            runs_wrong,
            0,
            runs_no_click,
            true,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        protocol: Protocol,
        n: usize,
        mu_per_pulse: f64,
        runs: u64,
        runs_no_click: u64,
        runs_wrong: u64,
        guesses_wrong: u64,
        abstains_suppressed: u64,
        post_selected: bool,
    ) -> Result<Self> {
        if runs == 0 {
            return Err(Error::invalid("cannot aggregate zero runs"));
        }
        if runs_no_click > runs || runs_wrong > runs - runs_no_click {
            return Err(Error::invalid(format!(
                "inconsistent counts: runs {runs}, no-click {runs_no_click}, wrong {runs_wrong}"
            )));
        }
        let produced = runs - runs_no_click;
        let errors = (runs_wrong + guesses_wrong) as f64 + 0.5 * abstains_suppressed as f64;
        Ok(RunStats {
            protocol,
            n,
            mu_per_pulse,
            runs,
            runs_no_click,
            runs_wrong,
            guesses_wrong,
            abstains_suppressed,
            p_error: errors / runs as f64,
            p_error_post: (produced > 0).then(|| runs_wrong as f64 / produced as f64),
            mu_post: mu_per_pulse * produced as f64 / runs as f64,
            post_selected,
        })
    }

    /// The rate a post-selecting (or a guessing) Bob would report.
    pub fn headline_error(&self) -> Option<f64> {
        if self.post_selected {
            self.p_error_post
        } else {
            Some(self.p_error)
        }
    }

    /// Error count over all runs with its Wilson interval. Only defined when
    /// every abstaining run carries a guess.
    pub fn error_estimate(&self) -> Option<ErrorEstimate> {
        (self.abstains_suppressed == 0)
            .then(|| ErrorEstimate::from_counts(self.runs_wrong + self.guesses_wrong, self.runs))
    }

    /// Post-selected error count with its Wilson interval.
    pub fn post_error_estimate(&self) -> Option<ErrorEstimate> {
        let produced = self.runs - self.runs_no_click;
        (produced > 0).then(|| ErrorEstimate::from_counts(self.runs_wrong, produced))
    }
}

/// Folds a batch of records into [`RunStats`]. The batch must share one
/// protocol, input size and `μ`.
pub fn aggregate_runs(records: &[RunRecord], post_select: bool) -> Result<RunStats> {
    let first = records
        .first()
        .ok_or_else(|| Error::invalid("cannot aggregate an empty batch"))?;
    let (protocol, n, mu) = (first.protocol, first.config.n, first.config.mu);
    let mut no_click = 0;
    let mut wrong = 0;
    let mut guesses_wrong = 0;
    let mut suppressed = 0;
    for r in records {
        if r.protocol != protocol || r.config.n != n || r.config.mu != mu {
            return Err(Error::invalid(format!(
                "run {} ({} n={} mu={}) does not match batch ({protocol} n={n} mu={mu})",
                r.run, r.protocol, r.config.n, r.config.mu
            )));
        }
        match (r.abstained, &r.outcome) {
            (true, Some(_)) => {
                no_click += 1;
                guesses_wrong += u64::from(!r.correct);
            }
            (true, None) => {
                no_click += 1;
                suppressed += 1;
            }
            (false, _) => wrong += u64::from(!r.correct),
        }
    }
    RunStats::assemble(
        protocol,
        n,
        mu / n as f64,
        records.len() as u64,
        no_click,
        wrong,
        guesses_wrong,
        suppressed,
        post_select,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_rows() {
        let r = RunStats::from_counts(Protocol::Sm, 1000, 7.08e-3, 848, 115, 26).unwrap();
        assert_abs_diff_eq!(r.mu_post, 6.12e-3, epsilon = 5e-6);
        let r = RunStats::from_counts(Protocol::Sm, 1500, 4.72e-3, 568, 68, 26).unwrap();
        assert_abs_diff_eq!(r.mu_post, 4.154e-3, epsilon = 1e-6);
        let r = RunStats::from_counts(Protocol::Sm, 3500, 2.02e-3, 272, 31, 7).unwrap();
        assert_abs_diff_eq!(r.p_error_post.unwrap(), 7.0 / 241.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.p_error_post.unwrap(), 0.029, epsilon = 5e-4);
    }

    #[test]
    fn all_abstained_has_no_post_rate() {
        let r = RunStats::from_counts(Protocol::Hm, 10, 0.1, 5, 5, 0).unwrap();
        assert_eq!(r.p_error_post, None);
        assert_eq!(r.p_error, 0.5);
        assert!(!r.p_error.is_nan());
    }

    #[test]
    fn empty_and_inconsistent_rejected() {
        assert!(aggregate_runs(&[], false).is_err());
        assert!(RunStats::from_counts(Protocol::Sm, 10, 0.1, 0, 0, 0).is_err());
        assert!(RunStats::from_counts(Protocol::Sm, 10, 0.1, 10, 11, 0).is_err());
        assert!(RunStats::from_counts(Protocol::Sm, 10, 0.1, 10, 5, 6).is_err());
    }
}
