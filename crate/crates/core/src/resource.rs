//! Transmitted-information accounting, optimal photon number and the
//! quantum-advantage crossover.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{best_known_message_size, lower_bound_bits};
use crate::coherent::{error_terms, ImperfectionModel, Protocol};
use crate::error::{Error, Result};

/// Bits charged to a coherent message of mean photon number `μ` over `n` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TiMetric {
    /// `μ · log₂ n`
    #[serde(rename = "log_n")]
    LogN,
    /// `μ · (log₂ n + log₂ e)`
    #[default]
    #[serde(rename = "log_n_plus_e")]
    LogNPlusE,
}

impl fmt::Display for TiMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiMetric::LogN => "log_n",
            TiMetric::LogNPlusE => "log_n_plus_e",
        })
    }
}

impl FromStr for TiMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "log_n" => Ok(TiMetric::LogN),
            "log_n_plus_e" => Ok(TiMetric::LogNPlusE),
            _ => Err(Error::invalid(format!(
                "unknown metric {s:?} (expected log_n or log_n_plus_e)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassicalBound {
    #[serde(rename = "best_known")]
    BestKnown,
    #[serde(rename = "lower_bound")]
    LowerBound,
}

impl fmt::Display for ClassicalBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassicalBound::BestKnown => "best_known",
            ClassicalBound::LowerBound => "lower_bound",
        })
    }
}

impl FromStr for ClassicalBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "best_known" => Ok(ClassicalBound::BestKnown),
            "lower_bound" => Ok(ClassicalBound::LowerBound),
            _ => Err(Error::invalid(format!(
                "unknown bound {s:?} (expected best_known or lower_bound)"
            ))),
        }
    }
}

pub fn ti_quantum(n: usize, mu: f64, metric: TiMetric) -> f64 {
    let log_n = (n as f64).log2();
    match metric {
        TiMetric::LogN => mu * log_n,
        TiMetric::LogNPlusE => mu * (log_n + std::f64::consts::LOG2_E),
    }
}

pub fn ti_classical(n: usize, p_target: f64, bound: ClassicalBound) -> Result<f64> {
    match bound {
        ClassicalBound::BestKnown => best_known_message_size(n as u64, p_target),
        ClassicalBound::LowerBound => lower_bound_bits(n as u64, p_target),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub mu_max: f64,
    /// Absolute tolerance on `μ`.
    pub tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            mu_max: 1e3,
            tol: 1e-4,
        }
    }
}

const MU_START: f64 = 1.0 / 256.0;
const MONOTONE_PROBES: usize = 16;

/// Smallest `μ` whose analytic error is at most `p_target`, within the
/// default tolerance.
pub fn optimal_mu(
    protocol: Protocol,
    n: usize,
    model: &ImperfectionModel,
    p_target: f64,
) -> Result<f64> {
    optimal_mu_with(protocol, n, model, p_target, OptimizerConfig::default())
}

/// Doubles `μ` until the target is met, checks the error decreases across
/// the final bracket, then bisects it. The returned `μ*` satisfies
/// `error(μ*) ≤ p_target < error(μ* − tol)`.
pub fn optimal_mu_with(
    protocol: Protocol,
    n: usize,
    model: &ImperfectionModel,
    p_target: f64,
    cfg: OptimizerConfig,
) -> Result<f64> {
    if !(p_target > 0.0 && p_target < 0.5) {
        return Err(Error::invalid(format!(
            "p_target must lie in (0, 1/2), got {p_target}"
        )));
    }
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!("n must be even and >= 2, got {n}")));
    }
    if !(cfg.tol > 0.0 && cfg.mu_max > 0.0) {
        return Err(Error::invalid(
            "optimizer tolerance and mu_max must be positive",
        ));
    }
    model.validate()?;
    let err = |mu: f64| error_terms(protocol, n, mu, model).total();

    let mut lo = 0.0;
    let mut hi = MU_START.min(cfg.mu_max);
    let mut floor = err(lo);
    loop {
        let e = err(hi);
        floor = floor.min(e);
        if e <= p_target {
            break;
        }
        if hi >= cfg.mu_max {
            return Err(Error::Infeasible {
                target: p_target,
                floor,
                mu_max: cfg.mu_max,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(cfg.mu_max);
    }

    let mut prev = err(lo);
    for i in 1..=MONOTONE_PROBES {
        let e = err(lo + (hi - lo) * i as f64 / MONOTONE_PROBES as f64);
        if e > prev + 1e-12 {
            return Err(Error::NonMonotone { lo, hi });
        }
        prev = e;
    }

    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if err(mid) <= p_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One row of a resource curve. Quantum columns are `None` when the target
/// error is out of reach at this `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePoint {
    pub n: usize,
    pub protocol: Protocol,
    pub metric: TiMetric,
    pub post_selected: bool,
    /// Mean photon number charged to the message; for post-selected points
    /// the effective `μ* · (1 − p_abstain)`.
    pub mu_opt: Option<f64>,
    pub p_error_achieved: Option<f64>,
    pub ti_quantum: Option<f64>,
    pub ti_classical_best: f64,
    pub ti_classical_lb: f64,
}

/// Optimal photon number and achieved error at `n`, or `None` if infeasible.
///
/// Post-selected: `μ*` is chosen as usual; the abstaining runs are then
/// discarded, which lowers the photon number actually spent to
/// `μ* (1 − p_abstain)` and leaves the conditional wrong-parity rate.
fn quantum_cost(
    protocol: Protocol,
    n: usize,
    model: &ImperfectionModel,
    p_target: f64,
    post_selected: bool,
    cfg: OptimizerConfig,
) -> Result<Option<(f64, f64)>> {
    let mu = match optimal_mu_with(protocol, n, model, p_target, cfg) {
        Ok(mu) => mu,
        Err(Error::Infeasible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let terms = error_terms(protocol, n, mu, model);
    Ok(Some(if post_selected {
        (mu * (1.0 - terms.p_abstain), terms.post_selected())
    } else {
        (mu, terms.total())
    }))
}

pub fn resource_point(
    protocol: Protocol,
    model: &ImperfectionModel,
    p_target: f64,
    metric: TiMetric,
    n: usize,
    post_selected: bool,
) -> Result<ResourcePoint> {
    let cost = quantum_cost(
        protocol,
        n,
        model,
        p_target,
        post_selected,
        OptimizerConfig::default(),
    )?;
    Ok(ResourcePoint {
        n,
        protocol,
        metric,
        post_selected,
        mu_opt: cost.map(|c| c.0),
        p_error_achieved: cost.map(|c| c.1),
        ti_quantum: cost.map(|c| ti_quantum(n, c.0, metric)),
        ti_classical_best: ti_classical(n, p_target, ClassicalBound::BestKnown)?,
        ti_classical_lb: ti_classical(n, p_target, ClassicalBound::LowerBound)?,
    })
}

/// Evaluates every grid point in parallel; output order follows `n_grid`.
pub fn resource_curve(
    protocol: Protocol,
    model: &ImperfectionModel,
    p_target: f64,
    metric: TiMetric,
    n_grid: &[usize],
    post_selected: bool,
) -> Result<Vec<ResourcePoint>> {
    if let Some(&n) = n_grid.iter().find(|&&n| n < 2 || n % 2 != 0) {
        return Err(Error::invalid(format!(
            "grid values must be even and >= 2, got {n}"
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid must be strictly ascending"));
    }
    n_grid
        .par_iter()
        .map(|&n| resource_point(protocol, model, p_target, metric, n, post_selected))
        .collect()
}

/// Even input sizes from `lo` to `hi` spaced roughly geometrically.
pub fn geometric_grid(lo: usize, hi: usize, points: usize) -> Result<Vec<usize>> {
    if lo < 2 || hi < lo || points < 2 {
        return Err(Error::invalid(
            "grid needs 2 <= lo <= hi and at least 2 points",
        ));
    }
    let ratio = (hi as f64 / lo as f64).ln() / (points - 1) as f64;
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let v = (lo as f64 * (ratio * i as f64).exp()).round() as usize;
            (v + v % 2).max(2)
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Threshold {
    Found { n: usize },
    NotFound { cap: usize },
}

impl Threshold {
    pub fn value(&self) -> Option<usize> {
        match self {
            Threshold::Found { n } => Some(*n),
            Threshold::NotFound { .. } => None,
        }
    }
}

pub const DEFAULT_N_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdQuery {
    pub protocol: Protocol,
    pub model: ImperfectionModel,
    pub p_target: f64,
    pub metric: TiMetric,
    pub bound: ClassicalBound,
    pub post_selected: bool,
    pub n_cap: usize,
}

impl ThresholdQuery {
    /// Whether the quantum message is strictly cheaper than the classical
    /// comparator at `n`; infeasible sizes count as not cheaper.
    pub fn quantum_wins(&self, n: usize) -> Result<bool> {
        let cost = quantum_cost(
            self.protocol,
            n,
            &self.model,
            self.p_target,
            self.post_selected,
            OptimizerConfig::default(),
        )?;
        Ok(match cost {
            Some((mu, _)) => {
                ti_quantum(n, mu, self.metric) < ti_classical(n, self.p_target, self.bound)?
            }
            None => false,
        })
    }
}

pub fn advantage_threshold(
    protocol: Protocol,
    model: &ImperfectionModel,
    p_target: f64,
    metric: TiMetric,
    bound: ClassicalBound,
    post_selected: bool,
) -> Result<Threshold> {
    advantage_threshold_with(&ThresholdQuery {
        protocol,
        model: *model,
        p_target,
        metric,
        bound,
        post_selected,
        n_cap: DEFAULT_N_CAP,
    })
}

/// Doubles `n` until the quantum side wins, then bisects the last interval
/// over even sizes.
pub fn advantage_threshold_with(q: &ThresholdQuery) -> Result<Threshold> {
    if !(q.p_target > 0.0 && q.p_target < 0.5) {
        return Err(Error::invalid(format!(
            "p_target must lie in (0, 1/2), got {}",
            q.p_target
        )));
    }
    q.model.validate()?;
    let cap = q.n_cap - q.n_cap % 2;
    if cap < 2 {
        return Ok(Threshold::NotFound { cap: q.n_cap });
    }
    if q.quantum_wins(2)? {
        return Ok(Threshold::Found { n: 2 });
    }
    let mut lo = 2;
    let mut hi = 4;
    loop {
        let hi_c = hi.min(cap);
        if q.quantum_wins(hi_c)? {
            hi = hi_c;
            break;
        }
        if hi_c == cap {
            return Ok(Threshold::NotFound { cap: q.n_cap });
        }
        lo = hi_c;
        hi *= 2;
    }
    // lo loses, hi wins; both even
    while hi - lo > 2 {
        let mid = (lo + hi) / 2;
        let mid = mid - mid % 2;
        if q.quantum_wins(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Threshold::Found { n: hi })
}
