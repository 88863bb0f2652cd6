//! Coherent-state fingerprint protocols for HM and SM.
//!
//! Alice sends `n` weak coherent pulses of total mean photon number `μ`,
//! phase-encoding her input. Bob interferes pulse pairs (HM: the two pulses of
//! each edge of his matching; SM: each pulse with his own local pulse) on a
//! balanced beam splitter and watches two single-photon detectors `D0`, `D1`.
//! Detector `D_b` lights up when the relevant parity is `b`.
//!
//! Loss `η = η_channel·η_det` scales every intensity; visibility `ν` leaks a
//! fraction `1 − ν` of the intensity into the wrong detector. Click
//! statistics follow directly from the Poissonian no-click probability
//! `exp(−intensity)` of a coherent state.

mod analytic;
mod runstats;
mod sim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{
    analytic_error, beam_splitter_outputs, click_probabilities, dark_count_margin, error_terms,
    hm_error_analytic, hm_error_terms, sm_error_analytic, sm_error_ideal, sm_error_terms,
    ClickProbabilities, DarkCountMargin, DetectorIntensities, ErrorTerms,
};
pub use runstats::{aggregate_runs, RunStats};
pub use sim::{
    infer_hm_outcome, infer_sm_outcome, simulate_batch, simulate_hm_run, simulate_sm_run,
    sm_correct_detector, AbstainPolicy, BatchSpec, ClickTrace, InputPolicy, RunRecord, SimOptions,
    SlotClick,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Hidden Matching: Bob is handed a matching.
    Hm,
    /// Sampling Matching: Bob samples the matching himself.
    Sm,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Hm => "hm",
            Protocol::Sm => "sm",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hm" => Ok(Protocol::Hm),
            "sm" => Ok(Protocol::Sm),
            _ => Err(Error::invalid(format!(
                "unknown protocol {s:?} (expected hm or sm)"
            ))),
        }
    }
}

/// Experimental imperfections. All fields are probabilities in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImperfectionModel {
    pub eta_channel: f64,
    pub eta_det: f64,
    pub visibility: f64,
    /// Dark-click probability per detector per slot.
    pub p_dark: f64,
}

impl ImperfectionModel {
    pub fn new(eta_channel: f64, eta_det: f64, visibility: f64, p_dark: f64) -> Result<Self> {
        let m = ImperfectionModel {
            eta_channel,
            eta_det,
            visibility,
            p_dark,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn ideal() -> Self {
        ImperfectionModel {
            eta_channel: 1.0,
            eta_det: 1.0,
            visibility: 1.0,
            p_dark: 0.0,
        }
    }

    /// The demonstration setup: 3.5 dB channel loss, 25% detectors,
    /// 98.8% visibility, 2.3e−6 dark clicks per slot.
    pub fn table1() -> Self {
        ImperfectionModel {
            eta_channel: 0.45,
            eta_det: 0.25,
            visibility: 0.988,
            p_dark: 2.3e-6,
        }
    }

    /// [`table1`](Self::table1) with the channel loss dropped, i.e. `η = η_det`.
    /// This is the loss convention consistent with the reported per-pulse
    /// photon numbers.
    pub fn table1_detector_only() -> Self {
        ImperfectionModel {
            eta_channel: 1.0,
            ..Self::table1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_channel", self.eta_channel),
            ("eta_det", self.eta_det),
            ("visibility", self.visibility),
            ("p_dark", self.p_dark),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0,1], got {v}")));
            }
        }
        Ok(())
    }

    /// Combined efficiency `η = η_channel · η_det`.
    pub fn eta(&self) -> f64 {
        self.eta_channel * self.eta_det
    }
}

impl Default for ImperfectionModel {
    fn default() -> Self {
        Self::ideal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentConfig {
    pub n: usize,
    /// Total mean photon number `μ = |α|²` of Alice's pulse train.
    pub mu: f64,
    /// SM global phase bit; drawn uniformly per run when `None`.
    pub phi: Option<bool>,
}

impl CoherentConfig {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        let c = CoherentConfig { n, mu, phi: None };
        c.validate()?;
        Ok(c)
    }

    pub fn with_phi(mut self, phi: bool) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::invalid(format!(
                "n must be even and >= 2, got {}",
                self.n
            )));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!(
                "mu must be finite and >= 0, got {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// Per-pulse mean photon number `μ_p = μ / n`.
    pub fn mu_per_pulse(&self) -> f64 {
        self.mu / self.n as f64
    }
}
