//! Slot-level Monte Carlo of the coherent protocols.
//!
//! Every slot of a run has the same pair of click probabilities (correct
//! detector, wrong detector); only which physical detector is "correct"
//! depends on the input. Clicking slots are therefore found by geometric
//! skipping and the trace stores only those slots.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{click_probabilities, CoherentConfig, ImperfectionModel, Protocol};
use crate::bits::BitString;
use crate::classical::ProtocolOutcome;
use crate::error::{Error, Result};
use crate::matchings::{Edge, Matching, MatchingSet};
use crate::seed::run_rng;

/// What Bob does when he cannot infer a parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstainPolicy {
    /// Output a random edge with a fair-coin parity.
    #[default]
    Guess,
    /// Output nothing (post-selected mode).
    Suppress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimOptions {
    /// OR-combine independent dark clicks into each detector.
    pub include_dark: bool,
    pub abstain: AbstainPolicy,
}

/// A slot in which at least one detector fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotClick {
    /// 1-based slot index.
    pub slot: usize,
    pub d0: bool,
    pub d1: bool,
}

impl SlotClick {
    /// Label of the firing detector when exactly one fired.
    pub fn single(&self) -> Option<bool> {
        (self.d0 != self.d1).then_some(self.d1)
    }
}

/// Detector record of one run; slots without any click are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickTrace {
    pub slot_count: usize,
    /// Clicked slots in increasing slot order.
    pub clicks: Vec<SlotClick>,
}

impl ClickTrace {
    pub fn empty(slot_count: usize) -> Self {
        ClickTrace {
            slot_count,
            clicks: Vec::new(),
        }
    }

    /// Builds a trace from a dense list of `(d0, d1)` per slot.
    pub fn from_slots(slots: &[(bool, bool)]) -> Self {
        ClickTrace {
            slot_count: slots.len(),
            clicks: slots
                .iter()
                .enumerate()
                .filter(|(_, &(d0, d1))| d0 || d1)
                .map(|(i, &(d0, d1))| SlotClick {
                    slot: i + 1,
                    d0,
                    d1,
                })
                .collect(),
        }
    }

    /// `(d0, d1)` of 1-based slot `k`.
    pub fn slot(&self, k: usize) -> (bool, bool) {
        match self.clicks.binary_search_by_key(&k, |c| c.slot) {
            Ok(i) => (self.clicks[i].d0, self.clicks[i].d1),
            Err(_) => (false, false),
        }
    }

    /// `(slot, detector label)` of every single-click slot.
    pub fn single_clicks(&self) -> Vec<(usize, bool)> {
        self.clicks
            .iter()
            .filter_map(|c| c.single().map(|b| (c.slot, b)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: u64,
    pub protocol: Protocol,
    /// Configuration of the run; for SM `phi` holds the bit actually used.
    pub config: CoherentConfig,
    pub trace: ClickTrace,
    pub outcome: Option<ProtocolOutcome>,
    /// Bob lacked the clicks to infer a parity.
    pub abstained: bool,
    pub correct: bool,
}

/// Per-slot probabilities that the correct / wrong detector fires,
/// optionally OR-combined with dark clicks.
fn slot_probabilities(
    config: &CoherentConfig,
    model: &ImperfectionModel,
    opts: SimOptions,
) -> (f64, f64) {
    let p = click_probabilities(config.mu, config.n, model);
    if opts.include_dark {
        let or = |a: f64| 1.0 - (1.0 - a) * (1.0 - model.p_dark);
        (or(p.correct), or(p.wrong))
    } else {
        (p.correct, p.wrong)
    }
}

fn sample_clicks<R: Rng + ?Sized>(
    slot_count: usize,
    p_correct: f64,
    p_wrong: f64,
    correct_label: impl Fn(usize) -> bool,
    rng: &mut R,
) -> ClickTrace {
    let p_any = p_correct + p_wrong - p_correct * p_wrong;
    let mut trace = ClickTrace::empty(slot_count);
    if p_any <= 0.0 {
        return trace;
    }
    let only_correct = p_correct * (1.0 - p_wrong);
    let only_wrong = p_wrong * (1.0 - p_correct);
    let gap = Geometric::new(p_any.min(1.0)).expect("probability in (0, 1]");
    let mut next = 0usize;
    loop {
        let skip = gap.sample(rng);
        if skip >= (slot_count - next) as u64 {
            break;
        }
        let slot = next + skip as usize + 1;
        next = slot;
        let u = rng.random::<f64>() * p_any;
        let (correct, wrong) = if u < only_correct {
            (true, false)
        } else if u < only_correct + only_wrong {
            (false, true)
        } else {
            (true, true)
        };
        let label = correct_label(slot);
        let (d0, d1) = if label {
            (wrong, correct)
        } else {
            (correct, wrong)
        };
        trace.clicks.push(SlotClick { slot, d0, d1 });
        if next >= slot_count {
            break;
        }
    }
    trace
}

/// Bob's HM inference: a uniformly chosen single-click slot, reported as
/// the corresponding edge of `m` with the firing detector's label.
pub fn infer_hm_outcome<R: Rng + ?Sized>(
    trace: &ClickTrace,
    m: &Matching,
    rng: &mut R,
) -> Result<Option<ProtocolOutcome>> {
    let singles = trace.single_clicks();
    if singles.is_empty() {
        return Ok(None);
    }
    let (slot, label) = singles[rng.random_range(0..singles.len())];
    let edge = *m
        .edges
        .get(slot - 1)
        .ok_or_else(|| Error::invalid(format!("slot {slot} beyond the matching")))?;
    Ok(Some(ProtocolOutcome {
        edge,
        matching_index: m.index,
        parity: label,
        guessed: false,
    }))
}

/// Bob's SM inference: two distinct single-click slots chosen uniformly;
/// the XOR of their labels is the parity of that pair.
pub fn infer_sm_outcome<R: Rng + ?Sized>(
    trace: &ClickTrace,
    ms: &MatchingSet,
    rng: &mut R,
) -> Result<Option<ProtocolOutcome>> {
    let singles = trace.single_clicks();
    if singles.len() < 2 {
        return Ok(None);
    }
    let pick = index::sample(rng, singles.len(), 2);
    let (a, b) = (singles[pick.index(0)], singles[pick.index(1)]);
    let edge = Edge::new(a.0, b.0)?;
    Ok(Some(ProtocolOutcome {
        edge,
        matching_index: ms.matching_of_edge(edge)?,
        parity: a.1 ^ b.1,
        guessed: false,
    }))
}

/// Detector that receives the light of SM slot `k`: `D_{x_k ⊕ φ}`.
pub fn sm_correct_detector(x: &BitString, k: usize, phi: bool) -> bool {
    x.bit(k) ^ phi
}

fn finish(
    protocol: Protocol,
    config: CoherentConfig,
    trace: ClickTrace,
    inferred: Option<ProtocolOutcome>,
    guess: impl FnOnce() -> Result<ProtocolOutcome>,
    opts: SimOptions,
    x: &BitString,
) -> Result<RunRecord> {
    let abstained = inferred.is_none();
    let outcome = match (inferred, opts.abstain) {
        (Some(o), _) => Some(o),
        (None, AbstainPolicy::Guess) => Some(guess()?),
        (None, AbstainPolicy::Suppress) => None,
    };
    let correct = outcome.is_some_and(|o| o.is_correct(x));
    Ok(RunRecord {
        run: 0,
        protocol,
        config,
        trace,
        outcome,
        abstained,
        correct,
    })
}

/// One HM run: `n/2` slots, slot `j` interferes the two pulses of edge `j`
/// of `m`, whose correct detector is `D_{x_k ⊕ x_l}`.
pub fn simulate_hm_run<R: Rng + ?Sized>(
    x: &BitString,
    m: &Matching,
    config: &CoherentConfig,
    model: &ImperfectionModel,
    opts: SimOptions,
    rng: &mut R,
) -> Result<RunRecord> {
    config.validate()?;
    let n = config.n;
    if x.len() != n || m.node_count() != n {
        return Err(Error::invalid(format!(
            "size mismatch: config n = {n}, input {} bits, matching {} nodes",
            x.len(),
            m.node_count()
        )));
    }
    let (pc, pw) = slot_probabilities(config, model, opts);
    let trace = sample_clicks(
        n / 2,
        pc,
        pw,
        |slot| {
            let e = m.edges[slot - 1];
            x.parity(e.k(), e.l())
        },
        rng,
    );
    let inferred = infer_hm_outcome(&trace, m, rng)?;
    finish(
        Protocol::Hm,
        *config,
        trace,
        inferred,
        || {
            Ok(ProtocolOutcome {
                edge: m.edges[rng.random_range(0..m.edges.len())],
                matching_index: m.index,
                parity: rng.random(),
                guessed: true,
            })
        },
        opts,
        x,
    )
}

/// One SM run: `n` slots, slot `k` interferes Alice's pulse `k` with Bob's
/// local pulse; `φ` is drawn uniformly unless fixed in `config`.
pub fn simulate_sm_run<R: Rng + ?Sized>(
    x: &BitString,
    ms: &MatchingSet,
    config: &CoherentConfig,
    model: &ImperfectionModel,
    opts: SimOptions,
    rng: &mut R,
) -> Result<RunRecord> {
    config.validate()?;
    let n = config.n;
    if x.len() != n || ms.n() != n {
        return Err(Error::invalid(format!(
            "size mismatch: config n = {n}, input {} bits, matching set on {} nodes",
            x.len(),
            ms.n()
        )));
    }
    let phi = config.phi.unwrap_or_else(|| rng.random());
    let (pc, pw) = slot_probabilities(config, model, opts);
    let trace = sample_clicks(n, pc, pw, |k| sm_correct_detector(x, k, phi), rng);
    let inferred = infer_sm_outcome(&trace, ms, rng)?;
    finish(
        Protocol::Sm,
        config.with_phi(phi),
        trace,
        inferred,
        || {
            let k = rng.random_range(1..=n);
            let mut l = rng.random_range(1..n);
            if l >= k {
                l += 1;
            }
            let edge = Edge::new(k, l)?;
            Ok(ProtocolOutcome {
                edge,
                matching_index: ms.matching_of_edge(edge)?,
                parity: rng.random(),
                guessed: true,
            })
        },
        opts,
        x,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputPolicy {
    /// Fresh uniform input per run.
    Random,
    Fixed(BitString),
}

/// A batch of independent runs. Run `i` uses stream `i` of `seed`.
#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub protocol: Protocol,
    pub config: CoherentConfig,
    pub model: ImperfectionModel,
    pub options: SimOptions,
    pub input: InputPolicy,
    pub trials: u64,
    pub seed: u64,
}

/// Runs a batch on the current rayon pool. Records come back in run order
/// and do not depend on the number of worker threads.
///
/// Per run the stream is consumed as: input bits (when random), the HM
/// matching index, then the protocol run itself.
pub fn simulate_batch(spec: &BatchSpec) -> Result<Vec<RunRecord>> {
    spec.config.validate()?;
    spec.model.validate()?;
    let n = spec.config.n;
    if let InputPolicy::Fixed(x) = &spec.input {
        if x.len() != n {
            return Err(Error::invalid(format!(
                "fixed input has {} bits, n = {n}",
                x.len()
            )));
        }
    }
    let ms = MatchingSet::build(n)?;
    (0..spec.trials)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(spec.seed, run);
            let random_x;
            let x = match &spec.input {
                InputPolicy::Fixed(x) => x,
                InputPolicy::Random => {
                    random_x = BitString::random(n, &mut rng)?;
                    &random_x
                }
            };
            let mut record = match spec.protocol {
                Protocol::Hm => {
                    let i = rng.random_range(1..n);
                    let m = ms.matching(i)?;
                    simulate_hm_run(x, &m, &spec.config, &spec.model, spec.options, &mut rng)?
                }
                Protocol::Sm => {
                    simulate_sm_run(x, &ms, &spec.config, &spec.model, spec.options, &mut rng)?
                }
            };
            record.run = run;
            Ok(record)
        })
        .collect()
}
