//! Ideal fingerprint protocol. The `log₂ n`-qubit state is kept as its
//! `n`-dimensional real amplitude vector, which is exact for this family.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::classical::ProtocolOutcome;
use crate::error::{Error, Result};
use crate::matchings::{Edge, Matching};

/// `|x⟩ = n^{-1/2} Σ_k (−1)^{x_k} |k⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub amplitudes: Vec<f64>,
}

impl Fingerprint {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }
}

pub fn build_fingerprint(x: &BitString) -> Fingerprint {
    let a = 1.0 / (x.len() as f64).sqrt();
    Fingerprint {
        amplitudes: x.iter().map(|b| if b { -a } else { a }).collect(),
    }
}

/// Probability of one measurement outcome: projection onto
/// `(|k⟩ + |l⟩)/√2` (parity 0) or `(|k⟩ − |l⟩)/√2` (parity 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeOutcome {
    pub edge: Edge,
    pub parity: bool,
    pub probability: f64,
}

/// Outcome list in matching edge order, parity 0 before parity 1.
pub fn edge_outcome_distribution(fp: &Fingerprint, m: &Matching) -> Result<Vec<EdgeOutcome>> {
    if m.node_count() != fp.len() {
        return Err(Error::invalid(format!(
            "matching covers {} nodes, fingerprint has {} amplitudes",
            m.node_count(),
            fp.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * m.edges.len());
    for &edge in &m.edges {
        if edge.l() > fp.len() {
            return Err(Error::invalid(format!(
                "edge {edge} outside the fingerprint"
            )));
        }
        let ak = fp.amplitudes[edge.k() - 1];
        let al = fp.amplitudes[edge.l() - 1];
        let plus = ak + al;
        let minus = ak - al;
        out.push(EdgeOutcome {
            edge,
            parity: false,
            probability: plus * plus / 2.0,
        });
        out.push(EdgeOutcome {
            edge,
            parity: true,
            probability: minus * minus / 2.0,
        });
    }
    Ok(out)
}

/// Samples Bob's measurement in the basis of matching `m` by inverse CDF.
pub fn measure_matching<R: Rng + ?Sized>(
    fp: &Fingerprint,
    m: &Matching,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    let dist = edge_outcome_distribution(fp, m)?;
    let u: f64 = rng.random::<f64>() * dist.iter().map(|o| o.probability).sum::<f64>();
    let mut acc = 0.0;
    // fall back to the last non-zero outcome if rounding leaves u past the end
    let mut chosen = None;
    for o in &dist {
        if o.probability <= 0.0 {
            continue;
        }
        acc += o.probability;
        chosen = Some(o);
        if u < acc {
            break;
        }
    }
    let o = chosen.ok_or_else(|| Error::invalid("empty outcome distribution"))?;
    Ok(ProtocolOutcome {
        edge: o.edge,
        matching_index: m.index,
        parity: o.parity,
        guessed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchings::build_matching_set;
    use crate::seed::run_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fingerprint_signs() {
        let fp = build_fingerprint(&BitString::parse("0000").unwrap());
        assert_eq!(fp.amplitudes, vec![0.5; 4]);
        let fp = build_fingerprint(&BitString::parse("1010").unwrap());
        assert_eq!(fp.amplitudes, vec![-0.5, 0.5, -0.5, 0.5]);
        assert_abs_diff_eq!(fp.norm_squared(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn even_input_has_no_odd_parity() {
        let ms = build_matching_set(4).unwrap();
        let fp = build_fingerprint(&BitString::parse("0000").unwrap());
        let dist = edge_outcome_distribution(&fp, &ms.matching(1).unwrap()).unwrap();
        let p: Vec<f64> = dist.iter().map(|o| o.probability).collect();
        assert_eq!(dist[0].edge, Edge::new(1, 2).unwrap());
        assert_eq!(dist[2].edge, Edge::new(3, 4).unwrap());
        for (got, want) in p.iter().zip([0.5, 0.0, 0.5, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn alternating_input_on_sigma2() {
        let ms = build_matching_set(4).unwrap();
        let fp = build_fingerprint(&BitString::parse("1010").unwrap());
        let dist = edge_outcome_distribution(&fp, &ms.matching(2).unwrap()).unwrap();
        for o in dist {
            let want = if o.parity { 0.0 } else { 0.5 };
            assert_abs_diff_eq!(o.probability, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn size_mismatch_rejected() {
        let ms = build_matching_set(6).unwrap();
        let fp = build_fingerprint(&BitString::zeros(4).unwrap());
        assert!(edge_outcome_distribution(&fp, &ms.matching(1).unwrap()).is_err());
    }

    #[test]
    fn all_zero_input_measures_parity_zero() {
        let ms = build_matching_set(8).unwrap();
        let fp = build_fingerprint(&BitString::zeros(8).unwrap());
        let mut rng = run_rng(3, 0);
        for m in ms.matchings() {
            for _ in 0..100 {
                assert!(!measure_matching(&fp, &m, &mut rng).unwrap().parity);
            }
        }
    }
}
