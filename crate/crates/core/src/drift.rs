//! Interferometer phase drift and its block-wise tracking.
//!
//! The differential phase between Alice's and Bob's pulse trains follows a
//! Gaussian random walk. Each block ends with two calibration segments in
//! which a full `2π` ramp is swept; a cosine fit of each segment estimates
//! the current phase, and the average of the two estimates is subtracted
//! from the next block.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::run_rng;

const MIN_RAMP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub block_size: usize,
    pub protocol_pulses: usize,
    pub alice_track: usize,
    pub bob_track: usize,
}

impl Default for BlockLayout {
    fn default() -> Self {
        BlockLayout {
            block_size: 8192,
            protocol_pulses: 7680,
            alice_track: 256,
            bob_track: 256,
        }
    }
}

impl BlockLayout {
    pub fn new(protocol_pulses: usize, alice_track: usize, bob_track: usize) -> Result<Self> {
        let l = BlockLayout {
            block_size: protocol_pulses + alice_track + bob_track,
            protocol_pulses,
            alice_track,
            bob_track,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocol_pulses + self.alice_track + self.bob_track != self.block_size {
            return Err(Error::invalid(format!(
                "block layout {} + {} + {} does not add up to {}",
                self.protocol_pulses, self.alice_track, self.bob_track, self.block_size
            )));
        }
        if self.protocol_pulses == 0 {
            return Err(Error::invalid("a block needs at least one protocol pulse"));
        }
        if self.alice_track < MIN_RAMP || self.bob_track < MIN_RAMP {
            return Err(Error::invalid(format!(
                "tracking segments need at least {MIN_RAMP} pulses"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    /// Random-walk step standard deviation, radians per pulse.
    pub sigma: f64,
    /// Relative Gaussian noise on calibration intensities.
    pub intensity_noise: f64,
}

impl DriftModel {
    pub fn new(sigma: f64, intensity_noise: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite())
            || !(intensity_noise >= 0.0 && intensity_noise.is_finite())
        {
            return Err(Error::invalid(format!(
                "sigma and intensity_noise must be finite and >= 0, got {sigma}, {intensity_noise}"
            )));
        }
        Ok(DriftModel {
            sigma,
            intensity_noise,
        })
    }

    fn step(&self) -> Normal<f64> {
        Normal::new(0.0, self.sigma).expect("validated sigma")
    }
}

/// Phase of each pulse, starting at 0.
pub fn simulate_phase_walk<R: Rng + ?Sized>(
    num_pulses: usize,
    model: &DriftModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if num_pulses == 0 {
        return Err(Error::invalid("num_pulses must be >= 1"));
    }
    let step = model.step();
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(num_pulses);
    out.push(phase);
    for _ in 1..num_pulses {
        phase += step.sample(rng);
        out.push(phase);
    }
    Ok(out)
}

fn ramp_angle(t: usize, count: usize) -> f64 {
    TAU * t as f64 / count as f64
}

fn ramp_sample<R: Rng + ?Sized>(theta: f64, phase: f64, noise: f64, rng: &mut R) -> f64 {
    let clean = 0.5 * (1.0 + (theta + phase).cos());
    if noise > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        clean * (1.0 + noise * z)
    } else {
        clean
    }
}

/// Detector response to a full `2π` ramp at a fixed phase.
pub fn ramp_calibration_samples<R: Rng + ?Sized>(
    true_phase: f64,
    count: usize,
    model: &DriftModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if count < MIN_RAMP {
        return Err(Error::invalid(format!(
            "ramp needs at least {MIN_RAMP} samples, got {count}"
        )));
    }
    Ok((0..count)
        .map(|t| ramp_sample(ramp_angle(t, count), true_phase, model.intensity_noise, rng))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFit {
    /// In `(−π, π]`.
    pub phase: f64,
    /// RMS deviation of the samples from the fitted cosine.
    pub residual: f64,
}

/// Least-squares fit of `m + a·cos(θ_t + φ)` through the first DFT bin.
pub fn fit_phase(samples: &[f64]) -> Result<PhaseFit> {
    let count = samples.len();
    if count < MIN_RAMP {
        return Err(Error::invalid(format!(
            "fit needs at least {MIN_RAMP} samples, got {count}"
        )));
    }
    let (mut c, mut s, mut sum) = (0.0, 0.0, 0.0);
    for (t, &v) in samples.iter().enumerate() {
        let (sin, cos) = ramp_angle(t, count).sin_cos();
        c += v * cos;
        s += v * sin;
        sum += v;
    }
    let nf = count as f64;
    let mean = sum / nf;
    let amplitude = 2.0 * c.hypot(s) / nf;
    if amplitude.is_nan() || amplitude <= 1e-12 * (1.0 + mean.abs()) {
        return Err(Error::DegenerateFit);
    }
    let phase = wrap((-s).atan2(c));
    let sq: f64 = samples
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let d = v - (mean + amplitude * (ramp_angle(t, count) + phase).cos());
            d * d
        })
        .sum();
    Ok(PhaseFit {
        phase,
        residual: (sq / nf).sqrt(),
    })
}

/// Maps an angle into `(−π, π]`.
pub fn wrap(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

fn visibility(delta: f64) -> f64 {
    0.5 * (1.0 + delta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: usize,
    /// Drift phase at the first pulse of the block, wrapped.
    pub true_phase: f64,
    /// Correction applied during the block.
    pub estimate: f64,
    /// `true_phase − estimate`, wrapped.
    pub residual: f64,
    /// Mean corrected visibility over the block's protocol pulses.
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub blocks: Vec<BlockRecord>,
    pub visibility_corrected: f64,
    pub visibility_uncorrected: f64,
}

/// Runs the tracking loop. Block 0 is uncorrected; block `b + 1` subtracts
/// the circular mean of the two phase estimates taken at the end of block `b`.
pub fn run_blocks<R: Rng + ?Sized>(
    num_blocks: usize,
    layout: &BlockLayout,
    drift: &DriftModel,
    rng: &mut R,
) -> Result<DriftReport> {
    if num_blocks == 0 {
        return Err(Error::invalid("num_blocks must be >= 1"));
    }
    layout.validate()?;
    let step = drift.step();
    let mut phase = 0.0;
    let mut correction = 0.0;
    let mut first = true;
    let mut advance = |rng: &mut R| {
        if first {
            first = false;
        } else {
            phase += step.sample(rng);
        }
        phase
    };

    let mut blocks = Vec::with_capacity(num_blocks);
    let (mut sum_corr, mut sum_raw) = (0.0, 0.0);
    for block in 0..num_blocks {
        let mut block_vis = 0.0;
        let mut start = 0.0;
        for t in 0..layout.protocol_pulses {
            let p = advance(rng);
            if t == 0 {
                start = p;
            }
            block_vis += visibility(p - correction);
            sum_raw += visibility(p);
        }
        sum_corr += block_vis;

        let mut track = |count: usize, rng: &mut R| -> Result<f64> {
            let samples: Vec<f64> = (0..count)
                .map(|t| {
                    let p = advance(rng);
                    ramp_sample(ramp_angle(t, count), p, drift.intensity_noise, rng)
                })
                .collect();
            Ok(fit_phase(&samples)?.phase)
        };
        let a = track(layout.alice_track, rng)?;
        let b = track(layout.bob_track, rng)?;

        blocks.push(BlockRecord {
            block,
            true_phase: wrap(start),
            estimate: correction,
            residual: wrap(start - correction),
            visibility: block_vis / layout.protocol_pulses as f64,
        });
        correction = (a.sin() + b.sin()).atan2(a.cos() + b.cos());
    }
    let total = (num_blocks * layout.protocol_pulses) as f64;
    Ok(DriftReport {
        blocks,
        visibility_corrected: sum_corr / total,
        visibility_uncorrected: sum_raw / total,
    })
}

/// Mean visibilities over independent seeds; seed `i` uses stream `i` of `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedVisibility {
    pub seeds: u64,
    pub corrected: f64,
    pub uncorrected: f64,
}

pub fn paired_visibility(
    seeds: u64,
    num_blocks: usize,
    layout: &BlockLayout,
    drift: &DriftModel,
    seed: u64,
) -> Result<PairedVisibility> {
    if seeds == 0 {
        return Err(Error::invalid("seeds must be >= 1"));
    }
    let reports: Vec<(f64, f64)> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = run_rng(seed, i);
            run_blocks(num_blocks, layout, drift, &mut rng)
                .map(|r| (r.visibility_corrected, r.visibility_uncorrected))
        })
        .collect::<Result<_>>()?;
    let (c, u) = reports
        .iter()
        .fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    Ok(PairedVisibility {
        seeds,
        corrected: c / seeds as f64,
        uncorrected: u / seeds as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn layout_defaults() {
        let l = BlockLayout::default();
        assert!(l.validate().is_ok());
        assert_eq!(l.block_size, 8192);
        let bad = BlockLayout {
            block_size: 8000,
            ..l
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_sigma_walk_is_flat() {
        let mut rng = run_rng(1, 0);
        let w = simulate_phase_walk(1000, &DriftModel::new(0.0, 0.0).unwrap(), &mut rng).unwrap();
        assert_eq!(w.len(), 1000);
        assert!(w.iter().all(|&p| p == 0.0));
        assert!(simulate_phase_walk(0, &DriftModel::new(0.0, 0.0).unwrap(), &mut rng).is_err());
    }

    #[test]
    fn ramp_extremes() {
        let m = DriftModel::new(0.0, 0.0).unwrap();
        let mut rng = run_rng(1, 0);
        let s = ramp_calibration_samples(0.0, 64, &m, &mut rng).unwrap();
        assert_eq!(s.iter().cloned().fold(f64::MIN, f64::max), s[0]);
        let s = ramp_calibration_samples(PI, 64, &m, &mut rng).unwrap();
        assert_eq!(s.iter().cloned().fold(f64::MAX, f64::min), s[0]);
        assert!(ramp_calibration_samples(0.0, 7, &m, &mut rng).is_err());
    }

    #[test]
    fn fit_round_trip() {
        let m = DriftModel::new(0.0, 0.0).unwrap();
        let mut rng = run_rng(1, 0);
        for phase in [PI / 4.0, -3.0, PI, 0.0, 2.5] {
            let s = ramp_calibration_samples(phase, 256, &m, &mut rng).unwrap();
            let f = fit_phase(&s).unwrap();
            assert_abs_diff_eq!(f.phase, phase, epsilon = 1e-9);
            assert!(f.residual < 1e-12);
        }
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(fit_phase(&[0.0; 16]), Err(Error::DegenerateFit)));
        assert!(matches!(fit_phase(&[0.7; 16]), Err(Error::DegenerateFit)));
        assert!(fit_phase(&[1.0; 4]).is_err());
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap(-PI), PI);
        assert_eq!(wrap(PI), PI);
        assert_abs_diff_eq!(wrap(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap(0.1 + 4.0 * TAU), 0.1, epsilon = 1e-9);
    }

    #[test]
    fn no_drift_full_visibility() {
        let mut rng = run_rng(2, 0);
        let r = run_blocks(
            5,
            &BlockLayout::default(),
            &DriftModel::new(0.0, 0.0).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(r.visibility_corrected, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.visibility_uncorrected, 1.0, epsilon = 1e-12);
        assert_eq!(r.blocks.len(), 5);
    }
}
