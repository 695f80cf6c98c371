//! Interference fringes, simulated ionization counts, and displacement fitting.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::pulse::interferometer_signal;
use crate::wave::PulseWaveVectors;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeResult {
    /// Cloud displacement in μm.
    pub displacement: [f64; 3],
    pub detection_probability: f64,
}

/// Displacement period of the ℓth-order fringe along a direction with
/// projected wave vector `dk_projection` (rad/μm).
pub fn fringe_period(order: u32, dk_projection: f64) -> f64 {
    2.0 * PI / (f64::from(order) * dk_projection.abs())
}

/// Closed-form fringe law `sin²(ℓ Δk·Δx / 2)`.
pub fn expected_signal(order: u32, dk_projection: f64, x: f64) -> f64 {
    (f64::from(order) * dk_projection * x / 2.0).sin().powi(2)
}

/// Runs generate + displace + readout for every displacement `x · direction`.
pub fn fringe_scan(
    order: u32,
    direction: [f64; 3],
    displacements: &[f64],
    waves: &PulseWaveVectors,
) -> Result<Vec<FringeResult>> {
    let len = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-9 {
        return Err(invalid("direction", format!("must be a unit vector, |d| = {len}")));
    }
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    displacements
        .par_iter()
        .map(|&x| {
            let dx = direction.map(|d| d * x);
            interferometer_signal(order, dx, waves).map(|p| FringeResult {
                displacement: dx,
                detection_probability: p,
            })
        })
        .collect()
}

/// Binomial ionization counts for one setting.
pub fn simulate_counts(probability: f64, shots: u64, seed: u64) -> Result<u64> {
    simulate_counts_at(probability, shots, seed, 0)
}

/// Binomial counts for setting `index` of a scan; reproducible per
/// `(seed, index)` regardless of evaluation order.
pub fn simulate_counts_at(probability: f64, shots: u64, seed: u64, index: u64) -> Result<u64> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(invalid("probability", format!("{probability} is outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let dist = Binomial::new(shots, probability)
        .map_err(|e| invalid("probability", e.to_string()))?;
    Ok(dist.sample(&mut rng))
}

/// Detector counts at one displacement setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSample {
    pub setting: f64,
    pub shots: u64,
    pub count: u64,
}

/// A fringe observation: setting, statistical weight (shots), and
/// observed detection frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeObservation {
    pub setting: f64,
    pub shots: f64,
    pub frequency: f64,
}

impl From<CountSample> for FringeObservation {
    fn from(s: CountSample) -> Self {
        FringeObservation {
            setting: s.setting,
            shots: s.shots as f64,
            frequency: s.count as f64 / s.shots as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementEstimate {
    /// Fitted offset in `[0, period)`, μm.
    pub estimate: f64,
    /// Standard error from the fit covariance under binomial noise, μm.
    pub stderr: f64,
    pub period: f64,
    /// Settings span at least one fringe period, so the offset is only
    /// determined modulo the period.
    pub ambiguous: bool,
    pub iterations: usize,
}

/// Fits `x₀` in `p(x) = sin²(ℓ Δk (x − x₀) / 2)` to detector counts.
pub fn estimate_displacement(
    counts: &[CountSample],
    order: u32,
    dk_projection: f64,
) -> Result<DisplacementEstimate> {
    for s in counts {
        if s.shots == 0 {
            return Err(invalid("shots", format!("setting {} has zero shots", s.setting)));
        }
        if s.count > s.shots {
            return Err(invalid(
                "count",
                format!("setting {}: count {} exceeds shots {}", s.setting, s.count, s.shots),
            ));
        }
    }
    let obs: Vec<FringeObservation> = counts.iter().copied().map(Into::into).collect();
    fit_fringe(&obs, order, dk_projection)
}

const GRID_POINTS: usize = 4096;
const MAX_ITERATIONS: usize = 200;

/// Shot-weighted least-squares fit of the fringe offset.
pub fn fit_fringe(
    obs: &[FringeObservation],
    order: u32,
    dk_projection: f64,
) -> Result<DisplacementEstimate> {
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    if dk_projection == 0.0 || !dk_projection.is_finite() {
        return Err(invalid("dk_projection", "must be finite and nonzero"));
    }
    let mut settings: Vec<f64> = obs.iter().map(|o| o.setting).collect();
    settings.sort_by(f64::total_cmp);
    settings.dedup();
    if settings.len() < 3 {
        return Err(invalid("settings", "need at least 3 distinct displacement settings"));
    }
    if obs
        .iter()
        .any(|o| !o.setting.is_finite() || !(o.shots > 0.0) || !(0.0..=1.0).contains(&o.frequency))
    {
        return Err(invalid("observations", "non-finite setting, bad weight, or frequency outside [0, 1]"));
    }

    let half = f64::from(order) * dk_projection / 2.0;
    let period = fringe_period(order, dk_projection);
    let span = settings[settings.len() - 1] - settings[0];

    let model = |x: f64, x0: f64| (half * (x - x0)).sin().powi(2);
    let slope = |x: f64, x0: f64| -half * (2.0 * half * (x - x0)).sin();
    let cost = |x0: f64| {
        obs.iter()
            .map(|o| o.shots * (o.frequency - model(o.setting, x0)).powi(2))
            .sum::<f64>()
    };

    // coarse periodic scan, then Gauss-Newton polish
    let mut x0 = (0..GRID_POINTS)
        .map(|i| period * i as f64 / GRID_POINTS as f64)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("non-empty grid");

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (mut num, mut den) = (0.0, 0.0);
        for o in obs {
            let d = slope(o.setting, x0);
            num += o.shots * d * (o.frequency - model(o.setting, x0));
            den += o.shots * d * d;
        }
        if den == 0.0 {
            converged = true;
            break;
        }
        let mut step = num / den;
        // damp steps that would increase the cost
        let c0 = cost(x0);
        let mut tries = 0;
        while cost(x0 + step) > c0 && tries < 50 {
            step *= 0.5;
            tries += 1;
        }
        x0 += step;
        if step.abs() <= 1e-15 * period.max(x0.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "Gauss-Newton did not settle within {MAX_ITERATIONS} iterations"
        )));
    }

    let (mut num, mut den) = (0.0, 0.0);
    for o in obs {
        let d = slope(o.setting, x0);
        let m = model(o.setting, x0);
        num += o.shots * d * d * m * (1.0 - m);
        den += o.shots * d * d;
    }
    let stderr = if den > 0.0 { num.sqrt() / den } else { f64::INFINITY };

    Ok(DisplacementEstimate {
        estimate: x0.rem_euclid(period),
        stderr,
        period,
        ambiguous: span >= period,
        iterations,
    })
}

/// Distance between two offsets modulo `period`.
pub fn periodic_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}
