//! Adaptive Dormand–Prince 5(4) integration of constant-coefficient linear
//! systems `ċ = A c` over complex amplitudes.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute local-error tolerance per step.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Default cap on accepted plus rejected steps.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        IntegratorOptions {
            tolerance,
            ..Default::default()
        }
    }
}

// Dormand–Prince tableau; the nodes c_i are not needed for autonomous systems
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th- and embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn check_generator<const D: usize>(a: &SMatrix<C64, D, D>) -> Result<()> {
    for r in 0..D {
        for c in 0..D {
            let z = a[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteGenerator { row: r, col: c });
            }
        }
    }
    Ok(())
}

fn w(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn max_abs<const D: usize>(v: &SVector<C64, D>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
}

/// Integrates `ċ = A c` from `initial` over `[0, duration]`.
///
/// Steps are accepted when the max-norm of the embedded error estimate is
/// at most `opts.tolerance`; the 5th-order solution is propagated.
pub fn integrate_linear<const D: usize>(
    generator: &SMatrix<C64, D, D>,
    initial: &SVector<C64, D>,
    duration: f64,
    opts: IntegratorOptions,
) -> Result<SVector<C64, D>> {
    dormand_prince(generator, initial, duration, opts)
}

/// Like [`integrate_linear`], but also returns the state at `samples` evenly
/// spaced interior-and-final times `duration·j/samples`, `j = 1..=samples`.
pub fn integrate_sampled<const D: usize>(
    generator: &SMatrix<C64, D, D>,
    initial: &SVector<C64, D>,
    duration: f64,
    samples: usize,
    opts: IntegratorOptions,
) -> Result<Vec<SVector<C64, D>>> {
    let mut states = Vec::with_capacity(samples);
    let mut current = *initial;
    let dt = duration / samples.max(1) as f64;
    for _ in 0..samples {
        current = integrate_linear(generator, &current, dt, opts)?;
        states.push(current);
    }
    Ok(states)
}

/// One Dormand–Prince step for `ċ = A c` is linear in the state, so the
/// stages collapse into a propagator `M(h)` and an error matrix `E(h)`:
/// `y ← M y`, `err = E y`. Both are rebuilt only when `h` changes.
struct StepMatrices<const D: usize> {
    h: f64,
    propagate: SMatrix<C64, D, D>,
    error: SMatrix<C64, D, D>,
}

impl<const D: usize> StepMatrices<D> {
    fn new(a: &SMatrix<C64, D, D>, h: f64) -> Self {
        let y = SMatrix::<C64, D, D>::identity();
        let hc = C64::new(h, 0.0);
        let k1 = a * y;
        let k2 = a * (y + k1 * (hc * w(A21)));
        let k3 = a * (y + (k1 * w(A31) + k2 * w(A32)) * hc);
        let k4 = a * (y + (k1 * w(A41) + k2 * w(A42) + k3 * w(A43)) * hc);
        let k5 = a * (y + (k1 * w(A51) + k2 * w(A52) + k3 * w(A53) + k4 * w(A54)) * hc);
        let k6 = a * (y + (k1 * w(A61) + k2 * w(A62) + k3 * w(A63) + k4 * w(A64) + k5 * w(A65)) * hc);
        let propagate = y + (k1 * w(B1) + k3 * w(B3) + k4 * w(B4) + k5 * w(B5) + k6 * w(B6)) * hc;
        let k7 = a * propagate;
        let error = (k1 * w(E1) + k3 * w(E3) + k4 * w(E4) + k5 * w(E5) + k6 * w(E6) + k7 * w(E7)) * hc;
        StepMatrices { h, propagate, error }
    }
}

// accepted steps only grow h when the controller asks for at least this much
const GROWTH_THRESHOLD: f64 = 1.25;

fn dormand_prince<const D: usize>(
    a: &SMatrix<C64, D, D>,
    initial: &SVector<C64, D>,
    duration: f64,
    opts: IntegratorOptions,
) -> Result<SVector<C64, D>> {
    if !(opts.tolerance > 0.0) {
        return Err(crate::error::invalid("tolerance", "must be positive"));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(crate::error::invalid("duration", format!("{duration} is not a finite non-negative time")));
    }
    check_generator(a)?;

    let mut y = *initial;
    if duration == 0.0 {
        return Ok(y);
    }

    // initial step from the generator scale
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut h = if scale > 0.0 {
        (0.01 / scale).min(duration)
    } else {
        duration
    };

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut cached = StepMatrices::new(a, h);
    // the controller factor reaches GROWTH_THRESHOLD exactly when err is this small
    let grow_below = opts.tolerance * (SAFETY / GROWTH_THRESHOLD).powi(5);
    while t < duration {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps {
                max_steps: opts.max_steps,
                time: t,
                duration,
            });
        }
        steps += 1;
        let last = t + h >= duration;
        let step = if last { duration - t } else { h };
        let final_step;
        let m = if step == cached.h {
            &cached
        } else {
            final_step = StepMatrices::new(a, step);
            &final_step
        };
        let err = max_abs(&(m.error * y));
        let factor = || {
            if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * (opts.tolerance / err).powf(0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            }
        };
        if err <= opts.tolerance {
            y = m.propagate * y;
            t = if last { duration } else { t + step };
            if err <= grow_below {
                h *= factor();
            }
        } else {
            h = step * factor();
        }
        if t < duration && h <= f64::EPSILON * t.max(duration) {
            return Err(Error::StepUnderflow {
                time: t,
                duration,
                step: h,
            });
        }
        if h != cached.h && t < duration && t + h < duration {
            cached = StepMatrices::new(a, h);
        }
    }
    Ok(y)
}
