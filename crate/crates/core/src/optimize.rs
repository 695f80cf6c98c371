//! Rabi-frequency optimization of the per-pulse success products.
//!
//! The objective is scanned on a log-spaced grid, then the best cell is
//! refined by golden-section search in `ln Ω`. Maxima on the bracket edge are
//! reported as such instead of being passed off as interior optima.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::blockade::{decay_survival, integrate_cross_mode, integrate_same_mode, integrate_transfer, OdeParams};
use crate::error::{invalid, Result};

pub const GRID_POINTS: usize = 64;
pub const RELATIVE_WIDTH: f64 = 1e-4;

/// Default Rabi bracket, `2π·[0.01, 50]` rad/μs.
pub fn default_bracket() -> (f64, f64) {
    (2.0 * PI * 0.01, 2.0 * PI * 50.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumLocation {
    Interior,
    /// The product is largest at the slow end of the bracket.
    LowerBoundary,
    /// The product is largest at the fast end of the bracket.
    UpperBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    /// Maximizing Rabi frequency, rad/μs.
    pub best_rabi: f64,
    pub best_product: f64,
    pub evaluations: usize,
    pub bracket: (f64, f64),
    pub location: OptimumLocation,
}

impl OptimizationResult {
    pub fn is_boundary(&self) -> bool {
        self.location != OptimumLocation::Interior
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn check_bracket(bracket: (f64, f64)) -> Result<()> {
    let (lo, hi) = bracket;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(invalid("bracket", format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    Ok(())
}

/// Maximizes `f` over `[lo, hi]` using `grid` log-spaced samples followed by
/// golden-section refinement of `ln x` down to `rel_width`.
pub fn maximize_log_bracket<F>(f: F, bracket: (f64, f64), grid: usize, rel_width: f64) -> Result<OptimizationResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    check_bracket(bracket)?;
    if grid < 3 {
        return Err(invalid("grid", "need at least 3 grid points"));
    }
    let (lo, hi) = bracket;
    let xs = log_grid(lo, hi, grid);
    let values = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let mut evaluations = xs.len();

    let best_idx = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let mut best = (xs[best_idx], values[best_idx]);

    // golden section on ln x over the cells adjacent to the best sample
    let left = best_idx.saturating_sub(1);
    let right = (best_idx + 1).min(grid - 1);
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (xs[left].ln(), xs[right].ln());
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    evaluations += 2;
    while b - a > rel_width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d.exp())?;
        }
        evaluations += 1;
    }
    for (x, v) in [(c.exp(), fc), (d.exp(), fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }

    let location = if best.0 == lo {
        OptimumLocation::LowerBoundary
    } else if best.0 == hi {
        OptimumLocation::UpperBoundary
    } else {
        OptimumLocation::Interior
    };
    Ok(OptimizationResult {
        best_rabi: best.0,
        best_product: best.1,
        evaluations,
        bracket,
        location,
    })
}

fn check_regime(shift: f64, decay: f64) -> Result<()> {
    if !(shift >= 0.0) || !(decay >= 0.0) {
        return Err(invalid("shift/decay", "must be non-negative"));
    }
    if shift == 0.0 && decay > 0.0 {
        return Err(invalid("shift", "Δe must be positive when γ > 0"));
    }
    Ok(())
}

/// Excitation-step product `P^I·P^II·P^III` at Rabi frequency `rabi`.
pub fn excitation_product(n_atoms: f64, rabi: f64, shift: f64, decay: f64) -> Result<f64> {
    let p = OdeParams {
        n_atoms,
        rabi,
        rabi_transfer: rabi,
        shift,
        decay,
        order: 1,
    };
    let p_i = integrate_same_mode(&p)?;
    let p_ii = integrate_cross_mode(&p)?;
    Ok(p_i * p_ii * decay_survival(decay, p.excitation_duration()))
}

/// Transfer-step product `P^IV_q·P^V_q` at Rabi frequency `rabi_transfer`.
pub fn transfer_product(order: u32, rabi_transfer: f64, shift: f64, decay: f64) -> Result<f64> {
    let p = OdeParams {
        n_atoms: 1.0,
        rabi: rabi_transfer,
        rabi_transfer,
        shift,
        decay,
        order,
    };
    let p_iv = integrate_transfer(&p)?;
    Ok(p_iv * decay_survival(decay, p.transfer_duration()))
}

/// Rabi frequency Ω maximizing `P^I·P^II·P^III`.
pub fn optimize_excitation_rabi(
    n_atoms: f64,
    shift: f64,
    decay: f64,
    bracket: (f64, f64),
) -> Result<OptimizationResult> {
    check_regime(shift, decay)?;
    if !(n_atoms >= 1.0) {
        return Err(invalid("n_atoms", "must be ≥ 1"));
    }
    maximize_log_bracket(
        |rabi| excitation_product(n_atoms, rabi, shift, decay),
        bracket,
        GRID_POINTS,
        RELATIVE_WIDTH,
    )
}

/// Rabi frequency Ω̃ maximizing `P^IV_q·P^V_q`.
pub fn optimize_transfer_rabi(
    order: u32,
    shift: f64,
    decay: f64,
    bracket: (f64, f64),
) -> Result<OptimizationResult> {
    check_regime(shift, decay)?;
    if order < 1 {
        return Err(invalid("order", "q must be ≥ 1"));
    }
    maximize_log_bracket(
        |rabi| transfer_product(order, rabi, shift, decay),
        bracket,
        GRID_POINTS,
        RELATIVE_WIDTH,
    )
}
