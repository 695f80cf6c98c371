//! Error budget of the NOON preparation and of the full interferometer.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::blockade::{
    decay_rate_from_lifetime, decay_survival, integrate_cross_mode, integrate_same_mode, integrate_transfer,
    mhz_to_angular, ChannelProbabilities, OdeParams,
};
use crate::error::{invalid, Error, Result};
use crate::optimize::{default_bracket, optimize_excitation_rabi, optimize_transfer_rabi, OptimizationResult, OptimumLocation};

/// Rabi-frequency search brackets for the g ↔ r and r ↔ s pulses, rad/μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiBrackets {
    pub excitation: (f64, f64),
    pub transfer: (f64, f64),
}

impl Default for RabiBrackets {
    fn default() -> Self {
        RabiBrackets {
            excitation: default_bracket(),
            transfer: default_bracket(),
        }
    }
}

/// Per-pulse failure probability of a collective π pulse from the atom-number
/// uncertainty ΔN ≈ √N: `π²/(16N)`.
pub fn per_pulse_atom_number_error(n_atoms: f64) -> f64 {
    PI * PI / (16.0 * n_atoms)
}

/// Total atom-number error of an ℓth-order preparation, `π²ℓ/(8N)`.
pub fn atom_number_error(order: u32, n_atoms: f64) -> f64 {
    PI * PI * f64::from(order) / (8.0 * n_atoms)
}

/// `P(ℓ) = 𝒫_ℓ·(P^I P^II P^III)^ℓ` with `𝒫_ℓ = Π_q P^IV_q P^V_q`.
pub fn compose_success(channel: &ChannelProbabilities) -> f64 {
    let transfer: f64 = channel
        .p_iv
        .iter()
        .zip(&channel.p_v)
        .map(|(iv, v)| iv * v)
        .product();
    let excitation = channel.p_i * channel.p_ii * channel.p_iii;
    transfer * excitation.powi(channel.order() as i32)
}

/// Interferometer fidelity `1 − 2(e_N + E)`, clamped to [0, 1]; generation and
/// readout each contribute the full error once.
pub fn fidelity_from_errors(atom_number_error: f64, protocol_error: f64) -> f64 {
    (1.0 - 2.0 * (atom_number_error + protocol_error)).clamp(0.0, 1.0)
}

/// Optimized channel probabilities for every order up to `max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedChannels {
    pub excitation: OptimizationResult,
    /// Transfer optimum for q = 1..=max_order.
    pub transfer: Vec<OptimizationResult>,
    /// Channel probabilities evaluated at the optima.
    pub channel: ChannelProbabilities,
}

impl OptimizedChannels {
    /// Runs the excitation optimizer once and the transfer optimizer for each q.
    pub fn compute(max_order: u32, n_atoms: f64, shift: f64, decay: f64, brackets: &RabiBrackets) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::InvalidOrder(max_order));
        }
        let excitation = optimize_excitation_rabi(n_atoms, shift, decay, brackets.excitation)?;
        let transfer = (1..=max_order)
            .into_par_iter()
            .map(|q| optimize_transfer_rabi(q, shift, decay, brackets.transfer))
            .collect::<Result<Vec<_>>>()?;

        let p = OdeParams {
            n_atoms,
            rabi: excitation.best_rabi,
            rabi_transfer: excitation.best_rabi,
            shift,
            decay,
            order: 1,
        };
        let mut channel = ChannelProbabilities {
            p_i: integrate_same_mode(&p)?,
            p_ii: integrate_cross_mode(&p)?,
            p_iii: decay_survival(decay, p.excitation_duration()),
            p_iv: Vec::with_capacity(transfer.len()),
            p_v: Vec::with_capacity(transfer.len()),
        };
        for (i, t) in transfer.iter().enumerate() {
            let pq = OdeParams {
                rabi_transfer: t.best_rabi,
                order: i as u32 + 1,
                ..p
            };
            channel.p_iv.push(integrate_transfer(&pq)?);
            channel.p_v.push(decay_survival(decay, pq.transfer_duration()));
        }
        Ok(OptimizedChannels {
            excitation,
            transfer,
            channel,
        })
    }

    pub fn max_order(&self) -> u32 {
        self.transfer.len() as u32
    }

    /// Channel probabilities truncated to order ℓ.
    pub fn for_order(&self, order: u32) -> Result<ChannelProbabilities> {
        if order == 0 || order > self.max_order() {
            return Err(Error::InvalidOrder(order));
        }
        let n = order as usize;
        Ok(ChannelProbabilities {
            p_i: self.channel.p_i,
            p_ii: self.channel.p_ii,
            p_iii: self.channel.p_iii,
            p_iv: self.channel.p_iv[..n].to_vec(),
            p_v: self.channel.p_v[..n].to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget {
    pub order: u32,
    pub n_atoms: f64,
    pub channel: ChannelProbabilities,
    pub excitation: OptimizationResult,
    pub transfer: Vec<OptimizationResult>,
    /// P(ℓ).
    pub p_success: f64,
    /// E(ℓ) = 1 − P(ℓ); excludes the atom-number error.
    pub e_protocol: f64,
    /// π²ℓ/(8N).
    pub e_atom_number: f64,
    pub fidelity: f64,
    /// Optimizations whose maximum sat on a bracket edge.
    pub boundary_warnings: Vec<String>,
}

impl ErrorBudget {
    pub fn from_channels(order: u32, n_atoms: f64, optimized: &OptimizedChannels) -> Result<Self> {
        let channel = optimized.for_order(order)?;
        let p_success = compose_success(&channel);
        let e_protocol = 1.0 - p_success;
        let e_atom_number = atom_number_error(order, n_atoms);
        let transfer = optimized.transfer[..order as usize].to_vec();

        let mut boundary_warnings = Vec::new();
        let describe = |loc: OptimumLocation| match loc {
            OptimumLocation::LowerBoundary => "lower",
            OptimumLocation::UpperBoundary => "upper",
            OptimumLocation::Interior => "interior",
        };
        if optimized.excitation.is_boundary() {
            boundary_warnings.push(format!(
                "excitation optimum at {} bracket edge (Ω = {:.6e} rad/μs)",
                describe(optimized.excitation.location),
                optimized.excitation.best_rabi
            ));
        }
        for (i, t) in transfer.iter().enumerate() {
            if t.is_boundary() {
                boundary_warnings.push(format!(
                    "transfer q = {} optimum at {} bracket edge (Ω̃ = {:.6e} rad/μs)",
                    i + 1,
                    describe(t.location),
                    t.best_rabi
                ));
            }
        }

        Ok(ErrorBudget {
            order,
            n_atoms,
            channel,
            excitation: optimized.excitation,
            transfer,
            p_success,
            e_protocol,
            e_atom_number,
            fidelity: fidelity_from_errors(e_atom_number, e_protocol),
            boundary_warnings,
        })
    }
}

fn check_inputs(order: u32, n_atoms: f64) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    if !(n_atoms >= 1.0) || !n_atoms.is_finite() {
        return Err(invalid("n_atoms", format!("{n_atoms} must be ≥ 1")));
    }
    Ok(())
}

/// Optimizes every pulse and assembles the ℓth-order error budget.
///
/// `shift` is the blockade shift in rad/μs and `decay` the Rydberg decay
/// rate in 1/μs.
pub fn success_probability(
    order: u32,
    n_atoms: f64,
    shift: f64,
    decay: f64,
    brackets: &RabiBrackets,
) -> Result<ErrorBudget> {
    check_inputs(order, n_atoms)?;
    let optimized = OptimizedChannels::compute(order, n_atoms, shift, decay, brackets)?;
    ErrorBudget::from_channels(order, n_atoms, &optimized)
}

/// Fidelity of the complete interferometer (generation plus readout).
pub fn interferometer_fidelity(order: u32, n_atoms: f64, shift: f64, decay: f64) -> Result<f64> {
    Ok(success_probability(order, n_atoms, shift, decay, &RabiBrackets::default())?.fidelity)
}

/// One row of the error-versus-shift table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub order: u32,
    pub lifetime_us: f64,
    pub delta_e_mhz: f64,
    pub p_success: f64,
    pub e_total: f64,
}

/// E(ℓ) over the full grid of orders, lifetimes, and shifts (in MHz).
///
/// Each (lifetime, shift) point is optimized once up to the largest order
/// and shared by all orders. Rows come back sorted by order, lifetime,
/// then shift.
pub fn sweep_error_vs_shift(
    orders: &[u32],
    delta_e_mhz: &[f64],
    lifetimes_us: &[f64],
    n_atoms: f64,
    brackets: &RabiBrackets,
) -> Result<Vec<SweepRow>> {
    if orders.is_empty() || delta_e_mhz.is_empty() || lifetimes_us.is_empty() {
        return Err(invalid("sweep", "orders, shifts, and lifetimes must be non-empty"));
    }
    let max_order = *orders.iter().max().expect("non-empty");
    for &order in orders {
        check_inputs(order, n_atoms)?;
    }
    if let Some(bad) = delta_e_mhz.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(invalid("delta_e_mhz", format!("{bad} must be positive")));
    }
    if let Some(bad) = lifetimes_us.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(invalid("lifetime_us", format!("{bad} must be positive")));
    }

    let points: Vec<(f64, f64)> = lifetimes_us
        .iter()
        .flat_map(|&tau| delta_e_mhz.iter().map(move |&de| (tau, de)))
        .collect();
    let optimized = points
        .par_iter()
        .map(|&(tau, de)| {
            OptimizedChannels::compute(
                max_order,
                n_atoms,
                mhz_to_angular(de),
                decay_rate_from_lifetime(tau),
                brackets,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(orders.len() * points.len());
    for &order in orders {
        for (&(tau, de), opt) in points.iter().zip(&optimized) {
            let p = compose_success(&opt.for_order(order)?);
            rows.push(SweepRow {
                order,
                lifetime_us: tau,
                delta_e_mhz: de,
                p_success: p,
                e_total: 1.0 - p,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.lifetime_us.total_cmp(&b.lifetime_us))
            .then(a.delta_e_mhz.total_cmp(&b.delta_e_mhz))
    });
    rows.dedup_by(|a, b| a.order == b.order && a.lifetime_us == b.lifetime_us && a.delta_e_mhz == b.delta_e_mhz);
    Ok(rows)
}
