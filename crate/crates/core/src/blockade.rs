//! Amplitude equations for the imperfect-blockade and decay error channels.
//!
//! All frequencies are angular (rad/μs) and times are in μs. Each system is
//! written as `i ċ = H c` with a non-Hermitian `H` carrying the decay rates
//! on its diagonal, and integrated as `ċ = −i H c`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, SVector, Vector2, Vector3};

use crate::error::{invalid, Result};
use crate::ode::{integrate_linear, IntegratorOptions, C64};

/// Converts an ordinary frequency in MHz to rad/μs.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * mhz
}

/// Decay rate γ (1/μs) for a Rydberg lifetime τ (μs).
///
/// The lifetime is quoted as `τ = 1/(2πγ)` with γ in cycles/μs; in the
/// angular units used by the amplitude equations this is `γ = 1/τ`.
pub fn decay_rate_from_lifetime(lifetime_us: f64) -> f64 {
    1.0 / lifetime_us
}

/// Parameters of the three amplitude systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams {
    /// Atom number N.
    pub n_atoms: f64,
    /// Single-atom Rabi frequency Ω of the g ↔ r pulses, rad/μs.
    pub rabi: f64,
    /// Rabi frequency Ω̃ of the r ↔ s pulses, rad/μs.
    pub rabi_transfer: f64,
    /// Blockade shift Δe, rad/μs.
    pub shift: f64,
    /// Rydberg decay rate γ, 1/μs.
    pub decay: f64,
    /// Spin-wave order q of the transfer step.
    pub order: u32,
}

impl OdeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_atoms >= 1.0) || !self.n_atoms.is_finite() {
            return Err(invalid("n_atoms", format!("{} must be ≥ 1", self.n_atoms)));
        }
        if !(self.rabi > 0.0) || !self.rabi.is_finite() {
            return Err(invalid("rabi", format!("{} must be > 0", self.rabi)));
        }
        if !(self.rabi_transfer > 0.0) || !self.rabi_transfer.is_finite() {
            return Err(invalid("rabi_transfer", format!("{} must be > 0", self.rabi_transfer)));
        }
        if !(self.shift >= 0.0) || !self.shift.is_finite() {
            return Err(invalid("shift", format!("{} must be ≥ 0", self.shift)));
        }
        if !(self.decay >= 0.0) || !self.decay.is_finite() {
            return Err(invalid("decay", format!("{} must be ≥ 0", self.decay)));
        }
        if self.order < 1 {
            return Err(invalid("order", "q must be ≥ 1"));
        }
        Ok(())
    }

    /// Collective Rabi frequency √N·Ω.
    pub fn collective_rabi(&self) -> f64 {
        self.n_atoms.sqrt() * self.rabi
    }

    /// Duration of the collective π pulse, `π/(√N Ω)`.
    pub fn excitation_duration(&self) -> f64 {
        PI / self.collective_rabi()
    }

    /// Duration of the qth transfer π pulse, `π/(√q Ω̃)`.
    pub fn transfer_duration(&self) -> f64 {
        PI / (f64::from(self.order).sqrt() * self.rabi_transfer)
    }
}

/// Amplitudes `(c₀, c₁, c₂)` of the three coupled collective levels.
pub type Amplitudes = Vector3<C64>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn times_minus_i<const D: usize>(h: nalgebra::SMatrix<C64, D, D>) -> nalgebra::SMatrix<C64, D, D> {
    h * C64::new(0.0, -1.0)
}

/// Three-level ladder `i ċ = H c` shared by the same-mode and transfer
/// systems: couplings `g01`, `g12` and the doubly excited level shifted by Δe.
pub fn ladder_hamiltonian(g01: f64, g12: f64, shift: f64, decay: f64) -> Matrix3<C64> {
    Matrix3::new(
        re(0.0),
        re(-g01 / 2.0),
        re(0.0),
        re(-g01 / 2.0),
        C64::new(0.0, -decay / 2.0),
        re(-g12 / 2.0),
        re(0.0),
        re(-g12 / 2.0),
        C64::new(shift, -decay),
    )
}

/// Hamiltonian of the same-mode double-excitation channel.
pub fn same_mode_hamiltonian(p: &OdeParams) -> Matrix3<C64> {
    let omega = p.collective_rabi();
    ladder_hamiltonian(omega, (2.0 * p.n_atoms).sqrt() * p.rabi, p.shift, p.decay)
}

/// Hamiltonian of the cross-mode blockade channel.
pub fn cross_mode_hamiltonian(p: &OdeParams) -> Matrix2<C64> {
    let omega = p.collective_rabi();
    Matrix2::new(
        re(0.0),
        re(-omega / 2.0),
        re(-omega / 2.0),
        C64::new(p.shift, -p.decay / 2.0),
    )
}

/// Hamiltonian of the qth r → s transfer with back-transfer leakage.
pub fn transfer_hamiltonian(p: &OdeParams) -> Matrix3<C64> {
    let q = f64::from(p.order);
    ladder_hamiltonian(
        q.sqrt() * p.rabi_transfer,
        (2.0 * (q - 1.0)).sqrt() * p.rabi_transfer,
        p.shift,
        p.decay,
    )
}

/// Integrates `ċ = −i H c` for a 3×3 `H` given as the generator `−iH`.
pub fn integrate_general(
    generator: &Matrix3<C64>,
    initial: &Amplitudes,
    duration: f64,
    tolerance: f64,
) -> Result<Amplitudes> {
    integrate_linear(generator, initial, duration, IntegratorOptions::with_tolerance(tolerance))
}

fn evolve<const D: usize>(
    h: nalgebra::SMatrix<C64, D, D>,
    initial: SVector<C64, D>,
    duration: f64,
    opts: IntegratorOptions,
) -> Result<SVector<C64, D>> {
    integrate_linear(&times_minus_i(h), &initial, duration, opts)
}

/// Same-mode amplitudes after the collective π pulse, from `(1, 0, 0)`.
pub fn same_mode_amplitudes(p: &OdeParams, opts: IntegratorOptions) -> Result<Amplitudes> {
    p.validate()?;
    let init = Vector3::new(re(1.0), re(0.0), re(0.0));
    evolve(same_mode_hamiltonian(p), init, p.excitation_duration(), opts)
}

/// `P^I = |c₁(Δt)|²`: single collective excitation without a second
/// same-mode Rydberg atom.
pub fn integrate_same_mode(p: &OdeParams) -> Result<f64> {
    Ok(same_mode_amplitudes(p, IntegratorOptions::default())?[1].norm_sqr())
}

/// Cross-mode amplitudes after the collective π pulse, from `(1, 0)`.
pub fn cross_mode_amplitudes(p: &OdeParams, opts: IntegratorOptions) -> Result<Vector2<C64>> {
    p.validate()?;
    let init = Vector2::new(re(1.0), re(0.0));
    evolve(cross_mode_hamiltonian(p), init, p.excitation_duration(), opts)
}

/// `P^II = |c₀(Δt)|²`: ground state held while the other mode's Rydberg
/// excitation blocks the pulse.
pub fn integrate_cross_mode(p: &OdeParams) -> Result<f64> {
    Ok(cross_mode_amplitudes(p, IntegratorOptions::default())?[0].norm_sqr())
}

/// Transfer amplitudes after the qth r → s π pulse, from `(0, 1, 0)`.
pub fn transfer_amplitudes(p: &OdeParams, opts: IntegratorOptions) -> Result<Amplitudes> {
    p.validate()?;
    let init = Vector3::new(re(0.0), re(1.0), re(0.0));
    evolve(transfer_hamiltonian(p), init, p.transfer_duration(), opts)
}

/// `P^IV_q = |c̃₀(Δt̃_q)|²`: the qth-order spin wave is produced.
pub fn integrate_transfer(p: &OdeParams) -> Result<f64> {
    Ok(transfer_amplitudes(p, IntegratorOptions::default())?[0].norm_sqr())
}

/// Survival `e^{−γΔt}` of a Rydberg excitation; gives both `P^III` and `P^V_q`.
pub fn decay_survival(decay: f64, duration: f64) -> f64 {
    (-decay * duration).exp()
}

/// Per-channel success probabilities for an ℓth-order preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProbabilities {
    pub p_i: f64,
    pub p_ii: f64,
    pub p_iii: f64,
    /// `P^IV_q` for q = 1..=ℓ.
    pub p_iv: Vec<f64>,
    /// `P^V_q` for q = 1..=ℓ.
    pub p_v: Vec<f64>,
}

impl ChannelProbabilities {
    /// All channels perfect up to order ℓ.
    pub fn perfect(order: u32) -> Self {
        ChannelProbabilities {
            p_i: 1.0,
            p_ii: 1.0,
            p_iii: 1.0,
            p_iv: vec![1.0; order as usize],
            p_v: vec![1.0; order as usize],
        }
    }

    pub fn order(&self) -> u32 {
        self.p_iv.len() as u32
    }
}

/// Evaluates all five channels at fixed Rabi frequencies (the same Ω̃ for
/// every q).
pub fn channel_probabilities(p: &OdeParams, order: u32) -> Result<ChannelProbabilities> {
    p.validate()?;
    let p_i = integrate_same_mode(p)?;
    let p_ii = integrate_cross_mode(p)?;
    let p_iii = decay_survival(p.decay, p.excitation_duration());
    let mut p_iv = Vec::with_capacity(order as usize);
    let mut p_v = Vec::with_capacity(order as usize);
    for q in 1..=order {
        let pq = OdeParams { order: q, ..*p };
        p_iv.push(integrate_transfer(&pq)?);
        p_v.push(decay_survival(p.decay, pq.transfer_duration()));
    }
    Ok(ChannelProbabilities {
        p_i,
        p_ii,
        p_iii,
        p_iv,
        p_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> OdeParams {
        OdeParams {
            n_atoms: 400.0,
            rabi: 2.0 * PI,
            rabi_transfer: 2.0 * PI,
            shift: mhz_to_angular(300.0),
            decay: decay_rate_from_lifetime(300.0),
            order: 1,
        }
    }

    #[test]
    fn perfect_blockade_limit() {
        let p = OdeParams {
            decay: 0.0,
            shift: 1e6 * params().collective_rabi(),
            ..params()
        };
        assert!(integrate_same_mode(&p).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn slow_lossy_pulse_decays_away() {
        // overdamped: |c₁|² ≈ (√N Ω / γ)², vanishing as Ω → 0
        let mut last = 1.0;
        for rabi in [1e-2, 1e-3, 1e-4] {
            let p = OdeParams {
                rabi,
                decay: 1.0,
                shift: 10.0,
                ..params()
            };
            assert!(p.decay * p.excitation_duration() > 10.0);
            let p_i = integrate_same_mode(&p).unwrap();
            assert!(p_i < last);
            last = p_i;
        }
        assert!(last < 1e-5, "{last}");
    }

    #[test]
    fn resonant_cross_mode_transfers_fully() {
        let p = OdeParams {
            decay: 0.0,
            shift: 0.0,
            ..params()
        };
        assert!(integrate_cross_mode(&p).unwrap() < 1e-12);
    }

    #[test]
    fn far_detuned_cross_mode_holds() {
        let p = OdeParams {
            decay: 0.0,
            shift: 1e3 * params().collective_rabi(),
            ..params()
        };
        assert!(integrate_cross_mode(&p).unwrap() >= 1.0 - 3e-6);
    }

    #[test]
    fn decay_survival_values() {
        assert_eq!(decay_survival(0.0, 5.0), 1.0);
        assert!((decay_survival(2.0_f64.ln(), 1.0) - 0.5).abs() < 1e-15);
        let g = decay_rate_from_lifetime(300.0);
        assert!((decay_survival(g, 1.0) - (-1.0f64 / 300.0).exp()).abs() < 1e-16);
    }

    #[test]
    fn first_transfer_is_a_clean_pi_pulse() {
        let p = OdeParams {
            decay: 0.0,
            order: 1,
            ..params()
        };
        assert!((integrate_transfer(&p).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn blocked_back_transfer() {
        for q in [1, 2, 7, 20] {
            let p = OdeParams {
                decay: 0.0,
                order: q,
                shift: 1e6 * params().rabi_transfer,
                ..params()
            };
            assert!(integrate_transfer(&p).unwrap() >= 1.0 - 1e-5, "q = {q}");
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = [
            OdeParams { n_atoms: 0.5, ..params() },
            OdeParams { rabi: 0.0, ..params() },
            OdeParams { shift: -1.0, ..params() },
            OdeParams { decay: -1.0, ..params() },
            OdeParams { order: 0, ..params() },
        ];
        for p in bad {
            assert!(integrate_same_mode(&p).is_err() || integrate_transfer(&p).is_err(), "{p:?}");
        }
    }

    #[test]
    fn channel_probabilities_are_probabilities() {
        let ch = channel_probabilities(&params(), 5).unwrap();
        assert_eq!(ch.order(), 5);
        let all = [ch.p_i, ch.p_ii, ch.p_iii]
            .into_iter()
            .chain(ch.p_iv.iter().copied())
            .chain(ch.p_v.iter().copied());
        for v in all {
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(ch.p_iii, decay_survival(params().decay, params().excitation_duration()));
    }
}
