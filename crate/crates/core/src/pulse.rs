//! Ideal-case pulse engine: perfect blockade, no decay, exact pulse areas.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{BasisConfig, CollectiveState, ModeLabel};
use crate::wave::PulseWaveVectors;

/// The four optical transitions of the double-Λ scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// Collective g ↔ r_a, wave vector `k_gr_a`.
    GroundRa,
    /// Collective g ↔ r_b, wave vector `k_gr_b`.
    GroundRb,
    /// Single-atomic r_a ↔ s_a, wave vector `k_ra_sa`.
    RaSa,
    /// Single-atomic r_b ↔ s_b, wave vector `k_rb_sb`.
    RbSb,
}

impl Transition {
    pub fn is_collective(self) -> bool {
        matches!(self, Transition::GroundRa | Transition::GroundRb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Transition::GroundRa => "g-ra",
            Transition::GroundRb => "g-rb",
            Transition::RaSa => "ra-sa",
            Transition::RbSb => "rb-sb",
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g-ra" | "gr_a" | "g_ra" => Ok(Transition::GroundRa),
            "g-rb" | "gr_b" | "g_rb" => Ok(Transition::GroundRb),
            "ra-sa" | "ra_sa" | "r_as_a" => Ok(Transition::RaSa),
            "rb-sb" | "rb_sb" | "r_bs_b" => Ok(Transition::RbSb),
            _ => Err(Error::UnknownTransition(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub transition: Transition,
    /// Rotation angle in radians.
    pub area: f64,
}

impl PulseSpec {
    pub fn new(transition: Transition, area: f64) -> Self {
        PulseSpec { transition, area }
    }

    pub fn pi(transition: Transition) -> Self {
        PulseSpec::new(transition, PI)
    }

    pub fn half_pi(transition: Transition) -> Self {
        PulseSpec::new(transition, FRAC_PI_2)
    }

    pub fn inverse(self) -> Self {
        PulseSpec::new(self.transition, -self.area)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolEvent {
    Pulse(PulseSpec),
    /// Rigid displacement of the cloud, in μm.
    Displace([f64; 3]),
    IonizeMeasure,
}

impl ProtocolEvent {
    pub fn pulse(&self) -> Option<&PulseSpec> {
        match self {
            ProtocolEvent::Pulse(p) => Some(p),
            _ => None,
        }
    }
}

/// Where a branch sits in the two-level subspace addressed by a pulse.
enum Role {
    Lower(BasisConfig),
    Upper(BasisConfig),
    Idle,
}

fn role(cfg: &BasisConfig, transition: Transition) -> Role {
    let collective = |rydberg: ModeLabel| {
        if cfg.rydberg_count() == 0 {
            Role::Lower(cfg.with_added(rydberg, 1))
        } else if cfg.occupation(rydberg) == 1 && cfg.rydberg_count() == 1 {
            Role::Upper(cfg.with_removed(rydberg).expect("occupied"))
        } else {
            // blockaded by the other mode's Rydberg excitation
            Role::Idle
        }
    };
    let single = |rydberg: ModeLabel, storage: ModeLabel| {
        if cfg.occupation(rydberg) >= 1 {
            Role::Lower(cfg.with_moved(rydberg, storage).expect("occupied"))
        } else if cfg.occupation(storage) >= 1 && cfg.rydberg_count() == 0 {
            Role::Upper(cfg.with_moved(storage, rydberg).expect("occupied"))
        } else {
            Role::Idle
        }
    };
    match transition {
        Transition::GroundRa => collective(ModeLabel::Ra),
        Transition::GroundRb => collective(ModeLabel::Rb),
        Transition::RaSa => single(ModeLabel::Ra, ModeLabel::Sa),
        Transition::RbSb => single(ModeLabel::Rb, ModeLabel::Sb),
    }
}

/// Applies the rotation `R(θ) = cos(θ/2)·1 − i sin(θ/2)·σx` in every
/// two-level subspace the pulse addresses.
///
/// For collective g ↔ r_λ pulses the lower level is the branch without the
/// r_λ excitation; for r_λ ↔ s_λ pulses the lower level is the branch with
/// the excitation in r_λ. Any transition that would create a second Rydberg
/// excitation is blocked and leaves the branch unchanged.
pub fn apply_pulse(state: &CollectiveState, pulse: &PulseSpec) -> CollectiveState {
    let c = Complex64::new((pulse.area / 2.0).cos(), 0.0);
    let mis = Complex64::new(0.0, -(pulse.area / 2.0).sin());
    let mut out = Vec::with_capacity(state.len() * 2);
    for (cfg, amp) in state.branches() {
        match role(cfg, pulse.transition) {
            Role::Lower(partner) | Role::Upper(partner) => {
                out.push((*cfg, c * amp));
                out.push((partner, mis * amp));
            }
            Role::Idle => out.push((*cfg, *amp)),
        }
    }
    CollectiveState::from_branches(out)
}

/// Multiplies each branch by `exp(i K·Δx)` with `K` its total stored wave vector.
pub fn displace(state: &CollectiveState, dx: [f64; 3], waves: &PulseWaveVectors) -> CollectiveState {
    state.map_amplitudes(|cfg, amp| {
        let phase = waves.materialize(cfg.total_k()).dot(&dx);
        amp * Complex64::from_polar(1.0, phase)
    })
}

/// Pulse list that prepares the ℓth-order NOON state from |0⟩.
///
/// For ℓ ≥ 2 this has 4ℓ+2 pulses. For ℓ = 1 the repeated block is skipped
/// and the closing r_b → s_b pulse follows the first three collective pulses
/// (6 pulses).
pub fn build_generation_sequence(order: u32) -> Result<Vec<ProtocolEvent>> {
    use Transition::*;
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    let mut pulses = vec![
        PulseSpec::pi(GroundRa),
        PulseSpec::half_pi(RaSa),
        PulseSpec::pi(GroundRb),
        PulseSpec::pi(GroundRa),
        PulseSpec::pi(GroundRb),
    ];
    if order >= 2 {
        // the first block builds |2⟩_{s_a}, each repeat adds one more order
        for _ in 0..order - 1 {
            pulses.extend([
                PulseSpec::pi(GroundRa),
                PulseSpec::pi(RbSb),
                PulseSpec::pi(GroundRb),
                PulseSpec::pi(RaSa),
            ]);
        }
    }
    pulses.push(PulseSpec::pi(RbSb));
    Ok(pulses.into_iter().map(ProtocolEvent::Pulse).collect())
}

/// Readout sequence applied after the displacement.
///
/// The generation pulses are undone in reverse order, except that the
/// r_a ↔ s_a beam-splitter pulse is repeated with its original sign so that
/// the two arms recombine, and the final g → r_a pulse is omitted. At zero
/// displacement the excitation ends in s_a and the ionization signal is dark.
pub fn build_readout_sequence(order: u32) -> Result<Vec<ProtocolEvent>> {
    let generation = build_generation_sequence(order)?;
    let pulses: Vec<PulseSpec> = generation.iter().filter_map(|e| e.pulse().copied()).collect();
    let splitter = 1;
    let mut events: Vec<ProtocolEvent> = pulses
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .map(|(i, p)| {
            if i == splitter {
                ProtocolEvent::Pulse(*p)
            } else {
                ProtocolEvent::Pulse(p.inverse())
            }
        })
        .collect();
    events.push(ProtocolEvent::IonizeMeasure);
    Ok(events)
}

/// Exact inverse of the generation sequence (every pulse undone, none omitted).
pub fn build_inverse_sequence(order: u32) -> Result<Vec<ProtocolEvent>> {
    let generation = build_generation_sequence(order)?;
    Ok(generation
        .iter()
        .rev()
        .filter_map(|e| e.pulse().map(|p| ProtocolEvent::Pulse(p.inverse())))
        .collect())
}

/// Outcome of running a sequence of events.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: CollectiveState,
    /// Ionization signal, present when the sequence ended in a measurement.
    pub detection_probability: Option<f64>,
}

/// Folds the events over `initial`.
///
/// The state is renormalized before the ionization measurement, which
/// reports the probability that any Rydberg level is excited.
pub fn run(
    events: &[ProtocolEvent],
    initial: &CollectiveState,
    waves: &PulseWaveVectors,
) -> Result<RunOutcome> {
    let mut state = initial.clone();
    let mut detection = None;
    for (i, event) in events.iter().enumerate() {
        if detection.is_some() {
            return Err(Error::EventAfterMeasurement(i));
        }
        match event {
            ProtocolEvent::Pulse(p) => {
                if !p.area.is_finite() {
                    return Err(crate::error::invalid("area", "pulse area must be finite"));
                }
                state = apply_pulse(&state, p);
            }
            ProtocolEvent::Displace(dx) => state = displace(&state, *dx, waves),
            ProtocolEvent::IonizeMeasure => {
                state = state.normalized();
                detection = Some(state.rydberg_probability().clamp(0.0, 1.0));
            }
        }
    }
    Ok(RunOutcome {
        state,
        detection_probability: detection,
    })
}

/// Runs the generation sequence from |0⟩.
pub fn generate(order: u32) -> Result<CollectiveState> {
    let events = build_generation_sequence(order)?;
    Ok(run(&events, &CollectiveState::vacuum(), &PulseWaveVectors::default())?.state)
}

/// Full interferometer: generate, displace by `dx`, read out, ionize.
pub fn interferometer_signal(order: u32, dx: [f64; 3], waves: &PulseWaveVectors) -> Result<f64> {
    let mut events = build_generation_sequence(order)?;
    events.push(ProtocolEvent::Displace(dx));
    events.extend(build_readout_sequence(order)?);
    let out = run(&events, &CollectiveState::vacuum(), waves)?;
    Ok(out.detection_probability.expect("readout ends in a measurement"))
}

/// Weights of the two NOON arms `|ℓ⟩_{s_a}` and `|ℓ⟩_{s_b}` in `state`.
pub fn noon_arm_weights(state: &CollectiveState, order: u32) -> (f64, f64) {
    let a = state.amplitude(&BasisConfig::fock(ModeLabel::Sa, order)).norm_sqr();
    let b = state.amplitude(&BasisConfig::fock(ModeLabel::Sb, order)).norm_sqr();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn pi_pulse_excites_one_rydberg_atom() {
        let s = apply_pulse(&CollectiveState::vacuum(), &PulseSpec::pi(Transition::GroundRa));
        assert_eq!(s.len(), 1);
        let ra = BasisConfig::fock(ModeLabel::Ra, 1);
        assert!(close(s.amplitude(&ra), c(0.0, -1.0)));
    }

    #[test]
    fn half_pi_splits_rydberg_into_storage() {
        let ra = BasisConfig::fock(ModeLabel::Ra, 1);
        let s = apply_pulse(&CollectiveState::single(ra), &PulseSpec::half_pi(Transition::RaSa));
        assert!(close(s.amplitude(&ra), c(FRAC_1_SQRT_2, 0.0)));
        let sa = BasisConfig::fock(ModeLabel::Sa, 1);
        assert!(close(s.amplitude(&sa), c(0.0, -FRAC_1_SQRT_2)));
    }

    #[test]
    fn other_mode_rydberg_blocks_collective_pulse() {
        let ra = CollectiveState::single(BasisConfig::fock(ModeLabel::Ra, 1));
        let s = apply_pulse(&ra, &PulseSpec::pi(Transition::GroundRb));
        assert_eq!(s, ra);
        let sa_rb = CollectiveState::single(
            BasisConfig::fock(ModeLabel::Sa, 2).with_added(ModeLabel::Rb, 1),
        );
        // moving s_a back to r_a would double-excite the ensemble
        assert_eq!(apply_pulse(&sa_rb, &PulseSpec::pi(Transition::RaSa)), sa_rb);
    }

    #[test]
    fn single_atomic_pulse_ignores_empty_modes() {
        let s = CollectiveState::single(BasisConfig::fock(ModeLabel::Sb, 3));
        assert_eq!(apply_pulse(&s, &PulseSpec::pi(Transition::RaSa)), s);
    }

    #[test]
    fn unknown_transition_rejected() {
        assert!("g-rc".parse::<Transition>().is_err());
        assert_eq!("rb-sb".parse::<Transition>().unwrap(), Transition::RbSb);
    }

    #[test]
    fn sequence_lengths() {
        assert_eq!(build_generation_sequence(2).unwrap().len(), 10);
        assert_eq!(build_generation_sequence(20).unwrap().len(), 82);
        assert_eq!(build_generation_sequence(1).unwrap().len(), 6);
        assert!(build_generation_sequence(0).is_err());
        assert!(build_readout_sequence(0).is_err());
        for l in 1..6 {
            let g = build_generation_sequence(l).unwrap().len();
            let r = build_readout_sequence(l).unwrap();
            assert_eq!(r.len(), g);
            assert_eq!(r.iter().filter(|e| e.pulse().is_some()).count(), g - 1);
            assert_eq!(r.last(), Some(&ProtocolEvent::IonizeMeasure));
        }
    }

    #[test]
    fn generation_reaches_noon_arms() {
        for l in 1..=6 {
            let s = generate(l).unwrap();
            assert_eq!(s.len(), 2, "order {l}: {s:?}");
            let (a, b) = noon_arm_weights(&s, l);
            assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_displacement_is_dark() {
        for l in 1..=5 {
            let p = interferometer_signal(l, [0.0; 3], &PulseWaveVectors::default()).unwrap();
            assert!(p.abs() < 1e-12, "order {l}: {p}");
        }
    }

    #[test]
    fn displacement_phases() {
        let w = PulseWaveVectors::default();
        assert_eq!(
            displace(&CollectiveState::noon(2), [0.0; 3], &w),
            CollectiveState::noon(2)
        );
        let dx = [0.013, -0.2, 0.5];
        let one = CollectiveState::single(BasisConfig::fock(ModeLabel::Sa, 1));
        let phase = w.stored_a().dot(&dx);
        let got = displace(&one, dx, &w).amplitude(&BasisConfig::fock(ModeLabel::Sa, 1));
        assert!(close(got, Complex64::from_polar(1.0, phase)));
        let many = CollectiveState::single(BasisConfig::fock(ModeLabel::Sa, 7));
        let got = displace(&many, dx, &w).amplitude(&BasisConfig::fock(ModeLabel::Sa, 7));
        assert!((got - Complex64::from_polar(1.0, 7.0 * phase)).norm() < 1e-12);
    }

    #[test]
    fn events_after_measurement_rejected() {
        let events = [ProtocolEvent::IonizeMeasure, ProtocolEvent::Displace([0.0; 3])];
        let err = run(&events, &CollectiveState::vacuum(), &PulseWaveVectors::default());
        assert_eq!(err.unwrap_err(), Error::EventAfterMeasurement(1));
    }

    #[test]
    fn empty_run_is_identity() {
        let init = CollectiveState::noon(2);
        let out = run(&[], &init, &PulseWaveVectors::default()).unwrap();
        assert_eq!(out.state, init);
        assert!(out.detection_probability.is_none());
    }
}
