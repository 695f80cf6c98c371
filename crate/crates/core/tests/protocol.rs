use proptest::prelude::*;

use swnoon_core::fringe::expected_signal;
use swnoon_core::pulse::{
    apply_pulse, build_generation_sequence, build_inverse_sequence, generate, interferometer_signal, noon_arm_weights,
    run, ProtocolEvent,
};
use swnoon_core::state::CollectiveState;
use swnoon_core::wave::{PulseWaveVectors, WaveVector};

fn pulse_count(events: &[ProtocolEvent]) -> usize {
    events.iter().filter(|e| e.pulse().is_some()).count()
}

#[test]
fn pulse_counts() {
    assert_eq!(pulse_count(&build_generation_sequence(1).unwrap()), 6);
    for order in 2..=25 {
        assert_eq!(pulse_count(&build_generation_sequence(order).unwrap()), 4 * order as usize + 2);
    }
    assert!(build_generation_sequence(0).is_err());
}

#[test]
fn noon_weights_up_to_25() {
    for order in 1..=25 {
        let state = generate(order).unwrap();
        let (a, b) = noon_arm_weights(&state, order);
        assert!((a + b - 1.0).abs() <= 1e-10, "ℓ={order}");
        assert!((a - 0.5).abs() <= 1e-10 && (b - 0.5).abs() <= 1e-10, "ℓ={order}: {a} {b}");
        let overlap = state.overlap(&CollectiveState::noon(order)).norm();
        assert!((overlap - 1.0).abs() <= 1e-10, "ℓ={order}: {overlap}");
    }
}

#[test]
fn blockade_holds_along_the_sequence() {
    for order in [1, 2, 7, 15] {
        let mut state = CollectiveState::vacuum();
        for event in build_generation_sequence(order).unwrap() {
            state = apply_pulse(&state, event.pulse().unwrap());
            assert!(state.branches().all(|(cfg, _)| cfg.rydberg_count() <= 1));
            assert!((state.norm() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn generation_is_reversible() {
    let waves = PulseWaveVectors::default();
    for order in [1, 2, 5, 12, 25] {
        let mut events = build_generation_sequence(order).unwrap();
        events.extend(build_inverse_sequence(order).unwrap());
        let out = run(&events, &CollectiveState::vacuum(), &waves).unwrap();
        let back = out.state.overlap(&CollectiveState::vacuum()).norm();
        assert!((back - 1.0).abs() <= 1e-10, "ℓ={order}: {back}");
    }
}

#[test]
fn dark_at_zero_displacement() {
    let waves = PulseWaveVectors::default();
    for order in 1..=10 {
        assert!(interferometer_signal(order, [0.0; 3], &waves).unwrap() <= 1e-20);
    }
}

fn wave() -> impl Strategy<Value = WaveVector> {
    (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| WaveVector::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fringe_law_for_arbitrary_beams(
        order in 1u32..8,
        gr_a in wave(), ra_sa in wave(), gr_b in wave(), rb_sb in wave(),
        dx in (-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5),
    ) {
        let waves = PulseWaveVectors::new(gr_a, ra_sa, gr_b, rb_sb);
        let dx = [dx.0, dx.1, dx.2];
        let dk = waves.delta_k();
        let projection = dk.dot(&dx);
        let p = interferometer_signal(order, dx, &waves).unwrap();
        prop_assert!((p - expected_signal(order, 1.0, projection)).abs() <= 1e-9);
    }
}
