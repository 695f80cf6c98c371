//! Collective spin-wave basis states and superpositions over them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::wave::{KCoeffs, PulseWaveVectors, WaveVector};

/// Branches whose weight falls below this are dropped after every event.
pub const PRUNE_THRESHOLD: f64 = 1e-24;

/// The four excitation modes of the double-Λ level scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    /// Metastable storage level of mode a.
    Sa,
    /// Metastable storage level of mode b.
    Sb,
    /// Rydberg level of mode a.
    Ra,
    /// Rydberg level of mode b.
    Rb,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 4] = [ModeLabel::Sa, ModeLabel::Sb, ModeLabel::Ra, ModeLabel::Rb];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_rydberg(self) -> bool {
        matches!(self, ModeLabel::Ra | ModeLabel::Rb)
    }

    /// Wave-vector coefficients carried by one excitation of this mode.
    pub fn unit_k(self) -> KCoeffs {
        match self {
            ModeLabel::Sa => KCoeffs::STORED_A,
            ModeLabel::Sb => KCoeffs::STORED_B,
            ModeLabel::Ra => KCoeffs::RYDBERG_A,
            ModeLabel::Rb => KCoeffs::RYDBERG_B,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeLabel::Sa => "s_a",
            ModeLabel::Sb => "s_b",
            ModeLabel::Ra => "r_a",
            ModeLabel::Rb => "r_b",
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Occupation numbers and accumulated wave vectors of the four modes.
///
/// Empty modes always carry the zero k-sum, so derived equality is the
/// physical equality of collective basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BasisConfig {
    occupation: [u32; 4],
    k: [KCoeffs; 4],
}

impl BasisConfig {
    /// The collective ground state |0⟩.
    pub fn vacuum() -> Self {
        BasisConfig::default()
    }

    /// Builds a config from raw parts and canonicalizes it.
    pub fn from_parts(occupation: [u32; 4], k: [KCoeffs; 4]) -> Self {
        BasisConfig { occupation, k }.canonical()
    }

    /// `n` excitations in `mode`, each carrying that mode's standard wave vector.
    pub fn fock(mode: ModeLabel, n: u32) -> Self {
        BasisConfig::vacuum().with_added(mode, n)
    }

    pub fn canonical(mut self) -> Self {
        for i in 0..4 {
            if self.occupation[i] == 0 {
                self.k[i] = KCoeffs::ZERO;
            }
        }
        self
    }

    pub fn occupation(&self, mode: ModeLabel) -> u32 {
        self.occupation[mode.index()]
    }

    pub fn k_sum(&self, mode: ModeLabel) -> KCoeffs {
        self.k[mode.index()]
    }

    pub fn total_k(&self) -> KCoeffs {
        self.k.iter().fold(KCoeffs::ZERO, |acc, k| acc + *k)
    }

    pub fn rydberg_count(&self) -> u32 {
        self.occupation(ModeLabel::Ra) + self.occupation(ModeLabel::Rb)
    }

    pub fn total_excitations(&self) -> u32 {
        self.occupation.iter().sum()
    }

    /// Adds `n` standard excitations to `mode`.
    pub fn with_added(mut self, mode: ModeLabel, n: u32) -> Self {
        let i = mode.index();
        self.occupation[i] += n;
        self.k[i] += mode.unit_k().scaled(n as i32);
        self
    }

    /// Removes one standard excitation from `mode`, if any is present.
    pub fn with_removed(mut self, mode: ModeLabel) -> Option<Self> {
        let i = mode.index();
        if self.occupation[i] == 0 {
            return None;
        }
        self.occupation[i] -= 1;
        self.k[i] -= mode.unit_k();
        Some(self.canonical())
    }

    /// Moves one excitation from `from` to `to`, transferring its wave vector
    /// according to the two-photon convention of each mode.
    pub fn with_moved(self, from: ModeLabel, to: ModeLabel) -> Option<Self> {
        self.with_removed(from).map(|c| c.with_added(to, 1))
    }
}

impl fmt::Display for BasisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for mode in ModeLabel::ALL {
            let n = self.occupation(mode);
            if n == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let k = self.k_sum(mode).0;
            write!(f, "|{n}, k=[{},{},{},{}]⟩_{mode}", k[0], k[1], k[2], k[3])?;
        }
        if first {
            f.write_str("|0⟩")?;
        }
        Ok(())
    }
}

/// A pure collective state: a sparse superposition of basis configurations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollectiveState {
    branches: BTreeMap<BasisConfig, Complex64>,
}

impl CollectiveState {
    pub fn vacuum() -> Self {
        CollectiveState::single(BasisConfig::vacuum())
    }

    pub fn single(config: BasisConfig) -> Self {
        CollectiveState::from_branches([(config, Complex64::new(1.0, 0.0))])
    }

    /// Sums amplitudes of equal configurations and prunes negligible branches.
    pub fn from_branches<I>(branches: I) -> Self
    where
        I: IntoIterator<Item = (BasisConfig, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (cfg, amp) in branches {
            *map.entry(cfg.canonical()).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = CollectiveState { branches: map };
        state.prune();
        state
    }

    /// The ideal ℓth-order NOON state `(|ℓ⟩_{s_a} + |ℓ⟩_{s_b})/√2`.
    pub fn noon(order: u32) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CollectiveState::from_branches([
            (BasisConfig::fock(ModeLabel::Sa, order), Complex64::new(h, 0.0)),
            (BasisConfig::fock(ModeLabel::Sb, order), Complex64::new(h, 0.0)),
        ])
    }

    pub(crate) fn prune(&mut self) {
        self.branches.retain(|_, a| a.norm_sqr() >= PRUNE_THRESHOLD);
    }

    pub fn branches(&self) -> impl Iterator<Item = (&BasisConfig, &Complex64)> {
        self.branches.iter()
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn amplitude(&self, config: &BasisConfig) -> Complex64 {
        self.branches
            .get(&config.canonical())
            .copied()
            .unwrap_or_default()
    }

    pub fn norm(&self) -> f64 {
        self.branches
            .values()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        CollectiveState::from_branches(self.branches.iter().map(|(c, a)| (*c, a / n)))
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &CollectiveState) -> Complex64 {
        // iterate over the smaller map
        if self.len() <= other.len() {
            self.branches
                .iter()
                .filter_map(|(c, a)| other.branches.get(c).map(|b| a.conj() * b))
                .sum()
        } else {
            other
                .branches
                .iter()
                .filter_map(|(c, b)| self.branches.get(c).map(|a| a.conj() * b))
                .sum()
        }
    }

    /// Expected occupation of `mode`.
    pub fn mode_population(&self, mode: ModeLabel) -> f64 {
        self.branches
            .iter()
            .map(|(c, a)| a.norm_sqr() * f64::from(c.occupation(mode)))
            .sum()
    }

    /// Probability that `mode` holds at least one excitation.
    pub fn occupied_probability(&self, mode: ModeLabel) -> f64 {
        self.weight_where(|c| c.occupation(mode) >= 1)
    }

    /// Probability that any Rydberg level is excited; this is what field
    /// ionization detects.
    pub fn rydberg_probability(&self) -> f64 {
        self.weight_where(|c| c.rydberg_count() >= 1)
    }

    pub fn weight_where<F: Fn(&BasisConfig) -> bool>(&self, pred: F) -> f64 {
        self.branches
            .iter()
            .filter(|(c, _)| pred(c))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Numeric total wave vector of each branch.
    pub fn branch_wave_vectors<'a>(
        &'a self,
        pulses: &'a PulseWaveVectors,
    ) -> impl Iterator<Item = (&'a BasisConfig, WaveVector)> + 'a {
        self.branches
            .keys()
            .map(move |c| (c, pulses.materialize(c.total_k())))
    }

    pub(crate) fn map_amplitudes<F>(&self, f: F) -> Self
    where
        F: Fn(&BasisConfig, Complex64) -> Complex64,
    {
        CollectiveState::from_branches(self.branches.iter().map(|(c, a)| (*c, f(c, *a))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norm_examples() {
        assert!((CollectiveState::vacuum().norm() - 1.0).abs() < 1e-15);
        assert!((CollectiveState::noon(4).norm() - 1.0).abs() < 1e-15);
        let s = CollectiveState::from_branches([
            (BasisConfig::fock(ModeLabel::Sa, 1), c(0.6, 0.0)),
            (BasisConfig::fock(ModeLabel::Sb, 1), c(0.0, 0.8)),
        ]);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_examples() {
        let x = CollectiveState::noon(3);
        assert!((x.overlap(&x) - c(1.0, 0.0)).norm() < 1e-15);

        let a = CollectiveState::single(BasisConfig::fock(ModeLabel::Sa, 1));
        let b = CollectiveState::single(BasisConfig::fock(ModeLabel::Sb, 1));
        assert_eq!(a.overlap(&b), c(0.0, 0.0));

        let arm = CollectiveState::single(BasisConfig::fock(ModeLabel::Sa, 5));
        let ov = CollectiveState::noon(5).overlap(&arm);
        assert!((ov - c(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn population_examples() {
        let vac = CollectiveState::vacuum();
        for m in ModeLabel::ALL {
            assert_eq!(vac.mode_population(m), 0.0);
        }
        let noon = CollectiveState::noon(6);
        assert!((noon.mode_population(ModeLabel::Sa) - 3.0).abs() < 1e-14);
        assert!((noon.occupied_probability(ModeLabel::Sb) - 0.5).abs() < 1e-14);
        assert_eq!(noon.rydberg_probability(), 0.0);
    }

    #[test]
    fn differing_k_sums_are_distinct_branches() {
        let plain = BasisConfig::fock(ModeLabel::Sa, 1);
        let mut k = [KCoeffs::ZERO; 4];
        k[ModeLabel::Sa.index()] = KCoeffs::RYDBERG_A;
        let other = BasisConfig::from_parts([1, 0, 0, 0], k);
        assert_ne!(plain, other);
        let s = CollectiveState::from_branches([(plain, c(1.0, 0.0)), (other, c(1.0, 0.0))]);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn merging_and_pruning() {
        let cfg = BasisConfig::fock(ModeLabel::Ra, 1);
        let s = CollectiveState::from_branches([
            (cfg, c(0.5, 0.0)),
            (cfg, c(-0.5, 0.0)),
            (BasisConfig::vacuum(), c(1.0, 0.0)),
            (BasisConfig::fock(ModeLabel::Sb, 2), c(1e-13, 0.0)),
        ]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&BasisConfig::vacuum()), c(1.0, 0.0));
    }

    #[test]
    fn removal_restores_zero_k() {
        let cfg = BasisConfig::fock(ModeLabel::Sb, 1)
            .with_removed(ModeLabel::Sb)
            .unwrap();
        assert_eq!(cfg, BasisConfig::vacuum());
        assert!(BasisConfig::vacuum().with_removed(ModeLabel::Ra).is_none());
    }

    fn arb_config() -> impl Strategy<Value = BasisConfig> {
        (
            proptest::array::uniform4(0u32..4),
            proptest::array::uniform4(proptest::array::uniform4(-5i32..5)),
        )
            .prop_map(|(occ, k)| BasisConfig::from_parts(occ, k.map(KCoeffs)))
    }

    fn arb_state() -> impl Strategy<Value = CollectiveState> {
        proptest::collection::vec((arb_config(), -1.0f64..1.0, -1.0f64..1.0), 1..8).prop_map(
            |v| {
                CollectiveState::from_branches(v.into_iter().map(|(cfg, re, im)| (cfg, c(re, im))))
                    .normalized()
            },
        )
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent(cfg in arb_config()) {
            prop_assert_eq!(cfg.canonical().canonical(), cfg.canonical());
            for m in ModeLabel::ALL {
                if cfg.occupation(m) == 0 {
                    prop_assert!(cfg.k_sum(m).is_zero());
                }
            }
        }

        #[test]
        fn overlap_is_conjugate_symmetric(a in arb_state(), b in arb_state()) {
            let ab = a.overlap(&b);
            let ba = b.overlap(&a);
            prop_assert!((ab - ba.conj()).norm() < 1e-14);
        }
    }
}
