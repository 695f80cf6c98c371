//! Experimental feasibility: van der Waals blockade shift, ensemble size,
//! and the resulting interferometer budget.

use std::f64::consts::PI;

use crate::blockade::{decay_rate_from_lifetime, mhz_to_angular};
use crate::budget::{success_probability, ErrorBudget, RabiBrackets};
use crate::error::{invalid, Result};

/// Bohr radius in metres (CODATA 2018).
pub const BOHR_RADIUS_M: f64 = 5.29177210903e-11;
/// Hartree energy over h, in MHz (CODATA 2018).
pub const HARTREE_MHZ: f64 = 6.579683920502e9;

/// Range of principal quantum numbers over which the shift fit is trusted.
pub const PRINCIPAL_N_RANGE: (u32, u32) = (30, 150);

pub fn um_to_bohr(um: f64) -> f64 {
    um * 1e-6 / BOHR_RADIUS_M
}

pub fn bohr_to_um(bohr: f64) -> f64 {
    bohr * BOHR_RADIUS_M * 1e6
}

pub fn hartree_to_mhz(e: f64) -> f64 {
    e * HARTREE_MHZ
}

pub fn mhz_to_hartree(mhz: f64) -> f64 {
    mhz / HARTREE_MHZ
}

/// Polynomial coefficients of the `n¹¹(c0 + c1 n + c2 n²)` shift fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdwCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl VdwCoefficients {
    /// Rubidium.
    pub const RUBIDIUM: VdwCoefficients = VdwCoefficients {
        c0: 13.0,
        c1: -0.85,
        c2: 0.0034,
    };

    pub fn polynomial(&self, n: u32) -> f64 {
        let n = f64::from(n);
        self.c0 + self.c1 * n + self.c2 * n * n
    }
}

impl Default for VdwCoefficients {
    fn default() -> Self {
        Self::RUBIDIUM
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyShift {
    /// |Δe| in MHz.
    pub magnitude_mhz: f64,
    /// +1 for a repulsive shift, −1 for attractive, 0 when the fit vanishes.
    pub sign: i8,
    /// Whether `n` lies inside [`PRINCIPAL_N_RANGE`].
    pub in_range: bool,
}

impl EnergyShift {
    pub fn signed_mhz(&self) -> f64 {
        f64::from(self.sign) * self.magnitude_mhz
    }
}

/// Pair shift `Δe = −n¹¹(c0 + c1 n + c2 n²)/r⁶` in atomic units, `r` in μm.
pub fn energy_shift_with(coeffs: &VdwCoefficients, n: u32, r_um: f64) -> Result<EnergyShift> {
    if !(r_um > 0.0) || !r_um.is_finite() {
        return Err(invalid("r", format!("{r_um} μm must be positive")));
    }
    let r = um_to_bohr(r_um);
    let au = -f64::from(n).powi(11) * coeffs.polynomial(n) / r.powi(6);
    let mhz = hartree_to_mhz(au);
    Ok(EnergyShift {
        magnitude_mhz: mhz.abs(),
        sign: if mhz > 0.0 {
            1
        } else if mhz < 0.0 {
            -1
        } else {
            0
        },
        in_range: (PRINCIPAL_N_RANGE.0..=PRINCIPAL_N_RANGE.1).contains(&n),
    })
}

/// [`energy_shift_with`] using the rubidium coefficients.
pub fn energy_shift(n: u32, r_um: f64) -> Result<EnergyShift> {
    energy_shift_with(&VdwCoefficients::RUBIDIUM, n, r_um)
}

/// Shift of the farthest pair in an ensemble of radius `radius_um`.
pub fn min_pair_shift(n: u32, radius_um: f64) -> Result<EnergyShift> {
    if !(radius_um > 0.0) {
        return Err(invalid("radius", format!("{radius_um} μm must be positive")));
    }
    energy_shift(n, 2.0 * radius_um)
}

/// Atoms in a uniform sphere: density in cm⁻³, radius in μm.
pub fn atom_number(density_cm3: f64, radius_um: f64) -> f64 {
    // 1 μm³ = 1e-12 cm³
    density_cm3 * 4.0 / 3.0 * PI * radius_um.powi(3) * 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub radius_um: f64,
    pub density_cm3: f64,
    pub principal_n: u32,
}

impl EnsembleSpec {
    pub fn new(radius_um: f64, density_cm3: f64, principal_n: u32) -> Result<Self> {
        if !(radius_um > 0.0) || !radius_um.is_finite() {
            return Err(invalid("radius", format!("{radius_um} μm must be positive")));
        }
        if !(density_cm3 > 0.0) || !density_cm3.is_finite() {
            return Err(invalid("density", format!("{density_cm3} cm⁻³ must be positive")));
        }
        let (lo, hi) = PRINCIPAL_N_RANGE;
        if !(lo..=hi).contains(&principal_n) {
            return Err(invalid("n", format!("{principal_n} is outside [{lo}, {hi}]")));
        }
        Ok(EnsembleSpec {
            radius_um,
            density_cm3,
            principal_n,
        })
    }

    /// n = 100 rubidium, R = 3.8 μm, 1.7×10¹² cm⁻³.
    pub fn reference() -> Self {
        EnsembleSpec {
            radius_um: 3.8,
            density_cm3: 1.7e12,
            principal_n: 100,
        }
    }

    pub fn atom_number(&self) -> f64 {
        atom_number(self.density_cm3, self.radius_um)
    }

    pub fn min_pair_shift(&self) -> Result<EnergyShift> {
        min_pair_shift(self.principal_n, self.radius_um)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityTargets {
    pub shift_mhz: f64,
    /// Relative shortfall of the shift still accepted.
    pub shift_tolerance: f64,
    /// Upper bound on E(ℓ).
    pub protocol_error: f64,
    pub order: u32,
    pub lifetime_us: f64,
}

impl Default for FeasibilityTargets {
    fn default() -> Self {
        FeasibilityTargets {
            shift_mhz: 300.0,
            shift_tolerance: 0.1,
            protocol_error: 0.03,
            order: 20,
            lifetime_us: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub spec: EnsembleSpec,
    pub targets: FeasibilityTargets,
    pub shift: EnergyShift,
    pub atom_number: f64,
    /// Budget evaluated at the ensemble's own shift and atom number.
    pub budget: ErrorBudget,
    /// `shift − (1 − tolerance)·target`, MHz.
    pub shift_margin_mhz: f64,
    /// `target − E(ℓ)`.
    pub error_margin: f64,
    pub shift_ok: bool,
    pub error_ok: bool,
}

impl FeasibilityReport {
    pub fn pass(&self) -> bool {
        self.shift_ok && self.error_ok
    }
}

pub fn feasibility_report(spec: &EnsembleSpec, targets: &FeasibilityTargets) -> Result<FeasibilityReport> {
    let spec = EnsembleSpec::new(spec.radius_um, spec.density_cm3, spec.principal_n)?;
    if !(targets.shift_mhz > 0.0) || !(0.0..1.0).contains(&targets.shift_tolerance) {
        return Err(invalid("targets", "shift must be positive and tolerance in [0, 1)"));
    }
    if !(targets.lifetime_us > 0.0) {
        return Err(invalid("lifetime", format!("{} μs must be positive", targets.lifetime_us)));
    }
    let shift = spec.min_pair_shift()?;
    if shift.sign <= 0 {
        return Err(invalid("shift", "the fit gives a non-repulsive shift for this n"));
    }
    let n_atoms = spec.atom_number();
    let budget = success_probability(
        targets.order,
        n_atoms,
        mhz_to_angular(shift.magnitude_mhz),
        decay_rate_from_lifetime(targets.lifetime_us),
        &RabiBrackets::default(),
    )?;
    let shift_margin_mhz = shift.magnitude_mhz - (1.0 - targets.shift_tolerance) * targets.shift_mhz;
    let error_margin = targets.protocol_error - budget.e_protocol;
    Ok(FeasibilityReport {
        spec,
        targets: *targets,
        shift,
        atom_number: n_atoms,
        budget,
        shift_margin_mhz,
        error_margin,
        shift_ok: shift_margin_mhz >= 0.0,
        error_ok: error_margin >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polynomial_at_100() {
        assert!((VdwCoefficients::default().polynomial(100) + 38.0).abs() < 1e-12);
    }

    #[test]
    fn reference_geometry() {
        // independent arithmetic: 3.8e23 Hartree·Bohr⁶ over (7.6 μm in Bohr)⁶
        let r_bohr: f64 = 7.6e-6 / 5.29177210903e-11;
        let want = 38.0e22 / r_bohr.powi(6) * 6.579683920502e9;
        let s = energy_shift(100, 7.6).unwrap();
        assert!((s.magnitude_mhz - want).abs() < 1e-9 * want);
        assert_eq!(s.sign, 1);
        assert!(s.in_range);
        assert!((s.magnitude_mhz - 285.0).abs() < 2.0, "{}", s.magnitude_mhz);
        assert_eq!(min_pair_shift(100, 3.8).unwrap(), s);
        assert!((atom_number(1.7e12, 3.8) - 390.74).abs() < 0.01);
    }

    #[test]
    fn scaling_laws() {
        let a = energy_shift(100, 5.0).unwrap().magnitude_mhz;
        let b = energy_shift(100, 10.0).unwrap().magnitude_mhz;
        assert!((a / b - 64.0).abs() < 1e-9);
        let r = min_pair_shift(90, 1.9).unwrap().magnitude_mhz / min_pair_shift(90, 3.8).unwrap().magnitude_mhz;
        assert!((r - 64.0).abs() < 1e-9);
        assert_eq!(atom_number(1e12, 0.0), 0.0);
        assert!((atom_number(2e12, 3.0) - 2.0 * atom_number(1e12, 3.0)).abs() < 1e-12);
    }

    #[test]
    fn range_and_errors() {
        assert!(!energy_shift(20, 5.0).unwrap().in_range);
        assert!(energy_shift(100, 0.0).is_err());
        assert!(energy_shift(100, -1.0).is_err());
        assert!(EnsembleSpec::new(3.8, 1.7e12, 200).is_err());
        assert!(EnsembleSpec::new(0.0, 1.7e12, 100).is_err());
        assert!(EnsembleSpec::new(3.8, 0.0, 100).is_err());
    }

    #[test]
    fn large_ensemble_misses_shift_target() {
        let spec = EnsembleSpec::new(10.0, 1.7e12, 100).unwrap();
        let shift = spec.min_pair_shift().unwrap().magnitude_mhz;
        assert!(shift < 0.9 * 300.0, "{shift}");
    }

    #[test]
    fn single_order_generous_targets_pass() {
        let targets = FeasibilityTargets {
            protocol_error: 0.5,
            order: 1,
            ..Default::default()
        };
        let r = feasibility_report(&EnsembleSpec::reference(), &targets).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    proptest! {
        #[test]
        fn unit_round_trips(x in 1e-6f64..1e6) {
            prop_assert!((mhz_to_hartree(hartree_to_mhz(x)) - x).abs() <= 1e-12 * x);
            prop_assert!((bohr_to_um(um_to_bohr(x)) - x).abs() <= 1e-12 * x);
        }

        #[test]
        fn shift_decreases_with_distance(r in 1.0f64..20.0, dr in 1e-3f64..5.0) {
            let near = energy_shift(100, r).unwrap().magnitude_mhz;
            let far = energy_shift(100, r + dr).unwrap().magnitude_mhz;
            prop_assert!(far < near);
        }

        #[test]
        fn shift_increases_with_n(n in 80u32..120, r in 2.0f64..15.0) {
            prop_assert!(energy_shift(n + 1, r).unwrap().magnitude_mhz > energy_shift(n, r).unwrap().magnitude_mhz);
        }

        #[test]
        fn atom_number_is_cubic(d in 1e10f64..1e14, r in 0.1f64..20.0, s in 0.1f64..10.0) {
            let base = atom_number(d, r);
            prop_assert!((atom_number(d, s * r) - s.powi(3) * base).abs() <= 1e-12 * s.powi(3) * base);
            prop_assert!((atom_number(s * d, r) - s * base).abs() <= 1e-12 * s * base);
        }
    }
}
