//! Wave vectors and exact wave-vector bookkeeping.
//!
//! Stored excitations carry a spatial phase `exp(i k·r)`. Branch merging needs
//! exact equality of those k-sums, so they are tracked as integer combinations
//! of the four primitive pulse wave vectors and materialized to floating
//! components only when a displacement phase is evaluated.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// A spatial angular frequency in rad/μm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveVector {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector::new(0.0, 0.0, 0.0);

    pub const fn new(kx: f64, ky: f64, kz: f64) -> Self {
        WaveVector { kx, ky, kz }
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        self.kx * v[0] + self.ky * v[1] + self.kz * v[2]
    }

    pub fn norm(&self) -> f64 {
        (self.kx * self.kx + self.ky * self.ky + self.kz * self.kz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.kx.is_finite() && self.ky.is_finite() && self.kz.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.kx, self.ky, self.kz]
    }
}

impl From<[f64; 3]> for WaveVector {
    fn from(v: [f64; 3]) -> Self {
        WaveVector::new(v[0], v[1], v[2])
    }
}

impl Add for WaveVector {
    type Output = WaveVector;
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector::new(self.kx + o.kx, self.ky + o.ky, self.kz + o.kz)
    }
}

impl Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, o: WaveVector) -> WaveVector {
        WaveVector::new(self.kx - o.kx, self.ky - o.ky, self.kz - o.kz)
    }
}

impl Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> WaveVector {
        WaveVector::new(-self.kx, -self.ky, -self.kz)
    }
}

impl Mul<WaveVector> for f64 {
    type Output = WaveVector;
    fn mul(self, k: WaveVector) -> WaveVector {
        WaveVector::new(self * k.kx, self * k.ky, self * k.kz)
    }
}

/// Integer coefficients over the primitive pulse wave vectors, in the order
/// `[k_gr_a, k_ra_sa, k_gr_b, k_rb_sb]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct KCoeffs(pub [i32; 4]);

impl KCoeffs {
    pub const ZERO: KCoeffs = KCoeffs([0; 4]);
    /// One excitation in `r_a`: `k_gr_a`.
    pub const RYDBERG_A: KCoeffs = KCoeffs([1, 0, 0, 0]);
    /// One excitation in `s_a`: `k_gr_a - k_ra_sa`.
    pub const STORED_A: KCoeffs = KCoeffs([1, -1, 0, 0]);
    /// One excitation in `r_b`: `k_gr_b`.
    pub const RYDBERG_B: KCoeffs = KCoeffs([0, 0, 1, 0]);
    /// One excitation in `s_b`: `k_gr_b - k_rb_sb`.
    pub const STORED_B: KCoeffs = KCoeffs([0, 0, 1, -1]);

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn scaled(self, n: i32) -> KCoeffs {
        KCoeffs(self.0.map(|c| c * n))
    }
}

impl Add for KCoeffs {
    type Output = KCoeffs;
    fn add(self, o: KCoeffs) -> KCoeffs {
        let mut out = self.0;
        for (a, b) in out.iter_mut().zip(o.0) {
            *a += b;
        }
        KCoeffs(out)
    }
}

impl AddAssign for KCoeffs {
    fn add_assign(&mut self, o: KCoeffs) {
        *self = *self + o;
    }
}

impl Sub for KCoeffs {
    type Output = KCoeffs;
    fn sub(self, o: KCoeffs) -> KCoeffs {
        self + o.scaled(-1)
    }
}

impl SubAssign for KCoeffs {
    fn sub_assign(&mut self, o: KCoeffs) {
        *self = *self - o;
    }
}

/// Numeric values of the four pulse wave vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseWaveVectors {
    pub gr_a: WaveVector,
    pub ra_sa: WaveVector,
    pub gr_b: WaveVector,
    pub rb_sb: WaveVector,
}

impl PulseWaveVectors {
    pub fn new(gr_a: WaveVector, ra_sa: WaveVector, gr_b: WaveVector, rb_sb: WaveVector) -> Self {
        PulseWaveVectors {
            gr_a,
            ra_sa,
            gr_b,
            rb_sb,
        }
    }

    /// Counter-propagating a/b modes along x with |Δk| ≈ 31.8 rad/μm.
    pub fn counter_propagating() -> Self {
        PulseWaveVectors::new(
            WaveVector::new(8.0, 0.0, 0.0),
            WaveVector::new(-7.9, 0.0, 0.0),
            WaveVector::new(-8.0, 0.0, 0.0),
            WaveVector::new(7.9, 0.0, 0.0),
        )
    }

    pub fn materialize(&self, k: KCoeffs) -> WaveVector {
        let [a, b, c, d] = k.0.map(f64::from);
        a * self.gr_a + b * self.ra_sa + c * self.gr_b + d * self.rb_sb
    }

    /// Wave vector of a stored `s_a` excitation, `k_gr_a - k_ra_sa`.
    pub fn stored_a(&self) -> WaveVector {
        self.materialize(KCoeffs::STORED_A)
    }

    /// Wave vector of a stored `s_b` excitation, `k_gr_b - k_rb_sb`.
    pub fn stored_b(&self) -> WaveVector {
        self.materialize(KCoeffs::STORED_B)
    }

    /// Interferometric wave vector: the difference between the per-excitation
    /// phases accumulated by the two NOON arms under a common displacement.
    pub fn delta_k(&self) -> WaveVector {
        self.stored_a() - self.stored_b()
    }

    pub fn is_finite(&self) -> bool {
        [self.gr_a, self.ra_sa, self.gr_b, self.rb_sb]
            .iter()
            .all(WaveVector::is_finite)
    }
}

impl Default for PulseWaveVectors {
    fn default() -> Self {
        PulseWaveVectors::counter_propagating()
    }
}
