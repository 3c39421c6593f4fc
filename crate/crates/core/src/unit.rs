//! Unimodular complex numbers stored as a phase angle.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::ops::{Mul, Neg};

/// Reduce a phase to the canonical range `[0, 2π)`.
///
/// Idempotent: `canon_phase(canon_phase(t)) == canon_phase(t)`.
pub fn canon_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two phases along the circle, in `[0, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A complex number of modulus exactly one, stored as its phase in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitComplex {
    phase: f64,
}

impl UnitComplex {
    pub fn from_phase(phase: f64) -> Self {
        UnitComplex {
            phase: canon_phase(phase),
        }
    }

    /// From a phase expressed in turns (1 turn = 2π radians).
    pub fn from_turns(turns: f64) -> Self {
        Self::from_phase(turns * TAU)
    }

    /// Direction of an arbitrary nonzero complex number; the modulus is discarded.
    pub fn from_complex(z: Complex64) -> Self {
        Self::from_phase(z.arg())
    }

    /// `e^{2πi k/n}`.
    pub fn root_of_unity(k: i64, n: u32) -> Self {
        let n = n as i64;
        Self::from_turns((k.rem_euclid(n)) as f64 / n as f64)
    }

    pub fn one() -> Self {
        UnitComplex { phase: 0.0 }
    }

    pub fn i() -> Self {
        Self::from_turns(0.25)
    }

    pub fn minus_one() -> Self {
        Self::from_turns(0.5)
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn turns(&self) -> f64 {
        self.phase / TAU
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    pub fn conj(&self) -> Self {
        Self::from_phase(-self.phase)
    }

    pub fn powi(&self, k: i64) -> Self {
        Self::from_phase(self.phase * k as f64)
    }

    /// Distance to another unit complex along the circle, in `[0, π]`.
    pub fn circle_distance(&self, other: &Self) -> f64 {
        circle_distance(self.phase, other.phase)
    }
}

impl Mul for UnitComplex {
    type Output = UnitComplex;
    // multiplication of unit values is addition of phases
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> Self {
        Self::from_phase(self.phase + rhs.phase)
    }
}

impl Neg for UnitComplex {
    type Output = UnitComplex;
    fn neg(self) -> Self {
        Self::from_phase(self.phase + 0.5 * TAU)
    }
}

impl From<UnitComplex> for Complex64 {
    fn from(u: UnitComplex) -> Self {
        u.value()
    }
}
