//! Log-polar complex numbers for quantities whose modulus outruns `f64`.
//!
//! A [`LogComplex`] stores the natural log of the modulus plus an argument
//! in `(−π, π]`. Iterating `z ↦ exp(Q(z))` produces moduli like
//! `exp(exp(9786))` within three steps; this representation keeps such
//! orbits computable until the *log* of the modulus itself leaves the
//! representable range, at which point the value is marked saturated.

use std::f64::consts::PI;

use thiserror::Error;

pub use num_complex::Complex64;

/// Saturation threshold for `log_mod`. One further iterate of a degree-d
/// map from here would need `log_mod ≈ exp(d·1e6)`, beyond any float, so
/// orbits are certified escaping once they saturate.
pub const L_SAT: f64 = 1e6;

/// Additive dominance cutoff in nats: `e^{-40} ≈ 4e-18` is below the
/// relative resolution of an `f64` mantissa.
pub const DOMINANCE_CUTOFF: f64 = 40.0;

/// Largest `log_mod` for which a value can be materialized as an ordinary
/// complex number inside `exp` (`e^700` is still finite in `f64`).
pub const EXP_ARG_LIMIT: f64 = 700.0;

/// Tie tolerance on `cos(arg)` when deciding the growth direction of
/// `exp(w)` for unrepresentably large `w`.
pub const DIRECTION_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NumericError {
    /// The argument of a huge exponent is unknown or too close to a channel
    /// centerline to decide between overflow and collapse to zero.
    #[error("growth direction of exp(w) undecidable")]
    DirectionUndecidable,
    /// The argument of the operand is required but invalid.
    #[error("argument of log-polar value is invalid")]
    ArgInvalid,
}

/// Complex number in log-polar form.
///
/// Invariants: `arg ∈ (−π, π]` whenever `arg_valid`; `log_mod = −∞` encodes
/// zero (with `arg_valid = false`); `saturated` implies `log_mod ≥ L_SAT`
/// and `arg_valid = false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_mod: f64,
    pub arg: f64,
    pub arg_valid: bool,
    pub saturated: bool,
}

/// Reduce an angle to the half-open interval `(−π, π]`.
pub fn normalize_arg(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    let mut r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mod: f64::NEG_INFINITY,
        arg: 0.0,
        arg_valid: false,
        saturated: false,
    };

    pub const ONE: LogComplex = LogComplex {
        log_mod: 0.0,
        arg: 0.0,
        arg_valid: true,
        saturated: false,
    };

    pub fn new(log_mod: f64, arg: f64) -> Self {
        if log_mod == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_mod,
            arg: normalize_arg(arg),
            arg_valid: true,
            saturated: false,
        }
    }

    fn saturated_at(log_mod: f64) -> Self {
        LogComplex {
            log_mod,
            arg: 0.0,
            arg_valid: false,
            saturated: true,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        debug_assert!(z.re.is_finite() && z.im.is_finite(), "non-finite complex");
        let m = z.re.hypot(z.im);
        if m == 0.0 {
            return Self::ZERO;
        }
        let mut arg = z.im.atan2(z.re);
        if arg <= -PI {
            arg = PI;
        }
        LogComplex {
            log_mod: m.ln(),
            arg,
            arg_valid: true,
            saturated: false,
        }
    }

    /// Back to an ordinary complex number, if representable. `None` when the
    /// modulus over- or underflows the conversion or the argument is invalid.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if !self.arg_valid || self.saturated || self.log_mod > 709.0 {
            return None;
        }
        let m = self.log_mod.exp();
        Some(Complex64::from_polar(m, self.arg))
    }

    pub fn is_zero(&self) -> bool {
        self.log_mod == f64::NEG_INFINITY
    }

    /// Product. Zero absorbs everything (including saturated operands);
    /// otherwise saturation propagates and invalidates the argument.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        let saturated = self.saturated || other.saturated;
        let arg_valid = self.arg_valid && other.arg_valid && !saturated;
        LogComplex {
            log_mod: self.log_mod + other.log_mod,
            arg: if arg_valid {
                normalize_arg(self.arg + other.arg)
            } else {
                0.0
            },
            arg_valid,
            saturated,
        }
    }

    /// Quotient. Division by zero yields a saturated infinity.
    pub fn div(&self, other: &Self) -> Self {
        if other.is_zero() {
            return Self::saturated_at(f64::INFINITY);
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        let saturated = self.saturated || other.saturated;
        let arg_valid = self.arg_valid && other.arg_valid && !saturated;
        LogComplex {
            log_mod: self.log_mod - other.log_mod,
            arg: if arg_valid {
                normalize_arg(self.arg - other.arg)
            } else {
                0.0
            },
            arg_valid,
            saturated,
        }
    }

    /// Sum. When the moduli differ by more than [`DOMINANCE_CUTOFF`] nats the
    /// larger operand is returned unchanged; exact cancellation gives zero.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.log_mod >= other.log_mod {
            (self, other)
        } else {
            (other, self)
        };
        if hi.saturated || lo.saturated || hi.log_mod - lo.log_mod > DOMINANCE_CUTOFF {
            return *hi;
        }
        if !hi.arg_valid || !lo.arg_valid {
            // Cannot form the phase of the sum; the dominant term wins but
            // its phase is no longer trustworthy.
            return LogComplex {
                log_mod: hi.log_mod,
                arg: 0.0,
                arg_valid: false,
                saturated: false,
            };
        }
        let scale = hi.log_mod;
        let a = Complex64::from_polar((self.log_mod - scale).exp(), self.arg);
        let b = Complex64::from_polar((other.log_mod - scale).exp(), other.arg);
        let s = a + b;
        let m = s.re.hypot(s.im);
        // Below a few ulps of the rescaled operands the phase of the sum is
        // pure rounding noise; that is cancellation to zero.
        if m <= 4.0 * f64::EPSILON {
            return Self::ZERO;
        }
        let mut arg = s.im.atan2(s.re);
        if arg <= -PI {
            arg = PI;
        }
        LogComplex {
            log_mod: scale + m.ln(),
            arg,
            arg_valid: true,
            saturated: false,
        }
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() || !self.arg_valid {
            return *self;
        }
        LogComplex {
            arg: normalize_arg(self.arg + PI),
            ..*self
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Integer power (used for dominant-term polynomial evaluation).
    pub fn powi(&self, n: u32) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        let saturated = self.saturated;
        let arg_valid = self.arg_valid && !saturated;
        LogComplex {
            log_mod: self.log_mod * n as f64,
            arg: if arg_valid {
                normalize_arg(self.arg * n as f64)
            } else {
                0.0
            },
            arg_valid,
            saturated,
        }
    }
}

/// `exp(w)` in log-polar form.
///
/// For representable `w` the result has `log_mod = Re w` and `arg = Im w`
/// reduced mod 2π; the result saturates when `Re w ≥ L_SAT`. For
/// unrepresentably large `w` only the sign of `cos(arg w)` decides between
/// saturation and collapse to zero; a tie is an error.
pub fn lc_exp(w: &LogComplex) -> Result<LogComplex, NumericError> {
    if w.is_zero() {
        return Ok(LogComplex::ONE);
    }
    if !w.arg_valid {
        return Err(NumericError::DirectionUndecidable);
    }
    if w.log_mod <= EXP_ARG_LIMIT {
        let m = w.log_mod.exp();
        let re = m * w.arg.cos();
        let im = m * w.arg.sin();
        if re >= L_SAT {
            return Ok(LogComplex::saturated_at(re));
        }
        Ok(LogComplex {
            log_mod: re,
            arg: normalize_arg(im),
            arg_valid: true,
            saturated: false,
        })
    } else {
        let c = w.arg.cos();
        if c.abs() < DIRECTION_TIE_TOL {
            return Err(NumericError::DirectionUndecidable);
        }
        if c > 0.0 {
            Ok(LogComplex::saturated_at(f64::INFINITY))
        } else {
            Ok(LogComplex::ZERO)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lc(m: f64, a: f64) -> LogComplex {
        LogComplex::new(m, a)
    }

    #[test]
    fn mul_identity_and_angle_wrap() {
        let id = lc(0.0, 0.0);
        assert_eq!(id.mul(&id), id);
        let a = lc(1.0, PI / 2.0);
        let b = lc(2.0, PI);
        let p = a.mul(&b);
        assert_relative_eq!(p.log_mod, 3.0);
        assert_relative_eq!(p.arg, -PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mul_matches_direct_complex_product() {
        let a = Complex64::new(3.0, 4.0);
        let b = Complex64::new(1.0, -2.0);
        let p = LogComplex::from_complex(a)
            .mul(&LogComplex::from_complex(b))
            .to_complex()
            .unwrap();
        let d = a * b;
        assert_relative_eq!(p.re, d.re, max_relative = 1e-14);
        assert_relative_eq!(p.im, d.im, max_relative = 1e-14);
    }

    #[test]
    fn add_identity_cancellation_and_dominance() {
        let a = LogComplex::from_complex(Complex64::new(2.5, -1.0));
        assert_eq!(a.add(&LogComplex::ZERO), a);

        let one = LogComplex::from_complex(Complex64::new(1.0, 0.0));
        let neg = LogComplex::from_complex(Complex64::new(-1.0, 0.0));
        assert!(one.add(&neg).is_zero());

        let big = lc(100.0, 0.0);
        let small = lc(10.0, 0.0);
        assert_eq!(big.add(&small), big);
    }

    #[test]
    fn exp_trivial_values() {
        let e0 = lc_exp(&LogComplex::ZERO).unwrap();
        assert_eq!(e0, LogComplex::ONE);

        let ipi = LogComplex::from_complex(Complex64::new(0.0, PI));
        let m1 = lc_exp(&ipi).unwrap();
        assert_relative_eq!(m1.log_mod, 0.0, epsilon = 1e-15);
        assert_relative_eq!(m1.arg, PI, epsilon = 1e-12);
    }

    #[test]
    fn exp_of_real_orbit_step() {
        // Step 2 of the cubic-exponential orbit of 0: exp at a real point.
        let w = LogComplex::from_complex(Complex64::new(3.0610711618329631, 0.0));
        let r = lc_exp(&w).unwrap();
        assert_relative_eq!(r.log_mod, 3.0610711618329631, epsilon = 1e-14);
        assert_eq!(r.arg, 0.0);
        assert_relative_eq!(r.log_mod.exp(), 21.350414667107188, max_relative = 1e-12);
    }

    #[test]
    fn exp_saturates_and_collapses_by_direction() {
        let grow = lc(800.0, 0.0);
        let r = lc_exp(&grow).unwrap();
        assert!(r.saturated && r.log_mod.is_infinite());
        assert!(!r.arg_valid);

        let shrink = lc(800.0, PI);
        assert!(lc_exp(&shrink).unwrap().is_zero());

        let tie = lc(800.0, PI / 2.0);
        assert_eq!(lc_exp(&tie), Err(NumericError::DirectionUndecidable));
    }

    #[test]
    fn exp_saturation_keeps_finite_log_mod_when_representable() {
        // Re w = 3.8e6 exceeds L_SAT but is a perfectly good f64, so the
        // saturated result still records log_mod = Re w.
        let w = LogComplex::from_complex(Complex64::new(3.8e6, 1.0));
        let r = lc_exp(&w).unwrap();
        assert!(r.saturated);
        assert_relative_eq!(r.log_mod, 3.8e6, max_relative = 1e-12);
        assert!(!r.arg_valid);
    }

    #[test]
    fn exp_functional_equation() {
        // exp(w1 + w2) = exp(w1)·exp(w2) for moderate w.
        let w1 = Complex64::new(3.0, 1.2);
        let w2 = Complex64::new(-1.5, 2.9);
        let lhs = lc_exp(&LogComplex::from_complex(w1 + w2)).unwrap();
        let rhs = lc_exp(&LogComplex::from_complex(w1))
            .unwrap()
            .mul(&lc_exp(&LogComplex::from_complex(w2)).unwrap());
        assert_relative_eq!(lhs.log_mod, rhs.log_mod, epsilon = 1e-12);
        assert_relative_eq!(lhs.arg, rhs.arg, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn roundtrip_central_range(m in -69.0f64..69.0, a in -3.1f64..3.1) {
            let w = Complex64::from_polar(m.exp(), a);
            let z = LogComplex::from_complex(w).to_complex().unwrap();
            prop_assert!((z - w).norm() <= 1e-14 * w.norm());
        }

        // At |w| = 1e±300 the stored log has absolute resolution ~5.7e-14
        // (half an ulp of ~691), which bounds the achievable round-trip.
        #[test]
        fn roundtrip_full_range(m in -690.0f64..690.0, a in -3.1f64..3.1) {
            let w = Complex64::from_polar(m.exp(), a);
            let z = LogComplex::from_complex(w).to_complex().unwrap();
            prop_assert!((z - w).norm() <= 1.2e-13 * w.norm());
        }

        #[test]
        fn mul_commutative_associative(
            m1 in -50.0f64..50.0, a1 in -3.1f64..3.1,
            m2 in -50.0f64..50.0, a2 in -3.1f64..3.1,
            m3 in -50.0f64..50.0, a3 in -3.1f64..3.1,
        ) {
            let (x, y, z) = (lc(m1, a1), lc(m2, a2), lc(m3, a3));
            let xy = x.mul(&y);
            let yx = y.mul(&x);
            prop_assert!((xy.log_mod - yx.log_mod).abs() <= 1e-13 * (1.0 + xy.log_mod.abs()));
            prop_assert!((normalize_arg(xy.arg - yx.arg)).abs() <= 1e-13);
            let l = x.mul(&y).mul(&z);
            let r = x.mul(&y.mul(&z));
            prop_assert!((l.log_mod - r.log_mod).abs() <= 1e-13 * (1.0 + l.log_mod.abs()));
            prop_assert!((normalize_arg(l.arg - r.arg)).abs() <= 1e-13);
        }

        #[test]
        fn arg_always_normalized(m in -100.0f64..100.0, a in -50.0f64..50.0) {
            let v = lc(m, a);
            prop_assert!(v.arg > -PI && v.arg <= PI);
        }
    }
}
