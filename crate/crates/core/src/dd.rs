//! Double-double arithmetic (~31 significant digits).
//!
//! MUPO membership intervals shrink like 1/s², so plain `f64` runs out of
//! margin near interval endpoints. Every near-boundary comparison is retried
//! at this precision before anything is classified; see `mupo::enumerate`.

use crate::fmath;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const DD_PI: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = fmath::fma(a, b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let s2 = s2 + self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul_f64(q2));
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        self.mul(Dd::from_f64(x))
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        self.add(Dd::from_f64(x))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on top of the f64 root doubles the precision
        let y = fmath::sqrt(self.hi);
        let yd = Dd::from_f64(y);
        let corr = self.sub(yd.mul(yd)).div(yd.mul_f64(2.0));
        yd.add(corr)
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn is_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }
}

/// Convert an exact rational to double-double (two correctly-rounded limbs).
pub fn dd_from_ratio(r: &Ratio<BigInt>) -> Dd {
    let hi = ratio_to_f64(r);
    if !hi.is_finite() {
        return Dd::from_f64(hi);
    }
    let hi_exact = Ratio::from_float(hi).expect("finite f64");
    let rem = r - hi_exact;
    let lo = ratio_to_f64(&rem);
    Dd { hi, lo }
}

/// `BigRational::to_f64` without going through `f32`; good to 1 ulp for the
/// magnitudes used here.
pub fn ratio_to_f64(r: &Ratio<BigInt>) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let neg = r.numer().is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    // scale so that num/den fits comfortably in f64
    let shift = (num.bits() as i64) - (den.bits() as i64);
    let (num, den, exp) = if shift > 100 {
        (num, den << (shift - 100) as u64, shift - 100)
    } else if shift < -100 {
        (num << ((-shift) - 100) as u64, den, shift + 100)
    } else {
        (num, den, 0)
    };
    let q = num.to_f64().unwrap_or(f64::INFINITY) / den.to_f64().unwrap_or(f64::INFINITY);
    let v = q * fmath::powi(2.0, exp.clamp(-1000, 1000) as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// cos(pi * x) for exact rational `x`, computed in double-double.
pub fn cos_pi_ratio(x: &Ratio<BigInt>) -> Dd {
    // reduce x mod 2 exactly, then fold into [0, 1/4] by symmetry
    let two = Ratio::from_integer(BigInt::from(2));
    let mut y = x.clone();
    y -= (&y / &two).floor() * &two; // y in [0,2)
    let one = Ratio::from_integer(BigInt::from(1));
    let mut sign = 1.0;
    if y > one {
        y = &two - &y; // cos(pi(2-y)) = cos(pi y)
    }
    let half = &one / &two;
    if y > half {
        y = &one - &y;
        sign = -sign; // cos(pi(1-y)) = -cos(pi y)
    }
    let quarter = &half / &two;
    let z = dd_from_ratio(&y);
    let v = if y > quarter {
        // cos(pi y) = sin(pi (1/2 - y))
        sin_pi_taylor(Dd::from_f64(0.5).sub(z))
    } else {
        cos_pi_taylor(z)
    };
    v.mul_f64(sign)
}

/// cos(pi z) by Taylor series, valid for 0 <= z <= 1/4.
pub fn cos_pi_taylor(z: Dd) -> Dd {
    let w = DD_PI.mul(z);
    let w2 = w.mul(w);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for k in 1..=18u64 {
        term = term.mul(w2).div(Dd::from_f64((2 * k * (2 * k - 1)) as f64));
        if k % 2 == 1 {
            sum = sum.sub(term);
        } else {
            sum = sum.add(term);
        }
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    sum
}

/// sin(pi z) by Taylor series, valid for 0 <= z <= 1/4.
pub fn sin_pi_taylor(z: Dd) -> Dd {
    let w = DD_PI.mul(z);
    let w2 = w.mul(w);
    let mut term = w;
    let mut sum = w;
    for k in 1..=18u64 {
        term = term.mul(w2).div(Dd::from_f64((2 * k * (2 * k + 1)) as f64));
        if k % 2 == 1 {
            sum = sum.sub(term);
        } else {
            sum = sum.add(term);
        }
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    sum
}

/// cos(pi * p/q) for machine integers, via the exact-rational path.
pub fn cos_pi_frac(p: u64, q: u64) -> Dd {
    cos_pi_ratio(&Ratio::new(BigInt::from(p), BigInt::from(q)))
}

/// cos(pi x) for a double-double `x` in `[0, 1]` (folded by symmetry).
pub fn cos_pi_dd(x: Dd) -> Dd {
    let mut y = x;
    let mut sign = 1.0;
    if y.hi > 0.5 || (y.hi == 0.5 && y.lo > 0.0) {
        y = Dd::ONE.sub(y);
        sign = -1.0;
    }
    let v = if y.hi > 0.25 {
        sin_pi_taylor(Dd::from_f64(0.5).sub(y))
    } else {
        cos_pi_taylor(y)
    };
    v.mul_f64(sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_roundtrip_arithmetic() {
        let a = Dd::from_f64(1.0).div(Dd::from_f64(3.0));
        let b = a.mul_f64(3.0);
        assert!((b.to_f64() - 1.0).abs() < 1e-30);
        let s = Dd::from_f64(2.0).sqrt();
        assert!((s.mul(s).to_f64() - 2.0).abs() < 1e-30);
    }

    #[test]
    fn cos_pi_matches_known_values() {
        // cos(pi/3) = 1/2 exactly
        let v = cos_pi_frac(1, 3);
        assert!((v.to_f64() - 0.5).abs() < 1e-30);
        // cos(pi/4) = sqrt(2)/2
        let v = cos_pi_frac(1, 4);
        let target = Dd::from_f64(2.0).sqrt().div(Dd::from_f64(2.0));
        assert!(v.sub(target).to_f64().abs() < 1e-30);
        // symmetry fold: cos(3pi/4) = -cos(pi/4)
        let v = cos_pi_frac(3, 4);
        assert!(v.add(target).to_f64().abs() < 1e-30);
    }

    #[test]
    fn ratio_to_f64_large_values() {
        let r = Ratio::new(BigInt::from(1u64) << 200, BigInt::from(3));
        let expect = fmath::powi(2.0, 200) / 3.0;
        assert!((ratio_to_f64(&r) / expect - 1.0).abs() < 1e-15);
    }
}
