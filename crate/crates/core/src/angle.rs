//! Real numbers modulo 1 in 128-bit fixed point.
//!
//! An [`Angle`] stores `value / 2^128`. Addition and multiplication by an
//! integer wrap modulo `2^128`, which is exactly arithmetic modulo 1 at
//! `2^-128` granularity: no rounding ever happens once an angle exists.

use core::fmt;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TWO_POW_M128: f64 = 1.0 / 340_282_366_920_938_463_463_374_607_431_768_211_456.0;
const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Angle(pub u128);

impl Angle {
    pub const ZERO: Angle = Angle(0);
    pub const HALF: Angle = Angle(1 << 127);

    /// `num / den mod 1`, rounded to the nearest multiple of `2^-128`
    /// (ties to even).
    pub fn from_ratio(num: i128, den: u128) -> Result<Angle> {
        if den == 0 {
            return Err(Error::config("zero denominator"));
        }
        let r = if num >= 0 {
            (num as u128) % den
        } else {
            let m = num.unsigned_abs() % den;
            if m == 0 {
                0
            } else {
                den - m
            }
        };
        let (q, rem) = div_shifted(r, den);
        Ok(Angle(round_quotient(q, rem, den)))
    }

    /// The fractional part of `x`, exactly (every finite double has an exact
    /// fixed point representation of its fractional part).
    pub fn from_f64(x: f64) -> Angle {
        if !x.is_finite() {
            return Angle::ZERO;
        }
        if x < 0.0 {
            return -Angle::from_f64(-x);
        }
        let frac = x - libm::floor(x);
        Angle((frac * TWO_POW_128) as u128)
    }

    /// Value in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 * TWO_POW_M128
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn to_signed_f64(self) -> f64 {
        (self.0 as i128) as f64 * TWO_POW_M128
    }

    /// `‖x‖` in units of `2^-128`; at most `2^127`.
    pub fn norm_bits(self) -> u128 {
        self.0.min(self.0.wrapping_neg())
    }

    /// Distance to the nearest integer, `‖x‖ ∈ [0, 1/2]`.
    pub fn norm(self) -> f64 {
        self.norm_bits() as f64 * TWO_POW_M128
    }

    pub fn mul_int(self, m: u128) -> Angle {
        Angle(self.0.wrapping_mul(m))
    }

    pub fn mul_i128(self, m: i128) -> Angle {
        Angle(self.0.wrapping_mul(m as u128))
    }

    /// `m * x = integer + fraction` with the integer part returned separately.
    pub fn mul_wide(self, m: u64) -> (u64, Angle) {
        let a0 = self.0 as u64 as u128;
        let a1 = self.0 >> 64;
        let p0 = a0 * m as u128;
        let p1 = a1 * m as u128;
        let (lo, carry) = (p1 << 64).overflowing_add(p0);
        ((p1 >> 64) as u64 + carry as u64, Angle(lo))
    }

    /// `e(x) = exp(2πix)`. Uses the signed representative so that
    /// `(-x).e()` is bit-for-bit the conjugate of `x.e()`.
    pub fn e(self) -> Complex64 {
        let x = (self.0 as i128) as f64 * TWO_POW_M128;
        let (s, c) = libm::sincos(core::f64::consts::TAU * x);
        Complex64::new(c, s)
    }

    pub fn to_hex(self) -> alloc::string::String {
        alloc::format!("{:032x}", self.0)
    }

    pub fn from_hex(s: &str) -> Result<Angle> {
        let s = s.trim().trim_start_matches("0x");
        if s.is_empty() || s.len() > 32 {
            return Err(Error::config(alloc::format!("bad angle hex '{s}'")));
        }
        u128::from_str_radix(s, 16)
            .map(Angle)
            .map_err(|_| Error::config(alloc::format!("bad angle hex '{s}'")))
    }

    /// Parses `a/q`, a decimal literal (`-0.25`, `3.1415`, `1e-10`), or
    /// 32 hex digits with an optional `0x` prefix.
    pub fn parse(s: &str) -> Result<Angle> {
        let s = s.trim();
        let bad = || Error::config(alloc::format!("cannot parse angle '{s}'"));
        if let Some(hex) = s.strip_prefix("0x") {
            return Angle::from_hex(hex);
        }
        if s.len() == 32 && s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Angle::from_hex(s);
        }
        if let Some((a, q)) = s.split_once('/') {
            let a: i128 = a.trim().parse().map_err(|_| bad())?;
            let q: u128 = q.trim().parse().map_err(|_| bad())?;
            return Angle::from_ratio(a, q);
        }
        if s.contains(['e', 'E']) {
            let x: f64 = s.parse().map_err(|_| bad())?;
            return Ok(Angle::from_f64(x));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        // the integer part vanishes mod 1; 38 fractional digits exceed 2^-126
        let frac = &frac[..frac.len().min(38)];
        let num: u128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let den = 10u128.pow(frac.len() as u32);
        let a = Angle::from_ratio(num as i128, den)?;
        Ok(if neg { -a } else { a })
    }
}

/// `(r * 2^128) / den` with remainder, for `r < den`.
fn div_shifted(r: u128, den: u128) -> (u128, u128) {
    let mut rem = r;
    let mut q = 0u128;
    for _ in 0..128 {
        let carry = rem >> 127;
        rem <<= 1;
        q <<= 1;
        if carry == 1 || rem >= den {
            rem = rem.wrapping_sub(den);
            q |= 1;
        }
    }
    (q, rem)
}

fn round_quotient(q: u128, rem: u128, den: u128) -> u128 {
    // compare 2*rem with den without overflow
    let twice_ge = rem >> 127 == 1 || (rem << 1) > den;
    let tie = rem >> 127 == 0 && (rem << 1) == den;
    if twice_ge || (tie && q & 1 == 1) {
        q.wrapping_add(1)
    } else {
        q
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle(self.0.wrapping_neg())
    }
}

impl AddAssign for Angle {
    fn add_assign(&mut self, rhs: Angle) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl SubAssign for Angle {
    fn sub_assign(&mut self, rhs: Angle) {
        self.0 = self.0.wrapping_sub(rhs.0);
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({:032x} ≈ {})", self.0, self.to_f64())
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl FromStr for Angle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Angle> {
        Angle::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ratio_rounding() {
        assert_eq!(Angle::from_ratio(1, 2).unwrap(), Angle::HALF);
        assert_eq!(Angle::from_ratio(-1, 2).unwrap(), Angle::HALF);
        assert_eq!(Angle::from_ratio(3, 4).unwrap(), Angle(3 << 126));
        assert_eq!(Angle::from_ratio(5, 1).unwrap(), Angle::ZERO);
        // 2^128 = 3 * floor(2^128/3) + 1, so 1/3 rounds down
        assert_eq!(Angle::from_ratio(1, 3).unwrap().0, u128::MAX / 3);
        // 2/3 = (2^129)/3 / 2^128; 2^129 mod 3 = 2 so it rounds up
        assert_eq!(Angle::from_ratio(2, 3).unwrap().0, u128::MAX / 3 * 2 + 1);
        assert!(Angle::from_ratio(1, 0).is_err());
        // huge denominators take the carry path
        let big = u128::MAX - 5;
        let a = Angle::from_ratio((big / 2) as i128, big).unwrap();
        assert!(a.to_f64() > 0.4999 && a.to_f64() <= 0.5);
    }

    #[test]
    fn parsing() {
        assert_eq!(Angle::parse("1/4").unwrap(), Angle(1 << 126));
        assert_eq!(Angle::parse("-1/4").unwrap(), Angle(3 << 126));
        assert_eq!(Angle::parse("0.25").unwrap(), Angle(1 << 126));
        assert_eq!(Angle::parse("7.75").unwrap(), Angle(3 << 126));
        assert_eq!(Angle::parse("-0.25").unwrap(), Angle(3 << 126));
        assert!((Angle::parse("1e-10").unwrap().to_f64() - 1e-10).abs() < 1e-25);
        let a = Angle::parse("0.618034").unwrap();
        assert!((a.to_f64() - 0.618034).abs() < 1e-16);
        assert!(Angle::parse(&a.to_hex()).is_ok());
        assert_eq!(Angle::parse(&alloc::format!("0x{}", a.to_hex())).unwrap(), a);
        assert!(Angle::parse("abc").is_err());
        assert!(Angle::parse("1/x").is_err());
        assert!(Angle::parse(".").is_err());
    }

    #[test]
    fn norm_and_wide_product() {
        assert_eq!(Angle::HALF.norm(), 0.5);
        assert_eq!(Angle::ZERO.norm(), 0.0);
        let a = Angle::parse("0.3333340").unwrap();
        assert!((a.mul_int(3).norm() - 2e-6).abs() < 1e-15);
        let (i, f) = Angle::parse("0.75").unwrap().mul_wide(7);
        assert_eq!(i, 5);
        assert_eq!(f, Angle(1 << 126));
        let (i, f) = Angle(u128::MAX).mul_wide(u64::MAX);
        assert_eq!(i, u64::MAX - 1);
        assert_eq!(f, Angle(u128::MAX.wrapping_mul(u64::MAX as u128)));
    }

    #[test]
    fn exponential_values() {
        let z = Angle::parse("1/4").unwrap().e();
        assert!(z.re.abs() < 1e-16 && (z.im - 1.0).abs() < 1e-16);
        let z = Angle::HALF.e();
        assert_eq!(z.re, -1.0);
        assert!(z.im.abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn wrapping_arithmetic_is_exact(x: u128, y: u128, z: u128, m in 0u32..2000) {
            let (x, y, z) = (Angle(x), Angle(y), Angle(z));
            prop_assert_eq!((x + y) + z, x + (y + z));
            let mut acc = Angle::ZERO;
            for _ in 0..m { acc += x; }
            prop_assert_eq!(acc, x.mul_int(m as u128));
            prop_assert_eq!(x - x, Angle::ZERO);
            prop_assert!(x.norm() <= 0.5);
        }

        #[test]
        fn conjugate_symmetry(x: u128) {
            let a = Angle(x);
            let (p, n) = (a.e(), (-a).e());
            if x != 1u128 << 127 {
                prop_assert_eq!(p.re, n.re);
                prop_assert_eq!(p.im, -n.im);
            }
        }

        #[test]
        fn exponential_accuracy(x: u128) {
            let a = Angle(x);
            let t = a.to_f64() * core::f64::consts::TAU;
            let z = a.e();
            prop_assert!((z.re - t.cos()).abs() < 1e-14);
            prop_assert!((z.im - t.sin()).abs() < 1e-14);
        }

        #[test]
        fn hex_round_trip(x: u128) {
            prop_assert_eq!(Angle::from_hex(&Angle(x).to_hex()).unwrap(), Angle(x));
        }
    }
}
