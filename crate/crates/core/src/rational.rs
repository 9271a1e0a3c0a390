//! Exact dyadic rationals `mantissa * 2^exponent`.
//!
//! Every scalar in this crate (measures, quasimeasure values, series
//! coefficients, partial sums) is a dyadic rational, and all arithmetic is
//! exact. The canonical form keeps the mantissa odd, so equality is plain
//! field equality and the exponent alone tells the 2-adic valuation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// An exact dyadic rational.
///
/// Invariants: the mantissa is odd or zero, and a zero mantissa forces a zero
/// exponent. Constructors and all arithmetic preserve this.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: i64,
}

impl DyadicRational {
    /// Builds `mantissa * 2^exponent` and normalizes to canonical form.
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        let mut out = DyadicRational { mantissa, exponent };
        out.normalize();
        out
    }

    pub fn zero() -> Self {
        DyadicRational { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        DyadicRational { mantissa: BigInt::one(), exponent: 0 }
    }

    pub fn from_integer(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    pub fn from_i128(v: i128) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        DyadicRational { mantissa: BigInt::one(), exponent: e }
    }

    /// `sign * 2^e` with `sign` in `{-1, 0, +1}` (any integer works; only its
    /// value matters).
    pub fn signed_pow2(sign: i32, e: i64) -> Self {
        Self::new(BigInt::from(sign), e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicRational { mantissa: self.mantissa.abs(), exponent: if self.mantissa.is_zero() { 0 } else { self.exponent } }
    }

    /// Multiplies by `2^e`.
    pub fn times_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            Self::zero()
        } else {
            DyadicRational {
                mantissa: self.mantissa.clone(),
                exponent: self.exponent.checked_add(e).expect("exponent overflow"),
            }
        }
    }

    /// Exact division by a positive integer. Returns `None` when the quotient
    /// is not a dyadic rational (the divisor has an odd factor that does not
    /// divide the mantissa).
    pub fn div_exact(&self, divisor: u64) -> Option<Self> {
        assert!(divisor > 0, "divisor must be positive");
        if self.is_zero() {
            return Some(Self::zero());
        }
        let twos = divisor.trailing_zeros() as i64;
        let odd = divisor >> twos;
        let mantissa = if odd == 1 {
            self.mantissa.clone()
        } else {
            let odd = BigInt::from(odd);
            let (q, r) = (&self.mantissa / &odd, &self.mantissa % &odd);
            if !r.is_zero() {
                return None;
            }
            q
        };
        Some(DyadicRational {
            mantissa,
            exponent: self.exponent.checked_sub(twos).expect("exponent overflow"),
        })
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().expect("nonzero mantissa");
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent = self
                .exponent
                .checked_add(tz as i64)
                .expect("exponent overflow");
        }
    }

    /// Exact finite decimal expansion (a dyadic rational always has one).
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        if self.exponent >= 0 {
            return (&self.mantissa << (self.exponent as u64)).to_string();
        }
        let f = (-self.exponent) as u32;
        // m * 2^-f = m * 5^f / 10^f
        let five_f = BigUint::from(5u32).pow(f);
        let scaled = &self.mantissa * BigInt::from(five_f);
        let neg = scaled.is_negative();
        let digits = scaled.abs().to_string();
        let digits = if (digits.len() as u32) <= f {
            format!("{}{}", "0".repeat((f + 1) as usize - digits.len()), digits)
        } else {
            digits
        };
        let point = digits.len() - f as usize;
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&digits[..point]);
        s.push('.');
        s.push_str(&digits[point..]);
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
        s
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << ((self.exponent - e) as u64);
        let b = &rhs.mantissa << ((rhs.exponent - e) as u64);
        DyadicRational::new(a + b, e)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        self + &(-rhs)
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: DyadicRational) -> DyadicRational {
        &self - &rhs
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        if self.is_zero() || rhs.is_zero() {
            return DyadicRational::zero();
        }
        DyadicRational {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self
                .exponent
                .checked_add(rhs.exponent)
                .expect("exponent overflow"),
        }
    }
}

impl Mul for DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: DyadicRational) -> DyadicRational {
        &self * &rhs
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { mantissa: -&self.mantissa, exponent: self.exponent }
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -&self
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mantissa.sign();
        let sb = other.mantissa.sign();
        if sa != sb {
            return sa.cmp(&sb);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as u64);
        let b = &other.mantissa << ((other.exponent - e) as u64);
        a.cmp(&b)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}
