//! Scalar backends.
//!
//! Two fields are supported: exact Gaussian rationals `Q(i)` and double
//! precision complex numbers. Matrices and representations are generic over
//! [`Scalar`]; mixing backends requires an explicit conversion.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether equality and zero tests are exact for this backend.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> C64;

    /// Zero test used by elimination: exact for exact backends, relative to
    /// `scale` for floating ones.
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol * scale.max(f64::MIN_POSITIVE)
        }
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn from_bigint(v: &BigInt) -> Self {
        C64::new(v.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

/// An element of `Q(i)` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn i() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    /// The exact dyadic rational value of a finite double.
    pub fn from_c64_exact(z: C64) -> Result<Self> {
        let conv = |x: f64| {
            BigRational::from_float(x)
                .ok_or_else(|| Error::InexactInput(format!("non-finite coefficient {x}")))
        };
        Ok(GaussRat {
            re: conv(z.re)?,
            im: conv(z.im)?,
        })
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussRat::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for GaussRat {
    const EXACT: bool = true;

    fn zero() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn one() -> Self {
        GaussRat::real(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        GaussRat::real(BigRational::from_integer(v.into()))
    }
    fn from_bigint(v: &BigInt) -> Self {
        GaussRat::real(BigRational::from_integer(v.clone()))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> C64 {
        C64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        GaussRat {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        GaussRat {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRat::real(self.re * rhs.re);
        }
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    /// Panics on division by zero, like the underlying rationals.
    fn div(self, rhs: GaussRat) -> GaussRat {
        if rhs.im.is_zero() {
            return GaussRat {
                re: self.re / &rhs.re,
                im: self.im / &rhs.re,
            };
        }
        let n = rhs.norm_sqr();
        let num = self * rhs.conj();
        GaussRat {
            re: num.re / &n,
            im: num.im / &n,
        }
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Formats as `a/b+c/di`; denominators of 1 are omitted.
impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}i", self.re, sign, self.im.abs())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(BigInt::from_str(s).ok()?)),
    }
}

impl FromStr for GaussRat {
    type Err = Error;

    /// Accepts `a/b+c/di`, `a/b+c/d i`, a bare rational, or a bare imaginary part.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("scalar", format!("cannot parse `{s}` as a/b+c/di"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix('i') else {
            return parse_rational(&t).map(GaussRat::real).ok_or_else(bad);
        };
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (re_part, im_part) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im_part {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other)).ok_or_else(bad)?,
        };
        let re = parse_rational(re_part).ok_or_else(bad)?;
        Ok(GaussRat { re, im })
    }
}

/// `e^{2 pi i x}` evaluated in double precision.
pub fn unit_phase(x: f64) -> C64 {
    let t = 2.0 * std::f64::consts::PI * x;
    C64::new(t.cos(), t.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        for s in ["1/2+3/4i", "-1+0i", "0-5/3i", "7+1i"] {
            let z: GaussRat = s.parse().unwrap();
            assert_eq!(z.to_string(), s);
        }
        let z: GaussRat = "1/2+3/4 i".parse().unwrap();
        assert_eq!(z, GaussRat::new(BigRational::new(1.into(), 2.into()), BigRational::new(3.into(), 4.into())));
        assert_eq!("-2/6".parse::<GaussRat>().unwrap(), GaussRat::from_ratio(-1, 3));
        assert_eq!("i".parse::<GaussRat>().unwrap(), GaussRat::i());
        assert_eq!("-i".parse::<GaussRat>().unwrap(), -GaussRat::i());
        assert_eq!("3/2i".parse::<GaussRat>().unwrap().im, BigRational::new(3.into(), 2.into()));
        assert!("1/0".parse::<GaussRat>().is_err());
        assert!("abc".parse::<GaussRat>().is_err());
    }

    #[test]
    fn field_ops() {
        let a: GaussRat = "1+2i".parse().unwrap();
        let b: GaussRat = "3-1i".parse().unwrap();
        assert_eq!((a.clone() * b.clone()).to_string(), "5+5i");
        assert_eq!((a.clone() * b.clone()) / b.clone(), a);
        assert_eq!(GaussRat::i().pow(4), GaussRat::one());
        assert!((a.to_c64() - C64::new(1.0, 2.0)).norm() == 0.0);
    }

    #[test]
    fn exact_from_float() {
        let z = GaussRat::from_c64_exact(C64::new(0.5, -0.25)).unwrap();
        assert_eq!(z.to_string(), "1/2-1/4i");
        assert!(GaussRat::from_c64_exact(C64::new(f64::NAN, 0.0)).is_err());
    }
}
