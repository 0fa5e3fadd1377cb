//! Exact scalar helpers: rational parsing/printing, square-root-tagged
//! rationals, rational powers, and complex rationals.
//!
//! Values of the form r·√n (r, n rational) show up whenever a dilation by
//! t^{±1/2} or a measure ratio (s/t)^{γ+N/2} has to stay exact. They form a
//! multiplicative family, which is all the verification suite needs.

use crate::error::{DunklError, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Parse "p/q", an integer, or a plain decimal ("0.25") into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || DunklError::Config(format!("cannot parse rational from {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(DunklError::Config(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int_sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.trim().parse().map_err(|_| bad())?
        };
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.trim().parse().map_err(|_| bad())?
        };
        if f.is_negative() {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rat::new(i * &scale + BigInt::from(int_sign) * f, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from(n))
}

/// Canonical "num/den" form ("3" stays "3", "3/2" keeps the slash).
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// r^k for integer k (k may be negative; r must be nonzero then).
pub fn rat_pow(r: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num::pow::pow(r.clone(), k as usize)
    } else {
        num::pow::pow(r.recip(), (-k) as usize)
    }
}

fn integer_sqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

/// Split a positive integer as s²·f with f square-free up to the trial bound.
/// Radicands in this crate stay tiny (products of t numerators and 2s), so
/// trial division plus a perfect-square test is plenty.
fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut square = BigInt::one();
    let mut rest = n.clone();
    let mut p = BigInt::from(2u32);
    let bound = BigInt::from(100_000u32);
    while &p * &p <= rest && p <= bound {
        let p2 = &p * &p;
        while (&rest % &p2).is_zero() {
            rest /= &p2;
            square *= &p;
        }
        p += 1u32;
    }
    let r = integer_sqrt(&rest);
    if &r * &r == rest {
        square *= &r;
        rest = BigInt::one();
    }
    (square, rest)
}

/// Exact value r·√n with n a square-free positive integer (canonical form).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtScalar {
    pub rat: Rat,
    pub radicand: BigInt,
}

impl SqrtScalar {
    /// Build r·√(p/q), normalizing to a square-free integer radicand.
    pub fn new(r: Rat, radicand: Rat) -> Result<Self> {
        if !radicand.is_positive() {
            return Err(DunklError::InvalidParameter(
                "radicand must be positive".into(),
            ));
        }
        // √(p/q) = √(pq)/q
        let p = radicand.numer().clone();
        let q = radicand.denom().clone();
        let n = &p * &q;
        let (sq, free) = square_part(&n);
        let rat = r * Rat::new(sq, q);
        Ok(SqrtScalar { rat, radicand: free })
    }

    pub fn from_rat(r: Rat) -> Self {
        SqrtScalar {
            rat: r,
            radicand: BigInt::one(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.radicand.is_one() || self.rat.is_zero()
    }

    pub fn mul(&self, other: &SqrtScalar) -> Self {
        let r = &self.rat * &other.rat;
        let n = &self.radicand * &other.radicand;
        SqrtScalar::new(r, Rat::from(n)).expect("positive radicand")
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.rat) * self.radicand.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl fmt::Display for SqrtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", rat_to_string(&self.rat))
        } else {
            write!(f, "{}*sqrt({})", rat_to_string(&self.rat), self.radicand)
        }
    }
}

/// base^exp with base > 0 rational and rational exponent. Multiplicative
/// bookkeeping for measure-ratio prefactors like (s/t)^{γ+N/2}.
#[derive(Clone, Debug, PartialEq)]
pub struct PowScale {
    pub base: Rat,
    pub exp: Rat,
}

impl PowScale {
    pub fn new(base: Rat, exp: Rat) -> Result<Self> {
        if !base.is_positive() {
            return Err(DunklError::InvalidParameter("PowScale base must be > 0".into()));
        }
        Ok(PowScale { base, exp })
    }

    pub fn one() -> Self {
        PowScale {
            base: Rat::one(),
            exp: Rat::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.base).powf(rat_to_f64(&self.exp))
    }

    /// Exact form when the exponent is a half-integer.
    pub fn to_exact(&self) -> Option<SqrtScalar> {
        let two = rat_int(2);
        let k2 = &self.exp * &two;
        if !k2.denom().is_one() {
            return None;
        }
        let k2 = k2.numer().to_i64()?;
        let whole = k2.div_euclid(2);
        let half = k2.rem_euclid(2);
        let rat_part = rat_pow(&self.base, whole);
        if half == 0 {
            Some(SqrtScalar::from_rat(rat_part))
        } else {
            SqrtScalar::new(rat_part, self.base.clone()).ok()
        }
    }
}

/// Complex number with exact rational parts. Used to evaluate kernel blocks
/// at seeded sample points without accumulating float roundoff.
#[derive(Clone, Debug, PartialEq)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn zero() -> Self {
        CRat {
            re: Rat::zero(),
            im: Rat::zero(),
        }
    }

    pub fn one() -> Self {
        CRat {
            re: Rat::one(),
            im: Rat::zero(),
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        CRat {
            re: r,
            im: Rat::zero(),
        }
    }

    pub fn add(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn mul(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn scale(&self, r: &Rat) -> CRat {
        CRat {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    pub fn conj(&self) -> CRat {
        CRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn to_c64(&self) -> num::complex::Complex64 {
        num::complex::Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), rat(-7, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn sqrt_scalar_normal_form() {
        // √(9/2) = (3/2)·√2
        let s = SqrtScalar::new(Rat::one(), rat(9, 2)).unwrap();
        assert_eq!(s.rat, rat(3, 2));
        assert_eq!(s.radicand, BigInt::from(2));
        // √4 is rational
        let s = SqrtScalar::new(rat(5, 1), rat(4, 1)).unwrap();
        assert!(s.is_rational());
        assert_eq!(s.rat, rat(10, 1));
        let p = s.mul(&SqrtScalar::new(Rat::one(), rat(2, 1)).unwrap());
        assert!((p.to_f64() - 10.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pow_scale_half_integer() {
        let p = PowScale::new(rat(2, 1), rat(5, 2)).unwrap();
        let e = p.to_exact().unwrap();
        // 2^{5/2} = 4·√2
        assert_eq!(e.rat, rat(4, 1));
        assert_eq!(e.radicand, BigInt::from(2));
        let q = PowScale::new(rat(2, 1), rat(1, 3)).unwrap();
        assert!(q.to_exact().is_none());
        assert!((q.to_f64() - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn crat_arithmetic() {
        let a = CRat {
            re: rat(1, 2),
            im: rat(1, 1),
        };
        let b = CRat {
            re: rat(0, 1),
            im: rat(-2, 1),
        };
        let p = a.mul(&b);
        // (1/2 + i)(−2i) = 2 − i
        assert_eq!(p.re, rat(2, 1));
        assert_eq!(p.im, rat(-1, 1));
        let c = a.conj();
        assert_eq!(c.im, rat(-1, 1));
    }
}
