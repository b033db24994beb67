//! Exact rational helpers: the `p/q` text form, square-root comparisons and
//! certified sign tests of polynomials evaluated at `N^γ`.

use crate::error::{invalid, Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

/// Exact probability value.
pub type Prob = BigRational;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Renders `p/q` in lowest terms; integers keep the `/1` suffix.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer. Decimals are rejected: they are never a
/// source of truth.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Format(format!("not an exact rational: {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Format(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse_int(p)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers: shift both down before converting
        let n = r.numer().bits().max(r.denom().bits());
        let shift = n.saturating_sub(1000);
        let num = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let den = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        num / den
    })
}

/// `a ≤ √b` for `b ≥ 0`, exactly.
pub fn le_sqrt(a: &BigRational, b: &BigRational) -> bool {
    !a.is_positive() || a * a <= *b
}

/// `a > √b` for `b ≥ 0`, exactly.
pub fn gt_sqrt(a: &BigRational, b: &BigRational) -> bool {
    !le_sqrt(a, b)
}

/// Outcome of a certified sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certified {
    Holds,
    Fails,
    /// The bracket never separated from zero within the refinement budget.
    Undecided,
}

impl Certified {
    /// An undecided test means `f(t)` is zero to within the bracket width,
    /// which satisfies a non-strict inequality.
    pub fn holds(self) -> bool {
        !matches!(self, Certified::Fails)
    }
}

/// Real number `base^(num/den)` with a shrinking rational bracket.
#[derive(Debug, Clone)]
pub struct RealPower {
    den: u32,
    target: BigUint,
    exact: Option<BigRational>,
    lo: BigRational,
    hi: BigRational,
}

impl RealPower {
    /// `base^exponent` for a positive integer base and a nonnegative rational exponent.
    pub fn new(base: u64, exponent: &BigRational) -> Result<Self> {
        if exponent.is_negative() {
            return Err(invalid!("negative exponent {}", format_ratio(exponent)));
        }
        if base == 0 {
            return Err(invalid!("zero base"));
        }
        let num = exponent
            .numer()
            .to_u32()
            .ok_or_else(|| Error::Overflow("exponent numerator".into()))?;
        let den = exponent
            .denom()
            .to_u32()
            .ok_or_else(|| Error::Overflow("exponent denominator".into()))?;
        let target = BigUint::from(base).pow(num);
        let root = target.nth_root(den);
        let exact = if root.clone().pow(den) == target {
            Some(BigRational::from_integer(BigInt::from(root.clone())))
        } else {
            None
        };
        let lo = BigRational::from_integer(BigInt::from(root.clone()));
        let hi = BigRational::from_integer(BigInt::from(root + 1u32));
        Ok(RealPower {
            den,
            target,
            exact,
            lo,
            hi,
        })
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn bracket(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn approx(&self) -> f64 {
        match &self.exact {
            Some(e) => to_f64(e),
            None => to_f64(&((&self.lo + &self.hi) / rat(2, 1))),
        }
    }

    /// Halves the bracket width.
    pub fn refine(&mut self) {
        if self.exact.is_some() {
            return;
        }
        let mid = (&self.lo + &self.hi) / rat(2, 1);
        let target = BigRational::from_integer(BigInt::from(self.target.clone()));
        if mid.clone().pow(self.den as i32) <= target {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }
}

fn eval_poly(coeffs: &[BigRational], t: &BigRational) -> BigRational {
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * t + c)
}

/// Certifies `Σ coeffs[k]·t^k ≥ 0` at `t = power ≥ 0` by interval bisection.
pub fn certify_poly_nonneg(coeffs: &[BigRational], power: &mut RealPower) -> Certified {
    if let Some(t) = power.exact() {
        return if eval_poly(coeffs, t).is_negative() {
            Certified::Fails
        } else {
            Certified::Holds
        };
    }
    if coeffs.iter().all(|c| !c.is_negative()) {
        return Certified::Holds;
    }
    for _ in 0..512 {
        let (lo, hi) = power.bracket();
        let mut lower = BigRational::zero();
        let mut upper = BigRational::zero();
        let mut lo_pow = BigRational::one();
        let mut hi_pow = BigRational::one();
        for c in coeffs {
            if c.is_positive() {
                lower += c * &lo_pow;
                upper += c * &hi_pow;
            } else if c.is_negative() {
                lower += c * &hi_pow;
                upper += c * &lo_pow;
            }
            lo_pow *= lo;
            hi_pow *= hi;
        }
        if !lower.is_negative() {
            return Certified::Holds;
        }
        if upper.is_negative() {
            return Certified::Fails;
        }
        power.refine();
    }
    Certified::Undecided
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_text_round_trip() {
        let r = rat(6, 8);
        assert_eq!(format_ratio(&r), "3/4");
        assert_eq!(parse_ratio("3/4").unwrap(), r);
        assert_eq!(parse_ratio(" 2 ").unwrap(), rat(2, 1));
        assert_eq!(format_ratio(&rat(0, 5)), "0/1");
        assert!(parse_ratio("0.5").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn sqrt_comparisons() {
        assert!(le_sqrt(&rat(1, 2), &rat(1, 4)));
        assert!(!le_sqrt(&rat(1, 2), &rat(1, 5)));
        assert!(le_sqrt(&rat(-3, 1), &rat(0, 1)));
        assert!(gt_sqrt(&rat(1, 1), &rat(1, 2)));
    }

    #[test]
    fn real_power_exact_and_irrational() {
        let p = RealPower::new(16, &rat(1, 2)).unwrap();
        assert_eq!(p.exact(), Some(&rat(4, 1)));
        let mut p = RealPower::new(2, &rat(1, 2)).unwrap();
        assert!(p.exact().is_none());
        for _ in 0..40 {
            p.refine();
        }
        assert!((p.approx() - std::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn certified_sign_of_quadratic() {
        // t^2 - 2 at t = sqrt(3) is 1 > 0; at t = sqrt(2)·… use 2^(1/2): t^2 - 3 < 0
        let mut p = RealPower::new(3, &rat(1, 2)).unwrap();
        assert_eq!(
            certify_poly_nonneg(&[rat(-2, 1), rat(0, 1), rat(1, 1)], &mut p),
            Certified::Holds
        );
        let mut p = RealPower::new(2, &rat(1, 2)).unwrap();
        assert_eq!(
            certify_poly_nonneg(&[rat(-3, 1), rat(0, 1), rat(1, 1)], &mut p),
            Certified::Fails
        );
        // t - 2^(1/3)·… : t^3 - 2 = 0 exactly at t = 2^(1/3) cannot separate
        let mut p = RealPower::new(2, &rat(1, 3)).unwrap();
        assert_eq!(
            certify_poly_nonneg(&[rat(-2, 1), rat(0, 1), rat(0, 1), rat(1, 1)], &mut p),
            Certified::Undecided
        );
    }
}
