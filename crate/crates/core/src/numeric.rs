//! Enclosure arithmetic on top of MPFR.
//!
//! An [`Interval`] is a pair of MPFR floats `[lo, hi]` that is guaranteed to
//! contain the true real value. Every operation rounds the lower endpoint
//! down and the upper endpoint up, so enclosures stay valid through any
//! chain of operations. Exact quantities (intersection numbers, convergent
//! tables, rational slope bounds) live in GMP integers and rationals and are
//! only converted to enclosures at the last moment.

use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

/// Working precision in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision(pub u32);

impl Precision {
    /// Bits needed for `digits` significant decimal digits plus guard bits.
    pub fn from_digits(digits: u32) -> Self {
        let bits = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32;
        Precision(bits + 32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::from_digits(120)
    }
}

#[derive(Clone, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, src: T) -> Float
where
    Float: rug::Assign<T> + rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, src, Round::Down).0
}

fn up<T>(prec: u32, src: T) -> Float
where
    Float: rug::Assign<T> + rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, src, Round::Up).0
}

fn min_f(a: Float, b: Float) -> Float {
    if a <= b {
        a
    } else {
        b
    }
}

fn max_f(a: Float, b: Float) -> Float {
    if a >= b {
        a
    } else {
        b
    }
}

impl Interval {
    /// Builds `[lo, hi]`, swapping if needed.
    pub fn new(lo: Float, hi: Float) -> Self {
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }

    pub fn point(x: Float) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    /// Enclosure of an `f64`, which is exactly representable.
    pub fn from_f64(prec: Precision, x: f64) -> Self {
        Interval::point(Float::with_val(prec.bits().max(53), x))
    }

    pub fn from_integer(prec: Precision, x: &Integer) -> Self {
        Interval {
            lo: down(prec.bits(), x),
            hi: up(prec.bits(), x),
        }
    }

    pub fn from_rational(prec: Precision, x: &Rational) -> Self {
        Interval {
            lo: down(prec.bits(), x),
            hi: up(prec.bits(), x),
        }
    }

    /// Hull of two rational endpoints.
    pub fn from_rational_bounds(prec: Precision, a: &Rational, b: &Rational) -> Self {
        let ia = Interval::from_rational(prec, a);
        let ib = Interval::from_rational(prec, b);
        ia.hull(&ib)
    }

    /// Enclosure of `num / den` without canonicalizing the fraction.
    pub fn from_ratio(prec: Precision, num: &Integer, den: &Integer) -> Self {
        let p = prec.bits() + 16;
        Interval::from_integer(Precision(p), num).div(&Interval::from_integer(Precision(p), den))
    }

    /// Parses a decimal literal such as `"12.5"` or `"1e-3"` into a tight enclosure.
    pub fn parse_decimal(prec: Precision, s: &str) -> Option<Self> {
        let r = parse_decimal_rational(s)?;
        Some(Interval::from_rational(prec, &r))
    }

    pub fn pi(prec: Precision) -> Self {
        Interval {
            lo: down(prec.bits(), Constant::Pi),
            hi: up(prec.bits(), Constant::Pi),
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 2;
        let sum = Float::with_val(p, &self.lo + &self.hi);
        sum / 2u32
    }

    /// Upper bound on the radius `(hi - lo) / 2`.
    pub fn rad(&self) -> Float {
        let w: Float = up(self.prec(), &self.hi - &self.lo);
        w / 2u32
    }

    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// True when every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: min_f(self.lo.clone(), other.lo.clone()),
            hi: max_f(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            self.neg()
        } else {
            let m = max_f(-self.lo.clone(), self.hi.clone());
            Interval {
                lo: Float::with_val(self.prec(), 0),
                hi: m,
            }
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let p = self.prec().max(other.prec());
        Interval {
            lo: down(p, &self.lo + &other.lo),
            hi: up(p, &self.hi + &other.hi),
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let p = self.prec().max(other.prec());
        Interval {
            lo: down(p, &self.lo - &other.hi),
            hi: up(p, &self.hi - &other.lo),
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = self.prec().max(other.prec());
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = down(p, a * b);
            let h = up(p, a * b);
            lo = Some(match lo {
                Some(x) => min_f(x, l),
                None => l,
            });
            hi = Some(match hi {
                Some(x) => max_f(x, h),
                None => h,
            });
        }
        Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
    }

    /// Division; a divisor enclosure containing zero yields `[-inf, +inf]`.
    pub fn div(&self, other: &Interval) -> Interval {
        let p = self.prec().max(other.prec());
        if other.contains_zero() {
            return Interval {
                lo: Float::with_val(p, rug::float::Special::NegInfinity),
                hi: Float::with_val(p, rug::float::Special::Infinity),
            };
        }
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = down(p, a / b);
            let h = up(p, a / b);
            lo = Some(match lo {
                Some(x) => min_f(x, l),
                None => l,
            });
            hi = Some(match hi {
                Some(x) => max_f(x, h),
                None => h,
            });
        }
        Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
    }

    pub fn scale_u32(&self, k: u32) -> Interval {
        let p = self.prec();
        Interval {
            lo: down(p, &self.lo * k),
            hi: up(p, &self.hi * k),
        }
    }

    pub fn half(&self) -> Interval {
        Interval {
            lo: self.lo.clone() / 2u32,
            hi: self.hi.clone() / 2u32,
        }
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        let p = a.prec();
        Interval {
            lo: down(p, a.lo.square_ref()),
            hi: up(p, a.hi.square_ref()),
        }
    }

    pub fn recip(&self) -> Interval {
        Interval::from_f64(Precision(self.prec()), 1.0).div(self)
    }

    /// Monotone increasing map applied endpoint-wise with outward rounding.
    fn monotone<F>(&self, f: F) -> Interval
    where
        F: Fn(&mut Float, Round) -> Ordering,
    {
        let mut lo = self.lo.clone();
        f(&mut lo, Round::Down);
        let mut hi = self.hi.clone();
        f(&mut hi, Round::Up);
        Interval { lo, hi }
    }

    /// Square root; negative parts of the enclosure are clamped to zero.
    pub fn sqrt(&self) -> Interval {
        let clamped = Interval {
            lo: max_f(self.lo.clone(), Float::with_val(self.prec(), 0)),
            hi: max_f(self.hi.clone(), Float::with_val(self.prec(), 0)),
        };
        clamped.monotone(|x, r| x.sqrt_round(r))
    }

    /// Natural logarithm; nonpositive lower endpoints give `-inf`.
    pub fn ln(&self) -> Interval {
        self.monotone(|x, r| x.ln_round(r))
    }

    pub fn exp(&self) -> Interval {
        self.monotone(|x, r| x.exp_round(r))
    }

    pub fn sinh(&self) -> Interval {
        self.monotone(|x, r| x.sinh_round(r))
    }

    pub fn asinh(&self) -> Interval {
        self.monotone(|x, r| x.asinh_round(r))
    }

    pub fn cosh(&self) -> Interval {
        // even function, minimum 1 at the origin
        let a = self.abs();
        a.monotone(|x, r| x.cosh_round(r))
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: max_f(self.lo.clone(), other.lo.clone()),
            hi: max_f(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: min_f(self.lo.clone(), other.lo.clone()),
            hi: min_f(self.hi.clone(), other.hi.clone()),
        }
    }

    /// `|self / reference - 1|` as an enclosure.
    pub fn relative_gap(&self, reference: &Interval) -> Interval {
        let one = Interval::from_f64(Precision(self.prec()), 1.0);
        self.div(reference).sub(&one).abs()
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn mid_string(&self, digits: usize) -> String {
        format_float(&self.mid(), digits)
    }

    /// Renders `mid±rad`.
    pub fn display(&self, digits: usize) -> String {
        format!("{}±{}", format_float(&self.mid(), digits), format_float(&self.rad(), 3))
    }
}

/// Deterministic scientific rendering of an MPFR float.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x.is_sign_negative() { "-inf" } else { "inf" }.to_string()
    } else if x.is_zero() {
        "0".to_string()
    } else {
        let d = digits.max(1);
        // rug counts significant digits in the precision field
        format!("{:.*e}", d, x)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_float(&self.lo, 25), format_float(&self.hi, 25))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(20))
    }
}

/// Exact decimal literal parser: `[-]digits[.digits][e[-]digits]`.
pub fn parse_decimal_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: Integer = n.trim().parse().ok()?;
        let d: Integer = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::from((n, d)));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(digits.parse::<Integer>().unwrap_or_default());
    let shift = exp - frac_part.len() as i32;
    if shift >= 0 {
        value *= Integer::from(Integer::u_pow_u(10, shift as u32));
    } else {
        value /= Integer::from(Integer::u_pow_u(10, (-shift) as u32));
    }
    if neg {
        value = -value;
    }
    Some(value)
}

/// Certified comparison of an integer against `exp(x)` for a positive integer `x`.
///
/// Returns `Ordering::Greater` when `a > e^x`. Since `e^x` is irrational for
/// `x > 0` the answer is never `Equal`; precision is raised until decided.
pub fn cmp_integer_exp(a: &Integer, x: &Integer) -> Ordering {
    if *x == 0 {
        return a.cmp(&Integer::from(1));
    }
    let mut prec = a.significant_bits() + 64;
    loop {
        let xf = Interval::from_integer(Precision(prec), x).exp();
        let af = Interval::from_integer(Precision(prec), a);
        if af.lo > xf.hi {
            return Ordering::Greater;
        }
        if af.hi < xf.lo {
            return Ordering::Less;
        }
        prec *= 2;
    }
}

/// Smallest integer `E` with `E >= e^x`, certified by round-up evaluation.
pub fn exp_ceiling(x: &Integer) -> Integer {
    // e^x needs about x / ln 2 bits before the binary point
    let bits = x.to_f64() * std::f64::consts::LOG2_E;
    let prec = (bits.ceil() as u32).saturating_add(64);
    let e = Interval::from_integer(Precision(prec), x).exp();
    e.hi()
        .to_integer_round(Round::Up)
        .map(|(i, _)| i)
        .expect("finite exponential")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::from_digits(40)
    }

    #[test]
    fn arithmetic_encloses_exact_thirds() {
        let one = Interval::from_f64(p(), 1.0);
        let three = Interval::from_f64(p(), 3.0);
        let third = one.div(&three);
        let back = third.mul(&three);
        assert!(back.contains(&Float::with_val(64, 1)));
        assert!(third.width() < 1e-40);
    }

    #[test]
    fn transcendental_enclosures() {
        let two = Interval::from_f64(p(), 2.0);
        let ln2 = two.ln();
        assert!(ln2.contains(&Float::with_val(200, Constant::Log2)));
        let back = ln2.exp();
        assert!(back.contains(&Float::with_val(64, 2)));
        let x = Interval::from_f64(p(), 0.3);
        assert!(x.sinh().asinh().overlaps(&x));
        assert!(Interval::from_f64(p(), -0.5)
            .cosh()
            .overlaps(&Interval::from_f64(p(), 0.5).cosh()));
    }

    #[test]
    fn sign_aware_products() {
        let a = Interval::new(Float::with_val(64, -2), Float::with_val(64, 3));
        let b = Interval::new(Float::with_val(64, -5), Float::with_val(64, 1));
        let c = a.mul(&b);
        assert_eq!(c.lo().to_f64(), -15.0);
        assert_eq!(c.hi().to_f64(), 10.0);
        assert!(Interval::from_f64(p(), 1.0).div(&a).lo().is_infinite());
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal_rational("0.25").unwrap(), Rational::from((1, 4)));
        assert_eq!(parse_decimal_rational("-1.5e2").unwrap(), Rational::from(-150));
        assert_eq!(parse_decimal_rational("3/12").unwrap(), Rational::from((1, 4)));
        assert_eq!(parse_decimal_rational("1e-3").unwrap(), Rational::from((1, 1000)));
        assert!(parse_decimal_rational("abc").is_none());
        assert!(parse_decimal_rational("1/0").is_none());
    }

    #[test]
    fn exp_comparisons() {
        // e^2 = 7.389..
        assert_eq!(cmp_integer_exp(&Integer::from(8), &Integer::from(2)), Ordering::Greater);
        assert_eq!(cmp_integer_exp(&Integer::from(7), &Integer::from(2)), Ordering::Less);
        assert_eq!(exp_ceiling(&Integer::from(2)), 8);
        assert_eq!(exp_ceiling(&Integer::from(1)), 3);
        // ceil(e^68), cross-checked with mpmath at 60 digits
        let e68 = exp_ceiling(&Integer::from(68));
        assert_eq!(e68.to_string(), "340427604993174052137690718701");
    }

    #[test]
    fn formatting_is_stable() {
        let x = Interval::from_f64(p(), 1.5);
        assert_eq!(x.mid_string(3), "1.50e0");
        assert_eq!(format_float(&Float::with_val(64, 0), 5), "0");
    }
}
