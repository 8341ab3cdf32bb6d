//! Numeric tower: exact big rationals and complex doubles, plus the gamma
//! family and sin(pi x).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Parameter differences closer than this to an integer are treated as integers
/// in float mode.
pub const INT_TOL: f64 = 1e-9;

/// Arithmetic shared by the exact, double and wide-precision paths so that each
/// coefficient algorithm is written once.
pub trait Field:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// The integer `n` in the same representation (and precision) as `self`.
    fn int_like(&self, n: i64) -> Self;
    /// A rational constant in the same representation as `self`.
    fn rat_like(&self, r: &BigRational) -> Self;
    fn is_zero_value(&self) -> bool;
    fn to_c64(&self) -> C64;

    fn zero_like(&self) -> Self {
        self.int_like(0)
    }
    fn one_like(&self) -> Self {
        self.int_like(1)
    }
    fn add_int(&self, n: i64) -> Self {
        if n == 0 {
            return self.clone();
        }
        self.clone() + self.int_like(n)
    }
    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Field for BigRational {
    fn int_like(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn rat_like(&self, r: &BigRational) -> Self {
        r.clone()
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(self), 0.0)
    }
}

impl Field for C64 {
    fn int_like(&self, n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn rat_like(&self, r: &BigRational) -> Self {
        C64::new(rat_to_f64(r), 0.0)
    }
    fn is_zero_value(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Tagged numeric value. Mixed exact/float arithmetic promotes to float.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(C64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Scalar {
    pub fn int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn real(x: f64) -> Self {
        Scalar::Float(C64::new(x, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Scalar::Float(C64::new(re, im))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// One-way promotion to complex double.
    pub fn promote(&self) -> Scalar {
        Scalar::Float(self.to_c64())
    }

    pub fn re(&self) -> f64 {
        self.to_c64().re
    }

    /// Integer value if `self` is an integer (exactly in rational mode, within
    /// [`INT_TOL`] in float mode).
    pub fn near_integer(&self) -> Option<i64> {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    r.to_integer().to_i64()
                } else {
                    None
                }
            }
            Scalar::Float(z) => near_integer_c64(*z),
        }
    }

    pub fn is_nonpositive_integer(&self) -> bool {
        matches!(self.near_integer(), Some(n) if n <= 0)
    }
}

pub fn near_integer_c64(z: C64) -> Option<i64> {
    let n = z.re.round();
    if (z.re - n).abs() <= INT_TOL && z.im.abs() <= INT_TOL && n.abs() < 9.0e15 {
        Some(n as i64)
    } else {
        None
    }
}

impl Field for Scalar {
    fn int_like(&self, n: i64) -> Self {
        match self {
            Scalar::Exact(_) => Scalar::int(n),
            Scalar::Float(_) => Scalar::real(n as f64),
        }
    }
    fn rat_like(&self, r: &BigRational) -> Self {
        match self {
            Scalar::Exact(_) => Scalar::Exact(r.clone()),
            Scalar::Float(_) => Scalar::real(rat_to_f64(r)),
        }
    }
    fn is_zero_value(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }
    fn to_c64(&self) -> C64 {
        match self {
            Scalar::Exact(r) => C64::new(rat_to_f64(r), 0.0),
            Scalar::Float(z) => *z,
        }
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(x $op y),
                    (x, y) => Scalar::Float(x.to_c64() $op y.to_c64()),
                }
            }
        }
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(x $op y),
                    (x, y) => Scalar::Float(x.to_c64() $op y.to_c64()),
                }
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(-x),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<C64> for Scalar {
    fn from(z: C64) -> Self {
        Scalar::Float(z)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", r),
            Scalar::Float(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.im < 0.0 {
                    write!(f, "{}{}i", z.re, z.im)
                } else {
                    write!(f, "{}+{}i", z.re, z.im)
                }
            }
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts integers and `p/q` (exact), decimals (float) and `re+imi`
    /// complex tokens.
    fn from_str(s: &str) -> Result<Scalar> {
        let t = s.trim();
        let bad = || Error::Invalid(format!("cannot parse number '{}'", s));
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Scalar::Exact(BigRational::new(n, d)));
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Ok(Scalar::Exact(BigRational::from_integer(n)));
        }
        if let Some(body) = t.strip_suffix('i') {
            // split at the last sign that is not part of an exponent
            let bytes = body.as_bytes();
            let mut cut = None;
            for i in (1..bytes.len()).rev() {
                if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                    cut = Some(i);
                    break;
                }
            }
            let (re, im) = match cut {
                Some(i) => (&body[..i], &body[i..]),
                None => ("0", body),
            };
            let im = match im {
                "" | "+" => "1",
                "-" => "-1",
                x => x,
            };
            let re: f64 = re.parse().map_err(|_| bad())?;
            let im: f64 = im.parse().map_err(|_| bad())?;
            return Ok(Scalar::complex(re, im));
        }
        let x: f64 = t.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(Scalar::real(x))
    }
}

/// Rationals serialize as "num/den" strings, floats as [re, im].
impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => s.serialize_str(&r.to_string()),
            Scalar::Float(z) => serde::Serialize::serialize(&[z.re, z.im], s),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Pair([f64; 2]),
            Real(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Repr::Pair([re, im]) => Ok(Scalar::complex(re, im)),
            Repr::Real(x) => Ok(Scalar::real(x)),
        }
    }
}

/// a(a+1)...(a+n-1) for any field.
pub fn rising<T: Field>(a: &T, n: usize) -> T {
    let mut r = a.one_like();
    for i in 0..n {
        r = r * a.add_int(i as i64);
    }
    r
}

/// a(a-1)...(a-j+1) for any field.
pub fn falling<T: Field>(a: &T, j: usize) -> T {
    let mut r = a.one_like();
    for i in 0..j {
        r = r * a.add_int(-(i as i64));
    }
    r
}

pub fn rising_factorial(a: &Scalar, n: usize) -> Scalar {
    rising(a, n)
}

pub fn falling_factorial(a: &Scalar, j: usize) -> Scalar {
    falling(a, j)
}

pub fn factorial_f64(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(zm1: C64) -> C64 {
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (zm1 + i as f64);
    }
    x
}

fn check_pole(z: C64) -> Result<()> {
    if let Some(n) = near_integer_c64(z) {
        if n <= 0 {
            return Err(Error::Pole(format!("gamma at {}", n)));
        }
    }
    Ok(())
}

/// Principal-branch log gamma (the continuation from the positive real axis
/// with the cut on the negative axis).
pub fn log_gamma(z: C64) -> Result<C64> {
    check_pole(z)?;
    if z.re >= 0.5 {
        let zm1 = z - 1.0;
        let t = zm1 + LANCZOS_G + 0.5;
        return Ok(LN_SQRT_2PI + (zm1 + 0.5) * t.ln() - t + lanczos_sum(zm1).ln());
    }
    // shift upward: lnG(z) = lnG(z+m) - sum ln(z+i)
    let m = (0.5 - z.re).ceil() as usize;
    let mut acc = log_gamma(z + m as f64)?;
    for i in 0..m {
        acc -= (z + i as f64).ln();
    }
    Ok(acc)
}

pub fn gamma(z: C64) -> Result<C64> {
    check_pole(z)?;
    if z.re < 0.5 {
        let s = sin_pi(z);
        return Ok(C64::new(std::f64::consts::PI, 0.0) / (s * gamma(1.0 - z)?));
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    if z.im == 0.0 {
        let tr = t.re;
        let v = (2.0 * std::f64::consts::PI).sqrt()
            * tr.powf(zm1.re + 0.5)
            * (-tr).exp()
            * lanczos_sum(zm1).re;
        return Ok(C64::new(v, 0.0));
    }
    Ok((LN_SQRT_2PI + (zm1 + 0.5) * t.ln() - t).exp() * lanczos_sum(zm1))
}

/// 1/Gamma(z), zero at the poles.
pub fn rgamma(z: C64) -> C64 {
    match gamma(z) {
        Ok(g) => 1.0 / g,
        Err(_) => C64::new(0.0, 0.0),
    }
}

/// sin(pi x) and cos(pi x) for real x with exact values at multiples of 1/6
/// and 1/2 that matter for the identities.
fn sincos_pi_real(x: f64) -> (f64, f64) {
    let neg = x < 0.0;
    let r = x.abs() % 2.0;
    let (s, c) = match r {
        r if r == 0.0 => (0.0, 1.0),
        r if r == 0.5 => (1.0, 0.0),
        r if r == 1.0 => (0.0, -1.0),
        r if r == 1.5 => (-1.0, 0.0),
        r if r == 1.0 / 6.0 => (0.5, (0.75f64).sqrt()),
        r if r == 5.0 / 6.0 => (0.5, -(0.75f64).sqrt()),
        r if r == 7.0 / 6.0 => (-0.5, -(0.75f64).sqrt()),
        r if r == 11.0 / 6.0 => (-0.5, (0.75f64).sqrt()),
        r if r == 1.0 / 3.0 => ((0.75f64).sqrt(), 0.5),
        r if r == 2.0 / 3.0 => ((0.75f64).sqrt(), -0.5),
        r => {
            let n = r.round();
            let f = r - n;
            let (s, c) = (std::f64::consts::PI * f).sin_cos();
            if (n as i64) % 2 == 0 {
                (s, c)
            } else {
                (-s, -c)
            }
        }
    };
    if neg {
        (-s, c)
    } else {
        (s, c)
    }
}

pub fn sin_pi(z: C64) -> C64 {
    let (s, c) = sincos_pi_real(z.re);
    if z.im == 0.0 {
        return C64::new(s, 0.0);
    }
    let y = std::f64::consts::PI * z.im;
    C64::new(s * y.cosh(), c * y.sinh())
}

pub fn cos_pi(z: C64) -> C64 {
    let (s, c) = sincos_pi_real(z.re);
    if z.im == 0.0 {
        return C64::new(c, 0.0);
    }
    let y = std::f64::consts::PI * z.im;
    C64::new(c * y.cosh(), -s * y.sinh())
}

/// prod Gamma(num) / prod Gamma(den), evaluated in the log domain.
pub fn gamma_ratio_product(num: &[C64], den: &[C64]) -> Result<C64> {
    for (i, z) in num.iter().enumerate() {
        check_pole(*z).map_err(|_| Error::Pole(format!("numerator entry {} at {}", i, z)))?;
    }
    for (i, z) in den.iter().enumerate() {
        check_pole(*z).map_err(|_| Error::Pole(format!("denominator entry {} at {}", i, z)))?;
    }
    let all_real = num.iter().chain(den.iter()).all(|z| z.im == 0.0);
    if all_real {
        let mut log = 0.0;
        let mut sign = 1.0;
        for (zs, s) in [(num, 1.0), (den, -1.0)] {
            for z in zs {
                log += s * log_gamma(*z)?.re;
                if z.re < 0.0 && (z.re.abs().ceil() as i64) % 2 == 1 {
                    sign = -sign;
                }
            }
        }
        return Ok(C64::new(sign * log.exp(), 0.0));
    }
    let mut log = C64::new(0.0, 0.0);
    for z in num {
        log += log_gamma(*z)?;
    }
    for z in den {
        log -= log_gamma(*z)?;
    }
    Ok(log.exp())
}

/// Like [`gamma_ratio_product`] but a denominator pole makes the value zero
/// (reciprocal gamma semantics).
pub fn gamma_ratio_rg(num: &[C64], den: &[C64]) -> Result<C64> {
    for (i, z) in num.iter().enumerate() {
        check_pole(*z).map_err(|_| Error::Pole(format!("numerator entry {} at {}", i, z)))?;
    }
    if den.iter().any(|z| check_pole(*z).is_err()) {
        return Ok(C64::new(0.0, 0.0));
    }
    gamma_ratio_product(num, den)
}

pub fn scalar_one() -> Scalar {
    Scalar::Exact(BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn rising_and_falling_examples() {
        assert_eq!(rising_factorial(&Scalar::int(1), 3), Scalar::int(6));
        assert_eq!(rising_factorial(&Scalar::ratio(7, 3), 0), Scalar::int(1));
        assert_eq!(rising_factorial(&Scalar::ratio(1, 2), 2), Scalar::ratio(3, 4));
        assert_eq!(falling_factorial(&Scalar::int(3), 2), Scalar::int(6));
        assert_eq!(falling_factorial(&Scalar::ratio(5, 7), 0), Scalar::int(1));
        assert_eq!(falling_factorial(&Scalar::ratio(1, 2), 2), Scalar::ratio(-1, 4));
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(c(1.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(c(2.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5)).unwrap();
        assert!((half.re - std::f64::consts::PI.sqrt().ln()).abs() < 1e-15);
        // branch matches the usual principal log gamma
        let v = log_gamma(c(-2.5)).unwrap();
        assert!((v.im + 3.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((v.re - (-0.056_243_716_497_674_1)).abs() < 1e-13);
        assert!(matches!(log_gamma(c(-3.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn log_gamma_large_and_complex() {
        // lnG(50) = ln(49!)
        let want: f64 = (1..50).map(|i| (i as f64).ln()).sum();
        let got = log_gamma(c(50.0)).unwrap().re;
        assert!((got - want).abs() / want < 1e-14);
        // |G(1/2 + i t)|^2 = pi / cosh(pi t)
        let t = 1.7;
        let g = gamma(C64::new(0.5, t)).unwrap();
        let want = std::f64::consts::PI / (std::f64::consts::PI * t).cosh();
        assert!((g.norm_sqr() - want).abs() / want < 1e-13);
    }

    #[test]
    fn sin_pi_exact_points() {
        assert_eq!(sin_pi(c(1.0)).re, 0.0);
        assert_eq!(sin_pi(c(0.5)).re, 1.0);
        assert_eq!(sin_pi(c(1.0 / 6.0)).re, 0.5);
        assert_eq!(sin_pi(c(5.0 / 6.0)).re, 0.5);
        assert_eq!(sin_pi(c(-7.0)).re, 0.0);
        assert_eq!(sin_pi(c(-0.5)).re, -1.0);
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!((gamma_ratio_product(&[c(3.0)], &[c(2.0)]).unwrap() - 2.0).norm() < 1e-14);
        assert_eq!(gamma_ratio_product(&[], &[]).unwrap(), c(1.0));
        let pi = gamma_ratio_product(&[c(0.5), c(0.5)], &[c(1.0)]).unwrap();
        assert!((pi.re - std::f64::consts::PI).abs() < 1e-14);
        let neg = gamma_ratio_product(&[c(-0.5)], &[]).unwrap();
        assert!((neg.re + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!(matches!(gamma_ratio_product(&[c(1.0)], &[c(0.0)]), Err(Error::Pole(_))));
    }

    #[test]
    fn parse_tokens() {
        assert_eq!("3/2".parse::<Scalar>().unwrap(), Scalar::ratio(3, 2));
        assert_eq!("-4".parse::<Scalar>().unwrap(), Scalar::int(-4));
        assert_eq!("0.25".parse::<Scalar>().unwrap(), Scalar::real(0.25));
        assert_eq!("0.5+1.5i".parse::<Scalar>().unwrap(), Scalar::complex(0.5, 1.5));
        assert_eq!("-1e-3-2i".parse::<Scalar>().unwrap(), Scalar::complex(-1e-3, -2.0));
        assert_eq!("2i".parse::<Scalar>().unwrap(), Scalar::complex(0.0, 2.0));
        assert!("x".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
    }

    #[test]
    fn mixed_arithmetic_promotes() {
        let x = Scalar::ratio(1, 2) + Scalar::real(0.25);
        assert_eq!(x, Scalar::real(0.75));
        assert!((Scalar::ratio(1, 3) * Scalar::int(3)).is_exact());
    }
}
