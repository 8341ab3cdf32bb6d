//! Extended-precision complex arithmetic for the infinite series whose
//! terminating kernels cancel heavily, and a shared series accumulator.

use std::collections::VecDeque;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, C64};

type F = FBig<HalfEven, 2>;

/// Default cap on the number of terms of any infinite series.
pub const DEFAULT_MAX_TERMS: usize = 10_000;

static MAX_TERMS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_TERMS);

/// Process-wide series cap (set by the CLI from `NORLUND_MAX_TERMS`).
pub fn max_terms() -> usize {
    MAX_TERMS.load(Ordering::Relaxed)
}

pub fn set_max_terms(n: usize) {
    MAX_TERMS.store(n.max(1), Ordering::Relaxed);
}

fn bigint_to_ibig(n: &BigInt) -> IBig {
    IBig::from_le_bytes(&n.to_signed_bytes_le())
}

fn f_from_f64(x: f64, prec: usize) -> F {
    F::try_from(x)
        .expect("finite parameter")
        .with_precision(prec)
        .value()
}

fn f_from_rational(r: &BigRational, prec: usize) -> F {
    let num = F::from(bigint_to_ibig(r.numer())).with_precision(prec).value();
    let den = F::from(bigint_to_ibig(r.denom())).with_precision(prec).value();
    num / den
}

fn f_is_zero(x: &F) -> bool {
    x.repr().is_zero()
}

/// Complex number with binary floating-point parts of configurable precision.
#[derive(Clone, Debug)]
pub struct WideC {
    re: F,
    im: F,
}

impl WideC {
    pub fn from_c64(z: C64, prec: usize) -> Self {
        WideC {
            re: f_from_f64(z.re, prec),
            im: f_from_f64(z.im, prec),
        }
    }

    pub fn from_rational(r: &BigRational, prec: usize) -> Self {
        WideC {
            re: f_from_rational(r, prec),
            im: f_from_f64(0.0, prec),
        }
    }

    /// Exact conversion of a scalar (rationals are rounded once to `prec`).
    pub fn from_scalar(s: &Scalar, prec: usize) -> Self {
        match s {
            Scalar::Exact(r) => WideC::from_rational(r, prec),
            Scalar::Float(z) => WideC::from_c64(*z, prec),
        }
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }

    fn is_real(&self) -> bool {
        f_is_zero(&self.im)
    }

    /// Upper estimate of log2|self| that never overflows; -inf for zero.
    pub fn log2_abs(&self) -> f64 {
        fn lg(x: &F) -> f64 {
            let r = x.repr();
            if r.is_zero() {
                f64::NEG_INFINITY
            } else {
                (r.exponent() as f64) + (r.digits() as f64)
            }
        }
        lg(&self.re).max(lg(&self.im))
    }
}

impl Field for WideC {
    fn int_like(&self, n: i64) -> Self {
        let prec = self.precision().max(64);
        WideC {
            re: F::from(n).with_precision(prec).value(),
            im: f_from_f64(0.0, prec),
        }
    }
    fn rat_like(&self, r: &BigRational) -> Self {
        WideC::from_rational(r, self.precision().max(64))
    }
    fn is_zero_value(&self) -> bool {
        f_is_zero(&self.re) && f_is_zero(&self.im)
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }
}

impl Add for WideC {
    type Output = WideC;
    fn add(self, rhs: WideC) -> WideC {
        WideC {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for WideC {
    type Output = WideC;
    fn sub(self, rhs: WideC) -> WideC {
        WideC {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for WideC {
    type Output = WideC;
    fn mul(self, rhs: WideC) -> WideC {
        if self.is_real() && rhs.is_real() {
            let im = F::ZERO.with_precision(self.precision()).value();
            return WideC {
                re: self.re * rhs.re,
                im,
            };
        }
        WideC {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for WideC {
    type Output = WideC;
    fn div(self, rhs: WideC) -> WideC {
        if rhs.is_real() {
            return WideC {
                re: self.re / &rhs.re,
                im: self.im / &rhs.re,
            };
        }
        let den = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        WideC {
            re: (&self.re * &rhs.re + &self.im * &rhs.im) / &den,
            im: (&self.im * &rhs.re - &self.re * &rhs.im) / &den,
        }
    }
}

impl Neg for WideC {
    type Output = WideC;
    fn neg(self) -> WideC {
        WideC {
            re: -self.re,
            im: -self.im,
        }
    }
}

/// Values K_0..K_J of the terminating kernels
/// `K_j = sum_i (-j)_i prod(up)_i / (prod(lo)_i i!) x^i`.
///
/// `params(prec)` must return `(up, lo, x)` at the requested precision.
/// Since `(-j)_i/i! = (-1)^i C(j,i)`, every K_j is a binomial transform of
/// d_i = (-1)^i prod(up)_i/prod(lo)_i x^i, so one Pascal sweep yields them
/// all. The alternating sums cancel by up to 2^J, so the working precision
/// grows with J.
pub fn kernel_family<P>(params: P, jmax: usize) -> Result<Vec<WideC>>
where
    P: Fn(usize) -> (Vec<WideC>, Vec<WideC>, Option<WideC>),
{
    kernel_family_prec(params, jmax, 0)
}

/// As [`kernel_family`], keeping at least `min_prec` bits in the results.
pub fn kernel_family_prec<P>(params: P, jmax: usize, min_prec: usize) -> Result<Vec<WideC>>
where
    P: Fn(usize) -> (Vec<WideC>, Vec<WideC>, Option<WideC>),
{
    // Size the magnitudes in double precision first.
    let (up, lo, x) = params(64);
    let upc: Vec<C64> = up.iter().map(|v| v.to_c64()).collect();
    let loc: Vec<C64> = lo.iter().map(|v| v.to_c64()).collect();
    let xc = x.as_ref().map(|v| v.to_c64());
    let mut lg = 0.0f64;
    let mut lg_max = 0.0f64;
    for i in 0..jmax {
        let fi = i as f64;
        let mut r = 1.0;
        for u in &upc {
            r *= (u + fi).norm();
        }
        for l in &loc {
            let v = (l + fi).norm();
            if v < 1e-300 {
                return Err(Error::Pole(format!(
                    "lower kernel parameter {} + {} vanishes",
                    l, i
                )));
            }
            r /= v;
        }
        if let Some(z) = xc {
            r *= z.norm();
        }
        if r == 0.0 {
            break;
        }
        lg += r.log2();
        lg_max = lg_max.max(lg);
    }
    let prec = (160 + jmax + lg_max.ceil() as usize).max(min_prec);

    let (up, lo, x) = params(prec);
    let one = WideC::from_c64(C64::new(1.0, 0.0), prec);
    let mut d = Vec::with_capacity(jmax + 1);
    let mut cur = one.clone();
    d.push(cur.clone());
    for i in 0..jmax {
        let mut num = -cur;
        for u in &up {
            num = num * u.add_int(i as i64);
        }
        if let Some(z) = &x {
            num = num * z.clone();
        }
        let mut den = one.clone();
        for l in &lo {
            let li = l.add_int(i as i64);
            if li.is_zero_value() {
                return Err(Error::Pole(format!("lower kernel parameter hits zero at {}", i)));
            }
            den = den * li;
        }
        cur = num / den;
        d.push(cur.clone());
    }
    // The sweep itself only adds, so it runs exactly on fixed-point integers
    // with `prec` fractional bits; rounding happens once on the way in.
    let mut re: Vec<IBig> = d.iter().map(|z| to_fixed(&z.re, prec)).collect();
    let mut im: Vec<IBig> = d.iter().map(|z| to_fixed(&z.im, prec)).collect();
    let complex = im.iter().any(|v| *v != IBig::ZERO);
    let from_fixed = |v: &IBig| F::from_parts(v.clone(), -(prec as isize)).with_precision(prec).value();
    let mut out = Vec::with_capacity(jmax + 1);
    let emit = |re: &IBig, im: &IBig| WideC {
        re: from_fixed(re),
        im: from_fixed(im),
    };
    out.push(emit(&re[0], &im[0]));
    for m in 1..=jmax {
        for i in 0..=(jmax - m) {
            let (lo, hi) = re.split_at_mut(i + 1);
            lo[i] += &hi[0];
            if complex {
                let (lo, hi) = im.split_at_mut(i + 1);
                lo[i] += &hi[0];
            }
        }
        out.push(emit(&re[0], &im[0]));
    }
    Ok(out)
}

fn to_fixed(x: &F, frac_bits: usize) -> IBig {
    let r = x.repr();
    let e = r.exponent() + frac_bits as isize;
    if e >= 0 {
        r.significand().clone() << e as usize
    } else {
        r.significand().clone() >> (-e) as usize
    }
}

/// Result of summing an infinite series.
#[derive(Clone, Debug)]
pub struct Summed<T> {
    pub value: T,
    pub terms: usize,
    pub last_term: f64,
}

/// Stagnation test: done once every one of the last max(3, j/8) terms falls
/// below `tol * |partial|` (absolute `tol` while the partial sum is zero).
///
/// The largest of them is first scaled by the tail factor 1/(1 - r), r = |t_j/t_{j-1}|,
/// capped at [`TAIL_CAP`]. Geometric and faster series are barely affected;
/// for algebraically decaying terms t_j ~ j^-s the factor is about j/s, which
/// is the size of the neglected tail relative to the last term.
///
/// With a peak floor f the bound is `tol * max(|partial|, f * peak)`, where
/// peak is the largest term seen; this keeps heavily cancelling sums from
/// chasing rounding noise in the partial sum.

/// Largest tail factor applied by [`Accumulator`].
pub const TAIL_CAP: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct Accumulator<T> {
    tol: f64,
    acc: Option<T>,
    prev: f64,
    terms: usize,
    last: f64,
    peak: f64,
    floor: f64,
    rate: Option<f64>,
    // (index, magnitude) with decreasing magnitudes: max over the window
    recent: VecDeque<(usize, f64)>,
}

impl<T: Field> Accumulator<T> {
    pub fn new(tol: f64) -> Self {
        Accumulator {
            tol,
            acc: None,
            prev: 0.0,
            terms: 0,
            last: 0.0,
            peak: 0.0,
            floor: 0.0,
            rate: None,
            recent: VecDeque::new(),
        }
    }

    pub fn with_peak_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Known algebraic rate: terms eventually fall like j^-(sigma+1), so the
    /// tail after j terms is at least about j/sigma of the last one. Guards
    /// against stopping while a faster component still dominates.
    pub fn with_rate(mut self, sigma: Option<f64>) -> Self {
        self.rate = sigma.filter(|s| *s > 0.0);
        self
    }

    /// Adds a term; returns true once the sum has stagnated.
    ///
    /// Smallness is judged on the largest of the last max(3, j/8) terms, so
    /// terms passing through zero cannot end the sum early.
    pub fn push(&mut self, t: T) -> bool {
        self.prev = self.last;
        self.last = t.abs_f64();
        self.terms += 1;
        while self.recent.back().is_some_and(|&(_, m)| m <= self.last) {
            self.recent.pop_back();
        }
        self.recent.push_back((self.terms, self.last));
        let window = (self.terms / 8).max(3);
        while self.recent.front().is_some_and(|&(i, _)| i + window <= self.terms) {
            self.recent.pop_front();
        }
        let envelope = self.recent.front().map_or(0.0, |&(_, m)| m);
        let s = match self.acc.take() {
            Some(a) => a + t,
            None => t,
        };
        self.peak = self.peak.max(self.last);
        let scale = s.abs_f64().max(self.floor * self.peak);
        let bound = if scale > 0.0 { self.tol * scale } else { self.tol };
        let tail = if self.terms < 2 || self.prev == 0.0 || self.last == 0.0 {
            1.0
        } else if self.last < self.prev {
            (1.0 / (1.0 - self.last / self.prev)).min(TAIL_CAP)
        } else {
            TAIL_CAP
        };
        let tail = match self.rate {
            Some(sigma) => tail.max((self.terms as f64 / sigma).min(TAIL_CAP)),
            None => tail,
        };
        self.acc = Some(s);
        self.terms >= 3 && envelope * tail <= bound
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn last_term(&self) -> f64 {
        self.last
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn finish(self) -> Option<Summed<T>> {
        let terms = self.terms;
        let last_term = self.last;
        self.acc.map(|value| Summed {
            value,
            terms,
            last_term,
        })
    }
}

/// Sum `term(0), term(1), ...` with the stagnation test, up to the
/// process-wide cap. `Ok(None)` from `term` marks a terminated series.
pub fn sum_series<T, G>(mut term: G, tol: f64) -> Result<Summed<T>>
where
    T: Field,
    G: FnMut(usize) -> Result<Option<T>>,
{
    let cap = max_terms();
    let mut acc = Accumulator::new(tol);
    for n in 0..cap {
        match term(n)? {
            Some(t) => {
                if acc.push(t) {
                    return Ok(acc.finish().unwrap());
                }
            }
            None => {
                return acc
                    .finish()
                    .ok_or_else(|| Error::Invalid("empty series".into()));
            }
        }
    }
    Err(Error::NoConvergence {
        terms: cap,
        last_term: acc.last_term(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: f64) -> WideC {
        WideC::from_c64(C64::new(x, 0.0), 128)
    }

    #[test]
    fn arithmetic_matches_double() {
        let a = WideC::from_c64(C64::new(1.5, -0.25), 128);
        let b = WideC::from_c64(C64::new(-0.75, 2.0), 128);
        let (ac, bc) = (a.to_c64(), b.to_c64());
        assert!(((a.clone() * b.clone()).to_c64() - ac * bc).norm() < 1e-15);
        assert!(((a.clone() / b.clone()).to_c64() - ac / bc).norm() < 1e-15);
        assert!(((a.clone() - b.clone()).to_c64() - (ac - bc)).norm() < 1e-15);
        assert!(((-a).to_c64() + ac).norm() == 0.0);
    }

    #[test]
    fn rational_conversion() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        let x = WideC::from_rational(&r, 200);
        let three = x.int_like(3);
        let back = x * three - w(1.0);
        assert!(back.log2_abs() < -190.0);
    }

    #[test]
    fn kernels_match_direct_sum() {
        // K_j = 2F1(-j, b; c; 1) = (c-b)_j/(c)_j by Chu-Vandermonde.
        let (b, c) = (0.3, 1.7);
        let ks = kernel_family(
            |p| {
                (
                    vec![WideC::from_c64(C64::new(b, 0.0), p)],
                    vec![WideC::from_c64(C64::new(c, 0.0), p)],
                    None,
                )
            },
            60,
        )
        .unwrap();
        let mut expect = 1.0;
        for (j, k) in ks.iter().enumerate() {
            let got = k.to_c64().re;
            assert!((got - expect).abs() <= 1e-14 * expect.abs(), "j={j}");
            expect *= (c - b + j as f64) / (c + j as f64);
        }
    }

    #[test]
    fn stagnation_stops_geometric_series() {
        let s = sum_series(|n| Ok(Some(C64::new(0.5f64.powi(n as i32), 0.0))), 1e-15).unwrap();
        assert!((s.value.re - 2.0).abs() < 1e-14);
        assert!(s.terms < 70);
    }
}
