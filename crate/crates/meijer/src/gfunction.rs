//! Meijer G^{p,0}_{p,p} and G^{2,p}_{p,p}: series around z = 0 and z = 1,
//! closed forms for p <= 2, the parameter shift, and Mellin transform checks.
//!
//! Complex powers use the principal branch.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::buhring::{check_nondegenerate, cvec, d_auto};
use crate::error::{Error, Result};
use crate::hyper::{check_pfq_domain, pfq_c64};
use crate::norlund::{g_table, inner_first, recurrence_p, ParamSet};
use crate::quad::tanh_sinh;
use crate::report::IdentityReport;
use crate::scalar::{
    gamma_ratio_rg, near_integer_c64, rgamma, rising, sin_pi, Field, Scalar, C64,
};
use crate::series::{weighted_series, Lin, Pascal, Weights};
use crate::wide::{max_terms, Accumulator};

/// |z| at or below this uses the expansion around zero.
pub const DISPATCH_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Center {
    Zero,
    One,
}

/// z^{z_power} (1-z)^{one_minus_z_power}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prefactor {
    pub z_power: Scalar,
    pub one_minus_z_power: Scalar,
}

/// prefactor * sum_n coefficients[n] x^n with x = z or 1 - z.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesExpansion {
    pub center: Center,
    pub prefactor: Prefactor,
    pub coefficients: Vec<Scalar>,
    pub validity: String,
    pub anchor_index: usize,
}

fn c1() -> C64 {
    C64::new(1.0, 0.0)
}

fn c0() -> C64 {
    C64::new(0.0, 0.0)
}

/// x^e, with 0^0 = 1.
fn cpow(x: C64, e: C64) -> C64 {
    if e == c0() {
        c1()
    } else if x == c0() {
        if e.re > 0.0 {
            c0()
        } else {
            C64::new(f64::INFINITY, 0.0)
        }
    } else {
        x.powc(e)
    }
}

impl SeriesExpansion {
    pub fn eval(&self, z: C64) -> C64 {
        self.eval_split(z, c1() - z)
    }

    /// As [`SeriesExpansion::eval`] with 1 - z supplied separately, for z
    /// close to 1.
    pub fn eval_split(&self, z: C64, w: C64) -> C64 {
        let x = match self.center {
            Center::One => w,
            Center::Zero => z,
        };
        let mut s = c0();
        for c in self.coefficients.iter().rev() {
            s = s * x + c.to_c64();
        }
        s * cpow(z, self.prefactor.z_power.to_c64()) * cpow(w, self.prefactor.one_minus_z_power.to_c64())
    }
}

/// Which representation produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    OutsideDisk,
    NearZero,
    NearOne,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GValue {
    pub value: C64,
    pub terms: usize,
    pub regime: Regime,
}

fn int_psi(params: &ParamSet) -> Option<usize> {
    match params.psi_p().near_integer() {
        Some(n) if n <= 0 => Some((-n) as usize),
        _ => None,
    }
}

/// The expansion of G^{p,0}_{p,p} around z = 1 anchored at a_k, truncated
/// after N + 1 coefficients.
pub fn gp0pp_near1(params: &ParamSet, k: usize, n: usize) -> Result<SeriesExpansion> {
    params.check_index(k)?;
    let ak = params.a()[k - 1].clone();
    let validity = "|1-z|<1".to_string();
    if let Some(l) = int_psi(params) {
        let g = g_table(params, k, n + l + 1)?.values;
        let mut fact = ak.one_like();
        let mut coefficients = Vec::with_capacity(n + 1);
        for i in 0..=n {
            if i > 0 {
                fact = fact * ak.int_like(i as i64);
            }
            coefficients.push(g[i + l + 1].clone() / fact.clone());
        }
        return Ok(SeriesExpansion {
            center: Center::One,
            prefactor: Prefactor {
                z_power: ak.clone(),
                one_minus_z_power: ak.zero_like(),
            },
            coefficients,
            validity,
            anchor_index: k,
        });
    }
    let psi = params.psi_p().clone();
    let g = g_table(params, k, n)?.values;
    let rg = rgamma(psi.to_c64());
    let coefficients = g
        .iter()
        .enumerate()
        .map(|(i, gi)| Scalar::Float(gi.to_c64() * rg / rising(&psi.to_c64(), i)))
        .collect();
    Ok(SeriesExpansion {
        center: Center::One,
        prefactor: Prefactor {
            z_power: ak,
            one_minus_z_power: psi.clone() - psi.one_like(),
        },
        coefficients,
        validity,
        anchor_index: k,
    })
}

/// Coefficients of the expansion at 1 in double precision, grown on demand.
struct Near1 {
    a: Vec<C64>,
    b: Vec<C64>,
    k: usize,
    psi: C64,
    int_l: Option<usize>,
    coeffs: Vec<C64>,
}

impl Near1 {
    fn new(params: &ParamSet, k: usize) -> Self {
        let mut a = cvec(params.a());
        // anchor at the last slot so the recurrence index is fixed
        a.swap(k, params.p() - 1);
        Near1 {
            a,
            b: cvec(params.b()),
            k: params.p() - 1,
            psi: params.psi_p().to_c64(),
            int_l: int_psi(params),
            coeffs: Vec::new(),
        }
    }

    fn ensure(&mut self, n: usize) -> Result<()> {
        if self.coeffs.len() > n {
            return Ok(());
        }
        let extra = self.int_l.map_or(0, |l| l + 1);
        let g = recurrence_p(&self.a, &self.b, n + extra, &inner_first);
        self.coeffs = match self.int_l {
            Some(l) => {
                let mut fact = 1.0;
                (0..=n)
                    .map(|i| {
                        if i > 0 {
                            fact *= i as f64;
                        }
                        g[i + l + 1] / fact
                    })
                    .collect()
            }
            None => {
                let mut poch = rgamma(self.psi);
                let mut out = Vec::with_capacity(n + 1);
                for (i, gi) in g.iter().enumerate() {
                    out.push(gi * poch);
                    poch /= self.psi + i as f64;
                }
                out
            }
        };
        Ok(())
    }

    fn eval(&mut self, z: C64, w: C64, tol: f64) -> Result<GValue> {
        let ak = self.a[self.k];
        let pre = match self.int_l {
            Some(_) => cpow(z, ak),
            None => {
                if w == c0() && self.psi.re <= 1.0 {
                    if self.psi == c1() {
                        return Ok(GValue {
                            value: cpow(z, ak) * rgamma(self.psi),
                            terms: 1,
                            regime: Regime::NearOne,
                        });
                    }
                    return Err(Error::ConvergenceViolation(
                        "G^{p,0}_{p,p} is singular at z = 1 when Re(psi_p) < 1".into(),
                    ));
                }
                cpow(z, ak) * cpow(w, self.psi - 1.0)
            }
        };
        let cap = max_terms();
        let mut n = 64.min(cap - 1);
        loop {
            self.ensure(n)?;
            let mut acc = Accumulator::new(tol);
            let mut wp = c1();
            for c in &self.coeffs[..=n] {
                if acc.push(c * wp) {
                    let r = acc.finish().expect("nonempty");
                    return Ok(GValue {
                        value: pre * r.value,
                        terms: r.terms,
                        regime: Regime::NearOne,
                    });
                }
                wp *= w;
            }
            if n + 1 >= cap {
                return Err(Error::NoConvergence {
                    terms: acc.terms(),
                    last_term: acc.last_term(),
                });
            }
            n = (2 * n + 1).min(cap - 1);
        }
    }
}

fn near0_c64(a: &[C64], b: &[C64], z: C64, tol: f64) -> Result<(C64, usize)> {
    // the p terms can cancel; one tighter pass covers the loss
    let (sum, peak, terms) = near0_pass(a, b, z, tol)?;
    let loss = if sum.norm() > 0.0 { peak / sum.norm() } else { 1.0 };
    if loss <= 1.0 || tol <= 1e-16 {
        return Ok((sum, terms));
    }
    let (sum, _, terms) = near0_pass(a, b, z, (tol / (2.0 * loss)).max(1e-16))?;
    Ok((sum, terms))
}

fn near0_pass(a: &[C64], b: &[C64], z: C64, tol: f64) -> Result<(C64, f64, usize)> {
    let mut sum = c0();
    let mut peak = 0.0f64;
    let mut terms = 0;
    for (k, &ak) in a.iter().enumerate() {
        let others: Vec<C64> = (0..a.len()).filter(|&i| i != k).map(|i| a[i]).collect();
        let num: Vec<C64> = others.iter().map(|ai| ai - ak).collect();
        let den: Vec<C64> = b.iter().map(|bi| bi - ak).collect();
        let w = gamma_ratio_rg(&num, &den)?;
        if w == c0() {
            continue;
        }
        let up: Vec<C64> = b.iter().map(|bi| 1.0 - bi + ak).collect();
        let lo: Vec<C64> = others.iter().map(|ai| 1.0 - ai + ak).collect();
        check_pfq_domain(&up, &lo, z)?;
        let f = pfq_c64(&up, &lo, z, tol)?;
        terms = terms.max(f.terms);
        let t = cpow(z, ak) * w * f.value;
        peak = peak.max(t.norm());
        sum += t;
    }
    Ok((sum, peak, terms))
}

/// G^{p,0}_{p,p} for |z| < 1 as a sum of p hypergeometric series at z.
pub fn gp0pp_near0(params: &ParamSet, z: &Scalar, tol: f64) -> Result<Scalar> {
    let zc = z.to_c64();
    if zc.norm() >= 1.0 {
        return Err(Error::ConvergenceViolation(format!(
            "the expansion at zero needs |z| < 1, got |z| = {}",
            zc.norm()
        )));
    }
    check_nondegenerate(params, false)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    Ok(Scalar::Float(near0_c64(&a, &b, zc, tol)?.0))
}

/// Reusable evaluator of G^{p,0}_{p,p}; keeps the coefficients at z = 1.
pub struct Gp0Evaluator {
    a: Vec<C64>,
    b: Vec<C64>,
    degenerate: bool,
    near1: Near1,
    tol: f64,
}

impl Gp0Evaluator {
    pub fn new(params: &ParamSet, tol: f64) -> Self {
        Gp0Evaluator {
            a: cvec(params.a()),
            b: cvec(params.b()),
            degenerate: check_nondegenerate(params, false).is_err(),
            near1: Near1::new(params, 0),
            tol,
        }
    }

    /// Value at z; `w` must equal 1 - z (pass it exactly when z is close
    /// to 1).
    pub fn eval(&mut self, z: C64, w: C64) -> Result<GValue> {
        let r = z.norm();
        if r > 1.0 {
            return Ok(GValue {
                value: c0(),
                terms: 0,
                regime: Regime::OutsideDisk,
            });
        }
        if r == 0.0 {
            return Err(Error::Invalid("z must be nonzero".into()));
        }
        let near1_ok = w.norm() < 1.0;
        if r == 1.0 && !near1_ok {
            return Err(Error::ConvergenceViolation(
                "|z| = 1 is supported only within |1 - z| < 1".into(),
            ));
        }
        if (r <= DISPATCH_RADIUS || !near1_ok) && !self.degenerate {
            let (value, terms) = near0_c64(&self.a, &self.b, z, self.tol)?;
            return Ok(GValue {
                value,
                terms,
                regime: Regime::NearZero,
            });
        }
        if !near1_ok {
            return Err(Error::DegenerateParameters(
                "a-differences are integers and |1 - z| >= 1".into(),
            ));
        }
        self.near1.eval(z, w, self.tol)
    }
}

/// G^{p,0}_{p,p}(z): zero for |z| > 1, otherwise the series at 0 or at 1.
pub fn gp0pp_eval(params: &ParamSet, z: &Scalar, tol: f64) -> Result<Scalar> {
    let zc = z.to_c64();
    if zc.norm() > 1.0 {
        return Ok(z.zero_like());
    }
    Ok(Scalar::Float(gp0pp_eval_detail(params, zc, tol)?.value))
}

pub fn gp0pp_eval_detail(params: &ParamSet, z: C64, tol: f64) -> Result<GValue> {
    Gp0Evaluator::new(params, tol).eval(z, c1() - z)
}

/// G^{p,0}_{p,p} from the expansion at 1 regardless of |z|, for overlap
/// checks.
pub fn gp0pp_near1_value(params: &ParamSet, k: usize, z: &Scalar, tol: f64) -> Result<Scalar> {
    params.check_index(k)?;
    let zc = z.to_c64();
    let w = c1() - zc;
    if w.norm() >= 1.0 {
        return Err(Error::ConvergenceViolation("the expansion at one needs |1 - z| < 1".into()));
    }
    Ok(Scalar::Float(Near1::new(params, k - 1).eval(zc, w, tol)?.value))
}

/// The expansion of G^{2,p}_{p,p}(z | b; a_k, a_s, a_[k,s]) in powers of
/// 1 - z, anchored at a_s.
pub fn g2ppp_near1(
    params: &ParamSet,
    k: usize,
    s: usize,
    n: usize,
    tol: f64,
) -> Result<SeriesExpansion> {
    let d = d_auto(params, k, s, n, tol)?;
    let a_s = params.a()[s - 1].clone();
    Ok(SeriesExpansion {
        center: Center::One,
        prefactor: Prefactor {
            one_minus_z_power: a_s.zero_like(),
            z_power: a_s,
        },
        coefficients: d.values,
        validity: format!("|1-z|<1 and Re(1-b_i+a_{})>0 for i>=3", s),
        anchor_index: s,
    })
}

pub(crate) fn inner_tol(tol: f64) -> f64 {
    (tol * 1e-2).clamp(1e-15, 1e-10)
}

/// G^{2,p}_{p,p} at z from the D expansion, growing N until the tail is
/// below tol.
pub fn g2ppp_eval_detail(
    params: &ParamSet,
    k: usize,
    s: usize,
    z: C64,
    tol: f64,
) -> Result<GValue> {
    let w = c1() - z;
    if w.norm() >= 1.0 {
        return Err(Error::ConvergenceViolation("the D expansion needs |1 - z| < 1".into()));
    }
    let a_s = params.a()[s - 1].to_c64();
    let mut n = 16usize;
    loop {
        let d = d_auto(params, k, s, n, inner_tol(tol))?;
        let mut acc = Accumulator::new(tol);
        let mut wp = c1();
        for v in &d.values {
            if acc.push(v.to_c64() * wp) {
                let r = acc.finish().expect("nonempty");
                return Ok(GValue {
                    value: cpow(z, a_s) * r.value,
                    terms: r.terms,
                    regime: Regime::NearOne,
                });
            }
            wp *= w;
        }
        if n >= max_terms() {
            return Err(Error::NoConvergence {
                terms: acc.terms(),
                last_term: acc.last_term(),
            });
        }
        n = (2 * n + 1).min(max_terms());
    }
}

pub fn g2ppp_eval(params: &ParamSet, k: usize, s: usize, z: &Scalar, tol: f64) -> Result<Scalar> {
    Ok(Scalar::Float(g2ppp_eval_detail(params, k, s, z.to_c64(), tol)?.value))
}

/// The four expansions of G^{2,p}_{p,p} in terminating hypergeometric
/// polynomials of z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyVariant {
    V520,
    V522,
    V523,
    V531,
}

impl PolyVariant {
    pub const ALL: [PolyVariant; 4] = [
        PolyVariant::V520,
        PolyVariant::V522,
        PolyVariant::V523,
        PolyVariant::V531,
    ];

    /// First b index (0-based) that enters the convergence condition.
    fn first_checked(self) -> usize {
        match self {
            PolyVariant::V520 => 2,
            PolyVariant::V522 | PolyVariant::V523 => 1,
            PolyVariant::V531 => 0,
        }
    }
}

impl FromStr for PolyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v520" => Ok(PolyVariant::V520),
            "v522" => Ok(PolyVariant::V522),
            "v523" => Ok(PolyVariant::V523),
            "v531" => Ok(PolyVariant::V531),
            _ => Err(Error::Invalid(format!("unknown variant {}", s))),
        }
    }
}

/// G^{2,p}_{p,p}(z | b; a_k, a_s, a_[k,s]) by one of the polynomial
/// expansions.
pub fn g2ppp_polyseries(
    params: &ParamSet,
    k: usize,
    s: usize,
    z: &Scalar,
    variant: PolyVariant,
    tol: f64,
) -> Result<Scalar> {
    params.check_index(k)?;
    params.check_index(s)?;
    if k == s {
        return Err(Error::Invalid("G^{2,p} needs k != s".into()));
    }
    let p = params.p();
    if p < 2 {
        return Err(Error::UnsupportedOrder(p));
    }
    let zc = z.to_c64();
    if (c1() - zc).norm() >= 1.0 {
        return Err(Error::ConvergenceViolation("the polynomial expansions need |z - 1| < 1".into()));
    }
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let (k, s) = (k - 1, s - 1);
    let (ak, asv) = (a[k], a[s]);
    for (i, bi) in b.iter().enumerate().skip(variant.first_checked()) {
        if (1.0 - bi + asv).re <= 0.0 {
            return Err(Error::ConvergenceViolation(format!(
                "Re(1 - b_{} + a_{}) must be positive for {:?}",
                i + 1,
                s + 1,
                variant
            )));
        }
    }
    let rest: Vec<C64> = (0..p).filter(|&i| i != k && i != s).map(|i| a[i]).collect();
    let shifted = |x: C64, base: C64| Lin::of(&[c1(), -x, base]);
    let one = || Lin::of(&[c1()]);
    let gb: Vec<C64> = b.iter().map(|bi| 1.0 - bi + ak).collect();
    let grest: Vec<C64> = rest.iter().map(|ai| 1.0 - ai + ak).collect();
    let lo_rest: Vec<Lin> = rest.iter().map(|&ai| shifted(ai, ak)).collect();
    let up_from = |from: usize| -> Vec<Lin> { b[from..].iter().map(|&bi| shifted(bi, ak)).collect() };
    let (mut kern, weights, pre) = match variant {
        PolyVariant::V520 => {
            let e = Lin::of(&[C64::new(2.0, 0.0), ak, asv, -b[0], -b[1]]);
            let w = Weights {
                num: vec![shifted(b[0], ak), shifted(b[1], ak)],
                den: vec![e, one()],
                ..Default::default()
            };
            let mut num = gb.clone();
            num.push(1.0 - b[0] + asv);
            num.push(1.0 - b[1] + asv);
            let mut den = grest.clone();
            den.push(2.0 + ak + asv - b[0] - b[1]);
            let pre = gamma_ratio_rg(&num, &den)?;
            (Pascal::new(up_from(2), lo_rest), w, pre)
        }
        PolyVariant::V522 => {
            let w = Weights {
                init_den: vec![shifted(b[0], asv)],
                num: vec![shifted(b[0], ak)],
                den: vec![Lin::of(&[C64::new(2.0, 0.0), -b[0], asv])],
                ..Default::default()
            };
            let mut num = gb.clone();
            num.push(1.0 - ak + asv);
            let pre = gamma_ratio_rg(&num, &grest)?;
            let mut lo = vec![one()];
            lo.extend(lo_rest);
            (Pascal::new(up_from(1), lo), w, pre)
        }
        PolyVariant::V523 => {
            let w = Weights {
                init_den: vec![shifted(b[0], ak)],
                num: vec![shifted(asv, ak), shifted(b[0], ak)],
                den: vec![one(), Lin::of(&[C64::new(2.0, 0.0), -b[0], ak])],
                ..Default::default()
            };
            let mut num: Vec<C64> = gb[1..].to_vec();
            num.push(1.0 - b[0] + asv);
            let pre = gamma_ratio_rg(&num, &grest)?;
            let mut lo = lo_rest;
            lo.push(shifted(asv, ak));
            (Pascal::new(up_from(1), lo), w, pre)
        }
        PolyVariant::V531 => {
            let w = Weights {
                num: vec![shifted(asv, ak)],
                den: vec![Lin::of(&[C64::new(2.0, 0.0)])],
                ..Default::default()
            };
            let mut den = grest.clone();
            den.push(1.0 - asv + ak);
            let d = ak - asv;
            let ratio = if d.norm() < 1e-300 { c1() } else { PI * d / sin_pi(d) };
            let pre = ratio * gamma_ratio_rg(&gb, &den)?;
            let mut lo = vec![one()];
            lo.extend(lo_rest);
            lo.push(shifted(asv, ak));
            (Pascal::new(up_from(0), lo), w, pre)
        }
    };
    kern = kern.with_x(zc);
    let sum = weighted_series(&mut kern, &weights, 0, inner_tol(tol))?;
    Ok(Scalar::Float(cpow(zc, ak) * pre * sum[0].value))
}

/// G^{1,0}_{1,1}(z | b; a) = z^a (1-z)_+^{b-a-1}/Gamma(b-a).
pub fn g10_closed(a: &Scalar, b: &Scalar, z: &Scalar) -> Result<Scalar> {
    let zc = z.to_c64();
    if zc.norm() > 1.0 {
        return Ok(z.zero_like());
    }
    let e = b.to_c64() - a.to_c64();
    Ok(Scalar::Float(cpow(zc, a.to_c64()) * cpow(1.0 - zc, e - 1.0) * rgamma(e)))
}

fn check_order(params: &ParamSet, p: usize) -> Result<()> {
    if params.p() != p {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    Ok(())
}

/// G^{2,0}_{2,2} via 2F1(b1-a1, b2-a1; psi; 1-z).
pub fn g20_closed(params: &ParamSet, z: &Scalar, tol: f64) -> Result<Scalar> {
    check_order(params, 2)?;
    let zc = z.to_c64();
    if zc.norm() > 1.0 {
        return Ok(z.zero_like());
    }
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let psi = params.psi_p().to_c64();
    let w = 1.0 - zc;
    let f = pfq_c64(&[b[0] - a[0], b[1] - a[0]], &[psi], w, tol)?.value;
    Ok(Scalar::Float(cpow(zc, a[1]) * cpow(w, psi - 1.0) * rgamma(psi) * f))
}

/// G^{2,2}_{2,2} via 2F1(1+a1-b1, 1+a1-b2; 2+a1+a2-b1-b2; 1-z).
pub fn g22_closed(params: &ParamSet, z: &Scalar, tol: f64) -> Result<Scalar> {
    check_order(params, 2)?;
    let zc = z.to_c64();
    let w = 1.0 - zc;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let c = 2.0 + a[0] + a[1] - b[0] - b[1];
    let up = [1.0 + a[0] - b[0], 1.0 + a[0] - b[1]];
    check_pfq_domain(&up, &[c], w)?;
    let g = gamma_ratio_rg(
        &[up[0], up[1], 1.0 + a[1] - b[0], 1.0 + a[1] - b[1]],
        &[c],
    )?;
    Ok(Scalar::Float(g * cpow(zc, a[0]) * pfq_c64(&up, &[c], w, tol)?.value))
}

/// (a + alpha, b + alpha), so that z^alpha G(z|a,b) = G(z|a+alpha,b+alpha).
pub fn shift_parameters(params: &ParamSet, alpha: &Scalar) -> ParamSet {
    let sh = |v: &[Scalar]| v.iter().map(|x| x.clone() + alpha.clone()).collect();
    ParamSet::new(sh(params.a()), sh(params.b())).expect("shape preserved")
}

/// q(s) = sum_j g_p^k(m-j) (s+a_k-j)_j for psi_p = -m.
pub fn mellin_correction_polynomial(params: &ParamSet, k: usize, s: &Scalar) -> Result<Scalar> {
    params.check_index(k)?;
    let m = int_psi(params).ok_or_else(|| {
        Error::DegenerateParameters(format!(
            "psi_p = {} is not a nonpositive integer",
            params.psi_p()
        ))
    })?;
    let g = g_table(params, k, m)?.values;
    let ak = &params.a()[k - 1];
    let mut q = s.zero_like();
    for j in 0..=m {
        let base = s.clone() + ak.clone() - s.int_like(j as i64);
        q = q + g[m - j].clone() * rising(&base, j);
    }
    Ok(q)
}

/// Target accuracy of the quadrature versus the report tolerance.
const MELLIN_TOL_FACTOR: f64 = 100.0;

/// int_0^1 x^{s-1} G^{p,0}_{p,p}(x) dx against Gamma(a+s)/Gamma(b+s), minus
/// q(s) when psi_p = -m. The report tolerance is 100 quad_tol.
pub fn mellin_check(params: &ParamSet, s: &Scalar, quad_tol: f64) -> Result<IdentityReport> {
    mellin_check_with(params, s, quad_tol, quad_tol * MELLIN_TOL_FACTOR)
}

pub fn mellin_check_with(
    params: &ParamSet,
    s: &Scalar,
    quad_tol: f64,
    tol: f64,
) -> Result<IdentityReport> {
    let sc = s.to_c64();
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    if let Some(i) = a.iter().position(|ai| (ai + sc).re <= 0.0) {
        return Err(Error::ConvergenceViolation(format!(
            "Re(s + a_{}) must be positive",
            i + 1
        )));
    }
    let m = int_psi(params);
    if m.is_none() && params.psi_p().to_c64().re <= 0.0 {
        return Err(Error::ConvergenceViolation(
            "the Mellin transform needs Re(psi_p) > 0 or psi_p in {0, -1, ...}".into(),
        ));
    }
    let mut ev = Gp0Evaluator::new(params, (quad_tol * 1e-4).max(1e-16));
    let q = tanh_sinh(
        |x, w| {
            let xc = C64::new(x, 0.0);
            Ok(cpow(xc, sc - 1.0) * ev.eval(xc, C64::new(w, 0.0))?.value)
        },
        quad_tol,
    )?;
    let num: Vec<C64> = a.iter().map(|ai| ai + sc).collect();
    let den: Vec<C64> = b.iter().map(|bi| bi + sc).collect();
    let ratio = gamma_ratio_rg(&num, &den)?;
    let corr = match m {
        Some(_) => mellin_correction_polynomial(params, 1, s)?.to_c64(),
        None => c0(),
    };
    let rhs = ratio - corr;
    let scale = ratio.norm().max(corr.norm());
    let mut extra = json!({ "a": params.a(), "b": params.b(), "s": s, "quad_estimate": q.estimate });
    if let Some(m) = m {
        extra["m"] = json!(m);
    }
    Ok(IdentityReport::compare(
        "mellin",
        extra,
        Scalar::Float(q.value),
        Scalar::Float(rhs),
        scale,
        tol,
    ))
}

/// True when psi_p is (numerically) an integer.
pub fn psi_is_integer(params: &ParamSet) -> bool {
    near_integer_c64(params.psi_p().to_c64()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fl(a: &[f64], b: &[f64]) -> ParamSet {
        ParamSet::new(
            a.iter().map(|&x| Scalar::real(x)).collect(),
            b.iter().map(|&x| Scalar::real(x)).collect(),
        )
        .unwrap()
    }

    fn rel(x: C64, y: C64) -> f64 {
        (x - y).norm() / x.norm().max(y.norm()).max(1e-300)
    }

    #[test]
    fn p1_closed_form() {
        let p = ParamSet::new(vec![Scalar::int(0)], vec![Scalar::int(2)]).unwrap();
        let v = gp0pp_eval(&p, &Scalar::real(0.5), 1e-15).unwrap().to_c64();
        assert!((v - 0.5).norm() < 1e-15, "{}", v);
        let c = g10_closed(&Scalar::int(0), &Scalar::int(2), &Scalar::real(0.5)).unwrap();
        assert!((c.to_c64() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn zero_outside_disk() {
        let p = fl(&[0.1, 0.4], &[1.3, 0.9]);
        let v = gp0pp_eval(&p, &Scalar::real(2.0), 1e-12).unwrap();
        assert_eq!(v.to_c64(), C64::new(0.0, 0.0));
    }

    #[test]
    fn regimes_agree_with_closed_p2() {
        let p = fl(&[0.1, 0.4], &[1.3, 0.9]);
        for z in [0.3, 0.5, 0.7, 0.9] {
            let zc = Scalar::real(z);
            let closed = g20_closed(&p, &zc, 1e-16).unwrap().to_c64();
            let n0 = gp0pp_near0(&p, &zc, 1e-16).unwrap().to_c64();
            let n1 = gp0pp_near1_value(&p, 2, &zc, 1e-16).unwrap().to_c64();
            assert!(rel(closed, n0) < 1e-12, "z={} {} {}", z, closed, n0);
            assert!(rel(closed, n1) < 1e-12, "z={} {} {}", z, closed, n1);
        }
    }

    #[test]
    fn anchor_independence() {
        let p = fl(&[0.1, 0.4, -0.3], &[1.3, 0.9, 0.45]);
        let z = Scalar::real(0.8);
        let v1 = gp0pp_near1_value(&p, 1, &z, 1e-16).unwrap().to_c64();
        let v3 = gp0pp_near1_value(&p, 3, &z, 1e-16).unwrap().to_c64();
        let e = gp0pp_near1(&p, 2, 60).unwrap().eval(C64::new(0.8, 0.0));
        assert!(rel(v1, v3) < 1e-12);
        assert!(rel(v1, e) < 1e-12);
    }

    #[test]
    fn g22_matches_d_expansion_and_polyseries() {
        let p = fl(&[0.15, 0.55], &[-5.4, -5.65]);
        let z = Scalar::real(0.8);
        let closed = g22_closed(&p, &z, 1e-16).unwrap().to_c64();
        let d = g2ppp_eval(&p, 1, 2, &z, 1e-14).unwrap().to_c64();
        assert!(rel(closed, d) < 1e-11, "{} {}", closed, d);
        for v in PolyVariant::ALL {
            let ps = g2ppp_polyseries(&p, 2, 1, &z, v, 1e-14).unwrap().to_c64();
            assert!(rel(closed, ps) < 1e-10, "{:?} {} {}", v, closed, ps);
        }
    }

    #[test]
    fn polyseries_variants_agree_p3() {
        let p = fl(&[0.2, 0.65, -0.1], &[-5.3, -5.45, -5.2]);
        let z = Scalar::real(0.9);
        let d = g2ppp_eval(&p, 1, 2, &z, 1e-13).unwrap().to_c64();
        for v in PolyVariant::ALL {
            let ps = g2ppp_polyseries(&p, 1, 2, &z, v, 1e-13);
            match ps {
                Ok(ps) => assert!(rel(d, ps.to_c64()) < 1e-9, "{:?} {} {}", v, d, ps),
                Err(e) => assert!(matches!(e, Error::ConvergenceViolation(_)), "{:?}", e),
            }
        }
    }

    #[test]
    fn shift_identity() {
        let p = fl(&[0.1, 0.4, -0.3], &[1.3, 0.9, 0.45]);
        let alpha = Scalar::ratio(1, 3);
        let q = shift_parameters(&p, &alpha);
        let z = 0.7;
        let lhs = C64::new(z, 0.0).powf(1.0 / 3.0)
            * gp0pp_eval(&p, &Scalar::real(z), 1e-16).unwrap().to_c64();
        let rhs = gp0pp_eval(&q, &Scalar::real(z), 1e-16).unwrap().to_c64();
        assert!(rel(lhs, rhs) < 1e-12);
        assert_eq!(q.psi_p().to_c64(), p.psi_p().to_c64());
    }

    #[test]
    fn mellin_p1_and_p2() {
        let p = ParamSet::new(vec![Scalar::int(0)], vec![Scalar::int(2)]).unwrap();
        let r = mellin_check(&p, &Scalar::int(1), 1e-10).unwrap();
        assert!(r.passed(), "{:?}", r);
        let p = fl(&[0.3, 0.1], &[1.0, 0.9]);
        let r = mellin_check(&p, &Scalar::real(0.8), 1e-10).unwrap();
        assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn mellin_integer_psi() {
        // psi = 0 and psi = -1
        for bl in [Scalar::ratio(-1, 5), Scalar::ratio(-6, 5)] {
            let p = ParamSet::new(
                vec![Scalar::ratio(1, 2), Scalar::ratio(1, 5), Scalar::ratio(3, 10)],
                vec![Scalar::ratio(3, 5), Scalar::ratio(3, 5), bl],
            )
            .unwrap();
            let r = mellin_check(&p, &Scalar::ratio(7, 10), 1e-10).unwrap();
            assert!(r.passed(), "{:?}", r);
            let qs: Vec<Scalar> = (1..=3)
                .map(|k| mellin_correction_polynomial(&p, k, &Scalar::ratio(7, 10)).unwrap())
                .collect();
            assert_eq!(qs[0], qs[1]);
            assert_eq!(qs[0], qs[2]);
        }
    }

    #[test]
    fn correction_polynomial_m0_is_one() {
        let p = ParamSet::new(
            vec![Scalar::ratio(1, 2), Scalar::ratio(1, 5)],
            vec![Scalar::ratio(1, 5), Scalar::ratio(1, 2)],
        )
        .unwrap();
        let q = mellin_correction_polynomial(&p, 2, &Scalar::int(3)).unwrap();
        assert_eq!(q, Scalar::int(1));
    }
}
