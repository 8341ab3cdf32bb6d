//! Generalized hypergeometric series, the Gauss connection formula, and the
//! Bühring expansion of pF(p-1) around z = 1 with its finite-sum reductions.

use serde_json::json;

use crate::buhring::{f_from_g, h_multisum};
use crate::error::{Error, Result};
use crate::norlund::{g_table, young_pp, ParamSet};
use crate::report::IdentityReport;
use crate::scalar::{gamma_ratio_rg, near_integer_c64, rising, Field, Scalar, C64};
use crate::wide::{sum_series, Summed};

/// Sum_{i=0}^n prod(up)_i/prod(lo)_i x^i/i! (x = 1 when `None`). Exact for
/// exact inputs.
pub fn terminating_sum<T: Field>(up: &[T], lo: &[T], x: Option<&T>, n: usize) -> Result<T> {
    let like = up
        .first()
        .or(lo.first())
        .ok_or_else(|| Error::Invalid("empty parameter lists".into()))?;
    let mut s = like.one_like();
    let mut t = like.one_like();
    for i in 0..n {
        let mut num = t;
        for u in up {
            num = num * u.add_int(i as i64);
        }
        if let Some(x) = x {
            num = num * x.clone();
        }
        let mut den = like.int_like(i as i64 + 1);
        for l in lo {
            let li = l.add_int(i as i64);
            if li.is_zero_value() {
                return Err(Error::Pole(format!(
                    "lower parameter {} reaches zero at term {}",
                    l.to_c64(),
                    i
                )));
            }
            den = den * li;
        }
        t = num / den;
        s = s + t.clone();
    }
    Ok(s)
}

/// Parameters of a pFq series.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperSpec {
    pub upper: Vec<Scalar>,
    pub lower: Vec<Scalar>,
    /// Degree of the polynomial when some upper parameter is a nonpositive
    /// integer.
    pub terminating_index: Option<usize>,
}

impl HyperSpec {
    pub fn new(upper: Vec<Scalar>, lower: Vec<Scalar>) -> Result<Self> {
        let terminating_index = upper
            .iter()
            .filter_map(|u| match u.near_integer() {
                Some(n) if n <= 0 => Some((-n) as usize),
                _ => None,
            })
            .min();
        for l in &lower {
            if let Some(m) = l.near_integer() {
                if m <= 0 {
                    let hit = (-m) as usize;
                    if terminating_index.is_none_or(|n| hit < n) {
                        return Err(Error::Pole(format!(
                            "lower parameter {} is a nonpositive integer",
                            l
                        )));
                    }
                }
            }
        }
        Ok(HyperSpec {
            upper,
            lower,
            terminating_index,
        })
    }
}

/// Convergent pFq in double precision with stagnation stopping.
pub fn pfq_c64(up: &[C64], lo: &[C64], z: C64, tol: f64) -> Result<Summed<C64>> {
    let mut t = C64::new(1.0, 0.0);
    sum_series(
        |i| {
            if i == 0 {
                return Ok(Some(t));
            }
            let k = (i - 1) as f64;
            let mut r = z / (k + 1.0);
            for u in up {
                r *= u + k;
            }
            for l in lo {
                let v = l + k;
                if v.norm() == 0.0 {
                    return Err(Error::Pole(format!("lower parameter {} hits zero", l)));
                }
                r /= v;
            }
            t *= r;
            Ok(Some(t))
        },
        tol,
    )
}

/// Checks the convergence region of a non-terminating pFq at z.
pub fn check_pfq_domain(up: &[C64], lo: &[C64], z: C64) -> Result<()> {
    if up.len() > lo.len() + 1 {
        return Err(Error::ConvergenceViolation(
            "more than q+1 upper parameters".into(),
        ));
    }
    if up.len() == lo.len() + 1 {
        let r = z.norm();
        if (r - 1.0).abs() < 1e-14 {
            if (z - 1.0).norm() > 1e-14 {
                return Err(Error::ConvergenceViolation(
                    "on the unit circle only z = 1 is supported".into(),
                ));
            }
            let excess: C64 = lo.iter().sum::<C64>() - up.iter().sum::<C64>();
            if excess.re <= 0.0 {
                return Err(Error::ConvergenceViolation(format!(
                    "parameter excess {} has nonpositive real part at z = 1",
                    excess
                )));
            }
        } else if r > 1.0 {
            return Err(Error::ConvergenceViolation(format!("|z| = {} > 1", r)));
        }
    }
    Ok(())
}

pub fn eval_pfq(spec: &HyperSpec, z: &Scalar, tol: f64) -> Result<Scalar> {
    if let Some(n) = spec.terminating_index {
        return terminating_sum(&spec.upper, &spec.lower, Some(z), n);
    }
    let up: Vec<C64> = spec.upper.iter().map(|v| v.to_c64()).collect();
    let lo: Vec<C64> = spec.lower.iter().map(|v| v.to_c64()).collect();
    let zc = z.to_c64();
    check_pfq_domain(&up, &lo, zc)?;
    Ok(Scalar::Float(pfq_c64(&up, &lo, zc, tol)?.value))
}

fn c(s: &Scalar) -> C64 {
    s.to_c64()
}

/// 2F1(a1,a2;b;1-z) against the two-term connection formula at z.
pub fn gauss_connection_residual(
    a1: &Scalar,
    a2: &Scalar,
    b: &Scalar,
    z: &Scalar,
    tol: f64,
) -> Result<IdentityReport> {
    let (x1, x2, y, zc) = (c(a1), c(a2), c(b), c(z));
    if zc.im != 0.0 || zc.re <= 0.0 || zc.re >= 1.0 {
        return Err(Error::Invalid("z must lie in (0, 1)".into()));
    }
    let e = y - x1 - x2;
    if near_integer_c64(e).is_some() {
        return Err(Error::DegenerateParameters(format!("b - a1 - a2 = {} is an integer", e)));
    }
    let stol = (tol * 1e-3).min(1e-14);
    let lhs = pfq_c64(&[x1, x2], &[y], 1.0 - zc, stol)?.value;
    let w1 = gamma_ratio_rg(&[y, e], &[y - x1, y - x2])?;
    let w2 = gamma_ratio_rg(&[y, -e], &[x1, x2])?;
    let t1 = w1 * pfq_c64(&[x1, x2], &[1.0 - e], zc, stol)?.value;
    let t2 = w2 * zc.powc(e) * pfq_c64(&[y - x1, y - x2], &[1.0 + e], zc, stol)?.value;
    let rhs = t1 + t2;
    let scale = t1.norm().max(t2.norm());
    Ok(IdentityReport::compare(
        "gauss",
        json!({"a1": a1, "a2": a2, "b": b, "z": z}),
        Scalar::Float(lhs),
        Scalar::Float(rhs),
        scale,
        tol,
    ))
}

/// The weighted pF(p-1) that the Bühring expansion represents, summed
/// directly: Gamma(1-b+a_s)/Gamma(1-a_[s]+a_s) pF(p-1)(1-b+a_s; 1-a_[s]+a_s; z).
pub fn buhring_lhs(params: &ParamSet, s: usize, z: &Scalar, tol: f64) -> Result<C64> {
    params.check_index(s)?;
    let a: Vec<C64> = params.a().iter().map(c).collect();
    let b: Vec<C64> = params.b().iter().map(c).collect();
    let asv = a[s - 1];
    let up: Vec<C64> = b.iter().map(|bi| 1.0 - bi + asv).collect();
    let lo: Vec<C64> = (0..a.len())
        .filter(|&i| i != s - 1)
        .map(|i| 1.0 - a[i] + asv)
        .collect();
    let w = gamma_ratio_rg(&up, &lo)?;
    let zc = c(z);
    check_pfq_domain(&up, &lo, zc)?;
    Ok(w * pfq_c64(&up, &lo, zc, tol)?.value)
}

/// Right-hand side of the Bühring expansion, truncated after N terms.
pub fn buhring_expansion_eval(
    params: &ParamSet,
    s: usize,
    z: &Scalar,
    n: usize,
    tol: f64,
) -> Result<Scalar> {
    params.check_index(s)?;
    let psi = params.psi_p();
    if psi.near_integer().is_some() {
        return Err(Error::DegenerateParameters(format!(
            "psi_p = {} is an integer",
            psi
        )));
    }
    let w = 1.0 - c(z);
    if w.norm() >= 1.0 {
        return Err(Error::ConvergenceViolation("|1 - z| must be below 1".into()));
    }
    let fp = params.promote();
    let g = g_table(&fp, s, n)?;
    let f = f_from_g(&g, &fp)?;
    let h = h_multisum(&fp, s, n, tol)?;
    let mut sf = C64::new(0.0, 0.0);
    let mut sh = C64::new(0.0, 0.0);
    for k in (0..=n).rev() {
        sf = sf * w + f.values[k].to_c64();
        sh = sh * w + h.values[k].to_c64();
    }
    Ok(Scalar::Float(w.powc(c(psi) - 1.0) * sf + sh))
}

fn report_params(pairs: &[(&str, &Scalar)], n: usize) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (k, v) in pairs {
        m.insert((*k).to_string(), serde_json::to_value(v).unwrap());
    }
    m.insert("n".into(), json!(n));
    serde_json::Value::Object(m)
}

/// Sheppard's transformation of a terminating 3F2 at unit argument.
pub fn sheppard_residual_p3(
    n: usize,
    a1: &Scalar,
    a2: &Scalar,
    b1: &Scalar,
    b2: &Scalar,
) -> Result<IdentityReport> {
    let neg_n = a1.int_like(-(n as i64));
    let lhs = terminating_sum(
        &[neg_n.clone(), a1.clone(), a2.clone()],
        &[b1.clone(), b2.clone()],
        None,
        n,
    )?;
    let den = rising(b2, n);
    if den.is_zero_value() {
        return Err(Error::Pole("(b2)_n vanishes".into()));
    }
    let inner = terminating_sum(
        &[neg_n, b1.clone() - a1.clone(), a2.clone()],
        &[b1.clone(), (a2.clone() - b2.clone()).add_int(1 - n as i64)],
        None,
        n,
    )?;
    let rhs = rising(&(b2.clone() - a2.clone()), n) / den * inner;
    Ok(IdentityReport::compare(
        "sheppard",
        report_params(&[("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)], n),
        lhs,
        rhs,
        0.0,
        0.0,
    ))
}

/// The double-sum transformation that generalizes Sheppard's to p = 4.
#[allow(clippy::too_many_arguments)]
pub fn buhring_p4_residual(
    n: usize,
    a1: &Scalar,
    a2: &Scalar,
    b1: &Scalar,
    b2: &Scalar,
    g1: &Scalar,
    g2: &Scalar,
) -> Result<IdentityReport> {
    let one = a1.one_like();
    let neg_n = a1.int_like(-(n as i64));
    let shifted = (a2.clone() - b2.clone()).add_int(1 - n as i64);
    let b1a1 = b1.clone() - a1.clone();
    let mut lhs = one.zero_like();
    let mut rhs = one.zero_like();
    let mut wl = one.clone();
    let mut wr = one.clone();
    for k in 0..=n {
        if k > 0 {
            let km = k as i64 - 1;
            let kk = one.int_like(k as i64);
            let dl = b1.add_int(km) * b2.add_int(km) * kk.clone();
            let dr = b1.add_int(km) * shifted.add_int(km) * kk;
            if dl.is_zero_value() || dr.is_zero_value() {
                return Err(Error::Pole(format!("lower parameter vanishes at k={}", k)));
            }
            wl = wl * neg_n.add_int(km) * a1.add_int(km) * a2.add_int(km) / dl;
            wr = wr * neg_n.add_int(km) * a2.add_int(km) * b1a1.add_int(km) / dr;
        }
        let up = [one.int_like(-(k as i64)), g1.clone(), g2.clone()];
        lhs = lhs + wl.clone() * terminating_sum(&up, &[a1.clone(), a2.clone()], None, k)?;
        let lo = [a2.clone(), (a1.clone() - b1.clone()).add_int(1 - k as i64)];
        rhs = rhs + wr.clone() * terminating_sum(&up, &lo, None, k)?;
    }
    let den = rising(b2, n);
    if den.is_zero_value() {
        return Err(Error::Pole("(b2)_n vanishes".into()));
    }
    let rhs = rising(&(b2.clone() - a2.clone()), n) / den * rhs;
    Ok(IdentityReport::compare(
        "buhring_p4",
        report_params(
            &[("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2), ("g1", g1), ("g2", g2)],
            n,
        ),
        lhs,
        rhs,
        0.0,
        0.0,
    ))
}

/// Left side of the multiple-series transformation, enumerated directly.
pub fn multiseries_lhs<T: Field>(a: &[T], b: &[T], n: usize) -> T {
    let p = a.len();
    let ps = crate::norlund::psis(a, b);
    let one = a[0].one_like();
    let fact = |d: usize| (1..=d).fold(one.clone(), |f, i| f * one.int_like(i as i64));

    // chain j_0 = 0 <= j_1 <= ... <= j_{p-2} <= n, j_{p-1} = n
    fn rec<T: Field>(
        m: usize,
        chain: &mut Vec<usize>,
        n: usize,
        visit: &mut dyn FnMut(&[usize]),
        depth: usize,
    ) {
        if m > depth {
            visit(chain);
            return;
        }
        let lo = *chain.last().unwrap();
        for j in lo..=n {
            chain.push(j);
            rec::<T>(m + 1, chain, n, visit, depth);
            chain.pop();
        }
    }

    let mut total = one.zero_like();
    let mut visit = |ch: &[usize]| {
        let jp = ch[p - 2];
        let mut full = ch.to_vec();
        full.push(n);
        let sign = if jp % 2 == 0 { 1 } else { -1 };
        let base = ps[p].clone() + a[p - 1].clone() - b[p - 2].clone();
        // one 1/(n - j_{p-2})!: the m = p-1 factor below supplies it
        let mut t = one.int_like(sign) * rising(&base.add_int(jp as i64), n - jp);
        for m in 1..p {
            let d = full[m] - full[m - 1];
            t = t * rising(&ps[m].add_int(full[m - 1] as i64), d) / fact(d);
            if m <= p - 2 {
                t = t * rising(&(b[m - 1].clone() - a[m].clone()), d);
            }
        }
        total = total.clone() + t;
    };
    let mut chain = vec![0usize];
    rec::<T>(1, &mut chain, n, &mut visit, p - 2);
    total
}

pub fn multiseries_transform_residual(params: &ParamSet, n: usize) -> Result<IdentityReport> {
    if params.p() < 3 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    let lhs = multiseries_lhs(params.a(), params.b(), n);
    let rhs = young_pp(params.a(), params.b(), n)[n].clone();
    Ok(IdentityReport::compare(
        "multiseries",
        json!({"params": params, "n": n}),
        lhs,
        rhs,
        0.0,
        0.0,
    ))
}
