//! Bühring coefficients f_p^s(n), h_p^s(n) of pF(p-1) around z = 1 and the
//! coefficients D_n^[k,s] of G^{2,p}_{p,p}.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::norlund::{psis, swap_last, CoeffTable, Kind, Method, ParamSet, Truncation};
use crate::scalar::{gamma_ratio_rg, near_integer_c64, rising, sin_pi, Field, Scalar, C64};
use crate::series::{weighted_series, Delta, KernelSource, Lin, Ones, Pascal, Weights};
use crate::wide::{Summed, WideC};

pub(crate) fn cvec(v: &[Scalar]) -> Vec<C64> {
    v.iter().map(Scalar::to_c64).collect()
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn factorial(n: usize) -> f64 {
    crate::scalar::factorial_f64(n)
}

fn float_table(
    kind: Kind,
    params: &ParamSet,
    index: Vec<usize>,
    method: Method,
    sums: Vec<Summed<C64>>,
    prefactors: Vec<C64>,
) -> CoeffTable {
    let mut t = CoeffTable::new(
        kind,
        params,
        index,
        method,
        sums.iter()
            .zip(&prefactors)
            .map(|(s, p)| Scalar::Float(s.value * p))
            .collect(),
    );
    t.truncation = Some(
        sums.iter()
            .map(|s| Truncation {
                terms: s.terms,
                last_term: s.last_term,
            })
            .collect(),
    );
    t
}

/// f_p^s(n) = Gamma(1-psi)/(psi)_n g_p^s(n).
pub fn f_from_g(gtable: &CoeffTable, params: &ParamSet) -> Result<CoeffTable> {
    if gtable.kind != Kind::G {
        return Err(Error::Invalid("f_from_g needs a g table".into()));
    }
    let psi = params.psi_p().to_c64();
    if let Some(m) = near_integer_c64(psi) {
        if m >= 1 {
            return Err(Error::Pole(format!("Gamma(1 - psi_p) with psi_p = {}", m)));
        }
    }
    let g1 = crate::scalar::gamma(one() - psi)?;
    let mut values = Vec::with_capacity(gtable.values.len());
    let mut poch = one();
    for (n, g) in gtable.values.iter().enumerate() {
        if n > 0 {
            poch *= psi + (n - 1) as f64;
        }
        if poch.norm() == 0.0 {
            return Err(Error::Pole(format!("(psi_p)_{} vanishes", n)));
        }
        values.push(Scalar::Float(g1 / poch * g.to_c64()));
    }
    Ok(CoeffTable::new(
        Kind::F,
        params,
        gtable.index.clone(),
        Method::FromG,
        values,
    ))
}

/// Chain weights W(J)/J!, where W(J) = sum over 0 <= j_1 <= ... <= j_q = J of
/// prod_m (psi_m + j_{m-1})_d/d! (c_m)_d, extended one J at a time. Each level
/// is carried divided by j_m! so nothing overflows for large J.
struct ChainWeights<T> {
    psi: Vec<T>,
    c: Vec<T>,
    /// v[m][j]: partial chains ending at level m with j_m = j (v[0] = delta)
    v: Vec<Vec<T>>,
    /// f[m][i]: current factor for the step from i, advanced as J grows
    f: Vec<Vec<T>>,
    map: fn(T) -> T,
    one: T,
}

impl<T: Field> ChainWeights<T> {
    fn new(psi: Vec<T>, c: Vec<T>, one: T, map: fn(T) -> T) -> Self {
        let q = psi.len();
        ChainWeights {
            psi,
            c,
            v: vec![Vec::new(); q + 1],
            f: vec![Vec::new(); q],
            map,
            one,
        }
    }

    fn len(&self) -> usize {
        self.v[0].len()
    }

    fn push(&mut self) {
        let j = self.len();
        let q = self.psi.len();
        self.v[0].push(if j == 0 {
            self.one.clone()
        } else {
            self.one.zero_like()
        });
        for m in 0..q {
            for i in 0..j {
                let d = j - 1 - i;
                // (psi+i+d)(c+d)/((d+1)(i+d+1))
                let r = self.psi[m].add_int((i + d) as i64) * self.c[m].add_int(d as i64)
                    / self.one.int_like((d as i64 + 1) * ((i + d) as i64 + 1));
                self.f[m][i] = self.f[m][i].clone() * (self.map)(r);
            }
            self.f[m].push(self.one.clone());
            let mut s = self.one.zero_like();
            for i in 0..=j {
                let vi = &self.v[m][i];
                if !vi.is_zero_value() {
                    s = s + vi.clone() * self.f[m][i].clone();
                }
            }
            self.v[m + 1].push(s);
        }
    }

    fn get(&mut self, j: usize) -> T {
        while self.len() <= j {
            self.push();
        }
        self.v[self.psi.len()][j].clone()
    }
}

/// Kernel source over the chain weights; the extended pass rebuilds the
/// chains with enough bits to cover their own cancellation.
struct Chain {
    psi: Vec<Lin>,
    c: Vec<Lin>,
    fast: ChainWeights<C64>,
    abs: ChainWeights<C64>,
    wide: Option<(usize, ChainWeights<WideC>)>,
}

impl Chain {
    fn new(psi: Vec<Lin>, c: Vec<Lin>) -> Self {
        let pc: Vec<C64> = psi.iter().map(|l| l.c64(0)).collect();
        let cc: Vec<C64> = c.iter().map(|l| l.c64(0)).collect();
        Chain {
            fast: ChainWeights::new(pc.clone(), cc.clone(), one(), |z| z),
            abs: ChainWeights::new(pc, cc, one(), |z| C64::new(z.norm(), 0.0)),
            psi,
            c,
            wide: None,
        }
    }
}

impl KernelSource for Chain {
    fn c64(&mut self, jmax: usize) -> Result<Vec<C64>> {
        Ok((0..=jmax).map(|j| self.fast.get(j)).collect())
    }

    fn wide(&mut self, jmax: usize, prec: usize) -> Result<Vec<WideC>> {
        let wp = prec + self.cond(jmax).log2().ceil() as usize + 32;
        let reuse = matches!(&self.wide, Some((p, _)) if *p >= wp);
        if !reuse {
            let psi = self.psi.iter().map(|l| l.wide(0, wp)).collect();
            let c = self.c.iter().map(|l| l.wide(0, wp)).collect();
            let ch = ChainWeights::new(psi, c, WideC::from_c64(one(), wp), |z| z);
            self.wide = Some((wp, ch));
        }
        let ch = &mut self.wide.as_mut().expect("wide chain").1;
        Ok((0..=jmax).map(|j| ch.get(j)).collect())
    }

    fn unreliable(&mut self, jmax: usize) -> bool {
        self.cond(jmax) > CHAIN_COND
    }
}

/// Condition of the double chain weights beyond which they are not trusted.
const CHAIN_COND: f64 = 1e6;

impl Chain {
    /// Largest ratio of the absolute chain sum to the chain sum up to jmax.
    fn cond(&mut self, jmax: usize) -> f64 {
        let mut cond: f64 = 1.0;
        for j in 0..=jmax {
            let w = self.fast.get(j).norm();
            let wa = self.abs.get(j).norm();
            if w > 0.0 {
                cond = cond.max(wa / w);
            } else if wa > 0.0 {
                cond = cond.max(1e16);
            }
        }
        cond
    }
}

/// Parts whose sum is psi_m (b_1..b_m and -a_1..-a_m).
fn psi_parts(a: &[C64], b: &[C64], m: usize) -> Vec<C64> {
    b[..m].iter().copied().chain(a[..m].iter().map(|x| -x)).collect()
}

fn lin(parts: &[C64]) -> Lin {
    Lin::of(parts)
}

/// Swaps a_s into the last slot and returns (a, b) as complex vectors.
fn anchored_c64(params: &ParamSet, s: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    params.check_index(s)?;
    Ok((swap_last(&cvec(params.a()), s - 1), cvec(params.b())))
}

/// h_p^s(n) from the multisum with outer series over J = j_{p-2}.
pub fn h_multisum(params: &ParamSet, s: usize, nmax: usize, tol: f64) -> Result<CoeffTable> {
    let (a, b) = anchored_c64(params, s)?;
    let p = a.len();
    if p == 1 {
        let zeros = vec![Scalar::real(0.0); nmax + 1];
        return Ok(CoeffTable::new(Kind::H, params, vec![s], Method::Multisum, zeros));
    }
    let ps = psis(&a, &b);
    let psi = ps[p];
    let ap = a[p - 1];
    for (i, bi) in b.iter().enumerate().take(p - 2) {
        if (1.0 - bi + ap).re <= 0.0 {
            return Err(Error::ConvergenceViolation(format!(
                "Re(1 - b_{} + a_{}) must be positive",
                i + 1,
                s
            )));
        }
    }
    let mut prefactors = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let nf = n as f64;
        let poch = rising(&(one() - psi), n + 1);
        if poch.norm() == 0.0 {
            return Err(Error::Pole(format!("(1 - psi_p)_{} vanishes", n + 1)));
        }
        let g = gamma_ratio_rg(
            &[psi, 1.0 - b[p - 1] + ap + nf, 1.0 - b[p - 2] + ap + nf],
            &[ps[p - 1], psi - b[p - 2] + ap],
        )?;
        prefactors.push(-g / (poch * factorial(n)));
    }

    let q = p - 2;
    let chain_psi: Vec<Lin> = (1..=q).map(|m| lin(&psi_parts(&a, &b, m))).collect();
    let chain_c: Vec<Lin> = (1..=q).map(|m| lin(&[b[m - 1], -a[m]])).collect();
    let pp = psi_parts(&a, &b, p);
    let mut top = pp.clone();
    top.push(C64::new(-1.0, 0.0));
    let mut l2 = pp.clone();
    l2.extend([-b[p - 2], ap]);
    // the chain kernels mix a fast transient with this algebraic tail
    let rate = b[..p - 2].iter().map(|bi| (1.0 - bi + ap).re).reduce(f64::min);
    let weights = Weights {
        num: vec![lin(&top).with_n(-1), lin(&[one()])],
        den: vec![lin(&psi_parts(&a, &b, p - 1)), lin(&l2)],
        rate,
        ..Default::default()
    };
    let mut chain = Chain::new(chain_psi, chain_c);
    let sums = weighted_series(&mut chain, &weights, nmax, tol)?;
    Ok(float_table(Kind::H, params, vec![s], Method::Multisum, sums, prefactors))
}

/// Indices other than `s` (0-based), in order.
fn others(p: usize, s: usize) -> Vec<usize> {
    (0..p).filter(|&i| i != s).collect()
}

fn closed_h_prefactor(a: &[C64], b: &[C64], s: usize, n: usize, i2: usize, i3: usize) -> Result<C64> {
    let psi: C64 = b.iter().sum::<C64>() - a.iter().sum::<C64>();
    let nf = n as f64;
    let poch = rising(&(one() - psi), n + 1);
    if poch.norm() == 0.0 {
        return Err(Error::Pole(format!("(1 - psi_p)_{} vanishes", n + 1)));
    }
    let g = gamma_ratio_rg(
        &[psi, 1.0 - b[i2] + a[s] + nf, 1.0 - b[i3] + a[s] + nf],
        &[psi - b[i2] + a[s], psi - b[i3] + a[s]],
    )?;
    Ok(-g / (poch * factorial(n)))
}

fn h_closed_p3_c64(a: &[C64], b: &[C64], s: usize, nmax: usize, tol: f64) -> Result<Vec<Summed<C64>>> {
    let o = others(3, s);
    // parameter excess of the 3F2 is 1 - b_1 + a_s + n
    if (1.0 - b[0] + a[s]).re <= 0.0 {
        return Err(Error::ConvergenceViolation(format!(
            "Re(1 - b_1 + a_{}) must be positive",
            s + 1
        )));
    }
    let pp = psi_parts(a, b, 3);
    let with = |extra: &[C64]| {
        let mut v = pp.clone();
        v.extend_from_slice(extra);
        lin(&v)
    };
    let weights = Weights {
        num: vec![
            with(&[C64::new(-1.0, 0.0)]).with_n(-1),
            lin(&[b[0], -a[o[0]]]),
            lin(&[b[0], -a[o[1]]]),
        ],
        den: vec![with(&[-b[1], a[s]]), with(&[-b[2], a[s]]), lin(&[one()])],
        ..Default::default()
    };
    let sums = weighted_series(&mut Ones, &weights, nmax, tol)?;
    sums.into_iter()
        .enumerate()
        .map(|(n, sm)| {
            let pre = closed_h_prefactor(a, b, s, n, 1, 2)?;
            Ok(Summed {
                value: pre * sm.value,
                ..sm
            })
        })
        .collect()
}

/// h_3^s(n) from the closed 3F2 form.
pub fn h_closed_p3(params: &ParamSet, s: usize, n: usize, tol: f64) -> Result<Scalar> {
    if params.p() != 3 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    params.check_index(s)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    Ok(Scalar::Float(h_closed_p3_c64(&a, &b, s - 1, n, tol)?[n].value))
}

fn h_closed_p4_c64(a: &[C64], b: &[C64], s: usize, nmax: usize, tol: f64) -> Result<Vec<Summed<C64>>> {
    let o = others(4, s);
    let (i1, i2, i3) = (a[o[0]], a[o[1]], a[o[2]]);
    for (i, bi) in b.iter().enumerate().take(2) {
        if (1.0 - bi + a[s]).re <= 0.0 {
            return Err(Error::ConvergenceViolation(format!(
                "Re(1 - b_{} + a_{}) must be positive",
                i + 1,
                s + 1
            )));
        }
    }
    let pp = psi_parts(a, b, 4);
    let with = |extra: &[C64]| {
        let mut v = pp.clone();
        v.extend_from_slice(extra);
        lin(&v)
    };
    let cc = lin(&[b[0], b[1], -i1, -i2]);
    let dd = lin(&[b[0], b[1], -i1, -i3]);
    // K_k = 3F2(-k, b1 - a_i1, b2 - a_i1; C, D; 1)
    let mut kern = Pascal::new(vec![lin(&[b[0], -i1]), lin(&[b[1], -i1])], vec![cc.clone(), dd.clone()]);
    let weights = Weights {
        num: vec![with(&[C64::new(-1.0, 0.0)]).with_n(-1), cc, dd],
        den: vec![with(&[-b[2], a[s]]), with(&[-b[3], a[s]]), lin(&[one()])],
        ..Default::default()
    };
    let sums = weighted_series(&mut kern, &weights, nmax, tol)?;
    sums.into_iter()
        .enumerate()
        .map(|(n, sm)| {
            let pre = closed_h_prefactor(a, b, s, n, 2, 3)?;
            Ok(Summed {
                value: pre * sm.value,
                ..sm
            })
        })
        .collect()
}

/// h_4^s(n) from the closed form with a terminating 3F2 kernel.
pub fn h_closed_p4(params: &ParamSet, s: usize, n: usize, tol: f64) -> Result<Scalar> {
    if params.p() != 4 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    params.check_index(s)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let v = h_closed_p4_c64(&a, &b, s - 1, n, tol)?;
    Ok(Scalar::Float(v[n].value))
}

/// Tables of the closed forms (p = 3 or 4) with truncation metadata.
pub fn h_closed_table(params: &ParamSet, s: usize, nmax: usize, tol: f64) -> Result<CoeffTable> {
    params.check_index(s)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let (sums, method) = match params.p() {
        3 => (
            h_closed_p3_c64(&a, &b, s - 1, nmax, tol)?,
            Method::ClosedP3,
        ),
        4 => (h_closed_p4_c64(&a, &b, s - 1, nmax, tol)?, Method::ClosedP4),
        p => return Err(Error::UnsupportedOrder(p)),
    };
    let ones = vec![one(); sums.len()];
    Ok(float_table(Kind::H, params, vec![s], method, sums, ones))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DVariant {
    V535,
    V536,
}

/// Checks the series condition of a D variant; returns the first offending
/// b index (1-based) if any.
pub fn d_condition_violation(params: &ParamSet, s: usize, variant: DVariant) -> Option<usize> {
    let a_s = params.a()[s - 1].to_c64();
    let from = match variant {
        DVariant::V535 => 2,
        DVariant::V536 => 1,
    };
    params
        .b()
        .iter()
        .enumerate()
        .skip(from)
        .find(|(_, bi)| (1.0 - bi.to_c64() + a_s).re <= 0.0)
        .map(|(i, _)| i + 1)
}

fn d_sums(
    a: &[C64],
    b: &[C64],
    k: usize,
    s: usize,
    nmax: usize,
    variant: DVariant,
    tol: f64,
) -> Result<(Vec<Summed<C64>>, Vec<C64>)> {
    let p = a.len();
    let rest: Vec<usize> = (0..p).filter(|&i| i != k && i != s).collect();
    let (ak, asv) = (a[k], a[s]);
    let gnum: Vec<C64> = b.iter().map(|bi| 1.0 - bi + ak).collect();
    let gden: Vec<C64> = rest.iter().map(|&i| 1.0 - a[i] + ak).collect();
    let shifted = |x: C64, base: C64| lin(&[one(), -x, base]);
    let lo_rest: Vec<Lin> = rest.iter().map(|&i| shifted(a[i], ak)).collect();
    match variant {
        DVariant::V535 => {
            let mut kern: Box<dyn KernelSource> = if p == 2 {
                Box::new(Delta)
            } else {
                let up = b[2..].iter().map(|&bi| shifted(bi, ak)).collect();
                Box::new(Pascal::new(up, lo_rest))
            };
            let e = lin(&[C64::new(2.0, 0.0), ak, asv, -b[0], -b[1]]).with_n(1);
            let weights = Weights {
                num: vec![shifted(b[0], ak), shifted(b[1], ak)],
                den: vec![lin(&[one()]), e],
                ..Default::default()
            };
            let sums = weighted_series(kern.as_mut(), &weights, nmax, tol)?;
            let e0 = 2.0 + ak + asv - b[0] - b[1];
            let mut pre = Vec::with_capacity(nmax + 1);
            for n in 0..=nmax {
                let nf = n as f64;
                let mut num = gnum.clone();
                num.push(1.0 - b[0] + asv + nf);
                num.push(1.0 - b[1] + asv + nf);
                let mut den = gden.clone();
                den.push(e0 + nf);
                pre.push(gamma_ratio_rg(&num, &den)? / factorial(n));
            }
            Ok((sums, pre))
        }
        DVariant::V536 => {
            let up = b[1..].iter().map(|&bi| shifted(bi, ak)).collect();
            let mut lo = vec![lin(&[one()])];
            lo.extend(lo_rest);
            let mut kern = Pascal::new(up, lo);
            let weights = Weights {
                init_den: vec![shifted(b[0], asv).with_n(1)],
                num: vec![shifted(b[0], ak)],
                den: vec![lin(&[C64::new(2.0, 0.0), -b[0], asv]).with_n(1)],
                ..Default::default()
            };
            let sums = weighted_series(&mut kern, &weights, nmax, tol)?;
            let mut pre = Vec::with_capacity(nmax + 1);
            for n in 0..=nmax {
                let mut num = gnum.clone();
                num.push(1.0 - ak + asv + n as f64);
                pre.push(gamma_ratio_rg(&num, &gden)? / factorial(n));
            }
            Ok((sums, pre))
        }
    }
}

/// D_n^[k,s] for n = 0..=N, the coefficients of G^{2,p}_{p,p} in powers of 1-z.
#[allow(non_snake_case)]
pub fn D_coeffs(
    params: &ParamSet,
    k: usize,
    s: usize,
    nmax: usize,
    variant: DVariant,
    tol: f64,
) -> Result<CoeffTable> {
    params.check_index(k)?;
    params.check_index(s)?;
    if k == s {
        return Err(Error::Invalid("D needs k != s".into()));
    }
    if params.p() < 2 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    if let Some(i) = d_condition_violation(params, s, variant) {
        let other = match variant {
            DVariant::V535 => DVariant::V536,
            DVariant::V536 => DVariant::V535,
        };
        let hint = if d_condition_violation(params, s, other).is_none() {
            format!("; the {:?} variant applies", other)
        } else {
            "; a permutation of b placing the offending entries first may satisfy it".to_string()
        };
        return Err(Error::ConvergenceViolation(format!(
            "Re(1 - b_{} + a_{}) must be positive{}",
            i, s, hint
        )));
    }
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let (sums, pre) = d_sums(&a, &b, k - 1, s - 1, nmax, variant, tol)?;
    let method = match variant {
        DVariant::V535 => Method::V535,
        DVariant::V536 => Method::V536,
    };
    Ok(float_table(Kind::D, params, vec![k, s], method, sums, pre))
}

/// D table with whichever variant's condition holds (v535 preferred: its
/// condition is weaker and for p = 2 it is a closed form).
pub fn d_auto(params: &ParamSet, k: usize, s: usize, nmax: usize, tol: f64) -> Result<CoeffTable> {
    if d_condition_violation(params, s, DVariant::V535).is_none() {
        D_coeffs(params, k, s, nmax, DVariant::V535, tol)
    } else {
        D_coeffs(params, k, s, nmax, DVariant::V536, tol)
    }
}

/// prod sin(pi(b - a_k)) / prod_{i != k, skip} sin(pi(a_i - a_k)) (0-based).
pub fn sine_weight(a: &[C64], b: &[C64], k: usize, skip: Option<usize>) -> C64 {
    let mut num = one();
    for bi in b {
        num *= sin_pi(bi - a[k]);
    }
    let mut den = one();
    for (i, ai) in a.iter().enumerate() {
        if i != k && Some(i) != skip {
            den *= sin_pi(ai - a[k]);
        }
    }
    num / den
}

/// Rejects a-differences and psi_p that are integers.
pub fn check_nondegenerate(params: &ParamSet, check_psi: bool) -> Result<()> {
    let a = cvec(params.a());
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if near_integer_c64(a[i] - a[j]).is_some() {
                return Err(Error::DegenerateParameters(format!(
                    "a_{} - a_{} is an integer",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    if check_psi && near_integer_c64(params.psi_p().to_c64()).is_some() {
        return Err(Error::DegenerateParameters("psi_p is an integer".into()));
    }
    Ok(())
}

/// h_p^s(n) assembled from the D tables of G^{2,p}_{p,p}.
#[allow(non_snake_case)]
pub fn h_from_D_table(
    params: &ParamSet,
    s: usize,
    nmax: usize,
    tol: f64,
    variant: Option<DVariant>,
) -> Result<CoeffTable> {
    params.check_index(s)?;
    check_nondegenerate(params, true)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let psi = params.psi_p().to_c64();
    let scale = -1.0 / (PI * sin_pi(psi));
    let mut acc = vec![C64::new(0.0, 0.0); nmax + 1];
    let mut trunc: Vec<Truncation> = vec![
        Truncation {
            terms: 0,
            last_term: 0.0
        };
        nmax + 1
    ];
    for k in 1..=params.p() {
        if k == s {
            continue;
        }
        let d = match variant {
            Some(v) => D_coeffs(params, k, s, nmax, v, tol)?,
            None => d_auto(params, k, s, nmax, tol)?,
        };
        let w = sine_weight(&a, &b, k - 1, Some(s - 1));
        for (n, v) in d.values.iter().enumerate() {
            acc[n] += scale * w * v.to_c64();
        }
        if let Some(t) = d.truncation {
            for (n, tn) in t.into_iter().enumerate() {
                trunc[n].terms = trunc[n].terms.max(tn.terms);
                trunc[n].last_term = trunc[n].last_term.max(tn.last_term);
            }
        }
    }
    let mut t = CoeffTable::new(
        Kind::H,
        params,
        vec![s],
        Method::FromD,
        acc.into_iter().map(Scalar::Float).collect(),
    );
    t.truncation = Some(trunc);
    Ok(t)
}

#[allow(non_snake_case)]
pub fn h_from_D(params: &ParamSet, s: usize, nmax: usize, tol: f64) -> Result<CoeffTable> {
    h_from_D_table(params, s, nmax, tol, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norlund::g_young;

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
    fn f_at_zero_is_gamma() {
        let p = ParamSet::new(
            vec![Scalar::int(0), Scalar::ratio(1, 4)],
            vec![Scalar::ratio(1, 2), Scalar::ratio(1, 4)],
        )
        .unwrap();
        // psi = 1/2
        let g = g_young(&p, 1, 3).unwrap();
        let f = f_from_g(&g, &p).unwrap();
        assert!((f.values[0].to_c64().re - PI.sqrt()).abs() < 1e-13);
        let bad = ParamSet::new(vec![Scalar::int(0)], vec![Scalar::int(2)]).unwrap();
        let g = g_young(&bad, 1, 2).unwrap();
        assert!(matches!(f_from_g(&g, &bad), Err(Error::Pole(_))));
    }

    #[test]
    fn h_p3_three_routes() {
        let p = fl(&[1.2, 0.7, 1.45], &[-2.9, -3.3, -2.6]);
        for s in 1..=3 {
            let m = h_multisum(&p, s, 3, 1e-13).unwrap();
            let d = h_from_D(&p, s, 3, 1e-13).unwrap();
            for n in 0..=3 {
                let c = h_closed_p3(&p, s, n, 1e-13).unwrap().to_c64();
                let mv = m.values[n].to_c64();
                assert!(rel(c, mv) < 1e-9, "s={s} n={n} {c} {mv}");
                assert!(rel(c, d.values[n].to_c64()) < 1e-9, "s={s} n={n} {c} {}", d.values[n].to_c64());
            }
        }
    }

    #[test]
    fn d_variants_agree() {
        let p = fl(&[0.3, 4.9, -0.2], &[-0.8, -1.1, -0.6]);
        let x = D_coeffs(&p, 1, 2, 4, DVariant::V535, 1e-15).unwrap();
        let y = D_coeffs(&p, 1, 2, 4, DVariant::V536, 1e-15).unwrap();
        for n in 0..=4 {
            assert!(rel(x.values[n].to_c64(), y.values[n].to_c64()) < 1e-10, "n={n}");
        }
        assert!(x.truncation.is_some());
    }

    #[test]
    fn convergence_violation_suggests_fix() {
        let p = fl(&[0.3, 0.1, -0.2], &[-0.8, 1.9, 2.6]);
        match D_coeffs(&p, 1, 2, 2, DVariant::V536, 1e-12) {
            Err(Error::ConvergenceViolation(msg)) => assert!(msg.contains("b_2")),
            other => panic!("{:?}", other),
        }
    }
}
