//! Nørlund coefficients g_p^k(n) of the expansion of G^{p,0}_{p,p} around
//! z = 1, computed by several independent routes.
//!
//! Public indices are 1-based; the generic kernels take 0-based anchors.

use serde::{Deserialize, Serialize};

use crate::bernoulli::{l_from_q, q_values, BernoulliCache, QVariant};
use crate::error::{Error, Result};
use crate::hyper::terminating_sum;
use crate::scalar::{falling, rising, Field, Mode, Scalar};

/// Parameter vectors a, b with the partial excesses psi_m.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    a: Vec<Scalar>,
    b: Vec<Scalar>,
    psi: Vec<Scalar>,
}

impl ParamSet {
    pub fn new(a: Vec<Scalar>, b: Vec<Scalar>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Invalid("p must be at least 1".into()));
        }
        if a.len() != b.len() {
            return Err(Error::Invalid(format!(
                "a has {} entries but b has {}",
                a.len(),
                b.len()
            )));
        }
        let psi = psis(&a, &b);
        Ok(ParamSet { a, b, psi })
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Scalar] {
        &self.a
    }

    pub fn b(&self) -> &[Scalar] {
        &self.b
    }

    /// psi_m for m = 0..=p (psi_0 = 0).
    pub fn psi(&self, m: usize) -> &Scalar {
        &self.psi[m]
    }

    pub fn psi_p(&self) -> &Scalar {
        &self.psi[self.p()]
    }

    pub fn mode(&self) -> Mode {
        if self.a.iter().chain(&self.b).all(Scalar::is_exact) {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    /// Same parameters, all promoted to complex floats.
    pub fn promote(&self) -> ParamSet {
        ParamSet::new(
            self.a.iter().map(Scalar::promote).collect(),
            self.b.iter().map(Scalar::promote).collect(),
        )
        .expect("shape preserved")
    }

    /// Exchange a_k and a_l (1-based).
    pub fn swap_a(&self, k: usize, l: usize) -> ParamSet {
        let mut a = self.a.clone();
        a.swap(k - 1, l - 1);
        ParamSet::new(a, self.b.clone()).expect("shape preserved")
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.p() {
            Err(Error::Invalid(format!("index {} outside 1..={}", k, self.p())))
        } else {
            Ok(())
        }
    }
}

impl Serialize for ParamSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            a: &'a [Scalar],
            b: &'a [Scalar],
        }
        Repr {
            a: &self.a,
            b: &self.b,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParamSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            a: Vec<Scalar>,
            b: Vec<Scalar>,
        }
        let r = Repr::deserialize(d)?;
        ParamSet::new(r.a, r.b).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn psis<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![a[0].zero_like()];
    for (ai, bi) in a.iter().zip(b) {
        let last = out.last().unwrap().clone();
        out.push(last + bi.clone() - ai.clone());
    }
    out
}

/// Copy of `a` with a[k] and a[p-1] exchanged.
pub(crate) fn swap_last<T: Clone>(a: &[T], k: usize) -> Vec<T> {
    let mut v = a.to_vec();
    let last = v.len() - 1;
    v.swap(k, last);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "f")]
    F,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "D")]
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Young,
    RecurrenceN,
    RecurrenceP,
    BernoulliPsi,
    BernoulliTilde,
    Connect,
    ClosedSmallP,
    FromG,
    Multisum,
    ClosedP3,
    ClosedP4,
    V535,
    V536,
    FromD,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Young => "young",
            Method::RecurrenceN => "recurrence_n",
            Method::RecurrenceP => "recurrence_p",
            Method::BernoulliPsi => "bernoulli_psi",
            Method::BernoulliTilde => "bernoulli_tilde",
            Method::Connect => "connect",
            Method::ClosedSmallP => "closed_small_p",
            Method::FromG => "from_g",
            Method::Multisum => "multisum",
            Method::ClosedP3 => "closed_p3",
            Method::ClosedP4 => "closed_p4",
            Method::V535 => "v535",
            Method::V536 => "v536",
            Method::FromD => "from_d",
        }
    }
}

/// Terms used and magnitude of the last term of one truncated series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub terms: usize,
    pub last_term: f64,
}

/// Coefficient sequence for n = 0..N with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub kind: Kind,
    pub p: usize,
    pub index: Vec<usize>,
    pub method: Method,
    pub mode: Mode,
    pub values: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Vec<Truncation>>,
}

impl CoeffTable {
    pub(crate) fn new(
        kind: Kind,
        params: &ParamSet,
        index: Vec<usize>,
        method: Method,
        values: Vec<Scalar>,
    ) -> Self {
        let mode = if values.iter().all(Scalar::is_exact) {
            Mode::Exact
        } else {
            Mode::Float
        };
        CoeffTable {
            kind,
            p: params.p(),
            index,
            method,
            mode,
            values,
            truncation: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

// ---------------------------------------------------------------------------
// generic kernels

fn factorial_like<T: Field>(like: &T, n: usize) -> T {
    (1..=n).fold(like.one_like(), |f, i| f * like.int_like(i as i64))
}

/// g_p^p(0..=nmax) from the Young-chain sum.
pub fn young_pp<T: Field>(a: &[T], b: &[T], nmax: usize) -> Vec<T> {
    let p = a.len();
    let zero = a[0].zero_like();
    if p == 1 {
        let mut v = vec![zero.clone(); nmax + 1];
        v[0] = zero.one_like();
        return v;
    }
    let ps = psis(a, b);
    // w[m-1][i][d] = (psi_m + i)_d/d! * (b_{m+1} - a_m)_d for m = 1..p-1
    let w: Vec<Vec<Vec<T>>> = (1..p)
        .map(|m| {
            let c = b[m].clone() - a[m - 1].clone();
            (0..=nmax)
                .map(|i| {
                    let base = ps[m].add_int(i as i64);
                    let mut row = Vec::with_capacity(nmax + 1 - i);
                    let mut t = zero.one_like();
                    row.push(t.clone());
                    for d in 1..=(nmax - i) {
                        t = t * base.add_int(d as i64 - 1) * c.add_int(d as i64 - 1)
                            / zero.int_like(d as i64);
                        row.push(t.clone());
                    }
                    row
                })
                .collect()
        })
        .collect();

    fn dfs<T: Field>(w: &[Vec<Vec<T>>], m: usize, prev: usize, n: usize, acc: T, out: &mut T) {
        let last = w.len();
        if m == last {
            let t = acc * w[m - 1][prev][n - prev].clone();
            *out = out.clone() + t;
            return;
        }
        for j in prev..=n {
            let f = &w[m - 1][prev][j - prev];
            if f.is_zero_value() {
                continue;
            }
            dfs(w, m + 1, j, n, acc.clone() * f.clone(), out);
        }
    }

    (0..=nmax)
        .map(|n| {
            let mut out = zero.clone();
            dfs(&w, 1, 0, n, zero.one_like(), &mut out);
            out
        })
        .collect()
}

fn forward_difference<T: Field, Fn_: Fn(&T) -> T>(f: &Fn_, x: &T, m: usize) -> T {
    let mut s = x.zero_like();
    let mut c: i64 = 1;
    for i in 0..=m {
        // (-1)^{m-i} C(m, i)
        let sign = if (m - i) % 2 == 0 { 1 } else { -1 };
        s = s + x.int_like(sign * c) * f(&x.add_int(i as i64));
        c = c * (m - i) as i64 / (i as i64 + 1);
    }
    s
}

/// P_j(z) of the p-th order difference equation, for anchor k (0-based).
fn recurrence_coeff<T: Field>(a: &[T], b: &[T], psi: &T, k: usize, j: usize, z: &T) -> T {
    let p = a.len();
    let ak = &a[k];
    let q = |t: &T| {
        a.iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .fold(t.one_like(), |acc, (_, ai)| acc * (t.clone() - ai.clone()))
    };
    let r = |t: &T| {
        b.iter()
            .fold(t.one_like(), |acc, bi| acc * (t.add_int(1) - bi.clone()))
    };
    let sign = if j % 2 == 0 { 1 } else { -1 };
    let x_r = psi.clone() + ak.clone() + z.clone() - z.one_like();
    let r_term = forward_difference(&r, &x_r, p - j) * z.int_like(sign)
        / factorial_like(z, p - j);
    if j == p {
        return -r_term;
    }
    let x_q = psi.clone() + ak.clone() + z.clone();
    forward_difference(&q, &x_q, p - j - 1) * z.int_like(sign) / factorial_like(z, p - j - 1)
        - r_term
}

/// g_p^k(0..=nmax) from the p-th order difference equation in n.
pub fn recurrence_n<T: Field>(a: &[T], b: &[T], k: usize, nmax: usize) -> Result<Vec<T>> {
    let p = a.len();
    let one = a[0].one_like();
    if p == 1 {
        let mut v = vec![one.zero_like(); nmax + 1];
        v[0] = one;
        return Ok(v);
    }
    let psi = psis(a, b)[p].clone();
    let mut g = vec![one.clone()];
    for t in 1..=nmax {
        let n = one.int_like(t as i64 - p as i64 + 1);
        let mut s = one.zero_like();
        for j in 2..=p {
            if t + 1 < j {
                continue;
            }
            let prev = &g[t + 1 - j];
            if prev.is_zero_value() {
                continue;
            }
            s = s + recurrence_coeff(a, b, &psi, k, j, &n) * prev.clone();
        }
        let lead = recurrence_coeff(a, b, &psi, k, 1, &n);
        if lead.is_zero_value() {
            return Err(Error::DegenerateRecurrence { step: t });
        }
        g.push(-s / lead);
    }
    Ok(g)
}

/// g_p^p(0..=nmax) by recursion in p; `inner(q)` picks the 0-based inner
/// anchor (in 0..q-1) used when stepping from order q-1 to q.
pub fn recurrence_p<T: Field>(
    a: &[T],
    b: &[T],
    nmax: usize,
    inner: &dyn Fn(usize) -> usize,
) -> Vec<T> {
    let p = a.len();
    let one = a[0].one_like();
    if p == 1 {
        let mut v = vec![one.zero_like(); nmax + 1];
        v[0] = one;
        return v;
    }
    let k = inner(p);
    let ps = psis(a, b);
    let sub_a = swap_last(&a[..p - 1], k);
    let t = recurrence_p(&sub_a, &b[..p - 1], nmax, inner);
    let c = b[p - 1].clone() - a[k].clone();
    // u[d] = (c)_d/d!
    let mut u = vec![one.clone()];
    for d in 1..=nmax {
        let last = u[d - 1].clone();
        u.push(last * c.add_int(d as i64 - 1) / one.int_like(d as i64));
    }
    (0..=nmax)
        .map(|n| {
            // fac = (psi_{p-1} + j)_{n-j}, built from j = n down
            let mut s = one.zero_like();
            let mut fac = one.clone();
            for j in (0..=n).rev() {
                if j < n {
                    fac = fac * ps[p - 1].add_int(j as i64);
                }
                if !t[j].is_zero_value() {
                    s = s + u[n - j].clone() * fac.clone() * t[j].clone();
                }
            }
            s
        })
        .collect()
}

/// g_p^k(0..=nmax) from generalized Bernoulli polynomials.
pub fn bernoulli_g<T: Field>(
    a: &[T],
    b: &[T],
    k: usize,
    nmax: usize,
    tilde: bool,
) -> Vec<T> {
    let p = a.len();
    let one = a[0].one_like();
    let psi = psis(a, b)[p].clone();
    let variant = if tilde {
        QVariant::Tilde(k + 1)
    } else {
        QVariant::Plain
    };
    let q = q_values(a, b, nmax.max(1), variant);
    let l = l_from_q(&q, nmax);
    (0..=nmax)
        .map(|n| {
            let (sigma, x) = if tilde {
                (one.int_like(n as i64 + 1), one.int_like(2) - a[k].clone() - psi.clone())
            } else {
                (psi.add_int(n as i64), one.clone() - a[k].clone())
            };
            let cache = BernoulliCache::new(sigma, x, n);
            let mut s = one.zero_like();
            let mut fact = one.clone();
            for d in 0..=n {
                // d = n - r
                if d > 0 {
                    fact = fact * one.int_like(d as i64);
                }
                let r = n - d;
                let base = if tilde {
                    one.int_like(r as i64 + 1)
                } else {
                    psi.add_int(r as i64)
                };
                let sign = if d % 2 == 0 { 1 } else { -1 };
                s = s + one.int_like(sign) * rising(&base, d) / fact.clone()
                    * l[r].clone()
                    * cache.get(d).clone();
            }
            s
        })
        .collect()
}

/// g_p^k from g_p^l by the connection formula (k, l 0-based).
pub fn connect<T: Field>(a: &[T], b: &[T], k: usize, l: usize, gl: &[T], nmax: usize) -> Vec<T> {
    let p = a.len();
    let psi = psis(a, b)[p].clone();
    let one = a[0].one_like();
    let c = a[k].clone() - a[l].clone();
    let mut u = vec![one.clone()];
    for d in 1..=nmax {
        let last = u[d - 1].clone();
        u.push(last * c.add_int(d as i64 - 1) / one.int_like(d as i64));
    }
    (0..=nmax)
        .map(|n| {
            let mut s = one.zero_like();
            for j in 0..=n {
                s = s + u[n - j].clone() * rising(&psi.add_int(j as i64), n - j) * gl[j].clone();
            }
            s
        })
        .collect()
}

/// The nested-sum closed forms of g_p^p(n) for n <= 3.
pub fn closed_small_n_pp<T: Field>(a: &[T], b: &[T], n: usize) -> Result<T> {
    let p = a.len();
    let one = a[0].one_like();
    let ps = psis(a, b);
    // c(m) = b_{m+1} - a_m, m 1-based in 1..p-1
    let c = |m: usize| b[m].clone() - a[m - 1].clone();
    let s1 = |upto: usize| {
        (1..upto).fold(one.zero_like(), |s, m| s + c(m) * ps[m].clone())
    };
    let r2 = |m: usize| rising(&c(m), 2) * rising(&ps[m], 2);
    let half = one.clone() / one.int_like(2);
    match n {
        0 => Ok(one),
        1 => Ok(s1(p)),
        2 => {
            let t1 = (1..p).fold(one.zero_like(), |s, m| s + r2(m)) * half;
            let t2 = (2..p).fold(one.zero_like(), |s, k| {
                s + c(k) * ps[k].add_int(1) * s1(k)
            });
            Ok(t1 + t2)
        }
        3 => {
            let sixth = one.clone() / one.int_like(6);
            let t1 = (1..p).fold(one.zero_like(), |s, m| {
                s + rising(&c(m), 3) * rising(&ps[m], 3)
            }) * sixth;
            let t2 = (2..p).fold(one.zero_like(), |s, k| {
                let inner = (1..k).fold(one.zero_like(), |t, m| t + r2(m));
                s + c(k) * ps[k].add_int(2) * inner
            }) * half.clone();
            let t3 = (2..p).fold(one.zero_like(), |s, k| {
                s + rising(&ps[k].add_int(1), 2) * rising(&c(k), 2) * s1(k)
            }) * half;
            let t4 = (3..p).fold(one.zero_like(), |s, nn| {
                let inner = (2..nn).fold(one.zero_like(), |t, k| {
                    t + c(k) * ps[k].add_int(1) * s1(k)
                });
                s + c(nn) * ps[nn].add_int(2) * inner
            });
            Ok(t1 + t2 + t3 + t4)
        }
        _ => Err(Error::Invalid(format!("closed small-n forms exist for n <= 3, got {}", n))),
    }
}

/// Closed forms of g_p^s(n) for p = 2, 3, 4 (s 0-based).
pub fn closed_small_p<T: Field>(a: &[T], b: &[T], s: usize, n: usize) -> Result<T> {
    let p = a.len();
    let one = a[0].one_like();
    let others: Vec<usize> = (0..p).filter(|&i| i != s).collect();
    let nfact = factorial_like(&one, n);
    let neg_n = one.int_like(-(n as i64));
    match p {
        2 => {
            let o = &a[others[0]];
            Ok(rising(&(b[0].clone() - o.clone()), n) * rising(&(b[1].clone() - o.clone()), n)
                / nfact)
        }
        3 => {
            let psi = psis(a, b)[3].clone();
            let big_a = psi.clone() - b[1].clone() + a[s].clone();
            let big_b = psi - b[2].clone() + a[s].clone();
            let f = terminating_sum(
                &[
                    neg_n,
                    b[0].clone() - a[others[0]].clone(),
                    b[0].clone() - a[others[1]].clone(),
                ],
                &[big_a.clone(), big_b.clone()],
                None,
                n,
            )?;
            Ok(rising(&big_a, n) * rising(&big_b, n) / nfact * f)
        }
        4 => {
            let psi = psis(a, b)[4].clone();
            let (i1, i2, i3) = (&a[others[0]], &a[others[1]], &a[others[2]]);
            let big_a = psi.clone() - b[2].clone() + a[s].clone();
            let big_b = psi - b[3].clone() + a[s].clone();
            let cc = b[0].clone() + b[1].clone() - i1.clone() - i2.clone();
            let dd = b[0].clone() + b[1].clone() - i1.clone() - i3.clone();
            let mut tot = one.zero_like();
            let mut w = one.clone();
            for kk in 0..=n {
                if kk > 0 {
                    let km = kk as i64 - 1;
                    let den = big_a.add_int(km) * big_b.add_int(km) * one.int_like(kk as i64);
                    if den.is_zero_value() {
                        return Err(Error::Pole(format!("lower parameter vanishes at k={}", kk)));
                    }
                    w = w * neg_n.add_int(km) * cc.add_int(km) * dd.add_int(km) / den;
                }
                if w.is_zero_value() {
                    continue;
                }
                let inner = terminating_sum(
                    &[
                        one.int_like(-(kk as i64)),
                        b[0].clone() - i1.clone(),
                        b[1].clone() - i1.clone(),
                    ],
                    &[cc.clone(), dd.clone()],
                    None,
                    kk,
                )?;
                tot = tot + w.clone() * inner;
            }
            Ok(rising(&big_a, n) * rising(&big_b, n) / nfact * tot)
        }
        _ => Err(Error::UnsupportedOrder(p)),
    }
}

/// F_{p,m} from a g_p^k table (k 0-based).
pub fn f_symmetric_from<T: Field>(a: &[T], b: &[T], k: usize, m: usize, g: &[T]) -> T {
    let p = a.len();
    let psi = psis(a, b)[p].clone();
    let one = a[0].one_like();
    let top = psi.add_int(m as i64 - 1);
    let mut s = one.zero_like();
    let mut fact = one.clone();
    for j in 0..=m {
        if j > 0 {
            fact = fact * one.int_like(j as i64);
        }
        let sign = if j % 2 == 0 { 1 } else { -1 };
        s = s + one.int_like(sign) * falling(&a[k], j) * falling(&top, j) / fact.clone()
            * g[m - j].clone();
    }
    s
}

// ---------------------------------------------------------------------------
// public API over ParamSet

fn anchored(params: &ParamSet, k: usize) -> Result<Vec<Scalar>> {
    params.check_index(k)?;
    Ok(swap_last(params.a(), k - 1))
}

pub fn g_young(params: &ParamSet, k: usize, n: usize) -> Result<CoeffTable> {
    let a = anchored(params, k)?;
    let v = young_pp(&a, params.b(), n);
    Ok(CoeffTable::new(Kind::G, params, vec![k], Method::Young, v))
}

pub fn g_recurrence_n(params: &ParamSet, k: usize, n: usize) -> Result<CoeffTable> {
    params.check_index(k)?;
    let v = recurrence_n(params.a(), params.b(), k - 1, n)?;
    Ok(CoeffTable::new(Kind::G, params, vec![k], Method::RecurrenceN, v))
}

/// g_p^k(0..=n) by the route suited to the arithmetic: the n-recurrence is
/// exact over rationals but unstable in floating point, where the p-recurrence
/// is used instead.
pub fn g_table(params: &ParamSet, k: usize, n: usize) -> Result<CoeffTable> {
    match params.mode() {
        Mode::Exact => g_recurrence_n(params, k, n),
        Mode::Float => g_recurrence_p(params, k, n),
    }
}

/// Default inner anchor for the p-recurrence: the first parameter.
pub fn inner_first(_q: usize) -> usize {
    0
}

/// Alternative inner anchor: the last admissible parameter.
pub fn inner_last(q: usize) -> usize {
    q - 2
}

pub fn g_recurrence_p(params: &ParamSet, k: usize, n: usize) -> Result<CoeffTable> {
    g_recurrence_p_with(params, k, n, &inner_first)
}

/// The p-recurrence with an explicit inner-anchor choice.
pub fn g_recurrence_p_with(
    params: &ParamSet,
    k: usize,
    n: usize,
    inner: &dyn Fn(usize) -> usize,
) -> Result<CoeffTable> {
    let a = anchored(params, k)?;
    let v = recurrence_p(&a, params.b(), n, inner);
    Ok(CoeffTable::new(Kind::G, params, vec![k], Method::RecurrenceP, v))
}

/// Checks that two inner-anchor choices give the same table; returns the
/// first index where they differ.
pub fn recurrence_p_inner_mismatch(params: &ParamSet, k: usize, n: usize) -> Result<Option<usize>> {
    let x = g_recurrence_p_with(params, k, n, &inner_first)?;
    let y = g_recurrence_p_with(params, k, n, &inner_last)?;
    Ok(x
        .values
        .iter()
        .zip(&y.values)
        .position(|(u, v)| !same_value(u, v)))
}

fn same_value(u: &Scalar, v: &Scalar) -> bool {
    match (u, v) {
        (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
        _ => {
            let (x, y) = (u.to_c64(), v.to_c64());
            (x - y).norm() <= 1e-11 * x.norm().max(y.norm()).max(1.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BernoulliForm {
    Psi,
    Tilde,
}

pub fn g_bernoulli(params: &ParamSet, k: usize, n: usize, form: BernoulliForm) -> Result<CoeffTable> {
    params.check_index(k)?;
    let tilde = form == BernoulliForm::Tilde;
    let v = bernoulli_g(params.a(), params.b(), k - 1, n, tilde);
    let m = if tilde {
        Method::BernoulliTilde
    } else {
        Method::BernoulliPsi
    };
    Ok(CoeffTable::new(Kind::G, params, vec![k], m, v))
}

pub fn g_connect(
    params: &ParamSet,
    k: usize,
    l: usize,
    table_l: &CoeffTable,
    n: usize,
) -> Result<CoeffTable> {
    params.check_index(k)?;
    params.check_index(l)?;
    if k == l {
        return Err(Error::Invalid("connection needs k != l".into()));
    }
    if table_l.kind != Kind::G || table_l.index != vec![l] {
        return Err(Error::Invalid("table_l must be the g table anchored at l".into()));
    }
    if table_l.values.len() < n + 1 {
        return Err(Error::Invalid(format!(
            "table_l covers {} entries, need {}",
            table_l.values.len(),
            n + 1
        )));
    }
    let v = connect(params.a(), params.b(), k - 1, l - 1, &table_l.values, n);
    Ok(CoeffTable::new(Kind::G, params, vec![k], Method::Connect, v))
}

/// g_p^k(n) for n <= 3 from the nested-sum closed forms.
pub fn g_closed_small_n(params: &ParamSet, k: usize, n: usize) -> Result<Scalar> {
    let a = anchored(params, k)?;
    closed_small_n_pp(&a, params.b(), n)
}

pub fn g_closed_small_p(params: &ParamSet, s: usize, n: usize) -> Result<Scalar> {
    params.check_index(s)?;
    closed_small_p(params.a(), params.b(), s - 1, n)
}

#[allow(non_snake_case)]
pub fn F_symmetric(params: &ParamSet, m: usize, k: usize) -> Result<Scalar> {
    let g = g_young(params, k, m)?;
    Ok(f_symmetric_from(params.a(), params.b(), k - 1, m, &g.values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(a: &[(i64, i64)], b: &[(i64, i64)]) -> ParamSet {
        ParamSet::new(
            a.iter().map(|&(n, d)| Scalar::ratio(n, d)).collect(),
            b.iter().map(|&(n, d)| Scalar::ratio(n, d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn p2_young_spot_value() {
        let p = ps(&[(0, 1), (5, 7)], &[(1, 1), (3, 2)]);
        let t = g_young(&p, 2, 1).unwrap();
        assert_eq!(t.values[0], Scalar::int(1));
        assert_eq!(t.values[1], Scalar::ratio(3, 2));
    }

    #[test]
    fn p1_is_delta() {
        let p = ps(&[(1, 3)], &[(5, 4)]);
        for t in [
            g_young(&p, 1, 4).unwrap(),
            g_recurrence_n(&p, 1, 4).unwrap(),
            g_recurrence_p(&p, 1, 4).unwrap(),
        ] {
            assert_eq!(t.values[0], Scalar::int(1));
            assert!(t.values[1..].iter().all(|v| *v == Scalar::int(0)));
        }
    }

    /// Frozen index convention of the n-recurrence: p = 2 and p = 3 against
    /// the closed forms.
    #[test]
    fn recurrence_n_convention_frozen() {
        let p2 = ps(&[(1, 3), (-2, 5)], &[(7, 4), (1, 6)]);
        for k in 1..=2 {
            let r = g_recurrence_n(&p2, k, 10).unwrap();
            for n in 0..=10 {
                assert_eq!(r.values[n], g_closed_small_p(&p2, k, n).unwrap());
            }
        }
        let p3 = ps(&[(1, 3), (-2, 5), (3, 8)], &[(7, 4), (1, 6), (-5, 7)]);
        for k in 1..=3 {
            let r = g_recurrence_n(&p3, k, 8).unwrap();
            for n in 0..=8 {
                assert_eq!(r.values[n], g_closed_small_p(&p3, k, n).unwrap());
            }
        }
    }

    #[test]
    fn p4_closed_form_matches_young() {
        let p = ps(&[(1, 3), (-2, 5), (3, 8), (9, 7)], &[(7, 4), (1, 6), (-5, 7), (2, 3)]);
        for s in 1..=4 {
            let y = g_young(&p, s, 5).unwrap();
            for n in 0..=5 {
                assert_eq!(y.values[n], g_closed_small_p(&p, s, n).unwrap());
            }
        }
        assert!(matches!(
            g_closed_small_p(&ps(&[(0, 1); 5], &[(1, 1); 5]), 1, 1),
            Err(Error::UnsupportedOrder(5))
        ));
    }

    #[test]
    fn small_n_p2() {
        let p = ps(&[(1, 3), (-2, 5)], &[(7, 4), (1, 6)]);
        let v = g_closed_small_n(&p, 2, 1).unwrap();
        let (a1, b1, b2) = (Scalar::ratio(1, 3), Scalar::ratio(7, 4), Scalar::ratio(1, 6));
        assert_eq!(v, (&b2 - &a1) * (&b1 - &a1));
    }

    #[test]
    fn inner_anchor_hook() {
        let p = ps(&[(1, 3), (-2, 5), (3, 8), (9, 7)], &[(7, 4), (1, 6), (-5, 7), (2, 3)]);
        for k in 1..=4 {
            assert_eq!(recurrence_p_inner_mismatch(&p, k, 6).unwrap(), None);
        }
    }

    #[test]
    fn connection_round_trip() {
        let p = ps(&[(1, 3), (-2, 5), (3, 8)], &[(7, 4), (1, 6), (-5, 7)]);
        let g3 = g_young(&p, 3, 6).unwrap();
        let g1 = g_connect(&p, 1, 3, &g3, 6).unwrap();
        assert_eq!(g1.values, g_young(&p, 1, 6).unwrap().values);
        let back = g_connect(&p, 3, 1, &g1, 6).unwrap();
        assert_eq!(back.values, g3.values);
    }

    #[test]
    fn table_json_round_trip() {
        let p = ps(&[(0, 1), (1, 2)], &[(1, 1), (3, 2)]);
        let t = g_recurrence_n(&p, 2, 3).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"method\":\"recurrence_n\""));
        assert!(s.contains("\"values\":[\"1\""));
        let back: CoeffTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(ParamSet::new(vec![Scalar::int(0)], vec![]).is_err());
        assert!(ParamSet::new(vec![], vec![]).is_err());
    }
}
