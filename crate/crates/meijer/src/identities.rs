//! Identity harness: each identity is evaluated as a residual on supplied or
//! sampled parameters and reported as an [`IdentityReport`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::buhring::{check_nondegenerate, cvec, d_auto, h_closed_table, h_multisum, sine_weight};
use crate::error::{Error, Result};
use crate::gfunction::{
    g2ppp_eval_detail, gp0pp_eval_detail, gp0pp_near0, gp0pp_near1_value, inner_tol,
    mellin_check_with,
};
use crate::hyper::{
    buhring_lhs, buhring_p4_residual, gauss_connection_residual, multiseries_transform_residual,
    sheppard_residual_p3,
};
use crate::norlund::{g_table, ParamSet};
use crate::report::{IdentityReport, Verdict};
use crate::scalar::{
    factorial_f64, falling, gamma_ratio_rg, near_integer_c64, rising, sin_pi, Field, Scalar, C64,
};
use crate::series::{weighted_series, Lin, Ones, Weights};

/// Tolerance of [`verify_ptolemy`].
pub const PTOLEMY_TOL: f64 = 1e-10;

fn c0() -> C64 {
    C64::new(0.0, 0.0)
}

fn c1() -> C64 {
    C64::new(1.0, 0.0)
}

/// Report for sum(terms) = 0, normalized by the largest term.
fn sum_report(id: &str, params: serde_json::Value, terms: &[C64], tol: f64) -> IdentityReport {
    let lhs = terms.iter().fold(c0(), |s, t| s + t);
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.norm()));
    IdentityReport::compare(id, params, Scalar::Float(lhs), Scalar::Float(c0()), scale, tol)
}

fn settle(
    id: &str,
    params: serde_json::Value,
    tol: f64,
    r: Result<IdentityReport>,
) -> IdentityReport {
    r.unwrap_or_else(|e| IdentityReport::from_error(id, params, &e, tol))
}

/// sum_j prod(up)_j/(prod(lo)_j j!), the pFq at unit argument.
fn unit_series(up: &[C64], lo: &[C64], tol: f64) -> Result<C64> {
    let excess = lo.iter().sum::<C64>() - up.iter().sum::<C64>();
    if excess.re <= 0.0 {
        return Err(Error::ConvergenceViolation(format!(
            "series at unit argument needs positive excess, got {}",
            excess
        )));
    }
    let mut den: Vec<Lin> = lo.iter().map(|l| Lin::of(&[*l])).collect();
    den.push(Lin::of(&[c1()]));
    let w = Weights {
        num: up.iter().map(|u| Lin::of(&[*u])).collect(),
        den,
        ..Default::default()
    };
    Ok(weighted_series(&mut Ones, &w, 0, tol)?[0].value)
}

fn distinct(idx: &[usize], p: usize) -> Result<()> {
    for (n, &i) in idx.iter().enumerate() {
        if i == 0 || i > p {
            return Err(Error::Invalid(format!("index {} outside 1..={}", i, p)));
        }
        if idx[..n].contains(&i) {
            return Err(Error::Invalid("indices must be distinct".into()));
        }
    }
    Ok(())
}

fn real_unit_interval(z: &Scalar) -> Result<f64> {
    let zc = z.to_c64();
    if zc.im != 0.0 || zc.re <= 0.0 || zc.re >= 1.0 {
        return Err(Error::Invalid("z must lie in (0, 1)".into()));
    }
    Ok(zc.re)
}

// ---------------------------------------------------------------------------
// sine identities

fn ptolemy_parts(params: &ParamSet) -> (Vec<C64>, C64) {
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let w = (0..a.len()).map(|k| sine_weight(&a, &b, k, None)).collect();
    (w, sin_pi(params.psi_p().to_c64()))
}

/// sum_k sin(pi(b - a_k))/sin(pi(a_[k] - a_k)) against sin(pi psi_p).
pub fn verify_ptolemy(params: &ParamSet) -> IdentityReport {
    verify_ptolemy_with(params, PTOLEMY_TOL)
}

pub fn verify_ptolemy_with(params: &ParamSet, tol: f64) -> IdentityReport {
    let pj = json!({ "params": params });
    if let Err(e) = check_nondegenerate(params, false) {
        return IdentityReport::skipped(
            "ptolemy",
            pj,
            format!(
                "{}: {}; the sum extends continuously here, see ptolemy_trend",
                e.tag(),
                e
            ),
            tol,
        );
    }
    let (w, rhs) = ptolemy_parts(params);
    let lhs = w.iter().fold(c0(), |s, t| s + t);
    let scale = w.iter().fold(rhs.norm(), |m, t| m.max(t.norm()));
    IdentityReport::compare("ptolemy", pj, Scalar::Float(lhs), Scalar::Float(rhs), scale, tol)
}

/// One point of the approach to a degenerate parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct TrendPoint {
    pub eps: f64,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub rel_residual: f64,
}

/// Moves a_j to a_i + shift + eps for eps = 10^-1, ..., 10^-steps and records
/// the sine sum next to sin(pi psi_p). The limit itself is not asserted.
pub fn ptolemy_trend(
    params: &ParamSet,
    i: usize,
    j: usize,
    shift: i64,
    steps: usize,
) -> Result<Vec<TrendPoint>> {
    distinct(&[i, j], params.p())?;
    let target = params.a()[i - 1].to_c64() + shift as f64;
    let mut out = Vec::with_capacity(steps);
    for e in 1..=steps {
        let eps = 10f64.powi(-(e as i32));
        let mut a: Vec<Scalar> = params.a().to_vec();
        a[j - 1] = Scalar::Float(target + eps);
        let moved = ParamSet::new(a, params.b().to_vec())?;
        let (w, rhs) = ptolemy_parts(&moved);
        let lhs = w.iter().fold(c0(), |s, t| s + t);
        let scale = w.iter().fold(rhs.norm().max(1.0), |m, t| m.max(t.norm()));
        out.push(TrendPoint {
            eps,
            lhs: [lhs.re, lhs.im],
            rhs: [rhs.re, rhs.im],
            rel_residual: (lhs - rhs).norm() / scale,
        });
    }
    Ok(out)
}

fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// sum_j (-1)^j/j! sum_k [a_k]_j h_p^k(m-j) sin(pi(b-a_k))/sin(pi(a_[k]-a_k)) = 0.
pub fn verify_identity1(params: &ParamSet, m: usize, tol: f64) -> IdentityReport {
    let pj = json!({ "params": params, "m": m });
    match identity1_terms(params, m, tol) {
        Ok(t) => sum_report("identity1", pj, &t, tol),
        Err(e) => IdentityReport::from_error("identity1", pj, &e, tol),
    }
}

fn identity1_terms(params: &ParamSet, m: usize, tol: f64) -> Result<Vec<C64>> {
    check_nondegenerate(params, false)?;
    let p = params.p();
    if p < 2 {
        return Err(Error::UnsupportedOrder(p));
    }
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let itol = inner_tol(tol);
    let mut terms = Vec::new();
    for k in 1..=p {
        let h = if p == 3 || p == 4 {
            h_closed_table(params, k, m, itol)?
        } else {
            h_multisum(params, k, m, itol)?
        };
        let sw = sine_weight(&a, &b, k - 1, None);
        for j in 0..=m {
            let c = sign(j) / factorial_f64(j);
            terms.push(c * falling(&a[k - 1], j) * h.values[m - j].to_c64() * sw);
        }
    }
    Ok(terms)
}

/// The g-coefficient sine identity with anchor s. At m = 0 it evaluates the
/// same sums, in the same order, as [`verify_ptolemy`].
pub fn verify_identity2(params: &ParamSet, m: usize, s: usize, tol: f64) -> IdentityReport {
    let pj = json!({ "params": params, "m": m, "s": s });
    let r = identity2_sides(params, m, s).map(|(lhs, rhs, scale)| {
        IdentityReport::compare("identity2", pj.clone(), lhs, rhs, scale, tol)
    });
    settle("identity2", pj, tol, r)
}

fn identity2_sides(params: &ParamSet, m: usize, s: usize) -> Result<(Scalar, Scalar, f64)> {
    params.check_index(s)?;
    check_nondegenerate(params, false)?;
    let p = params.p();
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let psi = params.psi_p().to_c64();
    let mut g = Vec::with_capacity(p);
    for k in 1..=p {
        let t = g_table(params, k, m)?;
        g.push(t.values.iter().map(|v| v.to_c64()).collect::<Vec<_>>());
    }
    let sw: Vec<C64> = (0..p).map(|k| sine_weight(&a, &b, k, None)).collect();
    let spsi = sin_pi(psi);
    let (mut lhs, mut rhs, mut scale) = (c0(), c0(), 0.0f64);
    for j in 0..=m {
        let poch = rising(&psi, m - j);
        if poch.norm() == 0.0 {
            return Err(Error::DegenerateParameters(format!(
                "(psi_p)_{} vanishes",
                m - j
            )));
        }
        let c = C64::new(sign(j), 0.0) / (poch * factorial_f64(j));
        let mut inner = c0();
        for k in 0..p {
            let t = c * (falling(&a[k], j) * g[k][m - j] * sw[k]);
            scale = scale.max(t.norm());
            inner += t;
        }
        let r = c * (falling(&a[s - 1], j) * g[s - 1][m - j] * spsi);
        scale = scale.max(r.norm());
        lhs += inner;
        rhs += r;
    }
    Ok((Scalar::Float(lhs), Scalar::Float(rhs), scale))
}

// ---------------------------------------------------------------------------
// 3F2 identities at unit argument

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Circular {
    First,
    Second,
}

/// The cyclic three-term 3F2(1) identities for p = 3 with distinguished b_i.
pub fn verify_3f2_circular(
    params3: &ParamSet,
    i: usize,
    which: Circular,
    tol: f64,
) -> IdentityReport {
    let pj = json!({ "params": params3, "i": i, "which": which });
    match circular_terms(params3, i, which, tol) {
        Ok(t) => sum_report("3f2_circular", pj, &t, tol),
        Err(e) => IdentityReport::from_error("3f2_circular", pj, &e, tol),
    }
}

fn circular_terms(params: &ParamSet, i: usize, which: Circular, tol: f64) -> Result<Vec<C64>> {
    if params.p() != 3 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    params.check_index(i)?;
    check_nondegenerate(params, false)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let bi = b[i - 1];
    if let Some(k) = a.iter().position(|ak| bi.re >= ak.re + 1.0) {
        return Err(Error::ConvergenceViolation(format!(
            "Re(b_{}) must be below Re(a_{} + 1)",
            i,
            k + 1
        )));
    }
    let psi = params.psi_p().to_c64();
    let others: Vec<C64> = (0..3).filter(|&j| j != i - 1).map(|j| b[j]).collect();
    let itol = inner_tol(tol);
    let mut terms = Vec::new();
    for k in 0..3 {
        let ak = a[k];
        let num: Vec<C64> = others.iter().map(|bj| 1.0 - bj + ak).collect();
        let lo: Vec<C64> = others.iter().map(|bj| psi - bj + ak).collect();
        let w = sine_weight(&a, &b, k, None) * gamma_ratio_rg(&num, &lo)?;
        let up = |top: C64| {
            let mut v = vec![top];
            v.extend((0..3).filter(|&l| l != k).map(|l| bi - a[l]));
            v
        };
        let f1 = unit_series(&up(psi - 1.0), &lo, itol)?;
        match which {
            Circular::First => terms.push(w * f1),
            Circular::Second => {
                let f2 = unit_series(&up(psi - 2.0), &lo, itol)?;
                let lead: C64 = num.iter().product();
                terms.push(w * lead * f2);
                terms.push(-(w * ak * (2.0 - psi) * f1));
            }
        }
    }
    Ok(terms)
}

/// The three-term 3F2(1) identity with Gamma weights for p = 3 and shift n.
pub fn verify_corollary_37(params3: &ParamSet, n: usize, tol: f64) -> IdentityReport {
    let pj = json!({ "params": params3, "n": n });
    let r = corollary_sides(params3, n, tol).map(|(l, r, scale)| {
        IdentityReport::compare("corollary_37", pj.clone(), l, r, scale, tol)
    });
    settle("corollary_37", pj, tol, r)
}

fn corollary_sides(params: &ParamSet, n: usize, tol: f64) -> Result<(Scalar, Scalar, f64)> {
    if params.p() != 3 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    check_nondegenerate(params, false)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let (a1, a2, a3) = (a[0], a[1], a[2]);
    let (b1, b2, b3) = (b[0], b[1], b[2]);
    let nf = n as f64;
    let psi = params.psi_p().to_c64();
    let itol = inner_tol(tol);
    let e1 = 2.0 + a1 + a2 - b1 - b2 + nf;
    let e3 = 2.0 + a2 + a3 - b1 - b2 + nf;
    let w1 = gamma_ratio_rg(&[a3 - a1], &[b1 - a1, b2 - a1, b3 - a1, e1])?;
    let t1 = w1 * unit_series(&[1.0 + a1 - b1, 1.0 + a1 - b2, b3 - a3], &[1.0 + a1 - a3, e1], itol)?;
    let w3 = gamma_ratio_rg(&[a1 - a3], &[b1 - a3, b2 - a3, b3 - a3, e3])?;
    let t3 = w3 * unit_series(&[1.0 + a3 - b1, 1.0 + a3 - b2, b3 - a1], &[1.0 + a3 - a1, e3], itol)?;
    let l1 = psi + a2 - b1;
    let l2 = psi + a2 - b2;
    let wr = gamma_ratio_rg(&[], &[2.0 - psi + nf, l1, l2])?;
    let r = wr * unit_series(&[b3 - a1, b3 - a3, psi - 1.0 - nf], &[l1, l2], itol)?;
    let scale = t1.norm().max(t3.norm()).max(r.norm());
    Ok((Scalar::Float(t1 + t3), Scalar::Float(r), scale))
}

// ---------------------------------------------------------------------------
// G-function relations

fn g2p_tol(tol: f64) -> f64 {
    (tol * 1e-2).max(1e-14)
}

/// sin(pi(a_s-a_i)) G[s,i] + sin(pi(a_i-a_k)) G[i,k] + sin(pi(a_k-a_s)) G[k,s] = 0,
/// with G[x,y] = G^{2,p}_{p,p}(z | b; a_x, a_y, a_[x,y]).
#[allow(non_snake_case)]
pub fn verify_three_term_G(
    params: &ParamSet,
    s: usize,
    i: usize,
    k: usize,
    z: &Scalar,
    tol: f64,
) -> IdentityReport {
    let pj = json!({ "params": params, "s": s, "i": i, "k": k, "z": z });
    match three_term_g_terms(params, [s, i, k], z, tol) {
        Ok(t) => sum_report("three_term_g", pj, &t, tol),
        Err(e) => IdentityReport::from_error("three_term_g", pj, &e, tol),
    }
}

fn three_term_g_terms(params: &ParamSet, idx: [usize; 3], z: &Scalar, tol: f64) -> Result<Vec<C64>> {
    distinct(&idx, params.p())?;
    let zc = z.to_c64();
    if (1.0 - zc).norm() >= 1.0 {
        return Err(Error::ConvergenceViolation("|1 - z| must be below 1".into()));
    }
    let a = cvec(params.a());
    let [s, i, k] = idx;
    let mut terms = Vec::with_capacity(3);
    for (x, y) in [(s, i), (i, k), (k, s)] {
        let d = a[x - 1] - a[y - 1];
        // a vanishing sine drops the term; its G need not exist
        if near_integer_c64(d).is_some() {
            terms.push(c0());
            continue;
        }
        let g = g2ppp_eval_detail(params, x, y, zc, g2p_tol(tol))?;
        terms.push(sin_pi(d) * g.value);
    }
    Ok(terms)
}

/// The falling-factorial weighted three-term relation between D tables.
#[allow(non_snake_case)]
pub fn verify_three_term_D(
    params: &ParamSet,
    s: usize,
    i: usize,
    k: usize,
    n: usize,
    tol: f64,
) -> IdentityReport {
    let pj = json!({ "params": params, "s": s, "i": i, "k": k, "n": n });
    match three_term_d_terms(params, [s, i, k], n, tol) {
        Ok(t) => sum_report("three_term_d", pj, &t, tol),
        Err(e) => IdentityReport::from_error("three_term_d", pj, &e, tol),
    }
}

fn three_term_d_terms(params: &ParamSet, idx: [usize; 3], n: usize, tol: f64) -> Result<Vec<C64>> {
    distinct(&idx, params.p())?;
    let a = cvec(params.a());
    let [s, i, k] = idx;
    let itol = inner_tol(tol);
    let mut terms = Vec::new();
    for (x, y) in [(s, i), (i, k), (k, s)] {
        let d = a[x - 1] - a[y - 1];
        if near_integer_c64(d).is_some() {
            continue;
        }
        let table = d_auto(params, x, y, n, itol)?;
        let sn = sin_pi(d);
        for j in 0..=n {
            let c = sign(j) / factorial_f64(j);
            terms.push(c * falling(&a[y - 1], j) * sn * table.values[n - j].to_c64());
        }
    }
    Ok(terms)
}

/// sin(pi psi) times the weighted pF(p-1) at z, against pi G^{p,0} minus the
/// sine-weighted G^{2,p}[k,s], k != s.
pub fn verify_connection_540(params: &ParamSet, s: usize, z: &Scalar, tol: f64) -> IdentityReport {
    let pj = json!({ "params": params, "s": s, "z": z });
    let r = connection_sides(params, s, z, tol).map(|(l, r, scale)| {
        IdentityReport::compare("connection_540", pj.clone(), l, r, scale, tol)
    });
    settle("connection_540", pj, tol, r)
}

fn connection_sides(params: &ParamSet, s: usize, z: &Scalar, tol: f64) -> Result<(Scalar, Scalar, f64)> {
    params.check_index(s)?;
    let x = real_unit_interval(z)?;
    check_nondegenerate(params, false)?;
    let (a, b) = (cvec(params.a()), cvec(params.b()));
    let zc = C64::new(x, 0.0);
    let itol = inner_tol(tol);
    let psi = params.psi_p().to_c64();
    let lhs = sin_pi(psi) * zc.powc(a[s - 1]) * buhring_lhs(params, s, z, itol)?;
    let g0 = PI * gp0pp_eval_detail(params, zc, itol)?.value;
    let mut scale = lhs.norm().max(g0.norm());
    let mut rhs = g0;
    for k in 1..=params.p() {
        if k == s {
            continue;
        }
        let w = sine_weight(&a, &b, k - 1, Some(s - 1));
        let t = w * g2ppp_eval_detail(params, k, s, zc, g2p_tol(tol))?.value / PI;
        scale = scale.max(t.norm());
        rhs -= t;
    }
    Ok((Scalar::Float(lhs), Scalar::Float(rhs), scale))
}

/// For p = 2 the weighted 2F1 of the connection formula, run through the Gauss
/// two-term connection formula.
pub fn connection_gauss_check(params: &ParamSet, s: usize, z: &Scalar, tol: f64) -> Result<IdentityReport> {
    if params.p() != 2 {
        return Err(Error::UnsupportedOrder(params.p()));
    }
    params.check_index(s)?;
    let (a, b) = (params.a(), params.b());
    let o = 2 - s;
    let as_ = &a[s - 1];
    let al1 = as_.add_int(1) - b[0].clone();
    let al2 = as_.add_int(1) - b[1].clone();
    let beta = as_.add_int(1) - a[o].clone();
    let top = al1.clone() + al2.clone() - beta.add_int(-1);
    gauss_connection_residual(&al1, &al2, &top, z, tol)
}

/// G^{p,0}_{p,p} at z from the series around 0 and around 1.
pub fn verify_g_regimes(params: &ParamSet, z: &Scalar, tol: f64) -> IdentityReport {
    let pj = json!({ "params": params, "z": z });
    let itol = inner_tol(tol);
    let r = (|| {
        let near0 = gp0pp_near0(params, z, itol)?;
        let near1 = gp0pp_near1_value(params, 1, z, itol)?;
        let scale = near0.to_c64().norm();
        Ok(IdentityReport::compare("g_regimes", pj.clone(), near0, near1, scale, tol))
    })();
    settle("g_regimes", pj, tol, r)
}

// ---------------------------------------------------------------------------
// suite

/// Tolerances by error budget, with optional per-identity overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolProfile {
    pub finite: f64,
    pub single: f64,
    pub multiple: f64,
    pub overrides: BTreeMap<String, f64>,
}

impl Default for TolProfile {
    fn default() -> Self {
        TolProfile {
            finite: 1e-9,
            single: 1e-8,
            multiple: 1e-7,
            overrides: BTreeMap::new(),
        }
    }
}

impl TolProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: TolProfile =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("tolerance profile: {}", e)))?;
        let all = [t.finite, t.single, t.multiple]
            .into_iter()
            .chain(t.overrides.values().copied());
        for v in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid("tolerances must be positive".into()));
            }
        }
        if let Some(k) = t.overrides.keys().find(|k| !IDENTITY_IDS.contains(&k.as_str())) {
            return Err(Error::Invalid(format!("unknown identity id {:?}", k)));
        }
        Ok(t)
    }

    fn for_id(&self, id: &str, budget: Budget) -> f64 {
        if let Some(t) = self.overrides.get(id) {
            return *t;
        }
        match budget {
            Budget::Finite => self.finite,
            Budget::Single => self.single,
            Budget::Multiple => self.multiple,
        }
    }
}

#[derive(Clone, Copy)]
enum Budget {
    Finite,
    Single,
    Multiple,
}

struct Spec {
    id: &'static str,
    orders: &'static [usize],
    budget: Budget,
    run: fn(&mut Sampler, usize, usize, f64) -> Vec<IdentityReport>,
}

const SPECS: &[Spec] = &[
    Spec { id: "ptolemy", orders: &[1, 2, 3, 4, 5, 6, 7, 8], budget: Budget::Finite, run: run_ptolemy },
    Spec { id: "identity1", orders: &[3, 4], budget: Budget::Single, run: run_identity1 },
    Spec { id: "identity2", orders: &[2, 3, 4, 5, 6], budget: Budget::Finite, run: run_identity2 },
    Spec { id: "3f2_circular", orders: &[3], budget: Budget::Single, run: run_circular },
    Spec { id: "three_term_g", orders: &[3, 4], budget: Budget::Multiple, run: run_three_term_g },
    Spec { id: "three_term_d", orders: &[3, 4], budget: Budget::Single, run: run_three_term_d },
    Spec { id: "connection_540", orders: &[2, 3], budget: Budget::Multiple, run: run_connection },
    Spec { id: "corollary_37", orders: &[3], budget: Budget::Single, run: run_corollary },
    Spec { id: "g_regimes", orders: &[1, 2, 3, 4], budget: Budget::Single, run: run_g_regimes },
    Spec { id: "mellin", orders: &[1, 2, 3], budget: Budget::Multiple, run: run_mellin },
    Spec { id: "sheppard", orders: &[3], budget: Budget::Finite, run: run_sheppard },
    Spec { id: "buhring_p4", orders: &[4], budget: Budget::Finite, run: run_buhring_p4 },
    Spec { id: "multiseries", orders: &[3, 4, 5], budget: Budget::Finite, run: run_multiseries },
];

/// Identity ids accepted by [`run_suite`], in run order.
pub const IDENTITY_IDS: &[&str] = &[
    "ptolemy",
    "identity1",
    "identity2",
    "3f2_circular",
    "three_term_g",
    "three_term_d",
    "connection_540",
    "corollary_37",
    "g_regimes",
    "mellin",
    "sheppard",
    "buhring_p4",
    "multiseries",
];

#[derive(Clone, Debug, Default)]
pub struct SuiteConfig {
    /// Empty means all identities.
    pub ids: Vec<String>,
    /// Inclusive range of orders p; identities keep their supported orders
    /// inside it.
    pub p_range: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

impl Counts {
    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Skipped => self.skipped += 1,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub trials: usize,
    pub total: Counts,
    pub per_identity: BTreeMap<String, Counts>,
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub reports: Vec<IdentityReport>,
    pub summary: SuiteSummary,
}

impl SuiteResult {
    pub fn failures(&self) -> usize {
        self.summary.total.fail
    }
}

/// Runs every selected identity for each trial. Each (identity, trial) pair
/// draws from its own ChaCha8 stream, so the output depends only on the seed
/// and the selection. Identities run in parallel; reports come back in the
/// order of [`IDENTITY_IDS`], then trial.
pub fn run_suite(seed: u64, trials: usize, profile: &TolProfile, cfg: &SuiteConfig) -> Result<SuiteResult> {
    for id in &cfg.ids {
        if !IDENTITY_IDS.contains(&id.as_str()) {
            return Err(Error::Invalid(format!("unknown identity id {:?}", id)));
        }
    }
    let chosen: Vec<(usize, &Spec)> = SPECS
        .iter()
        .enumerate()
        .filter(|(_, s)| cfg.ids.is_empty() || cfg.ids.iter().any(|i| i == s.id))
        .collect();
    let per_spec: Vec<Vec<IdentityReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chosen
            .iter()
            .map(|&(n, spec)| scope.spawn(move || run_spec(n, spec, seed, trials, profile, cfg.p_range)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("identity worker panicked"))
            .collect()
    });
    let mut summary = SuiteSummary {
        seed,
        trials,
        ..Default::default()
    };
    for &(_, spec) in &chosen {
        summary.per_identity.entry(spec.id.to_string()).or_default();
    }
    let reports: Vec<IdentityReport> = per_spec.into_iter().flatten().collect();
    for r in &reports {
        summary.total.add(r.verdict);
        summary.per_identity.entry(r.identity_id.clone()).or_default().add(r.verdict);
    }
    Ok(SuiteResult { reports, summary })
}

fn run_spec(
    n: usize,
    spec: &Spec,
    seed: u64,
    trials: usize,
    profile: &TolProfile,
    range: Option<(usize, usize)>,
) -> Vec<IdentityReport> {
    let orders: Vec<usize> = spec
        .orders
        .iter()
        .copied()
        .filter(|p| range.is_none_or(|(lo, hi)| (lo..=hi).contains(p)))
        .collect();
    let tol = profile.for_id(spec.id, spec.budget);
    let mut out = Vec::new();
    if orders.is_empty() {
        return out;
    }
    for trial in 0..trials {
        let mut sampler = Sampler::new(seed, ((n as u64) << 32) | trial as u64);
        let p = orders[trial % orders.len()];
        for mut r in (spec.run)(&mut sampler, p, trial, tol) {
            r.seed = Some(seed);
            r.trial = Some(trial);
            out.push(r);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// sampling

/// Minimum distance from an integer for a-differences, b - a and psi_p.
pub const DEGENERACY_MARGIN: f64 = 1e-3;
/// Minimum slack in convergence conditions.
pub const CONDITION_MARGIN: f64 = 0.1;
/// Range of Re(1 - b_j + a_k) used for the b entries that must be far left.
/// The series at unit argument behind these identities converge only
/// algebraically, at a rate set by this margin.
pub const FAR_MARGIN: (f64, f64) = (5.0, 7.0);

fn integer_distance(z: C64) -> f64 {
    (z.re - z.re.round()).hypot(z.im)
}

/// Which b entries are pushed left of every a.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Far {
    None,
    /// b_from.. (1-based) are far.
    From(usize),
    /// Only b_i is far.
    Only(usize),
}

/// Seeded parameter draws with the degeneracy rejections of the harness.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    fn number(&mut self, complex: bool) -> C64 {
        let re = self.uniform(-2.0, 2.0);
        let im = if complex { self.uniform(-1.0, 1.0) } else { 0.0 };
        C64::new(re, im)
    }

    /// A rational with denominator in 2..=12 and value in [-2, 2].
    pub fn rational(&mut self) -> Scalar {
        let den = self.rng.random_range(2..=12i64);
        let num = self.rng.random_range(-2 * den..=2 * den);
        Scalar::ratio(num, den)
    }

    /// Float parameters of order p. All a-differences, b - a differences and
    /// psi_p stay [`DEGENERACY_MARGIN`] away from integers.
    pub fn float_params(&mut self, p: usize, complex: bool, far: Far) -> ParamSet {
        loop {
            let a: Vec<C64> = (0..p).map(|_| self.number(complex)).collect();
            let mut b: Vec<C64> = (0..p).map(|_| self.number(complex)).collect();
            let amin = a.iter().map(|x| x.re).fold(f64::INFINITY, f64::min);
            for (j, bj) in b.iter_mut().enumerate() {
                let is_far = match far {
                    Far::None => false,
                    Far::From(f) => j + 1 >= f,
                    Far::Only(i) => j + 1 == i,
                };
                if is_far {
                    bj.re = amin + 1.0 - self.uniform(FAR_MARGIN.0, FAR_MARGIN.1);
                }
            }
            let to = |v: &[C64]| v.iter().map(|&z| Scalar::Float(z)).collect::<Vec<_>>();
            let ps = ParamSet::new(to(&a), to(&b)).expect("matching lengths");
            if admissible(&ps, false) {
                return ps;
            }
        }
    }

    /// Rational parameters of order p with the same rejections; `int_psi`
    /// allows psi_p to be an integer.
    pub fn rational_params(&mut self, p: usize, int_psi: bool) -> ParamSet {
        loop {
            let a: Vec<Scalar> = (0..p).map(|_| self.rational()).collect();
            let b: Vec<Scalar> = (0..p).map(|_| self.rational()).collect();
            let ps = ParamSet::new(a, b).expect("matching lengths");
            if admissible(&ps, int_psi) {
                return ps;
            }
        }
    }

    /// Rational parameters of order p with psi_p = -m, obtained by moving b_p.
    pub fn integer_psi_params(&mut self, p: usize, m: usize) -> ParamSet {
        loop {
            let ps = self.rational_params(p, true);
            let mut b = ps.b().to_vec();
            let shift = ps.psi_p().clone().add_int(m as i64);
            b[p - 1] = b[p - 1].clone() - shift;
            let ps = ParamSet::new(ps.a().to_vec(), b).expect("matching lengths");
            if admissible(&ps, true) {
                return ps;
            }
        }
    }
}

fn admissible(ps: &ParamSet, int_psi: bool) -> bool {
    let (a, b) = (cvec(ps.a()), cvec(ps.b()));
    let p = a.len();
    for i in 0..p {
        for j in (i + 1)..p {
            if integer_distance(a[i] - a[j]) < DEGENERACY_MARGIN {
                return false;
            }
        }
        for bj in &b {
            if integer_distance(bj - a[i]) < DEGENERACY_MARGIN {
                return false;
            }
        }
    }
    int_psi || integer_distance(ps.psi_p().to_c64()) >= DEGENERACY_MARGIN
}

fn z_grid(s: &mut Sampler, zs: &[f64]) -> Scalar {
    Scalar::real(zs[s.index(zs.len())])
}

/// Three distinct 1-based indices in 1..=p.
fn triple(s: &mut Sampler, p: usize) -> [usize; 3] {
    let mut idx: Vec<usize> = (1..=p).collect();
    for n in 0..3 {
        let m = n + s.index(p - n);
        idx.swap(n, m);
    }
    [idx[0], idx[1], idx[2]]
}

fn run_ptolemy(s: &mut Sampler, p: usize, _t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, true, Far::None);
    vec![verify_ptolemy_with(&ps, tol)]
}

fn run_identity1(s: &mut Sampler, p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, false, Far::From(1));
    vec![verify_identity1(&ps, t % 4, tol)]
}

fn run_identity2(s: &mut Sampler, p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, true, Far::None);
    let anchor = 1 + s.index(p);
    vec![verify_identity2(&ps, t % 5, anchor, tol)]
}

fn run_circular(s: &mut Sampler, _p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let i = 1 + s.index(3);
    let ps = s.float_params(3, false, Far::Only(i));
    let which = if t % 2 == 0 { Circular::First } else { Circular::Second };
    vec![verify_3f2_circular(&ps, i, which, tol)]
}

fn run_three_term_g(s: &mut Sampler, p: usize, _t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, false, Far::From(3));
    let [a, b, c] = triple(s, p);
    let z = z_grid(s, &[0.6, 0.75, 0.8, 0.9]);
    vec![verify_three_term_G(&ps, a, b, c, &z, tol)]
}

fn run_three_term_d(s: &mut Sampler, p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, false, Far::From(3));
    let [a, b, c] = triple(s, p);
    vec![verify_three_term_D(&ps, a, b, c, t % 4, tol)]
}

fn run_connection(s: &mut Sampler, p: usize, _t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, false, Far::From(3));
    let anchor = 1 + s.index(p);
    let z = z_grid(s, &[0.6, 0.75, 0.9]);
    let mut out = vec![verify_connection_540(&ps, anchor, &z, tol)];
    if p == 2 {
        let pj = json!({ "params": &ps, "s": anchor, "z": &z });
        let r = connection_gauss_check(&ps, anchor, &z, tol.min(1e-10));
        out.push(settle("gauss", pj, tol, r));
    }
    out
}

fn run_corollary(s: &mut Sampler, _p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(3, false, Far::From(3));
    vec![verify_corollary_37(&ps, t % 4, tol)]
}

fn run_g_regimes(s: &mut Sampler, p: usize, _t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.float_params(p, false, Far::None);
    let z = Scalar::real((s.uniform(0.4, 0.9) * 100.0).round() / 100.0);
    vec![verify_g_regimes(&ps, &z, tol)]
}

/// Mellin trials alternate between Re psi_p > 0.3 (floats) and, for p >= 2,
/// psi_p in {0, -1, -2} (rationals).
fn run_mellin(s: &mut Sampler, p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = if t % 2 == 1 && p >= 2 {
        s.integer_psi_params(p, (t / 2) % 3)
    } else {
        loop {
            let ps = s.float_params(p, false, Far::None);
            if ps.psi_p().to_c64().re >= 0.3 + CONDITION_MARGIN {
                break ps;
            }
        }
    };
    let amin = ps.a().iter().map(|x| x.to_c64().re).fold(f64::INFINITY, f64::min);
    let sv = Scalar::real(0.5 + CONDITION_MARGIN - amin + s.uniform(0.0, 1.0));
    let pj = json!({ "a": ps.a(), "b": ps.b(), "s": &sv });
    vec![settle("mellin", pj, tol, mellin_check_with(&ps, &sv, tol * 1e-2, tol))]
}

/// Draws until the exact identity is free of poles (at most `REDRAWS` times).
const REDRAWS: usize = 1000;

fn redraw<F>(id: &str, tol: f64, mut attempt: F) -> IdentityReport
where
    F: FnMut() -> (serde_json::Value, Result<IdentityReport>),
{
    let mut last = None;
    for _ in 0..REDRAWS {
        let (pj, r) = attempt();
        match r {
            Err(e) if e.is_precondition() => last = Some((pj, e)),
            r => return settle(id, pj, tol, r),
        }
    }
    let (pj, e) = last.expect("at least one draw");
    IdentityReport::from_error(id, pj, &e, tol)
}

fn run_sheppard(s: &mut Sampler, _p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let n = t % 7;
    vec![redraw("sheppard", tol, || {
        let v: Vec<Scalar> = (0..4).map(|_| s.rational()).collect();
        let pj = json!({ "a1": v[0], "a2": v[1], "b1": v[2], "b2": v[3], "n": n });
        (pj, sheppard_residual_p3(n, &v[0], &v[1], &v[2], &v[3]))
    })]
}

fn run_buhring_p4(s: &mut Sampler, _p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let n = t % 7;
    vec![redraw("buhring_p4", tol, || {
        let v: Vec<Scalar> = (0..6).map(|_| s.rational()).collect();
        let pj = json!({ "a1": v[0], "a2": v[1], "b1": v[2], "b2": v[3], "g1": v[4], "g2": v[5], "n": n });
        (pj, buhring_p4_residual(n, &v[0], &v[1], &v[2], &v[3], &v[4], &v[5]))
    })]
}

fn run_multiseries(s: &mut Sampler, p: usize, t: usize, tol: f64) -> Vec<IdentityReport> {
    let ps = s.rational_params(p, true);
    let pj = json!({ "params": &ps, "n": t % 7 });
    vec![settle("multiseries", pj, tol, multiseries_transform_residual(&ps, t % 7))]
}
