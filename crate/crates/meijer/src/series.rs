//! Kernel-weighted series sum_j w_n(j) K_j shared by the Bühring and G^{2,p}
//! coefficient routines.
//!
//! The weights are hypergeometric in j. A first pass runs in double
//! precision and decides where to stop. When the terms cancel, the same terms
//! are summed again in extended precision.

use crate::error::{Error, Result};
use crate::scalar::{Field, C64};
use crate::wide::{kernel_family_prec, max_terms, Accumulator, Summed, WideC};

/// A parameter sum(parts) + ncoef n. The parts stay separate so that the
/// extended pass sees the inputs unrounded.
#[derive(Clone, Debug)]
pub(crate) struct Lin {
    parts: Vec<C64>,
    ncoef: i64,
}

impl Lin {
    pub fn of(parts: &[C64]) -> Lin {
        Lin {
            parts: parts.to_vec(),
            ncoef: 0,
        }
    }

    pub fn with_n(mut self, c: i64) -> Lin {
        self.ncoef = c;
        self
    }

    pub fn c64(&self, n: usize) -> C64 {
        self.parts.iter().sum::<C64>() + (self.ncoef * n as i64) as f64
    }

    pub fn wide(&self, n: usize, prec: usize) -> WideC {
        let mut s = WideC::from_c64(C64::new(0.0, 0.0), prec);
        for p in &self.parts {
            s = s + WideC::from_c64(*p, prec);
        }
        s.add_int(self.ncoef * n as i64)
    }
}

/// w_n(0) = prod(init_num)/prod(init_den) and
/// w_n(j+1)/w_n(j) = prod(num + j)/prod(den + j).
#[derive(Clone, Debug, Default)]
pub(crate) struct Weights {
    pub init_num: Vec<Lin>,
    pub init_den: Vec<Lin>,
    pub num: Vec<Lin>,
    pub den: Vec<Lin>,
    /// Algebraic decay rate of the terms, when known; see
    /// [`Accumulator::with_rate`].
    pub rate: Option<f64>,
}

fn pole() -> Error {
    Error::Pole("a lower parameter of the coefficient series vanishes".into())
}

impl Weights {
    fn first_c64(&self, n: usize) -> Result<C64> {
        let mut w = C64::new(1.0, 0.0);
        for l in &self.init_num {
            w *= l.c64(n);
        }
        for l in &self.init_den {
            let d = l.c64(n);
            if d.norm() == 0.0 {
                return Err(pole());
            }
            w /= d;
        }
        Ok(w)
    }

    fn ratio_c64(&self, num: &[C64], den: &[C64], j: usize) -> Result<C64> {
        let jf = j as f64;
        let mut r = C64::new(1.0, 0.0);
        for u in num {
            r *= u + jf;
        }
        for l in den {
            let d = l + jf;
            if d.norm() == 0.0 {
                return Err(pole());
            }
            r /= d;
        }
        Ok(r)
    }
}

/// Produces the kernel values K_0..K_J.
pub(crate) trait KernelSource {
    fn c64(&mut self, jmax: usize) -> Result<Vec<C64>>;
    fn wide(&mut self, jmax: usize, prec: usize) -> Result<Vec<WideC>>;

    /// True when the double kernels up to jmax have lost too many digits to
    /// decide convergence; the series then goes straight to the extended pass.
    fn unreliable(&mut self, _jmax: usize) -> bool {
        false
    }
}

/// Terminating kernels K_j = sum_i (-j)_i prod(up)_i/(prod(lo)_i i!) x^i,
/// with x = 1 unless set.
pub(crate) struct Pascal {
    up: Vec<Lin>,
    lo: Vec<Lin>,
    x: Option<C64>,
    cache: Vec<WideC>,
    cache_prec: usize,
}

impl Pascal {
    pub fn new(up: Vec<Lin>, lo: Vec<Lin>) -> Self {
        Pascal {
            up,
            lo,
            x: None,
            cache: Vec::new(),
            cache_prec: 0,
        }
    }

    pub fn with_x(mut self, x: C64) -> Self {
        self.x = Some(x);
        self
    }

    fn ensure(&mut self, jmax: usize, prec: usize) -> Result<()> {
        if self.cache.len() > jmax && self.cache_prec >= prec {
            return Ok(());
        }
        let (up, lo, x) = (&self.up, &self.lo, self.x);
        let build = |ls: &[Lin], p: usize| ls.iter().map(|l| l.wide(0, p)).collect::<Vec<_>>();
        let params = |p| (build(up, p), build(lo, p), x.map(|z| WideC::from_c64(z, p)));
        self.cache = kernel_family_prec(params, jmax, prec)?;
        self.cache_prec = self.cache[0].precision().max(prec);
        Ok(())
    }
}

impl KernelSource for Pascal {
    fn c64(&mut self, jmax: usize) -> Result<Vec<C64>> {
        self.ensure(jmax, 0)?;
        Ok(self.cache[..=jmax].iter().map(|k| k.to_c64()).collect())
    }

    fn wide(&mut self, jmax: usize, prec: usize) -> Result<Vec<WideC>> {
        self.ensure(jmax, prec)?;
        Ok(self.cache[..=jmax].to_vec())
    }
}

/// K_j = delta_{j0}.
pub(crate) struct Delta;

impl KernelSource for Delta {
    fn c64(&mut self, jmax: usize) -> Result<Vec<C64>> {
        let mut v = vec![C64::new(0.0, 0.0); jmax + 1];
        v[0] = C64::new(1.0, 0.0);
        Ok(v)
    }

    fn wide(&mut self, jmax: usize, prec: usize) -> Result<Vec<WideC>> {
        Ok(self
            .c64(jmax)?
            .into_iter()
            .map(|z| WideC::from_c64(z, prec))
            .collect())
    }
}

/// K_j = 1, for plain hypergeometric series at unit argument.
pub(crate) struct Ones;

impl KernelSource for Ones {
    fn c64(&mut self, jmax: usize) -> Result<Vec<C64>> {
        Ok(vec![C64::new(1.0, 0.0); jmax + 1])
    }

    fn wide(&mut self, jmax: usize, prec: usize) -> Result<Vec<WideC>> {
        Ok(vec![WideC::from_c64(C64::new(1.0, 0.0), prec); jmax + 1])
    }
}

/// The double pass resolves the partial sum only to about 1e-16 of the
/// largest term, so smaller partial sums do not tighten its stopping rule.
const PEAK_FLOOR: f64 = 1e-15;

/// Cancellation ratio (largest term over sum) that triggers the extended pass.
const CANCEL: f64 = 1e3;

/// Sums sum_j w_n(j) K_j for n = 0..=nmax, doubling the kernel table until
/// each entry meets the stagnation test.
pub(crate) fn weighted_series(
    src: &mut dyn KernelSource,
    w: &Weights,
    nmax: usize,
    tol: f64,
) -> Result<Vec<Summed<C64>>> {
    let cap = max_terms().max(1);
    let mut jmax = 64.min(cap - 1);
    let mut kern = src.c64(jmax)?;
    let mut out = Vec::with_capacity(nmax + 1);
    let mut n = 0;
    while n <= nmax {
        let num: Vec<C64> = w.num.iter().map(|l| l.c64(n)).collect();
        let den: Vec<C64> = w.den.iter().map(|l| l.c64(n)).collect();
        let mut acc = Accumulator::new(tol).with_peak_floor(PEAK_FLOOR).with_rate(w.rate);
        let mut wt = w.first_c64(n)?;
        let mut done = false;
        for (j, k) in kern.iter().enumerate() {
            if acc.push(wt * k) {
                done = true;
                break;
            }
            wt *= w.ratio_c64(&num, &den, j)?;
        }
        if !done {
            if jmax + 1 >= cap || src.unreliable(jmax) {
                // the double kernels may have lost every digit to cancellation
                let s = extended(src, w, n, tol, 128, 0, cap).map_err(|e| match e {
                    Error::NoConvergence { .. } => Error::NoConvergence {
                        terms: acc.terms(),
                        last_term: acc.last_term(),
                    },
                    e => e,
                })?;
                out.push(s);
                n += 1;
                continue;
            }
            jmax = (2 * jmax + 1).min(cap - 1);
            kern = src.c64(jmax)?;
            continue;
        }
        let peak = acc.peak();
        let mut s = acc.finish().expect("finished series");
        if !s.value.re.is_finite() || !s.value.im.is_finite() {
            return Err(Error::NoConvergence {
                terms: s.terms,
                last_term: s.last_term,
            });
        }
        let mag = s.value.norm();
        if peak > CANCEL * mag || src.unreliable(s.terms) {
            // redo in extended precision, stopping on the accurate partial sums
            let prec = 96 + if mag > 0.0 { (peak / mag).log2().ceil() as usize } else { 64 };
            s = extended(src, w, n, tol, prec, s.terms, cap)?;
        }
        out.push(s);
        n += 1;
    }
    Ok(out)
}

/// The extended pass, raising the precision until it covers the cancellation
/// among the terms it summed.
fn extended(
    src: &mut dyn KernelSource,
    w: &Weights,
    n: usize,
    tol: f64,
    mut prec: usize,
    start: usize,
    cap: usize,
) -> Result<Summed<C64>> {
    let mut last = None;
    for _ in 0..4 {
        let (ws, wpeak) = wide_series(src, w, n, tol, prec, start, cap)?;
        let m = ws.value.norm();
        let need = if m > 0.0 { (wpeak / m).log2().ceil() as usize + 64 } else { prec + 64 };
        last = Some(ws);
        if need <= prec {
            break;
        }
        prec = need + 32;
    }
    Ok(last.expect("at least one pass"))
}

fn wide_series(
    src: &mut dyn KernelSource,
    w: &Weights,
    n: usize,
    tol: f64,
    prec: usize,
    start: usize,
    cap: usize,
) -> Result<(Summed<C64>, f64)> {
    let num: Vec<WideC> = w.num.iter().map(|l| l.wide(n, prec)).collect();
    let den: Vec<WideC> = w.den.iter().map(|l| l.wide(n, prec)).collect();
    let mut first = WideC::from_c64(C64::new(1.0, 0.0), prec);
    for l in &w.init_num {
        first = first * l.wide(n, prec);
    }
    for l in &w.init_den {
        first = first / l.wide(n, prec);
    }
    let mut jmax = start.max(64).min(cap - 1);
    loop {
        let kern = src.wide(jmax, prec)?;
        let mut acc = Accumulator::new(tol).with_rate(w.rate);
        let mut wt = first.clone();
        for (j, k) in kern.iter().enumerate() {
            if acc.push(wt.clone() * k.clone()) {
                let peak = acc.peak();
                let r = acc.finish().expect("finished series");
                let out = Summed {
                    value: r.value.to_c64(),
                    terms: r.terms,
                    last_term: r.last_term,
                };
                return Ok((out, peak));
            }
            let mut r = WideC::from_c64(C64::new(1.0, 0.0), prec);
            for u in &num {
                r = r * u.add_int(j as i64);
            }
            for l in &den {
                let d = l.add_int(j as i64);
                if d.is_zero_value() {
                    return Err(pole());
                }
                r = r / d;
            }
            wt = wt * r;
        }
        if jmax + 1 >= cap {
            return Err(Error::NoConvergence {
                terms: acc.terms(),
                last_term: acc.last_term(),
            });
        }
        jmax = (2 * jmax + 1).min(cap - 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn delta_kernel_returns_first_weight() {
        let w = Weights {
            init_num: vec![Lin::of(&[c(3.0)]).with_n(1)],
            ..Default::default()
        };
        let s = weighted_series(&mut Delta, &w, 2, 1e-15).unwrap();
        assert_eq!(s[2].value, c(5.0));
    }

    struct Powers;

    impl KernelSource for Powers {
        fn c64(&mut self, jmax: usize) -> Result<Vec<C64>> {
            Ok((0..=jmax).map(|j| c((-30.0f64).powi(j as i32))).collect())
        }
        fn wide(&mut self, jmax: usize, prec: usize) -> Result<Vec<WideC>> {
            let m = WideC::from_c64(c(-30.0), prec);
            let mut v = vec![WideC::from_c64(c(1.0), prec)];
            for _ in 0..jmax {
                let last = v.last().unwrap().clone();
                v.push(last * m.clone());
            }
            Ok(v)
        }
    }

    #[test]
    fn cancelling_series_is_resummed() {
        // sum_j (-30)^j/j! = e^{-30}; the terms peak near 8e11
        let w = Weights {
            den: vec![Lin::of(&[c(1.0)])],
            ..Default::default()
        };
        let s = weighted_series(&mut Powers, &w, 0, 1e-17).unwrap();
        let want = (-30.0f64).exp();
        assert!((s[0].value.re - want).abs() < 1e-12 * want, "{}", s[0].value.re);
    }
}
