//! Classical and generalized (Nørlund) Bernoulli polynomials and the auxiliary
//! sequences q_m, l_r used to express Nørlund coefficients.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::norlund::ParamSet;
use crate::scalar::{Field, Scalar};

/// Which q-sequence to build: the plain one, or the tilde one anchored at k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QVariant {
    Plain,
    /// 1-based anchor index.
    Tilde(usize),
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational tables shared by every call: Bernoulli numbers and the truncated
/// powers u^m of u(t) = t/(e^t-1) - 1.
struct Tables {
    /// B_0, B_1 = -1/2, ...
    numbers: Vec<BigRational>,
    /// powers[m][j] = [t^j] u(t)^m.
    powers: Vec<Vec<BigRational>>,
}

impl Tables {
    fn extend(&mut self, order: usize) {
        let old = self.numbers.len();
        if old > order {
            return;
        }
        // Recompute from scratch; orders stay small.
        let n = order + 1;
        let mut b = vec![BigRational::zero(); n];
        b[0] = BigRational::one();
        for m in 1..n {
            // sum_{j=0}^{m} C(m+1, j) B_j = 0
            let mut s = BigRational::zero();
            let mut c = BigInt::one();
            for (j, bj) in b.iter().enumerate().take(m) {
                s += BigRational::from_integer(c.clone()) * bj;
                c = c * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            b[m] = -s / rat(m as i64 + 1);
        }
        let mut beta = vec![BigRational::zero(); n];
        let mut fact = BigInt::one();
        for j in 0..n {
            if j > 0 {
                fact *= BigInt::from(j);
            }
            beta[j] = b[j].clone() / BigRational::from_integer(fact.clone());
        }
        let mut u = beta;
        u[0] = BigRational::zero();
        let mut powers = vec![vec![BigRational::zero(); n]];
        powers[0][0] = BigRational::one();
        for m in 1..n {
            let prev = &powers[m - 1];
            let mut next = vec![BigRational::zero(); n];
            for i in 0..n {
                if prev[i].is_zero() {
                    continue;
                }
                for j in 1..(n - i) {
                    next[i + j] += &prev[i] * &u[j];
                }
            }
            powers.push(next);
        }
        self.numbers = b;
        self.powers = powers;
    }
}

fn tables(order: usize) -> std::sync::MutexGuard<'static, Tables> {
    static T: OnceLock<Mutex<Tables>> = OnceLock::new();
    let m = T.get_or_init(|| {
        Mutex::new(Tables {
            numbers: Vec::new(),
            powers: Vec::new(),
        })
    });
    let mut g = m.lock().unwrap_or_else(|e| e.into_inner());
    g.extend(order.max(16));
    g
}

/// Bernoulli numbers B_0..B_n with B_1 = -1/2.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    tables(n).numbers[..=n].to_vec()
}

/// Coefficients f_j = [t^j] (t/(e^t-1))^sigma for j = 0..=kmax, by composing
/// the binomial series of (1+u)^sigma with the memoized powers of u.
pub fn power_series_coeffs<T: Field>(sigma: &T, kmax: usize) -> Vec<T> {
    let t = tables(kmax);
    // C(sigma, m) for m = 0..=kmax
    let mut binom = Vec::with_capacity(kmax + 1);
    let mut c = sigma.one_like();
    binom.push(c.clone());
    for m in 1..=kmax {
        c = c * (sigma.add_int(-(m as i64 - 1))) / sigma.int_like(m as i64);
        binom.push(c.clone());
    }
    (0..=kmax)
        .map(|j| {
            let mut s = sigma.zero_like();
            for (m, bm) in binom.iter().enumerate().take(j + 1) {
                let w = &t.powers[m][j];
                if !w.is_zero() {
                    s = s + bm.clone() * sigma.rat_like(w);
                }
            }
            s
        })
        .collect()
}

/// Values B^{(sigma)}_k(x) for k = 0..=kmax.
#[derive(Clone, Debug)]
pub struct BernoulliCache<T> {
    pub sigma: T,
    pub x: T,
    pub coeffs: Vec<T>,
}

impl<T: Field> BernoulliCache<T> {
    pub fn new(sigma: T, x: T, kmax: usize) -> Self {
        let f = power_series_coeffs(&sigma, kmax);
        // x^i / i!
        let mut e = Vec::with_capacity(kmax + 1);
        let mut cur = x.one_like();
        e.push(cur.clone());
        for i in 1..=kmax {
            cur = cur * x.clone() / x.int_like(i as i64);
            e.push(cur.clone());
        }
        let mut coeffs = Vec::with_capacity(kmax + 1);
        let mut fact = x.one_like();
        for k in 0..=kmax {
            if k > 0 {
                fact = fact * x.int_like(k as i64);
            }
            let mut s = x.zero_like();
            for j in 0..=k {
                s = s + f[j].clone() * e[k - j].clone();
            }
            coeffs.push(fact.clone() * s);
        }
        BernoulliCache { sigma, x, coeffs }
    }

    pub fn get(&self, k: usize) -> &T {
        &self.coeffs[k]
    }
}

/// Generalized Bernoulli polynomial B^{(sigma)}_k(x).
pub fn gen_bernoulli<T: Field>(sigma: &T, k: usize, x: &T) -> T {
    BernoulliCache::new(sigma.clone(), x.clone(), k).coeffs[k].clone()
}

/// Classical Bernoulli polynomial B_m(x).
pub fn bernoulli_poly<T: Field>(m: usize, x: &T) -> T {
    let b = bernoulli_numbers(m);
    let mut s = x.zero_like();
    let mut c = BigInt::one();
    // Horner in x over sum_j C(m,j) B_j x^{m-j}
    for j in 0..=m {
        s = s * x.clone() + x.rat_like(&(BigRational::from_integer(c.clone()) * &b[j]));
        c = c * BigInt::from(m - j) / BigInt::from(j + 1);
    }
    s
}

fn check_anchor(p: usize, k: usize) {
    assert!((1..=p).contains(&k), "anchor index {k} outside 1..={p}");
}

/// q_1..q_mmax over a generic field (index 0 is unused and set to zero).
pub fn q_values<T: Field>(a: &[T], b: &[T], mmax: usize, variant: QVariant) -> Vec<T> {
    let z = a[0].zero_like();
    let psi = a
        .iter()
        .zip(b)
        .fold(z.clone(), |s, (ai, bi)| s + bi.clone() - ai.clone());
    let mut out = vec![z.clone()];
    for m in 1..=mmax {
        let mut s = z.clone();
        for (ai, bi) in a.iter().zip(b) {
            s = s + bernoulli_poly(m + 1, ai) - bernoulli_poly(m + 1, bi);
        }
        if let QVariant::Tilde(k) = variant {
            check_anchor(a.len(), k);
            let ak = &a[k - 1];
            s = s + bernoulli_poly(m + 1, &(ak.clone() + psi.clone() - z.one_like()))
                - bernoulli_poly(m + 1, ak);
        }
        let sign = if m % 2 == 1 { 1 } else { -1 };
        out.push(s * z.int_like(sign) / z.int_like(m as i64 + 1));
    }
    out
}

/// l_0..l_R from q by l_r = (1/r) sum_{m=1}^r q_m l_{r-m}.
pub fn l_from_q<T: Field>(q: &[T], r: usize) -> Vec<T> {
    let one = q[0].one_like();
    let mut l = vec![one];
    for n in 1..=r {
        let mut s = q[0].zero_like();
        for m in 1..=n {
            s = s + q[m].clone() * l[n - m].clone();
        }
        l.push(s / q[0].int_like(n as i64));
    }
    l
}

/// Partition-sum solution of the l-recurrence.
pub fn l_partition_sum<T: Field>(q: &[T], r: usize) -> T {
    fn rec<T: Field>(q: &[T], part: usize, rest: usize, acc: T, out: &mut T) {
        if rest == 0 {
            *out = out.clone() + acc;
            return;
        }
        if part == 0 {
            return;
        }
        // choose multiplicity of `part`
        let base = q[part].clone() / q[0].int_like(part as i64);
        let mut term = acc;
        let mut kcount = 0usize;
        loop {
            rec(q, part - 1, rest - kcount * part, term.clone(), out);
            kcount += 1;
            if kcount * part > rest {
                break;
            }
            term = term * base.clone() / q[0].int_like(kcount as i64);
        }
    }
    let mut out = q[0].zero_like();
    rec(q, r, r, q[0].one_like(), &mut out);
    out
}

/// l_r = det(Omega_r)/r! with the lower-Hessenberg Omega_r, via the
/// leading-minor recurrence D_i = sum_j omega_{ij} D_{j-1}.
pub fn l_hessenberg<T: Field>(q: &[T], r: usize) -> T {
    let one = q[0].one_like();
    let mut d = vec![one.clone()];
    for i in 1..=r {
        let mut s = q[0].zero_like();
        // omega_{ij} = q_{i-j+1} (i-1)!/(j-1)!
        let mut ratio = one.clone();
        for j in (1..=i).rev() {
            s = s + q[i - j + 1].clone() * ratio.clone() * d[j - 1].clone();
            if j > 1 {
                ratio = ratio * q[0].int_like(j as i64 - 1);
            }
        }
        d.push(s);
    }
    let mut fact = one;
    for i in 1..=r {
        fact = fact * q[0].int_like(i as i64);
    }
    d[r].clone() / fact
}

pub fn q_m(params: &ParamSet, m: usize, variant: QVariant) -> Scalar {
    q_values(params.a(), params.b(), m, variant)[m].clone()
}

pub fn l_sequence(params: &ParamSet, r: usize, variant: QVariant) -> Vec<Scalar> {
    let q = q_values(params.a(), params.b(), r.max(1), variant);
    l_from_q(&q, r)
}

pub fn l_explicit(params: &ParamSet, r: usize) -> Scalar {
    let q = q_values(params.a(), params.b(), r.max(1), QVariant::Plain);
    l_partition_sum(&q, r)
}

pub fn l_determinant(params: &ParamSet, r: usize) -> Scalar {
    let q = q_values(params.a(), params.b(), r.max(1), QVariant::Plain);
    l_hessenberg(&q, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn bernoulli_numbers_known() {
        let b = bernoulli_numbers(8);
        assert_eq!(b[1], r(-1, 2));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[3], r(0, 1));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[8], r(-1, 30));
    }

    #[test]
    fn generalized_small_cases() {
        let x = r(2, 7);
        assert_eq!(gen_bernoulli(&r(5, 3), 0, &x), r(1, 1));
        assert_eq!(gen_bernoulli(&r(1, 1), 1, &x), x.clone() - r(1, 2));
        assert_eq!(gen_bernoulli(&r(1, 1), 2, &r(0, 1)), r(1, 6));
    }

    #[test]
    fn sigma_one_is_classical() {
        let x = r(-3, 5);
        let c = BernoulliCache::new(r(1, 1), x.clone(), 9);
        for k in 0..=9 {
            assert_eq!(c.coeffs[k], bernoulli_poly(k, &x));
        }
    }

    /// Miller's recurrence for powers of a power series, an independent route.
    #[test]
    fn composition_matches_power_recurrence() {
        let sigma = r(7, 3);
        let n = 10;
        let b = bernoulli_numbers(n);
        let mut beta = Vec::new();
        let mut fact = r(1, 1);
        for (j, bj) in b.iter().enumerate() {
            if j > 0 {
                fact *= r(j as i64, 1);
            }
            beta.push(bj / &fact);
        }
        let mut f = vec![r(1, 1)];
        for m in 1..=n {
            let mut s = r(0, 1);
            for k in 1..=m {
                let c = (&sigma + r(1, 1)) * r(k as i64, 1) - r(m as i64, 1);
                s += c * &beta[k] * &f[m - k];
            }
            f.push(s / r(m as i64, 1));
        }
        assert_eq!(power_series_coeffs(&sigma, n), f);
    }

    #[test]
    fn l_small_orders() {
        let q = vec![r(0, 1), r(2, 3), r(-5, 7), r(1, 9)];
        let l = l_from_q(&q, 3);
        assert_eq!(l[0], r(1, 1));
        assert_eq!(l[1], q[1]);
        assert_eq!(l[2], (&q[2] + &q[1] * &q[1]) / r(2, 1));
        for k in 0..=3 {
            assert_eq!(l_partition_sum(&q, k), l[k]);
            assert_eq!(l_hessenberg(&q, k), l[k]);
        }
    }

    #[test]
    fn q_vanishes_for_equal_params() {
        let p = ParamSet::new(
            vec![Scalar::ratio(1, 3), Scalar::ratio(-2, 5)],
            vec![Scalar::ratio(1, 3), Scalar::ratio(-2, 5)],
        )
        .unwrap();
        for m in 1..5 {
            assert_eq!(q_m(&p, m, QVariant::Plain), Scalar::int(0));
        }
        let p1 = ParamSet::new(vec![Scalar::int(0)], vec![Scalar::int(1)]).unwrap();
        assert_eq!(q_m(&p1, 1, QVariant::Plain), Scalar::int(0));
    }
}
