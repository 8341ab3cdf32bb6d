//! Double-exponential (tanh-sinh) quadrature on (0, 1).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::scalar::C64;

/// Result of a quadrature with its error estimate (difference of the last
/// two refinement levels).
#[derive(Clone, Copy, Debug)]
pub struct Quad {
    pub value: C64,
    pub estimate: f64,
    pub evals: usize,
}

const T_MAX: f64 = 4.0;
const MAX_LEVEL: usize = 9;

/// Integrates f over (0, 1). The integrand receives both x and 1 - x, each
/// computed without cancellation, so endpoint singularities like x^(a-1)
/// and (1-x)^(b-1) can be evaluated accurately.
pub fn tanh_sinh<F>(mut f: F, tol: f64) -> Result<Quad>
where
    F: FnMut(f64, f64) -> Result<C64>,
{
    let mut evals = 0usize;
    let mut node = |t: f64| -> Result<C64> {
        let u = FRAC_PI_2 * t.sinh();
        // x = 1/(1+e^{-2u}), 1-x = 1/(1+e^{2u})
        let x = 1.0 / (1.0 + (-2.0 * u).exp());
        let w = 1.0 / (1.0 + (2.0 * u).exp());
        if x <= 0.0 || w <= 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let c = u.cosh();
        let weight = FRAC_PI_2 * t.cosh() / (2.0 * c * c);
        evals += 1;
        Ok(f(x, w)? * weight)
    };

    let mut h = 0.5;
    let mut sum = node(0.0)?;
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        let t = k as f64 * h;
        sum += node(t)? + node(-t)?;
        k += 1;
    }
    let mut prev = sum * h;
    let mut estimate = f64::INFINITY;
    for _ in 0..MAX_LEVEL {
        h /= 2.0;
        let mut k = 1;
        while (k as f64) * h <= T_MAX {
            let t = k as f64 * h;
            sum += node(t)? + node(-t)?;
            k += 2;
        }
        let cur = sum * h;
        estimate = (cur - prev).norm();
        if estimate <= tol * cur.norm().max(1e-300) {
            return Ok(Quad {
                value: cur,
                estimate,
                evals,
            });
        }
        prev = cur;
    }
    Err(Error::QuadratureFailure { estimate })
}
