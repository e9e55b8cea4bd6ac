//! Adaptive complex contour quadrature on straight segments.
//!
//! A 7/15 Gauss–Kronrod pair supplies the embedded error estimate; the
//! worst interval is bisected until the total estimate meets the mixed
//! absolute/relative budget `tol·(1 + |result|)`.

use std::collections::BinaryHeap;

use thiserror::Error;

use crate::logcx::Complex64;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Weights of the embedded 7-point Gauss rule.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const MAX_INTERVALS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand not finite at parameter {t}")]
    NonFinite { t: f64 },
    #[error("quadrature failed to meet tolerance (error estimate {error:.3e})")]
    NonConvergence { error: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.lo == other.lo
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.lo.total_cmp(&self.lo))
    }
}

fn gk15<F: Fn(f64) -> Result<Complex64, QuadError>>(
    f: &F,
    lo: f64,
    hi: f64,
) -> Result<Interval, QuadError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    let error = (kronrod - gauss).norm().max(f64::EPSILON * kronrod.norm());
    Ok(Interval {
        lo,
        hi,
        value: kronrod,
        error,
    })
}

/// Integrate a complex-valued function of a real parameter over `[0, 1]`.
pub fn integrate_unit<F: Fn(f64) -> Result<Complex64, QuadError>>(
    f: &F,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    let mut heap = BinaryHeap::new();
    heap.push(gk15(f, 0.0, 1.0)?);
    loop {
        let total: Complex64 = heap.iter().map(|i| i.value).sum();
        let err: f64 = heap.iter().map(|i| i.error).sum();
        if err <= tol * (1.0 + total.norm()) {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(QuadError::NonConvergence { error: err });
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(gk15(f, worst.lo, mid)?);
        heap.push(gk15(f, mid, worst.hi)?);
    }
}

/// Integrate `f` along the straight segment from `a` to `b`.
pub fn integrate_segment<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    let dir = b - a;
    if dir.norm() == 0.0 {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let g = |t: f64| -> Result<Complex64, QuadError> {
        let v = f(a + dir * t) * dir;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { t })
        }
    };
    integrate_unit(&g, tol)
}
