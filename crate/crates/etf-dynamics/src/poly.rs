//! Complex polynomials: Horner evaluation, dominant-term evaluation for
//! log-polar arguments, and an Aberth–Ehrlich simultaneous root finder.

use thiserror::Error;

use crate::logcx::{Complex64, LogComplex, DOMINANCE_CUTOFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("root finder did not converge within {0} iterations")]
    NonConvergence(u32),
    #[error("polynomial has no roots (degree < 1)")]
    DegreeTooSmall,
}

/// Iteration cap for the simultaneous root iteration.
const ROOT_ITER_CAP: u32 = 200;
/// Rotation of the initial guess ring, breaking coefficient symmetries.
const GUESS_ROTATION: f64 = 0.4;

/// Polynomial with coefficients in ascending degree order. The zero
/// polynomial has an empty coefficient list; otherwise the leading
/// coefficient is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Negation of every coefficient.
    pub fn negated(&self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Threshold on `log|z|` above which the leading term dominates every
    /// other term by more than [`DOMINANCE_CUTOFF`] nats.
    pub fn dominance_threshold(&self) -> f64 {
        let d = match self.degree() {
            Some(d) if d >= 1 => d,
            _ => return f64::INFINITY,
        };
        let lead = self.coeffs[d].norm().ln();
        let mut t = f64::NEG_INFINITY;
        for (k, c) in self.coeffs.iter().enumerate().take(d) {
            let m = c.norm();
            if m == 0.0 {
                continue;
            }
            t = t.max((m.ln() - lead) / (d - k) as f64);
        }
        DOMINANCE_CUTOFF + t.max(0.0)
    }

    /// Evaluation at a log-polar point. Far beyond the dominance threshold
    /// only the leading term survives `f64` resolution; closer in, the value
    /// is converted down and fed to Horner.
    pub fn eval_lc(&self, z: &LogComplex) -> LogComplex {
        let Some(d) = self.degree() else {
            return LogComplex::ZERO;
        };
        if d == 0 {
            return LogComplex::from_complex(self.coeffs[0]);
        }
        if z.is_zero() {
            return LogComplex::from_complex(self.coeffs[0]);
        }
        let lead = LogComplex::from_complex(self.coeffs[d]);
        let leading_term = || z.powi(d as u32).mul(&lead);
        if z.saturated || !z.arg_valid || z.log_mod > self.dominance_threshold() {
            return leading_term();
        }
        match z.to_complex() {
            Some(zc) => {
                let v = self.eval(zc);
                if v.re.is_finite() && v.im.is_finite() {
                    LogComplex::from_complex(v)
                } else {
                    leading_term()
                }
            }
            None => leading_term(),
        }
    }

    /// Backward-error scale for the residual contract of [`Self::roots`]:
    /// `max_k |c_k| · max(1, |z|)^deg`.
    pub fn residual_scale(&self, z: Complex64) -> f64 {
        let d = self.degree().unwrap_or(0);
        let cmax = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        cmax * z.norm().max(1.0).powi(d as i32)
    }

    /// All `deg` roots by Aberth–Ehrlich simultaneous iteration, each with
    /// `|P(root)| ≤ tol · residual_scale(root)`. Deterministic: guesses sit
    /// on a circle of radius `1 + max|c_k/c_deg|` rotated by 0.4 rad.
    pub fn roots(&self, tol: f64) -> Result<Vec<Complex64>, RootError> {
        let d = self.degree().filter(|&d| d >= 1).ok_or(RootError::DegreeTooSmall)?;
        let lead = self.coeffs[d];
        let radius = 1.0
            + self.coeffs[..d]
                .iter()
                .map(|c| (c / lead).norm())
                .fold(0.0f64, f64::max);
        let deriv = self.derivative();
        let mut zs: Vec<Complex64> = (0..d)
            .map(|j| {
                Complex64::from_polar(
                    radius,
                    GUESS_ROTATION + 2.0 * std::f64::consts::PI * j as f64 / d as f64,
                )
            })
            .collect();

        for _ in 0..ROOT_ITER_CAP {
            let mut all_ok = true;
            let mut max_step = 0.0f64;
            let prev = zs.clone();
            for j in 0..d {
                let zj = prev[j];
                let pv = self.eval(zj);
                if pv.norm() > tol * self.residual_scale(zj) {
                    all_ok = false;
                }
                let dv = deriv.eval(zj);
                let w = if dv.norm() == 0.0 {
                    // Critical point of P itself: nudge off it.
                    Complex64::new(1e-8, 1e-8)
                } else {
                    pv / dv
                };
                let mut sum = Complex64::new(0.0, 0.0);
                for (k, &zk) in prev.iter().enumerate() {
                    if k != j {
                        let diff = zj - zk;
                        if diff.norm() > 0.0 {
                            sum += 1.0 / diff;
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - w * sum;
                let step = if denom.norm() == 0.0 { w } else { w / denom };
                if !(step.re.is_finite() && step.im.is_finite()) {
                    continue;
                }
                zs[j] = zj - step;
                max_step = max_step.max(step.norm());
            }
            if all_ok && max_step <= tol * (1.0 + radius) {
                let mut out = zs;
                out.sort_by(|a, b| {
                    a.re.partial_cmp(&b.re)
                        .unwrap()
                        .then(a.im.partial_cmp(&b.im).unwrap())
                });
                return Ok(out);
            }
        }
        // Residual contract may still hold even if steps keep jittering
        // around a multiple root.
        if zs
            .iter()
            .all(|&z| self.eval(z).norm() <= tol * self.residual_scale(z))
        {
            let mut out = zs;
            out.sort_by(|a, b| {
                a.re.partial_cmp(&b.re)
                    .unwrap()
                    .then(a.im.partial_cmp(&b.im).unwrap())
            });
            return Ok(out);
        }
        Err(RootError::NonConvergence(ROOT_ITER_CAP))
    }
}
