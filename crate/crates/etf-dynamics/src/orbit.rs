//! Orbit iteration across the moderate/huge regimes, escape and cycle
//! classification, and the recurrence verdict derived from the behavior of
//! the singular values.
//!
//! A point escapes exponentially when `|f^n(z)| ≥ exp(|f^{n−1}(z)|^δ)` for
//! some `δ > 0` and almost all `n`. Finite orbits cannot certify "almost
//! all n"; the proxy used here is a consistent tail of per-step exponents
//! `d_n = ln(log|f^{n+1}|)/log|f^n|`, plus certification at saturation.

use thiserror::Error;

use crate::function::{FunctionError, FunctionModel};
use crate::logcx::{Complex64, LogComplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EscapeError {
    #[error("orbit tail too short to judge exponential escape")]
    InsufficientTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Saturated,
    CycleFound,
    BudgetExhausted,
    ErrorState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrbitClassification {
    ExponentialEscape { delta_hat: f64 },
    Preperiodic { preperiod: usize, period: usize },
    AttractedToCycle { period: usize, multiplier_log_mod: f64 },
    Undecided { last_log_mod: f64 },
}

impl OrbitClassification {
    pub fn is_escape(&self) -> bool {
        matches!(self, OrbitClassification::ExponentialEscape { .. })
    }
    pub fn is_preperiodic(&self) -> bool {
        matches!(self, OrbitClassification::Preperiodic { .. })
    }
}

/// One iterated trajectory. `points[0]` is `z0` itself; the list is capped
/// at `max_iter + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub z0: Complex64,
    pub points: Vec<LogComplex>,
    pub classification: OrbitClassification,
    pub stop_reason: StopReason,
    /// Set when iteration aborted in an error state: (index, description).
    pub error: Option<(usize, String)>,
}

impl OrbitRecord {
    /// Empirical escape exponent, present iff classified as escape.
    pub fn delta_hat(&self) -> Option<f64> {
        match self.classification {
            OrbitClassification::ExponentialEscape { delta_hat } => Some(delta_hat),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeConfig {
    /// Modulus floor for tail steps (points below `ln M` do not count).
    pub m: f64,
    /// Minimal admissible per-step exponent.
    pub delta_min: f64,
}

impl Default for EscapeConfig {
    fn default() -> Self {
        EscapeConfig {
            m: 10.0,
            delta_min: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    /// Relative tolerance for revisit detection.
    pub cycle_tol: f64,
    pub max_period: usize,
    /// Tolerance handed to moderate-regime evaluation.
    pub eval_tol: f64,
    pub escape: EscapeConfig,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            cycle_tol: 1e-9,
            max_period: 64,
            eval_tol: 1e-11,
            escape: EscapeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleInfo {
    pub preperiod: usize,
    pub period: usize,
    pub multiplier_log_mod: f64,
    /// Distance of the detected revisit (0.0 means bit-exact).
    pub revisit_dist: f64,
}

/// Iterate the orbit of `z0`, switching between ordinary evaluation below
/// `R_switch` and log-polar evaluation above it. Stops at saturation, at a
/// detected cycle, on an error, or when the budget runs out.
pub fn iterate_orbit(
    model: &FunctionModel,
    z0: Complex64,
    max_iter: usize,
    params: &OrbitParams,
) -> OrbitRecord {
    let ln_switch = model.r_switch().ln();
    let mut points = vec![LogComplex::from_complex(z0)];
    let mut stop = StopReason::BudgetExhausted;
    let mut error = None;
    let mut cycle_hit: Option<(usize, usize)> = None;

    while points.len() <= max_iter {
        let cur = *points.last().unwrap();
        if cur.saturated {
            stop = StopReason::Saturated;
            break;
        }
        let next = if cur.log_mod <= ln_switch {
            let z = cur.to_complex().expect("moderate point is representable");
            match model.evaluate(z, params.eval_tol) {
                Ok(w) if w.re.is_finite() && w.im.is_finite() => LogComplex::from_complex(w),
                Ok(_) | Err(FunctionError::Overflow) => {
                    match model.evaluate_lc(&cur) {
                        Ok(e) => e.value,
                        Err(err) => {
                            error = Some((points.len(), err.to_string()));
                            stop = StopReason::ErrorState;
                            break;
                        }
                    }
                }
                Err(err) => {
                    error = Some((points.len(), err.to_string()));
                    stop = StopReason::ErrorState;
                    break;
                }
            }
        } else {
            match model.evaluate_lc(&cur) {
                Ok(e) => e.value,
                Err(err) => {
                    error = Some((points.len(), err.to_string()));
                    stop = StopReason::ErrorState;
                    break;
                }
            }
        };
        points.push(next);
        let i = points.len() - 1;
        if let Some((j, _dist)) = find_revisit(&points, i, ln_switch, params) {
            cycle_hit = Some((j, i));
            stop = StopReason::CycleFound;
            break;
        }
        if next.saturated {
            stop = StopReason::Saturated;
            break;
        }
    }

    let classification = match stop {
        StopReason::Saturated => {
            let delta_hat = match classify_escape(&points, &params.escape) {
                Ok((_, dh)) => dh,
                Err(_) => f64::INFINITY,
            };
            OrbitClassification::ExponentialEscape { delta_hat }
        }
        StopReason::CycleFound => {
            let (j, i) = cycle_hit.unwrap();
            classify_cycle(model, &points, j, i, params)
        }
        StopReason::BudgetExhausted | StopReason::ErrorState => {
            match classify_escape(&points, &params.escape) {
                Ok((true, dh)) => OrbitClassification::ExponentialEscape { delta_hat: dh },
                _ => OrbitClassification::Undecided {
                    last_log_mod: last_finite_log_mod(&points),
                },
            }
        }
    };

    OrbitRecord {
        z0,
        points,
        classification,
        stop_reason: stop,
        error,
    }
}

fn last_finite_log_mod(points: &[LogComplex]) -> f64 {
    points
        .iter()
        .rev()
        .map(|p| p.log_mod)
        .find(|m| m.is_finite())
        .unwrap_or(f64::NEG_INFINITY)
}

/// Check whether `points[i]` revisits an earlier point. Only cycles that
/// stayed entirely within the moderate regime count; excursions through
/// huge moduli are not numerically shadowable.
fn find_revisit(
    points: &[LogComplex],
    i: usize,
    ln_switch: f64,
    params: &OrbitParams,
) -> Option<(usize, f64)> {
    let zi = moderate_complex(&points[i], ln_switch)?;
    let lo = i.saturating_sub(params.max_period);
    for j in (lo..i).rev() {
        let Some(zj) = moderate_complex(&points[j], ln_switch) else {
            // A huge point between j and i breaks shadowability.
            return None;
        };
        let dist = (zi - zj).norm();
        if dist <= params.cycle_tol * zj.norm().max(1.0) {
            return Some((j, dist));
        }
    }
    None
}

fn moderate_complex(p: &LogComplex, ln_switch: f64) -> Option<Complex64> {
    if p.saturated || p.log_mod > ln_switch {
        None
    } else {
        p.to_complex()
    }
}

fn classify_cycle(
    model: &FunctionModel,
    points: &[LogComplex],
    j: usize,
    i: usize,
    params: &OrbitParams,
) -> OrbitClassification {
    let period = i - j;
    let ln_switch = model.r_switch().ln();
    // Multiplier over the best-converged copy of the cycle.
    let mut multiplier = 0.0f64;
    for k in (i - period)..i {
        if let Some(z) = moderate_complex(&points[k], ln_switch) {
            match model.derivative_lc(&LogComplex::from_complex(z)) {
                Ok(d) => multiplier += d.log_mod,
                Err(_) => {
                    multiplier = f64::NAN;
                    break;
                }
            }
        }
    }
    // Earliest index from which the orbit repeats with this period.
    let mut preperiod = j;
    for j0 in 0..j {
        let (Some(a), Some(b)) = (
            moderate_complex(&points[j0], ln_switch),
            moderate_complex(&points[j0 + period], ln_switch),
        ) else {
            continue;
        };
        if (a - b).norm() <= params.cycle_tol * a.norm().max(1.0) {
            preperiod = j0;
            break;
        }
    }
    // On an attracting cycle, finite precision cannot distinguish landing
    // from converging: the iteration collapses onto an exact f64 fixed
    // point either way, so the multiplier decides. Repelling and neutral
    // cycles can only be revisited by genuinely pre-periodic orbits.
    if multiplier < 0.0 {
        OrbitClassification::AttractedToCycle {
            period,
            multiplier_log_mod: multiplier,
        }
    } else {
        OrbitClassification::Preperiodic { preperiod, period }
    }
}

/// Detect a cycle in an existing record (the orbit must have stayed in the
/// moderate regime over the revisited stretch). Returns `None` if there is
/// no revisit.
pub fn detect_cycle(
    model: &FunctionModel,
    record: &OrbitRecord,
    tol: f64,
    max_period: usize,
) -> Option<CycleInfo> {
    let params = OrbitParams {
        cycle_tol: tol,
        max_period,
        ..OrbitParams::default()
    };
    let ln_switch = model.r_switch().ln();
    for i in 1..record.points.len() {
        if let Some((j, dist)) = find_revisit(&record.points, i, ln_switch, &params) {
            let class = classify_cycle(model, &record.points, j, i, &params);
            let (preperiod, period, mult) = match class {
                OrbitClassification::Preperiodic { preperiod, period } => {
                    (preperiod, period, multiplier_over(model, record, i, period))
                }
                OrbitClassification::AttractedToCycle {
                    period,
                    multiplier_log_mod,
                } => (j, period, multiplier_log_mod),
                _ => unreachable!(),
            };
            return Some(CycleInfo {
                preperiod,
                period,
                multiplier_log_mod: mult,
                revisit_dist: dist,
            });
        }
    }
    None
}

fn multiplier_over(model: &FunctionModel, record: &OrbitRecord, i: usize, period: usize) -> f64 {
    let ln_switch = model.r_switch().ln();
    let mut m = 0.0;
    for k in (i - period)..i {
        if let Some(z) = moderate_complex(&record.points[k], ln_switch) {
            if let Ok(d) = model.derivative_lc(&LogComplex::from_complex(z)) {
                m += d.log_mod;
                continue;
            }
        }
        return f64::NAN;
    }
    m
}

/// Judge exponential escape from the orbit tail.
///
/// The tail is the maximal suffix of points with `log_mod > ln M`; it must
/// have at least three entries. Per-step exponents are
/// `d_n = ln(log_mod_{n+1}) / log_mod_n`; a step into an unrepresentably
/// saturated point counts as qualifying. Returns the verdict together with
/// `delta_hat`, the minimum finite tail exponent.
pub fn classify_escape(
    points: &[LogComplex],
    cfg: &EscapeConfig,
) -> Result<(bool, f64), EscapeError> {
    let floor = cfg.m.ln();
    assert!(floor > 1.0, "escape floor M must exceed e");
    let tail_start = points
        .iter()
        .rposition(|p| !(p.log_mod > floor))
        .map_or(0, |k| k + 1);
    let tail = &points[tail_start..];
    if tail.len() < 3 {
        return Err(EscapeError::InsufficientTail);
    }
    let mut delta_hat = f64::INFINITY;
    let mut all_qualify = true;
    for w in tail.windows(2) {
        let (a, b) = (w[0].log_mod, w[1].log_mod);
        if !a.is_finite() {
            // Saturation at infinity can only be the final point.
            continue;
        }
        let d = if b.is_finite() { b.ln() / a } else { f64::INFINITY };
        if d < cfg.delta_min {
            all_qualify = false;
        }
        if d.is_finite() {
            delta_hat = delta_hat.min(d);
        }
    }
    Ok((all_qualify, delta_hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularRole {
    AsymptoticValue,
    CriticalValue,
}

#[derive(Debug, Clone)]
pub struct SingularOrbit {
    pub value: Complex64,
    pub role: SingularRole,
    pub multiplicity: usize,
    pub record: OrbitRecord,
}

#[derive(Debug, Clone)]
pub struct CriticalPointInfo {
    pub point: Complex64,
    /// Whether the critical point itself lies on a cycle.
    pub periodic: bool,
}

/// Orbits of every singularity of the inverse: each distinct asymptotic
/// value and each distinct critical value, with multiplicities.
#[derive(Debug, Clone)]
pub struct SingularReport {
    pub entries: Vec<SingularOrbit>,
    pub critical_points: Vec<CriticalPointInfo>,
}

pub fn singular_orbit_report(
    model: &FunctionModel,
    max_iter: usize,
    params: &OrbitParams,
) -> Result<SingularReport, FunctionError> {
    let mut entries = Vec::new();
    for g in &model.asymptotic_values().groups {
        entries.push(SingularOrbit {
            value: g.value,
            role: SingularRole::AsymptoticValue,
            multiplicity: g.multiplicity,
            record: iterate_orbit(model, g.value, max_iter, params),
        });
    }
    let cps = model.critical_points(1e-12)?;
    let mut critical_points = Vec::new();
    let mut values = Vec::new();
    for &cp in &cps {
        let v = model.evaluate(cp, params.eval_tol)?;
        values.push(v);
        critical_points.push(CriticalPointInfo {
            point: cp,
            periodic: critical_point_periodic(model, cp, params),
        });
    }
    for g in crate::function::group_values(values) {
        entries.push(SingularOrbit {
            value: g.value,
            role: SingularRole::CriticalValue,
            multiplicity: g.multiplicity,
            record: iterate_orbit(model, g.value, max_iter, params),
        });
    }
    Ok(SingularReport {
        entries,
        critical_points,
    })
}

fn critical_point_periodic(model: &FunctionModel, cp: Complex64, params: &OrbitParams) -> bool {
    let mut z = cp;
    for _ in 0..params.max_period {
        match model.evaluate(z, params.eval_tol) {
            Ok(w) if w.re.is_finite() && w.im.is_finite() && w.norm() <= model.r_switch() => {
                if (w - cp).norm() <= params.cycle_tol * cp.norm().max(1.0) {
                    return true;
                }
                z = w;
            }
            _ => return false,
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceVerdict {
    NotRecurrent,
    RecurrentErgodic,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct VerdictReport {
    pub verdict: RecurrenceVerdict,
    pub justification: String,
}

/// The classification-theorem decision: the map is not recurrent iff every
/// asymptotic value escapes exponentially; it is recurrent and ergodic when
/// every singular orbit is pre-periodic and no critical point is periodic.
/// All verdicts are numerical evidence, not proofs.
pub fn recurrence_verdict(report: &SingularReport) -> VerdictReport {
    let mut lines = Vec::new();
    for e in &report.entries {
        let role = match e.role {
            SingularRole::AsymptoticValue => "asymptotic value",
            SingularRole::CriticalValue => "critical value",
        };
        lines.push(format!(
            "  {role} {:+.6}{:+.6}i (multiplicity {}): {}",
            e.value.re,
            e.value.im,
            e.multiplicity,
            describe(&e.record.classification)
        ));
    }
    let periodic_cps: Vec<_> = report
        .critical_points
        .iter()
        .filter(|c| c.periodic)
        .collect();
    for c in &periodic_cps {
        lines.push(format!(
            "  critical point {:+.6}{:+.6}i is periodic",
            c.point.re, c.point.im
        ));
    }

    let asym: Vec<_> = report
        .entries
        .iter()
        .filter(|e| e.role == SingularRole::AsymptoticValue)
        .collect();
    let all_asym_escape = asym.iter().all(|e| e.record.classification.is_escape());
    let all_preperiodic = report
        .entries
        .iter()
        .all(|e| e.record.classification.is_preperiodic());

    let verdict = if all_asym_escape {
        let attracted = report.entries.iter().any(|e| {
            matches!(
                e.record.classification,
                OrbitClassification::AttractedToCycle { .. }
            )
        });
        if attracted {
            lines.push(
                "  mixed: attracted critical values (the verdict depends on asymptotic values only)"
                    .into(),
            );
        }
        if asym.is_empty() {
            lines.push("  no finite asymptotic values; escape condition holds vacuously".into());
        }
        RecurrenceVerdict::NotRecurrent
    } else if all_preperiodic && periodic_cps.is_empty() {
        RecurrenceVerdict::RecurrentErgodic
    } else {
        lines.push("  neither all asymptotic values escape nor all singular orbits pre-periodic".into());
        RecurrenceVerdict::Inconclusive
    };
    lines.push("  caveat: classifications are numerical evidence (finite orbits, tolerance-based)".into());
    VerdictReport {
        verdict,
        justification: lines.join("\n"),
    }
}

fn describe(c: &OrbitClassification) -> String {
    match c {
        OrbitClassification::ExponentialEscape { delta_hat } => {
            format!("exponential escape (delta_hat = {delta_hat:.3})")
        }
        OrbitClassification::Preperiodic { preperiod, period } => {
            format!("pre-periodic (preperiod {preperiod}, period {period})")
        }
        OrbitClassification::AttractedToCycle {
            period,
            multiplier_log_mod,
        } => format!(
            "attracted to a cycle (period {period}, log|multiplier| = {multiplier_log_mod:.2})"
        ),
        OrbitClassification::Undecided { last_log_mod } => {
            format!("undecided (last log-modulus {last_log_mod:.3})")
        }
    }
}

/// Human-readable regime for the orbit table output.
pub fn regime_label(p: &LogComplex, r_switch: f64) -> &'static str {
    if p.saturated {
        "saturated"
    } else if p.log_mod > r_switch.ln() {
        "huge"
    } else {
        "moderate"
    }
}
