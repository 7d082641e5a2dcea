//! Turns traces into verdicts: blow-up time estimation, rate-slope fitting
//! against the proven window, runtime sign monitors, and the supersolution
//! comparison certifying boundary-only blow-up.

use crate::discretize::{RadialField, RadialGrid};
use crate::integrate::{StopReason, Trace};
use crate::model::{self, ProblemSpec};
use crate::{Error, Result};

/// Slack on fitted slopes when judged against the proven window.
pub const SLOPE_TOL: f64 = 0.05;

/// Slack for the log-scale supersolution comparisons.
pub const COMPARISON_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotApplicable => "not_applicable",
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self, Self::Fail)
    }
}

/// Parameters of the `u_t − ε·u_r` monitor. ε must respect the bound
/// `ε ≤ q·e^{q·u₀(R)}` under which the boundary argument closes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorParams {
    pub epsilon: f64,
    pub tol_mono: f64,
}

impl MonitorParams {
    /// The admissible upper bound `q·e^{q·u₀(R)}` for ε.
    pub fn epsilon_bound(spec: &ProblemSpec) -> f64 {
        spec.flux_exponent * (spec.flux_exponent * spec.initial_boundary_value()).exp()
    }

    /// ε as a fraction of the bound, with the discrete slack `10 h²`.
    pub fn from_bound_fraction(fraction: f64, spec: &ProblemSpec, grid: RadialGrid) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "epsilon fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let h = grid.spacing();
        Ok(Self { epsilon: fraction * Self::epsilon_bound(spec), tol_mono: 10.0 * h * h })
    }
}

pub(crate) fn j_lower_min_on(values: &[f64], slopes: &[f64], grid: RadialGrid) -> f64 {
    let radius = grid.radius();
    let mut min = f64::INFINITY;
    for i in 0..values.len() {
        let r = grid.node(i);
        min = min.min(slopes[i] - r / radius * values[i].exp());
    }
    min
}

pub(crate) fn j_upper_min_on(slopes: &[f64], rates: &[f64], epsilon: f64) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..slopes.len() {
        min = min.min(rates[i] - epsilon * slopes[i]);
    }
    min
}

/// Grid minima of the basic sign invariants on a single snapshot: the value,
/// the radial slope, and the rate (rhs). The slope and rate flags compare
/// against `-tol`; positivity of the value is a run-level property handled
/// by the caller because admissible initial data may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Minima {
    pub min_value: f64,
    pub min_slope: f64,
    pub min_rate: f64,
    pub slope_ok: bool,
    pub rate_ok: bool,
}

pub fn monitor_lemma1(
    u: &RadialField,
    slope: &RadialField,
    rate: &RadialField,
    tol: f64,
) -> Lemma1Minima {
    let min_value = u.min();
    let min_slope = slope.min();
    let min_rate = rate.min();
    Lemma1Minima {
        min_value,
        min_slope,
        min_rate,
        slope_ok: min_slope >= -tol,
        rate_ok: min_rate >= -tol,
    }
}

/// Grid minimum of `J = u_r − (r/R)·e^u`, the combination whose sign
/// propagates from the flux-ordering hypothesis on the initial data.
pub fn monitor_j_theorem2(u: &RadialField, slope: &RadialField) -> f64 {
    j_lower_min_on(u.values(), slope.values(), u.grid())
}

/// Grid minimum of `J = u_t − ε·u_r`; with ε = 0 this degenerates to the
/// plain rate minimum.
pub fn monitor_j_theorem3(slope: &RadialField, rate: &RadialField, params: &MonitorParams) -> f64 {
    j_upper_min_on(slope.values(), rate.values(), params.epsilon)
}

/// Blow-up time estimate: the least-squares root of `e^{−βM}` against time
/// over the top amplitude decade (primary), cross-checked by Aitken
/// extrapolation of level-crossing times (secondary).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupTime {
    pub t_hat: f64,
    pub primary: f64,
    pub secondary: f64,
    pub spread: f64,
}

fn centered_ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, ym - slope * xm))
}

/// Default linearization exponent for the time estimator: twice the
/// dominance exponent, or `2q` in the pure boundary-driven mode.
pub fn default_beta(spec: &ProblemSpec) -> f64 {
    if spec.reaction_coeff > 0.0 {
        2.0 * spec.dominant_exponent()
    } else {
        2.0 * spec.flux_exponent
    }
}

pub fn estimate_blowup_time(trace: &Trace, beta: f64) -> Result<BlowupTime> {
    if !(beta > 0.0) {
        return Err(Error::InvalidSpec(format!("beta must be positive, got {beta}")));
    }
    if !matches!(trace.outcome, StopReason::AmplitudeThreshold | StopReason::StepUnderflow) {
        return Err(Error::InsufficientSamples(
            "run did not terminate at the amplitude threshold".into(),
        ));
    }
    let samples = &trace.samples;
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples("trace has fewer than two samples".into()));
    }
    if samples.windows(2).any(|w| w[1].boundary_value < w[0].boundary_value) {
        return Err(Error::NonmonotoneTrace);
    }
    let m0 = trace.initial_boundary_value;
    let deep = samples.iter().filter(|s| s.boundary_value > m0 + 2.0).count();
    if deep < 30 {
        return Err(Error::InsufficientSamples(format!(
            "only {deep} samples more than two amplitude units above the initial boundary value"
        )));
    }

    let t_last = samples.last().unwrap().t;
    let m_last = samples.last().unwrap().boundary_value;

    // Primary: if M = −(1/β)·log(κ(T−t)) then e^{−βM} = κ(T−t); the fitted
    // line's root is T regardless of the prefactor κ.
    let y_last = (-beta * m_last).exp();
    let cutoff = 10.0 * y_last;
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for s in samples {
        let y = (-beta * s.boundary_value).exp();
        if y <= cutoff {
            ts.push(s.t);
            ys.push(y);
        }
    }
    let mut primary = match centered_ols(&ts, &ys) {
        Some((slope, intercept)) if slope < 0.0 => -intercept / slope,
        // Deep time quantization can flatten the decade; the root then sits
        // at the last resolvable instant.
        _ => t_last,
    };
    if !(primary > t_last) {
        primary = next_after(t_last);
    }

    // Secondary: level crossings of the last four unit amplitude levels form
    // a near-geometric sequence; Aitken acceleration recovers its limit.
    let secondary = if m_last - 3.0 > m0 {
        let crossings: Vec<f64> =
            (0..4).map(|k| crossing_time(samples, m_last - 3.0 + k as f64)).collect();
        aitken(&crossings).unwrap_or(t_last)
    } else {
        t_last
    };

    Ok(BlowupTime { t_hat: primary, primary, secondary, spread: (primary - secondary).abs() })
}

fn next_after(t: f64) -> f64 {
    f64::from_bits(t.to_bits() + 1)
}

fn crossing_time(samples: &[crate::integrate::Sample], level: f64) -> f64 {
    let i = samples.partition_point(|s| s.boundary_value < level);
    if i == 0 {
        return samples[0].t;
    }
    if i >= samples.len() {
        return samples.last().unwrap().t;
    }
    let (a, b) = (&samples[i - 1], &samples[i]);
    let gap = b.boundary_value - a.boundary_value;
    if gap <= 0.0 {
        return b.t;
    }
    a.t + (b.t - a.t) * (level - a.boundary_value) / gap
}

fn aitken(times: &[f64]) -> Option<f64> {
    let k = times.len();
    if k < 3 {
        return None;
    }
    let (c2, c3, c4) = (times[k - 3], times[k - 2], times[k - 1]);
    let d2 = c3 - c2;
    let d3 = c4 - c3;
    let denom = d3 - d2;
    if denom.abs() <= 4.0 * f64::EPSILON * c4.abs().max(1.0) {
        return Some(c4);
    }
    let accel = c4 - d3 * d3 / denom;
    if accel.is_finite() && accel >= c4 {
        Some(accel)
    } else {
        Some(c4)
    }
}

/// Outcome of the rate fit `u(R,t) ≈ s·(−log(T̂−t)) + b` judged against the
/// proven slope window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub t_hat: f64,
    pub t_hat_spread: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Proven window `(1/(2α), 1/q)`, or the degenerate `(1/(2q), 1/(2q))`
    /// in the pure boundary-driven mode.
    pub window: (f64, f64),
    pub verdict: Verdict,
    /// Amplitude range the fit actually used.
    pub fit_window: (f64, f64),
    pub samples_used: usize,
}

/// The proven slope window for the spec. The lower end `1/(2·max{p,q})`
/// never exceeds the upper end `1/q`.
pub fn proven_window(spec: &ProblemSpec) -> (f64, f64) {
    let q = spec.flux_exponent;
    if spec.reaction_coeff > 0.0 {
        (1.0 / (2.0 * spec.dominant_exponent()), 1.0 / q)
    } else {
        (1.0 / (2.0 * q), 1.0 / (2.0 * q))
    }
}

pub fn fit_rate(
    trace: &Trace,
    spec: &ProblemSpec,
    estimate: &BlowupTime,
    fit_window: Option<(f64, f64)>,
) -> Result<RateReport> {
    let samples = &trace.samples;
    let m_last = trace.final_boundary_value();
    let window = fit_window.unwrap_or((m_last - 2.0, m_last));
    if !(window.0 < window.1) {
        return Err(Error::InvalidSpec(format!(
            "fit window must be a nonempty range, got {window:?}"
        )));
    }
    let t_hat = estimate.t_hat;
    let mut xs = Vec::new();
    let mut ms = Vec::new();
    for s in samples {
        if s.boundary_value >= window.0 && s.boundary_value <= window.1 && s.t < t_hat {
            xs.push(-(t_hat - s.t).ln());
            ms.push(s.boundary_value);
        }
    }
    if xs.len() < 8 {
        return Err(Error::InsufficientSamples(format!(
            "only {} samples inside the fit window {window:?}",
            xs.len()
        )));
    }
    let (slope, intercept) = centered_ols(&xs, &ms)
        .ok_or_else(|| Error::InsufficientSamples("degenerate abscissa in rate fit".into()))?;
    let proven = proven_window(spec);
    let verdict =
        Verdict::from_bool(slope >= proven.0 - SLOPE_TOL && slope <= proven.1 + SLOPE_TOL);
    Ok(RateReport {
        t_hat,
        t_hat_spread: estimate.spread,
        slope,
        intercept,
        window: proven,
        verdict,
        fit_window: window,
        samples_used: xs.len(),
    })
}

/// Constants of the comparison function `z = log(1/[A(R²−r²)² + B(T−t)])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupersolutionEnvelope {
    /// Amplitude constant `A ≥ λ`.
    pub amplitude: f64,
    /// Temporal constant `B` with `A[4R²(n+1)+1] ≤ B ≤` the smallness bound.
    pub temporal: f64,
    /// Constant of the assumed upper bound `u ≤ log(C/(T−t))`.
    pub upper_constant: f64,
    /// Comparison horizon `T`.
    pub horizon: f64,
}

/// Builds the minimal admissible envelope for the exponent-one case:
/// `A = λ` and `B = A[4R²(n+1)+1]`. The smallness gate guarantees that this
/// `B` also satisfies its upper constraint; both checks share the same
/// arithmetic, so a conflict surfaces as [`Error::SmallnessViolated`].
pub fn envelope_from_spec(
    spec: &ProblemSpec,
    grid: RadialGrid,
    horizon: f64,
    upper_constant: f64,
) -> Result<SupersolutionEnvelope> {
    spec.validate()?;
    if spec.reaction_exponent != 1.0 || spec.flux_exponent != 1.0 {
        return Err(Error::NotApplicable(format!(
            "the boundary-blow-up certificate needs p = q = 1 (got p = {}, q = {})",
            spec.reaction_exponent, spec.flux_exponent
        )));
    }
    if spec.reaction_coeff == 0.0 {
        return Err(Error::NotApplicable(
            "the comparison envelope degenerates at zero reaction coefficient".into(),
        ));
    }
    if !(horizon > 0.0) || !(upper_constant > 0.0) {
        return Err(Error::InvalidSpec(
            "comparison horizon and upper constant must be positive".into(),
        ));
    }
    let sup_norm = grid.nodes().map(|r| spec.initial.value(r).abs()).fold(0.0, f64::max);
    let (lhs, rhs) = model::smallness_sides(spec, horizon, upper_constant, sup_norm);
    if lhs > rhs + model::CONDITION_TOL {
        return Err(Error::SmallnessViolated { lhs, rhs });
    }
    Ok(SupersolutionEnvelope {
        amplitude: spec.reaction_coeff,
        temporal: lhs,
        upper_constant,
        horizon,
    })
}

/// Evaluates the closed-form residual `z_t − Δz − λe^z` of the comparison
/// function on the grid × time product and returns its minimum. Admissible
/// constants give a nonnegative residual.
pub fn verify_supersolution_pde(
    env: &SupersolutionEnvelope,
    spec: &ProblemSpec,
    grid: RadialGrid,
    time_nodes: usize,
) -> f64 {
    let a = env.amplitude;
    let b = env.temporal;
    let horizon = env.horizon;
    let radius = grid.radius();
    let nf = spec.dim as f64;
    let lam = spec.reaction_coeff;
    let mut min = f64::INFINITY;
    for j in 0..time_nodes.max(1) {
        let t = horizon * j as f64 / time_nodes.max(1) as f64;
        let remaining = b * (horizon - t);
        for r in grid.nodes() {
            let gap = radius * radius - r * r;
            let v = a * gap * gap;
            let w = v + remaining;
            // z_t − z_rr − (n−1)/r·z_r − λ e^z with the exact derivatives of
            // z = −log w; the (n−1)/r factor cancels against z_r ∝ r.
            let bracket = b - 4.0 * a * (radius * radius - 3.0 * r * r)
                - 4.0 * (nf - 1.0) * a * gap
                - lam;
            let residual = bracket / w - 16.0 * a * a * r * r * gap * gap / (w * w);
            min = min.min(residual);
        }
    }
    min
}

/// Result of the boundary-only blow-up certificate.
///
/// `envelope_margin` is the minimum over snapshots and nodes of `z − u`;
/// `interior_margin` restricts to `r ≤ interior_fraction·R` against the
/// time-independent bound `−log(A(R²−r²)²)`; `hypothesis_margin` checks the
/// assumed boundary bound `u(R,t) ≤ log(C/(T̂−t))` over every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryBlowupReport {
    pub verdict: Verdict,
    pub envelope_margin: f64,
    pub interior_margin: f64,
    pub hypothesis_margin: f64,
    /// Slack used: [`COMPARISON_TOL`] plus the estimator spread.
    pub tol: f64,
}

pub fn check_boundary_blowup(
    trace: &Trace,
    env: &SupersolutionEnvelope,
    estimate: &BlowupTime,
    interior_fraction: f64,
) -> Result<BoundaryBlowupReport> {
    if !(0.0..1.0).contains(&interior_fraction) {
        return Err(Error::InvalidSpec(format!(
            "interior fraction must lie in [0, 1), got {interior_fraction}"
        )));
    }
    if trace.snapshots.is_empty() {
        return Err(Error::InsufficientSnapshots("trace holds no snapshots".into()));
    }
    let t_hat = estimate.t_hat;
    let a = env.amplitude;
    let b = env.temporal;
    let mut envelope_margin = f64::INFINITY;
    let mut interior_margin = f64::INFINITY;
    for snap in &trace.snapshots {
        if !(snap.t < t_hat) {
            return Err(Error::InsufficientSamples(
                "estimated blow-up time does not exceed a snapshot time".into(),
            ));
        }
        let grid = snap.field.grid();
        let radius = grid.radius();
        let remaining = b * (t_hat - snap.t);
        for (i, &u) in snap.field.values().iter().enumerate() {
            let r = grid.node(i);
            let gap = radius * radius - r * r;
            let v = a * gap * gap;
            envelope_margin = envelope_margin.min(-(v + remaining).ln() - u);
            if r <= interior_fraction * radius {
                interior_margin = interior_margin.min(-v.ln() - u);
            }
        }
    }
    let mut hypothesis_margin = f64::INFINITY;
    for s in &trace.samples {
        hypothesis_margin = hypothesis_margin
            .min(env.upper_constant.ln() - (t_hat - s.t).ln() - s.boundary_value);
    }
    let tol = COMPARISON_TOL + estimate.spread;
    let pass =
        envelope_margin >= -tol && interior_margin >= -tol && hypothesis_margin >= -tol;
    Ok(BoundaryBlowupReport {
        verdict: Verdict::from_bool(pass),
        envelope_margin,
        interior_margin,
        hypothesis_margin,
        tol,
    })
}
