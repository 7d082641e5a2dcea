//! Adaptive explicit time integration of the semi-discrete system.
//!
//! The step size is the minimum of a parabolic stability cap and an
//! amplitude-aware law that shrinks as the boundary value grows, so each
//! accepted step raises the maximum by roughly `delta_max`. A run records a
//! scalar sample every step and field snapshots at unit amplitude levels
//! (plus an optional dense window for the kernel oracle), and stops at the
//! amplitude threshold standing in for blow-up, at step underflow, or at the
//! configured horizon. Blow-up itself is *declared* only by the analyzer.

use crate::analyze;
use crate::discretize::{
    derivative_into, flux_closure_into, laplacian_interior_into, RadialField, RadialGrid,
};
use crate::model::ProblemSpec;
use crate::{Error, Result};

/// Hard floor for the adaptive step; below this the run is effectively at
/// blow-up and must stop.
pub const DT_FLOOR: f64 = 1e-16;

/// Step-size and termination policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Fraction of the parabolic stability limit `h²/(2n)`.
    pub cfl_safety: f64,
    /// Maximum allowed increase of `max u` per step.
    pub delta_max: f64,
    /// Amplitude threshold terminating the run.
    pub u_stop: f64,
    /// Wall time-horizon guard.
    pub t_max: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { cfl_safety: 0.4, delta_max: 0.05, u_stop: 25.0, t_max: 100.0 }
    }
}

impl StepControl {
    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::InvalidControl(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        if !(self.delta_max > 0.0) {
            return Err(Error::InvalidControl(format!(
                "delta_max must be positive, got {}",
                self.delta_max
            )));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidControl(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(self.u_stop > spec.initial_boundary_value()) {
            return Err(Error::InvalidControl(format!(
                "u_stop = {} does not exceed the initial boundary value {}",
                self.u_stop,
                spec.initial_boundary_value()
            )));
        }
        // The monitors evaluate e^{u}, e^{qu} and e^{pu} up to the threshold.
        let q = spec.flux_exponent;
        let p = if spec.reaction_coeff > 0.0 { spec.reaction_exponent } else { 0.0 };
        if self.u_stop * q.max(p).max(1.0) > 700.0 {
            return Err(Error::InvalidControl(format!(
                "u_stop = {} is too large for the exponential terms",
                self.u_stop
            )));
        }
        Ok(())
    }
}

/// Snapshot recording policy: fields are stored whenever the maximum crosses
/// the next amplitude level, and optionally on every `dense_every`-th step
/// inside a time window (used by the integral-identity oracle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotPolicy {
    pub amplitude_step: f64,
    pub dense_window: Option<(f64, f64)>,
    pub dense_every: usize,
}

impl Default for SnapshotPolicy {
    fn default() -> Self {
        Self { amplitude_step: 1.0, dense_window: None, dense_every: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `max u` reached `u_stop`.
    AmplitudeThreshold,
    /// The adaptive step fell below [`DT_FLOOR`] or below time resolution.
    StepUnderflow,
    /// `t` reached `t_max` with no blow-up observed.
    TimeHorizon,
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            Self::AmplitudeThreshold => "amplitude_threshold",
            Self::StepUnderflow => "step_underflow",
            Self::TimeHorizon => "time_horizon",
        }
    }
}

/// Per-step scalar diagnostics: time, boundary value `M(t) = u(R,t)`, its
/// rate `u_t(R,t)`, the grid minima of the sign monitors, and the accepted
/// step (zero on the initial row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub boundary_value: f64,
    pub boundary_rate: f64,
    pub min_slope: f64,
    pub min_j_lower: f64,
    pub min_j_upper: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: RadialField,
}

/// Running minima and flags for the invariant monitors over a whole run.
///
/// Positivity of `u` is tracked as *preservation*: the initial profile may be
/// negative, so the flag only demands that once the grid minimum becomes
/// nonnegative it never drops below `-tol` again.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSummary {
    pub boundary_nondecreasing: bool,
    pub min_value: f64,
    pub min_slope: f64,
    pub min_rate: f64,
    pub min_j_lower: f64,
    pub min_j_upper: f64,
    pub positivity_preserved: bool,
    pub first_nonnegative_time: Option<f64>,
    /// Largest observed `u_t(R)/e^{2α·u(R)}`; bounded for hypothesis data.
    pub max_rate_ratio_lower: f64,
    /// Smallest observed `u_t(R)/e^{q·u(R)}`; stays above ε for hypothesis data.
    pub min_rate_ratio_upper: f64,
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    pub outcome: StopReason,
    /// `u₀(R)`, the base for amplitude levels and estimator preconditions.
    pub initial_boundary_value: f64,
    /// ε used by the `u_t − ε·u_r` monitor column.
    pub j_upper_epsilon: f64,
    /// Discrete slack `10 h²` used by the sign monitors.
    pub monitor_tol: f64,
    pub monitors: MonitorSummary,
}

impl Trace {
    pub fn final_time(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn final_boundary_value(&self) -> f64 {
        self.samples.last().map(|s| s.boundary_value).unwrap_or(f64::NAN)
    }
}

/// Right-hand side of the semi-discrete system: radial Laplacian plus
/// reaction at interior and center nodes, flux-closure Laplacian plus
/// reaction at the boundary node.
pub fn compute_rhs(u: &RadialField, spec: &ProblemSpec) -> Result<RadialField> {
    let grid = u.grid();
    let mut out = vec![0.0; grid.len()];
    rhs_into(u.values(), grid, spec, &mut out)?;
    RadialField::new(grid, out)
}

fn rhs_into(u: &[f64], grid: RadialGrid, spec: &ProblemSpec, out: &mut [f64]) -> Result<()> {
    laplacian_interior_into(u, grid, spec.dim, out);
    out[grid.cells()] = flux_closure_into(u, grid, spec.flux_exponent, spec.dim)?;
    let lam = spec.reaction_coeff;
    if lam != 0.0 {
        let p = spec.reaction_exponent;
        for (o, &v) in out.iter_mut().zip(u.iter()) {
            *o += lam * (p * v).exp();
        }
    }
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Overflow("right-hand side left the floating range".into()));
    }
    Ok(())
}

/// Adaptive step:
/// `dt = min(cfl·h²/(2n), delta_max / (λp·e^{pM} + (2/h)·q·e^{qM}))` with
/// `M = max u`. The `2/h` weight is the factor with which the boundary flux
/// enters the ghost-closure Laplacian.
pub fn select_dt(u: &RadialField, spec: &ProblemSpec, ctl: &StepControl) -> Result<f64> {
    select_dt_value(u.max(), u.grid().spacing(), spec, ctl)
}

fn select_dt_value(u_max: f64, h: f64, spec: &ProblemSpec, ctl: &StepControl) -> Result<f64> {
    let cap = ctl.cfl_safety * h * h / (2.0 * spec.dim as f64);
    let q = spec.flux_exponent;
    let mut denom = 2.0 / h * q * (q * u_max).exp();
    if spec.reaction_coeff != 0.0 {
        denom += spec.reaction_coeff * spec.reaction_exponent * (spec.reaction_exponent * u_max).exp();
    }
    let dt = cap.min(ctl.delta_max / denom);
    if !(dt >= DT_FLOOR) {
        return Err(Error::Underflow { dt });
    }
    Ok(dt)
}

/// One classical four-stage fourth-order step.
pub fn step(u: &RadialField, spec: &ProblemSpec, dt: f64) -> Result<RadialField> {
    let grid = u.grid();
    let mut bufs = StepBuffers::new(grid.len());
    rhs_into(u.values(), grid, spec, &mut bufs.k1)?;
    let mut out = vec![0.0; grid.len()];
    rk4_into(u.values(), grid, spec, dt, &mut bufs, &mut out)?;
    RadialField::new(grid, out)
}

struct StepBuffers {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl StepBuffers {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            stage: vec![0.0; len],
        }
    }
}

/// Advances `u` by `dt`; `bufs.k1` must already hold the rhs at `u`.
fn rk4_into(
    u: &[f64],
    grid: RadialGrid,
    spec: &ProblemSpec,
    dt: f64,
    bufs: &mut StepBuffers,
    out: &mut [f64],
) -> Result<()> {
    let half = 0.5 * dt;
    for i in 0..u.len() {
        bufs.stage[i] = u[i] + half * bufs.k1[i];
    }
    rhs_into(&bufs.stage, grid, spec, &mut bufs.k2)?;
    for i in 0..u.len() {
        bufs.stage[i] = u[i] + half * bufs.k2[i];
    }
    rhs_into(&bufs.stage, grid, spec, &mut bufs.k3)?;
    for i in 0..u.len() {
        bufs.stage[i] = u[i] + dt * bufs.k3[i];
    }
    rhs_into(&bufs.stage, grid, spec, &mut bufs.k4)?;
    let sixth = dt / 6.0;
    for i in 0..u.len() {
        out[i] = u[i] + sixth * (bufs.k1[i] + 2.0 * bufs.k2[i] + 2.0 * bufs.k3[i] + bufs.k4[i]);
    }
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Overflow("state left the floating range during a step".into()));
    }
    Ok(())
}

/// Integrates from the spec's initial profile until the amplitude threshold,
/// step underflow, or the time horizon. `j_upper_epsilon` is the ε of the
/// `u_t − ε·u_r` monitor column (see `analyze::MonitorParams`).
pub fn run(
    spec: &ProblemSpec,
    grid: RadialGrid,
    ctl: &StepControl,
    j_upper_epsilon: f64,
    policy: &SnapshotPolicy,
) -> Result<Trace> {
    spec.validate()?;
    ctl.validate(spec)?;
    if !(j_upper_epsilon >= 0.0) || !j_upper_epsilon.is_finite() {
        return Err(Error::InvalidControl(format!(
            "monitor epsilon must be finite and nonnegative, got {j_upper_epsilon}"
        )));
    }
    if policy.dense_every == 0 || !(policy.amplitude_step > 0.0) {
        return Err(Error::InvalidControl("invalid snapshot policy".into()));
    }

    let n = grid.cells();
    let h = grid.spacing();
    let tol = 10.0 * h * h;
    let mut u: Vec<f64> = grid.nodes().map(|r| spec.initial.value(r)).collect();
    let mut t = 0.0f64;
    let initial_boundary = u[n];

    let mut bufs = StepBuffers::new(grid.len());
    let mut next = vec![0.0; grid.len()];
    let mut slope = vec![0.0; grid.len()];

    rhs_into(&u, grid, spec, &mut bufs.k1)?;
    derivative_into(&u, grid, Some(spec.flux_exponent), &mut slope)?;

    let alpha = spec.dominant_exponent();
    let mut summary = MonitorSummary {
        boundary_nondecreasing: true,
        min_value: f64::INFINITY,
        min_slope: f64::INFINITY,
        min_rate: f64::INFINITY,
        min_j_lower: f64::INFINITY,
        min_j_upper: f64::INFINITY,
        positivity_preserved: true,
        first_nonnegative_time: None,
        max_rate_ratio_lower: f64::NEG_INFINITY,
        min_rate_ratio_upper: f64::INFINITY,
    };

    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let fold = |u: &[f64], slope: &[f64], rate: &[f64], t: f64, dt: f64,
                    summary: &mut MonitorSummary,
                    samples: &mut Vec<Sample>| {
        let min_value = u.iter().copied().fold(f64::INFINITY, f64::min);
        let min_slope = slope.iter().copied().fold(f64::INFINITY, f64::min);
        let min_rate = rate.iter().copied().fold(f64::INFINITY, f64::min);
        let min_j_lower = analyze::j_lower_min_on(u, slope, grid);
        let min_j_upper = analyze::j_upper_min_on(slope, rate, j_upper_epsilon);

        if let Some(prev) = samples.last() {
            if u[n] < prev.boundary_value {
                summary.boundary_nondecreasing = false;
            }
        }
        summary.min_value = summary.min_value.min(min_value);
        summary.min_slope = summary.min_slope.min(min_slope);
        summary.min_rate = summary.min_rate.min(min_rate);
        summary.min_j_lower = summary.min_j_lower.min(min_j_lower);
        summary.min_j_upper = summary.min_j_upper.min(min_j_upper);
        if summary.first_nonnegative_time.is_none() {
            if min_value >= 0.0 {
                summary.first_nonnegative_time = Some(t);
            }
        } else if min_value < -tol {
            summary.positivity_preserved = false;
        }
        summary.max_rate_ratio_lower =
            summary.max_rate_ratio_lower.max(rate[n] / (2.0 * alpha * u[n]).exp());
        summary.min_rate_ratio_upper =
            summary.min_rate_ratio_upper.min(rate[n] / (spec.flux_exponent * u[n]).exp());

        samples.push(Sample {
            t,
            boundary_value: u[n],
            boundary_rate: rate[n],
            min_slope,
            min_j_lower,
            min_j_upper,
            dt,
        });
    };

    fold(&u, &slope, &bufs.k1, t, 0.0, &mut summary, &mut samples);
    snapshots.push(Snapshot { t, field: RadialField::new(grid, u.clone())? });
    let mut next_level = initial_boundary + policy.amplitude_step;

    let outcome;
    let mut step_index = 0usize;
    loop {
        let m = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if u[n] >= ctl.u_stop || m >= ctl.u_stop {
            outcome = StopReason::AmplitudeThreshold;
            break;
        }
        if t >= ctl.t_max {
            outcome = StopReason::TimeHorizon;
            break;
        }
        let dt = match select_dt_value(m, h, spec, ctl) {
            Ok(dt) => dt,
            Err(Error::Underflow { .. }) => {
                outcome = StopReason::StepUnderflow;
                break;
            }
            Err(e) => return Err(e),
        };
        // Below time resolution the accumulated clock can no longer advance;
        // that is the same exhaustion the dt floor guards against.
        if t + dt == t {
            outcome = StopReason::StepUnderflow;
            break;
        }

        rk4_into(&u, grid, spec, dt, &mut bufs, &mut next)?;
        std::mem::swap(&mut u, &mut next);
        t += dt;
        step_index += 1;

        rhs_into(&u, grid, spec, &mut bufs.k1)?;
        derivative_into(&u, grid, Some(spec.flux_exponent), &mut slope)?;
        fold(&u, &slope, &bufs.k1, t, dt, &mut summary, &mut samples);

        let mut want = false;
        if u[n] >= next_level {
            want = true;
            while u[n] >= next_level {
                next_level += policy.amplitude_step;
            }
        }
        if let Some((a, b)) = policy.dense_window {
            if t >= a && t <= b && step_index % policy.dense_every == 0 {
                want = true;
            }
        }
        if want {
            snapshots.push(Snapshot { t, field: RadialField::new(grid, u.clone())? });
        }
    }

    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(Snapshot { t, field: RadialField::new(grid, u.clone())? });
    }

    Ok(Trace {
        samples,
        snapshots,
        outcome,
        initial_boundary_value: initial_boundary,
        j_upper_epsilon,
        monitor_tol: tol,
        monitors: summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_quadratic_initial_data, InitialData};

    fn spec(q: f64, lam: f64, center: f64) -> ProblemSpec {
        let initial = build_quadratic_initial_data(center, q, 1.0, 50.0).unwrap();
        ProblemSpec {
            dim: 1,
            radius: 1.0,
            reaction_exponent: 1.0,
            flux_exponent: q,
            reaction_coeff: lam,
            initial,
        }
    }

    #[test]
    fn rhs_on_flat_field_is_reaction_plus_boundary_closure() {
        let grid = RadialGrid::new(20, 1.0).unwrap();
        let s = ProblemSpec {
            dim: 1,
            radius: 1.0,
            reaction_exponent: 1.0,
            flux_exponent: 1.0,
            reaction_coeff: 0.0,
            initial: InitialData::Quadratic { center: 0.0, curvature: 0.0 },
        };
        let u = RadialField::constant(grid, 0.0).unwrap();
        let rhs = compute_rhs(&u, &s).unwrap();
        for &v in &rhs.values()[..grid.cells()] {
            assert_eq!(v, 0.0);
        }
        // Ghost closure of the flat field with unit flux: 2h·1/h² = 2/h.
        let expected = 2.0 / grid.spacing();
        assert!((rhs.boundary_value() - expected).abs() < 1e-9);
        assert!(rhs.boundary_value() > 0.0);
    }

    #[test]
    fn rhs_constant_field_interior_is_reaction() {
        let grid = RadialGrid::new(20, 1.0).unwrap();
        let s = ProblemSpec {
            dim: 1,
            radius: 1.0,
            reaction_exponent: 1.0,
            flux_exponent: 1.0,
            reaction_coeff: 1.0,
            initial: InitialData::Quadratic { center: 0.0, curvature: 0.0 },
        };
        let c = 0.7;
        let u = RadialField::constant(grid, c).unwrap();
        let rhs = compute_rhs(&u, &s).unwrap();
        for &v in &rhs.values()[..grid.cells()] {
            assert!((v - c.exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn rhs_on_compatible_quadratic() {
        // Δu₀ = 2bn exactly under the closure, so the boundary rhs is
        // 2bn + λe^{p·u₀(R)}.
        let s = spec(2.0, 1.0, -1.0);
        let grid = RadialGrid::new(128, 1.0).unwrap();
        let b = s.initial.curvature();
        let u = crate::model::evaluate_initial_data(&s.initial, grid);
        let rhs = compute_rhs(&u, &s).unwrap();
        let expected = 2.0 * b + (s.initial.value(1.0)).exp();
        assert!(
            (rhs.boundary_value() - expected).abs() < 1e-6,
            "{} vs {expected}",
            rhs.boundary_value()
        );
    }

    #[test]
    fn dt_law_worked_example() {
        // λ=0, M=0, q=1, h=0.05, n=1 with defaults:
        // min(0.4·0.00125, 0.05/40) = 5e-4.
        let grid = RadialGrid::new(20, 1.0).unwrap();
        assert_eq!(grid.spacing(), 0.05);
        let s = ProblemSpec {
            dim: 1,
            radius: 1.0,
            reaction_exponent: 1.0,
            flux_exponent: 1.0,
            reaction_coeff: 0.0,
            initial: InitialData::Quadratic { center: 0.0, curvature: 0.0 },
        };
        let u = RadialField::constant(grid, 0.0).unwrap();
        let dt = select_dt(&u, &s, &StepControl::default()).unwrap();
        assert!((dt - 5e-4).abs() < 1e-18, "dt = {dt}");
    }

    #[test]
    fn dt_law_boundary_asymptotics() {
        // For q > p and large M the boundary term dominates:
        // dt ≈ delta_max·(h/2)·e^{-qM}/q.
        let s = spec(2.0, 1.0, -1.0);
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let ctl = StepControl { u_stop: 700.0, ..StepControl::default() };
        // bypass validate: call through the field API with a large constant
        for m in [8.0, 10.0, 12.0] {
            let u = RadialField::constant(grid, m).unwrap();
            let dt = select_dt(&u, &s, &ctl).unwrap();
            let asymptotic = ctl.delta_max * grid.spacing() / 2.0 * (-s.flux_exponent * m).exp()
                / s.flux_exponent;
            assert!((dt / asymptotic - 1.0).abs() < 0.02, "M={m}: {dt} vs {asymptotic}");
        }
    }

    #[test]
    fn dt_flat_small_field_hits_parabolic_cap() {
        let s = spec(1.0, 0.0, -1.0);
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let u = RadialField::constant(grid, -5.0).unwrap();
        let dt = select_dt(&u, &s, &StepControl::default()).unwrap();
        let cap = 0.4 * grid.spacing() * grid.spacing() / 2.0;
        assert_eq!(dt, cap);
    }

    #[test]
    fn dt_underflow_at_huge_amplitude() {
        let s = spec(1.0, 0.0, -1.0);
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let u = RadialField::constant(grid, 50.0).unwrap();
        let err = select_dt(&u, &s, &StepControl { u_stop: 60.0, ..Default::default() });
        assert!(matches!(err, Err(Error::Underflow { .. })));
    }

    #[test]
    fn step_fixed_point_on_zero_rhs() {
        // A pure-diffusion constant profile with zero flux is impossible here
        // (the boundary always pushes), so check the interior fixed point on
        // a linear-in-time exact case instead: rhs ≡ c gives u + dt·c.
        let s = spec(1.0, 0.0, -1.0);
        let grid = RadialGrid::new(32, 1.0).unwrap();
        let u = crate::model::evaluate_initial_data(&s.initial, grid);
        let dt = 1e-6;
        let stepped = step(&u, &s, dt).unwrap();
        let rhs = compute_rhs(&u, &s).unwrap();
        for i in 0..=grid.cells() {
            let euler = u.values()[i] + dt * rhs.values()[i];
            assert!(
                (stepped.values()[i] - euler).abs() < 10.0 * dt * dt,
                "node {i}: {} vs {euler}",
                stepped.values()[i]
            );
        }
    }

    #[test]
    fn step_doubling_consistency() {
        // The gap between one full step and two half steps scales like dt⁵.
        let s = spec(2.0, 1.0, -1.0);
        let grid = RadialGrid::new(32, 1.0).unwrap();
        let u = crate::model::evaluate_initial_data(&s.initial, grid);
        let gap = |dt: f64| {
            let full = step(&u, &s, dt).unwrap();
            let half = step(&step(&u, &s, dt / 2.0).unwrap(), &s, dt / 2.0).unwrap();
            let mut diff: f64 = 0.0;
            for i in 0..=grid.cells() {
                diff = diff.max((full.values()[i] - half.values()[i]).abs());
            }
            diff
        };
        let coarse = gap(2e-4);
        let fine = gap(1e-4);
        let order = (coarse / fine).log2();
        assert!(order > 3.5, "gaps {coarse:.3e} / {fine:.3e}, order {order:.2}");
    }

    #[test]
    fn linear_heat_mode_decays_at_analytic_rate() {
        // λ = 0 with the boundary frozen to zero flux is the Neumann heat
        // equation; an even cosine mode cos(πr/R) decays like e^{-π²t/R²}.
        // The nonlinear closure is bypassed by stepping the interior scheme
        // directly against the analytic solution restricted to early times
        // and a profile whose boundary flux matches e^{q·u(R)} ≈ 0 poorly;
        // instead freeze the boundary value by comparing interior nodes only
        // over a very short horizon so the boundary influence stays local.
        let grid = RadialGrid::new(128, 1.0).unwrap();
        let s = ProblemSpec {
            dim: 1,
            radius: 1.0,
            reaction_exponent: 1.0,
            flux_exponent: 1.0,
            reaction_coeff: 0.0,
            initial: InitialData::Quadratic { center: 0.0, curvature: 0.0 },
        };
        let pi = std::f64::consts::PI;
        let mut u = RadialField::from_fn(grid, |r| (pi * r).cos() - 40.0).unwrap();
        let t_final = 2e-3;
        let dt = 1e-6;
        let steps = (t_final / dt) as usize;
        for _ in 0..steps {
            u = step(&u, &s, dt).unwrap();
        }
        let t = steps as f64 * dt;
        // Compare interior nodes away from the boundary: the flux there is
        // e^{-40+cos(π)} ≈ 1e-18, so the analytic Neumann decay dominates.
        let decay = (-pi * pi * t).exp();
        for i in 0..(grid.cells() / 2) {
            let exact = (pi * grid.node(i)).cos() * decay - 40.0;
            assert!(
                (u.values()[i] - exact).abs() < 5e-5,
                "node {i}: {} vs {exact}",
                u.values()[i]
            );
        }
    }

    #[test]
    fn run_rejects_low_stop_threshold() {
        let s = spec(1.0, 0.0, -1.0);
        let grid = RadialGrid::new(32, 1.0).unwrap();
        let ctl = StepControl { u_stop: -5.0, ..Default::default() };
        assert!(matches!(
            run(&s, grid, &ctl, 0.1, &SnapshotPolicy::default()),
            Err(Error::InvalidControl(_))
        ));
    }

    #[test]
    fn short_run_terminates_and_is_monotone() {
        let s = spec(2.0, 1.0, -1.0);
        let grid = RadialGrid::new(32, 1.0).unwrap();
        let ctl = StepControl { u_stop: 2.0, ..Default::default() };
        let trace = run(&s, grid, &ctl, 0.2, &SnapshotPolicy::default()).unwrap();
        assert_eq!(trace.outcome, StopReason::AmplitudeThreshold);
        assert!(trace.monitors.boundary_nondecreasing);
        assert!(trace.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert!(trace.monitors.min_slope >= -trace.monitor_tol);
        assert!(trace.monitors.min_rate >= -trace.monitor_tol);
        // amplitude-level snapshots: initial, +1, +2-crossing, final
        assert!(trace.snapshots.len() >= 3);
        // dt column carries the accepted step
        assert_eq!(trace.samples[0].dt, 0.0);
        assert!(trace.samples[1..].iter().all(|s| s.dt > 0.0));
    }

    #[test]
    fn run_reports_time_horizon() {
        let s = spec(1.0, 0.0, -1.0);
        let grid = RadialGrid::new(32, 1.0).unwrap();
        let ctl = StepControl { u_stop: 25.0, t_max: 1e-3, ..Default::default() };
        let trace = run(&s, grid, &ctl, 0.1, &SnapshotPolicy::default()).unwrap();
        assert_eq!(trace.outcome, StopReason::TimeHorizon);
    }

    #[test]
    fn refinement_changes_boundary_curve_at_second_order() {
        // M(t) at fixed early times converges at order ≥ 1.9 under h → h/2.
        let s = spec(1.0, 1.0, -1.0);
        let ctl = StepControl { u_stop: 2.0, ..Default::default() };
        let mut curves = Vec::new();
        let probe_times = [0.05, 0.1, 0.15];
        for n in [32usize, 64, 128] {
            let grid = RadialGrid::new(n, 1.0).unwrap();
            let trace = run(&s, grid, &ctl, 0.3, &SnapshotPolicy::default()).unwrap();
            let at = |t: f64| {
                let i = trace.samples.partition_point(|s| s.t < t);
                let (a, b) = (&trace.samples[i - 1], &trace.samples[i]);
                a.boundary_value
                    + (b.boundary_value - a.boundary_value) * (t - a.t) / (b.t - a.t)
            };
            curves.push(probe_times.map(at));
        }
        for k in 0..probe_times.len() {
            let coarse = (curves[0][k] - curves[1][k]).abs();
            let fine = (curves[1][k] - curves[2][k]).abs();
            let order = (coarse / fine).log2();
            assert!(order > 1.9, "t = {}: order {order}", probe_times[k]);
        }
    }
}
