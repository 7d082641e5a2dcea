//! One full experiment in-process: integrate the boundary-dominated fixture
//! until the amplitude threshold, estimate the blow-up time, fit the rate
//! slope against its proven window, and print the monitor summary.

use blowup_lab::analyze::{estimate_blowup_time, fit_rate, MonitorParams};
use blowup_lab::discretize::RadialGrid;
use blowup_lab::integrate::{run, SnapshotPolicy, StepControl};
use blowup_lab::model::ProblemSpec;

fn main() -> blowup_lab::Result<()> {
    // Boundary flux e^{2u} against reaction e^{u}: the boundary dominates.
    let spec = ProblemSpec::with_compatible_quadratic(1, 1.0, 1.0, 2.0, 1.0, -1.0, 50.0)?;
    let grid = RadialGrid::new(128, 1.0)?;
    let ctl = StepControl::default();
    let params = MonitorParams::from_bound_fraction(0.9, &spec, grid)?;

    println!(
        "running n=1, R=1, p=1, q=2, lambda=1, u0 = -1 + {:.4} r^2, N = {} ...",
        spec.initial.curvature(),
        grid.cells()
    );
    let trace = run(&spec, grid, &ctl, params.epsilon, &SnapshotPolicy::default())?;
    println!(
        "stopped: {} at t = {:.9} after {} steps (M = {:.3})",
        trace.outcome.label(),
        trace.final_time(),
        trace.samples.len() - 1,
        trace.final_boundary_value()
    );

    let est = estimate_blowup_time(&trace, 2.0 * spec.dominant_exponent())?;
    println!(
        "blow-up time: T_hat = {:.12} (secondary {:.12}, spread {:.2e})",
        est.t_hat, est.secondary, est.spread
    );

    let rate = fit_rate(&trace, &spec, &est, Some((6.0, 9.0)))?;
    println!(
        "rate: slope {:.4} over amplitudes {:?} vs proven window ({:.3}, {:.3}) -> {}",
        rate.slope,
        rate.fit_window,
        rate.window.0,
        rate.window.1,
        rate.verdict.label()
    );

    let m = &trace.monitors;
    println!("monitors (tol {:.2e}):", trace.monitor_tol);
    println!("  boundary value nondecreasing: {}", m.boundary_nondecreasing);
    println!("  min u_r = {:.3e}, min u_t = {:.3e}", m.min_slope, m.min_rate);
    println!(
        "  min J3 = u_t - eps*u_r = {:.3e} (eps = {:.4})",
        m.min_j_upper, trace.j_upper_epsilon
    );
    println!(
        "  boundary ratio u_t(R)/e^(2*alpha*u(R)) stayed <= {:.4}",
        m.max_rate_ratio_lower
    );
    Ok(())
}
