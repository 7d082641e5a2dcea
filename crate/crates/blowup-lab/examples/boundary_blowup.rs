//! Boundary-only blow-up certificate: with unit exponents and a small
//! reaction coefficient, the comparison function
//! z = log(1/[A(R²−r²)² + B(T−t)]) dominates the solution, so interior
//! points stay bounded while the boundary value diverges.

use blowup_lab::analyze::{
    check_boundary_blowup, envelope_from_spec, estimate_blowup_time, verify_supersolution_pde,
    MonitorParams,
};
use blowup_lab::discretize::RadialGrid;
use blowup_lab::integrate::{run, SnapshotPolicy, StepControl};
use blowup_lab::model::ProblemSpec;

fn main() -> blowup_lab::Result<()> {
    let spec = ProblemSpec::with_compatible_quadratic(1, 1.0, 1.0, 1.0, 0.01, -0.5, 50.0)?;
    let grid = RadialGrid::new(128, 1.0)?;
    let params = MonitorParams::from_bound_fraction(0.9, &spec, grid)?;

    let env = envelope_from_spec(&spec, grid, 1.0, 10.0)?;
    println!(
        "envelope constants: A = {}, B = {} (horizon {}, C = {})",
        env.amplitude, env.temporal, env.horizon, env.upper_constant
    );
    let pde_min = verify_supersolution_pde(&env, &spec, grid, 64);
    println!("supersolution PDE residual minimum: {pde_min:.6e} (must be >= 0)");

    let trace = run(&spec, grid, &StepControl::default(), params.epsilon, &SnapshotPolicy::default())?;
    let est = estimate_blowup_time(&trace, 2.0 * spec.dominant_exponent())?;
    println!("T_hat = {:.9} (spread {:.2e})", est.t_hat, est.spread);

    let report = check_boundary_blowup(&trace, &env, &est, 0.9)?;
    println!(
        "certificate: {} (envelope margin {:.3}, interior margin {:.3}, hypothesis margin {:.3}, tol {:.3})",
        report.verdict.label(),
        report.envelope_margin,
        report.interior_margin,
        report.hypothesis_margin,
        report.tol
    );

    let last = trace.snapshots.last().unwrap();
    let values = last.field.values();
    let grid = last.field.grid();
    println!("final profile (boundary value {:.2}):", trace.final_boundary_value());
    for frac in [0.0, 0.5, 0.9] {
        let i = ((grid.cells() as f64) * frac).round() as usize;
        let r = grid.node(i);
        let bound = -(env.amplitude * (1.0 - r * r).powi(2)).ln();
        println!("  u({r:.3}) = {:+.4}   interior bound {:.4}", values[i], bound);
    }
    Ok(())
}
