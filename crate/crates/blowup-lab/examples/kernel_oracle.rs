//! Independent consistency oracle: the solver's output is substituted into
//! the heat-potential representation of the solution over a short time
//! window, and the residual is evaluated at interior radii.

use blowup_lab::analyze::MonitorParams;
use blowup_lab::discretize::RadialGrid;
use blowup_lab::integrate::{run, SnapshotPolicy, StepControl};
use blowup_lab::kernel::{integral_identity_residual, PotentialQuadrature};
use blowup_lab::model::ProblemSpec;

fn main() -> blowup_lab::Result<()> {
    let spec = ProblemSpec::with_compatible_quadratic(1, 1.0, 1.0, 2.0, 1.0, -1.0, 50.0)?;
    let grid = RadialGrid::new(128, 1.0)?;
    let params = MonitorParams::from_bound_fraction(0.9, &spec, grid)?;

    let (t0, t1) = (0.02, 0.03);
    let ctl = StepControl { t_max: t1 + 0.005, ..StepControl::default() };
    let policy = SnapshotPolicy {
        amplitude_step: 1.0,
        dense_window: Some((t0 - 0.002, t1 + 0.002)),
        dense_every: 1,
    };
    let trace = run(&spec, grid, &ctl, params.epsilon, &policy)?;

    let pick = |t: f64| {
        trace
            .snapshots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.t - t).abs().total_cmp(&(b.1.t - t).abs()))
            .map(|(i, _)| i)
            .unwrap()
    };
    let (base, test) = (pick(t0), pick(t1));
    println!(
        "window [{:.6}, {:.6}] with {} snapshots in between",
        trace.snapshots[base].t,
        trace.snapshots[test].t,
        test - base
    );

    let quad = PotentialQuadrature::default();
    for radii in [[0.0], [0.25], [0.5], [0.75], [0.9]] {
        let residual = integral_identity_residual(&trace, &spec, base, test, &radii, &quad)?;
        println!("  residual at r = {:.2}: {:.3e}", radii[0], residual);
    }

    let worst =
        integral_identity_residual(&trace, &spec, base, test, &[0.0, 0.25, 0.5, 0.75, 0.9], &quad)?;
    let sup = trace.snapshots[base..=test]
        .iter()
        .flat_map(|s| s.field.values())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    println!("worst residual {worst:.3e} vs threshold 1e-2 * max|u| = {:.3e}", 1e-2 * sup);
    Ok(())
}
