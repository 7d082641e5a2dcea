//! Refinement study of the discrete operators and of the integrated
//! boundary curve: both converge at second order in the grid spacing.

use blowup_lab::analyze::MonitorParams;
use blowup_lab::discretize::{radial_laplacian, RadialField, RadialGrid};
use blowup_lab::integrate::{run, SnapshotPolicy, StepControl};
use blowup_lab::model::ProblemSpec;

fn main() -> blowup_lab::Result<()> {
    println!("radial laplacian on exp(-r^2), sup error over the grid:");
    for dim in [1u32, 3] {
        let mut errs = Vec::new();
        for n in [32usize, 64, 128, 256] {
            let grid = RadialGrid::new(n, 1.0)?;
            let u = RadialField::from_fn(grid, |r| (-r * r).exp())?;
            let lap = radial_laplacian(&u, dim)?;
            let mut err = 0.0f64;
            for i in 0..n {
                let r = grid.node(i);
                let exact = (4.0 * r * r - 2.0 * dim as f64) * (-r * r).exp();
                err = err.max((lap.values()[i] - exact).abs());
            }
            errs.push((n, err));
        }
        print!("  n = {dim}:");
        for (i, (n, err)) in errs.iter().enumerate() {
            if i == 0 {
                print!(" N={n}: {err:.3e}");
            } else {
                let order = (errs[i - 1].1 / err).log2();
                print!("  N={n}: {err:.3e} (order {order:.2})");
            }
        }
        println!();
    }

    println!("\nboundary curve M(t) under grid refinement (q = 1, lambda = 1):");
    let ctl = StepControl { u_stop: 2.0, ..StepControl::default() };
    let probe_times = [0.05, 0.1, 0.15];
    let mut curves = Vec::new();
    for n in [32usize, 64, 128] {
        let spec = ProblemSpec::with_compatible_quadratic(1, 1.0, 1.0, 1.0, 1.0, -1.0, 50.0)?;
        let grid = RadialGrid::new(n, 1.0)?;
        let params = MonitorParams::from_bound_fraction(0.9, &spec, grid)?;
        let trace = run(&spec, grid, &ctl, params.epsilon, &SnapshotPolicy::default())?;
        let at = |t: f64| {
            let i = trace.samples.partition_point(|s| s.t < t);
            let (a, b) = (&trace.samples[i - 1], &trace.samples[i]);
            a.boundary_value + (b.boundary_value - a.boundary_value) * (t - a.t) / (b.t - a.t)
        };
        curves.push(probe_times.map(at));
    }
    for (k, t) in probe_times.iter().enumerate() {
        let coarse = (curves[0][k] - curves[1][k]).abs();
        let fine = (curves[1][k] - curves[2][k]).abs();
        println!(
            "  t = {t}: |M_32 - M_64| = {coarse:.3e}, |M_64 - M_128| = {fine:.3e}, order {:.2}",
            (coarse / fine).log2()
        );
    }
    Ok(())
}
