//! Builds compatible quadratic initial profiles for a few center values and
//! prints every hypothesis check, including the closed-form smallness gate.

use blowup_lab::discretize::RadialGrid;
use blowup_lab::model::{build_quadratic_initial_data, check_hypotheses, ProblemSpec};

fn main() -> blowup_lab::Result<()> {
    let grid = RadialGrid::new(128, 1.0)?;

    for (center, q, lambda) in [(-2.0, 1.0, 1.0), (-1.0, 2.0, 1.0), (-0.5, 1.0, 0.01)] {
        let initial = build_quadratic_initial_data(center, q, 1.0, 50.0)?;
        let spec = ProblemSpec {
            dim: 1,
            radius: 1.0,
            reaction_exponent: 1.0,
            flux_exponent: q,
            reaction_coeff: lambda,
            initial,
        };
        let report = check_hypotheses(&spec, grid, 1.0, 10.0)?;
        println!("a = {center}, q = {q}, lambda = {lambda}:");
        println!("  curvature b          = {:.12}", initial.curvature());
        println!(
            "  compatibility        = {} (residual {:.3e})",
            report.compat.ok, report.compat.value
        );
        println!(
            "  subsolution sign     = {} (min {:.6})",
            report.subsol.ok, report.subsol.value
        );
        println!("  monotone profile     = {}", report.monotone_ok);
        println!(
            "  flux ordering        = {} (min {:.3e})",
            report.flux_ordering.ok, report.flux_ordering.value
        );
        println!(
            "  positive margin      = {} (a = {:.6})",
            report.positive_margin_ok, report.positive_margin
        );
        println!(
            "  smallness gate       = {} ({:.4} <= {:.4})",
            report.smallness.ok, report.smallness.lhs, report.smallness.rhs
        );
    }

    // A center value with no compatibility root.
    match build_quadratic_initial_data(0.0, 1.0, 1.0, 50.0) {
        Err(e) => println!("a = 0, q = 1: {e}"),
        Ok(_) => unreachable!("sup 2b e^{{-b}} = 2/e < 1"),
    }
    Ok(())
}
