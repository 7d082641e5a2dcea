//! Scans the admissible (A, B) constant region of the comparison function:
//! the PDE residual of z = log(1/[A(R²−r²)² + B(T−t)]) stays nonnegative on
//! all of it, and turns negative once B drops below A[4R²(n+1)+1].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blowup_lab::analyze::{verify_supersolution_pde, SupersolutionEnvelope};
use blowup_lab::discretize::RadialGrid;
use blowup_lab::model::{smallness_sides, InitialData, ProblemSpec};

fn main() -> blowup_lab::Result<()> {
    let spec = ProblemSpec {
        dim: 1,
        radius: 1.0,
        reaction_exponent: 1.0,
        flux_exponent: 1.0,
        reaction_coeff: 0.01,
        initial: InitialData::Quadratic { center: 0.0, curvature: 0.0 },
    };
    let grid = RadialGrid::new(96, 1.0)?;
    let horizon = 1.0;
    let scale = 4.0 * (spec.dim as f64 + 1.0) + 1.0;
    let (_, upper) = smallness_sides(&spec, horizon, 10.0, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_admissible = f64::INFINITY;
    for _ in 0..200 {
        let amplitude =
            spec.reaction_coeff + rng.gen::<f64>() * (upper / scale - spec.reaction_coeff);
        let temporal = amplitude * scale + rng.gen::<f64>() * (upper - amplitude * scale);
        let env = SupersolutionEnvelope { amplitude, temporal, upper_constant: 10.0, horizon };
        min_admissible = min_admissible.min(verify_supersolution_pde(&env, &spec, grid, 48));
    }
    println!("200 admissible pairs: minimum residual {min_admissible:.6e} (>= 0 expected)");

    println!("shrinking B below the admissible constraint A*{scale}:");
    let amplitude = spec.reaction_coeff;
    for factor in [1.0, 0.8, 0.5, 0.2, 0.11111] {
        let env = SupersolutionEnvelope {
            amplitude,
            temporal: amplitude * scale * factor,
            upper_constant: 10.0,
            horizon,
        };
        let min = verify_supersolution_pde(&env, &spec, grid, 48);
        println!("  B = {:.6} ({}x the bound): min residual {:+.5}", env.temporal, factor, min);
    }
    Ok(())
}
