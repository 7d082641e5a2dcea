//! Named property suites behind `blowup-lab verify --suite <name>`: kernel
//! identities, difference-operator exactness and order, hypothesis-condition
//! arithmetic, and the supersolution residual sign.

use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analyze::{verify_supersolution_pde, SupersolutionEnvelope};
use crate::discretize::{
    apply_flux_closure, derivative_field, radial_laplacian, RadialField, RadialGrid,
};
use crate::kernel::{ball_potential, gamma, gamma_mass, sphere_potential, PotentialQuadrature};
use crate::model::{build_quadratic_initial_data, smallness_sides, InitialData, ProblemSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernel,
    Operators,
    Conditions,
    Supersolution,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Self::Kernel),
            "operators" => Ok(Self::Operators),
            "conditions" => Ok(Self::Conditions),
            "supersolution" => Ok(Self::Supersolution),
            other => Err(Error::UnknownSuite(other.into())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Kernel => kernel_suite(),
        Suite::Operators => operators_suite(),
        Suite::Conditions => conditions_suite(),
        Suite::Supersolution => supersolution_suite(),
    }
}

fn kernel_suite() -> Vec<Check> {
    let quad = PotentialQuadrature::default();
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for dim in [1u32, 2, 3] {
        for t in [0.01, 0.1, 1.0] {
            worst = worst.max((gamma_mass(t, dim, &quad).unwrap() - 1.0).abs());
        }
    }
    checks.push(Check::new(
        "gamma normalization |∫Γ − 1| < 1e-8 (n = 1..3)",
        worst < 1e-8,
        format!("worst defect {worst:.3e}"),
    ));

    let t = 1.0 / (4.0 * std::f64::consts::PI);
    let peak = gamma(0.0, t, 2).unwrap();
    checks.push(Check::new(
        "gamma peak value at n = 2, t = 1/(4π)",
        (peak - 1.0).abs() < 1e-12,
        format!("Γ(0) = {peak:.17}"),
    ));

    let fine = PotentialQuadrature { angular_nodes: 1024, time_nodes: 128 };
    let mut worst = 0.0f64;
    for &r in &[0.05, 0.2, 0.5, 0.8, 0.95] {
        for &t in &[0.001, 0.01, 0.1, 1.0] {
            let closed = (4.0 * std::f64::consts::PI * t).powf(-1.5)
                * (4.0 * std::f64::consts::PI * t / r)
                * ((-(1.0f64 - r).powi(2) / (4.0 * t)).exp()
                    - (-(1.0f64 + r).powi(2) / (4.0 * t)).exp());
            worst = worst.max((sphere_potential(r, 1.0, t, 3, &fine).unwrap() - closed).abs());
        }
    }
    checks.push(Check::new(
        "sphere potential matches its closed form (n = 3) to 1e-8",
        worst < 1e-8,
        format!("worst defect {worst:.3e}"),
    ));

    let mut ok = true;
    let mut worst_excess = 0.0f64;
    for dim in [1u32, 2, 3] {
        for &(r, t) in &[(0.0, 0.01), (0.4, 0.1), (0.9, 0.5), (0.2, 2.0)] {
            let v = ball_potential(r, 1.0, t, dim, &quad).unwrap();
            if !(v > 0.0 && v <= 1.0 + 1e-12) {
                ok = false;
            }
            worst_excess = worst_excess.max(v - 1.0);
        }
    }
    let far = ball_potential(0.0, 20.0, 1.0, 1, &quad).unwrap();
    checks.push(Check::new(
        "ball potential in (0, 1] and → 1 for R ≫ √t",
        ok && (far - 1.0).abs() < 1e-6,
        format!("max excess over 1: {worst_excess:.3e}; wide-ball value {far:.9}"),
    ));

    let mut worst = 0.0f64;
    for dim in [1u32, 2, 3] {
        for &(r, t) in &[(0.3, 0.2), (0.7, 0.5), (1.1, 0.35)] {
            let (dr, dt) = (1e-4, 1e-5);
            let g = |r: f64, t: f64| gamma(r, t, dim).unwrap();
            let gt = (g(r, t + dt) - g(r, t - dt)) / (2.0 * dt);
            let grr = (g(r + dr, t) - 2.0 * g(r, t) + g(r - dr, t)) / (dr * dr);
            let gr = (g(r + dr, t) - g(r - dr, t)) / (2.0 * dr);
            worst = worst.max((gt - grr - (dim as f64 - 1.0) / r * gr).abs());
        }
    }
    checks.push(Check::new(
        "gamma satisfies the heat equation (finite differences, 1e-5)",
        worst < 1e-5,
        format!("worst residual {worst:.3e}"),
    ));

    checks
}

fn operators_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for dim in [1u32, 2, 3] {
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let u = RadialField::from_fn(grid, |r| r * r).unwrap();
        let lap = radial_laplacian(&u, dim).unwrap();
        for i in 0..grid.cells() {
            worst = worst.max((lap.values()[i] - 2.0 * dim as f64).abs());
        }
    }
    checks.push(Check::new(
        "laplacian exact on quadratics (interior and origin)",
        worst < 1e-9,
        format!("worst defect {worst:.3e}"),
    ));

    let mut min_order = f64::INFINITY;
    for dim in [1u32, 3] {
        let mut errs = Vec::new();
        for n in [32usize, 64, 128] {
            let grid = RadialGrid::new(n, 1.0).unwrap();
            let u = RadialField::from_fn(grid, |r| (-r * r).exp()).unwrap();
            let lap = radial_laplacian(&u, dim).unwrap();
            let mut err = 0.0f64;
            for i in 0..n {
                let r = grid.node(i);
                let exact = (4.0 * r * r - 2.0 * dim as f64) * (-r * r).exp();
                err = err.max((lap.values()[i] - exact).abs());
            }
            errs.push(err);
        }
        for w in errs.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
    }
    checks.push(Check::new(
        "laplacian observed order ≥ 1.9 over three refinements",
        min_order >= 1.9,
        format!("worst observed order {min_order:.3}"),
    ));

    let mut min_order = f64::INFINITY;
    {
        let mut errs = Vec::new();
        for n in [32usize, 64, 128] {
            let grid = RadialGrid::new(n, 1.0).unwrap();
            let u = RadialField::from_fn(grid, |r| r.sin()).unwrap();
            let d = derivative_field(&u, None).unwrap();
            errs.push((d.values()[n / 2] - grid.node(n / 2).cos()).abs());
        }
        for w in errs.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
    }
    checks.push(Check::new(
        "radial derivative observed order ≥ 1.9",
        min_order >= 1.9,
        format!("worst observed order {min_order:.3}"),
    ));

    // The ghost closure reproduces the flux identity exactly: the implied
    // discrete normal derivative equals e^{q·u_N} to machine precision.
    let grid = RadialGrid::new(40, 1.0).unwrap();
    let u = RadialField::from_fn(grid, |r| -1.2 + 0.3 * (2.0 * r).sin()).unwrap();
    let q = 1.7;
    let flux = (q * u.boundary_value()).exp();
    let h = grid.spacing();
    let ghost = u.values()[grid.cells() - 1] + 2.0 * h * flux;
    let implied = (ghost - u.values()[grid.cells() - 1]) / (2.0 * h);
    // Reconstructing the difference loses bits against |u_{N-1}|/(2h).
    let round_off = 8.0 * f64::EPSILON * (u.values()[grid.cells() - 1].abs() / (2.0 * h)).max(flux);
    checks.push(Check::new(
        "ghost closure imposes the boundary flux to machine precision",
        (implied - flux).abs() <= round_off,
        format!("implied − flux = {:.3e}", implied - flux),
    ));

    let data = build_quadratic_initial_data(-1.0, 2.0, 1.0, 50.0).unwrap();
    let b = data.curvature();
    let mut worst = 0.0f64;
    for dim in [1u32, 2, 3] {
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let u = RadialField::from_fn(grid, |r| data.value(r)).unwrap();
        let lap = apply_flux_closure(&u, 2.0, dim).unwrap();
        worst = worst.max((lap - 2.0 * b * dim as f64).abs());
    }
    checks.push(Check::new(
        "flux-closure laplacian equals 2bn on the compatible family",
        worst < 1e-8,
        format!("worst defect {worst:.3e}"),
    ));

    checks
}

fn conditions_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    let cases = [(-2.0, 1.0, 0.0727758), (-1.0, 2.0, 0.0792972), (-0.5, 1.0, 0.5)];
    let mut ok = true;
    let mut detail = String::new();
    for (a, q, expected) in cases {
        let data = build_quadratic_initial_data(a, q, 1.0, 50.0).unwrap();
        let b = data.curvature();
        let residual = 2.0 * b - (q * (a + b)).exp();
        if (b - expected).abs() > 1e-5 || residual.abs() > 1e-10 * (2.0 * b).max(1.0) {
            ok = false;
        }
        detail.push_str(&format!("a={a}, q={q}: b={b:.9}, residual={residual:.2e}; "));
    }
    checks.push(Check::new("compatibility roots and residuals", ok, detail));

    let unsolvable = build_quadratic_initial_data(0.0, 1.0, 1.0, 50.0);
    checks.push(Check::new(
        "no compatibility root at a = 0, q = 1",
        matches!(unsolvable, Err(Error::NoCompatibleRoot { .. })),
        "sup 2b·e^{-b} = 2/e < 1".into(),
    ));

    let flat = InitialData::Quadratic { center: 0.0, curvature: 0.0 };
    let spec = |lambda: f64| ProblemSpec {
        dim: 1,
        radius: 1.0,
        reaction_exponent: 1.0,
        flux_exponent: 1.0,
        reaction_coeff: lambda,
        initial: flat,
    };
    let (lhs1, rhs1) = smallness_sides(&spec(0.01), 1.0, 10.0, 0.0);
    let (lhs2, rhs2) = smallness_sides(&spec(0.02), 1.0, 10.0, 0.0);
    checks.push(Check::new(
        "smallness gate arithmetic (0.09 ≤ 0.1; 0.18 > 0.1)",
        (lhs1 - 0.09).abs() < 1e-12
            && (rhs1 - 0.1).abs() < 1e-12
            && lhs1 <= rhs1
            && lhs2 > rhs2,
        format!("lhs/rhs at λ=0.01: {lhs1}/{rhs1}; at λ=0.02: {lhs2}/{rhs2}"),
    ));

    // With q = 1 the compatible family meets the flux-ordering condition with
    // equality exactly at the boundary.
    let data = build_quadratic_initial_data(-1.0, 1.0, 1.0, 50.0).unwrap();
    let boundary_gap = data.slope(1.0) - data.value(1.0).exp();
    let mut interior_min = f64::INFINITY;
    for k in 1..100 {
        let r = k as f64 / 100.0;
        interior_min = interior_min.min(data.slope(r) - r * data.value(r).exp());
    }
    checks.push(Check::new(
        "flux ordering holds with boundary equality at q = 1",
        boundary_gap.abs() < 1e-10 && interior_min > 0.0,
        format!("boundary gap {boundary_gap:.2e}, interior min {interior_min:.3e}"),
    ));

    checks
}

fn supersolution_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    let spec = ProblemSpec {
        dim: 1,
        radius: 1.0,
        reaction_exponent: 1.0,
        flux_exponent: 1.0,
        reaction_coeff: 0.01,
        initial: InitialData::Quadratic { center: 0.0, curvature: 0.0 },
    };
    let grid = RadialGrid::new(64, 1.0).unwrap();
    let horizon = 1.0;
    let (_, bound_hi) = smallness_sides(&spec, horizon, 10.0, 0.0);
    let scale = 4.0 * (spec.dim as f64 + 1.0) * spec.radius * spec.radius + 1.0;

    // 100 seeded admissible pairs: λ ≤ A and A·scale ≤ B ≤ bound_hi.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut min_residual = f64::INFINITY;
    for _ in 0..100 {
        let a = spec.reaction_coeff
            + rng.gen::<f64>() * (bound_hi / scale - spec.reaction_coeff);
        let b = a * scale + rng.gen::<f64>() * (bound_hi - a * scale);
        let env = SupersolutionEnvelope {
            amplitude: a,
            temporal: b,
            upper_constant: 10.0,
            horizon,
        };
        min_residual = min_residual.min(verify_supersolution_pde(&env, &spec, grid, 32));
    }
    checks.push(Check::new(
        "supersolution residual ≥ 0 on 100 admissible (A, B) pairs",
        min_residual >= 0.0,
        format!("minimum residual {min_residual:.3e}"),
    ));

    // Sharpness probe: B = A sits below the lower constraint and must fail.
    let env = SupersolutionEnvelope {
        amplitude: spec.reaction_coeff,
        temporal: spec.reaction_coeff,
        upper_constant: 10.0,
        horizon,
    };
    let violated = verify_supersolution_pde(&env, &spec, grid, 32);
    checks.push(Check::new(
        "residual < 0 detected when B < A[4R²(n+1)+1]",
        violated < 0.0,
        format!("minimum residual {violated:.3e}"),
    ));

    checks
}
