//! The continuous problem: `u_t = Δu + λ e^{pu}` on the ball of radius `R`
//! with boundary flux `∂u/∂η = e^{qu}`, admissible initial profiles, and
//! checkers for every hypothesis the analysis places on `(u₀, λ, p, q)`.

use crate::discretize::{RadialField, RadialGrid};
use crate::{Error, Result};

/// Absolute slack for the grid-pointwise hypothesis checks; the conditions
/// themselves are exact inequalities.
pub const CONDITION_TOL: f64 = 1e-9;

/// Initial profile family. Currently quadratic: `u₀(r) = a + b r²` with
/// `b ≥ 0`, so `u₀` is radially nondecreasing and `Δu₀ = 2bn` is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Quadratic {
        /// Center value `u₀(0)`.
        center: f64,
        /// Curvature coefficient `b ≥ 0`.
        curvature: f64,
    },
}

impl InitialData {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::Quadratic { center, curvature } => center + curvature * r * r,
        }
    }

    pub fn slope(&self, r: f64) -> f64 {
        match self {
            Self::Quadratic { curvature, .. } => 2.0 * curvature * r,
        }
    }

    pub fn laplacian(&self, dim: u32) -> f64 {
        match self {
            Self::Quadratic { curvature, .. } => 2.0 * curvature * dim as f64,
        }
    }

    pub fn center(&self) -> f64 {
        match self {
            Self::Quadratic { center, .. } => *center,
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            Self::Quadratic { curvature, .. } => *curvature,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Quadratic { center, curvature } => {
                if !center.is_finite() || !curvature.is_finite() {
                    return Err(Error::InvalidSpec("initial data must be finite".into()));
                }
                if *curvature < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "curvature must be nonnegative, got {curvature}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// The continuous problem definition.
///
/// `reaction_coeff` is the coefficient λ of the interior source
/// `λ e^{p u}`; `flux_exponent` is the exponent q of the boundary flux
/// `e^{q u}`. λ = 0 is admitted for the pure boundary-driven regression
/// mode, in which case the reaction exponent is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    /// Spatial dimension n ≥ 1.
    pub dim: u32,
    /// Ball radius R > 0.
    pub radius: f64,
    /// Reaction exponent p.
    pub reaction_exponent: f64,
    /// Boundary flux exponent q > 0.
    pub flux_exponent: f64,
    /// Reaction coefficient λ ≥ 0.
    pub reaction_coeff: f64,
    pub initial: InitialData,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::InvalidSpec("dimension must be >= 1".into()));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if !(self.flux_exponent > 0.0) || !self.flux_exponent.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "flux exponent must be positive, got {}",
                self.flux_exponent
            )));
        }
        if !(self.reaction_coeff >= 0.0) || !self.reaction_coeff.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "reaction coefficient must be nonnegative, got {}",
                self.reaction_coeff
            )));
        }
        if self.reaction_coeff > 0.0 && !(self.reaction_exponent > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "reaction exponent must be positive when the coefficient is nonzero, got {}",
                self.reaction_exponent
            )));
        }
        if !self.reaction_exponent.is_finite() {
            return Err(Error::InvalidSpec("reaction exponent must be finite".into()));
        }
        self.initial.validate()
    }

    /// Dominance exponent `max{p, q}`; it sets the proven lower rate
    /// `1/(2·max{p,q})`. Derived, never stored.
    pub fn dominant_exponent(&self) -> f64 {
        self.reaction_exponent.max(self.flux_exponent)
    }

    /// `u₀(R)`, the initial boundary value.
    pub fn initial_boundary_value(&self) -> f64 {
        self.initial.value(self.radius)
    }

    /// Convenience constructor that solves the compatibility equation for
    /// the curvature and assembles a validated spec.
    pub fn with_compatible_quadratic(
        dim: u32,
        radius: f64,
        reaction_exponent: f64,
        flux_exponent: f64,
        reaction_coeff: f64,
        center: f64,
        b_max: f64,
    ) -> Result<Self> {
        let initial =
            build_quadratic_initial_data(center, flux_exponent, radius, b_max)?;
        let spec = Self {
            dim,
            radius,
            reaction_exponent,
            flux_exponent,
            reaction_coeff,
            initial,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Constructs `u₀(r) = a + b r²` with the curvature chosen so that the
/// boundary flux condition holds at `t = 0`: `b` is the smallest root in
/// `(0, b_max]` of `g(b) = 2bR − e^{q(a + bR²)}`, found by scanning for the
/// first sign change and bisecting to relative tolerance 1e-12.
///
/// The constructed profile automatically satisfies the subsolution and
/// monotonicity hypotheses: `Δu₀ = 2bn > 0` and `u₀ᵣ = 2br ≥ 0`.
pub fn build_quadratic_initial_data(
    center: f64,
    flux_exponent: f64,
    radius: f64,
    b_max: f64,
) -> Result<InitialData> {
    if !center.is_finite() || !(flux_exponent > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "compatibility search needs finite a and positive q, R (got a = {center}, q = {flux_exponent}, R = {radius})"
        )));
    }
    if !(b_max > 0.0) {
        return Err(Error::InvalidSpec(format!("b_max must be positive, got {b_max}")));
    }
    let g = |b: f64| 2.0 * b * radius - (flux_exponent * (center + b * radius * radius)).exp();

    // g(0) = -e^{qa} < 0 always; look for the first interval where g turns
    // nonnegative. 2^16 panels keep near-tangent root pairs resolvable.
    const PANELS: usize = 1 << 16;
    let mut lo = 0.0;
    let mut g_lo = g(0.0);
    let mut bracket = None;
    for i in 1..=PANELS {
        let hi = b_max * i as f64 / PANELS as f64;
        let g_hi = g(hi);
        if g_lo < 0.0 && g_hi >= 0.0 {
            bracket = Some((lo, hi, g_hi));
            break;
        }
        lo = hi;
        g_lo = g_hi;
    }
    let (mut lo, mut hi, g_hi) = bracket.ok_or(Error::NoCompatibleRoot { center, b_max })?;
    if g_hi == 0.0 {
        lo = hi;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let curvature = 0.5 * (lo + hi);
    Ok(InitialData::Quadratic { center, curvature })
}

/// Evaluates the initial profile on the grid nodes.
pub fn evaluate_initial_data(data: &InitialData, grid: RadialGrid) -> RadialField {
    RadialField::from_fn(grid, |r| data.value(r)).expect("initial profiles are finite")
}

/// One signed hypothesis check: the reported value is a residual or a grid
/// minimum, and `ok` states whether it clears [`CONDITION_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedCheck {
    pub ok: bool,
    pub value: f64,
}

/// The closed-form smallness gate on λ: left and right sides of
/// `λ[4R²(n+1)+1] ≤ min{1/C, 4(n+1)/(R²+4(n+1)T)·e^{−‖u₀‖∞}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessCheck {
    pub ok: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Verdicts for every hypothesis on the initial data and coefficients.
///
/// `subsol` is the grid minimum of `Δu₀ + λ e^{p u₀}` (must be ≥ 0);
/// `positive_margin` is the same minimum read as the strict bound `≥ a > 0`
/// needed by the upper rate estimate; `flux_ordering` is the grid minimum of
/// `u₀ᵣ − (r/R) e^{u₀}` needed by the refined lower rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    /// Boundary compatibility residual `2bR − e^{q·u₀(R)}`.
    pub compat: SignedCheck,
    pub subsol: SignedCheck,
    pub monotone_ok: bool,
    pub flux_ordering: SignedCheck,
    pub positive_margin: f64,
    pub positive_margin_ok: bool,
    pub smallness: SmallnessCheck,
    /// Grid sup norm `‖u₀‖∞` used by the smallness gate.
    pub sup_norm_initial: f64,
}

/// Evaluates every hypothesis on the grid (compatibility, subsolution sign,
/// monotonicity, flux ordering, strict positivity margin) and the closed-form
/// smallness gate for the given comparison horizon and upper-bound constant.
pub fn check_hypotheses(
    spec: &ProblemSpec,
    grid: RadialGrid,
    horizon: f64,
    upper_constant: f64,
) -> Result<HypothesisReport> {
    spec.validate()?;
    if !(horizon > 0.0) || !(upper_constant > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "horizon and upper constant must be positive (got T = {horizon}, C = {upper_constant})"
        )));
    }

    let data = &spec.initial;
    let radius = spec.radius;
    let q = spec.flux_exponent;
    let lam = spec.reaction_coeff;
    let p = spec.reaction_exponent;

    let boundary_slope = data.slope(radius);
    let compat_residual = boundary_slope - (q * data.value(radius)).exp();
    let compat_ok = compat_residual.abs() <= CONDITION_TOL * boundary_slope.abs().max(1.0);

    let mut subsol_min = f64::INFINITY;
    let mut flux_ordering_min = f64::INFINITY;
    let mut monotone_min = f64::INFINITY;
    let mut sup_norm = 0.0f64;
    for r in grid.nodes() {
        let u0 = data.value(r);
        let reaction = if lam == 0.0 { 0.0 } else { lam * (p * u0).exp() };
        subsol_min = subsol_min.min(data.laplacian(spec.dim) + reaction);
        flux_ordering_min = flux_ordering_min.min(data.slope(r) - r / radius * u0.exp());
        monotone_min = monotone_min.min(data.slope(r));
        sup_norm = sup_norm.max(u0.abs());
    }

    let (lhs, rhs) = smallness_sides(spec, horizon, upper_constant, sup_norm);

    Ok(HypothesisReport {
        compat: SignedCheck { ok: compat_ok, value: compat_residual },
        subsol: SignedCheck { ok: subsol_min >= -CONDITION_TOL, value: subsol_min },
        monotone_ok: monotone_min >= -CONDITION_TOL,
        flux_ordering: SignedCheck {
            ok: flux_ordering_min >= -CONDITION_TOL,
            value: flux_ordering_min,
        },
        positive_margin: subsol_min,
        positive_margin_ok: subsol_min > CONDITION_TOL,
        smallness: SmallnessCheck { ok: lhs <= rhs + CONDITION_TOL, lhs, rhs },
        sup_norm_initial: sup_norm,
    })
}

/// Left and right sides of the λ-smallness gate.
pub fn smallness_sides(
    spec: &ProblemSpec,
    horizon: f64,
    upper_constant: f64,
    sup_norm_initial: f64,
) -> (f64, f64) {
    let n1 = 4.0 * (spec.dim as f64 + 1.0);
    let lhs = spec.reaction_coeff * (n1 * spec.radius * spec.radius + 1.0);
    let rhs = (1.0 / upper_constant)
        .min(n1 / (spec.radius * spec.radius + n1 * horizon) * (-sup_norm_initial).exp());
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with(q: f64, lam: f64, initial: InitialData) -> ProblemSpec {
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
    fn compatibility_root_a_minus_two() {
        // Bisection on g(b) = 2b - e^{b-2}; root near 0.0728.
        let data = build_quadratic_initial_data(-2.0, 1.0, 1.0, 50.0).unwrap();
        let b = data.curvature();
        assert!((b - 0.0727758).abs() < 1e-5, "b = {b}");
        let residual = 2.0 * b - (b - 2.0).exp();
        assert!(residual.abs() < 1e-10 * (2.0 * b).max(1.0), "residual {residual}");
        // u0(1) follows the root: about -1.9272.
        assert!((data.value(1.0) + 1.92722).abs() < 1e-4);
    }

    #[test]
    fn compatibility_root_a_minus_one_q_two() {
        let data = build_quadratic_initial_data(-1.0, 2.0, 1.0, 50.0).unwrap();
        let b = data.curvature();
        assert!((b - 0.0792972).abs() < 1e-5, "b = {b}");
        let residual = 2.0 * b - (2.0 * (-1.0 + b)).exp();
        assert!(residual.abs() < 1e-10);
    }

    #[test]
    fn compatibility_root_exact_half() {
        // a = -1/2, q = 1, R = 1: b = 1/2 solves 2b = e^{a+b} exactly.
        let data = build_quadratic_initial_data(-0.5, 1.0, 1.0, 50.0).unwrap();
        assert!((data.curvature() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_compatibility_root_at_zero_center() {
        // sup_b 2b e^{-b} = 2/e < 1, so g < 0 everywhere.
        let err = build_quadratic_initial_data(0.0, 1.0, 1.0, 50.0).unwrap_err();
        assert!(matches!(err, Error::NoCompatibleRoot { .. }));
    }

    #[test]
    fn smallest_root_is_selected() {
        // g has two roots for a = -0.5; the larger one is near 2.68. The
        // builder must return the lower branch.
        let data = build_quadratic_initial_data(-0.5, 1.0, 1.0, 50.0).unwrap();
        assert!(data.curvature() < 1.0);
    }

    #[test]
    fn evaluate_initial_data_matches_formula() {
        let grid = RadialGrid::new(16, 1.0).unwrap();
        let zero = evaluate_initial_data(&InitialData::Quadratic { center: 0.0, curvature: 0.0 }, grid);
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let data = InitialData::Quadratic { center: 1.0, curvature: 2.0 };
        let field = evaluate_initial_data(&data, grid);
        assert_eq!(field.values()[8], 1.0 + 2.0 * 0.25);
    }

    #[test]
    fn smallness_gate_examples() {
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let flat = InitialData::Quadratic { center: 0.0, curvature: 0.0 };

        // λ = 0.01: lhs 0.09 <= min{0.1, 8/9} = 0.1.
        let report = check_hypotheses(&spec_with(1.0, 0.01, flat), grid, 1.0, 10.0).unwrap();
        assert!(report.smallness.ok);
        assert!((report.smallness.lhs - 0.09).abs() < 1e-12);
        assert!((report.smallness.rhs - 0.1).abs() < 1e-12);

        // λ = 0.02: 0.18 > 0.1.
        let report = check_hypotheses(&spec_with(1.0, 0.02, flat), grid, 1.0, 10.0).unwrap();
        assert!(!report.smallness.ok);
        assert!((report.smallness.lhs - 0.18).abs() < 1e-12);

        // λ = 0: lhs = 0 passes trivially.
        let report = check_hypotheses(&spec_with(1.0, 0.0, flat), grid, 1.0, 10.0).unwrap();
        assert!(report.smallness.ok);
        assert_eq!(report.smallness.lhs, 0.0);
    }

    #[test]
    fn flux_ordering_equality_at_boundary_for_unit_exponent() {
        // With q = 1 the compatible family satisfies the ordering condition
        // on the whole grid, with equality exactly at r = R.
        let grid = RadialGrid::new(128, 1.0).unwrap();
        for center in [-2.0, -1.0, -0.5] {
            let data = build_quadratic_initial_data(center, 1.0, 1.0, 50.0).unwrap();
            let spec = spec_with(1.0, 0.5, data);
            let report = check_hypotheses(&spec, grid, 1.0, 10.0).unwrap();
            assert!(report.flux_ordering.ok, "center {center}: {report:?}");
            let at_boundary = data.slope(1.0) - data.value(1.0).exp();
            assert!(at_boundary.abs() < 1e-10);
        }
    }

    #[test]
    fn hypothesis_checks_are_deterministic() {
        let grid = RadialGrid::new(64, 1.0).unwrap();
        let data = build_quadratic_initial_data(-1.0, 2.0, 1.0, 50.0).unwrap();
        let spec = spec_with(2.0, 1.0, data);
        let a = check_hypotheses(&spec, grid, 1.0, 10.0).unwrap();
        let b = check_hypotheses(&spec, grid, 1.0, 10.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let flat = InitialData::Quadratic { center: 0.0, curvature: 0.0 };
        let mut spec = spec_with(1.0, 1.0, flat);
        spec.radius = -1.0;
        assert!(spec.validate().is_err());

        let mut spec = spec_with(1.0, 1.0, flat);
        spec.flux_exponent = 0.0;
        assert!(spec.validate().is_err());

        // p <= 0 is only admissible when λ = 0.
        let mut spec = spec_with(1.0, 0.0, flat);
        spec.reaction_exponent = -3.0;
        assert!(spec.validate().is_ok());
        spec.reaction_coeff = 0.5;
        assert!(spec.validate().is_err());
    }
}
