//! Free-space heat kernel, sphere/ball potentials, and the integral-identity
//! residual used as an independent short-time consistency oracle for the
//! finite-difference solver.
//!
//! The identity is used as a *residual check* on solver output, never as an
//! integral-equation solver in its own right. The normal derivative of the
//! kernel is evaluated analytically from the Gaussian, and the oracle samples
//! field points with `r ≤ 0.9R` to stay clear of the double-layer jump at
//! the sphere.

use std::sync::OnceLock;

use crate::discretize::RadialGrid;
use crate::integrate::Trace;
use crate::model::ProblemSpec;
use crate::{Error, Result};

/// Quadrature budgets for the potential integrals: composite Gauss–Legendre
/// with 16-point panels in both the geometric variable and time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotentialQuadrature {
    pub angular_nodes: usize,
    pub time_nodes: usize,
}

impl Default for PotentialQuadrature {
    fn default() -> Self {
        Self { angular_nodes: 256, time_nodes: 128 }
    }
}

impl PotentialQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.angular_nodes < 16 || self.time_nodes < 16 {
            return Err(Error::InvalidSpec(
                "quadrature budgets must be at least 16 nodes".into(),
            ));
        }
        Ok(())
    }

    fn geometric_panels(&self) -> usize {
        (self.angular_nodes / 16).max(1)
    }

    fn time_panels(&self) -> usize {
        (self.time_nodes / 16).max(1)
    }
}

/// Fundamental solution of the heat equation,
/// `Γ(x, t) = (4πt)^{−n/2} exp(−|x|²/(4t))`, evaluated at `|x| = dist`.
pub fn gamma(dist: f64, t: f64, dim: u32) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    Ok(gamma_unchecked(dist, t, dim))
}

#[inline]
fn gamma_unchecked(dist: f64, t: f64, dim: u32) -> f64 {
    let four_t = 4.0 * t;
    (std::f64::consts::PI * four_t).powf(-(dim as f64) / 2.0) * (-dist * dist / four_t).exp()
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Gauss–Legendre nodes and weights on (−1, 1) by Newton iteration on the
/// Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 1..=n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i - 1] = -x;
        nodes[n - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i - 1] = w;
        weights[n - i] = w;
    }
    (nodes, weights)
}

/// Composite 16-point Gauss–Legendre over `[a, b]` with uniform panels.
fn composite_gl(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (nodes, weights) = gl16();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        for (&x, &w) in nodes.iter().zip(weights) {
            total += w * half * f(mid + half * x);
        }
    }
    total
}

/// Surface measure of the unit sphere in `R^k` (k ≥ 1).
fn unit_sphere_area(k: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf(k as f64 / 2.0) / libm::tgamma(k as f64 / 2.0)
}

fn check_field_point(r: f64, radius: f64) -> Result<()> {
    if !(0.0..=radius).contains(&r) {
        return Err(Error::Domain { r, radius });
    }
    Ok(())
}

/// `∫_{S_ρ} Γ(x − y, t) ds_y` for a field point at radius `r` and a sphere of
/// radius `sphere_r`. For `n = 1` the sphere is the two-point set `{−ρ, ρ}`;
/// for `n ≥ 2` the polar-angle integral carries weight `sin^{n−2}θ`.
pub fn sphere_potential(
    r: f64,
    sphere_r: f64,
    t: f64,
    dim: u32,
    quad: &PotentialQuadrature,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    check_field_point(r, sphere_r)?;
    quad.validate()?;
    Ok(sphere_potential_raw(r, sphere_r, t, dim, quad.geometric_panels()))
}

fn sphere_potential_raw(r: f64, sphere_r: f64, t: f64, dim: u32, panels: usize) -> f64 {
    if dim == 1 {
        return gamma_unchecked(sphere_r - r, t, 1) + gamma_unchecked(sphere_r + r, t, 1);
    }
    let weight_pow = dim as i32 - 2;
    let measure = unit_sphere_area(dim - 1) * sphere_r.powi(dim as i32 - 1);
    measure
        * composite_gl(0.0, std::f64::consts::PI, panels, |theta| {
            let d2 = r * r + sphere_r * sphere_r - 2.0 * r * sphere_r * theta.cos();
            gamma_unchecked(d2.max(0.0).sqrt(), t, dim) * theta.sin().powi(weight_pow)
        })
}

/// `∫_{S_ρ} ∂Γ/∂η_y (x − y, t) ds_y`: the double-layer density integrated
/// over the sphere, with the normal derivative taken analytically,
/// `∇_yΓ·η = (x·y − ρ²)/(2tρ)·Γ(|x−y|, t)`. Negative for interior points.
fn sphere_normal_derivative_raw(r: f64, sphere_r: f64, t: f64, dim: u32, panels: usize) -> f64 {
    if dim == 1 {
        return (r - sphere_r) / (2.0 * t) * gamma_unchecked(sphere_r - r, t, 1)
            - (r + sphere_r) / (2.0 * t) * gamma_unchecked(sphere_r + r, t, 1);
    }
    let weight_pow = dim as i32 - 2;
    let measure = unit_sphere_area(dim - 1) * sphere_r.powi(dim as i32 - 1);
    measure
        * composite_gl(0.0, std::f64::consts::PI, panels, |theta| {
            let cos = theta.cos();
            let d2 = r * r + sphere_r * sphere_r - 2.0 * r * sphere_r * cos;
            let kernel = (r * sphere_r * cos - sphere_r * sphere_r) / (2.0 * t * sphere_r);
            kernel * gamma_unchecked(d2.max(0.0).sqrt(), t, dim) * theta.sin().powi(weight_pow)
        })
}

/// `∫_{B_R} Γ(x − y, t) dy` with unit density, via the nested radius–angle
/// rule. Always in `(0, 1]` and approaches 1 as `R/√t → ∞`.
pub fn ball_potential(
    r: f64,
    radius: f64,
    t: f64,
    dim: u32,
    quad: &PotentialQuadrature,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    check_field_point(r, radius)?;
    quad.validate()?;
    let panels = quad.geometric_panels();
    Ok(composite_gl(0.0, radius, panels, |rho| {
        sphere_potential_raw(r, rho, t, dim, panels)
    }))
}

/// Total mass `∫_{R^n} Γ dx` by radial quadrature (truncated far beyond the
/// Gaussian core); equals 1 for every `t > 0`.
pub fn gamma_mass(t: f64, dim: u32, quad: &PotentialQuadrature) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    quad.validate()?;
    let cutoff = 40.0 * t.sqrt();
    let area = unit_sphere_area(dim);
    let panels = quad.geometric_panels().max(32);
    Ok(composite_gl(0.0, cutoff, panels, |rho| {
        area * rho.powi(dim as i32 - 1) * gamma_unchecked(rho, t, dim)
    }))
}

/// One-dimensional volume potential of a piecewise-linear radial density:
/// `∫_{−R}^{R} Γ(y − x, t)·dens(|y|) dy`, integrated exactly per segment via
/// the Gaussian antiderivatives (erf for the constant part, Γ itself for the
/// linear part). Exact for any `t > 0`, however concentrated the kernel.
fn volume_potential_linear_1d(density: &[f64], grid: RadialGrid, x: f64, t: f64) -> f64 {
    let h = grid.spacing();
    let root = 2.0 * t.sqrt();
    let mut total = 0.0;
    for i in 0..grid.cells() {
        let a = grid.node(i);
        let b = grid.node(i + 1);
        let alpha = (density[i + 1] - density[i]) / h;
        let beta = density[i] - alpha * a;
        for center in [x, -x] {
            let i0 = 0.5
                * (libm::erf((b - center) / root) - libm::erf((a - center) / root));
            let i1 = -2.0
                * t
                * (gamma_unchecked(b - center, t, 1) - gamma_unchecked(a - center, t, 1));
            total += alpha * i1 + (alpha * center + beta) * i0;
        }
    }
    total
}

/// Volume potential of a radial density for `n ≥ 2` by the nested
/// radius–angle rule with linear interpolation of the node values.
fn volume_potential_nd(
    density: &[f64],
    grid: RadialGrid,
    x: f64,
    t: f64,
    dim: u32,
    panels: usize,
) -> f64 {
    let h = grid.spacing();
    let n = grid.cells();
    composite_gl(0.0, grid.radius(), panels, |rho| {
        let pos = (rho / h).clamp(0.0, n as f64);
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        let dens = density[i] * (1.0 - frac) + density[i + 1] * frac;
        dens * sphere_potential_raw(x, rho, t, dim, panels)
    })
}

fn interp_series(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let i = ts.partition_point(|&x| x < t);
    if i == 0 {
        return vs[0];
    }
    if i >= ts.len() {
        return *vs.last().unwrap();
    }
    let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    vs[i - 1] * (1.0 - w) + vs[i] * w
}

/// Maximum over the sample radii of the defect in the heat-potential
/// representation of `u(x, t)` over the window between two stored snapshots:
/// initial ball term, reaction Duhamel term, boundary single layer, minus the
/// boundary double layer.
pub fn integral_identity_residual(
    trace: &Trace,
    spec: &ProblemSpec,
    base_index: usize,
    test_index: usize,
    sample_radii: &[f64],
    quad: &PotentialQuadrature,
) -> Result<f64> {
    let lam = spec.reaction_coeff;
    let p = spec.reaction_exponent;
    let q = spec.flux_exponent;
    identity_residual_with(
        trace,
        spec.dim,
        base_index,
        test_index,
        sample_radii,
        quad,
        |boundary_value| (q * boundary_value).exp(),
        if lam != 0.0 { Some(move |u: f64| lam * (p * u).exp()) } else { None },
    )
}

/// Residual evaluation with pluggable boundary-flux and reaction laws; the
/// public wrapper fixes them to `e^{qu}` and `λe^{pu}`.
pub(crate) fn identity_residual_with(
    trace: &Trace,
    dim: u32,
    base_index: usize,
    test_index: usize,
    sample_radii: &[f64],
    quad: &PotentialQuadrature,
    boundary_flux: impl Fn(f64) -> f64,
    reaction: Option<impl Fn(f64) -> f64>,
) -> Result<f64> {
    quad.validate()?;
    let snaps = &trace.snapshots;
    if base_index >= test_index || test_index >= snaps.len() {
        return Err(Error::InsufficientSnapshots(format!(
            "window indices ({base_index}, {test_index}) out of range for {} snapshots",
            snaps.len()
        )));
    }
    let t_base = snaps[base_index].t;
    let t_test = snaps[test_index].t;
    if !(t_base > 0.0) {
        return Err(Error::NonpositiveTime(t_base));
    }
    let window = t_test - t_base;

    // Snapshot density gate: the time interpolation must not bridge gaps
    // wider than a sixteenth of the window.
    let max_gap = window / 16.0;
    for w in snaps[base_index..=test_index].windows(2) {
        if w[1].t - w[0].t > max_gap {
            return Err(Error::InsufficientSnapshots(format!(
                "gap {} exceeds {} inside the window",
                w[1].t - w[0].t,
                max_gap
            )));
        }
    }

    let grid = snaps[base_index].field.grid();
    let radius = grid.radius();
    for &r in sample_radii {
        if !(0.0..=0.9 * radius + 1e-12).contains(&r) {
            return Err(Error::Domain { r, radius: 0.9 * radius });
        }
    }

    let snap_times: Vec<f64> = snaps[base_index..=test_index].iter().map(|s| s.t).collect();
    let local = &snaps[base_index..=test_index];
    let sample_times: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
    let sample_values: Vec<f64> = trace.samples.iter().map(|s| s.boundary_value).collect();

    let geom_panels = quad.geometric_panels();
    let volume = |density: &[f64], x: f64, s: f64| -> f64 {
        if dim == 1 {
            volume_potential_linear_1d(density, grid, x, s)
        } else {
            volume_potential_nd(density, grid, x, s, dim, geom_panels)
        }
    };

    // Time-quadrature nodes shared by all terms.
    let (gl_nodes, gl_weights) = gl16().clone();
    let time_panels = quad.time_panels();
    let panel_width = window / time_panels as f64;
    let mut taus = Vec::with_capacity(time_panels * 16);
    let mut tau_weights = Vec::with_capacity(time_panels * 16);
    for panel in 0..time_panels {
        let lo = t_base + panel_width * panel as f64;
        let mid = lo + 0.5 * panel_width;
        let half = 0.5 * panel_width;
        for (&x, &w) in gl_nodes.iter().zip(&gl_weights) {
            taus.push(mid + half * x);
            tau_weights.push(w * half);
        }
    }

    // Interpolated reaction density at each time node, shared across radii.
    let mut reaction_profiles: Vec<Vec<f64>> = Vec::new();
    if let Some(react) = &reaction {
        for &tau in &taus {
            let i = snap_times.partition_point(|&x| x < tau).clamp(1, local.len() - 1);
            let (s0, s1) = (&local[i - 1], &local[i]);
            let w = ((tau - s0.t) / (s1.t - s0.t)).clamp(0.0, 1.0);
            let profile: Vec<f64> = s0
                .field
                .values()
                .iter()
                .zip(s1.field.values())
                .map(|(&a, &b)| react(a * (1.0 - w) + b * w))
                .collect();
            reaction_profiles.push(profile);
        }
    }

    let base_density = snaps[base_index].field.values();
    let mut worst: f64 = 0.0;
    for &x in sample_radii {
        let lhs = snaps[test_index].field.interpolate(x);
        let ball = volume(base_density, x, window);

        let mut duhamel = 0.0;
        if reaction.is_some() {
            for (k, &tau) in taus.iter().enumerate() {
                duhamel += tau_weights[k] * volume(&reaction_profiles[k], x, t_test - tau);
            }
        }

        let mut single_layer = 0.0;
        let mut double_layer = 0.0;
        for (k, &tau) in taus.iter().enumerate() {
            let s = t_test - tau;
            let boundary_value = interp_series(&sample_times, &sample_values, tau);
            single_layer += tau_weights[k]
                * boundary_flux(boundary_value)
                * sphere_potential_raw(x, radius, s, dim, geom_panels);
            double_layer += tau_weights[k]
                * boundary_value
                * sphere_normal_derivative_raw(x, radius, s, dim, geom_panels);
        }

        let rhs = ball + duhamel + single_layer - double_layer;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
