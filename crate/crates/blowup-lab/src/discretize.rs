//! Radial spatial discretization on the ball `[0, R]`: a uniform node grid,
//! the radial Laplacian with the symmetry limit at the origin, and the
//! ghost-node closure that imposes the nonlinear boundary flux exactly.

use crate::{Error, Result};

/// Uniform radial grid with nodes `r_i = R * i / N`, `i = 0..=N`.
///
/// Endpoints are exact: `node(0) == 0` and `node(N) == R` in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    cells: usize,
    radius: f64,
}

impl RadialGrid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(cells: usize, radius: f64) -> Result<Self> {
        if cells < Self::MIN_CELLS {
            return Err(Error::InvalidSpec(format!(
                "grid resolution N = {cells} below minimum {}",
                Self::MIN_CELLS
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSpec(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { cells, radius })
    }

    /// Number of cells `N`; the grid has `N + 1` nodes.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Node spacing `h = R / N`.
    pub fn spacing(&self) -> f64 {
        self.radius / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.cells);
        self.radius * (i as f64 / self.cells as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Values of a radial function on the nodes of a [`RadialGrid`].
///
/// Construction rejects non-finite entries; NaN or infinity anywhere in a
/// field is a hard error, not a warning.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSpec(format!(
                "field length {} does not match grid ({} nodes)",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: RadialGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at the boundary node `r = R`.
    pub fn boundary_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation at radius `r` within `[0, R]`.
    pub fn interpolate(&self, r: f64) -> f64 {
        let grid = self.grid;
        let h = grid.spacing();
        let x = (r / h).clamp(0.0, grid.cells() as f64);
        let i = (x.floor() as usize).min(grid.cells() - 1);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Radial Laplacian `Δu = u_rr + (n-1)/r · u_r` on the grid.
///
/// Interior nodes use centered second differences; the origin uses the
/// symmetry limit `Δu(0) = n·u_rr(0) ≈ 2n(u_1 - u_0)/h²`. The boundary node
/// is set to zero here — its closure is owned by [`apply_flux_closure`].
pub fn radial_laplacian(u: &RadialField, dim: u32) -> Result<RadialField> {
    if dim < 1 {
        return Err(Error::InvalidSpec("dimension must be >= 1".into()));
    }
    let grid = u.grid();
    let mut out = vec![0.0; grid.len()];
    laplacian_interior_into(u.values(), grid, dim, &mut out);
    RadialField::new(grid, out)
}

pub(crate) fn laplacian_interior_into(u: &[f64], grid: RadialGrid, dim: u32, out: &mut [f64]) {
    let n = grid.cells();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let nf = dim as f64;
    out[0] = 2.0 * nf * (u[1] - u[0]) * inv_h2;
    for i in 1..n {
        let r = grid.node(i);
        let second = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
        let first = (u[i + 1] - u[i - 1]) / (2.0 * h);
        out[i] = second + (nf - 1.0) / r * first;
    }
    out[n] = 0.0;
}

/// Laplacian at the boundary node `r = R` with the ghost value
/// `u_{N+1} = u_{N-1} + 2h·e^{q·u_N}` substituted into both difference terms.
///
/// The implied discrete normal derivative `(u_{N+1} - u_{N-1})/(2h)` equals
/// `e^{q·u_N}` to machine precision, so the flux condition is imposed exactly.
pub fn apply_flux_closure(u: &RadialField, flux_exponent: f64, dim: u32) -> Result<f64> {
    flux_closure_into(u.values(), u.grid(), flux_exponent, dim)
}

pub(crate) fn flux_closure_into(
    u: &[f64],
    grid: RadialGrid,
    flux_exponent: f64,
    dim: u32,
) -> Result<f64> {
    let n = grid.cells();
    let h = grid.spacing();
    let flux = boundary_flux(u[n], flux_exponent)?;
    let second = (2.0 * u[n - 1] - 2.0 * u[n] + 2.0 * h * flux) / (h * h);
    Ok(second + (dim as f64 - 1.0) / grid.radius() * flux)
}

/// `e^{q·u_N}`, guarded against leaving the floating range.
pub(crate) fn boundary_flux(boundary_value: f64, flux_exponent: f64) -> Result<f64> {
    let flux = (flux_exponent * boundary_value).exp();
    if !flux.is_finite() {
        return Err(Error::Overflow(format!(
            "boundary flux exp({} * {boundary_value}) is not representable",
            flux_exponent
        )));
    }
    Ok(flux)
}

/// Discrete radial derivative: centered differences at interior nodes, a
/// one-sided second-order stencil at the origin (zero for symmetric data),
/// and at the boundary either the ghost-closure flux `e^{q·u_N}` when a flux
/// exponent is supplied or the one-sided stencil otherwise.
pub fn derivative_field(u: &RadialField, flux_exponent: Option<f64>) -> Result<RadialField> {
    let grid = u.grid();
    let mut out = vec![0.0; grid.len()];
    derivative_into(u.values(), grid, flux_exponent, &mut out)?;
    RadialField::new(grid, out)
}

pub(crate) fn derivative_into(
    u: &[f64],
    grid: RadialGrid,
    flux_exponent: Option<f64>,
    out: &mut [f64],
) -> Result<()> {
    let n = grid.cells();
    let h = grid.spacing();
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    for i in 1..n {
        out[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    out[n] = match flux_exponent {
        Some(q) => boundary_flux(u[n], q)?,
        None => (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h),
    };
    Ok(())
}
