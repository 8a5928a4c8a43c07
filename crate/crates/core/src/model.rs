//! Physical parameters, the periodic spatial grid, the sextic-Gaussian double
//! well and the two-component spinor field.
//!
//! Units follow the dimensionless convention hbar = M = 1: energies in units of
//! hbar*omega_0, lengths in 1/k, times in 1/omega_0.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Parameters of the unperturbed Hamiltonian and the Raman drive
/// `Omega(t) = omega0 + omega1 * cos(omega * t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spin-orbit coupling strength.
    pub gamma: f64,
    /// Static Raman coupling.
    pub omega0: f64,
    /// Drive amplitude.
    pub omega1: f64,
    /// Drive angular frequency.
    pub omega: f64,
    /// Depth `U` of each well.
    pub well_depth: f64,
    /// Width `a` of each well.
    pub well_width: f64,
    /// Distance `d` between the two well centers.
    pub well_separation: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            gamma: 0.725,
            omega0: 1.0,
            omega1: 0.1,
            omega: 1.8445,
            well_depth: 12.0,
            well_width: 0.5,
            well_separation: 2.0,
        }
    }
}

impl ModelParams {
    /// Default trap and coupling (U = 12, a = 1/2, Omega0 = 1, Omega1 = 0.1)
    /// with the given separation, SOC strength and drive frequency.
    pub fn with(well_separation: f64, gamma: f64, omega: f64) -> Self {
        Self {
            gamma,
            omega,
            well_separation,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("gamma", self.gamma),
            ("omega0", self.omega0),
            ("omega1", self.omega1),
            ("omega", self.omega),
            ("well_depth", self.well_depth),
            ("well_width", self.well_width),
            ("well_separation", self.well_separation),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} is not finite"),
                });
            }
        }
        let positive = [
            ("well_depth", self.well_depth),
            ("well_width", self.well_width),
            ("well_separation", self.well_separation),
        ];
        for (name, value) in positive {
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {value}"),
                });
            }
        }
        if self.omega1 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega1",
                reason: format!("must be non-negative, got {}", self.omega1),
            });
        }
        if self.is_driven() && self.omega <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must be positive when a drive is active, got {}", self.omega),
            });
        }
        Ok(())
    }

    pub fn is_driven(&self) -> bool {
        self.omega1 > 0.0
    }

    /// Same parameters with the drive switched off.
    pub fn undriven(self) -> Self {
        Self {
            omega1: 0.0,
            ..self
        }
    }
}

/// Single sextic-Gaussian well `-U exp(-x^6 / a^6)`.
fn single_well(x: f64, depth: f64, width: f64) -> f64 {
    let r = x / width;
    let r2 = r * r;
    -depth * (-(r2 * r2 * r2)).exp()
}

/// Symmetric double well `V0(x + d/2) + V0(x - d/2)`.
pub fn potential(x: f64, params: &ModelParams) -> f64 {
    let half = 0.5 * params.well_separation;
    single_well(x + half, params.well_depth, params.well_width)
        + single_well(x - half, params.well_depth, params.well_width)
}

pub fn sample_potential(grid: &SpatialGrid, params: &ModelParams) -> Vec<f64> {
    grid.x().iter().map(|&x| potential(x, params)).collect()
}

/// Uniform periodic grid `x[j] = x_min + j*dx`, `dx = (x_max - x_min)/n`.
///
/// Momenta use discrete-Fourier ordering with the Nyquist entry placed at
/// `+pi/dx`, so every `k[j]*dx` lies in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
}

impl Default for SpatialGrid {
    fn default() -> Self {
        Self::new(-10.0, 10.0, 1024).expect("default grid is valid")
    }
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 4, got {n}"
            )));
        }
        let dx = (x_max - x_min) / n as f64;
        let x = (0..n).map(|j| x_min + j as f64 * dx).collect();
        let dk = 2.0 * PI / (n as f64 * dx);
        let k = (0..n)
            .map(|j| {
                if j <= n / 2 {
                    j as f64 * dk
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect();
        Ok(Self {
            x_min,
            x_max,
            dx,
            x,
            k,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// True when the periodic box is centred on the origin, so that
    /// `x -> -x` maps grid points onto grid points.
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * (self.x_max - self.x_min)
    }

    /// Index of `-x[j]` on a symmetric periodic grid.
    #[inline]
    pub fn mirror_index(&self, j: usize) -> usize {
        let n = self.n();
        (n - j) % n
    }

    /// Index of the grid point at `x = 0`, if there is one.
    pub fn origin_index(&self) -> Option<usize> {
        let j = (-self.x_min / self.dx).round();
        if j < 0.0 || j >= self.n() as f64 {
            return None;
        }
        let j = j as usize;
        (self.x[j].abs() <= 1e-9 * self.dx).then_some(j)
    }
}

/// Spinor `(psi_up, psi_down)` sampled on a grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpinorField {
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
}

impl SpinorField {
    pub fn new(up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self> {
        if up.len() != down.len() {
            return Err(Error::LengthMismatch {
                expected: up.len(),
                found: down.len(),
            });
        }
        Ok(Self { up, down })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            up: vec![Complex64::default(); n],
            down: vec![Complex64::default(); n],
        }
    }

    /// Builds a field from component functions of `x`.
    pub fn from_fn(
        grid: &SpatialGrid,
        up: impl Fn(f64) -> Complex64,
        down: impl Fn(f64) -> Complex64,
    ) -> Self {
        Self {
            up: grid.x().iter().map(|&x| up(x)).collect(),
            down: grid.x().iter().map(|&x| down(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    pub fn check_grid(&self, grid: &SpatialGrid) -> Result<()> {
        for len in [self.up.len(), self.down.len()] {
            if len != grid.n() {
                return Err(Error::LengthMismatch {
                    expected: grid.n(),
                    found: len,
                });
            }
        }
        Ok(())
    }

    /// `<self|other>` with the `dx * sum` quadrature.
    pub fn inner(&self, other: &SpinorField, dx: f64) -> Complex64 {
        let up: Complex64 = self.up.iter().zip(&other.up).map(|(a, b)| a.conj() * b).sum();
        let down: Complex64 = self
            .down
            .iter()
            .zip(&other.down)
            .map(|(a, b)| a.conj() * b)
            .sum();
        (up + down) * dx
    }

    pub fn norm_sqr(&self, dx: f64) -> f64 {
        let s: f64 = self
            .up
            .iter()
            .chain(&self.down)
            .map(|z| z.norm_sqr())
            .sum();
        s * dx
    }

    pub fn scale(&mut self, factor: Complex64) {
        for z in self.up.iter_mut().chain(self.down.iter_mut()) {
            *z *= factor;
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &SpinorField, b: Complex64) -> Self {
        let mix = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
        };
        Self {
            up: mix(&self.up, &other.up),
            down: mix(&self.down, &other.down),
        }
    }

    /// `sigma_x` applied to the field (component swap).
    pub fn sigma_x(&self) -> Self {
        Self {
            up: self.down.clone(),
            down: self.up.clone(),
        }
    }

    /// Largest deviation between two fields, componentwise.
    pub fn max_abs_diff(&self, other: &SpinorField) -> f64 {
        self.up
            .iter()
            .zip(&other.up)
            .chain(self.down.iter().zip(&other.down))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.up
            .iter()
            .chain(&self.down)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Position expectation `<x>` for a normalized field.
    pub fn mean_position(&self, grid: &SpatialGrid) -> f64 {
        let s: f64 = grid
            .x()
            .iter()
            .zip(self.up.iter().zip(&self.down))
            .map(|(x, (u, d))| x * (u.norm_sqr() + d.norm_sqr()))
            .sum();
        s * grid.dx()
    }
}

/// Rescales `field` to unit norm by a positive real factor.
pub fn normalize(field: &SpinorField, grid: &SpatialGrid) -> Result<SpinorField> {
    field.check_grid(grid)?;
    let norm2 = field.norm_sqr(grid.dx());
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(field.scaled(Complex64::new(norm2.sqrt().recip(), 0.0)))
}
