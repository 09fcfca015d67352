//! Periodic pseudospectral grid: collocation nodes, transforms, spectral
//! derivatives, dealiasing and quadrature.
//!
//! Conventions fixed here and relied on everywhere else:
//! nodes are `x_j = -L/2 + j*dx`; the forward transform is unnormalized and
//! the inverse carries the `1/n` factor; wavenumbers are ordered
//! `[0, 1, .., n/2-1, -n/2, .., -1]` (times `2*pi/L`); the `L^2` pairing is
//! the real part of `dx * sum(f * conj(g))`, which on a periodic grid is the
//! trapezoid rule.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    n: usize,
    length: f64,
    dx: f64,
    x: Vec<f64>,
    xi: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// A uniform periodic grid on `[-L/2, L/2)` with cached FFT plans.
///
/// Cloning is cheap (the plans are shared); two grids are considered the same
/// when `(n, length)` match.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("length", &self.0.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n && self.0.length == other.0.length
    }
}

impl Grid {
    /// Build a grid with `n` points on a box of the given length.
    ///
    /// `n` must be a power of two (>= 8) so that transforms stay fast and the
    /// 2/3 dealiasing band is well defined; the length must be positive and
    /// finite.
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let dx = length / n as f64;
        let x: Vec<f64> = (0..n).map(|j| -0.5 * length + j as f64 * dx).collect();
        let base = 2.0 * std::f64::consts::PI / length;
        let xi: Vec<f64> = (0..n)
            .map(|k| {
                let signed = if k < n / 2 {
                    k as isize
                } else {
                    k as isize - n as isize
                };
                base * signed as f64
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid(Arc::new(GridInner {
            n,
            length,
            dx,
            x,
            xi,
            fwd,
            inv,
        })))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    pub fn dx(&self) -> f64 {
        self.0.dx
    }

    /// Collocation nodes `x_j = -L/2 + j*dx`.
    pub fn x(&self) -> &[f64] {
        &self.0.x
    }

    /// Wavenumbers in transform order.
    pub fn xi(&self) -> &[f64] {
        &self.0.xi
    }

    /// Shortest periodic displacement congruent to `r` (in `[-L/2, L/2]`).
    pub fn wrap(&self, r: f64) -> f64 {
        r - self.0.length * (r / self.0.length).round()
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                n_a: self.0.n,
                length_a: self.0.length,
                n_b: other.0.n,
                length_b: other.0.length,
            })
        }
    }

    /// Unnormalized forward transform, in place.
    pub fn fft(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.0.n);
        self.0.fwd.process(buf);
    }

    /// Inverse transform carrying the `1/n` normalization, in place.
    pub fn ifft(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.0.n);
        self.0.inv.process(buf);
        let scale = 1.0 / self.0.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// Spectral derivative of the given order (multiplication by `(i*xi)^k`).
    ///
    /// For odd orders the Nyquist mode is zeroed: its `i*xi` image has no
    /// symmetric partner, and keeping it injects a spurious imaginary
    /// component into derivatives of real data.
    pub fn derivative(&self, values: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fft(&mut buf);
        self.apply_derivative_symbol(&mut buf, order);
        self.ifft(&mut buf);
        buf
    }

    /// Spectral derivative of real samples (imaginary round-off discarded).
    pub fn derivative_real(&self, values: &[f64], order: u32) -> Vec<f64> {
        let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.derivative(&buf, order).iter().map(|z| z.re).collect()
    }

    fn apply_derivative_symbol(&self, spectrum: &mut [Complex64], order: u32) {
        let n = self.0.n;
        for (k, z) in spectrum.iter_mut().enumerate() {
            if order % 2 == 1 && k == n / 2 {
                *z = Complex64::ZERO;
                continue;
            }
            let sym = Complex64::new(0.0, self.0.xi[k]).powu(order);
            *z *= sym;
        }
    }

    /// Zero every mode with index magnitude above `n/3` (the 2/3 rule), in
    /// place on physical-space samples. Applied to pointwise quadratic and
    /// cubic products it removes the aliased part of the spectrum.
    pub fn dealias(&self, values: &mut [Complex64]) {
        let mut buf = values.to_vec();
        self.fft(&mut buf);
        self.zero_aliased(&mut buf);
        self.ifft(&mut buf);
        values.copy_from_slice(&buf);
    }

    fn zero_aliased(&self, spectrum: &mut [Complex64]) {
        let n = self.0.n;
        let keep = n / 3;
        for (k, z) in spectrum.iter_mut().enumerate() {
            let signed = if k < n / 2 { k } else { n - k };
            if signed > keep {
                *z = Complex64::ZERO;
            }
        }
    }

    /// Derivative combined with an optional 2/3-rule filter in a single
    /// spectral pass; used for the `(|u|^2)_x` term of the wave equation.
    pub fn derivative_filtered_real(&self, values: &[f64], order: u32, filter: bool) -> Vec<f64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft(&mut buf);
        if filter {
            self.zero_aliased(&mut buf);
        }
        self.apply_derivative_symbol(&mut buf, order);
        self.ifft(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    /// Real `L^2` pairing `Re(dx * sum f conj(g))`.
    pub fn inner_complex(&self, f: &[Complex64], g: &[Complex64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        let s: f64 = f
            .iter()
            .zip(g)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        s * self.0.dx
    }

    pub fn inner_real(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        let s: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
        s * self.0.dx
    }

    pub fn norm_sq_complex(&self, f: &[Complex64]) -> f64 {
        let s: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        s * self.0.dx
    }

    pub fn norm_sq_real(&self, f: &[f64]) -> f64 {
        let s: f64 = f.iter().map(|v| v * v).sum();
        s * self.0.dx
    }

    /// `Int |f_x|^2 dx` evaluated as the Plancherel sum `sum xi^2 |fhat|^2`,
    /// so it pairs exactly with the spectral second derivative (the Nyquist
    /// mode carries its full `xi^2` weight, which a pointwise square of the
    /// odd-order derivative would drop).
    pub fn h1_seminorm_sq(&self, f: &[Complex64]) -> f64 {
        let mut buf = f.to_vec();
        self.fft(&mut buf);
        let s: f64 = buf
            .iter()
            .zip(&self.0.xi)
            .map(|(z, &xi)| xi * xi * z.norm_sqr())
            .sum();
        s * self.0.dx / self.0.n as f64
    }
}

/// Real scalar field sampled on a [`Grid`].
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Grid,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> RealField {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<RealField> {
        if values.len() != grid.n() {
            return Err(Error::InvalidArgument(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.n()
            )));
        }
        Ok(RealField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn derivative(&self, order: u32) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self.grid.derivative_real(&self.values, order),
        }
    }

    pub fn inner(&self, other: &RealField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.grid.inner_real(&self.values, &other.values))
    }
}

/// Complex scalar field sampled on a [`Grid`].
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Grid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> ComplexField {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        ComplexField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn derivative(&self, order: u32) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self.grid.derivative(&self.values, order),
        }
    }

    /// Real-pairing inner product; `<f, i f> = 0` under this convention.
    pub fn inner(&self, other: &ComplexField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.grid.inner_complex(&self.values, &other.values))
    }
}
