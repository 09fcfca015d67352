//! The four-component phase-space state `(u, rho, v, n)` of the first-order
//! Klein-Gordon-Zakharov system: `u` and its momentum `rho = -u_t` are
//! complex, the wave pair `(v, n)` is real.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::Grid;

#[derive(Clone, Debug)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<Complex64>,
    pub rho: Vec<Complex64>,
    pub v: Vec<f64>,
    pub n: Vec<f64>,
    grid: Grid,
}

impl FieldState {
    pub fn zero(grid: &Grid, t: f64) -> FieldState {
        let n = grid.n();
        FieldState {
            t,
            u: vec![Complex64::ZERO; n],
            rho: vec![Complex64::ZERO; n],
            v: vec![0.0; n],
            n: vec![0.0; n],
            grid: grid.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `self += a * other`, component-wise with a real coefficient.
    pub fn axpy(&mut self, a: f64, other: &FieldState) {
        debug_assert!(self.grid == *other.grid());
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.rho.iter_mut().zip(&other.rho) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
        for (x, y) in self.n.iter_mut().zip(&other.n) {
            *x += a * y;
        }
    }

    /// `self + a * other` as a fresh state (keeps `self.t`).
    pub fn added(&self, a: f64, other: &FieldState) -> FieldState {
        let mut out = self.clone();
        out.axpy(a, other);
        out
    }

    /// Component-wise difference `self - other`; the result keeps `self.t`.
    pub fn sub(&self, other: &FieldState) -> Result<FieldState> {
        self.grid.check_same(other.grid())?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        for x in self.u.iter_mut() {
            *x *= a;
        }
        for x in self.rho.iter_mut() {
            *x *= a;
        }
        for x in self.v.iter_mut() {
            *x *= a;
        }
        for x in self.n.iter_mut() {
            *x *= a;
        }
    }

    /// Largest absolute value over all components (complex modulus for u, rho).
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for z in &self.u {
            m = m.max(z.norm_sqr());
        }
        for z in &self.rho {
            m = m.max(z.norm_sqr());
        }
        let mut m = m.sqrt();
        for &x in &self.v {
            m = m.max(x.abs());
        }
        for &x in &self.n {
            m = m.max(x.abs());
        }
        m
    }

    /// False as soon as any entry is NaN or infinite.
    pub fn all_finite(&self) -> bool {
        self.u.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self
                .rho
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.n.iter().all(|x| x.is_finite())
    }
}
