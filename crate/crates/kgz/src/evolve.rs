//! Time integration of the Klein-Gordon-Zakharov system
//!
//! ```text
//! u_t = -rho
//! rho_t = -u_xx + u + alpha u v + beta |u|^2 u
//! v_t = n_x
//! n_t = v_x + (|u|^2)_x
//! ```
//!
//! The linear part diagonalizes per Fourier mode into a Klein-Gordon block
//! acting on `(u, rho)` with frequency `w = sqrt(1 + xi^2)` and a transport
//! block acting on `(v, n)` with frequency `xi`; both are applied exactly by
//! [`LinearPropagator`]. Three steppers are provided: classical `RK4` on the
//! full right-hand side, `Strang` splitting (the nonlinear substep is exactly
//! integrable because `u` and `v` are frozen under it), and Lawson's
//! exponential RK4 (`Lawson`), which integrates the linear part exactly and is
//! the default for long runs. Negative `dt` integrates backward.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::soliton::SystemParams;
use crate::state::FieldState;

/// Cubic/quadratic products feeding the `rho` equation:
/// `alpha * u v + beta * |u|^2 u`, optionally passed through the 2/3-rule
/// filter. Shared by the right-hand side and the energy gradient so that the
/// Hamiltonian identity holds exactly on the grid.
pub(crate) fn cubic_coupling(
    state: &FieldState,
    params: &SystemParams,
    dealias: bool,
) -> Vec<Complex64> {
    let grid = state.grid();
    let mut out: Vec<Complex64> = state
        .u
        .iter()
        .zip(&state.v)
        .map(|(u, &v)| {
            params.alpha * u * v + params.beta * u.norm_sqr() * u
        })
        .collect();
    if dealias {
        grid.dealias(&mut out);
    }
    out
}

/// `|u|^2`, optionally filtered; the quantity driving the wave equation and
/// the third slot of the energy gradient.
pub(crate) fn intensity(state: &FieldState, dealias: bool) -> Vec<f64> {
    let grid = state.grid();
    let u2: Vec<f64> = state.u.iter().map(|u| u.norm_sqr()).collect();
    if dealias {
        let mut buf: Vec<Complex64> = u2.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.dealias(&mut buf);
        buf.iter().map(|z| z.re).collect()
    } else {
        u2
    }
}

/// Full right-hand side with the default 2/3-rule dealiasing of products.
pub fn rhs(state: &FieldState, params: &SystemParams) -> FieldState {
    rhs_opts(state, params, true)
}

/// Right-hand side with explicit control over product dealiasing.
pub fn rhs_opts(state: &FieldState, params: &SystemParams, dealias: bool) -> FieldState {
    let grid = state.grid().clone();
    let coupling = cubic_coupling(state, params, dealias);
    let u2 = intensity(state, dealias);
    let u_xx = grid.derivative(&state.u, 2);

    let mut out = FieldState::zero(&grid, state.t);
    for j in 0..grid.n() {
        out.u[j] = -state.rho[j];
        out.rho[j] = -u_xx[j] + state.u[j] + coupling[j];
    }
    out.v = grid.derivative_real(&state.n, 1);
    let total: Vec<f64> = state.v.iter().zip(&u2).map(|(a, b)| a + b).collect();
    out.n = grid.derivative_real(&total, 1);
    out
}

/// Nonlinear-only vector field `(0, alpha u v + beta |u|^2 u, 0, (|u|^2)_x)`
/// used by the splitting and exponential integrators.
fn nonlinear_field(state: &FieldState, params: &SystemParams, dealias: bool) -> FieldState {
    let grid = state.grid().clone();
    let mut out = FieldState::zero(&grid, state.t);
    out.rho = cubic_coupling(state, params, dealias);
    let u2: Vec<f64> = state.u.iter().map(|u| u.norm_sqr()).collect();
    out.n = grid.derivative_filtered_real(&u2, 1, dealias);
    out
}

/// Exact flow of the linear part over a fixed interval `dt`, stored as
/// per-mode 2x2 blocks:
///
/// ```text
/// (u, rho):  [ cos(dt w)      -sin(dt w)/w ]        w = sqrt(1 + xi^2)
///            [ w sin(dt w)     cos(dt w)   ]
///
/// (v, n):    [ cos(dt xi)     i sin(dt xi) ]
///            [ i sin(dt xi)    cos(dt xi)  ]
/// ```
///
/// Each block has unit determinant, so the map is invertible and
/// `apply(dt)` followed by `apply(-dt)` is the identity up to round-off.
pub struct LinearPropagator {
    grid: Grid,
    dt: f64,
    kg_cos: Vec<f64>,
    kg_sin_over: Vec<f64>,
    kg_sin_times: Vec<f64>,
    wave_cos: Vec<f64>,
    wave_sin: Vec<f64>,
}

impl LinearPropagator {
    pub fn new(grid: &Grid, dt: f64) -> LinearPropagator {
        let n = grid.n();
        let mut kg_cos = Vec::with_capacity(n);
        let mut kg_sin_over = Vec::with_capacity(n);
        let mut kg_sin_times = Vec::with_capacity(n);
        let mut wave_cos = Vec::with_capacity(n);
        let mut wave_sin = Vec::with_capacity(n);
        for &xi in grid.xi() {
            let w = (1.0 + xi * xi).sqrt();
            let (sw, cw) = (dt * w).sin_cos();
            kg_cos.push(cw);
            kg_sin_over.push(sw / w);
            kg_sin_times.push(w * sw);
            let (sx, cx) = (dt * xi).sin_cos();
            wave_cos.push(cx);
            wave_sin.push(sx);
        }
        LinearPropagator {
            grid: grid.clone(),
            dt,
            kg_cos,
            kg_sin_over,
            kg_sin_times,
            wave_cos,
            wave_sin,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Klein-Gordon block entries `(cos, sin/w, w sin)` at mode `k`.
    pub fn kg_entries(&self, k: usize) -> (f64, f64, f64) {
        (self.kg_cos[k], self.kg_sin_over[k], self.kg_sin_times[k])
    }

    /// Transport block entries `(cos, sin)` at mode `k`.
    pub fn wave_entries(&self, k: usize) -> (f64, f64) {
        (self.wave_cos[k], self.wave_sin[k])
    }

    pub fn apply(&self, state: &FieldState) -> FieldState {
        debug_assert!(self.grid == *state.grid());
        let grid = &self.grid;
        let n = grid.n();

        let mut u = state.u.clone();
        let mut rho = state.rho.clone();
        grid.fft(&mut u);
        grid.fft(&mut rho);
        for k in 0..n {
            let (a, b) = (u[k], rho[k]);
            u[k] = self.kg_cos[k] * a - self.kg_sin_over[k] * b;
            rho[k] = self.kg_sin_times[k] * a + self.kg_cos[k] * b;
        }
        grid.ifft(&mut u);
        grid.ifft(&mut rho);

        let mut v: Vec<Complex64> = state.v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut nn: Vec<Complex64> = state.n.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.fft(&mut v);
        grid.fft(&mut nn);
        for k in 0..n {
            let (a, b) = (v[k], nn[k]);
            let i_sin = Complex64::new(0.0, self.wave_sin[k]);
            v[k] = self.wave_cos[k] * a + i_sin * b;
            nn[k] = i_sin * a + self.wave_cos[k] * b;
        }
        grid.ifft(&mut v);
        grid.ifft(&mut nn);

        let mut out = FieldState::zero(grid, state.t);
        out.u = u;
        out.rho = rho;
        out.v = v.iter().map(|z| z.re).collect();
        out.n = nn.iter().map(|z| z.re).collect();
        out
    }
}

/// Apply the exact linear flow over `dt` (no nonlinear terms).
pub fn apply_linear(state: &FieldState, dt: f64) -> FieldState {
    LinearPropagator::new(state.grid(), dt).apply(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    Strang,
    Lawson,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::Rk4 => "rk4",
            Scheme::Strang => "strang",
            Scheme::Lawson => "lawson",
        };
        f.write_str(name)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Scheme::Rk4),
            "strang" => Ok(Scheme::Strang),
            "lawson" => Ok(Scheme::Lawson),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected rk4, strang or lawson)"
            ))),
        }
    }
}

/// One-step integrator with per-`dt` precomputed propagators.
pub struct Stepper {
    params: SystemParams,
    scheme: Scheme,
    dealias: bool,
    dt: f64,
    full: Option<LinearPropagator>,
    half: Option<LinearPropagator>,
}

impl Stepper {
    pub fn new(
        grid: &Grid,
        params: &SystemParams,
        dt: f64,
        scheme: Scheme,
        dealias: bool,
    ) -> Stepper {
        let (full, half) = match scheme {
            Scheme::Rk4 => (None, None),
            Scheme::Strang => (None, Some(LinearPropagator::new(grid, 0.5 * dt))),
            Scheme::Lawson => (
                Some(LinearPropagator::new(grid, dt)),
                Some(LinearPropagator::new(grid, 0.5 * dt)),
            ),
        };
        Stepper {
            params: *params,
            scheme,
            dealias,
            dt,
            full,
            half,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn advance(&self, state: &FieldState) -> FieldState {
        let mut out = match self.scheme {
            Scheme::Rk4 => self.rk4(state),
            Scheme::Strang => self.strang(state),
            Scheme::Lawson => self.lawson(state),
        };
        out.t = state.t + self.dt;
        out
    }

    fn rk4(&self, state: &FieldState) -> FieldState {
        let h = self.dt;
        let k1 = rhs_opts(state, &self.params, self.dealias);
        let k2 = rhs_opts(&state.added(0.5 * h, &k1), &self.params, self.dealias);
        let k3 = rhs_opts(&state.added(0.5 * h, &k2), &self.params, self.dealias);
        let k4 = rhs_opts(&state.added(h, &k3), &self.params, self.dealias);
        let mut out = state.clone();
        out.axpy(h / 6.0, &k1);
        out.axpy(h / 3.0, &k2);
        out.axpy(h / 3.0, &k3);
        out.axpy(h / 6.0, &k4);
        out
    }

    /// During the nonlinear substep `u` and `v` are constant, so `rho` and `n`
    /// receive an exact increment; the splitting error is entirely in the
    /// operator ordering.
    fn strang(&self, state: &FieldState) -> FieldState {
        let half = self.half.as_ref().expect("strang propagator");
        let mut mid = half.apply(state);
        let kick = nonlinear_field(&mid, &self.params, self.dealias);
        mid.axpy(self.dt, &kick);
        half.apply(&mid)
    }

    fn lawson(&self, state: &FieldState) -> FieldState {
        let h = self.dt;
        let full = self.full.as_ref().expect("lawson propagator");
        let half = self.half.as_ref().expect("lawson propagator");
        let nl = |s: &FieldState| nonlinear_field(s, &self.params, self.dealias);

        let k1 = nl(state);
        let k2 = nl(&half.apply(&state.added(0.5 * h, &k1)));
        let half_state = half.apply(state);
        let k3 = nl(&half_state.added(0.5 * h, &k2));
        let full_state = full.apply(state);
        let half_k3 = half.apply(&k3);
        let k4 = nl(&full_state.added(h, &half_k3));

        let mut out = full_state;
        out.axpy(h / 6.0, &full.apply(&k1));
        out.axpy(h / 3.0, &half.apply(&k2));
        out.axpy(h / 3.0, &half_k3);
        out.axpy(h / 6.0, &k4);
        out
    }
}

/// Single step convenience wrapper (dealiasing on).
pub fn step(state: &FieldState, params: &SystemParams, dt: f64, scheme: Scheme) -> FieldState {
    Stepper::new(state.grid(), params, dt, scheme, true).advance(state)
}

/// Observer verdict after inspecting an intermediate state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observe {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub dealias: bool,
    /// Observer invocation period in steps; the initial and final states are
    /// always reported.
    pub observer_stride: u64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dealias: true,
            observer_stride: 1,
        }
    }
}

/// Integrate from `state.t` to `t_target` in uniform steps of `dt` (plus one
/// shorter closing step when `dt` does not divide the interval exactly).
///
/// The observer sees `(step_index, t, state)` every `observer_stride` steps
/// and may stop the run, which surfaces as [`Error::Aborted`]. Non-finite
/// values abort with [`Error::BlowUp`]. Backward integration uses `dt < 0`.
pub fn evolve(
    state: &FieldState,
    params: &SystemParams,
    t_target: f64,
    dt: f64,
    scheme: Scheme,
    opts: &EvolveOptions,
    mut observer: impl FnMut(u64, f64, &FieldState) -> Observe,
) -> Result<FieldState> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(Error::InvalidArgument(format!("dt must be nonzero, got {dt}")));
    }
    let t0 = state.t;
    let delta = t_target - t0;
    if delta == 0.0 {
        return Ok(state.clone());
    }
    if delta.signum() != dt.signum() {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} points away from the target (t = {t0} -> {t_target})"
        )));
    }

    let stride = opts.observer_stride.max(1);
    if observer(0, t0, state) == Observe::Stop {
        return Err(Error::Aborted { t: t0 });
    }

    // Uniform steps, with times recomputed from the index so that long runs
    // do not accumulate additive round-off in t.
    let ratio = delta / dt;
    let n_full = (ratio + 1e-9).floor() as u64;
    let rem = delta - n_full as f64 * dt;

    let stepper = Stepper::new(state.grid(), params, dt, scheme, opts.dealias);
    let mut current = state.clone();
    let mut last_observed = 0u64;
    for i in 0..n_full {
        current = stepper.advance(&current);
        current.t = t0 + (i + 1) as f64 * dt;
        if !current.all_finite() {
            return Err(Error::BlowUp { t: current.t });
        }
        let step_idx = i + 1;
        if step_idx % stride == 0 {
            last_observed = step_idx;
            if observer(step_idx, current.t, &current) == Observe::Stop {
                return Err(Error::Aborted { t: current.t });
            }
        }
    }

    let mut total_steps = n_full;
    if rem.abs() > 1e-12 * t_target.abs().max(1.0) {
        let closing = Stepper::new(state.grid(), params, rem, scheme, opts.dealias);
        current = closing.advance(&current);
        if !current.all_finite() {
            return Err(Error::BlowUp { t: t_target });
        }
        total_steps += 1;
    }
    current.t = t_target;
    if last_observed != total_steps
        && observer(total_steps, t_target, &current) == Observe::Stop
    {
        return Err(Error::Aborted { t: t_target });
    }
    Ok(current)
}
