//! Conserved functionals, their gradients, and localized diagnostics
//!
//! The flow preserves the energy
//!
//! ```text
//! E = Int |u_x|^2 + |u|^2 + |rho|^2 + alpha v |u|^2 + (beta/2)|u|^4
//!       + (alpha/2)(v^2 + n^2) dx,
//! ```
//!
//! the momentum `Q1 = 2 Re Int u_x conj(rho) dx - alpha Int n v dx`, and the
//! charge `Q2 = 2 Im Int conj(u) rho dx`. Gradients are taken with respect to
//! the real inner product `<f, g> = Re Int f conj(g) dx` summed over the four
//! components, and the dynamics factor as `z_t = J grad E(z)` with the
//! constant-coefficient skew operator [`apply_j`]. Gradient products reuse the
//! dealiased helpers from the integrator so the factorization holds on the
//! grid to round-off, not just in the continuum.
//!
//! For multi-soliton states the translating cutoff family of `smoothstep`
//! profiles splits `Q1` and `Q2` into per-soliton pieces, which combine with
//! the energy into the time-dependent action used to monitor stability.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{cubic_coupling, intensity};
use crate::grid::{Grid, RealField};
use crate::soliton::{raw_envelope, SolitonSpec, SystemParams};
use crate::state::FieldState;

/// Total energy (pointwise products; for smooth resolved states the aliasing
/// correction is far below round-off).
pub fn energy(state: &FieldState, params: &SystemParams) -> f64 {
    let grid = state.grid();
    let mut sum = 0.0;
    for j in 0..grid.n() {
        let u2 = state.u[j].norm_sqr();
        sum += u2
            + state.rho[j].norm_sqr()
            + params.alpha * state.v[j] * u2
            + 0.5 * params.beta * u2 * u2
            + 0.5 * params.alpha * (state.v[j] * state.v[j] + state.n[j] * state.n[j]);
    }
    sum * grid.dx() + grid.h1_seminorm_sq(&state.u)
}

/// Momentum `Q1 = 2 Re Int u_x conj(rho) - alpha Int n v`.
pub fn charge_q1(state: &FieldState, params: &SystemParams) -> f64 {
    let grid = state.grid();
    let ux = grid.derivative(&state.u, 1);
    let mut sum = 0.0;
    for j in 0..grid.n() {
        sum += 2.0 * (ux[j] * state.rho[j].conj()).re - params.alpha * state.n[j] * state.v[j];
    }
    sum * grid.dx()
}

/// Charge `Q2 = 2 Im Int conj(u) rho`.
pub fn charge_q2(state: &FieldState) -> f64 {
    let grid = state.grid();
    let mut sum = 0.0;
    for j in 0..grid.n() {
        sum += 2.0 * (state.u[j].conj() * state.rho[j]).im;
    }
    sum * grid.dx()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedQuantities {
    pub energy: f64,
    pub q1: f64,
    pub q2: f64,
}

pub fn conserved_snapshot(state: &FieldState, params: &SystemParams) -> ConservedQuantities {
    ConservedQuantities {
        energy: energy(state, params),
        q1: charge_q1(state, params),
        q2: charge_q2(state),
    }
}

/// Gradient of the energy; `apply_j(gradient_energy(z)) == rhs(z)` on the
/// grid because both sides share the same filtered products.
pub fn gradient_energy(state: &FieldState, params: &SystemParams) -> FieldState {
    gradient_energy_opts(state, params, true)
}

pub fn gradient_energy_opts(
    state: &FieldState,
    params: &SystemParams,
    dealias: bool,
) -> FieldState {
    let grid = state.grid().clone();
    let coupling = cubic_coupling(state, params, dealias);
    let u2 = intensity(state, dealias);
    let u_xx = grid.derivative(&state.u, 2);
    let mut out = FieldState::zero(&grid, state.t);
    for j in 0..grid.n() {
        out.u[j] = -2.0 * u_xx[j] + 2.0 * state.u[j] + 2.0 * coupling[j];
        out.rho[j] = 2.0 * state.rho[j];
        out.v[j] = params.alpha * (u2[j] + state.v[j]);
        out.n[j] = params.alpha * state.n[j];
    }
    out
}

/// Gradient of the momentum: `(-2 rho_x, 2 u_x, -alpha n, -alpha v)`.
pub fn gradient_q1(state: &FieldState, params: &SystemParams) -> FieldState {
    let grid = state.grid().clone();
    let rho_x = grid.derivative(&state.rho, 1);
    let ux = grid.derivative(&state.u, 1);
    let mut out = FieldState::zero(&grid, state.t);
    for j in 0..grid.n() {
        out.u[j] = -2.0 * rho_x[j];
        out.rho[j] = 2.0 * ux[j];
        out.v[j] = -params.alpha * state.n[j];
        out.n[j] = -params.alpha * state.v[j];
    }
    out
}

/// Gradient of the charge: `(-2i rho, 2i u, 0, 0)`.
pub fn gradient_q2(state: &FieldState) -> FieldState {
    let grid = state.grid().clone();
    let mut out = FieldState::zero(&grid, state.t);
    let i = Complex64::new(0.0, 1.0);
    for j in 0..grid.n() {
        out.u[j] = -2.0 * i * state.rho[j];
        out.rho[j] = 2.0 * i * state.u[j];
    }
    out
}

/// Constant skew-adjoint operator pairing gradients with the flow:
///
/// ```text
/// J = [ 0    -1/2   0              0            ]
///     [ 1/2   0     0              0            ]
///     [ 0     0     0              (1/alpha) d_x ]
///     [ 0     0     (1/alpha) d_x  0            ]
/// ```
pub fn apply_j(gradient: &FieldState, params: &SystemParams) -> FieldState {
    let grid = gradient.grid().clone();
    let dn = grid.derivative_real(&gradient.n, 1);
    let dv = grid.derivative_real(&gradient.v, 1);
    let mut out = FieldState::zero(&grid, gradient.t);
    let inv_alpha = 1.0 / params.alpha;
    for j in 0..grid.n() {
        out.u[j] = -0.5 * gradient.rho[j];
        out.rho[j] = 0.5 * gradient.u[j];
        out.v[j] = inv_alpha * dn[j];
        out.n[j] = inv_alpha * dv[j];
    }
    out
}

/// Perturbation norm `sqrt(||u||_{H^1}^2 + ||rho||^2 + ||v||^2 + ||n||^2)`.
pub fn x_norm(state: &FieldState) -> f64 {
    let grid = state.grid();
    let mut sum = 0.0;
    for j in 0..grid.n() {
        sum += state.u[j].norm_sqr()
            + state.rho[j].norm_sqr()
            + state.v[j] * state.v[j]
            + state.n[j] * state.n[j];
    }
    (sum * grid.dx() + grid.h1_seminorm_sq(&state.u)).sqrt()
}

/// `exp(-1/tau)` mollifier piece, extended by zero.
fn bump(tau: f64) -> f64 {
    if tau > 0.0 {
        (-1.0 / tau).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `sigma <= -1`, 1 for `sigma >= 1`.
fn smoothstep(sigma: f64) -> f64 {
    let rise = bump(1.0 + sigma);
    let fall = bump(1.0 - sigma);
    if rise == 0.0 {
        0.0
    } else {
        rise / (rise + fall)
    }
}

/// Translating partition of unity separating solitons ordered by speed.
///
/// `psi_1 = 1` identically, and for `j >= 2` the step `psi_j` rises across
/// `x = m_j t` over a width `sqrt(t)`, where `m_j` is the midpoint of the
/// `(j-1)`-th and `j`-th speeds. The window of soliton `j` is
/// `phi_j = psi_j - psi_{j+1}` (with `phi_N = psi_N`), and the windows sum to
/// one pointwise.
#[derive(Clone, Debug)]
pub struct CutoffFamily {
    speeds: Vec<f64>,
}

impl CutoffFamily {
    pub fn new(speeds: &[f64]) -> Result<CutoffFamily> {
        if speeds.is_empty() {
            return Err(Error::InvalidArgument(
                "cutoff family needs at least one speed".into(),
            ));
        }
        if speeds.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("speeds must be finite".into()));
        }
        for w in speeds.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(format!(
                    "speeds must be strictly ascending, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(CutoffFamily {
            speeds: speeds.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    /// Seam speed between solitons `j-1` and `j` (1-based, `2 <= j <= N`).
    fn midpoint(&self, j: usize) -> f64 {
        0.5 * (self.speeds[j - 2] + self.speeds[j - 1])
    }

    /// Step profile `psi_j(x, t)`; requires `t > 0` unless `j == 1`.
    fn psi(&self, j: usize, x: f64, t: f64) -> f64 {
        if j == 1 {
            1.0
        } else {
            smoothstep((x - self.midpoint(j) * t) / t.sqrt())
        }
    }
}

/// Sampled windows `phi_1 .. phi_N` on the grid at time `t`.
pub fn cutoffs(family: &CutoffFamily, grid: &Grid, t: f64) -> Result<Vec<RealField>> {
    let n_sol = family.len();
    if n_sol > 1 && t <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cutoff windows are defined for t > 0, got t = {t}"
        )));
    }
    let mut psis: Vec<Vec<f64>> = Vec::with_capacity(n_sol);
    for j in 1..=n_sol {
        psis.push(grid.x().iter().map(|&x| family.psi(j, x, t)).collect());
    }
    let mut out = Vec::with_capacity(n_sol);
    for j in 0..n_sol {
        let values: Vec<f64> = if j + 1 < n_sol {
            psis[j]
                .iter()
                .zip(&psis[j + 1])
                .map(|(a, b)| a - b)
                .collect()
        } else {
            psis[j].clone()
        };
        out.push(RealField::from_values(grid, values)?);
    }
    Ok(out)
}

/// Per-soliton momenta `2 Re Int u_x conj(rho) phi_j - alpha Int n v phi_j`.
pub fn localized_momentum(
    state: &FieldState,
    params: &SystemParams,
    family: &CutoffFamily,
    t: f64,
) -> Result<Vec<f64>> {
    let grid = state.grid();
    let windows = cutoffs(family, grid, t)?;
    let ux = grid.derivative(&state.u, 1);
    let mut out = Vec::with_capacity(family.len());
    for w in &windows {
        let mut sum = 0.0;
        for j in 0..grid.n() {
            sum += w.values[j]
                * (2.0 * (ux[j] * state.rho[j].conj()).re
                    - params.alpha * state.n[j] * state.v[j]);
        }
        out.push(sum * grid.dx());
    }
    Ok(out)
}

/// Per-soliton charges `2 Im Int conj(u) rho phi_j`.
pub fn localized_charge(state: &FieldState, family: &CutoffFamily, t: f64) -> Result<Vec<f64>> {
    let grid = state.grid();
    let windows = cutoffs(family, grid, t)?;
    let mut out = Vec::with_capacity(family.len());
    for w in &windows {
        let mut sum = 0.0;
        for j in 0..grid.n() {
            sum += w.values[j] * 2.0 * (state.u[j].conj() * state.rho[j]).im;
        }
        out.push(sum * grid.dx());
    }
    Ok(out)
}

/// Lyapunov action `S = E - sum_j (omega_j Q2_j + c_j Q1_j)` built from the
/// localized charges; each soliton profile is a critical point of its own
/// term, which is what makes `S` a stability functional.
pub fn action_s(
    state: &FieldState,
    params: &SystemParams,
    family: &CutoffFamily,
    omegas: &[f64],
    t: f64,
) -> Result<f64> {
    if omegas.len() != family.len() {
        return Err(Error::InvalidArgument(format!(
            "got {} frequencies for {} solitons",
            omegas.len(),
            family.len()
        )));
    }
    let q1 = localized_momentum(state, params, family, t)?;
    let q2 = localized_charge(state, family, t)?;
    let mut s = energy(state, params);
    for j in 0..family.len() {
        s -= omegas[j] * q2[j] + family.speeds()[j] * q1[j];
    }
    Ok(s)
}

/// Overlap between the soliton envelopes and the foreign cutoff windows,
///
/// ```text
/// I(t) = sum_j sum_{k != j} Int g_k phi_j dx  +  sum_{j < k} Int g_j g_k dx,
/// g_k = |R_k| + |d_x R_k| = phi_k + sqrt(theta_k^2 phi_k^2 + phi_k'^2),
/// ```
///
/// evaluated in closed form from the envelopes (no transforms). It decays
/// exponentially as the solitons separate and is the quantity whose decay
/// rate the stability estimates are calibrated against.
pub fn interaction_integral(
    specs: &[SolitonSpec],
    params: &SystemParams,
    grid: &Grid,
    t: f64,
) -> Result<f64> {
    if specs.len() < 2 {
        return Err(Error::InvalidArgument(
            "interaction integral needs at least two solitons".into(),
        ));
    }
    for spec in specs {
        spec.admissible(params)?;
    }
    let speeds: Vec<f64> = specs.iter().map(|s| s.c).collect();
    let family = CutoffFamily::new(&speeds)?;
    let windows = cutoffs(&family, grid, t)?;

    let profiles: Vec<Vec<f64>> = specs
        .iter()
        .map(|spec| {
            let center = spec.x0 + spec.c * t;
            let (phi, phi_x) = raw_envelope(params, spec.omega, spec.c, center, grid);
            let theta = spec.theta();
            phi.iter()
                .zip(&phi_x)
                .map(|(&p, &px)| p + (theta * theta * p * p + px * px).sqrt())
                .collect()
        })
        .collect();

    let mut total = 0.0;
    for j in 0..specs.len() {
        for k in 0..specs.len() {
            if k == j {
                continue;
            }
            let mut sum = 0.0;
            for idx in 0..grid.n() {
                sum += profiles[k][idx] * windows[j].values[idx];
            }
            total += sum * grid.dx();
        }
    }
    for j in 0..specs.len() {
        for k in (j + 1)..specs.len() {
            let mut sum = 0.0;
            for idx in 0..grid.n() {
                sum += profiles[j][idx] * profiles[k][idx];
            }
            total += sum * grid.dx();
        }
    }
    Ok(total)
}
