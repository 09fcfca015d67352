//! Closed-form solitary waves of the Klein-Gordon-Zakharov system and their
//! assembly into grid states.
//!
//! A soliton is parametrized by an internal frequency `omega` and a speed `c`
//! (plus translates `x0`, `gamma0`). The envelope is
//! `phi(r) = a * sech(k r)` with
//! `k = sqrt(1 - c^2 - omega^2) / (1 - c^2)` and
//! `a = sqrt(2 (1 - c^2 - omega^2) / (alpha - beta (1 - c^2)))`;
//! the carrier wavenumber is `theta = omega c / (1 - c^2)`. The momentum
//! component is `rho = -u_t`, the wave components are algebraic in `phi^2`.
//! All profile evaluations use the shortest periodic displacement, so states
//! remain consistent with the periodic grid as solitons drift.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::state::FieldState;

/// Coupling constants of the system: `alpha` ties the wave field to `|u|^2`,
/// `beta` scales the cubic self-interaction of `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            alpha: 1.0,
            beta: 0.0,
        }
    }
}

impl SystemParams {
    /// Effective cubic coefficient `alpha - beta (1 - c^2)` seen by a wave of
    /// speed `c`; must be positive for the soliton family to exist.
    pub fn cubic_coefficient(&self, c: f64) -> f64 {
        self.alpha - self.beta * (1.0 - c * c)
    }
}

/// Parameters of one solitary wave.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonSpec {
    pub omega: f64,
    pub c: f64,
    /// Center position at `t = 0`.
    pub x0: f64,
    /// Carrier phase at the center at `t = 0`.
    pub gamma0: f64,
}

impl SolitonSpec {
    pub fn new(omega: f64, c: f64, x0: f64, gamma0: f64) -> SolitonSpec {
        SolitonSpec {
            omega,
            c,
            x0,
            gamma0,
        }
    }

    /// Carrier wavenumber `theta = omega c / (1 - c^2)`.
    pub fn theta(&self) -> f64 {
        self.omega * self.c / (1.0 - self.c * self.c)
    }

    /// Temporal frequency of the plane-wave factor, `omega / (1 - c^2)`.
    pub fn s(&self) -> f64 {
        self.omega / (1.0 - self.c * self.c)
    }

    /// Squared envelope decay rate `(1 - c^2 - omega^2) / (1 - c^2)^2`.
    pub fn k_sq(&self) -> f64 {
        let one_m_c2 = 1.0 - self.c * self.c;
        (one_m_c2 - self.omega * self.omega) / (one_m_c2 * one_m_c2)
    }

    /// Envelope decay rate; the profile falls off like `exp(-k |x|)`.
    pub fn k(&self) -> f64 {
        self.k_sq().sqrt()
    }

    /// Peak amplitude of the envelope.
    pub fn amplitude(&self, params: &SystemParams) -> f64 {
        let one_m_c2 = 1.0 - self.c * self.c;
        (2.0 * (one_m_c2 - self.omega * self.omega) / params.cubic_coefficient(self.c)).sqrt()
    }

    /// Check the existence conditions, reporting the violated inequality.
    pub fn admissible(&self, params: &SystemParams) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("c", self.c),
            ("x0", self.x0),
            ("gamma0", self.gamma0),
        ] {
            if !v.is_finite() {
                return Err(Error::Inadmissible(format!("{name} = {v} is not finite")));
            }
        }
        let one_m_c2 = 1.0 - self.c * self.c;
        if one_m_c2 <= 0.0 {
            return Err(Error::Inadmissible(format!(
                "require |c| < 1: 1 - c^2 = {one_m_c2:.6} <= 0 at c = {}",
                self.c
            )));
        }
        let gap = one_m_c2 - self.omega * self.omega;
        if gap <= 0.0 {
            return Err(Error::Inadmissible(format!(
                "require 1 - c^2 - omega^2 > 0: got {gap:.6} at (omega, c) = ({}, {})",
                self.omega, self.c
            )));
        }
        let m = params.cubic_coefficient(self.c);
        if m <= 0.0 {
            return Err(Error::Inadmissible(format!(
                "require alpha - beta (1 - c^2) > 0: got {m:.6} with (alpha, beta) = ({}, {})",
                params.alpha, params.beta
            )));
        }
        Ok(())
    }
}

/// Envelope `phi` and its derivative at an arbitrary center, as raw samples.
pub(crate) fn raw_envelope(
    params: &SystemParams,
    omega: f64,
    c: f64,
    center: f64,
    grid: &Grid,
) -> (Vec<f64>, Vec<f64>) {
    let spec = SolitonSpec::new(omega, c, 0.0, 0.0);
    let k = spec.k();
    let a = spec.amplitude(params);
    let mut phi = Vec::with_capacity(grid.n());
    let mut phi_x = Vec::with_capacity(grid.n());
    for &x in grid.x() {
        let r = grid.wrap(x - center);
        let sech = 1.0 / (k * r).cosh();
        phi.push(a * sech);
        phi_x.push(-a * k * sech * (k * r).tanh());
    }
    (phi, phi_x)
}

/// Plane-wave carrier `exp(i (theta * r + phase))` with `r` the wrapped
/// displacement from `center`.
pub(crate) fn raw_carrier(
    omega: f64,
    c: f64,
    center: f64,
    phase: f64,
    grid: &Grid,
) -> Vec<Complex64> {
    let theta = SolitonSpec::new(omega, c, 0.0, 0.0).theta();
    grid.x()
        .iter()
        .map(|&x| {
            let r = grid.wrap(x - center);
            Complex64::from_polar(1.0, theta * r + phase)
        })
        .collect()
}

/// Unnormalized internal-mode profile `sech^2(k r)`.
pub(crate) fn raw_sech_sq(omega: f64, c: f64, center: f64, grid: &Grid) -> Vec<f64> {
    let k = SolitonSpec::new(omega, c, 0.0, 0.0).k();
    grid.x()
        .iter()
        .map(|&x| {
            let s = 1.0 / (k * grid.wrap(x - center)).cosh();
            s * s
        })
        .collect()
}

/// Assemble the four-component soliton with the given envelope frequency,
/// speed, center and carrier phase at the center. The result carries `t = 0`;
/// callers pin the time.
pub fn soliton_snapshot(
    params: &SystemParams,
    omega: f64,
    c: f64,
    center: f64,
    phase: f64,
    grid: &Grid,
) -> Result<FieldState> {
    let spec = SolitonSpec::new(omega, c, center, phase);
    spec.admissible(params)?;
    let s = spec.s();
    let one_m_c2 = 1.0 - c * c;
    let (phi, phi_x) = raw_envelope(params, omega, c, center, grid);
    let carrier = raw_carrier(omega, c, center, phase, grid);

    let mut state = FieldState::zero(grid, 0.0);
    for j in 0..grid.n() {
        state.u[j] = carrier[j] * phi[j];
        // rho = -u_t along the exact trajectory: (i s + c d/dx) acting on the
        // envelope in the co-moving frame.
        state.rho[j] = carrier[j] * Complex64::new(c * phi_x[j], s * phi[j]);
        let sq = phi[j] * phi[j] / one_m_c2;
        state.v[j] = -sq;
        state.n[j] = c * sq;
    }
    Ok(state)
}

/// Envelope profile centered at `x0` (the `t = 0` soliton, without carrier).
pub fn phi_profile(spec: &SolitonSpec, params: &SystemParams, grid: &Grid) -> Result<RealField> {
    spec.admissible(params)?;
    let (phi, _) = raw_envelope(params, spec.omega, spec.c, spec.x0, grid);
    RealField::from_values(grid, phi)
}

/// The algebraic wave-component profiles `(psi, varphi)` at `t = 0`:
/// `psi = -phi^2 / (1 - c^2)` and `varphi = -c * psi`.
pub fn secondary_profiles(
    spec: &SolitonSpec,
    params: &SystemParams,
    grid: &Grid,
) -> Result<(RealField, RealField)> {
    let phi = phi_profile(spec, params, grid)?;
    let one_m_c2 = 1.0 - spec.c * spec.c;
    let psi: Vec<f64> = phi.values.iter().map(|p| -p * p / one_m_c2).collect();
    let varphi: Vec<f64> = psi.iter().map(|q| -spec.c * q).collect();
    Ok((
        RealField::from_values(grid, psi)?,
        RealField::from_values(grid, varphi)?,
    ))
}

/// Exact soliton state at time `t`: center `x0 + c t`, center phase
/// `gamma0 - omega t`.
pub fn soliton_state(
    spec: &SolitonSpec,
    params: &SystemParams,
    grid: &Grid,
    t: f64,
) -> Result<FieldState> {
    let mut state = soliton_snapshot(
        params,
        spec.omega,
        spec.c,
        spec.x0 + spec.c * t,
        spec.gamma0 - spec.omega * t,
        grid,
    )?;
    state.t = t;
    Ok(state)
}

/// Carrier factor `exp(i lambda)` of the time-`t` soliton, exposed for the
/// gauge-unwinding used by the linearized analysis.
pub fn soliton_carrier(spec: &SolitonSpec, grid: &Grid, t: f64) -> Vec<Complex64> {
    raw_carrier(
        spec.omega,
        spec.c,
        spec.x0 + spec.c * t,
        spec.gamma0 - spec.omega * t,
        grid,
    )
}

/// Plain component-wise sum of exact solitons at time `t`.
pub fn multisoliton_state(
    specs: &[SolitonSpec],
    params: &SystemParams,
    grid: &Grid,
    t: f64,
) -> Result<FieldState> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument(
            "multisoliton_state needs at least one soliton".into(),
        ));
    }
    let mut sum = FieldState::zero(grid, t);
    for spec in specs {
        let s = soliton_state(spec, params, grid, t)?;
        sum.axpy(1.0, &s);
    }
    Ok(sum)
}

/// Max-norm residual of the profile equations under spectral differentiation:
/// the scalar envelope ODE
/// `(1-c^2)^2 phi'' = (1-c^2-omega^2) phi - (alpha - beta(1-c^2)) phi^3`
/// plus the algebraic relations defining `psi` and `varphi`.
pub fn stationary_residual(spec: &SolitonSpec, params: &SystemParams, grid: &Grid) -> Result<f64> {
    spec.admissible(params)?;
    let phi = phi_profile(spec, params, grid)?;
    let (psi, varphi) = secondary_profiles(spec, params, grid)?;
    let phi_xx = phi.derivative(2);
    let one_m_c2 = 1.0 - spec.c * spec.c;
    let gap = one_m_c2 - spec.omega * spec.omega;
    let m = params.cubic_coefficient(spec.c);

    let mut worst = 0.0f64;
    for j in 0..grid.n() {
        let p = phi.values[j];
        let ode = one_m_c2 * one_m_c2 * phi_xx.values[j] - gap * p + m * p * p * p;
        let alg_psi = one_m_c2 * psi.values[j] + p * p;
        let alg_varphi = varphi.values[j] + spec.c * psi.values[j];
        worst = worst.max(ode.abs()).max(alg_psi.abs()).max(alg_varphi.abs());
    }
    Ok(worst)
}
