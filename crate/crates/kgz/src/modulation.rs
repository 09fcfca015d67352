//! Modulation-parameter fitting
//!
//! A state near a multi-soliton sum is decomposed as `u = sum_j R_j + eps_1`
//! by choosing, for each soliton, a frequency `omega_j`, a center `x_j` and a
//! carrier phase `Gamma_j` (the speeds stay fixed) such that the remainder is
//! orthogonal to the directions along which the family moves:
//!
//! ```text
//! <eps_1, Psi_j> = 0          Psi_j = e^{i lambda_j} sech^2(k_j (x - x_j))
//! <eps_1, d_x R_j> = 0
//! <eps_1, i R_j> = 0
//! ```
//!
//! in the real pairing, with `lambda_j = theta_j (x - x_j) + Gamma_j`. The
//! `3N` conditions are solved by a damped-free Newton iteration with a
//! finite-difference Jacobian; an exact family member is recognized
//! immediately (zero iterations). On an exact soliton trajectory the fitted
//! parameters obey `d/dt x_j = c_j`, `d/dt Gamma_j = -omega_j`,
//! `d/dt omega_j = 0`, so [`ModulationTracker::rate_series`] reports the
//! deviations from those rates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::soliton::{raw_carrier, raw_envelope, raw_sech_sq, SolitonSpec, SystemParams};
use crate::state::FieldState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationParams {
    pub omega: f64,
    pub x: f64,
    pub gamma: f64,
}

impl ModulationParams {
    pub fn new(omega: f64, x: f64, gamma: f64) -> ModulationParams {
        ModulationParams { omega, x, gamma }
    }

    /// Parameters of a soliton trajectory at time `t`.
    pub fn from_spec(spec: &SolitonSpec, t: f64) -> ModulationParams {
        ModulationParams {
            omega: spec.omega,
            x: spec.x0 + spec.c * t,
            gamma: spec.gamma0 - spec.omega * t,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Euclidean residual norm at which the fit is accepted.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-12,
            max_iter: 30,
            fd_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModulationFit {
    pub params: Vec<ModulationParams>,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Condition number of the last finite-difference Jacobian.
    pub jacobian_cond: f64,
}

/// First component of the modulated soliton kernel at fixed speed `c`.
pub fn family_component(
    params: &SystemParams,
    c: f64,
    m: &ModulationParams,
    grid: &Grid,
) -> Result<Vec<Complex64>> {
    let spec = SolitonSpec::new(m.omega, c, m.x, m.gamma);
    spec.admissible(params)?;
    let carrier = raw_carrier(m.omega, c, m.x, m.gamma, grid);
    let (phi, _) = raw_envelope(params, m.omega, c, m.x, grid);
    Ok(carrier
        .iter()
        .zip(&phi)
        .map(|(&cr, &p)| cr * p)
        .collect())
}

/// The three direction fields of one soliton: `(Psi, d_x R, i R)`.
fn direction_fields(
    params: &SystemParams,
    c: f64,
    m: &ModulationParams,
    grid: &Grid,
) -> Result<[Vec<Complex64>; 3]> {
    let spec = SolitonSpec::new(m.omega, c, m.x, m.gamma);
    spec.admissible(params)?;
    let theta = spec.theta();
    let carrier = raw_carrier(m.omega, c, m.x, m.gamma, grid);
    let (phi, phi_x) = raw_envelope(params, m.omega, c, m.x, grid);
    let bump = raw_sech_sq(m.omega, c, m.x, grid);
    let i = Complex64::new(0.0, 1.0);
    let n = grid.n();
    let mut psi = Vec::with_capacity(n);
    let mut translation = Vec::with_capacity(n);
    let mut gauge = Vec::with_capacity(n);
    for j in 0..n {
        let value = carrier[j] * phi[j];
        psi.push(carrier[j] * bump[j]);
        translation.push(carrier[j] * (i * theta * phi[j] + phi_x[j]));
        gauge.push(i * value);
    }
    Ok([psi, translation, gauge])
}

/// Orthogonality residuals `[<eps, Psi_j>, <eps, d_x R_j>, <eps, i R_j>]_j`
/// of the first component against the family at the given parameters.
pub fn orthogonality_residuals(
    state: &FieldState,
    cs: &[f64],
    fitted: &[ModulationParams],
    params: &SystemParams,
) -> Result<Vec<f64>> {
    if cs.len() != fitted.len() || cs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "got {} speeds for {} parameter triples",
            cs.len(),
            fitted.len()
        )));
    }
    let grid = state.grid();
    let mut eps = state.u.clone();
    for (c, m) in cs.iter().zip(fitted) {
        let kernel = family_component(params, *c, m, grid)?;
        for (e, k) in eps.iter_mut().zip(&kernel) {
            *e -= k;
        }
    }
    let mut out = Vec::with_capacity(3 * cs.len());
    for (c, m) in cs.iter().zip(fitted) {
        let dirs = direction_fields(params, *c, m, grid)?;
        for dir in &dirs {
            out.push(grid.inner_complex(&eps, dir));
        }
    }
    Ok(out)
}

fn flatten(fitted: &[ModulationParams]) -> Vec<f64> {
    fitted
        .iter()
        .flat_map(|m| [m.omega, m.x, m.gamma])
        .collect()
}

fn unflatten(p: &[f64]) -> Vec<ModulationParams> {
    p.chunks_exact(3)
        .map(|c| ModulationParams::new(c[0], c[1], c[2]))
        .collect()
}

/// Newton solve of the orthogonality system starting from `guess`.
pub fn fit_modulation(
    state: &FieldState,
    cs: &[f64],
    guess: &[ModulationParams],
    params: &SystemParams,
    opts: &FitOptions,
) -> Result<ModulationFit> {
    if cs.len() != guess.len() || cs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "got {} speeds for {} initial parameter triples",
            cs.len(),
            guess.len()
        )));
    }
    let dim = 3 * cs.len();
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        orthogonality_residuals(state, cs, &unflatten(p), params)
    };
    let norm = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut p = flatten(guess);
    let mut f = residual(&p)?;
    let mut res_norm = norm(&f);
    let mut cond = f64::NAN;

    for iteration in 0..=opts.max_iter {
        // finite-difference Jacobian, also evaluated at the accepted point so
        // the reported condition number always refers to the returned fit
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for col in 0..dim {
            let h = opts.fd_step * (1.0 + p[col].abs());
            let mut plus = p.clone();
            plus[col] += h;
            let mut minus = p.clone();
            minus[col] -= h;
            let fp = residual(&plus)?;
            let fm = residual(&minus)?;
            for row in 0..dim {
                jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let singular = jac.clone().svd(false, false).singular_values;
        let (s_max, s_min) = (singular.max(), singular.min());
        cond = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };

        if res_norm <= opts.tol {
            return Ok(ModulationFit {
                params: unflatten(&p),
                iterations: iteration,
                residual_norm: res_norm,
                jacobian_cond: cond,
            });
        }
        if iteration == opts.max_iter {
            break;
        }
        let delta = jac
            .lu()
            .solve(&DVector::from_column_slice(&f))
            .ok_or(Error::NoConvergence {
                max_iter: iteration,
                residual: res_norm,
                cond,
            })?;
        for (pi, di) in p.iter_mut().zip(delta.iter()) {
            *pi -= di;
        }
        f = residual(&p)?;
        res_norm = norm(&f);
    }
    Err(Error::NoConvergence {
        max_iter: opts.max_iter,
        residual: res_norm,
        cond,
    })
}

#[derive(Clone, Debug)]
pub struct ModulationSample {
    pub t: f64,
    pub params: Vec<ModulationParams>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Deviation of the fitted-parameter motion from the exact soliton rates
/// over one sampling interval (midpoint time `t`): `omega_rate = d omega/dt`,
/// `x_defect = d x/dt - c`, `gamma_defect = d Gamma/dt + omega`.
#[derive(Clone, Debug)]
pub struct ModulationRates {
    pub t: f64,
    pub omega_rate: Vec<f64>,
    pub x_defect: Vec<f64>,
    pub gamma_defect: Vec<f64>,
}

/// Repeatedly fits a sequence of states, warm-starting each fit from the
/// previous parameters advanced along the exact rates.
pub struct ModulationTracker {
    cs: Vec<f64>,
    params: SystemParams,
    opts: FitOptions,
    current: Vec<ModulationParams>,
    current_t: f64,
    history: Vec<ModulationSample>,
}

impl ModulationTracker {
    pub fn new(
        cs: &[f64],
        initial: &[ModulationParams],
        params: &SystemParams,
        opts: FitOptions,
    ) -> Result<ModulationTracker> {
        if cs.len() != initial.len() || cs.is_empty() {
            return Err(Error::InvalidArgument(
                "tracker needs one parameter triple per speed".into(),
            ));
        }
        Ok(ModulationTracker {
            cs: cs.to_vec(),
            params: *params,
            opts,
            current: initial.to_vec(),
            current_t: f64::NAN,
            history: Vec::new(),
        })
    }

    pub fn observe(&mut self, state: &FieldState) -> Result<&ModulationSample> {
        let t = state.t;
        let mut guess = self.current.clone();
        if self.current_t.is_finite() {
            let dt = t - self.current_t;
            for (m, c) in guess.iter_mut().zip(&self.cs) {
                m.x += c * dt;
                m.gamma -= m.omega * dt;
            }
        }
        let fit = fit_modulation(state, &self.cs, &guess, &self.params, &self.opts)?;
        self.current = fit.params.clone();
        self.current_t = t;
        self.history.push(ModulationSample {
            t,
            params: fit.params,
            residual_norm: fit.residual_norm,
            iterations: fit.iterations,
        });
        Ok(self.history.last().expect("just pushed"))
    }

    pub fn history(&self) -> &[ModulationSample] {
        &self.history
    }

    pub fn rate_series(&self) -> Vec<ModulationRates> {
        let mut out = Vec::new();
        for pair in self.history.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let dt = b.t - a.t;
            if dt == 0.0 {
                continue;
            }
            let mut rates = ModulationRates {
                t: 0.5 * (a.t + b.t),
                omega_rate: Vec::with_capacity(self.cs.len()),
                x_defect: Vec::with_capacity(self.cs.len()),
                gamma_defect: Vec::with_capacity(self.cs.len()),
            };
            for j in 0..self.cs.len() {
                let (pa, pb) = (&a.params[j], &b.params[j]);
                rates.omega_rate.push((pb.omega - pa.omega) / dt);
                rates.x_defect.push((pb.x - pa.x) / dt - self.cs[j]);
                rates
                    .gamma_defect
                    .push((pb.gamma - pa.gamma) / dt + 0.5 * (pa.omega + pb.omega));
            }
            out.push(rates);
        }
        out
    }
}
