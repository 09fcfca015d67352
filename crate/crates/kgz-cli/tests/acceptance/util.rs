//! Shared helpers for the acceptance gate.

use kgz::{FieldState, Grid};
use num_complex::Complex64;
use rand::Rng;

pub type Check = Result<(), String>;

pub fn ensure(cond: bool, why: String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(why)
    }
}

pub fn es(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Least-squares line `y ~ intercept + slope * t`; returns
/// `(slope, intercept, r_squared)`.
pub fn linear_fit(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = ts.len() as f64;
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    let mut syy = 0.0;
    for (&t, &y) in ts.iter().zip(ys) {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let r_squared = if syy == 0.0 { 1.0 } else { sty * sty / (stt * syy) };
    (slope, intercept, r_squared)
}

/// `|<a, b>| / (||a|| ||b||)` for plain sample vectors.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot.abs() / (na * nb)
}

/// Smooth localized profile: a few Gaussian bumps with gentle oscillation,
/// spectrally concentrated well below the grid cutoff.
pub fn smooth_profile(x: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let amp = rng.random_range(-1.0..1.0);
        let mu = rng.random_range(-6.0..6.0);
        let sigma = rng.random_range(2.0..4.0);
        let freq = rng.random_range(0.0..1.2);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        terms.push((amp, mu, sigma, freq, phase));
    }
    x.iter()
        .map(|&xx| {
            terms
                .iter()
                .map(|&(amp, mu, sigma, freq, phase)| {
                    amp * (-(xx - mu) * (xx - mu) / (2.0 * sigma * sigma)).exp()
                        * (freq * xx + phase).cos()
                })
                .sum()
        })
        .collect()
}

pub fn smooth_state(grid: &Grid, rng: &mut impl Rng) -> FieldState {
    let x = grid.x().to_vec();
    let parts: Vec<Vec<f64>> = (0..6).map(|_| smooth_profile(&x, rng)).collect();
    let mut state = FieldState::zero(grid, 0.0);
    for j in 0..grid.n() {
        state.u[j] = Complex64::new(parts[0][j], parts[1][j]);
        state.rho[j] = Complex64::new(parts[2][j], parts[3][j]);
        state.v[j] = parts[4][j];
        state.n[j] = parts[5][j];
    }
    state
}

/// Rough white-noise state (every mode populated, including Nyquist).
pub fn noise_state(grid: &Grid, rng: &mut impl Rng, scale: f64) -> FieldState {
    let mut state = FieldState::zero(grid, 0.0);
    for j in 0..grid.n() {
        state.u[j] = Complex64::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        );
        state.rho[j] = Complex64::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        );
        state.v[j] = rng.random_range(-scale..scale);
        state.n[j] = rng.random_range(-scale..scale);
    }
    state
}

pub fn states_bitwise_equal(a: &FieldState, b: &FieldState) -> bool {
    if a.grid().n() != b.grid().n()
        || a.grid().length().to_bits() != b.grid().length().to_bits()
        || a.t.to_bits() != b.t.to_bits()
    {
        return false;
    }
    (0..a.grid().n()).all(|j| {
        a.u[j].re.to_bits() == b.u[j].re.to_bits()
            && a.u[j].im.to_bits() == b.u[j].im.to_bits()
            && a.rho[j].re.to_bits() == b.rho[j].re.to_bits()
            && a.rho[j].im.to_bits() == b.rho[j].im.to_bits()
            && a.v[j].to_bits() == b.v[j].to_bits()
            && a.n[j].to_bits() == b.n[j].to_bits()
    })
}
