//! Backward-from-final-data multi-soliton construction
//!
//! For an increasing sequence of launch times `Tn`, the approximate solution
//! `u_n` is defined by imposing `u_n(Tn) = R(Tn)` — the exact sum of soliton
//! profiles — and integrating *backward* to a fixed base time `T0 > 0`. The
//! deviation `x_err(t) = ||u_n(t) - R(t)||_X` then measures how far the pure
//! sum is from being a solution; the stability theory predicts it stays below
//! a multiple of `exp(-sqrt(omega_star) c_star t)` with
//!
//! ```text
//! omega_star = (1/256) min_j (1 - c_j^2 - omega_j^2) / (1 - c_j^2)^2,
//! c_star     = min_{j != k} |c_j - c_k|.
//! ```
//!
//! The runs for different `Tn` are compared at the common base time through
//! the pairwise Cauchy table `||u_n(T0) - u_m(T0)||_X`, whose decrease in
//! `min(n, m)` is the finite-resolution shadow of the limit construction.
//! Every run logs conserved quantities and is flagged invalid if their
//! relative drift exceeds a strict budget; a short single-soliton backward
//! self-check guards against an unstable time step before any long run
//! starts.
//!
//! Long horizons need dynamically *stable* waves. A soliton whose frequency
//! violates `omega^2 > (1 - c^2)/2` carries a real instability eigenvalue of
//! order one (e.g. measured growth `e^{0.84 t}` at `omega = 0`, `c = 0.3`),
//! and because such eigenvalues come in `+/-` pairs, backward integration
//! amplifies floating-point noise at the same rate: after roughly 35 time
//! units the noise reaches order one and the run blows up regardless of grid
//! or step size. Blow-ups are recorded per run without aborting the others.

use crate::error::{Error, Result};
use crate::evolve::{evolve, EvolveOptions, Observe, Scheme};
use crate::grid::Grid;
use crate::observables::{conserved_snapshot, x_norm, ConservedQuantities};
use crate::soliton::{multisoliton_state, soliton_state, SolitonSpec, SystemParams};
use crate::state::FieldState;

/// Relative conserved-quantity drift above which a run is flagged invalid.
const DRIFT_LIMIT: f64 = 1e-7;
/// Length and error budget of the single-soliton backward self-check.
const SELF_CHECK_WINDOW: f64 = 5.0;
const SELF_CHECK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct TheoremConstants {
    pub omega_star: f64,
    pub c_star: f64,
}

impl TheoremConstants {
    /// Exponential rate `sqrt(omega_star) * c_star` of the error bound.
    pub fn decay_rate(&self) -> f64 {
        self.omega_star.sqrt() * self.c_star
    }

    pub fn bound(&self, t: f64) -> f64 {
        (-self.decay_rate() * t).exp()
    }
}

pub fn theorem_constants(
    specs: &[SolitonSpec],
    params: &SystemParams,
) -> Result<TheoremConstants> {
    if specs.len() < 2 {
        return Err(Error::InvalidArgument(
            "the speed gap needs at least two solitons".into(),
        ));
    }
    let mut omega_star = f64::INFINITY;
    for spec in specs {
        spec.admissible(params)?;
        omega_star = omega_star.min(spec.k_sq() / 256.0);
    }
    let mut c_star = f64::INFINITY;
    for (i, a) in specs.iter().enumerate() {
        for b in &specs[i + 1..] {
            c_star = c_star.min((a.c - b.c).abs());
        }
    }
    if c_star == 0.0 {
        return Err(Error::InvalidArgument(
            "two solitons share a speed; the speed gap is zero".into(),
        ));
    }
    Ok(TheoremConstants { omega_star, c_star })
}

#[derive(Clone, Debug)]
pub struct ConstructionConfig {
    pub specs: Vec<SolitonSpec>,
    pub grid: Grid,
    /// Base time every run integrates back to; must be positive.
    pub t0: f64,
    /// Increasing launch times `Tn`.
    pub horizons: Vec<f64>,
    pub dt: f64,
    pub scheme: Scheme,
    /// Steps between logged samples.
    pub sample_stride: u64,
}

impl ConstructionConfig {
    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if self.specs.len() < 2 {
            return Err(Error::InvalidArgument(
                "construction needs at least two solitons".into(),
            ));
        }
        for pair in self.specs.windows(2) {
            if pair[1].c <= pair[0].c {
                return Err(Error::InvalidArgument(format!(
                    "soliton speeds must be strictly ascending, got {} before {}",
                    pair[0].c, pair[1].c
                )));
            }
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "base time must be positive, got {}",
                self.t0
            )));
        }
        if self.horizons.is_empty() {
            return Err(Error::InvalidArgument("no launch times given".into()));
        }
        for h in &self.horizons {
            if !h.is_finite() || *h <= self.t0 {
                return Err(Error::InvalidArgument(format!(
                    "every launch time must exceed the base time {}, got {h}",
                    self.t0
                )));
            }
        }
        for pair in self.horizons.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidArgument(format!(
                    "launch times must be strictly increasing, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidArgument("sample stride must be >= 1".into()));
        }
        let t_max = *self.horizons.last().expect("checked nonempty");
        for spec in &self.specs {
            spec.admissible(params)?;
            let reach = 2.0 * (spec.x0.abs() + spec.c.abs() * t_max + 10.0 / spec.k());
            if reach >= self.grid.length() {
                return Err(Error::InvalidGrid(format!(
                    "soliton at c = {} travels within {reach:.1} of the periodic seam by t = {t_max}; \
                     the box length {} is too small",
                    spec.c,
                    self.grid.length()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstructionRow {
    pub t: f64,
    /// `||u_n(t) - R(t)||_X`.
    pub x_err: f64,
    /// Theorem envelope `exp(-sqrt(omega_star) c_star t)`.
    pub bound: f64,
    pub conserved: ConservedQuantities,
}

#[derive(Clone, Debug)]
pub struct ConstructionRun {
    pub horizon: f64,
    /// Samples ordered by ascending `t`, from the base time to the launch.
    pub rows: Vec<ConstructionRow>,
    /// State at the base time; `None` if the run blew up.
    pub state_t0: Option<FieldState>,
    pub blow_up: Option<f64>,
    /// Worst relative drift of (E, Q1, Q2) against their launch values.
    pub max_drift: f64,
    pub valid: bool,
}

impl ConstructionRun {
    /// Largest measured `x_err / bound` away from the launch row.
    pub fn envelope_constant(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.t < self.horizon && r.x_err > 0.0)
            .map(|r| r.x_err / r.bound)
            .fold(0.0, f64::max)
    }

    /// Least-squares decay rate of `ln x_err` over the half of the interval
    /// adjacent to the launch (positive = the error shrinks toward `Tn`);
    /// exact zeros are excluded. `None` with fewer than two usable samples.
    pub fn fitted_decay_rate(&self) -> Option<f64> {
        let t_half = 0.5 * (self.rows.first()?.t + self.horizon);
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.t >= t_half && r.x_err > 0.0)
            .map(|r| (r.t, r.x_err.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
        for &(t, y) in &pts {
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        let denom = n * stt - st * st;
        if denom == 0.0 {
            return None;
        }
        Some(-(n * sty - st * sy) / denom)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CauchyEntry {
    pub horizon_a: f64,
    pub horizon_b: f64,
    /// `||u_a(T0) - u_b(T0)||_X`.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct ConstructionReport {
    pub constants: TheoremConstants,
    pub t0: f64,
    pub runs: Vec<ConstructionRun>,
    pub cauchy_table: Vec<CauchyEntry>,
}

/// Execute the full experiment: self-check, one backward run per launch
/// time (a blow-up invalidates that run only), then the Cauchy table.
pub fn run_construction(
    config: &ConstructionConfig,
    params: &SystemParams,
) -> Result<ConstructionReport> {
    config.validate(params)?;
    let constants = theorem_constants(&config.specs, params)?;
    let grid = &config.grid;
    let opts = EvolveOptions::default();

    // A coarse or unstable step would quietly poison every run, so verify
    // backward transport of a single soliton over a short window first.
    let probe_spec = config.specs[0];
    let probe_top = config.t0 + SELF_CHECK_WINDOW;
    let probe_launch = soliton_state(&probe_spec, params, grid, probe_top)?;
    let probe_back = evolve(
        &probe_launch,
        params,
        config.t0,
        -config.dt,
        config.scheme,
        &opts,
        |_, _, _| Observe::Continue,
    )?;
    let probe_exact = soliton_state(&probe_spec, params, grid, config.t0)?;
    let probe_err = x_norm(&probe_back.sub(&probe_exact)?);
    if probe_err > SELF_CHECK_TOL {
        return Err(Error::InvalidArgument(format!(
            "backward self-check error {probe_err:.3e} exceeds {SELF_CHECK_TOL:.0e} over a \
             {SELF_CHECK_WINDOW}-unit window; the time step {} is too coarse for scheme {}",
            config.dt, config.scheme
        )));
    }

    let mut runs = Vec::with_capacity(config.horizons.len());
    for &horizon in &config.horizons {
        let launch = multisoliton_state(&config.specs, params, grid, horizon)?;
        let launch_conserved = conserved_snapshot(&launch, params);
        let mut rows: Vec<ConstructionRow> = Vec::new();
        let mut max_drift = 0.0f64;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);

        let outcome = evolve(
            &launch,
            params,
            config.t0,
            -config.dt,
            config.scheme,
            &EvolveOptions {
                observer_stride: config.sample_stride,
                ..opts
            },
            |_, t, state| {
                let reference = multisoliton_state(&config.specs, params, grid, t)
                    .expect("specs validated before the run");
                let diff = state.sub(&reference).expect("same grid");
                let conserved = conserved_snapshot(state, params);
                max_drift = max_drift
                    .max(rel(conserved.energy, launch_conserved.energy))
                    .max(rel(conserved.q1, launch_conserved.q1))
                    .max(rel(conserved.q2, launch_conserved.q2));
                rows.push(ConstructionRow {
                    t,
                    x_err: x_norm(&diff),
                    bound: constants.bound(t),
                    conserved,
                });
                Observe::Continue
            },
        );
        rows.reverse();
        let (state_t0, blow_up) = match outcome {
            Ok(state) => (Some(state), None),
            Err(Error::BlowUp { t }) => (None, Some(t)),
            Err(other) => return Err(other),
        };
        let valid = blow_up.is_none() && max_drift < DRIFT_LIMIT;
        runs.push(ConstructionRun {
            horizon,
            rows,
            state_t0,
            blow_up,
            max_drift,
            valid,
        });
    }

    let mut cauchy_table = Vec::new();
    for i in 0..runs.len() {
        for j in (i + 1)..runs.len() {
            if let (Some(a), Some(b)) = (&runs[i].state_t0, &runs[j].state_t0) {
                cauchy_table.push(CauchyEntry {
                    horizon_a: runs[i].horizon,
                    horizon_b: runs[j].horizon,
                    distance: x_norm(&a.sub(b)?),
                });
            }
        }
    }

    Ok(ConstructionReport {
        constants,
        t0: config.t0,
        runs,
        cauchy_table,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BootstrapVerdict {
    pub horizon: f64,
    /// Smallest time such that `x_err <= scale * bound` holds from there up
    /// to the launch without interruption.
    pub t_sharp: Option<f64>,
    /// Whether that interval covers the whole run down to the base time.
    pub passes: bool,
}

/// Check each run against the bootstrap hypothesis with an adjustable
/// envelope scale.
pub fn bootstrap_probe(report: &ConstructionReport, threshold_scale: f64) -> Vec<BootstrapVerdict> {
    report
        .runs
        .iter()
        .map(|run| {
            let mut t_sharp = None;
            for row in run.rows.iter().rev() {
                if row.x_err <= threshold_scale * row.bound {
                    t_sharp = Some(row.t);
                } else {
                    break;
                }
            }
            let passes = match (t_sharp, run.rows.first()) {
                (Some(ts), Some(first)) => ts == first.t && first.t == report.t0,
                _ => false,
            };
            BootstrapVerdict {
                horizon: run.horizon,
                t_sharp,
                passes,
            }
        })
        .collect()
}
