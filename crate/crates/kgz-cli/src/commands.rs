//! Subcommand drivers. Each one turns a validated [`RunConfig`] into library
//! calls, writes CSV artifacts (and snapshots) into the output directory,
//! prints key results on stdout, and keeps progress chatter on stderr.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use kgz::construction::{bootstrap_probe, run_construction, ConstructionConfig};
use kgz::evolve::{evolve, EvolveOptions, Observe};
use kgz::linops::{build_l1, build_l2};
use kgz::modulation::ModulationParams;
use kgz::modulation::ModulationTracker;
use kgz::observables::{conserved_snapshot, ConservedQuantities};
use kgz::soliton::{
    multisoliton_state, phi_profile, secondary_profiles, soliton_snapshot, stationary_residual,
};
use kgz::FieldState;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::snapshot::write_snapshot;

/// 17 significant digits: round-trip exact for `f64`.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

fn csv_file(dir: &Path, name: &str, header: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}")?;
    Ok(w)
}

/// Emit one profile CSV per soliton plus its stationarity residual.
pub fn run_soliton(config: &RunConfig) -> Result<()> {
    let params = config.params()?;
    let specs = config.nonempty_specs()?;
    let grid = config.build_grid()?;
    let (dir, _) = config.output_spec()?;
    create_out_dir(&dir)?;

    for (j, spec) in specs.iter().enumerate() {
        let phi = phi_profile(spec, &params, &grid)?;
        let (psi, varphi) = secondary_profiles(spec, &params, &grid)?;
        let snap = soliton_snapshot(&params, spec.omega, spec.c, spec.x0, spec.gamma0, &grid)?;
        let name = format!("soliton_{j}.csv");
        let mut w = csv_file(&dir, &name, "x,phi,psi,varphi,re_rho,im_rho")?;
        for i in 0..grid.n() {
            writeln!(
                w,
                "{}",
                csv_row(&[
                    grid.x()[i],
                    phi.values[i],
                    psi.values[i],
                    varphi.values[i],
                    snap.rho[i].re,
                    snap.rho[i].im,
                ])
            )?;
        }
        w.flush()?;
        let residual = stationary_residual(spec, &params, &grid)?;
        println!("soliton[{j}] stationary_residual = {}", format_f64(residual));
        eprintln!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

/// Integrate from `t0` to `t1`, logging conserved quantities and writing the
/// final state as a snapshot. An empty soliton list evolves the zero state.
pub fn run_evolve(config: &RunConfig) -> Result<()> {
    let params = config.params()?;
    let specs = config.specs()?;
    let grid = config.build_grid()?;
    let time = config.time_spec()?;
    let t1 = time.require_t1()?;
    time.check_direction(t1)?;
    let (dir, stride) = config.output_spec()?;
    create_out_dir(&dir)?;

    let initial = if specs.is_empty() {
        FieldState::zero(&grid, time.t0)
    } else {
        multisoliton_state(&specs, &params, &grid, time.t0)?
    };

    let mut rows: Vec<(f64, ConservedQuantities)> = Vec::new();
    let final_state = if t1 == time.t0 {
        rows.push((time.t0, conserved_snapshot(&initial, &params)));
        initial
    } else {
        evolve(
            &initial,
            &params,
            t1,
            time.dt,
            time.scheme,
            &EvolveOptions {
                observer_stride: stride,
                ..EvolveOptions::default()
            },
            |_, t, state| {
                rows.push((t, conserved_snapshot(state, &params)));
                Observe::Continue
            },
        )?
    };

    let mut w = csv_file(&dir, "observables.csv", "t,energy,q1,q2")?;
    for (t, c) in &rows {
        writeln!(w, "{}", csv_row(&[*t, c.energy, c.q1, c.q2]))?;
    }
    w.flush()?;
    write_snapshot(&final_state, &dir.join("final.snap"))?;

    let first = rows.first().expect("observer always reports");
    let last = rows.last().expect("observer always reports");
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    println!("final_t = {}", format_f64(final_state.t));
    println!("energy_drift = {}", format_f64(rel(last.1.energy, first.1.energy)));
    println!("q1_drift = {}", format_f64(rel(last.1.q1, first.1.q1)));
    println!("q2_drift = {}", format_f64(rel(last.1.q2, first.1.q2)));
    eprintln!(
        "wrote {} observable rows and final.snap to {}",
        rows.len(),
        dir.display()
    );
    Ok(())
}

/// Lowest eigenpairs of the linearized operators around the first soliton.
pub fn run_spectrum(config: &RunConfig) -> Result<()> {
    let params = config.params()?;
    let specs = config.nonempty_specs()?;
    let grid = config.build_grid()?;
    let count = config.spectrum_count()?;
    let (dir, _) = config.output_spec()?;
    create_out_dir(&dir)?;

    if specs.len() > 1 {
        eprintln!(
            "spectrum linearizes around the first soliton; ignoring {} further entries",
            specs.len() - 1
        );
    }
    let spec = &specs[0];
    let l1 = build_l1(spec, &params, &grid, 0.0)?;
    let l2 = build_l2(spec, &params, &grid, 0.0)?;
    let (values_1, vectors_1) = l1.eigs_lowest(count)?;
    let (values_2, vectors_2) = l2.eigs_lowest(count)?;

    let mut w = csv_file(&dir, "eigenvalues.csv", "operator,index,eigenvalue")?;
    for (name, values) in [("l1", &values_1), ("l2", &values_2)] {
        for (i, value) in values.iter().enumerate() {
            writeln!(w, "{name},{i},{}", format_f64(*value))?;
            println!("{name}[{i}] = {}", format_f64(*value));
        }
    }
    w.flush()?;

    for (name, vectors) in [("l1", &vectors_1), ("l2", &vectors_2)] {
        let header: String = std::iter::once("x".to_string())
            .chain((0..vectors.len()).map(|i| format!("f{i}")))
            .collect::<Vec<_>>()
            .join(",");
        let mut w = csv_file(&dir, &format!("{name}_eigenfunctions.csv"), &header)?;
        for i in 0..grid.n() {
            let mut row = vec![grid.x()[i]];
            row.extend(vectors.iter().map(|v| v[i]));
            writeln!(w, "{}", csv_row(&row))?;
        }
        w.flush()?;
    }
    eprintln!("wrote eigenvalues.csv and eigenfunction tables to {}", dir.display());
    Ok(())
}

/// Track modulation parameters along an evolution started on the exact
/// multi-soliton state; `t1 == t0` performs a single fit.
pub fn run_modulate(config: &RunConfig) -> Result<()> {
    let params = config.params()?;
    let specs = config.nonempty_specs()?;
    let grid = config.build_grid()?;
    let time = config.time_spec()?;
    let t1 = time.require_t1()?;
    time.check_direction(t1)?;
    let (dir, stride) = config.output_spec()?;
    let opts = config.fit_options()?;
    create_out_dir(&dir)?;

    let cs: Vec<f64> = specs.iter().map(|s| s.c).collect();
    let initial_guess: Vec<ModulationParams> = specs
        .iter()
        .map(|s| ModulationParams::from_spec(s, time.t0))
        .collect();
    let mut tracker = ModulationTracker::new(&cs, &initial_guess, &params, opts)?;
    let initial = multisoliton_state(&specs, &params, &grid, time.t0)?;

    if t1 == time.t0 {
        tracker.observe(&initial)?;
    } else {
        let mut failure: Option<kgz::Error> = None;
        let run = evolve(
            &initial,
            &params,
            t1,
            time.dt,
            time.scheme,
            &EvolveOptions {
                observer_stride: stride,
                ..EvolveOptions::default()
            },
            |_, _, state| match tracker.observe(state) {
                Ok(_) => Observe::Continue,
                Err(e) => {
                    failure = Some(e);
                    Observe::Stop
                }
            },
        );
        match run {
            Ok(_) => {}
            Err(kgz::Error::Aborted { .. }) => {
                let err = failure.take().expect("abort is only requested on fit failure");
                return Err(err.into());
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut header = String::from("t");
    for j in 0..specs.len() {
        header.push_str(&format!(",omega_{j},x_{j},gamma_{j}"));
    }
    header.push_str(",residual_norm,iterations");
    let mut w = csv_file(&dir, "modulation.csv", &header)?;
    for sample in tracker.history() {
        let mut vals = vec![sample.t];
        for p in &sample.params {
            vals.extend([p.omega, p.x, p.gamma]);
        }
        vals.push(sample.residual_norm);
        writeln!(w, "{},{}", csv_row(&vals), sample.iterations)?;
    }
    w.flush()?;

    let mut header = String::from("t");
    for j in 0..specs.len() {
        header.push_str(&format!(",omega_rate_{j},x_defect_{j},gamma_defect_{j}"));
    }
    let mut w = csv_file(&dir, "modulation_rates.csv", &header)?;
    for rate in tracker.rate_series() {
        let mut vals = vec![rate.t];
        for j in 0..specs.len() {
            vals.extend([rate.omega_rate[j], rate.x_defect[j], rate.gamma_defect[j]]);
        }
        writeln!(w, "{}", csv_row(&vals))?;
    }
    w.flush()?;

    let history = tracker.history();
    let max_residual = history
        .iter()
        .map(|s| s.residual_norm)
        .fold(0.0f64, f64::max);
    println!("samples = {}", history.len());
    println!("max_residual_norm = {}", format_f64(max_residual));
    let last = history.last().expect("at least one sample");
    for (j, p) in last.params.iter().enumerate() {
        println!(
            "final[{j}] omega = {} x = {} gamma = {}",
            format_f64(p.omega),
            format_f64(p.x),
            format_f64(p.gamma)
        );
    }
    eprintln!("wrote modulation.csv and modulation_rates.csv to {}", dir.display());
    Ok(())
}

/// Run the backward-from-final-data construction and emit its report:
/// per-run deviation tables, summary, Cauchy table, and base-time snapshots.
pub fn run_construct(config: &RunConfig) -> Result<()> {
    let params = config.params()?;
    let specs = config.specs()?;
    let grid = config.build_grid()?;
    let time = config.time_spec()?;
    if time.dt < 0.0 {
        return Err(CliError::Config(
            "time.dt: give a positive step; construct integrates backward internally".into(),
        ));
    }
    let tn_list = config.tn_list()?;
    let (dir, stride) = config.output_spec()?;
    create_out_dir(&dir)?;

    let construction = ConstructionConfig {
        specs,
        grid,
        t0: time.t0,
        horizons: tn_list,
        dt: time.dt,
        scheme: time.scheme,
        sample_stride: stride,
    };
    eprintln!(
        "running self-check plus {} backward integrations to t = {} ...",
        construction.horizons.len(),
        construction.t0
    );
    let report = run_construction(&construction, &params)?;

    for (i, run) in report.runs.iter().enumerate() {
        let mut w = csv_file(&dir, &format!("report_{i}.csv"), "t,x_err,bound,energy,q1,q2")?;
        for row in &run.rows {
            writeln!(
                w,
                "{}",
                csv_row(&[
                    row.t,
                    row.x_err,
                    row.bound,
                    row.conserved.energy,
                    row.conserved.q1,
                    row.conserved.q2,
                ])
            )?;
        }
        w.flush()?;
        if let Some(state) = &run.state_t0 {
            write_snapshot(state, &dir.join(format!("state_t0_{i}.snap")))?;
        }
    }

    let verdicts = bootstrap_probe(&report, 1.0);
    let mut w = csv_file(&dir, "summary.csv", "n,tn,t_sharp,envelope_const,fitted_rate")?;
    for (i, run) in report.runs.iter().enumerate() {
        let t_sharp = verdicts[i].t_sharp.unwrap_or(f64::NAN);
        let rate = run.fitted_decay_rate().unwrap_or(f64::NAN);
        writeln!(
            w,
            "{i},{}",
            csv_row(&[run.horizon, t_sharp, run.envelope_constant(), rate])
        )?;
        println!(
            "run[{i}] tn = {} t_sharp = {} envelope_const = {} fitted_rate = {}",
            format_f64(run.horizon),
            format_f64(t_sharp),
            format_f64(run.envelope_constant()),
            format_f64(rate)
        );
    }
    w.flush()?;

    let mut w = csv_file(&dir, "cauchy.csv", "horizon_a,horizon_b,distance")?;
    for entry in &report.cauchy_table {
        writeln!(
            w,
            "{}",
            csv_row(&[entry.horizon_a, entry.horizon_b, entry.distance])
        )?;
        println!(
            "cauchy({}, {}) = {}",
            entry.horizon_a,
            entry.horizon_b,
            format_f64(entry.distance)
        );
    }
    w.flush()?;
    eprintln!("wrote construction report to {}", dir.display());

    for run in &report.runs {
        if let Some(t) = run.blow_up {
            return Err(CliError::Numerical(format!(
                "backward run from tn = {} blew up at t = {t}; partial report kept",
                run.horizon
            )));
        }
        if !run.valid {
            eprintln!(
                "warning: run tn = {} flagged invalid (conserved drift {:.3e})",
                run.horizon, run.max_drift
            );
        }
    }
    Ok(())
}
