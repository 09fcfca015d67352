//! The eleven acceptance criteria, one function per criterion.
//!
//! Every function returns `Ok(detail)` with a short summary of the measured
//! quantities, or `Err(reason)` naming the first check that failed.

use std::process::Command;
use std::time::Instant;

use kgz::construction::{bootstrap_probe, run_construction, theorem_constants, ConstructionConfig};
use kgz::evolve::{evolve, rhs, EvolveOptions, Observe, Scheme};
use kgz::linops::{
    apply_h, build_l1, build_l2, coercivity_report, kernel_gauge, kernel_translation,
    negative_direction, quadratic_form_h, quadratic_form_h_split, spectral_gap,
};
use kgz::modulation::{fit_modulation, FitOptions, ModulationParams};
use kgz::observables::{
    apply_j, charge_q2, conserved_snapshot, gradient_energy, interaction_integral, x_norm,
};
use kgz::soliton::{
    multisoliton_state, phi_profile, secondary_profiles, soliton_state, stationary_residual,
    SolitonSpec, SystemParams,
};
use kgz::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::util::{
    correlation, ensure, es, linear_fit, noise_state, smooth_state, states_bitwise_equal,
};

/// Criterion 1: exact soliton states satisfy the stationary profile equations
/// to 1e-10 in the max norm across ten admissible parameter samples, each
/// evaluated in under a second on a 2048-point grid.
pub fn soliton_exactness() -> Result<String, String> {
    let grid = Grid::new(2048, 80.0).map_err(es)?;
    // (alpha, beta, omega, c) spread over the admissible cone, including the
    // ground state and a fast strongly-relativistic sample.
    let samples = [
        (1.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 0.5, 0.5),
        (1.0, 0.0, 0.3, -0.4),
        (2.0, 0.5, 0.2, 0.3),
        (1.0, -1.0, 0.4, 0.2),
        (1.5, 1.0, 0.1, -0.2),
        (0.5, 0.0, 0.6, 0.5),
        (1.0, 0.5, 0.0, 0.6),
        (3.0, 2.0, 0.2, 0.1),
        (1.0, 0.0, 0.0, 0.6),
    ];
    let gammas = [0.0, 0.3, 2.1];
    let mut worst_res = 0.0f64;
    let mut worst_secs = 0.0f64;
    for (i, &(alpha, beta, omega, c)) in samples.iter().enumerate() {
        let params = SystemParams { alpha, beta };
        let spec = SolitonSpec::new(omega, c, 0.0, gammas[i % gammas.len()]);
        let start = Instant::now();
        let res = stationary_residual(&spec, &params, &grid).map_err(es)?;
        let secs = start.elapsed().as_secs_f64();
        ensure(
            res < 1e-10,
            format!("sample {i} ({alpha},{beta},{omega},{c}): residual {res:.3e} >= 1e-10"),
        )?;
        ensure(
            secs < 1.0,
            format!("sample {i}: took {secs:.2} s (limit 1 s)"),
        )?;
        worst_res = worst_res.max(res);
        worst_secs = worst_secs.max(secs);
    }
    Ok(format!(
        "10 samples, max residual {worst_res:.2e}, max {worst_secs:.3} s/sample"
    ))
}

/// Criterion 2: closed-form profile values at the center match the analytic
/// expressions to 1e-12: the ground-state amplitude sqrt(2), and at
/// (omega, c) = (0.5, 0.5) the secondary profiles -4/3 and 2/3 together with
/// the derived wave numbers and the charge 2*sqrt(2).
pub fn explicit_values() -> Result<String, String> {
    const TOL: f64 = 1e-12;
    let params = SystemParams::default();
    let grid = Grid::new(2048, 80.0).map_err(es)?;
    let center = grid.n() / 2; // x = 0 exactly

    let ground = SolitonSpec::new(0.0, 0.0, 0.0, 0.0);
    let phi0 = phi_profile(&ground, &params, &grid).map_err(es)?.values[center];
    ensure(
        (phi0 - 2.0f64.sqrt()).abs() <= TOL,
        format!("ground phi(0) = {phi0:.16}, want sqrt(2)"),
    )?;

    let moving = SolitonSpec::new(0.5, 0.5, 0.0, 0.0);
    let phi_m = phi_profile(&moving, &params, &grid).map_err(es)?.values[center];
    let (psi, varphi) = secondary_profiles(&moving, &params, &grid).map_err(es)?;
    let checks = [
        ("phi(0)", phi_m, 1.0),
        ("psi(0)", psi.values[center], -4.0 / 3.0),
        ("varphi(0)", varphi.values[center], 2.0 / 3.0),
        ("theta", moving.theta(), 1.0 / 3.0),
        ("s", moving.s(), 2.0 / 3.0),
        ("k", moving.k(), (8.0f64 / 9.0).sqrt()),
    ];
    for (name, got, want) in checks {
        ensure(
            (got - want).abs() <= TOL,
            format!("{name} = {got:.16}, want {want:.16}"),
        )?;
    }
    let state = soliton_state(&moving, &params, &grid, 0.0).map_err(es)?;
    let q2 = charge_q2(&state);
    ensure(
        (q2 - 8.0f64.sqrt()).abs() <= TOL,
        format!("Q2 = {q2:.16}, want 2*sqrt(2)"),
    )?;
    Ok(format!(
        "center values, wave numbers, and Q2 = {q2:.15} all within 1e-12"
    ))
}

fn transport_error(
    scheme: Scheme,
    dt: f64,
    grid: &Grid,
    t_final: f64,
) -> Result<f64, String> {
    let params = SystemParams::default();
    let spec = SolitonSpec::new(0.5, 0.5, 0.0, 0.0);
    let initial = soliton_state(&spec, &params, grid, 0.0).map_err(es)?;
    let evolved = evolve(
        &initial,
        &params,
        t_final,
        dt,
        scheme,
        &EvolveOptions::default(),
        |_, _, _| Observe::Continue,
    )
    .map_err(es)?;
    let exact = soliton_state(&spec, &params, grid, t_final).map_err(es)?;
    Ok(x_norm(&evolved.sub(&exact).map_err(es)?))
}

/// Criterion 3: the integrator transports a moving soliton accurately — the
/// exponential scheme stays within 1e-6 of the exact translate over ten time
/// units at dt = 1e-3, and the classical schemes show their design orders
/// under step halving (RK4 ratio 16 +/- 3, splitting ratio 4 +/- 0.8).
pub fn transport() -> Result<String, String> {
    let start = Instant::now();
    let fine = Grid::new(2048, 100.0).map_err(es)?;
    let lawson_err = transport_error(Scheme::Lawson, 1e-3, &fine, 10.0)?;
    ensure(
        lawson_err < 1e-6,
        format!("exponential scheme error {lawson_err:.3e} >= 1e-6"),
    )?;

    let coarse = Grid::new(1024, 60.0).map_err(es)?;
    let rk_ratio = transport_error(Scheme::Rk4, 0.02, &coarse, 0.5)?
        / transport_error(Scheme::Rk4, 0.01, &coarse, 0.5)?;
    ensure(
        (13.0..=19.0).contains(&rk_ratio),
        format!("RK4 halving ratio {rk_ratio:.2} outside 16 +/- 3"),
    )?;
    let strang_ratio = transport_error(Scheme::Strang, 0.02, &coarse, 0.5)?
        / transport_error(Scheme::Strang, 0.01, &coarse, 0.5)?;
    ensure(
        (3.2..=4.8).contains(&strang_ratio),
        format!("splitting halving ratio {strang_ratio:.2} outside 4 +/- 0.8"),
    )?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("took {secs:.1} s (limit 30 s)"))?;
    Ok(format!(
        "exponential err {lawson_err:.2e}, RK4 ratio {rk_ratio:.1}, splitting ratio {strang_ratio:.2}"
    ))
}

/// Criterion 4: the three invariants drift by less than 1e-8 (relative) over
/// a two-soliton evolution on [0, 10], and the flow field equals J applied to
/// the energy gradient to 1e-10 on twenty rough random states.
pub fn conservation() -> Result<String, String> {
    let params = SystemParams::default();
    let grid = Grid::new(2048, 100.0).map_err(es)?;
    let specs = [
        SolitonSpec::new(0.2, 0.15, -6.0, 0.5),
        SolitonSpec::new(0.1, 0.4, 6.0, 0.0),
    ];
    let initial = multisoliton_state(&specs, &params, &grid, 0.0).map_err(es)?;
    let before = conserved_snapshot(&initial, &params);
    let evolved = evolve(
        &initial,
        &params,
        10.0,
        1e-3,
        Scheme::Lawson,
        &EvolveOptions::default(),
        |_, _, _| Observe::Continue,
    )
    .map_err(es)?;
    let after = conserved_snapshot(&evolved, &params);
    let drifts = [
        ("energy", before.energy, after.energy),
        ("Q1", before.q1, after.q1),
        ("Q2", before.q2, after.q2),
    ];
    let mut max_drift = 0.0f64;
    for (name, b, a) in drifts {
        let rel = (a - b).abs() / b.abs().max(1.0);
        ensure(
            rel < 1e-8,
            format!("{name} drift {rel:.3e} >= 1e-8 (from {b:.6} to {a:.6})"),
        )?;
        max_drift = max_drift.max(rel);
    }

    let rough_grid = Grid::new(256, 30.0).map_err(es)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_mismatch = 0.0f64;
    for i in 0..20 {
        let state = noise_state(&rough_grid, &mut rng, 0.5);
        let lhs = apply_j(&gradient_energy(&state, &params), &params);
        let flow = rhs(&state, &params);
        let scale = flow.max_abs().max(1.0);
        let mismatch = lhs.sub(&flow).map_err(es)?.max_abs() / scale;
        ensure(
            mismatch <= 1e-10,
            format!("state {i}: |J grad E - flow| = {mismatch:.3e} > 1e-10"),
        )?;
        max_mismatch = max_mismatch.max(mismatch);
    }
    Ok(format!(
        "max invariant drift {max_drift:.2e}, max |J grad E - flow| {max_mismatch:.2e}"
    ))
}

/// Criterion 5: the scalar operators have the predicted low-lying spectrum on
/// a 5 x 5 (omega, c) sweep — L1 ground state at -3A with the sech^2 profile
/// gap A, a zero mode carried by the envelope derivative, exactly one
/// negative direction, and L2 with a zero ground mode carried by the envelope
/// itself — plus one dense high-resolution confirmation, all inside 60 s.
pub fn spectrum() -> Result<String, String> {
    let start = Instant::now();
    let params = SystemParams::default();
    let grid = Grid::new(512, 60.0).map_err(es)?;
    let values = [0.0, 0.1, 0.2, 0.3, 0.4];
    let mut worst_ground = 0.0f64;
    for &omega in &values {
        for &c in &values {
            let spec = SolitonSpec::new(omega, c, 0.0, 0.0);
            let gap = spectral_gap(&spec);
            let tag = format!("(omega={omega}, c={c})");

            let l1 = build_l1(&spec, &params, &grid, 0.0).map_err(es)?;
            let (ev, vecs) = l1.eigs_lowest(6).map_err(es)?;
            let rel = (ev[0] + 3.0 * gap).abs() / (3.0 * gap);
            ensure(
                rel <= 1e-5,
                format!("{tag}: L1 ground {:.10} vs -3A = {:.10}", ev[0], -3.0 * gap),
            )?;
            worst_ground = worst_ground.max(rel);
            ensure(
                ev[1].abs() <= 1e-7,
                format!("{tag}: L1 second eigenvalue {:.3e} not a zero mode", ev[1]),
            )?;
            let negatives = ev.iter().filter(|v| **v < -1e-6).count();
            ensure(
                negatives == 1,
                format!("{tag}: {negatives} negative L1 eigenvalues, want exactly 1"),
            )?;
            let dphi = phi_profile(&spec, &params, &grid)
                .map_err(es)?
                .derivative(1);
            let corr = correlation(&vecs[1], &dphi.values);
            ensure(
                corr > 1.0 - 1e-8,
                format!("{tag}: zero mode correlation with phi' is {corr:.12}"),
            )?;

            let l2 = build_l2(&spec, &params, &grid, 0.0).map_err(es)?;
            let (ev2, vecs2) = l2.eigs_lowest(2).map_err(es)?;
            ensure(
                ev2[0].abs() <= 1e-7,
                format!("{tag}: L2 ground eigenvalue {:.3e} not zero", ev2[0]),
            )?;
            let phi = phi_profile(&spec, &params, &grid).map_err(es)?;
            let corr2 = correlation(&vecs2[0], &phi.values);
            ensure(
                corr2 > 1.0 - 1e-8,
                format!("{tag}: L2 ground correlation with phi is {corr2:.12}"),
            )?;
        }
    }

    // Dense high-resolution confirmation at the ground point.
    let dense_grid = Grid::new(2048, 80.0).map_err(es)?;
    let spec = SolitonSpec::new(0.0, 0.0, 0.0, 0.0);
    let l1 = build_l1(&spec, &params, &dense_grid, 0.0).map_err(es)?;
    let (ev, _) = l1.eigs_lowest(2).map_err(es)?;
    ensure(
        (ev[0] + 3.0).abs() <= 3.0 * 1e-5,
        format!("dense L1 ground {:.10}, want -3", ev[0]),
    )?;
    ensure(
        ev[1].abs() <= 1e-7,
        format!("dense L1 zero mode at {:.3e}", ev[1]),
    )?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1} s (limit 60 s)"))?;
    Ok(format!(
        "25 + 1 operator pairs, worst ground-state deviation {worst_ground:.2e}, {secs:.1} s"
    ))
}

/// Criterion 6: the linearized Hamiltonian annihilates the translation and
/// gauge kernels to 1e-8, its value on the contaminated direction matches the
/// closed form -8A/k to 1e-6 (equal to -8 at the ground point), and the
/// direct and decomposed quadratic forms agree to 1e-9 on fifty random smooth
/// perturbations.
pub fn hessian_identities() -> Result<String, String> {
    let params = SystemParams::default();
    let grid = Grid::new(2048, 80.0).map_err(es)?;
    let moving = SolitonSpec::new(0.5, 0.5, 0.0, 0.0);

    // Kernel annihilation is checked in the max norm, the library's residual
    // convention; spectrally weighting the image of H only amplifies the
    // xi^2-scaled round-off of the second derivatives.
    let tr = kernel_translation(&moving, &params, &grid, 0.0).map_err(es)?;
    let h_tr = apply_h(&tr, &moving, &params).map_err(es)?.max_abs();
    ensure(h_tr < 1e-8, format!("max|H (translation kernel)| = {h_tr:.3e}"))?;
    let ga = kernel_gauge(&moving, &params, &grid, 0.0).map_err(es)?;
    let h_ga = apply_h(&ga, &moving, &params).map_err(es)?.max_abs();
    ensure(h_ga < 1e-8, format!("max|H (gauge kernel)| = {h_ga:.3e}"))?;

    let mut ground_value = f64::NAN;
    for (omega, c) in [(0.0, 0.0), (0.5, 0.5), (0.3, -0.2)] {
        let spec = SolitonSpec::new(omega, c, 0.0, 0.0);
        let upsilon = negative_direction(&spec, &params, &grid, 0.0).map_err(es)?;
        let value = quadratic_form_h(&upsilon, &spec, &params).map_err(es)?;
        let expected = -8.0 * spectral_gap(&spec) / spec.k();
        ensure(
            (value - expected).abs() <= 1e-6 * expected.abs(),
            format!("(omega={omega}, c={c}): <H Y, Y> = {value:.12}, want {expected:.12}"),
        )?;
        if omega == 0.0 && c == 0.0 {
            ground_value = value;
            ensure(
                (value + 8.0).abs() <= 8e-6,
                format!("ground <H Y, Y> = {value:.12}, want -8"),
            )?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let eta = smooth_state(&grid, &mut rng);
        let direct = quadratic_form_h(&eta, &moving, &params).map_err(es)?;
        let split = quadratic_form_h_split(&eta, &moving, &params).map_err(es)?;
        let rel = (direct - split).abs() / direct.abs().max(split.abs()).max(1.0);
        ensure(
            rel <= 1e-9,
            format!("perturbation {i}: direct {direct:.12e} vs split {split:.12e}"),
        )?;
        worst = worst.max(rel);
    }
    Ok(format!(
        "kernels at {:.1e}/{:.1e}, ground value {ground_value:.9}, worst split mismatch {worst:.2e}",
        h_tr, h_ga
    ))
}

/// Criterion 7: the quadratic form is positive on one hundred random
/// constrained perturbations, the minimum quotient is stable to 10% under
/// grid doubling, and the unconstrained contaminated direction still probes
/// negative.
pub fn coercivity() -> Result<String, String> {
    let params = SystemParams::default();
    let spec = SolitonSpec::new(0.5, 0.5, 0.0, 0.0);
    let grid = Grid::new(2048, 80.0).map_err(es)?;
    let report = coercivity_report(&spec, &params, &grid, 100, 7).map_err(es)?;
    ensure(
        report.min_quotient > 0.0,
        format!("min constrained quotient {:.6e} not positive", report.min_quotient),
    )?;

    let fine = Grid::new(4096, 80.0).map_err(es)?;
    let fine_report = coercivity_report(&spec, &params, &fine, 100, 7).map_err(es)?;
    let shift = (fine_report.min_quotient - report.min_quotient).abs() / report.min_quotient;
    ensure(
        shift <= 0.10,
        format!(
            "min quotient moved {:.1}% under grid doubling ({:.6e} -> {:.6e})",
            100.0 * shift,
            report.min_quotient,
            fine_report.min_quotient
        ),
    )?;

    let upsilon = negative_direction(&spec, &params, &grid, 0.0).map_err(es)?;
    let norm = x_norm(&upsilon);
    let quotient = quadratic_form_h(&upsilon, &spec, &params).map_err(es)? / (norm * norm);
    ensure(
        quotient < 0.0,
        format!("contaminated direction quotient {quotient:.6e} not negative"),
    )?;
    Ok(format!(
        "min quotient {:.4e} (stable to {:.2}%), contaminated quotient {:.3e}",
        report.min_quotient,
        100.0 * shift,
        quotient
    ))
}

/// Criterion 8: the modulation fit recovers injected parameter offsets
/// (1e-2, 1e-2, 1e-3) on a two-soliton state to 1e-8, is idempotent when
/// restarted from its own output, leaves a residual below 1e-10, and is
/// equivariant under translation and phase shifts to 1e-10.
pub fn modulation() -> Result<String, String> {
    let params = SystemParams::default();
    let grid = Grid::new(2048, 160.0).map_err(es)?;
    let t = 0.8;
    let base = [
        SolitonSpec::new(0.2, -0.35, -15.0, 0.3),
        SolitonSpec::new(0.4, 0.3, 15.0, -0.2),
    ];
    let perturbed = [
        SolitonSpec::new(0.2 + 1e-3, -0.35, -15.0 + 1e-2, 0.3 + 1e-2),
        SolitonSpec::new(0.4 - 1e-3, 0.3, 15.0 - 1e-2, -0.2 + 1e-2),
    ];
    let state = multisoliton_state(&perturbed, &params, &grid, t).map_err(es)?;
    let cs: Vec<f64> = base.iter().map(|s| s.c).collect();
    let guess: Vec<ModulationParams> = base.iter().map(|s| ModulationParams::from_spec(s, t)).collect();
    let opts = FitOptions::default();
    let fit = fit_modulation(&state, &cs, &guess, &params, &opts).map_err(es)?;
    ensure(
        fit.residual_norm < 1e-10,
        format!("fit residual {:.3e} >= 1e-10", fit.residual_norm),
    )?;
    let mut worst = 0.0f64;
    for (j, spec) in perturbed.iter().enumerate() {
        let truth = ModulationParams::from_spec(spec, t);
        let got = &fit.params[j];
        for (name, g, w) in [
            ("omega", got.omega, truth.omega),
            ("x", got.x, truth.x),
            ("gamma", got.gamma, truth.gamma),
        ] {
            let err = (g - w).abs();
            ensure(
                err <= 1e-8,
                format!("soliton {j} {name}: fitted {g:.12} vs injected {w:.12}"),
            )?;
            worst = worst.max(err);
        }
    }

    let refit = fit_modulation(&state, &cs, &fit.params, &params, &opts).map_err(es)?;
    ensure(
        refit.iterations == 0,
        format!("refit took {} iterations, want 0", refit.iterations),
    )?;
    for j in 0..2 {
        let dm = (refit.params[j].omega - fit.params[j].omega)
            .abs()
            .max((refit.params[j].x - fit.params[j].x).abs())
            .max((refit.params[j].gamma - fit.params[j].gamma).abs());
        ensure(
            dm <= 1e-12,
            format!("refit moved soliton {j} parameters by {dm:.3e}"),
        )?;
    }

    // Equivariance: fitting a translate/rephased copy from an equally shifted
    // guess must reproduce the offsets exactly.
    let small_grid = Grid::new(1024, 100.0).map_err(es)?;
    let (dx, dgamma) = (0.37, -0.83);
    let e1 = SolitonSpec::new(0.5, 0.5, 1.2, 0.4);
    let e2 = SolitonSpec::new(0.5, 0.5, 1.2 + dx, 0.4 + dgamma);
    let mut fits = Vec::new();
    for spec in [e1, e2] {
        let state = soliton_state(&spec, &params, &small_grid, 0.0).map_err(es)?;
        let nudged = ModulationParams::new(spec.omega + 5e-4, spec.x0 + 3e-3, spec.gamma0 - 2e-3);
        let fit = fit_modulation(&state, &[spec.c], &[nudged], &params, &opts).map_err(es)?;
        fits.push(fit.params[0].clone());
    }
    let eq = [
        ("omega", fits[1].omega - fits[0].omega, 0.0),
        ("x", fits[1].x - fits[0].x, dx),
        ("gamma", fits[1].gamma - fits[0].gamma, dgamma),
    ];
    for (name, got, want) in eq {
        ensure(
            (got - want).abs() <= 1e-10,
            format!("equivariance in {name}: offset {got:.12} vs {want:.12}"),
        )?;
    }
    Ok(format!(
        "offsets recovered to {worst:.2e}, residual {:.2e}, refit exact, equivariant to 1e-10",
        fit.residual_norm
    ))
}

/// Criterion 9: the pairwise interaction functional of the counter-moving
/// pair decays exponentially with a log-slope at least four times steeper
/// than the theorem rate sqrt(omega*) c*, with a clean linear fit, and the
/// derived constants match their closed forms.
pub fn interaction_decay() -> Result<String, String> {
    let params = SystemParams::default();
    let specs = [
        SolitonSpec::new(0.0, -0.3, 0.0, 0.0),
        SolitonSpec::new(0.0, 0.3, 0.0, 0.0),
    ];
    let constants = theorem_constants(&specs, &params).map_err(es)?;
    ensure(
        (constants.omega_star - 0.0042924).abs() < 5e-6,
        format!("omega* = {:.10}, want about 0.0042924", constants.omega_star),
    )?;
    ensure(
        (constants.c_star - 0.6).abs() < 1e-12,
        format!("c* = {:.12}, want 0.6", constants.c_star),
    )?;

    let grid = Grid::new(4096, 240.0).map_err(es)?;
    let ts: Vec<f64> = (0..15).map(|i| 30.0 + 5.0 * i as f64).collect();
    let mut ys = Vec::new();
    for &t in &ts {
        let value = interaction_integral(&specs, &params, &grid, t).map_err(es)?;
        ensure(
            value > 0.0 && value.is_finite(),
            format!("interaction at t = {t} is {value:.3e}"),
        )?;
        ys.push(value.ln());
    }
    let (slope, _, r_squared) = linear_fit(&ts, &ys);
    let threshold = -4.0 * constants.decay_rate();
    ensure(
        slope <= threshold,
        format!("log-slope {slope:.4} above the 4x theorem rate {threshold:.4}"),
    )?;
    ensure(
        r_squared > 0.99,
        format!("interaction fit R^2 = {r_squared:.6} <= 0.99"),
    )?;
    Ok(format!(
        "slope {slope:.3} vs threshold {threshold:.3}, R^2 = {:.6}",
        r_squared
    ))
}

/// Criterion 10: the backward construction from final data at three launch
/// horizons keeps the invariants within 1e-7, decays toward the base time
/// with a positive fitted rate and a bounded weighted error, and the
/// pairwise distances at the base time shrink as the shorter horizon grows —
/// all within a twenty-minute budget.
pub fn construction() -> Result<String, String> {
    let start = Instant::now();
    let params = SystemParams::default();
    // The waves must be dynamically stable for a 60-unit backward run to
    // survive round-off: perturbations of an omega = 0 soliton grow like
    // e^{0.84 t} (the frequency-slope criterion omega^2 > (1 - c^2)/2 fails),
    // so machine noise detonates after ~35 units. At omega = 0.8 the
    // criterion holds and the measured growth is only secular.
    let config = ConstructionConfig {
        specs: vec![
            SolitonSpec::new(0.8, -0.3, 0.0, 0.0),
            SolitonSpec::new(0.8, 0.3, 0.0, 0.0),
        ],
        grid: Grid::new(4096, 200.0).map_err(es)?,
        t0: 20.0,
        horizons: vec![40.0, 60.0, 80.0],
        dt: 1e-3,
        scheme: Scheme::Lawson,
        sample_stride: 200,
    };
    let report = run_construction(&config, &params).map_err(es)?;
    ensure(
        report.runs.len() == 3,
        format!("{} runs, want 3", report.runs.len()),
    )?;

    let mut details = Vec::new();
    for run in &report.runs {
        let tag = format!("Tn = {}", run.horizon);
        ensure(
            run.blow_up.is_none(),
            format!("{tag}: blow-up at t = {:?}", run.blow_up),
        )?;
        ensure(
            run.max_drift < 1e-7,
            format!("{tag}: invariant drift {:.3e} >= 1e-7", run.max_drift),
        )?;
        ensure(run.valid, format!("{tag}: run flagged invalid"))?;
        let rate = run
            .fitted_decay_rate()
            .ok_or(format!("{tag}: no fitted decay rate"))?;
        ensure(
            rate > 0.0,
            format!("{tag}: fitted decay rate {rate:.4} not positive"),
        )?;
        let weighted = run
            .rows
            .iter()
            .map(|r| r.x_err * (rate * (r.t - report.t0)).exp())
            .fold(0.0f64, f64::max);
        ensure(
            weighted.is_finite(),
            format!("{tag}: weighted error not finite"),
        )?;
        details.push(format!(
            "{tag}: drift {:.1e}, rate {rate:.2}, envelope {:.2e}",
            run.max_drift,
            run.envelope_constant()
        ));
    }

    let verdicts = bootstrap_probe(&report, 1.0);
    for v in &verdicts {
        ensure(
            v.passes && v.t_sharp == Some(report.t0),
            format!(
                "bootstrap at Tn = {}: t_sharp = {:?}, passes = {}",
                v.horizon, v.t_sharp, v.passes
            ),
        )?;
    }

    let distance = |a: f64, b: f64| -> Result<f64, String> {
        report
            .cauchy_table
            .iter()
            .find(|e| e.horizon_a == a && e.horizon_b == b)
            .map(|e| e.distance)
            .ok_or(format!("no Cauchy entry for ({a}, {b})"))
    };
    let d_40_60 = distance(40.0, 60.0)?;
    let d_40_80 = distance(40.0, 80.0)?;
    let d_60_80 = distance(60.0, 80.0)?;
    for (pair, d) in [("40/60", d_40_60), ("40/80", d_40_80), ("60/80", d_60_80)] {
        ensure(
            d > 0.0 && d.is_finite(),
            format!("Cauchy distance {pair} is {d:.3e}"),
        )?;
    }
    ensure(
        d_40_60 > d_60_80 && d_40_80 > d_60_80,
        format!(
            "Cauchy distances not shrinking with the shorter horizon: \
             d(40,60) = {d_40_60:.3e}, d(40,80) = {d_40_80:.3e}, d(60,80) = {d_60_80:.3e}"
        ),
    )?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1200.0, format!("took {secs:.0} s (limit 1200 s)"))?;
    Ok(format!(
        "{}; cauchy {d_40_60:.2e}/{d_40_80:.2e}/{d_60_80:.2e}; {secs:.0} s",
        details.join("; ")
    ))
}

/// Criterion 11: snapshots round-trip bitwise on one hundred random states,
/// the CSV float format round-trips through text exactly, and twelve
/// malformed configuration documents are each rejected with exit code 2 and
/// a diagnostic naming the offending field.
pub fn io_contract() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(es)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20260825);

    for i in 0..100 {
        let n = [8usize, 16, 32, 64, 128, 256][rng.random_range(0..6)];
        let length = rng.random_range(10.0..200.0);
        let grid = Grid::new(n, length).map_err(es)?;
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let mut state = noise_state(&grid, &mut rng, scale);
        state.t = rng.random_range(-1000.0..1000.0);
        let path = dir.path().join(format!("state_{i}.snap"));
        kgz_cli::snapshot::write_snapshot(&state, &path).map_err(es)?;
        let bytes = std::fs::metadata(&path).map_err(es)?.len();
        ensure(
            bytes == 28 + 48 * n as u64,
            format!("snapshot {i}: {bytes} bytes for n = {n}"),
        )?;
        let back = kgz_cli::snapshot::read_snapshot(&path).map_err(es)?;
        ensure(
            states_bitwise_equal(&state, &back),
            format!("snapshot {i} (n = {n}): round trip not bitwise exact"),
        )?;
    }

    let mut csv_values: Vec<f64> = vec![
        0.0,
        -0.0,
        std::f64::consts::PI,
        f64::MAX,
        f64::MIN_POSITIVE,
        5e-324,
    ];
    for _ in 0..1000 {
        let mantissa: f64 = rng.random_range(-1.0..1.0);
        let exponent: i32 = rng.random_range(-300..301);
        csv_values.push(mantissa * 10f64.powi(exponent));
    }
    for &v in &csv_values {
        let text = kgz_cli::commands::format_f64(v);
        let back: f64 = text.parse().map_err(es)?;
        ensure(
            back.to_bits() == v.to_bits(),
            format!("CSV format loses {v:e}: wrote {text}, read {back:e}"),
        )?;
    }

    // Malformed configuration documents: each must exit with code 2 and name
    // the offending field on stderr.
    let valid_soliton = "[[solitons]]\nomega = 0.2\nc = 0.1\nx0 = 0.0\ngamma0 = 0.0\n";
    let valid_grid = "[grid]\nn = 512\nlength = 40.0\n";
    let out = format!("[output]\ndir = \"{}\"\n", dir.path().join("cout").display());
    let cases: Vec<(&str, &str, String, &str)> = vec![
        ("broken syntax", "soliton", "[system\nalpha = 1.0\n".into(), "parse error"),
        (
            "unknown system key",
            "soliton",
            format!("[system]\nalpha = 1.0\nbeta = 0.0\ngamma = 2.0\n{valid_soliton}"),
            "gamma",
        ),
        (
            "missing system field",
            "soliton",
            format!("[system]\nalpha = 1.0\n{valid_soliton}"),
            "beta",
        ),
        (
            "missing soliton field",
            "soliton",
            "[[solitons]]\nc = 0.1\nx0 = 0.0\ngamma0 = 0.0\n".into(),
            "omega",
        ),
        (
            "grid size not a power of two",
            "soliton",
            format!("{valid_soliton}[grid]\nn = 1000\nlength = 40.0\n{out}"),
            "grid",
        ),
        (
            "negative grid length",
            "soliton",
            format!("{valid_soliton}[grid]\nn = 512\nlength = -40.0\n{out}"),
            "grid",
        ),
        (
            "zero time step",
            "evolve",
            format!("{valid_soliton}{valid_grid}[time]\nt0 = 0.0\nt1 = 1.0\ndt = 0.0\nscheme = \"lawson\"\n"),
            "time.dt",
        ),
        (
            "missing time section",
            "evolve",
            format!("{valid_soliton}{valid_grid}"),
            "time",
        ),
        (
            "inadmissible soliton",
            "soliton",
            "[[solitons]]\nomega = 2.0\nc = 0.1\nx0 = 0.0\ngamma0 = 0.0\n".into(),
            "solitons[0]",
        ),
        (
            "time step against the target",
            "evolve",
            format!("{valid_soliton}{valid_grid}[time]\nt0 = 0.0\nt1 = 1.0\ndt = -1e-2\nscheme = \"lawson\"\n"),
            "time.dt",
        ),
        (
            "construction with one soliton",
            "construct",
            format!(
                "{valid_soliton}{valid_grid}[time]\nt0 = 1.0\ndt = 1e-2\nscheme = \"lawson\"\n\
                 [construction]\ntn_list = [2.0]\n{out}"
            ),
            "at least two solitons",
        ),
        (
            "unknown top-level section",
            "soliton",
            format!("{valid_soliton}[extra]\nknob = 1\n"),
            "extra",
        ),
    ];
    for (i, (label, subcommand, body, token)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad_{i}.toml"));
        std::fs::write(&path, body).map_err(es)?;
        let output = Command::new(env!("CARGO_BIN_EXE_kgz"))
            .arg(subcommand)
            .arg("--config")
            .arg(&path)
            .output()
            .map_err(es)?;
        let stderr = String::from_utf8_lossy(&output.stderr);
        ensure(
            output.status.code() == Some(2),
            format!(
                "case {i} ({label}): exit {:?}, want 2; stderr: {}",
                output.status.code(),
                stderr.trim()
            ),
        )?;
        ensure(
            stderr.contains(token),
            format!("case {i} ({label}): stderr {:?} does not name {token:?}", stderr.trim()),
        )?;
        ensure(
            output.stdout.is_empty(),
            format!("case {i} ({label}): diagnostics leaked to stdout"),
        )?;
    }
    Ok(format!(
        "100 snapshots bitwise, {} CSV values exact, 12 configs rejected with field names",
        csv_values.len()
    ))
}
