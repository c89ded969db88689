//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::time::Instant;

use filterlab::filters::{kalman_static, run_grid_filter};
use filterlab::measures::{bl_distance, tv_distance, DensityFn, DiscreteMeasure, GridSpec, Measure};
use filterlab::models::{
    ar_kernel_tv, assumption_report, char_fn_min, kernel_tv_modulus, simulate_path, ArKernel, Noise,
    ObservationChannel, Preset, StaticGaussianModel,
};
use filterlab::stability::{
    check_coupling_bound, estimate_rate, filter_predictor_tv_check, liminf_constant, tail_window, twin_run, Distances,
    Method, RateClass, TwinRunConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> filterlab::Result<Verdict>;

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Static-Gaussian rate example at seed 42.
fn criterion_1() -> filterlab::Result<Verdict> {
    let start = Instant::now();
    let p = Preset::StaticGaussian;
    let model = p.static_model().unwrap();
    let (mu, nu) = p.priors();
    let trace = twin_run(&TwinRunConfig::new(p.spec()?, mu, nu, 2000, 42, Method::KalmanStatic))?;
    let x0 = trace.initial_state[0];
    let l = liminf_constant(&trace, &model, x0, 0.5)?;
    let sin_x0 = x0.sin().abs();
    let liminf_ok = (l.estimate - sin_x0).abs() <= 0.25 * sin_x0;
    let fit = estimate_rate(&trace.bl(), tail_window(2000))?;
    let rate_ok = fit.classification == RateClass::Polynomial && (-1.5..=-0.5).contains(&fit.slope);
    let secs = start.elapsed().as_secs_f64();
    Ok(verdict(
        liminf_ok && rate_ok && secs < 5.0,
        format!(
            "min n·cos_lower = {:.4} vs |sin X0| = {sin_x0:.4} ({:+.1}%); bl {} slope {:.3}; {secs:.2}s",
            l.estimate,
            100.0 * (l.estimate - sin_x0) / sin_x0,
            fit.classification.as_str(),
            fit.slope
        ),
    ))
}

/// Grid filter against the closed form.
fn criterion_2() -> filterlab::Result<Verdict> {
    let start = Instant::now();
    let model = StaticGaussianModel::new(0.0, 1.0, 1.0)?;
    let spec = model.spec()?;
    let path = simulate_path(&spec, 100, 42)?;
    let grid = GridSpec::new(-10.0, 0.005, 4001)?;
    let steps = run_grid_filter(&spec, &path.observations, spec.prior(), &grid)?;
    let exact = kalman_static(&model, 0.0, &path.observations_1d())?;
    let (mut dm, mut dv) = (0.0f64, 0.0f64);
    for (g, k) in steps.iter().zip(&exact) {
        let (m, v) = g.filter.moments();
        dm = dm.max((m - k.z).abs());
        dv = dv.max((v - k.v).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(verdict(
        dm < 1e-3 && dv < 1e-3 && secs < 10.0,
        format!("max |mean err| = {dm:.2e}, max |var err| = {dv:.2e}; {secs:.2}s"),
    ))
}

/// BL against Dirac closed forms and a lattice brute force.
fn criterion_3() -> filterlab::Result<Verdict> {
    let mut dirac_err = 0.0f64;
    for t in [0.1, 0.5, 1.0, 2.0, 3.0, 5.0] {
        let d = bl_distance(&DiscreteMeasure::dirac1(0.0), &DiscreteMeasure::dirac1(t))?;
        dirac_err = dirac_err.max((d - t.min(2.0)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut brute_err = 0.0f64;
    for _ in 0..50 {
        let a = common::random_lattice_measure(&mut rng, 4, 0.25, 2.0);
        let b = common::random_lattice_measure(&mut rng, 4, 0.25, 2.0);
        let d = bl_distance(&a, &b)?;
        brute_err = brute_err.max((d - common::bl_lattice_bruteforce(&a, &b, 0.25)).abs());
    }
    Ok(verdict(
        dirac_err <= 1e-9 && brute_err <= 1e-3,
        format!("Dirac max err {dirac_err:.1e}; brute force max err {brute_err:.1e} over 50 pairs"),
    ))
}

/// TV against the Gaussian closed form and kernel TV against quadrature.
fn criterion_4() -> filterlab::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut gauss_err = 0.0f64;
    for _ in 0..20 {
        let (m1, m2, s) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), rng.random_range(0.2..3.0));
        let tv = tv_distance(&Measure::gaussian(m1, s * s)?, &Measure::gaussian(m2, s * s)?)?;
        gauss_err = gauss_err.max((tv - common::tv_same_variance(m1, m2, s)).abs());
    }
    let mut kernel_err = 0.0f64;
    for _ in 0..50 {
        let noise = match rng.random_range(0..3) {
            0 => Noise::gaussian(rng.random_range(0.3..2.0))?,
            1 => Noise::uniform(rng.random_range(0.5..2.0))?,
            _ => Noise::triangular(rng.random_range(0.5..2.0))?,
        };
        let k = if rng.random_bool(0.5) {
            ArKernel::affine(rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0), rng.random_range(0.3..2.0), noise)?
        } else {
            let (a, b) = (rng.random_range(0.2..2.0), rng.random_range(0.0..0.8));
            ArKernel::scalar("nonlinear", move |x: f64| a * x.sin(), move |x: f64| 1.0 + b * x.cos(), noise, 0.2)?
        };
        let (x, xp) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let tv = ar_kernel_tv(&k, &[x], &[xp])?;
        kernel_err = kernel_err.max((tv - common::kernel_tv_quadrature(&k, x, xp)).abs());
    }
    Ok(verdict(
        gauss_err <= 1e-6 && kernel_err <= 1e-4,
        format!("Gaussian max err {gauss_err:.1e} (20 pairs); AR kernel max err {kernel_err:.1e} (50 instances)"),
    ))
}

/// Random walk at low SNR, 20 seeds.
fn criterion_5() -> filterlab::Result<Verdict> {
    let start = Instant::now();
    let p = Preset::ArRandomWalk;
    let (mu, nu) = p.priors();
    let tv0 = tv_distance(&mu, &nu)?;
    // Horizon 201 so that step 200 is recorded.
    let finals: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let mut cfg = TwinRunConfig::new(p.spec()?, mu.clone(), nu.clone(), 201, seed, Method::Grid(p.default_grid()));
            cfg.distances = Distances { bl: false, tv: true };
            Ok(twin_run(&cfg)?.last().unwrap().tv.unwrap())
        })
        .collect::<filterlab::Result<_>>()?;
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    Ok(verdict(
        mean < 0.1 * tv0 && secs < 120.0,
        format!("mean tv_200 = {mean:.2e} vs 0.1·tv(μ,ν) = {:.4}; {secs:.1}s", 0.1 * tv0),
    ))
}

/// Blind channel: no forgetting.
fn criterion_6() -> filterlab::Result<Verdict> {
    let p = Preset::CounterexampleBlind;
    let (mu, nu) = p.priors();
    let trace = twin_run(&TwinRunConfig::new(p.spec()?, mu.clone(), nu.clone(), 100, 1, Method::Grid(p.default_grid())))?;
    let tv = trace.tv();
    let drift = tv.iter().fold(0.0f64, |m, v| m.max((v - tv[0]).abs()));
    let exact = tv_distance(&mu, &nu)?;
    let disc = (tv[0] - exact).abs();
    Ok(verdict(
        drift <= 1e-9 && disc <= 1e-4,
        format!(
            "max |tv_n − tv_0| = {drift:.1e}; grid tv_0 = {:.6} vs closed form {exact:.6} (discretization {disc:.1e})",
            tv[0]
        ),
    ))
}

/// Coupling inequality, filter-vs-predictor bound, kernel modulus.
fn criterion_7() -> filterlab::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let y = common::y_grid();
    let mut coupling_pass = 0;
    for _ in 0..200 {
        let rho = common::random_measure(&mut rng, 4, 3.0);
        let rho_p = common::random_measure(&mut rng, 4, 3.0);
        let c = common::random_coupling(&mut rng, &rho, &rho_p);
        let ch = ObservationChannel::linear(rng.random_range(0.5..2.0), Noise::gaussian(rng.random_range(0.5..2.0))?)?;
        coupling_pass += check_coupling_bound(&rho, &rho_p, &c, &ch, &y)?.pass as usize;
    }

    let instances: Vec<(Preset, f64, f64, f64, usize, u64)> = (0..20)
        .map(|i| {
            let p = if i % 2 == 0 { Preset::ArContracting } else { Preset::ArRandomWalk };
            (p, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(0.5..2.0), rng.random_range(1..=5), i)
        })
        .collect();
    let predictor_pass: usize = instances
        .par_iter()
        .map(|&(p, m1, m2, var, n, seed)| {
            let grid = match p {
                Preset::ArRandomWalk => GridSpec::new(-50.0, 0.1, 1001)?,
                _ => GridSpec::new(-15.0, 0.05, 601)?,
            };
            let (mu, nu) = (Measure::gaussian(m1, var)?, Measure::gaussian(m2, var)?);
            Ok(filter_predictor_tv_check(&p.spec()?, &mu, &nu, n, 1000, seed, &grid)?.pass as usize)
        })
        .collect::<filterlab::Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let spec = Preset::ArRandomWalk.spec()?;
    let kernel = spec.kernel().as_ar().unwrap();
    // 0.001·2⁻¹⁰ … 0.001, ascending.
    let deltas: Vec<f64> = (0..=10).rev().map(|i| 0.001 * 2f64.powi(-i)).collect();
    let curve = kernel_tv_modulus(kernel, &deltas, 16, 0)?;
    let at_001 = *curve.values.last().unwrap();
    let monotone = curve.values.windows(2).all(|w| w[0] <= w[1] + 1e-12);
    Ok(verdict(
        coupling_pass == 200 && predictor_pass == 20 && at_001 < 0.01 && monotone,
        format!(
            "coupling {coupling_pass}/200; filter-vs-predictor {predictor_pass}/20; ϖ̂(0.001) = {at_001:.2e}, nonincreasing under halving: {monotone}"
        ),
    ))
}

/// Assumption checkers.
fn criterion_8() -> filterlab::Result<Verdict> {
    let g = char_fn_min(&DensityFn::gaussian(1.0)?, 10.0, 2001)?.pass;
    let u = char_fn_min(&DensityFn::uniform(1.0)?, 10.0, 2001)?.pass;
    let t = char_fn_min(&DensityFn::triangular(1.0)?, 10.0, 2001)?.pass;
    let blind = assumption_report(&Preset::CounterexampleBlind.spec()?);
    let inv = blind.iter().find(|r| r.name == "h_inverse_roundtrip").map(|r| r.pass).unwrap_or(true);
    Ok(verdict(
        g && !u && !t && !inv,
        format!("gaussian pass={g}, uniform pass={u}, triangular pass={t}, blind inverse pass={inv}"),
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("static-Gaussian rate and liminf constant", criterion_1),
        ("grid filter vs closed-form Kalman", criterion_2),
        ("BL oracles", criterion_3),
        ("TV oracles", criterion_4),
        ("TV stability at low SNR", criterion_5),
        ("blind channel never forgets", criterion_6),
        ("inequality suites and kernel modulus", criterion_7),
        ("assumption checkers", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        failed += !v.pass as usize;
        println!("criterion {}: {} [{name}] {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
