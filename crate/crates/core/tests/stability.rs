mod common;

use filterlab::measures::{DiscreteMeasure, GridSpec, Measure};
use filterlab::models::{Noise, ObservationChannel, Preset};
use filterlab::stability::{
    check_coupling_bound, estimate_rate, filter_predictor_tv_check, tail_window, twin_run, Method, RateClass,
    StabilityTrace, TwinRunConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_trace_invariants(t: &StabilityTrace) {
    for r in &t.rows {
        let (bl, tv) = (r.bl.unwrap(), r.tv.unwrap());
        assert!(bl >= 0.0 && bl <= tv + 1e-9 && tv <= 2.0 + 1e-12, "step {}: bl {bl} tv {tv}", r.step);
        if let Some(c) = r.cos_lower {
            assert!(c <= bl + 1e-9, "step {}: cos {c} bl {bl}", r.step);
        }
    }
}

#[test]
fn static_gaussian_bl_decays_polynomially() {
    let p = Preset::StaticGaussian;
    let (mu, nu) = p.priors();
    for seed in 1..=10 {
        let t = twin_run(&TwinRunConfig::new(p.spec().unwrap(), mu.clone(), nu.clone(), 2000, seed, Method::KalmanStatic))
            .unwrap();
        assert_trace_invariants(&t);
        assert!(t.last().unwrap().bl.unwrap() < 0.05, "seed {seed}");
        let fit = estimate_rate(&t.bl(), tail_window(2000)).unwrap();
        assert_ne!(fit.classification, RateClass::Exponential, "seed {seed}");
    }
}

#[test]
fn grid_and_particle_traces_satisfy_invariants() {
    let p = Preset::ArContracting;
    let (mu, nu) = p.priors();
    let grid = Method::Grid(p.default_grid());
    let particle = Method::Particle {
        particles: 500,
        tv_grid: p.default_grid(),
    };
    for method in [grid, particle] {
        let t = twin_run(&TwinRunConfig::new(p.spec().unwrap(), mu.clone(), nu.clone(), 30, 4, method)).unwrap();
        assert_trace_invariants(&t);
    }
    let s = Preset::StaticGaussian;
    let (mu, nu) = s.priors();
    let t = twin_run(&TwinRunConfig::new(s.spec().unwrap(), mu, nu, 40, 4, Method::Grid(s.default_grid()))).unwrap();
    assert_trace_invariants(&t);
}

#[test]
fn grid_twin_matches_kalman_twin_on_static_model() {
    let s = Preset::StaticGaussian;
    let (mu, nu) = s.priors();
    let g = twin_run(&TwinRunConfig::new(s.spec().unwrap(), mu.clone(), nu.clone(), 50, 9, Method::Grid(s.default_grid())))
        .unwrap();
    let k = twin_run(&TwinRunConfig::new(s.spec().unwrap(), mu, nu, 50, 9, Method::KalmanStatic)).unwrap();
    for (a, b) in g.rows.iter().zip(&k.rows) {
        assert!((a.tv.unwrap() - b.tv.unwrap()).abs() < 1e-3, "step {}", a.step);
        assert!((a.bl.unwrap() - b.bl.unwrap()).abs() < 1e-3, "step {}", a.step);
        assert!((a.cos_lower.unwrap() - b.cos_lower.unwrap()).abs() < 1e-4, "step {}", a.step);
    }
}

#[test]
fn twin_runs_are_deterministic() {
    let p = Preset::ArContracting;
    let (mu, nu) = p.priors();
    let cfg = TwinRunConfig::new(
        p.spec().unwrap(),
        mu,
        nu,
        15,
        8,
        Method::Particle {
            particles: 300,
            tv_grid: p.default_grid(),
        },
    );
    assert_eq!(twin_run(&cfg).unwrap().rows, twin_run(&cfg).unwrap().rows);
}

#[test]
fn observations_from_a_third_prior() {
    let p = Preset::ArContracting;
    let (mu, nu) = p.priors();
    let mut cfg = TwinRunConfig::new(p.spec().unwrap(), mu, nu, 60, 2, Method::Grid(p.default_grid()));
    cfg.observation_prior = Some(Measure::gaussian(5.0, 0.5).unwrap());
    let t = twin_run(&cfg).unwrap();
    assert!(t.initial_state[0] > 1.0);
    assert!(t.last().unwrap().tv.unwrap() < 1e-3);
}

#[test]
fn coupling_bound_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let y = common::y_grid();
    for i in 0..60 {
        let rho = common::random_measure(&mut rng, 4, 3.0);
        let rho_p = common::random_measure(&mut rng, 4, 3.0);
        let c = common::random_coupling(&mut rng, &rho, &rho_p);
        let ch = ObservationChannel::linear(rng.random_range(0.5..2.0), Noise::gaussian(rng.random_range(0.5..2.0)).unwrap())
            .unwrap();
        let r = check_coupling_bound(&rho, &rho_p, &c, &ch, &y).unwrap();
        assert!(r.pass, "instance {i}: {r:?}");
    }
}

#[test]
fn coupling_lhs_vanishes_for_identical_atoms() {
    let r = DiscreteMeasure::on_line(&[-1.0, 2.0], &[0.5, 0.5]).unwrap();
    let ch = ObservationChannel::identity(Noise::uniform(1.0).unwrap());
    let c = check_coupling_bound(&r, &r, &[0.5, 0.0, 0.0, 0.5], &ch, &GridSpec::new(-5.0, 0.01, 1001).unwrap()).unwrap();
    assert!(c.lhs < 1e-9 && c.rhs < 1e-9);
}

#[test]
fn filter_predictor_bound_holds() {
    let p = Preset::ArContracting;
    let grid = GridSpec::new(-12.0, 0.05, 481).unwrap();
    let (mu, nu) = p.priors();
    for n in [1, 3] {
        let c = filter_predictor_tv_check(&p.spec().unwrap(), &mu, &nu, n, 200, 5, &grid).unwrap();
        assert!(c.pass, "{c:?}");
        assert!(c.rhs <= 4.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_laws_are_polynomial(c in 0.1f64..10.0, alpha in 0.3f64..2.0) {
        let d: Vec<f64> = (0..500).map(|n| c * (n.max(1) as f64).powf(-alpha)).collect();
        let fit = estimate_rate(&d, tail_window(d.len())).unwrap();
        prop_assert_eq!(fit.classification, RateClass::Polynomial);
        prop_assert!((fit.slope + alpha).abs() < 1e-6);
    }

    #[test]
    fn geometric_decay_is_exponential(c in 0.1f64..10.0, r in 0.5f64..0.97) {
        let d: Vec<f64> = (0..200).map(|n| c * r.powi(n)).collect();
        let fit = estimate_rate(&d, tail_window(d.len())).unwrap();
        prop_assert_eq!(fit.classification, RateClass::Exponential);
    }
}
