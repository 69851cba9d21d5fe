use switchheat::closed_form::{self, Params};
use switchheat::hybrid::{PullbackOptions, Target, Variant};
use switchheat::spectral::{coefficient_pair, make_flow_pair, zero_state, Basis, BasisKind, Example, ModelParams, SpectralField};
use switchheat::switching::{Environment, SwitchLaw};
use switchheat::verify::{self, FdOracle, Statistic, TestFunction};
use switchheat::Error;

fn params(modes: usize) -> ModelParams {
    ModelParams {
        modes,
        ..ModelParams::default()
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn dd_oracles_agree_pairwise() {
    let pairs = vec![(0.35, 0.2), (0.15, 0.4), (0.3, 0.25)];
    let horizon: f64 = pairs.iter().map(|(a, b)| a + b).sum();
    let small = params(16);

    let mut env = Environment::from_pairs(pairs.clone()).unwrap();
    let spectral = make_flow_pair(Example::Dd, &small)
        .unwrap()
        .forward_orbit(&mut env, &zero_state(Example::Dd, &small).unwrap(), 3, Variant::Phi)
        .unwrap();
    let ode = verify::ode_orbit(&small, &mut env, &[0.0; 16], 3, 1e-4).unwrap();
    assert!(max_gap(spectral.coeffs(), &ode) < 1e-8);

    // Project the finite-difference profile onto the same 16 modes.
    let fd = FdOracle::new(Example::Dd, &small, 1024, 2.5e-4).unwrap();
    let profile = fd.solve(&mut env, &vec![0.0; 1025], horizon).unwrap();
    let basis = Basis::new(BasisKind::DirichletDirichlet, 1.0, 1.0, 16).unwrap();
    let projected = SpectralField::from_grid_samples(basis, &profile).unwrap();
    assert!(max_gap(projected.coeffs(), spectral.coeffs()) < 1e-4);
    assert!(max_gap(projected.coeffs(), &ode) < 1e-4);
}

#[test]
fn fd_reaches_the_ramp_under_constant_dirichlet_data() {
    let p = params(16);
    let mut env = Environment::from_pairs(vec![(50.0, 1.0)]).unwrap();
    for (n, tol) in [(16usize, 1e-9), (64, 1e-9)] {
        let fd = FdOracle::new(Example::Dn, &p, n, 1e-2).unwrap();
        let u = fd.solve(&mut env, &vec![0.0; n + 1], 20.0).unwrap();
        for (x, v) in fd.nodes().iter().zip(&u) {
            assert!((v - x).abs() < tol);
        }
    }
}

#[test]
fn dn_invariance_at_the_midpoint_and_its_power() {
    let opts = PullbackOptions::default();
    let (a, b) = verify::invariance_statistics(
        Example::Dn,
        &params(32),
        Target::Y0,
        Statistic::Value(0.5),
        2000,
        41,
        &opts,
    )
    .unwrap();
    assert!(verify::ks_two_sample(&a, &b, 0.01).unwrap().pass);
    let shifted: Vec<f64> = b.iter().map(|v| v + 0.1).collect();
    assert!(!verify::ks_two_sample(&a, &shifted, 0.01).unwrap().pass);
}

#[test]
fn variance_truncation_is_within_the_analytic_tail() {
    let opts = PullbackOptions::default();
    let coarse = verify::estimate_l2_variance(&params(16), 20_000, 5, &opts).unwrap();
    let fine = verify::estimate_l2_variance(&params(64), 20_000, 5, &opts).unwrap();
    let cf = Params::default();
    let total = closed_form::dd_l2_variance(&cf).unwrap();
    let head: f64 = (1..=16).map(|k| closed_form::dd_mode_variance(&cf, k).unwrap()).sum();
    let tail = total - head;
    let diff = fine.estimate - coarse.estimate;
    assert!(diff > 0.0 && diff < tail, "diff {diff}, tail {tail}");
}

#[test]
fn beta_marginal_of_a_higher_mode() {
    let r = verify::ks_beta_marginal(&params(16), 3, Target::Y1, 5000, 0.01, 17, &PullbackOptions::default()).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn sandwich_holds_for_scalar_orbits_up_to_rounding() {
    let p = params(4);
    let cf = Params::default();
    let law = p.law().unwrap();
    let opts = PullbackOptions::default();
    for i in 0..500 {
        let mut env = Environment::sample(&law, i, 0);
        let y = make_flow_pair(Example::Dd, &p)
            .unwrap()
            .pullback_sample(&mut env, &zero_state(Example::Dd, &p).unwrap(), Target::Y1, &opts)
            .unwrap();
        let depth = y.depth;
        let coeffs: Vec<f64> = (1..=4)
            .map(|k| {
                coefficient_pair(&p, k)
                    .unwrap()
                    .backward_orbit(&mut env, &0.0, depth, Variant::Phi)
                    .unwrap()
            })
            .collect();
        // Bounds are met with equality on some paths; allow a few ulps.
        assert!(verify::sandwich_holds(&cf, &coeffs, &[(1, 2), (1, 3), (2, 4)], 1e-12).unwrap());
    }
}

#[test]
fn occupancy_under_unequal_rates() {
    let law = SwitchLaw::exponential(2.0, 1.0).unwrap();
    let r = verify::age_distribution_test(&law, 40.0, 5000, 0.01, 3).unwrap();
    assert!((r.occupancy.target - 2.0 / 3.0).abs() < 1e-15);
    assert!(r.occupancy.z.abs() < 4.0);
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let opts = PullbackOptions::default();
    let run = || verify::estimate_mean_field(Example::Dn, &params(16), 500, 16, 77, &opts).unwrap();
    let a = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let b = pool.install(run);
    assert_eq!(a.points, b.points);
    assert_eq!(a.slope, b.slope);
}

#[test]
fn frequent_nonconvergence_fails_the_run() {
    let opts = PullbackOptions {
        tol: 1e-300,
        max_depth: 2,
    };
    let err = verify::joint_moment_mc(&params(8), &[(1, 2)], 200, 1, &opts).unwrap_err();
    assert!(matches!(err, Error::NonConvergence { .. }));
}

#[test]
fn stationary_weak_residual_of_the_null_field() {
    let p = ModelParams { b: 0.0, ..params(16) };
    let bump = TestFunction::cubic_bump(1.0, 256);
    let r = verify::stationary_weak_residual(Example::Dd, &p, 200, 1, &PullbackOptions::default(), &bump).unwrap();
    assert_eq!(r.estimate, 0.0);
    assert!(r.pass);
}

#[test]
fn joint_moment_is_symmetric_and_checked_by_mc() {
    let cf = Params::default();
    let a = closed_form::dd_joint_second_moment(&cf, 1, 2).unwrap();
    let b = closed_form::dd_joint_second_moment(&cf, 2, 1).unwrap();
    assert!((a - b).abs() <= 1e-14 * a.abs());
    let r = verify::joint_moment_mc(&params(16), &[(1, 2)], 20_000, 8, &PullbackOptions::default()).unwrap();
    assert!(r[0].z.abs() < 4.0, "{:?}", r[0]);
}
