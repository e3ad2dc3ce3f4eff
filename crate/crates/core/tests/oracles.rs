//! Closed-form and quadrature oracles, computed independently of the library
//! code paths they check.

mod common;

use common::{bisect, erlang, gamma, gaussian, jump_diffusion, linspace, rel_err, simpson, standard};
use spdiv::dividend::DividendProblem;
use spdiv::fluctuation::{self, ExitCorridor};
use spdiv::{Backend, BackendChoice, Error, InversionMethod, JumpSpec, LevyModel, ScaleSet};

const Q: f64 = 0.1;

// ---- Laplace exponent, mean, Phi ----

#[test]
fn exponential_psi_matches_quadrature_of_jump_integral() {
    let m = standard();
    assert_eq!(m.laplace_exponent(0.0).unwrap(), 0.0);
    assert!(m.laplace_exponent(1.0).unwrap().abs() < 1e-15);
    for theta in [0.3, 1.0, 2.5, 7.0] {
        // c theta + int_0^inf (e^{-theta x} - 1) 2 e^{-x} dx
        let jump = simpson(|x| ((-theta * x).exp() - 1.0) * 2.0 * (-x).exp(), 0.0, 60.0, 60_000);
        let want = theta + jump;
        assert!((m.laplace_exponent(theta).unwrap() - want).abs() < 1e-10, "theta = {theta}");
    }
}

#[test]
fn gaussian_psi_is_quadratic() {
    let m = LevyModel::new_general(0.0, 2f64.sqrt(), JumpSpec::NoJumps).unwrap();
    assert!((m.laplace_exponent(3.0).unwrap() - 9.0).abs() < 1e-13);
}

#[test]
fn negative_theta_is_a_domain_error() {
    assert!(matches!(standard().laplace_exponent(-0.1), Err(Error::Domain(_))));
}

#[test]
fn means_match_family_formulas_and_finite_differences() {
    assert!((standard().mean() - 1.0).abs() < 1e-15);
    assert!((jump_diffusion().mean() - 0.5).abs() < 1e-15);
    for m in [standard(), jump_diffusion(), gaussian(), erlang(), gamma()] {
        let h = 1e-5;
        // Psi is analytic at 0 for these families; extend by the same formula
        // through a one-sided Richardson difference
        let d1 = (m.laplace_exponent(h).unwrap() - 0.0) / h;
        let d2 = (m.laplace_exponent(2.0 * h).unwrap() - 0.0) / (2.0 * h);
        let fd = 2.0 * d1 - d2;
        assert!(rel_err(-fd, m.mean()) < 1e-6, "{m:?}: {fd}");
    }
}

#[test]
fn drift_only_gaussian_with_negative_mean_is_rejected() {
    let err = LevyModel::new(0.5, 1.0, JumpSpec::NoJumps).unwrap_err();
    assert!(matches!(err, Error::InvalidModel(_)));
}

#[test]
fn phi_of_exponential_model_is_the_quadratic_root() {
    let m = standard();
    for q in [0.0f64, 0.1, 1.0, 10.0] {
        let want = ((1.0 + q) + ((1.0 + q) * (1.0 + q) + 4.0 * q).sqrt()) / 2.0;
        assert!((m.phi(q).unwrap() - want).abs() < 1e-12, "q = {q}");
    }
    assert!((m.phi(0.1).unwrap() - 1.184429).abs() < 1e-6);
}

#[test]
fn phi_inverts_psi_on_a_log_grid() {
    for m in [standard(), jump_diffusion(), gaussian(), erlang(), gamma()] {
        let mut prev = 0.0;
        for k in 0..=24 {
            let q = 1e-4 * 10f64.powf(k as f64 / 4.0);
            let phi = m.phi(q).unwrap();
            assert!(rel_err(m.laplace_exponent(phi).unwrap(), q) < 1e-10, "{m:?} q = {q}");
            assert!(phi > prev);
            prev = phi;
        }
    }
}

#[test]
fn bounded_variation_flag_follows_sigma() {
    assert!(standard().bounded_variation());
    assert!(erlang().bounded_variation());
    assert!(gamma().bounded_variation());
    assert!(!jump_diffusion().bounded_variation());
    assert!(!gaussian().bounded_variation());
}

#[test]
fn model_json_round_trip_uses_fixed_field_names() {
    let text = r#"{"drift": 1.0, "sigma": 0.0, "jumps": {"family": "exp_cp", "lambda": 2.0, "mu": 1.0}}"#;
    let m: LevyModel = serde_json::from_str(text).unwrap();
    assert_eq!(m, standard());
    let back: LevyModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}

// ---- scale functions ----

fn exp_w(x: f64, q: f64) -> f64 {
    // roots of theta^2 - (1 + q) theta - q
    let disc = ((1.0 + q) * (1.0 + q) + 4.0 * q).sqrt();
    let (tp, tm) = (((1.0 + q) + disc) / 2.0, ((1.0 + q) - disc) / 2.0);
    ((1.0 + tp) * (tp * x).exp() - (1.0 + tm) * (tm * x).exp()) / (tp - tm)
}

#[test]
fn exponential_w_matches_two_root_formula() {
    let s = ScaleSet::build(&standard(), Q, 20.0, 101).unwrap();
    assert_eq!(s.backend(), Backend::RationalClosedForm);
    for x in linspace(0.0, 20.0, 81) {
        assert!(rel_err(s.w(x).unwrap(), exp_w(x, Q)) < 1e-12, "x = {x}");
    }
}

fn laplace_identity(s: &ScaleSet, x_max: f64, panels: usize) -> f64 {
    let m = s.model();
    let phi = s.phi();
    let mut worst: f64 = 0.0;
    for k in [1.0, 2.0, 5.0] {
        let theta = phi + k;
        let want = 1.0 / (m.laplace_exponent(theta).unwrap() - s.q());
        // x = t^2 on [0, 1e-2] where W may have an unbounded slope
        let head = simpson(|t| 2.0 * t * (-theta * t * t).exp() * s.w(t * t).unwrap(), 0.0, 0.1, 4_000);
        let body = simpson(|x| (-theta * x).exp() * s.w(x).unwrap(), 1e-2, x_max, panels);
        let tail = (-k * x_max).exp() / (k * m.laplace_exponent_prime(phi));
        assert!(tail < 1e-8 * want);
        worst = worst.max(rel_err(head + body, want));
    }
    worst
}

#[test]
fn laplace_identity_holds_for_every_family() {
    for m in [standard(), jump_diffusion(), gaussian(), erlang(), gamma()] {
        let s = ScaleSet::build(&m, Q, 30.0, 3001).unwrap();
        let err = laplace_identity(&s, 30.0, 60_000);
        assert!(err < 1e-6, "{m:?}: {err:.2e}");
    }
}

#[test]
fn erlang_closed_form_agrees_with_inversion() {
    let m = erlang();
    let closed = ScaleSet::build(&m, Q, 10.0, 1001).unwrap();
    let numeric = ScaleSet::build_with(&m, Q, 10.0, 1001, BackendChoice::Numeric(InversionMethod::default())).unwrap();
    assert_eq!(closed.backend(), Backend::RationalClosedForm);
    for x in linspace(0.1, 10.0, 200) {
        assert!(rel_err(numeric.w(x).unwrap(), closed.w(x).unwrap()) < 1e-6, "x = {x}");
        assert!(rel_err(numeric.z_bar(x).unwrap(), closed.z_bar(x).unwrap()) < 1e-6, "x = {x}");
    }
}

#[test]
fn stehfest_cross_check_agrees_with_talbot() {
    let m = gamma();
    let talbot = ScaleSet::build(&m, Q, 8.0, 401).unwrap();
    let stehfest = ScaleSet::build_with(
        &m,
        Q,
        8.0,
        401,
        BackendChoice::Numeric(InversionMethod::GaverStehfest { order: 14 }),
    )
    .unwrap();
    for x in linspace(0.05, 8.0, 60) {
        assert!(rel_err(stehfest.w(x).unwrap(), talbot.w(x).unwrap()) < 1e-4, "x = {x}");
    }
}

#[test]
fn initial_values() {
    let s = ScaleSet::build(&standard(), Q, 10.0, 11).unwrap();
    assert!((s.w(0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((s.w_prime(1e-9).unwrap() - 2.1).abs() < 1e-8);
    let bm = LevyModel::new_general(0.0, 2f64.sqrt(), JumpSpec::NoJumps).unwrap();
    for q in [0.05, 1.0] {
        let s = ScaleSet::build(&bm, q, 10.0, 11).unwrap();
        assert_eq!(s.w(0.0).unwrap(), 0.0);
        assert!((s.w_prime(1e-9).unwrap() - 1.0).abs() < 1e-8);
    }
    let s = ScaleSet::build(&gamma(), Q, 10.0, 501).unwrap();
    assert!((s.w(0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(s.w_prime_zero().is_infinite());
    assert!(s.w_prime(1e-6).unwrap() > s.w_prime(1e-3).unwrap());
}

#[test]
fn left_of_zero_conventions() {
    for s in [
        ScaleSet::build(&standard(), Q, 10.0, 11).unwrap(),
        ScaleSet::build(&gamma(), Q, 10.0, 101).unwrap(),
    ] {
        assert_eq!(s.w(-3.7).unwrap(), 0.0);
        assert_eq!(s.z(-3.7).unwrap(), 1.0);
        assert_eq!(s.z_bar(-3.7).unwrap(), -3.7);
        assert_eq!(s.w_bar(-3.7).unwrap(), 0.0);
        for &x in s.grid() {
            let d = s.z(x).unwrap() - 1.0 - Q * s.w_bar(x).unwrap();
            assert!(d.abs() < 1e-12 * s.z(x).unwrap(), "x = {x}");
        }
    }
}

#[test]
fn closed_form_derivative_matches_central_difference() {
    for m in [standard(), jump_diffusion(), erlang()] {
        let s = ScaleSet::build(&m, Q, 10.0, 11).unwrap();
        for x in [0.3, 1.0, 4.0] {
            let h = 1e-5;
            let fd = (s.w(x + h).unwrap() - s.w(x - h).unwrap()) / (2.0 * h);
            let d = s.w_prime(x).unwrap();
            assert!((fd - d).abs() < 1e-8 * d.max(1.0), "{m:?} x = {x}: {fd} vs {d}");
        }
    }
}

#[test]
fn w_bar_and_z_bar_are_antiderivatives() {
    for m in [jump_diffusion(), gamma()] {
        let s = ScaleSet::build(&m, Q, 6.0, 601).unwrap();
        for x in [0.5, 2.0, 5.5] {
            let wbar = simpson(|t| s.w(t).unwrap(), 1e-9, x, 20_000);
            assert!(rel_err(s.w_bar(x).unwrap(), wbar) < 1e-6, "{m:?} x = {x}");
            let zbar = simpson(|t| s.z(t).unwrap(), 0.0, x, 20_000);
            assert!(rel_err(s.z_bar(x).unwrap(), zbar) < 1e-8, "{m:?} x = {x}");
        }
    }
}

#[test]
fn numeric_backend_refuses_queries_beyond_the_grid() {
    let s = ScaleSet::build(&gamma(), Q, 5.0, 51).unwrap();
    assert!(matches!(s.w(5.5), Err(Error::OutOfGrid { .. })));
}

// ---- exit identities ----

#[test]
fn exit_limits_at_the_corridor_ends() {
    let s = ScaleSet::build(&jump_diffusion(), Q, 10.0, 11).unwrap();
    let near_a = ExitCorridor::new(0.0, 5.0, 1e-10, Q).unwrap();
    assert!((fluctuation::exit_down(&s, &near_a).unwrap() - 1.0).abs() < 1e-8);
    assert!(fluctuation::exit_up(&s, &near_a).unwrap().abs() < 1e-8);
    let near_b = ExitCorridor::new(0.0, 5.0, 5.0 - 1e-10, Q).unwrap();
    assert!(fluctuation::exit_down(&s, &near_b).unwrap() < 1e-8);
    assert!((fluctuation::exit_up(&s, &near_b).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn gaussian_creeps_whenever_it_exits_up() {
    let s = ScaleSet::build(&gaussian(), Q, 10.0, 11).unwrap();
    for x in [0.5, 2.0, 3.9] {
        let c = ExitCorridor::new(0.0, 4.0, x, Q).unwrap();
        let up = fluctuation::exit_up(&s, &c).unwrap();
        let creep = fluctuation::creep_up(&s, &c).unwrap();
        assert!((up - creep).abs() < 1e-8, "x = {x}: {up} vs {creep}");
    }
}

#[test]
fn overshoot_mass_is_exit_up_minus_creep() {
    let s = ScaleSet::build(&jump_diffusion(), Q, 10.0, 11).unwrap();
    for x in [0.5, 2.0, 4.5] {
        let c = ExitCorridor::new(0.0, 5.0, x, Q).unwrap();
        let mass = fluctuation::overshoot_mass(&s, &c).unwrap().value;
        let want = fluctuation::exit_up(&s, &c).unwrap() - fluctuation::creep_up(&s, &c).unwrap();
        assert!((mass - want).abs() < 1e-5, "x = {x}: {mass} vs {want}");
        assert!(fluctuation::creep_up(&s, &c).unwrap() < fluctuation::exit_up(&s, &c).unwrap());
    }
    // gamma jumps, numeric scale functions, no creeping
    let s = ScaleSet::build(&gamma(), Q, 10.0, 1001).unwrap();
    let c = ExitCorridor::new(0.0, 4.0, 1.5, Q).unwrap();
    let mass = fluctuation::overshoot_mass(&s, &c).unwrap().value;
    assert!((mass - fluctuation::exit_up(&s, &c).unwrap()).abs() < 1e-5);
}

#[test]
fn overshoot_box_is_a_piece_of_the_mass() {
    let s = ScaleSet::build(&standard(), Q, 10.0, 11).unwrap();
    let c = ExitCorridor::new(0.0, 5.0, 2.0, Q).unwrap();
    let whole = fluctuation::overshoot_box(&s, &c, (0.0, 5.0), (5.0, 200.0)).unwrap();
    let mass = fluctuation::overshoot_mass(&s, &c).unwrap().value;
    assert!((whole - mass).abs() < 1e-7);
    // independent 2-D Simpson on one box
    let (y0, y1, z0, z1) = (3.0, 4.0, 5.0, 6.0);
    let direct = simpson(
        |y| simpson(|z| fluctuation::overshoot_density(&s, &c, y, z).unwrap(), z0, z1, 200),
        y0,
        y1,
        200,
    );
    let piece = fluctuation::overshoot_box(&s, &c, (y0, y1), (z0, z1)).unwrap();
    assert!((piece - direct).abs() < 1e-9, "{piece} vs {direct}");
}

#[test]
fn exits_are_complete_as_q_vanishes() {
    for m in [standard(), jump_diffusion()] {
        let q = 1e-6;
        let s = ScaleSet::build(&m, q, 10.0, 11).unwrap();
        let c = ExitCorridor::new(0.0, 5.0, 2.0, q).unwrap();
        let total = fluctuation::exit_down(&s, &c).unwrap() + fluctuation::exit_up(&s, &c).unwrap();
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }
}

#[test]
fn ruin_transform_ends() {
    let s = ScaleSet::build(&standard(), Q, 10.0, 11).unwrap();
    assert_eq!(fluctuation::ruin_laplace(&s, 4.0, 0.0).unwrap(), 1.0);
    let at_b = fluctuation::ruin_laplace(&s, 4.0, 4.0).unwrap();
    assert!((at_b - 1.0 / s.z(4.0).unwrap()).abs() < 1e-15);
    assert!(matches!(fluctuation::ruin_laplace(&s, 4.0, -0.1), Err(Error::Domain(_))));
}

// ---- dividends ----

#[test]
fn lambda_at_zero_barrier() {
    let p = DividendProblem::new(&standard(), Q, 0.7).unwrap();
    assert!((p.lambda_coeff(0.0).unwrap() - (0.7 - 10.0)).abs() < 1e-12);
}

#[test]
fn lambda_from_two_root_formula() {
    // Zbar and Z at b = 1 straight from the two-root W
    let p = DividendProblem::new(&standard(), Q, 0.0).unwrap();
    let wbar = |x: f64| simpson(|t| exp_w(t, Q), 0.0, x, 2_000);
    let z = 1.0 + Q * wbar(1.0);
    let zbar = 1.0 + Q * simpson(wbar, 0.0, 1.0, 400);
    let want = (zbar - 10.0) / z;
    assert!((p.lambda_coeff(1.0).unwrap() - want).abs() < 1e-9);
}

#[test]
fn optimal_barrier_solves_zbar_equation() {
    let p = DividendProblem::new(&standard(), Q, 0.0).unwrap();
    let b = p.optimal_barrier();
    let s = p.scale();
    let want = bisect(|b| s.z_bar(b).unwrap() - 10.0, 0.0, 10.0);
    assert!((b - want).abs() < 1e-10);
    assert!(p.lambda_coeff(b).unwrap().abs() < 1e-10);
    assert!((p.barrier_value_derivative(b, b).unwrap() - 1.0).abs() < 1e-9);
    for x in linspace(0.01, b, 30) {
        let d = p.value_function_derivative(x).unwrap();
        assert!((d - s.z(b - x).unwrap()).abs() < 1e-12);
        assert!(d >= 1.0);
    }
}

#[test]
fn value_function_agrees_with_barrier_value_at_optimum() {
    for s_term in [-2.0, 0.0, 1.0] {
        let p = DividendProblem::new(&jump_diffusion(), Q, s_term).unwrap();
        let b = p.optimal_barrier();
        for x in linspace(0.0, 2.0 * b, 41) {
            let v = p.value_function(x).unwrap();
            assert!((v - p.barrier_value(b, x).unwrap()).abs() < 1e-10, "S = {s_term} x = {x}");
        }
        let x = b + 1.5;
        assert!((p.value_function(x).unwrap() - (x - b + p.mean() / Q)).abs() < 1e-12);
    }
}

#[test]
fn barrier_value_is_continuous_with_unit_slope_above() {
    let p = DividendProblem::new(&jump_diffusion(), Q, -1.0).unwrap();
    for b in [0.5, 2.0, 5.0] {
        let at = p.barrier_value(b, b).unwrap();
        let above = p.barrier_value(b, b + 1e-9).unwrap();
        assert!((above - at).abs() < 1e-8);
        assert!((at - (p.lambda_coeff(b).unwrap() + p.mean() / Q)).abs() < 1e-12);
        // unbounded variation: V_b'(b) = 1 for every b
        assert!((p.barrier_value_derivative(b, b).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn derivative_matches_finite_difference_of_value() {
    for m in [standard(), jump_diffusion(), gamma()] {
        let p = DividendProblem::new(&m, Q, 0.5).unwrap();
        let b = 3.0;
        for x in [0.4, 1.5, 2.6] {
            let h = 1e-5;
            let fd = (p.barrier_value(b, x + h).unwrap() - p.barrier_value(b, x - h).unwrap()) / (2.0 * h);
            let d = p.barrier_value_derivative(b, x).unwrap();
            assert!((fd - d).abs() < 1e-7 * d.abs().max(1.0), "{m:?} x = {x}: {fd} vs {d}");
        }
    }
}

#[test]
fn generator_residual_vanishes_for_gaussian_model() {
    let p = DividendProblem::new(&gaussian(), Q, 0.0).unwrap();
    for b in [p.optimal_barrier(), 1.0, 4.0] {
        for i in 1..20 {
            let x = b * i as f64 / 20.0;
            let r = p.generator_residual(b, x).unwrap();
            assert!(r.abs() < 1e-8, "b = {b} x = {x}: {r}");
        }
    }
}

#[test]
fn generator_residual_vanishes_with_jumps_and_any_terminal_value() {
    for m in [jump_diffusion(), erlang()] {
        for s_term in [0.0, -2.0, 1.0] {
            let p = DividendProblem::new(&m, Q, s_term).unwrap();
            let b = 3.0;
            for i in 1..20 {
                let x = b * i as f64 / 20.0;
                let r = p.generator_residual(b, x).unwrap();
                let v = p.barrier_value(b, x).unwrap();
                assert!(r.abs() / (Q * v.abs()) < 1e-6, "{m:?} S = {s_term} x = {x}: {r}");
            }
        }
    }
}

#[test]
fn boundary_value_at_zero_is_terminal_value() {
    for s_term in [0.0, -2.0, 1.0] {
        let p = DividendProblem::new(&jump_diffusion(), Q, s_term).unwrap();
        for b in [0.0, 1.0, 3.0] {
            assert!((p.barrier_value(b, 0.0).unwrap() - s_term).abs() < 1e-10);
        }
    }
}

#[test]
fn terminal_value_beyond_target_pays_everything() {
    let m = standard();
    let p = DividendProblem::new(&m, Q, 10.0).unwrap();
    assert_eq!(p.optimal_barrier(), 0.0);
    for x in [0.0, 0.3, 7.0] {
        assert_eq!(p.value_function(x).unwrap(), x + 10.0);
    }
}

#[test]
fn dividend_problem_rejects_models_without_positive_mean() {
    let m = LevyModel::new_general(0.0, 1.0, JumpSpec::NoJumps).unwrap();
    assert!(matches!(DividendProblem::new(&m, Q, 0.0), Err(Error::InvalidModel(_))));
}
