//! Closed-form and grid-quadrature oracles, with frozen expected values.

use std::f64::consts::PI;

use fraclab::fields::Field;
use fraclab::functionals::{
    frac_seminorm_restricted, grid_oracle_seminorm, inf_lq_norm, restricted_integral, FracParams,
};
use fraclab::geometry::{Domain, DomainSpec, Point, Region};
use fraclab::mc::McConfig;

fn cube() -> Domain {
    Domain::new(DomainSpec::unit_cube(2)).unwrap()
}

#[test]
fn coordinate_seminorm_on_square_is_pi_over_12() {
    // ∫ d(x) dx = 1/6 on the square; the inner angular integral gives π d / 2
    let est = restricted_integral(
        &Field::Coordinate(0),
        &Region::whole(&cube()),
        &FracParams::default(),
        &McConfig::new(400_000, 11),
    )
    .unwrap();
    assert!((est.value - PI / 12.0).abs() < 3.0 * est.std_error, "{est:?}");
    assert!(est.std_error / est.value < 0.01);
}

#[test]
fn seminorm_is_the_root_of_the_integral() {
    let mc = McConfig::new(100_000, 5);
    let f = Field::Coordinate(1);
    let params = FracParams::default();
    let root = frac_seminorm_restricted(&f, &cube(), &params, &mc).unwrap();
    let integral = restricted_integral(&f, &Region::whole(&cube()), &params, &mc).unwrap();
    assert!((root.value - integral.value.sqrt()).abs() < 1e-12);
}

#[test]
fn coordinate_norms_on_square() {
    let mc = McConfig::new(400_000, 2);
    let l2 = inf_lq_norm(&Field::Coordinate(0), &cube(), 2.0, 0.0, &mc).unwrap();
    assert!((l2.c_star - 0.5).abs() < 0.01);
    assert!((l2.value.value - (1.0f64 / 12.0).sqrt()).abs() < 3.0 * l2.value.std_error + 1e-3);
    let l1 = inf_lq_norm(&Field::Coordinate(0), &cube(), 1.0, 0.0, &mc).unwrap();
    assert!((l1.integral.value - 0.25).abs() < 3.0 * l1.integral.std_error + 1e-3);
}

#[test]
fn measures_and_diameters() {
    assert_eq!(cube().measure().value, 1.0);
    assert!((cube().diameter() - 2f64.sqrt()).abs() < 1e-12);
    let ball = Domain::new(DomainSpec::ball(2, 1.0)).unwrap();
    assert!((ball.measure().value - PI).abs() < 1e-12);
    assert_eq!(ball.diameter(), 2.0);
    let cusp = Domain::new(DomainSpec::cusp(0.5)).unwrap();
    assert!((cusp.measure().value - 2.0 / 3.0).abs() < 1e-12);
    // the apex and the far corners (±1, 1) bound the diameter below
    assert!(cusp.diameter() >= 2f64.sqrt() - 1e-3);
}

#[test]
fn cusp_samples_follow_the_profile() {
    // P(x_2 > 1/2) = ∫_{1/2}^1 2t² dt / (2/3) = 7/8
    let cusp = Domain::new(DomainSpec::cusp(0.5)).unwrap();
    let sample = cusp.sample_interior(20_000, 7).unwrap();
    let hits = sample.points.iter().filter(|x| x[1] > 0.5).count() as f64;
    let frac = hits / 20_000.0;
    let se = (0.875f64 * 0.125 / 20_000.0).sqrt();
    assert!((frac - 0.875).abs() < 3.0 * se, "{frac}");
}

#[test]
fn cusp_power_values() {
    assert_eq!(Field::CuspPower { nu: 1.0 }.eval(&[0.0, 0.5]), 2.0);
    assert_eq!(Field::Constant(3.0).eval(Point::xy(0.2, 0.2).coords()), 3.0);
}

#[test]
fn oracle_brackets_tighten_under_refinement() {
    let f = Field::Coordinate(0);
    let params = FracParams::default();
    let brackets: Vec<_> = [50, 100, 200]
        .iter()
        .map(|&m| grid_oracle_seminorm(&f, &cube(), &params, m).unwrap())
        .collect();
    for b in &brackets {
        assert!(b.lower_integral <= PI / 12.0 && PI / 12.0 <= b.upper_integral, "{b:?}");
    }
    let widths: Vec<f64> = brackets.iter().map(|b| b.upper_integral - b.lower_integral).collect();
    assert!(widths[1] < widths[0] && widths[2] < widths[1], "{widths:?}");
    let mids: Vec<f64> = brackets.iter().map(|b| b.midpoint()).collect();
    assert!((mids[2] - mids[1]).abs() < (mids[1] - mids[0]).abs() + 1e-4, "{mids:?}");
}

#[test]
fn mc_agrees_with_the_oracle() {
    let f = Field::Sine {
        axis: 1,
        wavenumber: 2.0,
    };
    let params = FracParams::default();
    let bracket = grid_oracle_seminorm(&f, &cube(), &params, 100).unwrap();
    let est = frac_seminorm_restricted(&f, &cube(), &params, &McConfig::new(200_000, 4)).unwrap();
    assert!(bracket.contains(est.value, 0.02), "{bracket:?} vs {est:?}");
}

#[test]
fn oracle_rejects_a_jump() {
    let step = Field::Step {
        axis: 0,
        threshold: 0.5,
        low: 0.0,
        high: 1.0,
    };
    let r = grid_oracle_seminorm(&step, &cube(), &FracParams::default(), 50);
    assert!(matches!(r, Err(fraclab::Error::NotLipschitz)), "{r:?}");
    // the Monte Carlo estimator still handles it, with no core bound
    let est = frac_seminorm_restricted(&step, &cube(), &FracParams::default(), &McConfig::new(20_000, 1)).unwrap();
    assert!(est.value > 0.0 && est.flags.core_bound.is_none());
}
