//! Checks shared by the invariant suite and the acceptance runner.
#![allow(dead_code)]

use num_rational::BigRational;

use fraclab::fields::Field;
use fraclab::functionals::{inf_lq_norm, restricted_integral, FracParams};
use fraclab::geometry::{Domain, DomainSpec, Point, Region};
use fraclab::mc::{Estimate, McConfig};
use fraclab::thresholds::{cusp_nu_window, holder_b_sharp, ratio};

/// A measured ratio against its prediction, with the allowed deviation.
#[derive(Debug)]
pub struct Check {
    pub measured: f64,
    pub expected: f64,
    pub allowed: f64,
}

impl Check {
    pub fn ok(&self) -> bool {
        (self.measured - self.expected).abs() <= self.allowed
    }
}

/// `k` standard errors of `a / b`, to first order.
pub fn ratio_check(a: &Estimate, b: &Estimate, expected: f64, k: f64) -> Check {
    let measured = a.value / b.value;
    let rel = (a.std_error / a.value).hypot(b.std_error / b.value);
    Check {
        measured,
        expected,
        allowed: k * rel * measured.abs(),
    }
}

pub fn ball(radius: f64) -> Domain {
    Domain::new(DomainSpec::ball(2, radius)).unwrap()
}

pub fn bump() -> Field {
    Field::GaussianBump {
        center: Point::xy(0.2, -0.1),
        width: 0.5,
    }
}

/// Seminorm^p and norm^q of `f` on the unit ball against `f(·/λ)` on the
/// ball of radius `λ`.
pub fn dilation(lambda: f64, params: &FracParams, mc: &McConfig) -> (Check, Check) {
    let (small, big) = (ball(1.0), ball(lambda));
    let (f, g) = (bump(), bump().dilated(lambda));
    let n = 2.0;
    let semi = |d: &Domain, h: &Field, tag: &str| restricted_integral(h, &Region::whole(d), params, &mc.child(tag)).unwrap();
    let norm = |d: &Domain, h: &Field, tag: &str| inf_lq_norm(h, d, params.q, params.a, &mc.child(tag)).unwrap().integral;
    let semi_check = ratio_check(
        &semi(&big, &g, "semi/big"),
        &semi(&small, &f, "semi/small"),
        lambda.powf(n - params.s * params.p + params.b),
        3.0,
    );
    let norm_check = ratio_check(
        &norm(&big, &g, "norm/big"),
        &norm(&small, &f, "norm/small"),
        lambda.powf(n + params.a),
        3.0,
    );
    (semi_check, norm_check)
}

/// Deterministic stream of rational parameter tuples
/// `(n, alpha, p, q, s, b)` with `1 <= p <= q`.
pub fn rational_tuples(count: usize, seed: u64) -> Vec<(usize, BigRational, BigRational, BigRational, BigRational, BigRational)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            let alpha = ratio(rng.gen_range(1..=12), 12);
            let p = ratio(rng.gen_range(4..=16), 4);
            let q = p.clone() + ratio(rng.gen_range(0..=12), 4);
            let s = ratio(rng.gen_range(1..=11), 12);
            let b = ratio(rng.gen_range(-48..=48), 8);
            (n, alpha, p, q, s, b)
        })
        .collect()
}

/// Whether the ν window is nonempty exactly when `b` exceeds the sharp
/// Hölder threshold.
pub fn window_matches_sharp(
    n: usize,
    alpha: &BigRational,
    p: &BigRational,
    q: &BigRational,
    s: &BigRational,
    b: &BigRational,
) -> bool {
    let sharp = holder_b_sharp(n, p.clone(), q.clone(), alpha.clone(), s.clone())
        .unwrap()
        .value
        .unwrap();
    let window = cusp_nu_window(n, alpha.clone(), p.clone(), q.clone(), s.clone(), b.clone()).unwrap();
    window.is_some() == (*b > sharp)
}

/// Restricted integral of a sine on the square, evaluated inside a rayon
/// pool of `threads` workers.
pub fn pooled_estimate(threads: usize, mc: &McConfig) -> Estimate {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let cube = Domain::new(DomainSpec::unit_cube(2)).unwrap();
    let f = Field::Sine {
        axis: 0,
        wavenumber: 3.0,
    };
    let params = FracParams::new(0.4, 2.0, 2.0, 0.0, 0.5);
    pool.install(|| restricted_integral(&f, &Region::whole(&cube), &params, mc).unwrap())
}
