use super::pairs::RadialLaw;
use super::pow_abs;
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::{sphere_area, unit_direction, Domain, Point};
use crate::mc::{derive_seed, map_chunks, reduce, stream_rng, ChunkTally, Estimate, McConfig, Rng};

/// Inner samples per outer point in [`representation_rhs`].
pub const INNER_BUDGET: usize = 64;

#[allow(clippy::too_many_arguments)]
fn inner_sum(f: &Field, domain: &Domain, x: &[f64], fx: f64, s: f64, p: f64, r_min_rel: f64, rng: &mut Rng) -> f64 {
    let radius = 0.5 * domain.distance(x);
    let law = RadialLaw::new(p - s * p);
    let (r, inv_pdf) = law.sample(rng, r_min_rel * radius, radius);
    let dir = unit_direction(x.len(), rng);
    let w: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + r * d).collect();
    sphere_area(x.len()) * inv_pdf * pow_abs(f.eval(&w) - fx, p) / r.powf(1.0 + s * p)
}

/// `h(x)^p = ∫_{|x-w| <= d(x)/2} |f(w)-f(x)|^p / |w-x|^{n+sp} dw`.
pub fn local_h_integral(f: &Field, domain: &Domain, x: &Point, s: f64, p: f64, mc: &McConfig) -> Result<Estimate> {
    if !domain.contains(x)? {
        return Err(Error::OutsideDomain);
    }
    super::FracParams::new(s, p, p, 0.0, 0.0).validate()?;
    mc.validate()?;
    if f.is_constant() {
        return Ok(Estimate::exact(0.0));
    }
    let fx = f.eval(x);
    let chunks = map_chunks(mc, |_, rng, count| {
        let mut tally = ChunkTally::default();
        for _ in 0..count {
            tally.moments.push(inner_sum(f, domain, x, fx, s, p, mc.r_min_rel, rng));
        }
        tally.hits = count as u64;
        tally
    });
    Ok(reduce(&chunks))
}

/// The local seminorm density `h(x)`.
pub fn local_h(f: &Field, domain: &Domain, x: &Point, s: f64, p: f64, mc: &McConfig) -> Result<Estimate> {
    Ok(local_h_integral(f, domain, x, s, p, mc)?.powf(1.0 / p))
}

/// `∫_{|y-x| <= c1 d(x)} h(x) / |x-y|^{n-s} dx`, estimated with nested sampling.
///
/// Outer points are `x = y + ρ ω` with `ρ` drawn `∝ ρ^(s-1)` on `(0, diam)`,
/// which cancels the kernel exactly; `h(x)` is estimated from
/// [`INNER_BUDGET`] inner draws on a stream keyed by the outer sample index.
/// The outer draws do not depend on `c1`, so for a fixed seed the estimate is
/// monotone in `c1`.
pub fn representation_rhs(
    f: &Field,
    domain: &Domain,
    y: &Point,
    s: f64,
    p: f64,
    c1: f64,
    mc: &McConfig,
) -> Result<Estimate> {
    if !domain.contains(y)? {
        return Err(Error::OutsideDomain);
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::InvalidParams(format!("c1 must be positive, got {c1}")));
    }
    super::FracParams::new(s, p, p, 0.0, 0.0).validate()?;
    mc.validate()?;
    if f.is_constant() {
        return Ok(Estimate::exact(0.0));
    }
    let n = domain.dim();
    let diam = domain.diameter();
    let law = RadialLaw::new(s);
    let weight = sphere_area(n) * diam.powf(s) / s;
    let outer = McConfig {
        n_pairs: (mc.n_pairs / INNER_BUDGET).max(1),
        chunk: (mc.chunk / INNER_BUDGET).max(1),
        ..*mc
    };
    let inner_seed = derive_seed(mc.seed, "representation/inner");
    let chunks = map_chunks(&outer, |k, rng, count| {
        let mut tally = ChunkTally::default();
        for i in 0..count {
            let (rho, _) = law.sample(rng, 0.0, diam);
            let dir = unit_direction(n, rng);
            let x = y.offset(rho, &dir);
            if !domain.inside(&x) || rho > c1 * domain.distance(&x) {
                tally.moments.push(0.0);
                continue;
            }
            tally.hits += 1;
            let index = (k * outer.chunk + i) as u64;
            let mut inner_rng = stream_rng(inner_seed, index);
            let fx = f.eval(&x);
            let mean = (0..INNER_BUDGET)
                .map(|_| inner_sum(f, domain, &x, fx, s, p, mc.r_min_rel, &mut inner_rng))
                .sum::<f64>()
                / INNER_BUDGET as f64;
            tally.moments.push(weight * mean.powf(1.0 / p));
        }
        tally
    });
    Ok(reduce(&chunks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use std::f64::consts::PI;

    #[test]
    fn coordinate_at_cube_center() {
        // h(x)^p = pi d(x)/2 for f = x_1, p = 2, s = 1/2
        let d = Domain::new(DomainSpec::unit_cube(2)).unwrap();
        let x = Point::xy(0.5, 0.5);
        let est = local_h_integral(&Field::Coordinate(0), &d, &x, 0.5, 2.0, &McConfig::new(100_000, 1)).unwrap();
        assert!((est.value - PI / 4.0).abs() < 3.0 * est.std_error);
    }

    #[test]
    fn constant_and_outside() {
        let d = Domain::new(DomainSpec::unit_cube(2)).unwrap();
        let mc = McConfig::new(100, 1);
        let x = Point::xy(0.3, 0.3);
        assert_eq!(local_h(&Field::Constant(1.0), &d, &x, 0.5, 2.0, &mc).unwrap().value, 0.0);
        assert_eq!(
            representation_rhs(&Field::Constant(1.0), &d, &x, 0.5, 2.0, 1.0, &mc).unwrap().value,
            0.0
        );
        assert!(local_h(&Field::Coordinate(0), &d, &Point::xy(1.5, 0.3), 0.5, 2.0, &mc).is_err());
    }

    #[test]
    fn representation_is_monotone_in_c1() {
        let d = Domain::new(DomainSpec::unit_cube(2)).unwrap();
        let f = Field::Sine {
            axis: 0,
            wavenumber: 2.0 * PI,
        };
        let y = Point::xy(0.3, 0.6);
        let mc = McConfig::new(64 * 2000, 5);
        let small = representation_rhs(&f, &d, &y, 0.5, 2.0, 0.5, &mc).unwrap();
        let large = representation_rhs(&f, &d, &y, 0.5, 2.0, 1.0, &mc).unwrap();
        assert!(large.value >= small.value);
        assert!(small.value > 0.0);
    }
}
