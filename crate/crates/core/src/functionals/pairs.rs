//! Pair estimators for the fractional seminorms.
//!
//! The inner point is `z = x + r ω` with `ω` uniform on the sphere and `r`
//! drawn with density `∝ r^(γ-1)` on `(r_min, R)`, `γ = p - s p`. For a
//! Lipschitz field the polar integrand behaves like `r^(p-1-sp)`, so this
//! density keeps the per-sample weight bounded near the diagonal. The core
//! `r < r_min` is excised and bounded analytically when the field has a
//! Lipschitz constant.

use rand::Rng as _;

use super::{pow_abs, FracParams};
use crate::error::Result;
use crate::fields::Field;
use crate::geometry::{sphere_area, unit_direction, Domain, Point, Region};
use crate::mc::{looks_divergent, map_chunks, reduce, ChunkTally, Estimate, McConfig, Moments, Rng};

/// Power-law radial density `∝ r^(gamma-1)` on `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    pub gamma: f64,
}

impl RadialLaw {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    /// Draws `r` and returns `(r, 1 / pdf(r))`.
    pub fn sample(&self, rng: &mut Rng, lo: f64, hi: f64) -> (f64, f64) {
        let g = self.gamma;
        let (a, b) = (lo.powf(g), hi.powf(g));
        let u: f64 = rng.gen();
        let r = (a + u * (b - a)).powf(1.0 / g);
        let inv_pdf = (b - a) / (g * r.powf(g - 1.0));
        (r, inv_pdf)
    }
}

/// One drawn pair with the geometry-only part of its weight.
#[derive(Debug, Clone)]
pub struct StoredPair {
    pub x: Point,
    pub z: Point,
    pub dx: f64,
    pub dz: f64,
    /// `w(x) |S^{n-1}| / (pdf(r) r^(1+sp))`.
    pub base: f64,
    /// Radial cutoff used for this pair.
    pub r_min: f64,
    /// Outer importance weight `w(x)`.
    pub outer_weight: f64,
}

impl StoredPair {
    /// Contribution `base |f(z) - f(x)|^p delta^b` and whether delta was clamped.
    #[inline]
    pub fn contribution(&self, f: &Field, p: f64, b: f64) -> (f64, bool) {
        let diff = pow_abs(f.eval(&self.z) - f.eval(&self.x), p);
        if diff == 0.0 {
            return (0.0, false);
        }
        if b == 0.0 {
            return (self.base * diff, false);
        }
        let mut delta = self.dx.min(self.dz);
        let clamped = b < 0.0 && delta < self.r_min;
        if clamped {
            delta = self.r_min;
        }
        (self.base * diff * delta.powf(b), clamped)
    }
}

/// Which inner region a pair estimator integrates over.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Inner {
    /// `|x - z| <= tau d(x)`.
    Restricted { tau: f64 },
    /// All of the domain; radius up to `diam`.
    Full { diam: f64 },
}

#[derive(Debug, Clone, Copy)]
struct PairSampler<'r, 'd> {
    region: &'r Region<'d>,
    inner: Inner,
    law: RadialLaw,
    sp: f64,
    r_min_rel: f64,
    sphere: f64,
    need_dz: bool,
}

impl<'r, 'd> PairSampler<'r, 'd> {
    fn new(region: &'r Region<'d>, inner: Inner, s: f64, p: f64, r_min_rel: f64, need_dz: bool) -> Self {
        Self {
            region,
            inner,
            law: RadialLaw::new(p - s * p),
            sp: s * p,
            r_min_rel,
            sphere: sphere_area(region.domain().dim()),
            need_dz,
        }
    }

    fn domain(&self) -> &'d Domain {
        self.region.domain()
    }

    /// Outer draw, then (if it landed) the inner draw. Returns the outer hit
    /// flag and the pair if both points lie in the domain.
    fn draw(&self, rng: &mut Rng) -> (bool, Option<StoredPair>) {
        let Some((x, w)) = self.region.draw(rng) else {
            return (false, None);
        };
        let domain = self.domain();
        let dx = domain.distance(&x);
        let (r_max, r_min) = match self.inner {
            Inner::Restricted { tau } => (tau * dx, self.r_min_rel * tau * dx),
            Inner::Full { diam } => (diam, self.r_min_rel * diam),
        };
        let (r, inv_pdf) = self.law.sample(rng, r_min, r_max);
        let dir = unit_direction(x.dim(), rng);
        let z = x.offset(r, &dir);
        if !domain.inside(&z) {
            return (true, None);
        }
        let dz = if self.need_dz { domain.distance(&z) } else { f64::NAN };
        let base = w * self.sphere * inv_pdf / r.powf(1.0 + self.sp);
        (
            true,
            Some(StoredPair {
                x,
                z,
                dx,
                dz,
                base,
                r_min,
                outer_weight: w,
            }),
        )
    }

    /// Bound on the excised core around `x` for a field with Lipschitz
    /// constant `lip`: `w |S| lip^p r_min^γ / γ` times the largest boundary
    /// weight on the core.
    fn core_bound(&self, pair_dx: f64, r_min: f64, w: f64, lip: f64, p: f64, b: f64) -> f64 {
        let g = self.law.gamma;
        let weight = if b >= 0.0 {
            pair_dx.powf(b)
        } else {
            (pair_dx - r_min).max(r_min).powf(b)
        };
        w * self.sphere * lip.powf(p) * r_min.powf(g) / g * weight
    }

    fn tallies(&self, f: &Field, p: f64, b: f64, mc: &McConfig) -> Vec<ChunkTally> {
        let lip = f.lipschitz_bound();
        map_chunks(mc, |_, rng, count| {
            let mut tally = ChunkTally::default();
            for _ in 0..count {
                let (hit, pair) = self.draw(rng);
                tally.hits += u64::from(hit);
                match pair {
                    Some(pair) => {
                        let (y, clamped) = pair.contribution(f, p, b);
                        tally.moments.push(y);
                        tally.clamped += u64::from(clamped);
                        if let Some(l) = lip {
                            tally.core_sum += self.core_bound(pair.dx, pair.r_min, pair.outer_weight, l, p, b);
                        }
                    }
                    None => tally.moments.push(0.0),
                }
            }
            tally
        })
    }
}

fn finish(chunks: &[ChunkTally], f: &Field, mc: &McConfig) -> Estimate {
    let mut est = reduce(chunks);
    if f.lipschitz_bound().is_some() {
        let core: f64 = chunks.iter().map(|c| c.core_sum).sum();
        est.flags.core_bound = Some(core / mc.n_pairs as f64);
    }
    est
}

/// `∫_region ∫_{|x-z| <= tau d(x)} |f(z)-f(x)|^p / |z-x|^{n+sp} delta(x,z)^b dz dx`.
pub fn restricted_integral(f: &Field, region: &Region, params: &FracParams, mc: &McConfig) -> Result<Estimate> {
    params.validate()?;
    mc.validate()?;
    if f.is_constant() {
        return Ok(Estimate::exact(0.0));
    }
    let sampler = PairSampler::new(
        region,
        Inner::Restricted { tau: params.tau },
        params.s,
        params.p,
        mc.r_min_rel,
        params.b != 0.0,
    );
    let chunks = sampler.tallies(f, params.p, params.b, mc);
    Ok(finish(&chunks, f, mc))
}

/// The restricted seminorm: [`restricted_integral`] over the whole domain,
/// raised to `1/p`.
pub fn frac_seminorm_restricted(f: &Field, domain: &Domain, params: &FracParams, mc: &McConfig) -> Result<Estimate> {
    Ok(restricted_integral(f, &Region::whole(domain), params, mc)?.powf(1.0 / params.p))
}

/// `∫_Ω ∫_Ω |f(z)-f(x)|^p / |z-x|^{n+sp} dz dx`.
pub fn full_integral(f: &Field, domain: &Domain, s: f64, p: f64, mc: &McConfig) -> Result<Estimate> {
    FracParams::new(s, p, p, 0.0, 0.0).validate()?;
    mc.validate()?;
    if f.is_constant() {
        return Ok(Estimate::exact(0.0));
    }
    let region = Region::whole(domain);
    let sampler = PairSampler::new(
        &region,
        Inner::Full {
            diam: domain.diameter(),
        },
        s,
        p,
        mc.r_min_rel,
        false,
    );
    let chunks = sampler.tallies(f, p, 0.0, mc);
    Ok(finish(&chunks, f, mc))
}

/// The full `Ω × Ω` seminorm, raised to `1/p`.
pub fn frac_seminorm_full(f: &Field, domain: &Domain, s: f64, p: f64, mc: &McConfig) -> Result<Estimate> {
    Ok(full_integral(f, domain, s, p, mc)?.powf(1.0 / p))
}

#[derive(Debug, Clone)]
struct BankChunk<T> {
    draws: u64,
    hits: u64,
    pairs: Vec<T>,
}

/// Pairs drawn once for the restricted integral and re-weighted for any
/// field and any `b`.
///
/// The draw does not depend on the field or on `b`, so evaluating a bank is
/// the same as calling [`restricted_integral`] with the same seed. A bank can
/// be [projected](PairBank::project) onto a smaller per-pair record when only
/// part of the geometry is needed later.
#[derive(Debug, Clone)]
pub struct PairBank<T = StoredPair> {
    chunks: Vec<BankChunk<T>>,
    p: f64,
    n_draws: u64,
}

impl PairBank<StoredPair> {
    pub fn restricted(region: &Region, s: f64, p: f64, tau: f64, mc: &McConfig) -> Result<Self> {
        FracParams::new(s, p, p, 0.0, 0.0).with_tau(tau).validate()?;
        mc.validate()?;
        let sampler = PairSampler::new(region, Inner::Restricted { tau }, s, p, mc.r_min_rel, true);
        let chunks = map_chunks(mc, |_, rng, count| {
            let mut chunk = BankChunk {
                draws: count as u64,
                hits: 0,
                pairs: Vec::new(),
            };
            for _ in 0..count {
                let (hit, pair) = sampler.draw(rng);
                chunk.hits += u64::from(hit);
                if let Some(pair) = pair {
                    chunk.pairs.push(pair);
                }
            }
            chunk
        });
        Ok(Self {
            chunks,
            p,
            n_draws: mc.n_pairs as u64,
        })
    }

    /// Restricted integral of `f` with boundary exponent `b`.
    pub fn evaluate(&self, f: &Field, b: f64) -> Estimate {
        self.evaluate_with(|pair| pair.contribution(f, self.p, b))
    }
}

impl<T> PairBank<T> {
    pub fn len(&self) -> usize {
        self.chunks.iter().map(|c| c.pairs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = &T> {
        self.chunks.iter().flat_map(|c| c.pairs.iter())
    }

    pub fn draws(&self) -> u64 {
        self.n_draws
    }

    /// The same bank with every pair replaced by `map(pair)`.
    pub fn project<U, F>(&self, map: F) -> PairBank<U>
    where
        F: Fn(&T) -> U,
    {
        PairBank {
            chunks: self
                .chunks
                .iter()
                .map(|c| BankChunk {
                    draws: c.draws,
                    hits: c.hits,
                    pairs: c.pairs.iter().map(&map).collect(),
                })
                .collect(),
            p: self.p,
            n_draws: self.n_draws,
        }
    }

    /// Mean of an arbitrary per-pair contribution over the bank, with misses
    /// counted as zeros.
    pub fn evaluate_with<F>(&self, contribution: F) -> Estimate
    where
        F: Fn(&T) -> (f64, bool),
    {
        let tallies: Vec<ChunkTally> = self
            .chunks
            .iter()
            .map(|chunk| {
                let mut tally = ChunkTally {
                    hits: chunk.hits,
                    ..ChunkTally::default()
                };
                for pair in &chunk.pairs {
                    let (y, clamped) = contribution(pair);
                    tally.moments.push(y);
                    tally.clamped += u64::from(clamped);
                }
                let misses = chunk.draws - chunk.pairs.len() as u64;
                tally.moments.merge(&Moments {
                    n: misses,
                    mean: 0.0,
                    m2: 0.0,
                });
                tally
            })
            .collect();
        let mut est = reduce(&tallies);
        est.flags.divergent = looks_divergent(&tallies);
        est
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use std::f64::consts::PI;

    fn cube() -> Domain {
        Domain::new(DomainSpec::unit_cube(2)).unwrap()
    }

    #[test]
    fn radial_law_inverse_pdf_integrates_interval() {
        // E[1/pdf] = length of the interval
        let law = RadialLaw::new(1.0);
        let mut rng = crate::mc::stream_rng(4, 0);
        let mut m = Moments::default();
        for _ in 0..100_000 {
            m.push(law.sample(&mut rng, 0.1, 0.6).1);
        }
        assert!((m.mean - 0.5).abs() < 4.0 * m.std_error() + 1e-12);
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let d = cube();
        let mc = McConfig::new(1000, 1);
        let p = FracParams::default();
        assert_eq!(frac_seminorm_restricted(&Field::Constant(2.0), &d, &p, &mc).unwrap().value, 0.0);
        assert_eq!(frac_seminorm_full(&Field::Constant(2.0), &d, 0.5, 2.0, &mc).unwrap().value, 0.0);
    }

    #[test]
    fn coordinate_restricted_matches_closed_form() {
        // inner integral of cos^2/r over the disk of radius d/2 is pi d / 2,
        // and ∫ d over the unit square is 1/6
        let est = restricted_integral(
            &Field::Coordinate(0),
            &Region::whole(&cube()),
            &FracParams::default(),
            &McConfig::new(200_000, 3),
        )
        .unwrap();
        let exact = PI / 12.0;
        assert!((est.value - exact).abs() < 3.0 * est.std_error, "{est:?} vs {exact}");
        assert!(est.flags.core_bound.unwrap() < 1e-5);
    }

    #[test]
    fn bank_reproduces_streaming_estimate() {
        let d = cube();
        let region = Region::whole(&d);
        let mc = McConfig {
            n_pairs: 20_000,
            chunk: 1000,
            ..McConfig::new(0, 8)
        };
        let params = FracParams::new(0.4, 2.0, 2.0, 0.0, 0.7);
        let f = Field::Sine {
            axis: 1,
            wavenumber: 4.0,
        };
        let streamed = restricted_integral(&f, &region, &params, &mc).unwrap();
        let bank = PairBank::restricted(&region, 0.4, 2.0, 0.5, &mc).unwrap();
        let banked = bank.evaluate(&f, 0.7);
        assert_eq!(streamed.value, banked.value);
        assert_eq!(streamed.std_error, banked.std_error);
    }

    #[test]
    fn delta_is_symmetric_on_bank_pairs() {
        let d = Domain::new(DomainSpec::cusp(0.5)).unwrap();
        let region = Region::whole(&d);
        let bank = PairBank::restricted(&region, 0.5, 2.0, 0.5, &McConfig::new(2000, 1)).unwrap();
        for pair in bank.pairs() {
            assert_eq!(pair.dx.min(pair.dz), pair.dz.min(pair.dx));
            // |x - z| <= d(x)/2 forces d(z) >= d(x)/2
            assert!(pair.dz >= 0.5 * pair.dx * (1.0 - 1e-9));
        }
    }
}
