//! Weighted outer sampling over a domain.
//!
//! A [`Region`] draws points from a mixture of simple proposal shapes and
//! returns the importance weight `1 / q(x)`, where `q` is the mixture
//! density. Points that fall outside the domain (or outside an optional band
//! on `x_n`) carry weight zero, so `E[w g(x)] = ∫ g` over the region for any
//! integrand `g` as long as the mixture covers it.

use rand::Rng as _;
use rand_distr::StandardNormal;

use super::domain::{unit_ball_volume, Domain};
use super::point::Point;
use crate::mc::Rng;

#[derive(Debug, Clone)]
pub enum Component {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// The planar cusp `|x| < y^(1/alpha)` restricted to `lo < y < hi`, with
    /// `y` drawn log-uniformly or with the uniform-area law.
    CuspBand { alpha: f64, lo: f64, hi: f64, log_uniform: bool },
}

impl Component {
    fn sample(&self, rng: &mut Rng) -> Point {
        match self {
            Component::Box { lo, hi } => {
                Point::new(lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.gen::<f64>()))
            }
            Component::Ball { center, radius } => {
                let n = center.len();
                let dir = unit_direction(n, rng);
                let rho = radius * rng.gen::<f64>().powf(1.0 / n as f64);
                Point::new(center.iter().zip(&dir).map(|(c, d)| c + rho * d))
            }
            Component::CuspBand {
                alpha,
                lo,
                hi,
                log_uniform,
            } => {
                let u: f64 = rng.gen();
                let y = if *log_uniform {
                    lo * (hi / lo).powf(u)
                } else {
                    let k = 1.0 / alpha + 1.0;
                    (lo.powf(k) + u * (hi.powf(k) - lo.powf(k))).powf(1.0 / k)
                };
                let half = y.powf(1.0 / alpha);
                Point::xy(half * (2.0 * rng.gen::<f64>() - 1.0), y)
            }
        }
    }

    fn density(&self, x: &[f64]) -> f64 {
        match self {
            Component::Box { lo, hi } => {
                let inside = x.iter().zip(lo.iter().zip(hi)).all(|(c, (a, b))| c >= a && c <= b);
                if inside {
                    1.0 / lo.iter().zip(hi).map(|(a, b)| b - a).product::<f64>()
                } else {
                    0.0
                }
            }
            Component::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                if r2 < radius * radius {
                    1.0 / (unit_ball_volume(center.len()) * radius.powi(center.len() as i32))
                } else {
                    0.0
                }
            }
            Component::CuspBand {
                alpha,
                lo,
                hi,
                log_uniform,
            } => {
                let y = x[1];
                if !(y > *lo && y < *hi) {
                    return 0.0;
                }
                let half = y.powf(1.0 / alpha);
                if x[0].abs() >= half {
                    return 0.0;
                }
                if *log_uniform {
                    1.0 / (y * (hi / lo).ln() * 2.0 * half)
                } else {
                    let k = 1.0 / alpha + 1.0;
                    k / (2.0 * (hi.powf(k) - lo.powf(k)))
                }
            }
        }
    }
}

/// Uniform direction on the unit sphere in R^n.
pub fn unit_direction(n: usize, rng: &mut Rng) -> Vec<f64> {
    if n == 2 {
        let t = std::f64::consts::TAU * rng.gen::<f64>();
        return vec![t.cos(), t.sin()];
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// A domain, an optional band `lo < x_n < hi`, and the proposal mixture
/// used to sample it.
#[derive(Debug, Clone)]
pub struct Region<'a> {
    domain: &'a Domain,
    band: Option<(f64, f64)>,
    parts: Vec<(f64, Component)>,
    cumulative: Vec<f64>,
}

impl<'a> Region<'a> {
    pub fn whole(domain: &'a Domain) -> Self {
        Self::with_parts(domain, None, default_parts(domain))
    }

    /// The part of the domain with `lo < x_n < hi`.
    pub fn band(domain: &'a Domain, lo: f64, hi: f64) -> Self {
        let parts = match domain.cusp_alpha() {
            Some(alpha) if lo > 0.0 => vec![(
                1.0,
                Component::CuspBand {
                    alpha,
                    lo,
                    hi: hi.min(1.0),
                    log_uniform: true,
                },
            )],
            _ => default_parts(domain),
        };
        Self::with_parts(domain, Some((lo, hi)), parts)
    }

    /// Custom proposal mixture; shares are normalized.
    pub fn with_parts(domain: &'a Domain, band: Option<(f64, f64)>, parts: Vec<(f64, Component)>) -> Self {
        let total: f64 = parts.iter().map(|(s, _)| s).sum();
        let parts: Vec<(f64, Component)> = parts.into_iter().map(|(s, c)| (s / total, c)).collect();
        let mut acc = 0.0;
        let cumulative = parts
            .iter()
            .map(|(s, _)| {
                acc += s;
                acc
            })
            .collect();
        Self {
            domain,
            band,
            parts,
            cumulative,
        }
    }

    pub fn domain(&self) -> &'a Domain {
        self.domain
    }

    pub fn band_limits(&self) -> Option<(f64, f64)> {
        self.band
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if let Some((lo, hi)) = self.band {
            let y = x[x.len() - 1];
            if !(y > lo && y < hi) {
                return false;
            }
        }
        self.domain.inside(x)
    }

    /// Mixture density at `x`.
    pub fn density(&self, x: &[f64]) -> f64 {
        self.parts.iter().map(|(s, c)| s * c.density(x)).sum()
    }

    /// One proposal draw: `Some((x, 1/q(x)))` inside the region, `None` otherwise.
    ///
    /// Always consumes the same amount of randomness per call for a given
    /// mixture component, independent of the integrand.
    pub fn draw(&self, rng: &mut Rng) -> Option<(Point, f64)> {
        let u: f64 = rng.gen();
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.parts.len() - 1);
        let x = self.parts[k].1.sample(rng);
        if !self.contains(&x) {
            return None;
        }
        let q = self.density(&x);
        if q > 0.0 {
            Some((x, 1.0 / q))
        } else {
            None
        }
    }
}

fn default_parts(domain: &Domain) -> Vec<(f64, Component)> {
    let n = domain.dim();
    if let Some(alpha) = domain.cusp_alpha() {
        return vec![(
            1.0,
            Component::CuspBand {
                alpha,
                lo: 0.0,
                hi: 1.0,
                log_uniform: false,
            },
        )];
    }
    if let Some(radius) = domain.ball_radius() {
        return vec![(
            1.0,
            Component::Ball {
                center: vec![0.0; n],
                radius,
            },
        )];
    }
    let mushrooms = domain.mushrooms();
    if mushrooms.is_empty() {
        let (lo, hi) = domain.bounding_box();
        return vec![(1.0, Component::Box { lo, hi })];
    }
    // square, then stem / cap / two junction windows per mushroom
    let side = domain.cube_side().unwrap_or(1.0);
    let mut parts = vec![(
        0.4,
        Component::Box {
            lo: vec![0.0, 0.0],
            hi: vec![side, side],
        },
    )];
    let share = 0.6 / mushrooms.len() as f64;
    for m in mushrooms {
        let (cx, w) = (m.center_x, m.half_width);
        parts.push((
            0.35 * share,
            Component::Box {
                lo: vec![cx - w, m.base],
                hi: vec![cx + w, m.top],
            },
        ));
        parts.push((
            0.35 * share,
            Component::Ball {
                center: vec![cx, m.cap_center_y],
                radius: m.size,
            },
        ));
        for y in [m.base, m.top] {
            parts.push((
                0.15 * share,
                Component::Box {
                    lo: vec![cx - 2.0 * w, y - 2.0 * w],
                    hi: vec![cx + 2.0 * w, y + 2.0 * w],
                },
            ));
        }
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::mc::{stream_rng, Moments};

    fn mean_weight(region: &Region, n: usize) -> Moments {
        let mut rng = stream_rng(11, 0);
        let mut m = Moments::default();
        for _ in 0..n {
            m.push(region.draw(&mut rng).map_or(0.0, |(_, w)| w));
        }
        m
    }

    #[test]
    fn weights_integrate_to_measure() {
        for spec in [DomainSpec::unit_cube(2), DomainSpec::ball(3, 0.7), DomainSpec::cusp(0.5)] {
            let d = Domain::new(spec).unwrap();
            let m = mean_weight(&Region::whole(&d), 100_000);
            let exact = d.exact_measure().unwrap();
            assert!((m.mean - exact).abs() < 4.0 * m.std_error() + 1e-12, "{} vs {exact}", m.mean);
        }
    }

    #[test]
    fn cusp_band_weights_integrate_band_area() {
        let d = Domain::new(DomainSpec::cusp(0.5)).unwrap();
        let (lo, hi) = (0.01_f64, 0.02_f64);
        let m = mean_weight(&Region::band(&d, lo, hi), 50_000);
        let exact = 2.0 / 3.0 * (hi.powi(3) - lo.powi(3));
        assert!((m.mean - exact).abs() / exact < 1e-2);
    }
}
