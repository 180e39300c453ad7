use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::boundary::Boundary;
use super::point::Point;
use super::sampling::Region;
use crate::error::{Error, Result};
use crate::mc::{derive_seed, map_chunks, McConfig, Moments};

/// Rejection sampling gives up below this acceptance rate.
pub const ACCEPTANCE_FLOOR: f64 = 1e-3;
/// Attempts made before the acceptance floor is enforced.
const ACCEPTANCE_WARMUP: usize = 10_000;
/// Cusp wall vertices are graded geometrically in `x_n` from this height.
const CUSP_Y_MIN: f64 = 1e-10;
/// Samples used by the Monte Carlo measure of a mushroom domain.
const MEASURE_SAMPLES: usize = 400_000;

fn default_resolution() -> usize {
    4096
}

/// Serializable description of one of the built-in domain families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `(0,1)^n`.
    UnitCube { n: usize },
    /// Open ball of the given radius centred at the origin.
    Ball { n: usize, radius: f64 },
    /// `{0 < x_n < 1, |x'| < x_n^(1/alpha)}`; planar only.
    Cusp {
        n: usize,
        alpha: f64,
        #[serde(default = "default_resolution")]
        boundary_resolution: usize,
    },
    /// Square `(0, cube_side)^2` with mushrooms on its top side. Mushroom `i`
    /// has size `r_i`: a stem of height `r_i` and half-width `r_i^beta`
    /// capped by a disk of radius `r_i`.
    Mushroom {
        n: usize,
        beta: f64,
        cube_side: f64,
        stem_half_widths: Vec<f64>,
        #[serde(default = "default_resolution")]
        boundary_resolution: usize,
    },
}

impl DomainSpec {
    pub fn unit_cube(n: usize) -> Self {
        DomainSpec::UnitCube { n }
    }

    pub fn ball(n: usize, radius: f64) -> Self {
        DomainSpec::Ball { n, radius }
    }

    pub fn cusp(alpha: f64) -> Self {
        DomainSpec::Cusp {
            n: 2,
            alpha,
            boundary_resolution: default_resolution(),
        }
    }

    pub fn mushroom(beta: f64, cube_side: f64, sizes: Vec<f64>) -> Self {
        DomainSpec::Mushroom {
            n: 2,
            beta,
            cube_side,
            stem_half_widths: sizes,
            boundary_resolution: default_resolution(),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            DomainSpec::UnitCube { n }
            | DomainSpec::Ball { n, .. }
            | DomainSpec::Cusp { n, .. }
            | DomainSpec::Mushroom { n, .. } => n,
        }
    }

    /// Short label used in reports and CSV rows.
    pub fn label(&self) -> String {
        match self {
            DomainSpec::UnitCube { n } => format!("unit_cube(n={n})"),
            DomainSpec::Ball { n, radius } => format!("ball(n={n},radius={radius})"),
            DomainSpec::Cusp { alpha, .. } => format!("cusp(alpha={alpha})"),
            DomainSpec::Mushroom {
                beta,
                stem_half_widths,
                ..
            } => format!("mushroom(beta={beta},sizes={stem_half_widths:?})"),
        }
    }

    pub fn with_resolution(&self, resolution: usize) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            DomainSpec::Cusp {
                boundary_resolution,
                ..
            }
            | DomainSpec::Mushroom {
                boundary_resolution,
                ..
            } => *boundary_resolution = resolution,
            _ => {}
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::InvalidSpec(format!("dimension must be >= 2, got {n}")));
        }
        match self {
            DomainSpec::UnitCube { .. } => Ok(()),
            DomainSpec::Ball { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidSpec(format!("radius must be positive, got {radius}")));
                }
                Ok(())
            }
            DomainSpec::Cusp {
                alpha,
                boundary_resolution,
                ..
            } => {
                if n != 2 {
                    return Err(Error::InvalidSpec("cusp domains are planar (n = 2)".into()));
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidSpec(format!("alpha must lie in (0,1], got {alpha}")));
                }
                if *boundary_resolution < 2 {
                    return Err(Error::InvalidSpec("boundary_resolution must be >= 2".into()));
                }
                Ok(())
            }
            DomainSpec::Mushroom {
                beta,
                cube_side,
                stem_half_widths,
                boundary_resolution,
                ..
            } => {
                if n != 2 {
                    return Err(Error::InvalidSpec("mushroom domains are planar (n = 2)".into()));
                }
                if !(*beta >= 1.0 && beta.is_finite()) {
                    return Err(Error::InvalidSpec(format!("beta must be >= 1, got {beta}")));
                }
                if !(*cube_side > 0.0 && cube_side.is_finite()) {
                    return Err(Error::InvalidSpec("cube_side must be positive".into()));
                }
                if *boundary_resolution < 8 {
                    return Err(Error::InvalidSpec("boundary_resolution must be >= 8".into()));
                }
                if stem_half_widths.is_empty() {
                    return Err(Error::InvalidSpec("at least one mushroom is required".into()));
                }
                for (i, &r) in stem_half_widths.iter().enumerate() {
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(Error::InvalidSpec(format!("mushroom size r_{i} must be positive")));
                    }
                    if r.powf(*beta) > r {
                        return Err(Error::InvalidSpec(format!(
                            "stem half-width r^beta exceeds r for r_{i} = {r}"
                        )));
                    }
                    if i > 0 && r >= stem_half_widths[i - 1] {
                        return Err(Error::InvalidSpec("mushroom sizes must be strictly decreasing".into()));
                    }
                }
                let footprint: f64 = stem_half_widths.iter().map(|r| 2.0 * r).sum();
                if footprint >= *cube_side {
                    return Err(Error::InvalidSpec(format!(
                        "mushroom footprints ({footprint}) do not fit on a side of length {cube_side}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// One mushroom attached to the top side `y = base` of the square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MushroomPart {
    /// Size `r`: stem height and cap radius.
    pub size: f64,
    pub center_x: f64,
    /// Stem half-width `r^beta`.
    pub half_width: f64,
    /// Height of the square's top side, where the stem starts.
    pub base: f64,
    /// Height of the stem's top, `base + r`.
    pub top: f64,
    /// Cap disk centre height; the disk passes through the stem's top corners.
    pub cap_center_y: f64,
}

impl MushroomPart {
    fn new(size: f64, center_x: f64, beta: f64, base: f64) -> Self {
        let half_width = size.powf(beta);
        let top = base + size;
        let cap_center_y = top + (size * size - half_width * half_width).max(0.0).sqrt();
        Self {
            size,
            center_x,
            half_width,
            base,
            top,
            cap_center_y,
        }
    }

    pub fn in_stem(&self, x: f64, y: f64) -> bool {
        (x - self.center_x).abs() < self.half_width && y >= self.base && y <= self.top
    }

    pub fn in_cap_disk(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center_x;
        let dy = y - self.cap_center_y;
        dx * dx + dy * dy < self.size * self.size
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.in_stem(x, y) || self.in_cap_disk(x, y)
    }

    /// Area of stem plus cap, counting their overlap once.
    pub fn area(&self) -> f64 {
        let (r, w) = (self.size, self.half_width);
        let stem = 2.0 * w * (self.top - self.base);
        // circular segment of the cap below the chord through the stem's top corners
        let h = self.cap_center_y - self.top;
        let segment = r * r * (w / r).asin() - h * w;
        stem + PI * r * r - segment
    }

    /// Boundary from the right stem foot, around the cap, to the left stem foot.
    fn outline(&self, resolution: usize) -> Vec<[f64; 2]> {
        let (cx, w) = (self.center_x, self.half_width);
        let mut pts = vec![[cx + w, self.base], [cx + w, self.top]];
        let h = self.cap_center_y - self.top;
        let start = (-h).atan2(w);
        let sweep = PI - 2.0 * start;
        for k in 1..resolution {
            let t = start + sweep * k as f64 / resolution as f64;
            pts.push([cx + self.size * t.cos(), self.cap_center_y + self.size * t.sin()]);
        }
        pts.push([cx - w, self.top]);
        pts.push([cx - w, self.base]);
        pts
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Cube,
    Ball { radius: f64 },
    Cusp { alpha: f64, boundary: Boundary },
    Mushroom {
        side: f64,
        parts: Vec<MushroomPart>,
        boundary: Boundary,
    },
}

/// A validated domain with its boundary geometry built.
///
/// Immutable after construction; share freely between threads.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    n: usize,
    shape: Shape,
}

/// Lebesgue measure, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub value: f64,
    pub std_error: f64,
}

/// Points drawn by rejection from the bounding box.
#[derive(Debug, Clone)]
pub struct InteriorSample {
    pub points: Vec<Point>,
    pub acceptance_rate: f64,
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.dim();
        let shape = match &spec {
            DomainSpec::UnitCube { .. } => Shape::Cube,
            DomainSpec::Ball { radius, .. } => Shape::Ball { radius: *radius },
            DomainSpec::Cusp {
                alpha,
                boundary_resolution,
                ..
            } => Shape::Cusp {
                alpha: *alpha,
                boundary: cusp_boundary(*alpha, *boundary_resolution),
            },
            DomainSpec::Mushroom {
                beta,
                cube_side,
                stem_half_widths,
                boundary_resolution,
                ..
            } => {
                let side = *cube_side;
                let footprint: f64 = stem_half_widths.iter().map(|r| 2.0 * r).sum();
                let gap = (side - footprint) / (stem_half_widths.len() + 1) as f64;
                let mut cursor = 0.0;
                let mut parts = Vec::with_capacity(stem_half_widths.len());
                for &r in stem_half_widths {
                    cursor += gap + r;
                    parts.push(MushroomPart::new(r, cursor, *beta, side));
                    cursor += r;
                }
                let boundary = mushroom_boundary(side, &parts, *boundary_resolution);
                Shape::Mushroom {
                    side,
                    parts,
                    boundary,
                }
            }
        };
        Ok(Self { spec, n, shape })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Membership in the open set.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.inside(x))
    }

    /// Membership without the dimension check.
    pub fn inside(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Cube => x.iter().all(|&c| c > 0.0 && c < 1.0),
            Shape::Ball { radius } => x.iter().map(|c| c * c).sum::<f64>() < radius * radius,
            Shape::Cusp { alpha, .. } => {
                let y = x[1];
                y > 0.0 && y < 1.0 && x[0].abs() < y.powf(1.0 / alpha)
            }
            Shape::Mushroom { side, parts, .. } => {
                let (px, py) = (x[0], x[1]);
                (px > 0.0 && px < *side && py > 0.0 && py < *side)
                    || parts.iter().any(|m| m.contains(px, py))
            }
        }
    }

    /// Distance to the boundary, `d(x)`.
    pub fn dist_boundary(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        if !self.inside(x) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.distance(x))
    }

    /// `d(x)` for a point already known to be inside.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Cube => x.iter().map(|&c| c.min(1.0 - c)).fold(f64::INFINITY, f64::min),
            Shape::Ball { radius } => radius - x.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Shape::Cusp { boundary, .. } | Shape::Mushroom { boundary, .. } => {
                boundary.distance(x[0], x[1])
            }
        }
    }

    /// Tight axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::Cube => (vec![0.0; self.n], vec![1.0; self.n]),
            Shape::Ball { radius } => (vec![-radius; self.n], vec![*radius; self.n]),
            Shape::Cusp { .. } => (vec![-1.0, 0.0], vec![1.0, 1.0]),
            Shape::Mushroom { side, parts, .. } => {
                let top = parts
                    .iter()
                    .map(|m| m.cap_center_y + m.size)
                    .fold(*side, f64::max);
                (vec![0.0, 0.0], vec![*side, top])
            }
        }
    }

    /// Closed-form measure where one exists.
    pub fn exact_measure(&self) -> Option<f64> {
        match &self.shape {
            Shape::Cube => Some(1.0),
            Shape::Ball { radius } => Some(unit_ball_volume(self.n) * radius.powi(self.n as i32)),
            Shape::Cusp { alpha, .. } => Some(2.0 / (1.0 / alpha + 1.0)),
            Shape::Mushroom { .. } => None,
        }
    }

    /// `|Omega|`: closed form, or a Monte Carlo estimate for mushroom domains.
    pub fn measure(&self) -> Measure {
        if let Some(value) = self.exact_measure() {
            return Measure {
                value,
                std_error: 0.0,
            };
        }
        let region = Region::whole(self);
        let mc = McConfig::new(MEASURE_SAMPLES, derive_seed(0, "measure"));
        let chunks = map_chunks(&mc, |_, rng, count| {
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(region.draw(rng).map_or(0.0, |(_, w)| w));
            }
            m
        });
        let mut total = Moments::default();
        chunks.iter().for_each(|c| total.merge(c));
        Measure {
            value: total.mean,
            std_error: total.std_error(),
        }
    }

    /// Diameter: exact for cube and ball; for polyline domains the largest
    /// distance between boundary vertices, a lower bound converging with the
    /// boundary resolution.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Cube => (self.n as f64).sqrt(),
            Shape::Ball { radius } => 2.0 * radius,
            Shape::Cusp { boundary, .. } | Shape::Mushroom { boundary, .. } => boundary.vertex_diameter(),
        }
    }

    /// Uniform interior points by rejection from the bounding box.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Result<InteriorSample> {
        if count == 0 {
            return Err(Error::InvalidParams("count must be >= 1".into()));
        }
        let (lo, hi) = self.bounding_box();
        let mut rng = crate::mc::stream_rng(seed, 0);
        let mut points = Vec::with_capacity(count);
        let mut attempts = 0usize;
        let mut buf = vec![0.0; self.n];
        while points.len() < count {
            attempts += 1;
            for (i, c) in buf.iter_mut().enumerate() {
                *c = lo[i] + (hi[i] - lo[i]) * rng.gen::<f64>();
            }
            if self.inside(&buf) {
                points.push(Point::new(buf.iter().copied()));
            }
            if attempts >= ACCEPTANCE_WARMUP {
                let rate = points.len() as f64 / attempts as f64;
                if rate < ACCEPTANCE_FLOOR {
                    return Err(Error::LowAcceptance {
                        rate,
                        floor: ACCEPTANCE_FLOOR,
                    });
                }
            }
        }
        Ok(InteriorSample {
            acceptance_rate: points.len() as f64 / attempts as f64,
            points,
        })
    }

    /// Boundary polyline for polyline-backed domains.
    pub fn boundary(&self) -> Option<&Boundary> {
        match &self.shape {
            Shape::Cusp { boundary, .. } | Shape::Mushroom { boundary, .. } => Some(boundary),
            _ => None,
        }
    }

    /// Boundary as `x,y` CSV rows; planar domains only.
    pub fn boundary_csv(&self) -> Result<String> {
        if self.n != 2 {
            return Err(Error::InvalidParams("boundary export needs n = 2".into()));
        }
        Ok(match &self.shape {
            Shape::Cube => Boundary::new(
                vec![vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]],
                0.0,
            )
            .to_csv(),
            Shape::Ball { radius } => {
                let m = 512;
                let ring = (0..=m)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / m as f64;
                        [radius * t.cos(), radius * t.sin()]
                    })
                    .collect();
                Boundary::new(vec![ring], 0.0).to_csv()
            }
            Shape::Cusp { boundary, .. } | Shape::Mushroom { boundary, .. } => boundary.to_csv(),
        })
    }

    pub fn mushrooms(&self) -> &[MushroomPart] {
        match &self.shape {
            Shape::Mushroom { parts, .. } => parts,
            _ => &[],
        }
    }

    pub fn cube_side(&self) -> Option<f64> {
        match &self.shape {
            Shape::Mushroom { side, .. } => Some(*side),
            Shape::Cube => Some(1.0),
            _ => None,
        }
    }

    pub fn cusp_alpha(&self) -> Option<f64> {
        match &self.shape {
            Shape::Cusp { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn ball_radius(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ball { radius } => Some(*radius),
            _ => None,
        }
    }
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Surface area of the unit sphere `S^{n-1}` in R^n.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n - 2) as f64 * sphere_area(n - 2),
    }
}

fn cusp_boundary(alpha: f64, resolution: usize) -> Boundary {
    let ratio = (1.0 / CUSP_Y_MIN).ln() / resolution as f64;
    let heights: Vec<f64> = std::iter::once(0.0)
        .chain((0..=resolution).map(|k| (CUSP_Y_MIN.ln() + ratio * k as f64).exp().min(1.0)))
        .collect();
    let right: Vec<[f64; 2]> = heights.iter().map(|&y| [y.powf(1.0 / alpha), y]).collect();
    let mut spacing: f64 = 0.0;
    for w in right.windows(2) {
        spacing = spacing.max((w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]));
    }
    let mut chain = right.clone();
    chain.push([-1.0, 1.0]);
    chain.extend(right.iter().rev().skip(1).map(|p| [-p[0], p[1]]));
    Boundary::new(vec![chain], spacing)
}

fn mushroom_boundary(side: f64, parts: &[MushroomPart], resolution: usize) -> Boundary {
    let mut chain = vec![[0.0, 0.0], [side, 0.0], [side, side]];
    let mut spacing: f64 = 0.0;
    for m in parts.iter().rev() {
        let outline = m.outline(resolution);
        spacing = spacing.max(2.0 * PI * m.size / resolution as f64);
        chain.extend(outline);
    }
    chain.push([0.0, side]);
    chain.push([0.0, 0.0]);
    Boundary::new(vec![chain], spacing)
}
