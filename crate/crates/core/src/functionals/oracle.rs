use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pow_abs, FracParams};
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::{Domain, DomainSpec};

const MIN_NODES: usize = 50;

/// Deterministic bracket for a seminorm on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleBracket {
    /// Rooted lower end: midpoint sum with the self-cells dropped.
    pub lower: f64,
    /// Rooted upper end: lower sum plus the self-cell bound.
    pub upper: f64,
    pub lower_integral: f64,
    pub upper_integral: f64,
    pub nodes: usize,
}

impl OracleBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Whether `value` lies in the bracket widened by `rel` on both ends.
    pub fn contains(&self, value: f64, rel: f64) -> bool {
        value >= self.lower * (1.0 - rel) && value <= self.upper * (1.0 + rel)
    }
}

#[derive(Clone, Copy)]
enum Reach {
    Restricted { tau: f64 },
    Full,
}

/// Tensor-grid midpoint rule for the restricted seminorm on `(0,1)^2`.
///
/// The pair sum runs over cell centres `x_i != x_j`; the excluded self-cell
/// is bounded by `L^p ∫_cell |u|^(p-n-sp) du` times the weight.
pub fn grid_oracle_seminorm(f: &Field, domain: &Domain, params: &FracParams, nodes_per_axis: usize) -> Result<OracleBracket> {
    params.validate()?;
    grid(f, domain, params.s, params.p, params.b, Reach::Restricted { tau: params.tau }, nodes_per_axis)
}

/// Same rule over the full square `Ω × Ω`, unweighted.
pub fn grid_oracle_full(f: &Field, domain: &Domain, s: f64, p: f64, nodes_per_axis: usize) -> Result<OracleBracket> {
    FracParams::new(s, p, p, 0.0, 0.0).validate()?;
    grid(f, domain, s, p, 0.0, Reach::Full, nodes_per_axis)
}

fn grid(f: &Field, domain: &Domain, s: f64, p: f64, b: f64, reach: Reach, m: usize) -> Result<OracleBracket> {
    if !matches!(domain.spec(), DomainSpec::UnitCube { n: 2 }) {
        return Err(Error::Precondition("grid oracle needs the unit square".into()));
    }
    if m < MIN_NODES {
        return Err(Error::Precondition(format!("need at least {MIN_NODES} nodes per axis, got {m}")));
    }
    let lip = f.lipschitz_bound().ok_or(Error::NotLipschitz)?;
    if f.is_constant() {
        return Ok(OracleBracket {
            lower: 0.0,
            upper: 0.0,
            lower_integral: 0.0,
            upper_integral: 0.0,
            nodes: m,
        });
    }

    let h = 1.0 / m as f64;
    let centre = |i: usize| (i as f64 + 0.5) * h;
    let mut values = vec![0.0; m * m];
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (centre(i), centre(j));
            values[i * m + j] = f.eval(&[x, y]);
            dist[i * m + j] = x.min(1.0 - x).min(y).min(1.0 - y);
        }
    }

    // kernel[|di| * (span+1) + |dj|] = h^2 / |x_i - x_j|^(2+sp)
    let span = match reach {
        Reach::Restricted { tau } => ((tau * 0.5 / h).ceil() as usize).min(m - 1),
        Reach::Full => m - 1,
    };
    let stride = span + 1;
    let mut kernel = vec![0.0; stride * stride];
    for di in 0..=span {
        for dj in 0..=span {
            if di + dj > 0 {
                let r = h * ((di * di + dj * dj) as f64).sqrt();
                kernel[di * stride + dj] = h * h / r.powf(2.0 + s * p);
            }
        }
    }

    let rows: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut sum = 0.0;
            let mut weight_sum = 0.0;
            for j in 0..m {
                let k = i * m + j;
                let (fx, dx) = (values[k], dist[k]);
                let (reach_cells, limit_sq) = match reach {
                    Reach::Restricted { tau } => {
                        let radius = tau * dx / h;
                        (radius.floor() as usize, radius * radius)
                    }
                    Reach::Full => (m - 1, f64::INFINITY),
                };
                let mut inner = 0.0;
                let (i_lo, i_hi) = (i.saturating_sub(reach_cells), (i + reach_cells).min(m - 1));
                for ii in i_lo..=i_hi {
                    let di = ii.abs_diff(i);
                    let (j_lo, j_hi) = (j.saturating_sub(reach_cells), (j + reach_cells).min(m - 1));
                    for jj in j_lo..=j_hi {
                        let dj = jj.abs_diff(j);
                        if di + dj == 0 || ((di * di + dj * dj) as f64) > limit_sq {
                            continue;
                        }
                        let kz = ii * m + jj;
                        let mut term = pow_abs(values[kz] - fx, p) * kernel[di * stride + dj];
                        if b != 0.0 {
                            term *= dx.min(dist[kz]).powf(b);
                        }
                        inner += term;
                    }
                }
                sum += h * h * inner;
                weight_sum += h * h * self_weight(dx, b, h);
            }
            (sum, weight_sum)
        })
        .collect();

    let lower_integral: f64 = rows.iter().map(|r| r.0).sum();
    let weights: f64 = rows.iter().map(|r| r.1).sum();
    let upper_integral = lower_integral + pow_abs(lip, p) * self_cell_integral(p - 2.0 - s * p, h) * weights;
    Ok(OracleBracket {
        lower: lower_integral.powf(1.0 / p),
        upper: upper_integral.powf(1.0 / p),
        lower_integral,
        upper_integral,
        nodes: m,
    })
}

/// Upper bound on `δ^b` for partners inside the self-cell.
fn self_weight(dx: f64, b: f64, h: f64) -> f64 {
    if b >= 0.0 {
        dx.powf(b)
    } else {
        let floor = dx - h / std::f64::consts::SQRT_2;
        if floor > 0.0 {
            floor.powf(b)
        } else {
            f64::INFINITY
        }
    }
}

/// `∫_{[-h/2,h/2]^2} |u|^kappa du` for `kappa > -2`.
fn self_cell_integral(kappa: f64, h: f64) -> f64 {
    let e = kappa + 2.0;
    // Simpson on ∫_0^{π/4} cos(θ)^(-e) dθ
    let steps = 1000;
    let dt = std::f64::consts::FRAC_PI_4 / steps as f64;
    let g = |t: f64| t.cos().powf(-e);
    let mut acc = g(0.0) + g(std::f64::consts::FRAC_PI_4);
    for k in 1..steps {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * dt);
    }
    8.0 / e * (0.5 * h).powf(e) * acc * dt / 3.0
}
