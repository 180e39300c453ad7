//! Scalar test functions on domains.
//!
//! [`FieldSpec`] is the serializable descriptor used in config files;
//! [`Field`] is the evaluable form, resolved against a [`Domain`] where the
//! family depends on the geometry (the mushroom ramp).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, MushroomPart, Point};

/// Serializable field descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Constant { value: f64 },
    /// `x_axis` (0-based axis).
    Coordinate { axis: usize },
    /// `sin(wavenumber * x_axis)`.
    Sine { axis: usize, wavenumber: f64 },
    /// `exp(-|x - center|^2 / width^2)`.
    GaussianBump { center: Vec<f64>, width: f64 },
    /// `high` where `x_axis > threshold`, `low` elsewhere.
    Step {
        axis: usize,
        threshold: f64,
        low: f64,
        high: f64,
    },
    /// `x_n^(-nu)`.
    CuspPower { nu: f64 },
    /// Ramp of mushroom `index`: 0 off the mushroom, linear on the stem, 1 on the cap.
    MushroomBump { index: usize },
}

impl FieldSpec {
    pub fn resolve(&self, domain: &Domain) -> Result<Field> {
        let n = domain.dim();
        let check_axis = |axis: usize| {
            if axis >= n {
                Err(Error::IndexOutOfRange { index: axis, len: n })
            } else {
                Ok(())
            }
        };
        Ok(match self {
            FieldSpec::Constant { value } => Field::Constant(*value),
            FieldSpec::Coordinate { axis } => {
                check_axis(*axis)?;
                Field::Coordinate(*axis)
            }
            FieldSpec::Sine { axis, wavenumber } => {
                check_axis(*axis)?;
                Field::Sine {
                    axis: *axis,
                    wavenumber: *wavenumber,
                }
            }
            FieldSpec::GaussianBump { center, width } => {
                if center.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: center.len(),
                    });
                }
                gaussian_bump(Point::new(center.iter().copied()), *width)?
            }
            FieldSpec::Step {
                axis,
                threshold,
                low,
                high,
            } => {
                check_axis(*axis)?;
                Field::Step {
                    axis: *axis,
                    threshold: *threshold,
                    low: *low,
                    high: *high,
                }
            }
            FieldSpec::CuspPower { nu } => cusp_power(*nu)?,
            FieldSpec::MushroomBump { index } => mushroom_bump(domain, *index)?,
        })
    }

    pub fn label(&self) -> String {
        match self {
            FieldSpec::Constant { value } => format!("constant({value})"),
            FieldSpec::Coordinate { axis } => format!("coordinate({axis})"),
            FieldSpec::Sine { axis, wavenumber } => format!("sine(axis={axis},k={wavenumber})"),
            FieldSpec::GaussianBump { center, width } => format!("gaussian(center={center:?},width={width})"),
            FieldSpec::Step { axis, threshold, .. } => format!("step(axis={axis},t={threshold})"),
            FieldSpec::CuspPower { nu } => format!("cusp_power(nu={nu})"),
            FieldSpec::MushroomBump { index } => format!("mushroom_bump({index})"),
        }
    }
}

/// An evaluable scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Constant(f64),
    Coordinate(usize),
    Sine { axis: usize, wavenumber: f64 },
    GaussianBump { center: Point, width: f64 },
    Step { axis: usize, threshold: f64, low: f64, high: f64 },
    CuspPower { nu: f64 },
    MushroomBump(MushroomPart),
    /// `scale * inner + offset`.
    Affine { scale: f64, offset: f64, inner: Box<Field> },
    /// `inner(x / factor)`.
    Dilated { factor: f64, inner: Box<Field> },
}

/// Smooth test families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothKind {
    Coordinate,
    Sine,
    GaussianBump,
}

/// Field equal to 0 off mushroom `index`, 1 on its cap and linear in the
/// stem-axis coordinate along its stem.
pub fn mushroom_bump(domain: &Domain, index: usize) -> Result<Field> {
    let parts = domain.mushrooms();
    parts
        .get(index)
        .map(|m| Field::MushroomBump(*m))
        .ok_or(Error::IndexOutOfRange {
            index,
            len: parts.len(),
        })
}

/// `x -> x_n^(-nu)` for the cusp domain.
pub fn cusp_power(nu: f64) -> Result<Field> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParams(format!("nu must be positive, got {nu}")));
    }
    Ok(Field::CuspPower { nu })
}

pub fn gaussian_bump(center: Point, width: f64) -> Result<Field> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParams(format!("width must be positive, got {width}")));
    }
    Ok(Field::GaussianBump { center, width })
}

/// Smooth bounded fields. `params` is `[axis]` for coordinates,
/// `[axis, wavenumber]` for sines and `[width, c_1, .., c_n]` for bumps.
pub fn smooth_test(kind: SmoothKind, params: &[f64]) -> Result<Field> {
    let need = |k: usize| {
        if params.len() < k {
            Err(Error::InvalidParams(format!("{kind:?} needs {k} parameters")))
        } else {
            Ok(())
        }
    };
    match kind {
        SmoothKind::Coordinate => {
            need(1)?;
            Ok(Field::Coordinate(params[0] as usize))
        }
        SmoothKind::Sine => {
            need(2)?;
            Ok(Field::Sine {
                axis: params[0] as usize,
                wavenumber: params[1],
            })
        }
        SmoothKind::GaussianBump => {
            need(3)?;
            gaussian_bump(Point::new(params[1..].iter().copied()), params[0])
        }
    }
}

impl Field {
    /// `f(x)`; callers guarantee `x` lies in the field's domain.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Field::Constant(c) => *c,
            Field::Coordinate(axis) => x[*axis],
            Field::Sine { axis, wavenumber } => (wavenumber * x[*axis]).sin(),
            Field::GaussianBump { center, width } => {
                let r2: f64 = x.iter().zip(center.iter()).map(|(a, c)| (a - c) * (a - c)).sum();
                (-r2 / (width * width)).exp()
            }
            Field::Step {
                axis,
                threshold,
                low,
                high,
            } => {
                if x[*axis] > *threshold {
                    *high
                } else {
                    *low
                }
            }
            Field::CuspPower { nu } => x[x.len() - 1].powf(-nu),
            Field::MushroomBump(m) => {
                let (px, py) = (x[0], x[1]);
                if m.in_stem(px, py) {
                    ((py - m.base) / m.size).clamp(0.0, 1.0)
                } else if m.in_cap_disk(px, py) {
                    1.0
                } else {
                    0.0
                }
            }
            Field::Affine { scale, offset, inner } => scale * inner.eval(x) + offset,
            Field::Dilated { factor, inner } => {
                let y: smallvec::SmallVec<[f64; 4]> = x.iter().map(|c| c / factor).collect();
                inner.eval(&y)
            }
        }
    }

    /// `f(x)` with membership and finiteness checks.
    pub fn eval_in(&self, domain: &Domain, x: &Point) -> Result<f64> {
        if !domain.contains(x)? {
            return Err(Error::OutsideDomain);
        }
        let value = self.eval(x);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                value,
                at: x.to_vec(),
            });
        }
        Ok(value)
    }

    pub fn scaled(&self, scale: f64) -> Field {
        Field::Affine {
            scale,
            offset: 0.0,
            inner: Box::new(self.clone()),
        }
    }

    pub fn shifted(&self, offset: f64) -> Field {
        Field::Affine {
            scale: 1.0,
            offset,
            inner: Box::new(self.clone()),
        }
    }

    /// `x -> f(x / factor)`, the field carried to the dilated domain.
    pub fn dilated(&self, factor: f64) -> Field {
        Field::Dilated {
            factor,
            inner: Box::new(self.clone()),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Field::Constant(_) => true,
            Field::Affine { scale, inner, .. } => *scale == 0.0 || inner.is_constant(),
            Field::Dilated { inner, .. } => inner.is_constant(),
            _ => false,
        }
    }

    /// Global Lipschitz constant over the associated domain, when one exists.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            Field::Constant(_) => Some(0.0),
            Field::Coordinate(_) => Some(1.0),
            Field::Sine { wavenumber, .. } => Some(wavenumber.abs()),
            // max of |grad exp(-r^2/w^2)| is at r = w / sqrt(2)
            Field::GaussianBump { width, .. } => Some(2f64.sqrt() / width * (-0.5f64).exp()),
            Field::Step { low, high, .. } => (low == high).then_some(0.0),
            Field::CuspPower { .. } => None,
            Field::MushroomBump(m) => Some(1.0 / m.size),
            Field::Affine { scale, inner, .. } => inner.lipschitz_bound().map(|l| l * scale.abs()),
            Field::Dilated { factor, inner } => inner.lipschitz_bound().map(|l| l / factor.abs()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use std::f64::consts::PI;

    #[test]
    fn named_values() {
        assert_eq!(Field::Constant(3.0).eval(&[0.2, 0.9]), 3.0);
        assert_eq!(cusp_power(1.0).unwrap().eval(&[0.0, 0.5]), 2.0);
        assert_eq!(cusp_power(0.5).unwrap().eval(&[0.0, 0.25]), 2.0);
        assert!((cusp_power(1.0).unwrap().eval(&[0.0, 0.1]) - 10.0).abs() < 1e-12);
        assert_eq!(Field::Coordinate(0).eval(&[0.3, 0.8]), 0.3);
        let sine = smooth_test(SmoothKind::Sine, &[0.0, 2.0 * PI]).unwrap();
        assert!((sine.eval(&[0.25, 0.4]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cusp_power_matches_definition_on_grid() {
        let f = cusp_power(2.0).unwrap();
        for k in 1..50 {
            let y = k as f64 / 50.0;
            assert!((f.eval(&[0.0, y]) - y.powi(-2)).abs() <= 1e-12 * y.powi(-2));
        }
    }

    #[test]
    fn gaussian_definition() {
        let f = smooth_test(SmoothKind::GaussianBump, &[0.3, 0.5, 0.5]).unwrap();
        let x = [0.6, 0.45];
        let r2: f64 = 0.1 * 0.1 + 0.05 * 0.05;
        assert!((f.eval(&x) - (-r2 / 0.09).exp()).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(cusp_power(0.0).is_err());
        assert!(cusp_power(-1.0).is_err());
        let d = Domain::new(DomainSpec::mushroom(2.0, 1.0, vec![0.25])).unwrap();
        assert!(matches!(mushroom_bump(&d, 1), Err(Error::IndexOutOfRange { index: 1, len: 1 })));
    }

    #[test]
    fn mushroom_ramp() {
        let d = Domain::new(DomainSpec::mushroom(2.0, 1.0, vec![0.25])).unwrap();
        let f = mushroom_bump(&d, 0).unwrap();
        let m = d.mushrooms()[0];
        assert_eq!(f.eval(&[0.1, 0.5]), 0.0);
        assert_eq!(f.eval(&[m.center_x, m.base]), 0.0);
        assert_eq!(f.eval(&[m.center_x, m.top]), 1.0);
        assert_eq!(f.eval(&[m.center_x, m.cap_center_y]), 1.0);
        for t in [0.1, 0.5, 0.9] {
            let v = f.eval(&[m.center_x, m.base + t * m.size]);
            assert!((v - t).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_outside_domain_fails() {
        let d = Domain::new(DomainSpec::cusp(0.5)).unwrap();
        let f = cusp_power(1.0).unwrap();
        assert!(matches!(f.eval_in(&d, &Point::xy(0.5, 0.25)), Err(Error::OutsideDomain)));
        assert_eq!(f.eval_in(&d, &Point::xy(0.0, 0.5)).unwrap(), 2.0);
    }

    #[test]
    fn cusp_power_dilation_law() {
        let f = cusp_power(1.5).unwrap();
        let lambda: f64 = 0.5;
        for y in [0.1, 0.3, 0.7] {
            let ratio = f.eval(&[0.0, lambda * y]) / f.eval(&[0.0, y]);
            assert!((ratio - lambda.powf(-1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_round_trip_resolves() {
        let d = Domain::new(DomainSpec::unit_cube(2)).unwrap();
        let spec = FieldSpec::GaussianBump {
            center: vec![0.5, 0.5],
            width: 0.2,
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: FieldSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert!(back.resolve(&d).is_ok());
        assert!(FieldSpec::Coordinate { axis: 2 }.resolve(&d).is_err());
    }
}
