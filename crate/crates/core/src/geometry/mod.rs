//! The bounded domains: cube, ball, Hölder cusp and the mushroom domain.

mod boundary;
mod domain;
mod point;
mod sampling;

pub use boundary::Boundary;
pub use domain::{
    sphere_area, unit_ball_volume, Domain, DomainSpec, InteriorSample, Measure, MushroomPart, ACCEPTANCE_FLOOR,
};
pub use point::Point;
pub use sampling::{unit_direction, Component, Region};
