use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A point in R^n. Coordinates are stored inline for n <= 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(SmallVec<[f64; 4]>);

impl Point {
    pub fn new(coords: impl IntoIterator<Item = f64>) -> Self {
        Self(coords.into_iter().collect())
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self(SmallVec::from_slice(&[x, y]))
    }

    pub fn zeros(n: usize) -> Self {
        Self(SmallVec::from_elem(0.0, n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// The last coordinate `x_n`.
    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + t * dir`.
    pub fn offset(&self, t: f64, dir: &[f64]) -> Point {
        Point(self.0.iter().zip(dir).map(|(a, d)| a + t * d).collect())
    }

    pub fn scaled(&self, c: f64) -> Point {
        Point(self.0.iter().map(|a| a * c).collect())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(SmallVec::from_vec(v))
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::xy(v[0], v[1])
    }
}
