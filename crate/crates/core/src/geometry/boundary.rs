//! Planar boundary polylines with nearest-segment queries.

use rstar::primitives::Line;
use rstar::{PointDistance, RTree};

/// A closed boundary made of one or more vertex chains.
///
/// Straight boundary pieces are stored as single exact segments; only curved
/// pieces are discretized.
#[derive(Debug, Clone)]
pub struct Boundary {
    chains: Vec<Vec<[f64; 2]>>,
    tree: RTree<Line<[f64; 2]>>,
    max_spacing: f64,
    curved_spacing: f64,
}

impl Boundary {
    /// Builds the index. `curved_spacing` is the largest vertex spacing on
    /// discretized (curved) pieces; it bounds the discretization error.
    pub fn new(chains: Vec<Vec<[f64; 2]>>, curved_spacing: f64) -> Self {
        let mut lines = Vec::new();
        let mut max_spacing: f64 = 0.0;
        for chain in &chains {
            for w in chain.windows(2) {
                if w[0] != w[1] {
                    lines.push(Line::new(w[0], w[1]));
                    let dx = w[1][0] - w[0][0];
                    let dy = w[1][1] - w[0][1];
                    max_spacing = max_spacing.max(dx.hypot(dy));
                }
            }
        }
        Self {
            chains,
            tree: RTree::bulk_load(lines),
            max_spacing,
            curved_spacing,
        }
    }

    /// Euclidean distance from `(x, y)` to the nearest boundary segment.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        self.tree
            .nearest_neighbor([x, y])
            .map(|l| l.distance_2(&[x, y]).sqrt())
            .unwrap_or(f64::INFINITY)
    }

    pub fn chains(&self) -> &[Vec<[f64; 2]>] {
        &self.chains
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.chains.iter().flatten()
    }

    pub fn max_spacing(&self) -> f64 {
        self.max_spacing
    }

    pub fn curved_spacing(&self) -> f64 {
        self.curved_spacing
    }

    /// Largest pairwise vertex distance, computed on the convex hull.
    pub fn vertex_diameter(&self) -> f64 {
        let hull = convex_hull(self.vertices().copied().collect());
        let mut best: f64 = 0.0;
        for (i, a) in hull.iter().enumerate() {
            for b in &hull[i + 1..] {
                best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        best
    }

    /// Rows `x,y` for every vertex, chains separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (k, chain) in self.chains.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            for v in chain {
                out.push_str(&format!("{},{}\n", v[0], v[1]));
            }
        }
        out
    }
}

/// Andrew's monotone chain.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() * 2);
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_distance_is_exact() {
        let b = Boundary::new(
            vec![vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]],
            0.0,
        );
        assert!((b.distance(0.5, 0.5) - 0.5).abs() < 1e-15);
        assert!((b.distance(0.1, 0.7) - 0.1).abs() < 1e-15);
        assert!((b.vertex_diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hull_drops_interior_points() {
        let hull = convex_hull(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 2.0], [0.0, 2.0]]);
        assert_eq!(hull.len(), 4);
    }
}
