//! Uniform symmetric grids on [-L, L].
//!
//! All solvers in this crate work on a uniform grid with an odd number of
//! nodes so that z = 0 is a node; translation of a traveling wave is pinned
//! there by a phase condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Requested grid: half-length and node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Domain half-length; the grid covers [-half_length, half_length].
    pub half_length: f64,
    /// Number of nodes, must be odd and >= 5.
    pub nodes: usize,
}

impl GridSpec {
    pub fn new(half_length: f64, nodes: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid half-length must be positive and finite, got {half_length}"
            )));
        }
        if nodes < 5 || nodes % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid needs an odd node count >= 5, got {nodes}"
            )));
        }
        Ok(Self { half_length, nodes })
    }

    pub fn build(&self) -> Grid {
        Grid::uniform(self.half_length, self.nodes)
    }

    /// Same domain with the mesh refined 2x (node count 2n-1 keeps it odd).
    pub fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            nodes: 2 * self.nodes - 1,
        }
    }
}

/// A realized uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    h: f64,
    half_length: f64,
}

impl Grid {
    pub fn uniform(half_length: f64, nodes: usize) -> Self {
        assert!(nodes >= 5 && nodes % 2 == 1, "grid needs an odd node count >= 5");
        let h = 2.0 * half_length / (nodes - 1) as f64;
        let points = (0..nodes).map(|i| -half_length + i as f64 * h).collect();
        Self { points, h, half_length }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// Index of the node at z = 0.
    pub fn center(&self) -> usize {
        self.points.len() / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_node_is_origin() {
        let g = Grid::uniform(10.0, 101);
        assert_eq!(g.center(), 50);
        assert!(g.point(g.center()).abs() < 1e-14);
        assert_eq!(g.len(), 101);
        assert!((g.h() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(-1.0, 11).is_err());
        assert!(GridSpec::new(1.0, 10).is_err());
        assert!(GridSpec::new(1.0, 3).is_err());
        let s = GridSpec::new(1.0, 11).unwrap();
        let r = s.refined();
        assert_eq!(r.nodes, 21);
        assert!((r.build().h() - s.build().h() / 2.0).abs() < 1e-15);
    }
}
