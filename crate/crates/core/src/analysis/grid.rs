//! Finite evaluation grids in transformed coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 33;
pub const DEFAULT_T_MAX: f64 = 0.96;

/// A square grid `t_i = i t_max/(G-1)` per axis, with `x_i = t_i/(1-t_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    t_max: f64,
    t: Vec<f64>,
    x: Vec<f64>,
}

impl Grid2D {
    pub fn new(points: usize, t_max: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 2 points per axis, got {points}"
            )));
        }
        if !(t_max > 0.0 && t_max < 1.0) {
            return Err(Error::InvalidParams(format!(
                "t_max must lie in (0, 1), got {t_max}"
            )));
        }
        let step = t_max / (points - 1) as f64;
        let mut t: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
        t[points - 1] = t_max;
        let x = t.iter().map(|&t| t / (1.0 - t)).collect();
        Ok(Grid2D { t_max, t, x })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Spacing in transformed coordinates.
    pub fn step(&self) -> f64 {
        self.t_max / (self.len() - 1) as f64
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Row-major flat index of `(x_i, y_j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.len() + j
    }
}

impl Default for Grid2D {
    fn default() -> Self {
        Grid2D::new(DEFAULT_POINTS, DEFAULT_T_MAX).expect("default grid is valid")
    }
}
