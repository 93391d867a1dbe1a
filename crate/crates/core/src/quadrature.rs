//! Trapezoidal quadrature on a unit-spaced age grid.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Integration weights for a grid of `len` unit-spaced points.
///
/// Weights are `½, 1, …, 1, ½`, so they sum to the grid length `u_D − u_1`.
/// A single-point grid gets weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn trapezoid(len: usize) -> Self {
        let weights = match len {
            0 => Vec::new(),
            1 => vec![1.0],
            _ => {
                let mut w = vec![1.0; len];
                w[0] = 0.5;
                w[len - 1] = 0.5;
                w
            }
        };
        Self { weights }
    }

    /// Unit weights; turns every inner product into a plain dot product.
    pub fn unit(len: usize) -> Self {
        Self {
            weights: vec![1.0; len],
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.weights.len());
        debug_assert_eq!(b.len(), self.weights.len());
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.weights)
    }

    pub fn diagonal(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.as_vector())
    }
}
