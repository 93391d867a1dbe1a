//! Functional principal components of a covariance surface.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::covariance::CovSurface;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Leading eigenpairs of a covariance operator.
///
/// `functions` is `D × K`: column `k` is the k-th eigenfunction, orthonormal
/// under the quadrature inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    pub functions: DMatrix<f64>,
    pub quadrature: Quadrature,
}

impl EigenBasis {
    pub fn empty(quadrature: Quadrature) -> Self {
        let d = quadrature.len();
        Self {
            eigenvalues: Vec::new(),
            functions: DMatrix::zeros(d, 0),
            quadrature,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.functions.nrows()
    }

    pub fn function(&self, k: usize) -> DVector<f64> {
        self.functions.column(k).into_owned()
    }

    /// `Zᵀ W Z`; the identity for an orthonormal basis.
    pub fn gram(&self) -> DMatrix<f64> {
        weighted_cross(&self.functions, &self.functions, &self.quadrature)
    }

    /// `Σ_k λ_k ζ_k(u) ζ_k(v)`.
    pub fn reconstruct_surface(&self) -> DMatrix<f64> {
        let lambda = DVector::from_column_slice(&self.eigenvalues);
        &self.functions * DMatrix::from_diagonal(&lambda) * self.functions.transpose()
    }

    /// Share of total variance carried by each retained component.
    pub fn variance_explained(&self, total: f64) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|l| if total > 0.0 { l / total } else { 0.0 })
            .collect()
    }
}

fn weighted_cross(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &Quadrature) -> DMatrix<f64> {
    let mut wb = b.clone();
    for (mut row, w) in wb.row_iter_mut().zip(q.weights()) {
        row *= *w;
    }
    a.transpose() * wb
}

/// Flip `v` so that its entry of largest magnitude is positive. Entries within
/// a relative 1e-10 of the maximum count as tied; the first one wins.
pub(crate) fn orient(mut v: DVector<f64>) -> DVector<f64> {
    let max = v.amax();
    if let Some(lead) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-10)) {
        if *lead < 0.0 {
            v.neg_mut();
        }
    }
    v
}

/// Top-`k` eigenpairs of the integral operator `f ↦ ∫ c(·, v) f(v) dv`.
///
/// Solved as the symmetric matrix problem `W^{1/2} C W^{1/2}`; eigenfunctions
/// are mapped back with `W^{-1/2}`.
pub fn fpca(surface: &CovSurface, k: usize) -> Result<EigenBasis> {
    let d = surface.dim();
    if k > d {
        return Err(Error::Rank {
            requested: k,
            available: d,
        });
    }
    if k == 0 {
        return Ok(EigenBasis::empty(surface.quadrature.clone()));
    }
    let weights = surface.quadrature.weights();
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Domain("quadrature weights must be positive".into()));
    }
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut a = surface.values.clone();
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] *= sqrt_w[i] * sqrt_w[j];
        }
    }
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(Ordering::Equal)
    });

    let mut functions = DMatrix::zeros(d, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(idx);
        let f = DVector::from_fn(d, |u, _| v[u] / sqrt_w[u]);
        functions.set_column(col, &orient(f));
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(EigenBasis {
        eigenvalues,
        functions,
        quadrature: surface.quadrature.clone(),
    })
}

/// Scores `⟨X_t − center, ζ_k⟩` for every row of `values`.
pub fn project_scores(
    values: &DMatrix<f64>,
    basis: &EigenBasis,
    center: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    if values.ncols() != basis.dim() || center.len() != basis.dim() {
        return Err(Error::Shape(format!(
            "curves have {} ages, center {}, basis {}",
            values.ncols(),
            center.len(),
            basis.dim()
        )));
    }
    let centered = super::covariance::center_rows(values, center);
    Ok(weighted_cross(&centered.transpose(), &basis.functions, &basis.quadrature))
}

/// `Σ_k score[t, k] ζ_k(u)` for every row of `scores`.
pub fn expand_scores(scores: &DMatrix<f64>, basis: &EigenBasis) -> DMatrix<f64> {
    scores * basis.functions.transpose()
}
