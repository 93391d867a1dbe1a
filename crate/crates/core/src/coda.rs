//! Centered log-ratio transform between death-count curves and
//! unconstrained curves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lifetable::LifeTableGrid;
use crate::quadrature::Quadrature;

/// A functional time series of clr-transformed curves on an integer age grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClrSeries {
    pub years: Vec<i32>,
    pub ages: Vec<u32>,
    /// `n × D`, one curve per row.
    pub values: DMatrix<f64>,
    pub quadrature: Quadrature,
}

impl ClrSeries {
    pub fn new(years: Vec<i32>, ages: Vec<u32>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != years.len() || values.ncols() != ages.len() {
            return Err(Error::Shape(format!(
                "{}×{} values for {} years and {} ages",
                values.nrows(),
                values.ncols(),
                years.len(),
                ages.len()
            )));
        }
        let quadrature = Quadrature::trapezoid(ages.len());
        Ok(Self {
            years,
            ages,
            values,
            quadrature,
        })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn n_ages(&self) -> usize {
        self.values.ncols()
    }

    /// Length of the age interval, `u_D − u_1`.
    pub fn eta(&self) -> f64 {
        match (self.ages.first(), self.ages.last()) {
            (Some(a), Some(b)) => f64::from(b - a),
            _ => 0.0,
        }
    }

    pub fn head(&self, len: usize) -> ClrSeries {
        ClrSeries {
            years: self.years[..len].to_vec(),
            ages: self.ages.clone(),
            values: self.values.rows(0, len).into_owned(),
            quadrature: self.quadrature.clone(),
        }
    }
}

/// clr of a single strictly positive curve:
/// `ln d(u) − (1/η) ∫ ln d(u) du` with trapezoidal quadrature.
pub fn clr_curve(counts: &[f64], quadrature: &Quadrature) -> Result<Vec<f64>> {
    if let Some(u) = counts.iter().position(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::Domain(format!(
            "clr needs strictly positive counts, got {} at age index {u}",
            counts[u]
        )));
    }
    let logs: Vec<f64> = counts.iter().map(|d| d.ln()).collect();
    let center = quadrature.integrate(&logs) / quadrature.total();
    Ok(logs.into_iter().map(|l| l - center).collect())
}

pub fn clr(grid: &LifeTableGrid) -> Result<ClrSeries> {
    let quadrature = Quadrature::trapezoid(grid.n_ages());
    let mut values = DMatrix::zeros(grid.n_years(), grid.n_ages());
    for t in 0..grid.n_years() {
        let row: Vec<f64> = grid.deaths.row(t).iter().copied().collect();
        let curve = clr_curve(&row, &quadrature).map_err(|_| {
            let u = row.iter().position(|&d| !(d > 0.0)).unwrap_or(0);
            Error::Domain(format!(
                "nonpositive death count {} in year {}, age {}",
                row[u], grid.years[t], grid.ages[u]
            ))
        })?;
        values.row_mut(t).copy_from_slice(&curve);
    }
    ClrSeries::new(grid.years.clone(), grid.ages.clone(), values)
}

/// Back-transform one curve to death counts summing to `radix`.
///
/// Counts are atoms at integer ages, so the normalizing integral is the
/// plain sum over the grid; this matches the life-table convention and
/// makes `inverse_clr ∘ clr` the identity on radix-normalized rows. The
/// curve is shifted by its maximum before exponentiating.
pub fn inverse_clr(curve: &[f64], radix: f64) -> Result<Vec<f64>> {
    if curve.is_empty() {
        return Err(Error::Shape("empty curve".into()));
    }
    if curve.iter().any(|x| !x.is_finite()) {
        return Err(Error::Range("non-finite clr value".into()));
    }
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let expd: Vec<f64> = curve.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = expd.iter().sum();
    let out: Vec<f64> = expd.iter().map(|e| e / total * radix).collect();
    if out.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Range(
            "clr curve spans too wide a range to back-transform".into(),
        ));
    }
    Ok(out)
}

pub fn inverse_clr_vector(curve: &DVector<f64>, radix: f64) -> Result<DVector<f64>> {
    inverse_clr(curve.as_slice(), radix).map(DVector::from_vec)
}
