//! Compositional Lee–Carter baseline: principal components of the clr
//! matrix, residual-matrix bootstrap with a full refit per replicate, and
//! exponential-smoothing extrapolation of the scores.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coda::{inverse_clr, ClrSeries};
use crate::error::{Error, Result};
use crate::forecast::{validate_levels, BootstrapForecast, ForecastMethod, DEFAULT_LEVELS, DEFAULT_REPLICATIONS};
use crate::fts::{center_rows, column_means, orient};
use crate::lifetable::DEFAULT_RADIX;
use crate::rng::stream_rng;

pub const MIN_LC_YEARS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LcFit {
    pub years: Vec<i32>,
    pub ages: Vec<u32>,
    pub mean_curve: DVector<f64>,
    /// `D × K`, orthonormal columns.
    pub components: DMatrix<f64>,
    /// `n × K`
    pub scores: DMatrix<f64>,
    /// All singular values of the centered matrix, descending.
    pub singular_values: Vec<f64>,
    /// `n × D`
    pub residuals: DMatrix<f64>,
}

impl LcFit {
    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }

    /// `mean + scores · componentsᵀ`, without residuals.
    pub fn fitted(&self) -> DMatrix<f64> {
        let mut out = &self.scores * self.components.transpose();
        for mut row in out.row_iter_mut() {
            row += self.mean_curve.transpose();
        }
        out
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.fitted() + &self.residuals
    }
}

fn decompose(values: &DMatrix<f64>, k: usize) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (n, d) = values.shape();
    if k == 0 {
        return Err(Error::Domain("at least one component is required".into()));
    }
    if k > n.min(d) {
        return Err(Error::Rank {
            requested: k,
            available: n.min(d),
        });
    }
    let mean = column_means(values);
    let centered = center_rows(values, &mean);
    let (singular_values, directions) = match gram_directions(&centered, k) {
        Some(found) => found,
        None => svd_directions(&centered, k),
    };
    let mut components = DMatrix::zeros(d, k);
    let mut scores = DMatrix::zeros(n, k);
    for (j, v) in directions.into_iter().enumerate() {
        let v = orient(v);
        scores.set_column(j, &(&centered * &v));
        components.set_column(j, &v);
    }
    let residuals = centered - &scores * components.transpose();
    Ok((mean, components, scores, singular_values, residuals))
}

/// Leading right singular vectors from the eigenvectors of `A Aᵀ`, which is
/// the smaller Gram matrix for life-table shapes. Returns `None` when a
/// requested singular value is too small to recover its vector this way.
fn gram_directions(a: &DMatrix<f64>, k: usize) -> Option<(Vec<f64>, Vec<DVector<f64>>)> {
    if a.nrows() > a.ncols() {
        return None;
    }
    let eig = SymmetricEigen::new(a * a.transpose());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let singular: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let top = singular[0];
    if !(top > 0.0) || singular[k - 1] <= 1e-6 * top {
        return None;
    }
    let directions = order[..k]
        .iter()
        .zip(&singular)
        .map(|(&i, s)| {
            let v: DVector<f64> = a.transpose() * eig.eigenvectors.column(i) / *s;
            let norm = v.norm();
            v / norm
        })
        .collect();
    Some((singular, directions))
}

fn svd_directions(a: &DMatrix<f64>, k: usize) -> (Vec<f64>, Vec<DVector<f64>>) {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular = order.iter().map(|&i| svd.singular_values[i]).collect();
    let directions = order[..k].iter().map(|&i| v_t.row(i).transpose()).collect();
    (singular, directions)
}

pub fn fit_lc(series: &ClrSeries, k: usize) -> Result<LcFit> {
    let (mean_curve, components, scores, singular_values, residuals) = decompose(&series.values, k)?;
    Ok(LcFit {
        years: series.years.clone(),
        ages: series.ages.clone(),
        mean_curve,
        components,
        scores,
        singular_values,
        residuals,
    })
}

/// How the residual matrix is resampled in each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    /// Each entry drawn independently from all `n · D` residuals, in
    /// row-major order.
    Entries,
    /// Each row drawn from the `n` residual curves.
    Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcConfig {
    pub replications: usize,
    pub levels: Vec<f64>,
    pub radix: f64,
    pub resampling: Resampling,
    pub method: ForecastMethod,
}

impl Default for LcConfig {
    fn default() -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            levels: DEFAULT_LEVELS.to_vec(),
            radix: DEFAULT_RADIX,
            resampling: Resampling::Entries,
            method: ForecastMethod::EtsLike,
        }
    }
}

pub fn resample_residuals<R: Rng>(residuals: &DMatrix<f64>, resampling: Resampling, rng: &mut R) -> DMatrix<f64> {
    let (n, d) = residuals.shape();
    let mut out = DMatrix::zeros(n, d);
    match resampling {
        Resampling::Entries => {
            for t in 0..n {
                for u in 0..d {
                    let idx = rng.gen_range(0..n * d);
                    out[(t, u)] = residuals[(idx / d, idx % d)];
                }
            }
        }
        Resampling::Rows => {
            for t in 0..n {
                let row = rng.gen_range(0..n);
                out.row_mut(t).copy_from(&residuals.row(row));
            }
        }
    }
    out
}

/// Central clr curves for horizons `1..=max_horizon` from a decomposition.
fn extrapolate(
    mean: &DVector<f64>,
    components: &DMatrix<f64>,
    scores: &DMatrix<f64>,
    method: ForecastMethod,
    max_horizon: usize,
) -> Vec<DVector<f64>> {
    let paths: Vec<Vec<f64>> = scores
        .column_iter()
        .map(|c| method.fit(c.as_slice()).forecast(max_horizon))
        .collect();
    (0..max_horizon)
        .map(|i| {
            let mut curve = mean.clone();
            for (k, path) in paths.iter().enumerate() {
                curve.axpy(path[i], &components.column(k), 1.0);
            }
            curve
        })
        .collect()
}

/// Bootstrap forecasts for horizons `1..=max_horizon`.
///
/// Replicate `b` uses stream `b` of the generator keyed by `seed`: resample
/// the residual matrix, add it to the fitted values, refit mean and
/// components, and extrapolate the refitted scores.
pub fn lc_bootstrap_forecasts(
    fit: &LcFit,
    config: &LcConfig,
    max_horizon: usize,
    seed: u64,
) -> Result<Vec<BootstrapForecast>> {
    let n = fit.scores.nrows();
    if n < MIN_LC_YEARS {
        return Err(Error::InsufficientData {
            what: "Lee–Carter forecast",
            needed: MIN_LC_YEARS,
            got: n,
        });
    }
    if max_horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if config.replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    validate_levels(&config.levels)?;
    let k = fit.n_components();
    let fitted = fit.fitted();

    let replicates: Vec<Vec<DVector<f64>>> = (0..config.replications)
        .into_par_iter()
        .map(|b| -> Result<Vec<DVector<f64>>> {
            let mut rng = stream_rng(seed, b as u64);
            let boot = &fitted + resample_residuals(&fit.residuals, config.resampling, &mut rng);
            let (mean, components, scores, _, _) = decompose(&boot, k)?;
            extrapolate(&mean, &components, &scores, config.method, max_horizon)
                .into_iter()
                .map(|c| inverse_clr(c.as_slice(), config.radix).map(DVector::from_vec))
                .collect()
        })
        .collect::<Result<_>>()?;

    let central = extrapolate(&fit.mean_curve, &fit.components, &fit.scores, config.method, max_horizon);
    let d = fit.mean_curve.len();
    (0..max_horizon)
        .map(|i| {
            let samples = DMatrix::from_fn(config.replications, d, |b, u| replicates[b][i][u]);
            let point = DVector::from_vec(inverse_clr(central[i].as_slice(), config.radix)?);
            Ok(BootstrapForecast::from_samples(i + 1, samples, point, &config.levels, seed))
        })
        .collect()
}

pub fn lc_bootstrap_forecast(fit: &LcFit, config: &LcConfig, horizon: usize, seed: u64) -> Result<BootstrapForecast> {
    let mut all = lc_bootstrap_forecasts(fit, config, horizon, seed)?;
    Ok(all.pop().expect("one forecast per horizon"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand_distr::StandardNormal;

    fn series(values: DMatrix<f64>) -> ClrSeries {
        let (n, d) = values.shape();
        ClrSeries::new((0..n as i32).collect(), (0..d as u32).collect(), values).unwrap()
    }

    fn random_matrix(seed: u64, n: usize, d: usize) -> DMatrix<f64> {
        let mut rng = seeded_rng(seed);
        DMatrix::<f64>::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn rank_one_matrix_has_no_residual() {
        let a = DVector::from_fn(12, |t, _| 1.0 - 0.2 * t as f64);
        let b = DVector::from_fn(7, |u, _| (u as f64).sin());
        let mean = DVector::from_fn(7, |u, _| u as f64 * 0.1);
        let values = DMatrix::from_fn(12, 7, |t, u| mean[u] + a[t] * b[u]);
        let fit = fit_lc(&series(values.clone()), 1).unwrap();
        assert!(fit.residuals.amax() < 1e-8);
        assert!((fit.reconstruct() - values).amax() < 1e-10);
    }

    #[test]
    fn full_rank_has_zero_residual() {
        let values = random_matrix(1, 6, 4);
        let fit = fit_lc(&series(values.clone()), 4).unwrap();
        assert!(fit.residuals.amax() < 1e-10);
        assert!(fit_lc(&series(values), 5).is_err());
    }

    #[test]
    fn truncation_error_equals_tail_energy() {
        let values = random_matrix(2, 5, 4);
        let fit = fit_lc(&series(values.clone()), 2).unwrap();
        // oracle: eigenvalues of AᵀA for the centered matrix
        let mean = DVector::from_fn(4, |u, _| values.column(u).mean());
        let centered = DMatrix::from_fn(5, 4, |t, u| values[(t, u)] - mean[u]);
        let mut eig: Vec<f64> = SymmetricEigen::new(centered.transpose() * &centered)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let tail: f64 = eig[2..].iter().map(|v| v.max(0.0)).sum();
        assert!((fit.residuals.norm_squared() - tail).abs() < 1e-10);
        for (s, e) in fit.singular_values.iter().zip(&eig) {
            assert!((s * s - e).abs() < 1e-10);
        }
        // orthonormal components
        let gram = fit.components.transpose() * &fit.components;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn sign_convention_is_stable() {
        let values = random_matrix(3, 10, 6);
        let a = fit_lc(&series(values.clone()), 3).unwrap();
        let b = fit_lc(&series(-values.clone() + DMatrix::from_element(10, 6, 0.0)), 3).unwrap();
        for k in 0..3 {
            let c = a.components.column(k);
            let lead = c.iter().find(|x| x.abs() >= c.amax() * (1.0 - 1e-10)).unwrap();
            assert!(*lead > 0.0);
            // negating the data flips scores, not components
            assert!((a.components.column(k) - b.components.column(k)).amax() < 1e-10);
            assert!((a.scores.column(k) + b.scores.column(k)).amax() < 1e-10);
        }
    }

    #[test]
    fn scripted_three_replicate_trace() {
        let values = DMatrix::from_row_slice(4, 3, &[
            0.9, -0.1, -0.8, //
            0.7, 0.1, -0.8, //
            0.6, 0.1, -0.7, //
            0.3, 0.3, -0.6,
        ]);
        let fit = fit_lc(&series(values.clone()), 1).unwrap();
        let config = LcConfig {
            replications: 3,
            levels: vec![0.5],
            radix: 1000.0,
            ..LcConfig::default()
        };
        let out = lc_bootstrap_forecast(&fit, &config, 2, 99).unwrap();

        let flat: Vec<f64> = fit.residuals.iter().copied().collect(); // column-major
        for b in 0..3 {
            let mut rng = stream_rng(99, b);
            let mut boot = fit.fitted();
            for t in 0..4 {
                for u in 0..3 {
                    let idx = rng.gen_range(0..12);
                    let (r, c) = (idx / 3, idx % 3);
                    boot[(t, u)] += flat[c * 4 + r];
                }
            }
            // refit by eigen-decomposition of the centered cross-product
            let mean: Vec<f64> = (0..3).map(|u| boot.column(u).mean()).collect();
            let centered = DMatrix::from_fn(4, 3, |t, u| boot[(t, u)] - mean[u]);
            let eig = SymmetricEigen::new(centered.transpose() * &centered);
            let top = (0..3)
                .max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
                .unwrap();
            let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let scores: Vec<f64> = (0..4).map(|t| (0..3).map(|u| centered[(t, u)] * v[u]).sum()).collect();
            let path = ForecastMethod::EtsLike.fit(&scores).forecast(2);
            let curve: Vec<f64> = (0..3).map(|u| mean[u] + path[1] * v[u]).collect();
            let expd: Vec<f64> = curve.iter().map(|x| x.exp()).collect();
            let total: f64 = expd.iter().sum();
            for u in 0..3 {
                let expected = expd[u] / total * 1000.0;
                assert!(
                    (out.samples[(b as usize, u)] - expected).abs() < 1e-8,
                    "replicate {b}, age {u}: {} vs {expected}",
                    out.samples[(b as usize, u)]
                );
            }
        }
    }

    #[test]
    fn zero_residuals_give_identical_replicates() {
        let a = DVector::from_fn(15, |t, _| -0.1 * t as f64);
        let g = DVector::from_fn(9, |u, _| u as f64 / 8.0 - 0.5);
        let values = DMatrix::from_fn(15, 9, |t, u| a[t] * g[u]);
        let fit = fit_lc(&series(values), 1).unwrap();
        assert!(fit.residuals.amax() < 1e-12);
        let config = LcConfig {
            replications: 20,
            ..LcConfig::default()
        };
        let fc = lc_bootstrap_forecast(&fit, &config, 3, 4).unwrap();
        for row in fc.samples.row_iter() {
            let gap = (row - fc.samples.row(0)).amax();
            assert!(gap < 1e-6, "{gap}");
        }
        for band in &fc.bands {
            assert!((&band.upper - &band.lower).amax() < 1e-6);
        }
    }

    #[test]
    fn deterministic_and_conserves_radix() {
        let values = random_matrix(5, 20, 8) * 0.1;
        let fit = fit_lc(&series(values), 2).unwrap();
        for resampling in [Resampling::Entries, Resampling::Rows] {
            let config = LcConfig {
                replications: 60,
                resampling,
                ..LcConfig::default()
            };
            let a = lc_bootstrap_forecasts(&fit, &config, 4, 12).unwrap();
            let b = lc_bootstrap_forecasts(&fit, &config, 4, 12).unwrap();
            assert_eq!(a, b);
            assert_eq!(a[1], lc_bootstrap_forecast(&fit, &config, 2, 12).unwrap());
            for fc in &a {
                for row in fc.samples.row_iter() {
                    assert!((row.sum() - DEFAULT_RADIX).abs() < 1e-6);
                }
                let (b80, b95) = (fc.band(0.8).unwrap(), fc.band(0.95).unwrap());
                for u in 0..8 {
                    assert!(b95.lower[u] <= b80.lower[u] && b80.upper[u] <= b95.upper[u]);
                }
            }
        }
    }

    #[test]
    fn full_rank_refit_reproduces_bootstrap_matrix() {
        let values = random_matrix(6, 7, 5);
        let fit = fit_lc(&series(values), 2).unwrap();
        let mut rng = stream_rng(3, 0);
        let boot = fit.fitted() + resample_residuals(&fit.residuals, Resampling::Entries, &mut rng);
        let refit = fit_lc(&series(boot.clone()), 5).unwrap();
        assert!((refit.fitted() - boot).amax() < 1e-8);
    }
}
