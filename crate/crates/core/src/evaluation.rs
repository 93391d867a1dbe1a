//! Expanding-window backtests scored by empirical coverage.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coda::{clr, ClrSeries};
use crate::dfm::{fit_dfm, DfmConfig};
use crate::error::{Error, Result};
use crate::forecast::{Band, BootstrapConfig, BootstrapForecast, DfmForecaster};
use crate::lc::{fit_lc, lc_bootstrap_forecasts, LcConfig};
use crate::lifetable::LifeTableGrid;
use crate::rng::derive_seed;

pub const DEFAULT_MAX_HORIZON: usize = 20;

/// A forecasting model together with its bootstrap settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Dfm {
        fit: DfmConfig,
        bootstrap: BootstrapConfig,
    },
    Lc {
        components: usize,
        bootstrap: LcConfig,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Dfm { .. } => "dfm",
            ModelSpec::Lc { .. } => "lc",
        }
    }

    pub fn levels(&self) -> &[f64] {
        match self {
            ModelSpec::Dfm { bootstrap, .. } => &bootstrap.levels,
            ModelSpec::Lc { bootstrap, .. } => &bootstrap.levels,
        }
    }

    /// Fit on the whole series and forecast horizons `1..=max_horizon`.
    pub fn forecast(&self, series: &ClrSeries, max_horizon: usize, seed: u64) -> Result<Vec<BootstrapForecast>> {
        match self {
            ModelSpec::Dfm { fit, bootstrap } => {
                let fitted = fit_dfm(series, fit)?;
                let forecaster = DfmForecaster::new(&fitted, bootstrap, max_horizon)?;
                (1..=max_horizon)
                    .map(|h| forecaster.forecast(h, derive_seed(seed, &[h as u64])))
                    .collect()
            }
            ModelSpec::Lc {
                components,
                bootstrap,
            } => {
                let fitted = fit_lc(series, *components)?;
                lc_bootstrap_forecasts(&fitted, bootstrap, max_horizon, seed)
            }
        }
    }

    /// Bands only, dropping the sample matrices as soon as they are summarized.
    pub fn forecast_bands(&self, series: &ClrSeries, max_horizon: usize, seed: u64) -> Result<Vec<Vec<Band>>> {
        match self {
            ModelSpec::Dfm { fit, bootstrap } => {
                let fitted = fit_dfm(series, fit)?;
                let forecaster = DfmForecaster::new(&fitted, bootstrap, max_horizon)?;
                (1..=max_horizon)
                    .map(|h| {
                        forecaster
                            .forecast(h, derive_seed(seed, &[h as u64]))
                            .map(|f| f.bands)
                    })
                    .collect()
            }
            ModelSpec::Lc { .. } => Ok(self
                .forecast(series, max_horizon, seed)?
                .into_iter()
                .map(|f| f.bands)
                .collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledModel {
    pub label: String,
    pub spec: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestPlan {
    /// Years in the first fitting window.
    pub initial_window: usize,
    pub max_horizon: usize,
    pub models: Vec<LabeledModel>,
    /// Replace every interval by `(−∞, +∞)`; a hook for checking the
    /// bookkeeping independently of any model.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unbounded_intervals: bool,
}

impl BacktestPlan {
    pub fn validate(&self, n_years: usize) -> Result<()> {
        if self.max_horizon == 0 {
            return Err(Error::Config("max horizon must be at least 1".into()));
        }
        if self.initial_window == 0 || self.initial_window + self.max_horizon > n_years {
            return Err(Error::Config(format!(
                "initial window {} plus max horizon {} exceeds {} years",
                self.initial_window, self.max_horizon, n_years
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models to backtest".into()));
        }
        Ok(())
    }

    /// Last index of each fitting window: windows cover years `0..end` for
    /// `end = initial_window..n`.
    pub fn window_ends(&self, n_years: usize) -> std::ops::Range<usize> {
        self.initial_window..n_years
    }

    /// Forecast origins available at horizon `h`: `n − initial_window + 1 − h`.
    pub fn origins(&self, n_years: usize, horizon: usize) -> usize {
        (n_years + 1).saturating_sub(self.initial_window + horizon)
    }
}

/// Holdout values outside their interval, and total values checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCount {
    pub outside: u64,
    pub total: u64,
}

impl CoverageCount {
    pub fn add(&mut self, other: CoverageCount) {
        self.outside += other.outside;
        self.total += other.total;
    }

    pub fn ecp(&self) -> f64 {
        1.0 - self.outside as f64 / self.total as f64
    }
}

/// Values equal to a bound count as covered.
pub fn count_outside(holdout: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> Result<CoverageCount> {
    if holdout.len() != lower.len() || holdout.len() != upper.len() {
        return Err(Error::Shape(format!(
            "holdout of length {} against bounds of length {} and {}",
            holdout.len(),
            lower.len(),
            upper.len()
        )));
    }
    let outside = holdout
        .iter()
        .zip(lower.iter().zip(upper.iter()))
        .filter(|(d, (lb, ub))| d > ub || d < lb)
        .count() as u64;
    Ok(CoverageCount {
        outside,
        total: holdout.len() as u64,
    })
}

/// Empirical coverage over forecast origins:
/// `1 − (1 / (W·D)) Σ_ζ Σ_u [1{d > ub} + 1{d < lb}]`.
pub fn ecp(holdouts: &[DVector<f64>], bounds: &[(DVector<f64>, DVector<f64>)]) -> Result<f64> {
    if holdouts.len() != bounds.len() {
        return Err(Error::Shape(format!(
            "{} holdouts for {} intervals",
            holdouts.len(),
            bounds.len()
        )));
    }
    if holdouts.is_empty() {
        return Err(Error::Shape("no forecast origins".into()));
    }
    let mut count = CoverageCount::default();
    for (d, (lb, ub)) in holdouts.iter().zip(bounds) {
        count.add(count_outside(d, lb, ub)?);
    }
    Ok(count.ecp())
}

pub fn cpd(ecp_value: f64, nominal: f64) -> f64 {
    (ecp_value - nominal).abs()
}

/// Means of `(ECP(h), CPD(h))` over horizons.
pub fn average_metrics(per_horizon: &[(f64, f64)]) -> Result<(f64, f64)> {
    if per_horizon.is_empty() {
        return Err(Error::Domain("no horizons to average".into()));
    }
    let n = per_horizon.len() as f64;
    let ecp_bar = per_horizon.iter().map(|p| p.0).sum::<f64>() / n;
    let cpd_bar = per_horizon.iter().map(|p| p.1).sum::<f64>() / n;
    Ok((ecp_bar, cpd_bar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonMetrics {
    pub model: String,
    pub level: f64,
    pub horizon: usize,
    pub origins: usize,
    pub count: CoverageCount,
    pub ecp: f64,
    pub cpd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub model: String,
    pub level: f64,
    pub ecp_bar: f64,
    pub cpd_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub n_years: usize,
    pub initial_window: usize,
    pub max_horizon: usize,
    pub horizons: Vec<HorizonMetrics>,
    pub summary: Vec<SummaryMetrics>,
}

/// Seed for one (window, model) cell.
pub fn window_seed(seed: u64, window_end: usize, model_index: usize) -> u64 {
    derive_seed(seed, &[window_end as u64, model_index as u64])
}

pub fn run_backtest(grid: &LifeTableGrid, plan: &BacktestPlan, seed: u64) -> Result<BacktestReport> {
    let n = grid.n_years();
    plan.validate(n)?;
    let series = clr(grid)?;
    let holdout = |t: usize| DVector::from_iterator(grid.n_ages(), grid.deaths.row(t).iter().copied());

    // counts[m][level][h − 1], accumulated per window then reduced in window order
    let per_window: Vec<Vec<Vec<Vec<CoverageCount>>>> = plan
        .window_ends(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|end| -> Result<_> {
            let horizon = plan.max_horizon.min(n - end);
            let head = series.head(end);
            plan.models
                .iter()
                .enumerate()
                .map(|(m, model)| {
                    let levels = model.spec.levels();
                    let bands = if plan.unbounded_intervals {
                        (0..horizon)
                            .map(|_| unbounded_bands(levels, grid.n_ages()))
                            .collect()
                    } else {
                        model.spec.forecast_bands(&head, horizon, window_seed(seed, end, m))?
                    };
                    let mut counts = vec![vec![CoverageCount::default(); plan.max_horizon]; levels.len()];
                    for (i, horizon_bands) in bands.iter().enumerate() {
                        let actual = holdout(end + i);
                        for (l, band) in horizon_bands.iter().enumerate() {
                            counts[l][i] = count_outside(&actual, &band.lower, &band.upper)?;
                        }
                    }
                    Ok(counts)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut horizons = Vec::new();
    let mut summary = Vec::new();
    for (m, model) in plan.models.iter().enumerate() {
        for (l, &level) in model.spec.levels().iter().enumerate() {
            let mut per_h = Vec::with_capacity(plan.max_horizon);
            for h in 1..=plan.max_horizon {
                let mut count = CoverageCount::default();
                for window in &per_window {
                    count.add(window[m][l][h - 1]);
                }
                let e = count.ecp();
                let c = cpd(e, level);
                per_h.push((e, c));
                horizons.push(HorizonMetrics {
                    model: model.label.clone(),
                    level,
                    horizon: h,
                    origins: plan.origins(n, h),
                    count,
                    ecp: e,
                    cpd: c,
                });
            }
            let (ecp_bar, cpd_bar) = average_metrics(&per_h)?;
            summary.push(SummaryMetrics {
                model: model.label.clone(),
                level,
                ecp_bar,
                cpd_bar,
            });
        }
    }
    Ok(BacktestReport {
        n_years: n,
        initial_window: plan.initial_window,
        max_horizon: plan.max_horizon,
        horizons,
        summary,
    })
}

fn unbounded_bands(levels: &[f64], d: usize) -> Vec<Band> {
    levels
        .iter()
        .map(|&level| Band {
            level,
            lower: DVector::from_element(d, f64::NEG_INFINITY),
            upper: DVector::from_element(d, f64::INFINITY),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn ecp_simple_cases() {
        let d = DVector::from_vec(vec![1.0, 2.0]);
        let inside = (DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![3.0, 3.0]));
        let outside = (DVector::from_vec(vec![5.0, 5.0]), DVector::from_vec(vec![6.0, 6.0]));
        let half = (DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![0.5, 3.0]));
        assert_eq!(ecp(&[d.clone()], &[inside]).unwrap(), 1.0);
        assert_eq!(ecp(&[d.clone()], &[outside]).unwrap(), 0.0);
        assert_eq!(ecp(&[d.clone()], &[half]).unwrap(), 0.5);
        // bounds touching the value count as covered
        let touching = (d.clone(), d.clone());
        assert_eq!(ecp(&[d.clone()], &[touching]).unwrap(), 1.0);
        assert!(ecp(&[d], &[]).is_err());
    }

    #[test]
    fn cpd_and_averages() {
        assert_eq!(cpd(0.95, 0.95), 0.0);
        assert!((cpd(0.7327, 0.8) - 0.0673).abs() < 1e-12);
        assert!((cpd(1.0, 0.8) - 0.2).abs() < 1e-12);
        let (e, c) = average_metrics(&[(0.8, 0.0); 20]).unwrap();
        assert!((e - 0.8).abs() < 1e-12 && c == 0.0);
        let alternating: Vec<(f64, f64)> = (0..20)
            .map(|h| {
                let e = if h % 2 == 0 { 0.7 } else { 0.9 };
                (e, cpd(e, 0.8))
            })
            .collect();
        let (e, c) = average_metrics(&alternating).unwrap();
        assert!((e - 0.8).abs() < 1e-12 && (c - 0.1).abs() < 1e-12);
        assert!(c > (e - 0.8).abs());
        assert!(average_metrics(&[]).is_err());
        // a published row: ECP-bar 0.7327, CPD-bar 0.0735 at 0.8
        assert!(0.0735 >= cpd(0.7327, 0.8));
    }

    fn brute_force_ecp(holdouts: &[Vec<f64>], lower: &[Vec<f64>], upper: &[Vec<f64>]) -> f64 {
        let mut misses = 0u64;
        let mut total = 0u64;
        for z in 0..holdouts.len() {
            for i in 0..holdouts[z].len() {
                total += 1;
                if holdouts[z][i] > upper[z][i] {
                    misses += 1;
                }
                if holdouts[z][i] < lower[z][i] {
                    misses += 1;
                }
            }
        }
        1.0 - misses as f64 / total as f64
    }

    #[test]
    fn three_window_scripted_oracle() {
        let holdouts = [vec![1.0, 5.0, 3.0], vec![2.0, 2.0, 2.0], vec![0.0, 9.0, 4.0]];
        let lower = [vec![0.0, 0.0, 3.5], vec![2.0, 1.0, 2.5], vec![-1.0, 1.0, 1.0]];
        let upper = [vec![2.0, 4.0, 4.0], vec![3.0, 3.0, 3.0], vec![1.0, 8.0, 5.0]];
        let v = |x: &Vec<f64>| DVector::from_vec(x.clone());
        let bounds: Vec<_> = (0..3).map(|z| (v(&lower[z]), v(&upper[z]))).collect();
        let got = ecp(&holdouts.iter().map(v).collect::<Vec<_>>(), &bounds).unwrap();
        // misses: (0,1) above, (0,2) below, (1,2) below, (2,1) above → 4 of 9
        assert_eq!(got, 1.0 - 4.0 / 9.0);
        assert_eq!(got, brute_force_ecp(&holdouts, &lower, &upper));
    }

    #[test]
    fn randomized_instances_match_brute_force() {
        let mut rng = seeded_rng(4);
        for _ in 0..250 {
            let windows = rng.gen_range(1..6);
            let d = rng.gen_range(1..8);
            // integer-valued draws make ties with the bounds common
            let mut draw = |n: usize| -> Vec<Vec<f64>> {
                (0..n)
                    .map(|_| (0..d).map(|_| rng.gen_range(-3..4) as f64).collect())
                    .collect()
            };
            let holdouts = draw(windows);
            let a = draw(windows);
            let b = draw(windows);
            let lower: Vec<Vec<f64>> = a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.min(*q)).collect()).collect();
            let upper: Vec<Vec<f64>> = a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.max(*q)).collect()).collect();
            let v = |x: &Vec<f64>| DVector::from_vec(x.clone());
            let bounds: Vec<_> = lower.iter().zip(&upper).map(|(l, u)| (v(l), v(u))).collect();
            let got = ecp(&holdouts.iter().map(v).collect::<Vec<_>>(), &bounds).unwrap();
            assert_eq!(got, brute_force_ecp(&holdouts, &lower, &upper));
        }
    }

    proptest! {
        #[test]
        fn widening_never_lowers_coverage(
            values in prop::collection::vec((-5f64..5.0, -5f64..5.0, -5f64..5.0), 1..40),
            widen in prop::collection::vec((0f64..2.0, 0f64..2.0), 40),
        ) {
            let d = DVector::from_iterator(values.len(), values.iter().map(|v| v.0));
            let lo = DVector::from_iterator(values.len(), values.iter().map(|v| v.1.min(v.2)));
            let hi = DVector::from_iterator(values.len(), values.iter().map(|v| v.1.max(v.2)));
            let lo2 = DVector::from_iterator(values.len(), lo.iter().zip(&widen).map(|(l, w)| l - w.0));
            let hi2 = DVector::from_iterator(values.len(), hi.iter().zip(&widen).map(|(u, w)| u + w.1));
            let a = ecp(&[d.clone()], &[(lo, hi)]).unwrap();
            let b = ecp(&[d], &[(lo2, hi2)]).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn averaged_cpd_dominates_bias(
            ecps in prop::collection::vec(0f64..1.0, 1..30),
            nominal in 0.5f64..0.99,
        ) {
            let per_h: Vec<(f64, f64)> = ecps.iter().map(|&e| (e, cpd(e, nominal))).collect();
            let (e, c) = average_metrics(&per_h).unwrap();
            prop_assert!(c >= (e - nominal).abs() - 1e-15);
        }
    }

    fn flat_grid(n: usize, d: usize) -> LifeTableGrid {
        let mut rng = seeded_rng(1);
        let deaths = nalgebra::DMatrix::from_fn(n, d, |_, _| rng.gen_range(1.0..2.0));
        LifeTableGrid {
            years: (1900..1900 + n as i32).collect(),
            ages: (0..d as u32).collect(),
            deaths,
            radix: 100_000.0,
        }
    }

    fn dfm_plan(initial: usize, h: usize, unbounded: bool) -> BacktestPlan {
        BacktestPlan {
            initial_window: initial,
            max_horizon: h,
            models: vec![LabeledModel {
                label: "dfm".into(),
                spec: ModelSpec::Dfm {
                    fit: DfmConfig::new(1, 1),
                    bootstrap: BootstrapConfig {
                        replications: 50,
                        ..BootstrapConfig::default()
                    },
                },
            }],
            unbounded_intervals: unbounded,
        }
    }

    #[test]
    fn unbounded_hook_gives_full_coverage_and_origin_counts() {
        let grid = flat_grid(100, 5);
        let report = run_backtest(&grid, &dfm_plan(80, 20, true), 1).unwrap();
        assert_eq!(report.horizons.len(), 40);
        for m in &report.horizons {
            assert_eq!(m.ecp, 1.0);
            assert_eq!(m.origins, 21 - m.horizon);
            assert_eq!(m.count.total, (m.origins * 5) as u64);
        }
    }

    #[test]
    fn infeasible_plan_is_rejected() {
        let grid = flat_grid(30, 5);
        assert!(matches!(
            run_backtest(&grid, &dfm_plan(20, 11, false), 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn backtest_is_reproducible() {
        let grid = flat_grid(30, 6);
        let plan = dfm_plan(22, 4, false);
        let a = run_backtest(&grid, &plan, 9).unwrap();
        let b = run_backtest(&grid, &plan, 9).unwrap();
        assert_eq!(a, b);
        for s in &a.summary {
            assert!(s.cpd_bar >= (s.ecp_bar - s.level).abs() - 1e-15);
        }
    }
}
