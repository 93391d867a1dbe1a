//! Seeded synthetic data: Gompertz–Makeham period life tables with improving
//! mortality, and a curve series built from known factors.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::coda::inverse_clr;
use crate::error::{Error, Result};
use crate::lifetable::{rebuild_deaths, LifeTableGrid, LifeTableRow, DEFAULT_RADIX, TERMINAL_AGE};
use crate::rng::seeded_rng;

pub const FIRST_YEAR: i32 = 1921;
pub const MIN_SYNTH_YEARS: usize = 10;

/// Period `q_x` rows for `n` consecutive years starting in 1921.
///
/// The senescent level falls by a random but positive amount every year, so
/// the death distribution drifts toward older ages; infant mortality and the
/// young-adult hump decline deterministically.
pub fn synth_rows(n: usize, seed: u64) -> Vec<LifeTableRow> {
    let mut rng = seeded_rng(seed);
    let mut log_b = (3e-5f64).ln();
    let mut rows = Vec::with_capacity(n * (TERMINAL_AGE as usize + 1));
    for t in 0..n {
        let tf = t as f64;
        let makeham = 5e-4 * (-0.01 * tf).exp();
        let hump = 8e-4 * (-0.02 * tf).exp();
        let infant = 0.03 * (-0.03 * tf).exp();
        let child = 0.003 * (-0.03 * tf).exp();
        for age in 0..=TERMINAL_AGE {
            let x = f64::from(age);
            let qx = if age == TERMINAL_AGE {
                1.0
            } else if age == 0 {
                infant
            } else {
                let mu = makeham
                    + log_b.exp() * (0.1 * x).exp()
                    + hump * (-((x - 22.0) / 6.0).powi(2)).exp()
                    + child * (-x).exp();
                1.0 - (-mu).exp()
            };
            rows.push(LifeTableRow {
                year: FIRST_YEAR + t as i32,
                age,
                qx,
                dx_reported: None,
            });
        }
        let step: f64 = rng.sample(StandardNormal);
        log_b -= 0.015 + 0.005 * step.abs();
    }
    rows
}

pub fn synth_fixture(n: usize, seed: u64) -> Result<LifeTableGrid> {
    if n < MIN_SYNTH_YEARS {
        return Err(Error::InsufficientData {
            what: "synthetic fixture",
            needed: MIN_SYNTH_YEARS,
            got: n,
        });
    }
    rebuild_deaths(&synth_rows(n, seed), DEFAULT_RADIX)
}

/// Whitespace-columnar text with a `Year Age qx` header, as accepted by
/// [`crate::lifetable::parse_lifetable`].
pub fn format_columnar(rows: &[LifeTableRow]) -> String {
    let mut out = String::from("Year Age qx\n");
    for r in rows {
        let age = if r.age == TERMINAL_AGE {
            format!("{}+", r.age)
        } else {
            r.age.to_string()
        };
        out.push_str(&format!("{} {} {:.10}\n", r.year, age, r.qx));
    }
    out
}

/// Death counts whose clr curves follow
/// `m(u) + β_t g₁(u) + γ_t g₂(u) + ε_t(u)`, with `β_t` a random walk with
/// drift, `γ_t` a stationary AR(1) with coefficient 0.6, and `ε_t(u)` i.i.d.
/// Gaussian noise.
pub fn factor_grid(n: usize, ages: usize, seed: u64) -> Result<LifeTableGrid> {
    if ages < 2 {
        return Err(Error::Domain("at least two ages are required".into()));
    }
    let mut rng = seeded_rng(seed);
    let span = (ages - 1) as f64;
    let pos = |u: usize| u as f64 / span;
    let mean: Vec<f64> = (0..ages).map(|u| -8.0 * (pos(u) - 0.75).powi(2)).collect();
    let g1: Vec<f64> = (0..ages).map(|u| pos(u) - 0.5).collect();
    let g2: Vec<f64> = (0..ages).map(|u| (std::f64::consts::PI * pos(u)).sin() - 0.6).collect();

    let mut beta = 0.0;
    let mut gamma = 0.0;
    let mut deaths = DMatrix::zeros(n, ages);
    for t in 0..n {
        beta += 0.05 + 0.1 * rng.sample::<f64, _>(StandardNormal);
        gamma = 0.6 * gamma + 0.1 * rng.sample::<f64, _>(StandardNormal);
        let curve: Vec<f64> = (0..ages)
            .map(|u| {
                mean[u] + beta * g1[u] + gamma * g2[u] + 0.03 * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let counts = inverse_clr(&curve, DEFAULT_RADIX)?;
        deaths.row_mut(t).copy_from_slice(&counts);
    }
    Ok(LifeTableGrid {
        years: (FIRST_YEAR..FIRST_YEAR + n as i32).collect(),
        ages: (0..ages as u32).collect(),
        deaths,
        radix: DEFAULT_RADIX,
    })
}
