//! Period life-table ingestion.
//!
//! Reads HMD-style columnar tables (or a plain `year,age,qx` CSV), rebuilds
//! death counts from the death probabilities with a survivorship recursion,
//! and measures the spread of each year's distribution with a Gini index.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RADIX: f64 = 100_000.0;
/// Oldest tabulated age; the last group is open ("110+").
pub const TERMINAL_AGE: u32 = 110;
/// Recomputed counts below this value are raised to it before renormalizing.
pub const POSITIVITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
    Total,
}

impl Sex {
    fn matches(self, token: &str) -> bool {
        let t = token.trim().to_ascii_lowercase();
        match self {
            Sex::Female => matches!(t.as_str(), "f" | "female" | "females"),
            Sex::Male => matches!(t.as_str(), "m" | "male" | "males"),
            Sex::Total => matches!(t.as_str(), "t" | "b" | "total" | "both"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
            Sex::Total => "total",
        }
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" | "female" => Ok(Sex::Female),
            "m" | "male" => Ok(Sex::Male),
            "t" | "total" | "both" => Ok(Sex::Total),
            other => Err(Error::Config(format!("unknown sex '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifeTableRow {
    pub year: i32,
    pub age: u32,
    pub qx: f64,
    pub dx_reported: Option<f64>,
}

/// Years × ages matrix of life-table death counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeTableGrid {
    pub years: Vec<i32>,
    pub ages: Vec<u32>,
    /// `years.len() × ages.len()`, each row summing to `radix`.
    pub deaths: DMatrix<f64>,
    pub radix: f64,
}

impl LifeTableGrid {
    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    pub fn n_ages(&self) -> usize {
        self.ages.len()
    }

    pub fn year_deaths(&self, t: usize) -> DVector<f64> {
        self.deaths.row(t).transpose()
    }

    /// The first `len` years as a new grid.
    pub fn head(&self, len: usize) -> LifeTableGrid {
        LifeTableGrid {
            years: self.years[..len].to_vec(),
            ages: self.ages.clone(),
            deaths: self.deaths.rows(0, len).into_owned(),
            radix: self.radix,
        }
    }
}

struct Columns {
    year: usize,
    age: usize,
    qx: usize,
    dx: Option<usize>,
    sex: Option<usize>,
    width: usize,
}

fn split_fields(line: &str, csv: bool) -> Vec<&str> {
    if csv {
        line.split(',')
            .map(|f| f.trim().trim_matches('"'))
            .collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn locate_columns(fields: &[&str]) -> Option<Columns> {
    let find = |name: &str| fields.iter().position(|f| f.eq_ignore_ascii_case(name));
    Some(Columns {
        year: find("year")?,
        age: find("age")?,
        qx: find("qx")?,
        dx: find("dx"),
        sex: find("sex"),
        width: fields.len(),
    })
}

fn parse_age(token: &str, line: usize) -> Result<u32> {
    let digits = token.strip_suffix('+').unwrap_or(token);
    let age: u32 = digits.parse().map_err(|_| Error::Parse {
        line,
        message: format!("malformed age '{token}'"),
    })?;
    if age > TERMINAL_AGE {
        return Err(Error::Domain(format!(
            "line {line}: age {age} beyond terminal age {TERMINAL_AGE}"
        )));
    }
    Ok(age)
}

fn parse_number<T: FromStr>(token: &str, column: &str, line: usize) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("malformed {column} '{token}'"),
    })
}

/// Parse a period life table.
///
/// Accepts whitespace-delimited HMD text (title lines before the header are
/// skipped) or comma-separated text. Only `Year`, `Age`, `qx` (and `dx`, `Sex`
/// when present) are read. Tables without a `Sex` column are taken to be the
/// requested sex.
pub fn parse_lifetable<R: BufRead>(reader: R, sex: Sex) -> Result<Vec<LifeTableRow>> {
    let mut columns: Option<(Columns, bool)> = None;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }

        let Some((cols, csv)) = &columns else {
            let csv = trimmed.contains(',');
            if let Some(found) = locate_columns(&split_fields(trimmed, csv)) {
                columns = Some((found, csv));
            }
            continue;
        };

        let fields = split_fields(trimmed, *csv);
        if fields.len() < cols.width {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", cols.width, fields.len()),
            });
        }
        if let Some(s) = cols.sex {
            if !sex.matches(fields[s]) {
                continue;
            }
        }

        let year: i32 = parse_number(fields[cols.year], "year", line_no)?;
        let age = parse_age(fields[cols.age], line_no)?;
        let qx: f64 = parse_number(fields[cols.qx], "qx", line_no)?;
        if !(0.0..=1.0).contains(&qx) {
            return Err(Error::Domain(format!(
                "line {line_no}: qx = {qx} outside [0, 1]"
            )));
        }
        let dx_reported = cols.dx.and_then(|c| fields[c].parse::<f64>().ok());

        if !seen.insert((year, age)) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate entry for year {year}, age {age}"),
            });
        }
        rows.push(LifeTableRow {
            year,
            age,
            qx,
            dx_reported,
        });
    }

    if columns.is_none() {
        return Err(Error::Schema(
            "no header line with Year, Age and qx columns".into(),
        ));
    }
    Ok(rows)
}

pub fn parse_lifetable_str(text: &str, sex: Sex) -> Result<Vec<LifeTableRow>> {
    parse_lifetable(text.as_bytes(), sex)
}

/// Survivorship recursion for one year: `l₀ = radix`, `d_u = l_u q_u`,
/// `l_{u+1} = l_u − d_u`, and the open last group takes every survivor.
pub fn deaths_from_qx(qx: &[f64], radix: f64) -> Vec<f64> {
    let mut survivors = radix;
    let last = qx.len().saturating_sub(1);
    qx.iter()
        .enumerate()
        .map(|(u, &q)| {
            let d = if u == last { survivors } else { survivors * q };
            survivors -= d;
            d
        })
        .collect()
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Apply the six-decimal rounding, the positivity floor, and renormalize the
/// row to `radix`.
pub fn finalize_deaths(raw: &[f64], radix: f64) -> Vec<f64> {
    let floored: Vec<f64> = raw
        .iter()
        .map(|&d| round6(d).max(POSITIVITY_FLOOR))
        .collect();
    let total: f64 = floored.iter().sum();
    floored.iter().map(|d| d * radix / total).collect()
}

/// Rebuild smooth death counts for every year in `rows`.
///
/// Ages must form the contiguous range `0..=A` (the same `A` for every year).
pub fn rebuild_deaths(rows: &[LifeTableRow], radix: f64) -> Result<LifeTableGrid> {
    if !(radix > 0.0 && radix.is_finite()) {
        return Err(Error::Domain(format!("radix must be positive, got {radix}")));
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData {
            what: "life table",
            needed: 1,
            got: 0,
        });
    }
    let max_age = rows.iter().map(|r| r.age).max().unwrap_or(0);
    let n_ages = max_age as usize + 1;

    let mut by_year: BTreeMap<i32, Vec<Option<f64>>> = BTreeMap::new();
    for row in rows {
        if !(0.0..=1.0).contains(&row.qx) {
            return Err(Error::Domain(format!(
                "year {}, age {}: qx = {} outside [0, 1]",
                row.year, row.age, row.qx
            )));
        }
        let slots = by_year
            .entry(row.year)
            .or_insert_with(|| vec![None; n_ages]);
        if slots[row.age as usize].replace(row.qx).is_some() {
            return Err(Error::Domain(format!(
                "year {} has age {} more than once",
                row.year, row.age
            )));
        }
    }

    let years: Vec<i32> = by_year.keys().copied().collect();
    let mut deaths = DMatrix::zeros(years.len(), n_ages);
    for (t, (year, slots)) in by_year.iter().enumerate() {
        let qx = slots
            .iter()
            .enumerate()
            .map(|(age, q)| {
                q.ok_or(Error::Incomplete {
                    year: *year,
                    age: age as u32,
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let row = finalize_deaths(&deaths_from_qx(&qx, radix), radix);
        for (u, d) in row.into_iter().enumerate() {
            deaths[(t, u)] = d;
        }
    }

    Ok(LifeTableGrid {
        years,
        ages: (0..=max_age).collect(),
        deaths,
        radix,
    })
}

/// Discrete Gini index of a count vector (ages as atoms), from the
/// trapezoidal area under the sorted Lorenz curve.
///
/// 0 when every age carries the same count; `1 − 1/D` when all mass sits at
/// a single age.
pub fn gini_coefficient(counts: &[f64]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(Error::InsufficientData {
            what: "Gini coefficient",
            needed: 2,
            got: counts.len(),
        });
    }
    if counts.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::Domain("counts must be finite and nonnegative".into()));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all counts are zero".into()));
    }

    let mut sorted = counts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let step = 1.0 / sorted.len() as f64;
    let mut cumulative = 0.0;
    let mut area = 0.0;
    for c in sorted {
        let prev = cumulative;
        cumulative += c / total;
        area += 0.5 * step * (prev + cumulative);
    }
    Ok((1.0 - 2.0 * area).max(0.0))
}

/// One Gini value per year of the grid.
pub fn gini_series(grid: &LifeTableGrid) -> Result<Vec<(i32, f64)>> {
    grid.years
        .iter()
        .enumerate()
        .map(|(t, &year)| {
            let row: Vec<f64> = grid.deaths.row(t).iter().copied().collect();
            Ok((year, gini_coefficient(&row)?))
        })
        .collect()
}
