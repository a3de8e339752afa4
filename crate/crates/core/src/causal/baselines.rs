//! Classical estimators working directly on rows: full stratification,
//! outcome regression, inverse probability weighting and augmented IPW.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::causal::ate::{combine, AteEstimate, Diagnostic, StratumEffect};
use crate::causal::frame::CausalFrame;
use crate::causal::logistic::{fit_logistic, LogisticFit};
use crate::error::{Error, Result};
use crate::model::Dataset;

/// Propensities are clipped to `[EPSILON, 1 - EPSILON]`.
pub const EPSILON: f64 = 0.01;

fn stratum_name(data: &Dataset, z: &[usize]) -> String {
    if z.is_empty() {
        return "all".into();
    }
    let parts: Vec<String> = z
        .iter()
        .zip(data.variables())
        .map(|(&c, v)| format!("{}={}", v.name, v.levels[c]))
        .collect();
    parts.join(",")
}

struct Rows {
    z: Vec<Vec<usize>>,
    r: Vec<f64>,
    y: Vec<f64>,
}

fn rows(data: &Dataset, frame: &CausalFrame) -> Result<Rows> {
    frame.check_variables(data.variables())?;
    if data.is_empty() {
        return Err(Error::Data("estimator needs at least one row".into()));
    }
    let mut out = Rows {
        z: Vec::with_capacity(data.n_rows()),
        r: Vec::with_capacity(data.n_rows()),
        y: Vec::with_capacity(data.n_rows()),
    };
    for row in data.rows() {
        out.z.push(row[..frame.treatment].to_vec());
        out.r.push(f64::from(u8::from(row[frame.treatment] == frame.treated_level)));
        out.y.push(f64::from(u8::from(row[frame.outcome] == frame.positive_level)));
    }
    Ok(out)
}

/// Intercept, optional treatment indicator, then one indicator per
/// non-reference covariate level.
fn design_row(data: &Dataset, z: &[usize], treatment: Option<f64>) -> Vec<f64> {
    let mut x = vec![1.0];
    x.extend(treatment);
    for (j, &c) in z.iter().enumerate() {
        for l in 1..data.variables()[j].arity() {
            x.push(f64::from(u8::from(c == l)));
        }
    }
    x
}

fn design(data: &Dataset, rows: &Rows, with_treatment: bool) -> DMatrix<f64> {
    let built: Vec<Vec<f64>> = rows
        .z
        .iter()
        .zip(&rows.r)
        .map(|(z, &r)| design_row(data, z, with_treatment.then_some(r)))
        .collect();
    let k = built[0].len();
    DMatrix::from_row_iterator(built.len(), k, built.into_iter().flatten())
}

/// Standardization over every observed covariate pattern using raw means.
/// Patterns without both arms are excluded and flagged.
pub fn baseline_full_stratification(data: &Dataset, frame: &CausalFrame) -> Result<AteEstimate> {
    let rows = rows(data, frame)?;
    // [treated rows, treated positives, untreated rows, untreated positives]
    let mut cells: BTreeMap<&[usize], [u64; 4]> = BTreeMap::new();
    for ((z, &r), &y) in rows.z.iter().zip(&rows.r).zip(&rows.y) {
        let c = cells.entry(z.as_slice()).or_default();
        let k = if r == 1.0 { 0 } else { 2 };
        c[k] += 1;
        c[k + 1] += y as u64;
    }
    let n = data.n_rows() as f64;
    let mut diagnostics = Vec::new();
    let strata = cells
        .into_iter()
        .map(|(z, [nt, yt, nu, yu])| {
            let name = stratum_name(data, z);
            let mass = (nt + nu) as f64 / n;
            let excluded = nt == 0 || nu == 0;
            if excluded {
                diagnostics.push(Diagnostic::PositivityViolation {
                    stratum: name.clone(),
                    n_treated: nt,
                    n_untreated: nu,
                });
                diagnostics.push(Diagnostic::ExcludedStratum {
                    stratum: name.clone(),
                    mass,
                });
            }
            StratumEffect {
                stratum: name,
                weight: 0.0,
                mass,
                effect: (!excluded).then(|| yt as f64 / nt as f64 - yu as f64 / nu as f64),
                n_treated: Some(nt),
                n_untreated: Some(nu),
                excluded,
            }
        })
        .collect();
    combine(strata, diagnostics)
}

fn constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn outcome_logistic(data: &Dataset, rows: &Rows, diagnostics: &mut Vec<Diagnostic>) -> Result<LogisticFit> {
    let fit = fit_logistic(&design(data, rows, true), &rows.y)?;
    if fit.separation {
        diagnostics.push(Diagnostic::Separation {
            model: "outcome".into(),
        });
    }
    Ok(fit)
}

/// Logistic regression of the outcome on treatment and covariate main
/// effects, averaged over rows with the treatment switched on and off.
pub fn baseline_outcome_regression(data: &Dataset, frame: &CausalFrame) -> Result<AteEstimate> {
    let rows = rows(data, frame)?;
    if constant(&rows.y) {
        return Ok(AteEstimate::scalar(0.0, vec![Diagnostic::DegenerateOutcome]));
    }
    let mut diagnostics = Vec::new();
    let fit = outcome_logistic(data, &rows, &mut diagnostics)?;
    let mut total = 0.0;
    for z in &rows.z {
        total += fit.predict(&design_row(data, z, Some(1.0))) - fit.predict(&design_row(data, z, Some(0.0)));
    }
    Ok(AteEstimate::scalar(total / rows.z.len() as f64, diagnostics))
}

fn clip(e: f64, clipped: &mut usize) -> f64 {
    if e < EPSILON {
        *clipped += 1;
        EPSILON
    } else if e > 1.0 - EPSILON {
        *clipped += 1;
        1.0 - EPSILON
    } else {
        e
    }
}

fn check_both_arms(rows: &Rows) -> Result<()> {
    if constant(&rows.r) {
        return Err(Error::DegeneratePropensity(format!(
            "every row has treatment indicator {}",
            rows.r[0]
        )));
    }
    Ok(())
}

/// How the outcome regression in [`baseline_aipw_with`] is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeModel {
    /// Logistic main effects of treatment and covariates.
    Logistic,
    /// Arm means, ignoring covariates.
    Constant,
    /// Mean per covariate pattern and arm.
    CellMeans,
}

/// How the propensity score is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropensityModel {
    /// Logistic main effects of covariates.
    Logistic,
    /// Overall treated fraction.
    Constant,
    /// Treated fraction per covariate pattern.
    CellMeans,
}

fn propensities(
    data: &Dataset,
    rows: &Rows,
    model: PropensityModel,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<f64>> {
    check_both_arms(rows)?;
    let raw: Vec<f64> = match model {
        PropensityModel::Logistic => {
            let fit = fit_logistic(&design(data, rows, false), &rows.r)?;
            if fit.separation {
                diagnostics.push(Diagnostic::Separation {
                    model: "propensity".into(),
                });
            }
            rows.z.iter().map(|z| fit.predict(&design_row(data, z, None))).collect()
        }
        PropensityModel::Constant => {
            let e = rows.r.iter().sum::<f64>() / rows.r.len() as f64;
            vec![e; rows.r.len()]
        }
        PropensityModel::CellMeans => {
            let mut cells: BTreeMap<&[usize], (f64, f64)> = BTreeMap::new();
            for (z, &r) in rows.z.iter().zip(&rows.r) {
                let c = cells.entry(z.as_slice()).or_default();
                c.0 += r;
                c.1 += 1.0;
            }
            rows.z.iter().map(|z| {
                let (t, n) = cells[z.as_slice()];
                t / n
            }).collect()
        }
    };
    let mut clipped = 0;
    let e = raw.into_iter().map(|e| clip(e, &mut clipped)).collect();
    if clipped > 0 {
        diagnostics.push(Diagnostic::ClippedPropensities {
            count: clipped,
            epsilon: EPSILON,
        });
    }
    Ok(e)
}

/// Hajek-normalized inverse probability weighting with a logistic
/// propensity model.
pub fn baseline_ipw(data: &Dataset, frame: &CausalFrame) -> Result<AteEstimate> {
    let rows = rows(data, frame)?;
    let mut diagnostics = Vec::new();
    let e = propensities(data, &rows, PropensityModel::Logistic, &mut diagnostics)?;
    let (mut st, mut wt, mut su, mut wu) = (0.0, 0.0, 0.0, 0.0);
    for ((&r, &y), &e) in rows.r.iter().zip(&rows.y).zip(&e) {
        if r == 1.0 {
            st += y / e;
            wt += 1.0 / e;
        } else {
            su += y / (1.0 - e);
            wu += 1.0 / (1.0 - e);
        }
    }
    Ok(AteEstimate::scalar(st / wt - su / wu, diagnostics))
}

/// Augmented IPW with logistic outcome and propensity models.
pub fn baseline_aipw(data: &Dataset, frame: &CausalFrame) -> Result<AteEstimate> {
    baseline_aipw_with(data, frame, OutcomeModel::Logistic, PropensityModel::Logistic)
}

pub fn baseline_aipw_with(
    data: &Dataset,
    frame: &CausalFrame,
    outcome: OutcomeModel,
    propensity: PropensityModel,
) -> Result<AteEstimate> {
    let rows = rows(data, frame)?;
    let mut diagnostics = Vec::new();
    let e = propensities(data, &rows, propensity, &mut diagnostics)?;
    let n = rows.y.len();
    let (m1, m0): (Vec<f64>, Vec<f64>) = match outcome {
        OutcomeModel::Logistic if constant(&rows.y) => {
            diagnostics.push(Diagnostic::DegenerateOutcome);
            (rows.y.clone(), rows.y.clone())
        }
        OutcomeModel::Logistic => {
            let fit = outcome_logistic(data, &rows, &mut diagnostics)?;
            rows.z
                .iter()
                .map(|z| {
                    (
                        fit.predict(&design_row(data, z, Some(1.0))),
                        fit.predict(&design_row(data, z, Some(0.0))),
                    )
                })
                .unzip()
        }
        OutcomeModel::Constant => {
            let mut acc = [(0.0, 0.0); 2];
            for (&r, &y) in rows.r.iter().zip(&rows.y) {
                let a = &mut acc[r as usize];
                a.0 += y;
                a.1 += 1.0;
            }
            (vec![acc[1].0 / acc[1].1; n], vec![acc[0].0 / acc[0].1; n])
        }
        OutcomeModel::CellMeans => {
            let mut cells: BTreeMap<(&[usize], bool), (f64, f64)> = BTreeMap::new();
            for ((z, &r), &y) in rows.z.iter().zip(&rows.r).zip(&rows.y) {
                let c = cells.entry((z.as_slice(), r == 1.0)).or_default();
                c.0 += y;
                c.1 += 1.0;
            }
            let mean = |z: &[usize], arm: bool| -> Result<f64> {
                cells.get(&(z, arm)).map(|(s, k)| s / k).ok_or_else(|| {
                    Error::NoIdentifiableStrata(format!(
                        "no {} rows with {}",
                        if arm { "treated" } else { "untreated" },
                        stratum_name(data, z)
                    ))
                })
            };
            let mut m1 = Vec::with_capacity(n);
            let mut m0 = Vec::with_capacity(n);
            for z in &rows.z {
                m1.push(mean(z, true)?);
                m0.push(mean(z, false)?);
            }
            (m1, m0)
        }
    };
    let mut total = 0.0;
    for i in 0..n {
        let (r, y) = (rows.r[i], rows.y[i]);
        total += m1[i] - m0[i] + r * (y - m1[i]) / e[i] - (1.0 - r) * (y - m0[i]) / (1.0 - e[i]);
    }
    Ok(AteEstimate::scalar(total / n as f64, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variable;

    fn zry() -> Vec<Variable> {
        vec![Variable::binary("Z"), Variable::binary("R"), Variable::binary("Y")]
    }

    fn frame() -> CausalFrame {
        CausalFrame {
            treatment: 1,
            outcome: 2,
            treated_level: 1,
            positive_level: 1,
        }
    }

    #[test]
    fn full_stratification_on_four_rows() {
        let d = Dataset::new(zry(), vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 1]]).unwrap();
        assert_eq!(baseline_full_stratification(&d, &frame()).unwrap().ate, 1.0);
    }

    #[test]
    fn balanced_design_gives_mean_difference() {
        let mut rows = Vec::new();
        for (z, r, ys) in [(0, 0, [0, 0, 1, 0]), (0, 1, [1, 1, 0, 1]), (1, 0, [1, 0, 1, 0]), (1, 1, [1, 1, 1, 0])] {
            for y in ys {
                rows.push(vec![z, r, y]);
            }
        }
        let d = Dataset::new(zry(), rows).unwrap();
        let naive = 6.0 / 8.0 - 3.0 / 8.0;
        assert!((baseline_full_stratification(&d, &frame()).unwrap().ate - naive).abs() < 1e-12);
        assert!((baseline_ipw(&d, &frame()).unwrap().ate - naive).abs() < 1e-9);
    }

    #[test]
    fn constant_outcome_is_degenerate_zero() {
        let d = Dataset::new(zry(), vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let est = baseline_outcome_regression(&d, &frame()).unwrap();
        assert_eq!(est.ate, 0.0);
        assert_eq!(est.diagnostics, vec![Diagnostic::DegenerateOutcome]);
    }

    #[test]
    fn all_treated_is_an_error() {
        let d = Dataset::new(zry(), vec![vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        assert!(matches!(baseline_ipw(&d, &frame()), Err(Error::DegeneratePropensity(_))));
    }

    #[test]
    fn cell_mean_aipw_equals_full_stratification() {
        let mut rows = Vec::new();
        for (z, r, ys) in [(0, 0, vec![0, 1, 1]), (0, 1, vec![1, 1]), (1, 0, vec![0, 0, 0, 1]), (1, 1, vec![1, 0, 1, 1, 1])] {
            for y in ys {
                rows.push(vec![z, r, y]);
            }
        }
        let d = Dataset::new(zry(), rows).unwrap();
        let full = baseline_full_stratification(&d, &frame()).unwrap().ate;
        let aipw = baseline_aipw_with(&d, &frame(), OutcomeModel::CellMeans, PropensityModel::CellMeans)
            .unwrap()
            .ate;
        assert!((full - aipw).abs() < 1e-10);
    }
}
