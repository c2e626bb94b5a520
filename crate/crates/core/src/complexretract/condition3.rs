//! Sampled check that the modification maps the strata of the divisor
//! submersively onto the strata of a declared stratification of the
//! central fibre.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::ncmodel::{ChartSpec, DeclaredStratification, DeclaredStratum, FieldKind, NCModel};
use crate::sampling::{self, SampleRng};

#[derive(Clone, Debug, PartialEq)]
pub struct Condition3Failure {
    /// Declared stratum involved, or the component set of the divisor stratum.
    pub stratum: String,
    pub chart: String,
    pub point: Vec<Complex64>,
    pub reason: String,
    pub rank: Option<usize>,
    pub expected: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition3Report {
    pub stratification: String,
    pub expected_to_pass: bool,
    pub checked: usize,
    pub failures: Vec<Condition3Failure>,
}

impl Condition3Report {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

const EQ_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-6;

/// Membership in the closure of `s`, judged by the first-order distance
/// `|e| / |grad e|` to each zero set rather than by `|e|` alone: near a
/// singular point the equations are tiny at points that are nowhere near
/// their zero set. A residual of exact roundoff size still counts when the
/// gradient vanishes too.
fn on_closure(s: &DeclaredStratum, q: &[Complex64]) -> bool {
    s.equations.iter().all(|e| {
        let grad = e.gradient(q.len()).iter().map(|d| d.eval(q).norm_sqr()).sum::<f64>().sqrt();
        e.eval(q).norm() <= EQ_TOL * grad + EQ_TOL * EQ_TOL
    })
}

fn containing<'a>(strat: &'a DeclaredStratification, q: &[Complex64]) -> Option<&'a DeclaredStratum> {
    strat
        .strata
        .iter()
        .filter(|s| on_closure(s, q))
        .filter(|s| {
            s.exclude.iter().all(|name| strat.strata.iter().find(|t| &t.name == name).is_none_or(|t| !on_closure(t, q)))
        })
        .min_by_key(|s| s.dim)
}

fn sample_coord(rng: &mut SampleRng, chart: &ChartSpec, lo: f64) -> Complex64 {
    let r = chart.domain_radius * 0.9;
    loop {
        let z = match chart.field_kind {
            FieldKind::Complex => Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r)),
            FieldKind::Real => Complex64::new(rng.gen_range(-r..r), 0.0),
        };
        if z.norm() >= lo * chart.domain_radius {
            return z;
        }
    }
}

/// A point where exactly the divisor coordinates in `zeros` vanish.
fn sample_stratum(rng: &mut SampleRng, chart: &ChartSpec, zeros: &[usize]) -> Vec<Complex64> {
    let divisor = chart.divisor_coords();
    (0..chart.dim)
        .map(|i| {
            if zeros.contains(&i) {
                Complex64::new(0.0, 0.0)
            } else if divisor.contains(&i) {
                sample_coord(rng, chart, 0.05)
            } else {
                sample_coord(rng, chart, 0.0)
            }
        })
        .collect()
}

fn rank(m: &DMatrix<Complex64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(1.0, f64::max);
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

/// Checks, on `samples` points per divisor stratum of every chart, that
/// (i) the preimage of each declared stratum closure is a union of
/// components, and (ii) the modification restricted to each divisor
/// stratum has rank equal to the dimension of the declared stratum it lands
/// in.
pub fn condition3_check(model: &NCModel, stratification: &str, samples: usize, seed: u64) -> Result<Condition3Report> {
    let strat =
        model.stratifications.iter().find(|s| s.name == stratification).ok_or_else(|| {
            Error::Config(format!("model {} declares no stratification {stratification}", model.name))
        })?;
    let mut report = Condition3Report {
        stratification: strat.name.clone(),
        expected_to_pass: strat.expect_condition3,
        checked: 0,
        failures: vec![],
    };
    for chart in &model.charts {
        let sigma = chart
            .sigma
            .as_ref()
            .ok_or_else(|| Error::Config(format!("chart {} carries no modification map", chart.id)))?;
        let jac: Vec<Vec<Expr>> = sigma.iter().map(|e| e.gradient(chart.dim)).collect();
        let mut rng = sampling::rng(sampling::sub_seed(seed, &chart.id));
        let divisor = chart.divisor_coords();

        // (i) Closures pull back to unions of components.
        for &i in &divisor {
            let pts: Vec<Vec<Complex64>> = (0..samples).map(|_| sample_stratum(&mut rng, chart, &[i])).collect();
            for s in &strat.strata {
                let hits: Vec<bool> = pts.iter().map(|z| on_closure(s, &model.sigma(chart, z))).collect();
                report.checked += hits.len();
                if hits.iter().any(|h| *h) && !hits.iter().all(|h| *h) {
                    let bad = hits.iter().position(|h| !*h).unwrap();
                    report.failures.push(Condition3Failure {
                        stratum: s.name.clone(),
                        chart: chart.id.clone(),
                        point: pts[bad].clone(),
                        reason: format!(
                            "closure of {} contains part but not all of component {}",
                            s.name,
                            chart.label(i).unwrap_or("?")
                        ),
                        rank: None,
                        expected: None,
                    });
                }
            }
        }
        for _ in 0..samples {
            let z = sample_stratum(&mut rng, chart, &[]);
            report.checked += 1;
            let q = model.sigma(chart, &z);
            if let Some(s) = strat.strata.iter().find(|s| on_closure(s, &q)) {
                report.failures.push(Condition3Failure {
                    stratum: s.name.clone(),
                    chart: chart.id.clone(),
                    point: z,
                    reason: format!("a point off the divisor maps into the closure of {}", s.name),
                    rank: None,
                    expected: None,
                });
            }
        }

        // (ii) Rank on each divisor stratum.
        for mask in 1..1u64 << divisor.len() {
            let zeros: Vec<usize> =
                divisor.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect();
            let free: Vec<usize> = (0..chart.dim).filter(|i| !zeros.contains(i)).collect();
            let name = zeros.iter().filter_map(|&i| chart.label(i)).collect::<Vec<_>>().join("^");
            for _ in 0..samples {
                let z = sample_stratum(&mut rng, chart, &zeros);
                report.checked += 1;
                let q = model.sigma(chart, &z);
                let Some(target) = containing(strat, &q) else {
                    report.failures.push(Condition3Failure {
                        stratum: name.clone(),
                        chart: chart.id.clone(),
                        point: z,
                        reason: format!("image of divisor stratum {name} lies in no declared stratum"),
                        rank: None,
                        expected: None,
                    });
                    break;
                };
                let m = DMatrix::from_fn(sigma.len(), free.len(), |r, c| jac[r][free[c]].eval(&z));
                let rk = rank(&m);
                if rk != target.dim {
                    report.failures.push(Condition3Failure {
                        stratum: target.name.clone(),
                        chart: chart.id.clone(),
                        point: z,
                        reason: format!(
                            "modification has rank {rk} on divisor stratum {name}, target stratum {} has dimension {}",
                            target.name, target.dim
                        ),
                        rank: Some(rk),
                        expected: Some(target.dim),
                    });
                    break;
                }
            }
        }
    }
    Ok(report)
}
