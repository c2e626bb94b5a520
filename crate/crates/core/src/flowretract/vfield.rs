//! Local vector fields adapted to the divisor, and the retraction field
//! assembled from them.
//!
//! On a sheet with signs `eps`, the local defining functions of the divisor
//! components are `f_i = eps_i x_i`, and the cut function is
//! `f' = prod f_i^a_i * |g|`. Every field built here satisfies
//! `f_i0 * df'/dv = f'` where it is defined.

use crate::cut::SignSheet;
use crate::error::{Error, Result};
use crate::expr::{add, div, mul, neg, pow, Expr};
use crate::ncmodel::{ChartSpec, FieldKind};
use crate::sampling::{self, SampleRng};

use super::normalize::{normalize_chart, Normalization, Normalized};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldCase {
    /// Off the divisor: a multiple of the gradient of `f'`.
    Case1,
    /// On the divisor but off the target component: the weighted Euler field.
    Case2,
    /// Near the target component: a multiple of its coordinate field.
    Case3,
    /// `w = -sum_i v_i` over the near-component fields.
    Assembled,
    /// `w = -sum eps_i d/dy_i` in normalized coordinates.
    Normalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VField {
    pub chart: String,
    pub case: FieldCase,
    pub sheet: SignSheet,
    pub target: Option<usize>,
    /// Rational components in chart coordinates; empty for a normalized field.
    pub components: Vec<Expr>,
    /// Expressions that must stay away from zero where the field is used.
    pub denominators: Vec<Expr>,
    pub normalization: Option<Normalization>,
}

impl VField {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(n) = &self.normalization {
            let mut v = vec![0.0; x.len()];
            for (&i, &s) in self.sheet.iter() {
                v[i] = -(s as f64);
            }
            return n.pull_back(x, &v);
        }
        for d in &self.denominators {
            let v = d.eval(x);
            if !(v.abs() > 1e-300) || !v.is_finite() {
                return Err(Error::Flow(format!("field {:?} is singular at {x:?}", self.case)));
            }
        }
        let v: Vec<f64> = self.components.iter().map(|e| e.eval(x)).collect();
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Flow(format!("field {:?} is not finite at {x:?}", self.case)));
        }
        Ok(v)
    }
}

fn signed(sheet: &SignSheet, i: usize) -> Expr {
    mul(Expr::num(sheet.sign(i)), Expr::var(i))
}

/// Sign of the unit factor on the chart, read at the centre.
fn unit_sign(chart: &ChartSpec) -> f64 {
    let g0 = chart.eval_g(&vec![0.0; chart.dim]);
    if g0 < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `f' = prod (eps_i x_i)^a_i * |g|` as an expression.
pub fn f_prime_expr(chart: &ChartSpec, sheet: &SignSheet) -> Expr {
    let mut e = mul(Expr::num(unit_sign(chart)), chart.unit_factor.clone());
    for i in chart.divisor_coords() {
        e = mul(pow(signed(sheet, i), chart.exponents.get(i) as i32), e);
    }
    e
}

/// `f'` at a point of the closed quadrant.
pub fn f_prime(chart: &ChartSpec, sheet: &SignSheet, x: &[f64]) -> f64 {
    let mut v = chart.eval_g(x).abs();
    for i in chart.divisor_coords() {
        v *= (sheet.sign(i) * x[i]).max(0.0).powi(chart.exponents.get(i) as i32);
    }
    v
}

/// `a_i + x_i dg/dx_i / g`, the logarithmic derivative of `x_i^a_i g` times `x_i`.
fn log_weight(chart: &ChartSpec, i: usize) -> Expr {
    let g = chart.unit_factor.clone();
    add(Expr::num(chart.exponents.get(i) as f64), div(mul(Expr::var(i), g.derivative(i)), g))
}

fn sample_region(chart: &ChartSpec, sheet: &SignSheet, case: FieldCase, i0: usize, rng: &mut SampleRng) -> Vec<f64> {
    let mut x = sampling::on_sheet(rng, chart, sheet, 0.95, 0.0);
    match case {
        FieldCase::Case2 => {
            let others: Vec<usize> = sheet.coords().into_iter().filter(|&j| j != i0).collect();
            if let Some(&j) = others.get(sampling::index(rng, others.len().max(1))) {
                x[j] = 0.0;
            }
        }
        FieldCase::Case3 => x[i0] *= 0.1,
        _ => {}
    }
    x
}

fn check_denominators(field: &VField, chart: &ChartSpec, i0: usize, seed: u64) -> Result<()> {
    if field.case == FieldCase::Case2 && field.sheet.len() < 2 {
        return Ok(());
    }
    let mut rng = sampling::rng(seed);
    for _ in 0..200 {
        let x = sample_region(chart, &field.sheet, field.case, i0, &mut rng);
        for d in &field.denominators {
            let v = d.eval(&x);
            if !(v.abs() > 1e-12) || !v.is_finite() {
                return Err(Error::Construction {
                    message: format!("denominator of the {:?} field vanishes in its region", field.case),
                    witness: x,
                });
            }
        }
    }
    Ok(())
}

/// One of the three local fields for the component at coordinate `i0`.
pub fn build_vfield(chart: &ChartSpec, sheet: &SignSheet, i0: usize, case: FieldCase) -> Result<VField> {
    if chart.field_kind != FieldKind::Real {
        return Err(Error::Config(format!("chart {} is complex", chart.id)));
    }
    if sheet.get(i0).is_none() {
        return Err(Error::Domain(format!("coordinate {} is not a divisor coordinate of chart {}", i0 + 1, chart.id)));
    }
    let n = chart.dim;
    let f_i0 = signed(sheet, i0);
    let (components, denominators) = match case {
        FieldCase::Case1 => {
            let fp = f_prime_expr(chart, sheet);
            let grad = fp.gradient(n);
            let norm2 = grad.iter().cloned().fold(Expr::num(0.0), |acc, g| add(acc, mul(g.clone(), g)));
            let den = mul(f_i0.clone(), norm2.clone());
            let scale = div(fp, den.clone());
            (grad.into_iter().map(|g| mul(scale.clone(), g)).collect(), vec![f_i0, norm2])
        }
        FieldCase::Case2 => {
            let total = sheet.coords().into_iter().map(|j| log_weight(chart, j)).fold(Expr::num(0.0), add);
            let den = mul(f_i0.clone(), total.clone());
            let comps = (0..n)
                .map(|j| if sheet.get(j).is_some() { div(Expr::var(j), den.clone()) } else { Expr::num(0.0) })
                .collect();
            (comps, vec![f_i0, total, chart.unit_factor.clone()])
        }
        FieldCase::Case3 => {
            let w = log_weight(chart, i0);
            let comps = (0..n)
                .map(|j| if j == i0 { div(Expr::num(sheet.sign(i0)), w.clone()) } else { Expr::num(0.0) })
                .collect();
            (comps, vec![w, chart.unit_factor.clone()])
        }
        FieldCase::Assembled | FieldCase::Normalized => {
            return Err(Error::Config("build_vfield builds the local cases only".into()));
        }
    };
    let field = VField {
        chart: chart.id.clone(),
        case,
        sheet: sheet.clone(),
        target: Some(i0),
        components,
        denominators,
        normalization: None,
    };
    check_denominators(&field, chart, i0, 0x5eed ^ i0 as u64)?;
    Ok(field)
}

/// `w = -sum_i v_i` with `v_i` the near-component field of each divisor
/// coordinate. Only the magnitudes `|x_i|` shrink along it, so its flow
/// stays inside the chart box.
pub fn assemble_w(chart: &ChartSpec, sheet: &SignSheet) -> Result<VField> {
    let mut components = vec![Expr::num(0.0); chart.dim];
    let mut denominators = Vec::new();
    for i in sheet.coords() {
        let v = build_vfield(chart, sheet, i, FieldCase::Case3)?;
        components[i] = neg(v.components[i].clone());
        denominators.extend(v.denominators);
    }
    let field = VField {
        chart: chart.id.clone(),
        case: FieldCase::Assembled,
        sheet: sheet.clone(),
        target: None,
        components,
        denominators,
        normalization: None,
    };
    let mut rng = sampling::rng(0xa55e);
    for _ in 0..200 {
        let x = sampling::on_sheet(&mut rng, chart, sheet, 0.95, 0.3);
        let v = field
            .eval(&x)
            .map_err(|_| Error::Construction { message: "assembled field is singular".into(), witness: x.clone() })?;
        if sheet.iter().any(|(&i, &s)| !(s as f64 * v[i] < 0.0)) {
            return Err(Error::Construction {
                message: "assembled field does not point out of the cut space".into(),
                witness: x,
            });
        }
    }
    Ok(field)
}

/// The retraction field in normalized form, when the unit factor can be
/// absorbed; `None` otherwise.
pub fn normalized_w(chart: &ChartSpec, sheet: &SignSheet) -> Option<VField> {
    match normalize_chart(chart, sheet) {
        Normalized::ClosedForm(n) => Some(VField {
            chart: chart.id.clone(),
            case: FieldCase::Normalized,
            sheet: sheet.clone(),
            target: None,
            components: vec![],
            denominators: vec![],
            normalization: Some(n),
        }),
        Normalized::Numeric { .. } => None,
    }
}

/// The field used for numeric retraction on a sheet: the normalized field
/// if available, otherwise the assembled one.
pub fn retraction_field(chart: &ChartSpec, sheet: &SignSheet) -> Result<VField> {
    match normalized_w(chart, sheet) {
        Some(f) => Ok(f),
        None => assemble_w(chart, sheet),
    }
}

/// Directional derivative of `f'` along a field.
pub fn derivative_along(chart: &ChartSpec, field: &VField, x: &[f64]) -> Result<f64> {
    let grad = f_prime_expr(chart, &field.sheet).gradient(chart.dim);
    let v = field.eval(x)?;
    Ok(grad.iter().zip(&v).map(|(g, vi)| g.eval(x) * vi).sum())
}

/// Expected `|df'/dw|`: `(sum a_i / f_i) f'` in normalized coordinates for a
/// normalized field, `(sum 1 / f_i) f'` for the assembled one.
pub fn expected_rate(chart: &ChartSpec, field: &VField, x: &[f64]) -> Option<f64> {
    let sheet = &field.sheet;
    match field.case {
        FieldCase::Normalized => {
            let y = field.normalization.as_ref()?.forward(x);
            let fp: f64 = sheet.iter().map(|(&i, &s)| (s as f64 * y[i]).powi(chart.exponents.get(i) as i32)).product();
            Some(sheet.iter().map(|(&i, &s)| chart.exponents.get(i) as f64 / (s as f64 * y[i])).sum::<f64>() * fp)
        }
        FieldCase::Assembled => {
            let fp = f_prime(chart, sheet, x);
            Some(sheet.iter().map(|(&i, &s)| 1.0 / (s as f64 * x[i])).sum::<f64>() * fp)
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecreaseRow {
    pub x: Vec<f64>,
    pub derivative: f64,
    pub expected: Option<f64>,
}

impl DecreaseRow {
    pub fn decreasing(&self) -> bool {
        self.derivative < 0.0
    }

    /// `|df'/dw| / expected - 1`, when an expected rate is known.
    pub fn relative_error(&self) -> Option<f64> {
        self.expected.map(|e| (self.derivative.abs() - e).abs() / e.abs().max(f64::MIN_POSITIVE))
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct DecreaseReport {
    pub rows: Vec<DecreaseRow>,
    /// Samples on the boundary, where `f' = 0` and the check does not apply.
    pub skipped: usize,
}

impl DecreaseReport {
    pub fn all_decreasing(&self) -> bool {
        self.rows.iter().all(DecreaseRow::decreasing)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.rows.iter().filter_map(DecreaseRow::relative_error).fold(0.0, f64::max)
    }

    pub fn first_failure(&self) -> Option<&DecreaseRow> {
        self.rows.iter().find(|r| !r.decreasing())
    }
}

/// Evaluates `df'/dw` at each sample of the cut region.
pub fn check_decrease(field: &VField, chart: &ChartSpec, samples: &[Vec<f64>]) -> Result<DecreaseReport> {
    let grad = f_prime_expr(chart, &field.sheet).gradient(chart.dim);
    let mut report = DecreaseReport::default();
    for x in samples {
        if f_prime(chart, &field.sheet, x) <= 0.0 {
            report.skipped += 1;
            continue;
        }
        let v = field.eval(x)?;
        let derivative = grad.iter().zip(&v).map(|(g, vi)| g.eval(x) * vi).sum();
        report.rows.push(DecreaseRow { x: x.clone(), derivative, expected: expected_rate(chart, field, x) });
    }
    Ok(report)
}
