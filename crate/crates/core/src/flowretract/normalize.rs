//! Absorbing the unit factor into one divisor coordinate.
//!
//! With `g > 0` on the chart, `y_j0 = x_j0 * g(x)^(1/a_j0)` and `y_i = x_i`
//! otherwise turns `f = prod x_i^a_i * g` into the pure monomial
//! `prod y_i^a_i`, provided `x_j0 -> y_j0` is increasing on the box for each
//! choice of the other coordinates. In the new coordinates the retraction
//! field is `-sum eps_i d/dy_i` and the hitting time is `min eps_i y_i`.

use nalgebra::{DMatrix, DVector};

use crate::cut::SignSheet;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::ncmodel::{unit_factor_grid, ChartSpec, FieldKind};

#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub chart: String,
    /// Coordinate carrying the unit factor; `None` when `g` is identically 1.
    pub j0: Option<usize>,
    a: f64,
    g: Expr,
    dg: Vec<Expr>,
    radius: f64,
    dim: usize,
}

/// Outcome of [`normalize_chart`].
#[derive(Clone, Debug, PartialEq)]
pub enum Normalized {
    ClosedForm(Normalization),
    /// The unit factor cannot be absorbed; callers integrate the assembled
    /// field instead.
    Numeric {
        reason: String,
    },
}

impl Normalized {
    pub fn closed_form(&self) -> Option<&Normalization> {
        match self {
            Normalized::ClosedForm(n) => Some(n),
            Normalized::Numeric { .. } => None,
        }
    }
}

impl Normalization {
    pub fn is_identity(&self) -> bool {
        self.j0.is_none()
    }

    /// `g(x)^(1/a_j0)`.
    pub fn scale(&self, x: &[f64]) -> f64 {
        match self.j0 {
            None => 1.0,
            Some(_) => self.g.eval(x).powf(1.0 / self.a),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        if let Some(j) = self.j0 {
            y[j] = x[j] * self.scale(x);
        }
        y
    }

    fn partial(&self, x: &[f64]) -> f64 {
        let j = self.j0.unwrap();
        let g = self.g.eval(x);
        let s = g.powf(1.0 / self.a);
        s + x[j] * s / (self.a * g) * self.dg[j].eval(x)
    }

    /// Solves `forward(x) = y` for the distinguished coordinate by a
    /// safeguarded Newton iteration on `(-R, R)`.
    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = y.to_vec();
        let Some(j) = self.j0 else { return Ok(x) };
        if y[j] == 0.0 {
            x[j] = 0.0;
            return Ok(x);
        }
        let edge = self.radius * (1.0 - 1e-12);
        let target = y[j];
        let phi = |t: f64, x: &mut Vec<f64>| {
            x[j] = t;
            t * self.scale(x) - target
        };
        let (mut lo, mut hi) = if target > 0.0 { (0.0, edge) } else { (-edge, 0.0) };
        let f_edge = if target > 0.0 { phi(hi, &mut x) } else { phi(lo, &mut x) };
        if !f_edge.is_finite() || (target > 0.0 && f_edge < 0.0) || (target < 0.0 && f_edge > 0.0) {
            return Err(Error::Range(format!(
                "normalized coordinate {} = {target} has no preimage in chart {}",
                j + 1,
                self.chart
            )));
        }
        let mut t = target / self.scale(&x).max(1e-300);
        if !(lo..=hi).contains(&t) {
            t = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let r = phi(t, &mut x);
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.partial(&x);
            let mut next = t - r / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-16 * t.abs().max(1e-300) || hi - lo <= 1e-16 * t.abs() {
                t = next;
                break;
            }
            t = next;
        }
        x[j] = t;
        Ok(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim, self.dim);
        if let Some(j) = self.j0 {
            let g = self.g.eval(x);
            let s = g.powf(1.0 / self.a);
            for k in 0..self.dim {
                m[(j, k)] = x[j] * s / (self.a * g) * self.dg[k].eval(x);
            }
            m[(j, j)] += s;
        }
        m
    }

    /// A tangent vector given in normalized coordinates, expressed in chart
    /// coordinates at `x`.
    pub fn pull_back(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if self.j0.is_none() {
            return Ok(v.to_vec());
        }
        let j = self.jacobian(x);
        let sol = j
            .lu()
            .solve(&DVector::from_column_slice(v))
            .ok_or_else(|| Error::Flow("normalization is singular".into()))?;
        Ok(sol.iter().copied().collect())
    }
}

/// Tries to absorb the unit factor of a real chart. The check runs on the
/// unit-factor grid points lying in the closed quadrant of `sheet`.
pub fn normalize_chart(chart: &ChartSpec, sheet: &SignSheet) -> Normalized {
    if chart.field_kind != FieldKind::Real {
        return Normalized::Numeric { reason: "complex chart".into() };
    }
    let base = Normalization {
        chart: chart.id.clone(),
        j0: None,
        a: 1.0,
        g: chart.unit_factor.clone(),
        dg: chart.unit_factor.gradient(chart.dim),
        radius: chart.domain_radius,
        dim: chart.dim,
    };
    if chart.unit_factor.as_constant() == Some(1.0) {
        return Normalized::ClosedForm(base);
    }
    let coords = chart.divisor_coords();
    if coords.is_empty() {
        return Normalized::Numeric { reason: "chart has no divisor coordinate".into() };
    }
    let grid: Vec<Vec<f64>> =
        unit_factor_grid(chart).into_iter().filter(|x| sheet.iter().all(|(&i, &s)| s as f64 * x[i] >= 0.0)).collect();
    if grid.iter().any(|x| !(chart.eval_g(x) > 0.0)) {
        return Normalized::Numeric { reason: "unit factor is not positive".into() };
    }
    for &j in &coords {
        let n = Normalization { j0: Some(j), a: chart.exponents.get(j) as f64, ..base.clone() };
        if grid.iter().all(|x| n.partial(x) > 0.0) {
            return Normalized::ClosedForm(n);
        }
    }
    Normalized::Numeric { reason: "no divisor coordinate gives a monotone substitution".into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(a: &[u32], g: &str, r: f64) -> ChartSpec {
        ChartSpec::monomial("c", FieldKind::Real, a, g, r).unwrap()
    }

    #[test]
    fn monomial_chart_is_the_identity() {
        let c = chart(&[2, 2], "1", 1.0);
        let n = normalize_chart(&c, &SignSheet::positive(&[0, 1]));
        assert!(n.closed_form().unwrap().is_identity());
    }

    #[test]
    fn constant_unit_is_absorbed() {
        let c = chart(&[2], "4", 1.0);
        let Normalized::ClosedForm(n) = normalize_chart(&c, &SignSheet::positive(&[0])) else { panic!() };
        assert_eq!(n.forward(&[0.25]), vec![0.5]);
        assert!((n.inverse(&[0.5]).unwrap()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn perturbed_unit_round_trips() {
        let c = chart(&[2, 1], "1 + 0.1*x1", 1.0);
        let Normalized::ClosedForm(n) = normalize_chart(&c, &SignSheet::positive(&[0, 1])) else { panic!() };
        for x in [[0.3, 0.2], [-0.9, 0.5], [0.99, -0.99]] {
            let y = n.forward(&x);
            let back = n.inverse(&y).unwrap();
            assert!((back[0] - x[0]).abs() < 1e-14, "{x:?} {back:?}");
            let f = c.eval_f(&x).unwrap();
            assert!((y[0].powi(2) * y[1] - f).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_unit_falls_back() {
        let c = chart(&[2], "-1 - x1^2", 1.0);
        assert!(matches!(normalize_chart(&c, &SignSheet::positive(&[0])), Normalized::Numeric { .. }));
    }
}
