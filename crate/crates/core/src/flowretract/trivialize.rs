//! The collar trivialization `p -> (r'(p), f'(p))` and its inverse.

use crate::cut::CutPoint;
use crate::error::{Error, Result};
use crate::ncmodel::ChartSpec;

use super::normalize::{normalize_chart, Normalization, Normalized};
use super::vfield::{f_prime, f_prime_expr, retraction_field};
use super::{integrate, min_signed, retract_in_chart, Mode, OdeControls};

#[derive(Clone, Debug, PartialEq)]
pub struct Trivialization {
    pub base: CutPoint,
    pub level: f64,
    pub delta: f64,
    /// `f'` recovered by integrating `-df'/dw` along the flow, in numeric
    /// mode; an independent check on `level`.
    pub level_quadrature: Option<f64>,
}

pub fn trivialize(chart: &ChartSpec, p: &CutPoint, mode: Mode) -> Result<Trivialization> {
    let level = f_prime(chart, &p.sheet, &p.x);
    let closed = mode == Mode::ClosedForm && normalize_chart(chart, &p.sheet).closed_form().is_some();
    if closed || level == 0.0 {
        let r = retract_in_chart(chart, p, Mode::ClosedForm)?;
        return Ok(Trivialization { base: r.point, level, delta: r.delta, level_quadrature: None });
    }
    let field = retraction_field(chart, &p.sheet)?;
    let grad = f_prime_expr(chart, &p.sheet).gradient(chart.dim);
    let n = chart.dim;
    let rhs = |s: &[f64]| {
        let x = &s[..n];
        if !chart.contains(x) {
            return Err(Error::Flow(format!("trajectory left the box of chart {}", chart.id)));
        }
        let mut v = field.eval(x)?;
        let rate: f64 = grad.iter().zip(&v).map(|(g, vi)| g.eval(x) * vi).sum();
        v.push(-rate);
        Ok(v)
    };
    let mut s0 = p.x.clone();
    s0.push(0.0);
    let sheet = &p.sheet;
    let run = integrate(rhs, &s0, &OdeControls::default(), |s| min_signed(sheet, &s[..n]).unwrap().0)?;
    if !run.event {
        return Err(Error::Flow("no boundary hit".into()));
    }
    let (t, s) = run.last();
    let mut x = s[..n].to_vec();
    let (_, i) = min_signed(sheet, &x).unwrap();
    x[i] = 0.0;
    Ok(Trivialization { base: CutPoint { x, ..p.clone() }, level, delta: t, level_quadrature: Some(s[n]) })
}

/// Point over `base` at distance `delta` along `eps` in normalized
/// coordinates, if it lies in the chart.
fn lift(n: &Normalization, chart: &ChartSpec, yb: &[f64], base: &CutPoint, delta: f64) -> Option<Vec<f64>> {
    let mut y = yb.to_vec();
    for (&i, &s) in base.sheet.iter() {
        y[i] += delta * s as f64;
    }
    let x = n.inverse(&y).ok()?;
    chart.contains(&x).then_some(x)
}

pub fn untrivialize(chart: &ChartSpec, t: &Trivialization, mode: Mode) -> Result<CutPoint> {
    if !(t.level >= 0.0) || !t.level.is_finite() {
        return Err(Error::Range(format!("level {} is negative", t.level)));
    }
    if t.level == 0.0 {
        return Ok(t.base.clone());
    }
    let base = &t.base;
    if mode == Mode::ClosedForm {
        if let Normalized::ClosedForm(n) = normalize_chart(chart, &base.sheet) {
            return untrivialize_closed(chart, &n, t);
        }
    }
    let field = retraction_field(chart, &base.sheet)?;
    let rhs = |x: &[f64]| {
        if !chart.contains(x) {
            return Err(Error::Range(format!("level {} is beyond the collar of chart {}", t.level, chart.id)));
        }
        Ok(field.eval(x)?.into_iter().map(|v| -v).collect())
    };
    let run = integrate(rhs, &base.x, &OdeControls::default(), |x| t.level - f_prime(chart, &base.sheet, x))?;
    if !run.event {
        return Err(Error::Range(format!("level {} not reached", t.level)));
    }
    Ok(CutPoint { x: run.last().1.to_vec(), ..base.clone() })
}

fn untrivialize_closed(chart: &ChartSpec, n: &Normalization, t: &Trivialization) -> Result<CutPoint> {
    let base = &t.base;
    let yb = n.forward(&base.x);
    let terms: Vec<(f64, f64)> =
        base.sheet.iter().map(|(&i, &s)| ((s as f64 * yb[i]).max(0.0), chart.exponents.get(i) as f64)).collect();
    let log_level = |d: f64| terms.iter().map(|(u, a)| a * (u + d).ln()).sum::<f64>();

    let r = chart.domain_radius;
    let mut hi = 2.0 * r * (1.0 + n.scale(&base.x));
    if lift(n, chart, &yb, base, hi).is_none() {
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lift(n, chart, &yb, base, mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi = lo;
    }
    let target = t.level.ln();
    if !(log_level(hi) > target) {
        return Err(Error::Range(format!(
            "level {} is beyond the collar over this base (at most {:e})",
            t.level,
            log_level(hi).exp()
        )));
    }
    let (mut lo, mut hi) = (0.0, hi);
    let mut d = 0.5 * hi;
    for _ in 0..200 {
        let v = log_level(d) - target;
        if v > 0.0 {
            hi = d;
        } else {
            lo = d;
        }
        let slope: f64 = terms.iter().map(|(u, a)| a / (u + d)).sum();
        let mut next = d - v / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - d).abs() <= 1e-16 * d.max(1e-300) {
            d = next;
            break;
        }
        d = next;
    }
    let x = lift(n, chart, &yb, base, d).ok_or_else(|| Error::Range("lift left the chart".into()))?;
    Ok(CutPoint { x, ..base.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::SignSheet;
    use crate::ncmodel::FieldKind;

    #[test]
    fn diagonal_example() {
        let c = ChartSpec::monomial("c", FieldKind::Real, &[2, 2, 0], "1", 6.0).unwrap();
        let p = CutPoint::new(&c, vec![2.0, 1.0, 5.0], SignSheet::positive(&[0, 1])).unwrap();
        let t = trivialize(&c, &p, Mode::ClosedForm).unwrap();
        assert_eq!(t.base.x, vec![1.0, 0.0, 5.0]);
        assert_eq!(t.level, 4.0);
        let back = untrivialize(&c, &t, Mode::ClosedForm).unwrap();
        for (a, b) in back.x.iter().zip(&p.x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn level_zero_and_out_of_range() {
        let c = ChartSpec::monomial("c", FieldKind::Real, &[1, 1], "1", 1.0).unwrap();
        let base = CutPoint::new(&c, vec![0.0, 0.5], SignSheet::positive(&[0, 1])).unwrap();
        let t = Trivialization { base: base.clone(), level: 0.0, delta: 0.0, level_quadrature: None };
        assert_eq!(untrivialize(&c, &t, Mode::ClosedForm).unwrap(), base);
        for level in [-0.1, 10.0] {
            let t = Trivialization { level, ..t.clone() };
            assert!(matches!(untrivialize(&c, &t, Mode::ClosedForm), Err(Error::Range(_))));
        }
    }

    #[test]
    fn numeric_mode_carries_a_quadrature() {
        let c = ChartSpec::monomial("c", FieldKind::Real, &[2, 1], "1 + 0.1*x1", 1.0).unwrap();
        let p = CutPoint::new(&c, vec![-0.5, 0.4], SignSheet::from_pairs([(0, -1), (1, 1)])).unwrap();
        let t = trivialize(&c, &p, Mode::Numeric).unwrap();
        assert!((t.level_quadrature.unwrap() - t.level).abs() < 1e-8);
        let back = untrivialize(&c, &t, Mode::Numeric).unwrap();
        for (a, b) in back.x.iter().zip(&p.x) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
