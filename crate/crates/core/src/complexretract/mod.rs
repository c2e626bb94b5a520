//! The complex case, on the oriented real blow-up of the divisor.
//!
//! Each divisor coordinate `z_i` is replaced by polar data `(rho_i, alpha_i)`.
//! The function becomes `f' = (prod rho_i^a_i |g|, sum a_i alpha_i + arg g)`,
//! a map to the band `[0, eps) x S^1`, and the retraction shrinks the radii
//! while keeping every angle (hence the angle of `f`) fixed.

mod condition3;
mod milnor;
mod torus;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::flowretract::{integrate, Mode, OdeControls};
use crate::ncmodel::{unit_factor_grid, ChartSpec, FieldKind};

pub use condition3::{condition3_check, Condition3Failure, Condition3Report};
pub use milnor::{milnor_fibration, milnor_fibration_at, MilnorFibration, StratumContribution};
pub use torus::{
    alpha_fibre_components, alpha_fibre_points, component_index, component_representative, deck_shift, lift_angle,
    monodromy, torus_fibre, universal_trivialization, untrivialize_complex, Gamma, LiftedAngle, TorusFibre,
};

/// Reduces an angle to `[0, 2 pi)`.
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    d.min(TAU - d)
}

/// A point of the oriented real blow-up in one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarPoint {
    pub chart: String,
    /// Divisor coordinates, in increasing order.
    pub divisor: Vec<usize>,
    pub rho: Vec<f64>,
    /// Angles in `[0, 2 pi)`, kept even where `rho` vanishes.
    pub alpha: Vec<f64>,
    /// All coordinates; divisor entries equal `rho e^(i alpha)`.
    pub z: Vec<Complex64>,
}

impl PolarPoint {
    /// A point from explicit polar data; `rest` gives the coordinates that
    /// are not divisor coordinates.
    pub fn new(chart: &ChartSpec, rho: &[f64], alpha: &[f64], rest: &[Complex64]) -> Result<PolarPoint> {
        let divisor = chart.divisor_coords();
        if rho.len() != divisor.len() || alpha.len() != divisor.len() || rest.len() != chart.dim - divisor.len() {
            return Err(Error::Domain(format!("polar data does not match the coordinates of chart {}", chart.id)));
        }
        if rho.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Domain("polar radius must be nonnegative".into()));
        }
        let mut z = Vec::with_capacity(chart.dim);
        let mut rest = rest.iter();
        let mut k = 0;
        for i in 0..chart.dim {
            if divisor.get(k) == Some(&i) {
                z.push(Complex64::from_polar(rho[k], alpha[k]));
                k += 1;
            } else {
                z.push(*rest.next().unwrap());
            }
        }
        Ok(PolarPoint {
            chart: chart.id.clone(),
            divisor,
            rho: rho.to_vec(),
            alpha: alpha.iter().map(|a| reduce_angle(*a)).collect(),
            z,
        })
    }

    fn refresh(&mut self) {
        for (k, &i) in self.divisor.iter().enumerate() {
            self.alpha[k] = reduce_angle(self.alpha[k]);
            self.z[i] = if self.rho[k] == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(self.rho[k], self.alpha[k])
            };
        }
    }

    pub fn on_boundary(&self) -> bool {
        self.rho.iter().any(|r| *r == 0.0)
    }
}

/// Point of the band `[0, eps) x S^1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandPoint {
    pub rho: f64,
    pub alpha: f64,
}

fn require_complex(chart: &ChartSpec) -> Result<()> {
    if chart.field_kind != FieldKind::Complex {
        return Err(Error::Config(format!("chart {} is real", chart.id)));
    }
    Ok(())
}

pub fn polar_blowup(chart: &ChartSpec, z: &[Complex64]) -> Result<PolarPoint> {
    require_complex(chart)?;
    chart.multiplicity_profile(z)?;
    let divisor = chart.divisor_coords();
    let rho = divisor.iter().map(|&i| z[i].norm()).collect();
    let alpha = divisor.iter().map(|&i| reduce_angle(z[i].arg())).collect();
    Ok(PolarPoint { chart: chart.id.clone(), divisor, rho, alpha, z: z.to_vec() })
}

pub fn polar_down(p: &PolarPoint) -> Vec<Complex64> {
    let mut z = p.z.clone();
    for (k, &i) in p.divisor.iter().enumerate() {
        z[i] = Complex64::from_polar(p.rho[k], p.alpha[k]);
    }
    z
}

/// `(prod rho_i^a_i |g|, sum a_i alpha_i + arg g)`.
pub fn f_prime(chart: &ChartSpec, p: &PolarPoint) -> BandPoint {
    let g = chart.eval_g(&p.z);
    let mut rho = g.norm();
    let mut alpha = g.arg();
    for (k, &i) in p.divisor.iter().enumerate() {
        let a = chart.exponents.get(i);
        rho *= p.rho[k].powi(a as i32);
        alpha += a as f64 * p.alpha[k];
    }
    BandPoint { rho, alpha: reduce_angle(alpha) }
}

/// Absorption of the unit factor into one divisor coordinate,
/// `zeta_j0 = z_j0 g^(1/a_j0)` with the principal root.
#[derive(Clone, Debug, PartialEq)]
struct Absorption {
    j0: usize,
    a: f64,
    g: Expr,
    dg: Expr,
}

impl Absorption {
    fn root(&self, z: &[Complex64]) -> Complex64 {
        self.g.eval(z).powf(1.0 / self.a)
    }

    fn partial(&self, z: &[Complex64]) -> Complex64 {
        let g = self.g.eval(z);
        let s = g.powf(1.0 / self.a);
        s + z[self.j0] * s / (g * self.a) * self.dg.eval(z)
    }

    /// Solves `t * root(z with z_j0 = t) = zeta` for `t`.
    fn solve(&self, z: &mut [Complex64], zeta: Complex64) -> Result<()> {
        if zeta == Complex64::new(0.0, 0.0) {
            z[self.j0] = zeta;
            return Ok(());
        }
        z[self.j0] = Complex64::new(0.0, 0.0);
        let mut t = zeta / self.root(z);
        for _ in 0..100 {
            z[self.j0] = t;
            let r = t * self.root(z) - zeta;
            let step = r / self.partial(z);
            t -= step;
            if step.norm() <= 1e-16 * t.norm().max(1e-300) {
                z[self.j0] = t;
                return Ok(());
            }
        }
        z[self.j0] = t;
        if (t * self.root(z) - zeta).norm() <= 1e-13 * zeta.norm() {
            Ok(())
        } else {
            Err(Error::Range("normalized coordinate has no preimage".into()))
        }
    }
}

/// Tries each divisor coordinate in turn; the substitution must be
/// injective in it, which is checked through the derivative lying in a
/// half-plane on the chart grid.
fn absorb(chart: &ChartSpec) -> Option<Option<Absorption>> {
    if chart.unit_factor.as_constant() == Some(1.0) {
        return Some(None);
    }
    let grid: Vec<Vec<Complex64>> =
        unit_factor_grid(chart).iter().map(|v| v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()).collect();
    let limit = PI - 1e-3;
    if grid.iter().any(|z| {
        let g = chart.eval_g(z);
        g.norm() == 0.0 || g.arg().abs() > limit
    }) {
        return None;
    }
    for j in chart.divisor_coords() {
        let ab = Absorption {
            j0: j,
            a: chart.exponents.get(j) as f64,
            g: chart.unit_factor.clone(),
            dg: chart.unit_factor.derivative(j),
        };
        let ok = grid.iter().all(|z| {
            let mut z0 = z.clone();
            z0[j] = Complex64::new(0.0, 0.0);
            let theta = -ab.root(&z0).arg();
            (Complex64::from_polar(1.0, theta) * ab.partial(z)).re > 0.0
        });
        if ok {
            return Some(Some(ab));
        }
    }
    None
}

/// Retraction of one complex chart, with its normalization worked out
/// once.
#[derive(Clone, Debug)]
pub struct ComplexRetractor {
    chart: ChartSpec,
    /// `None`: numeric only; `Some(None)`: the chart is already monomial.
    absorption: Option<Option<Absorption>>,
}

impl ComplexRetractor {
    pub fn new(chart: &ChartSpec) -> Result<ComplexRetractor> {
        require_complex(chart)?;
        if chart.divisor_coords().is_empty() {
            return Err(Error::Domain(format!("chart {} has no divisor coordinate", chart.id)));
        }
        Ok(ComplexRetractor { chart: chart.clone(), absorption: absorb(chart) })
    }

    pub fn chart(&self) -> &ChartSpec {
        &self.chart
    }

    pub fn has_closed_form(&self) -> bool {
        self.absorption.is_some()
    }

    /// Retracts onto the boundary, every angle fixed. Returns the retracted
    /// point and the hitting time.
    pub fn retract(&self, p: &PolarPoint, mode: Mode) -> Result<(PolarPoint, f64)> {
        if p.on_boundary() {
            return Ok((p.clone(), 0.0));
        }
        match (&self.absorption, mode) {
            (Some(ab), Mode::ClosedForm) => self.retract_closed(p, ab.as_ref()),
            _ => self.retract_numeric(p),
        }
    }

    fn retract_closed(&self, p: &PolarPoint, ab: Option<&Absorption>) -> Result<(PolarPoint, f64)> {
        let mut rho = p.rho.clone();
        let mut zeta_alpha = 0.0;
        let kj = ab.map(|ab| p.divisor.iter().position(|&i| i == ab.j0).unwrap());
        if let (Some(ab), Some(k)) = (ab, kj) {
            let s = ab.root(&p.z);
            rho[k] *= s.norm();
            zeta_alpha = p.alpha[k] + s.arg();
        }
        let delta = rho.iter().copied().fold(f64::INFINITY, f64::min);
        let mut q = p.clone();
        for (k, r) in rho.iter().enumerate() {
            q.rho[k] = if *r == delta { 0.0 } else { r - delta };
        }
        q.refresh();
        if let (Some(ab), Some(k)) = (ab, kj) {
            let zeta = Complex64::from_polar(q.rho[k], zeta_alpha);
            ab.solve(&mut q.z, if q.rho[k] == 0.0 { Complex64::new(0.0, 0.0) } else { zeta })?;
            q.rho[k] = q.z[ab.j0].norm();
            q.alpha[k] = reduce_angle(zeta_alpha - ab.root(&q.z).arg());
        }
        Ok((q, delta))
    }

    /// Integrates `rho_i' = -1`, turning the first divisor angle so that the
    /// angle of `f` stays fixed.
    fn retract_numeric(&self, p: &PolarPoint) -> Result<(PolarPoint, f64)> {
        let chart = &self.chart;
        let m = p.divisor.len();
        let j0 = p.divisor[0];
        let a0 = chart.exponents.get(j0) as f64;
        let g = &chart.unit_factor;
        let grads: Vec<Expr> = p.divisor.iter().map(|&i| g.derivative(i)).collect();
        let build = |s: &[f64]| -> PolarPoint {
            let mut q = p.clone();
            q.rho.copy_from_slice(&s[..m]);
            q.alpha[0] = s[m];
            for r in q.rho.iter_mut() {
                *r = r.max(0.0);
            }
            for (k, &i) in q.divisor.iter().enumerate() {
                q.z[i] = Complex64::from_polar(q.rho[k], q.alpha[k]);
            }
            q
        };
        let rhs = |s: &[f64]| {
            let q = build(s);
            let gz = g.eval(&q.z);
            if gz.norm() == 0.0 {
                return Err(Error::Flow("unit factor vanishes along the flow".into()));
            }
            let mut da = Complex64::new(0.0, 0.0);
            for (grad, alpha) in grads.iter().zip(&q.alpha) {
                da -= grad.eval(&q.z) * Complex64::from_polar(1.0, *alpha);
            }
            let turn = (grads[0].eval(&q.z) * Complex64::i() * Complex64::from_polar(q.rho[0], q.alpha[0]) / gz).im;
            let drift = (da / gz).im;
            let denom = a0 + turn;
            if denom.abs() < 1e-12 {
                return Err(Error::Flow("angle compensation is singular".into()));
            }
            let mut v = vec![-1.0; m];
            v.push(-drift / denom);
            Ok(v)
        };
        let mut s0 = p.rho.clone();
        s0.push(p.alpha[0]);
        let run =
            integrate(rhs, &s0, &OdeControls::default(), |s| s[..m].iter().copied().fold(f64::INFINITY, f64::min))?;
        if !run.event {
            return Err(Error::Flow("no boundary hit".into()));
        }
        let (t, s) = run.last();
        let mut s = s.to_vec();
        let k = (0..m).min_by(|a, b| s[*a].total_cmp(&s[*b])).unwrap();
        s[k] = 0.0;
        let mut q = build(&s);
        q.refresh();
        Ok((q, t))
    }
}

/// The angle-preserving retraction of a polar point.
pub fn complex_retract(chart: &ChartSpec, p: &PolarPoint, mode: Mode) -> Result<PolarPoint> {
    Ok(ComplexRetractor::new(chart)?.retract(p, mode)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(a: &[u32], g: &str) -> ChartSpec {
        ChartSpec::monomial("c", FieldKind::Complex, a, g, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polar_coordinates_of_simple_points() {
        let ch = chart(&[2, 3], "1");
        let p = polar_blowup(&ch, &[c(0.9, 0.0), c(0.0, 0.9)]).unwrap();
        assert_eq!(p.rho, vec![0.9, 0.9]);
        assert_eq!(p.alpha, vec![0.0, PI / 2.0]);
        let q = PolarPoint::new(&ch, &[0.0, 0.5], &[PI / 3.0, 0.0], &[]).unwrap();
        assert_eq!(q.alpha[0], PI / 3.0);
        assert_eq!(polar_down(&q)[0], c(0.0, 0.0));
    }

    #[test]
    fn band_value_matches_f() {
        let ch = chart(&[2, 3], "1");
        let p = PolarPoint::new(&ch, &[0.5, 1.0], &[PI / 2.0, PI], &[]).unwrap();
        let b = f_prime(&ch, &p);
        assert!((b.rho - 0.25).abs() < 1e-15 && angle_distance(b.alpha, 0.0) < 1e-12);
        let z = [c(0.9, 0.0), c(0.0, 0.5)];
        let b = f_prime(&ch, &polar_blowup(&ch, &z).unwrap());
        let f = ch.eval_f(&z).unwrap();
        assert!((b.rho - f.norm()).abs() < 1e-15 && angle_distance(b.alpha, f.arg()) < 1e-12);
    }

    #[test]
    fn retraction_keeps_angles() {
        let ch = chart(&[2, 3], "1");
        let p = PolarPoint::new(&ch, &[0.3, 0.3], &[1.0, 2.0], &[]).unwrap();
        let q = complex_retract(&ch, &p, Mode::ClosedForm).unwrap();
        assert_eq!(q.rho, vec![0.0, 0.0]);
        assert_eq!(q.alpha, p.alpha);
        assert_eq!(complex_retract(&ch, &q, Mode::ClosedForm).unwrap(), q);
    }

    #[test]
    fn unit_factor_is_absorbed_with_angle_fixed() {
        let ch = chart(&[2, 1], "1 + 0.3*z1 + 0.2*z2");
        let r = ComplexRetractor::new(&ch).unwrap();
        assert!(r.has_closed_form());
        let p = polar_blowup(&ch, &[c(0.4, 0.3), c(-0.2, 0.5)]).unwrap();
        let before = f_prime(&ch, &p).alpha;
        for mode in [Mode::ClosedForm, Mode::Numeric] {
            let (q, _) = r.retract(&p, mode).unwrap();
            assert!(q.on_boundary());
            assert!(angle_distance(f_prime(&ch, &q).alpha, before) < 1e-9, "{mode:?}");
        }
    }
}
