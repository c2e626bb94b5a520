//! Torus fibres of the retraction, their angle level sets, and the lift of
//! the angle of `f` to the universal cover of the punctured disc.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flowretract::Mode;
use crate::ncmodel::ChartSpec;

use super::{f_prime, polar_blowup, reduce_angle, BandPoint, ComplexRetractor, PolarPoint};

/// The fibre `(S^1)^k` over a point with `k` vanishing divisor coordinates,
/// with the exponents of those coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusFibre {
    pub k: usize,
    pub exponents: Vec<u32>,
}

impl TorusFibre {
    pub fn alpha_components(&self) -> usize {
        alpha_fibre_components(&self.exponents)
    }
}

pub fn torus_fibre(chart: &ChartSpec, z: &[Complex64]) -> Result<TorusFibre> {
    let profile = chart.multiplicity_profile(z)?;
    Ok(TorusFibre { k: profile.k, exponents: profile.coords.iter().map(|&i| chart.exponents.get(i)).collect() })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Number of components of `{sum a_i alpha_i = const}` in `(S^1)^k`, which
/// is `gcd(a_1, ..., a_k)`; a point (one component) when `k = 0`.
pub fn alpha_fibre_components(exponents: &[u32]) -> usize {
    exponents.iter().fold(0u64, |g, &a| gcd(g, a as u64)).max(1) as usize
}

/// Integers `b` with `sum a_i b_i = gcd(a)`.
fn bezout(exponents: &[u32]) -> Vec<i64> {
    let mut g = 0i64;
    let mut coeffs: Vec<i64> = Vec::with_capacity(exponents.len());
    for &a in exponents {
        let a = a as i64;
        // Extended Euclid on (g, a): s g + t a = gcd.
        let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (g, a, 1i64, 0i64, 0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        for c in coeffs.iter_mut() {
            *c *= s0;
        }
        coeffs.push(t0);
        g = r0;
    }
    coeffs
}

/// A point of the universal cover of the circle: `angle + 2 pi winding`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiftedAngle {
    pub winding: i64,
    /// Stored as the bit pattern of an angle in `[0, 2 pi)` so the type can
    /// be compared exactly.
    angle_bits: u64,
}

impl LiftedAngle {
    pub fn new(winding: i64, angle: f64) -> LiftedAngle {
        let a = reduce_angle(angle);
        let extra = ((angle - a) / TAU).round() as i64;
        LiftedAngle { winding: winding + extra, angle_bits: a.to_bits() }
    }

    pub fn from_value(v: f64) -> LiftedAngle {
        LiftedAngle::new(0, v)
    }

    /// The reduced angle in `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        f64::from_bits(self.angle_bits)
    }

    pub fn value(&self) -> f64 {
        self.angle() + TAU * self.winding as f64
    }

    /// The deck transformation applied `n` times.
    pub fn shifted(&self, n: i64) -> LiftedAngle {
        LiftedAngle { winding: self.winding + n, ..*self }
    }
}

/// Which component of the level set `sum a_i alpha_i = level` contains the
/// given angles. Components are numbered by `r` in `Z/g`, where the
/// component `r` contains the points with `sum (a_i/g) alpha_i` congruent to
/// `(level + 2 pi r)/g` modulo `2 pi`.
pub fn component_index(exponents: &[u32], alphas: &[f64], level: &LiftedAngle) -> usize {
    let g = alpha_fibre_components(exponents) as i64;
    let l: f64 = exponents.iter().zip(alphas).map(|(&a, &al)| (a as i64 / g) as f64 * al).sum();
    let r = ((g as f64 * l - level.value()) / TAU).round() as i64;
    r.rem_euclid(g) as usize
}

/// A point of component `r` of the level set over `level`, with angles in
/// `[0, 2 pi)`.
pub fn component_representative(exponents: &[u32], r: usize, level: &LiftedAngle) -> Vec<f64> {
    let g = alpha_fibre_components(exponents) as f64;
    let t = (level.value() + TAU * r as f64) / g;
    bezout(exponents).iter().map(|&b| reduce_angle(b as f64 * t)).collect()
}

/// The `a` points of `a alpha = level` on the circle, ordered by `r`.
pub fn alpha_fibre_points(a: u32, level: &LiftedAngle) -> Vec<f64> {
    (0..a as usize).map(|r| component_representative(&[a], r, level)[0]).collect()
}

/// The permutation of level-set components induced by turning the level once
/// around the circle: component `r` is carried continuously from `level` to
/// `level + 2 pi` and identified with a component at the starting level.
pub fn monodromy(exponents: &[u32]) -> Vec<usize> {
    let g = alpha_fibre_components(exponents);
    let start = LiftedAngle::from_value(0.3);
    let b = bezout(exponents);
    (0..g)
        .map(|r| {
            // Follow alpha_i(t) = b_i (level + t + 2 pi r) / g to t = 2 pi.
            let end: Vec<f64> = b
                .iter()
                .map(|&bi| reduce_angle(bi as f64 * (start.value() + TAU + TAU * r as f64) / g as f64))
                .collect();
            component_index(exponents, &end, &start)
        })
        .collect()
}

/// Lifts the angle of `f` along a path of chart points, starting from the
/// principal angle at the first point.
pub fn lift_angle(chart: &ChartSpec, path: &[Vec<Complex64>]) -> Result<LiftedAngle> {
    let mut value: Option<f64> = None;
    let mut last = 0.0;
    for z in path {
        let f = chart.eval_f(z)?;
        if f.norm() <= chart.zero_tol() {
            return Err(Error::Lift("path meets the central fibre".into()));
        }
        let a = f.arg();
        match value {
            None => value = Some(reduce_angle(a)),
            Some(v) => {
                let mut d = a - last;
                d -= TAU * (d / TAU).round();
                if d.abs() > PI / 2.0 {
                    return Err(Error::Lift("path is too coarse to follow the angle of f".into()));
                }
                value = Some(v + d);
            }
        }
        last = a;
    }
    value.map(LiftedAngle::from_value).ok_or_else(|| Error::Lift("empty path".into()))
}

/// The equivariant trivialization `(r'(p), |f(p)|, lifted angle of f(p))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gamma {
    pub base: PolarPoint,
    pub rho: f64,
    pub alpha: LiftedAngle,
}

/// Trivialization at the end of `path`, with the angle lifted along it.
pub fn universal_trivialization(retractor: &ComplexRetractor, path: &[Vec<Complex64>], mode: Mode) -> Result<Gamma> {
    let chart = retractor.chart();
    let alpha = lift_angle(chart, path)?;
    let end = path.last().unwrap();
    let p = polar_blowup(chart, end)?;
    let BandPoint { rho, .. } = f_prime(chart, &p);
    let (base, _) = retractor.retract(&p, mode)?;
    Ok(Gamma { base, rho, alpha })
}

/// The deck transformation `alpha -> alpha + 2 pi` on the trivialization.
pub fn deck_shift(g: &Gamma) -> Gamma {
    Gamma { alpha: g.alpha.shifted(1), ..g.clone() }
}

/// Inverse of the trivialization over a monomial chart: the point over
/// `base` at radius level `rho`, reached by growing every divisor radius by
/// the same amount.
pub fn untrivialize_complex(chart: &ChartSpec, base: &PolarPoint, rho: f64) -> Result<PolarPoint> {
    if !chart.is_monomial() || chart.unit_factor.as_constant() != Some(1.0) {
        return Err(Error::Config(format!("chart {} has a nontrivial unit factor", chart.id)));
    }
    if !(rho > 0.0) {
        return Ok(base.clone());
    }
    let a: Vec<f64> = base.divisor.iter().map(|&i| chart.exponents.get(i) as f64).collect();
    let log_level = |d: f64| base.rho.iter().zip(&a).map(|(r, a)| a * (r + d).ln()).sum::<f64>();
    let target = rho.ln();
    let (mut lo, mut hi) = (0.0, chart.domain_radius);
    if log_level(hi) < target {
        return Err(Error::Range(format!("level {rho} is beyond the chart")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_level(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut q = base.clone();
    for r in q.rho.iter_mut() {
        *r += 0.5 * (lo + hi);
    }
    q.refresh();
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_counts() {
        assert_eq!(alpha_fibre_components(&[6]), 6);
        assert_eq!(alpha_fibre_components(&[2, 2]), 2);
        assert_eq!(alpha_fibre_components(&[2, 3]), 1);
        assert_eq!(alpha_fibre_components(&[]), 1);
    }

    #[test]
    fn bezout_identity() {
        for e in [vec![6, 4], vec![2, 3, 6], vec![4, 6, 3], vec![5]] {
            let b = bezout(&e);
            let s: i64 = e.iter().zip(&b).map(|(&a, &b)| a as i64 * b).sum();
            assert_eq!(s as usize, alpha_fibre_components(&e), "{e:?}");
        }
    }

    #[test]
    fn representatives_lie_on_their_components() {
        let level = LiftedAngle::from_value(1.1);
        for e in [vec![4, 6], vec![6], vec![2, 4, 6]] {
            for r in 0..alpha_fibre_components(&e) {
                let al = component_representative(&e, r, &level);
                let s: f64 = e.iter().zip(&al).map(|(&a, &x)| a as f64 * x).sum();
                assert!(super::super::angle_distance(s, level.value()) < 1e-10);
                assert_eq!(component_index(&e, &al, &level), r);
            }
        }
    }

    #[test]
    fn monodromy_is_a_cyclic_shift() {
        assert_eq!(monodromy(&[6]), vec![1, 2, 3, 4, 5, 0]);
        assert_eq!(monodromy(&[4, 6]), vec![1, 0]);
        assert_eq!(monodromy(&[2, 3]), vec![0]);
    }

    #[test]
    fn lifted_angles() {
        let a = LiftedAngle::from_value(-0.5);
        assert_eq!(a.winding, -1);
        assert!((a.value() + 0.5).abs() < 1e-15);
        assert_eq!(a.shifted(1).angle(), a.angle());
    }
}
