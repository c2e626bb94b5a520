//! The retraction pushed down to the total space, and the real
//! specialization fibres it determines.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rand::Rng;

use crate::cut::{fibre, sheet_sign, CutPoint, SignSheet};
use crate::error::{Error, Result};
use crate::ncmodel::{ChartSpec, ModelPoint, NCModel, SignMode};
use crate::sampling;
use crate::strat::tie_set;

use super::normalize::normalize_chart;
use super::trivialize::{untrivialize, Trivialization};
use super::{retract_in_chart, Mode};

/// Result of retracting a point of the total space.
#[derive(Clone, Debug, PartialEq)]
pub struct Pushdown {
    /// Image on the central fibre, in ambient coordinates.
    pub point: Vec<f64>,
    /// Lift of the input to the cut space; `None` when the input is already
    /// on the central fibre.
    pub lift: Option<CutPoint>,
    pub base: Option<CutPoint>,
    pub delta: f64,
}

fn lift_candidates<'a>(model: &'a NCModel, q: &[f64]) -> Vec<(f64, &'a ChartSpec, Vec<f64>)> {
    let mut out = Vec::new();
    for chart in &model.charts {
        let x: Vec<f64> = match (&chart.sigma, &chart.sigma_inverse) {
            (_, Some(inv)) => inv.iter().map(|e| e.eval(q)).collect(),
            (None, None) => q.to_vec(),
            (Some(_), None) => continue,
        };
        if x.len() != chart.dim || x.iter().any(|v| !v.is_finite()) || !chart.contains(&x) {
            continue;
        }
        let depth = x.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / chart.domain_radius;
        out.push((depth, chart, x));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Retracts a point `q` of the total space onto the central fibre: lift to
/// the chart where it sits deepest, retract in the cut space, push down.
pub fn retract(model: &NCModel, q: &[f64], mode: Mode) -> Result<Pushdown> {
    if !model.is_real() {
        return Err(Error::Config("pushdown retraction is defined here for real models".into()));
    }
    let on_fibre = Pushdown { point: q.to_vec(), lift: None, base: None, delta: 0.0 };
    if model.eval_ambient_f(q) == Some(0.0) {
        return Ok(on_fibre);
    }
    let candidates = lift_candidates(model, q);
    let (_, chart, x) = candidates
        .into_iter()
        .next()
        .ok_or_else(|| Error::Lift(format!("no chart of model {} contains a preimage of {q:?}", model.name)))?;
    if chart.multiplicity_profile(&x)?.k > 0 {
        return Ok(on_fibre);
    }
    let sheet = SignSheet::from_pairs(chart.divisor_coords().into_iter().map(|i| (i, if x[i] < 0.0 { -1 } else { 1 })));
    let p = CutPoint::new(chart, x, sheet)?;
    let r = retract_in_chart(chart, &p, mode)?;
    Ok(Pushdown { point: model.sigma(chart, &r.point.x), lift: Some(p), base: Some(r.point), delta: r.delta })
}

fn level_side_matches(model: &NCModel, chart: &ChartSpec, p: &CutPoint, c: f64) -> bool {
    match model.sign_mode() {
        SignMode::Nonnegative => true,
        SignMode::General => sheet_sign(chart, &p.sheet, &p.x) == c.signum(),
    }
}

/// The points of `f = c` retracting to `p`: one per sheet over `p` on which
/// `f` has the sign of `c`.
pub fn specialization_fibre_real(model: &NCModel, p: &ModelPoint, c: f64, mode: Mode) -> Result<Vec<CutPoint>> {
    if !model.is_real() {
        return Err(Error::Config("real specialization fibres need a real model".into()));
    }
    if c == 0.0 || !c.is_finite() || (model.sign_mode() == SignMode::Nonnegative && c < 0.0) {
        return Err(Error::Range(format!("level {c} is not a nearby level")));
    }
    let chart = model.chart(&p.chart)?;
    let mut out = Vec::new();
    for base in fibre(model, p)? {
        if !level_side_matches(model, chart, &base, c) {
            continue;
        }
        let t = Trivialization { base, level: c.abs(), delta: 0.0, level_quadrature: None };
        out.push(untrivialize(chart, &t, mode)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MilnorCount {
    Count { components: usize, samples: usize },
    Inconclusive { reason: String },
}

/// Counts the components of `f = c` near `p` by sampling it inside the
/// ball of radius `ball` around the chart point and grouping samples by
/// sheet. Every sheet expected from the specialization fibre must be hit.
pub fn milnor_components_real(
    model: &NCModel,
    p: &ModelPoint,
    ball: f64,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<MilnorCount> {
    let chart = model.chart(&p.chart)?;
    let expected: BTreeSet<SignSheet> = specialization_fibre_real(model, p, c, Mode::ClosedForm)?
        .into_iter()
        .filter(|q| dist(&q.x, &p.x) < ball)
        .map(|q| q.sheet)
        .collect();
    let n = chart.dim;
    let inside = |x: &[f64]| dist(x, &p.x) < ball && chart.contains(x);
    let phi = |x: &[f64]| {
        chart.eval_g(x)
            * chart.divisor_coords().iter().map(|&i| x[i].powi(chart.exponents.get(i) as i32)).product::<f64>()
            - c
    };
    let mut rng = sampling::rng(seed);
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let steps = 200;
    for _ in 0..samples * 50 {
        if roots.len() >= samples {
            break;
        }
        let u: Vec<f64> = p.x.iter().map(|v| v + rng.gen_range(-ball..ball)).collect();
        if !inside(&u) {
            continue;
        }
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        d.iter_mut().for_each(|v| *v /= norm);
        let at = |t: f64| -> Vec<f64> { u.iter().zip(&d).map(|(a, b)| a + t * b).collect() };
        let h = 4.0 * ball / steps as f64;
        let mut prev: Option<(f64, f64)> = None;
        for s in 0..=steps {
            let t = -2.0 * ball + s as f64 * h;
            let x = at(t);
            if !inside(&x) {
                prev = None;
                continue;
            }
            let v = phi(&x);
            if let Some((t0, v0)) = prev {
                if v0 * v <= 0.0 && v0 != v {
                    let (mut lo, mut hi, mut vlo) = (t0, t, v0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let vm = phi(&at(mid));
                        if (vm <= 0.0) == (vlo <= 0.0) {
                            lo = mid;
                            vlo = vm;
                        } else {
                            hi = mid;
                        }
                    }
                    roots.push(at(0.5 * (lo + hi)));
                }
            }
            prev = Some((t, v));
        }
    }
    if roots.len() < 20 {
        return Ok(MilnorCount::Inconclusive {
            reason: format!("only {} samples of the level set found", roots.len()),
        });
    }
    let mut clusters: BTreeMap<SignSheet, usize> = BTreeMap::new();
    for x in &roots {
        let sheet =
            SignSheet::from_pairs(chart.divisor_coords().into_iter().map(|i| (i, if x[i] < 0.0 { -1 } else { 1 })));
        *clusters.entry(sheet).or_default() += 1;
    }
    if let Some(missing) = expected.iter().find(|s| !clusters.contains_key(*s)) {
        return Ok(MilnorCount::Inconclusive { reason: format!("no sample on sheet {}", missing.label()) });
    }
    Ok(MilnorCount::Count { components: clusters.len(), samples: roots.len() })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// The scaling `x_i -> lambda^(1/sum a) x_i` of the divisor coordinates of a
/// monomial chart. It maps `f = c` onto `f = lambda c` and commutes with the
/// retraction.
pub fn level_scaling(chart: &ChartSpec, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !chart.is_monomial() {
        return Err(Error::Config(format!("chart {} has a nontrivial unit factor", chart.id)));
    }
    if !(lambda > 0.0) {
        return Err(Error::Range(format!("scale {lambda} must be positive")));
    }
    let s = lambda.powf(1.0 / chart.exponents.total() as f64);
    let mut y = x.to_vec();
    for i in chart.divisor_coords() {
        y[i] *= s;
    }
    Ok(y)
}

fn compact(p: &CutPoint, y: &[f64]) -> (Vec<usize>, Vec<i8>, Vec<f64>) {
    let coords = p.sheet.coords();
    let eps = coords.iter().map(|&i| p.sheet.get(i).unwrap()).collect();
    let vals = coords.iter().map(|&i| y[i]).collect();
    (coords, eps, vals)
}

/// Whether the tie set of `p` (where `eps_i y_i` is smallest, in normalized
/// coordinates) is the set of coordinates vanishing on its base.
pub fn stratum_labels_match(chart: &ChartSpec, p: &CutPoint, t: &Trivialization) -> Result<bool> {
    let n = normalize_chart(chart, &p.sheet)
        .closed_form()
        .cloned()
        .ok_or_else(|| Error::Config(format!("chart {} cannot be normalized", chart.id)))?;
    let tol = 1e-9 * chart.domain_radius;
    let (coords, eps, vals) = compact(p, &n.forward(&p.x));
    let tie: BTreeSet<usize> = tie_set(&eps, &vals, tol).into_iter().map(|k| coords[k]).collect();
    let yb = n.forward(&t.base.x);
    let zero: BTreeSet<usize> = coords.iter().copied().filter(|&i| yb[i].abs() <= tol).collect();
    Ok(tie == zero)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transversality {
    pub rank: usize,
    pub dim: usize,
}

impl Transversality {
    pub fn ok(&self) -> bool {
        self.rank == self.dim
    }
}

/// Rank of the span of the level-set tangent and the tangent of the tie
/// stratum at an interior point, in normalized coordinates.
pub fn fibre_transversality(chart: &ChartSpec, p: &CutPoint) -> Result<Transversality> {
    let nrm = normalize_chart(chart, &p.sheet)
        .closed_form()
        .cloned()
        .ok_or_else(|| Error::Config(format!("chart {} cannot be normalized", chart.id)))?;
    let y = nrm.forward(&p.x);
    let dim = chart.dim;
    let (coords, eps, vals) = compact(p, &y);
    if vals.iter().zip(&eps).any(|(v, &e)| e as f64 * v <= 0.0) {
        return Err(Error::Domain("transversality is checked at interior points".into()));
    }
    let grad: Vec<f64> =
        (0..dim).map(|i| if coords.contains(&i) { chart.exponents.get(i) as f64 / y[i] } else { 0.0 }).collect();
    let g = nalgebra::DVector::from_vec(grad);
    // Level tangent: orthogonal complement of the gradient.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let proj = DMatrix::identity(dim, dim) - &g * g.transpose() / g.norm_squared();
    let svd = proj.svd(true, false);
    let u = svd.u.unwrap();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > 0.5 {
            rows.push(u.column(k).iter().copied().collect());
        }
    }
    let tie: BTreeSet<usize> =
        tie_set(&eps, &vals, 1e-9 * chart.domain_radius).into_iter().map(|k| coords[k]).collect();
    for j in (0..dim).filter(|j| !tie.contains(j)) {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        rows.push(e);
    }
    let mut diag = vec![0.0; dim];
    for &i in &tie {
        diag[i] = p.sheet.sign(i);
    }
    rows.push(diag);
    let m = DMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-6 * top).count();
    Ok(Transversality { rank, dim })
}
