//! The cut of `M` along the central fibre.
//!
//! Locally the cut space is a disjoint union of closed quadrants, one per
//! choice of sign for each divisor coordinate of the chart. Such a choice is
//! a [`SignSheet`]; a point of the cut space is a chart point together with a
//! sheet whose quadrant contains it. Sheets of different charts are glued by
//! the transition sign data, lazily: nothing global is materialized.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ncmodel::{unit_factor_grid, ChartSpec, FieldKind, ModelPoint, NCModel, SignMode, Transition};

/// A sign for every divisor coordinate of a chart, keyed by coordinate index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignSheet {
    signs: BTreeMap<usize, i8>,
}

impl SignSheet {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, i8)>) -> SignSheet {
        SignSheet { signs: pairs.into_iter().collect() }
    }

    /// The all-positive sheet over the given coordinates.
    pub fn positive(coords: &[usize]) -> SignSheet {
        SignSheet::from_pairs(coords.iter().map(|&i| (i, 1)))
    }

    pub fn get(&self, coord: usize) -> Option<i8> {
        self.signs.get(&coord).copied()
    }

    pub fn sign(&self, coord: usize) -> f64 {
        self.signs.get(&coord).copied().unwrap_or(1) as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &i8)> {
        self.signs.iter()
    }

    pub fn coords(&self) -> Vec<usize> {
        self.signs.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn flipped(&self, coord: usize) -> SignSheet {
        let mut s = self.clone();
        if let Some(v) = s.signs.get_mut(&coord) {
            *v = -*v;
        }
        s
    }

    /// Compact label such as `+-+`, in coordinate order.
    pub fn label(&self) -> String {
        self.signs.values().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }
}

/// A point of the cut space in one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CutPoint {
    pub chart: String,
    pub x: Vec<f64>,
    pub sheet: SignSheet,
}

impl CutPoint {
    /// Checks that `x` lies in the closed quadrant of `sheet`, a coordinate
    /// within the zero tolerance of its hyperplane counting as on it.
    pub fn new(chart: &ChartSpec, x: Vec<f64>, sheet: SignSheet) -> Result<CutPoint> {
        if sheet.coords() != chart.divisor_coords() {
            return Err(Error::Domain(format!(
                "sheet {} does not match the divisor coordinates of chart {}",
                sheet.label(),
                chart.id
            )));
        }
        if !chart.contains(&x) {
            return Err(Error::Domain(format!("point outside the box of chart {}", chart.id)));
        }
        let tol = chart.zero_tol();
        for (&i, &s) in sheet.iter() {
            if (s as f64) * x[i] < -tol {
                return Err(Error::Domain(format!(
                    "coordinate {} = {} is not in the quadrant of sheet {}",
                    i + 1,
                    x[i],
                    sheet.label()
                )));
            }
        }
        Ok(CutPoint { chart: chart.id.clone(), x, sheet })
    }

    /// Whether the point lies on the boundary `X'` of the cut space.
    pub fn on_boundary(&self, chart: &ChartSpec) -> bool {
        let tol = chart.zero_tol();
        self.sheet.iter().any(|(&i, _)| self.x[i].abs() <= tol)
    }
}

/// All `2^m` sheets of a chart with `m` divisor coordinates, in
/// lexicographic order with `+` before `-`.
pub fn cut_chart(chart: &ChartSpec) -> Vec<SignSheet> {
    let coords = chart.divisor_coords();
    let m = coords.len();
    (0..1u64 << m)
        .map(|mask| {
            SignSheet::from_pairs(
                coords.iter().enumerate().map(|(b, &i)| (i, if mask & (1 << (m - 1 - b)) != 0 { -1 } else { 1 })),
            )
        })
        .collect()
}

pub fn project(p: &CutPoint) -> ModelPoint {
    ModelPoint { chart: p.chart.clone(), x: p.x.clone() }
}

/// The preimage of a chart point: a free sign for each vanishing divisor
/// coordinate, the forced sign for every other one.
pub fn fibre(model: &NCModel, p: &ModelPoint) -> Result<Vec<CutPoint>> {
    let chart = model.chart(&p.chart)?;
    fibre_in_chart(chart, &p.x)
}

pub fn fibre_in_chart(chart: &ChartSpec, x: &[f64]) -> Result<Vec<CutPoint>> {
    let profile = chart.multiplicity_profile(x)?;
    let forced: Vec<(usize, i8)> = chart
        .divisor_coords()
        .into_iter()
        .filter(|i| !profile.coords.contains(i))
        .map(|i| (i, if x[i] > 0.0 { 1 } else { -1 }))
        .collect();
    let free = &profile.coords;
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0..1u64 << free.len() {
        let mut pairs = forced.clone();
        pairs.extend(free.iter().enumerate().map(|(b, &i)| (i, if mask & (1 << b) != 0 { -1 } else { 1 })));
        let mut xs = x.to_vec();
        for &i in free {
            xs[i] = 0.0;
        }
        out.push(CutPoint { chart: chart.id.clone(), x: xs, sheet: SignSheet::from_pairs(pairs) });
    }
    out.sort_by(|a, b| a.sheet.cmp(&b.sheet));
    Ok(out)
}

/// The covering transformation for one component, in chart coordinates: the
/// sheet sign at the component's coordinate flips, and so does the
/// coordinate. Over the component itself (coordinate zero) this fixes the
/// projection; elsewhere it is the matching symmetry of the local model.
pub fn deck_action(chart: &ChartSpec, component: &str, p: &CutPoint) -> Result<CutPoint> {
    let i = chart
        .coord_of(component)
        .ok_or_else(|| Error::Domain(format!("component {component} does not meet chart {}", chart.id)))?;
    let mut q = p.clone();
    q.x[i] = -q.x[i];
    q.sheet = p.sheet.flipped(i);
    Ok(q)
}

/// Carries a sheet across a transition, using the point to fix signs of
/// target components that the source chart does not see.
pub fn transport(model: &NCModel, t: &Transition, p: &CutPoint) -> Result<Option<CutPoint>> {
    let src = model.chart(&t.source)?;
    let tgt = model.chart(&t.target)?;
    if p.chart != src.id {
        return Err(Error::Domain(format!("cut point is in chart {}, transition starts at {}", p.chart, src.id)));
    }
    if !t.in_overlap(&p.x) {
        return Ok(None);
    }
    let y = t.apply(&p.x);
    if !tgt.contains(&y) {
        return Ok(None);
    }
    let mut pairs = Vec::new();
    for j in tgt.divisor_coords() {
        let label = tgt.label(j).unwrap();
        let s = match (src.coord_of(label), t.sign_data.get(label)) {
            (Some(i), Some(&s)) => s * p.sheet.get(i).unwrap_or(1),
            _ => {
                if y[j] > 0.0 {
                    1
                } else {
                    -1
                }
            }
        };
        pairs.push((j, s));
    }
    Ok(Some(CutPoint { chart: tgt.id.clone(), x: y, sheet: SignSheet::from_pairs(pairs) }))
}

/// Transports the signs of the given components around a closed chain of
/// transitions, returning the resulting sign for each.
pub fn loop_monodromy(chain: &[&Transition], components: &[&str]) -> Result<BTreeMap<String, i8>> {
    for w in chain.windows(2) {
        if w[0].target != w[1].source {
            return Err(Error::Model("transition chain is not composable".into()));
        }
    }
    if let (Some(first), Some(last)) = (chain.first(), chain.last()) {
        if first.source != last.target {
            return Err(Error::Model("transition chain is not closed".into()));
        }
    }
    let mut out = BTreeMap::new();
    for &c in components {
        let mut s: i8 = 1;
        for t in chain {
            s *= t.sign_data.get(c).copied().ok_or_else(|| {
                Error::Model(format!("transition {} -> {} carries no sign for {c}", t.source, t.target))
            })?;
        }
        out.insert(c.to_string(), s);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

/// Sign of `f` on the interior of a sheet at `x`: on the quadrant,
/// `f = prod (e_i x_i)^a_i * (prod e_i^a_i) g`.
pub fn sheet_sign(chart: &ChartSpec, sheet: &SignSheet, x: &[f64]) -> f64 {
    let mut s = chart.eval_g(x).signum();
    for (&i, &e) in sheet.iter() {
        if chart.exponents.get(i) % 2 == 1 {
            s *= e as f64;
        }
    }
    s
}

/// The decomposition of the cut space into `M'+` (where `f > 0` on the
/// interior) and `M'-`.
#[derive(Clone, Debug)]
pub struct SplitPm {
    sides: BTreeMap<(String, SignSheet), Side>,
}

impl SplitPm {
    pub fn side(&self, p: &CutPoint) -> Option<Side> {
        self.sides.get(&(p.chart.clone(), p.sheet.clone())).copied()
    }

    pub fn is_plus(&self, p: &CutPoint) -> bool {
        self.side(p) == Some(Side::Plus)
    }

    pub fn is_minus(&self, p: &CutPoint) -> bool {
        self.side(p) == Some(Side::Minus)
    }

    pub fn sheets(&self, side: Side) -> Vec<(&str, &SignSheet)> {
        self.sides.iter().filter(|(_, s)| **s == side).map(|((c, sh), _)| (c.as_str(), sh)).collect()
    }
}

/// Splits every sheet of a real model by the sign of `f` on it. The unit
/// factor is evaluated on the checking grid of each chart; it must keep one
/// sign there.
pub fn split_pm(model: &NCModel) -> Result<SplitPm> {
    let mut sides = BTreeMap::new();
    for chart in &model.charts {
        if chart.field_kind != FieldKind::Real {
            return Err(Error::Config(format!("chart {} is complex; the split is defined for real models", chart.id)));
        }
        let mut sign = 0.0;
        for p in unit_factor_grid(chart) {
            let g = chart.eval_g(&p);
            if g == 0.0 || (sign != 0.0 && g.signum() != sign) {
                return Err(Error::Model(format!("unit factor of chart {} vanishes at {p:?}", chart.id)));
            }
            sign = g.signum();
        }
        let centre = vec![0.0; chart.dim];
        for sheet in cut_chart(chart) {
            let mut s = sheet_sign(chart, &sheet, &centre);
            if model.sign_mode() == SignMode::Nonnegative {
                s = s.abs();
            }
            sides.insert((chart.id.clone(), sheet), if s > 0.0 { Side::Plus } else { Side::Minus });
        }
    }
    Ok(SplitPm { sides })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(a: &[u32], g: &str) -> ChartSpec {
        ChartSpec::monomial("c", FieldKind::Real, a, g, 1.0).unwrap()
    }

    #[test]
    fn sheet_counts() {
        assert_eq!(cut_chart(&chart(&[2, 2], "1")).len(), 4);
        assert_eq!(cut_chart(&chart(&[0, 0], "1")).len(), 1);
        assert_eq!(cut_chart(&chart(&[2, 3, 6], "1")).len(), 8);
    }

    #[test]
    fn fibre_sizes_follow_the_vanishing_pattern() {
        let c = chart(&[2, 2], "1");
        assert_eq!(fibre_in_chart(&c, &[0.0, 0.0]).unwrap().len(), 4);
        assert_eq!(fibre_in_chart(&c, &[0.3, 0.4]).unwrap().len(), 1);
        assert_eq!(fibre_in_chart(&c, &[0.0, -0.4]).unwrap().len(), 2);
        let f = fibre_in_chart(&c, &[0.3, -0.4]).unwrap();
        assert_eq!(f[0].sheet.label(), "+-");
    }

    #[test]
    fn deck_generators_are_commuting_involutions() {
        let c = chart(&[2, 3], "1");
        let p = CutPoint::new(&c, vec![0.2, -0.5], SignSheet::from_pairs([(0, 1), (1, -1)])).unwrap();
        let a = |q: &CutPoint| deck_action(&c, "V1", q).unwrap();
        let b = |q: &CutPoint| deck_action(&c, "V2", q).unwrap();
        assert_eq!(a(&a(&p)), p);
        assert_eq!(a(&b(&p)), b(&a(&p)));
        assert!(deck_action(&c, "W", &p).is_err());
    }

    #[test]
    fn cut_point_rejects_the_wrong_quadrant() {
        let c = chart(&[1, 1], "1");
        assert!(CutPoint::new(&c, vec![-0.2, 0.1], SignSheet::positive(&[0, 1])).is_err());
        assert!(CutPoint::new(&c, vec![0.0, 0.1], SignSheet::positive(&[0, 1])).is_ok());
    }

    #[test]
    fn split_of_a_negative_unit() {
        let m = NCModel::single_chart("neg", chart(&[2, 2], "-1"), None).unwrap();
        let s = split_pm(&m).unwrap();
        assert!(s.sheets(Side::Plus).is_empty());
        assert_eq!(s.sheets(Side::Minus).len(), 4);
    }
}
