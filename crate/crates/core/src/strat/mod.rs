//! Quadrants, stratifications with normal crossings and piecewise-analytic
//! maps between them.

mod pa;
mod substrat;

use std::collections::BTreeSet;

use crate::error::Result;
use crate::expr::{neg, Expr};
use crate::ncmodel::{build_dual_complex, ChartSpec, ComponentId, FieldKind, NCModel};

pub use pa::{is_piecewise_analytic, PAMap, PAPiece, PaVerdict, Region};
pub use substrat::{min_substratification, tie_set, ClosedPiece, Substratification, TieStratum};

/// A partition of coordinate indices into vanishing, positive and negative
/// ones. The quadrant is the set of points with exactly that sign pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quadrant {
    pub i0: BTreeSet<usize>,
    pub iplus: BTreeSet<usize>,
    pub iminus: BTreeSet<usize>,
}

impl Quadrant {
    /// Whether the three sets are disjoint with union `coords`.
    pub fn partitions(&self, coords: &BTreeSet<usize>) -> bool {
        let total = self.i0.len() + self.iplus.len() + self.iminus.len();
        let union: BTreeSet<usize> = self.i0.iter().chain(&self.iplus).chain(&self.iminus).copied().collect();
        union.len() == total && &union == coords
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.i0.iter().all(|&i| x[i].abs() <= tol)
            && self.iplus.iter().all(|&i| x[i] > tol)
            && self.iminus.iter().all(|&i| x[i] < -tol)
    }

    /// Membership in the closure.
    pub fn closure_contains(&self, x: &[f64], tol: f64) -> bool {
        self.i0.iter().all(|&i| x[i].abs() <= tol)
            && self.iplus.iter().all(|&i| x[i] >= -tol)
            && self.iminus.iter().all(|&i| x[i] <= tol)
    }

    /// Codimension-one faces of the closure: one signed index moved to `I0`.
    pub fn boundary_faces(&self) -> Vec<Quadrant> {
        let mut out = Vec::new();
        for &i in self.iplus.iter().chain(&self.iminus) {
            let mut q = self.clone();
            q.iplus.remove(&i);
            q.iminus.remove(&i);
            q.i0.insert(i);
            out.push(q);
        }
        out
    }
}

/// Classifies each coordinate by its sign, values within `tol` of zero
/// counting as zero.
pub fn quadrant_of_point(x: &[f64], tol: f64) -> Quadrant {
    let mut q = Quadrant::default();
    for (i, &v) in x.iter().enumerate() {
        if v.abs() <= tol {
            q.i0.insert(i);
        } else if v > 0.0 {
            q.iplus.insert(i);
        } else {
            q.iminus.insert(i);
        }
    }
    q
}

/// One chart piece of a stratum: a quadrant in the divisor coordinates of
/// the chart, the other coordinates being free. Complex charts only
/// constrain which coordinates vanish, so their pieces have empty signed
/// sets and `complex` set.
#[derive(Clone, Debug, PartialEq)]
pub struct StratumPiece {
    pub chart: String,
    pub quadrant: Quadrant,
    pub complex: bool,
}

impl StratumPiece {
    pub fn contains(&self, chart: &ChartSpec, x: &[f64]) -> bool {
        let tol = chart.zero_tol();
        if self.complex {
            let coords = chart.divisor_coords();
            coords.iter().all(|i| (x[*i].abs() <= tol) == self.quadrant.i0.contains(i))
        } else {
            self.quadrant.contains(x, tol)
        }
    }

    /// Closure of a real piece as a region of the chart box.
    pub fn region(&self, chart: &ChartSpec) -> Region {
        let q = &self.quadrant;
        Region {
            dim: chart.dim,
            radius: chart.domain_radius,
            eq: q.i0.iter().map(|&i| Expr::var(i)).collect(),
            ineq: q.iplus.iter().map(|&i| Expr::var(i)).chain(q.iminus.iter().map(|&i| neg(Expr::var(i)))).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    /// Components through every point of the stratum.
    pub components: BTreeSet<ComponentId>,
    pub depth: usize,
    pub pieces: Vec<StratumPiece>,
}

impl Stratum {
    pub fn name(&self) -> String {
        self.components.iter().cloned().collect::<Vec<_>>().join("^")
    }

    pub fn contains(&self, model: &NCModel, chart: &str, x: &[f64]) -> bool {
        let Ok(c) = model.chart(chart) else { return false };
        self.pieces.iter().any(|p| p.chart == chart && p.contains(c, x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stratification {
    pub model: String,
    pub strata: Vec<Stratum>,
}

impl Stratification {
    /// Strata containing a chart point.
    pub fn locate(&self, model: &NCModel, chart: &str, x: &[f64]) -> Vec<&Stratum> {
        self.strata.iter().filter(|s| s.contains(model, chart, x)).collect()
    }

    pub fn by_depth(&self, depth: usize) -> Vec<&Stratum> {
        self.strata.iter().filter(|s| s.depth == depth).collect()
    }
}

/// The canonical stratification of the central fibre: one stratum per set
/// of components meeting in a point, consisting of the points lying on
/// exactly those components. On real charts each stratum is cut further into
/// quadrant pieces by the signs of the remaining divisor coordinates; the
/// open stratum `M \ X` of the associated stratification of `M` is left
/// implicit.
pub fn canonical_stratification(model: &NCModel) -> Result<Stratification> {
    let dual = build_dual_complex(model)?;
    let mut strata = Vec::new();
    for simplex in &dual.simplices {
        let mut pieces = Vec::new();
        for chart in &model.charts {
            let coords: Option<Vec<usize>> = simplex.components.iter().map(|c| chart.coord_of(c)).collect();
            let Some(zero) = coords else { continue };
            let others: Vec<usize> = chart.divisor_coords().into_iter().filter(|i| !zero.contains(i)).collect();
            if chart.field_kind == FieldKind::Complex {
                pieces.push(StratumPiece {
                    chart: chart.id.clone(),
                    quadrant: Quadrant { i0: zero.iter().copied().collect(), ..Default::default() },
                    complex: true,
                });
                continue;
            }
            for mask in 0..1u64 << others.len() {
                let mut q = Quadrant { i0: zero.iter().copied().collect(), ..Default::default() };
                for (b, &i) in others.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        q.iminus.insert(i);
                    } else {
                        q.iplus.insert(i);
                    }
                }
                pieces.push(StratumPiece { chart: chart.id.clone(), quadrant: q, complex: false });
            }
        }
        strata.push(Stratum { components: simplex.components.clone(), depth: simplex.depth, pieces });
    }
    Ok(Stratification { model: model.name.clone(), strata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reading_signs() {
        let q = quadrant_of_point(&[1.0, 0.0, -2.0], 1e-9);
        assert_eq!(q.iplus, BTreeSet::from([0]));
        assert_eq!(q.i0, BTreeSet::from([1]));
        assert_eq!(q.iminus, BTreeSet::from([2]));
        assert_eq!(quadrant_of_point(&[0.0, 0.0], 0.5).i0.len(), 2);
        let q = quadrant_of_point(&[1e-12, 1.0], 1e-9);
        assert_eq!((q.i0, q.iplus), (BTreeSet::from([0]), BTreeSet::from([1])));
    }

    #[test]
    fn x1x2_in_three_space() {
        let chart = ChartSpec::monomial("c", FieldKind::Real, &[1, 1, 0], "1", 1.0).unwrap();
        let m = NCModel::single_chart("t", chart, None).unwrap();
        let s = canonical_stratification(&m).unwrap();
        assert_eq!(s.by_depth(1).len(), 2);
        assert_eq!(s.by_depth(2).len(), 1);
        let on_x1 = s.locate(&m, "c", &[0.0, 0.3, -0.7]);
        assert_eq!(on_x1.len(), 1);
        assert_eq!(on_x1[0].name(), "V1");
        assert_eq!(s.locate(&m, "c", &[0.0, 0.0, 0.2])[0].depth, 2);
        assert!(s.locate(&m, "c", &[0.1, 0.3, 0.0]).is_empty());
    }

    #[test]
    fn faces_of_a_quadrant_are_quadrants() {
        let all = BTreeSet::from([0, 1, 2]);
        let q = quadrant_of_point(&[1.0, -1.0, 0.0], 0.0);
        for f in q.boundary_faces() {
            assert!(f.partitions(&all));
            assert_eq!(f.i0.len(), 2);
        }
    }
}
