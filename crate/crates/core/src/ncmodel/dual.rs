use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::check::label_violations;
use super::{ChartSpec, ComponentId, NCModel};

/// A set of components meeting in a point, with a chart witness where
/// exactly those components' coordinates vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub components: BTreeSet<ComponentId>,
    pub depth: usize,
    pub witness_chart: String,
    pub witness: Vec<f64>,
}

/// Nerve of the divisor components.
#[derive(Clone, Debug, PartialEq)]
pub struct DualComplex {
    pub vertices: Vec<ComponentId>,
    /// Every nonempty simplex, vertices included, sorted by depth then name.
    pub simplices: Vec<Simplex>,
}

impl DualComplex {
    pub fn edges(&self) -> Vec<&Simplex> {
        self.simplices.iter().filter(|s| s.depth == 2).collect()
    }

    pub fn contains(&self, set: &BTreeSet<ComponentId>) -> bool {
        self.simplices.iter().any(|s| &s.components == set)
    }

    pub fn get(&self, set: &BTreeSet<ComponentId>) -> Option<&Simplex> {
        self.simplices.iter().find(|s| &s.components == set)
    }

    /// Simplices strictly containing `set` with one more vertex.
    pub fn cofaces(&self, set: &BTreeSet<ComponentId>) -> Vec<&Simplex> {
        self.simplices.iter().filter(|s| s.depth == set.len() + 1 && set.is_subset(&s.components)).collect()
    }

    pub fn is_downward_closed(&self) -> bool {
        self.simplices.iter().all(|s| {
            s.components.iter().all(|v| {
                let mut face = s.components.clone();
                face.remove(v);
                face.is_empty() || self.contains(&face)
            })
        })
    }
}

fn witness_for(chart: &ChartSpec, zeros: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; chart.dim];
    for i in chart.divisor_coords() {
        if !zeros.contains(&i) {
            x[i] = 0.5 * chart.domain_radius;
        }
    }
    x
}

/// Builds the dual complex. Every subset of the divisor coordinates of a
/// chart is realized by a point of its box, so simplices are read off chart
/// by chart and identified across charts by their global labels.
pub fn build_dual_complex(model: &NCModel) -> Result<DualComplex> {
    if let Some(d) = label_violations(model).first() {
        return Err(Error::Model(format!("inconsistent labeling: {d}")));
    }
    let mut found: BTreeMap<(usize, BTreeSet<ComponentId>), Simplex> = BTreeMap::new();
    for chart in &model.charts {
        let coords = chart.divisor_coords();
        for mask in 1u32..(1 << coords.len()) {
            let zeros: Vec<usize> =
                coords.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect();
            let components: BTreeSet<ComponentId> =
                zeros.iter().map(|&i| chart.label(i).unwrap().to_string()).collect();
            found.entry((components.len(), components.clone())).or_insert_with(|| Simplex {
                depth: components.len(),
                components,
                witness_chart: chart.id.clone(),
                witness: witness_for(chart, &zeros),
            });
        }
    }
    Ok(DualComplex {
        vertices: model.components.iter().map(|c| c.id.clone()).collect(),
        simplices: found.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncmodel::{ChartSpec, FieldKind};

    #[test]
    fn xy_has_one_edge() {
        let m =
            NCModel::single_chart("xy", ChartSpec::monomial("c", FieldKind::Real, &[1, 1], "1", 1.0).unwrap(), None)
                .unwrap();
        let d = build_dual_complex(&m).unwrap();
        assert_eq!(d.vertices.len(), 2);
        assert_eq!(d.edges().len(), 1);
        assert!(d.is_downward_closed());
        let e = d.edges()[0];
        assert_eq!(e.witness, vec![0.0, 0.0]);
    }

    #[test]
    fn smooth_divisor_has_no_edges() {
        let m = NCModel::single_chart("s", ChartSpec::monomial("c", FieldKind::Real, &[1, 0], "1", 1.0).unwrap(), None)
            .unwrap();
        let d = build_dual_complex(&m).unwrap();
        assert_eq!((d.vertices.len(), d.edges().len()), (1, 0));
    }
}
