//! Euler characteristic and number of components of the Milnor fibre,
//! summed over the strata of the preimage of a point.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ncmodel::{build_dual_complex, ComponentId, NCModel};

use super::torus::alpha_fibre_components;

/// One stratum `S_U` (points on exactly the components `U`) of the
/// preimage of the point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumContribution {
    pub components: BTreeSet<ComponentId>,
    pub multiplicities: Vec<u32>,
    /// Euler characteristic of the open stratum.
    pub chi_open: i64,
    /// Euler characteristic of the angle level set in the torus fibre.
    pub chi_level: i64,
    pub alpha_components: usize,
}

impl StratumContribution {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn contribution(&self) -> i64 {
        self.chi_open * self.chi_level
    }

    pub fn name(&self) -> String {
        self.components.iter().cloned().collect::<Vec<_>>().join("^")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilnorFibration {
    pub point: String,
    pub strata: Vec<StratumContribution>,
    pub chi: i64,
    pub pi0: usize,
}

/// Level sets of `sum a_i alpha_i` in `(S^1)^k`: `a_1` points when `k = 1`,
/// a union of tori (Euler characteristic zero) when `k >= 2`.
fn chi_level(multiplicities: &[u32]) -> i64 {
    match multiplicities {
        [m] => *m as i64,
        _ => 0,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Components of the Milnor fibre: the angle level set over `S_U` has
/// `gcd_U` components, and a component over `S_U` meets the one over a
/// codimension-one coface `S_W` with the same residue modulo `gcd_W`.
fn count_components(strata: &[StratumContribution]) -> usize {
    let mut index: BTreeMap<(&BTreeSet<ComponentId>, usize), usize> = BTreeMap::new();
    for s in strata {
        for r in 0..s.alpha_components {
            let n = index.len();
            index.insert((&s.components, r), n);
        }
    }
    let mut uf = UnionFind((0..index.len()).collect());
    for u in strata {
        for w in strata {
            if w.k() == u.k() + 1 && u.components.is_subset(&w.components) {
                for r in 0..u.alpha_components {
                    uf.union(index[&(&u.components, r)], index[&(&w.components, r % w.alpha_components)]);
                }
            }
        }
    }
    let n = index.len();
    (0..n).filter(|&i| uf.find(i) == i).count()
}

fn build(point: &str, strata: Vec<StratumContribution>) -> MilnorFibration {
    let chi = strata.iter().map(StratumContribution::contribution).sum();
    let pi0 = count_components(&strata);
    MilnorFibration { point: point.to_string(), strata, chi, pi0 }
}

/// Milnor fibration at a named special point of a complex model.
pub fn milnor_fibration(model: &NCModel, point: &str) -> Result<MilnorFibration> {
    if !model.is_complex() {
        return Err(Error::Config("Milnor fibrations are computed for complex models".into()));
    }
    let sp = model.special_point(point)?;
    if let (Some(chart), Some(x)) = (&sp.chart, &sp.x) {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        return milnor_fibration_at(model, chart, &z).map(|mut m| {
            m.point = point.to_string();
            m
        });
    }
    let preimage: BTreeSet<ComponentId> = sp
        .components
        .clone()
        .ok_or_else(|| Error::Model(format!("special point {point} has no preimage data")))?
        .into_iter()
        .collect();
    let dual = build_dual_complex(model)?;
    let chi_closed = |set: &BTreeSet<ComponentId>| -> Result<i64> {
        if set.len() == 1 {
            let id = set.iter().next().unwrap();
            return model
                .component(id)?
                .euler_characteristic
                .ok_or_else(|| Error::Model(format!("component {id} has no Euler characteristic")));
        }
        Ok(model
            .intersections
            .iter()
            .find(|i| i.components.iter().cloned().collect::<BTreeSet<_>>() == *set)
            .map_or(1, |i| i.euler_characteristic))
    };
    let mut strata = Vec::new();
    for s in &dual.simplices {
        if s.components.is_disjoint(&preimage) {
            continue;
        }
        // Inclusion-exclusion over the closed strata containing S_U.
        let mut chi_open = 0;
        for w in &dual.simplices {
            if s.components.is_subset(&w.components) {
                let sign = if (w.components.len() - s.components.len()) % 2 == 0 { 1 } else { -1 };
                chi_open += sign * chi_closed(&w.components)?;
            }
        }
        let multiplicities: Vec<u32> =
            s.components.iter().map(|c| model.component(c).map(|d| d.multiplicity)).collect::<Result<_>>()?;
        strata.push(StratumContribution {
            components: s.components.clone(),
            chi_open,
            chi_level: chi_level(&multiplicities),
            alpha_components: alpha_fibre_components(&multiplicities),
            multiplicities,
        });
    }
    Ok(build(point, strata))
}

/// Milnor fibration at a chart point whose preimage is the point itself.
pub fn milnor_fibration_at(model: &NCModel, chart: &str, z: &[Complex64]) -> Result<MilnorFibration> {
    let c = model.chart(chart)?;
    let profile = c.multiplicity_profile(z)?;
    if profile.k == 0 {
        return Err(Error::Domain(format!("point {z:?} of chart {chart} is off the central fibre")));
    }
    let multiplicities: Vec<u32> = profile.coords.iter().map(|&i| c.exponents.get(i)).collect();
    let s = StratumContribution {
        components: profile.components,
        chi_open: 1,
        chi_level: chi_level(&multiplicities),
        alpha_components: alpha_fibre_components(&multiplicities),
        multiplicities,
    };
    Ok(build(&format!("{chart}:{z:?}"), vec![s]))
}
