//! Normal-crossings models: chart atlases carrying monomial data.
//!
//! A model describes a manifold `M` on which `f = x1^a1 ... xn^an * g(x)` in
//! every chart, with `g` nowhere zero. Coordinates with a positive exponent
//! cut out divisor components, identified across charts by global labels.
//! Transitions glue charts and record, for each shared component, whether
//! the local defining coordinates agree in sign on the overlap. That sign
//! data is all that is kept of the line bundles of the components.

mod check;
mod dual;
mod schema;
mod sidedness;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{mul, pow, Expr, Scalar};

pub use check::{check_normal_crossings, unit_factor_grid, Diagnostic, ViolationKind};
pub use dual::{build_dual_complex, DualComplex, Simplex};
pub use schema::{load_model, load_model_checked, save_model};
pub use sidedness::{sign_potential, two_sidedness};

pub type ComponentId = String;

/// Relative tolerance for "coordinate vanishes", scaled by the chart radius.
pub const ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

/// Sign regime of a real model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    /// `f >= 0`: every exponent is even and every unit factor is positive.
    Nonnegative,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Indices with a positive exponent.
    pub fn divisor_indices(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, a)| **a > 0).map(|(i, _)| i).collect()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub id: String,
    pub field_kind: FieldKind,
    pub dim: usize,
    pub exponents: ExponentVector,
    pub unit_factor: Expr,
    pub domain_radius: f64,
    /// One entry per coordinate; present exactly where the exponent is positive.
    pub divisor_labels: Vec<Option<ComponentId>>,
    /// The modification restricted to this chart, in ambient coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Expr>>,
    /// Rational inverse of `sigma`, valid off the central fibre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_inverse: Option<Vec<Expr>>,
}

/// Number of divisor coordinates vanishing at a point, and their labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub k: usize,
    pub components: BTreeSet<ComponentId>,
    /// Chart coordinates that vanish.
    pub coords: Vec<usize>,
}

impl ChartSpec {
    /// A single-chart helper used heavily in tests and examples.
    pub fn monomial(
        id: &str,
        field_kind: FieldKind,
        exponents: &[u32],
        unit_factor: &str,
        radius: f64,
    ) -> Result<ChartSpec> {
        let labels = exponents.iter().enumerate().map(|(i, a)| (*a > 0).then(|| format!("V{}", i + 1))).collect();
        let sym = if field_kind == FieldKind::Complex { 'z' } else { 'x' };
        Ok(ChartSpec {
            id: id.to_string(),
            field_kind,
            dim: exponents.len(),
            exponents: ExponentVector(exponents.to_vec()),
            unit_factor: unit_factor.parse::<Expr>()?.with_symbol(sym),
            domain_radius: radius,
            divisor_labels: labels,
            sigma: None,
            sigma_inverse: None,
        })
    }

    pub fn divisor_coords(&self) -> Vec<usize> {
        self.exponents.divisor_indices()
    }

    pub fn label(&self, coord: usize) -> Option<&str> {
        self.divisor_labels.get(coord).and_then(|l| l.as_deref())
    }

    pub fn coord_of(&self, component: &str) -> Option<usize> {
        self.divisor_labels.iter().position(|l| l.as_deref() == Some(component))
    }

    pub fn components(&self) -> BTreeSet<ComponentId> {
        self.divisor_labels.iter().flatten().cloned().collect()
    }

    pub fn zero_tol(&self) -> f64 {
        ZERO_TOLERANCE * self.domain_radius
    }

    pub fn is_monomial(&self) -> bool {
        self.unit_factor.as_constant().is_some()
    }

    pub fn contains<T: Scalar>(&self, x: &[T]) -> bool {
        x.len() == self.dim && x.iter().all(|c| c.box_norm() < self.domain_radius)
    }

    fn check_domain<T: Scalar>(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!(
                "chart {} has dimension {}, got a point with {} coordinates",
                self.id,
                self.dim,
                x.len()
            )));
        }
        if !self.contains(x) {
            return Err(Error::Domain(format!(
                "point lies outside the domain box of chart {} (half-width {})",
                self.id, self.domain_radius
            )));
        }
        Ok(())
    }

    pub fn eval_g<T: Scalar>(&self, x: &[T]) -> T {
        self.unit_factor.eval(x)
    }

    /// `f(x) = prod x_i^a_i * g(x)`.
    pub fn eval_f<T: Scalar>(&self, x: &[T]) -> Result<T> {
        self.check_domain(x)?;
        Ok(self.eval_f_unchecked(x))
    }

    pub(crate) fn eval_f_unchecked<T: Scalar>(&self, x: &[T]) -> T {
        let mut v = self.unit_factor.eval(x);
        for (xi, a) in x.iter().zip(self.exponents.entries()) {
            if *a > 0 {
                v = v * xi.powi(*a as i32);
            }
        }
        v
    }

    /// The chart function as an expression.
    pub fn f_expr(&self) -> Expr {
        let mut e = self.unit_factor.clone();
        for (i, a) in self.exponents.entries().iter().enumerate() {
            if *a > 0 {
                e = mul(pow(Expr::var(i), *a as i32), e);
            }
        }
        e
    }

    pub fn multiplicity_profile<T: Scalar>(&self, x: &[T]) -> Result<Profile> {
        self.check_domain(x)?;
        let tol = self.zero_tol();
        let mut components = BTreeSet::new();
        let mut coords = Vec::new();
        for i in self.divisor_coords() {
            if x[i].modulus() <= tol {
                coords.push(i);
                if let Some(l) = self.label(i) {
                    components.insert(l.to_string());
                }
            }
        }
        Ok(Profile { k: coords.len(), components, coords })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorComponent {
    pub id: ComponentId,
    pub multiplicity: u32,
    pub connected: bool,
    /// Euler characteristic of the compact component, when it lies in a
    /// fibre of the modification and Milnor data is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler_characteristic: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub source: String,
    pub target: String,
    /// Target coordinates as functions of source coordinates.
    pub map: Vec<Expr>,
    /// Extra conditions `e(x) > 0` cutting one connected overlap piece.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overlap: Vec<Expr>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sign_data: BTreeMap<ComponentId, i8>,
}

impl Transition {
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.map.iter().map(|e| e.eval(x)).collect()
    }

    pub fn in_overlap(&self, x: &[f64]) -> bool {
        self.overlap.iter().all(|e| e.eval(x) > 0.0)
    }
}

/// Euler characteristic of a closed intersection of components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionData {
    pub components: Vec<ComponentId>,
    pub euler_characteristic: i64,
}

/// A named point of the central fibre together with its preimage under the
/// modification: either a union of components or a single chart point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialPoint {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
}

/// A stratum of the central fibre given by equations in ambient coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredStratum {
    pub name: String,
    /// Dimension over the field of the model.
    pub dim: usize,
    pub equations: Vec<Expr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredStratification {
    pub name: String,
    pub expect_condition3: bool,
    pub strata: Vec<DeclaredStratum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NCModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_mode: Option<SignMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_f: Option<Expr>,
    pub components: Vec<DivisorComponent>,
    pub charts: Vec<ChartSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<Transition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intersections: Vec<IntersectionData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub special_points: Vec<SpecialPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stratifications: Vec<DeclaredStratification>,
}

/// A point of `M` given in one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub chart: String,
    pub x: Vec<f64>,
}

impl NCModel {
    /// Single-chart model from a monomial chart; components are named `V1..Vn`.
    pub fn single_chart(name: &str, chart: ChartSpec, sign_mode: Option<SignMode>) -> Result<NCModel> {
        let components = chart
            .divisor_coords()
            .into_iter()
            .map(|i| DivisorComponent {
                id: chart.label(i).unwrap().to_string(),
                multiplicity: chart.exponents.get(i),
                connected: true,
                euler_characteristic: None,
            })
            .collect();
        let model = NCModel {
            name: name.to_string(),
            sign_mode,
            ambient_f: None,
            components,
            charts: vec![chart],
            transitions: Vec::new(),
            intersections: Vec::new(),
            special_points: Vec::new(),
            stratifications: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn chart(&self, id: &str) -> Result<&ChartSpec> {
        self.charts.iter().find(|c| c.id == id).ok_or_else(|| Error::Model(format!("unknown chart {id}")))
    }

    pub fn component(&self, id: &str) -> Result<&DivisorComponent> {
        self.components.iter().find(|c| c.id == id).ok_or_else(|| Error::Model(format!("unknown component {id}")))
    }

    pub fn special_point(&self, name: &str) -> Result<&SpecialPoint> {
        self.special_points
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Model(format!("unknown special point {name}")))
    }

    pub fn sign_mode(&self) -> SignMode {
        self.sign_mode.unwrap_or(SignMode::General)
    }

    pub fn is_real(&self) -> bool {
        self.charts.iter().all(|c| c.field_kind == FieldKind::Real)
    }

    pub fn is_complex(&self) -> bool {
        self.charts.iter().all(|c| c.field_kind == FieldKind::Complex)
    }

    pub fn field_kind(&self) -> FieldKind {
        if self.is_complex() {
            FieldKind::Complex
        } else {
            FieldKind::Real
        }
    }

    pub fn transitions_from<'a>(&'a self, chart: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| t.source == chart)
    }

    /// Ambient dimension of the modification, if one is supplied.
    pub fn ambient_dim(&self) -> Option<usize> {
        self.charts.iter().find_map(|c| c.sigma.as_ref().map(|s| s.len()))
    }

    /// Evaluates the modification `sigma` of a chart point; identity when absent.
    pub fn sigma<T: Scalar>(&self, chart: &ChartSpec, x: &[T]) -> Vec<T> {
        match &chart.sigma {
            Some(s) => s.iter().map(|e| e.eval(x)).collect(),
            None => x.to_vec(),
        }
    }

    /// Ambient function value; falls back to the chart function through an
    /// identity modification.
    pub fn eval_ambient_f<T: Scalar>(&self, q: &[T]) -> Option<T> {
        self.ambient_f.as_ref().map(|f| f.eval(q))
    }

    pub fn eval_ambient_f_complex(&self, q: &[Complex64]) -> Option<Complex64> {
        self.eval_ambient_f(q)
    }

    /// Structural validation: everything that can be decided without sampling.
    pub fn validate(&self) -> Result<()> {
        let mut chart_ids = BTreeSet::new();
        let component_ids: BTreeSet<&str> = self.components.iter().map(|c| c.id.as_str()).collect();
        if component_ids.len() != self.components.len() {
            return Err(Error::Model("duplicate component id".into()));
        }
        for c in &self.components {
            if c.multiplicity == 0 {
                return Err(Error::Model(format!("component {} has multiplicity 0", c.id)));
            }
        }
        for chart in &self.charts {
            if !chart_ids.insert(chart.id.as_str()) {
                return Err(Error::Model(format!("duplicate chart id {}", chart.id)));
            }
            if chart.dim == 0 {
                return Err(Error::Model(format!("chart {} has dimension 0", chart.id)));
            }
            if chart.exponents.len() != chart.dim || chart.divisor_labels.len() != chart.dim {
                return Err(Error::Model(format!(
                    "chart {}: exponents and divisor_labels must have one entry per coordinate",
                    chart.id
                )));
            }
            if !(chart.domain_radius > 0.0 && chart.domain_radius.is_finite()) {
                return Err(Error::Model(format!("chart {}: domain_radius must be positive", chart.id)));
            }
            let mut seen = BTreeSet::new();
            for i in 0..chart.dim {
                let a = chart.exponents.get(i);
                match (&chart.divisor_labels[i], a > 0) {
                    (None, true) => {
                        return Err(Error::Model(format!(
                            "chart {}: coordinate {} has exponent {a} but no divisor label",
                            chart.id,
                            i + 1
                        )))
                    }
                    (Some(l), false) => {
                        return Err(Error::Model(format!(
                            "chart {}: coordinate {} is labeled {l} but has exponent 0",
                            chart.id,
                            i + 1
                        )))
                    }
                    (Some(l), true) => {
                        if !component_ids.contains(l.as_str()) {
                            return Err(Error::Model(format!(
                                "chart {}: label {l} is not a declared component",
                                chart.id
                            )));
                        }
                        if !seen.insert(l.clone()) {
                            return Err(Error::Model(format!(
                                "chart {}: component {l} labels two coordinates",
                                chart.id
                            )));
                        }
                    }
                    (None, false) => {}
                }
            }
            if chart.unit_factor.arity() > chart.dim {
                return Err(Error::Model(format!(
                    "chart {}: unit factor uses a coordinate beyond dimension {}",
                    chart.id, chart.dim
                )));
            }
            if let (Some(s), Some(inv)) = (&chart.sigma, &chart.sigma_inverse) {
                if inv.len() != chart.dim || s.iter().any(|e| e.arity() > chart.dim) {
                    return Err(Error::Model(format!("chart {}: inconsistent sigma data", chart.id)));
                }
                if inv.iter().any(|e| e.arity() > s.len()) {
                    return Err(Error::Model(format!("chart {}: sigma_inverse arity", chart.id)));
                }
            }
        }
        let dims: BTreeSet<usize> = self.charts.iter().filter_map(|c| c.sigma.as_ref().map(|s| s.len())).collect();
        if dims.len() > 1 {
            return Err(Error::Model("charts disagree on the ambient dimension of sigma".into()));
        }
        for t in &self.transitions {
            let src = self.chart(&t.source)?;
            let tgt = self.chart(&t.target)?;
            if t.map.len() != tgt.dim || t.map.iter().any(|e| e.arity() > src.dim) {
                return Err(Error::Model(format!(
                    "transition {} -> {}: map must give {} expressions in {} coordinates",
                    t.source, t.target, tgt.dim, src.dim
                )));
            }
            for (comp, s) in &t.sign_data {
                if *s != 1 && *s != -1 {
                    return Err(Error::Model(format!(
                        "transition {} -> {}: sign for {comp} must be +1 or -1",
                        t.source, t.target
                    )));
                }
                if src.coord_of(comp).is_none() || tgt.coord_of(comp).is_none() {
                    return Err(Error::Model(format!(
                        "transition {} -> {}: sign data for {comp}, which does not meet both charts",
                        t.source, t.target
                    )));
                }
            }
            if !self.transitions.iter().any(|r| r.source == t.target && r.target == t.source) {
                return Err(Error::Model(format!(
                    "transition graph is not symmetric: {} -> {} has no reverse",
                    t.source, t.target
                )));
            }
        }
        for p in &self.special_points {
            match (&p.components, &p.chart, &p.x) {
                (Some(cs), None, None) => {
                    for c in cs {
                        self.component(c)?;
                    }
                }
                (None, Some(chart), Some(x)) => {
                    let chart = self.chart(chart)?;
                    if !chart.contains(x) {
                        return Err(Error::Model(format!("special point {} lies outside its chart", p.name)));
                    }
                }
                _ => {
                    return Err(Error::Model(format!(
                        "special point {} needs either components or chart and x",
                        p.name
                    )))
                }
            }
        }
        for i in &self.intersections {
            for c in &i.components {
                self.component(c)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(a: &[u32], g: &str) -> ChartSpec {
        ChartSpec::monomial("c", FieldKind::Real, a, g, 10.0).unwrap()
    }

    #[test]
    fn eval_f_examples() {
        assert_eq!(chart(&[2, 3], "1").eval_f(&[2.0, 1.0]).unwrap(), 4.0);
        let v = chart(&[2, 3], "1 + 0.1*x1").eval_f(&[1.0, 1.0]).unwrap();
        assert!((v - 1.1).abs() < 1e-15);
        let c = ChartSpec::monomial("c", FieldKind::Complex, &[2, 3], "1", 2.0).unwrap();
        let v = c.eval_f(&[Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_f_rejects_points_outside_the_box() {
        let c = ChartSpec::monomial("c", FieldKind::Real, &[1], "1", 1.0).unwrap();
        assert!(matches!(c.eval_f(&[1.5]), Err(Error::Domain(_))));
        assert!(matches!(c.eval_f(&[0.1, 0.2]), Err(Error::Domain(_))));
    }

    #[test]
    fn multiplicity_profile_examples() {
        let c = chart(&[2, 3, 0], "1");
        let p = c.multiplicity_profile(&[0.0, 0.0, 0.5]).unwrap();
        assert_eq!(p.k, 2);
        assert_eq!(p.components, ["V1", "V2"].iter().map(|s| s.to_string()).collect());
        assert_eq!(c.multiplicity_profile(&[0.3, 0.4, 0.0]).unwrap().k, 0);
        let p = c.multiplicity_profile(&[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(p.k, 1);
        assert!(p.components.contains("V1"));
    }

    #[test]
    fn f_expr_agrees_with_eval() {
        let c = chart(&[2, 1, 0], "1 + x1*x3");
        let x = [0.3, -0.7, 1.1];
        assert!((c.f_expr().eval(&x) - c.eval_f(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_missing_label() {
        let mut c = chart(&[2, 1], "1");
        c.divisor_labels[1] = None;
        let m = NCModel::single_chart("m", chart(&[2, 1], "1"), None).unwrap();
        let mut bad = m.clone();
        bad.charts[0] = c;
        assert!(bad.validate().is_err());
    }
}
