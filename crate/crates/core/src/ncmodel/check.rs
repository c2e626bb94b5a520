use std::fmt;

use num_complex::Complex64;

use crate::expr::Scalar;
use crate::sampling;

use super::{ChartSpec, FieldKind, NCModel, SignMode, Transition};

/// Points per axis of the unit-factor grid.
pub const GRID_PER_AXIS: usize = 17;
/// Grids larger than this are replaced by a seeded random sample.
const GRID_CAP: usize = 200_000;
const RANDOM_FALLBACK: usize = 50_000;
const TRANSITION_SAMPLES: usize = 2_000;
const CHECK_SEED: u64 = 0x6e63_6368;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    UnitFactorVanishes,
    UnitFactorNotPositive,
    OddExponent,
    MultiplicityMismatch,
    TransitionFunction,
    TransitionSign,
    MissingSign,
    TransitionLabel,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::UnitFactorVanishes => "unit factor vanishes",
            ViolationKind::UnitFactorNotPositive => "unit factor not positive",
            ViolationKind::OddExponent => "odd exponent in nonnegative mode",
            ViolationKind::MultiplicityMismatch => "multiplicity mismatch",
            ViolationKind::TransitionFunction => "transition does not preserve f",
            ViolationKind::TransitionSign => "transition sign disagrees with sign data",
            ViolationKind::MissingSign => "transition lacks sign data",
            ViolationKind::TransitionLabel => "transition maps a divisor hyperplane to the wrong label",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub kind: ViolationKind,
    pub chart: String,
    pub message: String,
    /// Chart coordinates of the offending sample; complex points are stored
    /// as interleaved real and imaginary parts.
    pub witness: Vec<f64>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in chart {}: {}", self.kind, self.chart, self.message)?;
        if !self.witness.is_empty() {
            write!(f, " at {:?}", self.witness)?;
        }
        Ok(())
    }
}

fn axis(r: f64) -> Vec<f64> {
    let n = GRID_PER_AXIS as f64 + 1.0;
    (0..GRID_PER_AXIS).map(|i| -r + 2.0 * r * (i as f64 + 1.0) / n).collect()
}

/// The real points on which the unit factor is checked: a 17-per-axis grid
/// strictly inside the box (the centre included), or a seeded random sample
/// when the grid would be too large. Complex charts use `2 * dim` real axes,
/// real and imaginary parts interleaved.
pub fn unit_factor_grid(chart: &ChartSpec) -> Vec<Vec<f64>> {
    let real_dim = match chart.field_kind {
        FieldKind::Real => chart.dim,
        FieldKind::Complex => 2 * chart.dim,
    };
    let total = (GRID_PER_AXIS as f64).powi(real_dim as i32);
    if total > GRID_CAP as f64 {
        let mut rng = sampling::rng(sampling::sub_seed(CHECK_SEED, &chart.id));
        return (0..RANDOM_FALLBACK).map(|_| sampling::in_box(&mut rng, real_dim, chart.domain_radius, 1.0)).collect();
    }
    let ax = axis(chart.domain_radius);
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; real_dim];
    loop {
        out.push(idx.iter().map(|&i| ax[i]).collect());
        let mut d = 0;
        loop {
            if d == real_dim {
                return out;
            }
            idx[d] += 1;
            if idx[d] < GRID_PER_AXIS {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub(crate) fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

pub(crate) fn from_complex(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn check_unit_factor(model: &NCModel, chart: &ChartSpec, out: &mut Vec<Diagnostic>) {
    let nonneg = model.sign_mode() == SignMode::Nonnegative && chart.field_kind == FieldKind::Real;
    if let Some(g) = chart.unit_factor.as_constant() {
        if g == 0.0 {
            out.push(diag(ViolationKind::UnitFactorVanishes, chart, "unit factor is identically 0".into(), vec![]));
        } else if nonneg && g < 0.0 {
            out.push(diag(ViolationKind::UnitFactorNotPositive, chart, format!("g = {g}"), vec![]));
        }
        return;
    }
    let mut sign_seen: Option<f64> = None;
    for p in unit_factor_grid(chart) {
        let (modulus, re) = match chart.field_kind {
            FieldKind::Real => {
                let g = chart.eval_g(&p);
                (g.abs(), g)
            }
            FieldKind::Complex => {
                let g = chart.eval_g(&to_complex(&p));
                (g.norm(), g.re)
            }
        };
        if !(modulus > 1e-9) {
            out.push(diag(ViolationKind::UnitFactorVanishes, chart, format!("|g| = {modulus:e}"), p));
            return;
        }
        if chart.field_kind == FieldKind::Real {
            if nonneg && re < 0.0 {
                out.push(diag(ViolationKind::UnitFactorNotPositive, chart, format!("g = {re}"), p));
                return;
            }
            match sign_seen {
                Some(s) if s * re < 0.0 => {
                    out.push(diag(
                        ViolationKind::UnitFactorVanishes,
                        chart,
                        "unit factor changes sign on the domain".into(),
                        p,
                    ));
                    return;
                }
                _ => sign_seen = Some(re.signum()),
            }
        }
    }
}

fn diag(kind: ViolationKind, chart: &ChartSpec, message: String, witness: Vec<f64>) -> Diagnostic {
    Diagnostic { kind, chart: chart.id.clone(), message, witness }
}

/// Sampled points of a transition's overlap, in source coordinates, whose
/// images lie in the target box. `zero` forces one source coordinate to 0.
fn overlap_samples<T: OverlapScalar>(
    src: &ChartSpec,
    tgt: &ChartSpec,
    t: &Transition,
    zero: Option<usize>,
    salt: &str,
) -> Vec<(Vec<T>, Vec<T>)> {
    let mut rng =
        sampling::rng(sampling::sub_seed(CHECK_SEED, &format!("{}>{}#{}#{:?}", t.source, t.target, salt, zero)));
    let mut out = Vec::new();
    for _ in 0..TRANSITION_SAMPLES {
        let mut x = T::sample(&mut rng, src.dim, src.domain_radius);
        if let Some(i) = zero {
            x[i] = T::from_f64(0.0);
        }
        if !T::in_overlap(t, &x) {
            continue;
        }
        let y = t.apply(&x);
        if y.iter().all(|v| v.box_norm().is_finite()) && tgt.contains(&y) {
            out.push((x, y));
        }
    }
    out
}

trait OverlapScalar: Scalar {
    fn sample(rng: &mut sampling::SampleRng, dim: usize, r: f64) -> Vec<Self>;
    fn in_overlap(t: &Transition, x: &[Self]) -> bool;
    fn flatten(x: &[Self]) -> Vec<f64>;
}

impl OverlapScalar for f64 {
    fn sample(rng: &mut sampling::SampleRng, dim: usize, r: f64) -> Vec<f64> {
        sampling::in_box(rng, dim, r, 1.0)
    }
    fn in_overlap(t: &Transition, x: &[f64]) -> bool {
        t.in_overlap(x)
    }
    fn flatten(x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

impl OverlapScalar for Complex64 {
    fn sample(rng: &mut sampling::SampleRng, dim: usize, r: f64) -> Vec<Complex64> {
        sampling::in_complex_box(rng, dim, r, 1.0)
    }
    // Overlap inequalities describe real pieces; complex overlaps are
    // determined by the two boxes alone.
    fn in_overlap(_t: &Transition, _x: &[Complex64]) -> bool {
        true
    }
    fn flatten(x: &[Complex64]) -> Vec<f64> {
        from_complex(x)
    }
}

fn check_transition<T: OverlapScalar>(model: &NCModel, t: &Transition, out: &mut Vec<Diagnostic>) {
    let (Ok(src), Ok(tgt)) = (model.chart(&t.source), model.chart(&t.target)) else {
        return;
    };
    let real = src.field_kind == FieldKind::Real;
    let generic = overlap_samples::<T>(src, tgt, t, None, "generic");
    for (x, y) in &generic {
        let fs = src.eval_f_unchecked(x);
        let ft = tgt.eval_f_unchecked(y);
        if (fs - ft).modulus() > 1e-8 * fs.modulus().max(1.0) {
            out.push(diag(
                ViolationKind::TransitionFunction,
                src,
                format!("{} -> {}: f differs by {:e}", t.source, t.target, (fs - ft).modulus()),
                T::flatten(x),
            ));
            break;
        }
    }
    if real && !generic.is_empty() {
        for label in src.components().intersection(&tgt.components()) {
            let (i, j) = (src.coord_of(label).unwrap(), tgt.coord_of(label).unwrap());
            let Some(&s) = t.sign_data.get(label) else {
                out.push(diag(
                    ViolationKind::MissingSign,
                    src,
                    format!("{} -> {}: no sign for {label}", t.source, t.target),
                    vec![],
                ));
                continue;
            };
            for (x, y) in &generic {
                let (xi, yj) = (T::flatten(&[x[i]])[0], T::flatten(&[y[j]])[0]);
                if xi.abs() < 1e-6 || yj.abs() < 1e-6 {
                    continue;
                }
                if xi.signum() * yj.signum() != s as f64 {
                    out.push(diag(
                        ViolationKind::TransitionSign,
                        src,
                        format!("{} -> {}: sign of {label} is {} on the overlap, declared {s}", t.source, t.target, -s),
                        T::flatten(x),
                    ));
                    break;
                }
            }
        }
    }
    for i in src.divisor_coords() {
        let label = src.label(i).unwrap();
        for (x, y) in overlap_samples::<T>(src, tgt, t, Some(i), "label") {
            let tol = tgt.zero_tol().max(1e-9);
            let vanishing: Vec<usize> = (0..tgt.dim).filter(|&j| y[j].modulus() <= tol).collect();
            let ok = vanishing.len() == 1 && tgt.label(vanishing[0]) == Some(label);
            if !ok {
                out.push(diag(
                    ViolationKind::TransitionLabel,
                    src,
                    format!(
                        "{} -> {}: hyperplane {label} maps to coordinates {:?} of the target",
                        t.source,
                        t.target,
                        vanishing.iter().map(|j| j + 1).collect::<Vec<_>>()
                    ),
                    T::flatten(&x),
                ));
                break;
            }
        }
    }
}

pub(crate) fn label_violations(model: &NCModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for t in &model.transitions {
        let before = out.len();
        match model.chart(&t.source).map(|c| c.field_kind) {
            Ok(FieldKind::Real) => check_transition::<f64>(model, t, &mut out),
            Ok(FieldKind::Complex) => check_transition::<Complex64>(model, t, &mut out),
            Err(_) => {}
        }
        let kept: Vec<Diagnostic> = out.drain(before..).filter(|d| d.kind == ViolationKind::TransitionLabel).collect();
        out.extend(kept);
    }
    out
}

/// Sampled verification that the model is locally normal crossings with
/// consistent gluing data. An empty result means every check passed.
pub fn check_normal_crossings(model: &NCModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for chart in &model.charts {
        check_unit_factor(model, chart, &mut out);
        for i in chart.divisor_coords() {
            let a = chart.exponents.get(i);
            let label = chart.label(i).unwrap();
            if let Ok(c) = model.component(label) {
                if c.multiplicity != a {
                    let mut witness = vec![0.0; chart.dim];
                    witness[i] = 0.0;
                    out.push(diag(
                        ViolationKind::MultiplicityMismatch,
                        chart,
                        format!(
                            "component {label} has multiplicity {} but exponent {a} at coordinate {}",
                            c.multiplicity,
                            i + 1
                        ),
                        witness,
                    ));
                }
            }
            if model.sign_mode() == SignMode::Nonnegative && chart.field_kind == FieldKind::Real && a % 2 == 1 {
                out.push(diag(
                    ViolationKind::OddExponent,
                    chart,
                    format!("exponent {a} at coordinate {}", i + 1),
                    vec![],
                ));
            }
        }
    }
    for t in &model.transitions {
        match model.chart(&t.source).map(|c| c.field_kind) {
            Ok(FieldKind::Real) => check_transition::<f64>(model, t, &mut out),
            Ok(FieldKind::Complex) => check_transition::<Complex64>(model, t, &mut out),
            Err(_) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncmodel::{ChartSpec, NCModel};

    fn single(a: &[u32], g: &str, mode: Option<SignMode>) -> NCModel {
        NCModel::single_chart("t", ChartSpec::monomial("c", FieldKind::Real, a, g, 1.0).unwrap(), mode).unwrap()
    }

    #[test]
    fn grid_has_the_centre_and_stays_inside() {
        let ax = axis(2.0);
        assert_eq!(ax.len(), 17);
        assert!(ax.contains(&0.0));
        assert!(ax.iter().all(|t| t.abs() < 2.0));
    }

    #[test]
    fn vanishing_unit_factor_is_reported() {
        let d = check_normal_crossings(&single(&[2, 0], "x1", None));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, ViolationKind::UnitFactorVanishes);
        assert_eq!(d[0].witness[0], 0.0);
    }

    #[test]
    fn multiplicity_mismatch_is_reported() {
        let mut m = single(&[3, 1], "1", None);
        m.components[0].multiplicity = 2;
        let d = check_normal_crossings(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, ViolationKind::MultiplicityMismatch);
    }

    #[test]
    fn nonnegative_mode_wants_even_exponents_and_positive_g() {
        assert!(check_normal_crossings(&single(&[2, 2], "1 + 0.5*x1", Some(SignMode::Nonnegative))).is_empty());
        let d = check_normal_crossings(&single(&[2, 1], "1", Some(SignMode::Nonnegative)));
        assert_eq!(d[0].kind, ViolationKind::OddExponent);
        let d = check_normal_crossings(&single(&[2, 2], "-1", Some(SignMode::Nonnegative)));
        assert_eq!(d[0].kind, ViolationKind::UnitFactorNotPositive);
    }
}
