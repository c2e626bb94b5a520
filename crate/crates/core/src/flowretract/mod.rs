//! The real retraction of the cut space onto its boundary.
//!
//! In normalized coordinates the retraction field on a sheet is `-eps`, so
//! a point reaches the boundary after time `delta = min eps_i x_i` and lands
//! at `x - delta * eps`. Charts whose unit factor cannot be absorbed are
//! handled by integrating a field numerically instead.

mod integrate;
mod normalize;
mod specialize;
mod trivialize;
mod vfield;

use crate::cut::{CutPoint, SignSheet};
use crate::error::{Error, Result};
use crate::ncmodel::ChartSpec;

pub use integrate::{integrate, OdeControls, OdeRun};
pub use normalize::{normalize_chart, Normalization, Normalized};
pub use specialize::{
    fibre_transversality, level_scaling, milnor_components_real, retract, specialization_fibre_real,
    stratum_labels_match, MilnorCount, Pushdown, Transversality,
};
pub use trivialize::{trivialize, untrivialize, Trivialization};
pub use vfield::{
    assemble_w, build_vfield, check_decrease, derivative_along, expected_rate, f_prime, f_prime_expr, normalized_w,
    retraction_field, DecreaseReport, DecreaseRow, FieldCase, VField,
};

/// How a retraction is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Closed form after normalization; falls back to `Numeric` per sheet
    /// when the unit factor cannot be absorbed.
    #[default]
    ClosedForm,
    Numeric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalRetraction {
    pub delta: f64,
    pub point: CutPoint,
}

/// Smallest signed divisor coordinate and where it is attained.
fn min_signed(sheet: &SignSheet, x: &[f64]) -> Option<(f64, usize)> {
    sheet.iter().map(|(&i, &s)| (s as f64 * x[i], i)).min_by(|a, b| a.0.total_cmp(&b.0))
}

/// The closed-form retraction in normalized coordinates:
/// `delta = min eps_i x_i`, `r = x - delta * eps` on the divisor coordinates.
pub fn local_retract(p: &CutPoint) -> Result<LocalRetraction> {
    let (m, _) = min_signed(&p.sheet, &p.x)
        .ok_or_else(|| Error::Domain(format!("chart {} has no divisor coordinate to retract onto", p.chart)))?;
    if m <= 0.0 {
        return Ok(LocalRetraction { delta: 0.0, point: p.clone() });
    }
    let mut point = p.clone();
    for (&i, &s) in p.sheet.iter() {
        point.x[i] = p.x[i] - m * s as f64;
    }
    Ok(LocalRetraction { delta: m, point })
}

/// A sampled integral curve of a retraction field.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    /// Accepted states strictly before the boundary is reached.
    pub points: Vec<(f64, CutPoint)>,
    pub hit_time: f64,
    pub terminal: CutPoint,
}

/// Integrates `field` from `p` until a divisor coordinate reaches zero; that
/// coordinate is then set to exactly zero.
pub fn flow(chart: &ChartSpec, p: &CutPoint, field: &VField, controls: &OdeControls) -> Result<FlowTrace> {
    let (m, _) = min_signed(&p.sheet, &p.x)
        .ok_or_else(|| Error::Domain(format!("chart {} has no divisor coordinate to flow onto", p.chart)))?;
    if m <= 0.0 {
        return Ok(FlowTrace { points: vec![], hit_time: 0.0, terminal: p.clone() });
    }
    let rhs = |x: &[f64]| {
        if !chart.contains(x) {
            return Err(Error::Flow(format!("trajectory left the box of chart {}", chart.id)));
        }
        field.eval(x)
    };
    let sheet = &p.sheet;
    let run = integrate(rhs, &p.x, controls, |x| min_signed(sheet, x).unwrap().0)?;
    if !run.event {
        return Err(Error::Flow(format!("no boundary hit before t = {}", controls.t_max)));
    }
    let (t, y) = run.last();
    let mut x = y.to_vec();
    let (_, i) = min_signed(sheet, &x).unwrap();
    x[i] = 0.0;
    let n = run.ts.len();
    let points = run.ts[..n - 1]
        .iter()
        .zip(&run.ys[..n - 1])
        .map(|(&t, y)| (t, CutPoint { chart: p.chart.clone(), x: y.clone(), sheet: sheet.clone() }))
        .collect();
    Ok(FlowTrace { points, hit_time: t, terminal: CutPoint { chart: p.chart.clone(), x, sheet: sheet.clone() } })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Retraction {
    /// Hitting time in normalized coordinates (numeric mode with an
    /// assembled field: hitting time of that field).
    pub delta: f64,
    pub point: CutPoint,
    /// The mode actually used.
    pub mode: Mode,
}

/// Retracts a cut point of one chart onto the boundary.
pub fn retract_in_chart(chart: &ChartSpec, p: &CutPoint, mode: Mode) -> Result<Retraction> {
    if let Some((m, _)) = min_signed(&p.sheet, &p.x) {
        if m <= 0.0 {
            return Ok(Retraction { delta: 0.0, point: p.clone(), mode });
        }
    }
    if mode == Mode::ClosedForm {
        if let Normalized::ClosedForm(n) = normalize_chart(chart, &p.sheet) {
            let y = CutPoint { x: n.forward(&p.x), ..p.clone() };
            let r = local_retract(&y)?;
            let x = n.inverse(&r.point.x)?;
            return Ok(Retraction { delta: r.delta, point: CutPoint { x, ..p.clone() }, mode });
        }
    }
    let field = retraction_field(chart, &p.sheet)?;
    let trace = flow(chart, p, &field, &OdeControls::default())?;
    Ok(Retraction { delta: trace.hit_time, point: trace.terminal, mode: Mode::Numeric })
}
