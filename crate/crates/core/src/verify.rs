//! The full invariant suite for a model, run with fixed seeds.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;

use crate::complexretract::{
    alpha_fibre_components, angle_distance, component_index, component_representative, condition3_check, deck_shift,
    f_prime as band, milnor_fibration, monodromy, polar_blowup, universal_trivialization, ComplexRetractor,
    LiftedAngle,
};
use crate::cut::{deck_action, fibre_in_chart, CutPoint};
use crate::error::Result;
use crate::flowretract::{
    check_decrease, fibre_transversality, level_scaling, local_retract, normalize_chart, normalized_w, retract,
    retract_in_chart, stratum_labels_match, trivialize, untrivialize, Mode,
};
use crate::ncmodel::{
    build_dual_complex, check_normal_crossings, load_model, save_model, ChartSpec, FieldKind, NCModel,
};
use crate::report::{Report, Witness};
use crate::sampling::{self, SampleRng};
use crate::strat::canonical_stratification;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Samples per chart for the cheap checks; flows use a tenth of it.
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 1, samples: 200 }
    }
}

struct Ctx<'a> {
    model: &'a NCModel,
    cfg: SuiteConfig,
    report: Report,
}

impl Ctx<'_> {
    fn rng(&self, tag: &str, chart: &str) -> (SampleRng, u64) {
        let seed = sampling::sub_seed(self.cfg.seed, &format!("{tag}/{chart}"));
        (sampling::rng(seed), seed)
    }

    /// Records one row per check id: the first failure, or a pass with the
    /// number of samples.
    fn record(&mut self, id: &str, count: usize, failure: Option<(String, Witness)>) {
        match failure {
            None => self.report.pass(id, format!("{count} samples")),
            Some((d, w)) => self.report.fail(id, d, Some(w)),
        }
    }
}

fn witness(chart: &ChartSpec, point: &[f64], seed: u64) -> Witness {
    Witness { chart: chart.id.clone(), point: point.to_vec(), seed }
}

fn cut_sample(rng: &mut SampleRng, chart: &ChartSpec, p_zero: f64) -> CutPoint {
    let sheet = sampling::random_sheet(rng, chart);
    let x = sampling::on_sheet(rng, chart, &sheet, 0.9, p_zero);
    CutPoint { chart: chart.id.clone(), x, sheet }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn ncmodel_checks(ctx: &mut Ctx) {
    let model = ctx.model;
    let diags = check_normal_crossings(model);
    match diags.first() {
        None => ctx.report.pass("ncmodel.normal_crossings", "no violations"),
        Some(d) => {
            let w = Witness { chart: d.chart.clone(), point: d.witness.clone(), seed: 0 };
            ctx.report.fail(
                "ncmodel.normal_crossings",
                format!("{} violations; first: {}", diags.len(), d.message),
                Some(w),
            );
        }
    }
    let doc = save_model(model);
    match load_model(&doc).map(|m| save_model(&m)) {
        Ok(again) if again == doc => ctx.report.pass("ncmodel.round_trip", "stable"),
        Ok(_) => ctx.report.fail("ncmodel.round_trip", "document changed on reload", None),
        Err(e) => ctx.report.fail("ncmodel.round_trip", e.to_string(), None),
    }
    match build_dual_complex(model) {
        Ok(d) if d.is_downward_closed() && d.simplices.iter().all(|s| s.depth == s.components.len()) => {
            ctx.report.pass("ncmodel.dual_complex", format!("{} simplices", d.simplices.len()))
        }
        Ok(_) => ctx.report.fail("ncmodel.dual_complex", "not downward closed", None),
        Err(e) => ctx.report.fail("ncmodel.dual_complex", e.to_string(), None),
    }
    let mut failure = None;
    let mut count = 0;
    for chart in &model.charts {
        let (mut rng, seed) = ctx.rng("zero", &chart.id);
        for _ in 0..ctx.cfg.samples {
            let zeros: Vec<usize> = chart.divisor_coords().into_iter().filter(|_| rng.gen_bool(0.3)).collect();
            let x = sampling::with_zero_pattern(&mut rng, chart, &zeros, 0.9);
            count += 1;
            let (f, k) = match chart.field_kind {
                FieldKind::Real => (chart.eval_f(&x).map(f64::abs), chart.multiplicity_profile(&x)),
                FieldKind::Complex => {
                    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.5 * v)).collect();
                    (chart.eval_f(&z).map(|v| v.norm()), chart.multiplicity_profile(&z))
                }
            };
            let (Ok(f), Ok(k)) = (f, k) else { continue };
            if (f == 0.0) != (k.k > 0) && failure.is_none() {
                failure = Some((format!("f = {f:e} with {} vanishing coordinates", k.k), witness(chart, &x, seed)));
            }
        }
    }
    ctx.record("ncmodel.zero_iff_profile", count, failure);
}

fn cut_checks(ctx: &mut Ctx) {
    let mut failure = None;
    let mut count = 0;
    for chart in &ctx.model.charts {
        let (mut rng, seed) = ctx.rng("fibre", &chart.id);
        for _ in 0..ctx.cfg.samples {
            let zeros: Vec<usize> = chart.divisor_coords().into_iter().filter(|_| rng.gen_bool(0.4)).collect();
            let x = sampling::with_zero_pattern(&mut rng, chart, &zeros, 0.9);
            count += 1;
            let n = fibre_in_chart(chart, &x).map(|f| f.len()).unwrap_or(0);
            if n != 1 << zeros.len() && failure.is_none() {
                failure = Some((format!("{n} points over a point of depth {}", zeros.len()), witness(chart, &x, seed)));
            }
        }
    }
    ctx.record("cut.fibre_cardinality", count, failure);
}

fn strat_checks(ctx: &mut Ctx) {
    let Ok(s) = canonical_stratification(ctx.model) else {
        ctx.report.fail("strat.canonical", "stratification could not be built", None);
        return;
    };
    let mut failure = None;
    let mut count = 0;
    for chart in ctx.model.charts.iter().filter(|c| c.field_kind == FieldKind::Real) {
        let (mut rng, seed) = ctx.rng("strat", &chart.id);
        for _ in 0..ctx.cfg.samples {
            let divisor = chart.divisor_coords();
            if divisor.is_empty() {
                break;
            }
            let mut zeros: Vec<usize> = divisor.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
            if zeros.is_empty() {
                zeros.push(divisor[0]);
            }
            let x = sampling::with_zero_pattern(&mut rng, chart, &zeros, 0.9);
            count += 1;
            let found = s.locate(ctx.model, &chart.id, &x);
            if found.len() != 1 && failure.is_none() {
                failure = Some((format!("point lies in {} strata", found.len()), witness(chart, &x, seed)));
            }
        }
    }
    ctx.record("strat.partition", count, failure);
}

fn real_flow_checks(ctx: &mut Ctx) {
    let model = ctx.model;
    let n = ctx.cfg.samples;
    let mut fails: [Option<(String, Witness)>; 9] = Default::default();
    let ids = [
        "flow.idempotence",
        "flow.identity_on_boundary",
        "flow.deck_equivariance",
        "flow.descent",
        "flow.trivialization_round_trip",
        "flow.stratum_labels",
        "flow.transversality",
        "flow.level_scaling",
        "flow.numeric_agreement",
    ];
    let mut counts = [0usize; 9];
    for chart in model.charts.iter().filter(|c| !c.divisor_coords().is_empty()) {
        let (mut rng, seed) = ctx.rng("flow", &chart.id);
        let mut note = |k: usize, cond: bool, d: String, x: &[f64], counts: &mut [usize; 9]| {
            counts[k] += 1;
            if !cond && fails[k].is_none() {
                fails[k] = Some((d, witness(chart, x, seed)));
            }
        };
        for s in 0..n {
            let p = cut_sample(&mut rng, chart, 0.1);
            let Ok(r) = retract_in_chart(chart, &p, Mode::ClosedForm) else {
                note(0, false, "retraction failed".into(), &p.x, &mut counts);
                continue;
            };
            let rr = retract_in_chart(chart, &r.point, Mode::ClosedForm).map(|x| x.point.x);
            let d = rr.as_ref().map(|x| max_diff(x, &r.point.x)).unwrap_or(f64::INFINITY);
            note(0, d <= 1e-9, format!("second retraction moved by {d:e}"), &p.x, &mut counts);
            if p.on_boundary(chart) && p.sheet.iter().any(|(&i, _)| p.x[i] == 0.0) {
                note(1, r.point == p, "boundary point moved".into(), &p.x, &mut counts);
            }
            if let Some(nrm) = normalize_chart(chart, &p.sheet).closed_form() {
                let y = CutPoint { x: nrm.forward(&p.x), ..p.clone() };
                for i in chart.divisor_coords() {
                    let label = chart.label(i).unwrap();
                    let lhs = local_retract(&y).and_then(|r| deck_action(chart, label, &r.point));
                    let rhs = deck_action(chart, label, &y).and_then(|q| local_retract(&q).map(|r| r.point));
                    let same = matches!((&lhs, &rhs), (Ok(a), Ok(b)) if a == b);
                    note(2, same, format!("deck action on {label} does not commute"), &p.x, &mut counts);
                }
                if let Some(w) = normalized_w(chart, &p.sheet) {
                    if let Ok(rep) = check_decrease(&w, chart, std::slice::from_ref(&p.x)) {
                        if let Some(row) = rep.rows.first() {
                            let err = row.relative_error().unwrap_or(0.0);
                            note(
                                3,
                                row.decreasing() && err <= 1e-9,
                                format!("df'/dw = {:e}, relative error {err:e}", row.derivative),
                                &p.x,
                                &mut counts,
                            );
                        }
                    }
                }
                if let Ok(t) = trivialize(chart, &p, Mode::ClosedForm) {
                    let back = untrivialize(chart, &t, Mode::ClosedForm);
                    let d = back.map(|b| max_diff(&b.x, &p.x)).unwrap_or(f64::INFINITY);
                    note(4, d <= 1e-9, format!("round trip off by {d:e}"), &p.x, &mut counts);
                    if let Ok(ok) = stratum_labels_match(chart, &p, &t) {
                        note(5, ok, "tie set differs from the zero set of the base".into(), &p.x, &mut counts);
                    }
                    if t.level > 0.0 {
                        if let Ok(tr) = fibre_transversality(chart, &p) {
                            note(6, tr.ok(), format!("rank {} of {}", tr.rank, tr.dim), &p.x, &mut counts);
                        }
                    }
                }
            }
            if chart.is_monomial() {
                let lam = 0.5 + rng.gen::<f64>();
                if let (Ok(sx), Ok(rx)) = (level_scaling(chart, &p.x, lam), level_scaling(chart, &r.point.x, lam)) {
                    let q = CutPoint { x: sx, ..p.clone() };
                    if chart.contains(&q.x) {
                        let d = retract_in_chart(chart, &q, Mode::ClosedForm)
                            .map(|r| max_diff(&r.point.x, &rx))
                            .unwrap_or(f64::INFINITY);
                        note(7, d <= 1e-8, format!("scaling and retraction differ by {d:e}"), &p.x, &mut counts);
                    }
                }
            }
            if s % 10 == 0 {
                let d = retract_in_chart(chart, &p, Mode::Numeric)
                    .map(|q| max_diff(&q.point.x, &r.point.x))
                    .unwrap_or(f64::INFINITY);
                note(8, d <= 1e-6, format!("numeric and closed form differ by {d:e}"), &p.x, &mut counts);
            }
        }
    }
    for (k, f) in fails.into_iter().enumerate() {
        ctx.record(ids[k], counts[k], f);
    }

    // Pushdown idempotence and landing on the central fibre.
    let mut failure = None;
    let mut count = 0;
    for chart in &model.charts {
        if chart.sigma.is_some() && chart.sigma_inverse.is_none() {
            continue;
        }
        let (mut rng, seed) = ctx.rng("pushdown", &chart.id);
        for _ in 0..n / 4 {
            let x = sampling::with_zero_pattern(&mut rng, chart, &[], 0.8);
            let q = model.sigma(chart, &x);
            let Ok(r) = retract(model, &q, Mode::ClosedForm) else { continue };
            count += 1;
            let again = retract(model, &r.point, Mode::ClosedForm)
                .map(|s| max_diff(&s.point, &r.point))
                .unwrap_or(f64::INFINITY);
            let f = model.eval_ambient_f(&r.point).map(f64::abs).unwrap_or(0.0);
            if (again > 1e-9 || f > 1e-9) && failure.is_none() {
                failure = Some((format!("moved by {again:e}, |f| = {f:e}"), witness(chart, &x, seed)));
            }
        }
    }
    ctx.record("flow.pushdown", count, failure);
}

fn complex_checks(ctx: &mut Ctx) -> Result<()> {
    let model = ctx.model;
    let n = ctx.cfg.samples;
    let mut diagram = None;
    let mut alpha = None;
    let mut deck = None;
    let (mut c_diagram, mut c_alpha, mut c_deck) = (0, 0, 0);
    for chart in model.charts.iter().filter(|c| !c.divisor_coords().is_empty()) {
        let retractor = ComplexRetractor::new(chart)?;
        let (mut rng, seed) = ctx.rng("complex", &chart.id);
        for s in 0..n {
            let z = sampling::in_complex_box(&mut rng, chart.dim, chart.domain_radius, 0.9);
            let re: Vec<f64> = z.iter().flat_map(|c| [c.re, c.im]).collect();
            let Ok(p) = polar_blowup(chart, &z) else { continue };
            let b = band(chart, &p);
            let f = chart.eval_f(&z)?;
            c_diagram += 1;
            let err = (b.rho - f.norm()).abs()
                + if f.norm() > 0.0 { angle_distance(b.alpha, f.arg()) * f.norm() } else { 0.0 };
            if err > 1e-10 && diagram.is_none() {
                diagram = Some((format!("band and f differ by {err:e}"), witness(chart, &re, seed)));
            }
            if let Ok((q, _)) = retractor.retract(&p, Mode::ClosedForm) {
                c_alpha += 1;
                let d = angle_distance(band(chart, &q).alpha, b.alpha);
                if d > 1e-8 && alpha.is_none() {
                    alpha = Some((format!("angle moved by {d:e}"), witness(chart, &re, seed)));
                }
            }
            if s % 10 == 0 {
                // Turning one divisor coordinate once around its hyperplane
                // returns to the same point with the angle of f lifted by
                // a_j turns of the deck transformation.
                let j = chart.divisor_coords()[0];
                let a = chart.exponents.get(j) as i64;
                let steps = 64 * a as usize;
                let mut path: Vec<Vec<Complex64>> = (0..steps)
                    .map(|t| {
                        let mut w = z.clone();
                        w[j] *= Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / steps as f64);
                        w
                    })
                    .collect();
                path.push(z.clone());
                let start = universal_trivialization(&retractor, &path[..1], Mode::ClosedForm);
                let end = universal_trivialization(&retractor, &path, Mode::ClosedForm);
                if let (Ok(g0), Ok(g1)) = (start, end) {
                    c_deck += 1;
                    let mut expected = g0.clone();
                    for _ in 0..a {
                        expected = deck_shift(&expected);
                    }
                    let ok = g1.base == expected.base
                        && g1.rho == expected.rho
                        && (g1.alpha.value() - expected.alpha.value()).abs() <= 1e-9;
                    if !ok && deck.is_none() {
                        deck = Some((
                            format!(
                                "loop gives winding {}, deck shift gives {}",
                                g1.alpha.winding, expected.alpha.winding
                            ),
                            witness(chart, &re, seed),
                        ));
                    }
                }
            }
        }
    }
    ctx.record("complex.diagram", c_diagram, diagram);
    ctx.record("complex.alpha_preservation", c_alpha, alpha);
    ctx.record("complex.deck_equivariance", c_deck, deck);

    // Component counts and monodromy of every torus fibre in the model.
    let tuples: BTreeSet<Vec<u32>> = build_dual_complex(model)?
        .simplices
        .iter()
        .map(|s| s.components.iter().filter_map(|c| model.component(c).ok().map(|d| d.multiplicity)).collect())
        .collect();
    for e in tuples {
        let g = alpha_fibre_components(&e);
        let level = LiftedAngle::from_value(0.7);
        let reps: BTreeSet<usize> =
            (0..g).map(|r| component_index(&e, &component_representative(&e, r, &level), &level)).collect();
        let perm = monodromy(&e);
        let mut order = 1;
        let mut cur: Vec<usize> = perm.clone();
        while cur.iter().enumerate().any(|(i, &v)| i != v) && order <= g {
            cur = cur.iter().map(|&v| perm[v]).collect();
            order += 1;
        }
        let id = format!("complex.torus[{}]", e.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
        if reps.len() == g && g.is_multiple_of(order) {
            ctx.report.pass(&id, format!("{g} components, monodromy order {order}"));
        } else {
            ctx.report.fail(
                &id,
                format!("{} distinct representatives of {g}, monodromy order {order}", reps.len()),
                None,
            );
        }
    }

    for sp in &model.special_points {
        let id = format!("complex.milnor[{}]", sp.name);
        match milnor_fibration(model, &sp.name) {
            Ok(m) => ctx.report.pass(&id, format!("chi = {}, components = {}", m.chi, m.pi0)),
            Err(e) => ctx.report.fail(&id, e.to_string(), None),
        }
    }
    for s in &model.stratifications {
        let id = format!("complex.condition3[{}]", s.name);
        let r = condition3_check(model, &s.name, (n / 10).max(5), ctx.cfg.seed)?;
        let detail = match r.failures.first() {
            None => format!("holds on {} samples", r.checked),
            Some(f) => format!("fails: {}", f.reason),
        };
        if r.ok() == s.expect_condition3 {
            ctx.report.pass(&id, format!("{detail} (as declared)"));
        } else {
            let w = r.failures.first().map(|f| Witness {
                chart: f.chart.clone(),
                point: f.point.iter().flat_map(|c| [c.re, c.im]).collect(),
                seed: ctx.cfg.seed,
            });
            ctx.report.fail(
                &id,
                format!("{detail} (declared {})", if s.expect_condition3 { "pass" } else { "fail" }),
                w,
            );
        }
    }
    Ok(())
}

/// Runs every invariant check that applies to the model.
pub fn verify_suite(model: &NCModel, cfg: SuiteConfig) -> Report {
    let mut ctx = Ctx { model, cfg, report: Report::new(&format!("model {}", model.name)) };
    ncmodel_checks(&mut ctx);
    cut_checks(&mut ctx);
    if model.validate().is_ok() && check_normal_crossings(model).is_empty() {
        strat_checks(&mut ctx);
        if model.is_real() {
            real_flow_checks(&mut ctx);
        } else if let Err(e) = complex_checks(&mut ctx) {
            ctx.report.fail("complex.setup", e.to_string(), None);
        }
    }
    ctx.report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn x2y2_passes() {
        let r = verify_suite(&catalog::load("x2y2").unwrap(), SuiteConfig { seed: 1, samples: 60 });
        assert!(r.passed(), "{}", r.to_table());
        assert!(r.rows.iter().any(|row| row.id == "flow.trivialization_round_trip"));
    }

    #[test]
    fn catalog_passes() {
        for m in catalog::all() {
            let r = verify_suite(&m, SuiteConfig { seed: 2, samples: 40 });
            assert!(r.passed(), "{}", r.to_table());
        }
    }

    #[test]
    fn multiplicity_mismatch_fails_with_witness() {
        let mut m = catalog::load("x2y2").unwrap();
        m.components[0].multiplicity = 3;
        let r = verify_suite(&m, SuiteConfig { seed: 1, samples: 20 });
        let row = r.rows.iter().find(|row| row.id == "ncmodel.normal_crossings").unwrap();
        assert!(!row.passed && row.witness.is_some());
    }

    #[test]
    fn same_seed_same_report() {
        let m = catalog::load("z2z3").unwrap();
        let a = verify_suite(&m, SuiteConfig { seed: 4, samples: 30 }).to_csv();
        let b = verify_suite(&m, SuiteConfig { seed: 4, samples: 30 }).to_csv();
        assert_eq!(a, b);
    }
}
