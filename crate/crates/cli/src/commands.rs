use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;

use ncretract::catalog;
use ncretract::complexretract::{
    alpha_fibre_components, alpha_fibre_points, component_index, component_representative, condition3_check,
    milnor_fibration, milnor_fibration_at, polar_blowup, reduce_angle, torus_fibre, universal_trivialization,
    ComplexRetractor, LiftedAngle, MilnorFibration,
};
use ncretract::cut::{fibre_in_chart, CutPoint, SignSheet};
use ncretract::flowretract::{
    self, f_prime, milnor_components_real, retract_in_chart, retraction_field, specialization_fibre_real, trivialize,
    untrivialize, MilnorCount, Mode, OdeControls,
};
use ncretract::ncmodel::{
    build_dual_complex, check_normal_crossings, two_sidedness, ChartSpec, FieldKind, ModelPoint, NCModel,
};
use ncretract::report::{Report, Witness};
use ncretract::strat::canonical_stratification;
use ncretract::verify::{verify_suite, SuiteConfig};

use crate::point::{parse_complexes, parse_point, parse_reals, PointSpec};
use crate::{load_model, CliError, Command, ErrorKind, Outcome, RunConfig};

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Describe => describe(cfg),
        Command::Stratify => stratify(cfg),
        Command::Cut => cut(cfg),
        Command::Retract => retract(cfg),
        Command::Flow => flow(cfg),
        Command::Fibre => fibre(cfg),
        Command::Milnor => milnor(cfg),
        Command::AlphaFibre => alpha_fibre(cfg),
        Command::Check => check(cfg),
        Command::Trivialize => trivialize_cmd(cfg),
    }
}

fn computation(m: impl Into<String>) -> CliError {
    CliError { kind: ErrorKind::Computation, message: m.into() }
}

fn model_of(cfg: &RunConfig) -> Result<NCModel, CliError> {
    let source = cfg.model.as_deref().ok_or_else(|| CliError::usage("--model is required"))?;
    load_model(source)
}

fn mode_of(cfg: &RunConfig) -> Mode {
    if cfg.numeric {
        Mode::Numeric
    } else {
        Mode::ClosedForm
    }
}

fn level_of(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.level.ok_or_else(|| CliError::usage("-c/--level is required"))
}

fn fmt_reals(x: &[f64]) -> String {
    x.iter().map(|v| (v + 0.0).to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        z.re.to_string()
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn fmt_complexes(z: &[Complex64]) -> String {
    z.iter().map(|v| fmt_complex(*v)).collect::<Vec<_>>().join(" ")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",") + "\n"
}

fn with_csv(outcome: &mut Outcome, cfg: &RunConfig, csv: String) {
    if let Some(path) = &cfg.out {
        outcome.files.push((path.clone(), csv));
    }
}

/// A chart point named on the command line, with complex coordinates.
struct ChartPoint<'m> {
    chart: &'m ChartSpec,
    z: Vec<Complex64>,
}

impl ChartPoint<'_> {
    fn real(&self) -> Result<Vec<f64>, CliError> {
        if self.z.iter().any(|v| v.im != 0.0) {
            return Err(CliError::parse(format!("chart {} is real but a coordinate is complex", self.chart.id)));
        }
        Ok(self.z.iter().map(|v| v.re).collect())
    }

    fn is_complex(&self) -> bool {
        self.chart.field_kind == FieldKind::Complex
    }
}

fn chart_point<'m>(model: &'m NCModel, cfg: &RunConfig) -> Result<ChartPoint<'m>, CliError> {
    let at = cfg.at.as_deref().ok_or_else(|| CliError::usage("--at is required"))?;
    let (chart_id, z) = match parse_point(at)? {
        PointSpec::Chart { chart, coords } => (chart, parse_complexes(&coords)?),
        PointSpec::Named(name) => {
            let sp = model.special_point(&name)?;
            match (&sp.chart, &sp.x) {
                (Some(c), Some(x)) => (c.clone(), x.iter().map(|&v| Complex64::new(v, 0.0)).collect()),
                _ => {
                    return Err(computation(format!(
                        "special point {name} is given by its preimage components, not a chart point; use CHART:coords"
                    )))
                }
            }
        }
        PointSpec::Ambient(_) => return Err(CliError::usage("this subcommand needs a chart point: CHART:coords")),
    };
    let chart = model.chart(&chart_id)?;
    if z.len() != chart.dim {
        return Err(CliError::parse(format!(
            "chart {} has dimension {}, got {} coordinates",
            chart.id,
            chart.dim,
            z.len()
        )));
    }
    if !chart.contains(&z) {
        return Err(computation(format!("point lies outside the box of chart {}", chart.id)));
    }
    Ok(ChartPoint { chart, z })
}

/// The cut point over `x` on the sheet given by the signs of its
/// coordinates, `+` where a coordinate vanishes.
fn signed_cut_point(chart: &ChartSpec, x: Vec<f64>) -> Result<CutPoint, CliError> {
    let sheet = SignSheet::from_pairs(chart.divisor_coords().into_iter().map(|i| (i, if x[i] < 0.0 { -1 } else { 1 })));
    Ok(CutPoint::new(chart, x, sheet)?)
}

fn describe(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let mut text = String::new();
    let field = if model.is_real() { "real" } else { "complex" };
    let _ = writeln!(text, "model {} ({field})", model.name);
    if let Some(f) = &model.ambient_f {
        let _ = writeln!(text, "ambient f = {f}");
    }
    let _ = writeln!(text, "\ncomponents");
    for c in &model.components {
        let sides = if model.is_real() {
            match two_sidedness(&model, &c.id) {
                Ok(true) => "two-sided",
                Ok(false) => "one-sided",
                Err(_) => "sidedness unknown",
            }
        } else {
            "-"
        };
        let chi = c.euler_characteristic.map(|v| format!("chi {v}")).unwrap_or_default();
        let _ = writeln!(text, "  {:<6} multiplicity {:<3} {sides:<17} {chi}", c.id, c.multiplicity);
    }
    let _ = writeln!(text, "\ncharts");
    let mut csv = String::from("chart,dim,exponents,unit_factor,radius,divisor_labels\n");
    for ch in &model.charts {
        let exps = ch.exponents.entries().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let labels =
            ch.divisor_labels.iter().map(|l| l.clone().unwrap_or_else(|| "-".into())).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            text,
            "  {:<4} dim {} exponents [{exps}] unit {} radius {} labels [{labels}]",
            ch.id, ch.dim, ch.unit_factor, ch.domain_radius
        );
        csv += &csv_row(&[
            ch.id.clone(),
            ch.dim.to_string(),
            exps,
            ch.unit_factor.to_string(),
            ch.domain_radius.to_string(),
            labels,
        ]);
    }
    let _ = writeln!(text, "\ntransitions {}", model.transitions.len());
    let mut report = Report::new(&format!("describe {}", model.name));
    let diagnostics = check_normal_crossings(&model);
    match diagnostics.first() {
        None => report.pass("ncmodel.normal_crossings", "no violations"),
        Some(d) => report.fail(
            "ncmodel.normal_crossings",
            format!("{} violations, first: {d}", diagnostics.len()),
            Some(Witness { chart: d.chart.clone(), point: d.witness.clone(), seed: 0 }),
        ),
    }
    if diagnostics.is_empty() {
        let dual = build_dual_complex(&model)?;
        let _ = writeln!(text, "dual complex");
        for s in &dual.simplices {
            let names = s.components.iter().cloned().collect::<Vec<_>>().join(" ");
            let _ = writeln!(text, "  [{names}] via chart {} at ({})", s.witness_chart, fmt_reals(&s.witness));
        }
    }
    for sp in &model.special_points {
        let _ = match (&sp.chart, &sp.x, &sp.components) {
            (Some(c), Some(x), _) => writeln!(text, "special point {} = {c}:{}", sp.name, fmt_reals(x)),
            (_, _, Some(comps)) => writeln!(text, "special point {} with preimage {}", sp.name, comps.join(" ")),
            _ => writeln!(text, "special point {}", sp.name),
        };
    }
    for s in &model.stratifications {
        let _ = writeln!(text, "stratification {} ({} strata)", s.name, s.strata.len());
    }
    text += "\n";
    text += &report.to_table();
    let mut outcome = Outcome { stdout: text, files: vec![], report };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn piece_text(chart: &ChartSpec, i0: &[usize], plus: &[usize], minus: &[usize]) -> String {
    let sym = if chart.field_kind == FieldKind::Complex { 'z' } else { 'x' };
    let mut parts: Vec<(usize, String)> = Vec::new();
    parts.extend(i0.iter().map(|&i| (i, format!("{sym}{}=0", i + 1))));
    parts.extend(plus.iter().map(|&i| (i, format!("{sym}{}>0", i + 1))));
    parts.extend(minus.iter().map(|&i| (i, format!("{sym}{}<0", i + 1))));
    parts.sort();
    parts.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join(" ")
}

fn stratify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let strat = canonical_stratification(&model)?;
    let mut text = format!("canonical stratification of {}\n", model.name);
    let mut csv = String::from("stratum,depth,chart,piece\n");
    for s in &strat.strata {
        let _ = writeln!(text, "  {} (depth {}, {} pieces)", s.name(), s.depth, s.pieces.len());
        for p in &s.pieces {
            let chart = model.chart(&p.chart)?;
            let q = &p.quadrant;
            let v = |set: &std::collections::BTreeSet<usize>| set.iter().copied().collect::<Vec<_>>();
            let desc = piece_text(chart, &v(&q.i0), &v(&q.iplus), &v(&q.iminus));
            let _ = writeln!(text, "      {}: {desc}", p.chart);
            csv += &csv_row(&[s.name(), s.depth.to_string(), p.chart.clone(), desc]);
        }
    }
    if cfg.at.is_some() {
        let cp = chart_point(&model, cfg)?;
        let x = cp.real().or_else(|_| Ok::<_, CliError>(cp.z.iter().map(|v| v.norm()).collect()))?;
        let names: Vec<String> = strat.locate(&model, &cp.chart.id, &x).iter().map(|s| s.name()).collect();
        let _ = writeln!(
            text,
            "point lies in: {}",
            if names.is_empty() { "the open part".into() } else { names.join(", ") }
        );
    }
    let mut outcome = Outcome { stdout: text, files: vec![], report: Report::new("stratify") };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn cut(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let cp = chart_point(&model, cfg)?;
    if cp.is_complex() {
        return Err(computation("the cut space is built over real charts; this chart is complex"));
    }
    let x = cp.real()?;
    let pts = fibre_in_chart(cp.chart, &x)?;
    let k = cp.chart.multiplicity_profile(&x)?.k;
    let mut csv = String::from("chart,sheet,x,on_boundary\n");
    let mut text = format!("fibre over {}:({}) with k = {k}\n", cp.chart.id, fmt_reals(&x));
    for p in &pts {
        let on = p.on_boundary(cp.chart);
        let _ = writeln!(
            text,
            "  sheet {}  x = ({})  {}",
            p.sheet.label(),
            fmt_reals(&p.x),
            if on { "on X'" } else { "interior" }
        );
        csv += &csv_row(&[p.chart.clone(), p.sheet.label(), fmt_reals(&p.x), on.to_string()]);
    }
    let mut report = Report::new("cut");
    let detail = format!("{} sheets, k = {k}", pts.len());
    if pts.len() == 1 << k {
        report.pass("cut.fibre_cardinality", detail);
    } else {
        report.fail(
            "cut.fibre_cardinality",
            detail,
            Some(Witness { chart: cp.chart.id.clone(), point: x, seed: cfg.seed }),
        );
    }
    let mut outcome = Outcome { stdout: text + &csv, files: vec![], report };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn retract(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let mode = mode_of(cfg);
    let at = cfg.at.as_deref().ok_or_else(|| CliError::usage("--at is required"))?;
    let mut csv = String::from("chart,sheet,delta,x,mode\n");
    let mode_name = |m: Mode| if m == Mode::Numeric { "numeric" } else { "closed-form" };
    let text;
    if let PointSpec::Ambient(coords) = parse_point(at)? {
        let q = parse_reals(&coords)?;
        let r = flowretract::retract(&model, &q, mode)?;
        let (chart, sheet) = r.lift.as_ref().map(|p| (p.chart.clone(), p.sheet.label())).unwrap_or_default();
        text = format!(
            "retract ({}) -> ({})\ndelta = {}\nvia chart {}\n",
            fmt_reals(&q),
            fmt_reals(&r.point),
            r.delta,
            if chart.is_empty() { "-" } else { &chart }
        );
        csv += &csv_row(&[chart, sheet, r.delta.to_string(), fmt_reals(&r.point), mode_name(mode).into()]);
    } else {
        let cp = chart_point(&model, cfg)?;
        if cp.is_complex() {
            let p = polar_blowup(cp.chart, &cp.z)?;
            let (q, delta) = ComplexRetractor::new(cp.chart)?.retract(&p, mode)?;
            text = format!(
                "retract {}:({}) -> ({})\ndelta = {delta}\nangles ({}) -> ({})\n",
                cp.chart.id,
                fmt_complexes(&cp.z),
                fmt_complexes(&q.z),
                fmt_reals(&p.alpha),
                fmt_reals(&q.alpha)
            );
            csv += &csv_row(&[
                cp.chart.id.clone(),
                String::new(),
                delta.to_string(),
                fmt_complexes(&q.z),
                mode_name(mode).into(),
            ]);
        } else {
            let p = signed_cut_point(cp.chart, cp.real()?)?;
            let r = retract_in_chart(cp.chart, &p, mode)?;
            text = format!(
                "retract {}:({}) sheet {} -> ({})\ndelta = {}\nmode {}\n",
                cp.chart.id,
                fmt_reals(&p.x),
                p.sheet.label(),
                fmt_reals(&r.point.x),
                r.delta,
                mode_name(r.mode)
            );
            csv += &csv_row(&[
                cp.chart.id.clone(),
                p.sheet.label(),
                r.delta.to_string(),
                fmt_reals(&r.point.x),
                mode_name(r.mode).into(),
            ]);
        }
    }
    let mut outcome = Outcome { stdout: text, files: vec![], report: Report::new("retract") };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn flow(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let cp = chart_point(&model, cfg)?;
    if cp.is_complex() {
        return Err(computation("flow lines are traced on real charts; use retract --numeric on complex charts"));
    }
    let p = signed_cut_point(cp.chart, cp.real()?)?;
    let field = retraction_field(cp.chart, &p.sheet)?;
    let mut controls = OdeControls::default();
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0) {
            return Err(CliError::usage("--tol must be positive"));
        }
        controls.tol = tol;
    }
    let trace = flowretract::flow(cp.chart, &p, &field, &controls)?;
    let mut csv = String::from("t,x,fprime\n");
    let rows = trace.points.iter().map(|(t, q)| (*t, q)).chain(std::iter::once((trace.hit_time, &trace.terminal)));
    for (t, q) in rows {
        csv += &csv_row(&[t.to_string(), fmt_reals(&q.x), f_prime(cp.chart, &p.sheet, &q.x).to_string()]);
    }
    let text = format!(
        "flow from {}:({}) sheet {} using the {:?} field\nhit time {}\nterminal ({})\nsamples {}\n",
        cp.chart.id,
        fmt_reals(&p.x),
        p.sheet.label(),
        field.case,
        trace.hit_time,
        fmt_reals(&trace.terminal.x),
        trace.points.len() + 1
    );
    let mut outcome = Outcome { stdout: text, files: vec![], report: Report::new("flow") };
    if let Some(path) = &cfg.trace {
        outcome.files.push((path.clone(), csv.clone()));
    }
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn fibre(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let c = level_of(cfg)?;
    let cp = chart_point(&model, cfg)?;
    if cfg.real || !cp.is_complex() {
        if cp.is_complex() {
            return Err(computation("--real needs a real model"));
        }
        return real_fibre(cfg, &model, &cp, c);
    }
    let tf = torus_fibre(cp.chart, &cp.z)?;
    let level = LiftedAngle::from_value(if c < 0.0 { PI } else { 0.0 });
    let n = tf.alpha_components();
    let mut text = format!(
        "torus fibre over {}:({}): k = {}, exponents [{}]\nangle level set components: {n}\n",
        cp.chart.id,
        fmt_complexes(&cp.z),
        tf.k,
        tf.exponents.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
    );
    let mut csv = String::from("component,alpha\n");
    if tf.k > 0 {
        for r in 0..n {
            let rep = component_representative(&tf.exponents, r, &level);
            let _ = writeln!(text, "  component {r}: ({})", fmt_reals(&rep));
            csv += &csv_row(&[r.to_string(), fmt_reals(&rep)]);
        }
    }
    let mut outcome = Outcome { stdout: text, files: vec![], report: Report::new("fibre") };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn real_fibre(cfg: &RunConfig, model: &NCModel, cp: &ChartPoint, c: f64) -> Result<Outcome, CliError> {
    let x = cp.real()?;
    let p = ModelPoint { chart: cp.chart.id.clone(), x: x.clone() };
    let pts = specialization_fibre_real(model, &p, c, mode_of(cfg))?;
    let mut csv = String::from("chart,sheet,x,level\n");
    for q in &pts {
        csv += &csv_row(&[q.chart.clone(), q.sheet.label(), fmt_reals(&q.x), c.to_string()]);
    }
    let mut report = Report::new("fibre");
    let ball = 0.9 * cp.chart.domain_radius;
    let witness = || Some(Witness { chart: cp.chart.id.clone(), point: x.clone(), seed: cfg.seed });
    match milnor_components_real(model, &p, ball, c, cfg.samples, cfg.seed)? {
        MilnorCount::Count { components, samples } => {
            let detail = format!("{components} sampled components from {samples} roots, {} fibre points", pts.len());
            if components == pts.len() {
                report.pass("fibre.sampled_components", detail);
            } else {
                report.fail("fibre.sampled_components", detail, witness());
            }
        }
        MilnorCount::Inconclusive { reason } => report.fail("fibre.sampled_components", reason, witness()),
    }
    let text = format!(
        "fibre of f = {c} over {}:({}): {} points\n{csv}\n{}",
        cp.chart.id,
        fmt_reals(&x),
        pts.len(),
        report.to_table()
    );
    let mut outcome = Outcome { stdout: text, files: vec![], report };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn milnor(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let at = cfg.at.as_deref().ok_or_else(|| CliError::usage("--at is required"))?;
    let m: MilnorFibration = match parse_point(at)? {
        PointSpec::Named(name) => milnor_fibration(&model, &name)?,
        _ => {
            let cp = chart_point(&model, cfg)?;
            milnor_fibration_at(&model, &cp.chart.id, &cp.z)?
        }
    };
    let mut text = format!("Milnor fibre of {} at {}\n", model.name, m.point);
    let _ = writeln!(
        text,
        "{:<14} {:<14} {:>8} {:>9} {:>12} {:>10}",
        "stratum", "multiplicities", "chi_open", "chi_level", "contribution", "components"
    );
    let mut csv = String::from("stratum,multiplicities,chi_open,chi_level,contribution,alpha_components\n");
    for s in &m.strata {
        let mults = s.multiplicities.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            text,
            "{:<14} {:<14} {:>8} {:>9} {:>12} {:>10}",
            s.name(),
            mults,
            s.chi_open,
            s.chi_level,
            s.contribution(),
            s.alpha_components
        );
        csv += &csv_row(&[
            s.name(),
            mults,
            s.chi_open.to_string(),
            s.chi_level.to_string(),
            s.contribution().to_string(),
            s.alpha_components.to_string(),
        ]);
    }
    csv +=
        &csv_row(&["total".into(), String::new(), String::new(), String::new(), m.chi.to_string(), m.pi0.to_string()]);
    let _ = writeln!(text, "chi = {}\npi0 = {}", m.chi, m.pi0);
    let mut outcome = Outcome { stdout: text, files: vec![], report: Report::new("milnor") };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn alpha_fibre(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let e = cfg.exponents.clone().ok_or_else(|| CliError::usage("--exponents is required"))?;
    if e.is_empty() || e.contains(&0) {
        return Err(CliError::parse("exponents must be positive integers"));
    }
    let n = alpha_fibre_components(&e);
    let level = LiftedAngle::from_value(cfg.level.unwrap_or(0.0));
    let list = e.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
    let text = format!("level set of sum a_i alpha_i = {} for exponents ({list})\ncomponents: {n}\n", level.value());
    let mut outcome = Outcome { stdout: text, files: vec![], report: Report::new("alpha-fibre") };
    if cfg.out.is_some() {
        with_csv(&mut outcome, cfg, alpha_level_set_csv(&e, &level, cfg.samples));
    }
    Ok(outcome)
}

/// The level set sampled on a grid over the first `k - 1` angles, each
/// point labelled with its component.
fn alpha_level_set_csv(e: &[u32], level: &LiftedAngle, samples: usize) -> String {
    let mut csv = String::from("component,alpha\n");
    let k = e.len();
    if k == 1 {
        for (r, a) in alpha_fibre_points(e[0], level).into_iter().enumerate() {
            csv += &csv_row(&[r.to_string(), a.to_string()]);
        }
        return csv;
    }
    let per = ((samples.max(2) as f64).powf(1.0 / (k - 1) as f64).round() as usize).max(2);
    let last = e[k - 1] as f64;
    let total = per.pow((k - 1) as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut alphas: Vec<f64> = (0..k - 1)
            .map(|_| {
                let i = rest % per;
                rest /= per;
                TAU * i as f64 / per as f64
            })
            .collect();
        let s = level.value() - e.iter().zip(&alphas).map(|(&a, &al)| a as f64 * al).sum::<f64>();
        for j in 0..e[k - 1] {
            alphas.push(reduce_angle((s + TAU * j as f64) / last));
            let r = component_index(e, &alphas, level);
            csv += &csv_row(&[r.to_string(), fmt_reals(&alphas)]);
            alphas.pop();
        }
    }
    csv
}

fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let suite = SuiteConfig { seed: cfg.seed, samples: cfg.samples };
    let models: Vec<NCModel> = match &cfg.model {
        Some(source) => vec![load_model(source)?],
        None => catalog::all(),
    };
    let prefix = models.len() > 1;
    let mut report = Report::new(if prefix { "catalog" } else { &models[0].name });
    for model in &models {
        let mut r = verify_suite(model, suite);
        if let Some(name) = &cfg.stratification {
            let c3 = condition3_check(model, name, cfg.samples, cfg.seed)?;
            let id = format!("complex.condition3_requested[{name}]");
            match c3.failures.first() {
                None => r.pass(&id, format!("{} samples, no failure", c3.checked)),
                Some(f) => r.fail(
                    &id,
                    format!("{}: {} (rank {:?}, expected {:?})", f.stratum, f.reason, f.rank, f.expected),
                    Some(Witness {
                        chart: f.chart.clone(),
                        point: f.point.iter().flat_map(|z| [z.re, z.im]).collect(),
                        seed: cfg.seed,
                    }),
                ),
            }
        }
        for mut row in r.rows {
            if prefix {
                row.id = format!("{}/{}", model.name, row.id);
            }
            report.push(row);
        }
    }
    let mut outcome = Outcome { stdout: report.to_table(), files: vec![], report };
    let csv = outcome.report.to_csv();
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}

fn trivialize_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let cp = chart_point(&model, cfg)?;
    let mode = mode_of(cfg);
    let mut csv = String::from("chart,sheet,base,level,angle,delta\n");
    let mut report = Report::new("trivialize");
    let text;
    if cp.is_complex() {
        let retractor = ComplexRetractor::new(cp.chart)?;
        let g = universal_trivialization(&retractor, std::slice::from_ref(&cp.z), mode)?;
        text = format!(
            "trivialize {}:({})\nbase ({})\n|f| = {}\nangle {} (winding {}, angle {})\n",
            cp.chart.id,
            fmt_complexes(&cp.z),
            fmt_complexes(&g.base.z),
            g.rho,
            g.alpha.value(),
            g.alpha.winding,
            g.alpha.angle()
        );
        csv += &csv_row(&[
            cp.chart.id.clone(),
            String::new(),
            fmt_complexes(&g.base.z),
            g.rho.to_string(),
            g.alpha.value().to_string(),
            String::new(),
        ]);
    } else {
        let p = signed_cut_point(cp.chart, cp.real()?)?;
        let t = trivialize(cp.chart, &p, mode)?;
        let back = untrivialize(cp.chart, &t, mode)?;
        let err = back.x.iter().zip(&p.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let detail = format!("max coordinate error {err:e}");
        if err <= 1e-9 * cp.chart.domain_radius.max(1.0) || (mode == Mode::Numeric && err <= 1e-6) {
            report.pass("trivialize.round_trip", detail);
        } else {
            report.fail(
                "trivialize.round_trip",
                detail,
                Some(Witness { chart: cp.chart.id.clone(), point: p.x.clone(), seed: cfg.seed }),
            );
        }
        let quad = t.level_quadrature.map(|q| format!("\nlevel by quadrature {q}")).unwrap_or_default();
        text = format!(
            "trivialize {}:({}) sheet {}\nbase ({})\nlevel {}{quad}\ndelta {}\n\n{}",
            cp.chart.id,
            fmt_reals(&p.x),
            p.sheet.label(),
            fmt_reals(&t.base.x),
            t.level,
            t.delta,
            report.to_table()
        );
        csv += &csv_row(&[
            cp.chart.id.clone(),
            p.sheet.label(),
            fmt_reals(&t.base.x),
            t.level.to_string(),
            String::new(),
            t.delta.to_string(),
        ]);
    }
    let mut outcome = Outcome { stdout: text, files: vec![], report };
    with_csv(&mut outcome, cfg, csv);
    Ok(outcome)
}
