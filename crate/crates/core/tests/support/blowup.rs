//! Embedded resolution of a plane curve germ at the origin by repeated point
//! blow-ups, tracked symbolically. Produces the exceptional curves with the
//! multiplicity of the pulled-back function along each, and which curves
//! (including the strict transform) meet.

use std::collections::BTreeSet;

use super::poly::{integer_roots, Poly};

pub const STRICT: &str = "St";

#[derive(Clone, Debug, Default)]
pub struct Resolution {
    /// Exceptional curves in order of creation, with multiplicities.
    pub exceptional: Vec<(String, u32)>,
    /// Unordered pairs of curves meeting in a point.
    pub edges: BTreeSet<(String, String)>,
}

impl Resolution {
    pub fn multiplicity(&self, name: &str) -> u32 {
        if name == STRICT {
            return 1;
        }
        self.exceptional.iter().find(|(n, _)| n == name).map(|(_, m)| *m).unwrap()
    }

    /// Edges as sorted pairs of multiplicities, a label-free description.
    pub fn edge_multiplicities(&self) -> BTreeSet<(u32, u32)> {
        self.edges
            .iter()
            .map(|(a, b)| {
                let (x, y) = (self.multiplicity(a), self.multiplicity(b));
                (x.min(y), x.max(y))
            })
            .collect()
    }
}

/// A point in a chart, at the origin of coordinates `(u, v)`: the total
/// transform there is `u^a v^b p(u, v)` with `a`, `b` carried by the labels.
struct Local {
    p: Poly,
    u_axis: Option<(String, u32)>,
    v_axis: Option<(String, u32)>,
}

fn edge(res: &mut Resolution, a: &str, b: &str) {
    let pair = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
    res.edges.insert(pair);
}

fn process(res: &mut Resolution, at: Local, depth: usize) {
    assert!(depth < 12, "resolution did not terminate");
    let on_curve = at.p.coeff(0, 0) == 0;
    let names: Vec<&str> =
        [&at.u_axis, &at.v_axis].iter().filter_map(|d| d.as_ref().map(|(n, _)| n.as_str())).collect();
    if !on_curve {
        if let [a, b] = names[..] {
            edge(res, a, b);
        }
        return;
    }
    let (pu, pv) = (at.p.coeff(1, 0), at.p.coeff(0, 1));
    let smooth = pu != 0 || pv != 0;
    let transverse_u = at.u_axis.is_none() || pv != 0;
    let transverse_v = at.v_axis.is_none() || pu != 0;
    if smooth && names.len() < 2 && transverse_u && transverse_v {
        for n in names {
            edge(res, n, STRICT);
        }
        return;
    }
    let a = at.u_axis.as_ref().map_or(0, |d| d.1);
    let b = at.v_axis.as_ref().map_or(0, |d| d.1);
    let m = a + b + at.p.order();
    let name = format!("E{}", res.exceptional.len() + 1);
    res.exceptional.push((name.clone(), m));
    let e = Some((name, m));

    // Chart (u, w), v = u w: the new curve is u = 0, the old v-axis stays w = 0.
    let p1 = at.p.blow_up_first();
    let (_, roots) = integer_roots(&p1.on_u_axis());
    let mut distinct: Vec<i64> = roots.clone();
    distinct.sort();
    distinct.dedup();
    for c in distinct {
        process(res, Local { p: p1.shift_v(c), u_axis: e.clone(), v_axis: None }, depth + 1);
    }
    process(res, Local { p: p1, u_axis: e.clone(), v_axis: at.v_axis.clone() }, depth + 1);
    // Chart (s, v), u = s v: only its origin is not seen from the first chart.
    let p2 = at.p.blow_up_second();
    process(res, Local { p: p2, u_axis: at.u_axis, v_axis: e }, depth + 1);
}

/// Resolves the germ of `f = 0` at the origin; `f` must be reduced with an
/// isolated singular point there.
pub fn resolve(f: &Poly) -> Resolution {
    let mut res = Resolution::default();
    process(&mut res, Local { p: f.clone(), u_axis: None, v_axis: None }, 0);
    res
}
