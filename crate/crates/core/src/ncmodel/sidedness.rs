use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

use super::NCModel;

/// Solves the sign cocycle of `component` for chart potentials `s(chart)`
/// with `s(target) = sign * s(source)` along every transition.
///
/// Returns `None` when some cycle has sign product `-1`, i.e. the cocycle
/// is not a coboundary and the double cover over the component is
/// connected.
pub fn sign_potential(model: &NCModel, component: &str) -> Result<Option<BTreeMap<String, i8>>> {
    model.component(component)?;
    let charts: Vec<&str> =
        model.charts.iter().filter(|c| c.coord_of(component).is_some()).map(|c| c.id.as_str()).collect();
    if charts.is_empty() {
        return Err(Error::Model(format!("component {component} is not covered by any chart")));
    }
    let mut potential: BTreeMap<String, i8> = BTreeMap::new();
    for root in &charts {
        if potential.contains_key(*root) {
            continue;
        }
        potential.insert(root.to_string(), 1);
        let mut queue = VecDeque::from([root.to_string()]);
        while let Some(c) = queue.pop_front() {
            let sc = potential[&c];
            for t in model.transitions_from(&c) {
                let Some(&s) = t.sign_data.get(component) else { continue };
                let want = sc * s;
                match potential.get(&t.target) {
                    Some(&have) if have != want => return Ok(None),
                    Some(_) => {}
                    None => {
                        potential.insert(t.target.clone(), want);
                        queue.push_back(t.target.clone());
                    }
                }
            }
        }
    }
    Ok(Some(potential))
}

/// Whether the component is two-sided: its sign cocycle is trivial, so it
/// admits a global defining function up to a positive unit.
///
/// The answer is computed for the component as declared. When the model
/// marks a component as disconnected, a `true` answer holds for every
/// connected piece separately.
pub fn two_sidedness(model: &NCModel, component: &str) -> Result<bool> {
    Ok(sign_potential(model, component)?.is_some())
}
