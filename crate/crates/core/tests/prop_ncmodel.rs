use std::collections::BTreeSet;

use ncretract::catalog;
use ncretract::ncmodel::{build_dual_complex, load_model, save_model, two_sidedness, ChartSpec, NCModel};
use proptest::prelude::*;

fn charts() -> Vec<(NCModel, ChartSpec)> {
    catalog::all().into_iter().flat_map(|m| m.charts.clone().into_iter().map(move |c| (m.clone(), c))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn f_vanishes_exactly_on_the_divisor(
        which in 0usize..64,
        raw in prop::collection::vec(-0.9f64..0.9, 4),
        mask in 0u8..16,
    ) {
        let all = charts();
        let (_, chart) = &all[which % all.len()];
        let mut x: Vec<f64> = raw[..chart.dim].iter().map(|v| v * chart.domain_radius).collect();
        for (b, i) in chart.divisor_coords().into_iter().enumerate() {
            if mask & (1 << b) != 0 {
                x[i] = 0.0;
            } else if x[i].abs() < 1e-3 {
                x[i] = 1e-3;
            }
        }
        let f: f64 = chart.eval_f(&x).unwrap();
        let k = chart.multiplicity_profile(&x).unwrap().k;
        prop_assert_eq!(f == 0.0, k > 0, "x = {:?}, f = {}", x, f);
    }
}

#[test]
fn dual_complexes_are_downward_closed() {
    for model in catalog::all() {
        let dual = build_dual_complex(&model).unwrap();
        assert!(dual.is_downward_closed(), "{}", model.name);
        for s in &dual.simplices {
            assert_eq!(s.depth, s.components.len(), "{}", model.name);
            for c in &s.components {
                let mut face: BTreeSet<_> = s.components.clone();
                face.remove(c);
                assert!(face.is_empty() || dual.contains(&face), "{}: face {face:?} missing", model.name);
            }
        }
    }
}

#[test]
fn file_format_round_trip_is_stable() {
    for name in catalog::names() {
        let once = save_model(&load_model(catalog::document(name).unwrap()).unwrap());
        let twice = save_model(&load_model(&once).unwrap());
        assert_eq!(once, twice, "{name}");
    }
}

#[test]
fn sidedness_ignores_redundant_transitions() {
    for model in catalog::all().into_iter().filter(|m| !m.transitions.is_empty()) {
        let mut padded = model.clone();
        for t in &model.transitions {
            padded.transitions.push(t.clone());
        }
        for c in &model.components {
            assert_eq!(
                two_sidedness(&model, &c.id).unwrap(),
                two_sidedness(&padded, &c.id).unwrap(),
                "{} / {}",
                model.name,
                c.id
            );
        }
    }
}
