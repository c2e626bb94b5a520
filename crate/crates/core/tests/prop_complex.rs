use std::f64::consts::TAU;

use ncretract::catalog;
use ncretract::complexretract::{
    alpha_fibre_components, angle_distance, complex_retract, f_prime, milnor_fibration, monodromy, polar_blowup,
    polar_down, LiftedAngle, StratumContribution,
};
use ncretract::flowretract::Mode;
use ncretract::ncmodel::ChartSpec;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_charts() -> Vec<ChartSpec> {
    catalog::all()
        .into_iter()
        .filter(|m| m.is_complex())
        .flat_map(|m| m.charts.clone())
        .filter(|c| !c.divisor_coords().is_empty())
        .collect()
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn point(chart: &ChartSpec, re: &[f64], im: &[f64]) -> Vec<Complex64> {
    (0..chart.dim).map(|i| Complex64::new(re[i], im[i]) * chart.domain_radius * 0.6).collect()
}

fn inputs() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (0usize..64, prop::collection::vec(-1.0f64..1.0, 4), prop::collection::vec(-1.0f64..1.0, 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn polar_coordinates_recover_the_point((which, re, im) in inputs()) {
        let all = complex_charts();
        let chart = &all[which % all.len()];
        let z = point(chart, &re, &im);
        let p = polar_blowup(chart, &z).unwrap();
        for (k, &i) in p.divisor.iter().enumerate() {
            prop_assert!(p.rho[k] >= 0.0);
            prop_assert!((0.0..TAU).contains(&p.alpha[k]));
            prop_assert!((Complex64::from_polar(p.rho[k], p.alpha[k]) - z[i]).norm() <= 1e-15 * chart.domain_radius.max(1.0));
        }
        prop_assert_eq!(polar_down(&p).len(), z.len());
    }

    /// The band value of `f'`, read as a complex number, is `f` downstairs.
    #[test]
    fn blow_up_square_commutes((which, re, im) in inputs()) {
        let all = complex_charts();
        let chart = &all[which % all.len()];
        let z = point(chart, &re, &im);
        let p = polar_blowup(chart, &z).unwrap();
        if p.rho.contains(&0.0) {
            return Ok(());
        }
        let b = f_prime(chart, &p);
        let f = chart.eval_f(&polar_down(&p)).unwrap();
        prop_assert!((Complex64::from_polar(b.rho, b.alpha) - f).norm() <= 1e-10);
    }

    #[test]
    fn retraction_keeps_the_angle((which, re, im) in inputs()) {
        let all = complex_charts();
        let chart = &all[which % all.len()];
        let z = point(chart, &re, &im);
        let p = polar_blowup(chart, &z).unwrap();
        if chart.eval_f(&z).unwrap().norm() <= chart.zero_tol() {
            return Ok(());
        }
        let q = complex_retract(chart, &p, Mode::ClosedForm).unwrap();
        prop_assert!(angle_distance(f_prime(chart, &q).alpha, f_prime(chart, &p).alpha) <= 1e-8);
        prop_assert!(q.on_boundary());
    }

    #[test]
    fn lifted_angles_reduce_to_the_angle(v in -100.0f64..100.0, n in -5i64..5) {
        let l = LiftedAngle::from_value(v);
        prop_assert!(angle_distance(l.angle(), v.rem_euclid(TAU)) <= 1e-12);
        prop_assert!((l.value() - v).abs() <= 1e-12);
        prop_assert_eq!(l.shifted(n).winding, l.winding + n);
        prop_assert_eq!(l.shifted(n).angle(), l.angle());
    }

    #[test]
    fn component_count_is_the_gcd(a in prop::collection::vec(1u32..=12, 1..=4)) {
        let g = a.iter().copied().fold(0, gcd);
        prop_assert_eq!(alpha_fibre_components(&a), g as usize);
    }

    /// The deck shift permutes the components cyclically, so its order
    /// divides their number.
    #[test]
    fn monodromy_is_a_cycle_of_the_components(a in prop::collection::vec(1u32..=12, 1..=3)) {
        let n = alpha_fibre_components(&a);
        let perm = monodromy(&a);
        prop_assert_eq!(perm.len(), n);
        let mut seen = vec![false; n];
        let mut i = 0;
        for _ in 0..n {
            prop_assert!(!seen[i]);
            seen[i] = true;
            i = perm[i];
        }
        prop_assert_eq!(i, 0);
    }
}

/// Splitting a stratum into pieces whose Euler characteristics add up
/// leaves the total unchanged.
#[test]
fn euler_characteristic_is_additive_under_refinement() {
    let m = milnor_fibration(&catalog::load("cusp").unwrap(), "origin").unwrap();
    assert_eq!(m.chi, m.strata.iter().map(StratumContribution::contribution).sum::<i64>());
    let refined: Vec<StratumContribution> = m
        .strata
        .iter()
        .flat_map(|s| {
            let mut point = s.clone();
            point.chi_open = 1;
            let mut rest = s.clone();
            rest.chi_open = s.chi_open - 1;
            [point, rest]
        })
        .collect();
    assert_eq!(refined.iter().map(StratumContribution::contribution).sum::<i64>(), m.chi);
    assert_eq!(m.chi, -1);
}
