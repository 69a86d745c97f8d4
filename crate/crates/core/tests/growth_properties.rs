use pingpong_core::flag::attracting_flag;
use pingpong_core::growth::{
    busemann_cartan_constant, coarse_subadditivity, default_bin_width, estimate_delta, generator_sum,
    growth_indicator_estimate, poincare_partial_sum, property_three_check, samples_of, subadditivity_defect, Sample,
    WindowPolicy,
};
use pingpong_core::io::{generators_to_json, parse_generators, parse_record_line, records_to_jsonl};
use pingpong_core::orbit::{enumerate_ball, Cone, EnumerateOptions};
use pingpong_core::{CartanVector, GroupElement, RationalMatrix};
use proptest::prelude::*;

fn schottky() -> Vec<GroupElement> {
    let a = RationalMatrix::from_integers(&[&[125 * 125, 0], &[0, 1]], 125).unwrap();
    let rot = RationalMatrix::from_integers(&[&[12, -5], &[5, 12]], 13).unwrap();
    let b = rot.mul(&a).mul(&rot.inverse().unwrap());
    vec![GroupElement::from_exact(a).unwrap(), GroupElement::from_exact(b).unwrap()]
}

fn free_model(levels: usize, l: f64) -> Vec<Sample> {
    let mut out = Vec::new();
    for k in 1..=levels {
        out.extend(std::iter::repeat_n(Sample { length: k, norm: k as f64 * l }, 1 << k));
    }
    out
}

#[test]
fn free_counting_model_recovers_log2_over_l() {
    for l in [2.0, 5.0, 9.0] {
        let samples = free_model(20, l);
        let rep = estimate_delta(&samples, default_bin_width(&samples), &WindowPolicy::default()).unwrap();
        let oracle = 2f64.ln() / l;
        assert!((rep.delta_hat / oracle - 1.0).abs() <= 0.02, "L = {l}: {} vs {oracle}", rep.delta_hat);
    }
}

#[test]
fn growth_indicator_stays_below_delta() {
    let gens = parse_generators("[[[1, 2], [0, 1]], [[1, 0], [2, 1]]]").unwrap();
    let recs = enumerate_ball(&gens, 10, &EnumerateOptions::default()).unwrap();
    let samples = samples_of(&recs);
    let bin = default_bin_width(&samples);
    let window = WindowPolicy::default();
    let delta = estimate_delta(&samples, bin, &window).unwrap();
    let with_kappa: Vec<(Sample, CartanVector)> = recs.iter().map(|r| (Sample::from(r), r.kappa.clone())).collect();
    let axis = Cone::chamber_cover(2).axis().coords().to_vec();
    let curve = growth_indicator_estimate(&with_kappa, &axis, &[0.1, 0.5, 1.0], bin, &window).unwrap();
    for (angle, c) in curve {
        if let Some(tau) = c.tau_hat {
            assert!(tau <= delta.delta_hat + 0.05, "angle {angle}: {tau} > {}", delta.delta_hat);
        }
    }
}

#[test]
fn generator_sum_implies_property_three() {
    let gens = schottky();
    let norms: Vec<f64> = gens.iter().map(|g| pingpong_core::cartan::cartan_projection(g).unwrap().norm()).collect();
    let delta = 0.05;
    assert!(generator_sum(&norms, delta) >= 1.0);
    let p = property_three_check(&gens, delta, 5).unwrap();
    assert_eq!(p.words_checked, 63);
    assert_eq!(p.violations, 0);
}

#[test]
fn defects_are_bounded_by_three_busemann_constants() {
    let gens = schottky();
    let x = attracting_flag(&gens[0], 1e-6).unwrap();
    let sub = coarse_subadditivity(&gens, 3, &x).unwrap();
    assert!(sub.holds);
    assert!(sub.max_defect <= 3.0 * sub.busemann_cartan);
    let words: Vec<GroupElement> = enumerate_ball(&gens, 3, &EnumerateOptions::default())
        .unwrap()
        .into_iter()
        .map(|r| r.matrix)
        .collect();
    let c = busemann_cartan_constant(&words, &x).unwrap();
    let stats = subadditivity_defect(&words, 10_000, 0).unwrap();
    assert!(stats.max_defect <= 3.0 * c + 1e-9);
}

#[test]
fn records_survive_jsonl() {
    let gens = schottky();
    let recs = enumerate_ball(&gens, 3, &EnumerateOptions::default()).unwrap();
    let text = records_to_jsonl(&recs);
    for (line, r) in text.lines().zip(&recs) {
        let back = parse_record_line(line).unwrap();
        assert_eq!(back.word, r.word);
        assert_eq!(back.kappa, r.kappa.coords());
        let g = back.matrix.to_computed_element().unwrap();
        assert_eq!(g.exact(), r.matrix.exact());
    }
    let again = parse_generators(&generators_to_json(&gens)).unwrap();
    assert_eq!(again[1].exact(), gens[1].exact());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poincare_sum_decreases_in_s(norms in prop::collection::vec(0.0f64..50.0, 1..200), s in 0.0f64..2.0, ds in 0.0f64..1.0) {
        prop_assert!(poincare_partial_sum(&norms, s + ds) <= poincare_partial_sum(&norms, s) * (1.0 + 1e-12));
    }

    #[test]
    fn free_model_any_length(l in 1.0f64..10.0) {
        let samples = free_model(18, l);
        let rep = estimate_delta(&samples, default_bin_width(&samples), &WindowPolicy::default()).unwrap();
        prop_assert!((rep.delta_hat * l / 2f64.ln() - 1.0).abs() <= 0.05);
    }
}
