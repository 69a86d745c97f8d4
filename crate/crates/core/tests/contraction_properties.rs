use pingpong_core::contraction::{
    check_contracting, exact_freeness_crosscheck, pingpong_certificate, shadow_inclusion_check, shadow_membership,
    ContractionError, FreenessCertificate, SamplingBudget, Shadow,
};
use pingpong_core::flag::flag_distance;
use pingpong_core::orbit::{enumerate_ball, EnumerateOptions};
use pingpong_core::sampling::seeded_rng;
use pingpong_core::{GroupElement, RationalMatrix};
use proptest::prelude::*;

fn schottky() -> Vec<GroupElement> {
    let a = RationalMatrix::from_integers(&[&[125 * 125, 0], &[0, 1]], 125).unwrap();
    let rot = RationalMatrix::from_integers(&[&[12, -5], &[5, 12]], 13).unwrap();
    let b = rot.mul(&a).mul(&rot.inverse().unwrap());
    vec![GroupElement::from_exact(a).unwrap(), GroupElement::from_exact(b).unwrap()]
}

fn rotated_pair(t: f64, angle: f64) -> Vec<GroupElement> {
    let g = GroupElement::exp_diagonal(&[t, -t]);
    vec![g.clone(), g.conjugate_by(&GroupElement::rotation(angle))]
}

// In ℝP¹, ζ of two lines at angle θ is √(1 − |cos θ|); 6ε-separation and
// 2ε-disjointness at ε = 0.1 leave rotation angles in (11.5°, 39.8°).
#[test]
fn axes_thirty_degrees_apart_pass() {
    let cert = pingpong_certificate(&rotated_pair(5.0, std::f64::consts::FRAC_PI_6), 0.1, &SamplingBudget::default()).unwrap();
    assert!(cert.verdict.passed(), "{:?}", cert.failures);
    assert!((cert.pairwise_separation[0][1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    cert.revalidate().unwrap();
}

#[test]
fn quarter_turn_gives_the_inverse() {
    // r·g·r⁻¹ = g⁻¹ for the quarter turn, so {g, g⁻¹} cannot be free.
    let pair = rotated_pair(5.0, std::f64::consts::FRAC_PI_2);
    let cert = pingpong_certificate(&pair, 0.1, &SamplingBudget::default()).unwrap();
    assert!(!cert.verdict.passed());
    assert!(cert.pairwise_separation[0][1] < 1e-9);
}

#[test]
fn power_pair_fails_disjointness() {
    let g = GroupElement::exp_diagonal(&[5.0, -5.0]);
    let cert = pingpong_certificate(&[g.clone(), g.pow(2)], 0.1, &SamplingBudget::default()).unwrap();
    assert!(!cert.verdict.passed());
    assert!(cert.failures.iter().any(|f| f.starts_with("shadow_disjointness")));
}

#[test]
fn rotation_is_rejected_with_index() {
    let gens = vec![GroupElement::exp_diagonal(&[5.0, -5.0]), GroupElement::rotation(0.7)];
    match pingpong_certificate(&gens, 0.1, &SamplingBudget::default()) {
        Err(ContractionError::NotLoxodromicAt { index }) => assert_eq!(index, 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn exact_crosscheck_counts() {
    let x = exact_freeness_crosscheck(&schottky(), 8).unwrap();
    assert_eq!((x.words, x.collisions), (510, 0));
    let g = schottky()[0].clone();
    let dup = exact_freeness_crosscheck(&[g.clone(), g], 2).unwrap();
    assert!(dup.collisions > 0);
}

#[test]
fn powers_stay_contracting() {
    let budget = SamplingBudget::default();
    for g in schottky().into_iter().chain([GroupElement::exp_diagonal(&[10.0, -10.0])]) {
        assert!(check_contracting(&g, 0.1, &budget).unwrap().passed());
        for k in [2, 3] {
            assert!(check_contracting(&g.pow(k), 0.1, &budget).unwrap().passed(), "power {k}");
        }
    }
}

#[test]
fn product_law_on_words() {
    let eps = 0.1;
    let gens = schottky();
    let budget = SamplingBudget::default();
    let cert = pingpong_certificate(&gens, eps, &budget).unwrap();
    assert!(cert.verdict.passed());
    for w in enumerate_ball(&gens, 4, &EnumerateOptions::default()).unwrap() {
        let c = check_contracting(&w.matrix, 2.0 * eps, &budget).unwrap();
        assert!(c.passed(), "{:?}", w.word);
        assert!(flag_distance(&c.attracting, &cert.per_generator[w.word[0]].attracting) <= eps);
    }
}

#[test]
fn shadows_nest_and_branch() {
    let eps = 0.1;
    let gens = schottky();
    let budget = SamplingBudget::default();
    let words = enumerate_ball(&gens, 2, &EnumerateOptions::default()).unwrap();
    for gamma in &words {
        let mut shadows = Vec::new();
        for (z, zeta) in gens.iter().enumerate() {
            let mut w = gamma.word.clone();
            w.push(z);
            let eta = GroupElement::word(&gens, &w);
            let inc = shadow_inclusion_check(&gamma.matrix, &eta, zeta, eps, &budget).unwrap();
            assert!(inc.holds, "{:?}·{z}: {} probes outside", gamma.word, inc.violations);
            shadows.push(Shadow::new(&eta, 2.0 * eps, &budget).unwrap());
        }
        // Distinct branches: the containing balls are disjoint.
        let (a, b) = (&shadows[0], &shadows[1]);
        assert!(flag_distance(&a.center, &b.center) > a.containment_radius + b.containment_radius);
        let mut rng = seeded_rng(gamma.matrix.fingerprint(), 0);
        for p in a.sample_points(200, &mut rng).unwrap() {
            assert!(shadow_membership(a, &p));
            assert!(!shadow_membership(b, &p));
        }
    }
}

#[test]
fn inflated_epsilon_fails_inclusion() {
    let gens = schottky();
    let budget = SamplingBudget::default();
    let eta = gens[0].mul(&gens[1]);
    match shadow_inclusion_check(&gens[0], &eta, &gens[1], 1.0, &budget) {
        Ok(o) => assert!(!o.holds),
        Err(_) => {}
    }
    assert!(matches!(
        shadow_inclusion_check(&gens[0], &gens[1], &gens[1], 0.1, &budget),
        Err(ContractionError::Precondition(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn separation_condition_is_monotone(t in 1.0f64..8.0, eps in 0.01f64..0.2, seed: u64) {
        let g = GroupElement::exp_diagonal(&[t, -t]);
        let budget = SamplingBudget::with_seed(seed);
        let wide = check_contracting(&g, 2.0 * eps, &budget).unwrap();
        let narrow = check_contracting(&g, eps, &budget).unwrap();
        prop_assert!(wide.margin_a < 0.0 || narrow.margin_a >= 0.0);
        prop_assert!(!wide.passed() || wide.consistent());
    }

    #[test]
    fn certificates_survive_json(t in 3.0f64..8.0, seed: u64) {
        let cert = pingpong_certificate(&rotated_pair(t, std::f64::consts::FRAC_PI_6), 0.1, &SamplingBudget::with_seed(seed)).unwrap();
        let back: FreenessCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        prop_assert!(back.revalidate().is_ok());
        prop_assert_eq!(back.verdict, cert.verdict);
    }
}
