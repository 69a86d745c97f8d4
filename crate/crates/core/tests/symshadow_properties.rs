use pingpong_core::cartan::symmetric_space_distance;
use pingpong_core::flag::cartan_flags;
use pingpong_core::contraction::SamplingBudget;
use pingpong_core::sampling::{haar_flag, perturb_flag, random_sl, seeded_rng};
use pingpong_core::symshadow::{
    calibrate_radius, flag_shadow_in_sym_shadow, shadow_observation_1, shadow_observation_2, sym_shadow_membership,
    SymError, SymShadowQuery,
};
use pingpong_core::{Flag, GroupElement, RationalMatrix};
use proptest::prelude::*;

fn achieved(base: &GroupElement, target: &GroupElement, f: &Flag) -> f64 {
    let q = SymShadowQuery::new(base.clone(), target.clone(), 1.0).unwrap();
    sym_shadow_membership(&q, f).unwrap().achieved
}

fn schottky() -> Vec<GroupElement> {
    let a = RationalMatrix::from_integers(&[&[125 * 125, 0], &[0, 1]], 125).unwrap();
    let rot = RationalMatrix::from_integers(&[&[12, -5], &[5, 12]], 13).unwrap();
    let b = rot.mul(&a).mul(&rot.inverse().unwrap());
    vec![GroupElement::from_exact(a).unwrap(), GroupElement::from_exact(b).unwrap()]
}

#[test]
fn own_flag_is_a_member() {
    let g = GroupElement::exp_diagonal(&[4.0, 1.0, -5.0]);
    let q = SymShadowQuery::from_origin(&g, 1e-3).unwrap();
    assert!(sym_shadow_membership(&q, &Flag::standard(3)).unwrap().member);
    let obs = shadow_observation_1(&Flag::standard(3), &g, 1e-3).unwrap();
    assert!(obs.holds);
}

#[test]
fn observation_one_needs_membership() {
    let g = GroupElement::exp_diagonal(&[4.0, -4.0]);
    let far = Flag::from_direction(&[0.0, 1.0]).unwrap();
    assert!(matches!(shadow_observation_1(&far, &g, 0.1), Err(SymError::MembershipUnverified)));
}

#[test]
fn far_apart_shadows_do_not_meet() {
    let gens = schottky();
    let obs = shadow_observation_2(&gens[0], &gens[1], 1.0, 500, 0).unwrap();
    assert!(!obs.intersects);
    assert!(obs.distance_bound_holds);
    let g = GroupElement::exp_diagonal(&[3.0, -3.0]);
    let obs = shadow_observation_2(&g, &g.pow(2), 1.0, 200, 0).unwrap();
    assert!(obs.intersects && obs.distance_bound_holds);
}

#[test]
fn calibrated_radius_covers_the_flag_shadow() {
    let gens = schottky();
    let budget = SamplingBudget::default();
    let row = calibrate_radius(&gens, 0.1, 64, &budget).unwrap();
    assert!(row.r_min_zero_violation > 0.0);
    for g in &gens {
        let rep = flag_shadow_in_sym_shadow(g, 0.1, row.r_min_zero_violation, 64, &budget).unwrap();
        assert!(rep.holds, "{} violations", rep.violations);
    }
}

#[test]
fn nearby_viewpoints_sandwich_membership() {
    let target = GroupElement::exp_diagonal(&[3.0, 0.5, -3.5]);
    let mut rng = seeded_rng(5, 0);
    let own = cartan_flags(&target).0;
    for n in [10usize, 20, 40] {
        let base = GroupElement::exp_diagonal(&[1.0 / n as f64, 0.0, -1.0 / n as f64]);
        let shift = symmetric_space_distance(&GroupElement::identity(3), &base).unwrap();
        assert!(shift < 0.15);
        for _ in 0..20 {
            let f = perturb_flag(&own, 0.3, &mut rng);
            let at_origin = achieved(&GroupElement::identity(3), &target, &f);
            let at_base = achieved(&base, &target, &f);
            // Rays toward the same flag from nearby points stay within their distance.
            assert!(at_origin <= at_base + shift + 1e-3, "{at_origin} vs {at_base} + {shift}");
            assert!(at_base <= at_origin + shift + 1e-3, "{at_base} vs {at_origin} + {shift}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn membership_is_monotone_in_radius(seed: u64, r in 0.05f64..3.0, extra in 0.0f64..2.0) {
        let mut rng = seeded_rng(seed, 21);
        let g = random_sl(3, 1e3, &mut rng);
        let f = perturb_flag(&cartan_flags(&g).0, 0.2, &mut rng);
        let small = sym_shadow_membership(&SymShadowQuery::from_origin(&g, r).unwrap(), &f).unwrap();
        let large = sym_shadow_membership(&SymShadowQuery::from_origin(&g, r + extra).unwrap(), &f).unwrap();
        prop_assert!(!small.member || large.member);
    }

    #[test]
    fn membership_is_equivariant(seed: u64) {
        let mut rng = seeded_rng(seed, 22);
        let g = random_sl(2, 1e3, &mut rng);
        let h = random_sl(2, 1e2, &mut rng);
        let f = haar_flag(2, &mut rng);
        let plain = achieved(&GroupElement::identity(2), &g, &f);
        let moved = achieved(&h, &h.mul_float(&g), &f.act(&h));
        prop_assert!((plain - moved).abs() <= 1e-6 * (1.0 + plain), "{} vs {}", plain, moved);
    }
}
