use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strata_core::exec::Mode;
use strata_core::hecke::{
    relations, verify_relation, CaseSetup, Flavor, GenKind, GroupJ, Hecke, HeckeCase, HeckeElt, Verdict,
};

fn algebra(case: HeckeCase, m: i32, flavor: Flavor) -> Hecke {
    let s = CaseSetup::new(case, 3, m).unwrap();
    Hecke::new(GroupJ::new(&s, flavor).unwrap())
}

fn generator(h: &Hecke, name: &str, kind: GenKind) -> HeckeElt {
    let s = &h.gj.setup;
    let g = match kind {
        GenKind::S1 => s.s(1).unwrap(),
        GenKind::S2 => s.s(2).unwrap(),
        GenKind::Zeta(t) => s.zeta(t).unwrap(),
        GenKind::Plain => s.u(s.e_const(s.ctx.sqrt_eps())).unwrap(),
    };
    h.basis(&h.factor(name, kind, &g).unwrap())
}

#[test]
fn stated_case_d_twist_fails_but_spread_form_holds() {
    let s = CaseSetup::new(HeckeCase::D, 3, 2).unwrap();
    for flavor in [Flavor::JPrime, Flavor::J] {
        let h = Hecke::new(GroupJ::new(&s, flavor).unwrap());
        let rels = relations(&s, flavor, 5).unwrap();
        let side = if flavor == Flavor::J { "f" } else { "e" };
        let stated = rels.iter().find(|r| r.id == format!("d.{side}.twist.s2.se")).unwrap();
        let spread = rels.iter().find(|r| r.id == format!("d.{side}.twist.s2.se.spread")).unwrap();
        let a = verify_relation(&h, stated, 5, Mode::Sequential).unwrap();
        let b = verify_relation(&h, spread, 5, Mode::Sequential).unwrap();
        assert_eq!(a.verdict, Verdict::Fail, "{a:?}");
        assert!(a.max_coeff_diff > 0 && a.nonzero_witnesses > 0);
        assert_eq!(b.verdict, Verdict::Pass, "{b:?}");
        assert!(b.nonzero_witnesses > 0);
    }
}

#[test]
fn convolution_is_associative_on_generator_triples() {
    let h = algebra(HeckeCase::C, 1, Flavor::J);
    let s1 = generator(&h, "s1", GenKind::S1);
    let s2 = generator(&h, "s2", GenKind::S2);
    let b = generator(&h, "b", GenKind::Plain);
    for (x, y, z) in [(&s1, &s2, &b), (&s2, &b, &s1), (&s1, &s2, &s1)] {
        let left = h.convolve(&h.convolve(x, y).unwrap(), z).unwrap();
        let right = h.convolve(x, &h.convolve(y, z).unwrap()).unwrap();
        assert!(h.equal(&left, &right).unwrap());
    }
}

#[test]
fn star_reverses_products() {
    for case in [HeckeCase::C, HeckeCase::D] {
        let h = algebra(case, 1, Flavor::J);
        let s1 = generator(&h, "s1", GenKind::S1);
        let s2 = generator(&h, "s2", GenKind::S2);
        let lhs = h.star(&h.convolve(&s1, &s2).unwrap()).unwrap();
        let rhs = h.convolve(&h.star(&s2).unwrap(), &h.star(&s1).unwrap()).unwrap();
        assert!(h.equal(&lhs, &rhs).unwrap(), "{case:?}");
    }
}

#[test]
fn weyl_words_intertwine_psi() {
    for case in [HeckeCase::C, HeckeCase::D] {
        let s = CaseSetup::new(case, 3, 1).unwrap();
        let gj = GroupJ::new(&s, Flavor::J).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let s1 = s.s(1).unwrap();
        let s2 = s.s(2).unwrap();
        for g in [s1, s2, s1 * s2, s2 * s1 * s2] {
            assert!(gj.intertwines(&g, &mut rng, 12).unwrap(), "{case:?}");
        }
    }
}

#[test]
fn parallel_and_sequential_reports_agree() {
    let s = CaseSetup::new(HeckeCase::C, 3, 1).unwrap();
    let h = Hecke::new(GroupJ::new(&s, Flavor::J).unwrap());
    let rels = relations(&s, Flavor::J, 2).unwrap();
    for r in rels.iter().take(4) {
        let a = verify_relation(&h, r, 2, Mode::Sequential).unwrap();
        let b = verify_relation(&h, r, 2, Mode::Auto).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
