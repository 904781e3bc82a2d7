use num_bigint::BigInt;
use num_traits::One;

use quadclass_core::classgroup::Cutoffs;
use quadclass_core::families::{
    self, Certificate, Divisibility, FamilyError, FamilyId, FamilyInstance,
};
use quadclass_core::trinomial::{self, LnOutcome};

fn all_instances() -> Vec<FamilyInstance> {
    generate_all().0
}

fn generate_all() -> (Vec<FamilyInstance>, Vec<FamilyError>) {
    let mut out = Vec::new();
    let mut failed = Vec::new();
    let mut push = |r: Result<FamilyInstance, FamilyError>| match r {
        Ok(i) => out.push(i),
        Err(FamilyError::Param { .. } | FamilyError::Excluded { .. }) => {}
        Err(e @ FamilyError::Certificate { .. }) => failed.push(e),
        Err(e) => panic!("unexpected failure: {e}"),
    };
    for m in 1..=45 {
        for n in 1..=2 {
            for k in [-17, -1, 1, 17, 19, 35, 37] {
                push(families::gen_thm2_1(m, n, k));
            }
        }
    }
    for m in (3..=30).step_by(3) {
        for n in [3, 15, 21, 33] {
            for sign in [1, -1] {
                push(families::gen_thm2_2(m, n, sign));
            }
        }
    }
    for m in [3, 5, 7] {
        for n in 1..=2 {
            for p in [1, 3, 5, 7, 9, 11] {
                for r in [-2, 4] {
                    push(families::gen_thm2_3(m, n, p, r));
                }
            }
        }
    }
    for b in [6, 21, 36, 51, 66, 81] {
        push(families::gen_thm2_4(19, b, 3));
    }
    for a in [1, 7, 13, 19, -5] {
        for b in [3, 9, 15, 21, 27] {
            for n in 2..=3 {
                push(families::gen_thm2_5(a, b, n));
            }
        }
    }
    for m in 1..=99 {
        push(families::gen_thm3_1i(m));
        push(families::gen_thm3_2(m));
    }
    for m in [19, 49] {
        push(families::gen_thm3_1ii(m, 3));
    }
    (out, failed)
}

#[test]
fn only_degenerate_parameters_fail_certification() {
    // p = 1, m = 3, r = -2 gives raw_d = -25, so the field is Q(i) with h = 1
    let (_, failed) = generate_all();
    assert_eq!(failed.len(), 2);
    for e in failed {
        assert!(
            matches!(
                e,
                FamilyError::Certificate {
                    family: FamilyId::Thm2_3,
                    ..
                }
            ),
            "{e}"
        );
    }
    for n in 1..=2 {
        assert!(families::gen_thm2_3(3, n, 1, -2).is_err());
        let h = quadclass_core::classgroup::class_number(&BigInt::from(-25))
            .unwrap()
            .h;
        assert_eq!(h, 1);
    }
}

#[test]
fn three_divides_every_class_number_in_range() {
    let cutoffs = Cutoffs::default();
    let mut checked = 0;
    for inst in all_instances() {
        match families::verify_divisibility(&inst, &cutoffs).unwrap() {
            Divisibility::Checked { h, divisible } => {
                assert!(
                    divisible,
                    "{:?} {:?}: h({}) = {h}",
                    inst.id, inst.params, inst.d
                );
                checked += 1;
            }
            Divisibility::Skipped { .. } => {}
        }
    }
    assert!(checked > 300, "only {checked} instances verified");
}

#[test]
fn kishi_certificates_match_the_proofs() {
    for inst in all_instances() {
        let Certificate::Kishi(c) = &inst.certificate else {
            continue;
        };
        assert!(c.gcd_norm_trace.is_one());
        assert_eq!(c.ln, LnOutcome::NotTotallyRamified);
        assert!(c.trinomial.is_irreducible_q());
        // recompute independently of the stored outcome
        assert_eq!(
            trinomial::ln_totally_ramified(&c.trinomial.a, &c.trinomial.b).unwrap(),
            LnOutcome::NotTotallyRamified
        );
    }
}

#[test]
fn km_certificates_carry_exact_discriminant_multiples() {
    for inst in all_instances() {
        let Certificate::KishiMiyake(c) = &inst.certificate else {
            continue;
        };
        let expected = match inst.id {
            FamilyId::Thm3_1I => 9,
            FamilyId::Thm3_1II => 144,
            other => panic!("unexpected family {other}"),
        };
        assert_eq!(c.disc_multiplier, expected);
        assert_eq!(c.report.disc, &inst.raw_d * expected);
        assert!(c.report.passes());
    }
}

#[test]
fn instance_d_is_kernel_of_raw_d() {
    for inst in all_instances() {
        let (d, _) = quadclass_core::arith::squarefree_part(&inst.raw_d).unwrap();
        assert_eq!(inst.d, d);
        assert_ne!(inst.d, BigInt::one());
        assert_ne!(inst.d, BigInt::from(-3));
    }
}

#[test]
fn generators_are_deterministic() {
    let a = all_instances();
    let b = all_instances();
    assert_eq!(a, b);
}

#[test]
fn thm2_2_rejects_even_m() {
    // m = 6, n = 3 gives d = -7 with h = 1; the trinomial X^3 - 3X - 110 has the root 5
    assert!(matches!(
        families::gen_thm2_2(6, 3, 1),
        Err(FamilyError::Param {
            condition: "m odd",
            ..
        })
    ));
}

#[test]
fn thm2_2_minus_sign_at_smallest_n_stays_negative() {
    // n = 3 is the smallest admissible n; both signs give imaginary fields
    for m in (3..=30).step_by(6) {
        for sign in [1, -1] {
            let i = families::gen_thm2_2(m, 3, sign).unwrap();
            assert!(i.raw_d < BigInt::from(0));
        }
    }
}
