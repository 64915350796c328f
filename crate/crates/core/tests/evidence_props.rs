mod common;

use common::brute_combine;
use initrack::evidence::{combine_all, MassFunction, Role};
use initrack::Error;
use proptest::prelude::*;

fn mass() -> impl Strategy<Value = MassFunction> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        MassFunction::new(lo, hi - lo, 1.0 - hi).unwrap()
    })
}

fn triple(m: &MassFunction) -> [f64; 3] {
    [m.speaker(), m.hearer(), m.theta()]
}

fn close(a: &MassFunction, b: &MassFunction, tol: f64) -> bool {
    triple(a)
        .iter()
        .zip(triple(b))
        .all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn combination_is_normalized(a in mass(), b in mass()) {
        prop_assume!(a.conflict(&b) < 1.0);
        let c = a.combine(&b).unwrap();
        let t = triple(&c);
        prop_assert!(t.iter().all(|&x| x >= 0.0));
        prop_assert!((t.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn vacuous_is_identity(a in mass()) {
        prop_assert!(close(&a.combine(&MassFunction::vacuous()).unwrap(), &a, 1e-12));
        prop_assert!(close(&MassFunction::vacuous().combine(&a).unwrap(), &a, 1e-12));
    }

    #[test]
    fn combination_commutes(a in mass(), b in mass()) {
        prop_assume!(a.conflict(&b) < 1.0);
        prop_assert!(close(&a.combine(&b).unwrap(), &b.combine(&a).unwrap(), 1e-12));
    }

    #[test]
    fn combination_associates(a in mass(), b in mass(), c in mass()) {
        let (Ok(ab), Ok(bc)) = (a.combine(&b), b.combine(&c)) else { return Ok(()) };
        let (Ok(left), Ok(right)) = (ab.combine(&c), a.combine(&bc)) else { return Ok(()) };
        prop_assert!(close(&left, &right, 1e-9));
    }

    #[test]
    fn matches_focal_set_enumeration(a in mass(), b in mass()) {
        match (a.combine(&b), brute_combine(&triple(&a), &triple(&b))) {
            (Ok(c), Some(expected)) => {
                for (x, y) in triple(&c).iter().zip(expected) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
            (Err(Error::TotalConflict), None) => {}
            (got, want) => prop_assert!(false, "{got:?} vs {want:?}"),
        }
    }

    #[test]
    fn fold_matches_pairwise(ms in prop::collection::vec(mass(), 1..6)) {
        let mut acc = Some(ms[0]);
        for m in &ms[1..] {
            acc = acc.and_then(|a| a.combine(m).ok());
        }
        match (combine_all(&ms), acc) {
            (Ok(x), Some(y)) => prop_assert_eq!(x, y),
            (Err(_), None) => {}
            (x, y) => prop_assert!(false, "{x:?} vs {y:?}"),
        }
    }

    #[test]
    fn swapping_is_an_involution(a in mass()) {
        prop_assert_eq!(a.swapped().swapped(), a);
        prop_assert_eq!(a.swapped().speaker(), a.hearer());
    }

    #[test]
    fn equal_singletons_favor_the_speaker(x in 0.0f64..=0.5) {
        let m = MassFunction::new(x, x, 1.0 - 2.0 * x).unwrap();
        prop_assert_eq!(m.predicted_holder(), Role::Speaker);
    }
}

#[test]
fn opposing_dogmatic_masses_conflict_totally() {
    let s = MassFunction::bayesian(1.0).unwrap();
    let h = MassFunction::bayesian(0.0).unwrap();
    assert!(matches!(s.combine(&h), Err(Error::TotalConflict)));
    assert!(combine_all(&[]).is_err());
}
