use permtwist::fermion::{self, eigenprojection, g_action, FermionVector};
use permtwist::fseries::{Coeff, Series};
use permtwist::twistor::{DeltaOp, TwistedModule};
use proptest::prelude::*;

fn state(max_w2: i64) -> impl Strategy<Value = Vec<i64>> {
    let basis = fermion::basis(max_w2);
    (0..basis.len()).prop_map(move |i| basis[i].clone())
}

fn tensor(k: u32, slots: &[Vec<i64>]) -> FermionVector {
    FermionVector::basis_vector(k, slots.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cycle_has_order_k(k in 1u32..=4, slots in prop::collection::vec(state(4), 4)) {
        let w = tensor(k, &slots[..k as usize]);
        prop_assert_eq!(g_action(&w, k as i64), w.clone());
        if k > 1 && slots[0] != slots[1] {
            prop_assert_ne!(g_action(&w, 1), w);
        }
    }

    #[test]
    fn eigencomponents_sum_back(k in 1u32..=3, slots in prop::collection::vec(state(3), 3)) {
        let w = tensor(k, &slots[..k as usize]);
        let mut total = FermionVector::zero(k);
        for j in 0..k as i64 {
            let p = eigenprojection(&w, j);
            prop_assert_eq!(eigenprojection(&p, j), p.clone());
            total.add_assign(&p);
        }
        prop_assert_eq!(total, w);
    }

    #[test]
    fn delta_is_invertible(k in prop::sample::select(vec![2u32, 3, 5]), s in state(6)) {
        let d = DeltaOp::new(k);
        let v = FermionVector::single(k, s);
        let back = d.apply_series(&d.apply(&v, false), true);
        prop_assert_eq!(back, Series::term(&[], false, v));
    }

    #[test]
    fn lg0_is_diagonal(k in prop::sample::select(vec![1u32, 3, 5]), s in state(8)) {
        let tm = TwistedModule::new(k).unwrap();
        let w2 = fermion::weight2(&s);
        let w = FermionVector::single(k, s);
        prop_assert_eq!(tm.lg(0, &w), w.scaled_rat(&tm.expected_lg0(w2)));
    }
}
