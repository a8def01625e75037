use moufang::autiso::{are_isomorphic, automorphism_group, fingerprint};
use moufang::cocycles::{build_spaces, cocycle_from_extension, Cocycle};
use moufang::codeloops::{derived_form, derived_form_direct, realize_code_loop, transform_triple, triple_of_loop, BooleanMap, PolarTriple};
use moufang::extend::{central_extension, fiber, ExtensionSpec};
use moufang::LoopTable;
use proptest::prelude::*;

fn small_groups() -> Vec<LoopTable> {
    vec![
        LoopTable::cyclic(8),
        LoopTable::elementary_abelian(2, 3),
        LoopTable::cyclic(4).direct_product(&LoopTable::cyclic(2)),
        LoopTable::cyclic(9),
        LoopTable::elementary_abelian(3, 2),
    ]
}

fn random_perm(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut s = seed | 1;
    for i in (2..n).rev() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        perm.swap(i, 1 + (s as usize) % i);
    }
    perm
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extension_extraction_round_trip(which in 0usize..5, coords in prop::collection::vec(0u8..3, 64)) {
        let k = &small_groups()[which];
        let p = if k.order() == 9 { 3 } else { 2 };
        let s = build_spaces(k, p).unwrap();
        let c: Vec<u8> = coords.iter().take(s.mcoc.dim()).map(|c| c % p).collect();
        let f = Cocycle::from_vector(k.order(), s.mcoc.combine(&c)).unwrap();
        let q = central_extension(&ExtensionSpec::new(k.clone(), p, f.clone()).unwrap()).unwrap();
        prop_assert!(q.is_moufang());
        let (k2, f2) = cocycle_from_extension(&q, &fiber(&q, p)).unwrap();
        prop_assert_eq!(&k2, k);
        prop_assert_eq!(f2, f);
    }

    #[test]
    fn relabelling_preserves_isomorphism_class(which in 0usize..5, seed in any::<u64>()) {
        let k = &small_groups()[which];
        let perm = random_perm(k.order(), seed);
        let k2 = k.relabel(&perm).unwrap();
        prop_assert_eq!(fingerprint(k), fingerprint(&k2));
        let phi = are_isomorphic(k, &k2).unwrap();
        for x in k.elements() {
            for y in k.elements() {
                prop_assert_eq!(phi[k.mul(x, y)], k2.mul(phi[x], phi[y]));
            }
        }
        prop_assert_eq!(automorphism_group(k).order(), automorphism_group(&k2).order());
    }

    #[test]
    fn derived_forms_agree(d in 1usize..=4, bits in any::<u16>(), args in prop::collection::vec(0usize..16, 2..=4)) {
        let alpha = BooleanMap::from_fn(d, |x| if x == 0 { 0 } else { ((bits >> x) & 1) as u8 }).unwrap();
        let args: Vec<usize> = args.iter().map(|a| a & ((1 << d) - 1)).collect();
        prop_assert_eq!(derived_form(&alpha, args.len()).eval(&args), derived_form_direct(&alpha, &args));
    }

    #[test]
    fn realized_code_loops_carry_their_triple(bits in any::<u64>(), rows in prop::collection::vec(0usize..16, 4)) {
        let d = 4;
        let len = PolarTriple::zero(d).unwrap().bit_len();
        let t = PolarTriple::unpack(d, bits & ((1u64 << len) - 1)).unwrap();
        let q = realize_code_loop(&t).unwrap();
        prop_assert!(q.is_moufang());
        let z = q.subloop_closure([1]);
        let t2 = triple_of_loop(&q, &z).unwrap();
        prop_assert!(are_isomorphic(&q, &realize_code_loop(&t2).unwrap()).is_some());
        if let Ok(t3) = transform_triple(&t, &rows) {
            let q3 = realize_code_loop(&t3).unwrap();
            prop_assert!(are_isomorphic(&q, &q3).is_some());
        }
    }
}
