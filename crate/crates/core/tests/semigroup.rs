use num_traits::Zero;
use proptest::prelude::*;
use shiftgame::analysis::xor_convolution;
use shiftgame::rational::{int, ratio};
use shiftgame::semigroup::{
    compose, cylinder_count, cylinders, label_count, measure, sample_cylinder, shift, Cylinder, Generator, Word,
};
use shiftgame::Rational;

fn cylinder(max_depth: u32) -> impl Strategy<Value = Cylinder> {
    (0..=max_depth).prop_flat_map(|d| {
        (Just(d), 0..cylinder_count(d).unwrap()).prop_map(|(d, code)| Cylinder::new(d, code).unwrap())
    })
}

fn words(max_len: u32) -> Vec<Word> {
    (0..(1u64 << (max_len + 1)) - 1).map(Word::from_index).collect()
}

proptest! {
    #[test]
    fn shift_reads_labels_through_the_generator(c in cylinder(5), g in prop_oneof![Just(Generator::T1), Just(Generator::T2)]) {
        prop_assume!(c.depth() > 0);
        let s = shift(&c, g).unwrap();
        prop_assert_eq!(s.depth(), c.depth() - 1);
        for w in words(s.depth()) {
            prop_assert_eq!(s.label_at(&w), c.label_at(&w.prepend(g)));
        }
    }

    #[test]
    fn compose_inverts_the_shifts(a in cylinder(4), seed in any::<u64>(), e in 0u8..2) {
        let b = sample_cylinder(a.depth(), seed).unwrap();
        let t = compose(e, &a, &b).unwrap();
        prop_assert_eq!(t.e_label(), e);
        prop_assert_eq!(t.shift(Generator::T1).unwrap(), a);
        prop_assert_eq!(t.shift(Generator::T2).unwrap(), b);
        prop_assert_eq!(compose(t.e_label(), &t.shift(Generator::T1).unwrap(), &t.shift(Generator::T2).unwrap()).unwrap(), t);
    }

    #[test]
    fn truncation_commutes_with_shift(c in cylinder(5), k in 0u32..5) {
        prop_assume!(c.depth() > 0 && k < c.depth());
        for g in Generator::ALL {
            let lhs = shift(&c.truncate(k + 1).unwrap(), g).unwrap();
            let rhs = shift(&c, g).unwrap().truncate(k).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn labels_round_trip(c in cylinder(5)) {
        prop_assert_eq!(Cylinder::from_labels(&c.labels()).unwrap(), c);
        prop_assert_eq!(c.labels().len() as u32, label_count(c.depth()));
    }

    #[test]
    fn words_index_round_trip(index in 0u64..4096) {
        let w = Word::from_index(index);
        prop_assert_eq!(w.index(), index);
        prop_assert_eq!(Word::new(w.letters().to_vec()), w);
    }

    #[test]
    fn xor_convolution_matches_four_outcomes(a in 0i64..=500, b in 0i64..=500, da in 1i64..=1000, db in 1i64..=1000) {
        let p = ratio(a.min(da), 2 * da);
        let q = ratio(b.min(db), 2 * db);
        // P(colour 1) = p and q; XOR is 1 on (1,0) and (0,1)
        let one = int(1);
        let brute = &p * (&one - &q) + (&one - &p) * &q;
        prop_assert_eq!(xor_convolution(&p, &q).unwrap(), brute);
    }
}

#[test]
fn measure_is_a_probability_at_every_depth() {
    for depth in 0..=3 {
        let total = cylinders(depth)
            .unwrap()
            .fold(Rational::zero(), |acc, c| acc + measure(&c).to_rational());
        assert_eq!(total, int(1), "depth {depth}");
    }
}

#[test]
fn shifts_preserve_measure() {
    // each depth-(n-1) cylinder has the same number of preimages under T_g
    for depth in 1..=3 {
        for g in Generator::ALL {
            let mut hits = vec![0u64; cylinder_count(depth - 1).unwrap() as usize];
            for c in cylinders(depth).unwrap() {
                hits[shift(&c, g).unwrap().code() as usize] += 1;
            }
            let expected = cylinder_count(depth).unwrap() / cylinder_count(depth - 1).unwrap();
            assert!(hits.iter().all(|&h| h == expected), "depth {depth} {g:?}");
        }
    }
}

#[test]
fn depth_limits_are_reported() {
    assert!(cylinder_count(6).is_err());
    assert!(Cylinder::new(0, 2).is_err());
    assert!(shift(&Cylinder::new(0, 1).unwrap(), Generator::T1).is_err());
    let a = Cylinder::new(0, 0).unwrap();
    let b = Cylinder::new(1, 0).unwrap();
    assert!(compose(0, &a, &b).is_err());
}
