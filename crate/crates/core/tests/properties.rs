//! Randomized invariants over the core types.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sbt_core::search::{bfs_distance_oracle, exact_distance};
use sbt_core::{Permutation, Transposition};

fn transposition(n: usize) -> impl Strategy<Value = Transposition> {
    (1..n - 1).prop_flat_map(move |i| {
        ((i + 2)..=n).prop_flat_map(move |k| {
            ((i + 1)..k).prop_map(move |j| Transposition::new(i, j, k).unwrap())
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut images: Vec<usize> = (1..n).collect();
        images.shuffle(&mut rng);
        let mut full = vec![0];
        full.extend(images);
        full.push(n);
        Permutation::new(full).unwrap()
    })
}

proptest! {
    #[test]
    fn inverting_a_transposition_undoes_it(p in permutation(9), t in transposition(9)) {
        let moved = p.apply(&t).unwrap();
        prop_assert_eq!(moved.apply(&t.invert()).unwrap(), p.clone());
        prop_assert_eq!(t.invert().invert(), t);
    }

    #[test]
    fn image_and_preimage_are_inverse_on_positions(t in transposition(12), x in 0usize..=12) {
        prop_assert_eq!(t.preimage(t.image(x)), x);
        prop_assert_eq!(t.image(t.preimage(x)), x);
    }

    #[test]
    fn permutation_text_roundtrip(p in permutation(10)) {
        let text = p.to_string();
        prop_assert_eq!(text.parse::<Permutation>().unwrap(), p);
    }

    #[test]
    fn one_move_changes_breakpoints_by_at_most_three(p in permutation(10), t in transposition(10)) {
        let before = p.breakpoints().count() as i64;
        let after = p.apply(&t).unwrap().breakpoints().count() as i64;
        prop_assert!((before - after).abs() <= 3);
    }

    #[test]
    fn distance_meets_the_breakpoint_bound(p in permutation(8)) {
        let d = exact_distance(&p, 16).unwrap();
        prop_assert!(d >= p.breakpoint_lower_bound());
        prop_assert_eq!(d, bfs_distance_oracle(&p).unwrap());
    }

    #[test]
    fn every_reported_move_removes_three_breakpoints(p in permutation(10)) {
        let before = p.breakpoints().count();
        for t in p.three_bp_moves() {
            let after = p.apply(&t).unwrap().breakpoints().count();
            prop_assert_eq!(after, before - 3);
        }
    }
}
