use std::collections::HashSet;

use mofs_core::constructions::{complete_from_hadamard, hadamard};
use mofs_core::data;
use mofs_core::fsq::{are_isomorphic, verify_mofs, write_fsq, MofsSet};
use mofs_core::trades::{
    basic_trade_cells, basic_trade_conditions, disjoint_trade_family, generate_variants,
    intercalate_trades, is_trade, switch_trade, validate_basic_trade, Cell,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn federer(n: usize) -> MofsSet {
    complete_from_hadamard(&hadamard(n).unwrap()).unwrap()
}

fn one_based(cells: &[(usize, usize)]) -> Vec<Cell> {
    cells.iter().map(|&(r, c)| (r - 1, c - 1)).collect()
}

#[test]
fn shaded_trades_of_a_seventeen_set() {
    let s = data::load("17-mofs-6-01").unwrap();
    let light = one_based(&[(1, 5), (1, 6), (3, 3), (3, 6), (5, 3), (5, 5)]);
    let dark = one_based(&[(1, 2), (1, 4), (3, 4), (3, 5), (6, 2), (6, 5)]);
    let t = validate_basic_trade(&s, &light).unwrap();
    assert_eq!(t.changed_squares(), (0..6).collect::<Vec<_>>());
    let a = switch_trade(&s, &t).unwrap();
    let t = validate_basic_trade(&s, &dark).unwrap();
    assert_eq!(t.changed_squares(), (11..17).collect::<Vec<_>>());
    let b = switch_trade(&s, &t).unwrap();
    assert!(!are_isomorphic(&a, &s).unwrap());
    assert!(!are_isomorphic(&b, &s).unwrap());
}

/// A random cell set: sometimes arbitrary, sometimes a symmetric difference
/// of 2x2 submatrices that alternate in the reference square.
fn random_cells(s: &MofsSet, reference: usize, rng: &mut ChaCha8Rng) -> Vec<Cell> {
    let n = s.order();
    if rng.gen_bool(0.3) {
        let p = rng.gen_range(0.05..0.6);
        let cells: Vec<Cell> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        return if cells.is_empty() { vec![(0, 0)] } else { cells };
    }
    let f = s.square(reference);
    let mut picked: HashSet<Cell> = HashSet::new();
    let quads = rng.gen_range(1..=3);
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut made = 0;
    while made < quads {
        rows.shuffle(rng);
        cols.shuffle(rng);
        let (a, b, c, d) = (rows[0], rows[1], cols[0], cols[1]);
        let alternating = f.get(a, c) == f.get(b, d) && f.get(a, d) == f.get(b, c) && f.get(a, c) != f.get(a, d);
        if !alternating {
            continue;
        }
        for cell in [(a, c), (a, d), (b, c), (b, d)] {
            if !picked.remove(&cell) {
                picked.insert(cell);
            }
        }
        made += 1;
    }
    let mut cells: Vec<Cell> = picked.into_iter().collect();
    cells.sort_unstable();
    if cells.is_empty() {
        vec![(0, 0)]
    } else {
        cells
    }
}

#[test]
fn basic_trade_conditions_match_switching() {
    let sets = [
        federer(4),
        data::load("display-12").unwrap(),
        data::load("display-10").unwrap(),
        data::load("display-11").unwrap(),
        data::load("17-mofs-6-01").unwrap().subset(&[0, 1, 2, 3, 4, 5, 6, 7, 8]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut accepted, mut rejected) = (0, 0);
    for trial in 0..100_000 {
        let s = &sets[trial % sets.len()];
        let reference = rng.gen_range(0..s.len());
        let cells = random_cells(s, reference, &mut rng);
        let by_conditions = basic_trade_conditions(s, &cells, reference).is_ok();
        let by_switching = is_trade(s, &basic_trade_cells(s, &cells, reference));
        assert_eq!(by_conditions, by_switching, "trial {trial}: cells {cells:?} reference {reference}");
        if by_conditions {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    assert!(accepted > 1000 && rejected > 1000, "{accepted} accepted, {rejected} rejected");
}

#[test]
fn intercalates_at_eight() {
    let s = federer(8);
    let ts = intercalate_trades(&s).unwrap();
    assert_eq!(ts.len(), 256);
    let distinct: HashSet<_> = ts.iter().map(|t| t.cells.clone()).collect();
    assert_eq!(distinct.len(), 256);
    for t in ts.iter().step_by(37) {
        let out = switch_trade(&s, t).unwrap();
        assert!(verify_mofs(&out).is_valid());
    }
}

#[test]
fn disjoint_family_at_eight() {
    let s = federer(8);
    let fam = disjoint_trade_family(&s).unwrap();
    assert_eq!(fam.len(), 9);
    let mut seen = HashSet::new();
    for (i, a) in fam.iter().enumerate() {
        for b in &fam[i + 1..] {
            assert!(a.cells[0].iter().all(|c| !b.cells[0].contains(c)));
        }
    }
    for mask in 0..512u64 {
        let v = generate_variants(&s, mask).unwrap();
        assert!(verify_mofs(&v).is_valid());
        assert!(v.is_standardized());
        assert_eq!(v.len(), 49);
        assert!(seen.insert(write_fsq(&v)));
    }
    assert_eq!(generate_variants(&s, 0).unwrap(), s);
}

#[test]
fn no_small_basic_trade_links_the_two_derived_classes() {
    use mofs_core::fsq::canonical_form;
    let s = data::load("display-12").unwrap();
    let left = validate_basic_trade(&s, &one_based(&[(3, 3), (3, 4), (4, 3), (4, 4)])).unwrap();
    let right = validate_basic_trade(&s, &one_based(&[(2, 3), (2, 4), (4, 3), (4, 4)])).unwrap();
    let a = switch_trade(&s, &left).unwrap();
    let b = switch_trade(&s, &right).unwrap();
    let target = canonical_form(&b).unwrap();
    let mut trades = 0;
    for mask in 1u32..1 << 16 {
        if mask.count_ones() > 8 {
            continue;
        }
        let cells: Vec<Cell> = (0..16).filter(|i| (mask >> i) & 1 == 1).map(|i| (i / 4, i % 4)).collect();
        for reference in 0..a.len() {
            if basic_trade_conditions(&a, &cells, reference).is_err() {
                continue;
            }
            let out = switch_trade(&a, &validate_trade_cells(&a, &cells, reference)).unwrap();
            trades += 1;
            assert_ne!(canonical_form(&out).unwrap(), target, "cells {cells:?}");
        }
    }
    assert!(trades > 0);
}

fn validate_trade_cells(s: &MofsSet, cells: &[Cell], reference: usize) -> mofs_core::trades::TradeSpec {
    mofs_core::trades::validate_trade(s, &basic_trade_cells(s, cells, reference)).unwrap()
}
