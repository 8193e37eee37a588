//! Acceptance criteria, one check each. Prints a `criterion N: PASS|FAIL`
//! line per criterion and exits non-zero if any fail. Pass criterion numbers
//! as arguments to run a subset.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mofs_core::constructions::{
    bachelor_square, complete_from_hadamard, five_max, hadamard, orthogonal_mate, seventeen,
};
use mofs_core::data;
use mofs_core::designs::{complete_mofs_possible, design_from_complete, standardized_z2_allones, verify_design, CompleteVerdict};
use mofs_core::embeddings::{corner_structure_check, no_three_imofs_witness, two_imofs, ImofsSearch};
use mofs_core::fsq::{
    apply_isomorphism, are_isomorphic, balanced_orthogonal, canonical_form, superposition_profile,
    verify_mofs, verify_pair, write_fsq, BitMatrix, Isomorphism, MofsSet,
};
use mofs_core::relations::{certify_maximal, construct_small_k, find_relation, relation_feasibility, Feasibility, Relation};
use mofs_core::search::{
    cliques_at_least, enumerate_squares, is_bachelor_class, mate_graph, mates, reconstruct_circulant,
    Graph,
};
use mofs_core::trades::{disjoint_trade_family, generate_variants, switch_trade, validate_basic_trade, Cell};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn criterion(number: u32, limit: Option<Duration>, body: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let mut outcome = body();
    let elapsed = start.elapsed();
    if let (Ok(_), Some(limit)) = (&outcome, limit) {
        if elapsed > limit {
            outcome = Err(format!("took {elapsed:.1?}, limit {limit:?}"));
        }
    }
    match &outcome {
        Ok(detail) => println!("criterion {number}: PASS ({detail}; {elapsed:.2?})"),
        Err(why) => println!("criterion {number}: FAIL ({why}; {elapsed:.2?})"),
    }
    outcome.is_ok()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn complete(n: usize) -> MofsSet {
    complete_from_hadamard(&hadamard(n).unwrap()).unwrap()
}

fn one_based(cells: &[(usize, usize)]) -> Vec<Cell> {
    cells.iter().map(|&(r, c)| (r - 1, c - 1)).collect()
}

fn full_relation(set: &MofsSet) -> Option<Relation> {
    find_relation(set, true).unwrap()
}

fn relation_with_certificate(set: &MofsSet, name: &str, a: usize, b: usize) -> Result<(), String> {
    let n = set.order();
    let rel = full_relation(set).ok_or_else(|| format!("{name}: no full relation"))?;
    ensure(rel.holds_on(set), || format!("{name}: relation does not hold"))?;
    ensure(rel.has_signature(n, a, b) || rel.has_signature(n, b, a), || {
        format!("{name}: relation {:?}, expected ({a},{b})", rel.signature())
    })?;
    ensure(certify_maximal(set).is_certified(), || format!("{name}: no certificate"))
}

fn c01_bundled_seventeen_sets() -> bool {
    criterion(1, Some(Duration::from_secs(1)), || {
        let sets = data::all_seventeen_mofs_6().map_err(|e| e.to_string())?;
        ensure(sets.len() == 18, || format!("{} sets", sets.len()))?;
        for (i, s) in sets.iter().enumerate() {
            let name = format!("17-mofs-6-{:02}", i + 1);
            ensure(s.len() == 17 && verify_mofs(s).is_valid(), || format!("{name} invalid"))?;
            relation_with_certificate(s, &name, 3, 3)?;
        }
        Ok("18 sets valid with (3,3)-relation and certificate".into())
    })
}

fn c02_display_ten_is_maximal_two_ways() -> bool {
    criterion(2, Some(Duration::from_secs(10)), || {
        let s = data::load("display-10").map_err(|e| e.to_string())?;
        ensure(s.len() == 5 && s.order() == 6 && verify_mofs(&s).is_valid(), || "not a valid 5-MOFS(6)".into())?;
        relation_with_certificate(&s, "display-10", 5, 3)?;
        let m = mates(&s).map_err(|e| e.to_string())?;
        ensure(m.is_empty(), || format!("{} mates", m.len()))?;
        Ok("(5,3)-relation, certificate, 0 mates".into())
    })
}

fn c03_bachelor_at_six() -> bool {
    criterion(3, Some(Duration::from_secs(600)), || {
        let squares = enumerate_squares(6, false).map_err(|e| e.to_string())?;
        ensure(squares.len() == 297_200, || format!("{} squares", squares.len()))?;
        let mut bachelors = 0;
        for sq in &squares {
            if is_bachelor_class(sq.matrix()) {
                bachelors += 1;
                continue;
            }
            let mate = orthogonal_mate(sq).map_err(|e| format!("no mate: {e}"))?;
            let report = verify_pair(sq.matrix(), mate.matrix()).map_err(|e| e.to_string())?;
            ensure(report.orthogonal, || "mate not orthogonal".into())?;
        }
        ensure(bachelors > 0, || "no bachelor-class squares seen".into())?;
        let a6 = MofsSet::from_squares(vec![bachelor_square(6).unwrap()]).unwrap();
        ensure(mates(&a6).unwrap().is_empty(), || "A6 has a mate".into())?;
        Ok(format!("{} squares mated, {bachelors} bachelor-class, A6 mateless", squares.len() - bachelors))
    })
}

fn c04_complete_sets_of_order_four() -> bool {
    criterion(4, Some(Duration::from_secs(60)), || {
        let standardized: Vec<BitMatrix> = enumerate_squares(4, false)
            .unwrap()
            .into_iter()
            .map(|s| s.into_matrix())
            .filter(|m| !m.get(0, 0))
            .collect();
        ensure(standardized.len() == 45, || format!("{} standardized squares", standardized.len()))?;
        let g = Graph::from_predicate(standardized.len(), |u, v| {
            balanced_orthogonal(standardized[u].rows(), standardized[v].rows())
        });
        let cliques = cliques_at_least(&g, 9, None).map_err(|e| e.to_string())?;
        let mut classes = HashSet::new();
        for c in &cliques {
            let set = MofsSet::new(4, c.iter().map(|&v| standardized[v].clone()).collect()).unwrap();
            ensure(c.len() == 9 && verify_mofs(&set).is_valid(), || "bad clique".into())?;
            classes.insert(canonical_form(&set).unwrap());
        }
        ensure(classes.len() == 3, || format!("{} classes", classes.len()))?;

        let s = data::load("display-12").unwrap();
        for cells in [[(3, 3), (3, 4), (4, 3), (4, 4)], [(2, 3), (2, 4), (4, 3), (4, 4)]] {
            let t = validate_basic_trade(&s, &one_based(&cells)).map_err(|e| format!("{cells:?}: {e}"))?;
            let out = switch_trade(&s, &t).map_err(|e| e.to_string())?;
            ensure(verify_mofs(&out).is_valid() && out.len() == 9, || "switched set invalid".into())?;
            ensure(!are_isomorphic(&out, &s).unwrap(), || format!("{cells:?}: isomorphic after switching"))?;
            let back = validate_basic_trade(&out, &one_based(&cells)).map_err(|e| e.to_string())?;
            ensure(switch_trade(&out, &back).unwrap() == s, || "switching twice changed the set".into())?;
        }
        Ok(format!("{} complete sets in 3 classes; both trades switch and restore", cliques.len()))
    })
}

fn c05_counting_construction_at_eight() -> bool {
    criterion(5, Some(Duration::from_secs(60)), || {
        let s = complete(8);
        let family = disjoint_trade_family(&s).map_err(|e| e.to_string())?;
        ensure(family.len() == 9, || format!("{} trades", family.len()))?;
        let mut seen = HashSet::new();
        for mask in 0..512u64 {
            let v = generate_variants(&s, mask).map_err(|e| e.to_string())?;
            ensure(v.len() == 49 && verify_mofs(&v).is_valid(), || format!("mask {mask}: invalid"))?;
            ensure(v.is_standardized(), || format!("mask {mask}: not standardized"))?;
            ensure(seen.insert(write_fsq(&v)), || format!("mask {mask}: repeated"))?;
        }
        Ok("9 trades, 512 distinct standardized complete 49-MOFS(8)".into())
    })
}

fn c06_mate_graph_ranges() -> bool {
    criterion(6, None, || {
        let pairs = [("17-mofs-6-01", [0, 1]), ("17-mofs-6-02", [3, 9]), ("display-10", [0, 1])];
        let mut detail = Vec::new();
        for (name, idx) in pairs {
            let start = Instant::now();
            let set = data::load(name).unwrap();
            let pair = set.subset(&idx).unwrap();
            let g = mate_graph(&pair).map_err(|e| e.to_string())?;
            let (v, d) = (g.vertices.len(), g.graph.min_degree());
            ensure((5937..=7413).contains(&v), || format!("{name}: {v} vertices"))?;
            ensure((548..=1369).contains(&d), || format!("{name}: min degree {d}"))?;
            ensure(g.graph.edge_outside_triangles().is_none(), || format!("{name}: edge outside triangles"))?;
            let big = cliques_at_least(&g.graph, 16, None).map_err(|e| e.to_string())?;
            ensure(big.is_empty(), || format!("{name}: clique of size {}", big[0].len()))?;

            if set.len() == 17 {
                let rest: Vec<usize> = (0..17).filter(|i| !idx.contains(i)).collect();
                let clique: Vec<usize> = rest
                    .iter()
                    .map(|&i| {
                        let sq = set.square(i);
                        let sq = if sq.get(0, 0) { sq.complement() } else { sq.clone() };
                        g.vertices.iter().position(|m| *m.matrix() == sq)
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(|| format!("{name}: a square of the set is not a mate"))?;
                let all_adjacent = clique
                    .iter()
                    .enumerate()
                    .all(|(i, &u)| clique[i + 1..].iter().all(|&w| g.graph.has_edge(u, w)));
                ensure(clique.len() == 15 && all_adjacent, || format!("{name}: no 15-clique"))?;
                ensure(verify_mofs(&g.extend(&pair, &clique).unwrap()).is_valid(), || "extension invalid".into())?;
            }
            let took = start.elapsed();
            ensure(took < Duration::from_secs(30 * 60), || format!("{name}: took {took:?}"))?;
            detail.push(format!("{name} {idx:?}: {v} vertices, min degree {d}, {took:.0?}"));
        }
        Ok(detail.join("; "))
    })
}

fn c07_construction_sweep() -> bool {
    criterion(7, Some(Duration::from_secs(300)), || {
        for n in [6, 10, 14, 18, 22] {
            let s = five_max(n).map_err(|e| format!("five_max({n}): {e}"))?;
            ensure(s.len() == 5 && verify_mofs(&s).is_valid(), || format!("five_max({n}) invalid"))?;
            let kappa = (n - 2) / 4;
            relation_with_certificate(&s, &format!("five_max({n})"), 2 * kappa + 3, 2 * kappa + 1)?;
        }
        for n in [6, 10, 14, 18, 26, 34, 38, 70] {
            let s = seventeen(n).map_err(|e| format!("seventeen({n}): {e}"))?;
            ensure(s.len() == 17 && s.order() == n && verify_mofs(&s).is_valid(), || format!("seventeen({n}) invalid"))?;
        }
        Ok("five_max at 5 orders, seventeen at 8 orders".into())
    })
}

fn c08_imofs() -> bool {
    criterion(8, Some(Duration::from_secs(600)), || {
        for n in [4, 6, 8, 10] {
            let p = two_imofs(n).map_err(|e| e.to_string())?;
            ensure(p.is_valid(), || format!("two_imofs({n}) invalid"))?;
            ensure(corner_structure_check(&p).unwrap(), || format!("two_imofs({n}) corner"))?;
        }
        let mut generated = 0u64;
        for n in [4, 6] {
            let mut ok = true;
            generated += ImofsSearch::new(n, n - 2, 2).unwrap().run(|p| {
                ok &= p.is_valid() && corner_structure_check(p).unwrap();
                true
            });
            ensure(ok, || format!("corner structure fails at order {n}"))?;
        }
        ensure(no_three_imofs_witness(4).unwrap(), || "3-IMOFS(4;2) exists".into())?;
        ensure(no_three_imofs_witness(6).unwrap(), || "3-IMOFS(6;4) exists".into())?;
        Ok(format!("{generated} generated 2-IMOFS checked; no 3-IMOFS(4;2) or (6;4)"))
    })
}

fn bundled_sets() -> Vec<MofsSet> {
    data::DATASETS
        .iter()
        .filter(|d| d.name.ends_with(".fsq"))
        .map(|d| data::load(d.name).unwrap())
        .collect()
}

fn circulant_sets() -> Vec<MofsSet> {
    ["mofs-10-circ-17", "mofs-10-circ-9"]
        .iter()
        .map(|name| {
            let r = data::circulant_rows(name).unwrap();
            reconstruct_circulant(r.order, r.squares, &r.first, &r.middle).unwrap()
        })
        .collect()
}

fn constructed_sets() -> Vec<MofsSet> {
    let mut out = Vec::new();
    for n in [4, 8, 12, 16] {
        out.push(complete(n));
    }
    for n in [6, 10, 14, 18, 22] {
        out.push(five_max(n).unwrap());
    }
    for n in [6, 10, 14, 18, 26, 34, 38, 70] {
        out.push(seventeen(n).unwrap());
    }
    for (k, lambda, a, b) in [(1, 3, 3, 3), (2, 2, 2, 2), (3, 4, 2, 4), (3, 2, 0, 2)] {
        if let Ok(s) = construct_small_k(k, lambda, a, b) {
            out.push(s);
        }
    }
    let b8 = bachelor_square(8).unwrap();
    let m8 = orthogonal_mate(&b8).unwrap();
    out.push(MofsSet::from_squares(vec![b8, m8]).unwrap());
    out.extend(circulant_sets());
    out
}

/// The necessary conditions on a detected full relation.
fn relation_consistent(set: &MofsSet, rel: &Relation) -> Result<(), String> {
    let n = set.order();
    let (k, lambda) = (set.len(), n / 2);
    let (a, b) = rel.signature();
    ensure(rel.holds_on(set), || "relation does not hold".into())?;
    ensure(a % 2 == lambda * k % 2 && b % 2 == lambda * k % 2, || format!("parity: ({a},{b}) k={k} n={n}"))?;
    if lambda % 2 == 1 {
        let residue = a * b % 4;
        ensure(!(k % 8 == 1 && residue != 1) && !(k % 8 == 5 && residue != 3), || {
            format!("product residue: ({a},{b}) k={k} n={n}")
        })?;
    }
    match relation_feasibility(k, lambda, a, b).map_err(|e| e.to_string())? {
        Feasibility::Feasible => Ok(()),
        Feasibility::Infeasible(o) => Err(format!("detector found ({a},{b}) on k={k} n={n} ruled out by {o}")),
    }
}

fn c09_profiles_and_obstructions() -> bool {
    criterion(9, None, || {
        let mut sets = bundled_sets();
        sets.extend(constructed_sets());
        let mut relations = 0;
        for s in &sets {
            ensure(verify_mofs(s).is_valid(), || format!("invalid {}-MOFS({})", s.len(), s.order()))?;
            ensure(superposition_profile(s).identities_hold(), || {
                format!("profile identities fail on {}-MOFS({})", s.len(), s.order())
            })?;
            if let Some(rel) = full_relation(s) {
                relation_consistent(s, &rel)?;
                relations += 1;
            }
        }

        for lambda in (1..=35).step_by(2) {
            for k in 1..=40 {
                if k % 4 == 1 {
                    continue;
                }
                for a in 0..=2 * lambda {
                    for b in 0..=2 * lambda {
                        let f = relation_feasibility(k, lambda, a, b).unwrap();
                        ensure(f != Feasibility::Feasible, || format!("feasible k={k} lambda={lambda}"))?;
                    }
                }
            }
        }

        let pools: Vec<MofsSet> = sets.iter().filter(|s| matches!(s.order(), 4 | 6)).cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 100_000;
        let mut detected = 0;
        for _ in 0..trials {
            let base = pools.choose(&mut rng).unwrap();
            let k = rng.gen_range(1..=base.len());
            let mut idx: Vec<usize> = (0..base.len()).collect();
            idx.shuffle(&mut rng);
            idx.truncate(k);
            let sub = base.subset(&idx).unwrap();
            let iso = Isomorphism::random(sub.order(), k, &mut rng);
            let s = apply_isomorphism(&sub, &iso).unwrap();
            if let Some(rel) = full_relation(&s) {
                relation_consistent(&s, &rel)?;
                detected += 1;
            }
        }
        ensure(detected > 0, || "no relation detected in random trials".into())?;
        Ok(format!(
            "{} sets, {relations} full relations consistent; {trials} random trials, {detected} detections consistent",
            sets.len()
        ))
    })
}

fn c10_block_circulant_order_ten() -> bool {
    criterion(10, Some(Duration::from_secs(60)), || {
        let sets = circulant_sets();
        for (s, k) in sets.iter().zip([17, 9]) {
            let name = format!("{k}-MOFS(10)");
            ensure(s.len() == k && s.order() == 10 && verify_mofs(s).is_valid(), || format!("{name} invalid"))?;
            relation_with_certificate(s, &name, 5, 5)?;
        }
        Ok("17- and 9-MOFS(10) with (5,5)-relation and certificate".into())
    })
}

fn c11_designs() -> bool {
    criterion(11, Some(Duration::from_secs(60)), || {
        for (n, lambda) in [(4, 3), (8, 21)] {
            let s = complete(n);
            let d = design_from_complete(&s).map_err(|e| e.to_string())?;
            ensure(verify_design(&d).is_valid(), || format!("design at {n} invalid"))?;
            ensure(d.lambda == lambda && d.v == n && d.k == n / 2, || format!("order {n}: lambda {}", d.lambda))?;
            ensure(standardized_z2_allones(&s).unwrap(), || format!("Z2 sum at {n} not all ones"))?;
        }
        for n in [6, 10, 14] {
            let v = complete_mofs_possible(n).map_err(|e| e.to_string())?;
            ensure(matches!(v, CompleteVerdict::Impossible(_)), || format!("order {n} not ruled out"))?;
        }
        Ok("lambda 3 and 21, all-ones sums, orders 6 10 14 impossible".into())
    })
}

fn main() -> ExitCode {
    let checks: [fn() -> bool; 11] = [
        c01_bundled_seventeen_sets,
        c02_display_ten_is_maximal_two_ways,
        c03_bachelor_at_six,
        c04_complete_sets_of_order_four,
        c05_counting_construction_at_eight,
        c06_mate_graph_ranges,
        c07_construction_sweep,
        c08_imofs,
        c09_profiles_and_obstructions,
        c10_block_circulant_order_ten,
        c11_designs,
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, check) in checks.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let ok = std::panic::catch_unwind(check).unwrap_or_else(|_| {
            println!("criterion {}: FAIL (panicked)", i + 1);
            false
        });
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
