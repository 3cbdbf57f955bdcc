//! Property-based structural tests: reconstruction from the family of all
//! maximal independent sets is the identity, the pairwise relations derived
//! from mutual statements coincide with the direct pairwise relations, and
//! the inference axioms preserve separation-truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcip_core::ci::{
    contraction, decomposition, global_query, intersection, pairwise_from_mcip,
    pairwise_relations, symmetry, weak_union, CiStatement,
};
use mcip_core::{UndirectedGraph, VertexSet};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i:02}")).collect()
}

/// Every labelled simple graph on n vertices, enumerated by edge bitmask.
fn exhaustive_graphs(n: usize) -> Vec<UndirectedGraph> {
    let names = labels(n);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    (0u64..(1 << pairs.len()))
        .map(|mask| {
            let mut g = UndirectedGraph::new(names.clone()).unwrap();
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    g.add_edge(&names[i], &names[j]).unwrap();
                }
            }
            g
        })
        .collect()
}

fn random_graph<R: Rng>(rng: &mut R, min_vertices: usize, max_vertices: usize) -> UndirectedGraph {
    let n = rng.random_range(min_vertices..=max_vertices);
    let names = labels(n);
    let mut g = UndirectedGraph::new(names.clone()).unwrap();
    let p = rng.random_range(0.1..0.9);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                g.add_edge(&names[i], &names[j]).unwrap();
            }
        }
    }
    g
}

#[test]
fn amis_reconstruction_identity_exhaustive_up_to_five() {
    let mut checked = 0usize;
    for n in 1..=5 {
        for g in exhaustive_graphs(n) {
            let amis = g.maximal_independent_sets().unwrap();
            let rebuilt = UndirectedGraph::reconstruct_from_amis(&amis).unwrap();
            assert_eq!(rebuilt, g, "reconstruction drifted on {:?}", g.edges());
            checked += 1;
        }
    }
    assert_eq!(checked, 1 + 2 + 8 + 64 + 1024);
}

#[test]
fn amis_reconstruction_identity_random_six_to_ten() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 6, 10);
        let amis = g.maximal_independent_sets().unwrap();
        let rebuilt = UndirectedGraph::reconstruct_from_amis(&amis).unwrap();
        assert_eq!(rebuilt, g, "reconstruction drifted on {:?}", g.edges());
    }
}

#[test]
fn pairwise_from_mutual_exhaustive_up_to_five() {
    for n in 1..=5 {
        for g in exhaustive_graphs(n) {
            assert_eq!(
                pairwise_from_mcip(&g).unwrap(),
                pairwise_relations(&g),
                "statement sets differ on {:?}",
                g.edges()
            );
        }
    }
}

#[test]
fn pairwise_from_mutual_random_up_to_seven() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 2, 7);
        assert_eq!(
            pairwise_from_mcip(&g).unwrap(),
            pairwise_relations(&g),
            "statement sets differ on {:?}",
            g.edges()
        );
    }
}

/// Draws a random separation-true statement with both sides nonempty, or
/// None if the draw came up empty/false.
fn random_true_statement<R: Rng>(g: &UndirectedGraph, rng: &mut R) -> Option<CiStatement> {
    let mut left = VertexSet::new();
    let mut right = VertexSet::new();
    let mut given = VertexSet::new();
    for v in g.vertices() {
        match rng.random_range(0..4) {
            0 => left.insert(v.clone()),
            1 => right.insert(v.clone()),
            2 => given.insert(v.clone()),
            _ => {}
        }
    }
    if left.is_empty() || right.is_empty() {
        return None;
    }
    let s = CiStatement::new(left, right, given).expect("roles are disjoint");
    global_query(g, &s).unwrap().then_some(s)
}

fn random_proper_subset<R: Rng>(set: &VertexSet, rng: &mut R) -> Option<VertexSet> {
    if set.len() < 2 {
        return None;
    }
    loop {
        let sub: VertexSet = set
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .map(str::to_string)
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        if !sub.is_empty() && sub.len() < set.len() {
            return Some(sub);
        }
    }
}

/// Separation in an undirected graph satisfies all five inference axioms
/// (it is a compositional graphoid), so every derivation step from a
/// separation-true statement must stay separation-true.
#[test]
fn axioms_preserve_separation_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut derivations = 0usize;
    for _ in 0..40 {
        let g = random_graph(&mut rng, 3, 6);
        for _ in 0..40 {
            let Some(s) = random_true_statement(&g, &mut rng) else {
                continue;
            };
            assert!(global_query(&g, &symmetry(&s)).unwrap());
            derivations += 1;

            // pick the wider side and split it as Y ∪ W
            let side = if s.right().len() >= s.left().len() {
                s.right().clone()
            } else {
                s.left().clone()
            };
            let Some(w) = random_proper_subset(&side, &mut rng) else {
                continue;
            };

            // write the chosen side as Y ∪ W with Y = side ∖ W
            let dropped = decomposition(&s, &w).expect("proper subset of one side");
            assert!(
                global_query(&g, &dropped).unwrap(),
                "decomposition broke {s} dropping {{{w}}}"
            );
            // X ⟂ Y | Z∪W
            let w_into_given = weak_union(&s, &w).expect("proper subset of one side");
            assert!(
                global_query(&g, &w_into_given).unwrap(),
                "weak union broke {s} moving {{{w}}}"
            );
            // X ⟂ W | Z∪Y
            let kept = side.difference(&w);
            let y_into_given = weak_union(&s, &kept).expect("complement is proper too");
            derivations += 2;

            // contraction rebuilds s from (X ⟂ Y | Z) and (X ⟂ W | Z∪Y);
            // intersection rebuilds it from the two weak-union variants
            let rebuilt = contraction(&dropped, &y_into_given)
                .expect("derived premises match the contraction shape");
            assert_eq!(rebuilt, s);
            let meet = intersection(&w_into_given, &y_into_given)
                .expect("derived premises match the intersection shape");
            assert_eq!(meet, s);
            assert!(global_query(&g, &meet).unwrap());
            derivations += 2;
        }
    }
    assert!(derivations > 500, "axiom property barely exercised: {derivations}");
}
