use std::sync::Arc;

use dwtqft::cocycles::{coboundary, random_cochain, standard_cyclic_cocycle, Cochain};
use dwtqft::groups::build_named_group;
use dwtqft::modular::ModularData;
use dwtqft::numeric::Settings;
use dwtqft::tqft3::{
    mapping_torus_partition, partition_function, ModularLetter, ModularWord, TheoryInstance, ThreeManifoldSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// A relabeling `π` of simples with `S'[π a][π b] = S[a][b]` and
/// `T'[π a] = T[a]`, found by backtracking over same-class candidates.
fn matching_permutation(a: &ModularData, b: &ModularData) -> Option<Vec<usize>> {
    fn extend(a: &ModularData, b: &ModularData, perm: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = perm.len();
        if i == a.rank() {
            return true;
        }
        for j in 0..b.rank() {
            if used[j]
                || a.simples[i].class_rep != b.simples[j].class_rep
                || (a.t[i] - b.t[j]).norm() > 1e-9
                || (0..i).any(|k| (a.s[(i, k)] - b.s[(j, perm[k])]).norm() > 1e-9)
                || (a.s[(i, i)] - b.s[(j, j)]).norm() > 1e-9
            {
                continue;
            }
            perm.push(j);
            used[j] = true;
            if extend(a, b, perm, used) {
                return true;
            }
            perm.pop();
            used[j] = false;
        }
        false
    }
    if a.rank() != b.rank() {
        return None;
    }
    let mut perm = Vec::new();
    let mut used = vec![false; b.rank()];
    extend(a, b, &mut perm, &mut used).then_some(perm)
}

#[test]
fn coboundary_twists_permute_s() {
    for (n, p) in [(2, 1), (3, 2), (4, 1), (6, 5)] {
        let w = standard_cyclic_cocycle(n, p).unwrap();
        let base = ModularData::compute(w.group(), &w, &Settings::default()).unwrap();
        for seed in 0..5 {
            let beta = random_cochain(w.group().clone(), 2, 2 * n as u64, seed).unwrap();
            let w2 = w.product(&coboundary(&beta).unwrap()).unwrap();
            let other = ModularData::compute(w.group(), &w2, &Settings::default()).unwrap();
            assert!(matching_permutation(&base, &other).is_some(), "C{n} p={p} seed {seed}");
        }
    }
}

#[test]
fn distinct_levels_are_distinguished() {
    // C3 at levels 1 and 2 are complex conjugate theories, not equal ones
    let a = standard_cyclic_cocycle(3, 1).unwrap();
    let b = standard_cyclic_cocycle(3, 2).unwrap();
    let da = ModularData::compute(a.group(), &a, &Settings::default()).unwrap();
    let db = ModularData::compute(b.group(), &b, &Settings::default()).unwrap();
    assert!(matching_permutation(&da, &db).is_none());
}

#[test]
fn untwisted_lens_spaces_ignore_q() {
    let t = TheoryInstance::named("D4", Settings::default()).unwrap();
    let g = t.group().clone();
    for p in 2..=10u64 {
        let expect = g.elements().filter(|&x| g.pow(x, p) == 0).count() as f64 / 8.0;
        for q in 1..p {
            if let Ok(x) = ThreeManifoldSpec::lens(p, q as i64) {
                let z = partition_function(&t, &x).unwrap().value;
                assert!((z - expect).norm() < 1e-9, "L({p},{q})");
            }
        }
    }
}

#[test]
fn twisted_sphere_and_torus() {
    let w = standard_cyclic_cocycle(4, 1).unwrap();
    let t = TheoryInstance::new(w.group().clone(), w, Settings::default()).unwrap();
    let s3 = partition_function(&t, &ThreeManifoldSpec::sphere()).unwrap();
    assert!((s3.value - 0.25).norm() < 1e-12);
    let t3 = partition_function(&t, &ThreeManifoldSpec::Torus3).unwrap();
    assert_eq!(t3.exact, Some((16, 1)));
}

#[test]
fn group_order_cap() {
    let g = Arc::new(build_named_group("S4").unwrap());
    let t = TheoryInstance::untwisted(g, Settings::default()).unwrap();
    assert_eq!(t.modular().rank(), 21);
    assert!(build_named_group("C100xC101").is_err());
}

fn theories() -> Vec<TheoryInstance> {
    let unit = |s: &str| TheoryInstance::named(s, Settings::default()).unwrap();
    let tw = |w: Cochain| TheoryInstance::new(w.group().clone(), w, Settings::default()).unwrap();
    vec![unit("S3"), unit("Q8"), tw(standard_cyclic_cocycle(3, 1).unwrap())]
}

fn letter() -> impl Strategy<Value = ModularLetter> {
    prop_oneof![
        Just(ModularLetter::S),
        Just(ModularLetter::T),
        Just(ModularLetter::SInv),
        Just(ModularLetter::TInv)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mapping_torus_is_a_class_function(
        w in prop::collection::vec(letter(), 1..8),
        g in prop::collection::vec(letter(), 0..5),
        which in 0usize..3,
    ) {
        let t = &theories()[which];
        let w = ModularWord(w);
        let g = ModularWord(g);
        let conj = ModularWord([g.0.clone(), w.0.clone(), g.inverse().0].concat());
        let a = mapping_torus_partition(t, &w);
        let b = mapping_torus_partition(t, &conj);
        prop_assert!((a - b).norm() < 1e-8);
        // the inverse word has the conjugate trace, since ρ is unitary
        let inv = mapping_torus_partition(t, &w.inverse());
        prop_assert!((inv - a.conj()).norm() < 1e-8);
    }

    #[test]
    fn disjoint_unions_multiply(parts in prop::collection::vec(0usize..5, 1..4)) {
        let names = ["T3", "S3", "SigmaxS1:1", "L(3,1)", "MT:ST"];
        let t = &theories()[0];
        let spelled: Vec<&str> = parts.iter().map(|&i| names[i]).collect();
        let whole = partition_function(t, &ThreeManifoldSpec::parse(&spelled.join("+")).unwrap()).unwrap();
        let product: Complex64 = spelled
            .iter()
            .map(|s| partition_function(t, &ThreeManifoldSpec::parse(s).unwrap()).unwrap().value)
            .product();
        prop_assert!((whole.value - product).norm() < 1e-9);
    }
}
