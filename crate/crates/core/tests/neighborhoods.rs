use std::collections::HashMap;

use holo_embed::analysis::{
    classify_neighborhoods, k_nearest, sample_orthogonality, NeighborClass, VectorSpace, WordProjectedSpace,
};
use holo_embed::codebook::Codebook;
use holo_embed::encoder::{number_tokens, Encoder};
use holo_embed::hrr::{cosine_similarity, random_vector, seeded_rng, DenseVector};
use holo_embed::synthetic::{random_stream, random_table, CorpusProfile};
use proptest::prelude::*;

fn random_space(seed: u64, count: usize, dim: usize) -> Vec<(String, DenseVector)> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|i| (format!("key{i:04}"), random_vector(&mut rng, dim).unwrap())).collect()
}

/// Exhaustive ranking: every other key, sorted by descending cosine then key.
fn brute_force_ranking(entries: &[(String, DenseVector)], core: &str) -> Vec<(String, f64)> {
    let cv = &entries.iter().find(|(k, _)| k == core).unwrap().1;
    let mut all: Vec<(String, f64)> = entries
        .iter()
        .filter(|(k, _)| k != core)
        .map(|(k, v)| (k.clone(), cosine_similarity(cv, v).unwrap()))
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all
}

fn negated(entries: &[(String, DenseVector)], keep: Option<&str>) -> Vec<(String, DenseVector)> {
    entries
        .iter()
        .map(|(k, v)| (k.clone(), if Some(k.as_str()) == keep { v.clone() } else { v.neg() }))
        .collect()
}

/// Independent same-position / shifted / disjoint counts for one core.
fn oracle_classes(original: &[String], compressed: &[String]) -> (usize, usize, usize) {
    let mut counts = (0, 0, 0);
    for (i, key) in original.iter().enumerate() {
        match compressed.iter().position(|c| c == key) {
            Some(j) if j == i => counts.0 += 1,
            Some(_) => counts.1 += 1,
            None => counts.2 += 1,
        }
    }
    counts
}

#[test]
fn k_nearest_matches_exhaustive_scan() {
    for (seed, dim) in [(1, 4), (2, 50), (3, 300)] {
        let entries = random_space(seed, 500, dim);
        let space = VectorSpace::new(entries.clone()).unwrap();
        for core in ["key0000", "key0123", "key0499"] {
            let oracle = brute_force_ranking(&entries, core);
            for k in [1, 10, 499, 600] {
                let got = k_nearest(&space, core, k).unwrap();
                let want = &oracle[..k.min(oracle.len())];
                assert_eq!(
                    got.iter().map(|n| n.key.as_str()).collect::<Vec<_>>(),
                    want.iter().map(|w| w.0.as_str()).collect::<Vec<_>>(),
                    "seed {seed} core {core} k {k}"
                );
                for (g, w) in got.iter().zip(want) {
                    assert!((g.cosine - w.1).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn k_nearest_breaks_ties_by_key() {
    // 100 distinct vectors, each stored under five keys
    let base = random_space(9, 100, 8);
    let entries: Vec<(String, DenseVector)> = base
        .iter()
        .flat_map(|(k, v)| ["e", "a", "d", "b", "c"].map(|s| (format!("{k}{s}"), v.clone())))
        .collect();
    let space = VectorSpace::new(entries.clone()).unwrap();
    let got = k_nearest(&space, "key0042c", 30).unwrap();
    let want = brute_force_ranking(&entries, "key0042c");
    assert_eq!(
        got.iter().map(|n| n.key.clone()).collect::<Vec<_>>(),
        want[..30].iter().map(|w| w.0.clone()).collect::<Vec<_>>()
    );
    assert_eq!(
        got[..4].iter().map(|n| n.key.as_str()).collect::<Vec<_>>(),
        ["key0042a", "key0042b", "key0042d", "key0042e"]
    );
}

#[test]
fn duplicate_of_core_ranks_first() {
    let mut entries = random_space(4, 200, 20);
    let copy = entries[17].1.clone();
    entries.push(("zz-copy".into(), copy));
    let space = VectorSpace::new(entries).unwrap();
    let top = k_nearest(&space, "key0017", 3).unwrap();
    assert_eq!(top[0].key, "zz-copy");
    assert!((top[0].cosine - 1.0).abs() < 1e-12);
}

#[test]
fn identical_spaces_keep_every_position() {
    let entries = random_space(5, 100, 16);
    let a = VectorSpace::new(entries.clone()).unwrap();
    let b = VectorSpace::new(entries).unwrap();
    let cores: Vec<String> = a.keys().to_vec();
    let report = classify_neighborhoods(&a, &b, &cores, 10).unwrap();
    let f = report.fractions;
    assert_eq!((f.same_position, f.shifted, f.disjoint), (1.0, 0.0, 0.0));
}

#[test]
fn globally_negated_space_preserves_neighborhoods() {
    // cos(−a, −b) = cos(a, b), so negating everything changes nothing
    let entries = random_space(6, 100, 16);
    let original = VectorSpace::new(entries.clone()).unwrap();
    let flipped = negated(&entries, None);
    let compressed = VectorSpace::new(flipped.clone()).unwrap();
    let cores: Vec<String> = entries.iter().map(|(k, _)| k.clone()).collect();
    let report = classify_neighborhoods(&original, &compressed, &cores, 10).unwrap();
    for c in &report.cores {
        let o: Vec<String> = brute_force_ranking(&entries, &c.core)[..10].iter().map(|x| x.0.clone()).collect();
        let n: Vec<String> = brute_force_ranking(&flipped, &c.core)[..10].iter().map(|x| x.0.clone()).collect();
        assert_eq!(oracle_classes(&o, &n), (c.same_position, c.shifted, c.disjoint));
    }
    let f = report.fractions;
    assert_eq!((f.same_position, f.shifted, f.disjoint), (1.0, 0.0, 0.0));
}

#[test]
fn nearest_become_farthest_when_all_but_core_are_negated() {
    let entries = random_space(7, 100, 16);
    let original = VectorSpace::new(entries.clone()).unwrap();
    let (mut same, mut shifted, mut disjoint) = (0, 0, 0);
    for (core, _) in &entries {
        let flipped = negated(&entries, Some(core));
        let compressed = VectorSpace::new(flipped.clone()).unwrap();
        let report = classify_neighborhoods(&original, &compressed, std::slice::from_ref(core), 10).unwrap();
        let c = &report.cores[0];
        let o: Vec<String> = brute_force_ranking(&entries, core)[..10].iter().map(|x| x.0.clone()).collect();
        let n: Vec<String> = brute_force_ranking(&flipped, core)[..10].iter().map(|x| x.0.clone()).collect();
        assert_eq!(c.original.iter().map(|x| &x.key).collect::<Vec<_>>(), o.iter().collect::<Vec<_>>());
        assert_eq!(c.compressed.iter().map(|x| &x.key).collect::<Vec<_>>(), n.iter().collect::<Vec<_>>());
        assert_eq!(oracle_classes(&o, &n), (c.same_position, c.shifted, c.disjoint));
        same += c.same_position;
        shifted += c.shifted;
        disjoint += c.disjoint;
    }
    assert_eq!((same, shifted, disjoint), (0, 0, 1000));
}

#[test]
fn per_neighbor_classes_match_counts() {
    let entries = random_space(8, 150, 12);
    let mut rng = seeded_rng(80);
    let noisy: Vec<(String, DenseVector)> = entries
        .iter()
        .map(|(k, v)| (k.clone(), v.add(&random_vector(&mut rng, 12).unwrap().scale(0.4)).unwrap()))
        .collect();
    let a = VectorSpace::new(entries.clone()).unwrap();
    let b = VectorSpace::new(noisy.clone()).unwrap();
    let cores: Vec<String> = entries.iter().step_by(7).map(|(k, _)| k.clone()).collect();
    let report = classify_neighborhoods(&a, &b, &cores, 10).unwrap();
    let f = report.fractions;
    assert!((f.same_position + f.shifted + f.disjoint - 1.0).abs() < 1e-9);
    for c in &report.cores {
        let o: Vec<String> = brute_force_ranking(&entries, &c.core)[..10].iter().map(|x| x.0.clone()).collect();
        let n: Vec<String> = brute_force_ranking(&noisy, &c.core)[..10].iter().map(|x| x.0.clone()).collect();
        assert_eq!(oracle_classes(&o, &n), (c.same_position, c.shifted, c.disjoint));
        let from_original: Vec<NeighborClass> =
            c.neighbors.iter().filter(|x| x.rank_original.is_some()).map(|x| x.class).collect();
        assert_eq!(from_original.len(), 10);
        assert_eq!(c.original_plot.cosines.len(), 11);
        assert_eq!(c.original_plot.keys[0], c.core);
    }
}

#[test]
fn projected_vocabulary_against_its_table() {
    let dim = 64;
    let cb = Codebook::with_defaults(dim, 11).unwrap();
    let mut rng = seeded_rng(12);
    let table = random_table(&mut rng, 300, dim).unwrap();
    let words: Vec<String> = table.iter().map(|(k, _)| k.clone()).collect();
    let stream = random_stream(&mut rng, &words, &cb, 900, CorpusProfile::NATURAL).unwrap();
    let vocab = Encoder::new(&cb, &table).unwrap().build_vocabulary(&number_tokens(stream)).unwrap();
    let original = VectorSpace::from_table(&table).unwrap();
    let projected = WordProjectedSpace::from_vocabulary(&vocab).unwrap();
    assert_eq!(projected.word_count(), vocab.stats().distinct_word_types);

    let mut cores: Vec<String> = vocab.iter().map(|(_, e)| e.word_type.clone()).collect();
    cores.dedup();
    cores.truncate(40);
    let report = classify_neighborhoods(&original, &projected, &cores, 10).unwrap();
    assert_eq!(report.shared_words, projected.word_count());
    let f = report.fractions;
    assert!((f.same_position + f.shifted + f.disjoint - 1.0).abs() < 1e-9);

    // representatives are the most core-similar composite key of each word
    let by_word: HashMap<&str, Vec<(&String, &DenseVector)>> =
        vocab.iter().fold(HashMap::new(), |mut m, (k, e)| {
            m.entry(e.word_type.as_str()).or_default().push((k, &e.vector));
            m
        });
    for c in &report.cores {
        let core_vec = by_word[c.core.as_str()][0].1;
        for n in &c.compressed {
            let variants = &by_word[n.key.as_str()];
            let best = variants
                .iter()
                .map(|(_, v)| cosine_similarity(core_vec, v).unwrap())
                .fold(f64::MIN, f64::max);
            assert!((n.cosine - best).abs() < 1e-12);
            assert_ne!(n.key, c.core);
        }
    }
}

#[test]
fn random_vocabulary_sampled_orthogonality() {
    let vectors: Vec<DenseVector> = random_space(13, 20_000, 300).into_iter().map(|(_, v)| v).collect();
    let report = sample_orthogonality(&vectors, 5000, 0.25, 1).unwrap();
    assert_eq!(report.sample_pairs, 5000);
    assert!(!report.clamped);
    assert!(report.fraction_below >= 0.93, "{}", report.fraction_below);
    assert_eq!(report.histogram.total(), 5000);
    assert_eq!(report, sample_orthogonality(&vectors, 5000, 0.25, 1).unwrap());
}

#[test]
fn copies_of_one_vector_are_never_orthogonal() {
    let v = random_vector(&mut seeded_rng(14), 300).unwrap();
    let vectors = vec![v; 1000];
    let report = sample_orthogonality(&vectors, 200, 0.25, 3).unwrap();
    assert_eq!(report.fraction_below, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_ignores_core_order(seed in any::<u64>(), order in Just((0..40usize).collect::<Vec<_>>()).prop_shuffle()) {
        let entries = random_space(seed, 60, 6);
        let mut rng = seeded_rng(seed ^ 1);
        let noisy: Vec<(String, DenseVector)> = entries
            .iter()
            .map(|(k, v)| (k.clone(), v.add(&random_vector(&mut rng, 6).unwrap()).unwrap()))
            .collect();
        let a = VectorSpace::new(entries.clone()).unwrap();
        let b = VectorSpace::new(noisy).unwrap();
        let sorted: Vec<String> = (0..40).map(|i| entries[i].0.clone()).collect();
        let shuffled: Vec<String> = order.iter().map(|&i| entries[i].0.clone()).collect();
        let x = classify_neighborhoods(&a, &b, &sorted, 7).unwrap();
        let y = classify_neighborhoods(&a, &b, &shuffled, 7).unwrap();
        prop_assert_eq!(&x, &y);
        let f = x.fractions;
        prop_assert!((f.same_position + f.shifted + f.disjoint - 1.0).abs() < 1e-9);
    }
}
