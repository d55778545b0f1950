mod support;

use improv_core::index::{build_index, Bm25Params, InvertedIndex};
use improv_core::text::{tokenize, TextConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles::bm25_rank;

const SYLLABLES: &[&str] = &["ka", "lo", "mi", "ne", "su", "ta", "ri"];

fn word(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..=2);
    (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn sentence(rng: &mut impl Rng, max_len: usize) -> String {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

fn build(texts: &[String]) -> InvertedIndex<usize> {
    build_index(
        texts.iter().enumerate().map(|(i, t)| (t.clone(), i)),
        Bm25Params::default(),
        TextConfig::default(),
    )
    .unwrap()
}

fn assert_matches_oracle(idx: &InvertedIndex<usize>, texts: &[String], query: &str, top_n: usize) {
    let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
    let expected = bm25_rank(&docs, &tokenize(query), 1.2, 0.75, top_n);
    let got = idx.retrieve(query, top_n);
    assert_eq!(got.len(), expected.len(), "query {query:?}");
    for (hit, (id, score)) in got.iter().zip(&expected) {
        assert_eq!(hit.doc.doc_id, *id, "query {query:?}");
        assert!((hit.score - score).abs() <= 1e-9, "{} vs {}", hit.score, score);
    }
}

#[test]
fn retrieve_matches_exhaustive_scoring_on_500_docs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let texts: Vec<String> = (0..500).map(|_| sentence(&mut rng, 6)).collect();
    let idx = build(&texts);
    for _ in 0..50 {
        let q = sentence(&mut rng, 4);
        assert_matches_oracle(&idx, &texts, &q, 20);
    }
}

#[test]
fn bm25_score_agrees_with_retrieve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let texts: Vec<String> = (0..200).map(|_| sentence(&mut rng, 5)).collect();
    let idx = build(&texts);
    let q = tokenize(&sentence(&mut rng, 3));
    for hit in idx.retrieve_tokens(&q, 200) {
        assert_eq!(idx.bm25_score(&q, hit.doc.doc_id).unwrap(), hit.score);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn retrieve_matches_oracle_on_random_corpora(
        seed in any::<u64>(),
        n_docs in 0usize..120,
        top_n in 1usize..30,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let texts: Vec<String> = (0..n_docs).map(|_| sentence(&mut rng, 5)).collect();
        let idx = build(&texts);
        for _ in 0..5 {
            let q = sentence(&mut rng, 3);
            assert_matches_oracle(&idx, &texts, &q, top_n);
        }
    }

    #[test]
    fn query_token_order_does_not_matter(seed in any::<u64>(), n_docs in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let texts: Vec<String> = (0..n_docs).map(|_| sentence(&mut rng, 6)).collect();
        let idx = build(&texts);
        let q = tokenize(&sentence(&mut rng, 5));
        let mut shuffled = q.clone();
        shuffled.shuffle(&mut rng);
        let a: Vec<(u32, f64)> = idx.retrieve_tokens(&q, 50).iter().map(|h| (h.doc.doc_id, h.score)).collect();
        let b: Vec<(u32, f64)> = idx.retrieve_tokens(&shuffled, 50).iter().map(|h| (h.doc.doc_id, h.score)).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scores_are_finite_and_nonnegative(seed in any::<u64>(), n_docs in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let texts: Vec<String> = (0..n_docs).map(|_| sentence(&mut rng, 5)).collect();
        let idx = build(&texts);
        let q = tokenize(&sentence(&mut rng, 4));
        for d in 0..idx.doc_count() as u32 {
            let s = idx.bm25_score(&q, d).unwrap();
            prop_assert!(s.is_finite() && s >= 0.0);
        }
    }

    #[test]
    fn adding_a_doc_term_never_decreases_score(seed in any::<u64>(), n_docs in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let texts: Vec<String> = (0..n_docs).map(|_| sentence(&mut rng, 5)).collect();
        let idx = build(&texts);
        let d = rng.gen_range(0..idx.doc_count()) as u32;
        let mut q = tokenize(&sentence(&mut rng, 3));
        let before = idx.bm25_score(&q, d).unwrap();
        let doc_terms = tokenize(&idx.doc(d).unwrap().searchable_text);
        q.push(doc_terms.choose(&mut rng).unwrap().clone());
        prop_assert!(idx.bm25_score(&q, d).unwrap() >= before);
    }
}
