use proptest::prelude::*;
use sylgen::corpus::{chunk, Vocab};
use sylgen::segmenter::{normalize, Segmenter, Special, Token};

proptest! {
    #[test]
    fn chunk_count_is_floor(n in 0usize..5_000, len in 2usize..600) {
        let idx: Vec<usize> = (0..n).collect();
        prop_assert_eq!(chunk(&idx, len).unwrap().len(), n / len);
    }

    #[test]
    fn chunks_rebuild_a_prefix(idx in prop::collection::vec(0usize..50, 0..800), len in 2usize..60) {
        let chunks = chunk(&idx, len).unwrap();
        let mut rebuilt = Vec::new();
        for c in &chunks {
            prop_assert_eq!(c.input.len(), len - 1);
            prop_assert_eq!(&c.input[1..], &c.target[..len - 2]);
            rebuilt.extend_from_slice(&c.input);
            rebuilt.push(*c.target.last().unwrap());
        }
        prop_assert_eq!(&rebuilt[..], &idx[..chunks.len() * len]);
    }

    #[test]
    fn vocab_is_deterministic_and_dense(words in prop::collection::vec("[a-ząęół]{1,4}", 1..80)) {
        let toks: Vec<Token> = words.iter().map(|w| Token::piece(w.clone(), false, false)).collect();
        let a = Vocab::build(&toks).unwrap();
        let b = Vocab::build(&toks).unwrap();
        prop_assert_eq!(&a, &b);
        for (i, s) in Special::ALL.into_iter().enumerate() {
            prop_assert_eq!(a.get(&Token::Special(s)), Some(i));
        }
        let idx = a.encode(&toks);
        prop_assert!(idx.iter().all(|&i| i < a.len()));
        prop_assert_eq!(a.decode(&idx).unwrap(), toks);
    }
}

#[test]
fn full_corpus_chunk_count() {
    assert_eq!(chunk(&vec![7; 79_544], 400).unwrap().len(), 198);
}

#[test]
fn corpus_vocab_roundtrip() {
    let raw = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/pan_tadeusz_opening.txt")).unwrap();
    let toks = Segmenter::default().tokenize(&normalize(&raw));
    let v = Vocab::build(&toks).unwrap();
    assert_eq!(v.decode(&v.encode(&toks)).unwrap(), toks);
    assert_eq!(Vocab::from_text(&v.to_text()).unwrap(), v);
}
