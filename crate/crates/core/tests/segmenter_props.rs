use proptest::prelude::*;
use sylgen::segmenter::{
    count_line_syllables, detokenize, format_stream, normalize, nucleus_count, parse_stream, Mode,
    Segmenter, Special, Token,
};

const LETTERS: &str = "aąbcćdeęfghijklłmnńoóprsśtuwyzźżAĄBCĆDEĘFGHIJKLŁMNŃOÓPRSŚTUWYZŹŻ";
const PUNCT: &str = ".,;:!?()[]„”\"'—-…«»%*/";

fn word() -> impl Strategy<Value = String> {
    let letters: Vec<char> = LETTERS.chars().collect();
    prop::collection::vec(prop::sample::select(letters), 1..12).prop_map(|v| v.into_iter().collect())
}

fn polishish_text() -> impl Strategy<Value = String> {
    let punct: Vec<char> = PUNCT.chars().collect();
    let item = prop_oneof![
        6 => word(),
        2 => prop::sample::select(punct).prop_map(String::from),
        2 => Just(" ".to_string()),
        1 => Just("\n".to_string()),
        1 => Just("  \t".to_string()),
        1 => (0u32..10_000).prop_map(|n| n.to_string()),
    ];
    prop::collection::vec(item, 0..40).prop_map(|v| v.join(""))
}

fn any_token() -> impl Strategy<Value = Token> {
    prop_oneof![
        prop::sample::select(Special::ALL.to_vec()).prop_map(Token::Special),
        (word(), any::<bool>(), any::<bool>()).prop_map(|(w, p, n)| Token::piece(w.to_lowercase(), p, n)),
        prop::sample::select(PUNCT.chars().collect::<Vec<_>>()).prop_map(Token::Punct),
        Just(Token::Space),
    ]
}

fn pieces_of(tokens: &[Token]) -> String {
    tokens
        .iter()
        .filter_map(|t| match t {
            Token::Piece { surface, .. } => Some(surface.as_str()),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn subword_roundtrip(raw in polishish_text()) {
        let seg = Segmenter::default();
        let x = normalize(&raw);
        prop_assert_eq!(detokenize(&seg.tokenize(&x)), x);
    }

    #[test]
    fn char_roundtrip(raw in polishish_text()) {
        let seg = Segmenter::with_mode(Mode::Char);
        let x = normalize(&raw);
        prop_assert_eq!(detokenize(&seg.tokenize(&x)), x);
    }

    #[test]
    fn arbitrary_unicode_roundtrip(raw in any::<String>()) {
        let x = normalize(&raw);
        prop_assert_eq!(normalize(&x), x.clone());
        for mode in [Mode::SubWord, Mode::Char] {
            let seg = Segmenter::with_mode(mode);
            prop_assert_eq!(detokenize(&seg.tokenize(&x)), x.clone());
        }
    }

    #[test]
    fn stream_format_roundtrip(raw in polishish_text()) {
        let seg = Segmenter::default();
        let toks = seg.tokenize(&normalize(&raw));
        prop_assert_eq!(parse_stream(&format_stream(&toks)).unwrap(), toks);
    }

    #[test]
    fn detokenize_is_total(tokens in prop::collection::vec(any_token(), 0..60)) {
        let _ = detokenize(&tokens);
    }

    #[test]
    fn pieces_concatenate_to_word(w in word()) {
        let seg = Segmenter::default();
        let lower = w.to_lowercase();
        prop_assert_eq!(pieces_of(&seg.tokenize(&w)), lower.clone());
        let joined: String = seg.syllabify(&lower).unwrap().concat();
        prop_assert_eq!(joined, lower);
    }

    #[test]
    fn nucleus_counts_add_up(w in word()) {
        let seg = Segmenter::default();
        let per_piece: usize = seg
            .tokenize(&w)
            .iter()
            .filter_map(|t| match t {
                Token::Piece { surface, .. } => Some(nucleus_count(surface)),
                _ => None,
            })
            .sum();
        prop_assert_eq!(per_piece, count_line_syllables(&w));
    }

    #[test]
    fn tokenize_is_deterministic(raw in polishish_text()) {
        let x = normalize(&raw);
        prop_assert_eq!(Segmenter::default().tokenize(&x), Segmenter::default().tokenize(&x));
    }

    #[test]
    fn prefixes_reassemble(w in word()) {
        let seg = Segmenter::default();
        let lower = w.to_lowercase();
        let (prefixes, core) = seg.stem_prefixes(&lower);
        prop_assert!(prefixes.len() <= 2);
        prop_assert_eq!(prefixes.concat() + &core, lower);
    }
}

#[test]
fn worked_examples() {
    let seg = Segmenter::default();
    assert_eq!(seg.syllabify("moja").unwrap(), ["mo", "ja"]);
    assert_eq!(seg.syllabify("w").unwrap(), ["w"]);
    assert_eq!(seg.syllabify("ojczyzno").unwrap(), ["oj", "czy", "zno"]);
    assert_eq!(seg.stem_prefixes("niedobry"), (vec!["nie".to_string()], "dobry".to_string()));
    assert_eq!(seg.stem_prefixes("kot"), (vec![], "kot".to_string()));
    assert_eq!(seg.stem_prefixes("niebo"), (vec![], "niebo".to_string()));
    assert_eq!(
        format_stream(&seg.tokenize("Litwo!")),
        "_cap_ li++ --two !\n"
    );
    assert_eq!(format_stream(&seg.tokenize("a\nb")), "a _eol_ b\n");
    assert_eq!(format_stream(&seg.tokenize("KSIĘGA")), "_up_ księ++ --ga\n");
    assert_eq!(detokenize(&parse_stream("_cap_ li++ --two !").unwrap()), "Litwo!");
    assert_eq!(detokenize(&parse_stream("a++ b").unwrap()), "a b");
    assert_eq!(count_line_syllables(""), 0);
}

#[test]
fn whole_corpus_roundtrip() {
    let raw = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/desk_corpus_pl.txt")).unwrap();
    let text = normalize(&raw);
    for mode in [Mode::SubWord, Mode::Char] {
        let seg = Segmenter::with_mode(mode);
        assert_eq!(detokenize(&seg.tokenize(&text)), text);
    }
}
