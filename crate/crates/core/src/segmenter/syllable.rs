//! Vowel nuclei, onset maximization and prefix stemming for Polish words.
//!
//! Nucleus rule: the vowels are `a ą e ę i o ó u y` (plus the archaic `é`).
//! An `i` directly followed by another vowel only palatalizes the preceding
//! consonant and joins the following nucleus, so `cię`, `zdrowie` and
//! `księga` carry one nucleus per `ię`/`ie`. Every other vowel is its own
//! nucleus.
//!
//! Consonants between two nuclei are divided so that the following syllable
//! receives the longest cluster found in the legal-onset table. The digraphs
//! `ch cz dz dź dż rz sz` are never split by that choice.

use std::collections::BTreeSet;

use super::SegmentError;

const DIGRAPHS: [&str; 7] = ["ch", "cz", "dz", "dź", "dż", "rz", "sz"];

/// Multi-consonant clusters allowed at the start of a syllable.
/// Single consonants are always legal and are not listed.
const DEFAULT_ONSETS: &[&str] = &[
    "bl", "br", "brz", "bł", "bz", "bż", "cl", "cm", "cn", "cw", "chl", "chł", "chm", "chr",
    "chrz", "chw", "czk", "czł", "czt", "czw", "dl", "dm", "dn", "dr", "drz", "dw", "dł", "dzb",
    "dzw", "dźw", "fl", "fr", "gd", "gdz", "gl", "gm", "gn", "gr", "grz", "gw", "gz", "gł", "gż",
    "hr", "kl", "km", "kn", "kp", "kr", "krz", "ks", "ksz", "kt", "kw", "kł", "kś", "lw", "mch",
    "md", "mg", "ml", "mn", "mr", "msz", "mś", "mł", "pch", "pl", "pn", "pr", "prz", "ps", "psz",
    "pszcz", "pt", "pł", "pś", "rt", "rw", "rż", "sc", "sch", "sk", "skr", "skrz", "skw", "sm",
    "sn", "sp", "spr", "sprz", "st", "str", "strz", "sw", "sł", "szcz", "szk", "szl", "szm", "szn",
    "szp", "szr", "szt", "szw", "tk", "tl", "tn", "tr", "trw", "trz", "tw", "tł", "wb", "wc",
    "wcz", "wd", "wg", "wk", "wkr", "wl", "wm", "wn", "wp", "wr", "wrz", "ws", "wsch", "wsp",
    "wst", "wsz", "wt", "wz", "wzr", "wł", "zb", "zbr", "zd", "zdr", "zg", "zm", "zn", "zr",
    "zw", "zł", "śc", "śl", "śm", "śn", "śp", "śr", "św", "źdź", "źr", "żb", "żl", "żm", "żr",
    "żw", "żł",
];

/// Default strippable prefixes, longest first where one is a prefix of another.
const DEFAULT_PREFIXES: &[&str] = &[
    "nie", "przed", "prze", "przy", "roz", "bez", "naj", "nad", "pod", "od", "wy", "za",
];

pub fn default_onsets() -> BTreeSet<String> {
    DEFAULT_ONSETS.iter().map(|s| s.to_string()).collect()
}

pub fn default_prefixes() -> Vec<String> {
    DEFAULT_PREFIXES.iter().map(|s| s.to_string()).collect()
}

pub fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'ą' | 'e' | 'ę' | 'i' | 'o' | 'ó' | 'u' | 'y' | 'é')
}

fn nuclear_flags(chars: &[char]) -> Vec<bool> {
    chars
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            is_vowel(c) && !(c == 'i' && chars.get(i + 1).copied().is_some_and(is_vowel))
        })
        .collect()
}

/// Number of vowel nuclei in a lowercase word.
pub fn nucleus_count(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    nuclear_flags(&chars).into_iter().filter(|&n| n).count()
}

/// Splits a consonant cluster into units, keeping digraphs whole.
fn consonant_units(cluster: &[char]) -> Vec<(usize, usize)> {
    let mut units = Vec::new();
    let mut i = 0;
    while i < cluster.len() {
        let len = if i + 1 < cluster.len() {
            let pair: String = cluster[i..i + 2].iter().collect();
            if DIGRAPHS.contains(&pair.as_str()) {
                2
            } else {
                1
            }
        } else {
            1
        };
        units.push((i, i + len));
        i += len;
    }
    units
}

/// Offset inside `cluster` where the next syllable begins.
fn onset_start(cluster: &[char], onsets: &BTreeSet<String>) -> usize {
    let units = consonant_units(cluster);
    if units.is_empty() {
        return 0;
    }
    for (k, &(start, _)) in units.iter().enumerate() {
        if units.len() - k == 1 {
            return start;
        }
        let candidate: String = cluster[start..].iter().collect();
        if onsets.contains(&candidate) {
            return start;
        }
    }
    unreachable!("the last unit is always a legal onset")
}

pub(crate) fn syllabify_with(word: &str, onsets: &BTreeSet<String>) -> Result<Vec<String>, SegmentError> {
    if word.is_empty() {
        return Err(SegmentError::EmptyWord);
    }
    if let Some(c) = word.chars().find(|c| !c.is_alphabetic()) {
        return Err(SegmentError::NotALetter(c));
    }
    let chars: Vec<char> = word.chars().collect();
    let nuclear = nuclear_flags(&chars);

    // (start, end) of each nucleus, palatal `i`s included
    let mut nuclei: Vec<(usize, usize)> = Vec::new();
    for (i, &is_nuc) in nuclear.iter().enumerate() {
        if is_nuc {
            let mut start = i;
            while start > 0 && chars[start - 1] == 'i' && !nuclear[start - 1] {
                start -= 1;
            }
            nuclei.push((start, i + 1));
        }
    }
    if nuclei.len() <= 1 {
        return Ok(vec![word.to_string()]);
    }

    let mut cuts = Vec::with_capacity(nuclei.len() - 1);
    for pair in nuclei.windows(2) {
        let (_, prev_end) = pair[0];
        let (next_start, _) = pair[1];
        let cluster = &chars[prev_end..next_start];
        cuts.push(prev_end + onset_start(cluster, onsets));
    }

    let mut pieces = Vec::with_capacity(nuclei.len());
    let mut from = 0;
    for cut in cuts {
        pieces.push(chars[from..cut].iter().collect());
        from = cut;
    }
    pieces.push(chars[from..].iter().collect());
    Ok(pieces)
}

pub(crate) fn stem_prefixes_with(
    word: &str,
    prefixes: &[String],
    min_core_vowels: usize,
) -> (Vec<String>, String) {
    const MAX_STRIPPED: usize = 2;
    let mut stripped = Vec::new();
    let mut core = word;
    while stripped.len() < MAX_STRIPPED {
        let next = prefixes.iter().find_map(|p| {
            let rest = core.strip_prefix(p.as_str())?;
            // never separate a palatal `i` from its vowel
            let splits_palatal =
                p.ends_with('i') && rest.chars().next().is_some_and(is_vowel);
            (!p.is_empty() && !splits_palatal && nucleus_count(rest) >= min_core_vowels)
                .then_some((p, rest))
        });
        match next {
            Some((p, rest)) => {
                stripped.push(p.clone());
                core = rest;
            }
            None => break,
        }
    }
    (stripped, core.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syl(w: &str) -> Vec<String> {
        syllabify_with(w, &default_onsets()).unwrap()
    }

    #[test]
    fn nucleus_rule() {
        assert_eq!(nucleus_count("cię"), 1);
        assert_eq!(nucleus_count("zdrowie"), 2);
        assert_eq!(nucleus_count("ile"), 2);
        assert_eq!(nucleus_count("nauka"), 3);
        assert_eq!(nucleus_count("w"), 0);
        assert_eq!(nucleus_count("marii"), 2);
    }

    #[test]
    fn digraphs_stay_whole() {
        assert_eq!(syl("ojczyzno"), ["oj", "czy", "zno"]);
        assert_eq!(syl("szczęście"), ["szczę", "ście"]);
        assert_eq!(syl("drzewo"), ["drze", "wo"]);
    }

    #[test]
    fn hiatus_splits_between_vowels() {
        assert_eq!(syl("nauka"), ["na", "u", "ka"]);
    }

    #[test]
    fn word_edges_attach_to_nearest_nucleus() {
        assert_eq!(syl("księga"), ["księ", "ga"]);
        assert_eq!(syl("pierwszy"), ["pier", "wszy"]);
        assert_eq!(syl("tęsknię"), ["tęs", "knię"]);
    }

    #[test]
    fn rejects_non_letters() {
        let on = default_onsets();
        assert_eq!(syllabify_with("a1", &on), Err(SegmentError::NotALetter('1')));
        assert_eq!(syllabify_with("", &on), Err(SegmentError::EmptyWord));
    }

    #[test]
    fn stem_stops_at_two_prefixes() {
        let p = vec!["nie".to_string(), "za".to_string(), "po".to_string()];
        let (pre, core) = stem_prefixes_with("niezapomniany", &p, 2);
        assert_eq!(pre, ["nie", "za"]);
        assert_eq!(core, "pomniany");
    }

    #[test]
    fn stem_respects_palatal_i() {
        let p = vec!["ni".to_string()];
        let (pre, core) = stem_prefixes_with("niebiosa", &p, 1);
        assert!(pre.is_empty());
        assert_eq!(core, "niebiosa");
    }
}
