use std::fmt;
use std::str::FromStr;

use super::SegmentError;

/// Marker tokens that carry no surface text of their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Special {
    /// The next word is written in capitals.
    Up,
    /// The next word starts with a capital letter.
    Cap,
    /// End of line.
    Eol,
    /// Anything the vocabulary does not know.
    Unk,
}

impl Special {
    pub const ALL: [Special; 4] = [Special::Unk, Special::Eol, Special::Cap, Special::Up];

    pub fn as_str(self) -> &'static str {
        match self {
            Special::Up => "_up_",
            Special::Cap => "_cap_",
            Special::Eol => "_eol_",
            Special::Unk => "_unk_",
        }
    }
}

/// Serialized spelling of an explicit space (character mode only).
pub const SPACE_TOKEN: &str = "_sp_";

/// One unit of the language-model token stream.
///
/// Pieces are lowercase fragments of a word. A word split into several
/// pieces links them with `joins_next` / `joins_prev`, which serialize as a
/// trailing `++` and a leading `--` respectively.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Special(Special),
    Piece {
        surface: String,
        joins_prev: bool,
        joins_next: bool,
    },
    Punct(char),
    /// A literal space; only produced in character mode.
    Space,
}

impl Token {
    pub const UP: Token = Token::Special(Special::Up);
    pub const CAP: Token = Token::Special(Special::Cap);
    pub const EOL: Token = Token::Special(Special::Eol);
    pub const UNK: Token = Token::Special(Special::Unk);

    pub fn piece(surface: impl Into<String>, joins_prev: bool, joins_next: bool) -> Token {
        Token::Piece {
            surface: surface.into(),
            joins_prev,
            joins_next,
        }
    }

    pub fn is_piece(&self) -> bool {
        matches!(self, Token::Piece { .. })
    }

    pub fn is_case_marker(&self) -> bool {
        matches!(self, Token::Special(Special::Up | Special::Cap))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Special(s) => f.write_str(s.as_str()),
            Token::Piece {
                surface,
                joins_prev,
                joins_next,
            } => {
                if *joins_prev {
                    f.write_str("--")?;
                }
                f.write_str(surface)?;
                if *joins_next {
                    f.write_str("++")?;
                }
                Ok(())
            }
            Token::Punct(c) => write!(f, "{c}"),
            Token::Space => f.write_str(SPACE_TOKEN),
        }
    }
}

impl FromStr for Token {
    type Err = SegmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        for special in Special::ALL {
            if s == special.as_str() {
                return Ok(Token::Special(special));
            }
        }
        if s == SPACE_TOKEN {
            return Ok(Token::Space);
        }
        let mut chars = s.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if !c.is_alphanumeric() && !c.is_whitespace() {
                return Ok(Token::Punct(c));
            }
        }
        let (joins_prev, rest) = match s.strip_prefix("--") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (joins_next, surface) = match rest.strip_suffix("++") {
            Some(rest) => (true, rest),
            None => (false, rest),
        };
        if surface.is_empty()
            || surface
                .chars()
                .any(|c| c.is_whitespace() || c == '+' || c == '-')
        {
            return Err(SegmentError::BadToken(s.to_string()));
        }
        Ok(Token::Piece {
            surface: surface.to_string(),
            joins_prev,
            joins_next,
        })
    }
}

/// Writes tokens in the interchange format: single spaces between tokens and
/// a trailing newline.
pub fn format_stream(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.to_string());
    }
    out.push('\n');
    out
}

/// Parses the interchange format. Any run of whitespace separates tokens.
pub fn parse_stream(text: &str) -> Result<Vec<Token>, SegmentError> {
    text.split_whitespace().map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connector_spelling() {
        assert_eq!(Token::piece("po", true, true).to_string(), "--po++");
        assert_eq!(Token::piece("li", false, true).to_string(), "li++");
        assert_eq!(Token::piece("two", true, false).to_string(), "--two");
        assert_eq!("--po++".parse::<Token>().unwrap(), Token::piece("po", true, true));
    }

    #[test]
    fn punct_and_specials_parse() {
        assert_eq!("-".parse::<Token>().unwrap(), Token::Punct('-'));
        assert_eq!("+".parse::<Token>().unwrap(), Token::Punct('+'));
        assert_eq!("_".parse::<Token>().unwrap(), Token::Punct('_'));
        assert_eq!("_eol_".parse::<Token>().unwrap(), Token::EOL);
        assert_eq!("_sp_".parse::<Token>().unwrap(), Token::Space);
        assert_eq!("a".parse::<Token>().unwrap(), Token::piece("a", false, false));
    }

    #[test]
    fn malformed_tokens_rejected() {
        for bad in ["--", "++", "----", "a-b", "--a+b"] {
            assert!(bad.parse::<Token>().is_err(), "{bad}");
        }
    }

    #[test]
    fn stream_roundtrip() {
        let toks = vec![Token::CAP, Token::piece("li", false, true), Token::piece("two", true, false), Token::Punct('!'), Token::EOL];
        let s = format_stream(&toks);
        assert_eq!(s, "_cap_ li++ --two ! _eol_\n");
        assert_eq!(parse_stream(&s).unwrap(), toks);
    }
}
