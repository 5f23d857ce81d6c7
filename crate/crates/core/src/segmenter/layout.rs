//! Spacing rules shared by [`normalize`] and [`detokenize`].
//!
//! Sub-word token streams carry no spaces, so the renderer decides where
//! spaces go. `normalize` rewrites text into exactly the form the renderer
//! produces, which makes `detokenize(tokenize(normalize(x)))` the identity
//! on normalized text.
//!
//! | before ↓ / after →          | word | opening | closing | neutral |
//! |-----------------------------|------|---------|---------|---------|
//! | line start                  | –    | –       | –       | –       |
//! | word                        | ` `  | ` `     | –       | ` `     |
//! | opening `( [ { „ “ «`       | –    | –       | –       | –       |
//! | closing `. , ; : ! ? ) ] } … ” » %` | ` ` | ` ` | –     | ` `     |
//! | neutral (everything else)   | ` `  | ` `     | –       | ` `     |
//!
//! Two identical neutral characters in a row (`--`) are written together.
//! The straight quotes `"` and `'` alternate between opening and closing
//! within a line, starting with opening. In character mode explicit space
//! tokens replace the table entirely for the gaps they occupy.

use unicode_normalization::UnicodeNormalization;

use super::token::{Special, Token};

/// Placeholder written for `_unk_`.
pub const UNK_GLYPH: char = '\u{FFFD}';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Open,
    Close,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Last {
    LineStart,
    Word,
    Punct(char, Side),
    Space,
}

fn fixed_side(c: char) -> Option<Side> {
    match c {
        '(' | '[' | '{' | '„' | '“' | '«' => Some(Side::Open),
        '.' | ',' | ';' | ':' | '!' | '?' | ')' | ']' | '}' | '…' | '”' | '»' | '%' => {
            Some(Side::Close)
        }
        '"' | '\'' => None,
        _ => Some(Side::Neutral),
    }
}

/// Incremental text builder that applies the spacing table.
#[derive(Debug)]
pub(crate) struct Layout {
    out: String,
    last: Last,
    quotes: [usize; 2],
}

impl Layout {
    pub fn new() -> Self {
        Layout {
            out: String::new(),
            last: Last::LineStart,
            quotes: [0, 0],
        }
    }

    fn side_of(&mut self, c: char) -> Side {
        if let Some(side) = fixed_side(c) {
            return side;
        }
        let slot = usize::from(c == '\'');
        let seen = self.quotes[slot];
        self.quotes[slot] += 1;
        if seen % 2 == 0 {
            Side::Open
        } else {
            Side::Close
        }
    }

    /// Inserts the separator owed before a new word.
    pub fn start_word(&mut self) {
        match self.last {
            Last::Word | Last::Punct(_, Side::Close | Side::Neutral) => self.out.push(' '),
            Last::LineStart | Last::Space | Last::Punct(_, Side::Open) => {}
        }
    }

    /// Appends word text; call [`Layout::start_word`] first for a new word.
    pub fn push_text(&mut self, s: &str) {
        self.out.push_str(s);
        self.last = Last::Word;
    }

    pub fn push_punct(&mut self, c: char) {
        let side = self.side_of(c);
        let space = match (self.last, side) {
            (Last::LineStart | Last::Space, _) => false,
            (_, Side::Close) => false,
            (Last::Punct(_, Side::Open), _) => false,
            (Last::Punct(p, Side::Neutral), Side::Neutral) if p == c => false,
            _ => true,
        };
        if space {
            self.out.push(' ');
        }
        self.out.push(c);
        self.last = Last::Punct(c, side);
    }

    pub fn push_space(&mut self) {
        self.out.push(' ');
        self.last = Last::Space;
    }

    pub fn newline(&mut self) {
        self.out.push('\n');
        self.last = Last::LineStart;
        self.quotes = [0, 0];
    }

    pub fn take(&mut self) -> String {
        std::mem::take(&mut self.out)
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Canonical text form.
///
/// Applies NFC, turns `\r\n` and `\r` into `\n`, drops all other whitespace
/// in favour of the spacing table (which collapses runs to a single space and
/// trims line ends).
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    let unified = nfc.replace("\r\n", "\n").replace('\r', "\n");
    let mut layout = Layout::new();
    for (i, line) in unified.split('\n').enumerate() {
        if i > 0 {
            layout.newline();
        }
        let mut word = String::new();
        for c in line.chars() {
            if c.is_alphanumeric() {
                word.push(c);
                continue;
            }
            if !word.is_empty() {
                layout.start_word();
                layout.push_text(&word);
                word.clear();
            }
            if !c.is_whitespace() {
                layout.push_punct(c);
            }
        }
        if !word.is_empty() {
            layout.start_word();
            layout.push_text(&word);
        }
    }
    layout.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Case {
    Up,
    Cap,
}

fn apply_case(surface: &str, case: Option<Case>) -> String {
    match case {
        None => surface.to_string(),
        Some(Case::Up) => surface.chars().flat_map(char::to_uppercase).collect(),
        Some(Case::Cap) => {
            let mut chars = surface.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
    }
}

/// Renders any token sequence as text.
///
/// Joined pieces are concatenated. A `++` not followed by a `--` piece (or the
/// reverse) loses its marker and the pieces are written as separate words.
/// `_cap_` / `_up_` apply to the following word, or to the rest of it when
/// they appear between joined pieces. `_unk_` is written as U+FFFD.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut r = Renderer::new();
    for t in tokens {
        r.push(t);
    }
    r.layout.finish()
}

/// Renders `tokens` as they would appear after `context` had been written,
/// returning only the new text.
pub fn detokenize_after(context: &[Token], tokens: &[Token]) -> String {
    let mut r = Renderer::new();
    for t in context {
        r.push(t);
    }
    r.layout.take();
    for t in tokens {
        r.push(t);
    }
    r.layout.finish()
}

struct Renderer {
    layout: Layout,
    pending: Option<Case>,
    word_case: Option<Case>,
    open_word: bool,
}

impl Renderer {
    fn new() -> Self {
        Renderer {
            layout: Layout::new(),
            pending: None,
            word_case: None,
            open_word: false,
        }
    }

    fn push(&mut self, token: &Token) {
        match token {
            Token::Special(Special::Up) => self.pending = Some(Case::Up),
            Token::Special(Special::Cap) => self.pending = Some(Case::Cap),
            Token::Special(Special::Eol) => {
                self.layout.newline();
                self.pending = None;
                self.open_word = false;
            }
            Token::Special(Special::Unk) => {
                self.layout.start_word();
                self.layout.push_text(&UNK_GLYPH.to_string());
                self.pending = None;
                self.open_word = false;
            }
            Token::Piece {
                surface,
                joins_prev,
                joins_next,
            } => {
                if self.open_word && *joins_prev {
                    if self.pending.is_some() {
                        self.word_case = self.pending.take();
                    }
                } else {
                    self.layout.start_word();
                    self.word_case = self.pending.take();
                }
                let text = apply_case(surface, self.word_case);
                if self.word_case == Some(Case::Cap) {
                    self.word_case = None;
                }
                self.layout.push_text(&text);
                self.open_word = *joins_next;
            }
            Token::Punct(c) => {
                self.layout.push_punct(*c);
                self.open_word = false;
            }
            Token::Space => {
                self.layout.push_space();
                self.open_word = false;
            }
        }
    }
}
