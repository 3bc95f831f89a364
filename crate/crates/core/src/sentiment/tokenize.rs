use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    /// A run of punctuation characters such as `!!` or `?!`.
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// A letter was repeated three or more times and collapsed to two.
    pub elongated: bool,
    base: Option<String>,
}

impl Token {
    fn word(raw: &str) -> Self {
        let (text, elongated) = collapse_runs(raw, 2);
        let base = elongated.then(|| collapse_runs(raw, 1).0);
        Self { text, kind: TokenKind::Word, elongated, base }
    }

    fn punct(raw: &str) -> Self {
        Self { text: String::from(raw), kind: TokenKind::Punct, elongated: false, base: None }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    /// Spelling with every elongated run reduced to one letter (`sooooo` → `so`).
    pub fn base(&self) -> &str {
        self.base.as_deref().unwrap_or(&self.text)
    }

    /// Forms to try against a lexicon, most literal first.
    pub fn lookup_forms(&self) -> impl Iterator<Item = &str> {
        core::iter::once(self.text.as_str()).chain(self.base.as_deref())
    }

    /// Punctuation run made only of exclamation marks.
    pub fn is_exclamation(&self) -> bool {
        self.kind == TokenKind::Punct && self.text.chars().all(|c| c == '!')
    }
}

/// Caps runs of 3+ identical letters at `keep`; runs shorter than 3 are untouched.
fn collapse_runs(word: &str, keep: usize) -> (String, bool) {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::with_capacity(word.len());
    let mut collapsed = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i + 1;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        let run = j - i;
        let emit = if c.is_alphabetic() && run >= 3 {
            collapsed = true;
            keep
        } else {
            run
        };
        out.extend(core::iter::repeat_n(c, emit));
        i = j;
    }
    (out, collapsed)
}

/// Lowercases and splits `text` into words and punctuation runs.
///
/// Apostrophes inside a word are kept (`don't`); whitespace separates tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let lower: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < lower.len() {
        let c = lower[i];
        if c.is_alphanumeric() {
            let start = i;
            while i < lower.len() {
                let d = lower[i];
                let joins = matches!(d, '\'' | '’')
                    && i > start
                    && lower.get(i + 1).is_some_and(|n| n.is_alphanumeric());
                if d.is_alphanumeric() || joins {
                    i += 1;
                } else {
                    break;
                }
            }
            let word: String = lower[start..i].iter().map(|&c| if c == '’' { '\'' } else { c }).collect();
            tokens.push(Token::word(&word));
        } else if c.is_whitespace() {
            i += 1;
        } else {
            let start = i;
            while i < lower.len() && !lower[i].is_alphanumeric() && !lower[i].is_whitespace() {
                i += 1;
            }
            let run: String = lower[start..i].iter().collect();
            tokens.push(Token::punct(&run));
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn apostrophes_and_punctuation() {
        let t = tokenize("Don't PANIC!!");
        assert_eq!(texts(&t), ["don't", "panic", "!!"]);
        assert_eq!(t[2].kind, TokenKind::Punct);
        assert!(t[2].is_exclamation());
        assert_eq!(texts(&tokenize("'quoted' words?!")), ["'", "quoted", "'", "words", "?!"]);
    }

    #[test]
    fn elongation() {
        let t = tokenize("sooooo good");
        assert_eq!(texts(&t), ["soo", "good"]);
        assert!(t[0].elongated && !t[1].elongated);
        assert_eq!(t[0].base(), "so");
        assert_eq!(t[1].base(), "good");
        assert_eq!(tokenize("gooood")[0].lookup_forms().collect::<Vec<_>>(), ["good", "god"]);
        assert!(!tokenize("2000")[0].elongated);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   ").is_empty());
    }
}
