//! Lean identifier lexing, restricted to what appears in Peano-arithmetic
//! proof states. Double guillemets (`«x»`) are not supported.

/// Letter-like code points accepted at the start of an identifier atom.
pub fn is_letter_like(c: char) -> bool {
    let u = c as u32;
    (0x3b1..=0x3c9).contains(&u) && u != 0x3bb // lower Greek except λ
        || (0x391..=0x3a9).contains(&u) && u != 0x3a0 && u != 0x3a3 // upper Greek except Π Σ
        || (0x3ca..=0x3fb).contains(&u) // Coptic
        || (0x1f00..=0x1ffe).contains(&u) // polytonic Greek
        || (0x2100..=0x214f).contains(&u) // letter-like block (ℕ, ℤ, ...)
        || (0x1d49c..=0x1d59f).contains(&u) // script, double-struck, fraktur
}

pub fn is_subscript_alnum(c: char) -> bool {
    let u = c as u32;
    (0x2080..=0x2089).contains(&u)
        || (0x2090..=0x209c).contains(&u)
        || (0x1d62..=0x1d6a).contains(&u)
}

pub fn is_id_first(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || is_letter_like(c)
}

/// Inaccessible names are displayed as `a✝` or `a✝¹`; the marker and its
/// superscript index continue the name so such hypotheses rename as a unit.
pub fn is_inaccessible_mark(c: char) -> bool {
    matches!(c, '✝' | '¹' | '²' | '³' | '⁰' | '⁴'..='⁹')
}

pub fn is_id_rest(c: char) -> bool {
    is_id_first(c)
        || c.is_ascii_digit()
        || matches!(c, '\'' | '!' | '?')
        || is_subscript_alnum(c)
        || is_inaccessible_mark(c)
}

/// Strict validity: one or more atoms joined by single dots, each atom an
/// identifier start followed by identifier-rest characters.
pub fn is_valid_identifier(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(is_valid_atom)
}

fn is_valid_atom(atom: &str) -> bool {
    let mut chars = atom.chars();
    match chars.next() {
        Some(c) if is_id_first(c) => chars.all(is_id_rest),
        _ => false,
    }
}

/// Validity used while growing a match: a valid identifier, optionally
/// followed by one dangling `.` awaiting the next atom. This predicate is
/// closed under taking prefixes, so greedy extension finds dotted names.
pub fn is_identifier_prefix(s: &str) -> bool {
    match s.strip_suffix('.') {
        Some(head) => is_valid_identifier(head),
        None => is_valid_identifier(s),
    }
}

/// Greedy extension from one character while the growing prefix stays
/// acceptable. Returns the byte length of the munched text (possibly ending
/// in a dangling dot), or 0.
pub fn munch_len(text: &str, start: usize) -> usize {
    let rest = &text[start..];
    let mut len = 0;
    for (offset, c) in rest.char_indices() {
        let end = offset + c.len_utf8();
        if is_identifier_prefix(&rest[..end]) {
            len = end;
        } else {
            break;
        }
    }
    len
}

/// The longest identifier starting exactly at byte offset `start`, or
/// `None`. Dotted names such as `MyNat.add_comm` are a single identifier; a
/// trailing dot with no atom after it is not part of the match.
pub fn longest_identifier_at(text: &str, start: usize) -> Option<&str> {
    if start >= text.len() || !text.is_char_boundary(start) {
        return None;
    }
    let len = munch_len(text, start);
    let ident = text[start..start + len].trim_end_matches('.');
    (!ident.is_empty()).then_some(ident)
}

/// A lexed piece of text: either an identifier or a run of other characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token<'a> {
    Ident(&'a str),
    Other(&'a str),
}

impl<'a> Token<'a> {
    pub fn as_str(&self) -> &'a str {
        match self {
            Token::Ident(s) | Token::Other(s) => s,
        }
    }
}

/// Splits text into identifiers and single non-identifier characters by
/// trying the longest identifier at every position, left to right.
/// Identifiers are consumed whole, so `x` is never found inside `max` or
/// `h2x`; a numeral followed by letters (`2x`) lexes as `2` then `x`.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        if let Some(ident) = longest_identifier_at(text, i) {
            out.push(Token::Ident(ident));
            i += ident.len();
        } else {
            let width = text[i..].chars().next().expect("in bounds").len_utf8();
            out.push(Token::Other(&text[i..i + width]));
            i += width;
        }
    }
    out
}

/// Identifiers in order of appearance.
pub fn identifiers(text: &str) -> impl Iterator<Item = &str> {
    tokenize(text).into_iter().filter_map(|t| match t {
        Token::Ident(s) => Some(s),
        Token::Other(_) => None,
    })
}

/// True if `name` occurs in `text` as a whole identifier.
pub fn contains_identifier(text: &str, name: &str) -> bool {
    identifiers(text).any(|id| id == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_munch_examples() {
        assert_eq!(longest_identifier_at("succ_add x", 0), Some("succ_add"));
        assert_eq!(
            longest_identifier_at("MyNat.add_comm", 0),
            Some("MyNat.add_comm")
        );
        assert_eq!(longest_identifier_at("1 ≤ n", 0), None);
        assert_eq!(longest_identifier_at("1 ≤ n", "1 ≤ ".len()), Some("n"));
        assert_eq!(longest_identifier_at("h.", 0), Some("h"));
        assert_eq!(longest_identifier_at("h.1", 0), Some("h"));
        assert_eq!(longest_identifier_at("hd'", 0), Some("hd'"));
        assert_eq!(
            longest_identifier_at("contrapose! h", 0),
            Some("contrapose!")
        );
        assert_eq!(longest_identifier_at("x₁ + 1", 0), Some("x₁"));
        assert_eq!(longest_identifier_at("ℕ", 0), Some("ℕ"));
        assert_eq!(longest_identifier_at("a✝¹ : ℕ", 0), Some("a✝¹"));
        assert_eq!(longest_identifier_at("α β", 0), Some("α"));
        assert_eq!(longest_identifier_at("λ x", 0), None);
        assert_eq!(longest_identifier_at("⊢ n", 0), None);
        assert_eq!(longest_identifier_at("", 0), None);
    }

    #[test]
    fn validity() {
        assert!(is_valid_identifier("a.b.c"));
        assert!(!is_valid_identifier("a..b"));
        assert!(!is_valid_identifier("a."));
        assert!(!is_valid_identifier("1a"));
        assert!(is_identifier_prefix("a."));
        assert!(!is_identifier_prefix("a.."));
    }

    #[test]
    fn tokenize_respects_identifier_boundaries() {
        let toks: Vec<_> = identifiers("⊢ succ_add x + max2 = h2x").collect();
        assert_eq!(toks, vec!["succ_add", "x", "max2", "h2x"]);
        assert_eq!(identifiers("2x + 1").collect::<Vec<_>>(), vec!["x"]);
        assert!(contains_identifier("rw [add_comm a b]", "add_comm"));
        assert!(!contains_identifier("rw [add_comm' a b]", "add_comm"));
        assert!(!contains_identifier("rw [my_add_comm]", "add_comm"));
    }

    #[test]
    fn tokens_reassemble_input() {
        let text = "case succ\na d : ℕ\nhd : a + d = d + a\n⊢ MyNat.succ (a + d) = x₁";
        let joined: String = tokenize(text).iter().map(|t| t.as_str()).collect();
        assert_eq!(joined, text);
    }
}
