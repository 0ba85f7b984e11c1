//! Generator alphabets, freely reduced words and the text syntax for
//! presentations `<a,b | r1, r2>`.
//!
//! A [`Letter`] packs a generator index and an inversion bit into one
//! integer `2 * generator + inverse`. That integer doubles as the column
//! index of coset tables and core graphs, so the column order everywhere is
//! `g1, g1^-1, g2, g2^-1, ...`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("a presentation needs at least one generator")]
    EmptyAlphabet,
    #[error("generator `{0}` declared twice")]
    DuplicateGenerator(String),
    #[error("`{0}` is not a valid generator name")]
    InvalidGeneratorName(String),
    #[error("generator index {index} out of range for an alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("alphabet mismatch")]
    AlphabetMismatch,
}

/// A generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        Letter((generator as u32) << 1 | inverse as u32)
    }

    pub fn from_column(column: usize) -> Letter {
        Letter(column as u32)
    }

    #[inline]
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// Column of this letter in a table with columns `g1, g1^-1, g2, ...`.
    #[inline]
    pub fn column(self) -> usize {
        self.0 as usize
    }

    fn shifted(self, offset: usize) -> Letter {
        Letter::new(self.generator() + offset, self.is_inverse())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "x{}^-1", self.generator())
        } else {
            write!(f, "x{}", self.generator())
        }
    }
}

/// Ordered list of distinct generator names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Alphabet, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(WordError::InvalidGeneratorName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(WordError::DuplicateGenerator(name.clone()));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Number of table columns, one per generator and inverse.
    pub fn columns(&self) -> usize {
        2 * self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, generator: usize) -> &str {
        &self.names[generator]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Freely reduces a raw letter sequence, rejecting letters outside the
    /// alphabet.
    pub fn reduce(&self, letters: &[Letter]) -> Result<Word, WordError> {
        for l in letters {
            if l.generator() >= self.len() {
                return Err(WordError::IndexOutOfRange { index: l.generator(), size: self.len() });
            }
        }
        Ok(Word::reduce(letters))
    }

    pub fn check(&self, w: &Word) -> Result<(), WordError> {
        match w.max_generator() {
            Some(g) if g >= self.len() => Err(WordError::AlphabetMismatch),
            _ => Ok(()),
        }
    }

    pub fn letter_name(&self, l: Letter) -> String {
        if l.is_inverse() {
            format!("{}^-1", self.name(l.generator()))
        } else {
            self.name(l.generator()).to_string()
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn generator(g: usize) -> Word {
        Word(vec![Letter::new(g, false)])
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    pub fn reduce(letters: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator()).max()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut common = 0;
        let (a, b) = (&self.0, &other.0);
        while common < a.len().min(b.len()) && a[a.len() - 1 - common] == b[common].inverse() {
            common += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * common);
        out.extend_from_slice(&a[..a.len() - common]);
        out.extend_from_slice(&b[common..]);
        Word(out)
    }

    /// `self * other * self^-1`.
    pub fn conjugate(&self, other: &Word) -> Word {
        self.multiply(other).multiply(&self.inverse())
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..exponent.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// Moves every letter `offset` generators to the right, used when
    /// embedding a factor into a free product.
    pub fn shifted(&self, offset: usize) -> Word {
        Word(self.0.iter().map(|l| l.shifted(offset)).collect())
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alphabet }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Word {
        let letters: Vec<Letter> = iter.into_iter().collect();
        Word::reduce(&letters)
    }
}

/// Canonical text of a word: `a*b^-1*a`, identity as `1`.
pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return f.write_str("1");
        }
        for (i, l) in self.word.letters().iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(self.alphabet.name(l.generator()))?;
            if l.is_inverse() {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

/// A finite presentation `<S | R>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Presentation {
    alphabet: Alphabet,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Presentation, WordError> {
        for r in &relators {
            if let Some(g) = r.max_generator() {
                if g >= alphabet.len() {
                    return Err(WordError::IndexOutOfRange { index: g, size: alphabet.len() });
                }
            }
        }
        Ok(Presentation { alphabet, relators })
    }

    /// The free group on the given generator names.
    pub fn free<I, S>(names: I) -> Result<Presentation, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Presentation::new(Alphabet::new(names)?, Vec::new())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn generator_count(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_free(&self) -> bool {
        self.relators.iter().all(Word::is_identity)
    }

    pub fn check(&self, w: &Word) -> Result<(), WordError> {
        self.alphabet.check(w)
    }

    pub fn word_text(&self, w: &Word) -> String {
        w.display(&self.alphabet).to_string()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        parse_word(&self.alphabet, text)
    }

    pub fn parse_words(&self, text: &str) -> Result<Vec<Word>, WordError> {
        parse_words(&self.alphabet, text)
    }

    /// Free product `self * other`: generators of `other` follow those of
    /// `self` (renamed with a `_2` suffix on clashes), relators are
    /// concatenated. Returns the product and the generator offset of the
    /// second factor.
    pub fn free_product(&self, other: &Presentation) -> (Presentation, usize) {
        let offset = self.alphabet.len();
        let mut names = self.alphabet.names.clone();
        for name in &other.alphabet.names {
            let mut candidate = name.clone();
            while names.contains(&candidate) {
                candidate.push_str("_2");
            }
            names.push(candidate);
        }
        let mut relators = self.relators.clone();
        relators.extend(other.relators.iter().map(|r| r.shifted(offset)));
        let alphabet = Alphabet { names };
        (Presentation { alphabet, relators }, offset)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}|", self.alphabet.names.join(","))?;
        for (i, r) in self.relators.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            write!(f, "{}", r.display(&self.alphabet))?;
        }
        f.write_str(">")
    }
}

impl std::str::FromStr for Presentation {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Presentation, WordError> {
        parse_presentation(s)
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Int(i64),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(usize, Token)>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src, pos: 0, peeked: None }
    }

    fn lex(&mut self) -> Result<(usize, Token), WordError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Token::End));
        };
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((start, Token::Ident(self.src[start..self.pos].to_string())));
        }
        if c.is_ascii_digit() {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let value = self.src[start..self.pos].parse().map_err(|_| WordError::Syntax {
                position: start,
                expected: "an integer that fits in 64 bits".into(),
            })?;
            return Ok((start, Token::Int(value)));
        }
        if b"<>|,^*()=-".contains(&c) {
            self.pos += 1;
            return Ok((start, Token::Sym(c as char)));
        }
        Err(WordError::Syntax { position: start, expected: "a generator, `1`, `(`, `^`, `*`, `,`, `=`, `|`, `<` or `>`".into() })
    }

    fn peek(&mut self) -> Result<&(usize, Token), WordError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn next(&mut self) -> Result<(usize, Token), WordError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    fn expect_sym(&mut self, sym: char) -> Result<(), WordError> {
        match self.next()? {
            (_, Token::Sym(c)) if c == sym => Ok(()),
            (position, _) => Err(WordError::Syntax { position, expected: format!("`{sym}`") }),
        }
    }
}

struct WordParser<'a, 'b> {
    lexer: &'b mut Lexer<'a>,
    alphabet: &'b Alphabet,
}

impl WordParser<'_, '_> {
    fn starts_factor(token: &Token) -> bool {
        matches!(token, Token::Ident(_) | Token::Int(1) | Token::Sym('('))
    }

    fn word(&mut self) -> Result<Word, WordError> {
        let mut acc = self.factor()?;
        loop {
            let (_, token) = self.lexer.peek()?.clone();
            if token == Token::Sym('*') {
                self.lexer.next()?;
                acc = acc.multiply(&self.factor()?);
            } else if Self::starts_factor(&token) {
                acc = acc.multiply(&self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Word, WordError> {
        let mut base = self.atom()?;
        while self.lexer.peek()?.1 == Token::Sym('^') {
            self.lexer.next()?;
            let negative = if self.lexer.peek()?.1 == Token::Sym('-') {
                self.lexer.next()?;
                true
            } else {
                false
            };
            let exponent = match self.lexer.next()? {
                (_, Token::Int(k)) => k,
                (position, _) => return Err(WordError::Syntax { position, expected: "an integer exponent".into() }),
            };
            base = base.pow(if negative { -exponent } else { exponent });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Word, WordError> {
        match self.lexer.next()? {
            (_, Token::Ident(name)) => match self.alphabet.index_of(&name) {
                Some(g) => Ok(Word::generator(g)),
                None => Err(WordError::UnknownGenerator(name)),
            },
            (_, Token::Int(1)) => Ok(Word::identity()),
            (_, Token::Sym('(')) => {
                let inner = self.word()?;
                self.lexer.expect_sym(')')?;
                Ok(inner)
            }
            (position, _) => Err(WordError::Syntax { position, expected: "a generator, `1` or `(`".into() }),
        }
    }

    /// `lhs` or `lhs = rhs`, the latter read as `lhs * rhs^-1`.
    fn relation(&mut self) -> Result<Word, WordError> {
        let lhs = self.word()?;
        if self.lexer.peek()?.1 == Token::Sym('=') {
            self.lexer.next()?;
            let rhs = self.word()?;
            return Ok(lhs.multiply(&rhs.inverse()));
        }
        Ok(lhs)
    }
}

/// Parses `<g1,g2,...| r1, r2, ...>`. Relators may be equations `u = v`.
pub fn parse_presentation(text: &str) -> Result<Presentation, WordError> {
    let mut lexer = Lexer::new(text);
    lexer.expect_sym('<')?;
    let mut names = Vec::new();
    loop {
        match lexer.next()? {
            (_, Token::Ident(name)) => {
                if names.contains(&name) {
                    return Err(WordError::DuplicateGenerator(name));
                }
                names.push(name);
            }
            (_, Token::Sym('|')) if names.is_empty() => return Err(WordError::EmptyAlphabet),
            (position, _) => return Err(WordError::Syntax { position, expected: "a generator name".into() }),
        }
        match lexer.next()? {
            (_, Token::Sym(',')) => continue,
            (_, Token::Sym('|')) => break,
            (position, _) => return Err(WordError::Syntax { position, expected: "`,` or `|`".into() }),
        }
    }
    let alphabet = Alphabet::new(names)?;
    let mut relators = Vec::new();
    if lexer.peek()?.1 != Token::Sym('>') {
        let mut parser = WordParser { lexer: &mut lexer, alphabet: &alphabet };
        loop {
            relators.push(parser.relation()?);
            match parser.lexer.peek()?.1 {
                Token::Sym(',') => {
                    parser.lexer.next()?;
                }
                _ => break,
            }
        }
    }
    lexer.expect_sym('>')?;
    match lexer.next()? {
        (_, Token::End) => {}
        (position, _) => return Err(WordError::Syntax { position, expected: "end of input".into() }),
    }
    Presentation::new(alphabet, relators)
}

/// Parses a single word such as `a^2*b^-1` or `(a b)^3`.
pub fn parse_word(alphabet: &Alphabet, text: &str) -> Result<Word, WordError> {
    let mut lexer = Lexer::new(text);
    let w = WordParser { lexer: &mut lexer, alphabet }.word()?;
    match lexer.next()? {
        (_, Token::End) => Ok(w),
        (position, _) => Err(WordError::Syntax { position, expected: "end of input".into() }),
    }
}

/// Parses a comma separated list of words. Blank input is the empty list.
pub fn parse_words(alphabet: &Alphabet, text: &str) -> Result<Vec<Word>, WordError> {
    let mut lexer = Lexer::new(text);
    let mut out = Vec::new();
    if lexer.peek()?.1 == Token::End {
        return Ok(out);
    }
    let mut parser = WordParser { lexer: &mut lexer, alphabet };
    loop {
        out.push(parser.word()?);
        match parser.lexer.next()? {
            (_, Token::Sym(',')) => continue,
            (_, Token::End) => return Ok(out),
            (position, _) => return Err(WordError::Syntax { position, expected: "`,` or end of input".into() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn a() -> Letter {
        Letter::new(0, false)
    }
    fn b() -> Letter {
        Letter::new(1, false)
    }

    #[test]
    fn free_presentation_parses() {
        let p = parse_presentation("<a,b|>").unwrap();
        assert_eq!(p.alphabet().names(), ["a", "b"]);
        assert!(p.relators().is_empty());
        assert_eq!(p.to_string(), "<a,b|>");
    }

    #[test]
    fn equation_desugars() {
        let p = parse_presentation("<s,t| t^-1 s t = s^2>").unwrap();
        let (s, t) = (Letter::new(0, false), Letter::new(1, false));
        let expected = Word::reduce(&[t.inverse(), s, t, s.inverse(), s.inverse()]);
        assert_eq!(p.relators(), [expected]);
        assert_eq!(p.to_string(), "<s,t| t^-1*s*t*s^-1*s^-1>");
    }

    #[test]
    fn unknown_generator() {
        assert_eq!(parse_presentation("<a| b>"), Err(WordError::UnknownGenerator("b".into())));
    }

    #[test]
    fn empty_alphabet_and_syntax_errors() {
        assert_eq!(parse_presentation("<|>"), Err(WordError::EmptyAlphabet));
        assert!(matches!(parse_presentation("<a,b| a^>"), Err(WordError::Syntax { position: 8, .. })));
        assert!(matches!(parse_presentation("<a,b| a"), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_presentation("<a,a|>"), Err(WordError::DuplicateGenerator(_))));
        assert!(matches!(parse_presentation("<a|> extra"), Err(WordError::Syntax { .. })));
    }

    #[test]
    fn parenthesised_powers() {
        let p = parse_presentation("<a,b| a^2, b^2, (a b)^3>").unwrap();
        assert_eq!(p.relators().len(), 3);
        assert_eq!(p.word_text(&p.relators()[2]), "a*b*a*b*a*b");
        let q = parse_presentation("<a,b| a*a, b*b, (a*b)^3>").unwrap();
        assert_eq!(p, q);
        assert_eq!(p.parse_word("(a b)^0").unwrap(), Word::identity());
        assert_eq!(p.parse_word("1").unwrap(), Word::identity());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce(&[a(), a().inverse(), b()]).letters(), [b()]);
        assert_eq!(Word::reduce(&[]), Word::identity());
        assert_eq!(Word::reduce(&[a(), b(), b().inverse(), a()]).letters(), [a(), a()]);
        assert_eq!(
            ab().reduce(&[Letter::new(2, false)]),
            Err(WordError::IndexOutOfRange { index: 2, size: 2 })
        );
    }

    #[test]
    fn multiply_and_invert() {
        let alphabet = ab();
        let w = |s: &str| parse_word(&alphabet, s).unwrap();
        assert_eq!(w("a").multiply(&w("a^-1")), Word::identity());
        assert_eq!(w("a*b").inverse(), w("b^-1*a^-1"));
        assert_eq!(w("a*b").multiply(&w("b^-1*a")), w("a^2"));
        assert_eq!(w("a*b").display(&alphabet).to_string(), "a*b");
    }

    #[test]
    fn word_lists() {
        let alphabet = ab();
        assert_eq!(parse_words(&alphabet, "  ").unwrap(), vec![]);
        let ws = parse_words(&alphabet, "a^2, b, a b a^-1").unwrap();
        assert_eq!(ws.len(), 3);
    }

    fn raw_letters(gens: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..gens, any::<bool>()).prop_map(|(g, i)| Letter::new(g, i)), 0..24)
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        raw_letters(3).prop_map(|l| Word::reduce(&l))
    }

    fn presentation_strategy() -> impl Strategy<Value = Presentation> {
        (1usize..4).prop_flat_map(|n| {
            prop::collection::vec(raw_letters(n), 0..4).prop_map(move |rels| {
                let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
                Presentation::new(Alphabet::new(names).unwrap(), rels.iter().map(|r| Word::reduce(r)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(raw in raw_letters(3)) {
            let once = Word::reduce(&raw);
            prop_assert!(once.len() <= raw.len());
            prop_assert_eq!(Word::reduce(once.letters()), once);
        }

        #[test]
        fn multiplication_is_associative(u in word_strategy(), v in word_strategy(), w in word_strategy()) {
            prop_assert_eq!(u.multiply(&v).multiply(&w), u.multiply(&v.multiply(&w)));
            let concat: Vec<Letter> = u.letters().iter().chain(v.letters()).copied().collect();
            prop_assert_eq!(u.multiply(&v), Word::reduce(&concat));
        }

        #[test]
        fn inverse_cancels(u in word_strategy()) {
            prop_assert!(u.multiply(&u.inverse()).is_identity());
            prop_assert_eq!(u.inverse().inverse(), u);
        }

        #[test]
        fn presentation_round_trip(p in presentation_strategy()) {
            prop_assert_eq!(parse_presentation(&p.to_string()).unwrap(), p);
        }
    }
}
