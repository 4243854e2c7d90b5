//! Streaming CoNLL-U reader.
//!
//! Token fields are stored as spans into one text buffer per sentence, so a
//! sentence costs two allocations regardless of its length.

use std::io::BufRead;
use std::ops::Range;

use crate::{Error, Result};

/// Sentences longer than this are treated as corrupt input.
pub const MAX_SENTENCE_TOKENS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
struct TokenRecord {
    form: Range<u32>,
    lemma: Range<u32>,
    upos: Range<u32>,
    deprel: Range<u32>,
    head: u32,
}

/// One dependency-parsed sentence. Token indices are 1-based; head 0 is the
/// root.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sentence {
    document: usize,
    index: usize,
    text: String,
    tokens: Vec<TokenRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub index: usize,
    pub form: &'a str,
    pub lemma: &'a str,
    pub upos: &'a str,
    pub head: usize,
    pub deprel: &'a str,
}

impl Sentence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sentence from `(form, lemma, upos, head, deprel)` rows.
    pub fn from_rows(rows: &[(&str, &str, &str, usize, &str)]) -> Result<Self> {
        let mut s = Sentence::new();
        for (form, lemma, upos, head, deprel) in rows {
            s.push(form, lemma, upos, *head, deprel);
        }
        s.validate().map_err(Error::Invalid)?;
        Ok(s)
    }

    fn span(&mut self, field: &str) -> Range<u32> {
        let start = self.text.len() as u32;
        self.text.push_str(field);
        start..self.text.len() as u32
    }

    /// Appends a token with index `len() + 1`.
    pub fn push(&mut self, form: &str, lemma: &str, upos: &str, head: usize, deprel: &str) {
        let rec = TokenRecord {
            form: self.span(form),
            lemma: self.span(lemma),
            upos: self.span(upos),
            deprel: self.span(deprel),
            head: head as u32,
        };
        self.tokens.push(rec);
    }

    /// Checks head ranges and self-loops.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.tokens.len();
        for (i, t) in self.tokens.iter().enumerate() {
            let head = t.head as usize;
            if head > n {
                return Err(format!("token {} has head {head} beyond sentence length {n}", i + 1));
            }
            if head == i + 1 {
                return Err(format!("token {} is its own head", i + 1));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Zero-based document counter within the stream (`# newdoc` comments).
    pub fn document(&self) -> usize {
        self.document
    }

    /// Zero-based sentence counter within the stream.
    pub fn index(&self) -> usize {
        self.index
    }

    fn field(&self, r: &Range<u32>) -> &str {
        &self.text[r.start as usize..r.end as usize]
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> Option<Token<'_>> {
        let rec = self.tokens.get(index.checked_sub(1)?)?;
        Some(Token {
            index,
            form: self.field(&rec.form),
            lemma: self.field(&rec.lemma),
            upos: self.field(&rec.upos),
            head: rec.head as usize,
            deprel: self.field(&rec.deprel),
        })
    }

    pub fn tokens(&self) -> impl Iterator<Item = Token<'_>> {
        (1..=self.len()).map(move |i| self.token(i).expect("index in range"))
    }

    /// Writes the sentence as CoNLL-U lines followed by a blank line. Columns
    /// not modelled here are written as `_`.
    pub fn write_conllu(&self, out: &mut String) {
        for t in self.tokens() {
            use std::fmt::Write;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
                t.index, t.form, t.lemma, t.upos, t.head, t.deprel
            );
        }
        out.push('\n');
    }
}

/// Lazily parses sentences from a byte stream.
///
/// Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped. After
/// an error the reader resynchronises at the next blank line.
pub struct ConlluReader<R> {
    input: R,
    buf: Vec<u8>,
    line: usize,
    document: usize,
    doc_has_sentences: bool,
    next_index: usize,
    resync: bool,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(input: R) -> Self {
        ConlluReader {
            input,
            buf: Vec::with_capacity(256),
            line: 0,
            document: 0,
            doc_has_sentences: false,
            next_index: 0,
            resync: false,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.line,
            message: message.into(),
        }
    }

    fn finish(&mut self, mut sentence: Sentence) -> Result<Sentence> {
        if let Err(msg) = sentence.validate() {
            return Err(self.err(format!("sentence ending here: {msg}")));
        }
        sentence.document = self.document;
        sentence.index = self.next_index;
        self.next_index += 1;
        self.doc_has_sentences = true;
        Ok(sentence)
    }

    fn read_sentence(&mut self) -> Option<Result<Sentence>> {
        let mut sentence = Sentence::new();
        loop {
            self.buf.clear();
            match self.input.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.resync = false;
                    return if sentence.is_empty() {
                        None
                    } else {
                        Some(self.finish(sentence))
                    };
                }
                Ok(_) => {}
                Err(e) => return Some(Err(Error::Stream(e))),
            }
            self.line += 1;
            let mut end = self.buf.len();
            while end > 0 && matches!(self.buf[end - 1], b'\n' | b'\r') {
                end -= 1;
            }
            if end == 0 {
                if self.resync {
                    self.resync = false;
                    continue;
                }
                if sentence.is_empty() {
                    continue;
                }
                return Some(self.finish(sentence));
            }
            if self.resync {
                continue;
            }
            let line = match std::str::from_utf8(&self.buf[..end]) {
                Ok(l) => l,
                Err(_) => return Some(self.fail("invalid UTF-8")),
            };
            if let Some(comment) = line.strip_prefix('#') {
                if comment.trim_start().starts_with("newdoc") && self.doc_has_sentences {
                    self.document += 1;
                    self.doc_has_sentences = false;
                }
                continue;
            }
            if let Err(e) = parse_token_line(line, &mut sentence) {
                let msg = e;
                return Some(self.fail(msg));
            }
        }
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> Result<T> {
        self.resync = true;
        Err(self.err(message))
    }
}

fn parse_token_line(line: &str, sentence: &mut Sentence) -> std::result::Result<(), String> {
    let mut cols: [&str; 10] = [""; 10];
    let mut n = 0;
    for field in line.split('\t') {
        if n == 10 {
            n += 1;
            break;
        }
        cols[n] = field;
        n += 1;
    }
    if n != 10 {
        let count = line.split('\t').count();
        return Err(format!("expected 10 tab-separated columns, found {count}"));
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(());
    }
    let id: usize = id
        .parse()
        .map_err(|_| format!("token id {id:?} is not an integer"))?;
    if id != sentence.len() + 1 {
        return Err(format!(
            "token id {id} out of sequence, expected {}",
            sentence.len() + 1
        ));
    }
    if id > MAX_SENTENCE_TOKENS {
        return Err(format!("sentence exceeds {MAX_SENTENCE_TOKENS} tokens"));
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| format!("HEAD {:?} is not an integer", cols[6]))?;
    sentence.push(cols[1], cols[2], cols[3], head, cols[7]);
    Ok(())
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_sentence()
    }
}

pub fn parse_conllu<R: BufRead>(input: R) -> ConlluReader<R> {
    ConlluReader::new(input)
}
