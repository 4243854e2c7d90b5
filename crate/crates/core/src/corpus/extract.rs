//! `amod`-based extraction of gender-modified occupation nouns.

use std::borrow::Cow;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::conllu::{parse_conllu, Sentence};
use super::counts::MentionCounts;
use crate::lexicon::{GenderAdjectiveLexicon, GenderMark, OccupationLexicon};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub document: usize,
    pub sentence: usize,
    /// 1-based token index of the occupation noun.
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionEvent {
    pub occupation: String,
    pub gender_mark: GenderMark,
    pub location: Location,
}

fn lowercase(s: &str) -> Cow<'_, str> {
    if s.bytes().any(|b| b.is_ascii_uppercase() || !b.is_ascii()) {
        Cow::Owned(s.to_lowercase())
    } else {
        Cow::Borrowed(s)
    }
}

const MARK_ORDER: [GenderMark; 3] = [GenderMark::Female, GenderMark::Male, GenderMark::Excluded];

/// Calls `visit(lemma, token_index, marks)` for every occupation noun, where
/// `marks` holds the distinct gender classes of its `amod` dependents in
/// female, male, excluded order (or just `Unmarked`).
fn scan<'l, F>(
    sentence: &Sentence,
    occupations: &'l OccupationLexicon,
    adjectives: &GenderAdjectiveLexicon,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&'l str, usize, &[GenderMark]) -> Result<()>,
{
    // (head, class bit) for gender adjectives attached via amod
    let mut attached: Vec<(usize, u8)> = Vec::new();
    for t in sentence.tokens() {
        if t.deprel == "amod" && t.head != 0 {
            if let Some(mark) = adjectives.classify(&lowercase(t.lemma)) {
                let bit = MARK_ORDER.iter().position(|m| *m == mark).expect("gendered mark") as u8;
                attached.push((t.head, 1 << bit));
            }
        }
    }
    let mut marks = Vec::with_capacity(3);
    for t in sentence.tokens() {
        if t.upos != "NOUN" {
            continue;
        }
        let lemma = lowercase(t.lemma);
        let Some(entry) = occupations.entries().get(lemma.as_ref()) else {
            continue;
        };
        let mask = attached
            .iter()
            .filter(|(h, _)| *h == t.index)
            .fold(0u8, |acc, (_, b)| acc | b);
        marks.clear();
        if mask == 0 {
            marks.push(GenderMark::Unmarked);
        } else {
            marks.extend(
                MARK_ORDER
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, m)| *m),
            );
        }
        visit(entry.as_str(), t.index, &marks)?;
    }
    Ok(())
}

/// Mention events for every occupation noun (UPOS `NOUN`, lowercased lemma in
/// the lexicon). A noun with several distinct gender classes attached yields
/// one event per class.
pub fn extract_mentions(
    sentence: &Sentence,
    occupations: &OccupationLexicon,
    adjectives: &GenderAdjectiveLexicon,
) -> Vec<MentionEvent> {
    let mut events = Vec::new();
    scan(sentence, occupations, adjectives, |occ, token, marks| {
        let location = Location {
            document: sentence.document(),
            sentence: sentence.index(),
            token,
        };
        events.extend(marks.iter().map(|m| MentionEvent {
            occupation: occ.to_string(),
            gender_mark: *m,
            location,
        }));
        Ok(())
    })
    .expect("event collection is infallible");
    events
}

/// Adds one sentence to `counts` without materialising events.
pub fn count_sentence(
    counts: &mut MentionCounts,
    sentence: &Sentence,
    occupations: &OccupationLexicon,
    adjectives: &GenderAdjectiveLexicon,
) -> Result<()> {
    scan(sentence, occupations, adjectives, |occ, _, marks| counts.record(occ, marks))
}

/// Counts mentions in one CoNLL-U stream.
pub fn count_reader<R: BufRead>(
    input: R,
    occupations: &OccupationLexicon,
    adjectives: &GenderAdjectiveLexicon,
) -> Result<MentionCounts> {
    let mut counts = MentionCounts::new();
    for sentence in parse_conllu(input) {
        count_sentence(&mut counts, &sentence?, occupations, adjectives)?;
    }
    Ok(counts)
}

pub fn count_file(
    path: &Path,
    occupations: &OccupationLexicon,
    adjectives: &GenderAdjectiveLexicon,
) -> Result<MentionCounts> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    count_reader(BufReader::with_capacity(1 << 20, file), occupations, adjectives).map_err(|e| match e {
        Error::Format { line, message } => Error::Format {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Counts each shard on the rayon pool and merges in shard order. The first
/// failing shard (by position) determines the error.
pub fn count_shards(
    paths: &[PathBuf],
    occupations: &OccupationLexicon,
    adjectives: &GenderAdjectiveLexicon,
) -> Result<MentionCounts> {
    let parts: Vec<Result<MentionCounts>> = paths
        .par_iter()
        .map(|p| count_file(p, occupations, adjectives))
        .collect();
    let mut total = MentionCounts::new();
    for part in parts {
        total.merge_from(&part?)?;
    }
    Ok(total)
}
