#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use gendermention::distributions::reconstruct_joint;
use gendermention::infotheory::build_marker_table;
use gendermention::lexicon::{build_lexicons, labor_marginal, parse_labor_stats, Lexicons};
use gendermention::pipeline::read_counts_auto;
use gendermention::synth::{SynthOccupation, SynthSpec};
use gendermention::{MarkerTable, MentionCounts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join("core").join("data")
}

pub fn data(name: &str) -> PathBuf {
    data_dir().join(name)
}

pub fn lexicons() -> Lexicons {
    let occ = fs::read_to_string(data("occupations.txt")).unwrap();
    let adj = fs::read_to_string(data("adjectives.conf")).unwrap();
    build_lexicons(&occ, &adj).unwrap()
}

pub fn counts(name: &str) -> MentionCounts {
    read_counts_auto(&data(name)).unwrap()
}

/// Markers from a counts fixture and the labor fixture.
pub fn fixture_markers(counts_file: &str) -> MarkerTable {
    let lex = lexicons();
    let labor = parse_labor_stats::<f64, _>(fs::File::open(data("labor_appendix.csv")).unwrap(), &lex.occupations)
        .unwrap();
    let marginal = labor_marginal(&labor.table).unwrap();
    let rec = reconstruct_joint(&marginal, &counts(counts_file)).unwrap();
    build_marker_table(&marginal, &rec.joint).unwrap().table
}

/// occupation -> (reddit, wikipedia) MI from the appendix fixture.
pub fn appendix_mi() -> BTreeMap<String, (f64, f64)> {
    let mut rdr = csv::Reader::from_path(data("mi_appendix.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), (r[1].parse().unwrap(), r[2].parse().unwrap()))
        })
        .collect()
}

/// A random spec whose no-mention cells are all nonnegative.
pub fn random_feasible_spec(rng: &mut impl Rng, max_occupations: usize) -> SynthSpec<f64> {
    let k = rng.random_range(1..=max_occupations);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut occupations = BTreeMap::new();
    for (i, w) in raw.iter().enumerate() {
        let f: f64 = rng.random_range(0.01..0.99);
        let m: f64 = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..0.3) };
        let (lo, hi) = if m > 0.0 {
            ((1.0 - (1.0 - f) / m).max(0.0), (f / m).min(1.0))
        } else {
            (0.0, 1.0)
        };
        let phi = lo + (hi - lo) * rng.random::<f64>();
        occupations.insert(
            format!("occ{i:02}"),
            SynthOccupation {
                weight: w / total,
                femaleness: f,
                mention_rate: m,
                female_share: phi,
            },
        );
    }
    SynthSpec::new(occupations, 1_000_000, rng.random()).unwrap()
}

const FILLER_NOUNS: [&str; 4] = ["house", "city", "report", "team"];
const FILLER_ADJ: [&str; 5] = ["tall", "young", "local", "female", "male"];
const MODIFIERS: [&str; 10] = [
    "female", "male", "woman", "man", "feminine", "masculine", "nonbinary", "tall", "young", "Female",
];

/// Pseudo-random CoNLL-U text of at least `target_bytes`, built from the
/// fixture lexicons. Sentences mix amod mentions, predicate adjectives,
/// proper nouns, plural titles and modifiers on non-occupation nouns.
pub fn synthetic_conllu(target_bytes: usize, seed: u64) -> String {
    let lex = lexicons();
    let occs: Vec<&String> = lex.occupations.entries().iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(target_bytes + 4096);
    let mut sent = 0usize;
    while out.len() < target_bytes {
        if sent % 50 == 0 {
            let _ = writeln!(out, "# newdoc id = d{}", sent / 50);
        }
        let _ = writeln!(out, "# sent_id = {sent}");
        let occ = occs[rng.random_range(0..occs.len())].as_str();
        let noun_upos = if rng.random_bool(0.05) { "PROPN" } else { "NOUN" };
        let lemma = if rng.random_bool(0.1) { occ.to_uppercase() } else { occ.to_string() };
        let adj = MODIFIERS[rng.random_range(0..MODIFIERS.len())];
        let mut rows: Vec<(String, String, &str, usize, &str)> = Vec::new();
        match rng.random_range(0..5) {
            // DET ADJ NOUN VERB .
            0 | 1 => {
                rows.push(("The".into(), "the".into(), "DET", 3, "det"));
                rows.push((adj.into(), adj.to_lowercase(), "ADJ", 3, "amod"));
                rows.push((occ.into(), lemma, noun_upos, 4, "nsubj"));
                rows.push(("works".into(), "work".into(), "VERB", 0, "root"));
            }
            // DET NOUN AUX ADJ .
            2 => {
                rows.push(("The".into(), "the".into(), "DET", 2, "det"));
                rows.push((occ.into(), lemma, noun_upos, 4, "nsubj"));
                rows.push(("is".into(), "be".into(), "AUX", 4, "cop"));
                rows.push((adj.into(), adj.to_lowercase(), "ADJ", 0, "root"));
            }
            // two adjectives on one noun, sometimes conflicting
            3 => {
                let second = MODIFIERS[rng.random_range(0..MODIFIERS.len())];
                rows.push((adj.into(), adj.to_lowercase(), "ADJ", 3, "amod"));
                rows.push((second.into(), second.to_lowercase(), "ADJ", 3, "amod"));
                rows.push((occ.into(), lemma, noun_upos, 4, "nsubj"));
                rows.push(("left".into(), "leave".into(), "VERB", 0, "root"));
            }
            // occupation next to a modified filler noun
            _ => {
                let filler = FILLER_NOUNS[rng.random_range(0..FILLER_NOUNS.len())];
                let fadj = FILLER_ADJ[rng.random_range(0..FILLER_ADJ.len())];
                rows.push((occ.into(), lemma, noun_upos, 2, "nsubj"));
                rows.push(("visited".into(), "visit".into(), "VERB", 0, "root"));
                rows.push(("a".into(), "a".into(), "DET", 5, "det"));
                rows.push((fadj.into(), fadj.into(), "ADJ", 5, "amod"));
                rows.push((filler.into(), filler.into(), "NOUN", 2, "obj"));
            }
        }
        let root = rows.iter().position(|r| r.3 == 0).unwrap() + 1;
        rows.push((".".into(), ".".into(), "PUNCT", root, "punct"));
        for (i, (form, lemma, upos, head, rel)) in rows.iter().enumerate() {
            let _ = writeln!(out, "{}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_", i + 1);
        }
        out.push('\n');
        sent += 1;
    }
    out
}

/// Splits CoNLL-U text into `k` contiguous pieces at sentence boundaries.
pub fn split_sentences(text: &str, k: usize) -> Vec<&str> {
    let bounds: Vec<usize> = text.match_indices("\n\n").map(|(i, _)| i + 2).collect();
    let mut pieces = Vec::with_capacity(k);
    let mut start = 0;
    for s in 1..k {
        let want = text.len() * s / k;
        let cut = bounds[bounds.partition_point(|&b| b < want).min(bounds.len() - 1)].max(start);
        pieces.push(&text[start..cut]);
        start = cut;
    }
    pieces.push(&text[start..]);
    pieces
}
