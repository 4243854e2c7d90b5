//! Perceived ("coded") occupation gender from word embeddings.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::infotheory::MarkerTable;
use crate::lexicon::Gender;
use crate::num::sig12;
use crate::stats::{bootstrap_mean, GroupMIStat};
use crate::{Error, Real, Result};

pub const DEFAULT_FEMALE_TERMS: [&str; 3] = ["female", "feminine", "woman"];
pub const DEFAULT_MALE_TERMS: [&str; 3] = ["male", "masculine", "man"];

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    vectors: HashMap<String, Vec<T>>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Inserts or replaces a vector; returns true if the word was present.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<T>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch(self.dim, vector.len()));
        }
        Ok(self.vectors.insert(word.into(), vector).is_some())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.vectors.get(word).map(Vec::as_slice)
    }
}

/// Parses whitespace-separated text vectors, `word v1 ... vd` per line, with an
/// optional leading `count dim` header. Later duplicates replace earlier ones.
pub fn read_embeddings<T: Real, R: BufRead>(input: R) -> Result<EmbeddingTable<T>> {
    let mut table: Option<EmbeddingTable<T>> = None;
    let mut declared_count = None;
    let mut first = true;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if first {
            first = false;
            if let [c, d] = fields[..] {
                if let (Ok(c), Ok(d)) = (c.parse::<usize>(), d.parse::<usize>()) {
                    if d == 0 {
                        return Err(Error::Format {
                            line: lineno,
                            message: "embedding dimension is 0".into(),
                        });
                    }
                    declared_count = Some(c);
                    table = Some(EmbeddingTable::new(d));
                    continue;
                }
            }
        }
        let (word, values) = (fields[0], &fields[1..]);
        let t = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
        if values.len() != t.dim || values.is_empty() {
            return Err(Error::Format {
                line: lineno,
                message: format!("expected {} vector components, found {}", t.dim, values.len()),
            });
        }
        let v = values
            .iter()
            .map(|s| {
                s.parse::<f64>().ok().filter(|x| x.is_finite()).map(T::lit).ok_or_else(|| Error::Format {
                    line: lineno,
                    message: format!("bad vector component {s:?}"),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        if t.insert(word, v)? {
            log::warn!("line {lineno}: duplicate embedding for {word:?}; keeping the later one");
        }
    }
    let table = table.ok_or_else(|| Error::invalid("embedding file is empty"))?;
    if let Some(c) = declared_count.filter(|&c| c != table.len()) {
        log::warn!("embedding header declares {c} words, read {}", table.len());
    }
    Ok(table)
}

pub fn load_embeddings<T: Real>(path: impl AsRef<Path>) -> Result<EmbeddingTable<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file)).map_err(|e| match e {
        Error::Format { line, message } => Error::invalid(format!("{}: line {line}: {message}", path.display())),
        other => other,
    })
}

pub fn cosine<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let (mut uv, mut uu, mut vv) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in u.iter().zip(v) {
        uv = uv + a * b;
        uu = uu + a * a;
        vv = vv + b * b;
    }
    if uu == T::zero() || vv == T::zero() {
        return Err(Error::invalid("cosine of a zero vector"));
    }
    Ok((uv / (uu.sqrt() * vv.sqrt())).max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodednessScore<T> {
    pub occupation: String,
    pub sim_female: T,
    pub sim_male: T,
    /// `sim_female` if it exceeds `sim_male`, else `-sim_male`.
    pub score: T,
    pub coded: Gender,
}

impl<T: Real> CodednessScore<T> {
    pub fn from_similarities(occupation: impl Into<String>, sim_female: T, sim_male: T) -> Self {
        let score = if sim_female > sim_male { sim_female } else { -sim_male };
        CodednessScore {
            occupation: occupation.into(),
            sim_female,
            sim_male,
            score,
            coded: if score > T::zero() { Gender::Female } else { Gender::Male },
        }
    }
}

/// Mean cosine similarity of the occupation to each attribute group. Words are
/// looked up lowercased.
pub fn codedness<T: Real, S: AsRef<str>>(
    occupation: &str,
    table: &EmbeddingTable<T>,
    female_terms: &[S],
    male_terms: &[S],
) -> Result<CodednessScore<T>> {
    if female_terms.is_empty() || male_terms.is_empty() {
        return Err(Error::invalid("attribute word groups must be non-empty"));
    }
    let lookup = |w: &str| table.get(&w.to_lowercase());
    let missing: Vec<String> = std::iter::once(occupation)
        .chain(female_terms.iter().map(AsRef::as_ref))
        .chain(male_terms.iter().map(AsRef::as_ref))
        .filter(|w| lookup(w).is_none())
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingWords(missing));
    }
    let occ = lookup(occupation).unwrap();
    let mean_sim = |terms: &[S]| -> Result<T> {
        let mut s = T::zero();
        for t in terms {
            s = s + cosine(occ, lookup(t.as_ref()).unwrap())?;
        }
        Ok(s / T::from_usize(terms.len()).unwrap())
    };
    Ok(CodednessScore::from_similarities(occupation, mean_sim(female_terms)?, mean_sim(male_terms)?))
}

pub fn write_scores_csv<T: Real, W: Write>(scores: &[CodednessScore<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["occupation", "sim_female", "sim_male", "score", "coded"])?;
    for s in scores {
        w.write_record([
            s.occupation.as_str(),
            &sig12(s.sim_female),
            &sig12(s.sim_male),
            &sig12(s.score),
            s.coded.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Bootstrap MI summaries for the female- and male-coded groups, taking each
/// occupation's MI from `mi`.
pub fn group_comparison_with<T: Real>(
    scores: &[CodednessScore<T>],
    mi: impl Fn(&str) -> Option<T>,
    resamples: usize,
    seed: u64,
) -> Result<(GroupMIStat<T>, GroupMIStat<T>)> {
    let mut groups: [Vec<T>; 2] = [Vec::new(), Vec::new()];
    let mut undefined = Vec::new();
    for s in scores {
        match mi(&s.occupation) {
            Some(v) => groups[s.coded.index()].push(v),
            None => undefined.push(s.occupation.clone()),
        }
    }
    if !undefined.is_empty() {
        return Err(Error::invalid(format!("no MI value for: {}", undefined.join(", "))));
    }
    let mut out = Vec::with_capacity(2);
    for g in Gender::ALL {
        let label = format!("{}-coded", g.as_str());
        if groups[g.index()].is_empty() {
            return Err(Error::invalid(format!("{label} group is empty")));
        }
        out.push(bootstrap_mean(&label, &groups[g.index()], resamples, seed)?);
    }
    let male = out.pop().unwrap();
    let female = out.pop().unwrap();
    Ok((female, male))
}

pub fn group_mi_comparison<T: Real>(
    scores: &[CodednessScore<T>],
    markers: &MarkerTable<T>,
    resamples: usize,
    seed: u64,
) -> Result<(GroupMIStat<T>, GroupMIStat<T>)> {
    group_comparison_with(scores, |o| markers.get(o)?.mi_bits, resamples, seed)
}

pub fn group_values_comparison<T: Real>(
    scores: &[CodednessScore<T>],
    values: &BTreeMap<String, T>,
    resamples: usize,
    seed: u64,
) -> Result<(GroupMIStat<T>, GroupMIStat<T>)> {
    group_comparison_with(scores, |o| values.get(o).copied(), resamples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable<f64> {
        let text = "female 1 0 0\nfeminine 1 0 0\nwoman 1 0 0\nmale 0 1 0\nmasculine 0 1 0\nman 0 1 0\nnurse 1 0 0\nplumber 0 1 0\n";
        read_embeddings(text.as_bytes()).unwrap()
    }

    #[test]
    fn load_with_and_without_header() {
        let plain = "a 1 2 3 4\nb 0 1 0 0\nc 1 1 1 1\n";
        let t: EmbeddingTable<f64> = read_embeddings(plain.as_bytes()).unwrap();
        assert_eq!((t.len(), t.dim()), (3, 4));
        let with_header = format!("3 4\n{plain}");
        assert_eq!(read_embeddings::<f64, _>(with_header.as_bytes()).unwrap(), t);
        let bad = "a 1 2 3 4\nb 1 2 3\n";
        assert!(matches!(read_embeddings::<f64, _>(bad.as_bytes()), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn duplicate_last_wins() {
        let t: EmbeddingTable<f64> = read_embeddings("a 1 0\na 0 1\n".as_bytes()).unwrap();
        assert_eq!(t.get("a").unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[3.0f64, 4.0], &[3.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0f64, 0.0], &[1.0, 1.0]).unwrap() - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert!(cosine(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn appendix_formula() {
        let s = CodednessScore::from_similarities("x", 0.3, 0.2);
        assert_eq!((s.score, s.coded), (0.3, Gender::Female));
        let tie = CodednessScore::from_similarities("x", 0.2, 0.2);
        assert_eq!((tie.score, tie.coded), (-0.2, Gender::Male));
    }

    #[test]
    fn codedness_by_construction() {
        let t = table();
        let f = DEFAULT_FEMALE_TERMS;
        let m = DEFAULT_MALE_TERMS;
        assert_eq!(codedness("nurse", &t, &f, &m).unwrap().coded, Gender::Female);
        assert_eq!(codedness("Plumber", &t, &f, &m).unwrap().coded, Gender::Male);
        match codedness("pilot", &t, &f, &["male", "guy"]) {
            Err(Error::MissingWords(w)) => assert_eq!(w, vec!["pilot", "guy"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn group_guards() {
        let scores = vec![
            CodednessScore::from_similarities("a", 0.5, 0.1),
            CodednessScore::from_similarities("b", 0.5, 0.1),
        ];
        let values: BTreeMap<String, f64> = [("a".to_string(), 0.1), ("b".to_string(), 0.2)].into();
        assert!(group_values_comparison(&scores, &values, 1000, 1).is_err());
        let mut scores = scores;
        scores.push(CodednessScore::from_similarities("c", 0.1, 0.5));
        scores.push(CodednessScore::from_similarities("d", 0.1, 0.5));
        let mut values = values;
        values.insert("c".into(), 0.01);
        values.insert("d".into(), 0.01);
        let (f, m) = group_values_comparison(&scores, &values, 1000, 1).unwrap();
        assert!((f.mean - 0.15).abs() < 1e-15);
        assert_eq!((m.mean, m.stderr), (0.01, 0.0));
        values.remove("d");
        assert!(group_values_comparison(&scores, &values, 1000, 1).is_err());
    }
}
