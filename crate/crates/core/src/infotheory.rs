//! Entropy-based typicality markers. All logarithms are base 2.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::distributions::{slice_conditionals, GenderMentionTable, JointGJM, Mention};
use crate::lexicon::{Gender, JointGJ};
use crate::num::sig12;
use crate::{Error, Real, Result};

fn check_probability<T: Real>(p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability {p} outside [0, 1]")))
    }
}

/// `-p log p`, with `0 log 0 = 0`.
fn plogp<T: Real>(p: T) -> T {
    if p > T::zero() {
        -p * p.log2()
    } else {
        T::zero()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    check_probability(p)?;
    Ok(plogp(p) + plogp(T::one() - p))
}

/// `1 - H2(f)`: 0 for a balanced occupation, 1 for a single-gender one.
pub fn genderedness<T: Real>(female: T) -> Result<T> {
    Ok(T::one() - binary_entropy(female)?)
}

/// Mutual information between gender and mention within one occupation slice.
pub fn conditional_mi<T: Real>(table: &GenderMentionTable<T>) -> Result<T> {
    if table.iter().any(|(_, _, p)| !(p >= T::zero())) {
        return Err(Error::invalid("joint slice has a negative cell"));
    }
    let sum = table.sum();
    if (sum - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::invalid(format!("joint slice sums to {sum}, expected 1")));
    }
    let mut mi = T::zero();
    for (g, m, p) in table.iter() {
        if p > T::zero() {
            let indep = table.gender_marginal(g) * table.mention_marginal(m);
            mi = mi + p * (p / indep).log2();
        }
    }
    // independent tables can land a few ulps below zero
    Ok(mi.max(T::zero()))
}

/// Selectable per-occupation quantity; names match the marker CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marker {
    Femaleness,
    Genderedness,
    MentionRate,
    /// P(mention | j, female)
    PMentionFemale,
    /// P(mention | j, male)
    PMentionMale,
    /// p(female, mention | j)
    FemaleMention,
    /// p(male, mention | j)
    MaleMention,
    MutualInformation,
}

impl Marker {
    pub const ALL: [Marker; 8] = [
        Marker::Femaleness,
        Marker::Genderedness,
        Marker::MentionRate,
        Marker::PMentionFemale,
        Marker::PMentionMale,
        Marker::FemaleMention,
        Marker::MaleMention,
        Marker::MutualInformation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Marker::Femaleness => "femaleness",
            Marker::Genderedness => "genderedness",
            Marker::MentionRate => "mention_rate",
            Marker::PMentionFemale => "p_mention_f",
            Marker::PMentionMale => "p_mention_m",
            Marker::FemaleMention => "p_f_mention",
            Marker::MaleMention => "p_m_mention",
            Marker::MutualInformation => "mi_bits",
        }
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Marker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Marker::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Marker::ALL.iter().map(|m| m.as_str()).collect();
                Error::invalid(format!("unknown marker {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Markers<T> {
    pub femaleness: T,
    pub genderedness: T,
    pub mention_rate: T,
    pub p_mention_f: Option<T>,
    pub p_mention_m: Option<T>,
    pub female_mention: T,
    pub male_mention: T,
    pub mi_bits: Option<T>,
    pub clamped: bool,
}

impl<T: Real> Markers<T> {
    pub fn value(&self, marker: Marker) -> Option<T> {
        match marker {
            Marker::Femaleness => Some(self.femaleness),
            Marker::Genderedness => Some(self.genderedness),
            Marker::MentionRate => Some(self.mention_rate),
            Marker::PMentionFemale => self.p_mention_f,
            Marker::PMentionMale => self.p_mention_m,
            Marker::FemaleMention => Some(self.female_mention),
            Marker::MaleMention => Some(self.male_mention),
            Marker::MutualInformation => self.mi_bits,
        }
    }

    /// `ok`, or `|`-joined notes for clamping and undefined markers.
    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if self.clamped {
            f.push("clamped");
        }
        if self.p_mention_f.is_none() {
            f.push("p_mention_f_undefined");
        }
        if self.p_mention_m.is_none() {
            f.push("p_mention_m_undefined");
        }
        if self.mi_bits.is_none() {
            f.push("mi_undefined");
        }
        if f.is_empty() {
            "ok".into()
        } else {
            f.join("|")
        }
    }

    /// Markers implied by one reconstructed slice and the labor femaleness.
    pub fn from_slice(femaleness: T, table: &GenderMentionTable<T>, clamped: bool, mentions_observed: bool) -> Result<Self> {
        let cond = slice_conditionals(table);
        Ok(Markers {
            femaleness,
            genderedness: genderedness(femaleness)?,
            mention_rate: cond.mention,
            p_mention_f: cond.female,
            p_mention_m: cond.male,
            female_mention: table.get(Gender::Female, Mention::Mention),
            male_mention: table.get(Gender::Male, Mention::Mention),
            mi_bits: if mentions_observed { Some(conditional_mi(table)?) } else { None },
            clamped,
        })
    }
}

/// Per-occupation markers, ordered by occupation lemma.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerTable<T> {
    rows: BTreeMap<String, Markers<T>>,
}

const CSV_HEADER: [&str; 10] = [
    "occupation",
    "femaleness",
    "genderedness",
    "mention_rate",
    "p_mention_f",
    "p_mention_m",
    "mi_bits",
    "flags",
    "p_f_mention",
    "p_m_mention",
];

impl<T: Real> MarkerTable<T> {
    pub fn from_rows(rows: BTreeMap<String, Markers<T>>) -> Self {
        MarkerTable { rows }
    }

    pub fn get(&self, occupation: &str) -> Option<&Markers<T>> {
        self.rows.get(occupation)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Markers<T>)> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (occupation, x, y) for occupations where both markers are defined.
    pub fn pairs(&self, x: Marker, y: Marker) -> Vec<(String, T, T)> {
        self.rows
            .iter()
            .filter_map(|(o, m)| Some((o.clone(), m.value(x)?, m.value(y)?)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<T>| v.map(sig12).unwrap_or_default();
        for (occ, m) in &self.rows {
            w.write_record([
                occ.clone(),
                sig12(m.femaleness),
                sig12(m.genderedness),
                sig12(m.mention_rate),
                opt(m.p_mention_f),
                opt(m.p_mention_m),
                opt(m.mi_bits),
                m.flags(),
                sig12(m.female_mention),
                sig12(m.male_mention),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(CSV_HEADER) {
            return Err(Error::invalid(format!("unexpected marker CSV header: {headers:?}")));
        }
        let mut rows = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let num = |k: usize| -> Result<Option<T>> {
                let s = rec.get(k).unwrap_or("");
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse::<f64>().map(|v| Some(T::lit(v))).map_err(|_| Error::Format {
                    line,
                    message: format!("{} value {s:?} is not a number", CSV_HEADER[k]),
                })
            };
            let req = |k: usize| -> Result<T> {
                num(k)?.ok_or_else(|| Error::Format {
                    line,
                    message: format!("{} is required", CSV_HEADER[k]),
                })
            };
            let flags = rec.get(7).unwrap_or("");
            rows.insert(
                rec[0].to_string(),
                Markers {
                    femaleness: req(1)?,
                    genderedness: req(2)?,
                    mention_rate: req(3)?,
                    p_mention_f: num(4)?,
                    p_mention_m: num(5)?,
                    mi_bits: num(6)?,
                    clamped: flags.split('|').any(|f| f == "clamped"),
                    female_mention: req(8)?,
                    male_mention: req(9)?,
                },
            );
        }
        Ok(MarkerTable { rows })
    }
}

#[derive(Debug, Clone)]
pub struct MarkerBuild<T> {
    pub table: MarkerTable<T>,
    pub excluded: Vec<String>,
}

/// Markers for every occupation present in both the labor marginal and the
/// reconstructed joint.
pub fn build_marker_table<T: Real>(labor: &JointGJ<T>, joint: &JointGJM<T>) -> Result<MarkerBuild<T>> {
    let mut rows = BTreeMap::new();
    let mut excluded = Vec::new();
    for (occ, slice) in joint.slices() {
        match labor.female_given(occ) {
            Some(f) => {
                rows.insert(occ.to_string(), Markers::from_slice(f, &slice.table, slice.clamped, slice.mentions_observed)?);
            }
            None => excluded.push(format!("{occ}: no labor statistics")),
        }
    }
    for occ in labor.occupations() {
        if joint.slice(occ).is_none() {
            excluded.push(format!("{occ}: missing from joint"));
        }
    }
    Ok(MarkerBuild {
        table: MarkerTable::from_rows(rows),
        excluded,
    })
}
