use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::extract::{Location, MentionEvent};
use crate::lexicon::GenderMark;
use crate::{Error, Result};

/// Mention counters for one occupation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationCounts {
    /// Occupation-noun tokens, gendered or not.
    pub total: u64,
    pub male: u64,
    pub female: u64,
    /// Tokens modified by an excluded (non-binary) adjective.
    pub nonbinary: u64,
}

impl OccupationCounts {
    /// Female plus male mentions; the excluded class is not gendered.
    pub fn gendered(&self) -> u64 {
        self.female + self.male
    }

    fn checked_add(&self, other: &Self, occupation: &str) -> Result<Self> {
        let add = |a: u64, b: u64| a.checked_add(b).ok_or_else(|| Error::Overflow(occupation.to_string()));
        Ok(OccupationCounts {
            total: add(self.total, other.total)?,
            male: add(self.male, other.male)?,
            female: add(self.female, other.female)?,
            nonbinary: add(self.nonbinary, other.nonbinary)?,
        })
    }
}

/// Per-occupation counters; the mergeable reduction value for corpus shards.
///
/// Merging is a fieldwise sum, so any partition of the input reduces to the
/// same value as a serial pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionCounts {
    per: BTreeMap<String, OccupationCounts>,
    /// Tokens that carried more than one gender class.
    conflicts: u64,
}

impl MentionCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_map(per: BTreeMap<String, OccupationCounts>) -> Result<Self> {
        for (occ, c) in &per {
            if c.female + c.male + c.nonbinary > c.total {
                return Err(Error::invalid(format!(
                    "{occ}: gendered mentions exceed total mentions"
                )));
            }
        }
        Ok(MentionCounts { per, conflicts: 0 })
    }

    pub fn get(&self, occupation: &str) -> Option<&OccupationCounts> {
        self.per.get(occupation)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &OccupationCounts)> {
        self.per.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn occupations(&self) -> impl Iterator<Item = &str> {
        self.per.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.per.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per.is_empty()
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn total(&self) -> u64 {
        self.per.values().map(|c| c.total).sum()
    }

    pub fn female(&self) -> u64 {
        self.per.values().map(|c| c.female).sum()
    }

    pub fn male(&self) -> u64 {
        self.per.values().map(|c| c.male).sum()
    }

    pub fn nonbinary(&self) -> u64 {
        self.per.values().map(|c| c.nonbinary).sum()
    }

    pub fn gendered(&self) -> u64 {
        self.female() + self.male()
    }

    /// Records one occupation token with its (deduplicated) gender classes.
    pub(crate) fn record(&mut self, occupation: &str, marks: &[GenderMark]) -> Result<()> {
        let c = match self.per.get_mut(occupation) {
            Some(c) => c,
            None => self.per.entry(occupation.to_string()).or_default(),
        };
        let overflow = || Error::Overflow(occupation.to_string());
        c.total = c.total.checked_add(1).ok_or_else(overflow)?;
        for m in marks {
            let slot = match m {
                GenderMark::Female => &mut c.female,
                GenderMark::Male => &mut c.male,
                GenderMark::Excluded => &mut c.nonbinary,
                GenderMark::Unmarked => continue,
            };
            *slot = slot.checked_add(1).ok_or_else(overflow)?;
        }
        if marks.iter().filter(|m| **m != GenderMark::Unmarked).count() > 1 {
            self.conflicts = self.conflicts.checked_add(1).ok_or_else(|| Error::Overflow("conflicts".into()))?;
        }
        Ok(())
    }

    pub fn merge_from(&mut self, other: &MentionCounts) -> Result<()> {
        for (occ, c) in &other.per {
            let merged = match self.per.get(occ) {
                Some(mine) => mine.checked_add(c, occ)?,
                None => *c,
            };
            self.per.insert(occ.clone(), merged);
        }
        self.conflicts = self
            .conflicts
            .checked_add(other.conflicts)
            .ok_or_else(|| Error::Overflow("conflicts".into()))?;
        Ok(())
    }

    /// Writes `occupation,total,male,female,nonbinary`, sorted by occupation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["occupation", "total", "male", "female", "nonbinary"])?;
        for (occ, c) in &self.per {
            w.write_record([
                occ.as_str(),
                &c.total.to_string(),
                &c.male.to_string(),
                &c.female.to_string(),
                &c.nonbinary.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            occupation: String,
            total: u64,
            male: u64,
            female: u64,
            nonbinary: u64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut per = BTreeMap::new();
        for row in rdr.deserialize::<Row>() {
            let row = row?;
            let counts = OccupationCounts {
                total: row.total,
                male: row.male,
                female: row.female,
                nonbinary: row.nonbinary,
            };
            if per.insert(row.occupation.clone(), counts).is_some() {
                return Err(Error::invalid(format!("duplicate occupation {:?} in counts", row.occupation)));
            }
        }
        Self::from_map(per)
    }
}

/// Fieldwise sum of two count tables.
pub fn merge(a: &MentionCounts, b: &MentionCounts) -> Result<MentionCounts> {
    let mut out = a.clone();
    out.merge_from(b)?;
    Ok(out)
}

/// Counts a stream of events. Consecutive events at the same location are one
/// occupation token carrying several gender classes.
pub fn accumulate<'a, I>(events: I) -> Result<MentionCounts>
where
    I: IntoIterator<Item = &'a MentionEvent>,
{
    let mut counts = MentionCounts::new();
    let mut pending: Option<(&str, Location)> = None;
    let mut marks: Vec<GenderMark> = Vec::with_capacity(3);
    for ev in events {
        let same = matches!(pending, Some((occ, loc)) if loc == ev.location && occ == ev.occupation);
        if !same {
            if let Some((occ, _)) = pending {
                counts.record(occ, &marks)?;
            }
            marks.clear();
            pending = Some((&ev.occupation, ev.location));
        }
        if !marks.contains(&ev.gender_mark) {
            marks.push(ev.gender_mark);
        }
    }
    if let Some((occ, _)) = pending {
        counts.record(occ, &marks)?;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(occ: &str, mark: GenderMark, token: usize) -> MentionEvent {
        MentionEvent {
            occupation: occ.into(),
            gender_mark: mark,
            location: Location {
                document: 0,
                sentence: 0,
                token,
            },
        }
    }

    #[test]
    fn direct_count() {
        let events = [
            ev("nurse", GenderMark::Unmarked, 1),
            ev("nurse", GenderMark::Male, 2),
            ev("nurse", GenderMark::Female, 3),
        ];
        let c = accumulate(&events).unwrap();
        let n = c.get("nurse").unwrap();
        assert_eq!((n.total, n.male, n.female, n.nonbinary), (3, 1, 1, 0));
        assert_eq!(c.conflicts(), 0);
    }

    #[test]
    fn conflicting_marks_count_one_token() {
        let events = [ev("nurse", GenderMark::Female, 4), ev("nurse", GenderMark::Male, 4)];
        let c = accumulate(&events).unwrap();
        let n = c.get("nurse").unwrap();
        assert_eq!((n.total, n.male, n.female), (1, 1, 1));
        assert_eq!(c.conflicts(), 1);
    }

    #[test]
    fn merge_identity() {
        let c = accumulate(&[ev("cook", GenderMark::Excluded, 1)]).unwrap();
        assert_eq!(merge(&c, &MentionCounts::new()).unwrap(), c);
        assert_eq!(merge(&MentionCounts::new(), &c).unwrap(), c);
    }

    #[test]
    fn appendix_nurse_row_sums() {
        let mut per = BTreeMap::new();
        per.insert(
            "nurse".to_string(),
            OccupationCounts {
                total: 1_000_000,
                male: 10_000,
                female: 5_000,
                nonbinary: 0,
            },
        );
        let a = MentionCounts::from_map(per).unwrap();
        let mut per = BTreeMap::new();
        per.insert(
            "nurse".to_string(),
            OccupationCounts {
                total: 1_355_458,
                male: 14_441,
                female: 6_889,
                nonbinary: 0,
            },
        );
        let b = MentionCounts::from_map(per).unwrap();
        let m = merge(&a, &b).unwrap();
        let n = m.get("nurse").unwrap();
        assert_eq!((n.total, n.male, n.female, n.gendered()), (2_355_458, 24_441, 11_889, 36_330));
    }

    #[test]
    fn overflow_is_reported() {
        let big = OccupationCounts {
            total: u64::MAX,
            ..Default::default()
        };
        let a = MentionCounts::from_map([("x".to_string(), big)].into()).unwrap();
        assert!(matches!(merge(&a, &a), Err(Error::Overflow(_))));
    }

    #[test]
    fn csv_round_trip() {
        let c = accumulate(&[ev("nurse", GenderMark::Male, 1), ev("baker", GenderMark::Unmarked, 2)]).unwrap();
        let text = c.to_csv_string();
        assert!(text.starts_with("occupation,total,male,female,nonbinary\nbaker,1,0,0,0\n"));
        assert_eq!(MentionCounts::read_csv(text.as_bytes()).unwrap(), c);
    }

    #[test]
    fn inconsistent_csv_rejected() {
        let text = "occupation,total,male,female,nonbinary\nnurse,1,1,1,0\n";
        assert!(MentionCounts::read_csv(text.as_bytes()).is_err());
    }
}
