//! Ground-truth generator: a fully specified joint over (occupation, gender,
//! mention), its exact derived tables, and seeded count sampling.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus::{MentionCounts, OccupationCounts};
use crate::distributions::{GenderMentionTable, JointGJM, JointSlice, MentionRates, OccupationRate};
use crate::infotheory::{build_marker_table, MarkerTable};
use crate::lexicon::{Gender, JointGJ, LaborRow, LaborTable};
use crate::stats::replicate_rng;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOccupation<T> {
    /// p(j)
    pub weight: T,
    /// P(female | j)
    pub femaleness: T,
    /// P(mention | j)
    pub mention_rate: T,
    /// P(female | j, mention)
    pub female_share: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec<T> {
    pub occupations: BTreeMap<String, SynthOccupation<T>>,
    /// Number of (occupation, gender, mention) draws.
    pub n: u64,
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    n: u64,
    seed: u64,
    occupation: Vec<RawOccupation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOccupation {
    occupation: String,
    weight: f64,
    femaleness: f64,
    mention_rate: f64,
    female_share: f64,
}

/// Draws per sampling chunk; each chunk has its own derived stream.
pub const SAMPLE_CHUNK: u64 = 1 << 16;

impl<T: Real> SynthSpec<T> {
    pub fn new(occupations: BTreeMap<String, SynthOccupation<T>>, n: u64, seed: u64) -> Result<Self> {
        let spec = SynthSpec { occupations, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the TOML form: top-level `n` and `seed` plus one
    /// `[[occupation]]` table per occupation.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text)?;
        let mut occupations = BTreeMap::new();
        for o in raw.occupation {
            let row = SynthOccupation {
                weight: T::lit(o.weight),
                femaleness: T::lit(o.femaleness),
                mention_rate: T::lit(o.mention_rate),
                female_share: T::lit(o.female_share),
            };
            if occupations.insert(o.occupation.clone(), row).is_some() {
                return Err(Error::invalid(format!("duplicate occupation {:?} in spec", o.occupation)));
            }
        }
        Self::new(occupations, raw.n, raw.seed)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.occupations.is_empty() {
            return Err(Error::invalid("spec has no occupations"));
        }
        let unit = |x: T| x >= T::zero() && x <= T::one();
        for (occ, o) in &self.occupations {
            if !(o.weight > T::zero()) || !unit(o.weight) {
                return Err(Error::invalid(format!("{occ}: weight {} must be in (0, 1]", o.weight)));
            }
            for (name, v) in [
                ("femaleness", o.femaleness),
                ("mention_rate", o.mention_rate),
                ("female_share", o.female_share),
            ] {
                if !unit(v) {
                    return Err(Error::invalid(format!("{occ}: {name} {v} outside [0, 1]")));
                }
            }
            let [_, _, fnm, mnm] = raw_cells(o);
            for (g, v) in [("female", fnm), ("male", mnm)] {
                if v < -T::epsilon() * T::lit(8.0) {
                    return Err(Error::invalid(format!(
                        "infeasible spec: p({g}, no-mention | {occ}) = {v} is negative"
                    )));
                }
            }
        }
        let w: T = self.occupations.values().map(|o| o.weight).sum();
        if (w - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::invalid(format!("occupation weights sum to {w}, expected 1")));
        }
        Ok(())
    }
}

/// (female-mention, male-mention, female-nomention, male-nomention) given j.
fn raw_cells<T: Real>(o: &SynthOccupation<T>) -> [T; 4] {
    let fm = o.female_share * o.mention_rate;
    let mm = (T::one() - o.female_share) * o.mention_rate;
    [fm, mm, o.femaleness - fm, (T::one() - o.femaleness) - mm]
}

fn slice_of<T: Real>(o: &SynthOccupation<T>) -> GenderMentionTable<T> {
    let [fm, mm, fnm, mnm] = raw_cells(o);
    GenderMentionTable::from_cells(fm, mm, fnm.max(T::zero()), mnm.max(T::zero()))
}

#[derive(Debug, Clone)]
pub struct ExactTables<T> {
    pub labor: JointGJ<T>,
    pub joint: JointGJM<T>,
    pub markers: MarkerTable<T>,
}

/// Labor marginal, joint and markers implied by the spec, without sampling.
pub fn exact_tables<T: Real>(spec: &SynthSpec<T>) -> Result<ExactTables<T>> {
    spec.validate()?;
    let labor = JointGJ::from_cells(
        spec.occupations
            .iter()
            .map(|(k, o)| (k.clone(), [o.weight * o.femaleness, o.weight * (T::one() - o.femaleness)]))
            .collect(),
    )?;
    let slices = spec
        .occupations
        .iter()
        .map(|(k, o)| {
            let slice = JointSlice {
                table: slice_of(o),
                clamped: false,
                mentions_observed: o.mention_rate > T::zero(),
            };
            (k.clone(), slice)
        })
        .collect();
    let weights = spec.occupations.iter().map(|(k, o)| (k.clone(), o.weight)).collect();
    let joint = JointGJM::new(slices, weights)?;
    let markers = build_marker_table(&labor, &joint)?.table;
    Ok(ExactTables { labor, joint, markers })
}

/// Employment table whose marginal is the spec's p(g, j).
pub fn labor_table<T: Real>(spec: &SynthSpec<T>) -> Result<LaborTable<T>> {
    LaborTable::from_rows(
        spec.occupations
            .iter()
            .map(|(k, o)| {
                let row = LaborRow {
                    women_share: o.femaleness,
                    total_employed: o.weight,
                };
                (k.clone(), row)
            })
            .collect(),
    )
}

/// The mention rates an infinite sample would show.
pub fn exact_rates<T: Real>(spec: &SynthSpec<T>) -> MentionRates<T> {
    let per = spec
        .occupations
        .iter()
        .map(|(k, o)| {
            let rate = OccupationRate {
                mention_rate: o.mention_rate,
                female_share: (o.mention_rate > T::zero()).then_some(o.female_share),
            };
            (k.clone(), rate)
        })
        .collect();
    let global = spec.occupations.values().map(|o| o.weight * o.mention_rate).sum();
    MentionRates {
        per,
        global,
        diagnostics: Vec::new(),
    }
}

/// Draws `spec.n` independent (j, g, m) triples. Gender is recorded only for
/// mentions. Chunk `c` of [`SAMPLE_CHUNK`] draws uses stream `c` of the seed,
/// so the result does not depend on how chunks are scheduled.
pub fn sample_counts<T: Real>(spec: &SynthSpec<T>) -> Result<MentionCounts> {
    spec.validate()?;
    let names: Vec<&String> = spec.occupations.keys().collect();
    // cumulative distribution over (j, cell), cells in raw_cells order
    let mut cdf = Vec::with_capacity(names.len() * 4);
    let mut acc = 0.0f64;
    for o in spec.occupations.values() {
        let t = slice_of(o);
        for g in Gender::ALL {
            for m in crate::distributions::Mention::ALL {
                acc += (o.weight * t.get(g, m)).as_f64();
                cdf.push(acc);
            }
        }
    }
    let k = names.len();
    let chunks = spec.n.div_ceil(SAMPLE_CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replicate_rng(spec.seed, c);
            let draws = SAMPLE_CHUNK.min(spec.n - c * SAMPLE_CHUNK);
            let mut cells = vec![0u64; k * 4];
            for _ in 0..draws {
                let u = rng.random::<f64>() * acc;
                let idx = cdf.partition_point(|&x| x <= u).min(cdf.len() - 1);
                cells[idx] += 1;
            }
            cells
        })
        .reduce(
            || vec![0u64; k * 4],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let per = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            // cell order per occupation: (f, mention), (f, none), (m, mention), (m, none)
            let c = &tallies[i * 4..i * 4 + 4];
            let counts = OccupationCounts {
                total: c.iter().sum(),
                female: c[0],
                male: c[2],
                nonbinary: 0,
            };
            ((*name).clone(), counts)
        })
        .collect();
    MentionCounts::from_map(per)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Mention;

    fn single(f: f64, m: f64, phi: f64) -> SynthSpec<f64> {
        let o = SynthOccupation {
            weight: 1.0,
            femaleness: f,
            mention_rate: m,
            female_share: phi,
        };
        SynthSpec::new([("job".to_string(), o)].into(), 1000, 3).unwrap()
    }

    #[test]
    fn independence_gives_zero_mi() {
        let t = exact_tables(&single(0.5, 0.37, 0.5)).unwrap();
        assert!(t.markers.get("job").unwrap().mi_bits.unwrap().abs() < 1e-15);
    }

    #[test]
    fn forward_cells() {
        let t = exact_tables(&single(0.9, 0.01, 0.5)).unwrap();
        let s = t.joint.slice("job").unwrap().table;
        let got = [
            s.get(Gender::Female, Mention::Mention),
            s.get(Gender::Male, Mention::Mention),
            s.get(Gender::Female, Mention::NoMention),
            s.get(Gender::Male, Mention::NoMention),
        ];
        for (a, b) in got.iter().zip([0.005, 0.005, 0.895, 0.095]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn all_male_is_fully_gendered() {
        let t = exact_tables(&single(0.0, 0.2, 0.0)).unwrap();
        assert_eq!(t.markers.get("job").unwrap().genderedness, 1.0);
    }

    #[test]
    fn infeasible_names_cell() {
        let o = SynthOccupation {
            weight: 1.0,
            femaleness: 0.02,
            mention_rate: 0.5,
            female_share: 0.9,
        };
        let err = SynthSpec::new([("job".to_string(), o)].into(), 10, 1).unwrap_err();
        assert!(err.to_string().contains("p(female, no-mention | job)"), "{err}");
    }

    #[test]
    fn sampling_is_seeded() {
        let mut spec = single(0.6, 0.3, 0.7);
        spec.n = 200_000;
        let a = sample_counts(&spec).unwrap();
        assert_eq!(a, sample_counts(&spec).unwrap());
        assert_eq!(a.get("job").unwrap().total, 200_000);
        spec.seed += 1;
        assert_ne!(a, sample_counts(&spec).unwrap());
    }

    #[test]
    fn degenerate_always_female_mention() {
        let mut spec = single(1.0, 1.0, 1.0);
        spec.n = 5000;
        let c = sample_counts(&spec).unwrap();
        let j = c.get("job").unwrap();
        assert_eq!((j.female, j.total, j.male), (5000, 5000, 0));
    }

    #[test]
    fn toml_spec() {
        let text = r#"
n = 100
seed = 9

[[occupation]]
occupation = "nurse"
weight = 0.25
femaleness = 0.88
mention_rate = 0.015
female_share = 0.33

[[occupation]]
occupation = "carpenter"
weight = 0.75
femaleness = 0.035
mention_rate = 0.003
female_share = 0.41
"#;
        let s: SynthSpec<f64> = SynthSpec::from_toml_str(text).unwrap();
        assert_eq!((s.n, s.seed, s.occupations.len()), (100, 9, 2));
        assert!(SynthSpec::<f64>::from_toml_str(&text.replace("0.75", "0.7")).is_err());
    }
}
