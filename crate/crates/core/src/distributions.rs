//! Probability tables over (gender, occupation, mention).
//!
//! Gender is only observable when it is mentioned, so the full joint is
//! rebuilt per occupation from three pieces: the labor-statistics conditional
//! `f_j = P(G=female | J=j)`, the corpus mention rate `m_j`, and the female
//! share of gendered mentions `phi_j`:
//!
//! ```text
//! p(f, mention | j)    = phi_j * m_j
//! p(m, mention | j)    = (1 - phi_j) * m_j
//! p(f, no-mention | j) = f_j - phi_j * m_j
//! p(m, no-mention | j) = (1 - f_j) - (1 - phi_j) * m_j
//! ```
//!
//! The no-mention cells subtract the mention mass from the labor marginal
//! (no division), so `sum_m p(g, m | j) = P(g | j)` holds exactly. When corpus
//! and labor data disagree a no-mention cell can go negative; it is clamped to
//! zero and the no-mention slice rescaled to `1 - m_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use crate::corpus::MentionCounts;
use crate::lexicon::{Gender, JointGJ};
use crate::num::sig12;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mention {
    Mention,
    NoMention,
}

impl Mention {
    pub const ALL: [Mention; 2] = [Mention::Mention, Mention::NoMention];

    pub fn index(self) -> usize {
        match self {
            Mention::Mention => 0,
            Mention::NoMention => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mention::Mention => "mention",
            Mention::NoMention => "nomention",
        }
    }
}

impl fmt::Display for Mention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 2x2 table over gender (rows) and mention (columns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenderMentionTable<T> {
    pub cells: [[T; 2]; 2],
}

impl<T: Real> GenderMentionTable<T> {
    /// Cells given as (female-mention, male-mention, female-nomention,
    /// male-nomention).
    pub fn from_cells(fm: T, mm: T, fnm: T, mnm: T) -> Self {
        GenderMentionTable {
            cells: [[fm, fnm], [mm, mnm]],
        }
    }

    pub fn get(&self, g: Gender, m: Mention) -> T {
        self.cells[g.index()][m.index()]
    }

    pub fn gender_marginal(&self, g: Gender) -> T {
        let row = self.cells[g.index()];
        row[0] + row[1]
    }

    pub fn mention_marginal(&self, m: Mention) -> T {
        self.cells[0][m.index()] + self.cells[1][m.index()]
    }

    pub fn sum(&self) -> T {
        self.cells.iter().flatten().copied().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Gender, Mention, T)> + '_ {
        Gender::ALL
            .into_iter()
            .flat_map(move |g| Mention::ALL.into_iter().map(move |m| (g, m, self.get(g, m))))
    }
}

/// Observed rates for one occupation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationRate<T> {
    /// Share of occupation mentions carrying a female or male adjective.
    pub mention_rate: T,
    /// Female share of gendered mentions; `None` without gendered mentions.
    pub female_share: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MentionRates<T> {
    pub per: BTreeMap<String, OccupationRate<T>>,
    /// Gendered mentions over all occupation mentions, corpus-wide.
    pub global: T,
    pub diagnostics: Vec<String>,
}

impl<T: Real> MentionRates<T> {
    pub fn get(&self, occupation: &str) -> Option<&OccupationRate<T>> {
        self.per.get(occupation)
    }
}

/// Mention rate `m_j` and female share `phi_j` per occupation.
///
/// Non-binary modifications are not gendered here. Occupations with no
/// mentions are dropped; occupations with no gendered mentions keep `m_j = 0`
/// and an undefined `phi_j`. Both cases are reported in `diagnostics`.
pub fn mention_rates<T: Real>(counts: &MentionCounts) -> Result<MentionRates<T>> {
    let mut per = BTreeMap::new();
    let mut diagnostics = Vec::new();
    let (mut all, mut gendered) = (0u64, 0u64);
    for (occ, c) in counts.iter() {
        if c.total == 0 {
            diagnostics.push(format!("{occ}: no mentions; excluded"));
            continue;
        }
        all += c.total;
        gendered += c.gendered();
        let female_share = if c.gendered() == 0 {
            diagnostics.push(format!("{occ}: no gendered mentions; female share undefined"));
            None
        } else {
            Some(T::from_count(c.female) / T::from_count(c.gendered()))
        };
        per.insert(
            occ.to_string(),
            OccupationRate {
                mention_rate: T::from_count(c.gendered()) / T::from_count(c.total),
                female_share,
            },
        );
    }
    if all == 0 {
        return Err(Error::invalid("no occupation mentions in counts"));
    }
    Ok(MentionRates {
        per,
        global: T::from_count(gendered) / T::from_count(all),
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSlice<T> {
    /// p(g, m | j)
    pub table: GenderMentionTable<T>,
    pub clamped: bool,
    /// False when the occupation had no gendered mentions (`phi_j` undefined).
    pub mentions_observed: bool,
}

/// Reconstructed per-occupation joint over gender and mention, plus
/// occupation weights from the labor marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGJM<T> {
    slices: BTreeMap<String, JointSlice<T>>,
    weights: BTreeMap<String, T>,
}

impl<T: Real> JointGJM<T> {
    pub fn new(slices: BTreeMap<String, JointSlice<T>>, weights: BTreeMap<String, T>) -> Result<Self> {
        let tol = T::lit(1e-9);
        if slices.keys().ne(weights.keys()) {
            return Err(Error::invalid("slices and weights cover different occupations"));
        }
        for (occ, s) in &slices {
            if s.table.iter().any(|(_, _, p)| !(p >= T::zero())) {
                return Err(Error::invalid(format!("{occ}: negative joint cell")));
            }
            if (s.table.sum() - T::one()).abs() > tol {
                return Err(Error::invalid(format!("{occ}: slice sums to {}", s.table.sum())));
            }
        }
        let w: T = weights.values().copied().sum();
        if (w - T::one()).abs() > tol {
            return Err(Error::invalid(format!("occupation weights sum to {w}")));
        }
        Ok(JointGJM { slices, weights })
    }

    pub fn slice(&self, occupation: &str) -> Option<&JointSlice<T>> {
        self.slices.get(occupation)
    }

    pub fn slices(&self) -> impl Iterator<Item = (&str, &JointSlice<T>)> {
        self.slices.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn weight(&self, occupation: &str) -> Option<T> {
        self.weights.get(occupation).copied()
    }

    pub fn occupations(&self) -> impl Iterator<Item = &str> {
        self.slices.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Full three-way probability p(g, j, m) = p(j) p(g, m | j).
    pub fn p(&self, g: Gender, occupation: &str, m: Mention) -> Option<T> {
        Some(*self.weights.get(occupation)? * self.slices.get(occupation)?.table.get(g, m))
    }

    /// `occupation,g,m,p,clamped` with 12 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["occupation", "g", "m", "p", "clamped"])?;
        for (occ, s) in &self.slices {
            for (g, m, p) in s.table.iter() {
                w.write_record([occ.as_str(), g.as_str(), m.as_str(), &sig12(p), if s.clamped { "true" } else { "false" }])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// One occupation's slice from `f_j`, `m_j` and `phi_j`.
pub fn reconstruct_slice<T: Real>(female: T, mention_rate: T, female_share: Option<T>) -> Result<JointSlice<T>> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !unit(female) || !unit(mention_rate) || female_share.is_some_and(|p| !unit(p)) {
        return Err(Error::invalid(format!(
            "reconstruction inputs outside [0, 1]: f={female}, m={mention_rate}, phi={female_share:?}"
        )));
    }
    let phi = match female_share {
        Some(p) => p,
        None if mention_rate == T::zero() => T::zero(),
        None => return Err(Error::invalid("female share undefined with nonzero mention rate")),
    };
    let fm = phi * mention_rate;
    let mm = (T::one() - phi) * mention_rate;
    let mut fnm = female - fm;
    let mut mnm = (T::one() - female) - mm;
    // rounding noise around an exact zero is not a clamp
    let noise = -T::epsilon() * T::lit(8.0);
    let clamped = fnm < noise || mnm < noise;
    fnm = fnm.max(T::zero());
    mnm = mnm.max(T::zero());
    if clamped {
        let target = T::one() - mention_rate;
        let s = fnm + mnm;
        if s > T::zero() {
            fnm = fnm / s * target;
            mnm = mnm / s * target;
        }
    }
    Ok(JointSlice {
        table: GenderMentionTable::from_cells(fm, mm, fnm, mnm),
        clamped,
        mentions_observed: female_share.is_some(),
    })
}

/// A reconstructed joint plus the occupations left out and why.
#[derive(Debug, Clone)]
pub struct Reconstruction<T> {
    pub joint: JointGJM<T>,
    pub excluded: Vec<String>,
}

/// Rebuilds the joint for occupations present in both the labor marginal and
/// the corpus rates. Occupation weights come from the labor marginal,
/// renormalised over the included occupations.
pub fn reconstruct_from_rates<T: Real>(labor: &JointGJ<T>, rates: &MentionRates<T>) -> Result<Reconstruction<T>> {
    let mut slices = BTreeMap::new();
    let mut raw_weights = BTreeMap::new();
    let mut excluded = Vec::new();
    for (occ, rate) in &rates.per {
        let (Some(f), Some(w)) = (labor.female_given(occ), labor.weight(occ)) else {
            excluded.push(format!("{occ}: no labor statistics"));
            continue;
        };
        slices.insert(occ.clone(), reconstruct_slice(f, rate.mention_rate, rate.female_share)?);
        raw_weights.insert(occ.clone(), w);
    }
    for occ in labor.occupations() {
        if !rates.per.contains_key(occ) {
            excluded.push(format!("{occ}: not observed in corpus"));
        }
    }
    let total: T = raw_weights.values().copied().sum();
    if slices.is_empty() || !(total > T::zero()) {
        return Err(Error::invalid("no occupation shared by labor statistics and corpus"));
    }
    let weights = raw_weights.into_iter().map(|(k, w)| (k, w / total)).collect();
    for e in &excluded {
        log::info!("excluded from joint: {e}");
    }
    Ok(Reconstruction {
        joint: JointGJM::new(slices, weights)?,
        excluded,
    })
}

pub fn reconstruct_joint<T: Real>(labor: &JointGJ<T>, counts: &MentionCounts) -> Result<Reconstruction<T>> {
    reconstruct_from_rates(labor, &mention_rates(counts)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditionals<T> {
    /// P(M = mention | J = j)
    pub mention: T,
    /// P(M = mention | J = j, G = female); `None` if the female slice is empty.
    pub female: Option<T>,
    pub male: Option<T>,
}

pub fn slice_conditionals<T: Real>(table: &GenderMentionTable<T>) -> Conditionals<T> {
    let cond = |g: Gender| {
        let mass = table.gender_marginal(g);
        (mass > T::zero()).then(|| table.get(g, Mention::Mention) / mass)
    };
    Conditionals {
        mention: table.mention_marginal(Mention::Mention),
        female: cond(Gender::Female),
        male: cond(Gender::Male),
    }
}

pub fn conditionals<T: Real>(joint: &JointGJM<T>, occupation: &str) -> Result<Conditionals<T>> {
    let slice = joint
        .slice(occupation)
        .ok_or_else(|| Error::invalid(format!("{occupation} is not in the joint table")))?;
    Ok(slice_conditionals(&slice.table))
}
