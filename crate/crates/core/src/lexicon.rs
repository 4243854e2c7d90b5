//! Occupation and gender-adjective lexicons, and the labor-statistics table
//! that supplies the real-world gender breakdown per occupation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Real, Result};

/// Binary gender alphabet. `Female` is index 0, `Male` index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn index(self) -> usize {
        match self {
            Gender::Female => 0,
            Gender::Male => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "female" | "f" => Ok(Gender::Female),
            "male" | "m" => Ok(Gender::Male),
            other => Err(Error::invalid(format!("unknown gender {other:?}"))),
        }
    }
}

/// Gender class carried by an adjective attached to an occupation noun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenderMark {
    Female,
    Male,
    /// Counted but kept out of the binary gender variable (non-binary terms).
    Excluded,
    Unmarked,
}

impl GenderMark {
    pub fn as_str(self) -> &'static str {
        match self {
            GenderMark::Female => "female",
            GenderMark::Male => "male",
            GenderMark::Excluded => "excluded",
            GenderMark::Unmarked => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OccupationLexicon {
    entries: BTreeSet<String>,
    /// Labor-statistics title (lowercased) to occupation lemma.
    aliases: BTreeMap<String, String>,
    /// Occupation lemma to the lowercase substring that selects its labor rows.
    aggregation_patterns: BTreeMap<String, String>,
}

impl OccupationLexicon {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for e in entries {
            set.insert(normalize_lemma(e.as_ref())?.0);
        }
        if set.is_empty() {
            return Err(Error::invalid("occupation lexicon is empty"));
        }
        Ok(OccupationLexicon {
            entries: set,
            ..Default::default()
        })
    }

    pub fn with_alias(mut self, title: &str, lemma: &str) -> Result<Self> {
        self.check_member(lemma, "alias target")?;
        self.aliases
            .insert(title.trim().to_lowercase(), lemma.to_string());
        Ok(self)
    }

    pub fn with_aggregation(mut self, lemma: &str, pattern: &str) -> Result<Self> {
        self.check_member(lemma, "aggregation key")?;
        self.aggregation_patterns
            .insert(lemma.to_string(), pattern.trim().to_lowercase());
        Ok(self)
    }

    fn check_member(&self, lemma: &str, what: &str) -> Result<()> {
        if self.entries.contains(lemma) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{what} {lemma:?} is not in the occupation lexicon"
            )))
        }
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.entries.contains(lemma)
    }

    pub fn entries(&self) -> &BTreeSet<String> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    pub fn aggregation_patterns(&self) -> &BTreeMap<String, String> {
        &self.aggregation_patterns
    }

    /// Resolves a labor-statistics title to an occupation lemma.
    ///
    /// Aliases win over aggregation patterns, which win over a direct match of
    /// the title against the lemma or its plural (`-s`, `-es`).
    pub fn resolve_title(&self, title: &str) -> Option<&str> {
        let t = title.trim().to_lowercase();
        if let Some(lemma) = self.aliases.get(&t) {
            return Some(lemma);
        }
        if let Some((lemma, _)) = self
            .aggregation_patterns
            .iter()
            .find(|(_, pat)| t.contains(pat.as_str()))
        {
            return Some(lemma);
        }
        let singular = [t.as_str(), t.strip_suffix("es").unwrap_or(""), t.strip_suffix('s').unwrap_or("")];
        let found = singular
            .into_iter()
            .filter(|s| !s.is_empty())
            .find_map(|s| self.entries.get(s));
        found.map(String::as_str)
    }
}

/// Female, male and excluded adjective lemmas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenderAdjectiveLexicon {
    female: BTreeSet<String>,
    male: BTreeSet<String>,
    excluded: BTreeSet<String>,
}

impl Default for GenderAdjectiveLexicon {
    fn default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        GenderAdjectiveLexicon {
            female: set(&["female", "feminine", "woman"]),
            male: set(&["male", "masculine", "man"]),
            excluded: set(&["non-binary", "nonbinary"]),
        }
    }
}

impl GenderAdjectiveLexicon {
    pub fn new(
        female: BTreeSet<String>,
        male: BTreeSet<String>,
        excluded: BTreeSet<String>,
    ) -> Result<Self> {
        for (a, b, name) in [
            (&female, &male, "female/male"),
            (&female, &excluded, "female/excluded"),
            (&male, &excluded, "male/excluded"),
        ] {
            if let Some(w) = a.intersection(b).next() {
                return Err(Error::invalid(format!(
                    "adjective {w:?} appears in both {name} sets"
                )));
            }
        }
        Ok(GenderAdjectiveLexicon {
            female,
            male,
            excluded,
        })
    }

    pub fn female(&self) -> &BTreeSet<String> {
        &self.female
    }

    pub fn male(&self) -> &BTreeSet<String> {
        &self.male
    }

    pub fn excluded(&self) -> &BTreeSet<String> {
        &self.excluded
    }

    /// Classifies an already-lowercased lemma.
    pub fn classify(&self, lemma: &str) -> Option<GenderMark> {
        if self.female.contains(lemma) {
            Some(GenderMark::Female)
        } else if self.male.contains(lemma) {
            Some(GenderMark::Male)
        } else if self.excluded.contains(lemma) {
            Some(GenderMark::Excluded)
        } else {
            None
        }
    }
}

/// Both lexicons plus the non-fatal warnings produced while loading them.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub occupations: OccupationLexicon,
    pub adjectives: GenderAdjectiveLexicon,
    pub warnings: Vec<String>,
}

/// Lowercases a lemma, returning whether it changed. Internal whitespace is
/// rejected since lemmas are single tokens.
fn normalize_lemma(raw: &str) -> Result<(String, bool)> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
        return Err(Error::invalid(format!(
            "lemma {raw:?} must be a single non-empty token"
        )));
    }
    let lower = trimmed.to_lowercase();
    let changed = lower != trimmed;
    Ok((lower, changed))
}

/// Parses an occupation list: one lemma per line, `#` starts a comment.
pub fn parse_occupation_list(text: &str) -> Result<(BTreeSet<String>, Vec<String>)> {
    let mut entries = BTreeSet::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        let (lemma, changed) = normalize_lemma(line).map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        if changed {
            warnings.push(format!("line {}: {line:?} normalized to {lemma:?}", i + 1));
        }
        if !entries.insert(lemma.clone()) {
            warnings.push(format!("line {}: duplicate occupation {lemma:?}", i + 1));
        }
    }
    if entries.is_empty() {
        return Err(Error::invalid("occupation lexicon is empty"));
    }
    Ok((entries, warnings))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// Section-structured adjective/alias configuration.
///
/// ```text
/// [female]
/// female
/// [aliases]
/// Chief Executives = ceo
/// [aggregate]
/// attendant = attendant
/// ```
#[derive(Debug, Clone, Default)]
pub struct AdjectiveConfig {
    pub female: Option<Vec<String>>,
    pub male: Option<Vec<String>>,
    pub excluded: Option<Vec<String>>,
    /// (labor title, lemma)
    pub aliases: Vec<(String, String)>,
    /// (lemma, title substring)
    pub aggregate: Vec<(String, String)>,
}

pub fn parse_adjective_config(text: &str) -> Result<AdjectiveConfig> {
    let mut cfg = AdjectiveConfig::default();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Format {
            line: i + 1,
            message,
        };
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_lowercase();
            match name.as_str() {
                "female" => {
                    cfg.female.get_or_insert_with(Vec::new);
                }
                "male" => {
                    cfg.male.get_or_insert_with(Vec::new);
                }
                "excluded" => {
                    cfg.excluded.get_or_insert_with(Vec::new);
                }
                "aliases" | "aggregate" => {}
                other => return Err(err(format!("unknown section [{other}]"))),
            }
            section = Some(name);
            continue;
        }
        let Some(sec) = section.as_deref() else {
            return Err(err("entry outside of any section".into()));
        };
        match sec {
            "female" | "male" | "excluded" => {
                let list = match sec {
                    "female" => cfg.female.as_mut(),
                    "male" => cfg.male.as_mut(),
                    _ => cfg.excluded.as_mut(),
                }
                .expect("section list initialised on header");
                list.push(line.to_string());
            }
            _ => {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `key = value` in [{sec}]")))?;
                let pair = (k.trim().to_string(), v.trim().to_string());
                if sec == "aliases" {
                    cfg.aliases.push(pair);
                } else {
                    cfg.aggregate.push(pair);
                }
            }
        }
    }
    Ok(cfg)
}

fn term_set(
    terms: Option<Vec<String>>,
    default: &BTreeSet<String>,
    warnings: &mut Vec<String>,
) -> Result<BTreeSet<String>> {
    let Some(terms) = terms else {
        return Ok(default.clone());
    };
    let mut out = BTreeSet::new();
    for t in terms {
        let (lemma, changed) = normalize_lemma(&t)?;
        if changed {
            warnings.push(format!("adjective {t:?} normalized to {lemma:?}"));
        }
        if !out.insert(lemma.clone()) {
            warnings.push(format!("duplicate adjective {lemma:?}"));
        }
    }
    Ok(out)
}

/// Builds validated lexicons from the occupation list and adjective config
/// texts. Term sections missing from the config fall back to the defaults.
pub fn build_lexicons(occupation_text: &str, adjective_text: &str) -> Result<Lexicons> {
    let (entries, mut warnings) = parse_occupation_list(occupation_text)?;
    let cfg = parse_adjective_config(adjective_text)?;
    let defaults = GenderAdjectiveLexicon::default();
    let adjectives = GenderAdjectiveLexicon::new(
        term_set(cfg.female, &defaults.female, &mut warnings)?,
        term_set(cfg.male, &defaults.male, &mut warnings)?,
        term_set(cfg.excluded, &defaults.excluded, &mut warnings)?,
    )?;
    let mut occupations = OccupationLexicon::new(&entries)?;
    for (title, lemma) in cfg.aliases {
        occupations = occupations.with_alias(&title, &lemma.to_lowercase())?;
    }
    for (lemma, pattern) in cfg.aggregate {
        occupations = occupations.with_aggregation(&lemma.to_lowercase(), &pattern)?;
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Lexicons {
        occupations,
        adjectives,
        warnings,
    })
}

pub fn load_lexicons(occupation_file: &Path, adjective_config: &Path) -> Result<Lexicons> {
    let occ = fs::read_to_string(occupation_file).map_err(|e| Error::io(occupation_file, e))?;
    let adj = fs::read_to_string(adjective_config).map_err(|e| Error::io(adjective_config, e))?;
    build_lexicons(&occ, &adj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaborRow<T> {
    /// Fraction of employed people who are women, in [0, 1].
    pub women_share: T,
    /// Employment count (the source reports thousands; only ratios matter).
    pub total_employed: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaborTable<T> {
    rows: BTreeMap<String, LaborRow<T>>,
}

impl<T: Real> LaborTable<T> {
    pub fn from_rows(rows: BTreeMap<String, LaborRow<T>>) -> Result<Self> {
        for (occ, r) in &rows {
            if !(r.women_share >= T::zero() && r.women_share <= T::one()) {
                return Err(Error::invalid(format!(
                    "{occ}: women share {} outside [0, 1]",
                    r.women_share
                )));
            }
            if !(r.total_employed >= T::zero()) || !r.total_employed.is_finite() {
                return Err(Error::invalid(format!(
                    "{occ}: total employed {} must be a nonnegative number",
                    r.total_employed
                )));
            }
        }
        Ok(LaborTable { rows })
    }

    pub fn rows(&self) -> &BTreeMap<String, LaborRow<T>> {
        &self.rows
    }

    pub fn get(&self, occupation: &str) -> Option<&LaborRow<T>> {
        self.rows.get(occupation)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A loaded labor table and the lexicon occupations that had no matching row.
#[derive(Debug, Clone)]
pub struct LaborLoad<T> {
    pub table: LaborTable<T>,
    pub missing: Vec<String>,
}

#[derive(Debug, serde::Deserialize)]
struct LaborRecord {
    title: String,
    total_employed: String,
    women_percent: String,
}

fn parse_number(field: &str, what: &str, line: usize) -> Result<f64> {
    let cleaned: String = field.chars().filter(|c| *c != ',' && *c != '%').collect();
    cleaned.trim().parse::<f64>().map_err(|_| Error::Format {
        line,
        message: format!("{what} {field:?} is not a number"),
    })
}

/// Reads the labor CSV (`title,total_employed,women_percent`) and aggregates
/// rows per occupation lemma.
///
/// Several titles mapping to one lemma are combined by summing employment and
/// taking the employment-weighted mean of the women percentage. Matched rows
/// are sorted before summing so the result does not depend on row order.
pub fn parse_labor_stats<T: Real, R: Read>(
    reader: R,
    lexicon: &OccupationLexicon,
) -> Result<LaborLoad<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut matched: BTreeMap<String, Vec<(String, f64, f64)>> = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<LaborRecord>().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let total = parse_number(&rec.total_employed, "total_employed", line)?;
        let pct = parse_number(&rec.women_percent, "women_percent", line)?;
        if !(0.0..=100.0).contains(&pct) {
            return Err(Error::Format {
                line,
                message: format!("women_percent {pct} outside [0, 100]"),
            });
        }
        if !(total >= 0.0) || !total.is_finite() {
            return Err(Error::Format {
                line,
                message: format!("total_employed {total} must be nonnegative"),
            });
        }
        if let Some(lemma) = lexicon.resolve_title(&rec.title) {
            matched
                .entry(lemma.to_string())
                .or_default()
                .push((rec.title, total, pct));
        }
    }

    let mut rows = BTreeMap::new();
    for (lemma, mut parts) in matched {
        parts.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        let total: f64 = parts.iter().map(|p| p.1).sum();
        let share = if total > 0.0 {
            parts.iter().map(|p| p.1 * p.2).sum::<f64>() / total / 100.0
        } else {
            parts.iter().map(|p| p.2).sum::<f64>() / parts.len() as f64 / 100.0
        };
        rows.insert(
            lemma,
            LaborRow {
                women_share: T::lit(share),
                total_employed: T::lit(total),
            },
        );
    }
    let missing: Vec<String> = lexicon
        .entries()
        .iter()
        .filter(|e| !rows.contains_key(*e))
        .cloned()
        .collect();
    for m in &missing {
        log::warn!("no labor statistics for occupation {m:?}; excluded downstream");
    }
    Ok(LaborLoad {
        table: LaborTable::from_rows(rows)?,
        missing,
    })
}

pub fn load_labor_stats<T: Real>(csv: &Path, lexicon: &OccupationLexicon) -> Result<LaborLoad<T>> {
    let file = fs::File::open(csv).map_err(|e| Error::io(csv, e))?;
    parse_labor_stats(file, lexicon)
}

/// Joint probability over (gender, occupation) from labor statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGJ<T> {
    /// occupation -> [p(female, j), p(male, j)]
    p: BTreeMap<String, [T; 2]>,
}

impl<T: Real> JointGJ<T> {
    pub fn from_cells(p: BTreeMap<String, [T; 2]>) -> Result<Self> {
        let mut sum = T::zero();
        for (occ, cells) in &p {
            for c in cells {
                if !(*c >= T::zero()) {
                    return Err(Error::invalid(format!("{occ}: negative probability {c}")));
                }
                sum = sum + *c;
            }
        }
        if (sum - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::invalid(format!("joint sums to {sum}, expected 1")));
        }
        Ok(JointGJ { p })
    }

    pub fn p(&self, gender: Gender, occupation: &str) -> Option<T> {
        self.p.get(occupation).map(|c| c[gender.index()])
    }

    pub fn cells(&self) -> &BTreeMap<String, [T; 2]> {
        &self.p
    }

    pub fn occupations(&self) -> impl Iterator<Item = &str> {
        self.p.keys().map(String::as_str)
    }

    /// Marginal p(j).
    pub fn weight(&self, occupation: &str) -> Option<T> {
        self.p.get(occupation).map(|c| c[0] + c[1])
    }

    /// P(G = female | J = j); `None` when the occupation has no mass.
    pub fn female_given(&self, occupation: &str) -> Option<T> {
        let c = self.p.get(occupation)?;
        let w = c[0] + c[1];
        (w > T::zero()).then(|| c[0] / w)
    }

    pub fn total(&self) -> T {
        self.p.values().map(|c| c[0] + c[1]).sum()
    }
}

/// p(g, j) = share(g | j) * total_j / sum_k total_k.
pub fn labor_marginal<T: Real>(table: &LaborTable<T>) -> Result<JointGJ<T>> {
    if table.is_empty() {
        return Err(Error::invalid("labor table is empty"));
    }
    let grand: T = table.rows().values().map(|r| r.total_employed).sum();
    if !(grand > T::zero()) {
        return Err(Error::invalid("total employment across occupations is zero"));
    }
    let p = table
        .rows()
        .iter()
        .map(|(occ, r)| {
            let w = r.total_employed / grand;
            (
                occ.clone(),
                [r.women_share * w, (T::one() - r.women_share) * w],
            )
        })
        .collect();
    JointGJ::from_cells(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPENDIX_OCCUPATIONS: &str = "accountant\nanalyst\nassistant\nattendant\nauditor\nbaker\n\
        carpenter\ncashier\nceo\nchief\ncleaner\nclerk\nconstructor\ncook\ncounselor\ndesigner\n\
        developer\ndriver\neditor\nfarmer\nguard\nhairdresser\nhousekeeper\njanitor\nlaborer\n\
        lawyer\nlibrarian\nmanager\nmover\nnurse\nphysician\nreceptionist\nsalesperson\n\
        secretary\nsheriff\nsupervisor\nteacher\nwriter\n";

    #[test]
    fn appendix_list_has_38_lemmas() {
        let lex = build_lexicons(APPENDIX_OCCUPATIONS, "").unwrap();
        assert_eq!(lex.occupations.len(), 38);
        assert!(lex.warnings.is_empty());
    }

    #[test]
    fn default_adjective_sets() {
        let lex = build_lexicons("nurse\n", "").unwrap();
        assert_eq!(lex.adjectives.female().len(), 3);
        assert_eq!(lex.adjectives.male().len(), 3);
        assert_eq!(lex.adjectives.excluded().len(), 2);
        assert_eq!(lex.adjectives, GenderAdjectiveLexicon::default());
    }

    #[test]
    fn duplicate_lines_warn_once() {
        let lex = build_lexicons("nurse\nnurse\n", "").unwrap();
        assert_eq!(lex.occupations.len(), 1);
        assert_eq!(lex.warnings.len(), 1);
    }

    #[test]
    fn uppercase_is_normalized_with_warning() {
        let lex = build_lexicons("# header\nNurse  # trailing\n", "").unwrap();
        assert!(lex.occupations.contains("nurse"));
        assert_eq!(lex.warnings.len(), 1);
    }

    #[test]
    fn empty_list_is_fatal() {
        assert!(build_lexicons("# nothing\n\n", "").is_err());
    }

    #[test]
    fn overlapping_adjectives_are_fatal() {
        let cfg = "[female]\nfemale\nwoman\n[male]\nman\nwoman\n";
        let err = build_lexicons("nurse\n", cfg).unwrap_err();
        assert!(err.to_string().contains("woman"), "{err}");
    }

    #[test]
    fn alias_target_must_exist() {
        let cfg = "[aliases]\nChief Executives = ceo\n";
        assert!(build_lexicons("nurse\n", cfg).is_err());
        let lex = build_lexicons("nurse\nceo\n", cfg).unwrap();
        assert_eq!(lex.occupations.resolve_title("Chief Executives"), Some("ceo"));
    }

    fn labor_lexicon() -> OccupationLexicon {
        build_lexicons(
            "ceo\nattendant\ncarpenter\nnurse\n",
            "[aliases]\nChief Executives = ceo\n[aggregate]\nattendant = attendant\n",
        )
        .unwrap()
        .occupations
    }

    #[test]
    fn alias_row_maps_to_lemma() {
        let csv = "title,total_employed,women_percent\nChief Executives,1700,29.2\n";
        let load: LaborLoad<f64> = parse_labor_stats(csv.as_bytes(), &labor_lexicon()).unwrap();
        assert!((load.table.get("ceo").unwrap().women_share - 0.292).abs() < 1e-12);
        assert_eq!(load.missing, vec!["attendant", "carpenter", "nurse"]);
    }

    #[test]
    fn aggregation_uses_employment_weighted_mean() {
        let csv = "title,total_employed,women_percent\n\
                   flight attendant,100,80\nparking attendant,50,20\nCarpenters,900,3.5\n";
        let load: LaborLoad<f64> = parse_labor_stats(csv.as_bytes(), &labor_lexicon()).unwrap();
        let att = load.table.get("attendant").unwrap();
        assert!((att.women_share - 0.6).abs() < 1e-12);
        assert_eq!(att.total_employed, 150.0);
        assert!((load.table.get("carpenter").unwrap().women_share - 0.035).abs() < 1e-12);
    }

    #[test]
    fn percent_out_of_range_is_fatal() {
        let csv = "title,total_employed,women_percent\nnurse,10,101\n";
        let err = parse_labor_stats::<f64, _>(csv.as_bytes(), &labor_lexicon()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn quoted_thousands_are_accepted() {
        let csv = "title,total_employed,women_percent\n\"Registered nurses\",\"3,000\",88.09\nnurse,0,0\n";
        let lex = build_lexicons("nurse\n", "[aliases]\nRegistered nurses = nurse\n")
            .unwrap()
            .occupations;
        let load: LaborLoad<f64> = parse_labor_stats(csv.as_bytes(), &lex).unwrap();
        let r = load.table.get("nurse").unwrap();
        assert_eq!(r.total_employed, 3000.0);
        assert!((r.women_share - 0.8809).abs() < 1e-12);
    }

    fn table(rows: &[(&str, f64, f64)]) -> LaborTable<f64> {
        LaborTable::from_rows(
            rows.iter()
                .map(|(o, s, t)| {
                    (
                        o.to_string(),
                        LaborRow {
                            women_share: *s,
                            total_employed: *t,
                        },
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn marginal_single_balanced_occupation() {
        let j = labor_marginal(&table(&[("nurse", 0.5, 7.0)])).unwrap();
        assert_eq!(j.p(Gender::Female, "nurse"), Some(0.5));
        assert_eq!(j.p(Gender::Male, "nurse"), Some(0.5));
    }

    #[test]
    fn marginal_two_occupations_hand_arithmetic() {
        let j = labor_marginal(&table(&[("a", 0.9, 100.0), ("b", 0.1, 300.0)])).unwrap();
        let expect = [("a", 0.225, 0.025), ("b", 0.075, 0.675)];
        for (o, f, m) in expect {
            assert!((j.p(Gender::Female, o).unwrap() - f).abs() < 1e-15);
            assert!((j.p(Gender::Male, o).unwrap() - m).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_all_women_has_zero_male_mass() {
        let j = labor_marginal(&table(&[("a", 1.0, 10.0), ("b", 0.3, 5.0)])).unwrap();
        assert_eq!(j.p(Gender::Male, "a"), Some(0.0));
    }

    #[test]
    fn marginal_rejects_zero_employment() {
        assert!(labor_marginal(&table(&[("a", 0.5, 0.0)])).is_err());
    }

    #[test]
    fn marginal_works_in_f32() {
        let t = LaborTable::from_rows(
            [("a".to_string(), LaborRow { women_share: 0.25f32, total_employed: 4.0 })].into(),
        )
        .unwrap();
        let j = labor_marginal(&t).unwrap();
        assert_eq!(j.female_given("a"), Some(0.25f32));
    }
}
