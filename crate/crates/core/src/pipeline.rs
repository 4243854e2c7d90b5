//! End-to-end analysis run driven by a TOML configuration.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coding::{self, DEFAULT_FEMALE_TERMS, DEFAULT_MALE_TERMS};
use crate::corpus::{count_shards, MentionCounts};
use crate::distributions::reconstruct_joint;
use crate::infotheory::{build_marker_table, Marker, MarkerTable};
use crate::lexicon::{labor_marginal, load_labor_stats, load_lexicons};
use crate::report::{annotation_analysis, emit_count_table, emit_scatter, read_annotations, read_count_table};
use crate::{Error, Result};

/// Marker pairs correlated in every run, as (x, y).
pub const DEFAULT_CORRELATIONS: [(Marker, Marker); 6] = [
    (Marker::Femaleness, Marker::MentionRate),
    (Marker::Femaleness, Marker::FemaleMention),
    (Marker::Femaleness, Marker::MaleMention),
    (Marker::Genderedness, Marker::MentionRate),
    (Marker::Femaleness, Marker::MutualInformation),
    (Marker::Genderedness, Marker::MutualInformation),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub occupations: PathBuf,
    pub adjectives: PathBuf,
    pub labor: PathBuf,
    /// CoNLL-U shards.
    #[serde(default)]
    pub corpus: Vec<PathBuf>,
    /// Pre-computed counts CSV, used instead of `corpus`.
    #[serde(default)]
    pub counts: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    #[serde(default)]
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stages {
    #[serde(default = "yes")]
    pub coding: bool,
    #[serde(default = "yes")]
    pub annotations: bool,
}

fn yes() -> bool {
    true
}

impl Default for Stages {
    fn default() -> Self {
        Stages {
            coding: true,
            annotations: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub out_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_female_terms")]
    pub female_terms: Vec<String>,
    #[serde(default = "default_male_terms")]
    pub male_terms: Vec<String>,
    pub inputs: Inputs,
    #[serde(default)]
    pub stages: Stages,
}

fn default_permutations() -> usize {
    10_000
}

fn default_resamples() -> usize {
    1_000
}

fn default_ridge() -> f64 {
    1e-6
}

fn default_female_terms() -> Vec<String> {
    DEFAULT_FEMALE_TERMS.iter().map(|s| s.to_string()).collect()
}

fn default_male_terms() -> Vec<String> {
    DEFAULT_MALE_TERMS.iter().map(|s| s.to_string()).collect()
}

impl AnalysisConfig {
    /// Parses a config; relative paths are taken relative to `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: AnalysisConfig = toml::from_str(text)?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.out_dir);
        let i = &mut cfg.inputs;
        fix(&mut i.occupations);
        fix(&mut i.adjectives);
        fix(&mut i.labor);
        i.corpus.iter_mut().for_each(fix);
        for p in [&mut i.counts, &mut i.embeddings, &mut i.annotations].into_iter().flatten() {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    /// Every referenced input path, in a fixed order.
    pub fn input_paths(&self) -> Vec<&Path> {
        let i = &self.inputs;
        let mut v: Vec<&Path> = vec![&i.occupations, &i.adjectives, &i.labor];
        v.extend(i.corpus.iter().map(PathBuf::as_path));
        v.extend([&i.counts, &i.embeddings, &i.annotations].into_iter().flatten().map(PathBuf::as_path));
        v
    }

    pub fn validate(&self) -> Result<()> {
        let i = &self.inputs;
        if i.corpus.is_empty() == i.counts.is_none() {
            return Err(Error::invalid("exactly one of inputs.corpus and inputs.counts must be given"));
        }
        let missing = |p: &Path| Error::invalid(format!("input {} does not exist", p.display()));
        let optional = [(&i.embeddings, "coding"), (&i.annotations, "annotations")];
        for p in self.input_paths() {
            if p.exists() {
                continue;
            }
            // stage-specific inputs report the stage that needs them
            match optional.iter().find(|(o, _)| o.as_deref() == Some(p)) {
                Some((_, name)) => return stage(name, Err(missing(p))),
                None => return Err(missing(p)),
            }
        }
        if self.stages.coding && i.embeddings.is_none() {
            return stage("coding", Err(Error::invalid("coding stage enabled but inputs.embeddings is not set")));
        }
        if self.resamples < crate::stats::MIN_RESAMPLES {
            return Err(Error::invalid(format!("resamples must be at least {}", crate::stats::MIN_RESAMPLES)));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::invalid("ridge must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub status: String,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub seed: u64,
    pub permutations: usize,
    pub resamples: usize,
    pub ridge: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub notes: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex_digest(&bytes),
    })
}

struct Bundle<'a> {
    dir: &'a Path,
    outputs: Vec<FileDigest>,
    notes: Vec<String>,
}

impl Bundle<'_> {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = self.dir.join(name);
        fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: hex_digest(&buf),
        });
        Ok(())
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

fn run_stages(cfg: &AnalysisConfig, out: &mut Bundle<'_>) -> Result<()> {
    let i = &cfg.inputs;
    let lex = stage("lexicon", load_lexicons(&i.occupations, &i.adjectives))?;
    out.notes.extend(lex.warnings.iter().cloned());
    let labor = stage("lexicon", load_labor_stats::<f64>(&i.labor, &lex.occupations))?;
    out.notes.extend(labor.missing.iter().map(|o| format!("{o}: no labor statistics")));

    let counts = stage(
        "extract",
        match &i.counts {
            Some(p) => read_counts_auto(p),
            None => count_shards(&i.corpus, &lex.occupations, &lex.adjectives),
        },
    )?;
    stage("extract", out.write("counts.csv", |b| counts.write_csv(b)))?;
    stage("extract", out.write("count_table.csv", |b| emit_count_table(&counts, b)))?;

    let marginal = stage("distributions", labor_marginal(&labor.table))?;
    let rec = stage("distributions", reconstruct_joint(&marginal, &counts))?;
    out.notes.extend(rec.excluded.iter().cloned());
    stage("distributions", out.write("joint.csv", |b| rec.joint.write_csv(b)))?;

    let markers = stage("markers", build_marker_table(&marginal, &rec.joint))?.table;
    stage("markers", out.write("markers.csv", |b| markers.write_csv(b)))?;

    stage("correlations", correlations(cfg, &markers, out))?;

    if cfg.stages.coding {
        stage("coding", coding_stage(cfg, &markers, out))?;
    }
    if cfg.stages.annotations {
        if let Some(p) = &i.annotations {
            stage("annotations", annotation_stage(cfg, p, out))?;
        }
    }
    Ok(())
}

/// Reads a counts CSV in either the native `occupation,total,...` layout or
/// the appendix table layout (`Occupation,Total,Male,Female,...`).
pub fn read_counts_auto(path: &Path) -> Result<MentionCounts> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = if text.starts_with("occupation,total,male,female,nonbinary") {
        MentionCounts::read_csv(text.as_bytes())
    } else {
        read_count_table(text.as_bytes())
    };
    parsed.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn correlations(cfg: &AnalysisConfig, markers: &MarkerTable<f64>, out: &mut Bundle<'_>) -> Result<()> {
    let mut summary = Vec::new();
    for (x, y) in DEFAULT_CORRELATIONS {
        let s = emit_scatter(markers, x, y, cfg.permutations, cfg.seed)?;
        out.write(&format!("scatter_{x}__{y}.csv"), |b| s.write_points_csv(b))?;
        let mut one = Vec::new();
        s.write_correlation_csv(&mut one)?;
        let text = String::from_utf8(one).expect("csv output is UTF-8");
        let mut lines = text.lines();
        if summary.is_empty() {
            summary.push(lines.next().unwrap_or_default().to_string());
        } else {
            lines.next();
        }
        summary.extend(lines.map(str::to_string));
    }
    out.write("correlations.csv", |b| {
        for l in &summary {
            b.extend_from_slice(l.as_bytes());
            b.push(b'\n');
        }
        Ok(())
    })
}

fn coding_stage(cfg: &AnalysisConfig, markers: &MarkerTable<f64>, out: &mut Bundle<'_>) -> Result<()> {
    let path = cfg
        .inputs
        .embeddings
        .as_ref()
        .ok_or_else(|| Error::invalid("coding stage enabled but inputs.embeddings is not set"))?;
    let table = coding::load_embeddings::<f64>(path)?;
    let scores = markers
        .iter()
        .filter(|(_, m)| m.mi_bits.is_some())
        .map(|(occ, _)| coding::codedness(occ, &table, &cfg.female_terms, &cfg.male_terms))
        .collect::<Result<Vec<_>>>()?;
    out.write("codedness.csv", |b| coding::write_scores_csv(&scores, b))?;
    let (f, m) = coding::group_mi_comparison(&scores, markers, cfg.resamples, cfg.seed)?;
    out.write("group_mi.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["group", "mean_mi_bits", "stderr_bits", "n", "resamples", "seed"])?;
        for g in [&f, &m] {
            w.write_record([
                g.label.clone(),
                crate::num::sig12(g.mean),
                crate::num::sig12(g.stderr),
                g.n.to_string(),
                g.resamples.to_string(),
                g.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

fn annotation_stage(cfg: &AnalysisConfig, path: &Path, out: &mut Bundle<'_>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_annotations(BufReader::new(file))?;
    let rep = annotation_analysis(&rows, cfg.ridge)?;
    out.write("annotation_cells.csv", |b| rep.write_cells_csv(b))?;
    out.write("annotation_fits.csv", |b| rep.write_fits_csv(b))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

/// Runs every stage and writes the CSV bundle plus `manifest.json` into
/// `out_dir`. On failure the manifest is still written, marked `failed` with
/// the stage name, and the error is returned.
pub fn run_pipeline(cfg: &AnalysisConfig) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let inputs = cfg.input_paths().into_iter().map(digest_file).collect::<Result<Vec<_>>>()?;
    let mut bundle = Bundle {
        dir: &cfg.out_dir,
        outputs: Vec::new(),
        notes: Vec::new(),
    };
    let result = run_stages(cfg, &mut bundle);
    let (status, failed_stage, error) = match &result {
        Ok(()) => ("complete", None, None),
        Err(Error::Stage { stage, source }) => ("failed", Some(stage.to_string()), Some(source.to_string())),
        Err(e) => ("failed", None, Some(e.to_string())),
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.to_string(),
        failed_stage,
        error,
        seed: cfg.seed,
        permutations: cfg.permutations,
        resamples: cfg.resamples,
        ridge: cfg.ridge,
        inputs,
        outputs: bundle.outputs,
        notes: bundle.notes,
    };
    let path = cfg.out_dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    result.map(|()| RunReport {
        out_dir: cfg.out_dir.clone(),
        manifest,
    })
}

/// Reads a manifest written by [`run_pipeline`].
pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Output digests keyed by file name.
pub fn output_digests(m: &Manifest) -> BTreeMap<&str, &str> {
    m.outputs.iter().map(|d| (d.path.as_str(), d.sha256.as_str())).collect()
}
