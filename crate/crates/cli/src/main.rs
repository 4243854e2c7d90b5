use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gendermention::coding::{self, CodednessScore};
use gendermention::corpus::{count_shards, reddit, CleaningRules};
use gendermention::distributions::reconstruct_joint;
use gendermention::infotheory::{build_marker_table, Marker, MarkerTable};
use gendermention::lexicon::{build_lexicons, labor_marginal, load_labor_stats, Lexicons};
use gendermention::pipeline::{read_counts_auto, run_pipeline, AnalysisConfig};
use gendermention::report::{annotation_analysis, bleu_text, emit_count_table, emit_scatter, read_annotations};
use gendermention::stats::GroupMIStat;
use gendermention::synth::{exact_tables, sample_counts, SynthSpec};
use gendermention::{Error, Result};

/// Gender-adjective mention statistics for occupation nouns.
#[derive(Parser)]
#[command(name = "gendermention", version)]
struct Cli {
    /// Write outputs into this directory instead of standard output.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LexiconArgs {
    /// Occupation lemma list, one per line.
    #[arg(long)]
    occupations: PathBuf,
    /// Adjective/alias config; the built-in adjective sets are used if omitted.
    #[arg(long)]
    adjectives: Option<PathBuf>,
}

#[derive(Args)]
struct Resampling {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,
    #[arg(long, default_value_t = 1_000)]
    resamples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Count gender-adjective mentions in CoNLL-U shards.
    Extract {
        #[command(flatten)]
        lexicons: LexiconArgs,
        #[arg(required = true)]
        shards: Vec<PathBuf>,
    },
    /// Clean and flatten Reddit thread trees (one JSON tree per line).
    CleanReddit {
        input: PathBuf,
        /// Comma-separated subreddit names treated as non-English.
        #[arg(long, value_delimiter = ',')]
        non_english: Vec<String>,
    },
    /// Build the per-occupation marker table from counts and labor statistics.
    Markers {
        #[command(flatten)]
        lexicons: LexiconArgs,
        /// Counts CSV (native or appendix table layout).
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        labor: PathBuf,
    },
    /// Correlate two markers and emit plot-ready scatter data.
    Correlate {
        #[arg(long)]
        markers: PathBuf,
        #[arg(long, default_value = "femaleness")]
        x: Marker,
        #[arg(long, default_value = "mention_rate")]
        y: Marker,
        #[command(flatten)]
        resampling: Resampling,
    },
    /// Score occupations as female- or male-coded from word embeddings and
    /// compare group mutual information.
    Code {
        #[arg(long)]
        embeddings: PathBuf,
        /// Marker CSV supplying MI per occupation.
        #[arg(long, conflicts_with = "mi_values")]
        markers: Option<PathBuf>,
        /// CSV with an `occupation` column and the column named by --mi-column.
        #[arg(long)]
        mi_values: Option<PathBuf>,
        #[arg(long, default_value = "mi_bits")]
        mi_column: String,
        #[arg(long, value_delimiter = ',', default_value = "female,feminine,woman")]
        female_terms: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "male,masculine,man")]
        male_terms: Vec<String>,
        #[command(flatten)]
        resampling: Resampling,
    },
    /// BLEU-n between two text files (lowercased, whitespace tokens).
    Bleu {
        reference: PathBuf,
        candidate: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Cell means and logistic fits for the annotated-comment table.
    AnnotateStats {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        ridge: f64,
    },
    /// Sample counts (or exact tables) from a synthetic spec.
    Synth {
        spec: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the exact marker table instead of sampled counts.
        #[arg(long)]
        exact: bool,
    },
    /// Run the full analysis described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        permutations: Option<usize>,
        #[arg(long)]
        resamples: Option<usize>,
        #[arg(long)]
        ridge: Option<f64>,
    },
}

struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| Error::Io { path: d.clone(), source: e })?;
        }
        Ok(Sink { dir })
    }

    /// Writes a named output file, or the bytes to stdout without a directory.
    fn emit(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, buf).map_err(|e| Error::Io { path, source: e })
            }
            None => Ok(io::stdout().lock().write_all(&buf)?),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn lexicons(args: &LexiconArgs) -> Result<Lexicons> {
    let occ = read_text(&args.occupations)?;
    let adj = match &args.adjectives {
        Some(p) => read_text(p)?,
        None => String::new(),
    };
    let lex = build_lexicons(&occ, &adj)?;
    for w in &lex.warnings {
        log::warn!("{w}");
    }
    Ok(lex)
}

fn write_groups(groups: &[&GroupMIStat<f64>], out: &mut Vec<u8>) -> Result<()> {
    writeln!(out, "group,mean_mi_bits,stderr_bits,n,resamples,seed")?;
    for g in groups {
        writeln!(out, "{},{:.11e},{:.11e},{},{},{}", g.label, g.mean, g.stderr, g.n, g.resamples, g.seed)?;
    }
    Ok(())
}

fn mi_column(path: &Path, column: &str) -> Result<BTreeMap<String, f64>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Invalid(format!("{}: no column {name:?}", path.display())))
    };
    let (occ, val) = (find("occupation")?, find(column)?);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v: f64 = rec[val].trim().parse().map_err(|_| Error::Format {
            line: i + 2,
            message: format!("{column} value {:?} is not a number", &rec[val]),
        })?;
        out.insert(rec[occ].trim().to_lowercase(), v);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let sink = Sink::new(cli.out_dir.clone())?;
    match cli.command {
        Command::Extract { lexicons: l, shards } => {
            let lex = lexicons(&l)?;
            let counts = count_shards(&shards, &lex.occupations, &lex.adjectives)?;
            if counts.conflicts() > 0 {
                log::warn!("{} occupation tokens carried conflicting gender adjectives", counts.conflicts());
            }
            sink.emit("counts.csv", |b| counts.write_csv(b))?;
            if sink.dir.is_some() {
                sink.emit("count_table.csv", |b| emit_count_table(&counts, b))?;
            }
        }
        Command::CleanReddit { input, non_english } => {
            let rules = CleaningRules::default().with_non_english(non_english);
            sink.emit("documents.jsonl", |b| {
                for tree in reddit::read_threads(open(&input)?) {
                    for doc in reddit::clean_reddit_threads(&tree?, &rules) {
                        serde_json::to_writer(&mut *b, &doc)?;
                        b.push(b'\n');
                    }
                }
                Ok(())
            })?;
        }
        Command::Markers { lexicons: l, counts, labor } => {
            let lex = lexicons(&l)?;
            let counts = read_counts_auto(&counts)?;
            let labor = load_labor_stats::<f64>(&labor, &lex.occupations)?;
            let marginal = labor_marginal(&labor.table)?;
            let rec = reconstruct_joint(&marginal, &counts)?;
            let markers = build_marker_table(&marginal, &rec.joint)?;
            for e in rec.excluded.iter().chain(&markers.excluded) {
                log::info!("excluded: {e}");
            }
            sink.emit("markers.csv", |b| markers.table.write_csv(b))?;
            if sink.dir.is_some() {
                sink.emit("joint.csv", |b| rec.joint.write_csv(b))?;
            }
        }
        Command::Correlate { markers, x, y, resampling: r } => {
            let table = MarkerTable::<f64>::read_csv(open(&markers)?)?;
            let s = emit_scatter(&table, x, y, r.permutations, r.seed)?;
            if sink.dir.is_some() {
                sink.emit(&format!("scatter_{x}__{y}.csv"), |b| s.write_points_csv(b))?;
            }
            sink.emit(&format!("correlation_{x}__{y}.csv"), |b| s.write_correlation_csv(b))?;
        }
        Command::Code {
            embeddings,
            markers,
            mi_values,
            mi_column: column,
            female_terms,
            male_terms,
            resampling: r,
        } => {
            let table = coding::load_embeddings::<f64>(&embeddings)?;
            let values: BTreeMap<String, f64> = match (&markers, &mi_values) {
                (Some(p), _) => MarkerTable::<f64>::read_csv(open(p)?)?
                    .iter()
                    .filter_map(|(o, m)| Some((o.to_string(), m.mi_bits?)))
                    .collect(),
                (None, Some(p)) => mi_column(p, &column)?,
                (None, None) => return Err(Error::Invalid("one of --markers or --mi-values is required".into())),
            };
            let scores = values
                .keys()
                .filter(|o| table.get(o).is_some())
                .map(|o| coding::codedness(o, &table, &female_terms, &male_terms))
                .collect::<Result<Vec<CodednessScore<f64>>>>()?;
            let skipped = values.len() - scores.len();
            if skipped > 0 {
                log::warn!("{skipped} occupations have no embedding and were not scored");
            }
            sink.emit("codedness.csv", |b| coding::write_scores_csv(&scores, b))?;
            let (f, m) = coding::group_values_comparison(&scores, &values, r.resamples, r.seed)?;
            sink.emit("group_mi.csv", |b| write_groups(&[&f, &m], b))?;
        }
        Command::Bleu { reference, candidate, order } => {
            let score: f64 = bleu_text(&read_text(&reference)?, &read_text(&candidate)?, order)?;
            sink.emit("bleu.txt", |b| Ok(writeln!(b, "{score:.6}")?))?;
        }
        Command::AnnotateStats { input, ridge } => {
            let rows = read_annotations(open(&input)?)?;
            let rep = annotation_analysis(&rows, ridge)?;
            sink.emit("annotation_cells.csv", |b| rep.write_cells_csv(b))?;
            sink.emit("annotation_fits.csv", |b| rep.write_fits_csv(b))?;
        }
        Command::Synth { spec, seed, exact } => {
            let mut spec = SynthSpec::<f64>::load(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if exact {
                let t = exact_tables(&spec)?;
                sink.emit("markers.csv", |b| t.markers.write_csv(b))?;
            } else {
                let counts = sample_counts(&spec)?;
                sink.emit("counts.csv", |b| counts.write_csv(b))?;
            }
        }
        Command::Run {
            config,
            seed,
            permutations,
            resamples,
            ridge,
        } => {
            let mut cfg = AnalysisConfig::load(&config)?;
            if let Some(d) = cli.out_dir {
                cfg.out_dir = d;
            }
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.permutations = permutations.unwrap_or(cfg.permutations);
            cfg.resamples = resamples.unwrap_or(cfg.resamples);
            cfg.ridge = ridge.unwrap_or(cfg.ridge);
            let report = run_pipeline(&cfg)?;
            eprintln!(
                "wrote {} files and manifest to {}",
                report.manifest.outputs.len(),
                report.out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
