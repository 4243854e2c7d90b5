//! Corpus statistics for gender-adjective mentions of occupation nouns.
//!
//! The crate reads dependency-parsed text (CoNLL-U), counts how often each
//! occupation noun is modified by a gender adjective through an `amod`
//! relation, combines those counts with labor-statistics employment shares,
//! and derives per-occupation typicality markers: femaleness, genderedness,
//! mention rates and the conditional mutual information between gender and
//! gender mentioning.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the CLI and the report
//! pipeline use.
//!
//! ```
//! use gendermention::infotheory::{binary_entropy, genderedness};
//!
//! assert_eq!(binary_entropy(0.5_f64).unwrap(), 1.0);
//! assert_eq!(genderedness(1.0_f64).unwrap(), 1.0);
//! ```

pub mod coding;
pub mod corpus;
pub mod distributions;
mod error;
pub mod infotheory;
pub mod lexicon;
mod num;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use lexicon::{Gender, GenderAdjectiveLexicon, OccupationLexicon};
pub use num::Real;
pub use corpus::{MentionCounts, MentionEvent, Sentence};

pub type LaborTable = lexicon::LaborTable<f64>;
pub type JointGJ = lexicon::JointGJ<f64>;
pub type JointGJM = distributions::JointGJM<f64>;
pub type MentionRates = distributions::MentionRates<f64>;
pub type MarkerTable = infotheory::MarkerTable<f64>;
pub type CorrelationResult = stats::CorrelationResult<f64>;
pub type GroupMIStat = stats::GroupMIStat<f64>;
pub type LogisticFit = stats::LogisticFit<f64>;
pub type EmbeddingTable = coding::EmbeddingTable<f64>;
pub type CodednessScore = coding::CodednessScore<f64>;
pub type SynthSpec = synth::SynthSpec<f64>;
