//! Corpus ingestion: CoNLL-U parsing, Reddit thread cleaning, mention
//! extraction and mergeable counting.

pub mod conllu;
mod counts;
mod extract;
pub mod reddit;

pub use conllu::{parse_conllu, ConlluReader, Sentence, Token};
pub use counts::{accumulate, merge, MentionCounts, OccupationCounts};
pub use extract::{
    count_file, count_reader, count_sentence, count_shards, extract_mentions, Location, MentionEvent,
};
pub use reddit::{clean_reddit_threads, CleaningRules, ThreadNode};
