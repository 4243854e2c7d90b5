//! Cleaning and flattening of Reddit comment threads.
//!
//! A comment is dropped together with its whole subtree when any enabled rule
//! matches. Survivors are joined in pre-order, one line per comment.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadNode {
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub subreddit: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub removed: bool,
    #[serde(default)]
    pub children: Vec<ThreadNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneReason {
    BotAuthor,
    NonEnglishSubreddit,
    RemovedOrEmpty,
    LowAlphabetic,
    ContainsUrl,
}

#[derive(Debug, Clone)]
pub struct CleaningRules {
    /// Compared case-insensitively.
    pub non_english_subreddits: BTreeSet<String>,
    pub min_alpha_fraction: f64,
    pub bot_authors: bool,
    pub non_english: bool,
    pub removed_or_empty: bool,
    pub low_alphabetic: bool,
    pub urls: bool,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            non_english_subreddits: BTreeSet::new(),
            min_alpha_fraction: 0.7,
            bot_authors: true,
            non_english: true,
            removed_or_empty: true,
            low_alphabetic: true,
            urls: true,
        }
    }
}

impl CleaningRules {
    pub fn with_non_english<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.non_english_subreddits = names.into_iter().map(|s| s.as_ref().to_lowercase()).collect();
        self
    }

    /// First matching rule, if any.
    pub fn prune_reason(&self, node: &ThreadNode) -> Option<PruneReason> {
        if self.bot_authors && node.author.to_lowercase().contains("bot") {
            return Some(PruneReason::BotAuthor);
        }
        if self.non_english && self.non_english_subreddits.contains(&node.subreddit.to_lowercase()) {
            return Some(PruneReason::NonEnglishSubreddit);
        }
        let body = node.body.trim();
        if self.removed_or_empty
            && (node.removed || body.is_empty() || body == "[removed]" || body == "[deleted]")
        {
            return Some(PruneReason::RemovedOrEmpty);
        }
        if self.low_alphabetic && alphabetic_fraction(body) < self.min_alpha_fraction {
            return Some(PruneReason::LowAlphabetic);
        }
        if self.urls && contains_url(body) {
            return Some(PruneReason::ContainsUrl);
        }
        None
    }
}

/// Unicode letters over non-whitespace characters; 0 for an empty body.
pub fn alphabetic_fraction(text: &str) -> f64 {
    let (letters, visible) = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .fold((0usize, 0usize), |(l, v), c| (l + c.is_alphabetic() as usize, v + 1));
    if visible == 0 {
        0.0
    } else {
        letters as f64 / visible as f64
    }
}

pub fn contains_url(text: &str) -> bool {
    let lower = text.to_lowercase();
    lower.contains("http://")
        || lower.contains("https://")
        || lower
            .split_whitespace()
            .any(|tok| tok.trim_start_matches(|c: char| !c.is_alphanumeric()).starts_with("www."))
}

/// Nodes that survive cleaning, in pre-order.
pub fn surviving_nodes<'a>(root: &'a ThreadNode, rules: &CleaningRules) -> Vec<&'a ThreadNode> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if rules.prune_reason(node).is_some() {
            continue;
        }
        out.push(node);
        stack.extend(node.children.iter().rev());
    }
    out
}

/// Flattens a thread into at most one document; empty when the root is pruned.
pub fn clean_reddit_threads(root: &ThreadNode, rules: &CleaningRules) -> Vec<String> {
    let nodes = surviving_nodes(root, rules);
    if nodes.is_empty() {
        return Vec::new();
    }
    let doc = nodes
        .iter()
        .map(|n| n.body.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    vec![doc]
}

/// Reads newline-delimited JSON thread trees, skipping blank lines.
pub fn read_threads<R: BufRead>(input: R) -> impl Iterator<Item = Result<ThreadNode>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line?;
            serde_json::from_str(&line).map_err(|e| Error::Format {
                line: i + 1,
                message: e.to_string(),
            })
        })
}
