use std::collections::HashMap;
use std::hash::Hash;

use crate::{Error, Real, Result};

fn ngram_counts<S: Eq + Hash>(tokens: &[S], n: usize) -> HashMap<&[S], usize> {
    let mut m = HashMap::new();
    for g in tokens.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

/// Sentence BLEU with uniform weights over orders `1..=max_order`: geometric
/// mean of clipped n-gram precisions times the brevity penalty. Any zero
/// precision gives 0.
pub fn bleu_n<T: Real, S: Eq + Hash>(reference: &[S], candidate: &[S], max_order: usize) -> Result<T> {
    if max_order == 0 {
        return Err(Error::invalid("BLEU order must be at least 1"));
    }
    if candidate.is_empty() {
        return Err(Error::invalid("BLEU candidate is empty"));
    }
    let mut log_sum = T::zero();
    for n in 1..=max_order {
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        let total: usize = cand.values().sum();
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        if clipped == 0 {
            return Ok(T::zero());
        }
        let p = T::from_usize(clipped).unwrap() / T::from_usize(total).unwrap();
        log_sum = log_sum + p.ln();
    }
    let (r, c) = (reference.len(), candidate.len());
    let bp = if c < r {
        (T::one() - T::from_usize(r).unwrap() / T::from_usize(c).unwrap()).exp()
    } else {
        T::one()
    };
    let score = bp * (log_sum / T::from_usize(max_order).unwrap()).exp();
    Ok(score.min(T::one()))
}

/// BLEU over lowercased, whitespace-split texts.
pub fn bleu_text<T: Real>(reference: &str, candidate: &str, max_order: usize) -> Result<T> {
    let r = reference.to_lowercase();
    let c = candidate.to_lowercase();
    let rt: Vec<&str> = r.split_whitespace().collect();
    let ct: Vec<&str> = c.split_whitespace().collect();
    bleu_n(&rt, &ct, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split(' ').collect()
    }

    #[test]
    fn identical_and_disjoint() {
        let a = toks("a b c d");
        assert_eq!(bleu_n::<f64, _>(&a, &a, 4).unwrap(), 1.0);
        assert_eq!(bleu_n::<f64, _>(&a, &toks("w x y z"), 2).unwrap(), 0.0);
    }

    #[test]
    fn clipped_example() {
        // "the" clips to 2 and "cat" to 1: p1 = 5/7; bigrams: the cat, on the, the mat: p2 = 3/6
        let b: f64 = bleu_n(&toks("the cat sat on the mat"), &toks("the cat the cat on the mat"), 2).unwrap();
        assert!((b - (5.0f64 / 14.0).sqrt()).abs() < 1e-12);
        assert!((b - 0.597_614_304_667_196_8).abs() < 1e-4);
    }

    #[test]
    fn brevity_penalty() {
        let b: f64 = bleu_n(&toks("a b c d e f"), &toks("a b c d"), 2).unwrap();
        assert!((b - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn guards_and_text() {
        assert!(bleu_n::<f64, &str>(&["a"], &[], 1).is_err());
        assert!(bleu_n::<f64, _>(&["a"], &["a"], 0).is_err());
        assert_eq!(bleu_text::<f64>("The Cat", "the  cat", 2).unwrap(), 1.0);
    }
}
