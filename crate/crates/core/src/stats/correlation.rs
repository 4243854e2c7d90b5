use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::replicate_rng;
use crate::{Error, Real, Result};

/// Pearson correlation with its least-squares line and permutation p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult<T> {
    pub r: T,
    pub slope: T,
    pub intercept: T,
    pub n: usize,
    /// Two-sided; `(1 + #{|r_perm| >= |r|}) / (1 + permutations)`.
    pub p_perm: T,
    pub permutations: usize,
    pub seed: u64,
}

struct Centered<T> {
    xc: Vec<T>,
    yc: Vec<T>,
    sxx: T,
    syy: T,
    sxy: T,
    mx: T,
    my: T,
}

fn mean<T: Real>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize(v.len()).unwrap()
}

fn center<T: Real>(xs: &[T], ys: &[T]) -> Result<Centered<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::invalid(format!("correlation needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation input is not finite"));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let xc: Vec<T> = xs.iter().map(|&x| x - mx).collect();
    let yc: Vec<T> = ys.iter().map(|&y| y - my).collect();
    let sxx: T = xc.iter().map(|&a| a * a).sum();
    let syy: T = yc.iter().map(|&b| b * b).sum();
    // a constant vector centres to exact zeros
    if sxx == T::zero() {
        return Err(Error::ZeroVariance("xs"));
    }
    if syy == T::zero() {
        return Err(Error::ZeroVariance("ys"));
    }
    let sxy = dot(&xc, &yc);
    Ok(Centered { xc, yc, sxx, syy, sxy, mx, my })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn clamp_unit<T: Real>(r: T) -> T {
    r.max(-T::one()).min(T::one())
}

/// Sample Pearson r, least-squares fit of `ys` on `xs`, and a seeded
/// permutation test that shuffles `ys`.
pub fn pearson<T: Real>(xs: &[T], ys: &[T], permutations: usize, seed: u64) -> Result<CorrelationResult<T>> {
    let c = center(xs, ys)?;
    let norm = (c.sxx * c.syy).sqrt();
    let r = clamp_unit(c.sxy / norm);
    let slope = c.sxy / c.sxx;
    let intercept = c.my - slope * c.mx;

    // permuted r values equal to |r| up to rounding count as extreme
    let threshold = r.abs() * (T::one() - T::lit(64.0) * T::epsilon());
    let extreme: usize = (0..permutations)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i as u64);
            let mut y = c.yc.clone();
            y.shuffle(&mut rng);
            usize::from((dot(&c.xc, &y) / norm).abs() >= threshold)
        })
        .sum();
    let p_perm = T::from_usize(1 + extreme).unwrap() / T::from_usize(1 + permutations).unwrap();
    Ok(CorrelationResult {
        r,
        slope,
        intercept,
        n: xs.len(),
        p_perm,
        permutations,
        seed,
    })
}

/// 1-based ranks with ties sharing their average rank.
fn ranks<T: Real>(v: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite values"));
    let mut out = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = T::from_usize(i + j + 2).unwrap() / T::lit(2.0);
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson r of average ranks).
pub fn spearman<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation input is not finite"));
    }
    Ok(pearson(&ranks(xs), &ranks(ys), 0, 0)?.r)
}

/// Bootstrap summary of one group's per-occupation MI values.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMIStat<T> {
    pub label: String,
    pub mean: T,
    /// Standard deviation of the bootstrap means.
    pub stderr: T,
    pub n: usize,
    pub resamples: usize,
    pub seed: u64,
}

pub const MIN_RESAMPLES: usize = 1000;

/// Mean of `values` with a nonparametric bootstrap standard error.
pub fn bootstrap_mean<T: Real>(label: &str, values: &[T], resamples: usize, seed: u64) -> Result<GroupMIStat<T>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid(format!("group {label:?} needs at least 2 values, got {n}")));
    }
    if resamples < MIN_RESAMPLES {
        return Err(Error::invalid(format!("at least {MIN_RESAMPLES} bootstrap resamples required, got {resamples}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("group {label:?} has a non-finite value")));
    }
    let nt = T::from_usize(n).unwrap();
    // shift by the first value so equal inputs give exactly equal means
    let shift = values[0];
    let dev: Vec<T> = values.iter().map(|&v| v - shift).collect();
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    let mean = (shift + dev.iter().copied().sum::<T>() / nt).max(lo).min(hi);

    let means: Vec<T> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i as u64);
            let s: T = (0..n).map(|_| dev[rng.random_range(0..n)]).sum();
            s / nt
        })
        .collect();
    let bm = means.iter().copied().sum::<T>() / T::from_usize(resamples).unwrap();
    let var = means.iter().map(|&m| (m - bm) * (m - bm)).sum::<T>() / T::from_usize(resamples - 1).unwrap();
    Ok(GroupMIStat {
        label: label.to_string(),
        mean,
        stderr: var.sqrt(),
        n,
        resamples,
        seed,
    })
}
