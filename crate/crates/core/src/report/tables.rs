use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::corpus::{MentionCounts, OccupationCounts};
use crate::infotheory::{Marker, MarkerTable};
use crate::num::sig12;
use crate::stats::{pearson, CorrelationResult};
use crate::{Error, Real, Result};

const COUNT_HEADER: [&str; 8] = [
    "Occupation",
    "Total",
    "Male",
    "Female",
    "Total gendered",
    "Gendered %",
    "Male %",
    "Female %",
];

const UNDEFINED: &str = "—";

/// `100 * num / den` rounded half-up to two decimals, as `"12.34%"`.
pub fn percent_half_up(num: u64, den: u64) -> Option<String> {
    if den == 0 {
        return None;
    }
    // hundredths of a percent, rounded half-up in integer arithmetic
    let (n, d) = (u128::from(num), u128::from(den));
    let h = (n * 20_000 + d) / (2 * d);
    Some(format!("{}.{:02}%", h / 100, h % 100))
}

/// Appendix-format table: counts, gendered share of all mentions, and the
/// male/female split of gendered mentions.
pub fn emit_count_table<W: Write>(counts: &MentionCounts, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COUNT_HEADER)?;
    for (occ, c) in counts.iter() {
        let g = c.gendered();
        let pct = |a, b| percent_half_up(a, b).unwrap_or_else(|| UNDEFINED.to_string());
        w.write_record([
            occ.to_string(),
            c.total.to_string(),
            c.male.to_string(),
            c.female.to_string(),
            g.to_string(),
            pct(g, c.total),
            pct(c.male, g),
            pct(c.female, g),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_count(s: &str, line: usize, col: &str) -> Result<u64> {
    s.trim().replace(',', "").parse().map_err(|_| Error::Format {
        line,
        message: format!("{col} {s:?} is not a count"),
    })
}

/// Reads the integer columns (`Occupation,Total,Male,Female`) of an
/// appendix-format table; any further columns are ignored. Occupation names
/// are lowercased.
pub fn read_count_table<R: Read>(input: R) -> Result<MentionCounts> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let mut per = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() < 4 {
            return Err(Error::Format {
                line,
                message: format!("expected at least 4 columns, found {}", rec.len()),
            });
        }
        let occ = rec[0].trim().to_lowercase();
        let c = OccupationCounts {
            total: parse_count(&rec[1], line, "Total")?,
            male: parse_count(&rec[2], line, "Male")?,
            female: parse_count(&rec[3], line, "Female")?,
            nonbinary: 0,
        };
        if per.insert(occ.clone(), c).is_some() {
            return Err(Error::Format {
                line,
                message: format!("duplicate occupation {occ:?}"),
            });
        }
    }
    MentionCounts::from_map(per)
}

/// Per-occupation (x, y) points with their fitted line and correlation.
#[derive(Debug, Clone)]
pub struct Scatter<T> {
    pub x: Marker,
    pub y: Marker,
    pub points: Vec<(String, T, T)>,
    pub fit: CorrelationResult<T>,
}

pub fn emit_scatter<T: Real>(
    markers: &MarkerTable<T>,
    x: Marker,
    y: Marker,
    permutations: usize,
    seed: u64,
) -> Result<Scatter<T>> {
    let points = markers.pairs(x, y);
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "{x} vs {y}: only {} occupations have both markers defined, need 3",
            points.len()
        )));
    }
    let xs: Vec<T> = points.iter().map(|p| p.1).collect();
    let ys: Vec<T> = points.iter().map(|p| p.2).collect();
    let fit = pearson(&xs, &ys, permutations, seed)?;
    Ok(Scatter { x, y, points, fit })
}

impl<T: Real> Scatter<T> {
    /// `occupation,<x>,<y>,fitted`.
    pub fn write_points_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["occupation", self.x.as_str(), self.y.as_str(), "fitted"])?;
        for (occ, x, y) in &self.points {
            let fitted = self.fit.intercept + self.fit.slope * *x;
            w.write_record([occ.as_str(), &sig12(*x), &sig12(*y), &sig12(fitted)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row: `x,y,n,r,slope,intercept,p_perm,permutations,seed`.
    pub fn write_correlation_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "n", "r", "slope", "intercept", "p_perm", "permutations", "seed"])?;
        let f = &self.fit;
        w.write_record([
            self.x.as_str(),
            self.y.as_str(),
            &f.n.to_string(),
            &sig12(f.r),
            &sig12(f.slope),
            &sig12(f.intercept),
            &sig12(f.p_perm),
            &f.permutations.to_string(),
            &f.seed.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}
