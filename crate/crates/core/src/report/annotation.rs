use std::io::{Read, Write};

use serde::Deserialize;

use crate::num::sig12;
use crate::stats::{logistic_fit, xnor_interaction, DesignMatrix, LogisticFit};
use crate::{Error, Real, Result};

/// One annotated comment. `gender_bit` is 0 for female, 1 for male.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AnnotationRow {
    pub occupation: String,
    pub gender_bit: u8,
    pub sentiment: f64,
    pub is_offensive: u8,
    pub is_about_gender: u8,
}

/// Carpenter is 0, nurse is 1.
fn occupation_bit(occupation: &str) -> Result<bool> {
    match occupation.trim().to_lowercase().as_str() {
        "carpenter" => Ok(false),
        "nurse" => Ok(true),
        other => Err(Error::invalid(format!(
            "annotation occupation {other:?}; expected carpenter or nurse"
        ))),
    }
}

pub fn read_annotations<R: Read>(input: R) -> Result<Vec<AnnotationRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (i, row) in rdr.deserialize::<AnnotationRow>().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |what: &str| Error::Format {
            line,
            message: format!("{what} must be 0 or 1"),
        };
        if row.gender_bit > 1 {
            return Err(bad("gender_bit"));
        }
        if row.is_offensive > 1 {
            return Err(bad("is_offensive"));
        }
        if row.is_about_gender > 1 {
            return Err(bad("is_about_gender"));
        }
        occupation_bit(&row.occupation).map_err(|e| Error::Format {
            line,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationCell<T> {
    pub gender_bit: u8,
    pub occupation: &'static str,
    pub xnor: u8,
    pub n: usize,
    pub sentiment: T,
    pub offensive: T,
    pub about_gender: T,
}

#[derive(Debug, Clone)]
pub struct AnnotationReport<T> {
    /// Female carpenter, male carpenter, female nurse, male nurse.
    pub cells: Vec<AnnotationCell<T>>,
    pub offensive: LogisticFit<T>,
    pub about_gender: LogisticFit<T>,
}

pub const FEATURES: [&str; 4] = ["intercept", "gender", "occupation", "xnor"];

/// Cell means and logistic fits of `is_offensive` and `is_about_gender` on
/// `[1, gender, occupation, xnor(gender, occupation)]`.
pub fn annotation_analysis<T: Real>(rows: &[AnnotationRow], lambda: T) -> Result<AnnotationReport<T>> {
    let mut design = Vec::with_capacity(rows.len());
    let mut sums = [[0.0f64; 4]; 4];
    for r in rows {
        let g = r.gender_bit == 1;
        let o = occupation_bit(&r.occupation)?;
        let x = xnor_interaction(g, o);
        design.push(vec![T::one(), T::from_u8(r.gender_bit).unwrap(), T::lit(f64::from(u8::from(o))), T::from_u8(x).unwrap()]);
        let cell = &mut sums[usize::from(o) * 2 + usize::from(g)];
        cell[0] += 1.0;
        cell[1] += r.sentiment;
        cell[2] += f64::from(r.is_offensive);
        cell[3] += f64::from(r.is_about_gender);
    }
    let cells = sums
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mean = |v: f64| if s[0] > 0.0 { T::lit(v / s[0]) } else { T::nan() };
            let (g, o) = (i % 2 == 1, i >= 2);
            AnnotationCell {
                gender_bit: u8::from(g),
                occupation: if o { "nurse" } else { "carpenter" },
                xnor: xnor_interaction(g, o),
                n: s[0] as usize,
                sentiment: mean(s[1]),
                offensive: mean(s[2]),
                about_gender: mean(s[3]),
            }
        })
        .collect();
    let x = DesignMatrix::from_rows(&design)?;
    let fit = |name: &str, label: fn(&AnnotationRow) -> u8| -> Result<LogisticFit<T>> {
        let y: Vec<T> = rows.iter().map(|r| T::from_u8(label(r)).unwrap()).collect();
        let ones = rows.iter().filter(|r| label(r) == 1).count();
        if ones == 0 || ones == rows.len() {
            return Err(Error::invalid(format!("target {name} is constant")));
        }
        logistic_fit(&x, &y, lambda)
    };
    Ok(AnnotationReport {
        cells,
        offensive: fit("is_offensive", |r| r.is_offensive)?,
        about_gender: fit("is_about_gender", |r| r.is_about_gender)?,
    })
}

impl<T: Real> AnnotationReport<T> {
    /// `gender,occupation,xnor,n,sentiment,offensive,about_gender`.
    pub fn write_cells_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gender", "occupation", "xnor", "n", "sentiment", "offensive", "about_gender"])?;
        for c in &self.cells {
            w.write_record([
                if c.gender_bit == 1 { "male" } else { "female" },
                c.occupation,
                &c.xnor.to_string(),
                &c.n.to_string(),
                &sig12(c.sentiment),
                &sig12(c.offensive),
                &sig12(c.about_gender),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `target,feature,coefficient,std_error,lambda,iterations,converged`.
    pub fn write_fits_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["target", "feature", "coefficient", "std_error", "lambda", "iterations", "converged"])?;
        for (target, fit) in [("is_offensive", &self.offensive), ("is_about_gender", &self.about_gender)] {
            for (j, name) in FEATURES.iter().enumerate() {
                w.write_record([
                    target,
                    name,
                    &sig12(fit.coefficients[j]),
                    &sig12(fit.std_errors[j]),
                    &sig12(fit.lambda),
                    &fit.iterations.to_string(),
                    &fit.converged.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(occ: &str, g: u8, s: f64, off: u8, ab: u8) -> AnnotationRow {
        AnnotationRow {
            occupation: occ.into(),
            gender_bit: g,
            sentiment: s,
            is_offensive: off,
            is_about_gender: ab,
        }
    }

    #[test]
    fn cells_and_xnor_column() {
        let mut rows = Vec::new();
        for (occ, g) in [("carpenter", 0), ("carpenter", 1), ("nurse", 0), ("nurse", 1)] {
            for k in 0..4u8 {
                rows.push(row(occ, g, f64::from(k % 3), k % 2, u8::from(k < 2)));
            }
        }
        let rep: AnnotationReport<f64> = annotation_analysis(&rows, 1e-6).unwrap();
        let xnor: Vec<u8> = rep.cells.iter().map(|c| c.xnor).collect();
        assert_eq!(xnor, vec![1, 0, 0, 1]);
        assert!(rep.cells.iter().all(|c| c.n == 4 && (c.offensive - 0.5).abs() < 1e-15));
        assert!(rep.offensive.converged);
    }

    #[test]
    fn degenerate_target() {
        let rows = vec![row("nurse", 0, 1.0, 0, 1), row("carpenter", 1, 1.0, 0, 0)];
        assert!(annotation_analysis::<f64>(&rows, 1e-6).is_err());
    }

    #[test]
    fn reads_and_validates_csv() {
        let ok = "occupation,gender_bit,sentiment,is_offensive,is_about_gender\nnurse,1,2,0,1\n";
        assert_eq!(read_annotations(ok.as_bytes()).unwrap().len(), 1);
        let bad = "occupation,gender_bit,sentiment,is_offensive,is_about_gender\npilot,1,2,0,1\n";
        assert!(read_annotations(bad.as_bytes()).is_err());
    }
}
