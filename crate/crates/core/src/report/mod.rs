//! Report emission: appendix-style count tables, plot-ready scatter data,
//! BLEU-n and the annotation regression analysis.

mod annotation;
mod bleu;
mod tables;

pub use annotation::{
    annotation_analysis, read_annotations, AnnotationCell, AnnotationReport, AnnotationRow,
};
pub use bleu::{bleu_n, bleu_text};
pub use tables::{emit_count_table, emit_scatter, percent_half_up, read_count_table, Scatter};
