//! File formats: score and distribution JSON, performance JSONL/CSV/SMF,
//! annotation and follower-output JSONL, report JSON, CSV tables.

mod performance;
mod records;
mod score;

pub use performance::{
    parse_performance, performance_from_csv, performance_from_jsonl, performance_from_smf,
    performance_to_csv, performance_to_jsonl, performance_to_smf, write_performance,
};
pub use records::{
    annotation_from_jsonl, annotation_to_jsonl, bench_to_csv, follower_output_from_jsonl,
    follower_output_to_jsonl, ft_curve_from_csv, ft_curve_to_csv, parse_annotation, report_from_json,
    report_to_json, write_annotation, write_report, write_text, FtCurvePoint,
};
pub use score::{
    distribution_from_json, parse_distribution, parse_score, score_from_json, score_to_json,
    write_distribution, write_score,
};
