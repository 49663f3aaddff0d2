//! Ingestion, similarity, ranking, protocol execution and reporting.

pub mod annotations;
pub mod embeddings;
pub mod evaluate;
pub mod ranking;
pub mod report;
pub mod similarity;

pub use annotations::{caption_id, load_annotations, parse_caption_id, AnnotationRecord, Split};
pub use embeddings::{
    decode_embeddings, encode_embeddings, load_embeddings, load_embeddings_json, write_embeddings,
    write_embeddings_json, EmbeddingTable,
};
pub use evaluate::{
    run_evaluation, test_gallery_ids, test_query_ids, Averaging, EvalOptions, EvalReport,
    QueryRecord, SimilaritySource,
};
pub use ranking::{build_rank_lists, rank_order};
pub use report::{parse_report, render_report, sha256_file, ReportFormat};
pub use similarity::{compute_similarity_matrix, SimilarityMatrix};
