//! Regenerates the checked-in evaluation fixtures under `tests/fixtures/`.
//!
//! ```text
//! cargo run -p tpr-eval --example make_fixtures
//! ```

#[path = "../tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::path::Path;

use tpr_eval::harness::{
    render_report, run_evaluation, write_embeddings, AnnotationRecord, EvalOptions, ReportFormat,
    SimilaritySource, Split,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir)?;

    let mut data = common::clustered(2024, 6, 2, 8, 0.9, usize::MAX);
    for (i, r) in data.annotations.iter_mut().enumerate() {
        r.source = Some(if i % 2 == 0 { "cuhk" } else { "icfg" }.to_string());
    }
    // Train records stay out of the gallery and query set.
    data.annotations.push(AnnotationRecord {
        image_id: "train_0001".into(),
        person_id: "p00000".into(),
        split: Split::Train,
        captions: vec!["A woman wearing a long red coat and black boots.".into()],
        source: Some("cuhk".into()),
    });

    let mut ann = std::fs::File::create(dir.join("annotations.jsonl"))?;
    for r in &data.annotations {
        writeln!(ann, "{}", serde_json::to_string(r)?)?;
    }
    write_embeddings(&data.queries, &dir.join("query.ufeb"))?;
    write_embeddings(&data.gallery, &dir.join("gallery.ufeb"))?;

    let report = run_evaluation(
        &data.annotations,
        SimilaritySource::Embeddings {
            queries: &data.queries,
            gallery: &data.gallery,
        },
        &EvalOptions::default(),
    )?;
    std::fs::write(
        dir.join("expected_report.json"),
        render_report(&report, ReportFormat::Json)?,
    )?;
    println!("wrote fixtures to {}", dir.display());
    Ok(())
}
