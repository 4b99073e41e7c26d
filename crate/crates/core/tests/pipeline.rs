//! Stage orchestration over the bundled synthetic corpus.

use std::fs;
use std::path::Path;

use scitopics::pipeline::{
    bundled_config_path, hash_file, verify_run, Manifest, Pipeline, PipelineError, RunConfig, Stage, StageStatus,
};

fn study(out: &Path) -> RunConfig {
    let mut c = RunConfig::load(&bundled_config_path()).unwrap();
    c.out_dir = out.to_path_buf();
    c
}

#[test]
fn eval_before_topics_names_the_missing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(study(dir.path()), false).unwrap();
    p.run_stage(Stage::Ingest).unwrap();
    p.run_stage(Stage::Prep).unwrap();
    match p.run_stage(Stage::Eval) {
        Err(PipelineError::MissingUpstreamArtifact { stage, .. }) => assert_eq!(stage, "topics"),
        other => panic!("unexpected {other:?}"),
    }
    match p.run_stage(Stage::Topics) {
        Err(PipelineError::MissingUpstreamArtifact { stage, .. }) => assert_eq!(stage, "embed"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn rerun_skips_and_force_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(study(dir.path()), false).unwrap();
    assert!(p.run_all().unwrap().iter().all(|(_, s)| *s == StageStatus::Ran));
    assert!(p.run_all().unwrap().iter().all(|(_, s)| *s == StageStatus::Skipped));
    let m = Manifest::load(dir.path()).unwrap();
    assert!(m.stages.values().all(|r| r.status == StageStatus::Skipped));

    let forced = Pipeline::new(study(dir.path()), true).unwrap();
    assert_eq!(forced.run_stage(Stage::Prep).unwrap(), StageStatus::Ran);
}

#[test]
fn config_change_reruns_only_affected_stages() {
    let dir = tempfile::tempdir().unwrap();
    Pipeline::new(study(dir.path()), false).unwrap().run_all().unwrap();
    let mut c = study(dir.path());
    c.eval.top_k = 3;
    let statuses = Pipeline::new(c, false).unwrap().run_all().unwrap();
    let ran: Vec<Stage> = statuses
        .iter()
        .filter(|(_, s)| *s == StageStatus::Ran)
        .map(|(st, _)| *st)
        .collect();
    assert_eq!(ran, vec![Stage::Eval, Stage::Network, Stage::Summarize]);
}

#[test]
fn manifest_lists_every_output_and_verify_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(study(dir.path()), false).unwrap();
    p.run_all().unwrap();
    let m = Manifest::load(dir.path()).unwrap();
    for stage in Stage::ALL {
        let rec = &m.stages[stage.as_str()];
        assert!(!rec.outputs.is_empty(), "{stage} lists no outputs");
        assert!(!rec.config_hash.is_empty());
    }
    let listed = m.artifact_hashes();
    for rel in [
        "corpus.csv",
        "prisma.csv",
        "topics.json",
        "assignment.csv",
        "report.json",
        "descriptions.jsonl",
    ] {
        assert_eq!(listed[rel], hash_file(&dir.path().join(rel)).unwrap());
    }
    assert_eq!(verify_run(dir.path()).unwrap(), listed.len());

    fs::write(dir.path().join("report.txt"), "edited").unwrap();
    match verify_run(dir.path()) {
        Err(PipelineError::Verify(problems)) => {
            assert_eq!(problems.len(), 1);
            assert!(problems[0].starts_with("report.txt"));
        }
        other => panic!("unexpected {other:?}"),
    }
    // A damaged output makes its stage run again.
    assert_eq!(p.run_stage(Stage::Eval).unwrap(), StageStatus::Ran);
    verify_run(dir.path()).unwrap();
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = study(dir.path());
    c.eval.top_k = 0;
    match Pipeline::new(c, false) {
        Err(PipelineError::ConfigInvalid { field, .. }) => assert_eq!(field, "eval.top_k"),
        other => panic!("unexpected {:?}", other.err()),
    }
    let mut c = study(dir.path());
    c.topics.stage2_min_cluster = 1;
    assert!(matches!(
        Pipeline::new(c, false),
        Err(PipelineError::ConfigInvalid { .. })
    ));
}

#[test]
fn ratings_are_scored_when_configured() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings_a.csv");
    fs::write(
        &ratings,
        "topic_id,abstract_id,rater1,rater2\n0,x1,yes,yes\n0,x2,no,yes\n1,x1,yes,yes\n1,x2,yes,yes\n",
    )
    .unwrap();
    let mut c = study(&dir.path().join("run"));
    c.summarize.ratings.push(scitopics::pipeline::RatingInput {
        model: "model-a".into(),
        path: ratings,
    });
    Pipeline::new(c, false).unwrap().run_all().unwrap();
    let report = fs::read_to_string(dir.path().join("run/rating_report.json")).unwrap();
    assert!(report.contains("\"best_model\": \"model-a\""));
    assert!(report.contains("0.75"));
}
