//! Stage-exact audit of the construction pipeline on a 200-comment dump.
//!
//! The fixture comments were built from templates whose path through the
//! stages — length gate, exactly-one-connective filter, two-noun-phrases
//! antecedent filter, gendered perturbation — was determined by hand from the
//! documented rules before this test was first run. The expectations file
//! pins, per stage, exactly which sentence ids pass, which instances perturb
//! (and to which gender), which are skipped as ungendered, and what the
//! 4-of-5 annotation merge keeps.

use std::collections::BTreeMap;

use serde::Deserialize;

use overlap_core::pipeline::{
    antecedent_filter, clean_and_split, connective_filter, finalize_dataset, merge_annotations,
    parse_annotation_labels, perturb, read_comment_documents, run_pipeline, DropReason, Gender,
    PipelineConfig, SkipError,
};
use overlap_core::schema::parse_instance;
use overlap_core::text::HeuristicTagger;

const DUMP: &str = include_str!("fixtures/comments.jsonl");
const EXPECTED: &str = include_str!("fixtures/comments_expected.json");
const LABELS: &str = include_str!("fixtures/comment_labels.tsv");

#[derive(Deserialize)]
struct ExpectedFunnel {
    documents: usize,
    undecodable: usize,
    sentences: usize,
    connective_pass: usize,
    antecedent_pass: usize,
    ungendered_skipped: usize,
    perturbed: usize,
}

#[derive(Deserialize)]
struct ExpectedInstance {
    id: String,
    gender: String,
}

#[derive(Deserialize)]
struct ExpectedKept {
    id: String,
    answer: u8,
}

#[derive(Deserialize)]
struct ExpectedMerge {
    kept: Vec<ExpectedKept>,
    no_majority_ids: Vec<String>,
    unannotated_ids: Vec<String>,
}

#[derive(Deserialize)]
struct Expected {
    funnel: ExpectedFunnel,
    sentence_ids: Vec<String>,
    connective_pass_ids: Vec<String>,
    antecedent_pass_ids: Vec<String>,
    perturbed_instances: Vec<ExpectedInstance>,
    ungendered_ids: Vec<String>,
    merge: ExpectedMerge,
}

fn expected() -> Expected {
    serde_json::from_str(EXPECTED).expect("expectations file parses")
}

fn documents() -> (Vec<(String, String)>, usize) {
    read_comment_documents(DUMP.as_bytes()).expect("fixture dump reads")
}

fn gender_label(gender: Gender) -> &'static str {
    match gender {
        Gender::Male => "male",
        Gender::Female => "female",
    }
}

#[test]
fn dump_reader_sees_200_comments_and_4_undecodable_lines() {
    let want = expected();
    let (documents, undecodable) = documents();
    assert_eq!(documents.len(), want.funnel.documents);
    assert_eq!(undecodable, want.funnel.undecodable);
}

#[test]
fn funnel_counts_match_the_hand_audit_exactly() {
    let want = expected();
    let (documents, undecodable) = documents();
    let mut output = run_pipeline(
        documents,
        &HeuristicTagger::default(),
        &PipelineConfig::default(),
    );
    output.stats.undecodable = undecodable;

    assert_eq!(output.stats.documents, want.funnel.documents, "documents");
    assert_eq!(
        output.stats.undecodable, want.funnel.undecodable,
        "undecodable"
    );
    assert_eq!(output.stats.sentences, want.funnel.sentences, "sentences");
    assert_eq!(
        output.stats.connective_pass, want.funnel.connective_pass,
        "connective_pass"
    );
    assert_eq!(
        output.stats.antecedent_pass, want.funnel.antecedent_pass,
        "antecedent_pass"
    );
    assert_eq!(
        output.stats.ungendered_skipped, want.funnel.ungendered_skipped,
        "ungendered_skipped"
    );
    assert_eq!(output.stats.perturbed, want.funnel.perturbed, "perturbed");

    // The funnel narrows monotonically from the sentence stage onward.
    assert!(output.stats.sentences >= output.stats.connective_pass);
    assert!(output.stats.connective_pass >= output.stats.antecedent_pass);
    assert!(output.stats.antecedent_pass >= output.stats.perturbed);
    assert_eq!(
        output.stats.antecedent_pass,
        output.stats.perturbed + output.stats.ungendered_skipped
    );

    let got: Vec<(String, String)> = output
        .instances
        .iter()
        .map(|p| {
            (
                p.instance_id.clone(),
                gender_label(p.pronoun_gender).to_string(),
            )
        })
        .collect();
    let want_instances: Vec<(String, String)> = want
        .perturbed_instances
        .into_iter()
        .map(|e| (e.id, e.gender))
        .collect();
    assert_eq!(got, want_instances, "perturbed instances (id, gender)");
}

#[test]
fn each_stage_passes_exactly_the_hand_audited_sentences() {
    let want = expected();
    let (documents, _) = documents();
    let config = PipelineConfig::default();
    let tagger = HeuristicTagger::default();

    let mut sentence_ids = Vec::new();
    let mut conn_ids = Vec::new();
    let mut ante_ids = Vec::new();
    let mut perturbed_ids = Vec::new();
    let mut ungendered_ids = Vec::new();

    for (source_ref, body) in &documents {
        for sentence in clean_and_split(source_ref, body, &config) {
            sentence_ids.push(sentence.id.clone());
            if !connective_filter(&sentence, &config.lexicon) {
                continue;
            }
            conn_ids.push(sentence.id.clone());
            let Some(candidate) = antecedent_filter(&sentence, &tagger, &config.lexicon) else {
                continue;
            };
            ante_ids.push(candidate.source_ref.clone());
            match perturb(
                &candidate,
                &config.male_names,
                &config.female_names,
                config.seed,
            ) {
                Ok(instance) => perturbed_ids.push(instance.instance_id),
                Err(SkipError::Ungendered(_)) => ungendered_ids.push(candidate.source_ref),
                Err(SkipError::NoPronoun) => {
                    panic!(
                        "{}: pronoun vanished between filter and perturb",
                        candidate.source_ref
                    )
                }
            }
        }
    }

    assert_eq!(
        sentence_ids, want.sentence_ids,
        "sentences surviving the length gate"
    );
    assert_eq!(
        conn_ids, want.connective_pass_ids,
        "connective-filter passes"
    );
    assert_eq!(
        ante_ids, want.antecedent_pass_ids,
        "antecedent-filter passes"
    );
    let want_perturbed: Vec<String> = want.perturbed_instances.into_iter().map(|e| e.id).collect();
    assert_eq!(perturbed_ids, want_perturbed, "perturbed instance ids");
    assert_eq!(ungendered_ids, want.ungendered_ids, "ungendered skips");
}

#[test]
fn perturbation_round_trip_recovers_every_original_sentence() {
    let (documents, _) = documents();
    let output = run_pipeline(
        documents,
        &HeuristicTagger::default(),
        &PipelineConfig::default(),
    );
    assert!(!output.instances.is_empty());

    for instance in &output.instances {
        let (s1, s2, p) = instance.perturbed_spans();
        let perturbed = &instance.perturbed_sentence;
        assert_eq!(
            &perturbed[s1[0]..s1[1]],
            instance.name1,
            "{}",
            instance.instance_id
        );
        assert_eq!(
            &perturbed[s2[0]..s2[1]],
            instance.name2,
            "{}",
            instance.instance_id
        );
        assert_ne!(instance.name1, instance.name2, "{}", instance.instance_id);

        let original = &instance.original.sentence;
        let np_text = |span: overlap_core::text::TokenSpan| {
            let start = original.tokens[span.start].span.start;
            let end = original.tokens[span.end].span.end;
            &original.raw[start..end]
        };
        let rebuilt = format!(
            "{}{}{}{}{}",
            &perturbed[..s1[0]],
            np_text(instance.original.np1),
            &perturbed[s1[1]..s2[0]],
            np_text(instance.original.np2),
            &perturbed[s2[1]..]
        );
        assert_eq!(
            rebuilt, original.raw,
            "round trip failed for {}",
            instance.instance_id
        );

        // The pronoun slot is untouched by the splice.
        let pronoun = &perturbed[p[0]..p[1]];
        assert!(
            ["he", "she"].contains(&pronoun.to_lowercase().as_str()),
            "unexpected pronoun {pronoun:?} in {}",
            instance.instance_id
        );
    }
}

#[test]
fn merge_keeps_exactly_the_four_of_five_agreements() {
    let want = expected();
    let records = parse_annotation_labels(LABELS).expect("labels fixture parses");
    let outcome = merge_annotations(&records).expect("five labels per instance");

    let want_kept: Vec<(String, u8)> = want
        .merge
        .kept
        .iter()
        .map(|k| (k.id.clone(), k.answer))
        .collect();
    assert_eq!(outcome.kept, want_kept, "kept (id, majority answer)");

    let want_dropped: Vec<(String, DropReason)> = want
        .merge
        .no_majority_ids
        .iter()
        .map(|id| (id.clone(), DropReason::NoStrongMajority))
        .collect();
    assert_eq!(outcome.dropped, want_dropped, "3-2 splits dropped");
}

#[test]
fn finalize_joins_labels_and_drops_the_rest_with_reasons() {
    let want = expected();
    let (documents, _) = documents();
    let output = run_pipeline(
        documents,
        &HeuristicTagger::default(),
        &PipelineConfig::default(),
    );
    let records = parse_annotation_labels(LABELS).unwrap();
    let outcome = merge_annotations(&records).unwrap();

    let (dataset, dropped) = finalize_dataset(&output.instances, &outcome).expect("ids line up");

    let got: Vec<(String, u8)> = dataset.iter().map(|r| (r.id.clone(), r.answer)).collect();
    let want_kept: Vec<(String, u8)> = want
        .merge
        .kept
        .iter()
        .map(|k| (k.id.clone(), k.answer))
        .collect();
    assert_eq!(got, want_kept, "final dataset ids and answers");

    let tagger = HeuristicTagger::default();
    for raw in &dataset {
        raw.validate()
            .unwrap_or_else(|e| panic!("{} fails validation: {e}", raw.id));
        parse_instance(raw, &tagger).unwrap_or_else(|e| panic!("{} fails parsing: {e}", raw.id));
    }

    let mut by_reason: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, reason) in &dropped {
        let key = match reason {
            DropReason::NoStrongMajority => "no_majority",
            DropReason::Unannotated => "unannotated",
        };
        by_reason.entry(key).or_default().push(id);
    }
    let no_majority: Vec<&str> = want
        .merge
        .no_majority_ids
        .iter()
        .map(String::as_str)
        .collect();
    let unannotated: Vec<&str> = want
        .merge
        .unannotated_ids
        .iter()
        .map(String::as_str)
        .collect();
    assert_eq!(
        by_reason.get("no_majority"),
        Some(&no_majority),
        "3-2 drops"
    );
    assert_eq!(
        by_reason.get("unannotated"),
        Some(&unannotated),
        "unannotated drops"
    );
    assert_eq!(dropped.len(), no_majority.len() + unannotated.len());
}
