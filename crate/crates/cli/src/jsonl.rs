//! Reading and writing the line-delimited JSON formats shared by the
//! commands, plus the atomic text-write used for every output file.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use overlap_core::fsio::write_atomic;
use overlap_core::retrieval::OverlapRecord;
use overlap_core::schema::RawInstance;

use crate::CliError;

/// Read a line-delimited JSON file; blank lines are skipped, anything else
/// must decode. `what` names the content in error messages.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path, what: &str) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::data(format!("reading {what} {}: {err}", path.display())))?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line).map_err(|err| {
            CliError::data(format!("{what} {} line {}: {err}", path.display(), i + 1))
        })?;
        items.push(item);
    }
    Ok(items)
}

/// Read, structurally validate, and uniqueness-check a labeled instance file.
pub fn read_raw_instances(path: &Path) -> Result<Vec<RawInstance>, CliError> {
    let instances: Vec<RawInstance> = read_jsonl(path, "instances")?;
    if instances.is_empty() {
        return Err(CliError::data(format!(
            "no instances in {}",
            path.display()
        )));
    }
    let mut seen = BTreeSet::new();
    for instance in &instances {
        instance
            .validate()
            .map_err(|err| CliError::data(err.to_string()))?;
        if !seen.insert(instance.id.as_str()) {
            return Err(CliError::data(format!(
                "duplicate instance id {}",
                instance.id
            )));
        }
    }
    Ok(instances)
}

/// Read a non-empty overlap-record file produced by `score`.
pub fn read_overlap_records(path: &Path) -> Result<Vec<OverlapRecord>, CliError> {
    let records: Vec<OverlapRecord> = read_jsonl(path, "scores")?;
    if records.is_empty() {
        return Err(CliError::data(format!(
            "no overlap records in {}",
            path.display()
        )));
    }
    Ok(records)
}

/// Serialize items as line-delimited JSON, one object per line.
pub fn to_jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut text = String::new();
    for item in items {
        text.push_str(&serde_json::to_string(&item).expect("serializable output record"));
        text.push('\n');
    }
    text
}

/// Atomically write a text file, creating parent directories as needed.
pub fn write_text_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|err| {
                CliError::data(format!("creating directory {}: {err}", parent.display()))
            })?;
        }
    }
    write_atomic(path, text.as_bytes())
        .map_err(|err| CliError::data(format!("writing {}: {err}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip_skips_blank_lines() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("records.jsonl");
        std::fs::write(&path, "{\"x\":1}\n\n{\"x\":2}\n").expect("write");
        let items: Vec<serde_json::Value> = read_jsonl(&path, "test records").expect("read");
        assert_eq!(items.len(), 2);
    }

    #[test]
    fn bad_lines_name_the_file_and_line() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("records.jsonl");
        std::fs::write(&path, "{\"x\":1}\nnot json\n").expect("write");
        let err = read_jsonl::<serde_json::Value>(&path, "test records").unwrap_err();
        let CliError::Data(message) = err else {
            panic!("expected data error")
        };
        assert!(message.contains("line 2"), "got: {message}");
    }

    #[test]
    fn instance_reader_rejects_duplicates_and_bad_spans() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("instances.jsonl");
        let good = r#"{"id":"a","sentence":"Tom met Sam because he called.","span1":[0,3],"span2":[8,11],"pronoun":[20,22],"answer":1}"#;
        std::fs::write(&path, format!("{good}\n{good}\n")).expect("write");
        let err = read_raw_instances(&path).unwrap_err();
        let CliError::Data(message) = err else {
            panic!("expected data error")
        };
        assert!(
            message.contains("duplicate instance id a"),
            "got: {message}"
        );

        let bad = r#"{"id":"b","sentence":"short","span1":[0,2],"span2":[2,4],"pronoun":[4,9],"answer":1}"#;
        std::fs::write(&path, format!("{bad}\n")).expect("write");
        assert!(
            read_raw_instances(&path).is_err(),
            "out-of-bounds span must fail"
        );
    }
}
