//! On-disk index layout, version 1. Five files per index directory:
//!
//! - `manifest.txt` — human-readable `key=value` header, written last so a
//!   partially written index never looks complete.
//! - `terms.dict` — bytewise-sorted term dictionary: varint term length,
//!   term bytes, varint document frequency, varint postings block size.
//! - `postings.bin` — per term, in dictionary order: one entry per document
//!   (delta-coded doc id, varint position count, delta-coded positions).
//! - `docs.dat` — per document: varint-prefixed source ref, varint token
//!   length, varint-prefixed stored text.
//! - `docs.idx` — u64 little-endian byte offset of each record in
//!   `docs.dat`.
//!
//! Writing the same index twice produces byte-identical files: terms are
//! sorted, documents keep insertion order, and nothing here depends on wall
//! clock, process, or map iteration order.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use super::varint::{read_u64, write_u64};
use super::{DocRecord, PositionalIndex, TermPostings};
use crate::fsio::write_atomic;

pub const FORMAT_VERSION: u64 = 1;

const MANIFEST: &str = "manifest.txt";
const TERMS: &str = "terms.dict";
const POSTINGS: &str = "postings.bin";
const DOCS_DAT: &str = "docs.dat";
const DOCS_IDX: &str = "docs.idx";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("index io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad index manifest: {0}")]
    Manifest(String),
    #[error("unsupported index format version {found} (this build reads version {expected})")]
    Version { found: String, expected: u64 },
    #[error("corrupt index: {0}")]
    Corrupt(String),
}

impl PositionalIndex {
    /// Writes the index under `dir`, creating it if needed. Every file is
    /// written atomically and the manifest goes last.
    pub fn persist(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;

        let terms = self.sorted_terms();

        let mut dict = Vec::new();
        let mut postings = Vec::new();
        for term in &terms {
            let tp = &self.terms[*term];
            let block_start = postings.len();
            encode_postings(tp, &mut postings);
            write_u64(&mut dict, term.len() as u64);
            dict.extend_from_slice(term.as_bytes());
            write_u64(&mut dict, tp.doc_freq() as u64);
            write_u64(&mut dict, (postings.len() - block_start) as u64);
        }

        let mut dat = Vec::new();
        let mut idx = Vec::new();
        for doc in &self.docs {
            idx.extend_from_slice(&(dat.len() as u64).to_le_bytes());
            write_u64(&mut dat, doc.source_ref.len() as u64);
            dat.extend_from_slice(doc.source_ref.as_bytes());
            write_u64(&mut dat, doc.length as u64);
            write_u64(&mut dat, doc.text.len() as u64);
            dat.extend_from_slice(doc.text.as_bytes());
        }

        let manifest = format!(
            "format_version={}\ncorpus_name={}\nN={}\navgdl={}\nterm_count={}\ntotal_tokens={}\n",
            FORMAT_VERSION,
            self.corpus_name,
            self.doc_count(),
            self.avgdl(),
            self.term_count(),
            self.total_tokens
        );

        write_atomic(&dir.join(TERMS), &dict)?;
        write_atomic(&dir.join(POSTINGS), &postings)?;
        write_atomic(&dir.join(DOCS_DAT), &dat)?;
        write_atomic(&dir.join(DOCS_IDX), &idx)?;
        write_atomic(&dir.join(MANIFEST), manifest.as_bytes())?;
        Ok(())
    }

    /// Reads an index previously written by [`PositionalIndex::persist`].
    pub fn load(dir: &Path) -> Result<Self, FormatError> {
        let manifest = read_manifest(&dir.join(MANIFEST))?;
        let corpus_name = manifest.field("corpus_name")?.to_string();
        let n: u64 = manifest.numeric("N")?;
        let term_count: u64 = manifest.numeric("term_count")?;
        let total_tokens: u64 = manifest.numeric("total_tokens")?;

        let dict = read_required(&dir.join(TERMS))?;
        let postings_buf = read_required(&dir.join(POSTINGS))?;

        let mut terms = HashMap::with_capacity(term_count as usize);
        let mut dict_pos = 0usize;
        let mut block_pos = 0usize;
        for _ in 0..term_count {
            let (term, doc_freq, block_len) = decode_dict_entry(&dict, &mut dict_pos)?;
            let block_end = block_pos
                .checked_add(block_len)
                .filter(|&e| e <= postings_buf.len())
                .ok_or_else(|| truncated(POSTINGS))?;
            let tp = decode_postings(&postings_buf[block_pos..block_end], doc_freq)?;
            block_pos = block_end;
            if terms.insert(term.clone(), tp).is_some() {
                return Err(FormatError::Corrupt(format!(
                    "duplicate term '{term}' in dictionary"
                )));
            }
        }
        if dict_pos != dict.len() || block_pos != postings_buf.len() {
            return Err(FormatError::Corrupt(
                "dictionary and postings sizes disagree with the manifest".into(),
            ));
        }

        let docs = decode_docs(
            &read_required(&dir.join(DOCS_DAT))?,
            &read_required(&dir.join(DOCS_IDX))?,
            n,
        )?;

        let index = PositionalIndex {
            corpus_name,
            docs,
            terms,
            total_tokens,
        };
        if index.total_tokens != index.docs.iter().map(|d| d.length as u64).sum::<u64>() {
            return Err(FormatError::Corrupt(
                "token total disagrees with document lengths".into(),
            ));
        }
        Ok(index)
    }
}

fn encode_postings(tp: &TermPostings, out: &mut Vec<u8>) {
    let mut prev_doc = 0u32;
    for (i, &doc_id) in tp.docs.iter().enumerate() {
        let gap = if i == 0 { doc_id } else { doc_id - prev_doc };
        prev_doc = doc_id;
        let positions = tp.positions_at(i);
        write_u64(out, gap as u64);
        write_u64(out, positions.len() as u64);
        let mut prev_pos = 0u32;
        for (j, &pos) in positions.iter().enumerate() {
            let delta = if j == 0 { pos } else { pos - prev_pos };
            prev_pos = pos;
            write_u64(out, delta as u64);
        }
    }
}

fn decode_postings(block: &[u8], doc_freq: u64) -> Result<TermPostings, FormatError> {
    let mut tp = TermPostings::default();
    let mut pos = 0usize;
    let mut doc_id = 0u32;
    for i in 0..doc_freq {
        let gap = read_u32(block, &mut pos)?;
        doc_id = if i == 0 {
            gap
        } else {
            add_gap(doc_id, gap, i)?
        };
        let count = read_u64(block, &mut pos).ok_or_else(|| truncated(POSTINGS))?;
        if count == 0 {
            return Err(FormatError::Corrupt(
                "posting entry with zero positions".into(),
            ));
        }
        tp.docs.push(doc_id);
        tp.offsets.push(tp.positions.len() as u32);
        let mut position = 0u32;
        for j in 0..count {
            let delta = read_u32(block, &mut pos)?;
            position = if j == 0 {
                delta
            } else {
                add_gap(position, delta, j)?
            };
            tp.positions.push(position);
        }
    }
    if pos != block.len() {
        return Err(FormatError::Corrupt(
            "postings block longer than its entries".into(),
        ));
    }
    Ok(tp)
}

/// Gaps after the first entry must be at least 1 to keep ids strictly
/// increasing; a zero gap means the file was corrupted, not just reordered.
fn add_gap(base: u32, gap: u32, entry: u64) -> Result<u32, FormatError> {
    debug_assert!(entry > 0);
    if gap == 0 {
        return Err(FormatError::Corrupt(
            "non-increasing id sequence in postings".into(),
        ));
    }
    base.checked_add(gap)
        .ok_or_else(|| FormatError::Corrupt("posting id overflows 32 bits".into()))
}

fn decode_dict_entry(dict: &[u8], pos: &mut usize) -> Result<(String, u64, usize), FormatError> {
    let len = read_u64(dict, pos).ok_or_else(|| truncated(TERMS))? as usize;
    let end = pos
        .checked_add(len)
        .filter(|&e| e <= dict.len())
        .ok_or_else(|| truncated(TERMS))?;
    let term = std::str::from_utf8(&dict[*pos..end])
        .map_err(|_| FormatError::Corrupt("dictionary term is not valid UTF-8".into()))?
        .to_string();
    *pos = end;
    let doc_freq = read_u64(dict, pos).ok_or_else(|| truncated(TERMS))?;
    let block_len = read_u64(dict, pos).ok_or_else(|| truncated(TERMS))? as usize;
    Ok((term, doc_freq, block_len))
}

fn decode_docs(dat: &[u8], idx: &[u8], n: u64) -> Result<Vec<DocRecord>, FormatError> {
    if idx.len() as u64 != n * 8 {
        return Err(FormatError::Corrupt(format!(
            "doc offset table holds {} entries, manifest says {n}",
            idx.len() / 8
        )));
    }
    let mut docs = Vec::with_capacity(n as usize);
    let mut pos = 0usize;
    for doc_id in 0..n {
        let expected = u64::from_le_bytes(idx[doc_id as usize * 8..][..8].try_into().unwrap());
        if expected != pos as u64 {
            return Err(FormatError::Corrupt(format!(
                "document {doc_id} offset mismatch"
            )));
        }
        let source_ref = read_string(dat, &mut pos)?;
        let length = read_u32(dat, &mut pos)?;
        let text = read_string(dat, &mut pos)?;
        docs.push(DocRecord {
            doc_id: doc_id as u32,
            source_ref,
            length,
            text,
        });
    }
    if pos != dat.len() {
        return Err(FormatError::Corrupt(
            "trailing bytes after the last document".into(),
        ));
    }
    Ok(docs)
}

fn read_string(buf: &[u8], pos: &mut usize) -> Result<String, FormatError> {
    let len = read_u64(buf, pos).ok_or_else(|| truncated(DOCS_DAT))? as usize;
    let end = pos
        .checked_add(len)
        .filter(|&e| e <= buf.len())
        .ok_or_else(|| truncated(DOCS_DAT))?;
    let s = std::str::from_utf8(&buf[*pos..end])
        .map_err(|_| FormatError::Corrupt("stored string is not valid UTF-8".into()))?
        .to_string();
    *pos = end;
    Ok(s)
}

fn read_u32(buf: &[u8], pos: &mut usize) -> Result<u32, FormatError> {
    let v = read_u64(buf, pos).ok_or(FormatError::Corrupt("truncated varint".into()))?;
    u32::try_from(v).map_err(|_| FormatError::Corrupt("value exceeds 32 bits".into()))
}

fn truncated(file: &str) -> FormatError {
    FormatError::Corrupt(format!("{file} is truncated"))
}

fn read_required(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            FormatError::Corrupt(format!("{} is missing", path.display()))
        } else {
            FormatError::Io(e)
        }
    })
}

struct Manifest {
    fields: HashMap<String, String>,
}

impl Manifest {
    fn field(&self, key: &str) -> Result<&str, FormatError> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| FormatError::Manifest(format!("missing field '{key}'")))
    }

    fn numeric(&self, key: &str) -> Result<u64, FormatError> {
        self.field(key)?
            .parse()
            .map_err(|_| FormatError::Manifest(format!("field '{key}' is not an integer")))
    }
}

fn read_manifest(path: &Path) -> Result<Manifest, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            FormatError::Manifest(format!("no index at {}", path.display()))
        } else {
            FormatError::Io(e)
        }
    })?;
    let mut fields = HashMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            fields.insert(k.to_string(), v.to_string());
        }
    }
    let manifest = Manifest { fields };
    let version = manifest.field("format_version")?;
    if version != FORMAT_VERSION.to_string() {
        return Err(FormatError::Version {
            found: version.to_string(),
            expected: FORMAT_VERSION,
        });
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::text::Sentence;

    fn toy_index() -> PositionalIndex {
        let sentences = [
            "the cat sat on the mat",
            "a dog saw the cat",
            "the cat sat on the mat",
            "nothing in common here",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| Sentence::new(format!("toy:{i}"), *t));
        build_index(sentences, "toy").unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let index = toy_index();
        index.persist(dir.path()).unwrap();
        let loaded = PositionalIndex::load(dir.path()).unwrap();
        assert_eq!(index, loaded);
    }

    #[test]
    fn persistence_is_byte_identical_across_writes_and_reloads() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let index = toy_index();
        index.persist(a.path()).unwrap();
        PositionalIndex::load(a.path())
            .unwrap()
            .persist(b.path())
            .unwrap();
        for file in [MANIFEST, TERMS, POSTINGS, DOCS_DAT, DOCS_IDX] {
            let x = std::fs::read(a.path().join(file)).unwrap();
            let y = std::fs::read(b.path().join(file)).unwrap();
            assert_eq!(x, y, "{file} differs between write and rewrite");
        }
    }

    #[test]
    fn manifest_is_readable_text() {
        let dir = tempfile::tempdir().unwrap();
        toy_index().persist(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        assert!(text.contains("format_version=1"));
        assert!(text.contains("corpus_name=toy"));
        assert!(text.contains("N=4"));
        assert!(text.contains("term_count="));
        assert!(text.contains("avgdl="));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        toy_index().persist(dir.path()).unwrap();
        let manifest_path = dir.path().join(MANIFEST);
        let doctored = std::fs::read_to_string(&manifest_path)
            .unwrap()
            .replace("format_version=1", "format_version=99");
        std::fs::write(&manifest_path, doctored).unwrap();
        match PositionalIndex::load(dir.path()) {
            Err(FormatError::Version { found, expected }) => {
                assert_eq!(found, "99");
                assert_eq!(expected, 1);
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_postings_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        toy_index().persist(dir.path()).unwrap();
        let path = dir.path().join(POSTINGS);
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            PositionalIndex::load(dir.path()),
            Err(FormatError::Corrupt(_))
        ));
    }

    #[test]
    fn missing_manifest_means_no_index() {
        let dir = tempfile::tempdir().unwrap();
        toy_index().persist(dir.path()).unwrap();
        std::fs::remove_file(dir.path().join(MANIFEST)).unwrap();
        assert!(matches!(
            PositionalIndex::load(dir.path()),
            Err(FormatError::Manifest(_))
        ));
    }

    #[test]
    fn an_empty_directory_is_not_an_index() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            PositionalIndex::load(dir.path()),
            Err(FormatError::Manifest(_))
        ));
    }
}
