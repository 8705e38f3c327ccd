//! Run manifests: every command leaves a `run_manifest.txt` beside its
//! outputs recording the tool version, the resolved settings, and a SHA-256
//! digest of every input file. Two runs over the same inputs with the same
//! settings produce byte-identical manifests — nothing time- or
//! machine-dependent is recorded. Output locations are deliberately not
//! echoed: the manifest's own directory is the output location.

use std::fmt::Display;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

/// File name used beside directory outputs.
pub const RUN_MANIFEST_NAME: &str = "run_manifest.txt";

#[derive(Debug)]
pub struct RunManifest {
    command: &'static str,
    settings: Vec<(String, String)>,
    inputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        RunManifest {
            command,
            settings: Vec::new(),
            inputs: Vec::new(),
        }
    }

    /// Record one resolved setting (flag or config value actually used).
    pub fn setting(&mut self, key: &str, value: impl Display) {
        self.settings.push((key.to_string(), value.to_string()));
    }

    /// Record an input file to be digested.
    pub fn input_file(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Record every regular file directly inside `dir` (an index directory).
    pub fn input_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        let read = |e: std::io::Error| {
            CliError::data(format!("reading input directory {}: {e}", dir.display()))
        };
        let mut files = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(read)? {
            let path = entry.map_err(read)?.path();
            if path.is_file() {
                files.push(path);
            }
        }
        files.sort();
        self.inputs.extend(files);
        Ok(())
    }

    /// Render the manifest, digesting every recorded input.
    pub fn render(&self) -> Result<String, CliError> {
        let mut text = String::new();
        let _ = writeln!(text, "tool = overlap");
        let _ = writeln!(text, "version = {}", crate::TOOL_VERSION);
        let _ = writeln!(text, "command = {}", self.command);

        let mut settings = self.settings.clone();
        settings.sort();
        let _ = writeln!(text, "\n[settings]");
        for (key, value) in &settings {
            let _ = writeln!(text, "{key} = {value}");
        }

        let mut inputs = self.inputs.clone();
        inputs.sort();
        inputs.dedup();
        let _ = writeln!(text, "\n[inputs]");
        for path in &inputs {
            let _ = writeln!(text, "sha256 {} = {}", path.display(), file_digest(path)?);
        }
        Ok(text)
    }

    /// Write `run_manifest.txt` into an output directory. Call this last so
    /// the manifest acts as the commit marker of a finished run.
    pub fn write_into_dir(&self, dir: &Path) -> Result<(), CliError> {
        self.write_to(&dir.join(RUN_MANIFEST_NAME))
    }

    /// Write the manifest beside a file output as `<file name>.manifest.txt`.
    pub fn write_beside_file(&self, output: &Path) -> Result<(), CliError> {
        let name = output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".to_string());
        self.write_to(&output.with_file_name(format!("{name}.manifest.txt")))
    }

    fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let text = self.render()?;
        crate::jsonl::write_text_atomic(path, &text)
    }
}

/// Lowercase hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|err| CliError::data(format!("digesting input {}: {err}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_known_vector() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("x");
        std::fs::write(&path, b"abc").expect("write");
        // SHA-256("abc"), a published test vector.
        assert_eq!(
            file_digest(&path).expect("digest"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn renders_sorted_settings_and_inputs_without_timestamps() {
        let dir = tempfile::tempdir().expect("tempdir");
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        std::fs::write(&a, "one").expect("write");
        std::fs::write(&b, "two").expect("write");

        let mut manifest = RunManifest::new("score");
        manifest.setting("k1", 1.2);
        manifest.setting("b", 0.75);
        manifest.input_file(&b);
        manifest.input_file(&a);
        manifest.input_file(&a); // duplicates collapse
        let text = manifest.render().expect("render");

        let b_line = text
            .lines()
            .position(|l| l.starts_with("b = "))
            .expect("b setting");
        let k1_line = text
            .lines()
            .position(|l| l.starts_with("k1 = "))
            .expect("k1 setting");
        assert!(b_line < k1_line, "settings must be sorted by key");
        assert_eq!(text.matches("sha256 ").count(), 2, "deduped inputs");
        let a_pos = text.find("a.txt").expect("a digested");
        let b_pos = text.find("b.txt").expect("b digested");
        assert!(a_pos < b_pos, "inputs must be sorted by path");
        assert_eq!(
            text,
            manifest.render().expect("second render"),
            "rendering is pure"
        );
    }

    #[test]
    fn directory_inputs_enumerate_files_sorted() {
        let dir = tempfile::tempdir().expect("tempdir");
        std::fs::write(dir.path().join("z.bin"), "z").expect("write");
        std::fs::write(dir.path().join("a.bin"), "a").expect("write");
        let mut manifest = RunManifest::new("score");
        manifest.input_dir(dir.path()).expect("dir");
        let text = manifest.render().expect("render");
        let a_pos = text.find("a.bin").expect("a listed");
        let z_pos = text.find("z.bin").expect("z listed");
        assert!(a_pos < z_pos);
    }
}
