use std::fs;
use std::io::Write;
use std::path::Path;

use super::model::Document;
use super::validate::{validate_document, ValidationReport};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One document object per line.
    JsonLines,
    /// A directory holding one `*.json` document per file, read in name order.
    PerFile,
}

impl CorpusFormat {
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            CorpusFormat::PerFile
        } else {
            CorpusFormat::JsonLines
        }
    }
}

/// Reads documents without checking structural invariants.
pub fn read_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>> {
    match format {
        CorpusFormat::JsonLines => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_jsonl(&text)
        }
        CorpusFormat::PerFile => {
            let mut files: Vec<_> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            files.sort();
            files
                .iter()
                .map(|file| {
                    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
                    serde_json::from_str(&text).map_err(|e| json_error(&text, 0, &e))
                })
                .collect()
        }
    }
}

/// Reads and validates a corpus; any hard invariant breach is an error.
pub fn parse_corpus(path: &Path, format: CorpusFormat, vocab: &Vocabulary) -> Result<Vec<Document>> {
    let docs = read_corpus(path, format)?;
    check_all(&docs, vocab).into_result()?;
    Ok(docs)
}

pub fn check_all(docs: &[Document], vocab: &Vocabulary) -> ValidationReport {
    let mut report = ValidationReport::default();
    for d in docs {
        report.merge(validate_document(d, vocab));
    }
    report
}

/// Parses JSON Lines text. Blank lines are skipped.
pub fn parse_jsonl(text: &str) -> Result<Vec<Document>> {
    parse_jsonl_as(text)
}

/// Parses any JSON Lines payload whose records deserialize into `T`.
pub fn parse_jsonl_as<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let start = offset;
        offset += line.len();
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| {
            let mut err = json_error(line, start, &e);
            if let Error::Parse { line, .. } = &mut err {
                *line = lineno + 1;
            }
            err
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn json_error(text: &str, base: usize, e: &serde_json::Error) -> Error {
    // serde_json reports 1-based line/column within `text`.
    let line_start: usize = text
        .split_inclusive('\n')
        .take(e.line().saturating_sub(1))
        .map(str::len)
        .sum();
    Error::Parse {
        offset: base + line_start + e.column().saturating_sub(1),
        line: e.line(),
        message: e.to_string(),
    }
}

pub fn to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d).expect("documents always serialize"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: &Path, docs: &[Document]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(to_jsonl(docs).as_bytes())
        .map_err(|e| Error::io(path, e))
}
