use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{Document, Mention};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    SpanOrder,
    SpanBounds,
    EmptyCluster,
    DuplicateClusterId,
    DuplicateMention,
    MentionMultiCluster,
    DanglingRelation,
    SelfRelation,
    SentenceCoverage,
    UnknownTag,
    UnknownRelationType,
}

impl Code {
    pub fn as_str(&self) -> &'static str {
        match self {
            Code::SpanOrder => "SPAN_ORDER",
            Code::SpanBounds => "SPAN_BOUNDS",
            Code::EmptyCluster => "EMPTY_CLUSTER",
            Code::DuplicateClusterId => "DUPLICATE_CLUSTER_ID",
            Code::DuplicateMention => "DUPLICATE_MENTION",
            Code::MentionMultiCluster => "MENTION_MULTI_CLUSTER",
            Code::DanglingRelation => "DANGLING_RELATION",
            Code::SelfRelation => "SELF_RELATION",
            Code::SentenceCoverage => "SENTENCE_COVERAGE",
            Code::UnknownTag => "UNKNOWN_TAG",
            Code::UnknownRelationType => "UNKNOWN_RELATION_TYPE",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub document: String,
    pub code: Code,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.document, self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    pub fn into_result(self) -> Result<Vec<Finding>> {
        if self.errors.is_empty() {
            Ok(self.warnings)
        } else {
            Err(Error::Validation(self.errors))
        }
    }
}

struct Collector<'a> {
    doc: &'a str,
    report: ValidationReport,
}

impl Collector<'_> {
    fn error(&mut self, code: Code, message: String) {
        self.report.errors.push(Finding {
            document: self.doc.to_owned(),
            code,
            message,
        });
    }

    fn warn(&mut self, code: Code, message: String) {
        self.report.warnings.push(Finding {
            document: self.doc.to_owned(),
            code,
            message,
        });
    }
}

/// Checks every structural invariant of a document. Findings are reported
/// in a fixed order: sentences, clusters, mentions, relations.
pub fn validate_document(doc: &Document, vocab: &Vocabulary) -> ValidationReport {
    let mut out = Collector {
        doc: &doc.id,
        report: ValidationReport::default(),
    };
    let n_tokens = doc.tokens.len();

    let mut expected_begin = 0;
    for (k, &(begin, end)) in doc.sentences.iter().enumerate() {
        if begin != expected_begin || end <= begin {
            out.error(
                Code::SentenceCoverage,
                format!("sentence {k} [{begin},{end}) does not continue at token {expected_begin}"),
            );
        }
        expected_begin = end.max(expected_begin);
    }
    if expected_begin != n_tokens && !(doc.sentences.is_empty() && n_tokens == 0) {
        out.error(
            Code::SentenceCoverage,
            format!("sentences cover [0,{expected_begin}) but document has {n_tokens} tokens"),
        );
    }

    let mut ids = BTreeSet::new();
    let mut owner: BTreeMap<Mention, &str> = BTreeMap::new();
    for cluster in &doc.clusters {
        if !ids.insert(cluster.id.as_str()) {
            out.error(
                Code::DuplicateClusterId,
                format!("cluster id {} appears more than once", cluster.id),
            );
        }
        if cluster.mentions.is_empty() {
            out.error(
                Code::EmptyCluster,
                format!("cluster {} has no mentions", cluster.id),
            );
        }
        let mut seen = BTreeSet::new();
        for m in &cluster.mentions {
            if !m.is_well_formed() {
                out.error(
                    Code::SpanOrder,
                    format!("mention {m} of cluster {} has begin >= end", cluster.id),
                );
            } else if m.end > n_tokens {
                out.error(
                    Code::SpanBounds,
                    format!(
                        "mention {m} of cluster {} exceeds {n_tokens} tokens",
                        cluster.id
                    ),
                );
            }
            if !seen.insert(*m) {
                out.error(
                    Code::DuplicateMention,
                    format!("mention {m} listed twice in cluster {}", cluster.id),
                );
                continue;
            }
            if let Some(prev) = owner.insert(*m, &cluster.id) {
                if prev != cluster.id {
                    out.error(
                        Code::MentionMultiCluster,
                        format!("mention {m} belongs to clusters {prev} and {}", cluster.id),
                    );
                }
            }
        }
        for tag in &cluster.tags {
            if !vocab.knows_tag(tag) {
                out.warn(
                    Code::UnknownTag,
                    format!("cluster {} has undeclared tag {tag}", cluster.id),
                );
            }
        }
    }

    for rel in &doc.relations {
        for end in [&rel.head, &rel.tail] {
            if !ids.contains(end.as_str()) {
                out.error(
                    Code::DanglingRelation,
                    format!("relation {rel} references missing cluster {end}"),
                );
            }
        }
        if rel.head == rel.tail {
            out.error(
                Code::SelfRelation,
                format!("relation {rel} has identical head and tail"),
            );
        }
        if !vocab.knows_relation(&rel.kind) {
            out.warn(
                Code::UnknownRelationType,
                format!("relation {rel} has undeclared type {}", rel.kind),
            );
        }
    }

    out.report
}

/// Maps every mention of the document to the id of its cluster.
pub fn span_index(doc: &Document) -> Result<BTreeMap<Mention, String>> {
    let mut index = BTreeMap::new();
    for cluster in &doc.clusters {
        for m in &cluster.mentions {
            if let Some(prev) = index.insert(*m, cluster.id.clone()) {
                if prev != cluster.id {
                    return Err(Error::MentionMultiCluster {
                        begin: m.begin,
                        end: m.end,
                        first: prev,
                        second: cluster.id.clone(),
                    });
                }
            }
        }
    }
    Ok(index)
}
