//! Best-effort conversion from the published DWIE annotation release
//! (`data/annos_with_content/*.json`) to the canonical corpus schema.
//!
//! Field mapping:
//!
//! | release field                 | canonical field                          |
//! |-------------------------------|------------------------------------------|
//! | `id`                          | `id`                                     |
//! | `tags` containing train/test  | `split`                                  |
//! | `content`                     | `tokens`, `sentences` (simple tokenizer) |
//! | `concepts[*]` with mentions   | `clusters` (`id` = concept number)       |
//! | `concepts[*].tags`            | `tags`, `type::` prefix stripped         |
//! | `concepts[*].link`            | `link` (`null` kept as NIL)              |
//! | `mentions[*]` char offsets    | token spans of the owning cluster        |
//! | `relations[*]` `{s,p,o}`      | `relations` `{head,type,tail}`           |
//!
//! Concepts without any mention are dropped together with their relations.
//! Token counts depend on the tokenizer below and will not match other
//! tokenizations exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Document, EntityCluster, Link, Mention, RelationTriple, Split};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct RawDoc {
    id: String,
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    mentions: Vec<RawMention>,
    #[serde(default)]
    concepts: Vec<RawConcept>,
    #[serde(default)]
    relations: Vec<RawRelation>,
}

#[derive(Debug, Deserialize)]
struct RawMention {
    begin: usize,
    end: usize,
    concept: serde_json::Value,
}

#[derive(Debug, Deserialize)]
struct RawConcept {
    concept: serde_json::Value,
    #[serde(default)]
    tags: Option<Vec<String>>,
    #[serde(default)]
    link: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawRelation {
    s: serde_json::Value,
    p: String,
    o: serde_json::Value,
}

/// Counts of what the converter had to drop or repair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConversionSummary {
    pub documents: usize,
    pub documents_without_content: usize,
    pub dropped_concepts: usize,
    pub dropped_relations: usize,
    pub dropped_mentions: usize,
    /// Entity pairs (head, tail) with at least one relation, after conversion.
    pub related_entity_pairs: usize,
    /// Sum over related pairs of |mentions(head)| x |mentions(tail)|.
    pub related_mention_pairs: usize,
}

fn concept_key(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Splits text into word runs and single punctuation characters, returning
/// char offsets `[begin, end)` per token.
pub fn tokenize(text: &str) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut word: Option<(usize, String)> = None;
    for (i, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() || ch == '_' {
            word.get_or_insert_with(|| (i, String::new())).1.push(ch);
            continue;
        }
        if let Some((b, w)) = word.take() {
            out.push((b, i, w));
        }
        if !ch.is_whitespace() {
            out.push((i, i + 1, ch.to_string()));
        }
    }
    if let Some((b, w)) = word.take() {
        let n = text.chars().count();
        out.push((b, n, w));
    }
    out
}

/// Sentence boundaries over `tokens`: a sentence ends after `.`, `!` or `?`,
/// or before a token that starts a new line.
fn sentences(text: &str, tokens: &[(usize, usize, String)]) -> Vec<(usize, usize)> {
    let newline_at: BTreeSet<usize> = text
        .chars()
        .enumerate()
        .filter(|(_, c)| *c == '\n')
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::new();
    let mut start = 0;
    for (k, (b, _, tok)) in tokens.iter().enumerate() {
        if k > start {
            let prev_end = tokens[k - 1].1;
            if newline_at.range(prev_end..*b).next().is_some() {
                out.push((start, k));
                start = k;
            }
        }
        if matches!(tok.as_str(), "." | "!" | "?") {
            out.push((start, k + 1));
            start = k + 1;
        }
    }
    if start < tokens.len() {
        out.push((start, tokens.len()));
    }
    out
}

fn char_span_to_tokens(tokens: &[(usize, usize, String)], begin: usize, end: usize) -> Option<Mention> {
    let first = tokens.iter().position(|t| t.1 > begin)?;
    let last = tokens.iter().rposition(|t| t.0 < end)?;
    (first <= last).then(|| Mention::new(first, last + 1))
}

fn convert_one(raw: RawDoc, summary: &mut ConversionSummary) -> Document {
    summary.documents += 1;
    let split = if raw.tags.iter().any(|t| t == "train") {
        Split::Train
    } else if raw.tags.iter().any(|t| t == "test") {
        Split::Test
    } else {
        Split::Unsplit
    };
    let content = raw.content.unwrap_or_default();
    if content.is_empty() {
        summary.documents_without_content += 1;
    }
    let toks = tokenize(&content);

    let mut spans: BTreeMap<String, Vec<Mention>> = BTreeMap::new();
    let mut owner: BTreeMap<Mention, String> = BTreeMap::new();
    for m in &raw.mentions {
        let key = concept_key(&m.concept);
        let Some(span) = char_span_to_tokens(&toks, m.begin, m.end) else {
            summary.dropped_mentions += 1;
            continue;
        };
        match owner.get(&span) {
            Some(prev) if *prev == key => continue,
            Some(_) => {
                summary.dropped_mentions += 1;
                continue;
            }
            None => {
                owner.insert(span, key.clone());
                spans.entry(key).or_default().push(span);
            }
        }
    }

    let mut clusters = Vec::new();
    for c in raw.concepts {
        let key = concept_key(&c.concept);
        let Some(mut mentions) = spans.remove(&key) else {
            summary.dropped_concepts += 1;
            continue;
        };
        mentions.sort();
        let tags = c
            .tags
            .unwrap_or_default()
            .into_iter()
            .map(|t| t.strip_prefix("type::").map(str::to_owned).unwrap_or(t))
            .collect();
        let link = match c.link {
            Some(id) => Link::Kb(id),
            None => Link::Nil,
        };
        clusters.push(EntityCluster {
            id: key,
            mentions,
            tags,
            link,
        });
    }
    // Mentions whose concept is missing from the concept list.
    for (key, mentions) in spans {
        clusters.push(EntityCluster::new(key, mentions));
    }

    let present: BTreeMap<&str, usize> = clusters
        .iter()
        .map(|c| (c.id.as_str(), c.mentions.len()))
        .collect();
    let mut relations = BTreeSet::new();
    for r in raw.relations {
        let (s, o) = (concept_key(&r.s), concept_key(&r.o));
        if s == o || !present.contains_key(s.as_str()) || !present.contains_key(o.as_str()) {
            summary.dropped_relations += 1;
            continue;
        }
        relations.insert(RelationTriple::new(s, r.p, o));
    }
    let pairs: BTreeSet<(&str, &str)> = relations
        .iter()
        .map(|r| (r.head.as_str(), r.tail.as_str()))
        .collect();
    summary.related_entity_pairs += pairs.len();
    summary.related_mention_pairs += pairs
        .iter()
        .map(|(h, t)| present[h] * present[t])
        .sum::<usize>();

    Document {
        id: raw.id,
        split,
        sentences: sentences(&content, &toks),
        tokens: toks.into_iter().map(|t| t.2).collect(),
        clusters,
        relations: relations.into_iter().collect(),
    }
}

/// Converts release JSON text for one document.
pub fn convert_str(text: &str, summary: &mut ConversionSummary) -> Result<Document> {
    let raw: RawDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        offset: 0,
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(convert_one(raw, summary))
}

/// Converts every `*.json` file of a release directory, in file-name order.
pub fn convert_dir(dir: &Path) -> Result<(Vec<Document>, ConversionSummary)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut summary = ConversionSummary::default();
    let mut docs = Vec::with_capacity(files.len());
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
        docs.push(convert_str(&text, &mut summary)?);
    }
    Ok((docs, summary))
}
