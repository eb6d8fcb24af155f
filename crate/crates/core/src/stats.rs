//! Descriptive corpus statistics.
//!
//! Relation counts follow two conventions. Per relation type, an entity pair
//! is a distinct `(head, type, tail)` triple. Corpus totals count distinct
//! `(head, tail)` pairs regardless of how many types connect them, so the
//! totals of the per-type and per-label-count histograms coincide. Mention
//! pairs are the products `|mentions(head)| · |mentions(tail)|` summed over
//! the same units.
//!
//! Token distances between mentions count the tokens strictly between the
//! two spans (0 for adjacent spans); sentence distances are differences of
//! the sentence index of each mention's first token.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{Document, EntityCluster, Link, Mention};
use crate::error::{Error, Result};

const HIERARCHY: &str = include_str!("../resources/entity_hierarchy.txt");

/// Entity-type tree; each node knows its parent and depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHierarchy {
    /// Nodes in file order as `(tag, depth)`.
    nodes: Vec<(String, usize)>,
    parent: BTreeMap<String, String>,
}

impl TypeHierarchy {
    pub fn builtin() -> Self {
        Self::parse(HIERARCHY).expect("bundled hierarchy parses")
    }

    /// One tag per line, nesting by two spaces of indentation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut parent = BTreeMap::new();
        let mut stack: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let tag = raw.trim();
            if tag.is_empty() || tag.starts_with('#') {
                continue;
            }
            let indent = raw.len() - raw.trim_start().len();
            if indent % 2 != 0 || indent / 2 > stack.len() {
                return Err(Error::InvalidArgument(format!(
                    "hierarchy line {}: bad indentation",
                    i + 1
                )));
            }
            let depth = indent / 2;
            stack.truncate(depth);
            if let Some(p) = stack.last() {
                parent.insert(tag.to_owned(), p.clone());
            }
            stack.push(tag.to_owned());
            nodes.push((tag.to_owned(), depth));
        }
        Ok(TypeHierarchy { nodes, parent })
    }

    pub fn parent(&self, tag: &str) -> Option<&str> {
        self.parent.get(tag).map(String::as_str)
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.nodes.iter().any(|(t, _)| t == tag)
    }

    /// `tag` followed by all its ancestors, innermost first.
    pub fn ancestors<'a>(&'a self, tag: &'a str) -> Vec<&'a str> {
        let mut out = vec![tag];
        let mut cur = tag;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CountRow {
    pub clusters: usize,
    pub mentions: usize,
    pub pct_clusters: f64,
    pub pct_mentions: f64,
}

fn pct(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRow {
    pub tag: String,
    pub depth: usize,
    #[serde(flatten)]
    pub counts: CountRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeHistogram {
    /// Hierarchy nodes in tree order, then other bare tags alphabetically.
    pub rows: Vec<TypeRow>,
    pub total: CountRow,
}

impl TypeHistogram {
    pub fn row(&self, tag: &str) -> Option<&CountRow> {
        self.rows.iter().find(|r| r.tag == tag).map(|r| &r.counts)
    }
}

fn is_type_tag(tag: &str) -> bool {
    !tag.contains("::")
}

/// Cluster and mention counts per type tag. A cluster counts towards a node
/// when it carries the node's tag or the tag of any descendant.
pub fn entity_type_histogram(corpus: &[Document], hierarchy: &TypeHierarchy) -> TypeHistogram {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut total = (0, 0);
    for c in corpus.iter().flat_map(|d| &d.clusters) {
        total.0 += 1;
        total.1 += c.mentions.len();
        let mut nodes = BTreeSet::new();
        for t in c.tags.iter().filter(|t| is_type_tag(t)) {
            nodes.extend(hierarchy.ancestors(t));
        }
        for n in nodes {
            let e = counts.entry(n.to_owned()).or_default();
            e.0 += 1;
            e.1 += c.mentions.len();
        }
    }
    let row = |(cl, me): (usize, usize)| CountRow {
        clusters: cl,
        mentions: me,
        pct_clusters: pct(cl, total.0),
        pct_mentions: pct(me, total.1),
    };
    let mut rows: Vec<TypeRow> = hierarchy
        .nodes
        .iter()
        .map(|(tag, depth)| TypeRow {
            tag: tag.clone(),
            depth: *depth,
            counts: row(counts.get(tag).copied().unwrap_or_default()),
        })
        .collect();
    for (tag, c) in &counts {
        if !hierarchy.contains(tag) {
            rows.push(TypeRow {
                tag: tag.clone(),
                depth: 0,
                counts: row(*c),
            });
        }
    }
    TypeHistogram {
        rows,
        total: row(total),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRow {
    pub category: String,
    #[serde(flatten)]
    pub counts: CountRow,
    /// Distinct labels of the category.
    pub classes: usize,
    /// Mean number of the category's labels over clusters that have any.
    pub labels_per_entity: f64,
}

/// Per tag category (`type` for bare tags, otherwise the `category::`
/// prefix): clusters carrying any label of the category.
pub fn tag_category_histogram(corpus: &[Document]) -> Vec<CategoryRow> {
    let category = |t: &str| t.split_once("::").map_or("type", |(c, _)| c).to_owned();
    let clusters: Vec<&EntityCluster> = corpus.iter().flat_map(|d| &d.clusters).collect();
    let total_m: usize = clusters.iter().map(|c| c.mentions.len()).sum();
    let mut acc: BTreeMap<String, (usize, usize, usize, BTreeSet<&str>)> = BTreeMap::new();
    for c in &clusters {
        let mut per: BTreeMap<String, usize> = BTreeMap::new();
        for t in &c.tags {
            *per.entry(category(t)).or_default() += 1;
            acc.entry(category(t)).or_default().3.insert(t);
        }
        for (cat, n) in per {
            let e = acc.entry(cat).or_default();
            e.0 += 1;
            e.1 += c.mentions.len();
            e.2 += n;
        }
    }
    acc.into_iter()
        .map(|(category, (cl, me, labels, classes))| CategoryRow {
            category,
            counts: CountRow {
                clusters: cl,
                mentions: me,
                pct_clusters: pct(cl, clusters.len()),
                pct_mentions: pct(me, total_m),
            },
            classes: classes.len(),
            labels_per_entity: if cl == 0 { 0.0 } else { labels as f64 / cl as f64 },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PairCounts {
    pub entity_pairs: usize,
    pub mention_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationHistogram {
    pub per_type: BTreeMap<String, PairCounts>,
    /// Distinct related `(head, tail)` pairs.
    pub total: PairCounts,
}

fn mention_counts(doc: &Document) -> BTreeMap<&str, usize> {
    doc.clusters
        .iter()
        .map(|c| (c.id.as_str(), c.mentions.len()))
        .collect()
}

/// Label sets per related `(head, tail)` pair with the pair's mention count.
fn related_pairs(doc: &Document) -> BTreeMap<(&str, &str), (BTreeSet<&str>, usize)> {
    let sizes = mention_counts(doc);
    let mut out: BTreeMap<(&str, &str), (BTreeSet<&str>, usize)> = BTreeMap::new();
    for r in &doc.relations {
        let n = sizes.get(r.head.as_str()).copied().unwrap_or(0)
            * sizes.get(r.tail.as_str()).copied().unwrap_or(0);
        let e = out.entry((r.head.as_str(), r.tail.as_str())).or_default();
        e.0.insert(r.kind.as_str());
        e.1 = n;
    }
    out
}

pub fn relation_type_histogram(corpus: &[Document]) -> RelationHistogram {
    let mut per_type: BTreeMap<String, PairCounts> = BTreeMap::new();
    let mut total = PairCounts::default();
    for d in corpus {
        for (_, (labels, n)) in related_pairs(d) {
            total.entity_pairs += 1;
            total.mention_pairs += n;
            for l in labels {
                let e = per_type.entry(l.to_owned()).or_default();
                e.entity_pairs += 1;
                e.mention_pairs += n;
            }
        }
    }
    RelationHistogram { per_type, total }
}

/// Related pairs grouped by label count; the last bucket collects four or more.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MultiLabelHistogram {
    pub buckets: [PairCounts; 4],
    pub total: PairCounts,
}

pub fn multilabel_relation_histogram(corpus: &[Document]) -> MultiLabelHistogram {
    let mut out = MultiLabelHistogram::default();
    for d in corpus {
        for (_, (labels, n)) in related_pairs(d) {
            let b = &mut out.buckets[labels.len().clamp(1, 4) - 1];
            b.entity_pairs += 1;
            b.mention_pairs += n;
            out.total.entity_pairs += 1;
            out.total.mention_pairs += n;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub tokens: usize,
    pub mentions: usize,
    pub clusters: usize,
    /// Distinct tags of all categories.
    pub entity_types: usize,
    /// Distinct `(head, type, tail)` triples.
    pub relation_triples: usize,
    /// Distinct related `(head, tail)` pairs.
    pub related_entity_pairs: usize,
    /// Mention pairs over distinct related entity pairs.
    pub related_mention_pairs: usize,
    pub relation_types: usize,
    /// Mentions of clusters with a knowledge-base link.
    pub linked_mentions: usize,
    pub linked_clusters: usize,
    pub singleton_fraction: f64,
    pub mean_labels_per_entity: f64,
}

pub fn corpus_summary(corpus: &[Document]) -> CorpusSummary {
    let mut s = CorpusSummary {
        documents: corpus.len(),
        ..Default::default()
    };
    let mut tags = BTreeSet::new();
    let mut types = BTreeSet::new();
    let mut singletons = 0;
    let mut labels = 0;
    for d in corpus {
        s.tokens += d.tokens.len();
        for c in &d.clusters {
            s.clusters += 1;
            s.mentions += c.mentions.len();
            labels += c.tags.len();
            tags.extend(c.tags.iter().map(String::as_str));
            if c.mentions.len() == 1 {
                singletons += 1;
            }
            if matches!(c.link, Link::Kb(_)) {
                s.linked_clusters += 1;
                s.linked_mentions += c.mentions.len();
            }
        }
        let triples: BTreeSet<_> = d.relations.iter().collect();
        s.relation_triples += triples.len();
        types.extend(d.relations.iter().map(|r| r.kind.as_str()));
        for (_, (_, n)) in related_pairs(d) {
            s.related_entity_pairs += 1;
            s.related_mention_pairs += n;
        }
    }
    s.entity_types = tags.len();
    s.relation_types = types.len();
    if s.clusters > 0 {
        s.singleton_fraction = singletons as f64 / s.clusters as f64;
        s.mean_labels_per_entity = labels as f64 / s.clusters as f64;
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationDistance {
    pub document: String,
    pub head: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub tail: String,
    pub min_token_gap: usize,
    pub max_token_gap: usize,
    pub min_sentence_dist: usize,
    pub max_sentence_dist: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub instances: Vec<RelationDistance>,
    /// Fraction of instances at or below each threshold `0..len`.
    pub cdf_min_tokens: Vec<f64>,
    pub cdf_max_tokens: Vec<f64>,
    pub cdf_min_sentences: Vec<f64>,
    pub cdf_max_sentences: Vec<f64>,
}

fn cdf(values: impl Iterator<Item = usize>, len: usize, n: usize) -> Vec<f64> {
    let mut hist = vec![0usize; len];
    for v in values {
        hist[v] += 1;
    }
    let mut acc = 0;
    hist.into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / n as f64
        })
        .collect()
}

fn sentence(doc: &Document, m: &Mention) -> Result<usize> {
    doc.sentence_of(m.begin).ok_or_else(|| {
        Error::InvalidArgument(format!("{}: mention {m} lies outside every sentence", doc.id))
    })
}

pub fn relation_distances(doc: &Document) -> Result<Vec<RelationDistance>> {
    let mut out = Vec::new();
    for r in &doc.relations {
        let (Some(h), Some(t)) = (doc.cluster(&r.head), doc.cluster(&r.tail)) else {
            return Err(Error::InvalidArgument(format!(
                "{}: relation {r} has a dangling endpoint",
                doc.id
            )));
        };
        let mut tok = (usize::MAX, 0);
        let mut sent = (usize::MAX, 0);
        for a in &h.mentions {
            let sa = sentence(doc, a)?;
            for b in &t.mentions {
                if a == b {
                    return Err(Error::InvalidArgument(format!(
                        "{}: relation {r} joins clusters sharing span {a}",
                        doc.id
                    )));
                }
                let g = a.token_gap(b);
                let s = sa.abs_diff(sentence(doc, b)?);
                tok = (tok.0.min(g), tok.1.max(g));
                sent = (sent.0.min(s), sent.1.max(s));
            }
        }
        if h.mentions.is_empty() || t.mentions.is_empty() {
            continue;
        }
        out.push(RelationDistance {
            document: doc.id.clone(),
            head: r.head.clone(),
            kind: r.kind.clone(),
            tail: r.tail.clone(),
            min_token_gap: tok.0,
            max_token_gap: tok.1,
            min_sentence_dist: sent.0,
            max_sentence_dist: sent.1,
        });
    }
    Ok(out)
}

pub fn relation_distance_profile(corpus: &[Document]) -> Result<DistanceProfile> {
    let mut instances = Vec::new();
    for d in corpus {
        instances.extend(relation_distances(d)?);
    }
    let n = instances.len();
    let len = instances
        .iter()
        .map(|i| i.max_token_gap.max(i.max_sentence_dist) + 1)
        .max()
        .unwrap_or(0);
    Ok(DistanceProfile {
        cdf_min_tokens: cdf(instances.iter().map(|i| i.min_token_gap), len, n),
        cdf_max_tokens: cdf(instances.iter().map(|i| i.max_token_gap), len, n),
        cdf_min_sentences: cdf(instances.iter().map(|i| i.min_sentence_dist), len, n),
        cdf_max_sentences: cdf(instances.iter().map(|i| i.max_sentence_dist), len, n),
        instances,
    })
}

impl DistanceProfile {
    /// Tab-separated CDF table with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("threshold\tcdf_min_tokens\tcdf_max_tokens\tcdf_min_sent\tcdf_max_sent\n");
        for d in 0..self.cdf_min_tokens.len() {
            let _ = writeln!(
                out,
                "{d}\t{}\t{}\t{}\t{}",
                self.cdf_min_tokens[d],
                self.cdf_max_tokens[d],
                self.cdf_min_sentences[d],
                self.cdf_max_sentences[d]
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorLinkResult {
    pub accuracy: f64,
    pub correct: usize,
    /// Test mentions of linked clusters.
    pub evaluated: usize,
    /// Evaluated mentions whose surface never occurred in training.
    pub unseen: usize,
}

/// Links each test mention to the link its surface form most often had in
/// training, or NIL for unseen forms. Ties go to the smallest link id.
/// Only knowledge-base links are counted on either side.
pub fn prior_link_baseline(train: &[Document], test: &[Document]) -> Result<PriorLinkResult> {
    let mut freq: BTreeMap<String, BTreeMap<&str, usize>> = BTreeMap::new();
    for d in train {
        for c in &d.clusters {
            let Link::Kb(id) = &c.link else { continue };
            for m in &c.mentions {
                if let Some(s) = d.surface(m) {
                    *freq.entry(s).or_default().entry(id.as_str()).or_default() += 1;
                }
            }
        }
    }
    let prior: BTreeMap<String, &str> = freq
        .into_iter()
        .map(|(s, links)| {
            // BTreeMap iterates ids ascending; keep the first maximum
            let mut best = ("", 0);
            for (id, n) in links {
                if n > best.1 {
                    best = (id, n);
                }
            }
            (s, best.0)
        })
        .collect();
    let (mut correct, mut evaluated, mut unseen) = (0, 0, 0);
    for d in test {
        for c in &d.clusters {
            let Link::Kb(gold) = &c.link else { continue };
            for m in &c.mentions {
                evaluated += 1;
                match d.surface(m).and_then(|s| prior.get(&s).copied()) {
                    Some(p) if p == gold => correct += 1,
                    Some(_) => {}
                    None => unseen += 1,
                }
            }
        }
    }
    if evaluated == 0 {
        return Err(Error::InvalidArgument("no linked test mentions".into()));
    }
    Ok(PriorLinkResult {
        accuracy: correct as f64 / evaluated as f64,
        correct,
        evaluated,
        unseen,
    })
}
