//! Entity-centric decoding of mention-level predictions.
//!
//! Predicted mention tags are attached to the cluster of their span (a span
//! outside every predicted cluster becomes a fresh singleton), and predicted
//! span-pair relations are lifted to the ordered pair of clusters holding
//! their endpoints. Relations touching a span that belongs to no cluster are
//! discarded and counted in [`DecodeOutput::discarded_relations`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, EntityCluster, Mention, RelationTriple};
use crate::error::{Error, Result};

/// Mention-level predictions for one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Predicted clusters: cluster id to member spans.
    #[serde(default)]
    pub p_cl: BTreeMap<String, Vec<Mention>>,
    /// Predicted (span, tag) pairs.
    #[serde(default)]
    pub p_men: Vec<(Mention, String)>,
    /// Predicted (head span, relation type, tail span) triples.
    #[serde(default)]
    pub p_rel: Vec<(Mention, String, Mention)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RelationEntry {
    head: String,
    tail: String,
    types: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "OutputRepr", from = "OutputRepr")]
pub struct DecodeOutput {
    pub id: Option<String>,
    pub clusters: BTreeMap<String, Vec<Mention>>,
    pub d_ent: BTreeMap<String, BTreeSet<String>>,
    pub d_rel: BTreeMap<(String, String), BTreeSet<String>>,
    /// Relations dropped because an endpoint span is in no cluster.
    pub discarded_relations: usize,
}

#[derive(Serialize, Deserialize)]
struct OutputRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    clusters: BTreeMap<String, Vec<Mention>>,
    d_ent: BTreeMap<String, BTreeSet<String>>,
    d_rel: Vec<RelationEntry>,
    #[serde(default)]
    discarded_relations: usize,
}

impl From<DecodeOutput> for OutputRepr {
    fn from(o: DecodeOutput) -> Self {
        OutputRepr {
            id: o.id,
            clusters: o.clusters,
            d_ent: o.d_ent,
            d_rel: o
                .d_rel
                .into_iter()
                .map(|((head, tail), types)| RelationEntry { head, tail, types })
                .collect(),
            discarded_relations: o.discarded_relations,
        }
    }
}

impl From<OutputRepr> for DecodeOutput {
    fn from(r: OutputRepr) -> Self {
        DecodeOutput {
            id: r.id,
            clusters: r.clusters,
            d_ent: r.d_ent,
            d_rel: r
                .d_rel
                .into_iter()
                .map(|e| ((e.head, e.tail), e.types))
                .collect(),
            discarded_relations: r.discarded_relations,
        }
    }
}

fn check_span(m: &Mention) -> Result<()> {
    if m.is_well_formed() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("malformed span {m}")))
    }
}

pub fn decode_entity_centric(input: &DecodeInput) -> Result<DecodeOutput> {
    let mut clusters = input.p_cl.clone();
    let mut span_to_cluster: BTreeMap<Mention, String> = BTreeMap::new();
    for (id, spans) in &input.p_cl {
        if spans.is_empty() {
            return Err(Error::InvalidArgument(format!("predicted cluster {id} is empty")));
        }
        for m in spans {
            check_span(m)?;
            if let Some(prev) = span_to_cluster.insert(*m, id.clone()) {
                if prev != *id {
                    return Err(Error::MentionMultiCluster {
                        begin: m.begin,
                        end: m.end,
                        first: prev,
                        second: id.clone(),
                    });
                }
            }
        }
    }

    let mut next_fresh = 0usize;
    let mut d_ent: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (span, tag) in &input.p_men {
        check_span(span)?;
        let cluster = match span_to_cluster.get(span) {
            Some(id) => id.clone(),
            None => {
                let id = loop {
                    let candidate = format!("gen-{next_fresh}");
                    next_fresh += 1;
                    if !clusters.contains_key(&candidate) {
                        break candidate;
                    }
                };
                span_to_cluster.insert(*span, id.clone());
                clusters.insert(id.clone(), vec![*span]);
                id
            }
        };
        d_ent.entry(cluster).or_default().insert(tag.clone());
    }

    let mut d_rel: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    let mut discarded = 0;
    for (head, kind, tail) in &input.p_rel {
        check_span(head)?;
        check_span(tail)?;
        match (span_to_cluster.get(head), span_to_cluster.get(tail)) {
            (Some(h), Some(t)) => {
                d_rel
                    .entry((h.clone(), t.clone()))
                    .or_default()
                    .insert(kind.clone());
            }
            _ => discarded += 1,
        }
    }

    Ok(DecodeOutput {
        id: input.id.clone(),
        clusters,
        d_ent,
        d_rel,
        discarded_relations: discarded,
    })
}

impl DecodeOutput {
    /// Re-expresses the decoded entities as mention-level predictions.
    pub fn to_input(&self) -> DecodeInput {
        let mut p_men = Vec::new();
        for (id, tags) in &self.d_ent {
            for m in &self.clusters[id] {
                for tag in tags {
                    p_men.push((*m, tag.clone()));
                }
            }
        }
        let mut p_rel = Vec::new();
        for ((h, t), types) in &self.d_rel {
            for hm in &self.clusters[h] {
                for tm in &self.clusters[t] {
                    for kind in types {
                        p_rel.push((*hm, kind.clone(), *tm));
                    }
                }
            }
        }
        DecodeInput {
            id: self.id.clone(),
            p_cl: self.clusters.clone(),
            p_men,
            p_rel,
        }
    }

    /// Builds a corpus document carrying the decoded entities, copying id,
    /// split, tokens and sentences from `template`.
    pub fn to_document(&self, template: &Document) -> Document {
        let clusters = self
            .clusters
            .iter()
            .map(|(id, mentions)| {
                let mut mentions = mentions.clone();
                mentions.sort();
                EntityCluster::new(id.clone(), mentions).with_tags(
                    self.d_ent.get(id).into_iter().flatten().cloned(),
                )
            })
            .collect();
        let relations = self
            .d_rel
            .iter()
            .filter(|((h, t), _)| h != t)
            .flat_map(|((h, t), types)| {
                types
                    .iter()
                    .map(move |k| RelationTriple::new(h.clone(), k.clone(), t.clone()))
            })
            .collect();
        Document {
            id: self.id.clone().unwrap_or_else(|| template.id.clone()),
            split: template.split,
            tokens: template.tokens.clone(),
            sentences: template.sentences.clone(),
            clusters,
            relations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(b: usize, e: usize) -> Mention {
        Mention::new(b, e)
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tags_are_unioned_per_cluster() {
        let input = DecodeInput {
            p_cl: [("c1".to_string(), vec![m(0, 1), m(3, 4)])].into(),
            p_men: vec![(m(0, 1), "person".into()), (m(3, 4), "politician".into())],
            ..Default::default()
        };
        let out = decode_entity_centric(&input).unwrap();
        assert_eq!(out.d_ent, [("c1".to_string(), set(&["person", "politician"]))].into());
        assert!(out.d_rel.is_empty());
    }

    #[test]
    fn unclustered_tagged_span_becomes_singleton() {
        let input = DecodeInput {
            p_men: vec![(m(2, 3), "gpe0".into())],
            ..Default::default()
        };
        let out = decode_entity_centric(&input).unwrap();
        assert_eq!(out.clusters, [("gen-0".to_string(), vec![m(2, 3)])].into());
        assert_eq!(out.d_ent, [("gen-0".to_string(), set(&["gpe0"]))].into());
    }

    #[test]
    fn relation_with_unmapped_endpoint_is_discarded() {
        let input = DecodeInput {
            p_cl: [("c1".to_string(), vec![m(0, 1)])].into(),
            p_rel: vec![(m(0, 1), "in0".into(), m(9, 10))],
            ..Default::default()
        };
        let out = decode_entity_centric(&input).unwrap();
        assert!(out.d_rel.is_empty());
        assert_eq!(out.discarded_relations, 1);
    }

    #[test]
    fn relations_lift_to_cluster_pairs() {
        let input = DecodeInput {
            p_cl: [
                ("a".to_string(), vec![m(0, 1), m(5, 6)]),
                ("b".to_string(), vec![m(2, 3)]),
            ]
            .into(),
            p_men: vec![(m(7, 8), "gpe0".into())],
            p_rel: vec![
                (m(0, 1), "in0".into(), m(2, 3)),
                (m(5, 6), "in0".into(), m(2, 3)),
                (m(5, 6), "based_in0".into(), m(2, 3)),
                (m(2, 3), "gpe0".into(), m(7, 8)),
            ],
            ..Default::default()
        };
        let out = decode_entity_centric(&input).unwrap();
        assert_eq!(out.d_rel.len(), 2);
        assert_eq!(
            out.d_rel[&("a".to_string(), "b".to_string())],
            set(&["based_in0", "in0"])
        );
        // the relation reaches the singleton created for the tagged span
        assert_eq!(out.d_rel[&("b".to_string(), "gen-0".to_string())], set(&["gpe0"]));
    }

    #[test]
    fn fresh_ids_skip_existing_ones() {
        let input = DecodeInput {
            p_cl: [("gen-0".to_string(), vec![m(0, 1)])].into(),
            p_men: vec![(m(3, 4), "x".into()), (m(3, 4), "x".into()), (m(5, 6), "y".into())],
            ..Default::default()
        };
        let out = decode_entity_centric(&input).unwrap();
        let ids: Vec<_> = out.clusters.keys().cloned().collect();
        assert_eq!(ids, ["gen-0", "gen-1", "gen-2"]);
        assert_eq!(out.d_ent["gen-1"], set(&["x"]));
    }

    #[test]
    fn shared_span_aborts() {
        let input = DecodeInput {
            p_cl: [
                ("a".to_string(), vec![m(0, 1)]),
                ("b".to_string(), vec![m(0, 1)]),
            ]
            .into(),
            ..Default::default()
        };
        assert!(matches!(
            decode_entity_centric(&input),
            Err(Error::MentionMultiCluster { .. })
        ));
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"p_cl": {"c1": [[0,1],[3,4]]}, "p_men": [[[0,1],"person"]], "p_rel": [[[0,1],"in0",[3,4]]]}"#;
        let input: DecodeInput = serde_json::from_str(text).unwrap();
        assert_eq!(input.p_rel[0].2, m(3, 4));
        let out = decode_entity_centric(&input).unwrap();
        let json = serde_json::to_value(&out).unwrap();
        assert_eq!(json["d_rel"][0]["head"], "c1");
        assert_eq!(json["d_rel"][0]["types"][0], "in0");
        let back: DecodeOutput = serde_json::from_value(json).unwrap();
        assert_eq!(back, out);
    }
}
