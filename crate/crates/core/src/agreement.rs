//! Cohen's kappa between two annotators.
//!
//! Corpus-level items are aligned by document id and span: mentions by their
//! span, relations by (head span, tail span) over the cross product of the
//! related clusters' mentions, coreference by unordered mention pairs. An
//! item only one annotator produced carries the label [`ABSENT`] on the
//! other side.
//!
//! Multi-label tasks (entity tags, relation types) are scored per label as
//! binary decisions and averaged with weights equal to the number of times
//! each label was assigned by either annotator. This weighting is a local
//! convention rather than a canonical definition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::{Document, Link, Mention};
use crate::error::{Error, Result};

pub const ABSENT: &str = "<absent>";

/// Labels two annotators gave to the same `N > 0` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationPair<L> {
    items: Vec<(L, L)>,
}

impl<L: Ord + Clone> AnnotationPair<L> {
    pub fn new(items: Vec<(L, L)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidArgument("annotation pair has no items".into()));
        }
        Ok(AnnotationPair { items })
    }

    pub fn from_sides(a: Vec<L>, b: Vec<L>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Shape(format!(
                "annotators labelled {} and {} items",
                a.len(),
                b.len()
            )));
        }
        Self::new(a.into_iter().zip(b).collect())
    }

    pub fn items(&self) -> &[(L, L)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Per-label usage counts `(n_1l, n_2l)`.
    pub fn label_counts(&self) -> BTreeMap<L, (usize, usize)> {
        let mut out: BTreeMap<L, (usize, usize)> = BTreeMap::new();
        for (a, b) in &self.items {
            out.entry(a.clone()).or_default().0 += 1;
            out.entry(b.clone()).or_default().1 += 1;
        }
        out
    }
}

pub fn observed_agreement<L: Ord + Clone>(p: &AnnotationPair<L>) -> f64 {
    let same = p.items.iter().filter(|(a, b)| a == b).count();
    same as f64 / p.len() as f64
}

pub fn expected_agreement<L: Ord + Clone>(p: &AnnotationPair<L>) -> f64 {
    let n = p.len() as f64;
    p.label_counts()
        .values()
        .map(|&(a, b)| (a as f64 / n) * (b as f64 / n))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa {
    pub n: usize,
    pub p_o: f64,
    pub p_e: f64,
    pub kappa: f64,
}

/// `κ = (p_o − p_e) / (1 − p_e)`. When chance agreement is certain the
/// ratio is undefined; perfect observed agreement is then reported as 1.
pub fn cohen_kappa<L: Ord + Clone>(p: &AnnotationPair<L>) -> Result<Kappa> {
    let p_o = observed_agreement(p);
    let p_e = expected_agreement(p);
    kappa_from(p.len(), p_o, p_e)
}

fn kappa_from(n: usize, p_o: f64, p_e: f64) -> Result<Kappa> {
    let kappa = if p_e >= 1.0 {
        if p_o >= 1.0 {
            1.0
        } else {
            return Err(Error::Undefined("kappa with expected agreement 1".into()));
        }
    } else {
        (p_o - p_e) / (1.0 - p_e)
    };
    Ok(Kappa { n, p_o, p_e, kappa })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelKappa {
    /// Times either annotator assigned the label.
    pub support: usize,
    #[serde(flatten)]
    pub kappa: Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiLabelKappa {
    /// Support-weighted means of the per-label values.
    #[serde(flatten)]
    pub summary: Kappa,
    pub per_label: BTreeMap<String, LabelKappa>,
}

/// Support-weighted mean of `(value, support)` pairs.
pub fn weighted_mean(values: &[(f64, usize)]) -> Result<f64> {
    let total: usize = values.iter().map(|v| v.1).sum();
    if total == 0 {
        return Err(Error::InvalidArgument("no label support".into()));
    }
    Ok(values.iter().map(|&(k, w)| k * w as f64).sum::<f64>() / total as f64)
}

/// Weighted mean of per-label binary kappas.
pub fn multilabel_kappa(per_label: &BTreeMap<String, AnnotationPair<bool>>) -> Result<MultiLabelKappa> {
    let mut out = BTreeMap::new();
    for (label, pair) in per_label {
        let support = pair
            .items()
            .iter()
            .map(|&(a, b)| usize::from(a) + usize::from(b))
            .sum();
        out.insert(
            label.clone(),
            LabelKappa {
                support,
                kappa: cohen_kappa(pair)?,
            },
        );
    }
    let pick = |f: fn(&Kappa) -> f64| -> Result<f64> {
        let v: Vec<_> = out.values().map(|l| (f(&l.kappa), l.support)).collect();
        weighted_mean(&v)
    };
    let summary = Kappa {
        n: per_label.values().map(|p| p.len()).max().unwrap_or(0),
        p_o: pick(|k| k.p_o)?,
        p_e: pick(|k| k.p_e)?,
        kappa: pick(|k| k.kappa)?,
    };
    Ok(MultiLabelKappa {
        summary,
        per_label: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AgreementTask {
    Entity,
    Coref,
    Linking,
    Relation,
}

impl FromStr for AgreementTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entity" => Ok(AgreementTask::Entity),
            "coref" => Ok(AgreementTask::Coref),
            "linking" => Ok(AgreementTask::Linking),
            "relation" => Ok(AgreementTask::Relation),
            other => Err(Error::InvalidArgument(format!("unknown agreement task {other}"))),
        }
    }
}

impl fmt::Display for AgreementTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgreementTask::Entity => "entity",
            AgreementTask::Coref => "coref",
            AgreementTask::Linking => "linking",
            AgreementTask::Relation => "relation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Item {
    Span(String, Mention),
    Pair(String, Mention, Mention),
}

/// Each annotator's label set per item; `None` means not annotated.
type Aligned = BTreeMap<Item, (Option<BTreeSet<String>>, Option<BTreeSet<String>>)>;

fn entity_items(doc: &Document) -> BTreeMap<Item, BTreeSet<String>> {
    let mut out = BTreeMap::new();
    for c in &doc.clusters {
        for &m in &c.mentions {
            out.insert(Item::Span(doc.id.clone(), m), c.tags.iter().cloned().collect());
        }
    }
    out
}

fn link_items(doc: &Document) -> BTreeMap<Item, BTreeSet<String>> {
    let mut out = BTreeMap::new();
    for c in &doc.clusters {
        let label = match &c.link {
            Link::Kb(id) => id.clone(),
            Link::Nil => "NIL".to_owned(),
            Link::Unannotated => "<unannotated>".to_owned(),
        };
        for &m in &c.mentions {
            out.insert(Item::Span(doc.id.clone(), m), BTreeSet::from([label.clone()]));
        }
    }
    out
}

fn relation_items(doc: &Document) -> BTreeMap<Item, BTreeSet<String>> {
    let mut out: BTreeMap<Item, BTreeSet<String>> = BTreeMap::new();
    for r in &doc.relations {
        let (Some(h), Some(t)) = (doc.cluster(&r.head), doc.cluster(&r.tail)) else {
            continue;
        };
        for &a in &h.mentions {
            for &b in &t.mentions {
                out.entry(Item::Pair(doc.id.clone(), a, b))
                    .or_default()
                    .insert(r.kind.clone());
            }
        }
    }
    out
}

fn align(
    a: &[Document],
    b: &[Document],
    items: impl Fn(&Document) -> BTreeMap<Item, BTreeSet<String>>,
) -> Aligned {
    let mut out: Aligned = BTreeMap::new();
    for d in a {
        for (k, v) in items(d) {
            out.entry(k).or_default().0 = Some(v);
        }
    }
    for d in b {
        for (k, v) in items(d) {
            out.entry(k).or_default().1 = Some(v);
        }
    }
    out
}

/// Mention pairs labelled coreferent or distinct; a pair one annotator did
/// not produce both mentions of is absent on that side.
fn coref_aligned(a: &[Document], b: &[Document]) -> Aligned {
    fn owners(docs: &[Document]) -> BTreeMap<(String, Mention), usize> {
        let mut out = BTreeMap::new();
        for d in docs {
            for (k, c) in d.clusters.iter().enumerate() {
                for &m in &c.mentions {
                    out.insert((d.id.clone(), m), k);
                }
            }
        }
        out
    }
    let oa = owners(a);
    let ob = owners(b);
    let mut by_doc: BTreeMap<&str, BTreeSet<Mention>> = BTreeMap::new();
    for (d, m) in oa.keys().chain(ob.keys()) {
        by_doc.entry(d.as_str()).or_default().insert(*m);
    }
    let label = |o: &BTreeMap<(String, Mention), usize>, d: &str, x: Mention, y: Mention| {
        let kx = o.get(&(d.to_owned(), x))?;
        let ky = o.get(&(d.to_owned(), y))?;
        let l = if kx == ky { "coreferent" } else { "distinct" };
        Some(BTreeSet::from([l.to_owned()]))
    };
    let mut out = Aligned::new();
    for (d, ms) in by_doc {
        let ms: Vec<Mention> = ms.into_iter().collect();
        for (i, &x) in ms.iter().enumerate() {
            for &y in &ms[i + 1..] {
                out.insert(
                    Item::Pair(d.to_owned(), x, y),
                    (label(&oa, d, x, y), label(&ob, d, x, y)),
                );
            }
        }
    }
    out
}

fn single_label(aligned: &Aligned) -> Result<AnnotationPair<String>> {
    let side = |s: &Option<BTreeSet<String>>| match s {
        None => ABSENT.to_owned(),
        Some(set) => set.iter().cloned().collect::<Vec<_>>().join("|"),
    };
    AnnotationPair::new(aligned.values().map(|(a, b)| (side(a), side(b))).collect())
}

fn detection(aligned: &Aligned) -> Result<AnnotationPair<bool>> {
    AnnotationPair::new(
        aligned
            .values()
            .map(|(a, b)| (a.is_some(), b.is_some()))
            .collect(),
    )
}

fn per_label<'a>(rows: impl Iterator<Item = (&'a BTreeSet<String>, &'a BTreeSet<String>)> + Clone) -> Result<MultiLabelKappa> {
    let labels: BTreeSet<&String> = rows.clone().flat_map(|(a, b)| a.iter().chain(b)).collect();
    let mut pairs = BTreeMap::new();
    for l in labels {
        let items = rows
            .clone()
            .map(|(a, b)| (a.contains(l), b.contains(l)))
            .collect();
        pairs.insert(l.clone(), AnnotationPair::new(items)?);
    }
    multilabel_kappa(&pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskAgreement {
    pub task: AgreementTask,
    /// Agreement on which items exist at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<Kappa>,
    /// Label agreement restricted to items both annotators produced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<MultiLabelKappa>,
    /// Agreement over all items, absent ones included.
    pub overall: MultiLabelKappa,
}

fn wrap_single(k: Kappa, pair: &AnnotationPair<String>) -> MultiLabelKappa {
    let per_label = pair
        .label_counts()
        .into_iter()
        .map(|(l, (x, y))| {
            let binary: Vec<(bool, bool)> = pair.items().iter().map(|(a, b)| (a == &l, b == &l)).collect();
            let kappa = AnnotationPair::new(binary)
                .and_then(|p| cohen_kappa(&p))
                .unwrap_or(k);
            (l, LabelKappa { support: x + y, kappa })
        })
        .collect();
    MultiLabelKappa { summary: k, per_label }
}

/// Agreement between annotator corpora `a` and `b` for one task.
pub fn corpus_agreement(a: &[Document], b: &[Document], task: AgreementTask) -> Result<TaskAgreement> {
    let aligned = match task {
        AgreementTask::Entity => align(a, b, entity_items),
        AgreementTask::Linking => align(a, b, link_items),
        AgreementTask::Relation => align(a, b, relation_items),
        AgreementTask::Coref => coref_aligned(a, b),
    };
    if aligned.is_empty() {
        return Err(Error::InvalidArgument(format!("no {task} items to compare")));
    }
    match task {
        AgreementTask::Coref | AgreementTask::Linking => {
            let pair = single_label(&aligned)?;
            let k = cohen_kappa(&pair)?;
            Ok(TaskAgreement {
                task,
                detection: None,
                classification: None,
                overall: wrap_single(k, &pair),
            })
        }
        AgreementTask::Entity | AgreementTask::Relation => {
            let empty = BTreeSet::new();
            let detection = cohen_kappa(&detection(&aligned)?)?;
            let both: Vec<_> = aligned
                .values()
                .filter_map(|(x, y)| Some((x.as_ref()?, y.as_ref()?)))
                .collect();
            let classification = if both.is_empty() {
                None
            } else {
                per_label(both.iter().copied()).ok()
            };
            let overall = per_label(aligned.values().map(|(x, y)| {
                (x.as_ref().unwrap_or(&empty), y.as_ref().unwrap_or(&empty))
            }))?;
            Ok(TaskAgreement {
                task,
                detection: Some(detection),
                classification,
                overall,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityCluster, RelationTriple};

    fn pair(a: &str, b: &str) -> AnnotationPair<char> {
        AnnotationPair::from_sides(a.chars().collect(), b.chars().collect()).unwrap()
    }

    #[test]
    fn observed() {
        assert_eq!(observed_agreement(&pair("abab", "abab")), 1.0);
        assert_eq!(observed_agreement(&pair("aaaaaaaaaa", "aaaaaaaabb")), 0.8);
        assert_eq!(observed_agreement(&pair("aaa", "bbb")), 0.0);
        assert!(AnnotationPair::<char>::new(vec![]).is_err());
        assert!(AnnotationPair::from_sides(vec!['a'], vec![]).is_err());
    }

    #[test]
    fn expected() {
        let p = pair("xxxxxxyyyy", "xxxxxyyyyy");
        assert!((expected_agreement(&p) - 0.5).abs() < 1e-12);
        assert_eq!(expected_agreement(&pair("aaa", "aaa")), 1.0);
        let p = pair("abcabc", "bcacab");
        assert!((expected_agreement(&p) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_fixture() {
        // one swapped x/y pair: margins stay (5,5), 8 of 10 equal
        let p = pair("xxxxxyyyyy", "xxxxyxyyyy");
        let k = cohen_kappa(&p).unwrap();
        assert!((k.p_o - 0.8).abs() < 1e-12);
        assert!((k.p_e - 0.5).abs() < 1e-12);
        assert!((k.kappa - 0.6).abs() < 1e-12);
        assert_eq!(cohen_kappa(&pair("abba", "abba")).unwrap().kappa, 1.0);
        assert_eq!(cohen_kappa(&pair("aaa", "aaa")).unwrap().kappa, 1.0);
        // p_o = p_e
        assert!(cohen_kappa(&pair("ab", "aa")).unwrap().kappa.abs() < 1e-12);
    }

    #[test]
    fn multilabel_weighting() {
        assert_eq!(weighted_mean(&[(1.0, 3), (0.0, 1)]).unwrap(), 0.75);
        assert!(weighted_mean(&[]).is_err());
        let mut one = BTreeMap::new();
        let p = AnnotationPair::new(vec![(true, true), (true, false), (false, false), (false, true), (false, false)]).unwrap();
        one.insert("l".to_owned(), p.clone());
        let m = multilabel_kappa(&one).unwrap();
        assert_eq!(m.summary.kappa, cohen_kappa(&p).unwrap().kappa);
        assert!(multilabel_kappa(&BTreeMap::new()).is_err());
    }

    fn doc(clusters: Vec<EntityCluster>, relations: Vec<RelationTriple>) -> Document {
        let mut d = Document::from_text("d", "a b c d e f");
        d.clusters = clusters;
        d.relations = relations;
        d
    }

    fn c(id: &str, spans: &[usize], tags: &[&str]) -> EntityCluster {
        EntityCluster::new(id, spans.iter().map(|&s| Mention::new(s, s + 1)).collect())
            .with_tags(tags.iter().copied())
    }

    #[test]
    fn identical_corpora_agree_perfectly() {
        let d = doc(
            vec![c("x", &[0, 2], &["person"]), c("y", &[4], &["gpe0", "location"])],
            vec![RelationTriple::new("x", "citizen_of", "y")],
        );
        for task in [AgreementTask::Entity, AgreementTask::Coref, AgreementTask::Linking, AgreementTask::Relation] {
            let r = corpus_agreement(std::slice::from_ref(&d), std::slice::from_ref(&d), task).unwrap();
            assert_eq!(r.overall.summary.kappa, 1.0, "{task}");
        }
    }

    #[test]
    fn missing_mention_lowers_detection() {
        let a = doc(vec![c("x", &[0], &["person"]), c("y", &[2], &["gpe0"]), c("z", &[4], &["org"])], vec![]);
        let b = doc(vec![c("x", &[0], &["person"]), c("y", &[2], &["location"])], vec![]);
        let r = corpus_agreement(&[a], &[b], AgreementTask::Entity).unwrap();
        let det = r.detection.unwrap();
        assert!((det.p_o - 2.0 / 3.0).abs() < 1e-12);
        let cls = r.classification.unwrap();
        assert_eq!(cls.per_label["person"].kappa.kappa, 1.0);
        assert!(cls.summary.kappa < 1.0);
    }
}
