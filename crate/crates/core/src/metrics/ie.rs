//! Mention-level, hard entity-level and soft entity-level NER/RE scores.
//!
//! Every label `l` gets four sets: predicted clusters bearing `l`
//! (`P_C(l)`), gold clusters bearing `l` (`G_C(l)`) and the unions of
//! their member instances (`P_M(l)`, `G_M(l)`). For NER an instance is a
//! mention span. For RE a "cluster" is a related pair of entity clusters and
//! its instances are all cross-cluster mention pairs.
//!
//! Zero denominators: a side whose cluster (or instance) count is zero on
//! both gold and prediction scores 1.0; when only one side is empty it
//! scores 0.0.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{ordered_sum, Level, Prf, PrfReport, Task};
use crate::corpus::{Document, Mention};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Instance {
    Span(Mention),
    Pair(Mention, Mention),
}

pub type InstanceSet = BTreeSet<Instance>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelView {
    /// `P_C(l)`, one instance set per predicted cluster (or related pair).
    pub predicted: Vec<InstanceSet>,
    /// `G_C(l)`.
    pub gold: Vec<InstanceSet>,
    /// `P_M(l)`, the union of `predicted`.
    pub predicted_instances: InstanceSet,
    /// `G_M(l)`, the union of `gold`.
    pub gold_instances: InstanceSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalView {
    pub task: Task,
    pub labels: BTreeMap<String, LabelView>,
}

impl EvalView {
    pub fn new(task: Task) -> Self {
        EvalView {
            task,
            labels: BTreeMap::new(),
        }
    }

    pub fn add_gold(&mut self, label: &str, cluster: InstanceSet) {
        let view = self.labels.entry(label.to_owned()).or_default();
        view.gold_instances.extend(cluster.iter().copied());
        view.gold.push(cluster);
    }

    pub fn add_predicted(&mut self, label: &str, cluster: InstanceSet) {
        let view = self.labels.entry(label.to_owned()).or_default();
        view.predicted_instances.extend(cluster.iter().copied());
        view.predicted.push(cluster);
    }
}

fn check_token_space(gold: &Document, pred: &Document) -> Result<()> {
    if !pred.tokens.is_empty() && pred.tokens != gold.tokens {
        return Err(Error::InvalidArgument(format!(
            "document {}: predicted tokens differ from gold tokens",
            gold.id
        )));
    }
    if !gold.tokens.is_empty() {
        let n = gold.tokens.len();
        if let Some(m) = pred
            .clusters
            .iter()
            .flat_map(|c| &c.mentions)
            .find(|m| m.end > n)
        {
            return Err(Error::InvalidArgument(format!(
                "document {}: predicted mention {m} lies outside the {n} gold tokens",
                gold.id
            )));
        }
    }
    Ok(())
}

/// Labelled instance sets of one document side.
fn side_sets(doc: &Document, task: Task) -> Vec<(String, InstanceSet)> {
    match task {
        Task::Ner => {
            let mut out = Vec::new();
            for c in &doc.clusters {
                let tags: BTreeSet<&String> = c.tags.iter().collect();
                let spans: InstanceSet = c.mentions.iter().map(|m| Instance::Span(*m)).collect();
                for tag in tags {
                    out.push((tag.clone(), spans.clone()));
                }
            }
            out
        }
        Task::Re => {
            let triples: BTreeSet<_> = doc
                .relations
                .iter()
                .map(|r| (r.head.as_str(), r.kind.as_str(), r.tail.as_str()))
                .collect();
            let mentions: BTreeMap<&str, &[Mention]> = doc
                .clusters
                .iter()
                .map(|c| (c.id.as_str(), c.mentions.as_slice()))
                .collect();
            triples
                .into_iter()
                .map(|(h, kind, t)| {
                    let heads = mentions.get(h).copied().unwrap_or_default();
                    let tails = mentions.get(t).copied().unwrap_or_default();
                    let pairs = heads
                        .iter()
                        .flat_map(|hm| tails.iter().map(move |tm| Instance::Pair(*hm, *tm)))
                        .collect();
                    (kind.to_owned(), pairs)
                })
                .collect()
        }
    }
}

pub fn build_eval_view(gold: &Document, pred: &Document, task: Task) -> Result<EvalView> {
    check_token_space(gold, pred)?;
    let mut view = EvalView::new(task);
    for (label, set) in side_sets(gold, task) {
        view.add_gold(&label, set);
    }
    for (label, set) in side_sets(pred, task) {
        view.add_predicted(&label, set);
    }
    Ok(view)
}

/// Credit and denominators for one label at one level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Counts {
    /// True positives on the precision side.
    pub tp_pred: f64,
    /// True positives on the recall side.
    pub tp_gold: f64,
    pub n_pred: f64,
    pub n_gold: f64,
}

impl Counts {
    pub fn add(&mut self, other: &Counts) {
        self.tp_pred += other.tp_pred;
        self.tp_gold += other.tp_gold;
        self.n_pred += other.n_pred;
        self.n_gold += other.n_gold;
    }

    pub fn prf(&self) -> Prf {
        let both_empty = self.n_pred == 0.0 && self.n_gold == 0.0;
        let ratio = |num: f64, den: f64| {
            if den > 0.0 {
                num / den
            } else if both_empty {
                1.0
            } else {
                0.0
            }
        };
        Prf::new(
            ratio(self.tp_pred, self.n_pred),
            ratio(self.tp_gold, self.n_gold),
        )
    }
}

/// Soft counts for one label: fractional true positives on the predicted
/// and gold side, and the remainders of each cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SoftCounts {
    pub tp_p: f64,
    pub tp_g: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

fn fraction_covered(cluster: &InstanceSet, instances: &InstanceSet) -> f64 {
    if cluster.is_empty() {
        return 0.0;
    }
    let hit = cluster.iter().filter(|i| instances.contains(i)).count();
    hit as f64 / cluster.len() as f64
}

pub fn soft_entity_counts(view: &EvalView, label: &str) -> SoftCounts {
    let Some(v) = view.labels.get(label) else {
        return SoftCounts::default();
    };
    let tp_p = ordered_sum(v.predicted.iter().map(|c| fraction_covered(c, &v.gold_instances)));
    let tp_g = ordered_sum(v.gold.iter().map(|c| fraction_covered(c, &v.predicted_instances)));
    SoftCounts {
        tp_p,
        tp_g,
        fp: v.predicted.len() as f64 - tp_p,
        fn_: v.gold.len() as f64 - tp_g,
    }
}

fn label_counts(v: &LabelView, level: Level, label: &str, view: &EvalView) -> Counts {
    match level {
        Level::Mention => {
            let tp = v
                .predicted_instances
                .intersection(&v.gold_instances)
                .count() as f64;
            Counts {
                tp_pred: tp,
                tp_gold: tp,
                n_pred: v.predicted_instances.len() as f64,
                n_gold: v.gold_instances.len() as f64,
            }
        }
        Level::Hard => {
            let gold: BTreeSet<&InstanceSet> = v.gold.iter().collect();
            let pred: BTreeSet<&InstanceSet> = v.predicted.iter().collect();
            Counts {
                tp_pred: v.predicted.iter().filter(|c| gold.contains(c)).count() as f64,
                tp_gold: v.gold.iter().filter(|c| pred.contains(c)).count() as f64,
                n_pred: v.predicted.len() as f64,
                n_gold: v.gold.len() as f64,
            }
        }
        Level::Soft => {
            let s = soft_entity_counts(view, label);
            Counts {
                tp_pred: s.tp_p,
                tp_gold: s.tp_g,
                n_pred: v.predicted.len() as f64,
                n_gold: v.gold.len() as f64,
            }
        }
    }
}

/// Counts for every label of the view at `level`.
pub fn counts_by_label(view: &EvalView, level: Level) -> BTreeMap<String, Counts> {
    view.labels
        .iter()
        .map(|(label, v)| (label.clone(), label_counts(v, level, label, view)))
        .collect()
}

/// Micro-average: numerators and denominators summed over labels.
pub fn micro(counts: &BTreeMap<String, Counts>) -> Counts {
    let mut total = Counts::default();
    for c in counts.values() {
        total.add(c);
    }
    total
}

pub fn level_prf(view: &EvalView, level: Level) -> PrfReport {
    PrfReport {
        task: view.task,
        level,
        scores: micro(&counts_by_label(view, level)).prf(),
    }
}

pub fn mention_prf(view: &EvalView) -> PrfReport {
    level_prf(view, Level::Mention)
}

pub fn hard_entity_prf(view: &EvalView) -> PrfReport {
    level_prf(view, Level::Hard)
}

pub fn soft_entity_prf(view: &EvalView) -> PrfReport {
    level_prf(view, Level::Soft)
}

/// Corpus-level accumulator: per level, per label counts summed over
/// documents.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    pub task: Task,
    pub counts: BTreeMap<Level, BTreeMap<String, Counts>>,
}

impl Tally {
    pub fn new(task: Task) -> Self {
        Tally {
            task,
            counts: BTreeMap::new(),
        }
    }

    pub fn add_view(&mut self, view: &EvalView) {
        for level in Level::ALL {
            let per_level = self.counts.entry(level).or_default();
            for (label, c) in counts_by_label(view, level) {
                per_level.entry(label).or_default().add(&c);
            }
        }
    }

    pub fn report(&self, level: Level) -> PrfReport {
        let empty = BTreeMap::new();
        PrfReport {
            task: self.task,
            level,
            scores: micro(self.counts.get(&level).unwrap_or(&empty)).prf(),
        }
    }

    pub fn per_label(&self, level: Level) -> BTreeMap<String, Prf> {
        self.counts
            .get(&level)
            .map(|m| m.iter().map(|(l, c)| (l.clone(), c.prf())).collect())
            .unwrap_or_default()
    }
}

/// Scores predicted documents against gold ones, pairing them by id. Gold
/// documents without a prediction count as empty predictions; predictions
/// without gold are an error.
pub fn score_corpus(gold: &[Document], pred: &[Document], task: Task) -> Result<Tally> {
    let by_id: BTreeMap<&str, &Document> = pred.iter().map(|d| (d.id.as_str(), d)).collect();
    let gold_ids: BTreeSet<&str> = gold.iter().map(|d| d.id.as_str()).collect();
    if let Some(extra) = by_id.keys().find(|id| !gold_ids.contains(*id)) {
        return Err(Error::InvalidArgument(format!(
            "predicted document {extra} has no gold counterpart"
        )));
    }
    let mut tally = Tally::new(task);
    for g in gold {
        let empty;
        let p = match by_id.get(g.id.as_str()) {
            Some(p) => *p,
            None => {
                empty = Document::new(g.id.clone());
                &empty
            }
        };
        tally.add_view(&build_eval_view(g, p, task)?);
    }
    Ok(tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityCluster, RelationTriple};

    fn spans(ms: &[usize]) -> InstanceSet {
        ms.iter().map(|&b| Instance::Span(Mention::new(b, b + 1))).collect()
    }

    fn doc(clusters: Vec<EntityCluster>) -> Document {
        let mut d = Document::from_text("d", "a b c d e f g h i j k l");
        d.clusters = clusters;
        d
    }

    fn cl(id: &str, ms: &[usize], tags: &[&str]) -> EntityCluster {
        EntityCluster::new(id, ms.iter().map(|&b| Mention::new(b, b + 1)).collect())
            .with_tags(tags.iter().copied())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn re_gold_cross_product() {
        let mut g = doc(vec![cl("A", &[0, 1], &[]), cl("B", &[2], &[])]);
        g.relations = vec![RelationTriple::new("A", "l", "B")];
        let view = build_eval_view(&g, &doc(vec![]), Task::Re).unwrap();
        assert_eq!(view.labels["l"].gold[0].len(), 2);
        let none = build_eval_view(&doc(vec![]), &doc(vec![]), Task::Re).unwrap();
        assert!(none.labels.is_empty());
    }

    #[test]
    fn ner_multilabel_expansion() {
        let g = doc(vec![cl("A", &[0, 3, 5], &["person", "politician"])]);
        let view = build_eval_view(&g, &doc(vec![]), Task::Ner).unwrap();
        assert_eq!(view.labels["person"].gold_instances.len(), 3);
        assert_eq!(view.labels["politician"].gold_instances.len(), 3);
    }

    #[test]
    fn token_space_mismatch() {
        let g = doc(vec![]);
        let mut p = doc(vec![cl("A", &[40], &["x"])]);
        assert!(build_eval_view(&g, &p, Task::Ner).is_err());
        p.clusters.clear();
        p.tokens.pop();
        assert!(build_eval_view(&g, &p, Task::Ner).is_err());
    }

    #[test]
    fn mention_level_examples() {
        let g = doc(vec![cl("A", &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], &["x"])]);
        let exact = build_eval_view(&g, &g, Task::Ner).unwrap();
        assert_eq!(mention_prf(&exact).scores, Prf::new(1.0, 1.0));

        let p = doc(vec![cl("A", &[0, 1, 2, 3, 4, 5, 6, 7, 8], &["x"])]);
        let r = mention_prf(&build_eval_view(&g, &p, Task::Ner).unwrap());
        assert!(close(r.precision(), 1.0));
        assert!(close(r.recall(), 0.9));
        assert!((r.f1() - 0.947).abs() < 1e-3);

        let p = doc(vec![cl("A", &[0], &["y"])]);
        let r = mention_prf(&build_eval_view(&g, &p, Task::Ner).unwrap());
        assert_eq!(r.scores, Prf::new(0.0, 0.0));
    }

    #[test]
    fn empty_both_sides_is_perfect() {
        let v = build_eval_view(&doc(vec![]), &doc(vec![]), Task::Ner).unwrap();
        for level in Level::ALL {
            assert_eq!(level_prf(&v, level).f1(), 1.0);
        }
        let g = doc(vec![cl("A", &[0], &["x"])]);
        let v = build_eval_view(&g, &doc(vec![]), Task::Ner).unwrap();
        for level in Level::ALL {
            assert_eq!(level_prf(&v, level).scores, Prf::new(0.0, 0.0));
        }
    }

    #[test]
    fn split_cluster_hard_vs_soft() {
        let g = doc(vec![cl("A", &[1, 2, 3], &["person"])]);
        let p = doc(vec![cl("P1", &[1, 2], &["person"]), cl("P2", &[3], &["person"])]);
        let v = build_eval_view(&g, &p, Task::Ner).unwrap();
        let s = soft_entity_counts(&v, "person");
        assert_eq!(s, SoftCounts { tp_p: 2.0, tp_g: 1.0, fp: 0.0, fn_: 0.0 });
        assert_eq!(hard_entity_prf(&v).scores, Prf::new(0.0, 0.0));
        assert_eq!(soft_entity_prf(&v).scores, Prf::new(1.0, 1.0));
    }

    #[test]
    fn hard_label_mismatch() {
        let g = doc(vec![cl("A", &[1], &["A"])]);
        let p = doc(vec![cl("A", &[1], &["B"])]);
        let v = build_eval_view(&g, &p, Task::Ner).unwrap();
        assert_eq!(hard_entity_prf(&v).scores, Prf::new(0.0, 0.0));
    }

    #[test]
    fn soft_disjoint_labels() {
        let g = doc(vec![cl("G", &[1, 2], &["A"])]);
        let p = doc(vec![cl("P", &[1, 2], &["B"])]);
        let v = build_eval_view(&g, &p, Task::Ner).unwrap();
        let b = soft_entity_counts(&v, "B");
        assert_eq!((b.tp_p, b.fp), (0.0, 1.0));
        let a = soft_entity_counts(&v, "A");
        assert_eq!((a.tp_g, a.fn_), (0.0, 1.0));
    }

    #[test]
    fn soft_relation_example() {
        let mut g = doc(vec![cl("A", &[0, 1], &[]), cl("B", &[2], &[])]);
        g.relations = vec![RelationTriple::new("A", "l", "B")];
        let mut p = doc(vec![cl("A'", &[0], &[]), cl("B'", &[2], &[])]);
        p.relations = vec![RelationTriple::new("A'", "l", "B'")];
        let v = build_eval_view(&g, &p, Task::Re).unwrap();
        let s = soft_entity_counts(&v, "l");
        assert!(close(s.tp_p, 1.0));
        assert!(close(s.tp_g, 0.5));
        let r = soft_entity_prf(&v);
        assert!(close(r.precision(), 1.0));
        assert!(close(r.recall(), 0.5));
        assert!((r.f1() - 0.667).abs() < 1e-3);
    }

    #[test]
    fn relation_direction_matters() {
        let mut g = doc(vec![cl("A", &[0], &[]), cl("B", &[2], &[])]);
        g.relations = vec![RelationTriple::new("A", "l", "B")];
        let mut p = g.clone();
        p.relations = vec![RelationTriple::new("B", "l", "A")];
        let v = build_eval_view(&g, &p, Task::Re).unwrap();
        for level in Level::ALL {
            assert_eq!(level_prf(&v, level).f1(), 0.0);
        }
    }

    #[test]
    fn corpus_tally_sums_documents() {
        let g1 = doc(vec![cl("A", &[0], &["x"])]);
        let mut g2 = doc(vec![cl("A", &[0], &["x"])]);
        g2.id = "e".into();
        let tally = score_corpus(&[g1.clone(), g2], &[g1], Task::Ner).unwrap();
        let r = tally.report(Level::Hard);
        assert!(close(r.precision(), 1.0));
        assert!(close(r.recall(), 0.5));
        let mut stray = doc(vec![]);
        stray.id = "zzz".into();
        assert!(score_corpus(&[], &[stray], Task::Ner).is_err());
    }

    #[test]
    fn view_builder_matches_documents() {
        let mut v = EvalView::new(Task::Ner);
        v.add_gold("x", spans(&[0, 1]));
        v.add_predicted("x", spans(&[0]));
        v.add_predicted("x", spans(&[1]));
        assert_eq!(soft_entity_prf(&v).f1(), 1.0);
        assert_eq!(hard_entity_prf(&v).f1(), 0.0);
    }
}
