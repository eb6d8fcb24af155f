//! MUC, B³ and CEAF_e coreference scores with singleton clusters.
//!
//! Mentions that appear on only one side are kept: they count as singleton
//! partitions for MUC and contribute zero overlap for B³ and CEAF_e.
//! Any ratio with a zero denominator is reported as 0.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::assignment::max_weight_assignment;
use super::{ordered_sum, Prf};
use crate::corpus::{Document, Mention};
use crate::error::{Error, Result};

/// Disjoint, non-empty clusters over a mention universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition<M: Ord> {
    clusters: Vec<BTreeSet<M>>,
    owner: BTreeMap<M, usize>,
}

impl<M: Ord + Clone> Partition<M> {
    pub fn new<I, C>(clusters: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = M>,
    {
        let mut out = Vec::new();
        let mut owner = BTreeMap::new();
        for c in clusters {
            let set: BTreeSet<M> = c.into_iter().collect();
            if set.is_empty() {
                return Err(Error::InvalidArgument("empty cluster in partition".into()));
            }
            let k = out.len();
            for m in &set {
                if owner.insert(m.clone(), k).is_some() {
                    return Err(Error::InvalidArgument(
                        "partition clusters are not disjoint".into(),
                    ));
                }
            }
            out.push(set);
        }
        Ok(Partition {
            clusters: out,
            owner,
        })
    }

    pub fn clusters(&self) -> &[BTreeSet<M>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn mention_count(&self) -> usize {
        self.owner.len()
    }

    fn cluster_of(&self, m: &M) -> Option<&BTreeSet<M>> {
        self.owner.get(m).map(|&k| &self.clusters[k])
    }
}

impl Partition<Mention> {
    pub fn from_document(doc: &Document) -> Result<Self> {
        Partition::new(doc.clusters.iter().map(|c| c.mentions.iter().copied()))
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Summable numerators and denominators of all three metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CorefCounts {
    pub muc_recall: (f64, f64),
    pub muc_precision: (f64, f64),
    pub b3_recall: (f64, f64),
    pub b3_precision: (f64, f64),
    /// Optimal total similarity, number of predicted and of gold clusters.
    pub ceaf: (f64, f64, f64),
}

impl CorefCounts {
    pub fn add(&mut self, o: &CorefCounts) {
        let add2 = |a: &mut (f64, f64), b: (f64, f64)| {
            a.0 += b.0;
            a.1 += b.1;
        };
        add2(&mut self.muc_recall, o.muc_recall);
        add2(&mut self.muc_precision, o.muc_precision);
        add2(&mut self.b3_recall, o.b3_recall);
        add2(&mut self.b3_precision, o.b3_precision);
        self.ceaf.0 += o.ceaf.0;
        self.ceaf.1 += o.ceaf.1;
        self.ceaf.2 += o.ceaf.2;
    }

    pub fn scores(&self) -> CorefScores {
        let muc = Prf::new(
            ratio(self.muc_precision.0, self.muc_precision.1),
            ratio(self.muc_recall.0, self.muc_recall.1),
        );
        let b3 = Prf::new(
            ratio(self.b3_precision.0, self.b3_precision.1),
            ratio(self.b3_recall.0, self.b3_recall.1),
        );
        let ceafe = Prf::new(
            ratio(self.ceaf.0, self.ceaf.1),
            ratio(self.ceaf.0, self.ceaf.2),
        );
        CorefScores {
            muc,
            b3,
            ceafe,
            avg_f1: (muc.f1 + b3.f1 + ceafe.f1) / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorefScores {
    pub muc: Prf,
    pub b3: Prf,
    pub ceafe: Prf,
    pub avg_f1: f64,
}

/// `(Σ |k| − p(k), Σ |k| − 1)` over clusters `k` of `key`, where `p(k)`
/// counts the parts `k` is split into by `response`; mentions missing from
/// `response` are parts of their own.
fn muc_side<M: Ord + Clone>(key: &Partition<M>, response: &Partition<M>) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in key.clusters() {
        let mut parts = BTreeSet::new();
        let mut missing = 0usize;
        for m in k {
            match response.owner.get(m) {
                Some(&idx) => {
                    parts.insert(idx);
                }
                None => missing += 1,
            }
        }
        num += (k.len() - parts.len() - missing) as f64;
        den += (k.len() - 1) as f64;
    }
    (num, den)
}

fn b3_side<M: Ord + Clone>(key: &Partition<M>, response: &Partition<M>) -> (f64, f64) {
    let terms = key.clusters().iter().flat_map(|k| {
        k.iter().filter_map(move |m| {
            response
                .cluster_of(m)
                .map(|r| k.intersection(r).count() as f64 / k.len() as f64)
        })
    });
    (ordered_sum(terms), key.mention_count() as f64)
}

pub fn phi4<M: Ord>(a: &BTreeSet<M>, b: &BTreeSet<M>) -> f64 {
    let overlap = a.intersection(b).count();
    2.0 * overlap as f64 / (a.len() + b.len()) as f64
}

/// Optimal one-to-one alignment weight under `phi4`.
pub fn ceaf_alignment<M: Ord + Clone>(gold: &Partition<M>, pred: &Partition<M>) -> f64 {
    let weights: Vec<Vec<f64>> = gold
        .clusters()
        .iter()
        .map(|g| pred.clusters().iter().map(|p| phi4(g, p)).collect())
        .collect();
    let (_, assignment) = max_weight_assignment(&weights);
    ordered_sum(
        assignment
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| weights[r][c])),
    )
}

pub fn coref_counts<M: Ord + Clone>(gold: &Partition<M>, pred: &Partition<M>) -> CorefCounts {
    CorefCounts {
        muc_recall: muc_side(gold, pred),
        muc_precision: muc_side(pred, gold),
        b3_recall: b3_side(gold, pred),
        b3_precision: b3_side(pred, gold),
        ceaf: (
            ceaf_alignment(gold, pred),
            pred.len() as f64,
            gold.len() as f64,
        ),
    }
}

pub fn muc<M: Ord + Clone>(gold: &Partition<M>, pred: &Partition<M>) -> Prf {
    coref_counts(gold, pred).scores().muc
}

pub fn b_cubed<M: Ord + Clone>(gold: &Partition<M>, pred: &Partition<M>) -> Prf {
    coref_counts(gold, pred).scores().b3
}

pub fn ceaf_e<M: Ord + Clone>(gold: &Partition<M>, pred: &Partition<M>) -> Prf {
    coref_counts(gold, pred).scores().ceafe
}

pub fn avg_coref_f1<M: Ord + Clone>(gold: &Partition<M>, pred: &Partition<M>) -> f64 {
    coref_counts(gold, pred).scores().avg_f1
}

/// Corpus score over the disjoint union of per-document mention universes.
/// Documents are paired by id; a gold document without prediction is scored
/// against an empty partition.
pub fn score_coref_corpus(gold: &[Document], pred: &[Document]) -> Result<CorefScores> {
    let by_id: BTreeMap<&str, &Document> = pred.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut total = CorefCounts::default();
    for g in gold {
        let gp = Partition::from_document(g)?;
        let pp = match by_id.get(g.id.as_str()) {
            Some(p) => Partition::from_document(p)?,
            None => Partition::new(Vec::<Vec<Mention>>::new())?,
        };
        total.add(&coref_counts(&gp, &pp));
    }
    Ok(total.scores())
}
