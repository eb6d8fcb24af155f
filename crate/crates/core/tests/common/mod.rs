//! Random instance generators and brute-force oracles shared by the
//! acceptance suite and the property tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ecie::corpus::{Document, EntityCluster, Mention, RelationTriple};
use ecie::metrics::{Level, Task};
use ecie::rules::{Fact, FactBase, Rule, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub const LABELS: [&str; 4] = ["A", "B", "C", "D"];
pub const REL_LABELS: [&str; 4] = ["r1", "r2", "r3", "r4"];

/// A random document side with at most 5 clusters of at most 6 mentions,
/// drawn from a small pool of spans so that two sides overlap often.
pub fn random_side<R: Rng>(rng: &mut R, id: &str, pool: usize) -> Document {
    let mut spans: Vec<Mention> = (0..pool).map(|b| Mention::new(b, b + 1)).collect();
    spans.shuffle(rng);
    let n_clusters = rng.gen_range(0..=5);
    let mut doc = Document::new(id);
    for c in 0..n_clusters {
        let size = rng.gen_range(1..=6).min(spans.len());
        if size == 0 {
            break;
        }
        let mentions: Vec<Mention> = spans.drain(..size).collect();
        let tags: Vec<&str> = LABELS.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
        doc.clusters.push(EntityCluster::new(format!("c{c}"), mentions).with_tags(tags));
    }
    add_random_relations(rng, &mut doc);
    doc
}

pub fn add_random_relations<R: Rng>(rng: &mut R, doc: &mut Document) {
    let ids: Vec<String> = doc.clusters.iter().map(|c| c.id.clone()).collect();
    if ids.len() < 2 {
        return;
    }
    for _ in 0..rng.gen_range(0..=6) {
        let h = ids.choose(rng).unwrap();
        let t = ids.choose(rng).unwrap();
        if h != t {
            let l = REL_LABELS.choose(rng).unwrap();
            doc.relations.push(RelationTriple::new(h.clone(), *l, t.clone()));
        }
    }
}

/// A prediction for `gold`: either independent, or a perturbed copy with
/// moved mentions and relabelled clusters.
pub fn random_prediction<R: Rng>(rng: &mut R, gold: &Document, pool: usize) -> Document {
    if rng.gen_bool(0.4) {
        return random_side(rng, &gold.id, pool);
    }
    let mut pred = gold.clone();
    pred.relations.clear();
    if pred.clusters.len() >= 2 && rng.gen_bool(0.5) {
        // move one mention across clusters
        let from = rng.gen_range(0..pred.clusters.len());
        let to = rng.gen_range(0..pred.clusters.len());
        if from != to && pred.clusters[from].mentions.len() > 1 && pred.clusters[to].mentions.len() < 6 {
            let m = pred.clusters[from].mentions.pop().unwrap();
            pred.clusters[to].mentions.push(m);
        }
    }
    for c in &mut pred.clusters {
        if rng.gen_bool(0.3) {
            c.tags = LABELS.iter().map(|s| s.to_string()).filter(|_| rng.gen_bool(0.4)).collect();
        }
        c.mentions.shuffle(rng);
    }
    if rng.gen_bool(0.5) {
        pred.relations = gold.relations.clone();
        pred.relations.retain(|_| rng.gen_bool(0.8));
    }
    add_random_relations(rng, &mut pred);
    pred
}

type Inst = (usize, usize, usize, usize);

/// Labelled clusters of one side as plain vectors: (label, instances).
fn labelled_clusters(doc: &Document, task: Task) -> Vec<(String, Vec<Inst>)> {
    let mut out = Vec::new();
    match task {
        Task::Ner => {
            for c in &doc.clusters {
                let mut tags: Vec<&String> = c.tags.iter().collect();
                tags.sort();
                tags.dedup();
                for t in tags {
                    let mut inst: Vec<Inst> = c.mentions.iter().map(|m| (m.begin, m.end, 0, 0)).collect();
                    inst.sort();
                    inst.dedup();
                    out.push((t.clone(), inst));
                }
            }
        }
        Task::Re => {
            let mut triples: Vec<(&str, &str, &str)> = doc
                .relations
                .iter()
                .map(|r| (r.head.as_str(), r.kind.as_str(), r.tail.as_str()))
                .collect();
            triples.sort();
            triples.dedup();
            for (h, l, t) in triples {
                let hm = doc.cluster(h).map(|c| c.mentions.clone()).unwrap_or_default();
                let tm = doc.cluster(t).map(|c| c.mentions.clone()).unwrap_or_default();
                let mut inst = Vec::new();
                for a in &hm {
                    for b in &tm {
                        inst.push((a.begin, a.end, b.begin, b.end));
                    }
                }
                inst.sort();
                inst.dedup();
                out.push((l.to_string(), inst));
            }
        }
    }
    out
}

fn flat(clusters: &[(String, Vec<Inst>)]) -> Vec<(String, Inst)> {
    let mut v: Vec<(String, Inst)> = clusters
        .iter()
        .flat_map(|(l, inst)| inst.iter().map(move |i| (l.clone(), *i)))
        .collect();
    v.sort();
    v.dedup();
    v
}

fn ratio(num: f64, den: f64, both_empty: bool) -> f64 {
    if den > 0.0 {
        num / den
    } else if both_empty {
        1.0
    } else {
        0.0
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Brute-force micro precision, recall and F1 at one level.
pub fn oracle_prf(gold: &Document, pred: &Document, task: Task, level: Level) -> (f64, f64, f64) {
    let g = labelled_clusters(gold, task);
    let p = labelled_clusters(pred, task);
    let gm = flat(&g);
    let pm = flat(&p);
    let (tp_p, tp_g, n_p, n_g) = match level {
        Level::Mention => {
            let tp = pm.iter().filter(|x| gm.contains(x)).count() as f64;
            (tp, tp, pm.len() as f64, gm.len() as f64)
        }
        Level::Hard => {
            let tp_p = p.iter().filter(|x| g.contains(x)).count() as f64;
            let tp_g = g.iter().filter(|x| p.contains(x)).count() as f64;
            (tp_p, tp_g, p.len() as f64, g.len() as f64)
        }
        Level::Soft => {
            let credit = |clusters: &[(String, Vec<Inst>)], other: &[(String, Inst)]| -> f64 {
                clusters
                    .iter()
                    .filter(|(_, inst)| !inst.is_empty())
                    .map(|(l, inst)| {
                        let hit = inst.iter().filter(|i| other.contains(&(l.clone(), **i))).count();
                        hit as f64 / inst.len() as f64
                    })
                    .sum()
            };
            (credit(&p, &gm), credit(&g, &pm), p.len() as f64, g.len() as f64)
        }
    };
    let both_empty = n_p == 0.0 && n_g == 0.0;
    let pr = ratio(tp_p, n_p, both_empty);
    let rc = ratio(tp_g, n_g, both_empty);
    (pr, rc, f1(pr, rc))
}

/// Number of clusters (or related pairs) carrying `label` on one side.
pub fn clusters_with_label(doc: &Document, task: Task, label: &str) -> usize {
    labelled_clusters(doc, task).iter().filter(|(l, _)| l == label).count()
}

/// Naive forward chaining: every variable assignment over the entity
/// universe is re-checked each round until nothing new appears.
pub fn naive_closure(facts: &FactBase, rules: &[Rule]) -> FactBase {
    let mut out = facts.clone();
    let mut universe: BTreeSet<String> = BTreeSet::new();
    for f in &facts.binary {
        universe.insert(f.head.clone());
        universe.insert(f.tail.clone());
    }
    for (_, e) in &facts.unary {
        universe.insert(e.clone());
    }
    let universe: Vec<String> = universe.into_iter().collect();
    loop {
        let mut new = Vec::new();
        for rule in rules {
            let mut vars: Vec<String> = Vec::new();
            for atom in rule.body.iter().chain(std::iter::once(&rule.head)) {
                for t in &atom.args {
                    if let Term::Var(v) = t {
                        if !vars.contains(v) {
                            vars.push(v.clone());
                        }
                    }
                }
            }
            let n = universe.len();
            if n == 0 {
                continue;
            }
            let total = n.pow(vars.len() as u32);
            for code in 0..total {
                let mut c = code;
                let mut value = Vec::with_capacity(vars.len());
                for _ in 0..vars.len() {
                    value.push(universe[c % n].clone());
                    c /= n;
                }
                let resolve = |t: &Term| -> String {
                    match t {
                        Term::Const(s) => s.clone(),
                        Term::Var(v) => value[vars.iter().position(|x| x == v).unwrap()].clone(),
                    }
                };
                let holds = rule.body.iter().all(|atom| match atom.args.len() {
                    1 => out.unary.contains(&(atom.predicate.clone(), resolve(&atom.args[0]))),
                    _ => out.contains(&Fact::new(resolve(&atom.args[0]), &atom.predicate, resolve(&atom.args[1]))),
                });
                if holds {
                    let h = resolve(&rule.head.args[0]);
                    let t = resolve(&rule.head.args[1]);
                    let f = Fact::new(h.clone(), &rule.head.predicate, t.clone());
                    if h != t && !out.contains(&f) {
                        new.push(f);
                    }
                }
            }
        }
        if new.is_empty() {
            return out;
        }
        for f in new {
            out.binary.insert(f);
        }
    }
}

pub const FACT_PREDICATES: [&str; 8] = [
    "in0", "in2", "gpe0", "based_in2", "based_in0", "in0-x", "spouse_of", "member_of",
];
pub const FACT_TAGS: [&str; 2] = ["gpe0", "sport_player"];

/// At most 6 entities and 8 relation types, with a few unary tags.
pub fn random_fact_base<R: Rng>(rng: &mut R) -> FactBase {
    let n = rng.gen_range(1..=6);
    let mut fb = FactBase::new();
    for _ in 0..rng.gen_range(0..=12) {
        let h = format!("e{}", rng.gen_range(0..n));
        let t = format!("e{}", rng.gen_range(0..n));
        let p = FACT_PREDICATES.choose(rng).unwrap();
        fb.add_binary(&h, p, &t);
    }
    for _ in 0..rng.gen_range(0..=3) {
        let e = format!("e{}", rng.gen_range(0..n));
        fb.add_unary(FACT_TAGS.choose(rng).unwrap(), &e);
    }
    fb
}

/// Exact non-negative rational, for alignment sums that must compare equal.
#[derive(Debug, Clone, Copy)]
pub struct Frac(pub u128, pub u128);

impl Frac {
    pub const ZERO: Frac = Frac(0, 1);

    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            Self::gcd(b, a % b)
        }
    }

    pub fn new(n: u128, d: u128) -> Frac {
        let g = Self::gcd(n, d).max(1);
        Frac(n / g, d / g)
    }

    pub fn add(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

impl PartialEq for Frac {
    fn eq(&self, o: &Frac) -> bool {
        self.0 * o.1 == o.0 * self.1
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, o: &Frac) -> Option<std::cmp::Ordering> {
        (self.0 * o.1).partial_cmp(&(o.0 * self.1))
    }
}

pub fn phi4_exact<M: Ord>(a: &BTreeSet<M>, b: &BTreeSet<M>) -> Frac {
    Frac::new(2 * a.intersection(b).count() as u128, (a.len() + b.len()) as u128)
}

/// Best one-to-one alignment weight by exhaustive search.
pub fn brute_force_alignment(w: &[Vec<Frac>]) -> Frac {
    fn go(w: &[Vec<Frac>], row: usize, used: &mut Vec<bool>) -> Frac {
        if row == w.len() {
            return Frac::ZERO;
        }
        let mut best = go(w, row + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                let v = w[row][c].add(go(w, row + 1, used));
                used[c] = false;
                if v > best {
                    best = v;
                }
            }
        }
        best
    }
    let cols = w.first().map_or(0, Vec::len);
    go(w, 0, &mut vec![false; cols])
}

/// A random partition of a subset of `0..universe` into at most 6 clusters.
pub fn random_partition<R: Rng>(rng: &mut R, universe: usize) -> Vec<Vec<usize>> {
    let k = rng.gen_range(1..=6);
    let mut clusters = vec![Vec::new(); k];
    for m in 0..universe {
        if rng.gen_bool(0.85) {
            clusters[rng.gen_range(0..k)].push(m);
        }
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}
