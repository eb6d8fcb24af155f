//! Horn-rule consistency checks over entity-level relations.
//!
//! Facts are read off one document: every relation triple becomes a binary
//! fact and every cluster tag a unary one, so `gpe0(Y)` holds when cluster
//! `Y` carries the tag `gpe0`. Rules come from a plain-text resource, one
//! `id: body & body => head` clause per line.
//!
//! [`closure`] computes the least fixpoint by semi-naive forward chaining.
//! Derived facts whose head and tail coincide are dropped: documents never
//! relate an entity to itself, and a rule such as the symmetric `vs` would
//! otherwise produce such facts from chains that loop back.

mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{Document, RelationTriple};
use crate::error::{Error, Result};

pub use syntax::{parse_rule, parse_rules, Atom, Rule, Term};

const BUILTIN_RULES: &str = include_str!("../../resources/rules.txt");

/// The 41 consistency rules shipped with the crate.
pub fn builtin_ruleset() -> Vec<Rule> {
    parse_rules(BUILTIN_RULES).expect("bundled rule file parses")
}

pub fn load_rules(path: &Path) -> Result<Vec<Rule>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rules(&text)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Fact {
    pub head: String,
    pub predicate: String,
    pub tail: String,
}

impl Fact {
    pub fn new(head: impl Into<String>, predicate: impl Into<String>, tail: impl Into<String>) -> Self {
        Fact {
            head: head.into(),
            predicate: predicate.into(),
            tail: tail.into(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.predicate, self.head, self.tail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactBase {
    pub binary: BTreeSet<Fact>,
    /// `(predicate, entity)` pairs.
    pub unary: BTreeSet<(String, String)>,
}

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_document(doc: &Document) -> Self {
        let binary = doc
            .relations
            .iter()
            .map(|r| Fact::new(&r.head, &r.kind, &r.tail))
            .collect();
        let unary = doc
            .clusters
            .iter()
            .flat_map(|c| c.tags.iter().map(|t| (t.clone(), c.id.clone())))
            .collect();
        FactBase { binary, unary }
    }

    pub fn add_binary(&mut self, head: &str, predicate: &str, tail: &str) -> bool {
        self.binary.insert(Fact::new(head, predicate, tail))
    }

    pub fn add_unary(&mut self, predicate: &str, entity: &str) -> bool {
        self.unary.insert((predicate.to_owned(), entity.to_owned()))
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.binary.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.binary.len() + self.unary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binary.is_empty() && self.unary.is_empty()
    }

    fn entities(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for f in &self.binary {
            out.insert(f.head.as_str());
            out.insert(f.tail.as_str());
        }
        for (_, e) in &self.unary {
            out.insert(e.as_str());
        }
        out
    }
}

/// A variable assignment that grounds a rule.
pub type Substitution = BTreeMap<String, String>;

#[derive(Default)]
struct Index<'a> {
    binary: BTreeMap<&'a str, Vec<(&'a str, &'a str)>>,
    unary: BTreeMap<&'a str, Vec<&'a str>>,
}

impl<'a> Index<'a> {
    fn add_binary(&mut self, f: &'a Fact) {
        self.binary
            .entry(f.predicate.as_str())
            .or_default()
            .push((f.head.as_str(), f.tail.as_str()));
    }

    fn build(binary: impl IntoIterator<Item = &'a Fact>, unary: &'a BTreeSet<(String, String)>) -> Self {
        let mut ix = Index::default();
        for f in binary {
            ix.add_binary(f);
        }
        for (p, e) in unary {
            ix.unary.entry(p.as_str()).or_default().push(e.as_str());
        }
        ix
    }
}

fn bind(term: &Term, value: &str, sub: &mut Substitution, trail: &mut Vec<String>) -> bool {
    match term {
        Term::Const(c) => c == value,
        Term::Var(v) => match sub.get(v) {
            Some(bound) => bound == value,
            None => {
                sub.insert(v.clone(), value.to_owned());
                trail.push(v.clone());
                true
            }
        },
    }
}

/// Enumerates every substitution satisfying `body`. Binary atom `pos`
/// draws from `delta` when given, all other atoms from `full`.
fn ground_body(
    body: &[Atom],
    full: &Index,
    delta: Option<(usize, &Index)>,
    out: &mut Vec<Substitution>,
) {
    fn go(
        body: &[Atom],
        i: usize,
        full: &Index,
        delta: Option<(usize, &Index)>,
        sub: &mut Substitution,
        out: &mut Vec<Substitution>,
    ) {
        let Some(atom) = body.get(i) else {
            out.push(sub.clone());
            return;
        };
        let source = match delta {
            Some((pos, d)) if pos == i => d,
            _ => full,
        };
        let mut trail = Vec::new();
        let mut attempt = |values: &[&str], sub: &mut Substitution| {
            let ok = atom
                .args
                .iter()
                .zip(values)
                .all(|(t, v)| bind(t, v, sub, &mut trail));
            if ok {
                go(body, i + 1, full, delta, sub, out);
            }
            for v in trail.drain(..) {
                sub.remove(&v);
            }
        };
        if atom.arity() == 2 {
            if let Some(pairs) = source.binary.get(atom.predicate.as_str()) {
                for &(h, t) in pairs {
                    attempt(&[h, t], sub);
                }
            }
        } else if let Some(ents) = source.unary.get(atom.predicate.as_str()) {
            for &e in ents {
                attempt(&[e], sub);
            }
        }
    }
    go(body, 0, full, delta, &mut Substitution::new(), out);
}

fn instantiate(head: &Atom, sub: &Substitution) -> Fact {
    let value = |t: &Term| match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => sub[v].clone(),
    };
    Fact {
        head: value(&head.args[0]),
        predicate: head.predicate.clone(),
        tail: value(&head.args[1]),
    }
}

/// Every grounding of `rule` against `facts` whose head is not reflexive,
/// paired with the instantiated head.
pub fn groundings(rule: &Rule, facts: &FactBase) -> Vec<(Substitution, Fact)> {
    let ix = Index::build(&facts.binary, &facts.unary);
    let mut subs = Vec::new();
    ground_body(&rule.body, &ix, None, &mut subs);
    let mut out: Vec<_> = subs
        .into_iter()
        .map(|s| {
            let f = instantiate(&rule.head, &s);
            (s, f)
        })
        .filter(|(_, f)| f.head != f.tail)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Upper bound on the number of facts any closure of `facts` can add.
fn addable_bound(facts: &FactBase, rules: &[Rule]) -> usize {
    let mut universe: BTreeSet<&str> = facts.entities();
    let mut heads = BTreeSet::new();
    for r in rules {
        heads.insert(r.head.predicate.as_str());
        for a in r.body.iter().chain([&r.head]) {
            for t in &a.args {
                if let Term::Const(c) = t {
                    universe.insert(c);
                }
            }
        }
    }
    let n = universe.len();
    heads.len().saturating_mul(n).saturating_mul(n)
}

/// Least fixpoint of `rules` over `facts`.
pub fn closure(facts: &FactBase, rules: &[Rule]) -> Result<FactBase> {
    let cap = addable_bound(facts, rules) + 1;
    let mut known = facts.binary.clone();
    let mut delta: BTreeSet<Fact> = BTreeSet::new();

    // first round: naive evaluation, so unary-only bodies fire too
    {
        let ix = Index::build(&known, &facts.unary);
        let mut subs = Vec::new();
        for r in rules {
            subs.clear();
            ground_body(&r.body, &ix, None, &mut subs);
            for s in &subs {
                let f = instantiate(&r.head, s);
                if f.head != f.tail && !known.contains(&f) {
                    delta.insert(f);
                }
            }
        }
    }

    let mut rounds = 0;
    while !delta.is_empty() {
        rounds += 1;
        if rounds > cap {
            return Err(Error::FixpointCap(cap));
        }
        known.extend(delta.iter().cloned());
        let full = Index::build(&known, &facts.unary);
        let dix = Index::build(&delta, &facts.unary);
        let mut next = BTreeSet::new();
        let mut subs = Vec::new();
        for r in rules {
            for (pos, atom) in r.body.iter().enumerate() {
                if atom.arity() != 2 || !dix.binary.contains_key(atom.predicate.as_str()) {
                    continue;
                }
                subs.clear();
                ground_body(&r.body, &full, Some((pos, &dix)), &mut subs);
                for s in &subs {
                    let f = instantiate(&r.head, s);
                    if f.head != f.tail && !known.contains(&f) {
                        next.insert(f);
                    }
                }
            }
        }
        delta = next;
    }
    Ok(FactBase {
        binary: known,
        unary: facts.unary.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub document: String,
    pub rule: String,
    pub missing: Fact,
    pub substitution: Substitution,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: rule {} requires {} (", self.document, self.rule, self.missing)?;
        for (i, (k, v)) in self.substitution.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

/// Per-rule tallies over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RuleTally {
    pub groundings: usize,
    pub violations: usize,
}

impl RuleTally {
    pub fn violation_rate(&self) -> f64 {
        if self.groundings == 0 {
            0.0
        } else {
            self.violations as f64 / self.groundings as f64
        }
    }
}

/// One-step check: groundings of each rule against the annotated facts
/// whose head is not annotated. Derived facts are not chained.
pub fn check_violations(doc: &Document, rules: &[Rule]) -> Vec<Violation> {
    check_with_tally(doc, rules, &mut BTreeMap::new())
}

pub fn check_with_tally(
    doc: &Document,
    rules: &[Rule],
    tally: &mut BTreeMap<String, RuleTally>,
) -> Vec<Violation> {
    let facts = FactBase::from_document(doc);
    let mut out = Vec::new();
    for r in rules {
        let entry = tally.entry(r.id.clone()).or_default();
        for (sub, head) in groundings(r, &facts) {
            entry.groundings += 1;
            if !facts.contains(&head) {
                entry.violations += 1;
                out.push(Violation {
                    document: doc.id.clone(),
                    rule: r.id.clone(),
                    missing: head,
                    substitution: sub,
                });
            }
        }
    }
    out
}

/// Adds every relation implied by `rules` to a copy of `doc`. Derived facts
/// that mention something other than a cluster of `doc` are left out.
pub fn materialize(doc: &Document, rules: &[Rule]) -> Result<(Document, usize)> {
    let facts = FactBase::from_document(doc);
    let closed = closure(&facts, rules)?;
    let ids: BTreeSet<&str> = doc.clusters.iter().map(|c| c.id.as_str()).collect();
    let mut out = doc.clone();
    let mut added = 0;
    for f in closed.binary.difference(&facts.binary) {
        if ids.contains(f.head.as_str()) && ids.contains(f.tail.as_str()) {
            out.relations
                .push(RelationTriple::new(&f.head, &f.predicate, &f.tail));
            added += 1;
        }
    }
    Ok((out, added))
}
