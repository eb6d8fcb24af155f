//! Golden fixtures and oracle comparisons for the kernels.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Array3, ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::reference as oracle;
use super::*;

const FIXTURES: &str = include_str!("../../resources/kernel_fixtures.json");
const SEED: u64 = 0x0ec1e;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Deserialize)]
pub struct FixtureCase {
    pub name: String,
    pub kernel: String,
    pub inputs: BTreeMap<String, Value>,
    pub expected: Value,
}

#[derive(Debug, Deserialize)]
struct FixtureFile {
    cases: Vec<FixtureCase>,
}

pub fn builtin_fixtures() -> Vec<FixtureCase> {
    serde_json::from_str::<FixtureFile>(FIXTURES)
        .expect("bundled fixtures parse")
        .cases
}

pub fn parse_fixtures(text: &str) -> Result<Vec<FixtureCase>> {
    serde_json::from_str::<FixtureFile>(text)
        .map(|f| f.cases)
        .map_err(|e| Error::Parse {
            offset: 0,
            line: e.line(),
            message: e.to_string(),
        })
}

fn field<'a>(case: &'a FixtureCase, key: &str) -> Result<&'a Value> {
    case.inputs
        .get(key)
        .ok_or_else(|| Error::InvalidArgument(format!("fixture {}: missing input {key}", case.name)))
}

fn bad(case: &FixtureCase, key: &str) -> Error {
    Error::InvalidArgument(format!("fixture {}: malformed input {key}", case.name))
}

fn usize_of(case: &FixtureCase, key: &str) -> Result<usize> {
    field(case, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| bad(case, key))
}

fn array_of(case: &FixtureCase, key: &str) -> Result<ArrayD<f64>> {
    let v = field(case, key)?;
    let mut shape = Vec::new();
    let mut cur = v;
    while let Value::Array(items) = cur {
        shape.push(items.len());
        match items.first() {
            Some(first) => cur = first,
            None => break,
        }
    }
    let data = flatten(v);
    ArrayD::from_shape_vec(IxDyn(&shape), data).map_err(|_| bad(case, key))
}

fn vec1(case: &FixtureCase, key: &str) -> Result<Array1<f64>> {
    array_of(case, key)?
        .into_dimensionality()
        .map_err(|_| bad(case, key))
}

fn vec2(case: &FixtureCase, key: &str) -> Result<Array2<f64>> {
    array_of(case, key)?
        .into_dimensionality()
        .map_err(|_| bad(case, key))
}

fn vec3(case: &FixtureCase, key: &str) -> Result<Array3<f64>> {
    array_of(case, key)?
        .into_dimensionality()
        .map_err(|_| bad(case, key))
}

fn index_lists(case: &FixtureCase, key: &str) -> Result<Vec<Vec<usize>>> {
    serde_json::from_value(field(case, key)?.clone()).map_err(|_| bad(case, key))
}

fn flatten(v: &Value) -> Vec<f64> {
    match v {
        Value::Number(n) => vec![n.as_f64().unwrap_or(f64::NAN)],
        Value::Array(items) => items.iter().flat_map(flatten).collect(),
        Value::Object(map) => map.values().flat_map(flatten).collect(),
        _ => vec![f64::NAN],
    }
}

fn to_value<T: Serialize>(x: T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn gate_of(case: &FixtureCase) -> Result<GateTransform> {
    GateTransform::new(vec2(case, "gate_weight")?, vec1(case, "gate_bias")?)
}

fn nested2(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn nested3(a: &Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    a.outer_iter().map(|m| m.outer_iter().map(|r| r.to_vec()).collect()).collect()
}

/// Evaluates a fixture case and returns the kernel output as JSON.
pub fn evaluate(case: &FixtureCase) -> Result<Value> {
    Ok(match case.kernel.as_str() {
        "span_count" => json!(span_count(usize_of(case, "num_tokens")?, usize_of(case, "w_max")?)?),
        "augment_with_pruner" => {
            let s = ScoreSet {
                mention: vec2(case, "mention")?,
                coref: vec2(case, "coref")?,
                relation: vec3(case, "relation")?,
                pruner: vec1(case, "pruner")?,
                pruned: serde_json::from_value(field(case, "pruned")?.clone())
                    .map_err(|_| bad(case, "pruned"))?,
            };
            let a = augment_with_pruner(&s)?;
            json!({
                "coref": nested2(&a.coref),
                "mention": nested2(&a.mention),
                "relation": nested3(&a.relation),
            })
        }
        "multilabel_bce_loss" => json!(multilabel_bce_loss(
            array_of(case, "scores")?.view(),
            array_of(case, "indicators")?.view()
        )?),
        "coref_marginal_loss" => json!(coref_marginal_loss(
            vec2(case, "coref")?.view(),
            &index_lists(case, "gold")?
        )?),
        "joint_loss" => {
            let l = vec1(case, "losses")?;
            let w = vec1(case, "weights")?;
            if l.len() != 3 || w.len() != 3 {
                return Err(bad(case, "losses"));
            }
            json!(joint_loss(
                TaskLosses { mention: l[0], coref: l[1], relation: l[2] },
                LossWeights { entity: w[0], coref: w[1], relation: w[2] }
            ))
        }
        "coref_confidence" => to_value(coref_confidence(vec2(case, "coref")?.view(), usize_of(case, "j")?)?.to_vec()),
        "coref_update_vector" => to_value(
            coref_update_vector(vec1(case, "confidence")?.view(), vec2(case, "g")?.view(), usize_of(case, "j")?)?.to_vec(),
        ),
        "relation_update_vector" => to_value(
            relation_update_vector(
                vec3(case, "relation")?.view(),
                vec2(case, "projection")?.view(),
                vec2(case, "g")?.view(),
                usize_of(case, "j")?,
            )?
            .to_vec(),
        ),
        "attention_propagation" => to_value(nested2(&attention_propagation(
            vec2(case, "g")?.view(),
            vec2(case, "att")?.view(),
            &gate_of(case)?,
        )?)),
        "gated_span_update" => to_value(
            gated_span_update(vec1(case, "g")?.view(), vec1(case, "u")?.view(), &gate_of(case)?)?.to_vec(),
        ),
        other => return Err(Error::InvalidArgument(format!("unknown kernel {other}"))),
    })
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| if x.is_nan() || y.is_nan() { f64::INFINITY } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub kernel: String,
    /// Fixture name, or the number of random trials for oracle checks.
    pub case: String,
    pub max_abs_dev: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub tolerance: f64,
    pub fixtures: Vec<Check>,
    pub oracles: Vec<Check>,
    pub passed: bool,
}

pub fn run_fixtures(cases: &[FixtureCase]) -> Vec<Check> {
    cases
        .iter()
        .map(|c| {
            let dev = match evaluate(c) {
                Ok(v) => max_dev(&flatten(&v), &flatten(&c.expected)),
                Err(_) => f64::INFINITY,
            };
            Check {
                kernel: c.kernel.clone(),
                case: c.name.clone(),
                max_abs_dev: dev,
                passed: dev < TOLERANCE,
            }
        })
        .collect()
}

struct Draw {
    rng: ChaCha8Rng,
}

impl Draw {
    fn new(seed: u64) -> Self {
        Draw {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn size(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    fn value(&mut self) -> f64 {
        self.rng.gen_range(-3.0..3.0)
    }

    fn matrix(&mut self, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| self.value())
    }

    fn tensor(&mut self, a: usize, b: usize, c: usize) -> Array3<f64> {
        Array3::from_shape_fn((a, b, c), |_| self.value())
    }

    fn vector(&mut self, n: usize) -> Array1<f64> {
        Array1::from_shape_fn(n, |_| self.value())
    }

    fn indicators(&mut self, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| if self.rng.gen_bool(0.5) { 1.0 } else { 0.0 })
    }

    fn gold(&mut self, p: usize) -> Vec<Vec<usize>> {
        (0..p)
            .map(|j| {
                let mut g: Vec<usize> = (0..=j).filter(|_| self.rng.gen_bool(0.4)).collect();
                if g.is_empty() {
                    g.push(self.size(0, j));
                }
                g
            })
            .collect()
    }
}

#[derive(Default)]
struct Tracker {
    devs: BTreeMap<&'static str, (usize, f64)>,
}

impl Tracker {
    fn record(&mut self, kernel: &'static str, dev: f64) {
        let e = self.devs.entry(kernel).or_insert((0, 0.0));
        e.0 += 1;
        e.1 = if dev.is_nan() { f64::INFINITY } else { e.1.max(dev) };
    }

    fn record_result(&mut self, kernel: &'static str, got: Result<Vec<f64>>, want: &[f64]) {
        let dev = got.map_or(f64::INFINITY, |g| max_dev(&g, want));
        self.record(kernel, dev);
    }
}

/// Compares every kernel with its loop transliteration on `trials` random
/// problems with at most 4 pruned spans and vectors of size at most 3,
/// and checks span counts against enumeration for up to 50 tokens.
pub fn run_oracles(trials: usize) -> Vec<Check> {
    let mut t = Tracker::default();
    let mut d = Draw::new(SEED);

    for tokens in 1..=50 {
        for w in 1..=5.min(tokens) {
            let got = span_count(tokens, w).map(|c| vec![c as f64]);
            let enumerated = enumerate_spans(tokens, w).len() as f64;
            t.record_result("span_count", got, &[oracle::span_count(tokens, w) as f64]);
            t.record("enumerate_spans", (enumerated - oracle::span_count(tokens, w) as f64).abs());
        }
    }

    for _ in 0..trials {
        let p = d.size(1, 4);
        let n = d.size(1, 3);
        let l = d.size(1, 3);
        let s = p + d.size(0, 2);

        let mut pruned: Vec<usize> = (0..s).collect();
        while pruned.len() > p {
            let k = d.size(0, pruned.len() - 1);
            pruned.remove(k);
        }
        let scores = ScoreSet {
            mention: d.matrix(s, l),
            coref: d.matrix(p, p),
            relation: d.tensor(p, p, l),
            pruner: d.vector(s),
            pruned: pruned.clone(),
        };
        let rel_nested = nested3(&scores.relation);
        let (m, c, r) = oracle::augment(
            &nested2(&scores.mention),
            &nested2(&scores.coref),
            &rel_nested,
            &scores.pruner.to_vec(),
            &pruned,
        );
        let want: Vec<f64> = m
            .concat()
            .into_iter()
            .chain(c.concat())
            .chain(r.concat().concat())
            .collect();
        let got = augment_with_pruner(&scores).map(|a| {
            a.mention
                .iter()
                .chain(a.coref.iter())
                .chain(a.relation.iter())
                .copied()
                .collect()
        });
        t.record_result("augment_with_pruner", got, &want);

        let ind = d.indicators(s, l);
        let got = multilabel_bce_loss(scores.mention.view().into_dyn(), ind.view().into_dyn()).map(|v| vec![v]);
        let want = oracle::bce(&scores.mention.iter().copied().collect::<Vec<_>>(), &ind.iter().copied().collect::<Vec<_>>());
        t.record_result("multilabel_bce_loss", got, &[want]);

        let gold = d.gold(p);
        let got = coref_marginal_loss(scores.coref.view(), &gold).map(|v| vec![v]);
        t.record_result("coref_marginal_loss", got, &[oracle::coref_loss(&nested2(&scores.coref), &gold)]);

        let lw = [d.value(), d.value(), d.value()];
        let ww = [d.value().abs(), d.value().abs(), d.value().abs()];
        let got = joint_loss(
            TaskLosses { mention: lw[0], coref: lw[1], relation: lw[2] },
            LossWeights { entity: ww[0], coref: ww[1], relation: ww[2] },
        );
        t.record("joint_loss", (got - oracle::joint(lw, ww)).abs());

        let g = d.matrix(p, n);
        let g_nested = nested2(&g);
        let coref_nested = nested2(&scores.coref);
        for j in 0..p {
            let conf = coref_confidence(scores.coref.view(), j);
            let want_conf = oracle::confidence(&coref_nested, j);
            let sum_dev = conf.as_ref().map_or(f64::INFINITY, |c| (c.sum() - 1.0).abs());
            t.record("softmax_row_sum", sum_dev);
            t.record_result("coref_confidence", conf.as_ref().map(|c| c.to_vec()).map_err(|e| Error::Shape(e.to_string())), &want_conf);
            let got = coref_update_vector(Array1::from(want_conf.clone()).view(), g.view(), j).map(|u| u.to_vec());
            t.record_result("coref_update_vector", got, &oracle::coref_update(&want_conf, &g_nested, j));

            let a_r = d.matrix(n, l);
            let got = relation_update_vector(scores.relation.view(), a_r.view(), g.view(), j).map(|u| u.to_vec());
            t.record_result("relation_update_vector", got, &oracle::relation_update(&rel_nested, &nested2(&a_r), &g_nested, j));
        }

        let att = d.matrix(p, p);
        let gate = GateTransform::new(d.matrix(n, 2 * n), d.vector(n)).expect("finite draws");
        let att_nested = nested2(&att);
        let w_nested = nested2(&gate.weight);
        let bias = gate.bias.to_vec();
        for row in attention_weights(att.view()).outer_iter() {
            t.record("softmax_row_sum", (row.sum() - 1.0).abs());
        }
        let want: Vec<f64> = (0..p)
            .flat_map(|i| {
                let u = oracle::attention_update(&att_nested, &g_nested, i);
                oracle::gated_update(&g_nested[i], &u, &w_nested, &bias)
            })
            .collect();
        let got = attention_propagation(g.view(), att.view(), &gate).map(|x| x.iter().copied().collect());
        t.record_result("attention_propagation", got, &want);

        let u = d.vector(n);
        let got = gated_span_update(g.row(0), u.view(), &gate).map(|x| x.to_vec());
        t.record_result("gated_span_update", got, &oracle::gated_update(&g_nested[0], &u.to_vec(), &w_nested, &bias));
    }

    t.devs
        .into_iter()
        .map(|(k, (n, dev))| Check {
            kernel: k.to_owned(),
            case: format!("{n} comparisons"),
            max_abs_dev: dev,
            passed: dev < TOLERANCE,
        })
        .collect()
}

pub fn run_selftest() -> SelftestReport {
    let fixtures = run_fixtures(&builtin_fixtures());
    let oracles = run_oracles(500);
    let passed = fixtures.iter().chain(&oracles).all(|c| c.passed);
    SelftestReport {
        tolerance: TOLERANCE,
        fixtures,
        oracles,
        passed,
    }
}
