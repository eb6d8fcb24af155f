//! Numeric kernels of a span-based joint IE model.
//!
//! The scoring networks themselves are out of scope: every kernel takes
//! their outputs as plain score arrays. Spans are indexed from 0. The pruned
//! span set `P` is kept in text order and mapped back to the full span list
//! `S` through [`ScoreSet::pruned`].
//!
//! Pairwise score layouts put the first span of the pair on the row:
//! `coref[[i, j]]` scores antecedent `s_i` for span `s_j` (only `i <= j` is
//! used), `relation[[i, j, l]]` scores type `l` for the ordered pair
//! `(s_i, s_j)`, and `att[[i, j]]` is the attention of `s_i` on `s_j`.

pub mod reference;
pub mod selftest;

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, ArrayViewD, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::corpus::Mention;
use crate::error::{Error, Result};

fn shape_err(what: impl Into<String>) -> Error {
    Error::Shape(what.into())
}

/// Number of spans of width `1..=w_max` over `num_tokens` tokens.
pub fn span_count(num_tokens: usize, w_max: usize) -> Result<u64> {
    if w_max == 0 || w_max > num_tokens {
        return Err(Error::InvalidArgument(format!(
            "span width {w_max} outside 1..={num_tokens}"
        )));
    }
    Ok((1..=w_max).map(|k| (num_tokens - k + 1) as u64).sum())
}

/// All spans of width at most `w_max`, ordered by start then width.
pub fn enumerate_spans(num_tokens: usize, w_max: usize) -> Vec<Mention> {
    let mut out = Vec::new();
    for b in 0..num_tokens {
        for e in b + 1..=(b + w_max).min(num_tokens) {
            out.push(Mention::new(b, e));
        }
    }
    out
}

/// Indices of the `k` highest pruner scores, returned in text order.
/// Ties prefer the earlier span.
pub fn prune_top_k(pruner: ArrayView1<f64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pruner.len()).collect();
    idx.sort_by(|&a, &b| pruner[b].total_cmp(&pruner[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Numerically stable softmax of a vector.
pub fn softmax(xs: ArrayView1<f64>) -> Array1<f64> {
    let m = xs.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e = xs.mapv(|x| (x - m).exp());
    let z = e.sum();
    e / z
}

/// Raw scores for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    /// `|S| × L_T`
    pub mention: Array2<f64>,
    /// `|P| × |P|`
    pub coref: Array2<f64>,
    /// `|P| × |P| × L_R`
    pub relation: Array3<f64>,
    /// `|S|`
    pub pruner: Array1<f64>,
    /// Position in `S` of each pruned span, ascending.
    pub pruned: Vec<usize>,
}

impl ScoreSet {
    pub fn num_spans(&self) -> usize {
        self.mention.nrows()
    }

    pub fn num_pruned(&self) -> usize {
        self.pruned.len()
    }

    pub fn check(&self) -> Result<()> {
        let s = self.num_spans();
        let p = self.num_pruned();
        if self.pruner.len() != s {
            return Err(shape_err(format!("pruner has {} scores for {s} spans", self.pruner.len())));
        }
        if self.coref.dim() != (p, p) {
            return Err(shape_err(format!("coref is {:?}, expected {p}x{p}", self.coref.dim())));
        }
        let (a, b, _) = self.relation.dim();
        if (a, b) != (p, p) {
            return Err(shape_err(format!("relation is {:?}, expected {p}x{p}xL", self.relation.dim())));
        }
        if self.pruned.iter().any(|&i| i >= s) || self.pruned.windows(2).any(|w| w[0] >= w[1]) {
            return Err(shape_err("pruned indices must be ascending positions in S"));
        }
        Ok(())
    }
}

/// Adds the pruner score of the first span to its mention, coreference and
/// relation scores.
pub fn augment_with_pruner(scores: &ScoreSet) -> Result<ScoreSet> {
    scores.check()?;
    let mut out = scores.clone();
    for (mut row, &p) in out.mention.axis_iter_mut(Axis(0)).zip(&scores.pruner) {
        row += p;
    }
    for (k, &s) in scores.pruned.iter().enumerate() {
        let p = scores.pruner[s];
        out.coref.row_mut(k).mapv_inplace(|x| x + p);
        out.relation.index_axis_mut(Axis(0), k).mapv_inplace(|x| x + p);
    }
    Ok(out)
}

/// Summed binary cross-entropy, `−Σ [I log σ(x) + (1−I) log(1−σ(x))]`.
pub fn multilabel_bce_loss(scores: ArrayViewD<f64>, indicators: ArrayViewD<f64>) -> Result<f64> {
    if scores.shape() != indicators.shape() {
        return Err(shape_err(format!(
            "scores {:?} vs indicators {:?}",
            scores.shape(),
            indicators.shape()
        )));
    }
    let mut total = 0.0;
    for (&x, &i) in scores.iter().zip(&indicators) {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite score {x}")));
        }
        if i == 1.0 {
            total += softplus(-x);
        } else if i == 0.0 {
            total += softplus(x);
        } else {
            return Err(Error::InvalidArgument(format!("indicator {i} is not 0 or 1")));
        }
    }
    Ok(total)
}

fn check_gold(gold: &[Vec<usize>], p: usize) -> Result<()> {
    if gold.len() != p {
        return Err(shape_err(format!("{} gold antecedent sets for {p} spans", gold.len())));
    }
    for (j, g) in gold.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::InvalidArgument(format!("span {j} has no gold antecedent")));
        }
        if let Some(i) = g.iter().find(|&&i| i > j) {
            return Err(Error::InvalidArgument(format!("antecedent {i} follows span {j}")));
        }
    }
    Ok(())
}

/// Negative marginal log-likelihood of the gold antecedents. `gold[j]`
/// lists antecedents of span `j` among `0..=j`; `j` itself marks a span
/// without antecedent.
pub fn coref_marginal_loss(coref: ArrayView2<f64>, gold: &[Vec<usize>]) -> Result<f64> {
    let p = coref.nrows();
    if coref.ncols() != p {
        return Err(shape_err("coref scores must be square"));
    }
    check_gold(gold, p)?;
    let mut total = 0.0;
    for (j, g) in gold.iter().enumerate() {
        let col = coref.column(j);
        let mut uniq = g.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let num = log_sum_exp(uniq.iter().map(|&i| col[i]));
        let den = log_sum_exp((0..=j).map(|i| col[i]));
        // clamp rounding noise when the gold set is every antecedent
        total += (den - num).max(0.0);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TaskLosses {
    pub mention: f64,
    pub coref: f64,
    pub relation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub entity: f64,
    pub coref: f64,
    pub relation: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            entity: 1.0,
            coref: 1.0,
            relation: 1.0,
        }
    }
}

pub fn joint_loss(losses: TaskLosses, w: LossWeights) -> f64 {
    w.entity * losses.mention + w.coref * losses.coref + w.relation * losses.relation
}

/// Softmax over antecedents `0..=j` of span `j`; later entries are 0.
pub fn coref_confidence(coref: ArrayView2<f64>, j: usize) -> Result<Array1<f64>> {
    let p = coref.nrows();
    if coref.ncols() != p {
        return Err(shape_err("coref scores must be square"));
    }
    if j >= p {
        return Err(Error::InvalidArgument(format!("span {j} out of {p}")));
    }
    let mut out = Array1::zeros(p);
    let sm = softmax(coref.column(j).slice(ndarray::s![..=j]));
    out.slice_mut(ndarray::s![..=j]).assign(&sm);
    Ok(out)
}

fn check_vectors(g: ArrayView2<f64>, p: usize) -> Result<()> {
    if g.nrows() != p {
        return Err(shape_err(format!("{} span vectors for {p} spans", g.nrows())));
    }
    Ok(())
}

/// `Σ_{i<=j} P_C(s_i, s_j) g_i`.
pub fn coref_update_vector(conf: ArrayView1<f64>, g: ArrayView2<f64>, j: usize) -> Result<Array1<f64>> {
    check_vectors(g, conf.len())?;
    if j >= conf.len() {
        return Err(Error::InvalidArgument(format!("span {j} out of {}", conf.len())));
    }
    let head = conf.slice(ndarray::s![..=j]);
    if (head.sum() - 1.0).abs() > 1e-9 || head.iter().any(|&c| c < 0.0) {
        return Err(Error::InvalidArgument("confidences do not form a distribution".into()));
    }
    Ok(head.dot(&g.slice(ndarray::s![..=j, ..])))
}

/// `Σ_i (A_R ReLU(Φ_relation(s_i, s_j))) ⊙ g_i`.
pub fn relation_update_vector(
    relation: ArrayView3<f64>,
    a_r: ArrayView2<f64>,
    g: ArrayView2<f64>,
    j: usize,
) -> Result<Array1<f64>> {
    let (p, p2, l) = relation.dim();
    if p != p2 {
        return Err(shape_err("relation scores must be |P|x|P|xL"));
    }
    check_vectors(g, p)?;
    let n = g.ncols();
    if a_r.dim() != (n, l) {
        return Err(shape_err(format!("projection is {:?}, expected {n}x{l}", a_r.dim())));
    }
    if j >= p {
        return Err(Error::InvalidArgument(format!("span {j} out of {p}")));
    }
    let mut u = Array1::zeros(n);
    for i in 0..p {
        let act = relation.slice(ndarray::s![i, j, ..]).mapv(|x| x.max(0.0));
        u += &(a_r.dot(&act) * g.row(i));
    }
    Ok(u)
}

/// Row-wise softmax of attention scores.
pub fn attention_weights(att: ArrayView2<f64>) -> Array2<f64> {
    let mut out = att.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let sm = softmax(row.view());
        row.assign(&sm);
    }
    out
}

/// The single-layer gate network: `f = σ(W [g; u] + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateTransform {
    /// `n × 2n`
    pub weight: Array2<f64>,
    /// `n`
    pub bias: Array1<f64>,
}

impl GateTransform {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        let n = bias.len();
        if weight.dim() != (n, 2 * n) {
            return Err(shape_err(format!("gate weight {:?}, expected {n}x{}", weight.dim(), 2 * n)));
        }
        if weight.iter().chain(&bias).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("gate parameters must be finite".into()));
        }
        Ok(GateTransform { weight, bias })
    }

    /// All-zero parameters: the gate is exactly 0.5.
    pub fn zeros(n: usize) -> Self {
        GateTransform {
            weight: Array2::zeros((n, 2 * n)),
            bias: Array1::zeros(n),
        }
    }

    /// Zero weights with a constant bias.
    pub fn constant(n: usize, bias: f64) -> Self {
        GateTransform {
            weight: Array2::zeros((n, 2 * n)),
            bias: Array1::from_elem(n, bias),
        }
    }

    pub fn dim(&self) -> usize {
        self.bias.len()
    }

    pub fn gate(&self, g: ArrayView1<f64>, u: ArrayView1<f64>) -> Result<Array1<f64>> {
        let n = self.dim();
        if g.len() != n || u.len() != n {
            return Err(shape_err(format!("gate of size {n} got {} and {}", g.len(), u.len())));
        }
        let w = &self.weight;
        let z = w.slice(ndarray::s![.., ..n]).dot(&g) + w.slice(ndarray::s![.., n..]).dot(&u) + &self.bias;
        Ok(z.mapv(sigmoid))
    }
}

/// `f ⊙ g + (1 − f) ⊙ u` with `f` from the gate.
pub fn gated_span_update(g: ArrayView1<f64>, u: ArrayView1<f64>, gate: &GateTransform) -> Result<Array1<f64>> {
    let f = gate.gate(g, u)?;
    let mut out = Array1::zeros(g.len());
    Zip::from(&mut out)
        .and(&f)
        .and(&g)
        .and(&u)
        .for_each(|o, &f, &g, &u| *o = f * g + (1.0 - f) * u);
    Ok(out)
}

fn gated_rows(g: ArrayView2<f64>, u: ArrayView2<f64>, gate: &GateTransform) -> Result<Array2<f64>> {
    let mut out = Array2::zeros(g.raw_dim());
    for (k, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        row.assign(&gated_span_update(g.row(k), u.row(k), gate)?);
    }
    Ok(out)
}

/// Produces one update vector per span from the current representations.
pub trait UpdateSource {
    fn updates(&self, g: ArrayView2<f64>) -> Result<Array2<f64>>;
}

/// Attention propagation: `u_A(s_i) = Σ_j P_A(s_i, s_j) g_j`.
pub struct AttentionUpdates<'a> {
    pub att: ArrayView2<'a, f64>,
}

impl UpdateSource for AttentionUpdates<'_> {
    fn updates(&self, g: ArrayView2<f64>) -> Result<Array2<f64>> {
        let p = g.nrows();
        if self.att.dim() != (p, p) {
            return Err(shape_err(format!("attention is {:?}, expected {p}x{p}", self.att.dim())));
        }
        Ok(attention_weights(self.att).dot(&g))
    }
}

/// Coreference propagation over pruner-augmented coreference scores.
pub struct CorefUpdates<'a> {
    pub coref: ArrayView2<'a, f64>,
}

impl UpdateSource for CorefUpdates<'_> {
    fn updates(&self, g: ArrayView2<f64>) -> Result<Array2<f64>> {
        let p = g.nrows();
        check_vectors(g, self.coref.nrows())?;
        let mut u = Array2::zeros(g.raw_dim());
        for j in 0..p {
            let c = coref_confidence(self.coref, j)?;
            u.row_mut(j).assign(&coref_update_vector(c.view(), g, j)?);
        }
        Ok(u)
    }
}

pub struct RelationUpdates<'a> {
    pub relation: ArrayView3<'a, f64>,
    pub projection: ArrayView2<'a, f64>,
}

impl UpdateSource for RelationUpdates<'_> {
    fn updates(&self, g: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut u = Array2::zeros(g.raw_dim());
        for j in 0..g.nrows() {
            u.row_mut(j)
                .assign(&relation_update_vector(self.relation, self.projection, g, j)?);
        }
        Ok(u)
    }
}

/// One attention propagation step over all pruned spans.
pub fn attention_propagation(g: ArrayView2<f64>, att: ArrayView2<f64>, gate: &GateTransform) -> Result<Array2<f64>> {
    propagate(g, &AttentionUpdates { att }, gate, 1)
}

/// Applies `iterations` gated updates. Scores are held fixed across steps.
pub fn propagate(
    g: ArrayView2<f64>,
    source: &dyn UpdateSource,
    gate: &GateTransform,
    iterations: usize,
) -> Result<Array2<f64>> {
    if g.ncols() != gate.dim() {
        return Err(shape_err(format!("span vectors of size {} vs gate of size {}", g.ncols(), gate.dim())));
    }
    let mut cur = g.to_owned();
    for _ in 0..iterations {
        let u = source.updates(cur.view())?;
        cur = gated_rows(cur.view(), u.view(), gate)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, Array3};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn span_counts() {
        assert_eq!(span_count(10, 1).unwrap(), 10);
        assert_eq!(span_count(4, 3).unwrap(), 9);
        assert_eq!(span_count(100, 5).unwrap(), 490);
        assert!(span_count(3, 4).is_err());
        assert!(span_count(3, 0).is_err());
        assert_eq!(enumerate_spans(4, 3).len(), 9);
    }

    #[test]
    fn pruning() {
        assert_eq!(prune_top_k(arr1(&[0.1, 3.0, -1.0, 3.0]).view(), 2), vec![1, 3]);
        assert_eq!(prune_top_k(arr1(&[1.0, 1.0, 1.0]).view(), 2), vec![0, 1]);
    }

    fn scores(p_scores: &[f64]) -> ScoreSet {
        let s = p_scores.len();
        ScoreSet {
            mention: Array2::from_elem((s, 2), -1.0),
            coref: Array2::from_shape_fn((s, s), |(i, j)| (i * 3 + j) as f64),
            relation: Array3::from_shape_fn((s, s, 2), |(i, j, l)| (i + j + l) as f64),
            pruner: arr1(p_scores),
            pruned: (0..s).collect(),
        }
    }

    #[test]
    fn pruner_augmentation() {
        let base = scores(&[0.0, 0.0]);
        assert_eq!(augment_with_pruner(&base).unwrap(), base);
        let one = scores(&[2.0]);
        assert_eq!(augment_with_pruner(&one).unwrap().mention[[0, 0]], 1.0);
        let base = scores(&[1.5, -2.0, 0.25]);
        let aug = augment_with_pruner(&base).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(aug.coref[[i, j]] - base.coref[[i, j]], base.pruner[i]);
            }
        }
        let mut bad = scores(&[1.0, 2.0]);
        bad.pruned = vec![1, 0];
        assert!(augment_with_pruner(&bad).is_err());
    }

    #[test]
    fn bce() {
        let z = Array2::<f64>::zeros((2, 3)).into_dyn();
        let ind = Array2::from_shape_fn((2, 3), |(i, _)| i as f64).into_dyn();
        assert!(close(multilabel_bce_loss(z.view(), ind.view()).unwrap(), 6.0 * 2f64.ln()));
        let x = arr1(&[3f64.ln()]).into_dyn();
        let one = arr1(&[1.0]).into_dyn();
        assert!(close(multilabel_bce_loss(x.view(), one.view()).unwrap(), -(0.75f64.ln())));
        let big = arr1(&[60.0]).into_dyn();
        assert!(multilabel_bce_loss(big.view(), one.view()).unwrap() < 1e-20);
        let inf = arr1(&[f64::INFINITY]).into_dyn();
        assert!(multilabel_bce_loss(inf.view(), one.view()).is_err());
        let half = arr1(&[0.5]).into_dyn();
        assert!(multilabel_bce_loss(x.view(), half.view()).is_err());
    }

    #[test]
    fn coref_loss() {
        let one = Array2::zeros((1, 1));
        assert_eq!(coref_marginal_loss(one.view(), &[vec![0]]).unwrap(), 0.0);
        let two = Array2::zeros((2, 2));
        assert!(close(coref_marginal_loss(two.view(), &[vec![0], vec![0]]).unwrap(), 2f64.ln()));
        assert!(close(coref_marginal_loss(two.view(), &[vec![0], vec![0, 1]]).unwrap(), 0.0));
        assert!(coref_marginal_loss(two.view(), &[vec![0], vec![]]).is_err());
        assert!(coref_marginal_loss(two.view(), &[vec![1], vec![1]]).is_err());
    }

    #[test]
    fn joint() {
        let l = TaskLosses { mention: 1.0, coref: 2.0, relation: 3.0 };
        assert_eq!(joint_loss(l, LossWeights::default()), 6.0);
        let l = TaskLosses { mention: 2.0, coref: 2.0, relation: 2.0 };
        assert_eq!(joint_loss(l, LossWeights { entity: 0.5, coref: 1.0, relation: 2.0 }), 7.0);
        assert_eq!(joint_loss(l, LossWeights { entity: 0.0, coref: 0.0, relation: 1.0 }), 2.0);
    }

    #[test]
    fn confidences() {
        let c = Array2::from_elem((3, 3), 0.7);
        let p = coref_confidence(c.view(), 2).unwrap();
        assert!(p.iter().all(|&x| close(x, 1.0 / 3.0)));
        let mut c = Array2::zeros((3, 3));
        c[[0, 1]] = 3f64.ln();
        let p = coref_confidence(c.view(), 1).unwrap();
        assert!(close(p[0], 0.75) && close(p[1], 0.25) && p[2] == 0.0);
        assert_eq!(coref_confidence(c.view(), 0).unwrap().to_vec(), vec![1.0, 0.0, 0.0]);
        assert!(coref_confidence(c.view(), 3).is_err());
    }

    #[test]
    fn coref_updates() {
        let g = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let u = coref_update_vector(arr1(&[0.0, 1.0]).view(), g.view(), 1).unwrap();
        assert_eq!(u, arr1(&[0.0, 1.0]));
        let u = coref_update_vector(arr1(&[0.5, 0.5]).view(), g.view(), 1).unwrap();
        assert_eq!(u, arr1(&[0.5, 0.5]));
        let same = arr2(&[[2.0, -1.0], [2.0, -1.0]]);
        let u = coref_update_vector(arr1(&[0.3, 0.7]).view(), same.view(), 1).unwrap();
        assert!(close(u[0], 2.0) && close(u[1], -1.0));
        assert!(coref_update_vector(arr1(&[0.3, 0.3]).view(), g.view(), 1).is_err());
    }

    #[test]
    fn relation_updates() {
        let g = arr2(&[[1.0, 2.0]]);
        let rel = Array3::from_elem((1, 1, 1), 2.0);
        let a = arr2(&[[1.0], [1.0]]);
        assert_eq!(relation_update_vector(rel.view(), a.view(), g.view(), 0).unwrap(), arr1(&[2.0, 4.0]));
        let zero = Array2::zeros((2, 1));
        assert_eq!(relation_update_vector(rel.view(), zero.view(), g.view(), 0).unwrap(), arr1(&[0.0, 0.0]));
        let neg = Array3::from_elem((1, 1, 1), -2.0);
        assert_eq!(relation_update_vector(neg.view(), a.view(), g.view(), 0).unwrap(), arr1(&[0.0, 0.0]));
        assert!(relation_update_vector(rel.view(), Array2::zeros((3, 1)).view(), g.view(), 0).is_err());
    }

    #[test]
    fn attention() {
        let g = arr2(&[[1.0, 0.0], [0.0, 1.0], [4.0, 4.0]]);
        let u = AttentionUpdates { att: Array2::zeros((3, 3)).view() }.updates(g.view()).unwrap();
        assert!(close(u[[0, 0]], 5.0 / 3.0) && close(u[[2, 1]], 5.0 / 3.0));

        let g = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let att = arr2(&[[3f64.ln(), 0.0], [0.0, 0.0]]);
        let u = AttentionUpdates { att: att.view() }.updates(g.view()).unwrap();
        assert!(close(u[[0, 0]], 0.75) && close(u[[0, 1]], 0.25));

        let next = attention_propagation(g.view(), att.view(), &GateTransform::constant(2, 50.0)).unwrap();
        assert!((&next - &g).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn gate() {
        let g = arr1(&[2.0, 0.0]);
        let u = arr1(&[0.0, 2.0]);
        let z = GateTransform::zeros(2);
        assert_eq!(gated_span_update(g.view(), u.view(), &z).unwrap(), arr1(&[1.0, 1.0]));
        assert_eq!(gated_span_update(g.view(), g.view(), &z).unwrap(), g);
        let low = GateTransform::constant(2, -50.0);
        let out = gated_span_update(g.view(), u.view(), &low).unwrap();
        assert!((&out - &u).iter().all(|d| d.abs() < 1e-12));
        assert!(GateTransform::new(Array2::zeros((2, 3)), Array1::zeros(2)).is_err());
        assert!(gated_span_update(g.view(), arr1(&[1.0]).view(), &z).is_err());
    }

    #[test]
    fn propagation_driver() {
        let g = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let coref = arr2(&[[0.0, 0.0], [0.0, 0.0]]);
        let out = propagate(g.view(), &CorefUpdates { coref: coref.view() }, &GateTransform::zeros(2), 1).unwrap();
        // span 0 only sees itself; span 1 averages both
        assert_eq!(out.row(0), g.row(0));
        assert!(close(out[[1, 0]], 0.25) && close(out[[1, 1]], 0.75));
        let same = propagate(g.view(), &CorefUpdates { coref: coref.view() }, &GateTransform::zeros(2), 0).unwrap();
        assert_eq!(same, g);
        let rel = Array3::zeros((2, 2, 1));
        let a = Array2::zeros((2, 1));
        let out = propagate(g.view(), &RelationUpdates { relation: rel.view(), projection: a.view() }, &GateTransform::zeros(2), 1).unwrap();
        assert_eq!(out, &g * 0.5);
    }
}
