//! Direct loop transliterations of the kernel formulas, used as oracles.
//!
//! No vectorization and no numerical stabilization: inputs are expected to
//! be small and moderate in magnitude.

pub type Vector = Vec<f64>;
pub type Matrix = Vec<Vec<f64>>;

fn sigma(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn span_count(num_tokens: usize, w_max: usize) -> usize {
    let mut n = 0;
    for b in 0..num_tokens {
        for e in b + 1..=num_tokens {
            if e - b <= w_max {
                n += 1;
            }
        }
    }
    n
}

/// Returns augmented (mention, coref, relation) scores.
pub fn augment(
    mention: &Matrix,
    coref: &Matrix,
    relation: &[Matrix],
    pruner: &Vector,
    pruned: &[usize],
) -> (Matrix, Matrix, Vec<Matrix>) {
    let mut m = mention.clone();
    for i in 0..m.len() {
        for l in 0..m[i].len() {
            m[i][l] = mention[i][l] + pruner[i];
        }
    }
    let mut c = coref.clone();
    let mut r = relation.to_vec();
    for i in 0..pruned.len() {
        for j in 0..pruned.len() {
            c[i][j] = coref[i][j] + pruner[pruned[i]];
            for l in 0..relation[i][j].len() {
                r[i][j][l] = relation[i][j][l] + pruner[pruned[i]];
            }
        }
    }
    (m, c, r)
}

pub fn bce(scores: &[f64], indicators: &[f64]) -> f64 {
    let mut log_p = 0.0;
    for k in 0..scores.len() {
        let s = sigma(scores[k]);
        log_p += indicators[k] * s.ln() + (1.0 - indicators[k]) * (1.0 - s).ln();
    }
    -log_p
}

pub fn coref_loss(coref: &Matrix, gold: &[Vec<usize>]) -> f64 {
    let mut log_p = 0.0;
    for j in 0..coref.len() {
        let mut num = 0.0;
        for i in 0..=j {
            if gold[j].contains(&i) {
                num += coref[i][j].exp();
            }
        }
        let mut den = 0.0;
        for i in 0..=j {
            den += coref[i][j].exp();
        }
        log_p += (num / den).ln();
    }
    -log_p
}

pub fn confidence(coref: &Matrix, j: usize) -> Vector {
    let mut den = 0.0;
    for i in 0..=j {
        den += coref[i][j].exp();
    }
    let mut out = vec![0.0; coref.len()];
    for i in 0..=j {
        out[i] = coref[i][j].exp() / den;
    }
    out
}

pub fn coref_update(conf: &Vector, g: &Matrix, j: usize) -> Vector {
    let mut u = vec![0.0; g[0].len()];
    for i in 0..=j {
        for k in 0..u.len() {
            u[k] += conf[i] * g[i][k];
        }
    }
    u
}

/// `relation[i][j]` holds the type scores of pair `(i, j)`.
pub fn relation_update(relation: &[Matrix], a_r: &Matrix, g: &Matrix, j: usize) -> Vector {
    let n = g[0].len();
    let mut u = vec![0.0; n];
    for i in 0..g.len() {
        for k in 0..n {
            let mut proj = 0.0;
            for l in 0..a_r[k].len() {
                proj += a_r[k][l] * relation[i][j][l].max(0.0);
            }
            u[k] += proj * g[i][k];
        }
    }
    u
}

pub fn attention_update(att: &Matrix, g: &Matrix, i: usize) -> Vector {
    let p = g.len();
    let mut den = 0.0;
    for j in 0..p {
        den += att[i][j].exp();
    }
    let mut u = vec![0.0; g[0].len()];
    for j in 0..p {
        let w = att[i][j].exp() / den;
        for k in 0..u.len() {
            u[k] += w * g[j][k];
        }
    }
    u
}

pub fn gated_update(g: &Vector, u: &Vector, weight: &Matrix, bias: &Vector) -> Vector {
    let n = g.len();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut z = bias[k];
        for c in 0..n {
            z += weight[k][c] * g[c] + weight[k][n + c] * u[c];
        }
        let f = sigma(z);
        out[k] = f * g[k] + (1.0 - f) * u[k];
    }
    out
}

pub fn joint(l: [f64; 3], w: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        s += w[k] * l[k];
    }
    s
}
