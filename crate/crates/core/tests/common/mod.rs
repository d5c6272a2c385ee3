//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use dafl::nn::{build_network, LayerSpec, LossKind, NetworkSpec, NetworkState};
use dafl::rng::{purpose, rng_for};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random conv/relu/pool/GAP/dense network with at most a couple of
/// thousand parameters.
pub fn random_small_spec(seed: u64) -> NetworkSpec {
    let mut r = rng(seed);
    let classes = r.gen_range(2..=4);
    let input_length = r.gen_range(20..=40);
    let mut blocks = vec![
        LayerSpec::conv(r.gen_range(2..=5), r.gen_range(2..=4), r.gen_range(1..=2)),
        LayerSpec::Relu,
    ];
    if r.gen_bool(0.5) {
        blocks.push(LayerSpec::pool(2));
    }
    blocks.push(LayerSpec::conv(r.gen_range(2..=3), r.gen_range(2..=6), 1));
    blocks.push(LayerSpec::Relu);
    blocks.push(LayerSpec::GlobalAvgPool);
    blocks.push(LayerSpec::Dense { units: classes });
    blocks.push(LayerSpec::Softmax);
    NetworkSpec {
        input_length,
        num_classes: classes,
        blocks,
        seed,
    }
}

pub fn random_batch(r: &mut impl Rng, n: usize, len: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..len).map(|_| r.gen_range(-1.0..1.0)).collect()).collect()
}

pub fn random_distribution(r: &mut impl Rng, classes: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..classes).map(|_| r.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// Batch-mean loss computed directly from the definition.
pub fn reference_loss(logits: &[Vec<f64>], targets: &[Vec<f64>], kind: LossKind) -> f64 {
    let mut total = 0.0;
    for (z, t) in logits.iter().zip(targets) {
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        for (zc, tc) in z.iter().zip(t) {
            let logp = zc - lse;
            total += match kind {
                LossKind::CrossEntropy => -tc * logp,
                LossKind::Kld => {
                    if *tc > 0.0 {
                        tc * (tc.ln() - logp)
                    } else {
                        0.0
                    }
                }
            };
        }
    }
    total / logits.len() as f64
}

pub fn net_loss(net: &NetworkState, batch: &[Vec<f64>], targets: &[Vec<f64>], kind: LossKind) -> f64 {
    let logits: Vec<Vec<f64>> = batch.iter().map(|x| net.logits(x).unwrap()).collect();
    reference_loss(&logits, targets, kind)
}

fn param_mut(net: &mut NetworkState, layer: usize, bias: bool, k: usize) -> &mut f64 {
    if bias {
        &mut net.params[layer].bias[k]
    } else {
        &mut net.params[layer].weights[k]
    }
}

/// Central differences over every parameter, in `Gradients::flat` order.
pub fn fd_gradient(net: &NetworkState, batch: &[Vec<f64>], targets: &[Vec<f64>], kind: LossKind, h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut probe = net.clone();
    for layer in 0..net.params.len() {
        for bias in [false, true] {
            let n = if bias {
                net.params[layer].bias.len()
            } else {
                net.params[layer].weights.len()
            };
            for k in 0..n {
                let orig = *param_mut(&mut probe, layer, bias, k);
                *param_mut(&mut probe, layer, bias, k) = orig + h;
                let up = net_loss(&probe, batch, targets, kind);
                *param_mut(&mut probe, layer, bias, k) = orig - h;
                let down = net_loss(&probe, batch, targets, kind);
                *param_mut(&mut probe, layer, bias, k) = orig;
                out.push((up - down) / (2.0 * h));
            }
        }
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn small_net(seed: u64) -> NetworkState {
    build_network(random_small_spec(seed)).unwrap()
}

/// Random network whose biases are also random, so no unit sits exactly on
/// a ReLU kink (zero biases make all-zero receptive fields land on it).
pub fn gradient_check_net(seed: u64) -> NetworkState {
    let mut net = small_net(seed);
    let mut r = rng(seed.wrapping_mul(31).wrapping_add(7));
    for p in &mut net.params {
        for b in &mut p.bias {
            *b = r.gen_range(-0.5..0.5);
        }
    }
    net
}

/// Ranks with average ties, 1-based.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    r
}

/// Two-sided signed-rank p value by enumerating all sign assignments.
pub fn wilcoxon_enumeration(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        return 1.0;
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let r = ranks(&abs);
    let plus: f64 = d.iter().zip(&r).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let total: f64 = r.iter().sum();
    let w = plus.min(total - plus);
    let n = d.len();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let t: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| r[i]).sum();
        if t <= w + 1e-9 {
            hits += 1;
        }
    }
    (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0)
}

/// O(n) scan per query: sort all stored points by (distance, index).
pub fn knn_brute(train: &[Vec<f64>], labels: &[usize], classes: usize, k: usize, q: &[f64]) -> usize {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, x)| (x.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut votes = vec![0usize; classes];
    for &(_, i) in &d[..k] {
        votes[labels[i]] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

/// Gradient descent on 0.5*||XW + 1b - Y||^2 + 0.5*alpha*||W||^2.
/// Returns weights laid out `[j * C + c]` and the bias.
pub fn ridge_gd(x: &[Vec<f64>], labels: &[usize], classes: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let d = x[0].len();
    let frob: f64 = x.iter().flatten().map(|v| v * v).sum::<f64>() + n as f64;
    let step = 1.0 / (frob + alpha);
    let mut w = vec![0.0; d * classes];
    let mut b = vec![0.0; classes];
    for _ in 0..2_000_000 {
        let mut gw = vec![0.0; d * classes];
        let mut gb = vec![0.0; classes];
        for (xi, &yi) in x.iter().zip(labels) {
            for c in 0..classes {
                let pred: f64 = b[c] + (0..d).map(|j| xi[j] * w[j * classes + c]).sum::<f64>();
                let r = pred - if yi == c { 1.0 } else { 0.0 };
                gb[c] += r;
                for j in 0..d {
                    gw[j * classes + c] += r * xi[j];
                }
            }
        }
        for (g, wv) in gw.iter_mut().zip(&w) {
            *g += alpha * wv;
        }
        let norm = gw.iter().chain(&gb).map(|g| g * g).sum::<f64>().sqrt();
        if norm < 1e-12 {
            break;
        }
        for (wv, g) in w.iter_mut().zip(&gw) {
            *wv -= step * g;
        }
        for (bv, g) in b.iter_mut().zip(&gb) {
            *bv -= step * g;
        }
    }
    (w, b)
}

/// Sequential bootstrap drawing from the same per-resample streams.
pub fn bootstrap_oracle(pred: &[usize], labels: &[usize], resamples: usize, seed: u64) -> Vec<f64> {
    let n = pred.len();
    let mut out = Vec::with_capacity(resamples);
    for b in 0..resamples {
        let mut r = rng_for(seed, &[purpose::BOOTSTRAP, b as u64]);
        let mut hits = 0;
        for _ in 0..n {
            let i = r.gen_range(0..n);
            if pred[i] == labels[i] {
                hits += 1;
            }
        }
        out.push(hits as f64 / n as f64);
    }
    out
}

/// Segment flags recounted with integer time arithmetic (all times in ms).
pub fn aggregate_brute(flags: &[bool], hop_ms: u64, segment_ms: u64, duration_ms: u64, k: usize) -> Vec<bool> {
    let segments = duration_ms.div_ceil(segment_ms);
    (0..segments)
        .map(|j| {
            let lo = j * segment_ms;
            let hi = lo + segment_ms;
            let count = flags
                .iter()
                .enumerate()
                .filter(|(i, &f)| f && (*i as u64 * hop_ms) >= lo && (*i as u64 * hop_ms) < hi)
                .count();
            count >= k
        })
        .collect()
}
