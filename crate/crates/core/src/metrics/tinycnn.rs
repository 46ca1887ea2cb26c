//! A small hand-written convolutional scorer with an exact reverse-mode
//! input gradient.
//!
//! Topology: 3x3 conv (3->8, pad 1) -> ReLU -> 2x2 average pool -> 3x3 conv
//! (8->16, pad 1) -> ReLU -> global average pool -> linear -> logistic ->
//! x100. Average pooling keeps the backward pass smooth everywhere except
//! the ReLU kinks. All arithmetic runs in f64; weights are stored as f32.
//!
//! The canonical weight set is generated deterministically: every tensor is
//! drawn i.i.d. uniform from `(-1/sqrt(fan_in), 1/sqrt(fan_in))` using the
//! labelled streams of seed `0xC0FFEE`, then rounded through f32 so the
//! in-memory values equal the file contents bit for bit.

use super::{check_min_side, sigmoid, Metric, MetricDescriptor, MetricEval};
use crate::error::{Error, Result};
use crate::imagery::{Image, RngStream, SectionFile, Seed, Tensor, CHANNELS};
use std::path::Path;

pub const TIPW_MAGIC: &[u8; 4] = b"TIPW";

const C1_OUT: usize = 8;
const C2_OUT: usize = 16;
const K: usize = 3;
const CANONICAL_SEED: u64 = 0xC0FFEE;

const C1_W_LEN: usize = C1_OUT * CHANNELS * K * K; // 216
const C2_W_LEN: usize = C2_OUT * C1_OUT * K * K; // 1152

#[derive(Clone, Debug, PartialEq)]
pub struct TinyCnnWeights {
    pub conv1_w: Vec<f64>,
    pub conv1_b: Vec<f64>,
    pub conv2_w: Vec<f64>,
    pub conv2_b: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

impl TinyCnnWeights {
    /// The deterministic reference weights shipped with the repo.
    pub fn canonical() -> Self {
        let draw = |label: &str, fan_in: usize, n: usize| -> Vec<f64> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut rng = RngStream::new(Seed(CANONICAL_SEED), label);
            (0..n)
                .map(|_| f64::from(rng.range_f64(-bound, bound) as f32))
                .collect()
        };
        let fan1 = CHANNELS * K * K;
        let fan2 = C1_OUT * K * K;
        Self {
            conv1_w: draw("tinycnn/conv1.weight", fan1, C1_W_LEN),
            conv1_b: draw("tinycnn/conv1.bias", fan1, C1_OUT),
            conv2_w: draw("tinycnn/conv2.weight", fan2, C2_W_LEN),
            conv2_b: draw("tinycnn/conv2.bias", fan2, C2_OUT),
            head_w: draw("tinycnn/head.weight", C2_OUT, C2_OUT),
            head_b: draw("tinycnn/head.bias", C2_OUT, 1)[0],
        }
    }

    /// All-zero weights; scores exactly 50 on every input.
    pub fn zeros() -> Self {
        Self {
            conv1_w: vec![0.0; C1_W_LEN],
            conv1_b: vec![0.0; C1_OUT],
            conv2_w: vec![0.0; C2_W_LEN],
            conv2_b: vec![0.0; C2_OUT],
            head_w: vec![0.0; C2_OUT],
            head_b: 0.0,
        }
    }

    /// Reads a three-section weight container: conv1 (weights then biases),
    /// conv2, head.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = SectionFile::read(path, TIPW_MAGIC)?;
        let expect = [C1_W_LEN + C1_OUT, C2_W_LEN + C2_OUT, C2_OUT + 1];
        if file.sections.len() != 3 {
            return Err(Error::DimensionMismatch {
                path: path.into(),
                detail: format!("expected 3 sections, got {}", file.sections.len()),
            });
        }
        for (i, (s, e)) in file.sections.iter().zip(expect).enumerate() {
            if s.len() != e {
                return Err(Error::DimensionMismatch {
                    path: path.into(),
                    detail: format!("section {i} has {} floats, expected {e}", s.len()),
                });
            }
        }
        let widen = |s: &[f32]| s.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>();
        let s0 = &file.sections[0];
        let s1 = &file.sections[1];
        let s2 = &file.sections[2];
        Ok(Self {
            conv1_w: widen(&s0[..C1_W_LEN]),
            conv1_b: widen(&s0[C1_W_LEN..]),
            conv2_w: widen(&s1[..C2_W_LEN]),
            conv2_b: widen(&s1[C2_W_LEN..]),
            head_w: widen(&s2[..C2_OUT]),
            head_b: f64::from(s2[C2_OUT]),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let narrow = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
        let mut s0 = narrow(&self.conv1_w);
        s0.extend(narrow(&self.conv1_b));
        let mut s1 = narrow(&self.conv2_w);
        s1.extend(narrow(&self.conv2_b));
        let mut s2 = narrow(&self.head_w);
        s2.push(self.head_b as f32);
        let meta = serde_json::json!({
            "kind": "tinycnn-weights",
            "sections": ["conv1 w[8][3][3][3]+b[8]", "conv2 w[16][8][3][3]+b[16]", "head w[16]+b[1]"],
            "init": "uniform(-1/sqrt(fan_in), 1/sqrt(fan_in))",
            "seed": CANONICAL_SEED,
        });
        SectionFile {
            magic: *TIPW_MAGIC,
            version: 1,
            sections: vec![s0, s1, s2],
            meta_json: serde_json::to_vec(&meta).expect("meta serializes"),
        }
        .write(path)
    }

    pub fn all_finite(&self) -> bool {
        self.conv1_w
            .iter()
            .chain(&self.conv1_b)
            .chain(&self.conv2_w)
            .chain(&self.conv2_b)
            .chain(&self.head_w)
            .chain(std::iter::once(&self.head_b))
            .all(|v| v.is_finite())
    }
}

pub struct TinyCnnMetric {
    descriptor: MetricDescriptor,
    weights: TinyCnnWeights,
}

impl TinyCnnMetric {
    pub fn new(weights: TinyCnnWeights) -> Self {
        assert!(weights.all_finite());
        Self {
            descriptor: MetricDescriptor::new("tinycnn", 0.0, 100.0, 32),
            weights,
        }
    }

    pub fn with_canonical_weights() -> Self {
        Self::new(TinyCnnWeights::canonical())
    }

    fn forward(&self, img: &Image) -> Forward {
        let (h, w) = (img.height(), img.width());
        let wts = &self.weights;
        let pre1 = conv2d(img.data(), CHANNELS, h, w, &wts.conv1_w, C1_OUT, &wts.conv1_b);
        let act1 = relu(&pre1);
        let (pooled, h2, w2) = avgpool2(&act1, C1_OUT, h, w);
        let pre2 = conv2d(&pooled, C1_OUT, h2, w2, &wts.conv2_w, C2_OUT, &wts.conv2_b);
        let act2 = relu(&pre2);
        let plane = h2 * w2;
        let mut z = wts.head_b;
        for k in 0..C2_OUT {
            let g = act2[k * plane..(k + 1) * plane].iter().sum::<f64>() / plane as f64;
            z += wts.head_w[k] * g;
        }
        let sig = sigmoid(z);
        Forward {
            pre1,
            pre2,
            h2,
            w2,
            sig,
        }
    }
}

struct Forward {
    pre1: Vec<f64>,
    pre2: Vec<f64>,
    h2: usize,
    w2: usize,
    sig: f64,
}

impl Metric for TinyCnnMetric {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn evaluate(&self, img: &Image) -> Result<MetricEval> {
        check_min_side(&self.descriptor, img)?;
        let (h, w) = (img.height(), img.width());
        let wts = &self.weights;
        let fwd = self.forward(img);
        let (h2, w2) = (fwd.h2, fwd.w2);
        let plane2 = h2 * w2;

        let dz = 100.0 * fwd.sig * (1.0 - fwd.sig);
        // Through the head and global average pool, then the second ReLU.
        let mut dpre2 = vec![0.0; C2_OUT * plane2];
        for k in 0..C2_OUT {
            let g = dz * wts.head_w[k] / plane2 as f64;
            for i in 0..plane2 {
                if fwd.pre2[k * plane2 + i] > 0.0 {
                    dpre2[k * plane2 + i] = g;
                }
            }
        }
        let dpool = conv2d_backward_input(&dpre2, C2_OUT, h2, w2, &wts.conv2_w, C1_OUT);
        // Average pool backward: each pooled cell spreads evenly over its
        // 2x2 block; rows/cols beyond 2*h2 x 2*w2 never contributed.
        let mut dact1 = vec![0.0; C1_OUT * h * w];
        for o in 0..C1_OUT {
            for u in 0..h2 {
                for v in 0..w2 {
                    let g = dpool[(o * h2 + u) * w2 + v] / 4.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            dact1[(o * h + 2 * u + a) * w + 2 * v + b] += g;
                        }
                    }
                }
            }
        }
        for (d, p) in dact1.iter_mut().zip(&fwd.pre1) {
            if *p <= 0.0 {
                *d = 0.0;
            }
        }
        let dx = conv2d_backward_input(&dact1, C1_OUT, h, w, &wts.conv1_w, CHANNELS);

        let grad = Tensor::from_data(h, w, dx);
        debug_assert!(grad.all_finite());
        Ok(MetricEval {
            score: 100.0 * fwd.sig,
            gradient: grad,
        })
    }

    fn score(&self, img: &Image) -> Result<f64> {
        check_min_side(&self.descriptor, img)?;
        Ok(100.0 * self.forward(img).sig)
    }
}

/// 3x3 convolution with zero padding 1; weights laid out
/// `[out][in][ky][kx]`.
fn conv2d(
    input: &[f64],
    cin: usize,
    h: usize,
    w: usize,
    weights: &[f64],
    cout: usize,
    bias: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; cout * h * w];
    for o in 0..cout {
        let out_plane = &mut out[o * h * w..(o + 1) * h * w];
        out_plane.fill(bias[o]);
        for c in 0..cin {
            let in_plane = &input[c * h * w..(c + 1) * h * w];
            let wbase = (o * cin + c) * K * K;
            for ky in 0..K {
                for kx in 0..K {
                    let wv = weights[wbase + ky * K + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let dy = ky as isize - 1;
                    let dx = kx as isize - 1;
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (h as isize - dy).min(h as isize) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (w as isize - dx).min(w as isize) as usize;
                    for y in y0..y1 {
                        let src = ((y as isize + dy) as usize) * w;
                        let dst = y * w;
                        for x in x0..x1 {
                            out_plane[dst + x] +=
                                wv * in_plane[src + (x as isize + dx) as usize];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Gradient of [`conv2d`] w.r.t. its input: scatter each output-cell
/// gradient back through the taps it read.
fn conv2d_backward_input(
    dout: &[f64],
    cout: usize,
    h: usize,
    w: usize,
    weights: &[f64],
    cin: usize,
) -> Vec<f64> {
    let mut din = vec![0.0; cin * h * w];
    for o in 0..cout {
        let dout_plane = &dout[o * h * w..(o + 1) * h * w];
        for c in 0..cin {
            let din_plane = &mut din[c * h * w..(c + 1) * h * w];
            let wbase = (o * cin + c) * K * K;
            for ky in 0..K {
                for kx in 0..K {
                    let wv = weights[wbase + ky * K + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let dy = ky as isize - 1;
                    let dx = kx as isize - 1;
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (h as isize - dy).min(h as isize) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (w as isize - dx).min(w as isize) as usize;
                    for y in y0..y1 {
                        let src = y * w;
                        let dst = ((y as isize + dy) as usize) * w;
                        for x in x0..x1 {
                            din_plane[dst + (x as isize + dx) as usize] +=
                                wv * dout_plane[src + x];
                        }
                    }
                }
            }
        }
    }
    din
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn avgpool2(input: &[f64], c: usize, h: usize, w: usize) -> (Vec<f64>, usize, usize) {
    let (h2, w2) = (h / 2, w / 2);
    let mut out = vec![0.0; c * h2 * w2];
    for o in 0..c {
        for u in 0..h2 {
            for v in 0..w2 {
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += input[(o * h + 2 * u + a) * w + 2 * v + b];
                    }
                }
                out[(o * h2 + u) * w2 + v] = acc / 4.0;
            }
        }
    }
    (out, h2, w2)
}
