use rand_distr::{Distribution, Normal};

use super::{check_widths, Architecture, Checkpoint, Classifier, GradientBuffer, Stamp};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

/// `z = W x + b`, with `W` stored `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            weights: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
        }
    }

    fn forward(&self, input: &Matrix) -> Matrix {
        let out_dim = self.bias.len();
        let mut out = Matrix::zeros(input.rows(), out_dim);
        for n in 0..input.rows() {
            let x = input.row(n);
            let y = out.row_mut(n);
            for (j, yj) in y.iter_mut().enumerate() {
                let mut acc = self.bias[j];
                for (w, xi) in self.weights.row(j).iter().zip(x) {
                    acc += w * xi;
                }
                *yj = acc;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct MlpCache {
    stamp: Stamp,
    /// Input of every layer (post-ReLU for hidden layers).
    inputs: Vec<Matrix>,
    /// Pre-activation of every layer.
    pre: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub layers: Vec<DenseLayer>,
}

impl GradientBuffer for MlpGradients {
    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }
}

/// Fully connected ReLU network ending in two logits.
#[derive(Debug)]
pub struct MlpModel {
    widths: Vec<usize>,
    layers: Vec<DenseLayer>,
    stamp: Stamp,
}

impl Clone for MlpModel {
    fn clone(&self) -> Self {
        MlpModel {
            widths: self.widths.clone(),
            layers: self.layers.clone(),
            stamp: Stamp::fresh(),
        }
    }
}

impl PartialEq for MlpModel {
    fn eq(&self, other: &Self) -> bool {
        self.widths == other.widths && self.layers == other.layers
    }
}

/// He-initialised MLP: weights `N(0, 2 / fan_in)`, zero biases.
pub fn init_mlp(widths: &[usize], seed: u64) -> Result<MlpModel> {
    check_widths(widths)?;
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let (in_dim, out_dim) = (w[0], w[1]);
            let normal = Normal::new(0.0, (2.0 / in_dim as f64).sqrt()).expect("valid std");
            let mut rng = rng::stream(seed, &[rng::label::INIT, l as u64]);
            let data = (0..in_dim * out_dim)
                .map(|_| normal.sample(&mut rng))
                .collect();
            DenseLayer {
                weights: Matrix::from_vec(out_dim, in_dim, data).expect("sized"),
                bias: vec![0.0; out_dim],
            }
        })
        .collect();
    Ok(MlpModel {
        widths: widths.to_vec(),
        layers,
        stamp: Stamp::fresh(),
    })
}

impl MlpModel {
    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable access to a layer; invalidates outstanding caches.
    pub fn layer_mut(&mut self, l: usize) -> &mut DenseLayer {
        self.stamp.bump();
        &mut self.layers[l]
    }

    pub(crate) fn from_parts(widths: &[usize], parameters: &[f64]) -> Result<Self> {
        let mut model = init_mlp(widths, 0)?;
        model.set_parameters(parameters)?;
        Ok(model)
    }
}

fn relu_in_place(m: &mut Matrix) {
    for v in m.as_mut_slice() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

impl Classifier for MlpModel {
    type Cache = MlpCache;
    type Gradients = MlpGradients;

    fn architecture(&self) -> Architecture {
        Architecture::Mlp
    }

    fn widths(&self) -> &[usize] {
        &self.widths
    }

    fn forward(&self, batch: &Matrix, want_cache: bool) -> Result<(Matrix, Option<MlpCache>)> {
        if batch.cols() != self.widths[0] {
            return Err(Error::Shape(format!(
                "MLP expects {} input columns, got {}",
                self.widths[0],
                batch.cols()
            )));
        }
        let mut inputs = Vec::new();
        let mut pre = Vec::new();
        let mut current = batch.clone();
        let last = self.layers.len().saturating_sub(1);
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&current);
            let mut a = z.clone();
            if l < last {
                relu_in_place(&mut a);
            }
            if want_cache {
                inputs.push(std::mem::replace(&mut current, a));
                pre.push(z);
            } else {
                current = a;
            }
        }
        let cache = want_cache.then_some(MlpCache {
            stamp: self.stamp,
            inputs,
            pre,
        });
        Ok((current, cache))
    }

    fn backward(&self, cache: &MlpCache, dlogits: &Matrix) -> Result<MlpGradients> {
        if cache.stamp != self.stamp || cache.inputs.len() != self.layers.len() {
            return Err(Error::Cache(
                "cache was produced by a different model or parameter state".into(),
            ));
        }
        let rows = cache.inputs.first().map_or(dlogits.rows(), Matrix::rows);
        if dlogits.shape() != (rows, 2) {
            return Err(Error::Shape(format!(
                "dlogits is {:?}, expected ({rows}, 2)",
                dlogits.shape()
            )));
        }
        let mut grads = MlpGradients {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.weights.cols(), l.weights.rows()))
                .collect(),
        };
        let mut dz = dlogits.clone();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &cache.inputs[l];
            let g = &mut grads.layers[l];
            let (out_dim, in_dim) = layer.weights.shape();
            for n in 0..rows {
                let x = input.row(n);
                for j in 0..out_dim {
                    let d = dz.get(n, j);
                    g.bias[j] += d;
                    for (gw, xi) in g.weights.row_mut(j).iter_mut().zip(x) {
                        *gw += d * xi;
                    }
                }
            }
            if l > 0 {
                let mut dx = Matrix::zeros(rows, in_dim);
                let below = &cache.pre[l - 1];
                for n in 0..rows {
                    for i in 0..in_dim {
                        if below.get(n, i) <= 0.0 {
                            continue;
                        }
                        let mut acc = 0.0;
                        for j in 0..out_dim {
                            acc += dz.get(n, j) * layer.weights.get(j, i);
                        }
                        dx.set(n, i, acc);
                    }
                }
                dz = dx;
            }
        }
        Ok(grads)
    }

    fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Shape(format!(
                "MLP has {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        self.stamp.bump();
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            l.weights
                .as_mut_slice()
                .copy_from_slice(&flat[offset..offset + nw]);
            offset += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::Mlp {
            widths: self.widths.clone(),
            parameters: self.parameters(),
        }
    }
}
