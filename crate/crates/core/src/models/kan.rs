use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_widths, silu, silu_derivative, Architecture, Checkpoint, Classifier, GradientBuffer, Stamp};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;
use crate::spline::{combine, ActiveBasis, KnotVector};

/// Standard deviation of the initial spline coefficients.
pub const COEFFICIENT_INIT_STD: f64 = 0.1;

/// One learnable edge: `phi(x) = base_weight * silu(x) + spline_weight * spline(x)`.
///
/// The spline is evaluated at `x` clamped to the knot domain, so outside the
/// grid it is constant and contributes no slope; the silu term acts on the
/// raw input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFunction {
    pub base_weight: f64,
    pub spline_weight: f64,
    pub coefficients: Vec<f64>,
}

impl EdgeFunction {
    fn zeros(basis_count: usize) -> Self {
        EdgeFunction {
            base_weight: 0.0,
            spline_weight: 0.0,
            coefficients: vec![0.0; basis_count],
        }
    }

    /// `(phi(x), dphi/dx)`.
    pub fn eval(&self, knots: &KnotVector, x: f64) -> (f64, f64) {
        let active = knots.eval_active(x);
        let (s, ds) = combine(&active, &self.coefficients);
        let (a, b) = knots.domain();
        let ds = if x < a || x > b { 0.0 } else { ds };
        (
            self.base_weight * silu(x) + self.spline_weight * s,
            self.base_weight * silu_derivative(x) + self.spline_weight * ds,
        )
    }
}

/// `y_j = sum_i phi_ji(x_i)` with a knot grid shared by all edges.
#[derive(Debug, Clone, PartialEq)]
pub struct KanLayer {
    in_dim: usize,
    out_dim: usize,
    knots: KnotVector,
    /// Row-major `out_dim x in_dim`.
    edges: Vec<EdgeFunction>,
}

impl KanLayer {
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn edge(&self, out: usize, inp: usize) -> &EdgeFunction {
        &self.edges[out * self.in_dim + inp]
    }

    pub fn edge_mut(&mut self, out: usize, inp: usize) -> &mut EdgeFunction {
        &mut self.edges[out * self.in_dim + inp]
    }

    pub fn edges(&self) -> &[EdgeFunction] {
        &self.edges
    }

    fn parameter_count(&self) -> usize {
        self.edges.len() * (self.knots.basis_count() + 2)
    }

    fn forward(&self, input: &Matrix, mut cache: Option<&mut LayerCache>) -> Matrix {
        let (a, b) = self.knots.domain();
        let rows = input.rows();
        let mut out = Matrix::zeros(rows, self.out_dim);
        for n in 0..rows {
            let x = input.row(n);
            let y = out.row_mut(n);
            for (i, &u) in x.iter().enumerate() {
                let active = self.knots.eval_active(u);
                let s = silu(u);
                for (j, yj) in y.iter_mut().enumerate() {
                    let e = &self.edges[j * self.in_dim + i];
                    let c = &e.coefficients[active.start..active.start + active.len];
                    let mut spline = 0.0;
                    for (cr, br) in c.iter().zip(active.values()) {
                        spline += cr * br;
                    }
                    *yj += e.base_weight * s + e.spline_weight * spline;
                }
                if let Some(c) = cache.as_deref_mut() {
                    c.basis.push(active);
                    c.silu.push(s);
                    c.silu_slope.push(silu_derivative(u));
                    c.saturated.push(u < a || u > b);
                }
            }
        }
        out
    }

    /// Accumulates edge gradients into `grads` and returns `dL/dinput` if asked.
    fn backward(
        &self,
        cache: &LayerCache,
        rows: usize,
        dout: &Matrix,
        grads: &mut [EdgeFunction],
        want_dinput: bool,
    ) -> Option<Matrix> {
        let mut dinput = want_dinput.then(|| Matrix::zeros(rows, self.in_dim));
        for n in 0..rows {
            let g_row = dout.row(n);
            for i in 0..self.in_dim {
                let slot = n * self.in_dim + i;
                let active = &cache.basis[slot];
                let s = cache.silu[slot];
                let ds = cache.silu_slope[slot];
                let saturated = cache.saturated[slot];
                let mut dx = 0.0;
                for (j, &g) in g_row.iter().enumerate() {
                    let e = &self.edges[j * self.in_dim + i];
                    let ge = &mut grads[j * self.in_dim + i];
                    let (spline, slope) = combine(active, &e.coefficients);
                    ge.base_weight += g * s;
                    ge.spline_weight += g * spline;
                    let scale = g * e.spline_weight;
                    let gc = &mut ge.coefficients[active.start..active.start + active.len];
                    for (gcr, br) in gc.iter_mut().zip(active.values()) {
                        *gcr += scale * br;
                    }
                    dx += g * e.base_weight * ds;
                    if !saturated {
                        dx += g * e.spline_weight * slope;
                    }
                }
                if let Some(d) = dinput.as_mut() {
                    d.set(n, i, dx);
                }
            }
        }
        dinput
    }
}

#[derive(Debug, Clone, Default)]
struct LayerCache {
    input: Option<Matrix>,
    basis: Vec<ActiveBasis>,
    silu: Vec<f64>,
    silu_slope: Vec<f64>,
    saturated: Vec<bool>,
}

/// Activations retained by one [`KanModel::forward`] call.
#[derive(Debug, Clone)]
pub struct KanCache {
    stamp: Stamp,
    rows: usize,
    layers: Vec<LayerCache>,
}

impl KanCache {
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Input of layer `l` as seen by its edges (before spline clamping).
    pub fn layer_input(&self, l: usize) -> Option<&Matrix> {
        self.layers.get(l).and_then(|c| c.input.as_ref())
    }
}

/// Per-edge gradients, shaped like the model's edges.
#[derive(Debug, Clone, PartialEq)]
pub struct KanGradients {
    pub layers: Vec<Vec<EdgeFunction>>,
}

impl GradientBuffer for KanGradients {
    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for e in layer {
                out.push(e.base_weight);
                out.push(e.spline_weight);
                out.extend_from_slice(&e.coefficients);
            }
        }
        out
    }
}

/// Stacked KAN layers ending in two logits.
#[derive(Debug)]
pub struct KanModel {
    widths: Vec<usize>,
    order: usize,
    intervals: usize,
    domain: (f64, f64),
    layers: Vec<KanLayer>,
    stamp: Stamp,
}

impl Clone for KanModel {
    fn clone(&self) -> Self {
        KanModel {
            widths: self.widths.clone(),
            order: self.order,
            intervals: self.intervals,
            domain: self.domain,
            layers: self.layers.clone(),
            stamp: Stamp::fresh(),
        }
    }
}

impl PartialEq for KanModel {
    fn eq(&self, other: &Self) -> bool {
        self.widths == other.widths
            && self.order == other.order
            && self.intervals == other.intervals
            && self.domain == other.domain
            && self.layers == other.layers
    }
}

/// Builds a KAN with `silu` and spline weights at 1 and coefficients drawn
/// from `N(0, 0.1^2)`, each edge from its own stream keyed by
/// `(seed, layer, row, col)`.
pub fn init_kan(
    widths: &[usize],
    order: usize,
    intervals: usize,
    domain: (f64, f64),
    seed: u64,
) -> Result<KanModel> {
    check_widths(widths)?;
    let knots = KnotVector::new(order, intervals, domain)?;
    let normal = Normal::new(0.0, COEFFICIENT_INIT_STD).expect("valid std");
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let (in_dim, out_dim) = (w[0], w[1]);
            let mut edges = Vec::with_capacity(in_dim * out_dim);
            for j in 0..out_dim {
                for i in 0..in_dim {
                    let mut rng = rng::stream(
                        seed,
                        &[rng::label::INIT, l as u64, j as u64, i as u64],
                    );
                    edges.push(EdgeFunction {
                        base_weight: 1.0,
                        spline_weight: 1.0,
                        coefficients: (0..knots.basis_count())
                            .map(|_| normal.sample(&mut rng))
                            .collect(),
                    });
                }
            }
            KanLayer {
                in_dim,
                out_dim,
                knots: knots.clone(),
                edges,
            }
        })
        .collect();
    Ok(KanModel {
        widths: widths.to_vec(),
        order,
        intervals,
        domain,
        layers,
        stamp: Stamp::fresh(),
    })
}

impl KanModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn layers(&self) -> &[KanLayer] {
        &self.layers
    }

    /// Mutable access to a layer; invalidates outstanding caches.
    pub fn layer_mut(&mut self, l: usize) -> &mut KanLayer {
        self.stamp.bump();
        &mut self.layers[l]
    }

    pub fn zero_gradients(&self) -> KanGradients {
        KanGradients {
            layers: self
                .layers
                .iter()
                .map(|l| vec![EdgeFunction::zeros(l.knots.basis_count()); l.edges.len()])
                .collect(),
        }
    }

    pub(crate) fn from_parts(
        widths: &[usize],
        order: usize,
        intervals: usize,
        domain: (f64, f64),
        parameters: &[f64],
    ) -> Result<Self> {
        let mut model = init_kan(widths, order, intervals, domain, 0)?;
        model.set_parameters(parameters)?;
        Ok(model)
    }
}

impl Classifier for KanModel {
    type Cache = KanCache;
    type Gradients = KanGradients;

    fn architecture(&self) -> Architecture {
        Architecture::Kan
    }

    fn widths(&self) -> &[usize] {
        &self.widths
    }

    fn forward(&self, batch: &Matrix, want_cache: bool) -> Result<(Matrix, Option<KanCache>)> {
        if batch.cols() != self.widths[0] {
            return Err(Error::Shape(format!(
                "KAN expects {} input columns, got {}",
                self.widths[0],
                batch.cols()
            )));
        }
        let mut caches = Vec::new();
        let mut current = batch.clone();
        for layer in &self.layers {
            if want_cache {
                let mut c = LayerCache {
                    input: Some(current.clone()),
                    ..LayerCache::default()
                };
                let n = current.rows() * layer.in_dim;
                c.basis.reserve(n);
                c.silu.reserve(n);
                c.silu_slope.reserve(n);
                c.saturated.reserve(n);
                current = layer.forward(&current, Some(&mut c));
                caches.push(c);
            } else {
                current = layer.forward(&current, None);
            }
        }
        let cache = want_cache.then(|| KanCache {
            stamp: self.stamp,
            rows: batch.rows(),
            layers: caches,
        });
        Ok((current, cache))
    }

    fn backward(&self, cache: &KanCache, dlogits: &Matrix) -> Result<KanGradients> {
        if cache.stamp != self.stamp || cache.layers.len() != self.layers.len() {
            return Err(Error::Cache(
                "cache was produced by a different model or parameter state".into(),
            ));
        }
        if dlogits.shape() != (cache.rows, 2) {
            return Err(Error::Shape(format!(
                "dlogits is {:?}, expected ({}, 2)",
                dlogits.shape(),
                cache.rows
            )));
        }
        let mut grads = self.zero_gradients();
        let mut dout = dlogits.clone();
        for l in (0..self.layers.len()).rev() {
            let d = self.layers[l].backward(
                &cache.layers[l],
                cache.rows,
                &dout,
                &mut grads.layers[l],
                l > 0,
            );
            if let Some(d) = d {
                dout = d;
            }
        }
        Ok(grads)
    }

    fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for layer in &self.layers {
            for e in &layer.edges {
                out.push(e.base_weight);
                out.push(e.spline_weight);
                out.extend_from_slice(&e.coefficients);
            }
        }
        out
    }

    fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Shape(format!(
                "KAN has {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        self.stamp.bump();
        let mut it = flat.iter().copied();
        for layer in &mut self.layers {
            for e in &mut layer.edges {
                e.base_weight = it.next().expect("length checked");
                e.spline_weight = it.next().expect("length checked");
                for c in &mut e.coefficients {
                    *c = it.next().expect("length checked");
                }
            }
        }
        Ok(())
    }

    fn parameter_count(&self) -> usize {
        self.layers.iter().map(KanLayer::parameter_count).sum()
    }

    fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::Kan {
            widths: self.widths.clone(),
            order: self.order,
            grid_intervals: self.intervals,
            domain: [self.domain.0, self.domain.1],
            parameters: self.parameters(),
        }
    }
}
