//! KAN and MLP binary classifiers.
//!
//! Both architectures emit two raw logits per row, cache what the backward
//! pass needs when asked, and return batch-summed parameter gradients.
//! Parameters are exposed as one flat vector in a fixed canonical order so
//! the optimizer and checkpoints are architecture-agnostic.

mod checkpoint;
mod kan;
mod mlp;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, LoadedModel};
pub use kan::{init_kan, EdgeFunction, KanCache, KanGradients, KanLayer, KanModel};
pub use mlp::{init_mlp, DenseLayer, MlpCache, MlpGradients, MlpModel};

/// Bytes per trainable scalar.
pub const BYTES_PER_SCALAR: usize = 8;
/// Adam keeps two moment estimates next to every parameter.
pub const ADAM_MEMORY_MULTIPLIER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Kan,
    Mlp,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Kan => "kan",
            Architecture::Mlp => "mlp",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kan" => Ok(Architecture::Kan),
            "mlp" => Ok(Architecture::Mlp),
            other => Err(Error::Config(format!("unknown architecture {other:?}"))),
        }
    }
}

/// Flat view of a gradient buffer, in the owning model's parameter order.
pub trait GradientBuffer {
    fn flatten(&self) -> Vec<f64>;
}

pub trait Classifier: Clone + Send + Sync {
    type Cache;
    type Gradients: GradientBuffer;

    fn architecture(&self) -> Architecture;

    /// `[d_in, hidden..., 2]`
    fn widths(&self) -> &[usize];

    /// Raw logits, `n x 2`, plus the backward cache when requested.
    fn forward(&self, batch: &Matrix, want_cache: bool) -> Result<(Matrix, Option<Self::Cache>)>;

    /// Batch-summed gradients of `sum_n dlogits[n] . logits[n]`.
    fn backward(&self, cache: &Self::Cache, dlogits: &Matrix) -> Result<Self::Gradients>;

    fn parameters(&self) -> Vec<f64>;

    fn set_parameters(&mut self, flat: &[f64]) -> Result<()>;

    fn parameter_count(&self) -> usize;

    fn logits(&self, batch: &Matrix) -> Result<Matrix> {
        Ok(self.forward(batch, false)?.0)
    }

    fn to_checkpoint(&self) -> Checkpoint;
}

/// Deterministic memory footprint of a model: trainable scalars times eight
/// bytes, times three when Adam state is attached.
pub fn parameter_memory<M: Classifier>(model: &M, with_adam: bool) -> usize {
    let bare = model.parameter_count() * BYTES_PER_SCALAR;
    if with_adam {
        bare * ADAM_MEMORY_MULTIPLIER
    } else {
        bare
    }
}

pub(crate) fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.is_empty() {
        return Err(Error::Shape("widths must not be empty".into()));
    }
    if let Some(w) = widths.iter().find(|&&w| w < 1) {
        return Err(Error::Shape(format!("layer width {w} < 1 in {widths:?}")));
    }
    if widths.last() != Some(&2) {
        return Err(Error::Shape(format!(
            "the output layer must have two logits, widths were {widths:?}"
        )));
    }
    Ok(())
}

/// Identifies one parameter state of one model instance; caches and
/// gradient checks use it to detect stale forward passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Stamp {
    id: u64,
    version: u64,
}

impl Stamp {
    pub(crate) fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        Stamp {
            id: NEXT.fetch_add(1, Ordering::Relaxed),
            version: 0,
        }
    }

    pub(crate) fn bump(&mut self) {
        self.version += 1;
    }
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

#[inline]
pub fn silu_derivative(x: f64) -> f64 {
    let s = 1.0 / (1.0 + (-x).exp());
    s * (1.0 + x * (1.0 - s))
}
