use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense `[batch, channels, length]` array, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    dims: [usize; 3],
    pub values: Vec<f64>,
    pub grad: Option<Vec<f64>>,
}

impl Tensor3 {
    pub fn new(dims: [usize; 3], values: Vec<f64>) -> Result<Self> {
        let n = dims.iter().product::<usize>();
        if values.len() != n {
            return Err(Error::Shape(format!(
                "tensor {dims:?} needs {n} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            dims,
            values,
            grad: None,
        })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            values: vec![0.0; dims.iter().product()],
            grad: None,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn batch(&self) -> usize {
        self.dims[0]
    }

    pub fn channels(&self) -> usize {
        self.dims[1]
    }

    pub fn length(&self) -> usize {
        self.dims[2]
    }

    #[inline]
    pub fn index(&self, b: usize, c: usize, t: usize) -> usize {
        (b * self.dims[1] + c) * self.dims[2] + t
    }

    pub fn at(&self, b: usize, c: usize, t: usize) -> f64 {
        self.values[self.index(b, c, t)]
    }

    /// The `[channels, length]` block of one batch item.
    pub fn item(&self, b: usize) -> &[f64] {
        let n = self.dims[1] * self.dims[2];
        &self.values[b * n..(b + 1) * n]
    }

    /// Same values viewed with new dimensions of equal total size.
    pub fn reshape(self, dims: [usize; 3]) -> Result<Self> {
        Self::new(dims, self.values)
    }

    pub(crate) fn expect_channels(&self, channels: usize, what: &str) -> Result<()> {
        if self.dims[1] != channels {
            return Err(Error::Shape(format!(
                "{what} expects {channels} input channels, got {:?}",
                self.dims
            )));
        }
        Ok(())
    }

    pub(crate) fn expect_dims(&self, dims: [usize; 3], what: &str) -> Result<()> {
        if self.dims != dims {
            return Err(Error::Shape(format!("{what} expects {dims:?}, got {:?}", self.dims)));
        }
        Ok(())
    }
}

/// Whether stochastic and batch-statistic layers run in training form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Infer,
}
