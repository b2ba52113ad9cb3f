//! 1-D convolution over `[batch, channels, length]` tensors.
//!
//! The input is laid out time-major with zero padding so that the im2col
//! matrix is a strided view of it (row `t` starts `in_channels` values after
//! row `t - 1`), and the whole batch goes through a single GEMM.

use serde::{Deserialize, Serialize};

use super::gemm::{gemm, View, ViewMut};
use super::tensor::Tensor3;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conv1dShape {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub padding: usize,
}

impl Conv1dShape {
    /// Odd kernel with length-preserving symmetric padding.
    pub fn same(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            padding: (kernel - 1) / 2,
        }
    }

    /// Weights are stored `[out][in][kernel]`.
    pub fn weight_len(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel
    }

    pub fn param_count(&self) -> usize {
        self.weight_len() + self.out_channels
    }

    pub fn output_len(&self, input_len: usize) -> Option<usize> {
        (input_len + 2 * self.padding + 1).checked_sub(self.kernel).filter(|&n| n > 0)
    }

    fn check(&self, x: &Tensor3, weights: &[f64]) -> Result<usize> {
        x.expect_channels(self.in_channels, "conv1d")?;
        if weights.len() != self.weight_len() {
            return Err(Error::Shape(format!(
                "conv1d weights need {} values, got {}",
                self.weight_len(),
                weights.len()
            )));
        }
        self.output_len(x.length())
            .ok_or_else(|| Error::Shape(format!("conv1d kernel {} longer than padded input", self.kernel)))
    }
}

/// `[batch][length + 2 * padding][in]` copy of `x`.
fn padded_time_major(x: &Tensor3, shape: &Conv1dShape) -> (Vec<f64>, usize) {
    let [batch, chans, len] = x.dims();
    let lp = len + 2 * shape.padding;
    let mut out = vec![0.0; batch * lp * chans];
    for b in 0..batch {
        let src = x.item(b);
        let dst = &mut out[b * lp * chans..(b + 1) * lp * chans];
        for i in 0..chans {
            for (t, &v) in src[i * len..(i + 1) * len].iter().enumerate() {
                dst[(t + shape.padding) * chans + i] = v;
            }
        }
    }
    (out, lp)
}

/// `out[b][o][t] = bias[o] + sum_{i,k} w[o][i][k] * x_padded[b][i][t + k]`.
pub fn conv1d_forward(x: &Tensor3, weights: &[f64], bias: &[f64], shape: &Conv1dShape) -> Result<Tensor3> {
    let out_len = shape.check(x, weights)?;
    if bias.len() != shape.out_channels {
        return Err(Error::Shape(format!(
            "conv1d bias needs {} values, got {}",
            shape.out_channels,
            bias.len()
        )));
    }
    let (i_ch, o_ch, k) = (shape.in_channels, shape.out_channels, shape.kernel);
    let batch = x.batch();
    let (xp, lp) = padded_time_major(x, shape);
    let rows = batch * lp - (k - 1);

    // [k * in + i][o] arrangement of the weights.
    let mut wt = vec![0.0; k * i_ch * o_ch];
    for o in 0..o_ch {
        for i in 0..i_ch {
            for kk in 0..k {
                wt[(kk * i_ch + i) * o_ch + o] = weights[(o * i_ch + i) * k + kk];
            }
        }
    }
    let mut c = vec![0.0; rows * o_ch];
    gemm(
        1.0,
        View::new(&xp, 0, rows, k * i_ch, i_ch, 1),
        View::new(&wt, 0, k * i_ch, o_ch, o_ch, 1),
        0.0,
        ViewMut::new(&mut c, 0, o_ch, 1),
    );

    let mut out = Tensor3::zeros([batch, o_ch, out_len]);
    for b in 0..batch {
        for o in 0..o_ch {
            let base = out.index(b, o, 0);
            for t in 0..out_len {
                out.values[base + t] = c[(b * lp + t) * o_ch + o] + bias[o];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    /// Absent when the caller did not ask for the input gradient.
    pub grad_x: Option<Tensor3>,
    pub grad_w: Vec<f64>,
    pub grad_b: Vec<f64>,
}

pub fn conv1d_backward(
    x: &Tensor3,
    weights: &[f64],
    upstream: &Tensor3,
    shape: &Conv1dShape,
    want_grad_x: bool,
) -> Result<ConvGrads> {
    let out_len = shape.check(x, weights)?;
    let (i_ch, o_ch, k) = (shape.in_channels, shape.out_channels, shape.kernel);
    let batch = x.batch();
    upstream.expect_dims([batch, o_ch, out_len], "conv1d backward")?;
    let (xp, lp) = padded_time_major(x, shape);
    let rows = batch * lp - (k - 1);

    // Upstream gradient as [row][o], zero on rows that straddle two items.
    let mut g = vec![0.0; batch * lp * o_ch];
    let mut grad_b = vec![0.0; o_ch];
    for b in 0..batch {
        for o in 0..o_ch {
            let base = upstream.index(b, o, 0);
            let mut s = 0.0;
            for t in 0..out_len {
                let v = upstream.values[base + t];
                g[(b * lp + t) * o_ch + o] = v;
                s += v;
            }
            grad_b[o] += s;
        }
    }

    let mut gwt = vec![0.0; k * i_ch * o_ch];
    gemm(
        1.0,
        View::new(&xp, 0, rows, k * i_ch, i_ch, 1).t(),
        View::new(&g, 0, rows, o_ch, o_ch, 1),
        0.0,
        ViewMut::new(&mut gwt, 0, o_ch, 1),
    );
    let mut grad_w = vec![0.0; shape.weight_len()];
    for o in 0..o_ch {
        for i in 0..i_ch {
            for kk in 0..k {
                grad_w[(o * i_ch + i) * k + kk] = gwt[(kk * i_ch + i) * o_ch + o];
            }
        }
    }

    let grad_x = if want_grad_x {
        let mut gxp = vec![0.0; batch * lp * i_ch];
        for kk in 0..k {
            // Tap kk of every output row lands kk rows further down.
            gemm(
                1.0,
                View::new(&g, 0, rows, o_ch, o_ch, 1),
                View::new(weights, kk, o_ch, i_ch, i_ch * k, k),
                1.0,
                ViewMut::new(&mut gxp, kk * i_ch, i_ch, 1),
            );
        }
        let len = x.length();
        let mut gx = Tensor3::zeros(x.dims());
        for b in 0..batch {
            for i in 0..i_ch {
                let base = gx.index(b, i, 0);
                for t in 0..len {
                    gx.values[base + t] = gxp[(b * lp + t + shape.padding) * i_ch + i];
                }
            }
        }
        Some(gx)
    } else {
        None
    };

    Ok(ConvGrads { grad_x, grad_w, grad_b })
}
