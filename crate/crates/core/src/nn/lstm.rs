//! Single LSTM layer over `[batch, features, time]` sequences.
//!
//! Gate blocks are stacked in the order input, forget, cell candidate,
//! output: `w_ih` is `[4H][I]`, `w_hh` is `[4H][H]` and `bias` is `[4H]`.
//! The initial hidden and cell states are zero.

use serde::{Deserialize, Serialize};

use super::gemm::{gemm, View, ViewMut};
use super::tensor::Tensor3;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmShape {
    pub input_size: usize,
    pub hidden_size: usize,
}

impl LstmShape {
    pub fn w_ih_len(&self) -> usize {
        4 * self.hidden_size * self.input_size
    }

    pub fn w_hh_len(&self) -> usize {
        4 * self.hidden_size * self.hidden_size
    }

    pub fn param_count(&self) -> usize {
        self.w_ih_len() + self.w_hh_len() + 4 * self.hidden_size
    }

    fn check(&self, x: &Tensor3, w_ih: &[f64], w_hh: &[f64], bias: &[f64]) -> Result<()> {
        x.expect_channels(self.input_size, "lstm")?;
        if w_ih.len() != self.w_ih_len() || w_hh.len() != self.w_hh_len() || bias.len() != 4 * self.hidden_size {
            return Err(Error::Shape("lstm parameters do not match the layer shape".into()));
        }
        if x.length() == 0 {
            return Err(Error::Shape("lstm needs at least one time step".into()));
        }
        Ok(())
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Forward activations kept for backpropagation through time. All arrays
/// are time-major.
#[derive(Debug, Clone)]
pub struct LstmCache {
    dims: [usize; 3],
    /// `[T][B][I]`
    xt: Vec<f64>,
    /// Activated gates, `[T][B][4H]`.
    gates: Vec<f64>,
    /// Cell states `[T + 1][B][H]`, slot 0 is the zero initial state.
    c: Vec<f64>,
    /// Hidden states, same layout as `c`.
    h: Vec<f64>,
}

/// Runs the layer and returns every hidden state as `[batch, hidden, time]`.
pub fn lstm_layer_forward(
    x: &Tensor3,
    w_ih: &[f64],
    w_hh: &[f64],
    bias: &[f64],
    shape: &LstmShape,
) -> Result<(Tensor3, LstmCache)> {
    shape.check(x, w_ih, w_hh, bias)?;
    let [batch, inputs, steps] = x.dims();
    let hid = shape.hidden_size;
    let g4 = 4 * hid;

    let mut xt = vec![0.0; steps * batch * inputs];
    for b in 0..batch {
        for i in 0..inputs {
            let base = x.index(b, i, 0);
            for t in 0..steps {
                xt[(t * batch + b) * inputs + i] = x.values[base + t];
            }
        }
    }

    let mut z = vec![0.0; steps * batch * g4];
    for row in z.chunks_mut(g4) {
        row.copy_from_slice(bias);
    }
    gemm(
        1.0,
        View::new(&xt, 0, steps * batch, inputs, inputs, 1),
        View::new(w_ih, 0, g4, inputs, inputs, 1).t(),
        1.0,
        ViewMut::new(&mut z, 0, g4, 1),
    );

    let state = batch * hid;
    let mut c = vec![0.0; (steps + 1) * state];
    let mut h = vec![0.0; (steps + 1) * state];
    for t in 0..steps {
        let (h_done, h_rest) = h.split_at_mut((t + 1) * state);
        let h_prev = &h_done[t * state..];
        gemm(
            1.0,
            View::new(h_prev, 0, batch, hid, hid, 1),
            View::new(w_hh, 0, g4, hid, hid, 1).t(),
            1.0,
            ViewMut::new(&mut z, t * batch * g4, g4, 1),
        );
        let h_next = &mut h_rest[..state];
        for b in 0..batch {
            let zr = &mut z[(t * batch + b) * g4..(t * batch + b + 1) * g4];
            for j in 0..hid {
                let ig = sigmoid(zr[j]);
                let fg = sigmoid(zr[hid + j]);
                let gg = zr[2 * hid + j].tanh();
                let og = sigmoid(zr[3 * hid + j]);
                zr[j] = ig;
                zr[hid + j] = fg;
                zr[2 * hid + j] = gg;
                zr[3 * hid + j] = og;
                let cp = c[t * state + b * hid + j];
                let cn = fg * cp + ig * gg;
                c[(t + 1) * state + b * hid + j] = cn;
                h_next[b * hid + j] = og * cn.tanh();
            }
        }
    }

    let mut out = Tensor3::zeros([batch, hid, steps]);
    for b in 0..batch {
        for j in 0..hid {
            let base = out.index(b, j, 0);
            for t in 0..steps {
                out.values[base + t] = h[(t + 1) * state + b * hid + j];
            }
        }
    }
    Ok((
        out,
        LstmCache {
            dims: x.dims(),
            xt,
            gates: z,
            c,
            h,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub grad_x: Option<Tensor3>,
    pub grad_w_ih: Vec<f64>,
    pub grad_w_hh: Vec<f64>,
    pub grad_b: Vec<f64>,
}

/// Backpropagation through time for an upstream gradient on every hidden
/// state (`[batch, hidden, time]`, zero where a step is unused).
pub fn lstm_layer_backward(
    cache: &LstmCache,
    upstream: &Tensor3,
    w_ih: &[f64],
    w_hh: &[f64],
    shape: &LstmShape,
    want_grad_x: bool,
) -> Result<LstmGrads> {
    let [batch, inputs, steps] = cache.dims;
    let hid = shape.hidden_size;
    let g4 = 4 * hid;
    let state = batch * hid;
    upstream.expect_dims([batch, hid, steps], "lstm backward")?;
    if w_ih.len() != shape.w_ih_len() || w_hh.len() != shape.w_hh_len() {
        return Err(Error::Shape("lstm parameters do not match the layer shape".into()));
    }

    let mut dz = vec![0.0; steps * batch * g4];
    let mut dh_next = vec![0.0; state];
    let mut dc_next = vec![0.0; state];
    for t in (0..steps).rev() {
        for b in 0..batch {
            let gr = &cache.gates[(t * batch + b) * g4..(t * batch + b + 1) * g4];
            let dzr = &mut dz[(t * batch + b) * g4..(t * batch + b + 1) * g4];
            for j in 0..hid {
                let s = b * hid + j;
                let (ig, fg, gg, og) = (gr[j], gr[hid + j], gr[2 * hid + j], gr[3 * hid + j]);
                let tc = cache.c[(t + 1) * state + s].tanh();
                let dh = upstream.values[upstream.index(b, j, t)] + dh_next[s];
                let d_o = dh * tc;
                let dc = dc_next[s] + dh * og * (1.0 - tc * tc);
                dzr[j] = dc * gg * ig * (1.0 - ig);
                dzr[hid + j] = dc * cache.c[t * state + s] * fg * (1.0 - fg);
                dzr[2 * hid + j] = dc * ig * (1.0 - gg * gg);
                dzr[3 * hid + j] = d_o * og * (1.0 - og);
                dc_next[s] = dc * fg;
            }
        }
        gemm(
            1.0,
            View::new(&dz, t * batch * g4, batch, g4, g4, 1),
            View::new(w_hh, 0, g4, hid, hid, 1),
            0.0,
            ViewMut::new(&mut dh_next, 0, hid, 1),
        );
    }

    let rows = steps * batch;
    let dz_t = View::new(&dz, 0, rows, g4, g4, 1).t();
    let mut grad_w_hh = vec![0.0; shape.w_hh_len()];
    gemm(1.0, dz_t, View::new(&cache.h, 0, rows, hid, hid, 1), 0.0, ViewMut::new(&mut grad_w_hh, 0, hid, 1));
    let mut grad_w_ih = vec![0.0; shape.w_ih_len()];
    gemm(
        1.0,
        dz_t,
        View::new(&cache.xt, 0, rows, inputs, inputs, 1),
        0.0,
        ViewMut::new(&mut grad_w_ih, 0, inputs, 1),
    );
    let mut grad_b = vec![0.0; g4];
    for row in dz.chunks(g4) {
        grad_b.iter_mut().zip(row).for_each(|(a, v)| *a += v);
    }

    let grad_x = if want_grad_x {
        let mut dxt = vec![0.0; rows * inputs];
        gemm(
            1.0,
            View::new(&dz, 0, rows, g4, g4, 1),
            View::new(w_ih, 0, g4, inputs, inputs, 1),
            0.0,
            ViewMut::new(&mut dxt, 0, inputs, 1),
        );
        let mut gx = Tensor3::zeros(cache.dims);
        for b in 0..batch {
            for i in 0..inputs {
                let base = gx.index(b, i, 0);
                for t in 0..steps {
                    gx.values[base + t] = dxt[(t * batch + b) * inputs + i];
                }
            }
        }
        Some(gx)
    } else {
        None
    };

    Ok(LstmGrads {
        grad_x,
        grad_w_ih,
        grad_w_hh,
        grad_b,
    })
}
