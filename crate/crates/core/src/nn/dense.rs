use super::gemm::{gemm, View, ViewMut};
use super::tensor::Tensor3;
use crate::{Error, Result};

/// `out = W x + b` on each batch item's flattened `[channels * length]`
/// features. `W` is `[outputs][inputs]`; the result is `[batch, outputs, 1]`.
pub fn fully_connected(x: &Tensor3, weights: &[f64], bias: &[f64]) -> Result<Tensor3> {
    let batch = x.batch();
    let inputs = x.channels() * x.length();
    let outputs = bias.len();
    if weights.len() != outputs * inputs {
        return Err(Error::Shape(format!(
            "fully connected layer with {outputs} outputs cannot take {inputs} features"
        )));
    }
    let mut out = Tensor3::zeros([batch, outputs, 1]);
    for b in 0..batch {
        out.values[b * outputs..(b + 1) * outputs].copy_from_slice(bias);
    }
    gemm(
        1.0,
        View::new(&x.values, 0, batch, inputs, inputs, 1),
        View::new(weights, 0, outputs, inputs, inputs, 1).t(),
        1.0,
        ViewMut::new(&mut out.values, 0, outputs, 1),
    );
    Ok(out)
}

/// Returns `(grad_x, grad_w, grad_b)`.
pub fn fully_connected_backward(x: &Tensor3, weights: &[f64], upstream: &Tensor3) -> Result<(Tensor3, Vec<f64>, Vec<f64>)> {
    let batch = x.batch();
    let inputs = x.channels() * x.length();
    let outputs = upstream.channels() * upstream.length();
    if upstream.batch() != batch || weights.len() != outputs * inputs {
        return Err(Error::Shape("fully connected backward: shape mismatch".into()));
    }
    let mut gw = vec![0.0; outputs * inputs];
    gemm(
        1.0,
        View::new(&upstream.values, 0, batch, outputs, outputs, 1).t(),
        View::new(&x.values, 0, batch, inputs, inputs, 1),
        0.0,
        ViewMut::new(&mut gw, 0, inputs, 1),
    );
    let mut gb = vec![0.0; outputs];
    for row in upstream.values.chunks(outputs) {
        gb.iter_mut().zip(row).for_each(|(a, b)| *a += b);
    }
    let mut gx = Tensor3::zeros(x.dims());
    gemm(
        1.0,
        View::new(&upstream.values, 0, batch, outputs, outputs, 1),
        View::new(weights, 0, outputs, inputs, inputs, 1),
        0.0,
        ViewMut::new(&mut gx.values, 0, inputs, 1),
    );
    Ok((gx, gw, gb))
}
