use rand::Rng;

use super::tensor::{Mode, Tensor3};
use crate::{Error, Result};

/// Inverted dropout. Returns the output and, in train mode with a nonzero
/// rate, the per-element multiplier (0 or `1 / (1 - rate)`) for the
/// backward pass.
pub fn dropout<R: Rng + ?Sized>(x: &Tensor3, rate: f64, mode: Mode, rng: &mut R) -> Result<(Tensor3, Option<Vec<f64>>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Argument(format!("dropout rate must lie in [0, 1), got {rate}")));
    }
    if mode == Mode::Infer || rate == 0.0 {
        let mut y = x.clone();
        y.grad = None;
        return Ok((y, None));
    }
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = (0..x.values.len())
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let values = x.values.iter().zip(&mask).map(|(v, m)| v * m).collect();
    Ok((Tensor3::new(x.dims(), values)?, Some(mask)))
}

pub fn dropout_backward(upstream: &Tensor3, mask: Option<&[f64]>) -> Result<Tensor3> {
    match mask {
        None => Ok(Tensor3::new(upstream.dims(), upstream.values.clone())?),
        Some(m) => {
            if m.len() != upstream.values.len() {
                return Err(Error::Shape("dropout backward: mask size mismatch".into()));
            }
            Tensor3::new(upstream.dims(), upstream.values.iter().zip(m).map(|(g, k)| g * k).collect())
        }
    }
}
