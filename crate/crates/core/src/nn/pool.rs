use super::tensor::Tensor3;
use crate::{Error, Result};

/// Max over windows starting at `j * stride`. The returned indices point
/// into `x.values` and route gradients back; ties go to the earliest
/// element.
pub fn maxpool1d(x: &Tensor3, window: usize, stride: usize) -> Result<(Tensor3, Vec<usize>)> {
    let [batch, chans, len] = x.dims();
    if window == 0 || stride == 0 || window > len {
        return Err(Error::Shape(format!(
            "max pool window {window} stride {stride} does not fit length {len}"
        )));
    }
    let out_len = (len - window) / stride + 1;
    let mut out = Tensor3::zeros([batch, chans, out_len]);
    let mut argmax = vec![0; batch * chans * out_len];
    for b in 0..batch {
        for c in 0..chans {
            let base = x.index(b, c, 0);
            for j in 0..out_len {
                let start = base + j * stride;
                let mut best = start;
                for idx in start + 1..start + window {
                    if x.values[idx] > x.values[best] {
                        best = idx;
                    }
                }
                let o = out.index(b, c, j);
                out.values[o] = x.values[best];
                argmax[o] = best;
            }
        }
    }
    Ok((out, argmax))
}

pub fn maxpool1d_backward(upstream: &Tensor3, argmax: &[usize], input_dims: [usize; 3]) -> Result<Tensor3> {
    if upstream.values.len() != argmax.len() {
        return Err(Error::Shape("max pool backward: upstream does not match stored argmax".into()));
    }
    let mut gx = Tensor3::zeros(input_dims);
    for (g, &i) in upstream.values.iter().zip(argmax) {
        gx.values[i] += g;
    }
    Ok(gx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let x = Tensor3::new([1, 1, 6], vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0]).unwrap();
        let (y, arg) = maxpool1d(&x, 2, 2).unwrap();
        assert_eq!(y.values, vec![3.0, 4.0, 9.0]);
        assert_eq!(arg, vec![0, 2, 5]);
        let g = maxpool1d_backward(&Tensor3::new([1, 1, 3], vec![1.0, 2.0, 3.0]).unwrap(), &arg, x.dims()).unwrap();
        assert_eq!(g.values, vec![1.0, 0.0, 2.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn output_lengths() {
        assert_eq!(maxpool1d(&Tensor3::zeros([1, 1, 5000]), 50, 50).unwrap().0.length(), 100);
        assert_eq!(maxpool1d(&Tensor3::zeros([1, 1, 100]), 10, 10).unwrap().0.length(), 10);
        assert_eq!(maxpool1d(&Tensor3::zeros([1, 1, 10]), 10, 10).unwrap().0.length(), 1);
        assert!(maxpool1d(&Tensor3::zeros([1, 1, 9]), 10, 10).is_err());
    }
}
