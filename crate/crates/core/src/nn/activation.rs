use super::tensor::Tensor3;
use crate::{Error, Result};

pub fn relu(x: &Tensor3) -> Tensor3 {
    let mut y = x.clone();
    y.grad = None;
    y.values.iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

/// Gradient through ReLU given its input; the kink at 0 gets slope 0.
pub fn relu_backward(x: &Tensor3, upstream: &Tensor3) -> Result<Tensor3> {
    upstream.expect_dims(x.dims(), "relu backward")?;
    let values = x
        .values
        .iter()
        .zip(&upstream.values)
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Tensor3::new(x.dims(), values)
}

/// Row-wise softmax of a `[rows, classes]` matrix, with the row maximum
/// subtracted before exponentiating.
pub fn softmax_rows(logits: &[f64], classes: usize) -> Vec<f64> {
    let mut out = logits.to_vec();
    for row in out.chunks_mut(classes) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

/// Mean cross-entropy over the batch and its gradient with respect to the
/// logits, `(p - onehot) / batch`.
pub fn softmax_cross_entropy(logits: &[f64], classes: usize, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    if classes == 0 || logits.len() != labels.len() * classes {
        return Err(Error::Shape(format!(
            "{} logits do not form {} rows of {classes}",
            logits.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::Argument(format!("label {bad} outside 0..{classes}")));
    }
    let n = labels.len() as f64;
    let mut grad = softmax_rows(logits, classes);
    let mut loss = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        let row = &logits[r * classes..(r + 1) * classes];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[label];
        grad[r * classes + label] -= 1.0;
    }
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits() {
        let (loss, _) = softmax_cross_entropy(&[0.0; 5], 5, &[2]).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let (loss, grad) = softmax_cross_entropy(&[1000.0, 0.0, 0.0, 0.0, 0.0], 5, &[0]).unwrap();
        assert!(loss.abs() < 1e-12 && grad.iter().all(|g| g.is_finite()));
        let p = softmax_rows(&[1000.0, -1000.0, 3.0], 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range() {
        assert!(matches!(
            softmax_cross_entropy(&[0.0; 5], 5, &[5]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let logits = vec![0.3, -1.2, 2.0, 0.7, -0.1, 1.1, 0.0, -0.4, 0.9, 0.2];
        let labels = [2, 0];
        let (_, grad) = softmax_cross_entropy(&logits, 5, &labels).unwrap();
        let h = 1e-5;
        for j in 0..logits.len() {
            let (mut p, mut m) = (logits.clone(), logits.clone());
            p[j] += h;
            m[j] -= h;
            let num = (softmax_cross_entropy(&p, 5, &labels).unwrap().0 - softmax_cross_entropy(&m, 5, &labels).unwrap().0)
                / (2.0 * h);
            assert!((grad[j] - num).abs() < 1e-6 * num.abs().max(1e-3));
        }
    }

    #[test]
    fn relu_routes_gradient() {
        let x = Tensor3::new([1, 1, 3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).values, vec![0.0, 0.0, 2.0]);
        let g = relu_backward(&x, &Tensor3::new([1, 1, 3], vec![5.0, 5.0, 5.0]).unwrap()).unwrap();
        assert_eq!(g.values, vec![0.0, 0.0, 5.0]);
    }
}
