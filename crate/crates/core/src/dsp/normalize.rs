/// Channels whose population standard deviation falls below this are mapped
/// to all zeros.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Zero-mean, unit-variance scaling with population (1/N) variance.
///
/// Empty input yields empty output; a constant channel yields zeros.
pub fn normalize_channel(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std >= DEGENERATE_STD) {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - mean) / std).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn moments(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
        (m, v.sqrt())
    }

    #[test]
    fn hand_computed() {
        let y = normalize_channel(&[1.0, 2.0, 3.0]);
        // sigma = sqrt(2/3), (1 - 2) / sigma = -sqrt(3/2)
        let s = 1.5f64.sqrt();
        assert!((y[0] + s).abs() < 1e-15);
        assert_eq!(y[1], 0.0);
        assert!((y[2] - s).abs() < 1e-15);
    }

    #[test]
    fn constant_goes_to_zero() {
        assert_eq!(normalize_channel(&[7.0, 7.0, 7.0]), vec![0.0; 3]);
    }

    proptest! {
        #[test]
        fn unit_moments(x in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            let (_, s) = moments(&x);
            prop_assume!(s > 1e-6);
            let (m, s) = moments(&normalize_channel(&x));
            prop_assert!(m.abs() < 1e-9);
            prop_assert!((s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn affine_invariance(
            x in prop::collection::vec(-10.0f64..10.0, 2..200),
            a in 0.01f64..100.0,
            b in -100.0f64..100.0,
        ) {
            let (_, s) = moments(&x);
            prop_assume!(s > 1e-3);
            let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let y0 = normalize_channel(&x);
            let y1 = normalize_channel(&scaled);
            for (p, q) in y0.iter().zip(&y1) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
