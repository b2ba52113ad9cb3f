//! Per-channel batch normalization over the batch and length axes.

use serde::{Deserialize, Serialize};

use super::tensor::{Mode, Tensor3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchNormConfig {
    pub eps: f64,
    /// Weight of the newest batch in the running statistics.
    pub momentum: f64,
}

impl Default for BatchNormConfig {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            momentum: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl RunningStats {
    pub fn new(channels: usize) -> Self {
        Self {
            mean: vec![0.0; channels],
            var: vec![1.0; channels],
        }
    }
}

/// What the backward pass needs from a forward call.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    x_hat: Vec<f64>,
    inv_std: Vec<f64>,
    dims: [usize; 3],
    mode: Mode,
}

/// Normalizes each channel, then applies `scale * x_hat + shift`.
///
/// Train mode uses the batch statistics and folds them into `running`
/// (unbiased variance); infer mode uses `running` and leaves it untouched.
pub fn batchnorm_forward(
    x: &Tensor3,
    scale: &[f64],
    shift: &[f64],
    running: &mut RunningStats,
    mode: Mode,
    cfg: &BatchNormConfig,
) -> Result<(Tensor3, BatchNormCache)> {
    let [batch, chans, len] = x.dims();
    if scale.len() != chans || shift.len() != chans || running.mean.len() != chans || running.var.len() != chans {
        return Err(Error::Shape(format!("batch norm over {chans} channels got mismatched parameters")));
    }
    let n = (batch * len) as f64;
    let mut out = Tensor3::zeros(x.dims());
    let mut x_hat = vec![0.0; x.values.len()];
    let mut inv_std = vec![0.0; chans];
    for c in 0..chans {
        let (mean, var) = match mode {
            Mode::Train => {
                let mut s = 0.0;
                for b in 0..batch {
                    let base = x.index(b, c, 0);
                    s += x.values[base..base + len].iter().sum::<f64>();
                }
                let mean = s / n;
                let mut ss = 0.0;
                for b in 0..batch {
                    let base = x.index(b, c, 0);
                    ss += x.values[base..base + len].iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
                }
                let var = ss / n;
                let unbiased = if n > 1.0 { ss / (n - 1.0) } else { var };
                let m = cfg.momentum;
                running.mean[c] = (1.0 - m) * running.mean[c] + m * mean;
                running.var[c] = (1.0 - m) * running.var[c] + m * unbiased;
                (mean, var)
            }
            Mode::Infer => (running.mean[c], running.var[c]),
        };
        let is = 1.0 / (var + cfg.eps).sqrt();
        inv_std[c] = is;
        for b in 0..batch {
            let base = x.index(b, c, 0);
            for j in base..base + len {
                let h = (x.values[j] - mean) * is;
                x_hat[j] = h;
                out.values[j] = scale[c] * h + shift[c];
            }
        }
    }
    Ok((
        out,
        BatchNormCache {
            x_hat,
            inv_std,
            dims: x.dims(),
            mode,
        },
    ))
}

/// Returns `(grad_x, grad_scale, grad_shift)`.
pub fn batchnorm_backward(
    cache: &BatchNormCache,
    upstream: &Tensor3,
    scale: &[f64],
) -> Result<(Tensor3, Vec<f64>, Vec<f64>)> {
    upstream.expect_dims(cache.dims, "batch norm backward")?;
    let [batch, chans, len] = cache.dims;
    let n = (batch * len) as f64;
    let mut gx = Tensor3::zeros(cache.dims);
    let mut g_scale = vec![0.0; chans];
    let mut g_shift = vec![0.0; chans];
    for c in 0..chans {
        let (mut sg, mut sgh) = (0.0, 0.0);
        for b in 0..batch {
            let base = upstream.index(b, c, 0);
            for j in base..base + len {
                sg += upstream.values[j];
                sgh += upstream.values[j] * cache.x_hat[j];
            }
        }
        g_shift[c] = sg;
        g_scale[c] = sgh;
        let k = scale[c] * cache.inv_std[c];
        for b in 0..batch {
            let base = upstream.index(b, c, 0);
            for j in base..base + len {
                gx.values[j] = match cache.mode {
                    Mode::Train => k * (upstream.values[j] - sg / n - cache.x_hat[j] * sgh / n),
                    Mode::Infer => k * upstream.values[j],
                };
            }
        }
    }
    Ok((gx, g_scale, g_shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(dims: [usize; 3], seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = dims.iter().product();
        Tensor3::new(dims, (0..n).map(|_| rng.random_range(-3.0..5.0)).collect()).unwrap()
    }

    #[test]
    fn train_mode_standardizes() {
        let mut x = random_tensor([4, 3, 9], 1);
        x.values.iter_mut().for_each(|v| *v *= 10.0);
        let mut rs = RunningStats::new(3);
        let (y, _) = batchnorm_forward(&x, &[1.0; 3], &[0.0; 3], &mut rs, Mode::Train, &BatchNormConfig::default())
            .unwrap();
        for c in 0..3 {
            let vals: Vec<f64> = (0..4).flat_map(|b| (0..9).map(move |t| (b, t))).map(|(b, t)| y.at(b, c, t)).collect();
            let m = vals.iter().sum::<f64>() / 36.0;
            let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 36.0;
            assert!(m.abs() < 1e-6);
            assert!((v - 1.0).abs() < 1e-6, "{v}");
        }
        assert!(rs.mean.iter().all(|&m| m != 0.0));
    }

    #[test]
    fn infer_mode_uses_running_stats_and_leaves_them() {
        let x = random_tensor([2, 2, 5], 2);
        let mut rs = RunningStats {
            mean: vec![1.0, -1.0],
            var: vec![4.0, 0.25],
        };
        let before = rs.clone();
        let (y, _) =
            batchnorm_forward(&x, &[2.0, 1.0], &[0.5, 0.0], &mut rs, Mode::Infer, &BatchNormConfig::default()).unwrap();
        assert_eq!(rs, before);
        let want = 2.0 * (x.at(1, 0, 3) - 1.0) / (4.0f64 + 1e-5).sqrt() + 0.5;
        assert!((y.at(1, 0, 3) - want).abs() < 1e-12);
    }

    #[test]
    fn backward_matches_finite_differences() {
        for mode in [Mode::Train, Mode::Infer] {
            let x = random_tensor([3, 2, 4], 3);
            let up = random_tensor([3, 2, 4], 4).values;
            let scale = vec![1.3, -0.7];
            let shift = vec![0.2, 0.4];
            let cfg = BatchNormConfig::default();
            let loss = |x: &Tensor3, scale: &[f64], shift: &[f64]| {
                let mut rs = RunningStats {
                    mean: vec![0.3, -0.2],
                    var: vec![2.0, 0.5],
                };
                let (y, _) = batchnorm_forward(x, scale, shift, &mut rs, mode, &cfg).unwrap();
                y.values.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>()
            };
            let mut rs = RunningStats {
                mean: vec![0.3, -0.2],
                var: vec![2.0, 0.5],
            };
            let (_, cache) = batchnorm_forward(&x, &scale, &shift, &mut rs, mode, &cfg).unwrap();
            let (gx, gs, gb) =
                batchnorm_backward(&cache, &Tensor3::new(x.dims(), up.clone()).unwrap(), &scale).unwrap();
            let h = 1e-5;
            let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
            for j in 0..x.values.len() {
                let (mut p, mut m) = (x.clone(), x.clone());
                p.values[j] += h;
                m.values[j] -= h;
                let num = (loss(&p, &scale, &shift) - loss(&m, &scale, &shift)) / (2.0 * h);
                assert!(rel(gx.values[j], num) < 1e-5, "{mode:?} x[{j}]: {} vs {num}", gx.values[j]);
            }
            for c in 0..2 {
                let (mut p, mut m) = (scale.clone(), scale.clone());
                p[c] += h;
                m[c] -= h;
                let num = (loss(&x, &p, &shift) - loss(&x, &m, &shift)) / (2.0 * h);
                assert!(rel(gs[c], num) < 1e-5);
                let (mut p, mut m) = (shift.clone(), shift.clone());
                p[c] += h;
                m[c] -= h;
                let num = (loss(&x, &scale, &p) - loss(&x, &scale, &m)) / (2.0 * h);
                assert!(rel(gb[c], num) < 1e-5);
            }
        }
    }
}
