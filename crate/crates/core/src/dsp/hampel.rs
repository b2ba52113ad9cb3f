use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scale factor turning a median absolute deviation into a Gaussian
/// standard-deviation estimate.
const MAD_TO_SIGMA: f64 = 1.4826;

/// Sliding-window outlier identifier settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HampelConfig {
    /// Samples on each side of the centre sample.
    pub half_window: usize,
    /// Rejection threshold in robust standard deviations.
    pub threshold_sigmas: f64,
}

impl Default for HampelConfig {
    /// 25 samples per side (a 51-sample window) at three sigmas.
    fn default() -> Self {
        Self {
            half_window: 25,
            threshold_sigmas: 3.0,
        }
    }
}

impl HampelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.half_window == 0 {
            return Err(Error::Config("hampel half_window must be >= 1".into()));
        }
        if !(self.threshold_sigmas > 0.0) {
            return Err(Error::Config(format!(
                "hampel threshold must be positive, got {}",
                self.threshold_sigmas
            )));
        }
        Ok(())
    }
}

/// Median of `buf`, reordering it in place. `buf` must be non-empty.
fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    let mid = n / 2;
    let (left, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Hampel identifier: every sample whose distance from the median of its
/// window exceeds `threshold_sigmas * 1.4826 * MAD` is replaced by that
/// median. Windows are clipped at the signal edges.
pub fn hampel_filter(x: &[f64], cfg: &HampelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let needed = 2 * cfg.half_window + 1;
    if x.len() < needed {
        return Err(Error::Size {
            what: "hampel filter window",
            needed,
            got: x.len(),
        });
    }

    let mut out = x.to_vec();
    let mut window = Vec::with_capacity(needed);
    for (i, y) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(cfg.half_window);
        let hi = (i + cfg.half_window + 1).min(x.len());

        window.clear();
        window.extend_from_slice(&x[lo..hi]);
        let median = median_in_place(&mut window);
        for v in window.iter_mut() {
            *v = (*v - median).abs();
        }
        let sigma = MAD_TO_SIGMA * median_in_place(&mut window);

        if (x[i] - median).abs() > cfg.threshold_sigmas * sigma {
            *y = median;
        }
    }
    Ok(out)
}
