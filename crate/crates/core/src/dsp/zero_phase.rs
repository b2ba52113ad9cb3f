use super::butterworth::{Biquad, BiquadCascade};
use crate::{Error, Result};

/// Reflection length used on each side: three times the digital filter
/// order.
pub fn edge_padding(cascade: &BiquadCascade) -> usize {
    3 * cascade.total_order()
}

/// Transposed direct form II state for one section.
#[derive(Clone, Copy, Default)]
struct SectionState {
    s1: f64,
    s2: f64,
}

impl SectionState {
    /// State that makes the section sit at steady state for a constant
    /// input `u`.
    fn steady(section: &Biquad, u: f64) -> Self {
        let y = u * section.dc_gain();
        let s2 = section.b2 * u - section.a2 * y;
        let s1 = section.b1 * u - section.a1 * y + s2;
        Self { s1, s2 }
    }

    #[inline]
    fn step(&mut self, s: &Biquad, x: f64) -> f64 {
        let y = s.b0 * x + self.s1;
        self.s1 = s.b1 * x - s.a1 * y + self.s2;
        self.s2 = s.b2 * x - s.a2 * y;
        y
    }
}

/// Runs the cascade over `signal` in place, starting every section at the
/// steady state of a constant input `level`.
fn filter_in_place(cascade: &BiquadCascade, signal: &mut [f64], level: f64) {
    let mut u = cascade.overall_gain * level;
    for v in signal.iter_mut() {
        *v *= cascade.overall_gain;
    }
    for section in &cascade.sections {
        let mut state = SectionState::steady(section, u);
        u *= section.dc_gain();
        for v in signal.iter_mut() {
            *v = state.step(section, *v);
        }
    }
}

/// One forward pass then one backward pass over `signal`, in place.
///
/// Both passes start at the steady state of a constant input `level`
/// (scaled by the DC gain for the second pass).
fn forward_backward(cascade: &BiquadCascade, signal: &mut [f64], level: f64) {
    filter_in_place(cascade, signal, level);
    signal.reverse();
    let steady = cascade.overall_gain * cascade.sections.iter().map(|s| s.dc_gain()).product::<f64>();
    filter_in_place(cascade, signal, steady * level);
    signal.reverse();
}

/// Zero-phase filtering with odd reflective padding.
///
/// The padded ends are blended from the signal mean into the reflection
/// with a half-cosine ramp and the filter state starts at the steady state
/// of that mean, so the edges never present a step to the slow low-cut
/// poles. The result is the average of forward-then-backward and
/// backward-then-forward filtering: both have zero phase and the squared
/// magnitude response, and averaging makes the edge transients mirror
/// images of each other.
pub fn apply_filter_zero_phase(cascade: &BiquadCascade, x: &[f64]) -> Result<Vec<f64>> {
    let pad = edge_padding(cascade);
    if x.len() <= pad {
        return Err(Error::Size {
            what: "zero-phase filter edge padding",
            needed: pad + 1,
            got: x.len(),
        });
    }
    let n = x.len();
    let (first, last) = (x[0], x[n - 1]);
    let level = x.iter().sum::<f64>() / n as f64;

    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));
    let total = ext.len();
    for i in 0..pad {
        let w = 0.5 - 0.5 * (std::f64::consts::PI * i as f64 / pad as f64).cos();
        ext[i] = level + w * (ext[i] - level);
        ext[total - 1 - i] = level + w * (ext[total - 1 - i] - level);
    }

    let mut mirrored: Vec<f64> = ext.iter().rev().copied().collect();
    forward_backward(cascade, &mut ext, level);
    forward_backward(cascade, &mut mirrored, level);

    Ok((pad..pad + n)
        .map(|i| 0.5 * (ext[i] + mirrored[total - 1 - i]))
        .collect())
}
