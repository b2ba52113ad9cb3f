//! Digital Butterworth bandpass design.
//!
//! The analog prototype poles are mapped through the lowpass-to-bandpass
//! transform (centre `sqrt(wl * wh)`, bandwidth `wh - wl` on prewarped edges)
//! and then through the bilinear transform. Each conjugate pole pair, or each
//! pair of real poles spawned by the real prototype pole, becomes one biquad
//! whose zeros sit at z = +1 and z = -1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bandpass definition in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub order: usize,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub sample_rate_hz: f64,
}

impl FilterSpec {
    pub fn new(order: usize, low_cut_hz: f64, high_cut_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        let spec = Self {
            order,
            low_cut_hz,
            high_cut_hz,
            sample_rate_hz,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 5th order, 0.2-400 Hz at 1 kHz.
    pub fn emg() -> Self {
        Self {
            order: 5,
            low_cut_hz: 0.2,
            high_cut_hz: 400.0,
            sample_rate_hz: 1000.0,
        }
    }

    /// 5th order, 0.2-10 Hz at 1 kHz.
    pub fn imu() -> Self {
        Self {
            order: 5,
            low_cut_hz: 0.2,
            high_cut_hz: 10.0,
            sample_rate_hz: 1000.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Config("filter order must be >= 1".into()));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        let ok = self.sample_rate_hz > 0.0
            && self.low_cut_hz > 0.0
            && self.low_cut_hz < self.high_cut_hz
            && self.high_cut_hz < nyquist;
        if !ok {
            return Err(Error::Config(format!(
                "cutoffs must satisfy 0 < low < high < fs/2, got low {} Hz, high {} Hz, fs {} Hz",
                self.low_cut_hz, self.high_cut_hz, self.sample_rate_hz
            )));
        }
        Ok(())
    }

    pub fn geometric_center_hz(&self) -> f64 {
        (self.low_cut_hz * self.high_cut_hz).sqrt()
    }
}

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Complex response at `omega` radians per sample.
    pub fn response(&self, omega: f64) -> Complex64 {
        let e1 = Complex64::from_polar(1.0, -omega);
        let e2 = e1 * e1;
        let num = self.b0 + e1 * self.b1 + e2 * self.b2;
        let den = 1.0 + e1 * self.a1 + e2 * self.a2;
        num / den
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        [(-self.a1 + disc) / 2.0, (-self.a1 - disc) / 2.0]
    }

    /// Gain at z = 1.
    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }
}

/// A realized filter: `overall_gain` times the product of the sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub overall_gain: f64,
}

impl BiquadCascade {
    pub fn response(&self, omega: f64) -> Complex64 {
        self.sections
            .iter()
            .fold(Complex64::new(self.overall_gain, 0.0), |acc, s| acc * s.response(omega))
    }

    /// |H| at `freq_hz` for a filter running at `sample_rate_hz`.
    pub fn magnitude_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        self.response(2.0 * PI * freq_hz / sample_rate_hz).norm()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    /// Order of the full digital transfer function (two per section).
    pub fn total_order(&self) -> usize {
        2 * self.sections.len()
    }
}

fn section_from_poles(z1: Complex64, z2: Complex64) -> Biquad {
    Biquad {
        b0: 1.0,
        b1: 0.0,
        b2: -1.0,
        a1: -(z1 + z2).re,
        a2: (z1 * z2).re,
    }
}

/// Designs a digital Butterworth bandpass with `spec.order` sections.
pub fn design_butterworth_bandpass(spec: &FilterSpec) -> Result<BiquadCascade> {
    spec.validate()?;
    let n = spec.order;
    let fs = spec.sample_rate_hz;
    let k = 2.0 * fs;
    let prewarp = |f: f64| k * (PI * f / fs).tan();
    let wl = prewarp(spec.low_cut_hz);
    let wh = prewarp(spec.high_cut_hz);
    let bandwidth = wh - wl;
    let center_sq = wl * wh;

    let bilinear = |s: Complex64| (k + s) / (k - s);
    // Each prototype pole p yields the two roots of s^2 - p*bw*s + w0^2.
    let bandpass_pair = |p: Complex64| {
        let half = p * (bandwidth / 2.0);
        let root = (half * half - center_sq).sqrt();
        (half + root, half - root)
    };

    let mut sections = Vec::with_capacity(n);
    for i in 0..n {
        let theta = PI * (2 * i + n + 1) as f64 / (2 * n) as f64;
        let p = Complex64::from_polar(1.0, theta);
        if p.im > 1e-12 {
            // Upper half plane; its conjugate yields the conjugates of these.
            let (s1, s2) = bandpass_pair(p);
            for s in [s1, s2] {
                let z = bilinear(s);
                sections.push(section_from_poles(z, z.conj()));
            }
        } else if p.im.abs() <= 1e-12 {
            let (s1, s2) = bandpass_pair(Complex64::new(-1.0, 0.0));
            sections.push(section_from_poles(bilinear(s1), bilinear(s2)));
        }
    }
    debug_assert_eq!(sections.len(), n);

    // The analog prototype has unit gain at w0, which the bilinear map sends
    // to this digital frequency.
    let omega_center = 2.0 * (center_sq.sqrt() / k).atan();
    let mut cascade = BiquadCascade {
        sections,
        overall_gain: 1.0,
    };
    cascade.overall_gain = 1.0 / cascade.response(omega_center).norm();
    Ok(cascade)
}
