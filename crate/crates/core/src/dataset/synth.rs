//! Deterministic synthetic trials.
//!
//! Each class has a parametric signature: muscle burst timing on the eight
//! EMG channels and movement-specific angular rate, acceleration and
//! heading patterns on the three IMUs. Subjects differ in onset latency,
//! cadence, muscle gains, EMG spectral colour and sensor mounting angle, so
//! a model trained on some subjects sees a shifted distribution on others.
//!
//! Raw output mimics the acquisition hardware: EMG as 12-bit ADC counts at
//! 1 kHz with occasional spikes, IMU at 25 Hz stretched to 1 kHz.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channels::{ChannelMap, N_EMG_CHANNELS, N_IMU_CHANNELS};
use super::preprocess::{assemble_raw_trial, Preprocessor, IMU_NATIVE_SAMPLES};
use super::trial::{Label, Trial, N_SAMPLES, SAMPLE_RATE_HZ};
use crate::dsp::ADC_MAX_COUNT;
use crate::Result;

const DURATION_S: f64 = N_SAMPLES as f64 / SAMPLE_RATE_HZ;
const IMU_RATE_HZ: f64 = IMU_NATIVE_SAMPLES as f64 / DURATION_S;

const EMG_BASELINE: f64 = 2048.0;
const EMG_FLOOR: f64 = 60.0;
const EMG_BURST: f64 = 320.0;

// Spread of the between-subject differences.
const YAW_RANGE: f64 = 1.5;
const CADENCE_RANGE: std::ops::Range<f64> = 0.75..1.3;
const GAIT_SHAPE_RANGE: f64 = PI;
const BURST_PHASE_RANGE: f64 = 0.12;

// Within-subject variability and sensor noise.
const TRIAL_GAIN_RANGE: std::ops::Range<f64> = 0.6..1.4;
const TURN_RANGE: std::ops::Range<f64> = 0.6..1.3;
const SWAY_GYRO: f64 = 30.0;
const SWAY_ACC: f64 = 0.1;
const ACC_NOISE: f64 = 0.08;
const GYRO_NOISE: f64 = 20.0;
const MAG_NOISE: f64 = 3.0;

// Muscle offsets within one leg's EMG group.
const TA: usize = 0;
const GM: usize = 1;
const GL: usize = 2;
const SOL: usize = 3;

// IMU units in canonical order.
const LSHANK: usize = 0;
const RSHANK: usize = 1;
const RFOOT: usize = 2;

/// Stable 64-bit mixing so that nearby seeds give unrelated streams.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix_all(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_u64, |acc, &p| mix(acc ^ mix(p)))
}

/// Per-subject physiology and sensor placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    /// Movement onset shift in seconds.
    pub latency_s: f64,
    /// Multiplier on the stride period.
    pub cadence: f64,
    pub emg_gain: [f64; N_EMG_CHANNELS],
    /// Centre frequency of the EMG interference pattern.
    pub emg_centre_hz: f64,
    /// Mounting rotation of each IMU about its long axis, radians.
    pub imu_yaw: [f64; 3],
    pub imu_gain: [f64; 3],
    /// Relative strength of the subject's knee-dominant versus
    /// ankle-dominant strategy, in [0, 1].
    pub ankle_strategy: f64,
    /// Phase of the second gait harmonic, which shapes the swing waveform.
    pub gait_shape: f64,
    /// Shift of muscle bursts within the stride, as a fraction of a cycle.
    pub burst_phase: f64,
}

impl SubjectProfile {
    pub fn for_subject(subject_id: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_all(&[0x5B1E_C7, subject_id as u64]));
        let mut emg_gain = [0.0; N_EMG_CHANNELS];
        for g in &mut emg_gain {
            *g = rng.random_range(0.5..1.5);
        }
        let mut imu_yaw = [0.0; 3];
        for y in &mut imu_yaw {
            *y = rng.random_range(-YAW_RANGE..YAW_RANGE);
        }
        let mut imu_gain = [0.0; 3];
        for g in &mut imu_gain {
            *g = rng.random_range(0.7..1.3);
        }
        Self {
            latency_s: rng.random_range(-0.25..0.25),
            cadence: rng.random_range(CADENCE_RANGE),
            emg_gain,
            emg_centre_hz: rng.random_range(50.0..160.0),
            imu_yaw,
            imu_gain,
            ankle_strategy: rng.random_range(0.0..1.0),
            gait_shape: rng.random_range(-GAIT_SHAPE_RANGE..GAIT_SHAPE_RANGE),
            burst_phase: rng.random_range(-BURST_PHASE_RANGE..BURST_PHASE_RANGE),
        }
    }
}

/// Raised-cosine bump of unit height centred at `c` with total width `w`.
fn hann(t: f64, c: f64, w: f64) -> f64 {
    let u = (t - c) / w;
    if u.abs() >= 0.5 {
        0.0
    } else {
        0.5 * (1.0 + (2.0 * PI * u).cos())
    }
}

/// Smooth 0 -> 1 transition starting at `t0` over `w` seconds.
fn ramp(t: f64, t0: f64, w: f64) -> f64 {
    let u = ((t - t0) / w).clamp(0.0, 1.0);
    0.5 - 0.5 * (PI * u).cos()
}

#[derive(Debug, Clone, Copy)]
struct Burst {
    centre: f64,
    width: f64,
    amp: f64,
}

/// Per-trial timing and gait style drawn from the subject profile plus
/// jitter.
struct Timing {
    onset: f64,
    period: f64,
    gait_shape: f64,
    burst_phase: f64,
    /// Heading change of a turn, radians.
    turn: f64,
}

/// Envelope of one muscle over the trial.
type Envelope = Vec<Burst>;

fn gait_bursts(
    env: &mut [Envelope],
    leg: usize,
    timing: &Timing,
    phase: f64,
    period: f64,
    pattern: &[(usize, f64, f64, f64)],
    steps: Option<usize>,
) {
    let mut k = 0;
    loop {
        let start = timing.onset + (k as f64 + phase) * period;
        if start > DURATION_S || steps.is_some_and(|n| k >= n) {
            break;
        }
        for &(muscle, at, width, amp) in pattern {
            env[leg * 4 + muscle].push(Burst {
                centre: start + (at + timing.burst_phase) * period,
                width: width * period,
                amp,
            });
        }
        k += 1;
    }
}

fn emg_envelopes(label: Label, timing: &Timing, profile: &SubjectProfile, rng: &mut ChaCha8Rng) -> Vec<Envelope> {
    let mut env: Vec<Envelope> = vec![Vec::new(); N_EMG_CHANNELS];
    let ankle = profile.ankle_strategy;
    let t0 = timing.onset;
    let p = timing.period;
    // Left leg is group 0, right leg group 1.
    match label {
        Label::Forwards => {
            let pattern = [
                (TA, 0.05, 0.25, 0.8),
                (TA, 0.65, 0.3, 0.6),
                (GM, 0.35, 0.25, 0.7 + 0.4 * ankle),
                (GL, 0.35, 0.25, 0.6 + 0.3 * ankle),
                (SOL, 0.42, 0.3, 1.0),
            ];
            gait_bursts(&mut env, 1, timing, 0.0, p, &pattern, None);
            gait_bursts(&mut env, 0, timing, 0.5, p, &pattern, None);
        }
        Label::Backwards => {
            let pb = 1.25 * p;
            let pattern = [
                (TA, 0.35, 0.3, 1.0),
                (GM, 0.78, 0.25, 0.5 + 0.3 * ankle),
                (GL, 0.78, 0.25, 0.4),
                (SOL, 0.12, 0.3, 0.7),
            ];
            gait_bursts(&mut env, 1, timing, 0.0, pb, &pattern, None);
            gait_bursts(&mut env, 0, timing, 0.5, pb, &pattern, None);
        }
        Label::TurnLeft | Label::TurnRight => {
            // The pivot leg holds a sustained plantarflexor contraction while
            // the other leg takes two stepping strides.
            let (pivot, stepper) = if label == Label::TurnLeft { (0, 1) } else { (1, 0) };
            for (m, amp) in [(SOL, 0.8), (GM, 0.6), (GL, 0.5)] {
                env[pivot * 4 + m].push(Burst {
                    centre: t0 + 0.9 * p,
                    width: 1.6 * p,
                    amp,
                });
            }
            env[pivot * 4 + TA].push(Burst {
                centre: t0 + 0.1,
                width: 0.4,
                amp: 0.5,
            });
            let pattern = [(TA, 0.25, 0.3, 0.9), (GM, 0.55, 0.25, 0.6), (SOL, 0.6, 0.25, 0.5)];
            gait_bursts(&mut env, stepper, timing, 0.0, p * 0.9, &pattern, Some(2));
        }
        Label::PickUpObject => {
            let squat = 1.2 + 0.3 * rng.random::<f64>();
            for leg in 0..2 {
                env[leg * 4 + TA].push(Burst {
                    centre: t0 + 0.5,
                    width: 1.0,
                    amp: 1.0,
                });
                for (m, amp) in [(GM, 0.7 + 0.3 * ankle), (GL, 0.7), (SOL, 0.9)] {
                    env[leg * 4 + m].push(Burst {
                        centre: t0 + 0.5 + squat,
                        width: 1.0,
                        amp,
                    });
                }
            }
        }
    }
    env
}

/// Unit-variance band-limited noise from a two-pole resonator.
fn coloured_noise(rng: &mut ChaCha8Rng, centre_hz: f64) -> Vec<f64> {
    let r: f64 = 0.93;
    let w = 2.0 * PI * centre_hz / SAMPLE_RATE_HZ;
    let (a1, a2) = (2.0 * r * w.cos(), -r * r);
    let mut out = Vec::with_capacity(N_SAMPLES);
    let (mut y1, mut y2) = (0.0, 0.0);
    for _ in 0..N_SAMPLES + 200 {
        let e: f64 = rng.sample(StandardNormal);
        let y = a1 * y1 + a2 * y2 + e;
        y2 = y1;
        y1 = y;
        out.push(y);
    }
    out.drain(..200);
    let var = out.iter().map(|v| v * v).sum::<f64>() / out.len() as f64;
    let s = var.sqrt();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

fn emg_channels(label: Label, timing: &Timing, profile: &SubjectProfile, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let envelopes = emg_envelopes(label, timing, profile, rng);
    let mut channels = Vec::with_capacity(N_EMG_CHANNELS);
    for (c, bursts) in envelopes.iter().enumerate() {
        let gain = profile.emg_gain[c] * rng.random_range(TRIAL_GAIN_RANGE);
        let offset = rng.random_range(-40.0..40.0);
        let centre = profile.emg_centre_hz * rng.random_range(0.9..1.1);
        let carrier = coloured_noise(rng, centre);
        let mut x = Vec::with_capacity(N_SAMPLES);
        for (i, &z) in carrier.iter().enumerate() {
            let t = i as f64 / SAMPLE_RATE_HZ;
            let env: f64 = bursts.iter().map(|b| b.amp * hann(t, b.centre, b.width)).sum();
            let floor: f64 = rng.sample(StandardNormal);
            let v = EMG_BASELINE + offset + EMG_FLOOR * floor + EMG_BURST * gain * env * z;
            x.push(v.round().clamp(0.0, ADC_MAX_COUNT));
        }
        if rng.random::<f64>() < 0.3 {
            let n = rng.random_range(1..=3);
            for _ in 0..n {
                let at = rng.random_range(0..N_SAMPLES);
                x[at] = if rng.random::<bool>() { ADC_MAX_COUNT } else { 0.0 };
            }
        }
        channels.push(x);
    }
    channels
}

/// Body-frame kinematics of one IMU before mounting rotation: acceleration
/// in g, angular rate in deg/s, heading change in radians.
#[derive(Default, Clone, Copy)]
struct Motion {
    acc: [f64; 3],
    gyro: [f64; 3],
    heading: f64,
}

/// Gait waveform; running it backwards in phase gives the reversed gait.
fn gait_wave(theta: f64, shape: f64) -> f64 {
    theta.sin() + 0.5 * (2.0 * theta + 0.8 + shape).sin()
}

fn imu_motion(label: Label, unit: usize, t: f64, timing: &Timing) -> Motion {
    let t0 = timing.onset;
    let p = timing.period;
    let mut m = Motion::default();
    let leg_phase = match unit {
        LSHANK => 0.5,
        _ => 0.0,
    };
    let foot = unit == RFOOT;
    match label {
        Label::Forwards | Label::Backwards => {
            let forwards = label == Label::Forwards;
            let period = if forwards { p } else { 1.25 * p };
            let on = ramp(t, t0, 0.4);
            let theta = 2.0 * PI * ((t - t0) / period - leg_phase);
            let wave = if forwards {
                gait_wave(theta, timing.gait_shape)
            } else {
                gait_wave(-theta, timing.gait_shape)
            };
            let swing = if foot { 260.0 } else { 180.0 };
            m.gyro[1] = on * swing * wave;
            let strike = (theta.rem_euclid(2.0 * PI) - 0.3).cos().max(0.0).powi(6);
            let push = if forwards { 0.5 } else { -0.5 };
            m.acc[0] = on * (push * strike + 0.25 * (theta + 1.0).cos());
            m.acc[2] = on * 0.3 * (2.0 * theta).sin();
            m.gyro[2] = on * 12.0 * theta.sin();
        }
        Label::TurnLeft | Label::TurnRight => {
            let sign = if label == Label::TurnLeft { 1.0 } else { -1.0 };
            let centre = t0 + 0.9 * p;
            let width = 1.8 * p;
            // Yaw rate shaped so that the heading turns by `timing.turn`.
            let peak = timing.turn.to_degrees() * 2.0 / width;
            m.gyro[2] = sign * peak * hann(t, centre, width);
            m.heading = sign * timing.turn * ramp(t, centre - width / 2.0, width);
            let stepper = if label == Label::TurnLeft { RSHANK } else { LSHANK };
            let step_amp = if unit == stepper || (foot && stepper == RSHANK) { 1.0 } else { 0.35 };
            let theta = 2.0 * PI * (t - t0) / (0.9 * p);
            let window = hann(t, t0 + 0.9 * p, 1.8 * p);
            m.gyro[1] = step_amp * window * 120.0 * gait_wave(theta, timing.gait_shape);
            m.acc[1] = sign * 0.25 * hann(t, centre, width);
            m.acc[0] = step_amp * window * 0.2 * theta.cos();
        }
        Label::PickUpObject => {
            let descend = hann(t, t0 + 0.5, 1.0);
            let rise = hann(t, t0 + 1.85, 1.0);
            let crouch = ramp(t, t0, 1.0) * (1.0 - ramp(t, t0 + 1.4, 1.0));
            let scale = if foot { 0.25 } else { 1.0 };
            m.gyro[1] = scale * (90.0 * descend - 90.0 * rise);
            m.acc[0] = scale * 0.5 * crouch;
            m.acc[2] = scale * (-0.4 * descend + 0.3 * rise);
        }
    }
    m
}

/// Frequency, phase and weight of three slow sinusoids.
type Sway = [(f64, f64, f64); 3];

fn sway_components(rng: &mut ChaCha8Rng) -> Sway {
    std::array::from_fn(|_| {
        (
            rng.random_range(0.2..1.5),
            rng.random_range(0.0..2.0 * PI),
            rng.sample::<f64, _>(StandardNormal) / 3f64.sqrt(),
        )
    })
}

fn sway_at(c: &Sway, t: f64) -> f64 {
    c.iter().map(|&(f, ph, w)| w * (2.0 * PI * f * t + ph).sin()).sum()
}

fn imu_channels(label: Label, timing: &Timing, profile: &SubjectProfile, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut channels = vec![Vec::with_capacity(IMU_NATIVE_SAMPLES); N_IMU_CHANNELS];
    let heading0 = rng.random_range(0.0..2.0 * PI);
    for unit in 0..3 {
        let (s, c) = profile.imu_yaw[unit].sin_cos();
        let gain = profile.imu_gain[unit] * rng.random_range(TRIAL_GAIN_RANGE);
        let tilt = rng.random_range(-0.1..0.1);
        let sway: Vec<Sway> = (0..3).map(|_| sway_components(rng)).collect();
        for k in 0..IMU_NATIVE_SAMPLES {
            let t = k as f64 / IMU_RATE_HZ;
            let m = imu_motion(label, unit, t, timing);
            let sw: Vec<f64> = sway.iter().map(|c| sway_at(c, t)).collect();
            let mut acc = [
                gain * m.acc[0] + tilt + SWAY_ACC * sw[0],
                gain * m.acc[1] + SWAY_ACC * sw[1],
                1.0 + gain * m.acc[2],
            ];
            let mut gyro = [
                gain * m.gyro[0] + SWAY_GYRO * sw[1],
                gain * m.gyro[1] + SWAY_GYRO * sw[0],
                gain * m.gyro[2] + SWAY_GYRO * sw[2],
            ];
            let h = heading0 + m.heading;
            let mut mag = [40.0 * h.cos(), -40.0 * h.sin(), -30.0];
            for v in [&mut acc, &mut gyro, &mut mag] {
                let (x, y) = (v[0], v[1]);
                v[0] = c * x - s * y;
                v[1] = s * x + c * y;
            }
            let base = unit * 9;
            for axis in 0..3 {
                let n = |rng: &mut ChaCha8Rng, sd: f64| sd * rng.sample::<f64, _>(StandardNormal);
                channels[base + axis].push(acc[axis] + n(rng, ACC_NOISE));
                channels[base + 3 + axis].push(gyro[axis] + n(rng, GYRO_NOISE));
                channels[base + 6 + axis].push(mag[axis] + n(rng, MAG_NOISE));
            }
        }
    }
    channels
}

/// One raw synthetic trial, fully determined by its arguments.
pub fn generate_synthetic_trial(label: Label, subject_id: u32, rng_seed: u64) -> Trial {
    let profile = SubjectProfile::for_subject(subject_id);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_all(&[rng_seed, subject_id as u64, label.index() as u64]));
    let timing = Timing {
        onset: 0.6 + profile.latency_s + rng.random_range(-0.2..0.2),
        period: 1.1 * profile.cadence * rng.random_range(0.95..1.05),
        gait_shape: profile.gait_shape,
        burst_phase: profile.burst_phase,
        turn: (PI / 2.0) * rng.random_range(TURN_RANGE),
    };
    let emg = emg_channels(label, &timing, &profile, &mut rng);
    let imu = imu_channels(label, &timing, &profile, &mut rng);
    assemble_raw_trial(emg, imu, label, subject_id).expect("generator emits well-formed channels")
}

/// Size and seed of a synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub per_class: usize,
    pub subjects: u32,
    pub seed: u64,
}

impl CorpusSpec {
    /// Enumerates `(label, subject, trial index, trial seed)` in corpus order:
    /// subject-major, then class, then index.
    pub fn plan(&self) -> Vec<(Label, u32, usize, u64)> {
        let mut out = Vec::with_capacity(self.per_class * 5 * self.subjects as usize);
        for subject in 0..self.subjects {
            for label in Label::ALL {
                for i in 0..self.per_class {
                    out.push((label, subject, i, mix_all(&[self.seed, i as u64])));
                }
            }
        }
        out
    }
}

/// Raw corpus with exactly `per_class` trials of every class per subject.
pub fn generate_corpus(spec: &CorpusSpec) -> Vec<Trial> {
    spec.plan()
        .into_par_iter()
        .map(|(label, subject, _, seed)| generate_synthetic_trial(label, subject, seed))
        .collect()
}

/// Generates and conditions each trial in turn so raw data never
/// accumulates.
pub fn generate_preprocessed_corpus(spec: &CorpusSpec) -> Result<Vec<Trial>> {
    let pre = Preprocessor::standard();
    let map = ChannelMap::canonical();
    spec.plan()
        .into_par_iter()
        .map(|(label, subject, _, seed)| pre.process(&generate_synthetic_trial(label, subject, seed), &map))
        .collect()
}
