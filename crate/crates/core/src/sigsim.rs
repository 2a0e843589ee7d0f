//! Synthetic three-phase current and vibration-velocity signals.
//!
//! Every signal is an additive mix of sinusoids plus white Gaussian noise.
//! Fault tones sit at multiples of the shaft rotational frequency `f_r`:
//! unbalance at 1×, misalignment at 0.5× (weighted), 1× and 2×. In current
//! channels each mechanical harmonic `ν·f_r` shows up as a tone at
//! `pole_pairs·ν·f_r` and as a sideband pair around the supply frequency.
//!
//! All randomness is drawn from ChaCha streams derived from the caller's seed,
//! so outputs are pure functions of `(config, seed)`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FS_HZ: f64 = 10_000.0;
pub const DEFAULT_DURATION_S: f64 = 2.0;

/// Relative amplitude of each supply sideband with respect to the fault tone.
const SIDEBAND_RATIO: f64 = 0.5;

const STREAM_WHITE: u64 = 0x5748_4954;
const STREAM_DISTURB: u64 = 0x4449_5354;

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineConfig {
    pub name: String,
    pub pole_pairs: u32,
    pub shaft_speed_rpm: f64,
    pub supply_freq_hz: f64,
    pub fundamental_current_amp: f64,
    pub fundamental_vib_amp_mm_s: f64,
}

impl MachineConfig {
    /// Four-pole generator side of the bench.
    pub fn generator() -> Self {
        Self {
            name: "generator".into(),
            pole_pairs: 2,
            shaft_speed_rpm: 1500.0,
            supply_freq_hz: 120.0,
            fundamental_current_amp: 10.0,
            fundamental_vib_amp_mm_s: 1.0,
        }
    }

    /// Six-pole motor side of the bench.
    pub fn motor() -> Self {
        Self {
            name: "motor".into(),
            pole_pairs: 3,
            shaft_speed_rpm: 1500.0,
            supply_freq_hz: 180.0,
            fundamental_current_amp: 10.0,
            fundamental_vib_amp_mm_s: 1.0,
        }
    }

    pub fn rotational_freq_hz(&self) -> f64 {
        self.shaft_speed_rpm / 60.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.pole_pairs < 1 {
            return Err(Error::invalid("pole_pairs must be at least 1"));
        }
        for (name, v) in [
            ("shaft_speed_rpm", self.shaft_speed_rpm),
            ("supply_freq_hz", self.supply_freq_hz),
            ("fundamental_current_amp", self.fundamental_current_amp),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.fundamental_vib_amp_mm_s.is_finite() && self.fundamental_vib_amp_mm_s >= 0.0) {
            return Err(Error::invalid(
                "fundamental_vib_amp_mm_s must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FaultCondition {
    pub unbalance_on: bool,
    pub unbalance_amp: f64,
    pub misalignment_on: bool,
    pub misalignment_amp: f64,
    pub misalignment_subharmonic_weight: f64,
}

impl FaultCondition {
    pub fn healthy() -> Self {
        Self::default()
    }

    pub fn unbalance(amp: f64) -> Self {
        Self {
            unbalance_on: true,
            unbalance_amp: amp,
            ..Self::default()
        }
    }

    pub fn misalignment(amp: f64, subharmonic_weight: f64) -> Self {
        Self {
            misalignment_on: true,
            misalignment_amp: amp,
            misalignment_subharmonic_weight: subharmonic_weight,
            ..Self::default()
        }
    }

    pub fn combined(unbalance_amp: f64, misalignment_amp: f64, subharmonic_weight: f64) -> Self {
        Self {
            unbalance_on: true,
            unbalance_amp,
            ..Self::misalignment(misalignment_amp, subharmonic_weight)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("unbalance_amp", self.unbalance_amp),
            ("misalignment_amp", self.misalignment_amp),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        let w = self.misalignment_subharmonic_weight;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid(format!(
                "misalignment_subharmonic_weight must lie in [0, 1], got {w}"
            )));
        }
        if !self.unbalance_on && self.unbalance_amp != 0.0 {
            return Err(Error::invalid(
                "unbalance_amp must be 0 when unbalance is off",
            ));
        }
        if !self.misalignment_on && (self.misalignment_amp != 0.0 || w != 0.0) {
            return Err(Error::invalid(
                "misalignment amplitude and weight must be 0 when misalignment is off",
            ));
        }
        Ok(())
    }

    /// Active mechanical harmonics as `(multiple of f_r, amplitude)` pairs.
    pub fn harmonics(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.unbalance_on {
            out.push((1.0, self.unbalance_amp));
        }
        if self.misalignment_on {
            out.push((
                0.5,
                self.misalignment_amp * self.misalignment_subharmonic_weight,
            ));
            out.push((1.0, self.misalignment_amp));
            out.push((2.0, self.misalignment_amp));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub white_sigma: f64,
    pub disturb_count_min: u32,
    pub disturb_count_max: u32,
    pub disturb_freq_lo_hz: f64,
    pub disturb_freq_hi_hz: f64,
    pub disturb_amp_lo: f64,
    pub disturb_amp_hi: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            white_sigma: 0.0,
            disturb_count_min: 10,
            disturb_count_max: 20,
            disturb_freq_lo_hz: 5.0,
            disturb_freq_hi_hz: 500.0,
            disturb_amp_lo: 0.0,
            disturb_amp_hi: 0.1,
        }
    }
}

impl NoiseSpec {
    /// White noise only, no disturbance tones.
    pub fn quiet(white_sigma: f64) -> Self {
        Self {
            white_sigma,
            disturb_count_min: 0,
            disturb_count_max: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self, fs_hz: f64) -> Result<()> {
        if !(self.white_sigma.is_finite() && self.white_sigma >= 0.0) {
            return Err(Error::invalid("white_sigma must be finite and >= 0"));
        }
        if self.disturb_count_min > self.disturb_count_max {
            return Err(Error::invalid(format!(
                "disturb_count_min {} exceeds disturb_count_max {}",
                self.disturb_count_min, self.disturb_count_max
            )));
        }
        let nyquist = fs_hz / 2.0;
        if !(self.disturb_freq_lo_hz >= 0.0
            && self.disturb_freq_lo_hz < self.disturb_freq_hi_hz
            && self.disturb_freq_hi_hz <= nyquist)
        {
            return Err(Error::invalid(format!(
                "disturbance band [{}, {}] Hz must satisfy 0 <= lo < hi <= {nyquist}",
                self.disturb_freq_lo_hz, self.disturb_freq_hi_hz
            )));
        }
        if !(self.disturb_amp_lo >= 0.0 && self.disturb_amp_lo <= self.disturb_amp_hi)
            || !self.disturb_amp_hi.is_finite()
        {
            return Err(Error::invalid(format!(
                "disturbance amplitudes must satisfy 0 <= lo <= hi, got [{}, {}]",
                self.disturb_amp_lo, self.disturb_amp_hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Ampere,
    MmPerS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub channel_id: String,
    pub fs_hz: f64,
    pub duration_s: f64,
    pub samples: Vec<f64>,
    pub units: Units,
}

impl SignalRecord {
    pub fn new(
        channel_id: impl Into<String>,
        fs_hz: f64,
        samples: Vec<f64>,
        units: Units,
    ) -> Result<Self> {
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sampling rate must be > 0, got {fs_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::invalid("signal has no samples"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            channel_id: channel_id.into(),
            fs_hz,
            duration_s: samples.len() as f64 / fs_hz,
            samples,
            units,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.len() as f64).sqrt()
    }

    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            ..self.clone()
        }
    }

    /// Two-column `time_s,value` export.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "time_s,value").map_err(io)?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{:.6},{:.9}", i as f64 / self.fs_hz, v).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_csv(path: &Path, channel_id: &str, fs_hz: f64, units: Units) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut samples = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let v = rec
                .get(1)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::CsvRow {
                    row: row + 1,
                    message: "expected `time_s,value`".into(),
                })?;
            samples.push(v);
        }
        Self::new(channel_id, fs_hz, samples, units)
    }
}

/// Sampling grid shared by every generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timebase {
    pub fs_hz: f64,
    pub duration_s: f64,
}

impl Default for Timebase {
    fn default() -> Self {
        Self {
            fs_hz: DEFAULT_FS_HZ,
            duration_s: DEFAULT_DURATION_S,
        }
    }
}

impl Timebase {
    pub fn len(&self) -> usize {
        (self.fs_hz * self.duration_s).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::invalid("fs_hz must be > 0"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) || self.len() < 2 {
            return Err(Error::invalid("duration must yield at least two samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub freq_hz: f64,
    pub amp: f64,
    pub phase: f64,
}

impl Tone {
    fn check(&self, fs_hz: f64) -> Result<()> {
        let nyquist = fs_hz / 2.0;
        if self.freq_hz.abs() >= nyquist {
            return Err(Error::Aliasing {
                freq_hz: self.freq_hz,
                nyquist_hz: nyquist,
            });
        }
        Ok(())
    }
}

fn render(tones: &[Tone], timebase: Timebase, out: &mut [f64]) {
    for tone in tones.iter().filter(|t| t.amp != 0.0) {
        let w = 2.0 * PI * tone.freq_hz / timebase.fs_hz;
        for (i, s) in out.iter_mut().enumerate() {
            *s += tone.amp * (w * i as f64 + tone.phase).sin();
        }
    }
}

fn add_white(out: &mut [f64], sigma: f64, seed: u64, tag: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = rng_for(seed, STREAM_WHITE ^ tag);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for s in out.iter_mut() {
        *s += normal.sample(&mut rng);
    }
}

/// Deterministic current components for one phase, before noise.
pub fn current_tones(cfg: &MachineConfig, fault: &FaultCondition, phase_index: u8) -> Vec<Tone> {
    let offset = -2.0 * PI * f64::from(phase_index - 1) / 3.0;
    let i0 = cfg.fundamental_current_amp;
    let fr = cfg.rotational_freq_hz();
    let pp = f64::from(cfg.pole_pairs);
    let mut tones = vec![Tone {
        freq_hz: cfg.supply_freq_hz,
        amp: i0,
        phase: offset,
    }];
    for (nu, amp) in fault.harmonics() {
        let a = amp * i0;
        tones.push(Tone {
            freq_hz: pp * nu * fr,
            amp: a,
            phase: offset,
        });
        for sign in [-1.0, 1.0] {
            tones.push(Tone {
                freq_hz: cfg.supply_freq_hz + sign * nu * fr,
                amp: SIDEBAND_RATIO * a,
                phase: offset,
            });
        }
    }
    tones
}

/// Deterministic vibration-velocity components, before noise.
pub fn vibration_tones(cfg: &MachineConfig, fault: &FaultCondition) -> Vec<Tone> {
    let fr = cfg.rotational_freq_hz();
    let mut tones = vec![Tone {
        freq_hz: fr,
        amp: cfg.fundamental_vib_amp_mm_s,
        phase: 0.0,
    }];
    tones.extend(fault.harmonics().into_iter().map(|(nu, amp)| Tone {
        freq_hz: nu * fr,
        amp,
        phase: 0.0,
    }));
    tones
}

fn validate_inputs(
    cfg: &MachineConfig,
    fault: &FaultCondition,
    noise: &NoiseSpec,
    timebase: Timebase,
) -> Result<()> {
    timebase.validate()?;
    cfg.validate()?;
    fault.validate()?;
    noise.validate(timebase.fs_hz)
}

/// One phase of the stator current. Disturbance tones are not included.
pub fn gen_current(
    cfg: &MachineConfig,
    fault: &FaultCondition,
    noise: &NoiseSpec,
    timebase: Timebase,
    seed: u64,
    phase_index: u8,
) -> Result<SignalRecord> {
    if !(1..=3).contains(&phase_index) {
        return Err(Error::invalid(format!(
            "phase_index must be 1, 2 or 3, got {phase_index}"
        )));
    }
    validate_inputs(cfg, fault, noise, timebase)?;
    let tones = current_tones(cfg, fault, phase_index);
    for t in &tones {
        t.check(timebase.fs_hz)?;
    }
    let mut samples = vec![0.0; timebase.len()];
    render(&tones, timebase, &mut samples);
    add_white(
        &mut samples,
        noise.white_sigma,
        seed,
        u64::from(phase_index),
    );
    let phase = ['a', 'b', 'c'][usize::from(phase_index - 1)];
    SignalRecord::new(
        format!("{}.i{phase}", cfg.name),
        timebase.fs_hz,
        samples,
        Units::Ampere,
    )
}

/// Vibration velocity in mm/s. Disturbance tones are not included.
pub fn gen_vibration(
    cfg: &MachineConfig,
    fault: &FaultCondition,
    noise: &NoiseSpec,
    timebase: Timebase,
    seed: u64,
) -> Result<SignalRecord> {
    validate_inputs(cfg, fault, noise, timebase)?;
    let tones = vibration_tones(cfg, fault);
    for t in &tones {
        t.check(timebase.fs_hz)?;
    }
    let mut samples = vec![0.0; timebase.len()];
    render(&tones, timebase, &mut samples);
    add_white(&mut samples, noise.white_sigma, seed, 0x0076_6962);
    SignalRecord::new(
        format!("{}.vib", cfg.name),
        timebase.fs_hz,
        samples,
        Units::MmPerS,
    )
}

/// The random tones `inject_disturbances` would add for this `(noise, seed)`.
pub fn draw_disturbances(noise: &NoiseSpec, fs_hz: f64, seed: u64) -> Result<Vec<Tone>> {
    noise.validate(fs_hz)?;
    let mut rng = rng_for(seed, STREAM_DISTURB);
    let count = rng.random_range(noise.disturb_count_min..=noise.disturb_count_max);
    let tones = (0..count)
        .map(|_| Tone {
            freq_hz: rng.random_range(noise.disturb_freq_lo_hz..noise.disturb_freq_hi_hz),
            amp: if noise.disturb_amp_lo == noise.disturb_amp_hi {
                noise.disturb_amp_lo
            } else {
                rng.random_range(noise.disturb_amp_lo..noise.disturb_amp_hi)
            },
            phase: rng.random_range(0.0..2.0 * PI),
        })
        .collect();
    Ok(tones)
}

/// Adds a random number of random tones. The input record is left untouched.
pub fn inject_disturbances(
    sig: &SignalRecord,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<SignalRecord> {
    let tones = draw_disturbances(noise, sig.fs_hz, seed)?;
    let mut samples = sig.samples.clone();
    let timebase = Timebase {
        fs_hz: sig.fs_hz,
        duration_s: sig.duration_s,
    };
    render(&tones, timebase, &mut samples);
    Ok(sig.with_samples(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tb() -> Timebase {
        Timebase::default()
    }

    #[test]
    fn record_length_matches_timebase() {
        let s = gen_vibration(
            &MachineConfig::generator(),
            &FaultCondition::healthy(),
            &NoiseSpec::quiet(0.1),
            tb(),
            1,
        )
        .unwrap();
        assert_eq!(s.len(), 20_000);
        assert_eq!(s.units, Units::MmPerS);
        assert_eq!(s.channel_id, "generator.vib");
    }

    #[test]
    fn unbalance_vibration_rms_is_amplitude_over_root_two() {
        let cfg = MachineConfig {
            fundamental_vib_amp_mm_s: 0.0,
            ..MachineConfig::generator()
        };
        let a = 3.7;
        let s = gen_vibration(
            &cfg,
            &FaultCondition::unbalance(a),
            &NoiseSpec::quiet(0.0),
            tb(),
            9,
        )
        .unwrap();
        let expected = a / 2f64.sqrt();
        assert!((s.rms() - expected).abs() / expected < 1e-6);
    }

    #[test]
    fn silent_machine_gives_zero_signal() {
        let cfg = MachineConfig {
            fundamental_vib_amp_mm_s: 0.0,
            ..MachineConfig::motor()
        };
        let s = gen_vibration(
            &cfg,
            &FaultCondition::healthy(),
            &NoiseSpec::quiet(0.0),
            tb(),
            3,
        )
        .unwrap();
        assert!(s.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        let cfg = MachineConfig::generator();
        let f = FaultCondition::combined(0.05, 0.05, 0.5);
        let n = NoiseSpec::quiet(0.2);
        let a = gen_current(&cfg, &f, &n, tb(), 77, 2).unwrap();
        let b = gen_current(&cfg, &f, &n, tb(), 77, 2).unwrap();
        let c = gen_current(&cfg, &f, &n, tb(), 78, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn faults_add_linearly() {
        let cfg = MachineConfig::motor();
        let n = NoiseSpec::quiet(0.0);
        let u = FaultCondition::unbalance(0.04);
        let m = FaultCondition::misalignment(0.03, 0.7);
        let both = FaultCondition::combined(0.04, 0.03, 0.7);
        for phase in 1..=3 {
            let su = gen_current(&cfg, &u, &n, tb(), 5, phase).unwrap();
            let sm = gen_current(&cfg, &m, &n, tb(), 5, phase).unwrap();
            let sh = gen_current(&cfg, &FaultCondition::healthy(), &n, tb(), 5, phase).unwrap();
            let sb = gen_current(&cfg, &both, &n, tb(), 5, phase).unwrap();
            for i in 0..sb.len() {
                let expected = su.samples[i] + sm.samples[i] - sh.samples[i];
                assert!((sb.samples[i] - expected).abs() < 1e-9);
            }
        }
        let vu = gen_vibration(&cfg, &u, &n, tb(), 5).unwrap();
        let vm = gen_vibration(&cfg, &m, &n, tb(), 5).unwrap();
        let vh = gen_vibration(&cfg, &FaultCondition::healthy(), &n, tb(), 5).unwrap();
        let vb = gen_vibration(&cfg, &both, &n, tb(), 5).unwrap();
        for i in 0..vb.len() {
            assert!((vb.samples[i] - (vu.samples[i] + vm.samples[i] - vh.samples[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_aliased_fault_tone() {
        let cfg = MachineConfig {
            shaft_speed_rpm: 180_000.0,
            ..MachineConfig::generator()
        };
        let err = gen_current(
            &cfg,
            &FaultCondition::unbalance(0.1),
            &NoiseSpec::quiet(0.0),
            tb(),
            1,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Aliasing { .. }));
    }

    #[test]
    fn rejects_bad_amplitudes_and_phase() {
        let cfg = MachineConfig::generator();
        let n = NoiseSpec::quiet(0.0);
        assert!(gen_current(&cfg, &FaultCondition::unbalance(-0.1), &n, tb(), 1, 1).is_err());
        assert!(gen_current(&cfg, &FaultCondition::unbalance(f64::NAN), &n, tb(), 1, 1).is_err());
        assert!(gen_current(&cfg, &FaultCondition::healthy(), &n, tb(), 1, 4).is_err());
        let sneaky = FaultCondition {
            unbalance_amp: 0.2,
            ..FaultCondition::healthy()
        };
        assert!(gen_vibration(&cfg, &sneaky, &n, tb(), 1).is_err());
    }

    #[test]
    fn zero_count_disturbance_is_identity() {
        let sig = gen_current(
            &MachineConfig::generator(),
            &FaultCondition::healthy(),
            &NoiseSpec::quiet(0.3),
            tb(),
            4,
            1,
        )
        .unwrap();
        let noise = NoiseSpec {
            disturb_count_min: 0,
            disturb_count_max: 0,
            ..NoiseSpec::default()
        };
        let out = inject_disturbances(&sig, &noise, 11).unwrap();
        assert_eq!(out.samples, sig.samples);
    }

    #[test]
    fn disturbance_count_in_range_and_deterministic() {
        let noise = NoiseSpec::default();
        for seed in 0..200 {
            let tones = draw_disturbances(&noise, DEFAULT_FS_HZ, seed).unwrap();
            assert!((10..=20).contains(&tones.len()));
            for t in &tones {
                assert!(
                    t.freq_hz >= noise.disturb_freq_lo_hz && t.freq_hz < noise.disturb_freq_hi_hz
                );
            }
        }
        let sig = SignalRecord::new("z", DEFAULT_FS_HZ, vec![0.0; 2000], Units::Ampere).unwrap();
        let a = inject_disturbances(&sig, &noise, 5).unwrap();
        let b = inject_disturbances(&sig, &noise, 5).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(sig.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noise_spec_validation() {
        let bad_count = NoiseSpec {
            disturb_count_min: 5,
            disturb_count_max: 4,
            ..NoiseSpec::default()
        };
        assert!(bad_count.validate(DEFAULT_FS_HZ).is_err());
        let above_nyquist = NoiseSpec {
            disturb_freq_hi_hz: 6000.0,
            ..NoiseSpec::default()
        };
        assert!(above_nyquist.validate(DEFAULT_FS_HZ).is_err());
        let amps = NoiseSpec {
            disturb_amp_lo: 1.0,
            disturb_amp_hi: 0.5,
            ..NoiseSpec::default()
        };
        assert!(amps.validate(DEFAULT_FS_HZ).is_err());
    }

    #[test]
    fn signal_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = SignalRecord::new("x", 100.0, vec![0.5, -1.25, 3.0], Units::Ampere).unwrap();
        s.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("time_s,value\n0.000000,0.500000000\n0.010000,"));
        let back = SignalRecord::read_csv(&path, "x", 100.0, Units::Ampere).unwrap();
        assert_eq!(back, s);
    }
}
