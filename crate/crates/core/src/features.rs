//! The 27-element feature vector.
//!
//! Layout, per machine `m ∈ {gen, mot}`:
//!
//! | slots  | content |
//! |--------|---------|
//! | 1–18   | for each machine and phase: multitaper peak power at the 1× band (`pole_pairs·f_r`), at the 2× band, and band RMS across the 0.5×–2× fault band |
//! | 19–24  | for each machine's vibration channel: form factor, kurtosis, spectral-entropy deviation from the fault-free baseline |
//! | 25–27  | distance of the pooled current profile to the healthy, unbalance and misalignment signatures |
//!
//! The healthy reference is the pooled profile measured on the baseline run,
//! i.e. the noise floor as the estimator actually sees it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigsim::{MachineConfig, SignalRecord, Units};
use crate::spectral::{self, PsdEstimate, TaperSet};

pub const FEATURE_COUNT: usize = 27;

/// Number of leading features that come from the signals themselves; the
/// trailing three are signature distances.
pub const SIGNAL_FEATURE_COUNT: usize = 24;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "gen_ia_pk1x",
    "gen_ia_pk2x",
    "gen_ia_brms",
    "gen_ib_pk1x",
    "gen_ib_pk2x",
    "gen_ib_brms",
    "gen_ic_pk1x",
    "gen_ic_pk2x",
    "gen_ic_brms",
    "mot_ia_pk1x",
    "mot_ia_pk2x",
    "mot_ia_brms",
    "mot_ib_pk1x",
    "mot_ib_pk2x",
    "mot_ib_brms",
    "mot_ic_pk1x",
    "mot_ic_pk2x",
    "mot_ic_brms",
    "gen_vib_formfactor",
    "gen_vib_kurtosis",
    "gen_vib_entropydev",
    "mot_vib_formfactor",
    "mot_vib_kurtosis",
    "mot_vib_entropydev",
    "dist_healthy",
    "dist_unbalance",
    "dist_misalignment",
];

/// Multiples of `f_r` sampled by signature profiles.
pub const SIGNATURE_MULTIPLES: [f64; 3] = [0.5, 1.0, 2.0];

pub const DEFAULT_BAND_TOL_HZ: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    Healthy,
    Unbalance,
    Misalignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSignature {
    pub fault_kind: FaultKind,
    /// `(multiple of f_r, relative magnitude)` pairs.
    pub components: Vec<(f64, f64)>,
}

impl FaultSignature {
    pub fn healthy() -> Self {
        Self {
            fault_kind: FaultKind::Healthy,
            components: Vec::new(),
        }
    }

    pub fn unbalance() -> Self {
        Self {
            fault_kind: FaultKind::Unbalance,
            components: vec![(1.0, 1.0)],
        }
    }

    pub fn misalignment(subharmonic_weight: f64) -> Self {
        Self {
            fault_kind: FaultKind::Misalignment,
            components: vec![(0.5, subharmonic_weight), (1.0, 1.0), (2.0, 1.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.fault_kind, self.components.is_empty()) {
            (FaultKind::Healthy, false) => {
                return Err(Error::invalid("healthy signature must have no components"))
            }
            (FaultKind::Unbalance | FaultKind::Misalignment, true) => {
                return Err(Error::invalid(
                    "fault signature needs at least one component",
                ))
            }
            _ => {}
        }
        if self
            .components
            .iter()
            .any(|&(m, a)| !(m > 0.0 && m.is_finite() && a >= 0.0 && a.is_finite()))
        {
            return Err(Error::invalid(
                "signature multiples must be > 0 and magnitudes >= 0",
            ));
        }
        Ok(())
    }

    /// Reference magnitudes on `multiples`. The healthy signature is the flat
    /// profile of an ideal white floor; feature extraction uses the measured
    /// [`Baseline::noise_profile`] instead.
    pub fn profile(&self, multiples: &[f64]) -> Vec<f64> {
        if self.fault_kind == FaultKind::Healthy {
            return vec![1.0; multiples.len()];
        }
        multiples
            .iter()
            .map(|m| {
                self.components
                    .iter()
                    .filter(|(c, _)| (c - m).abs() < 1e-9)
                    .map(|(_, a)| a)
                    .sum()
            })
            .collect()
    }
}

/// Fault-free reference built from a healthy run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub entropies: BTreeMap<String, f64>,
    #[serde(skip)]
    pub psds: BTreeMap<String, PsdEstimate>,
    /// Pooled current profile on [`SIGNATURE_MULTIPLES`] of the healthy run.
    #[serde(default)]
    pub noise_profile: Vec<f64>,
}

impl Baseline {
    pub fn insert(&mut self, channel: &str, psd: PsdEstimate) -> Result<()> {
        let h = spectral_entropy(&psd)?;
        self.entropies.insert(channel.to_owned(), h);
        self.psds.insert(channel.to_owned(), psd);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "feature vector needs {FEATURE_COUNT} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "feature `{}` is not finite",
                FEATURE_NAMES[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn names() -> &'static [&'static str; FEATURE_COUNT] {
        &FEATURE_NAMES
    }
}

/// Mean removal; current channels are also scaled to a unit fundamental.
pub fn preprocess(sig: &SignalRecord) -> Result<SignalRecord> {
    if sig.is_empty() {
        return Err(Error::invalid(format!("{}: empty signal", sig.channel_id)));
    }
    let mean = sig.samples.iter().sum::<f64>() / sig.len() as f64;
    let mut out: Vec<f64> = sig.samples.iter().map(|v| v - mean).collect();
    if sig.units == Units::Ampere {
        let spec = spectral::fft_magnitude(&sig.with_samples(out.clone()))?;
        let fundamental = spec.magnitudes[1..].iter().copied().fold(0.0, f64::max);
        if !(fundamental > f64::MIN_POSITIVE) {
            return Err(Error::invalid(format!(
                "{}: no fundamental to normalize against",
                sig.channel_id
            )));
        }
        out.iter_mut().for_each(|v| *v /= fundamental);
    }
    Ok(sig.with_samples(out))
}

pub fn form_factor(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("form factor of an empty sequence"));
    }
    let n = x.len() as f64;
    let mean_abs = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    if !(mean_abs > 0.0) {
        return Err(Error::invalid(
            "form factor undefined for an all-zero sequence",
        ));
    }
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    Ok(rms / mean_abs)
}

/// Plain (non-excess) kurtosis `m4 / m2²`.
pub fn kurtosis(x: &[f64]) -> Result<f64> {
    if x.len() < 4 {
        return Err(Error::invalid(format!(
            "kurtosis needs at least 4 samples, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (m2, m4) = x.iter().fold((0.0, 0.0), |(a, b), v| {
        let d = (v - mean) * (v - mean);
        (a + d, b + d * d)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if !(m2 > 0.0) {
        return Err(Error::invalid("kurtosis undefined for zero variance"));
    }
    Ok(m4 / (m2 * m2))
}

/// Shannon entropy (nats) of the power distribution across bins.
pub fn spectral_entropy(psd: &PsdEstimate) -> Result<f64> {
    let total = psd.total_power();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::invalid(
            "entropy undefined for a zero-power spectrum",
        ));
    }
    Ok(-psd
        .power
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| {
            let q = p / total;
            q * q.ln()
        })
        .sum::<f64>())
}

pub fn entropy_deviation(psd: &PsdEstimate, baseline: &Baseline, channel: &str) -> Result<f64> {
    let reference = baseline
        .entropies
        .get(channel)
        .ok_or_else(|| Error::invalid(format!("baseline has no channel `{channel}`")))?;
    Ok(spectral_entropy(psd)? - reference)
}

fn l2_normalized(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|x| x / norm).collect())
}

/// Euclidean distance between two L2-normalized profiles.
pub fn profile_distance(observed: &[f64], reference: &[f64]) -> Result<f64> {
    if observed.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} profile magnitudes, got {}",
            reference.len(),
            observed.len()
        )));
    }
    let a =
        l2_normalized(observed).ok_or_else(|| Error::invalid("observed profile is all zero"))?;
    let b = l2_normalized(reference)
        .ok_or_else(|| Error::invalid("reference profile is zero on the sampled multiples"))?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Distance of observed magnitudes on [`SIGNATURE_MULTIPLES`] to a signature.
pub fn signature_distance(peaks: &[f64], sig: &FaultSignature) -> Result<f64> {
    sig.validate()?;
    if peaks.len() != SIGNATURE_MULTIPLES.len() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} profile magnitudes, got {}",
            SIGNATURE_MULTIPLES.len(),
            peaks.len()
        )));
    }
    profile_distance(peaks, &sig.profile(&SIGNATURE_MULTIPLES))
}

/// Three current phases and one vibration channel of one machine.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSignals {
    pub currents: [SignalRecord; 3],
    pub vibration: SignalRecord,
}

/// Both machines of one observation; index 0 is the generator, 1 the motor.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub machines: [MachineSignals; 2],
}

impl Observation {
    pub fn channels(&self) -> impl Iterator<Item = &SignalRecord> {
        self.machines
            .iter()
            .flat_map(|m| m.currents.iter().chain(std::iter::once(&m.vibration)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSettings {
    pub nw: f64,
    pub k: usize,
    pub band_tol_hz: f64,
    /// Relative magnitude of the 0.5× component in the misalignment signature.
    pub misalignment_subharmonic_weight: f64,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self {
            nw: spectral::DEFAULT_NW,
            k: spectral::DEFAULT_K,
            band_tol_hz: DEFAULT_BAND_TOL_HZ,
            misalignment_subharmonic_weight: 0.5,
        }
    }
}

/// Feature extraction with a cached taper set.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    settings: SpectralSettings,
    tapers: TaperSet,
    /// Unbalance and misalignment references.
    signatures: [FaultSignature; 2],
}

impl FeatureExtractor {
    pub fn new(n_samples: usize, settings: SpectralSettings) -> Result<Self> {
        let signatures = [
            FaultSignature::unbalance(),
            FaultSignature::misalignment(settings.misalignment_subharmonic_weight),
        ];
        for s in &signatures {
            s.validate()?;
        }
        Ok(Self {
            settings,
            tapers: spectral::dpss_tapers(n_samples, settings.nw, settings.k)?,
            signatures,
        })
    }

    pub fn settings(&self) -> &SpectralSettings {
        &self.settings
    }

    pub fn psd(&self, sig: &SignalRecord) -> Result<PsdEstimate> {
        spectral::multitaper_psd_with(&preprocess(sig)?, &self.tapers)
    }

    /// Fault-free spectra, entropies and current noise profile of a healthy run.
    pub fn baseline(&self, healthy: &Observation, cfgs: [&MachineConfig; 2]) -> Result<Baseline> {
        let mut b = Baseline::default();
        for ch in healthy.channels() {
            b.insert(&ch.channel_id, self.psd(ch)?)?;
        }
        b.noise_profile = self.current_block(healthy, cfgs)?.1.to_vec();
        Ok(b)
    }

    /// Features 1–18 and the pooled current profile.
    fn current_block(
        &self,
        obs: &Observation,
        cfgs: [&MachineConfig; 2],
    ) -> Result<(Vec<f64>, [f64; 3])> {
        let tol = self.settings.band_tol_hz;
        let mut values = Vec::with_capacity(18);
        let mut profile = [0.0; 3];
        let mut pooled = 0usize;
        for (m, cfg) in obs.machines.iter().zip(cfgs) {
            cfg.validate()?;
            let base = f64::from(cfg.pole_pairs) * cfg.rotational_freq_hz();
            for phase in &m.currents {
                let psd = self.psd(phase)?;
                let pk = spectral::extract_peak_magnitudes(&psd, &[base, 2.0 * base], tol)?;
                values.extend_from_slice(&pk);
                values.push(spectral::band_rms(
                    &psd,
                    (0.5 * base - tol).max(0.0),
                    2.0 * base + tol,
                )?);
                let targets: Vec<f64> =
                    SIGNATURE_MULTIPLES.iter().map(|mult| mult * base).collect();
                for (acc, p) in profile
                    .iter_mut()
                    .zip(spectral::extract_peak_magnitudes(&psd, &targets, tol)?)
                {
                    *acc += p.sqrt();
                }
                pooled += 1;
            }
        }
        profile.iter_mut().for_each(|p| *p /= pooled as f64);
        Ok((values, profile))
    }

    pub fn extract(
        &self,
        obs: &Observation,
        baseline: &Baseline,
        cfgs: [&MachineConfig; 2],
    ) -> Result<FeatureVector> {
        let (mut values, profile) = self.current_block(obs, cfgs)?;
        for m in &obs.machines {
            let vib = preprocess(&m.vibration)?;
            values.push(form_factor(&vib.samples)?);
            values.push(kurtosis(&vib.samples)?);
            let psd = spectral::multitaper_psd_with(&vib, &self.tapers)?;
            values.push(entropy_deviation(&psd, baseline, &vib.channel_id)?);
        }
        if baseline.noise_profile.len() != SIGNATURE_MULTIPLES.len() {
            return Err(Error::invalid("baseline has no current noise profile"));
        }
        values.push(profile_distance(&profile, &baseline.noise_profile)?);
        for sig in &self.signatures {
            values.push(signature_distance(&profile, sig)?);
        }
        FeatureVector::new(values)
    }
}

/// One-shot feature extraction with default spectral settings.
pub fn build_feature_vector(
    currents: &[SignalRecord; 6],
    vibrations: &[SignalRecord; 2],
    baseline: &Baseline,
    cfgs: [&MachineConfig; 2],
) -> Result<FeatureVector> {
    let obs = Observation {
        machines: [
            MachineSignals {
                currents: [
                    currents[0].clone(),
                    currents[1].clone(),
                    currents[2].clone(),
                ],
                vibration: vibrations[0].clone(),
            },
            MachineSignals {
                currents: [
                    currents[3].clone(),
                    currents[4].clone(),
                    currents[5].clone(),
                ],
                vibration: vibrations[1].clone(),
            },
        ],
    };
    FeatureExtractor::new(currents[0].len(), SpectralSettings::default())?
        .extract(&obs, baseline, cfgs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(n: usize, periods: f64, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * periods * i as f64 / n as f64).sin())
            .collect()
    }

    #[test]
    fn names_are_unique_and_complete() {
        let mut seen = std::collections::HashSet::new();
        assert!(FEATURE_NAMES.iter().all(|n| seen.insert(*n)));
        assert_eq!(FEATURE_NAMES.len(), 27);
    }

    #[test]
    fn preprocess_removes_dc() {
        let s = SignalRecord::new("v", 100.0, vec![3.0; 32], Units::MmPerS).unwrap();
        assert!(preprocess(&s)
            .unwrap()
            .samples
            .iter()
            .all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn preprocess_normalizes_current_fundamental() {
        let s = SignalRecord::new("i", 1000.0, sine(2000, 100.0, 5.0), Units::Ampere).unwrap();
        let p = preprocess(&s).unwrap();
        let spec = spectral::fft_magnitude(&p).unwrap();
        assert!((spec.magnitudes[spec.argmax()] - 1.0).abs() < 1e-6);
        let again = preprocess(&p).unwrap();
        for (a, b) in again.samples.iter().zip(&p.samples) {
            assert!((a - b).abs() < 1e-9);
        }
        let flat = SignalRecord::new("i", 1000.0, vec![1.0; 64], Units::Ampere).unwrap();
        assert!(preprocess(&flat).is_err());
    }

    #[test]
    fn form_factor_cases() {
        assert!((form_factor(&[2.0; 10]).unwrap() - 1.0).abs() < 1e-15);
        let s = sine(100_000, 50.0, 1.0);
        assert!((form_factor(&s).unwrap() - PI / (2.0 * 2f64.sqrt())).abs() < 1e-4);
        assert!(form_factor(&[0.0; 5]).is_err());
    }

    #[test]
    fn kurtosis_cases() {
        assert!((kurtosis(&[1.0, -1.0, 1.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((kurtosis(&sine(10_000, 7.0, 3.0)).unwrap() - 1.5).abs() < 1e-3);
        assert!(kurtosis(&[1.0; 8]).is_err());
        assert!(kurtosis(&[1.0, 2.0, 3.0]).is_err());
    }

    fn psd_of(power: Vec<f64>) -> PsdEstimate {
        let n = power.len();
        PsdEstimate {
            freqs_hz: (0..n).map(|i| i as f64).collect(),
            power,
            method: spectral::PsdMethod::Multitaper,
            resolution_hz: 1.0,
            fs_hz: 2.0 * (n - 1) as f64,
        }
    }

    #[test]
    fn entropy_deviation_cases() {
        let mut single = vec![0.0; 100];
        single[3] = 4.0;
        let mut baseline = Baseline::default();
        baseline.insert("ch", psd_of(single.clone())).unwrap();
        assert!(
            entropy_deviation(&psd_of(single), &baseline, "ch")
                .unwrap()
                .abs()
                < 1e-12
        );
        let uniform = psd_of(vec![0.25; 100]);
        assert!(
            (entropy_deviation(&uniform, &baseline, "ch").unwrap() - 100f64.ln()).abs() < 1e-12
        );
        assert!(entropy_deviation(&psd_of(vec![0.0; 100]), &baseline, "ch").is_err());
        assert!(entropy_deviation(&uniform, &baseline, "other").is_err());
    }

    #[test]
    fn signature_distance_geometry() {
        let u = FaultSignature::unbalance();
        assert!(signature_distance(&[0.0, 3.0, 0.0], &u).unwrap().abs() < 1e-12);
        assert!((signature_distance(&[1.0, 0.0, 2.0], &u).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let m = FaultSignature::misalignment(0.5);
        assert!(signature_distance(&[0.25, 0.5, 0.5], &m).unwrap().abs() < 1e-12);
        assert!(signature_distance(&[0.0; 3], &m).is_err());
        assert!(signature_distance(&[1.0; 2], &m).is_err());
        let h = FaultSignature::healthy();
        assert!(signature_distance(&[2.0, 2.0, 2.0], &h).unwrap().abs() < 1e-12);
    }

    #[test]
    fn signature_validation() {
        let bad = FaultSignature {
            fault_kind: FaultKind::Healthy,
            components: vec![(1.0, 1.0)],
        };
        assert!(bad.validate().is_err());
        let empty = FaultSignature {
            fault_kind: FaultKind::Unbalance,
            components: vec![],
        };
        assert!(empty.validate().is_err());
    }
}
