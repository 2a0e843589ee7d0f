//! Spectral estimation: FFT magnitude, periodogram, Thomson multitaper PSD,
//! Park-vector modulus spectrum, and peak/band readout.
//!
//! Power estimates are one-sided and scaled per bin so that summing every
//! bin gives the mean-square value of the signal: white noise of variance
//! `σ²` sums to `σ²`, a sinusoid of amplitude `A` to `A²/2`.

mod dpss;
pub mod tridiag;

use std::cell::RefCell;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub use dpss::{concentration, dpss_tapers, TaperSet, DEFAULT_K, DEFAULT_NW};

use crate::error::{Error, Result};
use crate::sigsim::SignalRecord;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn with_planner<R>(f: impl FnOnce(&mut FftPlanner<f64>) -> R) -> R {
    PLANNER.with(|p| f(&mut p.borrow_mut()))
}

fn forward_fft(x: impl Iterator<Item = f64>, n: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.map(|v| Complex::new(v, 0.0)).collect();
    debug_assert_eq!(buf.len(), n);
    with_planner(|p| p.plan_fft_forward(n).process(&mut buf));
    buf
}

fn one_sided_len(n: usize) -> usize {
    n / 2 + 1
}

// Bins that fold a negative-frequency twin onto themselves count twice.
fn fold_factor(j: usize, n: usize) -> f64 {
    if j == 0 || (n.is_multiple_of(2) && j == n / 2) {
        1.0
    } else {
        2.0
    }
}

fn freq_axis(n: usize, fs_hz: f64) -> Vec<f64> {
    (0..one_sided_len(n))
        .map(|j| j as f64 * fs_hz / n as f64)
        .collect()
}

fn check_signal(sig: &SignalRecord) -> Result<()> {
    if sig.len() < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least 2 samples",
            sig.channel_id
        )));
    }
    if let Some(i) = sig.samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "{}: sample {i} is not finite",
            sig.channel_id
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs_hz: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub resolution_hz: f64,
}

impl Spectrum {
    pub fn argmax(&self) -> usize {
        argmax(&self.magnitudes)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_two_columns(path, "magnitude", &self.freqs_hz, &self.magnitudes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdMethod {
    Periodogram,
    Multitaper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub method: PsdMethod,
    pub resolution_hz: f64,
    pub fs_hz: f64,
}

impl PsdEstimate {
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.power)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_two_columns(path, "power", &self.freqs_hz, &self.power)
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn write_two_columns(path: &Path, value_name: &str, freqs: &[f64], values: &[f64]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "freq_hz,{value_name}").map_err(io)?;
    for (f, v) in freqs.iter().zip(values) {
        writeln!(w, "{f:.6},{v:.9e}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// One-sided amplitude spectrum: a unit sinusoid centred on a bin reads 1.0
/// there, a constant `c` reads `c` at DC.
pub fn fft_magnitude(sig: &SignalRecord) -> Result<Spectrum> {
    check_signal(sig)?;
    let n = sig.len();
    let spec = forward_fft(sig.samples.iter().copied(), n);
    let magnitudes = spec[..one_sided_len(n)]
        .iter()
        .enumerate()
        .map(|(j, c)| c.norm() * fold_factor(j, n) / n as f64)
        .collect();
    Ok(Spectrum {
        freqs_hz: freq_axis(n, sig.fs_hz),
        magnitudes,
        resolution_hz: sig.fs_hz / n as f64,
    })
}

fn tapered_power<'a>(
    sig: &SignalRecord,
    tapers: impl Iterator<Item = &'a [f64]>,
    method: PsdMethod,
) -> PsdEstimate {
    let n = sig.len();
    let m = one_sided_len(n);
    let mut power = vec![0.0; m];
    let mut count = 0usize;
    for taper in tapers {
        let spec = forward_fft(sig.samples.iter().zip(taper).map(|(x, w)| x * w), n);
        for (p, c) in power.iter_mut().zip(&spec[..m]) {
            *p += c.norm_sqr();
        }
        count += 1;
    }
    for (j, p) in power.iter_mut().enumerate() {
        *p *= fold_factor(j, n) / (n as f64 * count as f64);
    }
    PsdEstimate {
        freqs_hz: freq_axis(n, sig.fs_hz),
        power,
        method,
        resolution_hz: sig.fs_hz / n as f64,
        fs_hz: sig.fs_hz,
    }
}

/// Rectangular-window periodogram.
pub fn periodogram(sig: &SignalRecord) -> Result<PsdEstimate> {
    check_signal(sig)?;
    let rect = vec![1.0 / (sig.len() as f64).sqrt(); sig.len()];
    Ok(tapered_power(
        sig,
        std::iter::once(rect.as_slice()),
        PsdMethod::Periodogram,
    ))
}

/// Thomson multitaper estimate: unweighted mean of the `k` DPSS eigenspectra.
pub fn multitaper_psd(sig: &SignalRecord, nw: f64, k: usize) -> Result<PsdEstimate> {
    check_signal(sig)?;
    let tapers = dpss_tapers(sig.len(), nw, k)?;
    multitaper_psd_with(sig, &tapers)
}

/// Multitaper estimate reusing a precomputed taper set.
pub fn multitaper_psd_with(sig: &SignalRecord, tapers: &TaperSet) -> Result<PsdEstimate> {
    check_signal(sig)?;
    if tapers.n != sig.len() {
        return Err(Error::ShapeMismatch(format!(
            "taper length {} does not match signal length {}",
            tapers.n,
            sig.len()
        )));
    }
    Ok(tapered_power(
        sig,
        tapers.tapers.iter().map(Vec::as_slice),
        PsdMethod::Multitaper,
    ))
}

/// Park `(d, q)` components of a three-phase set.
pub fn park_components(ia: &[f64], ib: &[f64], ic: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = (2.0_f64 / 3.0).sqrt();
    let b = 1.0 / 6.0_f64.sqrt();
    let c = 1.0 / 2.0_f64.sqrt();
    let d = ia
        .iter()
        .zip(ib)
        .zip(ic)
        .map(|((x, y), z)| a * x - b * y - b * z)
        .collect();
    let q = ib.iter().zip(ic).map(|(y, z)| c * (y - z)).collect();
    (d, q)
}

/// FFT magnitude of the Park-vector modulus `sqrt(i_d² + i_q²)`.
pub fn park_vector_spectrum(
    ia: &SignalRecord,
    ib: &SignalRecord,
    ic: &SignalRecord,
) -> Result<Spectrum> {
    if ia.len() != ib.len() || ia.len() != ic.len() {
        return Err(Error::ShapeMismatch(format!(
            "phase lengths differ: {}, {}, {}",
            ia.len(),
            ib.len(),
            ic.len()
        )));
    }
    if ia.fs_hz != ib.fs_hz || ia.fs_hz != ic.fs_hz {
        return Err(Error::ShapeMismatch("phase sampling rates differ".into()));
    }
    let (d, q) = park_components(&ia.samples, &ib.samples, &ic.samples);
    let modulus = d.iter().zip(&q).map(|(x, y)| x.hypot(*y)).collect();
    fft_magnitude(&ia.with_samples(modulus))
}

/// Largest power within `±tol_hz` of each target, in target order.
pub fn extract_peak_magnitudes(
    psd: &PsdEstimate,
    targets_hz: &[f64],
    tol_hz: f64,
) -> Result<Vec<f64>> {
    if !(tol_hz >= psd.resolution_hz * (1.0 - 1e-12)) {
        return Err(Error::invalid(format!(
            "tolerance {tol_hz} Hz is finer than the resolution {} Hz",
            psd.resolution_hz
        )));
    }
    let nyquist = psd.fs_hz / 2.0;
    targets_hz
        .iter()
        .map(|&t| {
            if !(0.0..=nyquist).contains(&t) {
                return Err(Error::invalid(format!(
                    "target {t} Hz outside [0, {nyquist}]"
                )));
            }
            let slack = 1e-9 * psd.resolution_hz;
            Ok(bins_in(psd, t - tol_hz - slack, t + tol_hz + slack)
                .map(|j| psd.power[j])
                .fold(0.0, f64::max))
        })
        .collect()
}

fn bins_in(psd: &PsdEstimate, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
    let res = psd.resolution_hz;
    let first = (lo / res).ceil().max(0.0) as usize;
    let last = ((hi / res).floor().max(-1.0) + 1.0) as usize;
    first..last.min(psd.power.len())
}

/// Square root of the summed power over the bins in `[lo_hz, hi_hz]`.
pub fn band_rms(psd: &PsdEstimate, lo_hz: f64, hi_hz: f64) -> Result<f64> {
    if !(lo_hz < hi_hz) {
        return Err(Error::invalid(format!(
            "band [{lo_hz}, {hi_hz}] is empty or inverted"
        )));
    }
    if lo_hz < 0.0 || hi_hz > psd.fs_hz / 2.0 {
        return Err(Error::invalid(format!(
            "band [{lo_hz}, {hi_hz}] exceeds [0, {}]",
            psd.fs_hz / 2.0
        )));
    }
    Ok(bins_in(psd, lo_hz, hi_hz)
        .map(|j| psd.power[j])
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigsim::Units;
    use std::f64::consts::PI;

    fn tone(freqs: &[(f64, f64)], fs: f64, n: usize) -> SignalRecord {
        let s = (0..n)
            .map(|i| {
                freqs
                    .iter()
                    .map(|(f, a)| a * (2.0 * PI * f * i as f64 / fs).sin())
                    .sum()
            })
            .collect();
        SignalRecord::new("t", fs, s, Units::Ampere).unwrap()
    }

    #[test]
    fn unit_tone_reads_one_at_its_bin() {
        let spec = fft_magnitude(&tone(&[(25.0, 1.0)], 10_000.0, 20_000)).unwrap();
        assert_eq!(spec.magnitudes.len(), 10_001);
        let j = spec.argmax();
        assert!((spec.freqs_hz[j] - 25.0).abs() < 1e-12);
        assert!((spec.magnitudes[j] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_reads_at_dc() {
        let sig = SignalRecord::new("c", 100.0, vec![2.5; 64], Units::Ampere).unwrap();
        let spec = fft_magnitude(&sig).unwrap();
        assert!((spec.magnitudes[0] - 2.5).abs() < 1e-12);
        assert!(spec.magnitudes[1..].iter().all(|&m| m < 1e-12));
    }

    #[test]
    fn two_tone_ratio() {
        let spec = fft_magnitude(&tone(&[(25.0, 2.0), (40.0, 1.0)], 10_000.0, 20_000)).unwrap();
        let a = spec.magnitudes[50];
        let b = spec.magnitudes[80];
        assert!((a / b - 2.0).abs() < 1e-6);
    }

    #[test]
    fn axis_contract_odd_length() {
        let sig = SignalRecord::new(
            "o",
            9.0,
            vec![1.0, 0.0, -1.0, 0.5, 0.2, 0.0, 0.1, 0.3, -0.4],
            Units::Ampere,
        )
        .unwrap();
        let spec = fft_magnitude(&sig).unwrap();
        assert_eq!(spec.freqs_hz.len(), 5);
        assert_eq!(spec.freqs_hz[0], 0.0);
        for w in spec.freqs_hz.windows(2) {
            assert!((w[1] - w[0] - spec.resolution_hz).abs() < 1e-9);
        }
        let p = periodogram(&sig).unwrap();
        let energy: f64 = sig.samples.iter().map(|x| x * x).sum::<f64>() / 9.0;
        assert!((p.total_power() - energy).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_nonfinite() {
        let one = SignalRecord::new("x", 1.0, vec![1.0], Units::Ampere).unwrap();
        assert!(fft_magnitude(&one).is_err());
        let mut bad = SignalRecord::new("x", 1.0, vec![1.0, 2.0], Units::Ampere).unwrap();
        bad.samples[1] = f64::NAN;
        assert!(fft_magnitude(&bad).is_err());
    }

    #[test]
    fn peak_extraction_windows() {
        let sig = tone(&[(25.0, 1.0)], 1000.0, 2000);
        let psd = multitaper_psd(&sig, 4.0, 7).unwrap();
        let peaks = extract_peak_magnitudes(&psd, &[25.0, 40.0, 25.5], 1.0).unwrap();
        assert!(peaks[1] < 0.01 * peaks[0]);
        assert_eq!(peaks[0], peaks[2]);
        assert!(extract_peak_magnitudes(&psd, &[], 1.0).unwrap().is_empty());
        assert!(extract_peak_magnitudes(&psd, &[600.0], 1.0).is_err());
        assert!(extract_peak_magnitudes(&psd, &[25.0], 0.1).is_err());
    }

    #[test]
    fn band_rms_cases() {
        let sig = tone(&[(25.0, 2.0)], 1000.0, 2000);
        let psd = multitaper_psd(&sig, 4.0, 7).unwrap();
        let r = band_rms(&psd, 15.0, 35.0).unwrap();
        assert!((r - 2.0 / 2f64.sqrt()).abs() / (2.0 / 2f64.sqrt()) < 0.05);
        assert_eq!(band_rms(&psd, 10.1, 10.2).unwrap(), 0.0);
        assert!(band_rms(&psd, 30.0, 20.0).is_err());
        assert!(band_rms(&psd, 0.0, 600.0).is_err());
    }

    #[test]
    fn park_rejects_mismatched_phases() {
        let a = SignalRecord::new("a", 10.0, vec![0.0; 16], Units::Ampere).unwrap();
        let b = SignalRecord::new("b", 10.0, vec![0.0; 15], Units::Ampere).unwrap();
        assert!(park_vector_spectrum(&a, &a, &b).is_err());
        let z = park_vector_spectrum(&a, &a, &a).unwrap();
        assert!(z.magnitudes.iter().all(|&m| m == 0.0));
    }
}
