use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequence::StroboscopicSeries;

pub const MIN_SAMPLES: usize = 8;

/// Default half-width of the crystalline-fraction window, in unpadded bins.
pub const DEFAULT_WINDOW_BINS: usize = 2;

/// A peak must exceed this multiple of the median bin power.
pub const PEAK_TO_MEDIAN: f64 = 10.0;

/// Zero-padding length used when none is requested: 8× the next power of two.
pub fn default_pad(samples: usize) -> usize {
    8 * samples.next_power_of_two()
}

/// Spectrum of the mean-removed stroboscopic `Mz` series.
///
/// `amp[k] = Σ_n (x_n − x̄) e^{−2πi kn/P} / √P`, so `Σ power = Σ (x_n − x̄)²`.
/// Frequencies are in cycles per drive period: the subharmonic sits at 0.5.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    pub nu: Vec<f64>,
    pub amp: Vec<Complex64>,
    pub power: Vec<f64>,
    pub samples: usize,
    pub pad: usize,
    pub window_bins: usize,
    pub f: f64,
    pub fwhm: Option<f64>,
    pub peak_nu: Option<f64>,
    /// Energy of the mean-removed series.
    pub energy: f64,
}

impl SpectralResult {
    pub fn bin_width(&self) -> f64 {
        1.0 / self.pad as f64
    }

    /// Whether the series carried any fluctuation at all.
    pub fn is_flat(&self) -> bool {
        self.energy == 0.0
    }
}

pub fn spectrum(series: &StroboscopicSeries, pad_to: usize) -> Result<SpectralResult> {
    spectrum_of(&series.mz(), pad_to, DEFAULT_WINDOW_BINS)
}

/// Spectrum of a raw real sequence, padded to `pad_to` (a power of two no
/// smaller than the sample count).
pub fn spectrum_of(values: &[f64], pad_to: usize, window_bins: usize) -> Result<SpectralResult> {
    let m = values.len();
    if m < MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: m, need: MIN_SAMPLES });
    }
    if pad_to < m || !pad_to.is_power_of_two() {
        return Err(Error::InvalidPadding { pad: pad_to, samples: m });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { name: "series" });
    }

    let mean = values.iter().sum::<f64>() / m as f64;
    let raw_energy: f64 = values.iter().map(|v| v * v).sum();
    let mut centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let mut energy: f64 = centered.iter().map(|v| v * v).sum();
    // rounding residue of the mean of a constant series is not a signal
    if energy <= 1e-24 * raw_energy {
        centered.iter_mut().for_each(|v| *v = 0.0);
        energy = 0.0;
    }

    let mut buf: Vec<Complex64> = centered.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(pad_to, Complex64::default());
    FftPlanner::new().plan_fft_forward(pad_to).process(&mut buf);
    let norm = 1.0 / (pad_to as f64).sqrt();
    let amp: Vec<Complex64> = buf.into_iter().map(|z| z * norm).collect();
    let power: Vec<f64> = amp.iter().map(|z| z.norm_sqr()).collect();
    let nu = (0..pad_to).map(|k| k as f64 / pad_to as f64).collect();

    let mut spec = SpectralResult {
        nu,
        amp,
        power,
        samples: m,
        pad: pad_to,
        window_bins,
        f: 0.0,
        fwhm: None,
        peak_nu: None,
        energy,
    };
    spec.f = crystalline_fraction(&spec, window_bins);
    if !spec.is_flat() {
        if let Some(peak) = peak_fwhm(&spec) {
            spec.fwhm = Some(peak.fwhm);
            spec.peak_nu = Some(peak.nu);
        }
    }
    Ok(spec)
}

/// Fraction of the non-DC spectral power within `halfwidth_bins` unpadded
/// bins of `ν = 1/2`.
pub fn crystalline_fraction(spec: &SpectralResult, halfwidth_bins: usize) -> f64 {
    if spec.is_flat() {
        return 0.0;
    }
    let p = spec.pad;
    let half = p / 2;
    let w = ((halfwidth_bins * p) as f64 / spec.samples as f64).round() as usize;
    let total: f64 = spec.power[1..].iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let window: f64 = spec.power[half.saturating_sub(w)..=(half + w).min(p - 1)].iter().sum();
    (window / total).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub bin: usize,
    pub nu: f64,
    pub power: f64,
    pub fwhm: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn subharmonic_band(p: usize) -> std::ops::RangeInclusive<usize> {
    p.div_ceil(4)..=(3 * p / 4)
}

/// Full width at half maximum of the strongest line in `ν ∈ [0.25, 0.75]`,
/// with half-power crossings found by linear interpolation. `None` when the
/// line is not at least [`PEAK_TO_MEDIAN`] times the median bin power.
pub fn peak_fwhm(spec: &SpectralResult) -> Option<Peak> {
    let band = subharmonic_band(spec.pad);
    let (bin, &peak) = spec.power[band.clone()]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i + band.start(), v))?;
    if peak <= 0.0 || peak < PEAK_TO_MEDIAN * median(&spec.power) {
        return None;
    }
    let width = half_power_width(&spec.power, bin)?;
    Some(Peak { bin, nu: spec.nu[bin], power: peak, fwhm: width / spec.pad as f64 })
}

/// Width in bins between the half-power crossings around `bin`.
fn half_power_width(power: &[f64], bin: usize) -> Option<f64> {
    let half = 0.5 * power[bin];
    let mut left = None;
    for k in (0..bin).rev() {
        if power[k] < half {
            left = Some(k as f64 + (half - power[k]) / (power[k + 1] - power[k]));
            break;
        }
    }
    let mut right = None;
    for k in (bin + 1)..power.len() {
        if power[k] < half {
            right = Some((k - 1) as f64 + (power[k - 1] - half) / (power[k - 1] - power[k]));
            break;
        }
    }
    Some(right? - left?)
}

/// Local maxima inside `ν ∈ [0.25, 0.75]`, strongest first.
pub fn subharmonic_peaks(spec: &SpectralResult, count: usize) -> Vec<Peak> {
    let floor = PEAK_TO_MEDIAN * median(&spec.power);
    let mut peaks: Vec<Peak> = subharmonic_band(spec.pad)
        .filter(|&k| k > 0 && k + 1 < spec.pad)
        .filter(|&k| spec.power[k] > spec.power[k - 1] && spec.power[k] >= spec.power[k + 1])
        .filter(|&k| spec.power[k] >= floor)
        .filter_map(|k| {
            half_power_width(&spec.power, k).map(|w| Peak {
                bin: k,
                nu: spec.nu[k],
                power: spec.power[k],
                fwhm: w / spec.pad as f64,
            })
        })
        .collect();
    peaks.sort_by(|a, b| b.power.total_cmp(&a.power));
    peaks.truncate(count);
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn alternating(n: usize) -> Vec<f64> {
        (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
    }

    #[test]
    fn alternating_series_is_fully_crystalline() {
        let s = spectrum_of(&alternating(256), 256, 1).unwrap();
        assert_eq!(s.nu[128], 0.5);
        let peak = s.power.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        assert_eq!(peak, 128);
        assert!((s.f - 1.0).abs() < 1e-12);
        assert!(s.fwhm.unwrap() <= 2.0 / 256.0);
        assert_eq!(s.peak_nu, Some(0.5));
    }

    #[test]
    fn constant_series_has_no_line() {
        let s = spectrum_of(&[0.37; 100], 128, 1).unwrap();
        assert!(s.power.iter().all(|&p| p == 0.0));
        assert_eq!(s.f, 0.0);
        assert_eq!(s.fwhm, None);
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = spectrum_of(&x, 4096, 1).unwrap();
        let total: f64 = s.power.iter().sum();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let energy: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        assert!((total - energy).abs() <= 1e-9 * energy);
    }

    #[test]
    fn rejects_short_series_and_bad_padding() {
        assert!(matches!(spectrum_of(&[1.0; 7], 8, 1), Err(Error::TooFewSamples { got: 7, .. })));
        assert!(matches!(spectrum_of(&[1.0; 10], 8, 1), Err(Error::InvalidPadding { .. })));
        assert!(matches!(spectrum_of(&[1.0; 10], 24, 1), Err(Error::InvalidPadding { .. })));
    }

    #[test]
    fn scaling_leaves_fraction_unchanged() {
        let x: Vec<f64> = (0..201).map(|n| (-0.97f64).powi(n) * 0.7 + 0.01 * (n as f64).sin()).collect();
        let base = spectrum_of(&x, default_pad(201), 2).unwrap().f;
        for k in [-3.0, 1e-4, 250.0] {
            let y: Vec<f64> = x.iter().map(|v| v * k).collect();
            assert!((spectrum_of(&y, default_pad(201), 2).unwrap().f - base).abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_fraction_matches_window_share() {
        // E[f] ≈ (window bins) / (non-DC bins), corrected for the removed mean
        let m = 256;
        let w = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let fs: Vec<f64> = (0..100)
            .map(|_| {
                let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                spectrum_of(&x, m, w).unwrap().f
            })
            .collect();
        let mean = fs.iter().sum::<f64>() / fs.len() as f64;
        let sd = (fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (fs.len() - 1) as f64).sqrt();
        let expected = (2 * w + 1) as f64 / (m - 1) as f64 * m as f64 / (m - 1) as f64;
        assert!((mean - expected).abs() <= 3.0 * sd / (fs.len() as f64).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn lorentzian_width() {
        // x_n = (−a)^n has |S(ν)|² ∝ 1/|1 + a e^{−2πiν}|²; half power where
        // cos Δ = (1 + a² − 2(1 − a)²) / (2a), FWHM = Δ/π.
        for rate in [0.01f64, 0.03, 0.1] {
            let a: f64 = (-rate).exp();
            let x: Vec<f64> = (0..4096).map(|n| (-a).powi(n)).collect();
            let s = spectrum_of(&x, 16384, 1).unwrap();
            let delta = ((1.0 + a * a - 2.0 * (1.0 - a).powi(2)) / (2.0 * a)).acos();
            let expected = delta / PI;
            let got = s.fwhm.unwrap();
            assert!((got - expected).abs() <= 2.0 * s.bin_width(), "rate {rate}: {got} vs {expected}");
        }
    }

    #[test]
    fn split_lines() {
        let theta = PI * 1.0674;
        let x: Vec<f64> = (0..401).map(|n| (theta * n as f64).cos() * 0.98f64.powi(n)).collect();
        let s = spectrum_of(&x, default_pad(401), 2).unwrap();
        let peaks = subharmonic_peaks(&s, 2);
        assert_eq!(peaks.len(), 2);
        let mut nus: Vec<f64> = peaks.iter().map(|p| p.nu).collect();
        nus.sort_by(|a, b| a.total_cmp(b));
        let expected = [1.0 - theta / (2.0 * PI), theta / (2.0 * PI)];
        for (n, e) in nus.iter().zip(expected) {
            assert!((n - e).abs() <= s.bin_width());
        }
    }
}
