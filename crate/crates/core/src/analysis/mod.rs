//! Spectral analysis of the stroboscopic magnetization.

mod fit;
mod spectrum;
mod sweep;

pub use fit::{fit_power_law, PowerLawFit, GRADIENT_TOL, MAX_ITERATIONS};
pub use spectrum::{
    crystalline_fraction, default_pad, peak_fwhm, spectrum, spectrum_of, subharmonic_peaks, Peak, SpectralResult,
    DEFAULT_WINDOW_BINS, MIN_SAMPLES, PEAK_TO_MEDIAN,
};
pub use sweep::{
    fwhm_vs_delta, lifetime_vs_tau, params_with_ratio, point_spectrum, run_grid, simulate_point, spectrum_for,
    sweep_delta_ratio, sweep_delta_tau, CellError, FwhmPoint, GridAxis, LifetimePoint, PhaseDiagram, SweepSettings,
};
