//! Parameter sweeps over pulse error, timescale ratio and delay.
//!
//! Cells are independent; they may run on any number of worker threads and
//! are gathered by index, so every grid is bit-identical regardless of the
//! worker count.

use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::{default_pad, spectrum_of, SpectralResult, DEFAULT_WINDOW_BINS};
use crate::error::{Error, Result};
use crate::params::{validate_params, RawParams, SystemParams};
use crate::propagators::{Axis, PulseSpec};
use crate::sequence::{evolve_with, EvolveOptions, PulseSequence, StroboscopicSeries};
use crate::state::Magnetization;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub cycles: u64,
    /// Zero-padding length; `None` picks [`default_pad`].
    pub pad: Option<usize>,
    pub window_bins: usize,
    /// Initial `Mz` as a multiple of `M∘`.
    pub initial_mz_fraction: f64,
    pub dissipative_pulse: bool,
    /// Worker threads; 0 uses the global pool size.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            cycles: 200,
            pad: None,
            window_bins: DEFAULT_WINDOW_BINS,
            initial_mz_fraction: -0.9,
            dissipative_pulse: false,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellError {
    pub row: usize,
    pub col: usize,
    pub message: String,
}

/// Crystalline fraction on a 2-D grid; rows follow `y_axis`, columns `x_axis`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub x_axis: GridAxis,
    pub y_axis: GridAxis,
    pub f_grid: Vec<Vec<Option<f64>>>,
    pub errors: Vec<CellError>,
}

impl PhaseDiagram {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.f_grid.get(row)?.get(col).copied().flatten()
    }

    pub fn cell_count(&self) -> usize {
        self.x_axis.values.len() * self.y_axis.values.len()
    }

    pub fn success_fraction(&self) -> f64 {
        if self.cell_count() == 0 {
            return 0.0;
        }
        1.0 - self.errors.len() as f64 / self.cell_count() as f64
    }
}

fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

/// Evaluates `cell(row, col)` over the grid.
pub fn run_grid<F>(rows: usize, cols: usize, jobs: usize, cell: F) -> (Vec<Vec<Option<f64>>>, Vec<CellError>)
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let flat: Vec<Result<f64>> =
        with_pool(jobs, || (0..rows * cols).into_par_iter().map(|i| cell(i / cols, i % cols)).collect());
    let mut grid = vec![vec![None; cols]; rows];
    let mut errors = Vec::new();
    for (i, r) in flat.into_iter().enumerate() {
        let (row, col) = (i / cols, i % cols);
        match r {
            Ok(f) => grid[row][col] = Some(f),
            Err(e) => errors.push(CellError { row, col, message: e.to_string() }),
        }
    }
    (grid, errors)
}

/// Delay-plus-pulse series for one parameter point.
pub fn simulate_point(p: &SystemParams, tau: f64, delta: f64, s: &SweepSettings) -> Result<StroboscopicSeries> {
    let pulse = PulseSpec::from_delta(Axis::Y, delta, p.omega1());
    let initial = Magnetization::longitudinal(s.initial_mz_fraction * p.m_eq());
    let seq = PulseSequence::delay_pulse(tau, pulse, s.cycles.max(1), initial)?;
    evolve_with(p, &seq, s.cycles, &EvolveOptions { dissipative_pulse: s.dissipative_pulse })
}

pub fn spectrum_for(series: &StroboscopicSeries, s: &SweepSettings) -> Result<SpectralResult> {
    let pad = s.pad.unwrap_or_else(|| default_pad(series.len()));
    spectrum_of(&series.mz(), pad, s.window_bins)
}

pub fn point_spectrum(p: &SystemParams, tau: f64, delta: f64, s: &SweepSettings) -> Result<SpectralResult> {
    spectrum_for(&simulate_point(p, tau, delta, s)?, s)
}

/// `base` with `T1 = ratio · T2`; dephasing follows from the new `T1`.
pub fn params_with_ratio(base: &SystemParams, ratio: f64) -> Result<SystemParams> {
    validate_params(RawParams {
        t1: Some(ratio * base.t2()),
        t2: Some(base.t2()),
        t_phi: None,
        m_eq: base.m_eq(),
        omega1: base.omega1(),
    })
}

/// Crystalline fraction over pulse error δ (columns) and `T1/T2` (rows).
pub fn sweep_delta_ratio(
    base: &SystemParams,
    deltas: &[f64],
    ratios: &[f64],
    tau: f64,
    s: &SweepSettings,
) -> PhaseDiagram {
    let (f_grid, errors) = run_grid(ratios.len(), deltas.len(), s.jobs, |row, col| {
        let p = params_with_ratio(base, ratios[row])?;
        Ok(point_spectrum(&p, tau, deltas[col], s)?.f)
    });
    PhaseDiagram {
        x_axis: GridAxis::new("delta", deltas.to_vec()),
        y_axis: GridAxis::new("t1_over_t2", ratios.to_vec()),
        f_grid,
        errors,
    }
}

/// Crystalline fraction over pulse error δ (columns) and delay τ (rows).
pub fn sweep_delta_tau(base: &SystemParams, deltas: &[f64], taus: &[f64], s: &SweepSettings) -> PhaseDiagram {
    let (f_grid, errors) =
        run_grid(taus.len(), deltas.len(), s.jobs, |row, col| Ok(point_spectrum(base, taus[row], deltas[col], s)?.f));
    PhaseDiagram {
        x_axis: GridAxis::new("delta", deltas.to_vec()),
        y_axis: GridAxis::new("tau", taus.to_vec()),
        f_grid,
        errors,
    }
}

fn run_list<T: Send>(n: usize, jobs: usize, item: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    with_pool(jobs, || (0..n).into_par_iter().map(&item).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FwhmPoint {
    pub delta: f64,
    pub fwhm: Option<f64>,
}

/// Width of the subharmonic line for each pulse error.
pub fn fwhm_vs_delta(p: &SystemParams, deltas: &[f64], tau: f64, s: &SweepSettings) -> Result<Vec<FwhmPoint>> {
    run_list(deltas.len(), s.jobs, |i| {
        Ok(FwhmPoint { delta: deltas[i], fwhm: point_spectrum(p, tau, deltas[i], s)?.fwhm })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimePoint {
    pub tau: f64,
    pub period: f64,
    pub fwhm: Option<f64>,
    /// `1 / FWHM`, in drive periods.
    pub lifetime_cycles: Option<f64>,
    /// Lifetime in time units, `lifetime_cycles × T`.
    pub lifetime_time: Option<f64>,
}

/// Lifetime of the period-doubled response as a function of the delay.
pub fn lifetime_vs_tau(p: &SystemParams, delta: f64, taus: &[f64], s: &SweepSettings) -> Result<Vec<LifetimePoint>> {
    if taus.is_empty() {
        return Err(Error::InvalidInput("empty τ grid".into()));
    }
    run_list(taus.len(), s.jobs, |i| {
        let tau = taus[i];
        let series = simulate_point(p, tau, delta, s)?;
        let period = series.sequence.period();
        let fwhm = spectrum_for(&series, s)?.fwhm;
        let lifetime_cycles = fwhm.map(|w| 1.0 / w);
        Ok(LifetimePoint { tau, period, fwhm, lifetime_cycles, lifetime_time: lifetime_cycles.map(|c| c * period) })
    })
}
