//! Pulse programs and their stroboscopic evolution.

mod dsl;
mod evolve;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::propagators::{free_evolution_map, pulse_map, PulseSpec};
use crate::state::Magnetization;
use crate::AffineMap;

pub use dsl::{
    parse_program, parse_sequence, Angle, AngleUnit, InitSpec, ParamEntry, ParamKey, ParamValue, Program,
    SegmentDirective,
};
pub use evolve::{evolve, evolve_cycles, evolve_with, intra_cycle_trace, EvolveOptions, TracePoint};
pub use oracle::{analytic_two_cycles, first_order_two_cycles, FirstOrderTwoCycles, TwoCycleValues};

/// Unit in which a program expresses times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    /// Times in units of the decoherence time T2.
    #[default]
    T2,
    Seconds,
}

impl TimeUnit {
    /// Drive amplitude used when a program does not set `omega1`.
    ///
    /// In T2 units a π pulse lasts 1e-3 T2; in seconds the drive matches a
    /// 16.7 kHz RF amplitude (π pulse ≈ 30 µs).
    pub fn default_omega1(self) -> f64 {
        match self {
            TimeUnit::T2 => 1000.0 * std::f64::consts::PI,
            TimeUnit::Seconds => std::f64::consts::TAU * 16.7e3,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            TimeUnit::T2 => "t2",
            TimeUnit::Seconds => "seconds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    Delay { duration: f64 },
    Pulse(PulseSpec),
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Delay { duration } => *duration,
            Segment::Pulse(p) => p.duration(),
        }
    }

    pub fn map(&self, p: &SystemParams, opts: &EvolveOptions) -> Result<AffineMap> {
        match self {
            Segment::Delay { duration } => free_evolution_map(p, *duration),
            Segment::Pulse(pulse) => pulse_map(p, pulse, opts.dissipative_pulse),
        }
    }
}

/// One period of the drive, repeated `cycles` times from `initial`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSequence {
    segments: Vec<Segment>,
    cycles: u64,
    initial: Magnetization,
    unit: TimeUnit,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>, cycles: u64, initial: Magnetization, unit: TimeUnit) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("a period needs at least one segment".into()));
        }
        for s in &segments {
            let d = s.duration();
            if !d.is_finite() || d < 0.0 {
                return Err(Error::NegativeDuration(d));
            }
        }
        if cycles == 0 {
            return Err(Error::InvalidInput("cycles must be at least 1".into()));
        }
        let initial = initial.validate()?;
        Ok(Self { segments, cycles, initial, unit })
    }

    /// The standard protocol: delay `tau`, then `pulse`.
    pub fn delay_pulse(tau: f64, pulse: PulseSpec, cycles: u64, initial: Magnetization) -> Result<Self> {
        Self::new(vec![Segment::Delay { duration: tau }, Segment::Pulse(pulse)], cycles, initial, TimeUnit::T2)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn initial(&self) -> Magnetization {
        self.initial
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    /// Total idle time per period.
    pub fn tau(&self) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Delay { duration } => Some(*duration),
                Segment::Pulse(_) => None,
            })
            .sum()
    }

    /// First pulse of the period, if any.
    pub fn pulse(&self) -> Option<&PulseSpec> {
        self.segments.iter().find_map(|s| match s {
            Segment::Pulse(p) => Some(p),
            Segment::Delay { .. } => None,
        })
    }

    pub fn period(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn with_cycles(&self, cycles: u64) -> Result<Self> {
        Self::new(self.segments.clone(), cycles, self.initial, self.unit)
    }

    pub fn with_initial(&self, initial: Magnetization) -> Result<Self> {
        Self::new(self.segments.clone(), self.cycles, initial, self.unit)
    }

    pub fn with_unit(mut self, unit: TimeUnit) -> Self {
        self.unit = unit;
        self
    }

    /// Propagator of one full period.
    pub fn cycle_map(&self, p: &SystemParams, opts: &EvolveOptions) -> Result<AffineMap> {
        self.segments.iter().try_fold(AffineMap::identity(), |acc, s| Ok(acc.then(&s.map(p, opts)?)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub n: u64,
    pub t: f64,
    pub m: Magnetization,
}

/// Magnetization sampled at the end of every period, starting at `n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StroboscopicSeries {
    pub samples: Vec<Sample>,
    pub params: SystemParams,
    pub sequence: PulseSequence,
}

impl StroboscopicSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mz(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.m.mz).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::Axis;

    #[test]
    fn period_is_delay_plus_pulse() {
        let pulse = PulseSpec::from_delta(Axis::Y, 0.2, 50.0);
        let seq = PulseSequence::delay_pulse(3.0, pulse, 4, Magnetization::longitudinal(-0.5)).unwrap();
        assert!((seq.period() - (3.0 + pulse.duration())).abs() < 1e-12);
        assert_eq!(seq.tau(), 3.0);
        assert_eq!(seq.pulse(), Some(&pulse));
    }

    #[test]
    fn rejects_invalid_sequences() {
        let pulse = PulseSpec::from_delta(Axis::Y, 0.0, 1.0);
        assert!(PulseSequence::delay_pulse(1.0, pulse, 0, Magnetization::default()).is_err());
        assert!(PulseSequence::delay_pulse(-1.0, pulse, 1, Magnetization::default()).is_err());
        assert!(PulseSequence::delay_pulse(1.0, pulse, 1, Magnetization::longitudinal(1.2)).is_err());
        assert!(PulseSequence::new(vec![], 1, Magnetization::default(), TimeUnit::T2).is_err());
    }
}
