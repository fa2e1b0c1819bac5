use serde::Serialize;

use super::{PulseSequence, Sample, Segment, StroboscopicSeries};
use crate::error::Result;
use crate::params::SystemParams;
use crate::propagators::{
    exact_segment_map, free_evolution_map, lindblad_superoperator, rotation_by, rotation_generator,
};
use crate::state::Magnetization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvolveOptions {
    /// Let relaxation act during pulses too. Off for the ideal protocol.
    pub dissipative_pulse: bool,
}

/// Stroboscopic series over the sequence's own cycle count.
pub fn evolve(p: &SystemParams, seq: &PulseSequence) -> Result<StroboscopicSeries> {
    evolve_with(p, seq, seq.cycles(), &EvolveOptions::default())
}

/// Stroboscopic series over `cycles` periods; zero yields only the initial state.
pub fn evolve_cycles(p: &SystemParams, seq: &PulseSequence, cycles: u64) -> Result<StroboscopicSeries> {
    evolve_with(p, seq, cycles, &EvolveOptions::default())
}

pub fn evolve_with(
    p: &SystemParams,
    seq: &PulseSequence,
    cycles: u64,
    opts: &EvolveOptions,
) -> Result<StroboscopicSeries> {
    let map = seq.cycle_map(p, opts)?;
    let period = seq.period();
    let mut samples = Vec::with_capacity(cycles as usize + 1);
    let mut m = seq.initial();
    samples.push(Sample { n: 0, t: 0.0, m });
    for n in 1..=cycles {
        m = map.apply(m);
        samples.push(Sample { n, t: n as f64 * period, m });
    }
    Ok(StroboscopicSeries { samples, params: *p, sequence: seq.clone() })
}

/// A point of the continuous-time trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub cycle: u64,
    /// Index of the segment within the period; `None` for the initial state.
    pub segment: Option<usize>,
    pub m: Magnetization,
}

/// Dense trajectory with `samples_per_segment` evenly spaced points inside
/// each segment (the segment end included).
pub fn intra_cycle_trace(
    p: &SystemParams,
    seq: &PulseSequence,
    samples_per_segment: usize,
    opts: &EvolveOptions,
) -> Result<Vec<TracePoint>> {
    let k = samples_per_segment.max(1);
    let cycle_map = seq.cycle_map(p, opts)?;
    let segment_maps = seq.segments().iter().map(|s| s.map(p, opts)).collect::<Result<Vec<_>>>()?;
    let period = seq.period();

    let mut out = Vec::with_capacity(1 + seq.cycles() as usize * seq.segments().len() * k);
    let mut boundary = seq.initial();
    out.push(TracePoint { t: 0.0, cycle: 0, segment: None, m: boundary });
    for n in 0..seq.cycles() {
        let mut start = boundary;
        let mut t0 = n as f64 * period;
        for (idx, (seg, full)) in seq.segments().iter().zip(&segment_maps).enumerate() {
            for j in 1..=k {
                let m = if j == k {
                    full.apply(start)
                } else {
                    let frac = j as f64 / k as f64;
                    partial_segment(p, seg, frac, opts)?.apply(start)
                };
                out.push(TracePoint { t: t0 + seg.duration() * j as f64 / k as f64, cycle: n, segment: Some(idx), m });
            }
            start = full.apply(start);
            t0 += seg.duration();
        }
        boundary = cycle_map.apply(boundary);
        // keep period-end points identical to the stroboscopic series
        if let Some(last) = out.last_mut() {
            last.m = boundary;
            last.t = (n + 1) as f64 * period;
        }
    }
    Ok(out)
}

fn partial_segment(p: &SystemParams, seg: &Segment, frac: f64, opts: &EvolveOptions) -> Result<crate::AffineMap> {
    match seg {
        Segment::Delay { duration } => free_evolution_map(p, duration * frac),
        Segment::Pulse(pulse) if opts.dissipative_pulse && pulse.duration() > 0.0 => {
            let gen = lindblad_superoperator(p) + rotation_generator(pulse.signed_omega(), pulse.axis());
            exact_segment_map(&gen, pulse.duration() * frac)
        }
        Segment::Pulse(pulse) => Ok(rotation_by(pulse.axis(), pulse.theta() * frac)),
    }
}
