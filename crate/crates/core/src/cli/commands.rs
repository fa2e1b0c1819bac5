use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::{parse_config, SweepKind, SweepPlan};
use super::output::{csv_bytes, json_bytes, num, opt, with_suffix, write_atomic, RunManifest};
use super::{CliError, FitArgs, Format, SimulateArgs, SpectrumArgs, SweepArgs};
use crate::analysis::{
    default_pad, fit_power_law, fwhm_vs_delta, lifetime_vs_tau, spectrum_of, subharmonic_peaks, sweep_delta_ratio,
    sweep_delta_tau, FwhmPoint, LifetimePoint, Peak, PhaseDiagram, PowerLawFit, SpectralResult,
};
use crate::params::SystemParams;
use crate::sequence::{
    evolve_with, intra_cycle_trace, parse_program, EvolveOptions, PulseSequence, StroboscopicSeries, TracePoint,
};

/// Fraction of sweep cells that must succeed for exit code 0.
pub const MIN_SUCCESS_FRACTION: f64 = 0.9;

pub(super) fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn utf8(path: &Path, bytes: &[u8]) -> Result<String, CliError> {
    String::from_utf8(bytes.to_vec()).map_err(|_| CliError::Input(format!("{}: not UTF-8 text", path.display())))
}

/// Parses a sequence file, reporting errors against the file name.
pub(super) fn load_sequence(name: &str, text: &str) -> Result<(SystemParams, PulseSequence), CliError> {
    let compiled = parse_program(text).and_then(|p| p.compile());
    compiled.map_err(|e| match CliError::from(e) {
        CliError::Input(m) => CliError::Input(format!("{name}: {m}")),
        other => other,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub(super) struct RunOptions {
    pub cycles: u64,
    pub dissipative_pulse: bool,
}

pub(super) fn run_sequence(
    p: &SystemParams,
    seq: &PulseSequence,
    opts: RunOptions,
) -> Result<StroboscopicSeries, CliError> {
    let evolve = EvolveOptions { dissipative_pulse: opts.dissipative_pulse };
    Ok(evolve_with(p, seq, opts.cycles, &evolve)?)
}

pub(super) fn trace_for(
    p: &SystemParams,
    seq: &PulseSequence,
    opts: RunOptions,
    points: usize,
) -> Result<Vec<TracePoint>, CliError> {
    let evolve = EvolveOptions { dissipative_pulse: opts.dissipative_pulse };
    if opts.cycles == 0 {
        return Ok(vec![TracePoint { t: 0.0, cycle: 0, segment: None, m: seq.initial() }]);
    }
    Ok(intra_cycle_trace(p, &seq.with_cycles(opts.cycles)?, points, &evolve)?)
}

pub(super) fn series_csv(series: &StroboscopicSeries) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["n", "t", "mx", "my", "mz"],
        series.samples.iter().map(|s| vec![s.n.to_string(), num(s.t), num(s.m.mx), num(s.m.my), num(s.m.mz)]),
    )
}

pub(super) fn trace_csv(trace: &[TracePoint]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["t", "cycle", "segment", "mx", "my", "mz"],
        trace.iter().map(|p| {
            vec![
                num(p.t),
                p.cycle.to_string(),
                p.segment.map(|s| s.to_string()).unwrap_or_default(),
                num(p.m.mx),
                num(p.m.my),
                num(p.m.mz),
            ]
        }),
    )
}

pub(super) fn spectrum_csv(spec: &SpectralResult) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["nu", "re", "im", "power"],
        spec.nu
            .iter()
            .zip(&spec.amp)
            .zip(&spec.power)
            .map(|((nu, a), p)| vec![num(*nu), num(a.re), num(a.im), num(*p)]),
    )
}

#[derive(Debug, Serialize)]
struct SampleRow {
    n: u64,
    t: f64,
    mx: f64,
    my: f64,
    mz: f64,
}

#[derive(Debug, Serialize)]
struct SimulationJson<'a> {
    manifest: &'a RunManifest,
    samples: Vec<SampleRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [TracePoint]>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let bytes = read_input(&args.input)?;
    let text = utf8(&args.input, &bytes)?;
    let (p, seq) = load_sequence(&args.input.display().to_string(), &text)?;
    let opts = RunOptions { cycles: args.cycles.unwrap_or(seq.cycles()), dissipative_pulse: args.dissipative_pulse };
    if args.trace.is_some() && args.out.is_none() && args.format == Format::Csv {
        return Err(CliError::Input("--trace with CSV output needs --out".into()));
    }
    let series = run_sequence(&p, &seq, opts)?;
    let trace = args.trace.map(|k| trace_for(&p, &seq, opts, k)).transpose()?;

    let manifest = RunManifest::new("simulate")
        .input(args.input.display().to_string(), &bytes)
        .options(serde_json::json!({ "run": opts, "trace": args.trace, "format": format!("{:?}", args.format).to_lowercase() }))
        .params(p);

    match args.format {
        Format::Csv => {
            let data = series_csv(&series)?;
            match &args.out {
                None => print!("{}", String::from_utf8_lossy(&data)),
                Some(out) => {
                    write_atomic(out, &data)?;
                    if let Some(trace) = &trace {
                        write_atomic(&trace_path(out), &trace_csv(trace)?)?;
                    }
                    write_atomic(&with_suffix(out, ".manifest.json"), &json_bytes(&manifest)?)?;
                }
            }
        }
        Format::Json => {
            let doc = SimulationJson {
                manifest: &manifest,
                samples: series
                    .samples
                    .iter()
                    .map(|s| SampleRow { n: s.n, t: s.t, mx: s.m.mx, my: s.m.my, mz: s.m.mz })
                    .collect(),
                trace: trace.as_deref(),
            };
            let data = json_bytes(&doc)?;
            match &args.out {
                None => print!("{}", String::from_utf8_lossy(&data)),
                Some(out) => write_atomic(out, &data)?,
            }
        }
    }
    Ok(())
}

/// `run.csv` → `run.trace.csv`.
fn trace_path(out: &Path) -> std::path::PathBuf {
    match (out.file_stem(), out.extension()) {
        (Some(stem), Some(ext)) => {
            let mut name = stem.to_owned();
            name.push(".trace.");
            name.push(ext);
            out.with_file_name(name)
        }
        _ => with_suffix(out, ".trace.csv"),
    }
}

/// Reads the `mz` column of a series CSV.
pub(super) fn read_series_csv(path: &Path, bytes: &[u8]) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = headers.iter().position(|h| h == "mz").ok_or_else(|| bad("no `mz` column".into()))?;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = rec.get(col).unwrap_or("");
        let v = field
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("row {}: `{field}` is not a finite number", i + 2)))?;
        values.push(v);
    }
    Ok(values)
}

#[derive(Debug, Serialize)]
pub(super) struct SpectrumSummary<'a> {
    pub samples: usize,
    pub pad: usize,
    pub window_bins: usize,
    pub bin_width: f64,
    pub f: f64,
    pub fwhm: Option<f64>,
    pub peak_nu: Option<f64>,
    /// The two strongest lines in the subharmonic band.
    pub peaks: Vec<Peak>,
    pub energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<&'a RunManifest>,
}

pub(super) fn summarize<'a>(spec: &SpectralResult, manifest: Option<&'a RunManifest>) -> SpectrumSummary<'a> {
    SpectrumSummary {
        samples: spec.samples,
        pad: spec.pad,
        window_bins: spec.window_bins,
        bin_width: spec.bin_width(),
        f: spec.f,
        fwhm: spec.fwhm,
        peak_nu: spec.peak_nu,
        peaks: subharmonic_peaks(spec, 2),
        energy: spec.energy,
        manifest,
    }
}

pub fn spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let bytes = read_input(&args.input)?;
    let is_csv = args.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut manifest = RunManifest::new("spectrum").input(args.input.display().to_string(), &bytes);
    let mz = if is_csv {
        read_series_csv(&args.input, &bytes)?
    } else {
        let text = utf8(&args.input, &bytes)?;
        let (p, seq) = load_sequence(&args.input.display().to_string(), &text)?;
        let opts =
            RunOptions { cycles: args.cycles.unwrap_or(seq.cycles()), dissipative_pulse: args.dissipative_pulse };
        manifest = manifest.params(p).options(serde_json::json!({ "run": opts }));
        run_sequence(&p, &seq, opts)?.mz()
    };
    let pad = args.pad.unwrap_or_else(|| default_pad(mz.len()));
    let spec = spectrum_of(&mz, pad, args.window_bins)?;
    let mut options = match manifest.options.take() {
        serde_json::Value::Object(m) => m,
        _ => serde_json::Map::new(),
    };
    options.insert("pad".into(), pad.into());
    options.insert("window_bins".into(), args.window_bins.into());
    manifest.options = options.into();

    write_atomic(&with_suffix(&args.out, ".csv"), &spectrum_csv(&spec)?)?;
    write_atomic(&with_suffix(&args.out, ".json"), &json_bytes(&summarize(&spec, Some(&manifest)))?)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub(super) enum SweepResult {
    Grid(PhaseDiagram),
    Fwhm { points: Vec<FwhmPoint>, fit: Option<PowerLawFit>, fit_error: Option<String> },
    Lifetime { points: Vec<LifetimePoint> },
}

impl SweepResult {
    pub fn success_fraction(&self) -> f64 {
        let frac = |ok: usize, n: usize| if n == 0 { 0.0 } else { ok as f64 / n as f64 };
        match self {
            SweepResult::Grid(d) => d.success_fraction(),
            SweepResult::Fwhm { points, .. } => frac(points.iter().filter(|p| p.fwhm.is_some()).count(), points.len()),
            SweepResult::Lifetime { points } => frac(points.iter().filter(|p| p.fwhm.is_some()).count(), points.len()),
        }
    }
}

pub(super) fn run_plan(plan: &SweepPlan, jobs: usize) -> Result<SweepResult, CliError> {
    let s = crate::analysis::SweepSettings { jobs, ..plan.settings.clone() };
    Ok(match plan.kind {
        SweepKind::DeltaRatio => {
            SweepResult::Grid(sweep_delta_ratio(&plan.base, &plan.deltas, &plan.ratios, plan.taus[0], &s))
        }
        SweepKind::DeltaTau => SweepResult::Grid(sweep_delta_tau(&plan.base, &plan.deltas, &plan.taus, &s)),
        SweepKind::FwhmDelta => {
            let points = fwhm_vs_delta(&plan.base, &plan.deltas, plan.taus[0], &s)?;
            let data: Vec<(f64, f64)> = points.iter().filter_map(|p| p.fwhm.map(|w| (p.delta, w))).collect();
            let (fit, fit_error) = match fit_power_law(&data) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepResult::Fwhm { points, fit, fit_error }
        }
        SweepKind::LifetimeTau => {
            SweepResult::Lifetime { points: lifetime_vs_tau(&plan.base, plan.deltas[0], &plan.taus, &s)? }
        }
    })
}

pub(super) fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>, CliError> {
    match result {
        SweepResult::Grid(d) => {
            let corner = format!("{}\\{}", d.y_axis.name, d.x_axis.name);
            let mut header = vec![corner];
            header.extend(d.x_axis.values.iter().map(|&v| num(v)));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_bytes(
                &header,
                d.y_axis
                    .values
                    .iter()
                    .zip(&d.f_grid)
                    .map(|(y, row)| std::iter::once(num(*y)).chain(row.iter().map(|f| opt(*f))).collect()),
            )
        }
        SweepResult::Fwhm { points, .. } => csv_bytes(
            &["delta", "fwhm", "delta_over_pi"],
            points.iter().map(|p| vec![num(p.delta), opt(p.fwhm), num(p.delta / std::f64::consts::PI)]),
        ),
        SweepResult::Lifetime { points } => csv_bytes(
            &["tau", "period", "fwhm", "lifetime_cycles", "lifetime_time"],
            points
                .iter()
                .map(|p| vec![num(p.tau), num(p.period), opt(p.fwhm), opt(p.lifetime_cycles), opt(p.lifetime_time)]),
        ),
    }
}

#[derive(Debug, Serialize)]
struct SweepJson<'a> {
    kind: SweepKind,
    success_fraction: f64,
    #[serde(flatten)]
    result: &'a SweepResult,
    manifest: &'a RunManifest,
}

/// Writes PREFIX.csv and PREFIX.json; fails if too few cells succeeded.
pub(super) fn write_sweep(
    prefix: &Path,
    plan: &SweepPlan,
    result: &SweepResult,
    manifest: &RunManifest,
) -> Result<(), CliError> {
    let success_fraction = result.success_fraction();
    write_atomic(&with_suffix(prefix, ".csv"), &sweep_csv(result)?)?;
    let doc = SweepJson { kind: plan.kind, success_fraction, result, manifest };
    write_atomic(&with_suffix(prefix, ".json"), &json_bytes(&doc)?)?;
    if success_fraction < MIN_SUCCESS_FRACTION {
        return Err(CliError::Run(format!(
            "only {:.1}% of sweep cells succeeded (need {:.0}%)",
            100.0 * success_fraction,
            100.0 * MIN_SUCCESS_FRACTION
        )));
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let bytes = read_input(&args.config)?;
    let text = utf8(&args.config, &bytes)?;
    let plan = parse_config(&text)
        .and_then(|c| c.plan(args.cycles))
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    let result = run_plan(&plan, args.jobs)?;
    let manifest =
        RunManifest::new("sweep").input(args.config.display().to_string(), &bytes).options(&plan).params(plan.base);
    write_sweep(&args.out, &plan, &result, &manifest)
}

/// Reads (x, y) pairs, skipping rows whose y is empty.
fn read_points(args: &FitArgs, bytes: &[u8]) -> Result<(Vec<(f64, f64)>, usize), CliError> {
    let bad = |m: String| CliError::Input(format!("{}: {m}", args.points.display()));
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(bytes);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| bad(e.to_string()))?,
        None => return Err(bad("empty file".into())),
    };
    let has_header = first.get(0).is_some_and(|f| f.parse::<f64>().is_err());
    let column = |name: &Option<String>, default: usize| -> Result<usize, CliError> {
        match name {
            None => Ok(default),
            Some(n) if has_header => {
                first.iter().position(|h| h == n).ok_or_else(|| bad(format!("no column named `{n}`")))
            }
            Some(n) => {
                n.parse().map_err(|_| bad(format!("no header row, so --x/--y must be column indices, got `{n}`")))
            }
        }
    };
    let (xc, yc) = (column(&args.x, 0)?, column(&args.y, 1)?);
    let mut rows = Vec::new();
    if !has_header {
        rows.push(first.clone());
    }
    for r in records {
        rows.push(r.map_err(|e| bad(e.to_string()))?);
    }
    let mut points = Vec::new();
    let mut skipped = 0;
    for (i, r) in rows.iter().enumerate() {
        let line = i + 1 + usize::from(has_header);
        let field = |c: usize| r.get(c).unwrap_or("");
        if field(yc).is_empty() {
            skipped += 1;
            continue;
        }
        let parse =
            |c: usize| field(c).parse::<f64>().map_err(|_| bad(format!("line {line}: `{}` is not a number", field(c))));
        points.push((parse(xc)?, parse(yc)?));
    }
    Ok((points, skipped))
}

#[derive(Debug, Serialize)]
struct FitJson<'a> {
    model: &'a str,
    #[serde(flatten)]
    fit: &'a PowerLawFit,
    points: usize,
    skipped: usize,
    manifest: &'a RunManifest,
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let model: String = args.model.chars().filter(|c| !c.is_whitespace()).collect();
    if model != "a*d^l+b" {
        return Err(CliError::Input(format!("unsupported model `{}` (only a*d^l+b)", args.model)));
    }
    let bytes = read_input(&args.points)?;
    let (points, skipped) = read_points(args, &bytes)?;
    let fit = fit_power_law(&points)?;
    let manifest = RunManifest::new("fit")
        .input(args.points.display().to_string(), &bytes)
        .options(serde_json::json!({ "model": model, "x": args.x, "y": args.y }));
    let doc = FitJson { model: &model, fit: &fit, points: points.len(), skipped, manifest: &manifest };
    let data = json_bytes(&doc)?;
    match &args.out {
        None => print!("{}", String::from_utf8_lossy(&data)),
        Some(out) => write_atomic(out, &data)?,
    }
    Ok(())
}
