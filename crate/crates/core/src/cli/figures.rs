//! Canned figure datasets built from the checked-in recipes.

use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use super::commands::{
    load_sequence, run_plan, run_sequence, series_csv, spectrum_csv, summarize, trace_csv, trace_for, write_sweep,
    RunOptions,
};
use super::config::parse_config;
use super::output::{json_bytes, write_atomic, RunManifest};
use super::{CliError, FiguresArgs};
use crate::analysis::{default_pad, simulate_point, spectrum_of, SweepSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4,
    Fig5,
}

pub const RECIPES: &[(&str, &str)] = &[
    ("fig1.edtc", include_str!("../../recipes/fig1.edtc")),
    ("fig2a.edtc", include_str!("../../recipes/fig2a.edtc")),
    ("fig2b.edtc", include_str!("../../recipes/fig2b.edtc")),
    ("fig2c.edtc", include_str!("../../recipes/fig2c.edtc")),
    ("fig3a.toml", include_str!("../../recipes/fig3a.toml")),
    ("fig3b.toml", include_str!("../../recipes/fig3b.toml")),
    ("fig3c.toml", include_str!("../../recipes/fig3c.toml")),
    ("fig4.toml", include_str!("../../recipes/fig4.toml")),
    ("fig5.toml", include_str!("../../recipes/fig5.toml")),
];

fn recipe(name: &str) -> &'static str {
    RECIPES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).expect("recipe is embedded")
}

impl Figure {
    pub fn recipes(self) -> &'static [&'static str] {
        match self {
            Figure::Fig1 => &["fig1.edtc"],
            Figure::Fig2 => &["fig2a.edtc", "fig2b.edtc", "fig2c.edtc"],
            Figure::Fig3a => &["fig3a.toml"],
            Figure::Fig3b => &["fig3b.toml"],
            Figure::Fig3c => &["fig3c.toml"],
            Figure::Fig4 => &["fig4.toml"],
            Figure::Fig5 => &["fig5.toml"],
        }
    }
}

/// Points per segment in the fig1 intra-cycle trace.
const TRACE_POINTS: usize = 16;

#[derive(Serialize)]
struct Bundle<'a, T: Serialize> {
    runs: T,
    manifest: &'a RunManifest,
}

pub fn run(args: &FiguresArgs) -> Result<(), CliError> {
    let dir = args.out.as_path();
    let names = args.name.recipes();
    let mut manifest = RunManifest::new(&format!("figures {}", args.name.to_possible_value().unwrap().get_name()));
    for name in names {
        manifest = manifest.input(format!("recipe:{name}"), recipe(name).as_bytes());
        write_atomic(&dir.join(name), recipe(name).as_bytes())?;
    }
    match args.name {
        Figure::Fig1 | Figure::Fig2 => sequences(dir, names, args.cycles, manifest),
        Figure::Fig5 => lifetime(dir, args, manifest),
        _ => {
            let text = recipe(names[0]);
            let plan = parse_config(text).and_then(|c| c.plan(args.cycles))?;
            let result = run_plan(&plan, args.jobs)?;
            let stem = if plan.kind.is_grid() { "phase" } else { "fwhm" };
            write_sweep(&dir.join(stem), &plan, &result, &manifest.options(&plan).params(plan.base))
        }
    }
}

#[derive(Serialize)]
struct SequenceRun<'a> {
    recipe: &'a str,
    params: crate::params::SystemParams,
    run: RunOptions,
    spectrum: super::commands::SpectrumSummary<'a>,
}

/// Series, spectrum and (for fig1) trace for each sequence recipe.
fn sequences(dir: &Path, names: &[&str], cycles: Option<u64>, manifest: RunManifest) -> Result<(), CliError> {
    let mut specs = Vec::new();
    for name in names {
        let (p, seq) = load_sequence(name, recipe(name))?;
        let opts = RunOptions { cycles: cycles.unwrap_or(seq.cycles()), dissipative_pulse: false };
        let series = run_sequence(&p, &seq, opts)?;
        let mz = series.mz();
        let spec = spectrum_of(&mz, default_pad(mz.len()), crate::analysis::DEFAULT_WINDOW_BINS)?;
        let stem = name.trim_end_matches(".edtc");
        write_atomic(&dir.join(format!("{stem}.series.csv")), &series_csv(&series)?)?;
        write_atomic(&dir.join(format!("{stem}.spectrum.csv")), &spectrum_csv(&spec)?)?;
        if names.len() == 1 {
            let trace = trace_for(&p, &seq, opts, TRACE_POINTS)?;
            write_atomic(&dir.join(format!("{stem}.trace.csv")), &trace_csv(&trace)?)?;
        }
        specs.push((name, p, opts, spec));
    }
    let runs: Vec<SequenceRun> = specs
        .iter()
        .map(|(name, p, opts, spec)| SequenceRun {
            recipe: name,
            params: *p,
            run: *opts,
            spectrum: summarize(spec, None),
        })
        .collect();
    write_atomic(&dir.join("summary.json"), &json_bytes(&Bundle { runs, manifest: &manifest })?)
}

/// Lifetime table plus the stroboscopic series behind each point.
fn lifetime(dir: &Path, args: &FiguresArgs, manifest: RunManifest) -> Result<(), CliError> {
    let plan = parse_config(recipe("fig5.toml")).and_then(|c| c.plan(args.cycles))?;
    let result = run_plan(&plan, args.jobs)?;
    let s = SweepSettings { jobs: args.jobs, ..plan.settings.clone() };
    for &tau in &plan.taus {
        let series = simulate_point(&plan.base, tau, plan.deltas[0], &s)?;
        write_atomic(&dir.join(format!("series_tau_{tau}.csv")), &series_csv(&series)?)?;
    }
    write_sweep(&dir.join("lifetime"), &plan, &result, &manifest.options(&plan).params(plan.base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::parse_program;

    #[test]
    fn recipes_are_valid() {
        for (name, text) in RECIPES {
            if name.ends_with(".edtc") {
                parse_program(text).unwrap().compile().unwrap();
            } else {
                parse_config(text).unwrap().plan(None).unwrap();
            }
        }
    }

    #[test]
    fn fig1_recipe_matches_caption() {
        let (p, seq) = load_sequence("fig1", recipe("fig1.edtc")).unwrap();
        assert_eq!((p.t1(), p.t2(), p.m_eq()), (100.0, 1.0, 0.8));
        assert_eq!(seq.tau(), 10.0);
        assert!((seq.initial().mz + 0.9 * 0.8).abs() < 1e-15);
        assert_eq!(seq.pulse().unwrap().delta(), 0.0);
    }
}
