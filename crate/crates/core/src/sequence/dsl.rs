//! Line-oriented pulse-program language.
//!
//! ```text
//! program   := line*
//! line      := (directive | comment | blank) "\n"
//! directive := "unit" ("t2" | "seconds")
//!            | "params" kv+          # keys: t1, t2, tphi, meq, omega1
//!            | "init" ("mx="num)? ("my="num)? ("mz="num)?
//!            | "delay" num
//!            | "pulse" ("x"|"y") angle
//!            | "repeat" uint
//! angle     := num ("deg" | "rad" | "pi")
//! ```
//!
//! `auto` may stand for one of `t1`, `t2`, `tphi`; `tphi=inf` disables pure
//! dephasing. Times are in units of T2 unless `unit seconds` is given.
//! [`Program`] is the syntax tree; its `Display` impl is the canonical
//! pretty-printer and re-parses to an identical tree.

use std::f64::consts::PI;
use std::fmt;

use super::{PulseSequence, Segment, TimeUnit};
use crate::error::{Error, Result};
use crate::params::{validate_params, Dephasing, RawParams, SystemParams};
use crate::propagators::{Axis, PulseSpec};
use crate::state::Magnetization;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKey {
    T1,
    T2,
    Tphi,
    Meq,
    Omega1,
}

impl ParamKey {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "t1" => ParamKey::T1,
            "t2" => ParamKey::T2,
            "tphi" => ParamKey::Tphi,
            "meq" => ParamKey::Meq,
            "omega1" => ParamKey::Omega1,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::T1 => "t1",
            ParamKey::T2 => "t2",
            ParamKey::Tphi => "tphi",
            ParamKey::Meq => "meq",
            ParamKey::Omega1 => "omega1",
        }
    }

    fn is_timescale(self) -> bool {
        matches!(self, ParamKey::T1 | ParamKey::T2 | ParamKey::Tphi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamEntry {
    pub key: ParamKey,
    pub value: ParamValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Deg,
    Rad,
    Pi,
}

impl AngleUnit {
    fn suffix(self) -> &'static str {
        match self {
            AngleUnit::Deg => "deg",
            AngleUnit::Rad => "rad",
            AngleUnit::Pi => "pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub value: f64,
    pub unit: AngleUnit,
}

impl Angle {
    /// Deviation from π in radians, computed without forming θ first.
    pub fn delta(&self) -> f64 {
        match self.unit {
            AngleUnit::Deg => (self.value - 180.0) * (PI / 180.0),
            AngleUnit::Pi => (self.value - 1.0) * PI,
            AngleUnit::Rad => self.value - PI,
        }
    }

    pub fn radians(&self) -> f64 {
        PI + self.delta()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitSpec {
    pub mx: Option<f64>,
    pub my: Option<f64>,
    pub mz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentDirective {
    Delay(f64),
    Pulse { axis: Axis, angle: Angle },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub unit: Option<TimeUnit>,
    pub params: Vec<ParamEntry>,
    pub init: Option<InitSpec>,
    pub segments: Vec<SegmentDirective>,
    pub repeat: u64,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col0, (byte, ch)) in code.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, col0 + 1)),
            (true, Some((b, col))) => {
                tokens.push(Token { text: &code[b..byte], col });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b, col)) = start {
        tokens.push(Token { text: &code[b..], col });
    }
    tokens
}

struct LineCtx<'a> {
    line: usize,
    /// Column just past the last character, for "missing token" errors.
    end_col: usize,
    tokens: Vec<Token<'a>>,
}

impl LineCtx<'_> {
    fn syntax(&self, col: usize, expected: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col, expected: expected.into() }
    }

    fn unit_error(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Unit { line: self.line, col, message: message.into() }
    }

    fn token(&self, i: usize, expected: &str) -> Result<&Token<'_>> {
        self.tokens.get(i).ok_or_else(|| self.syntax(self.end_col, expected))
    }

    fn expect_end(&self, i: usize) -> Result<()> {
        match self.tokens.get(i) {
            Some(t) => Err(self.syntax(t.col, "end of line")),
            None => Ok(()),
        }
    }
}

fn parse_num(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    (!v.is_nan()).then_some(v)
}

fn split_kv<'a>(ctx: &LineCtx<'_>, tok: &Token<'a>) -> Result<(&'a str, &'a str, usize)> {
    match tok.text.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k, v, tok.col + k.chars().count() + 1)),
        _ => Err(ctx.syntax(tok.col, "key=value")),
    }
}

fn parse_params(ctx: &LineCtx<'_>) -> Result<Vec<ParamEntry>> {
    if ctx.tokens.len() < 2 {
        return Err(ctx.syntax(ctx.end_col, "key=value"));
    }
    let mut entries: Vec<ParamEntry> = Vec::new();
    let mut autos = 0;
    for tok in &ctx.tokens[1..] {
        let (k, v, vcol) = split_kv(ctx, tok)?;
        let key = ParamKey::parse(k).ok_or_else(|| ctx.syntax(tok.col, "one of t1, t2, tphi, meq, omega1"))?;
        if entries.iter().any(|e| e.key == key) {
            return Err(ctx.syntax(tok.col, format!("a key other than `{k}` (already given)")));
        }
        let value = if v == "auto" {
            if !key.is_timescale() {
                return Err(ctx.syntax(vcol, "number (`auto` is only allowed for t1, t2, tphi)"));
            }
            autos += 1;
            if autos > 1 {
                return Err(ctx.syntax(vcol, "number (`auto` may appear only once)"));
            }
            ParamValue::Auto
        } else {
            ParamValue::Num(parse_num(v).ok_or_else(|| ctx.syntax(vcol, "number"))?)
        };
        entries.push(ParamEntry { key, value });
    }
    if !entries.iter().any(|e| e.key == ParamKey::Meq) {
        return Err(ctx.syntax(ctx.end_col, "meq=<number>"));
    }
    Ok(entries)
}

fn parse_init(ctx: &LineCtx<'_>) -> Result<InitSpec> {
    let mut init = InitSpec::default();
    for tok in &ctx.tokens[1..] {
        let (k, v, vcol) = split_kv(ctx, tok)?;
        let slot = match k {
            "mx" => &mut init.mx,
            "my" => &mut init.my,
            "mz" => &mut init.mz,
            _ => return Err(ctx.syntax(tok.col, "one of mx, my, mz")),
        };
        if slot.is_some() {
            return Err(ctx.syntax(tok.col, format!("a component other than `{k}` (already given)")));
        }
        *slot = Some(parse_num(v).filter(|x| x.is_finite()).ok_or_else(|| ctx.syntax(vcol, "number"))?);
    }
    Ok(init)
}

fn parse_angle(ctx: &LineCtx<'_>, tok: &Token<'_>) -> Result<Angle> {
    for unit in [AngleUnit::Deg, AngleUnit::Rad, AngleUnit::Pi] {
        if let Some(num) = tok.text.strip_suffix(unit.suffix()) {
            let value = parse_num(num)
                .filter(|v| v.is_finite())
                .ok_or_else(|| ctx.syntax(tok.col, "angle such as 180deg, 3.14rad or 1.05pi"))?;
            return Ok(Angle { value, unit });
        }
    }
    if parse_num(tok.text).is_some() {
        Err(ctx.unit_error(tok.col, format!("angle `{}` needs a unit (deg, rad or pi)", tok.text)))
    } else {
        Err(ctx.syntax(tok.col, "angle such as 180deg, 3.14rad or 1.05pi"))
    }
}

/// Parses program text into a syntax tree.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut unit = None;
    let mut params = None;
    let mut init = None;
    let mut segments = Vec::new();
    let mut repeat = None;

    for (idx, raw) in text.lines().enumerate() {
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let code_len = raw.find('#').map_or(raw, |i| &raw[..i]).trim_end().chars().count();
        let ctx = LineCtx { line: idx + 1, end_col: code_len + 2, tokens };
        let head = &ctx.tokens[0];
        let duplicate = |name: &'static str| Error::DuplicateDirective { name, line: ctx.line };
        match head.text {
            "unit" => {
                if unit.is_some() {
                    return Err(duplicate("unit"));
                }
                let tok = ctx.token(1, "t2 or seconds")?;
                unit = Some(match tok.text {
                    "t2" => TimeUnit::T2,
                    "seconds" => TimeUnit::Seconds,
                    other => {
                        return Err(ctx.unit_error(tok.col, format!("unknown time unit `{other}` (use t2 or seconds)")))
                    }
                });
                ctx.expect_end(2)?;
            }
            "params" => {
                if params.is_some() {
                    return Err(duplicate("params"));
                }
                params = Some(parse_params(&ctx)?);
            }
            "init" => {
                if init.is_some() {
                    return Err(duplicate("init"));
                }
                init = Some(parse_init(&ctx)?);
            }
            "delay" => {
                let tok = ctx.token(1, "duration")?;
                let d = parse_num(tok.text)
                    .filter(|d| d.is_finite() && *d >= 0.0)
                    .ok_or_else(|| ctx.syntax(tok.col, "non-negative duration"))?;
                ctx.expect_end(2)?;
                segments.push(SegmentDirective::Delay(d));
            }
            "pulse" => {
                let tok = ctx.token(1, "axis x or y")?;
                let axis = match tok.text {
                    "x" => Axis::X,
                    "y" => Axis::Y,
                    _ => return Err(ctx.syntax(tok.col, "axis x or y")),
                };
                let angle = parse_angle(&ctx, ctx.token(2, "angle")?)?;
                ctx.expect_end(3)?;
                segments.push(SegmentDirective::Pulse { axis, angle });
            }
            "repeat" => {
                if repeat.is_some() {
                    return Err(duplicate("repeat"));
                }
                let tok = ctx.token(1, "positive integer")?;
                let n = tok
                    .text
                    .parse::<u64>()
                    .ok()
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| ctx.syntax(tok.col, "positive integer"))?;
                ctx.expect_end(2)?;
                repeat = Some(n);
            }
            _ => return Err(ctx.syntax(head.col, "directive (unit, params, init, delay, pulse or repeat)")),
        }
    }

    let params = params.ok_or(Error::MissingDirective("params"))?;
    if segments.is_empty() {
        return Err(Error::MissingDirective("pulse"));
    }
    let repeat = repeat.ok_or(Error::MissingDirective("repeat"))?;
    Ok(Program { unit, params, init, segments, repeat })
}

impl Program {
    pub fn time_unit(&self) -> TimeUnit {
        self.unit.unwrap_or_default()
    }

    fn param(&self, key: ParamKey) -> Option<f64> {
        self.params.iter().find(|e| e.key == key).and_then(|e| match e.value {
            ParamValue::Num(v) => Some(v),
            ParamValue::Auto => None,
        })
    }

    pub fn raw_params(&self) -> RawParams {
        RawParams {
            t1: self.param(ParamKey::T1),
            t2: self.param(ParamKey::T2),
            t_phi: self.param(ParamKey::Tphi).map(Dephasing::from_f64),
            m_eq: self.param(ParamKey::Meq).unwrap_or(f64::NAN),
            omega1: self.param(ParamKey::Omega1).unwrap_or_else(|| self.time_unit().default_omega1()),
        }
    }

    /// Validates the program and builds the parameters and sequence it describes.
    pub fn compile(&self) -> Result<(SystemParams, PulseSequence)> {
        let params = validate_params(self.raw_params())?;
        let segments = self
            .segments
            .iter()
            .map(|s| match *s {
                SegmentDirective::Delay(d) => Segment::Delay { duration: d },
                SegmentDirective::Pulse { axis, angle } => {
                    Segment::Pulse(PulseSpec::from_delta(axis, angle.delta(), params.omega1()))
                }
            })
            .collect();
        let initial = match self.init {
            Some(i) => Magnetization::new(i.mx.unwrap_or(0.0), i.my.unwrap_or(0.0), i.mz.unwrap_or(0.0)),
            None => Magnetization::longitudinal(-0.9 * params.m_eq()),
        };
        let seq = PulseSequence::new(segments, self.repeat, initial, self.time_unit())?;
        Ok((params, seq))
    }
}

/// Parses and validates a program.
pub fn parse_sequence(text: &str) -> Result<(SystemParams, PulseSequence)> {
    parse_program(text)?.compile()
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(unit) = self.unit {
            writeln!(f, "unit {}", unit.keyword())?;
        }
        f.write_str("params")?;
        for e in &self.params {
            match e.value {
                ParamValue::Num(v) => write!(f, " {}={}", e.key.name(), v)?,
                ParamValue::Auto => write!(f, " {}=auto", e.key.name())?,
            }
        }
        writeln!(f)?;
        if let Some(init) = &self.init {
            f.write_str("init")?;
            for (name, v) in [("mx", init.mx), ("my", init.my), ("mz", init.mz)] {
                if let Some(v) = v {
                    write!(f, " {name}={v}")?;
                }
            }
            writeln!(f)?;
        }
        for s in &self.segments {
            match s {
                SegmentDirective::Delay(d) => writeln!(f, "delay {d}")?,
                SegmentDirective::Pulse { axis, angle } => {
                    let axis = match axis {
                        Axis::X => "x",
                        Axis::Y => "y",
                    };
                    writeln!(f, "pulse {axis} {}{}", angle.value, angle.unit.suffix())?
                }
            }
        }
        writeln!(f, "repeat {}", self.repeat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "params t1=100 tphi=auto t2=1 meq=0.8\ninit mz=-0.72\ndelay 10\npulse y 180deg\nrepeat 200\n";

    #[test]
    fn fig1_program() {
        let (p, seq) = parse_sequence(FIG1).unwrap();
        assert_eq!(p.t1(), 100.0);
        assert_eq!(p.t2(), 1.0);
        assert_eq!(p.m_eq(), 0.8);
        assert_eq!(seq.cycles(), 200);
        assert_eq!(seq.tau(), 10.0);
        assert_eq!(seq.pulse().unwrap().delta(), 0.0);
        assert_eq!(seq.pulse().unwrap().theta(), PI);
        assert_eq!(seq.initial(), Magnetization::longitudinal(-0.72));
    }

    #[test]
    fn missing_params() {
        assert_eq!(parse_sequence("pulse y 180deg\nrepeat 3\n"), Err(Error::MissingDirective("params")));
        assert_eq!(parse_sequence("pulse y 180deg\n"), Err(Error::MissingDirective("params")));
    }

    #[test]
    fn degree_calibration_of_pulse_error() {
        let text = FIG1.replace("180deg", "192.132deg");
        let (_, seq) = parse_sequence(&text).unwrap();
        assert!((seq.pulse().unwrap().delta() - 0.0674 * PI).abs() < 1e-6);
        let text = FIG1.replace("180deg", "1.0674pi");
        let (_, seq) = parse_sequence(&text).unwrap();
        assert!((seq.pulse().unwrap().delta() - 0.0674 * PI).abs() < 1e-12);
    }

    #[test]
    fn default_initial_state() {
        let (p, seq) = parse_sequence("params t1=100 t2=1 meq=0.8\ndelay 10\npulse y 1pi\nrepeat 5").unwrap();
        assert_eq!(seq.initial(), Magnetization::longitudinal(-0.9 * p.m_eq()));
    }

    #[test]
    fn seconds_and_infinite_dephasing() {
        let (p, seq) =
            parse_sequence("unit seconds\nparams t1=1 tphi=inf meq=0.5\ndelay 0.025\npulse x 3.14rad\nrepeat 2")
                .unwrap();
        assert_eq!(p.t2(), 2.0);
        assert_eq!(p.t_phi(), Dephasing::Infinite);
        assert_eq!(seq.unit(), TimeUnit::Seconds);
        assert_eq!(p.omega1(), TimeUnit::Seconds.default_omega1());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text =
            "# Fig 1\n\n   params t1=100 t2=1 meq=0.8   # trailing\n\ndelay 10\npulse y 180deg\nrepeat 2 # two\n";
        assert!(parse_sequence(text).is_ok());
    }

    #[test]
    fn error_positions() {
        let cases: &[(&str, (usize, usize))] = &[
            ("params t1=100 t2=1 meq=0.8\ndelay ten\npulse y 180deg\nrepeat 2", (2, 7)),
            ("params t1=100 t2=1 meq=0.8\ndelay 1\npulse z 180deg\nrepeat 2", (3, 7)),
            ("params t1=100 t2=1 meq=0.8\ndelay 1\npulse y 180\nrepeat 2", (3, 9)),
            ("params t1=100 t2=1 meq=0.8\ndelay 1\npulse y 180deg\nrepeat 0", (4, 8)),
            ("params t1=100 t2=1 meq=0.8\nunit minutes\ndelay 1\npulse y 1pi\nrepeat 2", (2, 6)),
            ("params t1=100 t2=1 meq=0.8\nrepeat 2\ndelay 1\npulse y 1pi\nrepeat 2", (5, 1)),
            ("params t1=100 t9=1 meq=0.8\ndelay 1\npulse y 1pi\nrepeat 2", (1, 15)),
            ("params t1=auto t2=auto meq=0.8\ndelay 1\npulse y 1pi\nrepeat 2", (1, 19)),
            ("params t1=100 t2=1\ndelay 1\npulse y 1pi\nrepeat 2", (1, 20)),
            ("params t1=100 t2=1 meq=0.8\ndelay\npulse y 1pi\nrepeat 2", (2, 7)),
            ("params t1=100 t2=1 meq=0.8\nwait 1\npulse y 1pi\nrepeat 2", (2, 1)),
        ];
        for (text, pos) in cases {
            let err = parse_program(text).unwrap_err();
            assert_eq!(err.position(), Some(*pos), "{text:?} -> {err}");
        }
    }

    #[test]
    fn pretty_print_round_trip() {
        let text = "unit seconds\nparams tphi=auto t1=7.57 t2=0.6 meq=0.8 omega1=104929.19\ninit mx=0.1 mz=-0.5\ndelay 0.025\npulse y 192.132deg\ndelay 0.001\npulse x -0.5pi\nrepeat 400\n";
        let prog = parse_program(text).unwrap();
        assert_eq!(prog.to_string(), text);
        assert_eq!(parse_program(&prog.to_string()).unwrap(), prog);
    }

    #[test]
    fn validation_errors_surface_from_compile() {
        assert!(matches!(
            parse_sequence("params t1=1 t2=5 meq=0.8\ndelay 1\npulse y 1pi\nrepeat 2"),
            Err(Error::InconsistentT2 { .. })
        ));
        assert!(matches!(
            parse_sequence("params t1=1 t2=1 meq=0.8\ninit mx=0.9 mz=0.9\ndelay 1\npulse y 1pi\nrepeat 2"),
            Err(Error::MagnetizationOutOfRange(_))
        ));
    }
}
