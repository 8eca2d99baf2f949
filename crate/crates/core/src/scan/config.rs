//! Job configuration: a `[job]` section of `key = value` lines.
//!
//! ```text
//! # zero-temperature fidelity of the triplet pair
//! [job]
//! command = fidelity-map
//! model = triplet_product
//! q1.t = 1
//! q1.mu = -3
//! q1.mz = 0.5
//! q1.delta_t = 0.6
//! q2.t = 1
//! q2.mu = -0.1
//! q2.mz = 0.5
//! q2.delta_t = 0.6
//! beta = inf
//! grid = 201x201
//! out.csv = triplet.csv
//! out.pgm = triplet.pgm
//! ```
//!
//! Numbers accept `pi` multiples such as `pi/2`, `-2pi/3` or `0.5*pi`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fidelity::Beta;
use crate::grid::DEFAULT_GRID;
use crate::model::{ModelId, ModelSpec, ParamPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    FidelityMap,
    GapMap,
    Chern,
    Z2,
    Segment,
    CriticalLine,
    Counterexamples,
    Ising,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::FidelityMap,
        Command::GapMap,
        Command::Chern,
        Command::Z2,
        Command::Segment,
        Command::CriticalLine,
        Command::Counterexamples,
        Command::Ising,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::FidelityMap => "fidelity-map",
            Command::GapMap => "gap-map",
            Command::Chern => "chern",
            Command::Z2 => "z2",
            Command::Segment => "segment",
            Command::CriticalLine => "critical-line",
            Command::Counterexamples => "counterexamples",
            Command::Ising => "ising",
        }
    }

    fn needs_model(self) -> bool {
        !matches!(self, Command::Counterexamples | Command::Ising)
    }

    fn needs_q1(self) -> bool {
        self != Command::Counterexamples
    }

    /// Output kinds the command can emit.
    pub fn outputs(self) -> &'static [OutputKind] {
        match self {
            Command::FidelityMap | Command::GapMap => {
                &[OutputKind::Csv, OutputKind::Pgm, OutputKind::Report]
            }
            Command::Segment | Command::Counterexamples | Command::Ising => {
                &[OutputKind::Csv, OutputKind::Report]
            }
            Command::Chern | Command::Z2 | Command::CriticalLine => &[OutputKind::Report],
        }
    }

    fn needs_q2(self) -> bool {
        matches!(
            self,
            Command::FidelityMap | Command::Segment | Command::CriticalLine | Command::Ising
        )
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{s}`")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputKind {
    Csv,
    Pgm,
    Report,
}

impl OutputKind {
    pub fn name(self) -> &'static str {
        match self {
            OutputKind::Csv => "csv",
            OutputKind::Pgm => "pgm",
            OutputKind::Report => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanJob {
    pub command: Command,
    pub model: Option<ModelId>,
    pub q1: ParamPoint,
    pub q2: Option<ParamPoint>,
    pub beta: Beta,
    /// `(nx, ny)`; `ny = 1` for 1D models.
    pub grid: (usize, usize),
    pub kx_range: Option<[f64; 2]>,
    pub ky_range: Option<[f64; 2]>,
    pub kz: f64,
    pub tol: f64,
    pub n_s: usize,
    /// Momentum for `critical-line`.
    pub k: Option<Vec<f64>>,
    pub outputs: Vec<(OutputKind, String)>,
}

impl ScanJob {
    pub fn new(command: Command) -> Self {
        ScanJob {
            command,
            model: None,
            q1: ParamPoint::new(),
            q2: None,
            beta: Beta::Infinite,
            grid: (DEFAULT_GRID, DEFAULT_GRID),
            kx_range: None,
            ky_range: None,
            kz: 0.0,
            tol: 1e-8,
            n_s: 120,
            k: None,
            outputs: Vec::new(),
        }
    }

    pub fn model_spec(&self) -> Option<ModelSpec> {
        self.model.map(ModelSpec::get)
    }

    pub fn output(&self, kind: OutputKind) -> Option<&str> {
        self.outputs
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, p)| p.as_str())
    }
}

/// Parses `pi` expressions: `[sign][number][*]pi[/number]` or a plain number.
pub fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    if lower == "inf" || lower == "+inf" || lower == "-inf" || lower == "nan" {
        return Err(format!("`{text}` is not a finite number"));
    }
    if let Ok(v) = lower.parse::<f64>() {
        return Ok(v);
    }
    let Some(at) = lower.find("pi") else {
        return Err(format!("`{text}` is not a number"));
    };
    let (head, tail) = (&lower[..at], &lower[at + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h
            .parse::<f64>()
            .map_err(|_| format!("`{text}` is not a number"))?,
    };
    let div = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .ok_or_else(|| format!("`{text}` is not a number"))?,
    };
    let v = coef * std::f64::consts::PI / div;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` is not a finite number"))
    }
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',').map(parse_number).collect()
}

fn parse_range(text: &str) -> std::result::Result<[f64; 2], String> {
    match parse_list(text)?.as_slice() {
        [a, b] if a <= b => Ok([*a, *b]),
        _ => Err(format!("`{text}` is not a range `lo, hi`")),
    }
}

fn parse_grid(text: &str) -> std::result::Result<(usize, usize), String> {
    let t = text.trim();
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("`{text}` is not a grid size"))
    };
    match t.split_once('x') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(t)?;
            Ok((n, n))
        }
    }
}

const KEYS: &[&str] = &[
    "command", "model", "beta", "grid", "kx_range", "ky_range", "kz", "tol", "n_s", "k",
];

/// Parses a config; `lines` of `--set` overrides are applied after the file.
pub fn parse_config(text: &str) -> Result<ScanJob> {
    parse_config_with(text, &[], None)
}

/// Parses a config with `key=value` overrides and an optional command given
/// outside the file. A command named both ways must agree.
pub fn parse_config_with(
    text: &str,
    overrides: &[String],
    command: Option<Command>,
) -> Result<ScanJob> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut in_job = false;
    let mut saw_job = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[job]" {
                return Err(Error::config(line_no, format!("unknown section `{line}`")));
            }
            if saw_job {
                return Err(Error::config(line_no, "duplicate [job] section"));
            }
            in_job = true;
            saw_job = true;
            continue;
        }
        if !in_job {
            return Err(Error::config(line_no, "key outside the [job] section"));
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config(line_no, format!("expected `key = value`, got `{line}`"))
        })?;
        entries.push((line_no, k.trim().to_string(), v.trim().to_string()));
    }
    if !saw_job {
        return Err(Error::config(0, "missing [job] section"));
    }
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::config(0, format!("override `{o}` is not `key=value`")))?;
        entries.push((0, k.trim().to_string(), v.trim().to_string()));
    }

    let mut seen: Vec<String> = Vec::new();
    let mut last: Vec<(usize, String, String)> = Vec::new();
    for (line, k, v) in entries.into_iter().rev() {
        if !seen.contains(&k) {
            seen.push(k.clone());
            last.push((line, k, v));
        } else if line != 0 && last.iter().any(|(l, key, _)| *l != 0 && *key == k) {
            return Err(Error::config(line, format!("duplicate key `{k}`")));
        }
    }
    last.reverse();

    let cmd_entry = last.iter().find(|(_, k, _)| k == "command");
    let command = match (cmd_entry, command) {
        (Some((line, _, v)), given) => {
            let c: Command = v
                .parse()
                .map_err(|e: Error| Error::config(*line, e.to_string()))?;
            if let Some(g) = given {
                if g != c {
                    return Err(Error::config(
                        *line,
                        format!("config command `{c}` conflicts with `{g}`"),
                    ));
                }
            }
            c
        }
        (None, Some(g)) => g,
        (None, None) => return Err(Error::config(0, "missing required key `command`")),
    };

    let mut job = ScanJob::new(command);
    let mut q1 = ParamPoint::new();
    let mut q2 = ParamPoint::new();
    let mut grid_line = None;
    for (line, key, value) in &last {
        let line = *line;
        let bad = |msg: String| Error::config(line, format!("`{key}`: {msg}"));
        if let Some(name) = key.strip_prefix("q1.") {
            q1.set(name, parse_number(value).map_err(bad)?);
            continue;
        }
        if let Some(name) = key.strip_prefix("q2.") {
            q2.set(name, parse_number(value).map_err(bad)?);
            continue;
        }
        if let Some(kind) = key.strip_prefix("out.") {
            let kind = match kind {
                "csv" => OutputKind::Csv,
                "pgm" => OutputKind::Pgm,
                "report" => OutputKind::Report,
                _ => return Err(Error::config(line, format!("unknown output kind `{key}`"))),
            };
            if value.is_empty() {
                return Err(bad("empty path".into()));
            }
            if !command.outputs().contains(&kind) {
                return Err(Error::config(
                    line,
                    format!("`{command}` cannot emit `{key}`"),
                ));
            }
            if job.outputs.iter().any(|(k, _)| *k == kind) {
                return Err(Error::config(line, format!("duplicate key `{key}`")));
            }
            job.outputs.push((kind, value.clone()));
            continue;
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::config(line, format!("unknown key `{key}`")));
        }
        match key.as_str() {
            "command" => {}
            "model" => {
                job.model = Some(
                    value
                        .parse()
                        .map_err(|e: Error| Error::config(line, e.to_string()))?,
                )
            }
            "beta" => {
                job.beta = if value == "inf" {
                    Beta::Infinite
                } else {
                    Beta::finite(parse_number(value).map_err(bad)?)
                        .map_err(|e| Error::config(line, e.to_string()))?
                }
            }
            "grid" => {
                job.grid = parse_grid(value).map_err(bad)?;
                grid_line = Some((line, value.clone()));
            }
            "kx_range" => job.kx_range = Some(parse_range(value).map_err(bad)?),
            "ky_range" => job.ky_range = Some(parse_range(value).map_err(bad)?),
            "kz" => job.kz = parse_number(value).map_err(bad)?,
            "tol" => {
                let t = parse_number(value).map_err(bad)?;
                if t <= 0.0 {
                    return Err(bad("tolerance must be positive".into()));
                }
                job.tol = t;
            }
            "n_s" => {
                job.n_s = value
                    .parse::<usize>()
                    .ok()
                    .filter(|n| *n >= 2)
                    .ok_or_else(|| bad("need an integer >= 2".into()))?
            }
            "k" => job.k = Some(parse_list(value).map_err(bad)?),
            _ => unreachable!("key list covers every arm"),
        }
    }

    if job.command == Command::Ising {
        match job.model {
            None => job.model = Some(ModelId::IsingTf),
            Some(ModelId::IsingTf) => {}
            Some(m) => {
                return Err(Error::config(
                    0,
                    format!("ising runs on ising_tf, not `{m}`"),
                ));
            }
        }
    }
    if job.command.needs_model() && job.model.is_none() {
        return Err(Error::config(0, "missing required key `model`"));
    }
    if job.command == Command::Z2 && job.model != Some(ModelId::Dirac3dTi) {
        return Err(Error::config(0, "z2 needs model = dirac3d_ti"));
    }
    if job.command == Command::Chern {
        let m = job.model_spec().expect("checked above");
        if m.dim_k != 2 || m.dim_h != 3 || m.is_composite() {
            return Err(Error::config(
                0,
                format!("chern needs a 2D two-band model, not `{}`", m.name()),
            ));
        }
    }
    if job.command == Command::CriticalLine && job.k.is_none() {
        return Err(Error::config(0, "missing required key `k`"));
    }
    if job.command != Command::Counterexamples {
        let spec = job.model_spec().expect("checked above");
        if let Some(k) = &job.k {
            if k.len() != spec.dim_k {
                return Err(Error::config(
                    0,
                    format!(
                        "`k` has {} components, `{}` needs {}",
                        k.len(),
                        spec.name(),
                        spec.dim_k
                    ),
                ));
            }
        }
        if spec.dim_k == 1 {
            if let Some((line, v)) = &grid_line {
                if v.contains('x') && job.grid.1 != 1 {
                    return Err(Error::config(
                        *line,
                        format!("1D model `{}` takes `grid = n`", spec.name()),
                    ));
                }
            }
            job.grid.1 = 1;
        }
    }

    if job.command.needs_q1() {
        if q1.is_empty() {
            return Err(Error::config(0, "missing required parameters `q1.*`"));
        }
        let spec = job.model_spec().expect("checked above");
        spec.resolve(&q1)
            .map_err(|e| Error::config(0, format!("q1: {e}")))?;
        job.q1 = q1;
    } else if !q1.is_empty() {
        return Err(Error::config(
            0,
            format!("`{}` takes no parameters", job.command),
        ));
    }
    if job.command.needs_q2() {
        if q2.is_empty() {
            return Err(Error::config(0, "missing required parameters `q2.*`"));
        }
        let spec = job.model_spec().expect("checked above");
        spec.resolve(&q2)
            .map_err(|e| Error::config(0, format!("q2: {e}")))?;
        job.q2 = Some(q2);
    } else if !q2.is_empty() {
        return Err(Error::config(
            0,
            format!("`{}` takes no `q2.*`", job.command),
        ));
    }
    Ok(job)
}

impl fmt::Display for ScanJob {
    /// The effective configuration; parses back to the same job.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[job]")?;
        writeln!(f, "command = {}", self.command)?;
        if let Some(m) = self.model {
            writeln!(f, "model = {m}")?;
        }
        for (k, v) in self.q1.iter() {
            writeln!(f, "q1.{k} = {v:?}")?;
        }
        if let Some(q2) = &self.q2 {
            for (k, v) in q2.iter() {
                writeln!(f, "q2.{k} = {v:?}")?;
            }
        }
        match self.beta {
            Beta::Infinite => writeln!(f, "beta = inf")?,
            Beta::Finite(ctx) => writeln!(f, "beta = {:?}", ctx.beta())?,
        }
        if self.grid.1 == 1 && self.model_spec().is_some_and(|m| m.dim_k == 1) {
            writeln!(f, "grid = {}", self.grid.0)?;
        } else {
            writeln!(f, "grid = {}x{}", self.grid.0, self.grid.1)?;
        }
        if let Some([a, b]) = self.kx_range {
            writeln!(f, "kx_range = {a:?}, {b:?}")?;
        }
        if let Some([a, b]) = self.ky_range {
            writeln!(f, "ky_range = {a:?}, {b:?}")?;
        }
        writeln!(f, "kz = {:?}", self.kz)?;
        writeln!(f, "tol = {:?}", self.tol)?;
        writeln!(f, "n_s = {}", self.n_s)?;
        if let Some(k) = &self.k {
            let parts: Vec<String> = k.iter().map(|v| format!("{v:?}")).collect();
            writeln!(f, "k = {}", parts.join(", "))?;
        }
        for (kind, path) in &self.outputs {
            writeln!(f, "out.{} = {path}", kind.name())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TRIPLET_PAIR: &str = "\
# triplet pair
[job]
command = fidelity-map
model = triplet_product
q1.t = 1
q1.mu = -3
q1.mz = 0.5
q1.delta_t = 0.6
q2.t = 1
q2.mu = -0.1
q2.mz = 0.5
q2.delta_t = 0.6
";

    #[test]
    fn minimal_fidelity_map() {
        let job = parse_config(TRIPLET_PAIR).unwrap();
        assert_eq!(job.command, Command::FidelityMap);
        assert_eq!(job.model, Some(ModelId::TripletProduct));
        assert_eq!(job.q1.get("mu"), Some(-3.0));
        assert_eq!(job.q2.as_ref().unwrap().get("mu"), Some(-0.1));
        assert_eq!(job.grid, (201, 201));
        assert_eq!(job.beta, Beta::Infinite);
        assert_eq!(job.tol, 1e-8);
    }

    #[test]
    fn finite_beta() {
        let job = parse_config(&format!("{TRIPLET_PAIR}beta = 4.0\n")).unwrap();
        match job.beta {
            Beta::Finite(ctx) => assert_eq!(1.0 / ctx.beta(), 0.25),
            Beta::Infinite => panic!("expected finite beta"),
        }
    }

    #[test]
    fn misspelled_parameter_names_key_and_line() {
        let text = TRIPLET_PAIR.replace("q1.mu = -3", "q1.mui = -3");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("mui"), "{err}");
        let text = format!("{TRIPLET_PAIR}mui = -3\n");
        match parse_config(&text).unwrap_err() {
            Error::Config { line, msg } => {
                assert_eq!(line, 13);
                assert!(msg.contains("mui"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn pi_expressions() {
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_number("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_number("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_number("1e-3").unwrap(), 1e-3);
        assert!(parse_number("pie").is_err());
        assert!(parse_number("inf").is_err());
    }

    #[test]
    fn overrides_and_command_flag() {
        let text = TRIPLET_PAIR.replace("command = fidelity-map\n", "");
        let job = parse_config_with(
            &text,
            &["q2.mu=0".into(), "grid=51x41".into()],
            Some(Command::FidelityMap),
        )
        .unwrap();
        assert_eq!(job.q2.unwrap().get("mu"), Some(0.0));
        assert_eq!(job.grid, (51, 41));
        assert!(parse_config_with(TRIPLET_PAIR, &[], Some(Command::GapMap)).is_err());
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn structural_errors() {
        assert!(parse_config("command = z2\n").is_err());
        assert!(parse_config("[job]\n[job]\n").is_err());
        assert!(parse_config("[other]\n").is_err());
        assert!(parse_config("[job]\ncommand = z2\nmodel = haldane\nq1.t1 = 1\n").is_err());
        assert!(parse_config(&TRIPLET_PAIR.replace("q2.delta_t = 0.6\n", "")).is_err());
        assert!(parse_config(&format!("{TRIPLET_PAIR}q1.mu = 2\n")).is_err());
        assert!(parse_config(&format!("{TRIPLET_PAIR}out.png = x.png\n")).is_err());
        assert!(parse_config("[job]\ncommand = gap-map\nmodel = nope\n").is_err());
    }

    #[test]
    fn display_round_trips() {
        let mut job = parse_config(&format!(
            "{TRIPLET_PAIR}beta = 3.7\ngrid = 31x17\nout.csv = a.csv\nkx_range = 0, pi\n"
        ))
        .unwrap();
        job.k = Some(vec![PI, 0.0]);
        let back = parse_config(&job.to_string()).unwrap();
        assert_eq!(back, job);
    }
}
