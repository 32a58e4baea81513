//! Flags, `key = value` config files, and the validated [`Command`].
//!
//! A config file supplies defaults for the flags of one subcommand; any flag
//! given on the command line wins. Flags that select among alternatives
//! (`t`/`z`, and the three ways of choosing ℓ) override as a group.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use frobtrace::arith::is_prime;
use frobtrace::curve::TraceMethod;
use frobtrace::group_lab::LemmaId;
use frobtrace::survey::{EllQuery, Target};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "frobtrace",
    version,
    about = "Frobenius trace surveys and GL2 subgroup verification"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    sub: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Verify a structural property of the Borel, unipotent and torus subgroups exhaustively.
    GroupVerify(GroupVerifyFlags),
    /// Frobenius traces of every catalog curve at one prime.
    Trace(TraceFlags),
    /// Trace statistics over all primes up to x.
    Survey(SurveyFlags),
    /// Evaluate the closed-form bounds and schedule on an x-grid.
    Bounds(BoundsFlags),
    /// Combine survey outputs with the bounds on a shared x-grid.
    Report(ReportFlags),
}

#[derive(Args, Debug)]
struct GroupVerifyFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ell: Option<u64>,
    #[arg(long)]
    g: Option<usize>,
    /// One of L4.1, L4.3, L5.1, L5.3, L5.4, C2.2-hyp.
    #[arg(long)]
    lemma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<i64>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    xi: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TraceFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog file, one `label: a1,a2,a3,a4,a6` per line.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    /// auto, exhaustive or bsgs.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SurveyFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long)]
    x: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<i64>,
    /// Count |a_{1,p}| <= z instead of a single target.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    ell: Option<u64>,
    /// `y,u`: every usable prime in [y, y + u].
    #[arg(long)]
    ell_range: Option<String>,
    /// `strict` or `clamped`: the window from the parameter schedule at x.
    #[arg(long)]
    ell_schedule: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    grid_steps: Option<usize>,
    /// Prime bound for the isogeny and CM heuristics.
    #[arg(long)]
    probe: Option<u64>,
    /// Binary trace cache, created if missing.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// `.json` for the full report; `.csv` for the per-ℓ table with an ℓ window, else the histogram.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `a,b,steps`: steps + 1 evenly spaced points from a to b.
    #[arg(long)]
    x_grid: Option<String>,
    #[arg(long)]
    g: Option<usize>,
    /// Use the t = 0 exponents.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    t0: Option<bool>,
    #[arg(long)]
    constant: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Survey JSON outputs.
    #[arg(long, num_args = 1..)]
    inputs: Option<Vec<PathBuf>>,
    /// `.csv` or `.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupVerifyCmd {
    pub ell: u64,
    pub g: usize,
    pub lemma: LemmaId,
    pub t: Option<i64>,
    pub z: Option<f64>,
    pub xi: Option<u32>,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceCmd {
    pub curves: PathBuf,
    pub p: u64,
    pub method: TraceMethod,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyCmd {
    pub curves: PathBuf,
    pub x: u64,
    pub target: Target,
    pub ell: Option<EllQuery>,
    pub eps: f64,
    pub threads: usize,
    pub seed: u64,
    pub method: TraceMethod,
    pub grid_steps: usize,
    pub probe: u64,
    pub cache: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsCmd {
    pub a: f64,
    pub b: f64,
    pub steps: usize,
    pub g: usize,
    pub t0: bool,
    pub constant: f64,
    pub eps: f64,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportCmd {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
}

/// A validated invocation: exactly one subcommand with range-checked parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    GroupVerify(GroupVerifyCmd),
    Trace(TraceCmd),
    Survey(SurveyCmd),
    Bounds(BoundsCmd),
    Report(ReportCmd),
}

/// Where a run's parameters came from, for the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub path: PathBuf,
    pub entries: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<ConfigEcho>,
    /// Command-line arguments after the program name.
    pub flags: Vec<String>,
}

pub const DEFAULT_EPSILON: f64 = frobtrace::bounds::DEFAULT_EPSILON;
pub const DEFAULT_GRID_STEPS: usize = 10;
pub const DEFAULT_PROBE: u64 = 1000;

const EXCLUSIVE_GROUPS: &[&[&str]] = &[&["t", "z"], &["ell", "ell-range", "ell-schedule"]];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("missing required parameter `{key}`")))
}

fn check_ell(ell: u64) -> Result<u64, CliError> {
    if ell < 3 || !is_prime(ell) {
        return Err(usage(format!("ell must be an odd prime (got {ell})")));
    }
    Ok(ell)
}

fn check_eps(eps: f64) -> Result<f64, CliError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(usage(format!("eps must be positive (got {eps})")));
    }
    Ok(eps)
}

fn parse_method(s: Option<String>) -> Result<TraceMethod, CliError> {
    s.map_or(Ok(TraceMethod::Auto), |s| {
        s.parse()
            .map_err(|_| usage(format!("method: unknown value `{s}`")))
    })
}

fn method_name(m: TraceMethod) -> &'static str {
    match m {
        TraceMethod::Auto => "auto",
        TraceMethod::Exhaustive => "exhaustive",
        TraceMethod::Bsgs => "bsgs",
    }
}

fn parse_floats<const N: usize>(s: &str, key: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || {
        usage(format!(
            "{key}: expected {N} comma-separated numbers, got `{s}`"
        ))
    };
    if parts.len() != N {
        return Err(bad());
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad())?;
    }
    Ok(out)
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Sub {
    fn name(&self) -> &'static str {
        match self {
            Sub::GroupVerify(_) => "group-verify",
            Sub::Trace(_) => "trace",
            Sub::Survey(_) => "survey",
            Sub::Bounds(_) => "bounds",
            Sub::Report(_) => "report",
        }
    }

    fn config_path(&self) -> Option<&Path> {
        match self {
            Sub::GroupVerify(f) => f.config.as_deref(),
            Sub::Trace(f) => f.config.as_deref(),
            Sub::Survey(f) => f.config.as_deref(),
            Sub::Bounds(f) => f.config.as_deref(),
            Sub::Report(f) => f.config.as_deref(),
        }
    }

    fn into_command(self) -> Result<Command, CliError> {
        Ok(match self {
            Sub::GroupVerify(f) => {
                let lemma = required(f.lemma, "lemma")?;
                let g = required(f.g, "g")?;
                if g == 0 {
                    return Err(usage("g must be at least 1"));
                }
                if let Some(z) = f.z {
                    if !(z > 0.0 && z.is_finite()) {
                        return Err(usage(format!("z must be positive (got {z})")));
                    }
                }
                let lemma: LemmaId = lemma
                    .parse()
                    .map_err(|_| usage(format!("lemma: unknown id `{lemma}`")))?;
                if f.t.is_none() && matches!(lemma, LemmaId::L5_1 | LemmaId::L5_3 | LemmaId::L5_4) {
                    return Err(usage(format!("lemma {} needs --t", lemma.as_str())));
                }
                Command::GroupVerify(GroupVerifyCmd {
                    ell: check_ell(required(f.ell, "ell")?)?,
                    g,
                    lemma,
                    t: f.t,
                    z: f.z,
                    xi: f.xi,
                    out: required(f.out, "out")?,
                })
            }
            Sub::Trace(f) => {
                let p = required(f.p, "p")?;
                if !is_prime(p) {
                    return Err(usage(format!("p must be prime (got {p})")));
                }
                Command::Trace(TraceCmd {
                    curves: required(f.curves, "curves")?,
                    p,
                    method: parse_method(f.method)?,
                    seed: f.seed.unwrap_or(0),
                    out: f.out,
                })
            }
            Sub::Survey(f) => {
                let x = required(f.x, "x")?;
                if x < 3 {
                    return Err(usage(format!("x must be at least 3 (got {x})")));
                }
                let target = match (f.t, f.z) {
                    (Some(_), Some(_)) => return Err(usage("t and z are mutually exclusive")),
                    (_, Some(z)) if !(z >= 0.0 && z.is_finite()) => {
                        return Err(usage(format!("z must be non-negative (got {z})")))
                    }
                    (_, Some(z)) => Target::UpTo(z),
                    (t, None) => Target::Exact(t.unwrap_or(0)),
                };
                let ell = match (f.ell, f.ell_range, f.ell_schedule) {
                    (None, None, None) => None,
                    (Some(l), None, None) => Some(EllQuery::Single(check_ell(l)?)),
                    (None, Some(r), None) => {
                        let [y, u] = parse_floats::<2>(&r, "ell-range")?;
                        if !(u >= 0.0) {
                            return Err(usage("ell-range: u must be non-negative"));
                        }
                        Some(EllQuery::Window { y, u })
                    }
                    (None, None, Some(mode)) => Some(EllQuery::Schedule {
                        clamp: match mode.as_str() {
                            "strict" => false,
                            "clamped" => true,
                            _ => {
                                return Err(usage(format!(
                                    "ell-schedule: expected strict or clamped, got `{mode}`"
                                )))
                            }
                        },
                    }),
                    _ => {
                        return Err(usage(
                            "ell, ell-range and ell-schedule are mutually exclusive",
                        ))
                    }
                };
                let threads = f.threads.unwrap_or_else(default_threads);
                if threads == 0 {
                    return Err(usage("threads must be at least 1"));
                }
                let grid_steps = f.grid_steps.unwrap_or(DEFAULT_GRID_STEPS);
                if grid_steps == 0 {
                    return Err(usage("grid-steps must be at least 1"));
                }
                let probe = f.probe.unwrap_or(DEFAULT_PROBE);
                if probe < frobtrace::survey::MIN_PROBE_BOUND {
                    return Err(usage(format!(
                        "probe must be at least {}",
                        frobtrace::survey::MIN_PROBE_BOUND
                    )));
                }
                Command::Survey(SurveyCmd {
                    curves: required(f.curves, "curves")?,
                    x,
                    target,
                    ell,
                    eps: check_eps(f.eps.unwrap_or(DEFAULT_EPSILON))?,
                    threads,
                    seed: f.seed.unwrap_or(0),
                    method: parse_method(f.method)?,
                    grid_steps,
                    probe,
                    cache: f.cache,
                    out: required(f.out, "out")?,
                })
            }
            Sub::Bounds(f) => {
                let grid = required(f.x_grid, "x-grid")?;
                let [a, b, steps] = parse_floats::<3>(&grid, "x-grid")?;
                if !(a > std::f64::consts::E && b > a) {
                    return Err(usage("x-grid: need e < a < b"));
                }
                if !(steps >= 1.0 && steps.fract() == 0.0 && steps <= 1e7) {
                    return Err(usage("x-grid: steps must be a positive integer"));
                }
                let g = required(f.g, "g")?;
                if g == 0 {
                    return Err(usage("g must be at least 1"));
                }
                let constant = f.constant.unwrap_or(1.0);
                if !(constant > 0.0 && constant.is_finite()) {
                    return Err(usage(format!("constant must be positive (got {constant})")));
                }
                Command::Bounds(BoundsCmd {
                    a,
                    b,
                    steps: steps as usize,
                    g,
                    t0: f.t0.unwrap_or(false),
                    constant,
                    eps: check_eps(f.eps.unwrap_or(DEFAULT_EPSILON))?,
                    out: required(f.out, "out")?,
                })
            }
            Sub::Report(f) => {
                let inputs = f.inputs.unwrap_or_default();
                if inputs.is_empty() {
                    return Err(usage("report needs at least one input"));
                }
                Command::Report(ReportCmd {
                    inputs,
                    out: required(f.out, "out")?,
                })
            }
        })
    }
}

fn path_arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

impl Command {
    /// Arguments (without the program name) that parse back to `self`.
    pub fn to_args(&self) -> Vec<String> {
        let mut a: Vec<String> = Vec::new();
        let mut push = |k: &str, v: String| {
            a.push(format!("--{k}"));
            a.push(v);
        };
        let sub = match self {
            Command::GroupVerify(c) => {
                push("ell", c.ell.to_string());
                push("g", c.g.to_string());
                push("lemma", c.lemma.as_str().to_string());
                if let Some(t) = c.t {
                    push("t", t.to_string());
                }
                if let Some(z) = c.z {
                    push("z", z.to_string());
                }
                if let Some(xi) = c.xi {
                    push("xi", xi.to_string());
                }
                push("out", path_arg(&c.out));
                "group-verify"
            }
            Command::Trace(c) => {
                push("curves", path_arg(&c.curves));
                push("p", c.p.to_string());
                push("method", method_name(c.method).into());
                push("seed", c.seed.to_string());
                if let Some(o) = &c.out {
                    push("out", path_arg(o));
                }
                "trace"
            }
            Command::Survey(c) => {
                push("curves", path_arg(&c.curves));
                push("x", c.x.to_string());
                match c.target {
                    Target::Exact(t) => push("t", t.to_string()),
                    Target::UpTo(z) => push("z", z.to_string()),
                }
                match c.ell {
                    None => {}
                    Some(EllQuery::Single(l)) => push("ell", l.to_string()),
                    Some(EllQuery::Window { y, u }) => push("ell-range", format!("{y},{u}")),
                    Some(EllQuery::Schedule { clamp }) => push(
                        "ell-schedule",
                        if clamp { "clamped" } else { "strict" }.into(),
                    ),
                }
                push("eps", c.eps.to_string());
                push("threads", c.threads.to_string());
                push("seed", c.seed.to_string());
                push("method", method_name(c.method).into());
                push("grid-steps", c.grid_steps.to_string());
                push("probe", c.probe.to_string());
                if let Some(p) = &c.cache {
                    push("cache", path_arg(p));
                }
                push("out", path_arg(&c.out));
                "survey"
            }
            Command::Bounds(c) => {
                push("x-grid", format!("{},{},{}", c.a, c.b, c.steps));
                push("g", c.g.to_string());
                push("t0", c.t0.to_string());
                push("constant", c.constant.to_string());
                push("eps", c.eps.to_string());
                push("out", path_arg(&c.out));
                "bounds"
            }
            Command::Report(c) => {
                a.push("--inputs".into());
                a.extend(c.inputs.iter().map(|p| path_arg(p)));
                a.push("--out".into());
                a.push(path_arg(&c.out));
                "report"
            }
        };
        std::iter::once(sub.to_string()).chain(a).collect()
    }
}

/// Reads a flat `key = value` file; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Usage(m) => usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut entries = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("line {}: expected `key = value`", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if entries.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(entries)
}

/// Long flag names given on the command line, without `--` or `=value`.
fn given_keys(args: &[String]) -> Vec<String> {
    args.iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect()
}

/// Parses program arguments (including the program name), merging any config file.
pub fn parse_invocation<I, S>(args: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let first = Cli::try_parse_from(&args).map_err(CliError::Clap)?;
    let flags = args.get(1..).unwrap_or_default().to_vec();

    let Some(path) = first.sub.config_path().map(Path::to_path_buf) else {
        return Ok(Invocation {
            command: first.sub.into_command()?,
            config: None,
            flags,
        });
    };
    let entries = read_config(&path)?;
    let sub_name = first.sub.name();
    let cmd = Cli::command();
    let sub_cmd = cmd
        .find_subcommand(sub_name)
        .expect("parsed subcommand exists");
    let known: Vec<String> = sub_cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|k| k != "config" && k != "help")
        .collect();

    let given = given_keys(&flags[1..]);
    let mut injected = Vec::new();
    for (key, value) in &entries {
        if !known.contains(key) {
            return Err(usage(format!(
                "unknown config key `{key}` in {}",
                path.display()
            )));
        }
        let group: &[&str] = EXCLUSIVE_GROUPS
            .iter()
            .find(|g| g.contains(&key.as_str()))
            .copied()
            .unwrap_or(&[]);
        if given
            .iter()
            .any(|g| g == key || group.contains(&g.as_str()))
        {
            continue;
        }
        injected.push(format!("--{key}"));
        if key == "inputs" {
            injected.extend(value.split_whitespace().map(str::to_string));
        } else {
            injected.push(value.clone());
        }
    }
    let merged: Vec<String> = std::iter::once(args[0].clone())
        .chain(std::iter::once(sub_name.to_string()))
        .chain(injected)
        .chain(flags[1..].iter().cloned())
        .collect();
    let second = Cli::try_parse_from(&merged).map_err(CliError::Clap)?;
    Ok(Invocation {
        command: second.sub.into_command()?,
        config: Some(ConfigEcho { path, entries }),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Command, CliError> {
        parse_invocation(std::iter::once("frobtrace").chain(args.iter().copied()))
            .map(|i| i.command)
    }

    #[test]
    fn rejects_composite_ell() {
        let err = parse(&[
            "survey", "--curves", "c.txt", "--x", "100", "--ell", "9", "--out", "o.json",
        ])
        .unwrap_err();
        assert!(
            err.to_string().contains("ell must be an odd prime"),
            "{err}"
        );
        let err = parse(&[
            "group-verify",
            "--ell",
            "9",
            "--g",
            "1",
            "--lemma",
            "L4.1",
            "--out",
            "o.json",
        ])
        .unwrap_err();
        assert!(
            err.to_string().contains("ell must be an odd prime"),
            "{err}"
        );
    }

    #[test]
    fn minimal_survey() {
        let c = parse(&[
            "survey", "--curves", "c.txt", "--x", "1000", "--out", "o.json",
        ])
        .unwrap();
        match c {
            Command::Survey(s) => {
                assert_eq!(s.target, Target::Exact(0));
                assert_eq!(s.eps, DEFAULT_EPSILON);
                assert_eq!(s.ell, None);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_targets_parse() {
        let c = parse(&[
            "survey", "--curves", "c", "--x", "100", "--t", "-4", "--out", "o.csv",
        ])
        .unwrap();
        assert!(matches!(
            c,
            Command::Survey(SurveyCmd {
                target: Target::Exact(-4),
                ..
            })
        ));
    }

    #[test]
    fn range_checks() {
        let base = ["survey", "--curves", "c", "--out", "o.json"];
        let with = |extra: &[&str]| {
            let mut v = base.to_vec();
            v.extend_from_slice(extra);
            parse(&v)
        };
        assert!(with(&["--x", "2"]).is_err());
        assert!(with(&["--x", "100", "--eps", "0"]).is_err());
        assert!(with(&["--x", "100", "--t", "1", "--z", "2"]).is_err());
        assert!(with(&["--x", "100", "--ell", "5", "--ell-range", "3,4"]).is_err());
        assert!(with(&["--x", "100", "--ell-schedule", "loose"]).is_err());
        assert!(with(&["--x", "100"]).is_ok());
        assert!(parse(&["survey", "--curves", "c", "--x", "100"]).is_err());
    }

    #[test]
    fn config_parsing() {
        let m = parse_config("# comment\nx = 100\ngrid_steps=4 # trailing\n").unwrap();
        assert_eq!(m["x"], "100");
        assert_eq!(m["grid-steps"], "4");
        assert!(parse_config("x\n").is_err());
        assert!(parse_config("x = 1\nx = 2\n").is_err());
    }
}
